//! Report emission: `sweep.csv` (one row per sweep point), `rates.json`
//! (fitted slopes, windows, verdict), and `plot.gp` (a gnuplot script drawing
//! the log-log error curves with fitted reference slopes).
//!
//! All numeric CSV fields are printed with `{:.16e}` (17 significant digits),
//! so a single-threaded rerun of the same config reproduces the file byte for
//! byte. Missing measurements print as `na`; a diverging smoother-space norm
//! prints as `inf`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ratedouble_core::{DoublingVerdict, RateFit, StudyReport};
use serde_json::{json, Value};

use crate::{CliError, Result};

pub const SWEEP_HEADER: &str = "setting,n,l2_err,l2_bound,h_err,h_bound,b_norm,audit_A,audit_B,flags";

pub fn render_sweep_csv(reports: &[&StudyReport]) -> String {
    let mut out = String::with_capacity(256 * (1 + reports.iter().map(|r| r.rows.len()).sum::<usize>()));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for rep in reports {
        for row in &rep.rows {
            let t = &row.triple;
            let (h_err, h_bound) = match &t.h {
                Some(m) => (format!("{:.16e}", m.value), format!("{:.16e}", m.bound)),
                None => ("na".to_string(), "na".to_string()),
            };
            let audit_a = match row.audit_a {
                Some(v) => format!("{v:.16e}"),
                None => "na".to_string(),
            };
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{},{},{},{:.16e},{}",
                rep.label,
                t.n,
                t.l2.value,
                t.l2.bound,
                h_err,
                h_bound,
                t.b_norm.as_csv(),
                audit_a,
                row.audit_b,
                t.flags.join(";")
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

fn fit_json(fit: &Option<RateFit>) -> Value {
    match fit {
        Some(f) => json!({
            "kappa_hat": f.kappa_hat,
            "c_hat": f.c_hat,
            "window": f.window,
            "residual": f.residual,
        }),
        None => Value::Null,
    }
}

pub fn render_rates_json(reports: &[&StudyReport], verdict: Option<&DoublingVerdict>) -> String {
    let reports_json: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "setting": r.setting.tag(),
                "space": r.space_id,
                "nodes": r.scheme_id,
                "target": r.target_id,
                "l2": fit_json(&r.l2_fit),
                "h": fit_json(&r.h_fit),
                "degenerate": r.degenerate,
                "audits_pass": r.audits_pass,
            })
        })
        .collect();
    let verdict_json = match verdict {
        Some(v) => json!({
            "rough_l2_kappa": v.rough_l2.kappa_hat,
            "smooth_l2_kappa": v.smooth_l2.kappa_hat,
            "smooth_h_kappa": v.smooth_h.as_ref().map(|f| f.kappa_hat),
            "slack": v.slack,
            "l2_deficit": v.l2_deficit,
            "h_deficit": v.h_deficit,
            "slopes_pass": v.slopes_pass,
            "audits_pass": v.audits_pass,
            "pass": v.pass() && v.audits_pass,
        }),
        None => Value::Null,
    };
    let doc = json!({ "reports": reports_json, "verdict": verdict_json });
    let mut text = serde_json::to_string_pretty(&doc).expect("report JSON is always serializable");
    text.push('\n');
    text
}

pub fn render_plot_script(reports: &[&StudyReport], verdict: Option<&DoublingVerdict>) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script: log-log error curves from sweep.csv with fitted\n");
    s.push_str("# reference slopes. Run as `gnuplot -p plot.gp` in this directory.\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile missing 'na'\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'n'\n");
    s.push_str("set ylabel 'error'\n");
    s.push_str("set grid xtics ytics\n");
    s.push_str("set key bottom left\n");
    let mut terms: Vec<String> = Vec::new();
    for rep in reports {
        terms.push(format!(
            "'sweep.csv' using 2:(strcol(1) eq '{0}' ? column(3) : NaN) \
             with linespoints pointtype 7 title '{0} L2'",
            rep.label
        ));
        if rep.rows.iter().any(|r| r.triple.h.is_some()) {
            terms.push(format!(
                "'sweep.csv' using 2:(strcol(1) eq '{0}' ? column(5) : NaN) \
                 with linespoints pointtype 5 title '{0} H'",
                rep.label
            ));
        }
        if let Some(fit) = &rep.l2_fit {
            terms.push(format!(
                "{:.6e} * x**(-{:.4}) dashtype 2 title '{} ref n^{{-{:.2}}}'",
                fit.c_hat, fit.kappa_hat, rep.label, fit.kappa_hat
            ));
        }
    }
    if let Some(v) = verdict {
        let doubled = 2.0 * v.rough_l2.kappa_hat;
        terms.push(format!(
            "{:.6e} * x**(-{:.4}) dashtype 3 title 'doubled ref n^{{-{:.2}}}'",
            v.smooth_l2.c_hat, doubled, doubled
        ));
    }
    s.push_str("plot \\\n  ");
    s.push_str(&terms.join(", \\\n  "));
    s.push('\n');
    s
}

/// Write `sweep.csv`, `rates.json`, and `plot.gp` into `dir` (created if
/// absent).
pub fn emit_report(
    dir: &Path,
    reports: &[&StudyReport],
    verdict: Option<&DoublingVerdict>,
) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let write = |name: &str, content: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    };
    write("sweep.csv", render_sweep_csv(reports))?;
    write("rates.json", render_rates_json(reports, verdict))?;
    write("plot.gp", render_plot_script(reports, verdict))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratedouble_core::{BColumn, ErrorTriple, Measured, Method, Setting, SweepRow};

    fn tiny_report() -> StudyReport {
        StudyReport {
            label: "demo_rough".into(),
            setting: Setting::Korobov,
            space_id: "korobov(d=1,alpha=1,gamma=1)".into(),
            scheme_id: "equispaced".into(),
            target_id: "rough_spectral(support=8)".into(),
            rows: vec![SweepRow {
                triple: ErrorTriple {
                    n: 16,
                    l2: Measured { value: 0.25, bound: 1e-3, method: Method::Spectral },
                    h: Some(Measured { value: 0.5, bound: 1e-3, method: Method::Gram }),
                    b_norm: BColumn::Value(2.0),
                    flags: vec![],
                },
                audit_a: Some(0.75),
                audit_b: 1e-12,
            }],
            l2_fit: None,
            h_fit: None,
            degenerate: vec!["too few points".into()],
            audits_pass: true,
        }
    }

    #[test]
    fn csv_has_exact_header_and_17_digit_fields() {
        let rep = tiny_report();
        let csv = render_sweep_csv(&[&rep]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        let row = lines.next().unwrap();
        assert!(
            row.starts_with("demo_rough,16,2.5000000000000000e-1,"),
            "row formatting changed: {row}"
        );
        assert_eq!(row.split(',').count(), 10, "exactly ten columns");
        assert!(lines.next().is_none());
    }

    #[test]
    fn empty_report_emits_header_only_csv_and_degenerate_flag() {
        let mut rep = tiny_report();
        rep.rows.clear();
        rep.degenerate = vec!["empty sweep".into()];
        let csv = render_sweep_csv(&[&rep]);
        assert_eq!(csv, format!("{SWEEP_HEADER}\n"));
        let json_text = render_rates_json(&[&rep], None);
        let doc: serde_json::Value = serde_json::from_str(&json_text).unwrap();
        assert_eq!(doc["reports"][0]["degenerate"][0], "empty sweep");
        assert!(doc["reports"][0]["l2"].is_null());
        assert!(doc["verdict"].is_null());
    }

    #[test]
    fn missing_h_and_b_columns_print_na() {
        let mut rep = tiny_report();
        rep.rows[0].triple.h = None;
        rep.rows[0].triple.b_norm = BColumn::NotComputed;
        rep.rows[0].audit_a = None;
        rep.rows[0].triple.flags = vec!["jitter".into(), "h_saturated".into()];
        let csv = render_sweep_csv(&[&rep]);
        let row = csv.lines().nth(1).unwrap();
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[4], "na");
        assert_eq!(cols[5], "na");
        assert_eq!(cols[6], "na");
        assert_eq!(cols[7], "na");
        assert_eq!(cols[9], "jitter;h_saturated");
    }

    #[test]
    fn plot_script_filters_by_label_and_draws_references() {
        let mut rep = tiny_report();
        rep.l2_fit = Some(RateFit {
            kappa_hat: 1.05,
            c_hat: 2.4,
            window: vec![64, 128],
            residual: 0.01,
        });
        let gp = render_plot_script(&[&rep], None);
        assert!(gp.contains("strcol(1) eq 'demo_rough'"));
        assert!(gp.contains("x**(-1.0500)"));
        assert!(gp.contains("set logscale xy"));
    }
}
