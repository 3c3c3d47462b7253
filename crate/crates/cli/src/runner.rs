//! Drivers behind the four subcommands. Each returns the process exit code:
//! 0 for success with all audits/verdicts passing, 1 when a report was
//! written but an audit or verdict failed. Configuration and IO problems are
//! `Err` and map to exit code 2 in `main`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratedouble_core::rbf::{k_phi, PolySpace};
use ratedouble_core::{
    audit_theorem3, eta_closed_form, eta_series, fit, min_kernel_check, run_pair,
    spectral_target, CpdBasis, DoublingVerdict, KernelSpec, KorobovSpace, PointSet,
    ProductWeights, RateFit, Setting, StudyConfig, StudyReport,
};
use serde_json::json;

use crate::config::{build_pair, RawConfig};
use crate::report::emit_report;
use crate::{CliError, Result};

/// Flags shared by the config-driven subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

const THREADS_ENV: &str = "RATEDOUBLE_THREADS";

fn load_pair(opts: &RunOptions) -> Result<(StudyConfig, StudyConfig)> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this subcommand requires --config".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut raw = RawConfig::parse(&text)?;
    for spec in &opts.sets {
        raw.apply_set(spec)?;
    }
    let (mut rough, mut smooth) = build_pair(&raw)?;
    apply_flag_overrides(&mut rough, &mut smooth, opts)?;
    Ok((rough, smooth))
}

/// Seed/thread precedence: `--seed` and `--threads` beat everything;
/// `RATEDOUBLE_THREADS` beats the config file (and `--set`); the config file
/// beats the built-in defaults.
fn apply_flag_overrides(
    rough: &mut StudyConfig,
    smooth: &mut StudyConfig,
    opts: &RunOptions,
) -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value.parse().map_err(|_| {
            CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{value}`"))
        })?;
        rough.threads = threads;
        smooth.threads = threads;
    }
    if let Some(threads) = opts.threads {
        rough.threads = threads;
        smooth.threads = threads;
    }
    if let Some(seed) = opts.seed {
        rough.seed = seed;
        smooth.seed = seed;
    }
    Ok(())
}

fn describe_fit(fit: &Option<RateFit>) -> String {
    match fit {
        Some(f) => format!(
            "slope {:.3} (window n = {:?}, rms residual {:.2e})",
            f.kappa_hat, f.window, f.residual
        ),
        None => "no usable fit".to_string(),
    }
}

fn print_report_summary(rep: &StudyReport) {
    println!(
        "{}: L2 {}; H {}; audits {}",
        rep.label,
        describe_fit(&rep.l2_fit),
        describe_fit(&rep.h_fit),
        if rep.audits_pass { "pass" } else { "FAIL" }
    );
    for reason in &rep.degenerate {
        println!("{}: note: {reason}", rep.label);
    }
}

fn print_verdict(v: &DoublingVerdict) {
    let h_txt = match v.h_deficit {
        Some(d) => format!("h_deficit {d:.3}"),
        None => "h fit absent".to_string(),
    };
    println!(
        "verdict: l2_deficit {:.3}, {}, slack {:.2} -> {}",
        v.l2_deficit,
        h_txt,
        v.slack,
        if v.pass() && v.audits_pass { "PASS" } else { "FAIL" }
    );
}

/// `ratedouble study`: run the configured rough/smooth pair and emit reports.
pub fn cmd_study(opts: &RunOptions) -> Result<i32> {
    let (rough_cfg, smooth_cfg) = load_pair(opts)?;
    let outcome = run_pair(&rough_cfg, &smooth_cfg)?;
    emit_report(&opts.out, &[&outcome.rough, &outcome.smooth], outcome.verdict.as_ref())?;
    print_report_summary(&outcome.rough);
    print_report_summary(&outcome.smooth);
    let pass = match &outcome.verdict {
        Some(v) => {
            print_verdict(v);
            v.pass() && v.audits_pass
        }
        None => {
            println!("no verdict for this setting; slopes reported qualitatively");
            outcome.rough.audits_pass && outcome.smooth.audits_pass
        }
    };
    println!(
        "wrote {}",
        ["sweep.csv", "rates.json", "plot.gp"]
            .map(|f| opts.out.join(f).display().to_string())
            .join(", ")
    );
    Ok(if pass { 0 } else { 1 })
}

/// `ratedouble audit`: per-instance projection-inequality audits of the
/// configured rough target on each sweep size. Periodic setting only.
pub fn cmd_audit(opts: &RunOptions) -> Result<i32> {
    let (cfg, _) = load_pair(opts)?;
    if cfg.setting != Setting::Korobov {
        return Err(CliError::Config(
            "the audit subcommand needs study.setting = korobov (spectral norms are exact there)"
                .into(),
        ));
    }
    let space = KorobovSpace::new(
        cfg.alpha,
        ProductWeights::uniform(cfg.dim, cfg.gamma).map_err(CliError::Core)?,
    )
    .map_err(CliError::Core)?;
    let kernel = KernelSpec::Korobov(space.clone());
    let g = spectral_target(&cfg)?;

    let mut rows = Vec::new();
    let mut all_pass = true;
    for &n in &cfg.sweep {
        let nodes = cfg.scheme.build(cfg.dim, n, cfg.seed, true).map_err(CliError::Core)?;
        let values: Vec<f64> = nodes.iter().map(|x| g.value(x)).collect();
        let interp = fit(&kernel, &nodes, &values).map_err(CliError::Core)?;
        let audit = audit_theorem3(&space, &g, &interp, cfg.truncation, cfg.seed.wrapping_add(n as u64))
            .map_err(CliError::Core)?;
        let pass = audit.pass();
        all_pass &= pass;
        println!(
            "audit n={n}: projection margin {:.3e}, interpolation residual {:.3e}, \
             duality margin {:.3e} over {} pairs -> {}",
            audit.audit_a_margin,
            audit.galerkin_max,
            audit.norms_relation_worst,
            audit.norms_relation_samples,
            if pass { "pass" } else { "FAIL" }
        );
        rows.push(json!({
            "n": n,
            "l2_err": audit.l2_err.value,
            "l2_bound": audit.l2_err.bound,
            "h_err": audit.h_err.value,
            "h_bound": audit.h_err.bound,
            "b_norm": audit.b_norm,
            "audit_a_margin": audit.audit_a_margin,
            "galerkin_max": audit.galerkin_max,
            "norms_relation_worst": audit.norms_relation_worst,
            "norms_relation_samples": audit.norms_relation_samples,
            "pass": pass,
        }));
    }
    fs::create_dir_all(&opts.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", opts.out.display())))?;
    let path = opts.out.join("audits.json");
    let mut text = serde_json::to_string_pretty(&json!({ "audits": rows, "pass": all_pass }))
        .expect("audit JSON is always serializable");
    text.push('\n');
    fs::write(&path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(if all_pass { 0 } else { 1 })
}

/// Worst-case defects from the built-in identity checks, with the tolerance
/// each is held to.
#[derive(Debug, Clone)]
pub struct IdentitySuite {
    /// max relative defect of r(h)² against the squared space's weight.
    pub r_square_worst: f64,
    pub r_square_samples: usize,
    /// max of |closed form − series| − series tail bound over the η grids.
    pub eta_worst_excess: f64,
    /// worst reproducing-identity error of the min-kernel pairing.
    pub min_kernel_worst: f64,
    /// |∫ K(x,x) dx − 3/2| for the min-kernel.
    pub kxx_defect: f64,
    /// worst |K_Φ(ξ, y)| over ξ in the polynomial anchor set, scaled.
    pub k_phi_worst: f64,
    pub k_phi_scale: f64,
}

pub const R_SQUARE_TOL: f64 = 1e-12;
pub const MIN_KERNEL_TOL: f64 = 1e-8;
pub const K_PHI_TOL: f64 = 1e-9;

impl IdentitySuite {
    pub fn checks(&self) -> Vec<(&'static str, f64, f64, bool)> {
        vec![
            (
                "r_{2a,g^2} equals r_{a,g}^2 (relative)",
                self.r_square_worst,
                R_SQUARE_TOL,
                self.r_square_worst <= R_SQUARE_TOL,
            ),
            (
                "eta closed form within series tail bound",
                self.eta_worst_excess,
                0.0,
                self.eta_worst_excess <= 0.0,
            ),
            (
                "min-kernel reproducing identity",
                self.min_kernel_worst.max(self.kxx_defect),
                MIN_KERNEL_TOL,
                self.min_kernel_worst <= MIN_KERNEL_TOL && self.kxx_defect <= MIN_KERNEL_TOL,
            ),
            (
                "projected kernel annihilates at anchor points (scaled)",
                self.k_phi_worst / self.k_phi_scale,
                K_PHI_TOL,
                self.k_phi_worst <= K_PHI_TOL * self.k_phi_scale,
            ),
        ]
    }

    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| c.3)
    }
}

/// The built-in identity suite behind `ratedouble verify`.
///
/// * weight identity r_{α,γ}(h)² = r_{2α,γ²}(h) on 10⁴ random frequency
///   vectors with d ≤ 4, random per-coordinate weights, and α ∈ {1, 1.5, 2,
///   2.5, 3};
/// * η closed forms against the truncated cosine series on 1000-point grids
///   for α ∈ {1, 2, 3}, within the analytic series tail bound;
/// * the min-kernel reproducing identity ⟨K(y,·), f⟩ = f(y) by quadrature,
///   plus ∫K(x,x)dx = 3/2;
/// * annihilation of the projected thin-plate kernel at its anchor points.
pub fn identity_suite(seed: u64) -> IdentitySuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let alphas = [1.0, 1.5, 2.0, 2.5, 3.0];
    let mut r_square_worst = 0.0f64;
    let samples = 10_000;
    for _ in 0..samples {
        let d = rng.gen_range(1..=4usize);
        let alpha = alphas[rng.gen_range(0..alphas.len())];
        let gamma: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..2.0)).collect();
        let space = KorobovSpace::new(alpha, ProductWeights::new(gamma).expect("positive weights"))
            .expect("valid alpha");
        let h: Vec<i64> = (0..d).map(|_| rng.gen_range(-10..=10i64)).collect();
        r_square_worst = r_square_worst.max(space.r_square_defect(&h));
    }

    // Series tolerances per α: the α = 1 series converges like 1/H, so a
    // micro-tolerance there would need billions of terms.
    let mut eta_worst_excess = f64::NEG_INFINITY;
    for (alpha, tol) in [(1u32, 1e-4), (2, 1e-10), (3, 1e-12)] {
        for k in 0..1000 {
            let t = k as f64 / 1000.0;
            let closed = eta_closed_form(alpha, t);
            let (series, tail) =
                eta_series(alpha as f64, t, tol).expect("tolerance chosen to be reachable");
            let excess = (closed - series).abs() - (tail + 1e-11 * (1.0 + closed.abs()));
            eta_worst_excess = eta_worst_excess.max(excess);
        }
    }

    let mk = min_kernel_check(64, 8);
    let kxx_defect = (mk.kxx_integral - 1.5).abs();

    let basis = CpdBasis::ThinPlate;
    let pts = PointSet::random(2, 12, seed ^ 0x51da_7e11, false).expect("random points distinct");
    let space = PolySpace::from_points(2, basis.order(), &pts)
        .expect("random planar points are unisolvent for degree-1 polynomials");
    let k_phi_scale = basis.scale_on(&pts).max(1.0);
    let mut k_phi_worst = 0.0f64;
    for _ in 0..50 {
        let y = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        for xi in space.xi() {
            k_phi_worst = k_phi_worst.max(k_phi(&basis, &space, xi, &y).abs());
            k_phi_worst = k_phi_worst.max(k_phi(&basis, &space, &y, xi).abs());
        }
    }

    IdentitySuite {
        r_square_worst,
        r_square_samples: samples,
        eta_worst_excess,
        min_kernel_worst: mk.max_reproducing_err,
        kxx_defect,
        k_phi_worst,
        k_phi_scale,
    }
}

/// `ratedouble verify`: print one line per identity check.
pub fn cmd_verify(seed: u64) -> Result<i32> {
    let suite = identity_suite(seed);
    for (name, worst, tol, pass) in suite.checks() {
        println!(
            "verify: {name}: worst {worst:.3e} (tolerance {tol:.1e}) -> {}",
            if pass { "ok" } else { "FAIL" }
        );
    }
    Ok(if suite.pass() { 0 } else { 1 })
}

/// The small built-in pair used by `ratedouble demo`: the periodic α = 1
/// doubling study cut down to n ≤ 128 so it finishes in about a second.
pub fn demo_pair(seed: u64) -> (StudyConfig, StudyConfig) {
    let (mut rough, mut smooth) = StudyConfig::korobov_pair(1.0, seed);
    for cfg in [&mut rough, &mut smooth] {
        cfg.sweep = vec![16, 32, 64, 128];
        cfg.truncation = 16_384;
    }
    rough.target = ratedouble_core::TargetSpec::RoughSpectral { support: 512 };
    smooth.target = ratedouble_core::TargetSpec::SmoothSpectral { support: 512 };
    rough.label = "demo_rough".into();
    smooth.label = "demo_smooth".into();
    (rough, smooth)
}

/// `ratedouble demo`: run the built-in pair and emit the same reports as
/// `study`.
pub fn cmd_demo(out: &Path, seed: Option<u64>, threads: Option<usize>) -> Result<i32> {
    let (mut rough, mut smooth) = demo_pair(seed.unwrap_or(7));
    let opts = RunOptions { seed, threads, ..RunOptions::default() };
    apply_flag_overrides(&mut rough, &mut smooth, &opts)?;
    let outcome = run_pair(&rough, &smooth)?;
    emit_report(out, &[&outcome.rough, &outcome.smooth], outcome.verdict.as_ref())?;
    print_report_summary(&outcome.rough);
    print_report_summary(&outcome.smooth);
    let verdict = outcome.verdict.as_ref().expect("periodic demo always has a verdict");
    print_verdict(verdict);
    println!("wrote reports to {}", out.display());
    Ok(if verdict.pass() && verdict.audits_pass { 0 } else { 1 })
}
