//! Structured key-value configuration.
//!
//! The format is flat `key = value` lines grouped under `[section]` headers;
//! `#` and `;` start comments. Every key must be one of the documented
//! entries below — unknown sections or keys are hard errors, so a typo can
//! never silently fall back to a default. `--set section.key=value` overrides
//! individual entries after the file is read.
//!
//! Sections and keys:
//!
//! ```text
//! [study]   setting (korobov | min_kernel | rbf), label, sweep (comma list),
//!           seed, threads, slack, window
//! [space]   dim, alpha, gamma
//! [nodes]   scheme (equispaced | equispaced_interior | rank1_lattice | random),
//!           z (comma list, rank1_lattice only)
//! [target]  rough, smooth (kind names below), support, degree, fine_n
//! [measure] truncation, quad_panels, quad_order
//! [rbf]     basis (thin_plate | polyharmonic:k | gaussian:eps |
//!           inverse_multiquadric:eps)
//! ```
//!
//! Target kinds: `rough_spectral`, `smooth_spectral`, `trig_poly`,
//! `kernel_combination`, `mk_linear`, `mk_smooth_poly`, `rbf_smooth`,
//! `rbf_rough`.

use std::collections::BTreeMap;

use ratedouble_core::{CpdBasis, NodeScheme, Setting, StudyConfig, TargetSpec};

use crate::{CliError, Result};

const KNOWN_KEYS: &[&str] = &[
    "study.setting",
    "study.label",
    "study.sweep",
    "study.seed",
    "study.threads",
    "study.slack",
    "study.window",
    "space.dim",
    "space.alpha",
    "space.gamma",
    "nodes.scheme",
    "nodes.z",
    "target.rough",
    "target.smooth",
    "target.support",
    "target.degree",
    "target.fine_n",
    "measure.truncation",
    "measure.quad_panels",
    "measure.quad_order",
    "rbf.basis",
];

/// Parsed but untyped config: a map from `section.key` to the raw value
/// string. Typing and defaulting happen in [`build_pair`].
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = strip_comment(raw_line).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::Config(format!("line {}: unterminated section header", lineno + 1))
                })?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let section = section.as_ref().ok_or_else(|| {
                CliError::Config(format!("line {}: key before any [section] header", lineno + 1))
            })?;
            let full = format!("{section}.{}", key.trim());
            check_known(&full)?;
            if entries.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("duplicate key `{full}`")));
            }
        }
        Ok(RawConfig { entries })
    }

    /// Apply one `--set section.key=value` override.
    pub fn apply_set(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--set expects section.key=value, got `{spec}`"))
        })?;
        let key = key.trim();
        if !key.contains('.') {
            return Err(CliError::Config(format!(
                "--set key must be section-qualified (e.g. study.seed), got `{key}`"
            )));
        }
        check_known(key)?;
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn check_known(key: &str) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown configuration key `{key}`")))
    }
}

fn parse_with<T, F>(raw: &RawConfig, key: &str, convert: F) -> Result<Option<T>>
where
    F: FnOnce(&str) -> Option<T>,
{
    match raw.get(key) {
        None => Ok(None),
        Some(s) => convert(s).map(Some).ok_or_else(|| {
            CliError::Config(format!("key `{key}`: cannot interpret value `{s}`"))
        }),
    }
}

fn get_u64(raw: &RawConfig, key: &str) -> Result<Option<u64>> {
    parse_with(raw, key, |s| s.parse().ok())
}

fn get_usize(raw: &RawConfig, key: &str) -> Result<Option<usize>> {
    parse_with(raw, key, |s| s.parse().ok())
}

fn get_f64(raw: &RawConfig, key: &str) -> Result<Option<f64>> {
    parse_with(raw, key, |s| s.parse().ok())
}

fn get_list<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<Option<Vec<T>>> {
    parse_with(raw, key, |s| {
        s.split(',').map(|item| item.trim().parse().ok()).collect::<Option<Vec<T>>>()
    })
}

fn parse_setting(s: &str) -> Option<Setting> {
    match s {
        "korobov" => Some(Setting::Korobov),
        "min_kernel" => Some(Setting::MinKernel),
        "rbf" => Some(Setting::Rbf),
        _ => None,
    }
}

fn parse_basis(s: &str) -> Option<CpdBasis> {
    let (name, param) = match s.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p.trim())),
        None => (s, None),
    };
    match (name, param) {
        ("thin_plate", None) => Some(CpdBasis::ThinPlate),
        ("polyharmonic", Some(p)) => p.parse().ok().map(CpdBasis::Polyharmonic),
        ("gaussian", Some(p)) => p.parse().ok().map(CpdBasis::Gaussian),
        ("inverse_multiquadric", Some(p)) => p.parse().ok().map(CpdBasis::InverseMultiquadric),
        _ => None,
    }
}

fn parse_target(raw: &RawConfig, kind: &str, key: &str) -> Result<TargetSpec> {
    let default_support = ratedouble_core::study::DEFAULT_SUPPORT;
    match kind {
        "rough_spectral" => Ok(TargetSpec::RoughSpectral {
            support: get_u64(raw, "target.support")?.unwrap_or(default_support),
        }),
        "smooth_spectral" => Ok(TargetSpec::SmoothSpectral {
            support: get_u64(raw, "target.support")?.unwrap_or(default_support),
        }),
        "trig_poly" => {
            let degree = get_u64(raw, "target.degree")?.ok_or_else(|| {
                CliError::Config("target kind trig_poly requires target.degree".into())
            })?;
            Ok(TargetSpec::TrigPoly { degree: degree as u32 })
        }
        "kernel_combination" => {
            let fine_n = get_usize(raw, "target.fine_n")?.ok_or_else(|| {
                CliError::Config("target kind kernel_combination requires target.fine_n".into())
            })?;
            Ok(TargetSpec::KernelCombination { fine_n })
        }
        "mk_linear" => Ok(TargetSpec::MkLinear),
        "mk_smooth_poly" => Ok(TargetSpec::MkSmoothPoly),
        "rbf_smooth" => Ok(TargetSpec::RbfSmooth),
        "rbf_rough" => Ok(TargetSpec::RbfRough),
        other => Err(CliError::Config(format!("key `{key}`: unknown target kind `{other}`"))),
    }
}

/// Turn a raw config into the rough/smooth study pair it describes. Defaults
/// for everything except `study.setting` come from the built-in pair for that
/// setting, so a config can be as short as one line.
pub fn build_pair(raw: &RawConfig) -> Result<(StudyConfig, StudyConfig)> {
    let setting_str = raw
        .get("study.setting")
        .ok_or_else(|| CliError::Config("config must set study.setting".into()))?;
    let setting = parse_setting(setting_str).ok_or_else(|| {
        CliError::Config(format!(
            "study.setting must be korobov, min_kernel, or rbf; got `{setting_str}`"
        ))
    })?;

    let alpha = get_f64(raw, "space.alpha")?.unwrap_or(1.0);
    let seed = get_u64(raw, "study.seed")?.unwrap_or(7);
    let (mut rough, mut smooth) = match setting {
        Setting::Korobov => StudyConfig::korobov_pair(alpha, seed),
        Setting::MinKernel => StudyConfig::min_kernel_pair(seed),
        Setting::Rbf => StudyConfig::rbf_pair(seed),
    };

    if let Some(label) = raw.get("study.label") {
        if label.contains(',') || label.contains('\n') {
            return Err(CliError::Config(
                "study.label must not contain commas or newlines (it is a CSV column)".into(),
            ));
        }
        rough.label = format!("{label}_rough");
        smooth.label = format!("{label}_smooth");
    }
    if let Some(sweep) = get_list::<usize>(raw, "study.sweep")? {
        rough.sweep = sweep.clone();
        smooth.sweep = sweep;
    }
    if let Some(threads) = get_usize(raw, "study.threads")? {
        rough.threads = threads;
        smooth.threads = threads;
    }
    if let Some(slack) = get_f64(raw, "study.slack")? {
        rough.slack = slack;
        smooth.slack = slack;
    }
    if let Some(window) = get_usize(raw, "study.window")? {
        rough.window = Some(window);
        smooth.window = Some(window);
    }
    if let Some(dim) = get_usize(raw, "space.dim")? {
        rough.dim = dim;
        smooth.dim = dim;
    }
    if let Some(gamma) = get_f64(raw, "space.gamma")? {
        rough.gamma = gamma;
        smooth.gamma = gamma;
    }

    if let Some(scheme) = raw.get("nodes.scheme") {
        let z = get_list::<u64>(raw, "nodes.z")?;
        let parsed = match scheme {
            "equispaced" => NodeScheme::Equispaced,
            "equispaced_interior" => NodeScheme::EquispacedInterior,
            "random" => NodeScheme::Random,
            "rank1_lattice" => NodeScheme::Rank1Lattice {
                z: z.clone().ok_or_else(|| {
                    CliError::Config("scheme rank1_lattice requires nodes.z".into())
                })?,
            },
            other => {
                return Err(CliError::Config(format!("unknown node scheme `{other}`")));
            }
        };
        if z.is_some() && scheme != "rank1_lattice" {
            return Err(CliError::Config(
                "nodes.z is only meaningful for scheme = rank1_lattice".into(),
            ));
        }
        rough.scheme = parsed.clone();
        smooth.scheme = parsed;
    } else if raw.get("nodes.z").is_some() {
        return Err(CliError::Config("nodes.z requires nodes.scheme = rank1_lattice".into()));
    }

    if let Some(kind) = raw.get("target.rough") {
        rough.target = parse_target(raw, kind, "target.rough")?;
    }
    if let Some(kind) = raw.get("target.smooth") {
        smooth.target = parse_target(raw, kind, "target.smooth")?;
    }

    if let Some(truncation) = get_u64(raw, "measure.truncation")? {
        rough.truncation = truncation as i64;
        smooth.truncation = truncation as i64;
    }
    if let Some(panels) = get_usize(raw, "measure.quad_panels")? {
        rough.quad_panels = panels;
        smooth.quad_panels = panels;
    }
    if let Some(order) = get_usize(raw, "measure.quad_order")? {
        rough.quad_order = order;
        smooth.quad_order = order;
    }

    if let Some(basis) = raw.get("rbf.basis") {
        let parsed = parse_basis(basis).ok_or_else(|| {
            CliError::Config(format!("rbf.basis: unknown basis `{basis}`"))
        })?;
        rough.rbf_basis = parsed.clone();
        smooth.rbf_basis = parsed;
    }

    rough.validate().map_err(CliError::Core)?;
    smooth.validate().map_err(CliError::Core)?;
    Ok((rough, smooth))
}
