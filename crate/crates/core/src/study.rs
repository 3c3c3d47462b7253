//! Convergence-study harness: n-sweeps over node counts, log-log rate fits
//! with a saturation guard, per-instance inequality audits, and the verdict
//! comparing smooth-target rates against doubled rough-target rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::interp::{fit, synthetic_target, Interpolant, SyntheticTarget};
use crate::kernel::KernelSpec;
use crate::korobov::spectral::{inner_product, spectral_norms, BNorm, SpectralFunction};
use crate::korobov::KorobovSpace;
use crate::measure::{
    h_error_exact, l2_error_quadrature, l2_error_quadrature_breaks, l2_error_spectral, BColumn,
    ErrorTriple, Measured,
};
use crate::points::PointSet;
use crate::rbf::{fit_rbf, CpdBasis};

/// Errors at or below this multiple of their own measurement bound are
/// saturated: the measurement cannot distinguish them from zero well enough
/// to support a rate fit.
const SATURATION_FACTOR: f64 = 1e2;
/// Absolute floor below which an error is treated as exactly reproduced.
const ERROR_FLOOR: f64 = 1e-13;
/// Galerkin/interpolation residuals are audited against this relative level.
const AUDIT_B_REL: f64 = 1e-7;
/// Default slack for slope comparisons in the doubling verdict.
pub const DEFAULT_SLACK: f64 = 0.35;
/// Default one-sided spectral truncation for L2 error measurement.
pub const DEFAULT_TRUNCATION: i64 = 131_072;
/// Default spectral support of the built-in rough/smooth targets.
pub const DEFAULT_SUPPORT: u64 = 4096;

// Deterministic RNG stream ids, so every random draw is a pure function of
// (config seed, purpose) regardless of thread count.
const STREAM_ROUGH_SIGNS: u64 = 1000;
const STREAM_SMOOTH_SIGNS: u64 = 1001;
const STREAM_COMBO_COEFFS: u64 = 1002;
const STREAM_NORMS_RELATION: u64 = 3000;
const NODE_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Korobov,
    MinKernel,
    Rbf,
}

impl Setting {
    pub fn tag(self) -> &'static str {
        match self {
            Setting::Korobov => "korobov",
            Setting::MinKernel => "min_kernel",
            Setting::Rbf => "rbf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeScheme {
    Equispaced,
    EquispacedInterior,
    Rank1Lattice { z: Vec<u64> },
    Random,
}

impl NodeScheme {
    pub fn id_string(&self) -> String {
        match self {
            NodeScheme::Equispaced => "equispaced".into(),
            NodeScheme::EquispacedInterior => "equispaced_interior".into(),
            NodeScheme::Rank1Lattice { z } => format!("rank1_lattice{z:?}"),
            NodeScheme::Random => "random".into(),
        }
    }

    /// Node set for one sweep entry. Random draws are seeded per n, so sweep
    /// entries are independent of evaluation order.
    pub fn build(&self, dim: usize, n: usize, seed: u64, periodic: bool) -> Result<PointSet> {
        match self {
            NodeScheme::Equispaced => {
                if dim != 1 {
                    return Err(CoreError::InvalidConfig(
                        "equispaced nodes are one-dimensional; use a lattice for d > 1".into(),
                    ));
                }
                PointSet::equispaced(n)
            }
            NodeScheme::EquispacedInterior => {
                if dim != 1 {
                    return Err(CoreError::InvalidConfig(
                        "equispaced_interior nodes are one-dimensional".into(),
                    ));
                }
                PointSet::equispaced_interior(n)
            }
            NodeScheme::Rank1Lattice { z } => {
                if z.len() != dim {
                    return Err(CoreError::DimensionMismatch { expected: dim, got: z.len() });
                }
                PointSet::rank1_lattice(z, n)
            }
            NodeScheme::Random => {
                PointSet::random(dim, n, seed ^ (n as u64).wrapping_mul(NODE_SEED_MIX), periodic)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// ĝ(±h) = s_h·h^{-(α+0.55)} for 1 ≤ h ≤ support, signs s_h seeded.
    /// Lies in H with a huge (support-dependent) B-norm.
    RoughSpectral { support: u64 },
    /// ĝ(±h) = s_h·h^{-(2α+0.55)}: B-norm converged, rates should double.
    SmoothSpectral { support: u64 },
    /// Deterministic finite trig polynomial. Lies in the smoother space, so
    /// its L2 error decays at the doubled rate; it is not reproduced exactly
    /// at any finite n (the minimum-norm interpolant spreads each residue
    /// class over all of its aliases).
    TrigPoly { degree: u32 },
    /// Target in the span of kernel sections on a fine node set, with exactly
    /// known native norm (its B-norm diverges).
    KernelCombination { fine_n: usize },
    /// f(x) = x in the min-kernel space: in H, violates the boundary
    /// conditions of the smoother space.
    MkLinear,
    /// g(x) = x²(1-x)²(3-2x): g(0) = g'(0) = g'(1) = 0, so g lies in the
    /// smoother space; ‖g‖²_H = 26/315 and ‖g''‖²_L2 = 132/35 exactly.
    MkSmoothPoly,
    /// Smooth scattered-data target for the RBF setting (no computable
    /// B-norm; slope reported, not gated).
    RbfSmooth,
    /// Cusp target r^{3/2}: second derivatives are square-integrable but
    /// blow up at the cusp, so it is rough within the thin-plate native space.
    RbfRough,
}

impl TargetSpec {
    pub fn id_string(&self) -> String {
        match self {
            TargetSpec::RoughSpectral { support } => format!("rough_spectral[{support}]"),
            TargetSpec::SmoothSpectral { support } => format!("smooth_spectral[{support}]"),
            TargetSpec::TrigPoly { degree } => format!("trig_poly[{degree}]"),
            TargetSpec::KernelCombination { fine_n } => format!("kernel_combination[{fine_n}]"),
            TargetSpec::MkLinear => "mk_linear".into(),
            TargetSpec::MkSmoothPoly => "mk_smooth_poly".into(),
            TargetSpec::RbfSmooth => "rbf_smooth".into(),
            TargetSpec::RbfRough => "rbf_rough".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub setting: Setting,
    /// Report label; also the first CSV column, so rough/smooth rows of a
    /// paired run stay distinguishable in one table.
    pub label: String,
    pub dim: usize,
    /// Korobov smoothness α (ignored elsewhere).
    pub alpha: f64,
    /// Korobov product weight (isotropic; ignored elsewhere).
    pub gamma: f64,
    pub scheme: NodeScheme,
    pub sweep: Vec<usize>,
    pub target: TargetSpec,
    /// One-sided spectral truncation for L2 measurement (Korobov setting).
    pub truncation: i64,
    pub quad_panels: usize,
    pub quad_order: usize,
    pub seed: u64,
    pub threads: usize,
    pub slack: f64,
    /// Rate-fit window: number of trailing sweep entries; None = ⌈half⌉.
    pub window: Option<usize>,
    /// Basis for the RBF setting (ignored elsewhere).
    pub rbf_basis: CpdBasis,
}

impl StudyConfig {
    fn base(setting: Setting, label: &str) -> StudyConfig {
        StudyConfig {
            setting,
            label: label.into(),
            dim: 1,
            alpha: 1.0,
            gamma: 1.0,
            scheme: NodeScheme::Equispaced,
            sweep: vec![16, 32, 64, 128, 256, 512, 1024],
            target: TargetSpec::RoughSpectral { support: DEFAULT_SUPPORT },
            truncation: DEFAULT_TRUNCATION,
            quad_panels: 16,
            quad_order: 8,
            seed: 7,
            threads: 1,
            slack: DEFAULT_SLACK,
            window: None,
            rbf_basis: CpdBasis::ThinPlate,
        }
    }

    /// Rough/smooth pair for the periodic setting: equispaced n = 16..1024.
    pub fn korobov_pair(alpha: f64, seed: u64) -> (StudyConfig, StudyConfig) {
        let tag = format!("korobov_a{alpha:.0}");
        let mut rough = StudyConfig::base(Setting::Korobov, &format!("{tag}_rough"));
        rough.alpha = alpha;
        rough.seed = seed;
        let mut smooth = rough.clone();
        smooth.label = format!("{tag}_smooth");
        smooth.target = TargetSpec::SmoothSpectral { support: DEFAULT_SUPPORT };
        (rough, smooth)
    }

    /// Boundary-rough/smooth pair on [0,1] with interior equispaced nodes,
    /// n = 8..512.
    pub fn min_kernel_pair(seed: u64) -> (StudyConfig, StudyConfig) {
        let mut rough = StudyConfig::base(Setting::MinKernel, "min_kernel_rough");
        rough.scheme = NodeScheme::EquispacedInterior;
        rough.sweep = vec![8, 16, 32, 64, 128, 256, 512];
        rough.target = TargetSpec::MkLinear;
        rough.quad_order = 8;
        rough.seed = seed;
        let mut smooth = rough.clone();
        smooth.label = "min_kernel_smooth".into();
        smooth.target = TargetSpec::MkSmoothPoly;
        (rough, smooth)
    }

    /// Scattered-data thin-plate pair in d = 2; slopes are reported
    /// qualitatively (no verdict is formed).
    pub fn rbf_pair(seed: u64) -> (StudyConfig, StudyConfig) {
        let mut rough = StudyConfig::base(Setting::Rbf, "rbf_rough");
        rough.dim = 2;
        rough.scheme = NodeScheme::Random;
        rough.sweep = vec![24, 48, 96, 192];
        rough.target = TargetSpec::RbfRough;
        rough.quad_panels = 8;
        rough.quad_order = 6;
        rough.seed = seed;
        let mut smooth = rough.clone();
        smooth.label = "rbf_smooth".into();
        smooth.target = TargetSpec::RbfSmooth;
        (rough, smooth)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.len() < 4 {
            return Err(CoreError::InvalidConfig(format!(
                "sweep must have at least 4 entries, got {}",
                self.sweep.len()
            )));
        }
        if !self.sweep.windows(2).all(|w| w[0] < w[1]) {
            return Err(CoreError::InvalidConfig("sweep must be strictly increasing".into()));
        }
        if self.sweep[0] == 0 {
            return Err(CoreError::InvalidConfig("sweep entries must be positive".into()));
        }
        if self.dim == 0 {
            return Err(CoreError::InvalidConfig("dimension must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(CoreError::InvalidConfig("threads must be at least 1".into()));
        }
        if self.quad_panels == 0 || self.quad_order == 0 {
            return Err(CoreError::InvalidConfig("quadrature panels/order must be positive".into()));
        }
        if !(self.slack > 0.0) {
            return Err(CoreError::InvalidConfig("slack must be positive".into()));
        }
        if let Some(w) = self.window {
            if w == 0 {
                return Err(CoreError::InvalidConfig("window must be positive when set".into()));
            }
        }
        match (&self.setting, &self.target) {
            (Setting::Korobov, TargetSpec::RoughSpectral { support })
            | (Setting::Korobov, TargetSpec::SmoothSpectral { support }) => {
                if self.dim != 1 {
                    return Err(CoreError::InvalidConfig(
                        "spectral power-law targets are defined for d = 1".into(),
                    ));
                }
                if *support == 0 || *support as i64 > self.truncation {
                    return Err(CoreError::InvalidConfig(format!(
                        "target support {support} must lie in 1..=truncation ({})",
                        self.truncation
                    )));
                }
            }
            (Setting::Korobov, TargetSpec::TrigPoly { degree }) => {
                if self.dim != 1 {
                    return Err(CoreError::InvalidConfig(
                        "trig-polynomial targets are defined for d = 1".into(),
                    ));
                }
                if *degree == 0 || *degree as i64 > self.truncation {
                    return Err(CoreError::InvalidConfig(
                        "trig-polynomial degree must lie in 1..=truncation".into(),
                    ));
                }
            }
            (Setting::Korobov, TargetSpec::KernelCombination { fine_n }) => {
                if *fine_n == 0 {
                    return Err(CoreError::InvalidConfig("fine_n must be positive".into()));
                }
                if self.dim > 3 {
                    return Err(CoreError::InvalidConfig(
                        "kernel-combination targets are measured by quadrature (d ≤ 3)".into(),
                    ));
                }
            }
            (Setting::MinKernel, TargetSpec::MkLinear | TargetSpec::MkSmoothPoly) => {
                if self.dim != 1 {
                    return Err(CoreError::InvalidConfig("the min-kernel space lives on [0,1]".into()));
                }
                if matches!(self.scheme, NodeScheme::Rank1Lattice { .. }) {
                    return Err(CoreError::InvalidConfig(
                        "lattice nodes are periodic; the min-kernel setting is not".into(),
                    ));
                }
            }
            (Setting::Rbf, TargetSpec::RbfSmooth | TargetSpec::RbfRough) => {
                if self.dim > 3 {
                    return Err(CoreError::InvalidConfig(
                        "RBF sweeps measure L2 by tensor quadrature (d ≤ 3)".into(),
                    ));
                }
                if self.scheme != NodeScheme::Random {
                    return Err(CoreError::InvalidConfig(
                        "the RBF sweep uses scattered (random) nodes".into(),
                    ));
                }
            }
            (setting, target) => {
                return Err(CoreError::InvalidConfig(format!(
                    "target {} is not defined in the {} setting",
                    target.id_string(),
                    setting.tag()
                )));
            }
        }
        if self.truncation < 1 {
            return Err(CoreError::InvalidConfig("truncation must be at least 1".into()));
        }
        Ok(())
    }
}

/// Least-squares power-law fit err ≈ ĉ·n^{-κ̂} in log-log coordinates.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub kappa_hat: f64,
    pub c_hat: f64,
    /// The n values that entered the fit.
    pub window: Vec<usize>,
    /// Root-mean-square residual of the fit in ln(err).
    pub residual: f64,
}

/// Fit a decay rate to (n, err) pairs. The window keeps the trailing
/// `window` entries (default: the ceiling half of the list), then extends
/// backward until at least 3 points above the 1e-13 floor are available.
pub fn fit_rate(pairs: &[(usize, f64)], window: Option<usize>) -> Result<RateFit> {
    let w = window.unwrap_or_else(|| pairs.len().div_ceil(2)).max(1);
    let usable = |p: &(usize, f64)| p.1 > ERROR_FLOOR && p.1.is_finite();
    let mut start = pairs.len().saturating_sub(w);
    let mut count = pairs[start..].iter().filter(|p| usable(p)).count();
    while count < 3 && start > 0 {
        start -= 1;
        if usable(&pairs[start]) {
            count += 1;
        }
    }
    if count < 3 {
        return Err(CoreError::DegenerateFit(format!(
            "rate fit needs 3 points above the error floor, found {count}"
        )));
    }
    let pts: Vec<(f64, f64, usize)> = pairs[start..]
        .iter()
        .filter(|p| usable(p))
        .map(|&(n, e)| ((n as f64).ln(), e.ln(), n))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(CoreError::DegenerateFit("all fit points share one n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(RateFit {
        kappa_hat: -slope,
        c_hat: intercept.exp(),
        window: pts.iter().map(|p| p.2).collect(),
        residual,
    })
}

/// One sweep entry: the measured errors plus the two per-instance audits.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub triple: ErrorTriple,
    /// Margin of ‖g-Pg‖²_H ≤ ‖g-Pg‖_L2·‖g‖_B, evaluated worst-case against
    /// both measurement bounds (rhs_max - lhs_min); None when ‖g‖_B is not
    /// finite or not computable.
    pub audit_a: Option<f64>,
    /// Largest Galerkin/interpolation residual (pointwise and solver route).
    pub audit_b: f64,
}

/// Worst-case-against-bounds margin of the squared-H-error inequality.
/// Nonnegative whenever the inequality holds for the true values.
pub fn audit_a_margin(l2: &Measured, h: &Measured, b_upper: f64) -> f64 {
    let lhs = (h.value - h.bound).max(0.0).powi(2);
    let rhs = (l2.value + l2.bound) * b_upper;
    rhs - lhs + 1e-15 * (1.0 + rhs.abs())
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub label: String,
    pub setting: Setting,
    pub space_id: String,
    pub scheme_id: String,
    pub target_id: String,
    pub rows: Vec<SweepRow>,
    pub l2_fit: Option<RateFit>,
    pub h_fit: Option<RateFit>,
    /// Reasons for any missing fit (saturated sweep, too few points, ...).
    pub degenerate: Vec<String>,
    /// True when every row passed both per-instance audits and no solve failed.
    pub audits_pass: bool,
}

enum ResolvedTarget {
    Spectral { f: SpectralFunction, h_norm_sq: f64, b_value: f64, b_upper: f64 },
    Synthetic(SyntheticTarget),
    MinKernel { f: fn(f64) -> f64, h_norm_sq: f64, b: BColumn },
    Rbf { f: fn(&[f64]) -> f64 },
}

fn random_signs(seed: u64, stream: u64, count: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn power_law_target(support: u64, p: f64, seed: u64, stream: u64) -> Result<SpectralFunction> {
    let signs = random_signs(seed, stream, support);
    let entries: Vec<(Vec<i64>, f64)> = (1..=support)
        .map(|h| (vec![h as i64], signs[(h - 1) as usize] * (h as f64).powf(-p)))
        .collect();
    SpectralFunction::finite_real(1, &entries)
}

fn mk_linear(x: f64) -> f64 {
    x
}

fn mk_smooth_poly(x: f64) -> f64 {
    // x²(1-x)²(3-2x) expanded; all boundary conditions of the smoother space
    // hold exactly in integer arithmetic.
    ((((-2.0 * x + 7.0) * x - 8.0) * x + 3.0) * x) * x
}

fn rbf_smooth(x: &[f64]) -> f64 {
    let (u, v) = (x[0], x[1]);
    (std::f64::consts::PI * u).sin() * (std::f64::consts::PI * v).sin() + 0.5 * u * v
        - 0.3 * (u - v) * (u - v)
}

fn rbf_rough(x: &[f64]) -> f64 {
    let (du, dv) = (x[0] - 0.4, x[1] - 0.55);
    (du * du + dv * dv).powf(0.75)
}

fn resolve_target(cfg: &StudyConfig, space: Option<&KorobovSpace>) -> Result<ResolvedTarget> {
    match &cfg.target {
        TargetSpec::RoughSpectral { support } | TargetSpec::SmoothSpectral { support } => {
            let space = space.expect("spectral targets imply the periodic setting");
            let (p, stream) = match cfg.target {
                TargetSpec::RoughSpectral { .. } => (cfg.alpha + 0.55, STREAM_ROUGH_SIGNS),
                _ => (2.0 * cfg.alpha + 0.55, STREAM_SMOOTH_SIGNS),
            };
            let f = power_law_target(*support, p, cfg.seed, stream)?;
            let norms = spectral_norms(space, &f, *support)?;
            let b = match norms.b {
                BNorm::Finite(est) => est,
                BNorm::Divergent { .. } => {
                    unreachable!("finite-support targets always have a finite B box sum")
                }
            };
            Ok(ResolvedTarget::Spectral {
                f,
                h_norm_sq: norms.h.value * norms.h.value,
                b_value: b.value,
                b_upper: b.upper(),
            })
        }
        TargetSpec::TrigPoly { degree } => {
            let space = space.expect("trig targets imply the periodic setting");
            let entries: Vec<(Vec<i64>, f64)> = (1..=*degree as i64)
                .map(|h| (vec![h], 0.5 / (h * h) as f64))
                .collect();
            let f = SpectralFunction::finite_real(1, &entries)?;
            let norms = spectral_norms(space, &f, *degree as u64)?;
            let b = match norms.b {
                BNorm::Finite(est) => est,
                BNorm::Divergent { .. } => unreachable!("finite support"),
            };
            Ok(ResolvedTarget::Spectral {
                f,
                h_norm_sq: norms.h.value * norms.h.value,
                b_value: b.value,
                b_upper: b.upper(),
            })
        }
        TargetSpec::KernelCombination { fine_n } => {
            let kernel = match cfg.setting {
                Setting::Korobov => KernelSpec::Korobov(
                    space.expect("kernel combinations are built in the periodic setting").clone(),
                ),
                Setting::MinKernel => KernelSpec::MinKernel,
                Setting::Rbf => {
                    return Err(CoreError::InvalidConfig(
                        "kernel-combination sweep targets are not defined for the RBF setting"
                            .into(),
                    ))
                }
            };
            let fine = cfg.scheme.build(cfg.dim, *fine_n, cfg.seed, kernel.periodic())?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(STREAM_COMBO_COEFFS);
            let coeffs: Vec<f64> = (0..*fine_n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Ok(ResolvedTarget::Synthetic(synthetic_target(&kernel, &fine, &coeffs)?))
        }
        TargetSpec::MkLinear => Ok(ResolvedTarget::MinKernel {
            f: mk_linear,
            // f(0)² + ∫ f'² = 0 + 1.
            h_norm_sq: 1.0,
            // f'(1) = 1 ≠ 0 violates the smoother space's boundary condition.
            b: BColumn::Divergent,
        }),
        TargetSpec::MkSmoothPoly => Ok(ResolvedTarget::MinKernel {
            f: mk_smooth_poly,
            h_norm_sq: 26.0 / 315.0,
            b: BColumn::Value((132.0f64 / 35.0).sqrt()),
        }),
        TargetSpec::RbfSmooth => Ok(ResolvedTarget::Rbf { f: rbf_smooth }),
        TargetSpec::RbfRough => Ok(ResolvedTarget::Rbf { f: rbf_rough }),
    }
}

/// Round-robin deterministic parallel map: output depends only on `f`, never
/// on scheduling.
fn parallel_map<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let workers = threads.min(count);
    let mut slots: Vec<Option<T>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    let mut got = Vec::new();
                    let mut i = w;
                    while i < count {
                        got.push((i, f(i)));
                        i += workers;
                    }
                    got
                })
            })
            .collect();
        for handle in handles {
            for (i, v) in handle.join().expect("sweep worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every sweep index assigned")).collect()
}

fn failure_row(n: usize, err: &CoreError) -> SweepRow {
    let nan = Measured { value: f64::NAN, bound: f64::NAN, method: crate::measure::Method::Gram };
    let _ = err; // the reason is carried as a flag; details go to the report
    SweepRow {
        triple: ErrorTriple {
            n,
            l2: nan,
            h: None,
            b_norm: BColumn::NotComputed,
            flags: vec!["solve_failed".into()],
        },
        audit_a: None,
        audit_b: f64::NAN,
    }
}

fn saturated(m: &Measured) -> bool {
    m.value <= (SATURATION_FACTOR * m.bound).max(ERROR_FLOOR)
}

struct RowPieces {
    l2: Measured,
    h: Option<Measured>,
    b_norm: BColumn,
    b_upper: Option<f64>,
    galerkin_max: f64,
    value_scale: f64,
    jittered: bool,
}

fn assemble_row(n: usize, pieces: RowPieces) -> SweepRow {
    let mut flags = Vec::new();
    if pieces.jittered {
        flags.push("jitter".into());
    }
    if saturated(&pieces.l2) {
        flags.push("l2_saturated".into());
    }
    if let Some(h) = &pieces.h {
        if saturated(h) {
            flags.push("h_saturated".into());
        }
    }
    if pieces.b_norm == BColumn::Divergent {
        flags.push("b_divergent".into());
    }
    let audit_a = match (pieces.b_upper, &pieces.h) {
        (Some(b_upper), Some(h)) => Some(audit_a_margin(&pieces.l2, h, b_upper)),
        _ => None,
    };
    if let Some(margin) = audit_a {
        if margin < 0.0 {
            flags.push("audit_A_fail".into());
        }
    }
    let audit_b = pieces.galerkin_max;
    if !(audit_b <= AUDIT_B_REL * pieces.value_scale) {
        flags.push("audit_B_fail".into());
    }
    SweepRow {
        triple: ErrorTriple {
            n,
            l2: pieces.l2,
            h: pieces.h,
            b_norm: pieces.b_norm,
            flags,
        },
        audit_a,
        audit_b,
    }
}

/// Max over nodes of |g(t_k) - s(t_k)| — by the reproducing property this is
/// the Galerkin residual ⟨g - s, K(t_k,·)⟩_H evaluated without Gram reuse.
fn pointwise_galerkin<F>(g: F, interp: &Interpolant) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    interp
        .nodes()
        .iter()
        .map(|t| (g(t) - interp.evaluate(t)).abs())
        .fold(0.0f64, f64::max)
}

fn korobov_row(
    cfg: &StudyConfig,
    space: &KorobovSpace,
    kernel: &KernelSpec,
    target: &ResolvedTarget,
    n: usize,
) -> Result<SweepRow> {
    let nodes = cfg.scheme.build(cfg.dim, n, cfg.seed, true)?;
    match target {
        ResolvedTarget::Spectral { f, h_norm_sq, b_value, b_upper } => {
            let values: Vec<f64> = nodes.iter().map(|x| f.value(x)).collect();
            let interp = fit(kernel, &nodes, &values)?;
            let l2 = l2_error_spectral(space, f, &interp, cfg.truncation)?;
            let h = h_error_exact(*h_norm_sq, &interp)?;
            let galerkin =
                pointwise_galerkin(|x| f.value(x), &interp).max(interp.residual_inf);
            let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(assemble_row(
                n,
                RowPieces {
                    l2,
                    h: Some(h),
                    b_norm: BColumn::Value(*b_value),
                    b_upper: Some(*b_upper),
                    galerkin_max: galerkin,
                    value_scale: 1.0 + vmax,
                    jittered: interp.jitter > 0.0,
                },
            ))
        }
        ResolvedTarget::Synthetic(t) => {
            let values = t.values_at(&nodes);
            let interp = fit(kernel, &nodes, &values)?;
            let l2 = l2_error_quadrature(
                |x| t.value(x),
                |x| interp.evaluate(x),
                cfg.dim,
                cfg.quad_panels,
                cfg.quad_order,
            );
            let h = h_error_exact(t.h_norm_sq(), &interp)?;
            let galerkin = pointwise_galerkin(|x| t.value(x), &interp).max(interp.residual_inf);
            let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(assemble_row(
                n,
                RowPieces {
                    l2,
                    h: Some(h),
                    // Kernel combinations decay like 1/r on the Fourier side,
                    // so their B-norm diverges.
                    b_norm: BColumn::Divergent,
                    b_upper: None,
                    galerkin_max: galerkin,
                    value_scale: 1.0 + vmax,
                    jittered: interp.jitter > 0.0,
                },
            ))
        }
        _ => unreachable!("validated: Korobov targets are spectral or synthetic"),
    }
}

fn min_kernel_row(cfg: &StudyConfig, target: &ResolvedTarget, n: usize) -> Result<SweepRow> {
    let (f, h_norm_sq, b) = match target {
        ResolvedTarget::MinKernel { f, h_norm_sq, b } => (*f, *h_norm_sq, *b),
        _ => unreachable!("validated: the min-kernel setting takes analytic targets"),
    };
    let kernel = KernelSpec::MinKernel;
    let nodes = cfg.scheme.build(1, n, cfg.seed, false)?;
    let values: Vec<f64> = nodes.iter().map(|t| f(t[0])).collect();
    let interp = fit(&kernel, &nodes, &values)?;
    // Quadrature panels break at the nodes: the interpolant is piecewise
    // linear there, so every panel integrand is smooth.
    let mut breaks: Vec<f64> = Vec::with_capacity(n + 2);
    breaks.push(0.0);
    breaks.extend(nodes.iter().map(|t| t[0]));
    breaks.push(1.0);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let l2 = l2_error_quadrature_breaks(f, |x| interp.evaluate(&[x]), &breaks, cfg.quad_order);
    let h = h_error_exact(h_norm_sq, &interp)?;
    let galerkin = pointwise_galerkin(|x| f(x[0]), &interp).max(interp.residual_inf);
    let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b_upper = match b {
        BColumn::Value(v) => Some(v),
        _ => None,
    };
    Ok(assemble_row(
        n,
        RowPieces {
            l2,
            h: Some(h),
            b_norm: b,
            b_upper,
            galerkin_max: galerkin,
            value_scale: 1.0 + vmax,
            jittered: interp.jitter > 0.0,
        },
    ))
}

fn rbf_row(cfg: &StudyConfig, target: &ResolvedTarget, n: usize) -> Result<SweepRow> {
    let f = match target {
        ResolvedTarget::Rbf { f } => *f,
        _ => unreachable!("validated: the RBF setting takes scattered-data targets"),
    };
    let nodes = cfg.scheme.build(cfg.dim, n, cfg.seed, false)?;
    let values: Vec<f64> = nodes.iter().map(f).collect();
    let interp = fit_rbf(&cfg.rbf_basis, &nodes, &values)?;
    let l2 = l2_error_quadrature(
        f,
        |x| interp.evaluate(x),
        cfg.dim,
        cfg.quad_panels,
        cfg.quad_order,
    );
    let galerkin = nodes
        .iter()
        .map(|t| (f(t) - interp.evaluate(t)).abs())
        .fold(interp.residual_inf, f64::max);
    let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(assemble_row(
        n,
        RowPieces {
            l2,
            h: None,
            b_norm: BColumn::NotComputed,
            b_upper: None,
            galerkin_max: galerkin,
            value_scale: 1.0 + vmax,
            jittered: interp.degraded,
        },
    ))
}

pub fn run_sweep(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let space = match cfg.setting {
        Setting::Korobov => {
            Some(KorobovSpace::isotropic(cfg.dim, cfg.alpha, cfg.gamma)?)
        }
        _ => None,
    };
    let kernel = match cfg.setting {
        Setting::Korobov => Some(KernelSpec::Korobov(space.clone().expect("built above"))),
        Setting::MinKernel => Some(KernelSpec::MinKernel),
        Setting::Rbf => None,
    };
    let target = resolve_target(cfg, space.as_ref())?;

    let rows: Vec<SweepRow> = parallel_map(cfg.sweep.len(), cfg.threads, |i| {
        let n = cfg.sweep[i];
        let result = match cfg.setting {
            Setting::Korobov =>

                korobov_row(cfg, space.as_ref().expect("korobov space"), kernel.as_ref().expect("kernel"), &target, n),
            Setting::MinKernel => min_kernel_row(cfg, &target, n),
            Setting::Rbf => rbf_row(cfg, &target, n),
        };
        result.unwrap_or_else(|e| failure_row(n, &e))
    });

    let mut degenerate = Vec::new();
    let usable = |flag: &str, row: &SweepRow| !row.triple.flags.iter().any(|f| f == flag || f == "solve_failed");
    let l2_pairs: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| usable("l2_saturated", r))
        .map(|r| (r.triple.n, r.triple.l2.value))
        .collect();
    let l2_fit = match fit_rate(&l2_pairs, cfg.window) {
        Ok(f) => Some(f),
        Err(CoreError::DegenerateFit(m)) => {
            degenerate.push(format!("l2: {m}"));
            None
        }
        Err(e) => return Err(e),
    };
    let h_pairs: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| usable("h_saturated", r))
        .filter_map(|r| r.triple.h.as_ref().map(|h| (r.triple.n, h.value)))
        .collect();
    let h_fit = if rows.iter().any(|r| r.triple.h.is_some()) {
        match fit_rate(&h_pairs, cfg.window) {
            Ok(f) => Some(f),
            Err(CoreError::DegenerateFit(m)) => {
                degenerate.push(format!("h: {m}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let audits_pass = rows.iter().all(|r| {
        !r.triple.flags.iter().any(|f| {
            f == "audit_A_fail" || f == "audit_B_fail" || f == "solve_failed"
        })
    });

    Ok(StudyReport {
        label: cfg.label.clone(),
        setting: cfg.setting,
        space_id: match &kernel {
            Some(k) => k.id_string(),
            None => format!("{}[d{} {}]", cfg.rbf_basis.id_string(), cfg.dim, "native"),
        },
        scheme_id: cfg.scheme.id_string(),
        target_id: cfg.target.id_string(),
        rows,
        l2_fit,
        h_fit,
        degenerate,
        audits_pass,
    })
}

/// Verdict of the doubling comparison: the smooth-target L2 rate must reach
/// twice the rough-target L2 rate (minus slack), and the smooth-target H rate
/// must reach the rough L2 rate (minus slack).
#[derive(Debug, Clone)]
pub struct DoublingVerdict {
    pub rough_l2: RateFit,
    pub smooth_l2: RateFit,
    pub smooth_h: Option<RateFit>,
    pub slack: f64,
    /// 2·κ̂_rough − κ̂_smooth; the verdict needs this ≤ slack.
    pub l2_deficit: f64,
    /// κ̂_rough − κ̂_smooth(H) when an H fit exists.
    pub h_deficit: Option<f64>,
    pub slopes_pass: bool,
    pub audits_pass: bool,
}

impl DoublingVerdict {
    pub fn pass(&self) -> bool {
        self.slopes_pass
    }
}

pub fn doubling_verdict(
    smooth: &StudyReport,
    rough: &StudyReport,
    slack: f64,
) -> Result<DoublingVerdict> {
    if smooth.space_id != rough.space_id || smooth.scheme_id != rough.scheme_id {
        return Err(CoreError::IncompatibleReports(format!(
            "({}, {}) vs ({}, {})",
            smooth.space_id, smooth.scheme_id, rough.space_id, rough.scheme_id
        )));
    }
    let rough_l2 = rough
        .l2_fit
        .clone()
        .ok_or_else(|| CoreError::DegenerateFit("rough report has no usable L2 rate".into()))?;
    let smooth_l2 = smooth
        .l2_fit
        .clone()
        .ok_or_else(|| CoreError::DegenerateFit("smooth report has no usable L2 rate".into()))?;
    let smooth_h = smooth.h_fit.clone();
    let l2_deficit = 2.0 * rough_l2.kappa_hat - smooth_l2.kappa_hat;
    let h_deficit = smooth_h.as_ref().map(|f| rough_l2.kappa_hat - f.kappa_hat);
    let slopes_pass = l2_deficit <= slack && h_deficit.map_or(true, |d| d <= slack);
    let audits_pass = smooth.audits_pass && rough.audits_pass;
    Ok(DoublingVerdict {
        rough_l2,
        smooth_l2,
        smooth_h,
        slack,
        l2_deficit,
        h_deficit,
        slopes_pass,
        audits_pass,
    })
}

#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub rough: StudyReport,
    pub smooth: StudyReport,
    /// None for the RBF setting, where no computable smoother norm exists and
    /// the slope comparison stays qualitative.
    pub verdict: Option<DoublingVerdict>,
}

pub fn run_pair(rough_cfg: &StudyConfig, smooth_cfg: &StudyConfig) -> Result<PairOutcome> {
    let rough = run_sweep(rough_cfg)?;
    let smooth = run_sweep(smooth_cfg)?;
    let verdict = if smooth_cfg.setting == Setting::Rbf {
        None
    } else {
        Some(doubling_verdict(&smooth, &rough, smooth_cfg.slack)?)
    };
    Ok(PairOutcome { rough, smooth, verdict })
}

/// Per-instance audit of the projection inequalities for one target/node-set
/// pair in the periodic setting, plus a sampled check of the duality
/// inequality |⟨f,g⟩_H| ≤ ‖f‖_L2·‖g‖_B on random finite-support f.
#[derive(Debug, Clone)]
pub struct InequalityAudit {
    pub l2_err: Measured,
    pub h_err: Measured,
    pub b_norm: f64,
    pub audit_a_margin: f64,
    pub audit_a_pass: bool,
    pub galerkin_max: f64,
    pub audit_b_pass: bool,
    pub norms_relation_samples: usize,
    /// Smallest rhs − |⟨f,g⟩| margin over the sampled pairs.
    pub norms_relation_worst: f64,
    pub norms_relation_pass: bool,
}

impl InequalityAudit {
    pub fn pass(&self) -> bool {
        self.audit_a_pass && self.audit_b_pass && self.norms_relation_pass
    }
}

/// The finite-support spectral function a periodic-setting config describes,
/// for callers that need the target itself (per-instance audits) rather than
/// a full sweep. Errors for target kinds that are not spectral sums.
pub fn spectral_target(cfg: &StudyConfig) -> Result<SpectralFunction> {
    match &cfg.target {
        TargetSpec::RoughSpectral { support } => {
            power_law_target(*support, cfg.alpha + 0.55, cfg.seed, STREAM_ROUGH_SIGNS)
        }
        TargetSpec::SmoothSpectral { support } => {
            power_law_target(*support, 2.0 * cfg.alpha + 0.55, cfg.seed, STREAM_SMOOTH_SIGNS)
        }
        TargetSpec::TrigPoly { degree } => {
            let entries: Vec<(Vec<i64>, f64)> =
                (1..=*degree as i64).map(|h| (vec![h], 0.5 / (h * h) as f64)).collect();
            SpectralFunction::finite_real(1, &entries)
        }
        other => Err(CoreError::InvalidConfig(format!(
            "target {} has no spectral coefficient form",
            other.id_string()
        ))),
    }
}

pub fn audit_theorem3(
    space: &KorobovSpace,
    g: &SpectralFunction,
    interp: &Interpolant,
    truncation: i64,
    seed: u64,
) -> Result<InequalityAudit> {
    let norms = spectral_norms(space, g, truncation.max(1) as u64)?;
    let b = match norms.b {
        BNorm::Finite(est) => est,
        BNorm::Divergent { .. } => return Err(CoreError::UnboundedB),
    };
    let l2_err = l2_error_spectral(space, g, interp, truncation)?;
    let h_err = h_error_exact(norms.h.value * norms.h.value, interp)?;
    let margin = audit_a_margin(&l2_err, &h_err, b.upper());
    let galerkin = pointwise_galerkin(|x| g.value(x), interp).max(interp.residual_inf);
    let vmax = interp.node_values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let audit_b_pass = galerkin <= AUDIT_B_REL * (1.0 + vmax);

    // Duality samples: random finite-support f, inner product against g on
    // the Fourier side with a Cauchy-Schwarz tail bound.
    let samples = 20;
    let support = 16u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_NORMS_RELATION);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let entries: Vec<(Vec<i64>, f64)> = (1..=support as i64)
            .map(|h| (vec![h], rng.gen_range(-1.0..1.0) / h as f64))
            .collect();
        let f = SpectralFunction::finite_real(1, &entries)?;
        let f_norms = spectral_norms(space, &f, support)?;
        let trunc = (truncation.max(1) as u64).max(support);
        let (ip, ip_tail) = inner_product(space, &f, g, trunc)?;
        let rhs = f_norms.l2.upper() * b.upper() + ip_tail + 1e-10 * (1.0 + ip.abs());
        worst = worst.min(rhs - ip.abs());
    }

    Ok(InequalityAudit {
        l2_err,
        h_err,
        b_norm: b.value,
        audit_a_margin: margin,
        audit_a_pass: margin >= 0.0,
        galerkin_max: galerkin,
        audit_b_pass,
        norms_relation_samples: samples,
        norms_relation_worst: worst,
        norms_relation_pass: worst >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fit_rate_recovers_exact_power_law() {
        let pairs: Vec<(usize, f64)> =
            [8usize, 16, 32, 64].iter().map(|&n| (n, (n as f64).powi(-2))).collect();
        let fit = fit_rate(&pairs, None).unwrap();
        assert_relative_eq!(fit.kappa_hat, 2.0, max_relative = 1e-12);
        assert!(fit.residual <= 1e-12, "exact power law must fit with zero residual");
        assert_relative_eq!(fit.c_hat, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn fit_rate_recovers_prefactor() {
        let pairs: Vec<(usize, f64)> =
            [8usize, 16, 32, 64].iter().map(|&n| (n, 3.0 / n as f64)).collect();
        let fit = fit_rate(&pairs, None).unwrap();
        assert_relative_eq!(fit.kappa_hat, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.c_hat, 3.0, max_relative = 1e-10);
    }

    #[test]
    fn fit_rate_excludes_floor_points_and_degenerates() {
        let pairs = vec![(8usize, 1e-1), (16, 1e-2), (32, 0.0), (64, 1e-4)];
        let fit = fit_rate(&pairs, None).unwrap();
        assert_eq!(fit.window, vec![8, 16, 64], "zero entry must fall out of the window");

        let too_few = vec![(8usize, 1e-1), (16, 0.0), (32, 0.0), (64, 0.0)];
        assert!(matches!(fit_rate(&too_few, None), Err(CoreError::DegenerateFit(_))));
    }

    #[test]
    fn fit_rate_is_scale_equivariant() {
        let pairs: Vec<(usize, f64)> = [5usize, 9, 17, 33, 65]
            .iter()
            .map(|&n| (n, 0.7 * (n as f64).powf(-1.3) * (1.0 + 0.01 * (n as f64).sin())))
            .collect();
        let scaled: Vec<(usize, f64)> = pairs.iter().map(|&(n, e)| (n, 7.5 * e)).collect();
        let f1 = fit_rate(&pairs, None).unwrap();
        let f2 = fit_rate(&scaled, None).unwrap();
        assert_relative_eq!(f1.kappa_hat, f2.kappa_hat, max_relative = 1e-12);
        assert_relative_eq!(f2.c_hat / f1.c_hat, 7.5, max_relative = 1e-10);
    }

    fn synthetic_report(label: &str, l2_kappa: f64, h_kappa: Option<f64>) -> StudyReport {
        let fitted = |k: f64| RateFit {
            kappa_hat: k,
            c_hat: 1.0,
            window: vec![64, 128, 256],
            residual: 0.0,
        };
        StudyReport {
            label: label.into(),
            setting: Setting::Korobov,
            space_id: "korobov[test]".into(),
            scheme_id: "equispaced".into(),
            target_id: "synthetic".into(),
            rows: vec![],
            l2_fit: Some(fitted(l2_kappa)),
            h_fit: h_kappa.map(fitted),
            degenerate: vec![],
            audits_pass: true,
        }
    }

    #[test]
    fn doubling_verdict_arithmetic_on_synthetic_slopes() {
        let rough = synthetic_report("rough", 1.0, None);
        let smooth_fail = synthetic_report("smooth", 1.2, None);
        let v = doubling_verdict(&smooth_fail, &rough, DEFAULT_SLACK).unwrap();
        assert!(!v.pass(), "slope 1.2 is far below the doubled rate 2.0");
        assert_relative_eq!(v.l2_deficit, 0.8, max_relative = 1e-12);

        let smooth_pass = synthetic_report("smooth", 2.0, Some(1.0));
        let v = doubling_verdict(&smooth_pass, &rough, DEFAULT_SLACK).unwrap();
        assert!(v.pass());
        assert!(v.l2_deficit.abs() <= 1e-12);
        assert_relative_eq!(v.h_deficit.unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn doubling_verdict_rejects_mismatched_reports() {
        let rough = synthetic_report("rough", 1.0, None);
        let mut smooth = synthetic_report("smooth", 2.0, None);
        smooth.scheme_id = "random".into();
        assert!(matches!(
            doubling_verdict(&smooth, &rough, DEFAULT_SLACK),
            Err(CoreError::IncompatibleReports(_))
        ));
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let (mut cfg, _) = StudyConfig::korobov_pair(1.0, 1);
        cfg.sweep = vec![8, 16, 16, 32];
        assert!(matches!(cfg.validate(), Err(CoreError::InvalidConfig(_))));
        cfg.sweep = vec![8, 16, 32];
        assert!(matches!(cfg.validate(), Err(CoreError::InvalidConfig(_))));
        cfg.sweep = vec![8, 16, 32, 64];
        cfg.target = TargetSpec::MkLinear;
        assert!(matches!(cfg.validate(), Err(CoreError::InvalidConfig(_))));
    }

    #[test]
    fn trig_polynomial_converges_at_the_doubled_rate() {
        // A finite trig polynomial is NOT exactly reproduced by kernel
        // interpolation (the minimum-norm interpolant spreads every residue
        // class across aliases), but it lies deep in the smoother space, so
        // its L2 error decays at the doubled rate 2α.
        let (mut cfg, _) = StudyConfig::korobov_pair(1.0, 3);
        cfg.sweep = vec![8, 16, 32, 64];
        cfg.target = TargetSpec::TrigPoly { degree: 3 };
        cfg.truncation = 16384;
        let report = run_sweep(&cfg).unwrap();
        assert!(report.audits_pass);
        let fit = report.l2_fit.expect("trig sweep stays above the error floor");
        assert!(
            fit.kappa_hat > 1.5 && fit.kappa_hat < 3.2,
            "expected decay near 2α = 2, got {}",
            fit.kappa_hat
        );
    }

    #[test]
    fn in_span_target_saturates_and_degenerates_the_fit() {
        // A kernel combination on the coarsest grid lies in the span at every
        // nested n, so all measured errors are numerical noise.
        let (mut cfg, _) = StudyConfig::korobov_pair(1.0, 3);
        cfg.sweep = vec![8, 16, 32, 64];
        cfg.target = TargetSpec::KernelCombination { fine_n: 8 };
        let report = run_sweep(&cfg).unwrap();
        for row in &report.rows {
            assert!(
                row.triple.flags.iter().any(|f| f == "l2_saturated"),
                "n = {} reproduces an in-span target exactly: {:?}",
                row.triple.n,
                row.triple
            );
        }
        assert!(report.l2_fit.is_none(), "saturated sweep cannot support a rate fit");
        assert!(!report.degenerate.is_empty());
    }

    #[test]
    fn small_korobov_sweep_produces_audited_rows_and_fits() {
        let (mut cfg, _) = StudyConfig::korobov_pair(1.0, 11);
        cfg.sweep = vec![8, 16, 32, 64];
        cfg.target = TargetSpec::RoughSpectral { support: 64 };
        cfg.truncation = 8192;
        let report = run_sweep(&cfg).unwrap();
        assert!(report.audits_pass, "per-instance audits must hold: {:?}", report.rows);
        let fit = report.l2_fit.expect("rough sweep is unsaturated");
        assert!(
            fit.kappa_hat > 0.5 && fit.kappa_hat < 1.8,
            "α = 1 rough target should decay near rate 1, got {}",
            fit.kappa_hat
        );
        for row in &report.rows {
            assert!(matches!(row.triple.b_norm, BColumn::Value(_)));
            assert!(row.audit_a.expect("finite B ⇒ audit A computed") >= 0.0);
        }
        // Nested equispaced sets: H error can only shrink when nodes double.
        let h: Vec<f64> = report.rows.iter().map(|r| r.triple.h.unwrap().value).collect();
        for w in h.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "projection onto a superset space grew the H error");
        }
    }

    #[test]
    fn min_kernel_smooth_target_doubles_cleanly() {
        let (_, mut cfg) = StudyConfig::min_kernel_pair(5);
        cfg.sweep = vec![8, 16, 32, 64];
        let report = run_sweep(&cfg).unwrap();
        assert!(report.audits_pass);
        let l2 = report.l2_fit.expect("smooth min-kernel sweep fits");
        assert!(
            l2.kappa_hat > 1.5 && l2.kappa_hat < 2.6,
            "piecewise-linear projection of a smooth target decays near rate 2, got {}",
            l2.kappa_hat
        );
        let h = report.h_fit.expect("H fit present");
        assert!(h.kappa_hat > 0.6, "H rate near 1 expected, got {}", h.kappa_hat);
    }

    #[test]
    fn sweep_rows_independent_of_thread_count() {
        let (mut cfg, _) = StudyConfig::korobov_pair(1.0, 13);
        cfg.sweep = vec![8, 16, 32, 64, 128];
        cfg.target = TargetSpec::RoughSpectral { support: 32 };
        cfg.truncation = 4096;
        let single = run_sweep(&cfg).unwrap();
        cfg.threads = 3;
        let multi = run_sweep(&cfg).unwrap();
        for (a, b) in single.rows.iter().zip(&multi.rows) {
            assert_eq!(a.triple.n, b.triple.n);
            assert_eq!(a.triple.l2.value.to_bits(), b.triple.l2.value.to_bits());
            assert_eq!(
                a.triple.h.unwrap().value.to_bits(),
                b.triple.h.unwrap().value.to_bits()
            );
        }
    }

    #[test]
    fn audit_theorem3_holds_for_low_and_aliased_frequencies() {
        let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
        let kernel = KernelSpec::Korobov(space.clone());
        let nodes = PointSet::equispaced(4).unwrap();

        // ĝ(±1) = 1/2 at n = 4: closed-form minimum-norm error (see the
        // measure tests), small but nonzero; inequality must hold.
        let g = SpectralFunction::finite_real(1, &[(vec![1], 0.5)]).unwrap();
        let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
        let interp = fit(&kernel, &nodes, &values).unwrap();
        let audit = audit_theorem3(&space, &g, &interp, 4096, 17).unwrap();
        assert!(audit.pass(), "low-frequency target must pass: {audit:?}");
        let s = std::f64::consts::PI.powi(2) / 8.0;
        let lambda = 0.5 / s;
        let exact_sq = 2.0
            * ((0.5 - lambda).powi(2)
                + lambda * lambda * (std::f64::consts::PI.powi(4) / 96.0 - 1.0));
        assert_relative_eq!(audit.l2_err.value, exact_sq.sqrt(), max_relative = 1e-6);

        // Frequency 5 aliases onto 1 at n = 4: larger errors, inequality holds.
        let g = SpectralFunction::finite_real(1, &[(vec![5], 0.5)]).unwrap();
        let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
        let interp = fit(&kernel, &nodes, &values).unwrap();
        let audit = audit_theorem3(&space, &g, &interp, 4096, 17).unwrap();
        assert!(audit.l2_err.value > 0.5, "aliased target cannot be tracked");
        assert!(audit.pass(), "projection inequality must hold: {audit:?}");
    }

    #[test]
    fn audit_theorem3_rejects_divergent_b() {
        let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
        let kernel = KernelSpec::Korobov(space.clone());
        let fine = PointSet::equispaced(8).unwrap();
        let combo =
            SpectralFunction::kernel_combo(space.clone(), fine.clone(), vec![1.0; 8]).unwrap();
        let nodes = PointSet::equispaced(4).unwrap();
        let values: Vec<f64> = nodes.iter().map(|t| combo.value(t)).collect();
        let interp = fit(&kernel, &nodes, &values).unwrap();
        assert!(matches!(
            audit_theorem3(&space, &combo, &interp, 64, 3),
            Err(CoreError::UnboundedB)
        ));
    }

    #[test]
    fn rbf_sweep_reports_qualitative_rows() {
        let (_, mut cfg) = StudyConfig::rbf_pair(23);
        cfg.sweep = vec![16, 24, 36, 54];
        cfg.quad_panels = 6;
        cfg.quad_order = 4;
        let report = run_sweep(&cfg).unwrap();
        for row in &report.rows {
            assert!(row.triple.h.is_none(), "no native-norm measurement without a norm formula");
            assert_eq!(row.triple.b_norm, BColumn::NotComputed);
            assert!(row.audit_a.is_none());
            assert!(!row.triple.flags.iter().any(|f| f == "solve_failed"));
        }
        assert!(report.audits_pass, "interpolation residual audit must pass");
    }

    #[test]
    fn run_pair_verdict_gating_by_setting() {
        let (mut rough, mut smooth) = StudyConfig::korobov_pair(1.0, 29);
        rough.sweep = vec![8, 16, 32, 64, 128];
        rough.target = TargetSpec::RoughSpectral { support: 128 };
        rough.truncation = 8192;
        smooth.sweep = rough.sweep.clone();
        smooth.target = TargetSpec::SmoothSpectral { support: 128 };
        smooth.truncation = 8192;
        let outcome = run_pair(&rough, &smooth).unwrap();
        let verdict = outcome.verdict.expect("periodic pair forms a verdict");
        assert!(
            verdict.smooth_l2.kappa_hat > verdict.rough_l2.kappa_hat,
            "smooth target must visibly outpace the rough one: {:?}",
            verdict
        );
    }
}
