//! Error measurement with explicit uncertainty.
//!
//! Every measured quantity is returned as a value plus a bound on what the
//! measurement itself could have missed (quadrature refinement gap, spectral
//! tail beyond the truncation box, solver residual), so downstream rate fits
//! and inequality audits can assert with slack instead of trusting point
//! estimates.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::interp::Interpolant;
use crate::kernel::KernelSpec;
use crate::korobov::spectral::{for_each_in_box, outside_box_r_inv_sum, SpectralFunction};
use crate::korobov::KorobovSpace;
use crate::points::Provenance;
use crate::quad::{qmc_shifted_lattice, tensor_integrate, CompositeGl};

/// Budget on (box cardinality) × (cost per frequency) for spectral sums, to
/// keep configuration mistakes from hanging a run.
const SPECTRAL_BUDGET: f64 = 5e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Gram,
    Quadrature,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Gram => "gram",
            Method::Quadrature => "quadrature",
        }
    }
}

/// A measured nonnegative quantity and a bound on the measurement error.
#[derive(Debug, Clone, Copy)]
pub struct Measured {
    pub value: f64,
    pub bound: f64,
    pub method: Method,
}

/// The B-norm column of a sweep row: finite, provably divergent, or not
/// computable in the given setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BColumn {
    Value(f64),
    Divergent,
    NotComputed,
}

impl BColumn {
    pub fn as_csv(&self) -> String {
        match self {
            BColumn::Value(v) => format!("{v:.16e}"),
            BColumn::Divergent => "inf".into(),
            BColumn::NotComputed => "na".into(),
        }
    }
}

/// One sweep instance: node count plus the measured error pair and the
/// target's B-norm.
#[derive(Debug, Clone)]
pub struct ErrorTriple {
    pub n: usize,
    pub l2: Measured,
    pub h: Option<Measured>,
    pub b_norm: BColumn,
    pub flags: Vec<String>,
}

impl ErrorTriple {
    /// When every γ_j ≤ 1 the Korobov weights satisfy r ≥ 1, so spectral
    /// norms embed: ‖·‖_L2 ≤ ‖·‖_H. Checked with both measurement bounds as
    /// slack; `None` when no H measurement exists or the condition fails.
    pub fn embedding_consistent(&self, max_gamma: f64) -> Option<bool> {
        if max_gamma > 1.0 {
            return None;
        }
        self.h.map(|h| self.l2.value - self.l2.bound <= h.value + h.bound)
    }
}

/// L2([0,1]^d) distance between two evaluable functions by tensor
/// Gauss-Legendre quadrature for d ≤ 3. The bound is the gap between the
/// coarse and a once-refined evaluation.
pub fn l2_error_quadrature<F, G>(f: F, s: G, dim: usize, panels: usize, order: usize) -> Measured
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let sq = |x: &[f64]| {
        let d = f(x) - s(x);
        d * d
    };
    let coarse = tensor_integrate(dim, panels, order, &sq);
    let fine = tensor_integrate(dim, panels * 2, order, &sq);
    let value = fine.max(0.0).sqrt();
    let bound = (value - coarse.max(0.0).sqrt()).abs() + 1e-15 * (1.0 + value);
    Measured { value, bound, method: Method::Quadrature }
}

/// One-dimensional variant with prescribed quadrature breakpoints (panel
/// edges), for integrands with kinks at known places such as piecewise-linear
/// interpolants. Refinement halves every panel.
pub fn l2_error_quadrature_breaks<F, G>(f: F, s: G, breaks: &[f64], order: usize) -> Measured
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let sq = |x: f64| {
        let d = f(x) - s(x);
        d * d
    };
    let coarse = CompositeGl::on_breaks(breaks, order).integrate(&sq);
    let mut refined = Vec::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        refined.push(w[0]);
        refined.push(0.5 * (w[0] + w[1]));
    }
    refined.push(*breaks.last().expect("breaks nonempty"));
    let fine = CompositeGl::on_breaks(&refined, order).integrate(&sq);
    let value = fine.max(0.0).sqrt();
    let bound = (value - coarse.max(0.0).sqrt()).abs() + 1e-15 * (1.0 + value);
    Measured { value, bound, method: Method::Quadrature }
}

/// Randomized shifted-lattice estimate for d > 3, with the shift standard
/// error propagated through the square root as the bound.
pub fn l2_error_qmc<F, G>(
    f: F,
    s: G,
    dim: usize,
    log2_points: u32,
    shifts: usize,
    seed: u64,
) -> Measured
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let (mean, stderr) = qmc_shifted_lattice(dim, log2_points, shifts, seed, |x| {
        let d = f(x) - s(x);
        d * d
    });
    let hi = (mean + stderr).max(0.0).sqrt();
    let lo = (mean - stderr).max(0.0).sqrt();
    let value = mean.max(0.0).sqrt();
    Measured { value, bound: (hi - lo).max(1e-15 * (1.0 + value)), method: Method::Quadrature }
}

/// How the interpolant's node set folds frequencies onto finitely many
/// residue classes, if it does.
enum NodeStructure {
    /// t_k = k/n (d = 1): A(h) depends only on h mod n.
    Equispaced { n: usize },
    /// Rank-1 lattice t_k = frac(k z / n): A(h) depends only on (h·z) mod n.
    Rank1 { n: usize, z: Vec<u64> },
    General,
}

fn node_structure(interp: &Interpolant) -> NodeStructure {
    match interp.nodes().provenance() {
        Provenance::Equispaced if interp.nodes().dim() == 1 => {
            NodeStructure::Equispaced { n: interp.nodes().len() }
        }
        Provenance::Rank1Lattice { z, n } => NodeStructure::Rank1 { n: *n, z: z.clone() },
        _ => NodeStructure::General,
    }
}

/// Â(j) = Σ_k a_k e^{-2πi j k / n} over node indices k. For equispaced nodes
/// t_k = k/n this is A(h) at any h ≡ j (mod n); for a rank-1 lattice it is
/// A(h) at any h with h·z ≡ j (mod n). Phases reduce through integer
/// arithmetic, so no accuracy is lost at large j·k.
fn residue_table(interp: &Interpolant) -> Vec<Complex64> {
    let a = interp.coeffs();
    let n = interp.nodes().len();
    let mut table = vec![Complex64::new(0.0, 0.0); n];
    for (j, slot) in table.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &ak) in a.iter().enumerate() {
            let e = (j as u64 * k as u64) % n as u64;
            let phase = -std::f64::consts::TAU * e as f64 / n as f64;
            acc += ak * Complex64::new(phase.cos(), phase.sin());
        }
        *slot = acc;
    }
    table
}

fn lattice_class(h: &[i64], z: &[u64], n: usize) -> usize {
    let mut acc: i128 = 0;
    for (hj, &zj) in h.iter().zip(z) {
        acc += *hj as i128 * zj as i128;
    }
    acc.rem_euclid(n as i128) as usize
}

/// Σ_{h ≡ j (mod n), |h| > m} |h|^{-p}: exact over the first terms of each
/// arithmetic progression, then an upper bound (first term + density-1/n
/// integral) on the remainder.
fn residue_tail(n: usize, j: usize, m: i64, p: f64) -> f64 {
    debug_assert!(p > 1.0, "tail exponent must exceed 1, got {p}");
    let n_i = n as i64;
    let j_i = j as i64;
    let mut total = 0.0;
    for dir in [1i64, -1] {
        let mut h = if dir == 1 { j_i } else { j_i - n_i };
        while dir * h <= m {
            h += dir * n_i;
        }
        let mut abs_h = (dir * h) as f64;
        for _ in 0..64 {
            total += abs_h.powf(-p);
            abs_h += n as f64;
        }
        total += abs_h.powf(-p) + abs_h.powf(1.0 - p) / ((p - 1.0) * n as f64);
    }
    total
}

struct ResidualSums {
    l2_sq: f64,
    h_sq: f64,
    b_sq: f64,
    l2_tail_sq: f64,
    h_tail_sq: f64,
    /// None when the B tail diverges (some residue amplitude is nonzero).
    b_tail_sq: Option<f64>,
}

/// Box sums of |ĝ(h) - A(h)/r(h)|² under the weights 1, r, r², plus tail
/// bounds beyond the box, where A(h) = Σ_k a_k e^{-2πi h·t_k} is the
/// interpolant's node transform.
fn spectral_residual_sums(
    space: &KorobovSpace,
    g: &SpectralFunction,
    interp: &Interpolant,
    truncation: i64,
) -> Result<ResidualSums> {
    let dim = space.dim();
    if interp.nodes().dim() != dim {
        return Err(CoreError::DimensionMismatch { expected: dim, got: interp.nodes().dim() });
    }
    match interp.kernel() {
        KernelSpec::Korobov(s) if s == space => {}
        other => {
            return Err(CoreError::KernelMismatch(
                KernelSpec::Korobov(space.clone()).id_string(),
                other.id_string(),
            ))
        }
    }
    if truncation < 1 {
        return Err(CoreError::InvalidConfig("spectral truncation must be at least 1".into()));
    }
    let support = match g {
        SpectralFunction::Finite { .. } => g
            .support_radius()
            .expect("finite spectral functions always report a support radius"),
        SpectralFunction::KernelCombo { .. } => {
            return Err(CoreError::InvalidConfig(
                "spectral error measurement requires a finite-support target".into(),
            ))
        }
    };
    if support > truncation as u64 {
        return Err(CoreError::TruncationTooSmall { truncation: truncation as u64, support });
    }

    let structure = node_structure(interp);
    let box_card = (2 * truncation + 1).pow(dim as u32) as f64;
    let per_freq_cost = match structure {
        NodeStructure::General => interp.nodes().len() as f64,
        _ => 1.0,
    };
    if box_card * per_freq_cost > SPECTRAL_BUDGET {
        return Err(CoreError::InvalidConfig(format!(
            "spectral box of {box_card:.0} frequencies × {per_freq_cost:.0} ops per frequency \
             exceeds the budget; lower the truncation"
        )));
    }

    let table: Option<Vec<Complex64>> = match &structure {
        NodeStructure::Equispaced { .. } | NodeStructure::Rank1 { .. } => {
            Some(residue_table(interp))
        }
        NodeStructure::General => None,
    };

    let a_l1: f64 = interp.coeffs().iter().map(|a| a.abs()).sum();
    let smoother = space.smoother_square();
    let mut l2_sq = 0.0;
    let mut h_sq = 0.0;
    let mut b_sq = 0.0;

    for_each_in_box(dim, truncation, |h: &[i64]| {
        let r = space.r_weight(h);
        let amp = match &structure {
            NodeStructure::Equispaced { n } => {
                table.as_ref().expect("table built")[h[0].rem_euclid(*n as i64) as usize]
            }
            NodeStructure::Rank1 { n, z } => {
                table.as_ref().expect("table built")[lattice_class(h, z, *n)]
            }
            NodeStructure::General => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (node, &ak) in interp.nodes().iter().zip(interp.coeffs()) {
                    let mut phase = 0.0;
                    for (hj, tj) in h.iter().zip(node) {
                        let p = *hj as f64 * tj;
                        phase += p - p.floor();
                    }
                    let angle = -std::f64::consts::TAU * (phase - phase.floor());
                    acc += ak * Complex64::new(angle.cos(), angle.sin());
                }
                acc
            }
        };
        let resid = g.coeff(h) - amp / r;
        let sq = resid.norm_sqr();
        l2_sq += sq;
        h_sq += sq * r;
        b_sq += sq * smoother.r_weight(h);
    });

    // Beyond the box the target vanishes, so the residual spectrum is
    // -A(h)/r(h) there.
    let (l2_tail_sq, h_tail_sq, b_tail_sq) = match (&structure, &table) {
        (NodeStructure::Equispaced { n }, Some(t)) if dim == 1 => {
            let gamma = space.weights().gamma(0);
            let two_alpha = 2.0 * space.alpha();
            let mut l2t = 0.0;
            let mut ht = 0.0;
            let mut any = false;
            for (j, amp) in t.iter().enumerate() {
                let a2 = amp.norm_sqr();
                if a2 == 0.0 {
                    continue;
                }
                any = true;
                l2t += a2 * gamma * gamma * residue_tail(*n, j, truncation, 2.0 * two_alpha);
                ht += a2 * gamma * residue_tail(*n, j, truncation, two_alpha);
            }
            (l2t, ht, if any { None } else { Some(0.0) })
        }
        _ => {
            let a_inf_sq = a_l1 * a_l1;
            let l2t = a_inf_sq * outside_box_r_inv_sum(&smoother, truncation as u64);
            let ht = a_inf_sq * outside_box_r_inv_sum(space, truncation as u64);
            (l2t, ht, if a_l1 == 0.0 { Some(0.0) } else { None })
        }
    };

    Ok(ResidualSums { l2_sq, h_sq, b_sq, l2_tail_sq, h_tail_sq, b_tail_sq })
}

/// Parseval L2 error of the interpolant against a finite-support target:
/// box sum of |ĝ(h) - f̂_n(h)|² plus a rigorous tail bound for the
/// interpolant's spectrum beyond the box.
pub fn l2_error_spectral(
    space: &KorobovSpace,
    g: &SpectralFunction,
    interp: &Interpolant,
    truncation: i64,
) -> Result<Measured> {
    let sums = spectral_residual_sums(space, g, interp, truncation)?;
    let value = sums.l2_sq.max(0.0).sqrt();
    let total = sums.l2_sq + sums.l2_tail_sq;
    let bound = (total.max(0.0).sqrt() - value) + 1e-15 * (1.0 + value);
    Ok(Measured { value, bound, method: Method::Spectral })
}

#[derive(Debug, Clone, Copy)]
pub struct HbSpectral {
    pub h: Measured,
    pub b: Measured,
    /// True when the B-weighted tail cannot be finite: the interpolant's
    /// spectrum decays like 1/r, so its B-weighted square has unit-sized
    /// terms in every residue class with a nonzero amplitude.
    pub b_divergent: bool,
}

/// Weighted-Parseval error norms of the residual, under the space weight r
/// (H norm) and the squared-space weight r² (B norm).
pub fn h_b_error_spectral(
    space: &KorobovSpace,
    g: &SpectralFunction,
    interp: &Interpolant,
    truncation: i64,
) -> Result<HbSpectral> {
    let sums = spectral_residual_sums(space, g, interp, truncation)?;
    let h_value = sums.h_sq.max(0.0).sqrt();
    let h_total = sums.h_sq + sums.h_tail_sq;
    let h = Measured {
        value: h_value,
        bound: (h_total.max(0.0).sqrt() - h_value) + 1e-15 * (1.0 + h_value),
        method: Method::Spectral,
    };
    let b_value = sums.b_sq.max(0.0).sqrt();
    let (b_bound, b_divergent) = match sums.b_tail_sq {
        Some(t) => {
            (((sums.b_sq + t).max(0.0).sqrt() - b_value) + 1e-15 * (1.0 + b_value), false)
        }
        None => (f64::INFINITY, true),
    };
    Ok(HbSpectral {
        h,
        b: Measured { value: b_value, bound: b_bound, method: Method::Spectral },
        b_divergent,
    })
}

/// Exact (up to solver residual and roundoff) H-norm projection error from
/// the reproducing identity: ‖g - g_n‖² = ‖g‖² - 2 Σ_k a_k g(t_k) + aᵀGa.
/// Needs only ‖g‖²_H and the node values already stored in the interpolant;
/// no spectral tail enters, which is what makes this the preferred H route
/// for sweeps (the spectral H tail decays too slowly to resolve small errors).
pub fn h_error_exact(g_h_norm_sq: f64, interp: &Interpolant) -> Result<Measured> {
    let a = interp.coeffs();
    let v = interp.node_values();
    let cross: f64 = a.iter().zip(v).map(|(ai, vi)| ai * vi).sum();
    let quad = interp.h_norm_sq();
    let err_sq = g_h_norm_sq - 2.0 * cross + quad;

    let a_l1: f64 = a.iter().map(|x| x.abs()).sum();
    let sq_bound = 2.0 * a_l1 * interp.residual_inf
        + 1e-14 * (g_h_norm_sq.abs() + 2.0 * cross.abs() + quad.abs());
    if err_sq < -(sq_bound + 1e-10 * g_h_norm_sq.abs()) {
        return Err(CoreError::PythagorasMismatch { pythagoras: err_sq, direct: 0.0, tol: 1e-10 });
    }
    let value = err_sq.max(0.0).sqrt();
    let bound = if err_sq > sq_bound {
        sq_bound / (2.0 * value)
    } else {
        sq_bound.max(0.0).sqrt()
    };
    Ok(Measured { value, bound, method: Method::Gram })
}
