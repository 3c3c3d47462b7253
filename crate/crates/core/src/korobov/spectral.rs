//! Spectral-side representation of functions on the torus: finite coefficient
//! maps and kernel combinations, with norm/inner-product sums over a
//! truncation box plus analytic tail bounds.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::points::PointSet;

use super::{FreqIndex, KorobovSpace};

const TAU: f64 = std::f64::consts::TAU;

/// Partial sum Σ_{h=1..m} h^{-s}, accumulated small-to-large.
pub(crate) fn partial_zeta(s: f64, m: u64) -> f64 {
    (1..=m).rev().map(|h| (h as f64).powf(-s)).sum()
}

/// Upper bound on ζ(s) via partial sum plus integral tail, s > 1.
pub(crate) fn zeta_upper(s: f64, m: u64) -> f64 {
    let m = m.max(16);
    partial_zeta(s, m) + (m as f64).powf(1.0 - s) / (s - 1.0)
}

/// Upper bound on Σ over h outside the box [-m,m]^d of 1/r(h) for the given
/// space. Infinite when 2α ≤ 1 (never the case for a valid space).
pub(crate) fn outside_box_r_inv_sum(space: &KorobovSpace, m: u64) -> f64 {
    let s = 2.0 * space.alpha();
    if s <= 1.0 {
        return f64::INFINITY;
    }
    let mut prod_all = 1.0;
    let mut prod_box = 1.0;
    for j in 0..space.dim() {
        let g = space.weights().gamma(j);
        prod_all *= 1.0 + 2.0 * g * zeta_upper(s, m.max(1024));
        prod_box *= 1.0 + 2.0 * g * partial_zeta(s, m);
    }
    (prod_all - prod_box).max(0.0)
}

/// Visit every h in [-m, m]^d.
pub fn for_each_in_box(dim: usize, m: i64, mut visit: impl FnMut(&[i64])) {
    let mut h = vec![-m; dim];
    loop {
        visit(&h);
        let mut c = 0;
        loop {
            if c == dim {
                return;
            }
            h[c] += 1;
            if h[c] <= m {
                break;
            }
            h[c] = -m;
            c += 1;
        }
    }
}

/// A function described on the Fourier side. Either an explicit finite
/// coefficient map, or a combination Σ_k a_k K(t_k, ·) whose coefficients are
/// f̂(h) = (Σ_k a_k e^{-2πi h·t_k}) / r(h).
#[derive(Debug, Clone)]
pub enum SpectralFunction {
    Finite {
        dim: usize,
        coeffs: BTreeMap<FreqIndex, Complex64>,
    },
    KernelCombo {
        space: KorobovSpace,
        nodes: PointSet,
        coeffs: Vec<f64>,
    },
}

impl SpectralFunction {
    pub fn finite(dim: usize, entries: Vec<(FreqIndex, Complex64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (h, c) in entries {
            if h.dim() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: h.dim() });
            }
            if c != Complex64::new(0.0, 0.0) {
                *coeffs.entry(h).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(SpectralFunction::Finite { dim, coeffs })
    }

    /// Real-valued function from (h, real amplitude) pairs: each entry sets
    /// both f̂(h) and f̂(-h) to the amplitude (Hermitian by construction).
    /// Pass h = 0 entries at most once.
    pub fn finite_real(dim: usize, entries: &[(Vec<i64>, f64)]) -> Result<Self> {
        let mut expanded = Vec::with_capacity(entries.len() * 2);
        for (h, amp) in entries {
            let idx = FreqIndex(h.clone());
            if idx.radius() == 0 {
                expanded.push((idx, Complex64::new(*amp, 0.0)));
            } else {
                expanded.push((idx.negated(), Complex64::new(*amp, 0.0)));
                expanded.push((idx, Complex64::new(*amp, 0.0)));
            }
        }
        Self::finite(dim, expanded)
    }

    pub fn kernel_combo(space: KorobovSpace, nodes: PointSet, coeffs: Vec<f64>) -> Result<Self> {
        if nodes.dim() != space.dim() {
            return Err(CoreError::DimensionMismatch { expected: space.dim(), got: nodes.dim() });
        }
        if nodes.len() != coeffs.len() {
            return Err(CoreError::DimensionMismatch { expected: nodes.len(), got: coeffs.len() });
        }
        Ok(SpectralFunction::KernelCombo { space, nodes, coeffs })
    }

    pub fn dim(&self) -> usize {
        match self {
            SpectralFunction::Finite { dim, .. } => *dim,
            SpectralFunction::KernelCombo { space, .. } => space.dim(),
        }
    }

    /// max_j |h_j| over the support; None when the spectrum is infinite.
    pub fn support_radius(&self) -> Option<u64> {
        match self {
            SpectralFunction::Finite { coeffs, .. } => {
                Some(coeffs.keys().map(|h| h.radius()).max().unwrap_or(0))
            }
            SpectralFunction::KernelCombo { coeffs, .. } => {
                if coeffs.iter().all(|&a| a == 0.0) {
                    Some(0)
                } else {
                    None
                }
            }
        }
    }

    pub fn coeff(&self, h: &[i64]) -> Complex64 {
        match self {
            SpectralFunction::Finite { coeffs, .. } => coeffs
                .get(&FreqIndex(h.to_vec()))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0)),
            SpectralFunction::KernelCombo { space, nodes, coeffs } => {
                node_transform(nodes, coeffs, h) / space.r_weight(h)
            }
        }
    }

    pub fn coeff_entries(&self) -> Option<&BTreeMap<FreqIndex, Complex64>> {
        match self {
            SpectralFunction::Finite { coeffs, .. } => Some(coeffs),
            _ => None,
        }
    }

    /// Pointwise value. Finite maps are summed as Σ c_h e^{2πi h·x} and must
    /// be (numerically) real; kernel combinations evaluate through the kernel.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SpectralFunction::Finite { coeffs, .. } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (h, c) in coeffs {
                    acc += c * cis_dot(&h.0, x);
                }
                debug_assert!(
                    acc.im.abs() <= 1e-9 * (1.0 + acc.re.abs()),
                    "imaginary residue {} in pointwise value",
                    acc.im
                );
                acc.re
            }
            SpectralFunction::KernelCombo { space, nodes, coeffs } => nodes
                .iter()
                .zip(coeffs)
                .map(|(t, &a)| a * space.kernel(t, x))
                .sum(),
        }
    }

    /// Σ_k |a_k| for combinations: a uniform bound on |Σ_k a_k e^{-2πi h·t_k}|.
    fn coeff_l1(&self) -> f64 {
        match self {
            SpectralFunction::Finite { .. } => 0.0,
            SpectralFunction::KernelCombo { coeffs, .. } => coeffs.iter().map(|a| a.abs()).sum(),
        }
    }
}

/// A(h) = Σ_k a_k e^{-2πi h·t_k}.
fn node_transform(nodes: &PointSet, coeffs: &[f64], h: &[i64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, &a) in nodes.iter().zip(coeffs) {
        acc += a * cis_dot_neg(h, t);
    }
    acc
}

/// e^{2πi h·x}, with each h_j x_j reduced mod 1 before the trig call so large
/// frequencies do not lose phase accuracy.
#[inline]
pub fn cis_dot(h: &[i64], x: &[f64]) -> Complex64 {
    let mut phase = 0.0;
    for (hj, xj) in h.iter().zip(x) {
        let p = *hj as f64 * xj;
        phase += p - p.floor();
    }
    Complex64::from_polar(1.0, TAU * (phase - phase.floor()))
}

#[inline]
fn cis_dot_neg(h: &[i64], x: &[f64]) -> Complex64 {
    cis_dot(h, x).conj()
}

/// A norm computed as a box sum: `value` is the box part, `tail` bounds what
/// the rest of the spectrum can add (true norm lies in [value, hypot(value, tail)]).
#[derive(Debug, Clone, Copy)]
pub struct NormEstimate {
    pub value: f64,
    pub tail: f64,
}

impl NormEstimate {
    pub fn upper(&self) -> f64 {
        self.value.hypot(self.tail)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum BNorm {
    Finite(NormEstimate),
    /// The box part keeps growing without bound; `partial` is the box value.
    Divergent { partial: f64 },
}

impl BNorm {
    pub fn is_finite(&self) -> bool {
        matches!(self, BNorm::Finite(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NormTriple {
    pub l2: NormEstimate,
    pub h: NormEstimate,
    pub b: BNorm,
}

/// L2, native (H) and smoother-space (B) norms of `f` measured in `space`,
/// summed over the box [-truncation, truncation]^d with analytic tail bounds.
///
/// Finite maps are summed exactly over their support (truncation must cover
/// it). Kernel combinations must come from the same space they are measured
/// in; their B-norm diverges whenever any coefficient is nonzero, because
/// kernel sections carry |f̂(h)| ~ 1/r(h) and the B-weighted sum of 1/r(h)²·r_B
/// is Σ_h 1.
pub fn spectral_norms(space: &KorobovSpace, f: &SpectralFunction, truncation: u64) -> Result<NormTriple> {
    if f.dim() != space.dim() {
        return Err(CoreError::DimensionMismatch { expected: space.dim(), got: f.dim() });
    }
    let b_space = space.smoother_square();
    match f {
        SpectralFunction::Finite { coeffs, .. } => {
            let radius = f.support_radius().unwrap_or(0);
            if radius > truncation {
                return Err(CoreError::TruncationTooSmall { truncation, support: radius });
            }
            let mut l2 = 0.0;
            let mut h2 = 0.0;
            let mut b2 = 0.0;
            for (h, c) in coeffs {
                let mag = c.norm_sqr();
                l2 += mag;
                h2 += space.r_weight(&h.0) * mag;
                b2 += b_space.r_weight(&h.0) * mag;
            }
            Ok(NormTriple {
                l2: NormEstimate { value: l2.sqrt(), tail: 0.0 },
                h: NormEstimate { value: h2.sqrt(), tail: 0.0 },
                b: BNorm::Finite(NormEstimate { value: b2.sqrt(), tail: 0.0 }),
            })
        }
        SpectralFunction::KernelCombo { space: own, nodes, coeffs } => {
            if own != space {
                return Err(CoreError::KernelMismatch(
                    format!("combination built in {own:?}"),
                    format!("norms requested in {space:?}"),
                ));
            }
            let mut l2 = 0.0;
            let mut h2 = 0.0;
            let mut b2 = 0.0;
            for_each_in_box(space.dim(), truncation as i64, |h| {
                let a = node_transform(nodes, coeffs, h).norm_sqr();
                let r = space.r_weight(h);
                l2 += a / (r * r);
                h2 += a / r;
                b2 += a * b_space.r_weight(h) / (r * r);
            });
            let a_inf = f.coeff_l1();
            let l2_tail_sq = a_inf * a_inf * outside_box_r_inv_sum(&b_space, truncation);
            let h_tail_sq = a_inf * a_inf * outside_box_r_inv_sum(space, truncation);
            let b = if a_inf == 0.0 {
                BNorm::Finite(NormEstimate { value: 0.0, tail: 0.0 })
            } else {
                BNorm::Divergent { partial: b2.sqrt() }
            };
            Ok(NormTriple {
                l2: NormEstimate { value: l2.sqrt(), tail: l2_tail_sq.sqrt() },
                h: NormEstimate { value: h2.sqrt(), tail: h_tail_sq.sqrt() },
                b,
            })
        }
    }
}

/// ⟨f,g⟩ in `space`: Σ_h r(h) f̂(h) conj(ĝ(h)) over the truncation box, with a
/// Cauchy–Schwarz tail bound. Errors if the imaginary residue exceeds
/// 1e-10·(1+|re|) — real-valued inputs cancel it structurally.
pub fn inner_product(
    space: &KorobovSpace,
    f: &SpectralFunction,
    g: &SpectralFunction,
    truncation: u64,
) -> Result<(f64, f64)> {
    if f.dim() != space.dim() || g.dim() != space.dim() {
        return Err(CoreError::DimensionMismatch { expected: space.dim(), got: f.dim().min(g.dim()) });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    match (f.coeff_entries(), g.coeff_entries()) {
        (Some(fc), _) => {
            let radius = f.support_radius().unwrap_or(0);
            if radius > truncation {
                return Err(CoreError::TruncationTooSmall { truncation, support: radius });
            }
            for (h, c) in fc {
                acc += space.r_weight(&h.0) * c * g.coeff(&h.0).conj();
            }
        }
        (None, Some(gc)) => {
            let radius = g.support_radius().unwrap_or(0);
            if radius > truncation {
                return Err(CoreError::TruncationTooSmall { truncation, support: radius });
            }
            for (h, c) in gc {
                acc += space.r_weight(&h.0) * f.coeff(&h.0) * c.conj();
            }
        }
        (None, None) => {
            for_each_in_box(space.dim(), truncation as i64, |h| {
                let r = space.r_weight(h);
                acc += r * f.coeff(h) * g.coeff(h).conj();
            });
            let outside = outside_box_r_inv_sum(space, truncation);
            tail = f.coeff_l1() * g.coeff_l1() * outside;
        }
    }
    if acc.im.abs() > 1e-10 * (1.0 + acc.re.abs()) + tail {
        return Err(CoreError::ImaginaryResidue(acc.im));
    }
    Ok((acc.re, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn space1() -> KorobovSpace {
        KorobovSpace::isotropic(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn cosine_norms() {
        // f = cos(2πx): f̂(±1) = 1/2. α=1, γ=1: ‖f‖²_L2 = 1/2, r(±1) = 1 so
        // ‖f‖²_H = 1/2 and the smoother norm is also 1/2.
        let f = SpectralFunction::finite_real(1, &[(vec![1], 0.5)]).unwrap();
        let t = spectral_norms(&space1(), &f, 64).unwrap();
        assert_relative_eq!(t.l2.value * t.l2.value, 0.5, max_relative = 1e-14);
        assert_relative_eq!(t.h.value * t.h.value, 0.5, max_relative = 1e-14);
        match t.b {
            BNorm::Finite(e) => assert_relative_eq!(e.value * e.value, 0.5, max_relative = 1e-14),
            _ => panic!("finite support must have finite smoother norm"),
        }
        assert_relative_eq!(f.value(&[0.25]), 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.value(&[0.5]), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn truncation_must_cover_support() {
        let f = SpectralFunction::finite_real(1, &[(vec![100], 1.0)]).unwrap();
        let err = spectral_norms(&space1(), &f, 64).unwrap_err();
        assert!(matches!(err, CoreError::TruncationTooSmall { .. }));
    }

    #[test]
    fn kernel_section_reproduces_point_values() {
        // ⟨K(t,·), g⟩ = g(t): the reproducing property through the spectral sums.
        let s = space1();
        let nodes = PointSet::explicit_periodic(1, vec![0.3]).unwrap();
        let section = SpectralFunction::kernel_combo(s.clone(), nodes, vec![1.0]).unwrap();
        let g = SpectralFunction::finite_real(1, &[(vec![1], 0.5), (vec![3], -0.2), (vec![0], 0.7)]).unwrap();
        let (ip, tail) = inner_product(&s, &g, &section, 64).unwrap();
        assert_eq!(tail, 0.0);
        assert_relative_eq!(ip, g.value(&[0.3]), max_relative = 1e-12);
    }

    #[test]
    fn combo_norms_match_gram_quadratic_form() {
        // For f = Σ a_k K(t_k,·): ‖f‖²_H = aᵀ G a exactly; the box sum plus
        // tail band must cover it.
        let s = space1();
        let nodes = PointSet::explicit_periodic(1, vec![0.1, 0.55, 0.8]).unwrap();
        let a = vec![0.7, -0.4, 0.2];
        let f = SpectralFunction::kernel_combo(s.clone(), nodes.clone(), a.clone()).unwrap();
        let mut quad = 0.0;
        for (j, tj) in nodes.iter().enumerate() {
            for (k, tk) in nodes.iter().enumerate() {
                quad += a[j] * a[k] * s.kernel(tj, tk);
            }
        }
        let norms = spectral_norms(&s, &f, 2048).unwrap();
        let lo = norms.h.value;
        let hi = norms.h.upper();
        let q = quad.sqrt();
        assert!(lo <= q * (1.0 + 1e-10) && q <= hi * (1.0 + 1e-10), "{lo} <= {q} <= {hi}");
        assert!(!norms.b.is_finite(), "kernel combinations lie outside the smoother space");
    }

    #[test]
    fn inner_product_rejects_complex_valued_results() {
        // Non-Hermitian coefficients produce a genuinely complex pairing.
        let s = space1();
        let f = SpectralFunction::finite(1, vec![(FreqIndex(vec![1]), Complex64::new(0.0, 1.0))]).unwrap();
        let g = SpectralFunction::finite_real(1, &[(vec![1], 1.0)]).unwrap();
        let err = inner_product(&s, &f, &g, 8).unwrap_err();
        assert!(matches!(err, CoreError::ImaginaryResidue(_)));
    }

    #[test]
    fn tail_bounds_shrink_with_truncation() {
        let s = space1();
        let nodes = PointSet::explicit_periodic(1, vec![0.2, 0.6]).unwrap();
        let f = SpectralFunction::kernel_combo(s.clone(), nodes, vec![1.0, 1.0]).unwrap();
        let coarse = spectral_norms(&s, &f, 32).unwrap();
        let fine = spectral_norms(&s, &f, 256).unwrap();
        assert!(fine.h.tail < coarse.h.tail);
        assert!(fine.l2.tail < coarse.l2.tail);
        // Box parts are monotone increasing in the truncation.
        assert!(fine.h.value >= coarse.h.value);
    }
}
