//! Weighted Korobov spaces on the torus [0,1)^d.
//!
//! A function f with Fourier coefficients f̂(h), h ∈ Z^d, lies in the space
//! with smoothness α > 1/2 and product weights γ when
//!
//!   ‖f‖² = Σ_h r(h) |f̂(h)|²,     r(h) = (1/γ_supp(h)) · Π_{j∈supp(h)} |h_j|^{2α},
//!
//! with γ_u = Π_{j∈u} γ_j and r(0) = 1. The reproducing kernel is the product
//!
//!   K(y,x) = Π_j (1 + γ_j η_α(y_j - x_j)),   η_α(t) = Σ_{h≠0} e^{2πiht} / |h|^{2α}.
//!
//! Squaring the per-frequency weight doubles the smoothness and squares the
//! coordinate weights: r_{α,γ}(h)² = r_{2α,γ²}(h). That identity is what turns
//! an L2-vs-H error bound into a doubled rate for targets from the smoother
//! space, so it gets its own checked operation below.

pub mod spectral;

use crate::error::{CoreError, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Per-coordinate weights γ_j > 0; the weight of a coordinate subset is the
/// product of its members, and the empty subset has weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    gamma: Vec<f64>,
}

impl ProductWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(CoreError::InvalidConfig("weights need at least one coordinate".into()));
        }
        for &g in &gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(CoreError::InvalidWeight(g));
            }
        }
        Ok(ProductWeights { gamma })
    }

    pub fn uniform(dim: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![gamma; dim])
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.gamma[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    pub fn subset_weight(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&j| self.gamma[j]).product()
    }

    pub fn squared(&self) -> ProductWeights {
        ProductWeights { gamma: self.gamma.iter().map(|g| g * g).collect() }
    }
}

/// Frequency index h ∈ Z^d. Ordering is derived so coefficient maps iterate
/// deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreqIndex(pub Vec<i64>);

impl FreqIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &h)| h != 0)
            .map(|(j, _)| j)
            .collect()
    }

    /// max_j |h_j|; 0 for the zero frequency.
    pub fn radius(&self) -> u64 {
        self.0.iter().map(|h| h.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn negated(&self) -> FreqIndex {
        FreqIndex(self.0.iter().map(|h| -h).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KorobovSpace {
    alpha: f64,
    weights: ProductWeights,
}

impl KorobovSpace {
    pub fn new(alpha: f64, weights: ProductWeights) -> Result<Self> {
        if !(alpha > 0.5) || !alpha.is_finite() {
            return Err(CoreError::InvalidAlpha(alpha));
        }
        Ok(KorobovSpace { alpha, weights })
    }

    pub fn isotropic(dim: usize, alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, ProductWeights::uniform(dim, gamma)?)
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &ProductWeights {
        &self.weights
    }

    /// The space carrying the dual norm for doubled-rate targets: smoothness
    /// 2α and squared weights.
    pub fn smoother_square(&self) -> KorobovSpace {
        KorobovSpace { alpha: 2.0 * self.alpha, weights: self.weights.squared() }
    }

    /// r(h) = (1/γ_supp(h)) Π_{j: h_j≠0} |h_j|^{2α}.
    pub fn r_weight(&self, h: &[i64]) -> f64 {
        debug_assert_eq!(h.len(), self.dim());
        let mut r = 1.0;
        for (j, &hj) in h.iter().enumerate() {
            if hj != 0 {
                r *= self.pow2alpha(hj) / self.weights.gamma(j);
            }
        }
        r
    }

    /// d = 1 fast path used by the spectral sweeps.
    #[inline]
    pub fn r_weight_1d(&self, h: i64) -> f64 {
        if h == 0 {
            1.0
        } else {
            self.pow2alpha(h) / self.weights.gamma(0)
        }
    }

    #[inline]
    fn pow2alpha(&self, h: i64) -> f64 {
        let sq = (h * h) as f64;
        if self.alpha == 1.0 {
            sq
        } else if self.alpha == 2.0 {
            sq * sq
        } else if self.alpha == 3.0 {
            sq * sq * sq
        } else {
            sq.powf(self.alpha)
        }
    }

    /// Relative defect of r_{α,γ}(h)² = r_{2α,γ²}(h); callers assert it below
    /// 1e-12. Kept as an operation so both sides are evaluated through their
    /// own code paths rather than one being defined in terms of the other.
    pub fn r_square_defect(&self, h: &[i64]) -> f64 {
        let lhs = self.r_weight(h).powi(2);
        let rhs = self.smoother_square().r_weight(h);
        (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE)
    }

    /// Kernel K(y,x) = Π_j (1 + γ_j η_α(y_j - x_j)).
    pub fn kernel(&self, y: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim());
        debug_assert_eq!(x.len(), self.dim());
        let mut k = 1.0;
        for j in 0..self.dim() {
            k *= 1.0 + self.weights.gamma(j) * self.eta_fast(y[j] - x[j]);
        }
        k
    }

    /// Same kernel as an explicit sum over coordinate subsets,
    /// Σ_{u ⊆ {1..d}} γ_u Π_{j∈u} η_α(y_j - x_j). Exponential in d; this is
    /// the brute-force oracle the product form is tested against.
    pub fn kernel_subset_sum(&self, y: &[f64], x: &[f64]) -> f64 {
        assert!(self.dim() <= 20, "subset-sum oracle is exponential in d");
        let d = self.dim();
        let etas: Vec<f64> = (0..d).map(|j| self.eta_fast(y[j] - x[j])).collect();
        let mut total = 0.0;
        for mask in 0..(1u32 << d) {
            let mut term = 1.0;
            for j in 0..d {
                if mask & (1 << j) != 0 {
                    term *= self.weights.gamma(j) * etas[j];
                }
            }
            total += term;
        }
        total
    }

    /// η_α for this space's α; closed form when available, otherwise the
    /// truncated series at tolerance 1e-10 (panics only if that tolerance is
    /// unreachable, which `new` + integer-α usage rules out in practice).
    #[inline]
    pub fn eta_fast(&self, t: f64) -> f64 {
        if self.alpha == 1.0 {
            eta_closed_form(1, t)
        } else if self.alpha == 2.0 {
            eta_closed_form(2, t)
        } else if self.alpha == 3.0 {
            eta_closed_form(3, t)
        } else {
            eta(self.alpha, t).expect("eta series failed; construct the space with integer alpha in 1..=3 or looser tolerance")
        }
    }
}

/// Bernoulli polynomials of even degree 2, 4, 6 (the ones η's closed forms use).
pub fn bernoulli_poly(degree: usize, x: f64) -> f64 {
    match degree {
        2 => (x - 1.0) * x + 1.0 / 6.0,
        4 => ((x - 2.0) * x + 1.0) * x * x - 1.0 / 30.0,
        6 => (((x - 3.0) * x + 2.5) * x * x - 0.5) * x * x + 1.0 / 42.0,
        _ => panic!("bernoulli_poly implemented for degrees 2, 4, 6; got {degree}"),
    }
}

/// Closed form η_α(t) = (-1)^(α+1) (2π)^(2α) / (2α)! · B_{2α}({t}) for α ∈ {1,2,3}.
///
/// The sign/constant follow from B_n({t}) = -n!/(2πi)^n Σ_{h≠0} e^{2πiht}/h^n;
/// the series oracle in the tests checks the constant independently.
pub fn eta_closed_form(alpha: u32, t: f64) -> f64 {
    let frac = t - t.floor();
    match alpha {
        1 => 2.0 * std::f64::consts::PI.powi(2) * bernoulli_poly(2, frac),
        2 => -(TAU.powi(4) / 24.0) * bernoulli_poly(4, frac),
        3 => (TAU.powi(6) / 720.0) * bernoulli_poly(6, frac),
        _ => panic!("closed form available for alpha in 1..=3, got {alpha}"),
    }
}

/// Truncated series η_α(t) ≈ 2 Σ_{h=1..H} cos(2πht)/h^{2α} with H chosen so the
/// analytic tail bound 2/((2α-1) H^{2α-1}) is at most `tol`. Returns the value
/// and that tail bound.
pub fn eta_series(alpha: f64, t: f64, tol: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(CoreError::InvalidAlpha(alpha));
    }
    if !(tol > 0.0) {
        return Err(CoreError::InvalidConfig(format!("series tolerance must be positive, got {tol}")));
    }
    let s = 2.0 * alpha;
    const CAP: f64 = 1e8;
    let needed = (2.0 / ((s - 1.0) * tol)).powf(1.0 / (s - 1.0));
    if !needed.is_finite() || needed > CAP {
        return Err(CoreError::ToleranceUnreachable { tol, needed, cap: CAP });
    }
    let h_max = needed.ceil().max(8.0) as u64;
    let frac = t - t.floor();
    // Sum ascending in term size (i.e. h descending) to keep rounding low.
    let mut sum = 0.0;
    for h in (1..=h_max).rev() {
        let phase = (h as f64) * frac;
        sum += (TAU * (phase - phase.floor())).cos() / (h as f64).powf(s);
    }
    let tail = 2.0 * (h_max as f64).powf(1.0 - s) / (s - 1.0);
    Ok((2.0 * sum, tail))
}

/// η_α(t): closed form for integer α ∈ {1,2,3}, otherwise the series at
/// tolerance 1e-10. Rejects α ≤ 1/2 (the series diverges there).
pub fn eta(alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(CoreError::InvalidAlpha(alpha));
    }
    if alpha.fract() == 0.0 && (1.0..=3.0).contains(&alpha) {
        return Ok(eta_closed_form(alpha as u32, t));
    }
    eta_series(alpha, t, 1e-10).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn r_weight_hand_examples() {
        // Zero frequency always has weight one.
        let s = KorobovSpace::isotropic(3, 1.0, 0.7).unwrap();
        assert_eq!(s.r_weight(&[0, 0, 0]), 1.0);

        // d=1, α=1, γ=1, h=3: |3|^2 = 9.
        let s1 = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
        assert_relative_eq!(s1.r_weight(&[3]), 9.0);
        assert_relative_eq!(s1.r_weight_1d(-3), 9.0);

        // d=3, α=1, γ=(0.5, anything, 0.5), h=(2,0,3):
        // (1/(0.5*0.5)) * 4 * 9 = 144; the middle weight is inactive.
        let s3 = KorobovSpace::new(1.0, ProductWeights::new(vec![0.5, 0.9, 0.5]).unwrap()).unwrap();
        assert_relative_eq!(s3.r_weight(&[2, 0, 3]), 144.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_alpha_at_or_below_half() {
        assert!(KorobovSpace::isotropic(1, 0.5, 1.0).is_err());
        assert!(eta(0.5, 0.3).is_err());
        assert!(eta(0.2, 0.3).is_err());
    }

    #[test]
    fn eta_closed_form_fixed_values() {
        // η_1(0) = 2ζ(2) = π²/3, η_1(1/2) = -π²/6.
        assert_relative_eq!(eta_closed_form(1, 0.0), PI * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(eta_closed_form(1, 0.5), -PI * PI / 6.0, max_relative = 1e-14);
        // η_α(0) = 2ζ(2α).
        assert_relative_eq!(eta_closed_form(2, 0.0), 2.0 * 1.082323233711138, max_relative = 1e-12);
        assert_relative_eq!(eta_closed_form(3, 0.0), 2.0 * 1.017343061984449, max_relative = 1e-12);
    }

    #[test]
    fn eta_series_agrees_with_closed_form() {
        // Independent oracle for the closed-form constant (it is not something
        // to trust from a derivation alone).
        for (alpha, tol) in [(1.0, 1e-5), (2.0, 1e-10), (3.0, 1e-10)] {
            for i in 0..50 {
                let t = i as f64 / 50.0;
                let (series, tail) = eta_series(alpha, t, tol).unwrap();
                let closed = eta_closed_form(alpha as u32, t);
                assert!(
                    (series - closed).abs() <= tail + 1e-9,
                    "alpha {alpha} t {t}: closed {closed} series {series} tail {tail}"
                );
            }
        }
    }

    #[test]
    fn eta_series_reports_unreachable_tolerance() {
        let err = eta_series(0.51, 0.3, 1e-10).unwrap_err();
        assert!(matches!(err, CoreError::ToleranceUnreachable { .. }), "got {err:?}");
    }

    #[test]
    fn kernel_diagonal_d1() {
        // K(y,y) = 1 + γ η_1(0) = 1 + π²/3 for γ = 1.
        let s = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
        assert_relative_eq!(s.kernel(&[0.42], &[0.42]), 1.0 + PI * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn kernel_product_matches_subset_sum_oracle() {
        for (d, alpha) in [(1usize, 1.0), (2, 2.0), (3, 1.0)] {
            let gamma: Vec<f64> = (0..d).map(|j| 0.9 / (j + 1) as f64).collect();
            let s = KorobovSpace::new(alpha, ProductWeights::new(gamma).unwrap()).unwrap();
            for i in 0..40 {
                let y: Vec<f64> = (0..d).map(|c| ((i * 7 + c * 3) as f64 * 0.137).fract()).collect();
                let x: Vec<f64> = (0..d).map(|c| ((i * 11 + c * 5) as f64 * 0.251).fract()).collect();
                let prod = s.kernel(&y, &x);
                let oracle = s.kernel_subset_sum(&y, &x);
                assert_relative_eq!(prod, oracle, max_relative = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn r_square_identity_random(
            hs in proptest::collection::vec(-64i64..=64, 1..=4),
            gammas in proptest::collection::vec(0.05f64..1.0, 4),
            alpha in prop_oneof![Just(1.0f64), Just(1.5), Just(2.0), Just(2.75)],
        ) {
            let d = hs.len();
            let s = KorobovSpace::new(alpha, ProductWeights::new(gammas[..d].to_vec()).unwrap()).unwrap();
            prop_assert!(s.r_square_defect(&hs) <= 1e-12);
        }

        #[test]
        fn r_weight_multiplicative_over_disjoint_supports(
            h1 in -40i64..=40, h2 in -40i64..=40,
            g in proptest::collection::vec(0.1f64..1.0, 2),
        ) {
            let s = KorobovSpace::new(1.5, ProductWeights::new(g).unwrap()).unwrap();
            let joint = s.r_weight(&[h1, h2]);
            let split = s.r_weight(&[h1, 0]) * s.r_weight(&[0, h2]);
            prop_assert!((joint - split).abs() <= 1e-12 * joint.abs().max(1.0));
        }

        #[test]
        fn eta_is_periodic_and_even(t in -3.0f64..3.0) {
            let v = eta_closed_form(1, t);
            prop_assert!((v - eta_closed_form(1, t + 1.0)).abs() < 1e-10);
            prop_assert!((v - eta_closed_form(1, -t)).abs() < 1e-10);
        }
    }
}
