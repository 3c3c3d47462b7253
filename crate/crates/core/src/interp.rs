//! Kernel interpolation as orthogonal projection in the native space.
//!
//! Fitting solves G a = f(t) for the Gram matrix G[j,k] = K(t_j, t_k). The
//! interpolant Σ_k a_k K(t_k,·) is the projection of any f matching those
//! values onto span{K(t_k,·)}: ⟨f - f_n, K(t_k,·)⟩ = f(t_k) - f_n(t_k) = 0 by
//! the reproducing property, which also gives the Pythagoras route to the
//! projection error, ‖f - f_n‖² = ‖f‖² - ‖f_n‖².

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{solve_spd_jitter, symmetric_eig_range};
use crate::points::{PointSet, DUPLICATE_TOL};
use crate::quad::CompositeGl;

/// Relative tolerance for the interpolation residual ‖G a - f‖_∞ after the solve.
pub const FIT_RESIDUAL_REL: f64 = 1e-8;
/// Two independent evaluations of the squared projection error must agree to
/// this, relative to ‖f‖²_H.
pub const H_ERROR_AGREEMENT_REL: f64 = 1e-8;
/// A negative Pythagoras difference deeper than this (relative) is an error
/// rather than roundoff.
pub const PYTHAGORAS_CLAMP_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct GramDiagnostics {
    pub min_eig: f64,
    pub max_eig: f64,
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: DMatrix<f64>,
    pub diagnostics: GramDiagnostics,
}

fn check_points(kernel: &KernelSpec, pts: &PointSet) -> Result<()> {
    if pts.dim() != kernel.dim() {
        return Err(CoreError::DimensionMismatch { expected: kernel.dim(), got: pts.dim() });
    }
    if pts.is_empty() {
        return Err(CoreError::EmptyPointSet);
    }
    // Re-check duplicates in the kernel's own metric: a periodic kernel sees
    // 1e-15 and 1-1e-15 as the same node even though the plain metric does not.
    let min_dist = pts.min_pairwise_distance(kernel.periodic());
    if pts.len() > 1 && min_dist <= DUPLICATE_TOL {
        return Err(CoreError::DuplicatePoints { min_dist, tol: DUPLICATE_TOL });
    }
    Ok(())
}

pub fn assemble_gram(kernel: &KernelSpec, pts: &PointSet) -> Result<DMatrix<f64>> {
    check_points(kernel, pts)?;
    let n = pts.len();
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = kernel.eval(pts.node(j), pts.node(k));
            g[(j, k)] = v;
            g[(k, j)] = v;
        }
    }
    Ok(g)
}

/// Gram matrix with eigenvalue-range diagnostics (power-iteration estimates).
pub fn gram(kernel: &KernelSpec, pts: &PointSet) -> Result<Gram> {
    let matrix = assemble_gram(kernel, pts)?;
    let (min_eig, max_eig) = symmetric_eig_range(&matrix, 60);
    let condition = if min_eig > 0.0 { max_eig / min_eig } else { f64::INFINITY };
    Ok(Gram { matrix, diagnostics: GramDiagnostics { min_eig, max_eig, condition } })
}

/// Cross-Gram with entries K(s_j, t_k) for j over `rows`, k over `cols`.
pub fn cross_gram(kernel: &KernelSpec, rows: &PointSet, cols: &PointSet) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |j, k| kernel.eval(rows.node(j), cols.node(k)))
}

#[derive(Debug, Clone)]
pub struct Interpolant {
    kernel: KernelSpec,
    nodes: PointSet,
    coeffs: DVector<f64>,
    gram_norm_sq: f64,
    node_values: Vec<f64>,
    /// Diagonal jitter the solve needed (0.0 for a clean factorization).
    pub jitter: f64,
    /// ‖G a - f‖_∞ against the unjittered Gram matrix.
    pub residual_inf: f64,
}

/// Interpolate `values` at `nodes`: solve G a = values with the jitter ladder.
pub fn fit(kernel: &KernelSpec, nodes: &PointSet, values: &[f64]) -> Result<Interpolant> {
    if values.len() != nodes.len() {
        return Err(CoreError::DimensionMismatch { expected: nodes.len(), got: values.len() });
    }
    let g = assemble_gram(kernel, nodes)?;
    let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = FIT_RESIDUAL_REL * (1.0 + vmax);
    let rhs = DVector::from_column_slice(values);
    let sol = solve_spd_jitter(&g, &rhs, tol)?;
    let gram_norm_sq = sol.x.dot(&(&g * &sol.x));
    Ok(Interpolant {
        kernel: kernel.clone(),
        nodes: nodes.clone(),
        coeffs: sol.x,
        gram_norm_sq,
        node_values: values.to_vec(),
        jitter: sol.jitter,
        residual_inf: sol.residual_inf,
    })
}

impl Interpolant {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(self.coeffs.iter())
            .map(|(t, &a)| a * self.kernel.eval(t, x))
            .sum()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn coeffs(&self) -> &[f64] {
        self.coeffs.as_slice()
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// ‖f_n‖²_H = aᵀ G a, cached from the fit.
    pub fn h_norm_sq(&self) -> f64 {
        self.gram_norm_sq
    }
}

/// A target with an exactly known native norm: f = Σ_j c_j K(s_j, ·) with
/// ‖f‖²_H = cᵀ G_ss c.
#[derive(Debug, Clone)]
pub struct SyntheticTarget {
    kernel: KernelSpec,
    nodes: PointSet,
    coeffs: DVector<f64>,
    h_norm_sq: f64,
}

pub fn synthetic_target(kernel: &KernelSpec, nodes: &PointSet, coeffs: &[f64]) -> Result<SyntheticTarget> {
    if coeffs.len() != nodes.len() {
        return Err(CoreError::DimensionMismatch { expected: nodes.len(), got: coeffs.len() });
    }
    let g = assemble_gram(kernel, nodes)?;
    let c = DVector::from_column_slice(coeffs);
    let h_norm_sq = c.dot(&(&g * &c));
    Ok(SyntheticTarget { kernel: kernel.clone(), nodes: nodes.clone(), coeffs: c, h_norm_sq })
}

impl SyntheticTarget {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(self.coeffs.iter())
            .map(|(s, &c)| c * self.kernel.eval(s, x))
            .sum()
    }

    pub fn values_at(&self, pts: &PointSet) -> Vec<f64> {
        pts.iter().map(|x| self.value(x)).collect()
    }

    pub fn h_norm_sq(&self) -> f64 {
        self.h_norm_sq
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    pub fn coeffs(&self) -> &[f64] {
        self.coeffs.as_slice()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HErrorReport {
    /// ‖f - f_n‖_H from the (clamped) Pythagoras route.
    pub err: f64,
    pub pythagoras_sq: f64,
    /// Independent expansion cᵀG_ss c - 2 aᵀG_ts c + aᵀG_tt a, all three
    /// quadratic forms assembled fresh from kernel evaluations.
    pub direct_sq: f64,
}

/// Projection error of `interp` against a synthetic target, computed two ways
/// that must agree. Errors if the kernels differ, if the routes disagree
/// beyond 1e-8 relative, or if Pythagoras goes negative beyond clamping range.
pub fn h_error(target: &SyntheticTarget, interp: &Interpolant) -> Result<HErrorReport> {
    if !target.kernel.compatible(&interp.kernel) {
        return Err(CoreError::KernelMismatch(target.kernel.id_string(), interp.kernel.id_string()));
    }
    let pythagoras_sq = target.h_norm_sq - interp.gram_norm_sq;

    // Fresh assembly for the direct route (no reuse of the cached forms).
    let g_ss = assemble_gram(&target.kernel, &target.nodes)?;
    let g_tt = assemble_gram(&interp.kernel, &interp.nodes)?;
    let g_ts = cross_gram(&interp.kernel, &interp.nodes, &target.nodes);
    let a = &interp.coeffs;
    let c = &target.coeffs;
    let direct_sq = c.dot(&(&g_ss * c)) - 2.0 * a.dot(&(&g_ts * c)) + a.dot(&(&g_tt * a));

    let scale = target.h_norm_sq.abs() + interp.gram_norm_sq.abs() + f64::MIN_POSITIVE;
    if (pythagoras_sq - direct_sq).abs() > H_ERROR_AGREEMENT_REL * scale {
        return Err(CoreError::PythagorasMismatch {
            pythagoras: pythagoras_sq,
            direct: direct_sq,
            tol: H_ERROR_AGREEMENT_REL,
        });
    }
    let clamped = if pythagoras_sq < 0.0 {
        if pythagoras_sq < -PYTHAGORAS_CLAMP_REL * target.h_norm_sq.abs() {
            return Err(CoreError::PythagorasMismatch {
                pythagoras: pythagoras_sq,
                direct: direct_sq,
                tol: PYTHAGORAS_CLAMP_REL,
            });
        }
        0.0
    } else {
        pythagoras_sq
    };
    Ok(HErrorReport { err: clamped.sqrt(), pythagoras_sq, direct_sq })
}

#[derive(Debug, Clone)]
pub struct GalerkinResiduals {
    /// f(t_k) - f_n(t_k) by direct evaluation of both functions.
    pub pointwise: Vec<f64>,
    /// (G_tsᵀ c - G_tt a)_k by Gram arithmetic.
    pub gram_route: Vec<f64>,
}

impl GalerkinResiduals {
    pub fn max_abs(&self) -> f64 {
        self.pointwise
            .iter()
            .chain(&self.gram_route)
            .fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// ⟨f - f_n, K(t_k,·)⟩ for every interpolation node, which the reproducing
/// property collapses to value mismatches at the nodes. Computed once through
/// pointwise evaluation and once through assembled Gram blocks.
pub fn galerkin_residuals(target: &SyntheticTarget, interp: &Interpolant) -> Result<GalerkinResiduals> {
    if !target.kernel.compatible(&interp.kernel) {
        return Err(CoreError::KernelMismatch(target.kernel.id_string(), interp.kernel.id_string()));
    }
    let pointwise: Vec<f64> = interp
        .nodes
        .iter()
        .map(|t| target.value(t) - interp.evaluate(t))
        .collect();

    let g_tt = assemble_gram(&interp.kernel, &interp.nodes)?;
    let g_ts = cross_gram(&interp.kernel, &interp.nodes, &target.nodes);
    let gram_vec = &g_ts * &target.coeffs - &g_tt * &interp.coeffs;
    Ok(GalerkinResiduals { pointwise, gram_route: gram_vec.as_slice().to_vec() })
}

#[derive(Debug, Clone)]
pub struct MinKernelCheck {
    /// max over targets and probe points of |⟨K(y,·), f⟩ - f(y)|.
    pub max_reproducing_err: f64,
    pub per_target: Vec<(String, f64)>,
    /// Quadrature value of ∫₀¹ K(x,x) dx; the exact value is 3/2.
    pub kxx_integral: f64,
}

/// Verify the min-kernel reproducing property ⟨K(y,·), f⟩ = f(y) by quadrature
/// in the inner product f(0)g(0) + ∫₀¹ f'g'. Since ∂ₓK(y,x) = 1 for x < y and
/// 0 for x > y, the pairing reduces to f(0) + ∫₀^y f'(x) dx; the quadrature
/// panels live entirely on [0,y] so the kink at x = y never sits inside one.
pub fn min_kernel_check(panels: usize, order: usize) -> MinKernelCheck {
    type Pair = (&'static str, fn(f64) -> f64, fn(f64) -> f64);
    let targets: [Pair; 4] = [
        ("1", |_| 1.0, |_| 0.0),
        ("x", |x| x, |_| 1.0),
        ("x^2", |x| x * x, |x| 2.0 * x),
        ("sin(pi x)", |x| (std::f64::consts::PI * x).sin(), |x| {
            std::f64::consts::PI * (std::f64::consts::PI * x).cos()
        }),
    ];
    let mut per_target = Vec::new();
    let mut max_err = 0.0f64;
    for (name, f, df) in targets {
        let mut worst = 0.0f64;
        for i in 0..20 {
            let y = (i as f64 + 0.5) / 20.0;
            let q = CompositeGl::uniform(0.0, y, panels.max(2) / 2, order);
            let pairing = f(0.0) + q.integrate(df);
            worst = worst.max((pairing - f(y)).abs());
        }
        max_err = max_err.max(worst);
        per_target.push((name.to_string(), worst));
    }
    let kxx = CompositeGl::uniform(0.0, 1.0, panels, order).integrate(|x| 1.0 + x);
    MinKernelCheck { max_reproducing_err: max_err, per_target, kxx_integral: kxx }
}
