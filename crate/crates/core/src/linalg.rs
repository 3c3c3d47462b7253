//! Solver helpers: SPD solve with a jitter ladder, symmetric-indefinite solve
//! with one refinement step, eigenvalue range estimates, and deterministic
//! pivoted point selection.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

/// Relative jitter rungs, scaled by trace(G)/n, tried after the plain solve.
pub const JITTER_LADDER: [f64; 3] = [1e-14, 1e-12, 1e-10];

#[derive(Debug, Clone)]
pub struct SpdSolution {
    pub x: DVector<f64>,
    /// Absolute jitter added to the diagonal (0.0 when the plain solve worked).
    pub jitter: f64,
    /// ‖G x - b‖_∞ against the *unjittered* matrix.
    pub residual_inf: f64,
}

/// Solve G x = b for symmetric positive definite G by Cholesky. If the
/// factorization fails or the residual (vs the original G) exceeds
/// `residual_tol`, retry with diagonal jitter λ·trace(G)/n for the ladder of
/// relative levels, keeping the first solution whose residual passes.
pub fn solve_spd_jitter(g: &DMatrix<f64>, b: &DVector<f64>, residual_tol: f64) -> Result<SpdSolution> {
    let n = g.nrows();
    assert_eq!(g.ncols(), n);
    assert_eq!(b.len(), n);
    let scale = g.trace() / n as f64;
    let mut last_failure = String::from("no attempt made");
    for (step, lam) in std::iter::once(0.0).chain(JITTER_LADDER.iter().copied()).enumerate() {
        let jitter = lam * scale;
        let attempt = if jitter == 0.0 {
            g.clone()
        } else {
            let mut m = g.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            m
        };
        match attempt.cholesky() {
            Some(chol) => {
                let mut x = chol.solve(b);
                // One refinement step against the original matrix.
                let r = b - g * &x;
                x += chol.solve(&r);
                let residual_inf = (b - g * &x).amax();
                if residual_inf <= residual_tol {
                    return Ok(SpdSolution { x, jitter, residual_inf });
                }
                last_failure = format!(
                    "rung {step} (jitter {jitter:.3e}): residual {residual_inf:.3e} > {residual_tol:.3e}"
                );
            }
            None => {
                last_failure = format!("rung {step} (jitter {jitter:.3e}): not positive definite");
            }
        }
    }
    Err(CoreError::SolveFailure(format!("jitter ladder exhausted; {last_failure}")))
}

#[derive(Debug, Clone)]
pub struct IndefiniteSolution {
    pub x: DVector<f64>,
    pub residual_inf: f64,
    /// True when the LU path failed and the SVD least-squares fallback was used.
    pub degraded: bool,
}

/// Solve a (symmetric, possibly indefinite) square system by partial-pivoted
/// LU with one iterative-refinement step; falls back to an SVD least-squares
/// solve with rank tolerance 1e-10 when LU fails or leaves a large residual.
pub fn solve_indefinite(m: &DMatrix<f64>, b: &DVector<f64>, residual_tol: f64) -> Result<IndefiniteSolution> {
    let lu = m.clone().lu();
    if let Some(mut x) = lu.solve(b) {
        let r = b - m * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        let residual_inf = (b - m * &x).amax();
        if residual_inf <= residual_tol {
            return Ok(IndefiniteSolution { x, residual_inf, degraded: false });
        }
    }
    let svd = m.clone().svd(true, true);
    let x = svd
        .solve(&b.clone(), 1e-10)
        .map_err(|e| CoreError::SolveFailure(format!("least-squares fallback failed: {e}")))?;
    let x = DVector::from_column_slice(x.as_slice());
    let residual_inf = (b - m * &x).amax();
    if residual_inf <= residual_tol {
        Ok(IndefiniteSolution { x, residual_inf, degraded: true })
    } else {
        Err(CoreError::SolveFailure(format!(
            "least-squares fallback residual {residual_inf:.3e} > {residual_tol:.3e}"
        )))
    }
}

/// (min, max) eigenvalue estimates for symmetric G by power iteration on G and
/// on (λ_max I - G). Deterministic start vector; estimates, not guarantees.
pub fn symmetric_eig_range(g: &DMatrix<f64>, iterations: usize) -> (f64, f64) {
    let n = g.nrows();
    let start = DVector::from_fn(n, |i, _| 1.0 + 0.3 * ((i as f64 + 1.0).sin()));
    let rayleigh = |m: &DMatrix<f64>| -> f64 {
        let mut v = start.clone();
        v /= v.norm();
        let mut lam = 0.0;
        for _ in 0..iterations {
            let w = m * &v;
            let nw = w.norm();
            if nw == 0.0 {
                return 0.0;
            }
            v = w / nw;
            lam = (v.transpose() * m * &v)[(0, 0)];
        }
        lam
    };
    let lam_max = rayleigh(g);
    let shift = lam_max.abs().max(1e-300);
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let base = if i == j { shift } else { 0.0 };
        base - g[(i, j)]
    });
    let mu = rayleigh(&shifted);
    let lam_min = shift - mu;
    (lam_min, lam_max)
}

/// Column-pivoted modified Gram–Schmidt on the columns of `m` (rows = basis
/// functions, columns = candidate points). Returns the numerical rank at
/// relative tolerance `tol_rel` and the pivot order (all columns, best first).
/// Ties break toward the lower index, so the selection is deterministic.
pub fn pivoted_column_selection(m: &DMatrix<f64>, tol_rel: f64) -> (usize, Vec<usize>) {
    let rows = m.nrows();
    let cols = m.ncols();
    let mut work = m.clone();
    let mut order: Vec<usize> = (0..cols).collect();
    let mut first_pivot_norm = 0.0;
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let (mut best, mut best_norm) = (step, -1.0);
        for c in step..cols {
            let norm = work.column(order[c]).norm();
            if norm > best_norm + 1e-30 {
                best = c;
                best_norm = norm;
            }
        }
        if step == 0 {
            first_pivot_norm = best_norm;
        }
        if best_norm <= tol_rel * first_pivot_norm || best_norm == 0.0 {
            break;
        }
        order.swap(step, best);
        rank += 1;
        let pivot = work.column(order[step]) / best_norm;
        for c in (step + 1)..cols {
            let proj = pivot.dot(&work.column(order[c]));
            let update = &work.column(order[c]) - &pivot * proj;
            work.set_column(order[c], &update);
        }
    }
    (rank, order)
}
