//! Independent cross-checks for the numeric expectations used elsewhere in
//! the suite. Every value asserted here is derived twice: once through the
//! library under test and once through a second route (closed forms from
//! per-residue-class minimization, direct DFT identities, brute-force or
//! quadrature sums) that shares no code with the first.

use num_complex::Complex64;
use ratedouble_core::interp::assemble_gram;
use ratedouble_core::quad::CompositeGl;
use ratedouble_core::{
    fit, h_error_exact, l2_error_quadrature_breaks, l2_error_spectral, KernelSpec, KorobovSpace,
    PointSet, SpectralFunction,
};

const TAU: f64 = std::f64::consts::TAU;

/// Interpolation on n equispaced nodes constrains one Fourier residue class
/// mod n at a time, and the minimum-norm solution spreads each class over
/// its aliases in proportion to 1/r(h). Writing Â(j) = Σ_k a_k e^{-2πi jk/n}
/// for the solved coefficients, the interpolation conditions become
/// Â(j)·S_j = Σ_{h≡j} ĝ(h) with S_j = Σ_{h≡j} 1/r(h). The class sums S_j are
/// available by a completely independent route: the DFT of the first Gram row
/// (built from the closed-form kernel) equals n·S_j. This ties the kernel
/// closed form, the linear solver, and the spectral weights together.
#[test]
fn equispaced_coefficients_satisfy_residue_class_identity() {
    let n = 8usize;
    let space = KorobovSpace::isotropic(1, 1.0, 0.8).unwrap();
    let kernel = KernelSpec::Korobov(space.clone());
    let nodes = PointSet::equispaced(n).unwrap();

    // Deterministic finite-support target, support well past n.
    let entries: Vec<(Vec<i64>, f64)> =
        (1..=20i64).map(|h| (vec![h], 1.0 / (h + 1) as f64)).collect();
    let g = SpectralFunction::finite_real(1, &entries).unwrap();
    let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
    let interp = fit(&kernel, &nodes, &values).unwrap();

    let gram = assemble_gram(&kernel, &nodes).unwrap();
    for j in 0..n {
        // Â(j) from the solved coefficients.
        let mut a_hat = Complex64::new(0.0, 0.0);
        for (k, &ak) in interp.coeffs().iter().enumerate() {
            let phase = -TAU * (j * k) as f64 / n as f64;
            a_hat += ak * Complex64::new(phase.cos(), phase.sin());
        }
        // n·S_j from the DFT of the first Gram row (closed-form kernel route).
        let mut g_hat = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let phase = -TAU * (j * k) as f64 / n as f64;
            g_hat += gram[(0, k)] * Complex64::new(phase.cos(), phase.sin());
        }
        assert!(
            g_hat.im.abs() <= 1e-10,
            "Gram row DFT must be real for a symmetric circulant, got {}",
            g_hat.im
        );
        // Class sum of the target coefficients over the finite support.
        let mut class_sum = 0.0;
        for h in -20i64..=20 {
            if h != 0 && (h - j as i64).rem_euclid(n as i64) == 0 {
                class_sum += 1.0 / (h.abs() + 1) as f64;
            }
        }
        let predicted = n as f64 * class_sum / g_hat.re;
        assert!(
            (a_hat.im).abs() <= 1e-10,
            "real symmetric data must give a real residue transform"
        );
        assert!(
            (a_hat.re - predicted).abs() <= 1e-10 * (1.0 + predicted.abs()),
            "class {j}: residue transform {} vs identity prediction {predicted}",
            a_hat.re
        );
    }
}

/// Closed forms for interpolating ĝ(±1) = 1/2 (i.e. cos(2πx)) on 4 equispaced
/// nodes with α = 1, γ = 1: with S = Σ_{h≡1 (4)} 1/r(h) = π²/8 and λ = (1/2)/S,
///   L2 err² = 2[(1/2 − λ)² + λ²(π⁴/96 − 1)],
///   H  err² = ‖g‖²_H − 2λ²S = 1/2 − 4/π².
#[test]
fn cosine_projection_error_closed_forms() {
    let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
    let kernel = KernelSpec::Korobov(space.clone());
    let nodes = PointSet::equispaced(4).unwrap();
    let g = SpectralFunction::finite_real(1, &[(vec![1], 0.5)]).unwrap();
    let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
    let interp = fit(&kernel, &nodes, &values).unwrap();

    let pi = std::f64::consts::PI;
    let s = pi * pi / 8.0;
    let lambda = 0.5 / s;
    let l2_exact = (2.0 * ((0.5 - lambda).powi(2) + lambda * lambda * (pi.powi(4) / 96.0 - 1.0)))
        .sqrt();
    let h_exact = (0.5 - 4.0 / (pi * pi)).sqrt();

    let l2 = l2_error_spectral(&space, &g, &interp, 1 << 16).unwrap();
    assert!(
        (l2.value - l2_exact).abs() <= l2.bound + 1e-10,
        "spectral L2 {} vs closed form {l2_exact}",
        l2.value
    );

    let h = h_error_exact(0.5, &interp).unwrap();
    assert!(
        (h.value - h_exact).abs() <= h.bound + 1e-9,
        "reproducing-identity H error {} vs closed form {h_exact}",
        h.value
    );
}

/// The projection of f(x) = x onto min-kernel sections at interior equispaced
/// nodes has a fully explicit form: slope 1 between nodes (f is linear), a
/// ramp c(1+x) on [0, t₁] with c = t₁/(1+t₁), and the constant t_n after t_n.
/// With t = 1/(2n):
///   L2 err² = t³/(3(1+t)²) + t³/3      (left ramp + right boundary strip)
///   H  err² = c² + t(1−c)² + t         (value mismatch at 0 + two strips)
/// so the L2 rate is exactly 3/2 and the H rate exactly 1/2 as n grows.
#[test]
fn min_kernel_linear_target_closed_forms() {
    let kernel = KernelSpec::MinKernel;
    for n in [8usize, 32, 128] {
        let nodes = PointSet::equispaced_interior(n).unwrap();
        let values: Vec<f64> = nodes.iter().map(|t| t[0]).collect();
        let interp = fit(&kernel, &nodes, &values).unwrap();

        let t = 1.0 / (2.0 * n as f64);
        let c = t / (1.0 + t);
        let l2_exact = (t.powi(3) / (3.0 * (1.0 + t).powi(2)) + t.powi(3) / 3.0).sqrt();
        let h_exact = (c * c + t * (1.0 - c) * (1.0 - c) + t).sqrt();

        let mut breaks: Vec<f64> = Vec::with_capacity(n + 2);
        breaks.push(0.0);
        breaks.extend(nodes.iter().map(|x| x[0]));
        breaks.push(1.0);
        let l2 = l2_error_quadrature_breaks(|x| x, |x| interp.evaluate(&[x]), &breaks, 6);
        assert!(
            (l2.value - l2_exact).abs() <= 1e-10 * (1.0 + l2_exact),
            "n = {n}: measured L2 {} vs closed form {l2_exact}",
            l2.value
        );

        let h = h_error_exact(1.0, &interp).unwrap();
        assert!(
            (h.value - h_exact).abs() <= h.bound + 1e-9 * (1.0 + h_exact),
            "n = {n}: measured H {} vs closed form {h_exact}",
            h.value
        );
    }
}

/// The smooth boundary-compatible polynomial g = 3x² − 8x³ + 7x⁴ − 2x⁵
/// (= x²(1−x)²(3−2x)) used by the rate study: its membership conditions and
/// both norms are fixed here by integer arithmetic and quadrature.
#[test]
fn smooth_polynomial_norms_and_membership() {
    // g(0) = 0, g'(0) = 0, g'(1) = 0 in integer arithmetic: g' has
    // coefficients (6, -24, 28, -10) on degrees 1..4.
    let dg = [6i64, -24, 28, -10];
    assert_eq!(dg.iter().sum::<i64>(), 0, "g'(1) must vanish exactly");
    // No constant or degree-1 terms in g, so g(0) = g'(0) = 0 structurally.

    let g = |x: f64| ((((-2.0 * x + 7.0) * x - 8.0) * x + 3.0) * x) * x;
    let dg_f = |x: f64| (((-10.0 * x + 28.0) * x - 24.0) * x + 6.0) * x;
    let d2g = |x: f64| ((-40.0 * x + 84.0) * x - 48.0) * x + 6.0;

    // ∫ g'² = 26/315 and ∫ g''² = 132/35; degree ≤ 8 integrands are exact
    // under composite Gauss-Legendre of order 6.
    let quad = CompositeGl::uniform(0.0, 1.0, 4, 6);
    let h_sq = quad.integrate(|x| dg_f(x) * dg_f(x));
    let b_sq = quad.integrate(|x| d2g(x) * d2g(x));
    assert!((h_sq - 26.0 / 315.0).abs() <= 1e-14, "∫g'² = {h_sq} vs 26/315");
    assert!((b_sq - 132.0 / 35.0).abs() <= 1e-12, "∫g''² = {b_sq} vs 132/35");
    assert!(g(0.0) == 0.0 && g(1.0) == 0.0 && dg_f(0.5).abs() > 0.0);
}

/// Spectral and quadrature L2 measurements agree within their combined
/// reported bounds on an instance with a real, nonzero error.
#[test]
fn spectral_and_quadrature_l2_agree_on_korobov_instance() {
    let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
    let kernel = KernelSpec::Korobov(space.clone());
    let nodes = PointSet::equispaced(8).unwrap();
    let entries: Vec<(Vec<i64>, f64)> =
        (1..=16i64).map(|h| (vec![h], if h % 2 == 0 { -1.0 } else { 1.0 } * (h as f64).powf(-1.55)))
            .collect();
    let g = SpectralFunction::finite_real(1, &entries).unwrap();
    let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
    let interp = fit(&kernel, &nodes, &values).unwrap();

    let spectral = l2_error_spectral(&space, &g, &interp, 1 << 15).unwrap();
    let breaks: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
    let quad = l2_error_quadrature_breaks(
        |x| g.value(&[x]),
        |x| interp.evaluate(&[x]),
        &breaks,
        8,
    );
    assert!(spectral.value > 1e-3, "instance must have a visible error");
    assert!(
        (spectral.value - quad.value).abs() <= spectral.bound + quad.bound + 1e-9,
        "spectral {} ± {} vs quadrature {} ± {}",
        spectral.value,
        spectral.bound,
        quad.value,
        quad.bound
    );
}

/// The reported spectral bound must bracket what a much larger truncation
/// reveals: value(M) ≤ value(16M) ≤ value(M) + bound(M).
#[test]
fn spectral_tail_bound_brackets_larger_truncations() {
    let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
    let kernel = KernelSpec::Korobov(space.clone());
    let nodes = PointSet::equispaced(8).unwrap();
    let entries: Vec<(Vec<i64>, f64)> =
        (1..=16i64).map(|h| (vec![h], (h as f64).powf(-1.55))).collect();
    let g = SpectralFunction::finite_real(1, &entries).unwrap();
    let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
    let interp = fit(&kernel, &nodes, &values).unwrap();

    let coarse = l2_error_spectral(&space, &g, &interp, 2048).unwrap();
    let fine = l2_error_spectral(&space, &g, &interp, 32768).unwrap();
    assert!(
        coarse.value <= fine.value + 1e-15,
        "box sums grow with truncation: {} vs {}",
        coarse.value,
        fine.value
    );
    assert!(
        fine.value <= coarse.value + coarse.bound,
        "tail bound must cover everything beyond the box: {} vs {} + {}",
        fine.value,
        coarse.value,
        coarse.bound
    );
}

/// Projection onto the span of a nested, larger node set can only shrink the
/// H-error (exact statement for exact arithmetic; tolerance covers roundoff).
#[test]
fn nested_node_sets_never_increase_h_error() {
    let space = KorobovSpace::isotropic(1, 1.0, 1.0).unwrap();
    let kernel = KernelSpec::Korobov(space.clone());
    let entries: Vec<(Vec<i64>, f64)> =
        (1..=32i64).map(|h| (vec![h], (h as f64).powf(-1.55))).collect();
    let g = SpectralFunction::finite_real(1, &entries).unwrap();
    let norms = ratedouble_core::spectral_norms(&space, &g, 32).unwrap();
    let g_h_sq = norms.h.value * norms.h.value;

    let mut previous = f64::INFINITY;
    for n in [8usize, 16, 32, 64] {
        let nodes = PointSet::equispaced(n).unwrap();
        let values: Vec<f64> = nodes.iter().map(|t| g.value(t)).collect();
        let interp = fit(&kernel, &nodes, &values).unwrap();
        let h = h_error_exact(g_h_sq, &interp).unwrap();
        assert!(
            h.value <= previous + 1e-9,
            "H error grew from {previous} to {} at n = {n}",
            h.value
        );
        previous = h.value;
    }
}
