//! Quadrature: Gauss–Legendre panels on [0,1]^d plus a randomized
//! shifted-lattice rule for d > 3.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gauss–Legendre nodes/weights on (-1,1), Newton iteration on P_n.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // Final derivative for the weight.
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 1..n {
            let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A composite rule: flat node/weight lists over some 1-D interval union.
#[derive(Debug, Clone)]
pub struct CompositeGl {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeGl {
    /// GL panels between consecutive breakpoints (breakpoints must be sorted).
    pub fn on_breaks(breaks: &[f64], order: usize) -> CompositeGl {
        let (xs, ws) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len().saturating_sub(1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in xs.iter().zip(&ws) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        CompositeGl { nodes, weights }
    }

    /// Uniform panels on [a,b].
    pub fn uniform(a: f64, b: f64, panels: usize, order: usize) -> CompositeGl {
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Self::on_breaks(&breaks, order)
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Tensor-product composite GL over [0,1]^d. Cost (panels*order)^d; meant for d <= 3.
pub fn tensor_integrate(dim: usize, panels: usize, order: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    assert!(dim >= 1 && dim <= 3, "tensor rule is for d in 1..=3, got {dim}");
    let q = CompositeGl::uniform(0.0, 1.0, panels, order);
    let m = q.nodes.len();
    let mut x = vec![0.0; dim];
    let mut total = 0.0;
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let mut w = 1.0;
        for c in 0..dim {
            x[c] = q.nodes[idx[c]];
            w *= q.weights[idx[c]];
        }
        total += w * f(&x);
        for c in 0..dim {
            idx[c] += 1;
            if idx[c] < m {
                continue 'outer;
            }
            idx[c] = 0;
        }
        break;
    }
    total
}

/// Integral of f over [0,1]^d by a rank-1 lattice with `shifts` independent
/// random shifts; returns (mean, standard error over shifts).
pub fn qmc_shifted_lattice(
    dim: usize,
    log2_points: u32,
    shifts: usize,
    seed: u64,
    mut f: impl FnMut(&[f64]) -> f64,
) -> (f64, f64) {
    assert!(shifts >= 2);
    let n: u64 = 1 << log2_points;
    // Korobov-style generating vector z_j = a^j mod n with odd a, so every
    // component generates the full cyclic group for n a power of two.
    let a: u64 = 4001;
    let mut z = vec![1u64; dim];
    for j in 1..dim {
        z[j] = z[j - 1].wrapping_mul(a) % n;
        if z[j] % 2 == 0 {
            z[j] += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(shifts);
    let mut x = vec![0.0; dim];
    for _ in 0..shifts {
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut acc = 0.0;
        for k in 0..n {
            for j in 0..dim {
                let frac = (k.wrapping_mul(z[j]) % n) as f64 / n as f64 + shift[j];
                x[j] = frac - frac.floor();
            }
            acc += f(&x);
        }
        means.push(acc / n as f64);
    }
    let mean = means.iter().sum::<f64>() / shifts as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (shifts as f64 - 1.0);
    (mean, (var / shifts as f64).sqrt())
}
