//! Interpolation node sets with provenance.
//!
//! Nodes live in [0,1]^d. Construction rejects (near-)duplicate nodes; for
//! periodic kernels the duplicate metric wraps each coordinate around the
//! torus, so 1e-15 and 1-1e-15 count as the same node.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// Two nodes closer than this (in the relevant metric) are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// t_k = k/n on [0,1), d = 1.
    Equispaced,
    /// Midpoints (2k+1)/(2n), d = 1; stays away from both endpoints.
    EquispacedInterior,
    /// t_k = frac(k z / n).
    Rank1Lattice { z: Vec<u64>, n: usize },
    Random { seed: u64 },
    Explicit,
}

#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>, // row-major, len = n * dim
    provenance: Provenance,
}

impl PointSet {
    fn validated(dim: usize, coords: Vec<f64>, provenance: Provenance, periodic: bool) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(CoreError::EmptyPointSet);
        }
        if coords.len() % dim != 0 {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        let ps = PointSet { dim, coords, provenance };
        let min_dist = ps.min_pairwise_distance(periodic);
        if ps.len() > 1 && min_dist <= DUPLICATE_TOL {
            return Err(CoreError::DuplicatePoints { min_dist, tol: DUPLICATE_TOL });
        }
        Ok(ps)
    }

    pub fn equispaced(n: usize) -> Result<Self> {
        let coords = (0..n).map(|k| k as f64 / n as f64).collect();
        Self::validated(1, coords, Provenance::Equispaced, true)
    }

    pub fn equispaced_interior(n: usize) -> Result<Self> {
        let coords = (0..n).map(|k| (2 * k + 1) as f64 / (2 * n) as f64).collect();
        Self::validated(1, coords, Provenance::EquispacedInterior, false)
    }

    pub fn rank1_lattice(z: &[u64], n: usize) -> Result<Self> {
        if z.is_empty() {
            return Err(CoreError::EmptyPointSet);
        }
        let d = z.len();
        let mut coords = Vec::with_capacity(n * d);
        for k in 0..n as u64 {
            for &zj in z {
                coords.push((k * zj % n as u64) as f64 / n as f64);
            }
        }
        Self::validated(d, coords, Provenance::Rank1Lattice { z: z.to_vec(), n }, true)
    }

    /// Uniform nodes on [0,1]^d from a seeded generator. On the (measure-zero)
    /// chance of a duplicate pair the whole set is redrawn from the next
    /// substream, so the result is still a pure function of the seed.
    pub fn random(dim: usize, n: usize, seed: u64, periodic: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for attempt in 0..16u64 {
            rng.set_stream(attempt);
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(0.0..1.0)).collect();
            match Self::validated(dim, coords, Provenance::Random { seed }, periodic) {
                Ok(ps) => return Ok(ps),
                Err(CoreError::DuplicatePoints { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(CoreError::DuplicatePoints { min_dist: 0.0, tol: DUPLICATE_TOL })
    }

    pub fn explicit(dim: usize, coords: Vec<f64>) -> Result<Self> {
        Self::validated(dim, coords, Provenance::Explicit, false)
    }

    pub fn explicit_periodic(dim: usize, coords: Vec<f64>) -> Result<Self> {
        // Reduce to the fundamental domain first, then check wrapped distances.
        let reduced = coords.iter().map(|c| c - c.floor()).collect();
        Self::validated(dim, reduced, Provenance::Explicit, true)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// New point set from a subset of node indices; provenance becomes Explicit.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.node(i));
        }
        Self::validated(self.dim, coords, Provenance::Explicit, false)
    }

    /// Concatenation of two node lists (no duplicate check: callers combining
    /// overlapping sets, e.g. for function differences, handle that themselves).
    pub fn concat_unchecked(&self, other: &PointSet) -> PointSet {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        PointSet { dim: self.dim, coords, provenance: Provenance::Explicit }
    }

    pub fn min_pairwise_distance(&self, periodic: bool) -> f64 {
        let n = self.len();
        let mut min_sq = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut d2 = 0.0;
                for c in 0..self.dim {
                    let mut delta = (self.coords[i * self.dim + c] - self.coords[j * self.dim + c]).abs();
                    if periodic {
                        delta = delta.min(1.0 - delta).max(0.0);
                    }
                    d2 += delta * delta;
                }
                if d2 < min_sq {
                    min_sq = d2;
                }
            }
        }
        min_sq.sqrt()
    }

    /// Bounding box as (lows, highs).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for (c, &x) in p.iter().enumerate() {
                lo[c] = lo[c].min(x);
                hi[c] = hi[c].max(x);
            }
        }
        (lo, hi)
    }
}
