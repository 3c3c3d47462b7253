//! Kernel descriptors shared by the interpolation and study layers.

use std::fmt;
use std::sync::Arc;

use crate::korobov::KorobovSpace;

/// Symmetric positive-definite kernel on its domain. `MinKernel` is
/// K(x,y) = 1 + min(x,y) on [0,1], whose native inner product is
/// f(0)g(0) + ∫₀¹ f'g'.
#[derive(Clone)]
pub enum KernelSpec {
    Korobov(KorobovSpace),
    MinKernel,
    Custom(CustomKernel),
}

#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub dim: usize,
    pub eval: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
}

impl KernelSpec {
    pub fn eval(&self, y: &[f64], x: &[f64]) -> f64 {
        match self {
            KernelSpec::Korobov(s) => s.kernel(y, x),
            KernelSpec::MinKernel => 1.0 + y[0].min(x[0]),
            KernelSpec::Custom(c) => (c.eval)(y, x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Korobov(s) => s.dim(),
            KernelSpec::MinKernel => 1,
            KernelSpec::Custom(c) => c.dim,
        }
    }

    /// Whether node distances should be measured on the torus.
    pub fn periodic(&self) -> bool {
        matches!(self, KernelSpec::Korobov(_))
    }

    pub fn id_string(&self) -> String {
        match self {
            KernelSpec::Korobov(s) => format!(
                "korobov(alpha={}, gamma={:?})",
                s.alpha(),
                s.weights().as_slice()
            ),
            KernelSpec::MinKernel => "min_kernel".into(),
            KernelSpec::Custom(c) => format!("custom({}, d={})", c.name, c.dim),
        }
    }

    /// Same kernel for the purpose of mixing interpolants and targets.
    pub fn compatible(&self, other: &KernelSpec) -> bool {
        match (self, other) {
            (KernelSpec::Korobov(a), KernelSpec::Korobov(b)) => a == b,
            (KernelSpec::MinKernel, KernelSpec::MinKernel) => true,
            (KernelSpec::Custom(a), KernelSpec::Custom(b)) => a.name == b.name && a.dim == b.dim,
            _ => false,
        }
    }
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_kernel_values() {
        let k = KernelSpec::MinKernel;
        assert_eq!(k.eval(&[0.25], &[0.75]), 1.25);
        assert_eq!(k.eval(&[0.75], &[0.25]), 1.25);
        assert_eq!(k.eval(&[0.75], &[0.75]), 1.75);
        assert!(!k.periodic());
    }

    #[test]
    fn compatibility_is_by_parameters() {
        let a = KernelSpec::Korobov(KorobovSpace::isotropic(1, 1.0, 1.0).unwrap());
        let b = KernelSpec::Korobov(KorobovSpace::isotropic(1, 2.0, 1.0).unwrap());
        assert!(a.compatible(&a.clone()));
        assert!(!a.compatible(&b));
        assert!(!a.compatible(&KernelSpec::MinKernel));
    }
}
