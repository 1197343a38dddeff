//! Smooth probability measures on hypersurfaces: curved graph patches and
//! mollified hyperplane pieces.

mod decay;
mod hyperplane;
mod surface;

pub use decay::{cone_directions, decay_fit, DecayFit};
pub use hyperplane::HyperplaneSpec;
pub use surface::{GraphShape, SurfacePatch};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("frequency needs {needed} quadrature nodes, above the ceiling {ceiling}")]
    ResolutionCeiling { needed: f64, ceiling: f64 },
    #[error("rejection sampler accepted {accepted} of {attempts} proposals")]
    SamplerInefficient { accepted: usize, attempts: usize },
    #[error("curvature vanishes or is non-finite at {0:?}")]
    Degenerate(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("decay fit needs at least {needed} octaves, got {got}")]
    InsufficientRange { needed: usize, got: usize },
}

/// Common interface of the measures.
pub trait Measure: Sync {
    /// Ambient dimension.
    fn dim(&self) -> usize;
    /// `μ̂(ξ) = ∫ e(−⟨ξ, x⟩) dμ(x)`.
    fn fourier(&self, xi: &[f64]) -> Result<Complex64, MeasureError>;
    /// Independent samples in ambient coordinates.
    fn sample(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Vec<f64>>, MeasureError>;
    /// Deterministic quadrature of `f` against the measure with `order`
    /// Gauss–Legendre nodes per panel and `panels` panels per axis.
    fn quadrature(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), panels: usize, order: usize) -> f64;
}

/// How [`mu_of`] evaluates an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    MonteCarlo { count: usize, seed: u64 },
    Quadrature { panels: usize, order: usize },
}

/// `μ(f)` with a standard error (Monte Carlo) or zero error (quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

pub fn mu_of<M: Measure + ?Sized>(
    measure: &M,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    method: Method,
) -> Result<Estimate, MeasureError> {
    match method {
        Method::MonteCarlo { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = measure.sample(&mut rng, count)?;
            let vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            Ok(Estimate {
                value: mean,
                error: (var / n).sqrt(),
            })
        }
        Method::Quadrature { panels, order } => Ok(Estimate {
            value: measure.quadrature(f, panels, order),
            error: 0.0,
        }),
    }
}

/// Lebesgue measure on `[0, 1]^k`, as a [`Measure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lebesgue {
    pub k: usize,
}

impl Measure for Lebesgue {
    fn dim(&self) -> usize {
        self.k
    }

    fn fourier(&self, xi: &[f64]) -> Result<Complex64, MeasureError> {
        let mut v = Complex64::new(1.0, 0.0);
        for &x in xi {
            if x != 0.0 {
                let w = 2.0 * std::f64::consts::PI * x;
                v *= Complex64::new(w.sin(), w.cos() - 1.0) / w;
            }
        }
        Ok(v)
    }

    fn sample(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Vec<f64>>, MeasureError> {
        use rand::Rng;
        Ok((0..count)
            .map(|_| (0..self.k).map(|_| rng.gen::<f64>()).collect())
            .collect())
    }

    fn quadrature(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), panels: usize, order: usize) -> f64 {
        let lo = vec![0.0; self.k];
        let hi = vec![1.0; self.k];
        surface::tensor_integrate(&lo, &hi, &vec![panels; self.k], order, &|u| f(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_basics() {
        let m = Lebesgue { k: 2 };
        assert_eq!(m.fourier(&[0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(m.fourier(&[3.0, 0.0]).unwrap().norm() < 1e-15);
        let e = mu_of(&m, &|_| 1.0, Method::MonteCarlo { count: 100, seed: 1 }).unwrap();
        assert_eq!(e.value, 1.0);
        let q = mu_of(&m, &|x| x[0] * x[1], Method::Quadrature { panels: 1, order: 4 }).unwrap();
        assert!((q.value - 0.25).abs() < 1e-15);
    }
}
