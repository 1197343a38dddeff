//! Smoothed periodic windows `A_n^*(d; x) = Σ_a b_ℛ(x − (a + y)/n)` and
//! their Fourier coefficients.
//!
//! The complete exponential sum over `a ∈ {1, …, n}^k` is handled
//! symbolically: the coefficient at `ξ ∈ ℤ^k` is exactly zero unless
//! `n | ξ`, and otherwise equals `n^k e(−⟨ξ, y⟩/n) b̂_ℛ(ξ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bump::{BumpFunction, Profile, Shape};
use crate::decomposition::{AdmissibleSystem, BoxSpec, IntervalType};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("window has zero volume")]
    ZeroVolume,
    #[error("frequency has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A box together with one bump per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowProduct {
    pub spec: BoxSpec,
    pub bumps: Vec<BumpFunction>,
}

impl WindowProduct {
    /// Inner bumps on full axes, annular bumps on half axes.
    pub fn new(spec: BoxSpec, profile: Profile) -> Self {
        let bumps = spec
            .types
            .iter()
            .map(|t| match t {
                IntervalType::Full => BumpFunction::new(Shape::Inner, profile),
                IntervalType::Half => BumpFunction::new(Shape::Annular, profile),
            })
            .collect();
        Self { spec, bumps }
    }

    pub fn with_bumps(spec: BoxSpec, bumps: Vec<BumpFunction>) -> Self {
        assert_eq!(spec.dim(), bumps.len());
        Self { spec, bumps }
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `b̂_ℛ(ξ) = ∏_j d_j b̂_j(d_j ξ_j)`.
    pub fn window_transform(&self, xi: &[f64]) -> f64 {
        self.spec
            .d
            .iter()
            .zip(&self.bumps)
            .zip(xi)
            .map(|((d, b), x)| d * b.transform(d * x))
            .product()
    }

    /// `λ(A_n^*) = n^k ∏_j d_j ‖b_j‖₁`.
    pub fn volume(&self) -> f64 {
        let nf = self.spec.n as f64;
        self.spec
            .d
            .iter()
            .zip(&self.bumps)
            .map(|(d, b)| nf * d * b.l1_norm())
            .product()
    }

    /// Exact zero off `nℤ^k`; otherwise `n^k e(−⟨ξ,y⟩/n) b̂_ℛ(ξ)`.
    pub fn coefficient(&self, xi: &[i64]) -> Complex64 {
        assert_eq!(xi.len(), self.dim(), "frequency dimension");
        let n = self.spec.n as i64;
        if xi.iter().any(|v| v % n != 0) {
            return Complex64::new(0.0, 0.0);
        }
        let xf: Vec<f64> = xi.iter().map(|&v| v as f64).collect();
        let amp = (n as f64).powi(self.dim() as i32) * self.window_transform(&xf);
        // ⟨ξ, y⟩/n = ⟨t, y⟩ with ξ = n t; reduce the phase before scaling.
        let phase: f64 = xi
            .iter()
            .zip(&self.spec.y)
            .map(|(&v, &y)| {
                let t = (v / n) as f64 * y;
                t - t.round()
            })
            .sum();
        Complex64::from_polar(amp, -2.0 * PI * phase)
    }

    /// Factors of [`Self::coefficient`] along axis `j` at `ξ_j = n t` for
    /// `t = −bound, …, bound`; the coefficient at `n t` is their product.
    pub fn axis_coefficients(&self, j: usize, bound: i64) -> Vec<Complex64> {
        let nf = self.spec.n as f64;
        let d = self.spec.d[j];
        let y = self.spec.y[j];
        (-bound..=bound)
            .map(|t| {
                let amp = nf * d * self.bumps[j].transform(d * nf * t as f64);
                let ph = t as f64 * y;
                Complex64::from_polar(amp, -2.0 * PI * (ph - ph.round()))
            })
            .collect()
    }

    /// `a_n(ξ) = Â_n^*(ξ)/λ(A_n^*)`.
    pub fn normalized_coefficient(&self, xi: &[i64]) -> Result<Complex64, FourierError> {
        let v = self.volume();
        if v <= 0.0 {
            return Err(FourierError::ZeroVolume);
        }
        Ok(self.coefficient(xi) / v)
    }

    /// `A_n^*(x)`, summing only the nearest lattice cell on each axis.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let nf = self.spec.n as f64;
        let mut v = 1.0;
        for j in 0..self.dim() {
            let s = nf * x[j] - self.spec.y[j];
            let r = (s - s.round()) / nf;
            v *= self.bumps[j].eval(r / self.spec.d[j]);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// Smallest `t` with `ξ ∈ t ℛ^∨`, where `ℛ^∨ = ∏ [−1/d_j, 1/d_j]`.
    pub fn dual_radius(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .zip(&self.spec.d)
            .map(|(x, d)| (x * d).abs())
            .fold(0.0, f64::max)
    }

    /// Axis integrals `∫ b_j(x/d_j)^p dx` by direct Gauss–Legendre quadrature.
    fn axis_power_integral(&self, j: usize, p: i32) -> f64 {
        let d = self.spec.d[j];
        let b = &self.bumps[j];
        let r = b.radius() * d;
        let rule = GaussLegendre::cached(48);
        let pieces = 64;
        let h = 2.0 * r / pieces as f64;
        (0..pieces)
            .map(|i| {
                let a = -r + h * i as f64;
                rule.integrate(a, a + h, |x| b.eval(x / d).powi(p))
            })
            .sum()
    }

    /// `λ(A_n^*)` by spatial quadrature, independent of the transforms.
    pub fn volume_spatial(&self) -> f64 {
        let nf = self.spec.n as f64;
        (0..self.dim())
            .map(|j| nf * self.axis_power_integral(j, 1))
            .product()
    }

    /// `|λ((A_n^*)²) − Σ_{|ξ|_∞ ≤ Ξ} |Â_n^*(ξ)|²|`.
    pub fn parseval_residual(&self, cutoff: u64) -> f64 {
        let nf = self.spec.n as f64;
        let n = self.spec.n;
        let mut full = 1.0;
        let mut trunc = 1.0;
        for j in 0..self.dim() {
            let d = self.spec.d[j];
            let b = &self.bumps[j];
            full *= nf * self.axis_power_integral(j, 2);
            let mut s = 0.0;
            let top = cutoff / n;
            for t in 0..=top {
                let xi = (t * n) as f64;
                let c = nf * d * b.transform(d * xi);
                s += if t == 0 { c * c } else { 2.0 * c * c };
            }
            trunc *= s;
        }
        (full - trunc).abs()
    }
}

/// An admissible system with windows attached: `f_n = Σ_{i ∈ I_m} A_n^*(d^{(i)}; ·)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSystem {
    pub base: AdmissibleSystem,
    pub profile: Profile,
}

impl SmoothedSystem {
    pub fn new(base: AdmissibleSystem, profile: Profile) -> Self {
        Self { base, profile }
    }

    pub fn k(&self) -> usize {
        self.base.k
    }

    pub fn windows(&self, n: u64) -> Vec<WindowProduct> {
        self.base
            .boxes(n)
            .into_iter()
            .map(|b| WindowProduct::new(b, self.profile))
            .collect()
    }

    pub fn eval(&self, n: u64, x: &[f64]) -> f64 {
        self.windows(n).iter().map(|w| w.eval(x)).sum()
    }

    /// `λ(f_n)` from the zero coefficients.
    pub fn lambda(&self, n: u64) -> f64 {
        self.windows(n).iter().map(WindowProduct::volume).sum()
    }

    /// `λ(f_n)` by spatial quadrature.
    pub fn lambda_spatial(&self, n: u64) -> f64 {
        self.windows(n).iter().map(WindowProduct::volume_spatial).sum()
    }

    pub fn coefficient(&self, n: u64, xi: &[i64]) -> Complex64 {
        self.windows(n).iter().map(|w| w.coefficient(xi)).sum()
    }
}

/// Pre-built windows for every `n ≤ N`, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct WindowTable {
    pub windows: Vec<Vec<WindowProduct>>,
    pub lambdas: Vec<f64>,
}

impl WindowTable {
    pub fn new(system: &SmoothedSystem, horizon: u64) -> Self {
        let windows: Vec<Vec<WindowProduct>> = (1..=horizon).map(|n| system.windows(n)).collect();
        let lambdas = windows
            .iter()
            .map(|ws| ws.iter().map(WindowProduct::volume).sum())
            .collect();
        Self { windows, lambdas }
    }

    pub fn horizon(&self) -> u64 {
        self.windows.len() as u64
    }

    /// `f_n(x)` for `1 ≤ n ≤ N`.
    pub fn eval(&self, n: u64, x: &[f64]) -> f64 {
        self.windows[n as usize - 1].iter().map(|w| w.eval(x)).sum()
    }

    pub fn lambda(&self, n: u64) -> f64 {
        self.lambdas[n as usize - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ApproxFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn window(n: u64, d: Vec<f64>, t: Vec<IntervalType>, y: Vec<f64>) -> WindowProduct {
        WindowProduct::new(BoxSpec::new(n, d, t, y).unwrap(), Profile::Classic)
    }

    #[test]
    fn zero_coefficient_is_volume() {
        let w = window(3, vec![0.125, 0.0625], vec![IntervalType::Full, IntervalType::Half], vec![0.2, 0.9]);
        let c = w.coefficient(&[0, 0]);
        assert!((c.re - w.volume()).abs() < 1e-15 && c.im == 0.0);
        assert!((w.volume() - w.volume_spatial()).abs() < 1e-10);
        assert_eq!(w.normalized_coefficient(&[0, 0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn axis_factors_multiply_to_coefficient() {
        let w = window(3, vec![0.125, 0.0625], vec![IntervalType::Full, IntervalType::Half], vec![0.2, 0.9]);
        let f: Vec<Vec<Complex64>> = (0..2).map(|j| w.axis_coefficients(j, 4)).collect();
        for t1 in -4i64..=4 {
            for t2 in -4i64..=4 {
                let c = w.coefficient(&[3 * t1, 3 * t2]);
                let p = f[0][(t1 + 4) as usize] * f[1][(t2 + 4) as usize];
                assert!((c - p).norm() < 1e-15, "{t1} {t2}: {c} vs {p}");
            }
        }
    }

    #[test]
    fn vanishes_off_lattice() {
        let w = window(2, vec![0.25, 0.125], vec![IntervalType::Full; 2], vec![0.0; 2]);
        assert_eq!(w.coefficient(&[3, 0]), Complex64::new(0.0, 0.0));
        assert_ne!(w.coefficient(&[4, 0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coefficient_matches_direct_integration() {
        // n = 2, k = 1, d = 1/8, ξ = 2: integrate A_n^*(x) e(−2x) over [0, 1].
        let w = window(2, vec![0.125], vec![IntervalType::Full], vec![0.0]);
        let rule = GaussLegendre::new(40);
        let pieces = 256;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..pieces {
            let a = i as f64 / pieces as f64;
            let b = a + 1.0 / pieces as f64;
            re += rule.integrate(a, b, |x| w.eval(&[x]) * (2.0 * PI * 2.0 * x).cos());
            im -= rule.integrate(a, b, |x| w.eval(&[x]) * (2.0 * PI * 2.0 * x).sin());
        }
        let c = w.coefficient(&[2]);
        assert!((c.re - 2.0 * w.window_transform(&[2.0])).abs() < 1e-15);
        assert!((c.re - re).abs() < 1e-11 && (c.im - im).abs() < 1e-11);
    }

    #[test]
    fn shifted_phase_matches_direct_integration() {
        let w = window(3, vec![0.0625], vec![IntervalType::Half], vec![0.37]);
        let rule = GaussLegendre::new(40);
        let pieces = 384;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..pieces {
            let a = i as f64 / pieces as f64;
            let b = a + 1.0 / pieces as f64;
            re += rule.integrate(a, b, |x| w.eval(&[x]) * (2.0 * PI * 6.0 * x).cos());
            im -= rule.integrate(a, b, |x| w.eval(&[x]) * (2.0 * PI * 6.0 * x).sin());
        }
        let c = w.coefficient(&[6]);
        assert!((c.re - re).abs() < 1e-11 && (c.im - im).abs() < 1e-11);
        let m = w.coefficient(&[-6]);
        assert!((m - c.conj()).norm() < 1e-15);
    }

    #[test]
    fn parseval_residual_shrinks() {
        let w = window(2, vec![0.25, 0.125], vec![IntervalType::Full; 2], vec![0.0; 2]);
        let r16 = w.parseval_residual(16 * 2);
        let r32 = w.parseval_residual(32 * 2);
        assert!(r32 <= r16);
        assert!(r32 < 1e-8);
        let whole = window(1, vec![0.5], vec![IntervalType::Full], vec![0.0]);
        assert!(whole.parseval_residual(64) < 1e-8);
    }

    #[test]
    fn f_n_bounded_and_supported() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(2.0), 0.3, 10, 2, vec![0.1, 0.4]).unwrap();
        let s = SmoothedSystem::new(sys, Profile::Classic);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [3u64, 50, 700] {
            let boxes = s.base.boxes(n);
            for _ in 0..5000 {
                let x = [rng.gen::<f64>(), rng.gen::<f64>()];
                let v = s.eval(n, &x);
                assert!((0.0..=1.0).contains(&v));
                if v > 0.0 {
                    assert!(crate::decomposition::union_contains(&boxes, &x));
                }
            }
            assert!((s.lambda(n) - s.lambda_spatial(n)).abs() < 1e-10);
        }
    }
}
