use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::surface::product_integrate;
use super::{Measure, MeasureError};
use crate::bump::BumpFunction;
use crate::quadrature::GaussLegendre;

/// Mollified piece of the hyperplane `⟨α, x⟩ = offset`.
///
/// In rotated coordinates `x† = ϱ(x − p)` the unnormalized density is the
/// uniform measure on `ℬ × {0}` convolved with
/// `∏_{j<k} b(x_j/r_j) · b(x_k/η)`. With `η = 0` the transverse factor is
/// dropped and the measure lives on the hyperplane itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneSpec {
    pub alpha: Vec<f64>,
    pub offset: f64,
    pub half_widths: Vec<f64>,
    pub radii: Vec<f64>,
    pub eta: f64,
    #[serde(skip)]
    householder: Vec<f64>,
    #[serde(skip)]
    base: Vec<f64>,
}

impl HyperplaneSpec {
    pub fn new(
        alpha: Vec<f64>,
        offset: f64,
        half_widths: Vec<f64>,
        radii: Vec<f64>,
        eta: f64,
    ) -> Result<Self, MeasureError> {
        let k = alpha.len();
        if k < 2 || alpha[0] != 1.0 {
            return Err(MeasureError::InvalidParameter(
                "normal must have the form (1, α₂, …, α_k) with k ≥ 2".into(),
            ));
        }
        for v in [&half_widths, &radii] {
            if v.len() != k - 1 {
                return Err(MeasureError::DimensionMismatch {
                    expected: k - 1,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !(*x > 0.0)) {
                return Err(MeasureError::InvalidParameter("box and radii must be positive".into()));
            }
        }
        if !(eta >= 0.0) {
            return Err(MeasureError::InvalidParameter(format!("η = {eta}")));
        }
        let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut v: Vec<f64> = alpha.iter().map(|a| a / norm).collect();
        v[k - 1] -= 1.0;
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= vn);
        let centre = vec![0.5; k];
        let shift = (offset - dot(&alpha, &centre)) / (norm * norm);
        let base = centre.iter().zip(&alpha).map(|(c, a)| c + shift * a).collect();
        Ok(Self {
            alpha,
            offset,
            half_widths,
            radii,
            eta,
            householder: v,
            base,
        })
    }

    /// `α = (1, α₂, …)` through the cube centre with default box and radii.
    pub fn through_centre(alpha: Vec<f64>, eta: f64) -> Result<Self, MeasureError> {
        let k = alpha.len();
        let offset = alpha.iter().sum::<f64>() * 0.5;
        Self::new(alpha, offset, vec![0.2; k - 1], vec![0.05; k - 1], eta)
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// `ℓ = 1 + #{j ≥ 2 : α_j ≠ 0}`.
    pub fn ell(&self) -> usize {
        1 + self.alpha[1..].iter().filter(|a| **a != 0.0).count()
    }

    /// Point of the hyperplane about which the measure is centred.
    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    /// Applies the reflection `ϱ`, which swaps `α/|α|` and `e_k`.
    pub fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.householder;
        let s = 2.0 * dot(v, x);
        x.iter().zip(v).map(|(a, b)| a - s * b).collect()
    }

    /// Smallest `t` with `ξ ∈ t·ℛ∨`; the transverse side is ignored when `η = 0`.
    pub fn tube_scale(&self, xi: &[f64]) -> f64 {
        let z = self.rotate(xi);
        let k = self.k();
        let mut t: f64 = 0.0;
        for j in 0..k - 1 {
            t = t.max(z[j].abs() * self.half_widths[j]);
        }
        if self.eta > 0.0 {
            t = t.max(z[k - 1].abs() * self.eta);
        }
        t
    }

    fn bump() -> BumpFunction {
        BumpFunction::inner()
    }

    /// Closed-form transform in rotated coordinates.
    fn transform_rotated(&self, z: &[f64]) -> f64 {
        let b = Self::bump();
        let nb = b.l1_norm();
        let k = self.k();
        let mut v = 1.0;
        for j in 0..k - 1 {
            let w = 2.0 * PI * self.half_widths[j] * z[j];
            let box_part = if w == 0.0 { 1.0 } else { w.sin() / w };
            v *= box_part * b.transform_interpolated(self.radii[j] * z[j]) / nb;
        }
        if self.eta > 0.0 {
            v *= b.transform_interpolated(self.eta * z[k - 1]) / nb;
        }
        v
    }

    fn phase(&self, xi: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * dot(xi, &self.base).fract())
    }

    /// `μ̂_η(ξ)` from the product formula.
    pub fn fourier_closed(&self, xi: &[f64]) -> Complex64 {
        self.phase(xi) * self.transform_rotated(&self.rotate(xi))
    }

    /// Density of the tangential coordinate `j`: the box indicator smoothed
    /// by `b(·/r_j)`, normalized.
    fn axis_density(&self, j: usize, s: f64) -> f64 {
        let (bw, r) = (self.half_widths[j], self.radii[j]);
        let lo = ((s - bw) / r).max(-1.0);
        let hi = ((s + bw) / r).min(1.0);
        if hi <= lo {
            return 0.0;
        }
        let b = Self::bump();
        let pieces = ((hi - lo) * 8.0).ceil().max(1.0) as usize;
        let step = (hi - lo) / pieces as f64;
        let rule = GaussLegendre::cached(24);
        let mass: f64 = (0..pieces)
            .map(|i| {
                let a = lo + i as f64 * step;
                rule.integrate(a, a + step, |u| b.eval(u))
            })
            .sum();
        mass / (2.0 * bw * b.l1_norm())
    }

    fn transverse_density(&self, t: f64) -> f64 {
        let b = Self::bump();
        b.eval(t / self.eta) / (self.eta * b.l1_norm())
    }

    /// `μ̂_η(ξ)` by integrating the density directly, one coordinate at a
    /// time in the rotated frame.
    pub fn fourier_direct(&self, xi: &[f64]) -> Complex64 {
        let z = self.rotate(xi);
        let k = self.k();
        let mut v = Complex64::new(1.0, 0.0);
        for j in 0..k - 1 {
            let ext = self.half_widths[j] + self.radii[j];
            v *= axis_transform(|s| self.axis_density(j, s), ext, self.radii[j], z[j]);
        }
        if self.eta > 0.0 {
            v *= axis_transform(|t| self.transverse_density(t), self.eta, self.eta, z[k - 1]);
        }
        self.phase(xi) * v
    }

    fn to_ambient(&self, rotated: &[f64]) -> Vec<f64> {
        self.rotate(rotated)
            .iter()
            .zip(&self.base)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// `∫ ρ(s) e(−sζ) ds` for an even density supported in `[−ext, ext]` whose
/// features have width about `scale`.
fn axis_transform(rho: impl Fn(f64) -> f64, ext: f64, scale: f64, zeta: f64) -> Complex64 {
    let panels = ((2.0 * ext * zeta.abs()).ceil() as usize).max((16.0 * ext / scale).ceil() as usize);
    let h = 2.0 * ext / panels as f64;
    let rule = GaussLegendre::cached(24);
    let mut acc = 0.0;
    for p in 0..panels {
        let a = -ext + p as f64 * h;
        acc += rule.integrate(a, a + h, |s| rho(s) * (2.0 * PI * zeta * s).cos());
    }
    Complex64::new(acc, 0.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sample_bump(rng: &mut ChaCha8Rng) -> f64 {
    let b = HyperplaneSpec::bump();
    loop {
        let u = rng.gen_range(-1.0..1.0);
        if rng.gen::<f64>() < b.eval(u) {
            return u;
        }
    }
}

impl Measure for HyperplaneSpec {
    fn dim(&self) -> usize {
        self.k()
    }

    fn fourier(&self, xi: &[f64]) -> Result<Complex64, MeasureError> {
        if xi.len() != self.k() {
            return Err(MeasureError::DimensionMismatch {
                expected: self.k(),
                got: xi.len(),
            });
        }
        Ok(self.fourier_closed(xi))
    }

    fn sample(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Vec<f64>>, MeasureError> {
        let k = self.k();
        Ok((0..count)
            .map(|_| {
                let mut x = Vec::with_capacity(k);
                for j in 0..k - 1 {
                    let bw = self.half_widths[j];
                    x.push(rng.gen_range(-bw..bw) + self.radii[j] * sample_bump(rng));
                }
                x.push(if self.eta > 0.0 { self.eta * sample_bump(rng) } else { 0.0 });
                self.to_ambient(&x)
            })
            .collect())
    }

    /// `panels` counts panels per mollifier width on every axis.
    fn quadrature(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), panels: usize, order: usize) -> f64 {
        let k = self.k();
        let rule = GaussLegendre::cached(order);
        let axis = |ext: f64, scale: f64, rho: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
            let count = ((2.0 * ext / scale).ceil() as usize).max(1) * panels;
            let h = 2.0 * ext / count as f64;
            let mut out = Vec::with_capacity(count * order);
            for p in 0..count {
                let c = -ext + (p as f64 + 0.5) * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let s = c + 0.5 * h * x;
                    let d = rho(s);
                    if d > 0.0 {
                        out.push((s, 0.5 * h * w * d));
                    }
                }
            }
            out
        };
        let mut axes: Vec<Vec<(f64, f64)>> = (0..k - 1)
            .map(|j| {
                axis(self.half_widths[j] + self.radii[j], self.radii[j], &|s| self.axis_density(j, s))
            })
            .collect();
        if self.eta > 0.0 {
            axes.push(axis(self.eta, self.eta, &|t| self.transverse_density(t)));
        }
        product_integrate(&axes, &|u| {
            let mut x = u[..k - 1].to_vec();
            x.push(if self.eta > 0.0 { u[k - 1] } else { 0.0 });
            f(&self.to_ambient(&x))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn spec(eta: f64) -> HyperplaneSpec {
        HyperplaneSpec::through_centre(vec![1.0, 2f64.sqrt(), 3f64.sqrt()], eta).unwrap()
    }

    #[test]
    fn reflection_aligns_normal() {
        let s = spec(0.01);
        let a: Vec<f64> = s.alpha.clone();
        let z = s.rotate(&a);
        let n = dot(&a, &a).sqrt();
        assert!(z[0].abs() < 1e-14 && z[1].abs() < 1e-14 && (z[2] - n).abs() < 1e-14);
        assert!((dot(&s.alpha, s.base_point()) - s.offset).abs() < 1e-14);
        assert_eq!(s.ell(), 3);
        let s2 = HyperplaneSpec::through_centre(vec![1.0, 0.0, 0.5], 0.0).unwrap();
        assert_eq!(s2.ell(), 2);
    }

    #[test]
    fn closed_form_matches_direct() {
        for eta in [0.0, 0.01] {
            let s = spec(eta);
            assert!((s.fourier_closed(&[0.0; 3]) - 1.0).norm() < 1e-13);
            for xi in [[3.0, -1.0, 2.0], [17.0, 4.0, -9.0], [0.5, 40.0, 1.0]] {
                let a = s.fourier_closed(&xi);
                let b = s.fourier_direct(&xi);
                assert!((a - b).norm() < 1e-10, "η={eta} ξ={xi:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tube_direction_holds_until_inverse_width() {
        let s = spec(1e-3);
        let n = dot(&s.alpha, &s.alpha).sqrt();
        let dir: Vec<f64> = s.alpha.iter().map(|a| a / n).collect();
        for r in [10.0, 100.0, 300.0] {
            let xi: Vec<f64> = dir.iter().map(|d| d * r).collect();
            assert!(s.fourier_closed(&xi).norm() > 0.5);
        }
        let far: Vec<f64> = dir.iter().map(|d| d * 20_000.0).collect();
        assert!(s.fourier_closed(&far).norm() < 1e-3);
    }

    #[test]
    fn orthogonal_direction_decays() {
        let s = spec(1e-3);
        let xi = [-2f64.sqrt() * 40.0, 40.0, 0.0];
        assert!(dot(&xi, &s.alpha).abs() < 1e-12);
        assert!(s.fourier_closed(&xi).norm() < 0.05);
    }

    #[test]
    fn samples_lie_near_plane_and_quadrature_agrees() {
        let s = spec(0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = s.sample(&mut rng, 20_000).unwrap();
        let n = dot(&s.alpha, &s.alpha).sqrt();
        assert!(pts.iter().all(|p| (dot(p, &s.alpha) - s.offset).abs() / n <= 0.01));
        let f = |x: &[f64]| x[0] - 2.0 * x[1] + x[2] * x[2];
        let mc = pts.iter().map(|p| f(p)).sum::<f64>() / pts.len() as f64;
        let q = s.quadrature(&f, 2, 16);
        assert!((mc - q).abs() < 0.01, "{mc} vs {q}");
        assert!((s.quadrature(&|_| 1.0, 2, 16) - 1.0).abs() < 1e-8);
        let flat = spec(0.0);
        assert!((flat.quadrature(&|_| 1.0, 4, 24) - 1.0).abs() < 1e-10);
    }
}
