use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Measure, MeasureError};
use crate::bump::{Profile, Shape};
use crate::fourier::WindowProduct;
use crate::quadrature::GaussLegendre;

/// Graph `x_k = g(u)` over a ball in `ℝ^{k−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphShape {
    /// Upper cap of a sphere of radius `radius`.
    Sphere { radius: f64 },
    /// `g(u) = a |u|² / 2`.
    Paraboloid { a: f64 },
    /// `g(u) = c √(1 − Σ (u_j/a_j)²)`.
    Ellipsoid { axes: Vec<f64>, c: f64 },
    /// `g(u) = ⟨β, u⟩`.
    Flat { slope: Vec<f64> },
}

/// Smooth probability measure on a graph patch: density `φ(|u|/r₀)` with
/// respect to surface area, normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePatch {
    pub k: usize,
    pub shape: GraphShape,
    /// Ambient translation; the point over `u` is `centre + (u, g(u))`.
    pub centre: Vec<f64>,
    pub r0: f64,
    pub profile: Profile,
    /// Largest number of quadrature nodes allowed per Fourier evaluation.
    pub node_ceiling: f64,
    #[serde(skip)]
    norm: f64,
    #[serde(skip)]
    zonal_norm: f64,
}

const PANEL_ORDER: usize = 16;

impl SurfacePatch {
    pub fn new(
        k: usize,
        shape: GraphShape,
        centre: Vec<f64>,
        r0: f64,
        profile: Profile,
    ) -> Result<Self, MeasureError> {
        if k < 2 || k > 4 {
            return Err(MeasureError::InvalidParameter(format!(
                "ambient dimension must be 2, 3 or 4, got {k}"
            )));
        }
        if centre.len() != k {
            return Err(MeasureError::DimensionMismatch {
                expected: k,
                got: centre.len(),
            });
        }
        if !(r0 > 0.0) {
            return Err(MeasureError::InvalidParameter(format!("r0 = {r0}")));
        }
        match &shape {
            GraphShape::Sphere { radius } if *radius <= r0 => {
                return Err(MeasureError::InvalidParameter(format!(
                    "support radius {r0} must be below the sphere radius {radius}"
                )))
            }
            GraphShape::Ellipsoid { axes, .. } if axes.len() != k - 1 || axes.iter().any(|a| *a <= r0) => {
                return Err(MeasureError::InvalidParameter(
                    "ellipsoid axes must exceed r0, one per domain coordinate".into(),
                ))
            }
            GraphShape::Flat { slope } if slope.len() != k - 1 => {
                return Err(MeasureError::DimensionMismatch {
                    expected: k - 1,
                    got: slope.len(),
                })
            }
            _ => {}
        }
        let mut p = Self {
            k,
            shape,
            centre,
            r0,
            profile,
            node_ceiling: 2f64.powi(24),
            norm: 1.0,
            zonal_norm: 1.0,
        };
        p.norm = polar_integrate(k - 1, p.r0, 8, 24, 64, &|u| {
            Complex64::new(p.density_unnormalized(u), 0.0)
        })
        .re;
        if matches!(p.shape, GraphShape::Sphere { .. }) {
            p.zonal_norm = p.fourier_zonal(&vec![0.0; k])?.re;
        }
        Ok(p)
    }

    /// Sphere cap of radius `radius` in the unit cube: the top of the sphere
    /// sits at the cube centre.
    pub fn sphere_cap(k: usize, radius: f64, r0: f64) -> Result<Self, MeasureError> {
        let mut centre = vec![0.5; k];
        centre[k - 1] = 0.5 - radius;
        Self::new(k, GraphShape::Sphere { radius }, centre, r0, Profile::Classic)
    }

    pub fn domain_dim(&self) -> usize {
        self.k - 1
    }

    pub fn g(&self, u: &[f64]) -> f64 {
        match &self.shape {
            GraphShape::Sphere { radius } => {
                (radius * radius - u.iter().map(|v| v * v).sum::<f64>()).sqrt()
            }
            GraphShape::Paraboloid { a } => 0.5 * a * u.iter().map(|v| v * v).sum::<f64>(),
            GraphShape::Ellipsoid { axes, c } => {
                c * (1.0 - u.iter().zip(axes).map(|(v, a)| (v / a).powi(2)).sum::<f64>()).sqrt()
            }
            GraphShape::Flat { slope } => u.iter().zip(slope).map(|(v, b)| v * b).sum(),
        }
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        match &self.shape {
            GraphShape::Sphere { .. } => {
                let g = self.g(u);
                u.iter().map(|v| -v / g).collect()
            }
            GraphShape::Paraboloid { a } => u.iter().map(|v| a * v).collect(),
            GraphShape::Ellipsoid { axes, c } => {
                let s = (1.0 - u.iter().zip(axes).map(|(v, a)| (v / a).powi(2)).sum::<f64>()).sqrt();
                u.iter().zip(axes).map(|(v, a)| -c * v / (a * a * s)).collect()
            }
            GraphShape::Flat { slope } => slope.clone(),
        }
    }

    pub fn hessian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let d = u.len();
        let mut h = vec![vec![0.0; d]; d];
        match &self.shape {
            GraphShape::Sphere { radius } => {
                let axes = vec![*radius; d];
                ellipsoid_hessian(u, &axes, *radius, &mut h);
            }
            GraphShape::Paraboloid { a } => {
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = *a;
                }
            }
            GraphShape::Ellipsoid { axes, c } => ellipsoid_hessian(u, axes, *c, &mut h),
            GraphShape::Flat { .. } => {}
        }
        h
    }

    /// Gaussian curvature `det(Hess g)/(1 + |∇g|²)^{(k+1)/2}`.
    pub fn curvature(&self, u: &[f64]) -> Result<f64, MeasureError> {
        if u.len() != self.k - 1 {
            return Err(MeasureError::DimensionMismatch {
                expected: self.k - 1,
                got: u.len(),
            });
        }
        let grad = self.gradient(u);
        let det = determinant(self.hessian(u));
        let q = 1.0 + grad.iter().map(|v| v * v).sum::<f64>();
        let kappa = det / q.powf((self.k as f64 + 1.0) / 2.0);
        if !kappa.is_finite() {
            return Err(MeasureError::Degenerate(u.to_vec()));
        }
        Ok(kappa)
    }

    /// Rejects patches whose curvature vanishes somewhere on the support.
    pub fn check_curved(&self) -> Result<(), MeasureError> {
        let m = 9;
        let d = self.k - 1;
        let mut idx = vec![0usize; d];
        loop {
            let u: Vec<f64> = idx
                .iter()
                .map(|&i| -self.r0 + 2.0 * self.r0 * i as f64 / (m - 1) as f64)
                .collect();
            if u.iter().map(|v| v * v).sum::<f64>() < self.r0 * self.r0 {
                let c = self.curvature(&u)?;
                if c.abs() < 1e-12 {
                    return Err(MeasureError::Degenerate(u));
                }
            }
            let mut p = 0;
            loop {
                if p == d {
                    return Ok(());
                }
                idx[p] += 1;
                if idx[p] < m {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    pub fn jacobian(&self, u: &[f64]) -> f64 {
        (1.0 + self.gradient(u).iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    fn density_unnormalized(&self, u: &[f64]) -> f64 {
        let r = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= self.r0 {
            return 0.0;
        }
        self.profile.eval(r / self.r0) * self.jacobian(u)
    }

    /// Density of the measure on the parameter domain (surface density
    /// times area element).
    pub fn density(&self, u: &[f64]) -> f64 {
        self.density_unnormalized(u) / self.norm
    }

    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = u.iter().zip(&self.centre).map(|(a, c)| a + c).collect();
        x.push(self.centre[self.k - 1] + self.g(u));
        x
    }

    fn max_slope(&self) -> f64 {
        let d = self.k - 1;
        let mut best: f64 = 0.0;
        for i in 0..=32 {
            let mut u = vec![0.0; d];
            for (j, v) in u.iter_mut().enumerate() {
                *v = if j == 0 { self.r0 * i as f64 / 32.0 } else { 0.0 };
            }
            for j in 0..d {
                let mut w = vec![0.0; d];
                w[j] = u[0];
                let g = self.gradient(&w);
                best = best.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
        best * 1.05
    }

    /// Fourier transform by Gauss–Legendre in polar coordinates over the
    /// parameter ball, refined with the oscillation rate of the phase.
    pub fn fourier_tensor(&self, xi: &[f64]) -> Result<Complex64, MeasureError> {
        if xi.len() != self.k {
            return Err(MeasureError::DimensionMismatch {
                expected: self.k,
                got: xi.len(),
            });
        }
        let d = self.k - 1;
        let freq = xi[..d].iter().map(|v| v * v).sum::<f64>().sqrt() + xi[d].abs() * self.max_slope();
        let radial = ((self.r0 * freq).ceil() as usize).max(8);
        let angular = (16.0 * self.r0 * freq).ceil() as usize + 32;
        let needed = polar_nodes(d, radial, PANEL_ORDER, angular);
        if needed > self.node_ceiling {
            return Err(MeasureError::ResolutionCeiling {
                needed,
                ceiling: self.node_ceiling,
            });
        }
        let phase0: f64 = xi.iter().zip(&self.centre).map(|(a, c)| a * c).sum();
        let v = polar_integrate(d, self.r0, radial, PANEL_ORDER, angular, &|u| {
            let w = self.density(u);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let ph: f64 = u.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + xi[d] * self.g(u);
            Complex64::from_polar(w, -2.0 * PI * ph)
        });
        Ok(v * Complex64::from_polar(1.0, -2.0 * PI * phase0.fract()))
    }

    /// Fourier transform of a sphere cap by integrating over the polar angle
    /// and using the closed-form average over the azimuthal sphere.
    pub fn fourier_zonal(&self, xi: &[f64]) -> Result<Complex64, MeasureError> {
        let radius = match self.shape {
            GraphShape::Sphere { radius } => radius,
            _ => {
                return Err(MeasureError::InvalidParameter(
                    "zonal route applies to sphere caps only".into(),
                ))
            }
        };
        if xi.len() != self.k {
            return Err(MeasureError::DimensionMismatch {
                expected: self.k,
                got: xi.len(),
            });
        }
        let d = self.k - 1;
        let perp = xi[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let par = xi[d];
        let theta_max = (self.r0 / radius).asin();
        let speed = radius * (perp + par.abs()) * theta_max;
        let panels = ((speed / 2.0).ceil() as usize).max(16);
        let rule = GaussLegendre::cached(PANEL_ORDER);
        let h = theta_max / panels as f64;
        let integrand = |th: f64, xi_perp: f64, xi_par: f64| -> Complex64 {
            let s = th.sin();
            let w = self.profile.eval(radius * s / self.r0) * s.powi(d as i32 - 1);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let a = sphere_average(d, 2.0 * PI * radius * xi_perp * s);
            Complex64::from_polar(w * a, -2.0 * PI * xi_par * radius * th.cos())
        };
        let integrate = |xi_perp: f64, xi_par: f64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..panels {
                let a = p as f64 * h;
                let c = a + 0.5 * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    acc += integrand(c + 0.5 * h * x, xi_perp, xi_par) * (w * 0.5 * h);
                }
            }
            acc
        };
        let v = integrate(perp, par);
        let z = self.zonal_norm;
        let phase0: f64 = xi
            .iter()
            .zip(&self.centre)
            .map(|(a, c)| a * c)
            .sum::<f64>()
            .fract();
        Ok(v / z * Complex64::from_polar(1.0, -2.0 * PI * phase0))
    }
}

impl SurfacePatch {
    /// `μ(W)` for a periodic window `W` by tensor Gauss–Legendre over the
    /// parameter rectangles of the lattice cells that the patch meets.
    pub fn window_mass(&self, w: &WindowProduct, order: usize) -> f64 {
        let d = self.k - 1;
        let n = w.spec.n as f64;
        let half: Vec<f64> = (0..self.k)
            .map(|j| w.spec.d[j] * w.bumps[j].radius())
            .collect();
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|j| {
                let lo = self.centre[j] - self.r0 - half[j];
                let hi = self.centre[j] + self.r0 + half[j];
                (
                    (n * lo - w.spec.y[j]).floor() as i64,
                    (n * hi - w.spec.y[j]).ceil() as i64,
                )
            })
            .collect();
        let mut cells: Vec<Vec<i64>> = vec![vec![]];
        for &(lo, hi) in &ranges {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    (lo..=hi).map(move |a| {
                        let mut c2 = c.clone();
                        c2.push(a);
                        c2
                    })
                })
                .collect();
        }
        let rule = GaussLegendre::cached(order);
        let slope = self.max_slope();
        cells
            .par_iter()
            .map(|cell| {
                let lo: Vec<f64> = (0..d)
                    .map(|j| (cell[j] as f64 + w.spec.y[j]) / n - half[j])
                    .collect();
                let hi: Vec<f64> = (0..d).map(|j| lo[j] + 2.0 * half[j]).collect();
                // Distance from the domain centre to the rectangle.
                let dist2: f64 = (0..d)
                    .map(|j| {
                        let c = self.centre[j];
                        let e = (lo[j] - c).max(0.0).max(c - hi[j]);
                        e * e
                    })
                    .sum();
                if dist2 >= self.r0 * self.r0 {
                    return 0.0;
                }
                let mid: Vec<f64> = (0..d).map(|j| 0.5 * (lo[j] + hi[j]) - self.centre[j]).collect();
                let rm = mid.iter().map(|v| v * v).sum::<f64>().sqrt();
                let probe: Vec<f64> = if rm > self.r0 * 0.999 {
                    mid.iter().map(|v| v * self.r0 * 0.999 / rm).collect()
                } else {
                    mid
                };
                let diag = half.iter().take(d).map(|h| h * h).sum::<f64>().sqrt();
                let xk = self.centre[d] + self.g(&probe);
                let reach = slope * (diag + 0.0) + slope * (rm - self.r0 * 0.999).max(0.0) + half[d];
                let a_lo = (n * (xk - reach) - w.spec.y[d]).ceil();
                let a_hi = (n * (xk + reach) - w.spec.y[d]).floor();
                if a_hi < a_lo {
                    return 0.0;
                }
                let axes: Vec<Vec<(f64, f64)>> = (0..d)
                    .map(|j| {
                        let c = 0.5 * (lo[j] + hi[j]) - self.centre[j];
                        let hj = half[j];
                        // Panels follow the bump's support so each smooth
                        // piece gets its own nodes; steep transverse windows
                        // add further splits.
                        let pieces: Vec<(f64, f64)> = if w.bumps[j].shape == Shape::Annular {
                            vec![(-hj, -0.5 * hj), (0.5 * hj, hj)]
                        } else {
                            vec![(-hj, hj)]
                        };
                        let split = 2 * ((slope * hj / half[d]).ceil() as usize).clamp(1, 16);
                        let mut pts = Vec::new();
                        for (a, b) in pieces {
                            let step = (b - a) / split as f64;
                            for p in 0..split {
                                let a0 = a + p as f64 * step;
                                for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                                    pts.push((c + a0 + 0.5 * step * (x + 1.0), 0.5 * step * wt));
                                }
                            }
                        }
                        pts
                    })
                    .collect();
                let mut u = vec![0.0; d];
                nested(&axes, 0, &mut u, &|u| {
                    let dens = self.density(u);
                    if dens == 0.0 {
                        0.0
                    } else {
                        dens * w.eval(&self.embed(u))
                    }
                })
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }
}

/// `∫_{S^{d−1}} e(−⟨ω, e⟩ t/2π) dω` for `d = 1, 2, 3`.
fn sphere_average(d: usize, t: f64) -> f64 {
    match d {
        1 => 2.0 * t.cos(),
        2 => 2.0 * PI * libm::j0(t),
        3 => {
            if t.abs() < 1e-8 {
                4.0 * PI
            } else {
                4.0 * PI * t.sin() / t
            }
        }
        _ => unreachable!("dimension checked at construction"),
    }
}

fn ellipsoid_hessian(u: &[f64], axes: &[f64], c: f64, h: &mut [Vec<f64>]) {
    let s = 1.0 - u.iter().zip(axes).map(|(v, a)| (v / a).powi(2)).sum::<f64>();
    let sq = s.sqrt();
    for i in 0..u.len() {
        for j in 0..u.len() {
            let ai = axes[i] * axes[i];
            let aj = axes[j] * axes[j];
            let mut v = -c * u[i] * u[j] / (ai * aj * s * sq);
            if i == j {
                v -= c / (ai * sq);
            }
            h[i][j] = v;
        }
    }
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for cc in c..n {
                m[r][cc] -= f * m[c][cc];
            }
        }
    }
    det
}

fn polar_nodes(d: usize, radial: usize, order: usize, angular: usize) -> f64 {
    let r = (radial * order) as f64;
    match d {
        1 => 2.0 * r,
        2 => r * angular as f64,
        _ => r * angular as f64 * (angular.div_ceil(2 * order).max(2) * order) as f64,
    }
}

/// Unit directions of `S^{d−1}` with quadrature weights: the two points for
/// `d = 1`, the trapezoid rule in angle for `d = 2`, and Gauss–Legendre in
/// the polar angle times the trapezoid rule in azimuth for `d = 3`.
fn sphere_rule(d: usize, order: usize, angular: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)],
        2 => (0..angular)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / angular as f64;
                (vec![t.cos(), t.sin()], 2.0 * PI / angular as f64)
            })
            .collect(),
        3 => {
            let panels = angular.div_ceil(2 * order).max(2);
            let rule = GaussLegendre::cached(order);
            let h = PI / panels as f64;
            let mut out = Vec::with_capacity(panels * order * angular);
            for p in 0..panels {
                let c = (p as f64 + 0.5) * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let th = c + 0.5 * h * x;
                    let wt = 0.5 * h * w * th.sin() * 2.0 * PI / angular as f64;
                    for i in 0..angular {
                        let ph = 2.0 * PI * i as f64 / angular as f64;
                        out.push((vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()], wt));
                    }
                }
            }
            out
        }
        _ => unreachable!("domain dimension is 1, 2 or 3"),
    }
}

/// `∫_{|u| < r0} f(u) du` in polar coordinates with `radial` panels of
/// `order` Gauss–Legendre nodes along each ray.
fn polar_integrate(
    d: usize,
    r0: f64,
    radial: usize,
    order: usize,
    angular: usize,
    f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
) -> Complex64 {
    let rule = GaussLegendre::cached(order);
    let h = r0 / radial as f64;
    let mut rays = Vec::with_capacity(radial * order);
    for p in 0..radial {
        let c = (p as f64 + 0.5) * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let rho = c + 0.5 * h * x;
            rays.push((rho, 0.5 * h * w * rho.powi(d as i32 - 1)));
        }
    }
    sphere_rule(d, order, angular)
        .par_iter()
        .map(|(omega, wo)| {
            let mut u = vec![0.0; d];
            let mut acc = Complex64::new(0.0, 0.0);
            for &(rho, wr) in &rays {
                for (a, b) in u.iter_mut().zip(omega) {
                    *a = rho * b;
                }
                acc += f(&u) * wr;
            }
            acc * wo
        })
        .sum()
}

/// Tensor Gauss–Legendre over a box with `panels[j]` equal panels per axis.
pub(crate) fn tensor_integrate(
    lo: &[f64],
    hi: &[f64],
    panels: &[usize],
    order: usize,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> f64 {
    let d = lo.len();
    let rule = GaussLegendre::cached(order);
    let axes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|j| {
            let h = (hi[j] - lo[j]) / panels[j] as f64;
            let mut pts = Vec::with_capacity(panels[j] * order);
            for p in 0..panels[j] {
                let c = lo[j] + (p as f64 + 0.5) * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    pts.push((c + 0.5 * h * x, 0.5 * h * w));
                }
            }
            pts
        })
        .collect();
    product_integrate(&axes, f)
}

/// Integrates over a product grid whose per-axis weights are given.
pub(crate) fn product_integrate(axes: &[Vec<(f64, f64)>], f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let d = axes.len();
    if d == 0 {
        return f(&[]);
    }
    axes[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut u = vec![0.0; d];
            u[0] = x0;
            w0 * nested(axes, 1, &mut u, f)
        })
        .sum()
}

fn nested(axes: &[Vec<(f64, f64)>], j: usize, u: &mut Vec<f64>, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    if j == axes.len() {
        return f(u);
    }
    let mut acc = 0.0;
    for &(x, w) in &axes[j] {
        u[j] = x;
        acc += w * nested(axes, j + 1, u, f);
    }
    acc
}

impl Measure for SurfacePatch {
    fn dim(&self) -> usize {
        self.k
    }

    fn fourier(&self, xi: &[f64]) -> Result<Complex64, MeasureError> {
        if matches!(self.shape, GraphShape::Sphere { .. }) {
            self.fourier_zonal(xi)
        } else {
            self.fourier_tensor(xi)
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Vec<f64>>, MeasureError> {
        let d = self.k - 1;
        let mut bound: f64 = 0.0;
        for i in 0..=64 {
            let mut u = vec![0.0; d];
            u[0] = self.r0 * i as f64 / 64.0 * 0.999_999;
            bound = bound.max(self.density_unnormalized(&u));
        }
        bound *= 1.01;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        let limit = 200 * count.max(1) + 1000;
        while out.len() < count {
            attempts += 1;
            if attempts > limit {
                return Err(MeasureError::SamplerInefficient {
                    accepted: out.len(),
                    attempts,
                });
            }
            let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-self.r0..self.r0)).collect();
            let w = self.density_unnormalized(&u);
            if w > 0.0 && rng.gen::<f64>() * bound < w {
                out.push(self.embed(&u));
            }
        }
        Ok(out)
    }

    fn quadrature(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), panels: usize, order: usize) -> f64 {
        polar_integrate(self.k - 1, self.r0, panels, order, 4 * panels * order, &|u| {
            let w = self.density(u);
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(w * f(&self.embed(u)), 0.0)
            }
        })
        .re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{mu_of, Method};
    use rand::SeedableRng;

    #[test]
    fn curvature_examples() {
        let s = SurfacePatch::new(3, GraphShape::Sphere { radius: 1.0 }, vec![0.0; 3], 0.5, Profile::Classic).unwrap();
        assert!((s.curvature(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        // Off-centre point of the unit sphere still has curvature 1.
        assert!((s.curvature(&[0.3, -0.2]).unwrap() - 1.0).abs() < 1e-12);
        let p = SurfacePatch::new(3, GraphShape::Paraboloid { a: 1.0 }, vec![0.0; 3], 0.5, Profile::Classic).unwrap();
        assert!((p.curvature(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        let f = SurfacePatch::new(3, GraphShape::Flat { slope: vec![0.2, 0.1] }, vec![0.0; 3], 0.5, Profile::Classic).unwrap();
        assert_eq!(f.curvature(&[0.1, 0.1]).unwrap(), 0.0);
        assert!(f.check_curved().is_err());
        assert!(s.check_curved().is_ok());
    }

    #[test]
    fn fourier_routes_agree_on_sphere() {
        for k in [2usize, 3, 4] {
            let s = SurfacePatch::sphere_cap(k, 0.4, 0.3).unwrap();
            let mut xi = vec![0.0; k];
            assert!((s.fourier(&xi).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            for (i, v) in xi.iter_mut().enumerate() {
                *v = 3.0 + 2.5 * i as f64;
            }
            let a = s.fourier_zonal(&xi).unwrap();
            let b = s.fourier_tensor(&xi).unwrap();
            assert!((a - b).norm() < 1e-9, "k={k}: {a} vs {b}");
            let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
            assert!((s.fourier(&neg).unwrap() - a.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn resolution_ceiling_is_enforced() {
        let mut p = SurfacePatch::new(3, GraphShape::Paraboloid { a: 1.0 }, vec![0.5; 3], 0.3, Profile::Classic).unwrap();
        p.node_ceiling = 1e4;
        assert!(matches!(
            p.fourier(&[500.0, 0.0, 500.0]),
            Err(MeasureError::ResolutionCeiling { .. })
        ));
    }

    #[test]
    fn sampler_matches_quadrature() {
        let s = SurfacePatch::new(
            3,
            GraphShape::Ellipsoid { axes: vec![0.5, 0.7], c: 0.3 },
            vec![0.5, 0.5, 0.1],
            0.3,
            Profile::Classic,
        )
        .unwrap();
        let f = |x: &[f64]| 2.0 * x[0] - x[1] + 3.0 * x[2];
        let q = mu_of(&s, &f, Method::Quadrature { panels: 4, order: 16 }).unwrap();
        let m = mu_of(&s, &f, Method::MonteCarlo { count: 100_000, seed: 4 }).unwrap();
        assert!((q.value - m.value).abs() < 4.0 * m.error);
        let mut r1 = ChaCha8Rng::seed_from_u64(8);
        let mut r2 = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(s.sample(&mut r1, 50).unwrap(), s.sample(&mut r2, 50).unwrap());
        assert!((s.quadrature(&|_| 1.0, 8, 24) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn window_mass_matches_global_quadrature() {
        use crate::decomposition::{BoxSpec, IntervalType};
        let s = SurfacePatch::sphere_cap(3, 0.4, 0.3).unwrap();
        let spec = BoxSpec::new(
            4,
            vec![0.1, 0.06, 0.08],
            vec![IntervalType::Full, IntervalType::Half, IntervalType::Full],
            vec![0.1, 0.3, -0.2],
        )
        .unwrap();
        let w = WindowProduct::new(spec, Profile::Classic);
        let local = s.window_mass(&w, 24);
        let global = s.quadrature(&|x| w.eval(x), 48, 24);
        assert!((local - global).abs() < 1e-7 * global, "{local} vs {global}");
    }

    #[test]
    fn zonal_averages() {
        assert_eq!(sphere_average(1, 0.0), 2.0);
        assert!((sphere_average(2, 2.404_825_557_695_773)).abs() < 1e-14);
        assert!((sphere_average(3, PI) - 0.0).abs() < 1e-14);
    }
}
