//! Smooth compactly supported windows and their Fourier transforms.
//!
//! Every window is built from an even profile `φ` on `[−1, 1]` placed as
//! `b(x) = φ((|x| − c)/h)`. Transforms reduce to the one-dimensional cosine
//! transform `Φ̂(ζ) = ∫ φ(u) cos(2πζu) du`, which is memoized per profile.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate_adaptive, QuadratureError};

/// Absolute tolerance for transform quadrature.
pub const TRANSFORM_TOL: f64 = 1e-14;

/// The profile on `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(1 − 1/(1 − u²))`.
    Classic,
    /// Equal to 1 on `|u| ≤ p`, with a smooth monotone falloff to 0 at 1.
    Plateau { p: f64 },
}

/// Where the profile is placed on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// Support `|x| < 1`.
    Inner,
    /// Support `1/2 < |x| < 1`.
    Annular,
    /// Support `|x| < 2`.
    WideInner,
}

impl Shape {
    fn placement(self) -> (f64, f64) {
        match self {
            Shape::Inner => (0.0, 1.0),
            Shape::Annular => (0.75, 0.25),
            Shape::WideInner => (0.0, 2.0),
        }
    }

    /// Outer radius of the support.
    pub fn radius(self) -> f64 {
        let (c, h) = self.placement();
        c + h
    }
}

/// Smooth transition from 1 at `t ≤ 0` to 0 at `t ≥ 1`.
fn falloff(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let e = 1.0 / (1.0 - t) - 1.0 / t;
        1.0 / (1.0 + e.exp())
    }
}

impl Profile {
    pub fn plateau(p: f64) -> Self {
        assert!(p > 0.0 && p < 1.0, "plateau parameter must lie in (0,1)");
        Profile::Plateau { p }
    }

    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        if a >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::Classic => (1.0 - 1.0 / (1.0 - a * a)).exp(),
            Profile::Plateau { p } => {
                if a <= p {
                    1.0
                } else {
                    falloff((a - p) / (1.0 - p))
                }
            }
        }
    }

    fn key(self) -> u64 {
        match self {
            Profile::Classic => 0,
            Profile::Plateau { p } => p.to_bits(),
        }
    }

    fn transform_uncached(self, zeta: f64) -> Result<f64, QuadratureError> {
        let w = 2.0 * PI * zeta;
        match self {
            Profile::Classic => {
                let v = integrate_adaptive(|u| self.eval(u) * (w * u).cos(), 0.0, 1.0, TRANSFORM_TOL)?;
                Ok(2.0 * v)
            }
            Profile::Plateau { p } => {
                let flat = if zeta == 0.0 { p } else { (w * p).sin() / w };
                let tail = integrate_adaptive(|u| self.eval(u) * (w * u).cos(), p, 1.0, TRANSFORM_TOL)?;
                Ok(2.0 * (flat + tail))
            }
        }
    }

    /// `Φ̂(ζ) = ∫_{−1}^{1} φ(u) cos(2πζu) du`, memoized by exact argument.
    pub fn transform(self, zeta: f64) -> Result<f64, QuadratureError> {
        static CACHE: RwLock<Option<HashMap<(u64, u64), f64>>> = RwLock::new(None);
        let zeta = zeta.abs();
        let key = (self.key(), zeta.to_bits());
        if let Some(v) = CACHE.read().as_ref().and_then(|m| m.get(&key)) {
            return Ok(*v);
        }
        let v = self.transform_uncached(zeta)?;
        let mut guard = CACHE.write();
        let map = guard.get_or_insert_with(HashMap::new);
        if map.len() > 4_000_000 {
            map.clear();
        }
        map.insert(key, v);
        Ok(v)
    }
}

/// Chebyshev nodes per unit cell of the interpolated transform.
const CHEB_NODES: usize = 25;
/// Cells cover `ζ ∈ [0, CHEB_CELLS)`; larger arguments use the exact path.
const CHEB_CELLS: usize = 4096;

type Cell = [f64; CHEB_NODES];

fn classic_cells() -> &'static [OnceLock<Cell>] {
    static CELLS: OnceLock<Vec<OnceLock<Cell>>> = OnceLock::new();
    CELLS.get_or_init(|| (0..CHEB_CELLS).map(|_| OnceLock::new()).collect())
}

fn chebyshev_cell(profile: Profile, a: f64) -> Result<Cell, QuadratureError> {
    let n = CHEB_NODES as f64;
    let mut values = [0.0; CHEB_NODES];
    for (i, v) in values.iter_mut().enumerate() {
        let x = (PI * (i as f64 + 0.5) / n).cos();
        *v = profile.transform_uncached(a + 0.5 * (x + 1.0))?;
    }
    let mut c = [0.0; CHEB_NODES];
    for (j, cj) in c.iter_mut().enumerate() {
        let s: f64 = values
            .iter()
            .enumerate()
            .map(|(i, v)| v * (PI * j as f64 * (i as f64 + 0.5) / n).cos())
            .sum();
        *cj = 2.0 * s / n;
    }
    c[0] *= 0.5;
    Ok(c)
}

fn clenshaw(c: &Cell, x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for cj in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + cj;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

impl Profile {
    /// `Φ̂(ζ)` from piecewise Chebyshev interpolants of degree 24 on unit
    /// cells, built on first use; accurate to about `1e-14`. Only the classic
    /// profile is tabulated. Past the last cell `|Φ̂| < e^{−√(4πζ)} < 1e-90`
    /// and zero is returned.
    pub fn transform_interpolated(self, zeta: f64) -> Result<f64, QuadratureError> {
        let zeta = zeta.abs();
        if self != Profile::Classic {
            return self.transform(zeta);
        }
        if zeta >= CHEB_CELLS as f64 {
            return Ok(0.0);
        }
        let i = zeta as usize;
        let cell = &classic_cells()[i];
        let c = match cell.get() {
            Some(c) => c,
            None => {
                let built = chebyshev_cell(self, i as f64)?;
                cell.get_or_init(|| built)
            }
        };
        Ok(clenshaw(c, 2.0 * (zeta - i as f64) - 1.0))
    }
}

/// A window `b(x) = φ((|x| − c)/h)` with a real, even transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub shape: Shape,
    pub profile: Profile,
}

impl BumpFunction {
    pub fn new(shape: Shape, profile: Profile) -> Self {
        Self { shape, profile }
    }

    pub fn inner() -> Self {
        Self::new(Shape::Inner, Profile::Classic)
    }

    pub fn annular() -> Self {
        Self::new(Shape::Annular, Profile::Classic)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (c, h) = self.shape.placement();
        self.profile.eval((x.abs() - c) / h)
    }

    /// `b̂(ξ) = ∫ b(x) e(−xξ) dx`, real because `b` is even.
    pub fn try_transform(&self, xi: f64) -> Result<f64, QuadratureError> {
        let (c, h) = self.shape.placement();
        let core = self.profile.transform(h * xi)?;
        if c == 0.0 {
            Ok(h * core)
        } else {
            Ok(2.0 * h * (2.0 * PI * xi * c).cos() * core)
        }
    }

    /// [`Self::transform`] through [`Profile::transform_interpolated`].
    pub fn transform_interpolated(&self, xi: f64) -> f64 {
        let (c, h) = self.shape.placement();
        let core = self
            .profile
            .transform_interpolated(h * xi)
            .expect("window transform quadrature failed to converge");
        if c == 0.0 {
            h * core
        } else {
            2.0 * h * (2.0 * PI * xi * c).cos() * core
        }
    }

    pub fn transform(&self, xi: f64) -> f64 {
        self.try_transform(xi)
            .expect("window transform quadrature failed to converge")
    }

    /// `‖b‖₁ = b̂(0)`.
    pub fn l1_norm(&self) -> f64 {
        self.transform(0.0)
    }

    pub fn radius(&self) -> f64 {
        self.shape.radius()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn direct_transform(b: &BumpFunction, xi: f64) -> f64 {
        let r = b.radius();
        let rule = GaussLegendre::new(64);
        let pieces = 400;
        (0..pieces)
            .map(|i| {
                let a = -r + 2.0 * r * i as f64 / pieces as f64;
                let c = a + 2.0 * r / pieces as f64;
                rule.integrate(a, c, |x| b.eval(x) * (2.0 * PI * xi * x).cos())
            })
            .sum()
    }

    #[test]
    fn values_and_support() {
        let b = BumpFunction::inner();
        assert_eq!(b.eval(0.0), 1.0);
        assert_eq!(b.eval(1.0), 0.0);
        let a = BumpFunction::annular();
        assert_eq!(a.eval(0.5), 0.0);
        assert_eq!(a.eval(0.2), 0.0);
        assert_eq!(a.eval(0.75), 1.0);
        let w = BumpFunction::new(Shape::WideInner, Profile::Classic);
        assert!(w.eval(1.5) > 0.0);
        let p = BumpFunction::new(Shape::Inner, Profile::plateau(0.9));
        assert_eq!(p.eval(0.85), 1.0);
        assert!(p.eval(0.95) > 0.0 && p.eval(0.95) < 1.0);
    }

    #[test]
    fn transforms_match_direct_quadrature() {
        for b in [
            BumpFunction::inner(),
            BumpFunction::annular(),
            BumpFunction::new(Shape::WideInner, Profile::Classic),
            BumpFunction::new(Shape::Inner, Profile::plateau(0.5)),
            BumpFunction::new(Shape::Annular, Profile::plateau(0.9)),
        ] {
            for xi in [0.0, 0.3, 1.7, 5.0, 12.5] {
                let a = b.transform(xi);
                let d = direct_transform(&b, xi);
                assert!((a - d).abs() < 1e-11, "{b:?} at {xi}: {a} vs {d}");
            }
            assert_eq!(b.transform(-3.1), b.transform(3.1));
        }
    }

    #[test]
    fn plateau_norm_approaches_indicator() {
        let n = |p: f64| BumpFunction::new(Shape::Inner, Profile::plateau(p)).l1_norm();
        assert!(n(0.5) < n(0.9) && n(0.9) < n(0.99) && n(0.99) < 2.0);
        // The falloff is antisymmetric about its midpoint, so ‖φ‖₁ = 1 + p.
        for p in [0.5, 0.9, 0.99] {
            assert!((n(p) - (1.0 + p)).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolated_transform_matches_exact() {
        let mut worst: f64 = 0.0;
        for i in 0..400 {
            let z = 0.0137 + i as f64 * 0.3791;
            let a = Profile::Classic.transform_interpolated(z).unwrap();
            let e = Profile::Classic.transform_uncached(z).unwrap();
            worst = worst.max((a - e).abs());
        }
        assert!(worst < 1e-13, "{worst:e}");
        let p = Profile::plateau(0.5);
        assert_eq!(p.transform_interpolated(1.3).unwrap(), p.transform(1.3).unwrap());
        let b = BumpFunction::annular();
        assert!((b.transform_interpolated(2.7) - b.transform(2.7)).abs() < 1e-13);
    }
}
