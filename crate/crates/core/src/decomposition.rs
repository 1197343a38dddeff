//! Periodic boxes `A_n(d)` and dyadic covers of the hyperbolic sets.
//!
//! A [`BoxSpec`] is the set of `x` with `‖n x_j − y_j‖ ∈ 𝒰_j` for every axis,
//! where `𝒰_j` is `[0, n d_j)` (full) or `[n d_j / 2, n d_j)` (half). All
//! scales produced here are dyadic, so volumes and intersections can be
//! computed exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{psi_cap, psi_floor, ApproxFunction};
use crate::torus::{dist_unchecked, TorusPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompositionError {
    #[error("scale {d} on axis {axis} is outside (0, 1/(2n)] for n = {n}")]
    ScaleOutOfRange { n: u64, axis: usize, d: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("modulus {n} is not in the dyadic block [2^{}, 2^{m})", m - 1)]
    BlockMismatch { n: u64, m: u32 },
    #[error("tau = {tau} must lie in (0, 1/k) for k = {k}")]
    BadTau { tau: f64, k: usize },
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("approximation function: {0}")]
    Approx(#[from] crate::approx::ApproxError),
}

/// The per-axis interval `𝒰_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalType {
    /// `[0, n d)`.
    Full,
    /// `[n d / 2, n d)`.
    Half,
}

/// One periodic rectangle family `A_n(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub n: u64,
    pub d: Vec<f64>,
    pub types: Vec<IntervalType>,
    pub y: Vec<f64>,
}

impl BoxSpec {
    pub fn new(
        n: u64,
        d: Vec<f64>,
        types: Vec<IntervalType>,
        y: Vec<f64>,
    ) -> Result<Self, DecompositionError> {
        if types.len() != d.len() {
            return Err(DecompositionError::DimensionMismatch {
                expected: d.len(),
                got: types.len(),
            });
        }
        if y.len() != d.len() {
            return Err(DecompositionError::DimensionMismatch {
                expected: d.len(),
                got: y.len(),
            });
        }
        let cap = 0.5 / n as f64;
        for (axis, &dj) in d.iter().enumerate() {
            if !(dj > 0.0 && dj <= cap) {
                return Err(DecompositionError::ScaleOutOfRange { n, axis, d: dj });
            }
        }
        Ok(Self { n, d, types, y })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Whether axis `j` spans the whole circle (a full interval at the
    /// largest admissible scale, closed at the antipode).
    pub fn saturated(&self, j: usize) -> bool {
        self.types[j] == IntervalType::Full && self.n as f64 * self.d[j] >= 0.5
    }

    #[inline]
    pub(crate) fn contains_raw(&self, x: &[f64]) -> bool {
        let nf = self.n as f64;
        for j in 0..self.d.len() {
            let t = dist_unchecked(nf * x[j] - self.y[j]);
            let w = nf * self.d[j];
            let ok = match self.types[j] {
                IntervalType::Full => t < w || w >= 0.5,
                IntervalType::Half => t >= 0.5 * w && t < w,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    pub fn contains(&self, x: &TorusPoint) -> Result<bool, DecompositionError> {
        if x.dim() != self.dim() {
            return Err(DecompositionError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(self.contains_raw(x.coords()))
    }

    /// Measure of the axis-`j` set per unit length.
    pub fn axis_measure(&self, j: usize) -> f64 {
        let w = self.n as f64 * self.d[j];
        match self.types[j] {
            IntervalType::Full => 2.0 * w,
            IntervalType::Half => w,
        }
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.axis_measure(j)).product()
    }

    /// The volume as an exact rational.
    pub fn volume_exact(&self) -> BigRational {
        let n = BigRational::from_integer(BigInt::from(self.n));
        let mut v = BigRational::one();
        for j in 0..self.dim() {
            let d = BigRational::from_float(self.d[j]).expect("finite scale");
            let w = &n * d;
            v *= match self.types[j] {
                IntervalType::Full => w * BigRational::from_integer(BigInt::from(2)),
                IntervalType::Half => w,
            };
        }
        v
    }

    /// Uniform sample from the box, returned with the lattice offsets used.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let nf = self.n as f64;
        let mut centre = Vec::with_capacity(self.dim());
        let mut offset = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let a = rng.gen_range(0..self.n) as f64;
            let d = self.d[j];
            let r = if self.saturated(j) {
                rng.gen_range(-0.5..0.5) / nf
            } else {
                match self.types[j] {
                    IntervalType::Full => rng.gen_range(-d..d),
                    IntervalType::Half => {
                        let m = rng.gen_range(0.5 * d..d);
                        if rng.gen::<bool>() {
                            m
                        } else {
                            -m
                        }
                    }
                }
            };
            centre.push((a + self.y[j]) / nf);
            offset.push(r);
        }
        (centre, offset)
    }
}

/// Reduce mod 1 into `[0, 1)`.
#[inline]
pub(crate) fn wrap(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Whether `x` lies in at least one of `boxes`.
pub fn union_contains(boxes: &[BoxSpec], x: &[f64]) -> bool {
    boxes.iter().any(|b| b.contains_raw(x))
}

/// Inner and outer covers `𝔅_n ⊆ A_n^× ⊆ ℭ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCover {
    pub inner: Vec<BoxSpec>,
    pub outer: Vec<BoxSpec>,
}

/// Outer cover `ℭ_n` of `A_n^×(ψ, y)` by full boxes at dyadic scales
/// `h = 2^{−i}` with `ψ(n)/n ≤ h ≤ 1/n` on the first `k − 1` axes.
pub fn outer_cover(n: u64, psi: &ApproxFunction, k: usize, y: &[f64]) -> Vec<BoxSpec> {
    assert_eq!(y.len(), k, "shift dimension");
    let p = psi.eval(n);
    if p <= 0.0 {
        return Vec::new();
    }
    let nf = n as f64;
    let cap = 0.5 / nf;
    if p >= 2f64.powi(-(k as i32)) || k == 1 {
        let d = if k == 1 { (p / nf).min(cap) } else { cap };
        return vec![BoxSpec::new(n, vec![d; k], vec![IntervalType::Full; k], y.to_vec())
            .expect("valid saturated box")];
    }
    let i_min = nf.log2().ceil() as i32;
    let i_max = (nf / p).log2().floor() as i32;
    let levels: Vec<i32> = (i_min..=i_max).collect();
    let target = p / nf.powi(k as i32);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k - 1];
    loop {
        let mut d = Vec::with_capacity(k);
        let mut prod = 1.0;
        for &i in &idx {
            let h = 2f64.powi(-levels[i]);
            prod *= h;
            d.push(h.min(cap));
        }
        let last = (2f64.powi(k as i32 - 1) * target / prod).min(cap);
        d.push(last);
        out.push(
            BoxSpec::new(n, d, vec![IntervalType::Full; k], y.to_vec()).expect("valid outer box"),
        );
        let mut pos = 0;
        loop {
            if pos == k - 1 {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < levels.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// One index `i ∈ I_m`: dyadic scales and interval types, independent of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    /// Exponents `e_j` with `d_j = 2^{−e_j}` for `j < k`.
    pub exponents: Vec<i32>,
    pub d: Vec<f64>,
    pub types: Vec<IntervalType>,
}

impl ScaleRow {
    pub fn box_spec(&self, n: u64, y: &[f64]) -> BoxSpec {
        BoxSpec::new(n, self.d.clone(), self.types.clone(), y.to_vec())
            .expect("row scales valid for every n in its block")
    }

    pub fn product(&self) -> f64 {
        self.d.iter().product()
    }
}

/// The index set `I_m` for one dyadic block `D_m = [2^{m−1}, 2^m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub m: u32,
    /// Exponent of the finest scale `d⁻`.
    pub e_minus: i32,
    /// Exponent of the coarsest scale `d⁺`.
    pub e_plus: i32,
    pub rows: Vec<ScaleRow>,
    /// `ψ(2^m)/2^{km}`, the common value of `∏_j d_{i,j}`.
    pub product: f64,
}

impl Block {
    pub fn range(&self) -> (u64, u64) {
        (1u64 << (self.m - 1), (1u64 << self.m) - 1)
    }

    pub fn contains_n(&self, n: u64) -> bool {
        let (lo, hi) = self.range();
        n >= lo && n <= hi
    }

    /// `w_m = 2^{km} Σ_i ∏_j d_{i,j}`.
    pub fn weight(&self, k: usize) -> f64 {
        2f64.powi((k as u32 * self.m) as i32) * self.rows.len() as f64 * self.product
    }

    pub fn boxes(&self, n: u64, y: &[f64]) -> Vec<BoxSpec> {
        self.rows.iter().map(|r| r.box_spec(n, y)).collect()
    }
}

/// Build `I_m` for `ψ` (assumed monotone and already floored and capped).
pub fn build_block(psi: &ApproxFunction, k: usize, m: u32, tau: f64) -> Block {
    assert!(k >= 2 && m >= 1);
    let kf = k as f64;
    let mf = m as f64;
    let mut e_minus = (mf * (1.0 + (1.0 + tau) / kf)).ceil() as i32;
    let e_plus = ((mf * (1.0 + (1.0 - tau) / kf)).ceil() as i32).max(m as i32 + 2);
    let psi_m = psi.eval(1u64 << m);
    let product = psi_m / 2f64.powi((k as u32 * m) as i32);
    let limit = 2f64.powi(-(m as i32) - 1);
    // Largest final scale occurs at the all-finest row; shrink the window
    // until it is admissible so the row set stays closed under refinement.
    while e_minus >= e_plus && product * 2f64.powi((k as i32 - 1) * e_minus) > limit {
        e_minus -= 1;
    }
    let mut rows = Vec::new();
    if psi_m > 0.0 && e_minus >= e_plus {
        let span = (e_minus - e_plus + 1) as usize;
        let mut idx = vec![0usize; k - 1];
        'outer: loop {
            let exponents: Vec<i32> = idx.iter().map(|&i| e_plus + i as i32).collect();
            let mut d: Vec<f64> = exponents.iter().map(|&e| 2f64.powi(-e)).collect();
            let mut types: Vec<IntervalType> = exponents
                .iter()
                .map(|&e| {
                    if e == e_minus {
                        IntervalType::Full
                    } else {
                        IntervalType::Half
                    }
                })
                .collect();
            let last = product / d.iter().product::<f64>();
            d.push(last);
            types.push(IntervalType::Full);
            rows.push(ScaleRow {
                exponents,
                d,
                types,
            });
            let mut pos = 0;
            loop {
                if pos == k - 1 {
                    break 'outer;
                }
                idx[pos] += 1;
                if idx[pos] < span {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
    Block {
        m,
        e_minus,
        e_plus,
        rows,
        product,
    }
}

/// Inner cover `𝔅_n` for `n ∈ D_m`.
pub fn inner_cover(
    n: u64,
    m: u32,
    psi: &ApproxFunction,
    k: usize,
    tau: f64,
    y: &[f64],
) -> Result<Vec<BoxSpec>, DecompositionError> {
    if m == 0 || m >= 63 || n < (1u64 << (m - 1)) || n >= (1u64 << m) {
        return Err(DecompositionError::BlockMismatch { n, m });
    }
    if y.len() != k {
        return Err(DecompositionError::DimensionMismatch {
            expected: k,
            got: y.len(),
        });
    }
    Ok(build_block(psi, k, m, tau).boxes(n, y))
}

/// Explicit constants of the scale window
/// `c_lo n^{−1−1/k−τ} ≤ d_{i,j} ≤ c_hi n^{−1−1/k+τ}` over one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConstants {
    pub c_lo: f64,
    pub c_hi: f64,
}

/// An admissible set system: blocks `m = 1, …, m_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSystem {
    pub k: usize,
    pub tau: f64,
    pub psi: ApproxFunction,
    pub y: Vec<f64>,
    pub blocks: Vec<Block>,
    pub windows: Vec<WindowConstants>,
}

impl AdmissibleSystem {
    /// Floors and caps `ψ`, then assembles every block.
    pub fn new(
        psi: &ApproxFunction,
        tau: f64,
        m_max: u32,
        k: usize,
        y: Vec<f64>,
    ) -> Result<Self, DecompositionError> {
        if k < 2 {
            return Err(DecompositionError::DimensionTooSmall(k));
        }
        if !(tau > 0.0 && tau < 1.0 / k as f64) {
            return Err(DecompositionError::BadTau { tau, k });
        }
        if y.len() != k {
            return Err(DecompositionError::DimensionMismatch {
                expected: k,
                got: y.len(),
            });
        }
        let prepared = psi_cap(&psi_floor(psi, k as u32)?);
        Self::from_prepared(prepared, tau, m_max, k, y)
    }

    /// Assembles blocks for an already prepared `ψ`.
    pub fn from_prepared(
        psi: ApproxFunction,
        tau: f64,
        m_max: u32,
        k: usize,
        y: Vec<f64>,
    ) -> Result<Self, DecompositionError> {
        use rayon::prelude::*;
        let blocks: Vec<Block> = (1..=m_max)
            .into_par_iter()
            .map(|m| build_block(&psi, k, m, tau))
            .collect();
        let windows = blocks.iter().map(|b| window_constants(b, k, tau)).collect();
        Ok(Self {
            k,
            tau,
            psi,
            y,
            blocks,
            windows,
        })
    }

    pub fn block_of(&self, n: u64) -> Option<&Block> {
        if n == 0 {
            return None;
        }
        let m = 64 - n.leading_zeros();
        self.blocks.get(m as usize - 1)
    }

    /// `A_n` as a disjoint union of boxes.
    pub fn boxes(&self, n: u64) -> Vec<BoxSpec> {
        self.block_of(n)
            .map(|b| b.boxes(n, &self.y))
            .unwrap_or_default()
    }

    /// Exact `λ(A_n)`.
    pub fn lambda_exact(&self, n: u64) -> BigRational {
        self.boxes(n)
            .iter()
            .map(BoxSpec::volume_exact)
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn lambda(&self, n: u64) -> f64 {
        self.boxes(n).iter().map(BoxSpec::volume).sum()
    }

    /// Every row product equals the block constant exactly.
    pub fn constant_products_hold(&self) -> bool {
        self.blocks.iter().all(|b| {
            let target = BigRational::from_float(b.product).expect("finite");
            b.rows.iter().all(|r| {
                r.d.iter()
                    .map(|&d| BigRational::from_float(d).expect("finite"))
                    .fold(BigRational::one(), |a, v| a * v)
                    == target
            })
        })
    }
}

fn window_constants(b: &Block, k: usize, tau: f64) -> WindowConstants {
    let (lo, hi) = b.range();
    let kf = k as f64;
    let mut c_lo = f64::INFINITY;
    let mut c_hi: f64 = 0.0;
    for row in &b.rows {
        for &d in &row.d {
            for n in [lo, hi] {
                let nf = n as f64;
                c_lo = c_lo.min(d / nf.powf(-1.0 - 1.0 / kf - tau));
                c_hi = c_hi.max(d / nf.powf(-1.0 - 1.0 / kf + tau));
            }
        }
    }
    WindowConstants { c_lo, c_hi }
}

/// Samples points of the cover and componentwise shrinkings of their torus
/// distances toward the same lattice point; counts shrinkings that leave it.
pub fn verify_property_p<R: Rng + ?Sized>(cover: &[BoxSpec], samples: usize, rng: &mut R) -> usize {
    if cover.is_empty() {
        return 0;
    }
    let mut violations = 0;
    for _ in 0..samples {
        let b = &cover[rng.gen_range(0..cover.len())];
        let (centre, offset) = b.sample(rng);
        let x: Vec<f64> = centre.iter().zip(&offset).map(|(c, r)| wrap(c + r)).collect();
        debug_assert!(b.contains_raw(&x));
        let z: Vec<f64> = centre
            .iter()
            .zip(&offset)
            .map(|(c, r)| {
                let s: f64 = match rng.gen_range(0..4) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.gen(),
                };
                wrap(c + s * r)
            })
            .collect();
        if !union_contains(cover, &z) {
            violations += 1;
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{in_a_times, Shift};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_examples() {
        let b = BoxSpec::new(1, vec![0.01; 2], vec![IntervalType::Full; 2], vec![0.0; 2]).unwrap();
        let x = TorusPoint::new(vec![0.001, 0.999]).unwrap();
        assert!(b.contains(&x).unwrap());
        let h = BoxSpec::new(1, vec![0.01], vec![IntervalType::Half], vec![0.0]).unwrap();
        assert!(!h.contains(&TorusPoint::new(vec![0.004]).unwrap()).unwrap());
        assert!(h.contains(&TorusPoint::new(vec![0.006]).unwrap()).unwrap());
        assert!(BoxSpec::new(4, vec![0.2], vec![IntervalType::Full], vec![0.0]).is_err());
    }

    #[test]
    fn volume_examples() {
        let f = BoxSpec::new(2, vec![0.05], vec![IntervalType::Full], vec![0.0]).unwrap();
        assert!((f.volume() - 0.2).abs() < 1e-15);
        let h = BoxSpec::new(2, vec![0.05], vec![IntervalType::Half], vec![0.0]).unwrap();
        assert!((h.volume() - 0.1).abs() < 1e-15);
        let d = BoxSpec::new(4, vec![0.0625, 0.03125], vec![IntervalType::Full, IntervalType::Half], vec![0.0; 2]).unwrap();
        // Full axis: 2·4/16; half axis: 4/32.
        assert_eq!(d.volume_exact(), BigRational::new(BigInt::from(1), BigInt::from(16)));
    }

    #[test]
    fn outer_cover_count_example() {
        let psi = ApproxFunction::constant(2f64.powi(-10));
        let c = outer_cover(8, &psi, 2, &[0.0, 0.0]);
        // Enumerate i with ψ/n ≤ 2^{−i} ≤ 1/n directly.
        let count = (0..64).filter(|&i| {
            let h = 2f64.powi(-i);
            h >= 2f64.powi(-10) / 8.0 && h <= 1.0 / 8.0
        }).count();
        assert_eq!(c.len(), count);
        assert_eq!(count, 11);
        assert_eq!(outer_cover(8, &ApproxFunction::constant(0.3), 2, &[0.0; 2]).len(), 1);
        assert!(outer_cover(8, &ApproxFunction::constant(0.0), 2, &[0.0; 2]).is_empty());
    }

    #[test]
    fn covers_sandwich_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = psi_cap(&psi_floor(&ApproxFunction::log_power(2.0), 2).unwrap());
        for k in [2usize, 3] {
            let y: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
            for n in [8u64, 37, 64] {
                let m = 64 - n.leading_zeros();
                let inner = inner_cover(n, m, &psi, k, 0.3, &y).unwrap();
                let outer = outer_cover(n, &psi, k, &y);
                for _ in 0..20_000 {
                    let x: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
                    let tp = TorusPoint::new(x.clone()).unwrap();
                    let in_a = in_a_times(&tp, n, &psi, &Shift::new(y.clone()).unwrap()).unwrap();
                    if union_contains(&inner, &x) {
                        assert!(in_a);
                    }
                    if in_a {
                        assert!(union_contains(&outer, &x), "k={k} n={n} x={x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn inner_boxes_lie_in_hyperbolic_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = psi_cap(&psi_floor(&ApproxFunction::log_power(2.0), 3).unwrap());
        let y = vec![0.1, 0.7, 0.3];
        let cover = inner_cover(700, 10, &psi, 3, 0.3, &y).unwrap();
        assert!(cover.len() > 1);
        for b in &cover {
            for _ in 0..500 {
                let (c, r) = b.sample(&mut rng);
                let x: Vec<f64> = c.iter().zip(&r).map(|(a, b)| wrap(a + b)).collect();
                assert!(b.contains_raw(&x));
                let tp = TorusPoint::new(x).unwrap();
                assert!(in_a_times(&tp, 700, &psi, &Shift::new(y.clone()).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn block_mismatch_and_bad_tau() {
        let psi = ApproxFunction::log_power(2.0);
        assert!(matches!(
            inner_cover(9, 3, &psi, 2, 0.01, &[0.0; 2]),
            Err(DecompositionError::BlockMismatch { .. })
        ));
        assert!(AdmissibleSystem::new(&psi, 0.6, 5, 2, vec![0.0; 2]).is_err());
        assert!(AdmissibleSystem::new(&psi, 0.0, 5, 2, vec![0.0; 2]).is_err());
    }

    #[test]
    fn constant_products_are_exact() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(1.0), 0.3, 14, 3, vec![0.0; 3]).unwrap();
        assert!(sys.constant_products_hold());
        assert!(sys.blocks.iter().any(|b| b.rows.len() > 1));
    }

    #[test]
    fn property_p_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(2.0), 0.3, 12, 2, vec![0.25, 0.6]).unwrap();
        for n in [5u64, 100, 3000] {
            let cover = sys.boxes(n);
            assert_eq!(verify_property_p(&cover, 2000, &mut rng), 0);
        }
    }

    #[test]
    fn serializes_round_trip() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(2.0), 0.2, 6, 2, vec![0.0; 2]).unwrap();
        let s = serde_json::to_string(&sys.blocks[5]).unwrap();
        let back: Block = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sys.blocks[5]);
    }
}
