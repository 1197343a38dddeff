//! Exact torus intersection volumes of periodic box families, Gallagher's
//! monotonicity, and the quasi-independence bounds checked over grids of
//! moduli and shifts.
//!
//! All endpoints are dyadic rationals. After scaling an axis by
//! `lcm(n, n′)·2^P` every endpoint becomes an integer, so interval algebra
//! runs in `i128` and volumes come out as exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bump::{BumpFunction, Profile};
use crate::decomposition::{AdmissibleSystem, BoxSpec, IntervalType};
use crate::fourier::{SmoothedSystem, WindowProduct};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QiError {
    #[error("boxes {0} and {1} of the same union overlap")]
    Overlap(usize, usize),
    #[error("endpoints need more than 120 bits after scaling")]
    Precision,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("set-level bound requires a homogeneous system (y = 0)")]
    NotHomogeneous,
    #[error("shifts are not ordered by torus distance on axis {0}")]
    NotOrdered(usize),
    #[error("star set has a half-width outside (0, 1/2] on axis {0}")]
    NotStarShaped(usize),
    #[error("{pairs} pairs exceed the budget of {budget}")]
    BudgetExceeded { pairs: u64, budget: u64 },
}

/// Bits of the fraction: the least `P` with `v·2^P ∈ ℤ`.
fn frac_bits(v: f64) -> u32 {
    if v == 0.0 {
        return 0;
    }
    let raw = v.abs().to_bits();
    let exp = ((raw >> 52) & 0x7ff) as i64;
    let frac = raw & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let tz = mant.trailing_zeros() as i64;
    (-(e + tz)).max(0) as u32
}

/// `v·2^p` as an integer; `None` if it is not one or does not fit.
fn to_fixed(v: f64, p: u32) -> Option<i128> {
    if v == 0.0 {
        return Some(0);
    }
    let raw = v.abs().to_bits();
    let exp = ((raw >> 52) & 0x7ff) as i64;
    let frac = raw & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let shift = e + p as i64;
    let m = mant as i128;
    let out = if shift >= 0 {
        if shift + 53 > 120 {
            return None;
        }
        m << shift
    } else {
        let s = (-shift) as u32;
        if s >= 64 || m & ((1i128 << s) - 1) != 0 {
            return None;
        }
        m >> s
    };
    Some(if v < 0.0 { -out } else { out })
}

/// Snaps a shift to the dyadic grid `2^{−bits}ℤ`.
pub fn snap_dyadic(v: f64, bits: u32) -> f64 {
    let s = 2f64.powi(bits as i32);
    (v * s).round() / s
}

/// One axis of a periodic family: copies of `pieces` (offsets in `x`) around
/// the centres `(a + y)/n`, or the whole circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicIntervalFamily {
    pub n: u64,
    pub y: f64,
    pub pieces: Vec<(f64, f64)>,
    pub full: bool,
}

impl PeriodicIntervalFamily {
    pub fn new(n: u64, y: f64, pieces: Vec<(f64, f64)>) -> Self {
        Self {
            n,
            y,
            pieces,
            full: false,
        }
    }

    pub fn from_box(b: &BoxSpec, j: usize) -> Self {
        let d = b.d[j];
        let pieces = match b.types[j] {
            IntervalType::Full => vec![(-d, d)],
            IntervalType::Half => vec![(-d, -0.5 * d), (0.5 * d, d)],
        };
        Self {
            n: b.n,
            y: b.y[j],
            pieces,
            full: b.saturated(j),
        }
    }

    fn bits(&self) -> u32 {
        self.pieces
            .iter()
            .flat_map(|&(a, b)| [frac_bits(a), frac_bits(b)])
            .chain([frac_bits(self.y)])
            .max()
            .unwrap_or(0)
    }

    /// Sorted disjoint intervals of the family (shifted by `shift`, already
    /// scaled) inside the common period `[0, T)` of the scaled axis.
    fn unfold(&self, lcm: u64, g: u64, p: u32, shift: i128) -> Result<Vec<(i128, i128)>, QiError> {
        let period = ((lcm / g) as i128) << p;
        if self.full {
            return Ok(vec![(0, period)]);
        }
        let step = (lcm / self.n) as i128;
        let y = to_fixed(self.y, p).ok_or(QiError::Precision)?;
        let mut out = Vec::new();
        for a in 0..(self.n / g) as i128 {
            let c = ((a << p) + y).checked_mul(step).ok_or(QiError::Precision)? + shift;
            for &(lo, hi) in &self.pieces {
                let lo_s = to_fixed(lo, p).ok_or(QiError::Precision)? * lcm as i128;
                let hi_s = to_fixed(hi, p).ok_or(QiError::Precision)? * lcm as i128;
                let len = hi_s - lo_s;
                if len >= period {
                    return Ok(vec![(0, period)]);
                }
                let s = (c + lo_s).rem_euclid(period);
                if s + len <= period {
                    out.push((s, s + len));
                } else {
                    out.push((s, period));
                    out.push((0, s + len - period));
                }
            }
        }
        out.sort_unstable();
        let mut merged: Vec<(i128, i128)> = Vec::with_capacity(out.len());
        for (a, b) in out {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(merged)
    }
}

fn overlap_length(a: &[(i128, i128)], b: &[(i128, i128)]) -> i128 {
    let (mut i, mut j, mut total) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// `(numerator, denominator)` of the length of `A ∩ (B + γ)` on `[0, 1)`.
fn axis_scaled(
    fa: &PeriodicIntervalFamily,
    fb: &PeriodicIntervalFamily,
    gamma: f64,
    p: u32,
) -> Result<(i128, i128), QiError> {
    let g = fa.n.gcd(&fb.n);
    let lcm = fa.n.lcm(&fb.n);
    let shift = to_fixed(gamma.rem_euclid(1.0), p)
        .ok_or(QiError::Precision)?
        .checked_mul(lcm as i128)
        .ok_or(QiError::Precision)?;
    let a = fa.unfold(lcm, g, p, 0)?;
    let b = fb.unfold(lcm, g, p, shift)?;
    let len = overlap_length(&a, &b);
    let den = (lcm as i128).checked_shl(p).ok_or(QiError::Precision)?;
    Ok((len * g as i128, den))
}

/// Exact length of `A ∩ (B + γ)` on the circle `[0, 1)`, unfolding both
/// families to their common period `1/gcd(n, n′)`.
pub fn axis_intersection(
    fa: &PeriodicIntervalFamily,
    fb: &PeriodicIntervalFamily,
    gamma: f64,
) -> Result<BigRational, QiError> {
    let p = fa.bits().max(fb.bits()).max(frac_bits(gamma.rem_euclid(1.0)));
    let (num, den) = axis_scaled(fa, fb, gamma, p)?;
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

fn union_bits(boxes: &[BoxSpec]) -> u32 {
    boxes
        .iter()
        .flat_map(|b| b.d.iter().chain(&b.y).map(|&v| frac_bits(v) + 1))
        .max()
        .unwrap_or(0)
}

fn volume_unchecked(a: &[BoxSpec], b: &[BoxSpec], gamma: &[f64]) -> Result<BigRational, QiError> {
    let p = union_bits(a)
        .max(union_bits(b))
        .max(gamma.iter().map(|g| frac_bits(g.rem_euclid(1.0))).max().unwrap_or(0));
    let fam_a: Vec<Vec<PeriodicIntervalFamily>> = a
        .iter()
        .map(|bx| (0..bx.dim()).map(|j| PeriodicIntervalFamily::from_box(bx, j)).collect())
        .collect();
    let fam_b: Vec<Vec<PeriodicIntervalFamily>> = b
        .iter()
        .map(|bx| (0..bx.dim()).map(|j| PeriodicIntervalFamily::from_box(bx, j)).collect())
        .collect();
    let mut total = BigRational::zero();
    for fa in &fam_a {
        for fb in &fam_b {
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for j in 0..fa.len() {
                let (nj, dj) = axis_scaled(&fa[j], &fb[j], gamma[j], p)?;
                if nj == 0 {
                    num = BigInt::zero();
                    break;
                }
                num *= BigInt::from(nj);
                den *= BigInt::from(dj);
            }
            if !num.is_zero() {
                total += BigRational::new(num, den);
            }
        }
    }
    Ok(total)
}

fn check_dims(a: &[BoxSpec], b: &[BoxSpec], gamma: &[f64]) -> Result<(), QiError> {
    let k = gamma.len();
    for bx in a.iter().chain(b) {
        if bx.dim() != k {
            return Err(QiError::DimensionMismatch {
                expected: k,
                got: bx.dim(),
            });
        }
    }
    Ok(())
}

/// Rejects unions whose boxes overlap in positive measure.
pub fn check_disjoint(boxes: &[BoxSpec]) -> Result<(), QiError> {
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let zero = vec![0.0; boxes[i].dim()];
            let v = volume_unchecked(&boxes[i..=i], &boxes[j..=j], &zero)?;
            if !v.is_zero() {
                return Err(QiError::Overlap(i, j));
            }
        }
    }
    Ok(())
}

/// `λ(A ∩ (B + γ)) = Σ_{i,i′} ∏_j |A_{i,j} ∩ (B_{i′,j} + γ_j)|`, exactly.
pub fn intersection_volume(a: &[BoxSpec], b: &[BoxSpec], gamma: &[f64]) -> Result<BigRational, QiError> {
    check_dims(a, b, gamma)?;
    check_disjoint(a)?;
    check_disjoint(b)?;
    volume_unchecked(a, b, gamma)
}

/// A strongly star-shaped set in the period cell, as a union of boxes
/// centred at the origin. Half-widths are in units of the period, in `(0, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSet {
    pub boxes: Vec<Vec<f64>>,
}

impl StarSet {
    pub fn new(boxes: Vec<Vec<f64>>) -> Result<Self, QiError> {
        let k = boxes.first().map_or(0, Vec::len);
        for b in &boxes {
            if b.len() != k {
                return Err(QiError::DimensionMismatch { expected: k, got: b.len() });
            }
            if let Some(j) = b.iter().position(|&w| !(w > 0.0 && w <= 0.5)) {
                return Err(QiError::NotStarShaped(j));
            }
        }
        Ok(Self { boxes })
    }

    fn dim(&self) -> usize {
        self.boxes.first().map_or(0, Vec::len)
    }
}

fn torus_dist(v: i128, period: i128) -> i128 {
    let r = v.rem_euclid(period);
    r.min(period - r)
}

/// `λ(H ∩ (H′ + t))` on the unit torus by coordinate compression: every
/// elementary cell between consecutive endpoints is tested at its midpoint.
pub fn star_overlap(h: &StarSet, h2: &StarSet, t: &[f64]) -> Result<BigRational, QiError> {
    let k = t.len();
    if h.dim() != k || h2.dim() != k {
        return Err(QiError::DimensionMismatch {
            expected: k,
            got: h.dim().min(h2.dim()),
        });
    }
    let p = h
        .boxes
        .iter()
        .chain(&h2.boxes)
        .flatten()
        .chain(t)
        .map(|&v| frac_bits(v.rem_euclid(1.0)))
        .max()
        .unwrap_or(0)
        + 1;
    let period: i128 = 1 << p;
    let fix = |v: f64| to_fixed(v, p).ok_or(QiError::Precision);
    let hw: Vec<Vec<i128>> = h.boxes.iter().map(|b| b.iter().map(|&w| fix(w)).collect()).collect::<Result<_, _>>()?;
    let hw2: Vec<Vec<i128>> = h2.boxes.iter().map(|b| b.iter().map(|&w| fix(w)).collect()).collect::<Result<_, _>>()?;
    let shift: Vec<i128> = t.iter().map(|&v| fix(v.rem_euclid(1.0))).collect::<Result<_, _>>()?;
    let cuts: Vec<Vec<i128>> = (0..k)
        .map(|j| {
            let mut c = vec![0, period];
            for b in &hw {
                c.push(b[j].rem_euclid(period));
                c.push((-b[j]).rem_euclid(period));
            }
            for b in &hw2 {
                c.push((shift[j] + b[j]).rem_euclid(period));
                c.push((shift[j] - b[j]).rem_euclid(period));
            }
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    // Midpoints on the doubled grid: 2·mid = lo + hi.
    let inside = |boxes: &[Vec<i128>], off: &[i128], mid2: &[i128]| {
        boxes.iter().any(|b| (0..k).all(|j| torus_dist(mid2[j] - 2 * off[j], 2 * period) <= 2 * b[j]))
    };
    let zero = vec![0i128; k];
    let mut idx = vec![0usize; k];
    let mut total = BigInt::zero();
    let mut mid2 = vec![0i128; k];
    'cells: loop {
        let mut area = BigInt::one();
        for j in 0..k {
            let (lo, hi) = (cuts[j][idx[j]], cuts[j][idx[j] + 1]);
            mid2[j] = lo + hi;
            area *= BigInt::from(hi - lo);
        }
        if inside(&hw, &zero, &mid2) && inside(&hw2, &shift, &mid2) {
            total += area;
        }
        let mut pos = 0;
        loop {
            if pos == k {
                break 'cells;
            }
            idx[pos] += 1;
            if idx[pos] + 1 < cuts[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
    Ok(BigRational::new(total, BigInt::from(period).pow(k as u32)))
}

/// Whether `λ(H ∩ (H′ + t)) ≥ λ(H ∩ (H′ + t′))` for `t ≤ t′` in torus distance.
pub fn gallagher_monotonicity_check(h: &StarSet, h2: &StarSet, t: &[f64], t2: &[f64]) -> Result<bool, QiError> {
    if t.len() != t2.len() {
        return Err(QiError::DimensionMismatch {
            expected: t.len(),
            got: t2.len(),
        });
    }
    let dist = |v: f64| {
        let r = v.rem_euclid(1.0);
        r.min(1.0 - r)
    };
    if let Some(j) = (0..t.len()).find(|&j| dist(t[j]) > dist(t2[j])) {
        return Err(QiError::NotOrdered(j));
    }
    Ok(star_overlap(h, h2, t)? >= star_overlap(h, h2, t2)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GallagherSummary {
    pub trials: usize,
    pub violations: usize,
    /// Trials where the nearer shift gave a strictly larger overlap.
    pub strict: usize,
}

fn random_dyadic<R: Rng>(rng: &mut R, max: f64, bits: u32) -> f64 {
    let s = 1u64 << bits;
    max * rng.gen_range(1..=s) as f64 / s as f64
}

fn random_star<R: Rng>(rng: &mut R, k: usize) -> StarSet {
    let count = rng.gen_range(1..=4);
    let boxes = (0..count)
        .map(|_| (0..k).map(|_| random_dyadic(rng, 0.5, 12)).collect())
        .collect();
    StarSet { boxes }
}

/// Randomized `(H, H′, t ≤ t′)` trials with exact volumes.
pub fn gallagher_trials(k: usize, trials: usize, seed: u64) -> Result<GallagherSummary, QiError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GallagherSummary {
        trials,
        violations: 0,
        strict: 0,
    };
    for _ in 0..trials {
        let h = random_star(&mut rng, k);
        let h2 = random_star(&mut rng, k);
        let far: Vec<f64> = (0..k)
            .map(|_| {
                let v = random_dyadic(&mut rng, 0.5, 12);
                if rng.gen::<bool>() {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let near: Vec<f64> = far
            .iter()
            .map(|&v| {
                let s = rng.gen_range(0..=16) as f64 / 16.0;
                if rng.gen::<bool>() {
                    v * s
                } else {
                    -v * s
                }
            })
            .collect();
        let a = star_overlap(&h, &h2, &near)?;
        let b = star_overlap(&h, &h2, &far)?;
        if a < b {
            out.violations += 1;
        } else if a > b {
            out.strict += 1;
        }
    }
    Ok(out)
}

/// The error term `min(λ/n^k, λ′/n′^k) gcd^k (1 + (n^{τ−1−1/k} + n′^{τ−1−1/k}) nn′/gcd)^{k−1}`.
pub fn qi_error_term(k: usize, tau: f64, n: u64, n2: u64, lam: f64, lam2: f64) -> f64 {
    let kf = k as f64;
    let (nf, n2f) = (n as f64, n2 as f64);
    let g = n.gcd(&n2) as f64;
    let e = tau - 1.0 - 1.0 / kf;
    let lead = (lam / nf.powi(k as i32)).min(lam2 / n2f.powi(k as i32)) * g.powi(k as i32);
    lead * (1.0 + (nf.powf(e) + n2f.powf(e)) * nf * n2f / g).powi(k as i32 - 1)
}

/// Worst shift of one pair `(n, n′)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiPairRow {
    pub n: u64,
    pub n2: u64,
    pub gcd: u64,
    /// Exact `λ(A_n ∩ (A_{n′} + γ))` at the worst shift, as `p/q`.
    pub volume: String,
    pub volume_f64: f64,
    /// `λ(A_n) λ(A_{n′})`.
    pub main: f64,
    pub error_term: f64,
    /// `max(0, (volume − main)/error_term)`.
    pub constant: f64,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiBoundReport {
    pub k: usize,
    pub tau: f64,
    pub n_max: u64,
    pub shifts: usize,
    pub rows: Vec<QiPairRow>,
    pub global_constant: f64,
    /// Largest constant over pairs with `n ≤ n_max/2`.
    pub lower_constant: f64,
    /// Largest constant over pairs with `n > n_max/2`.
    pub upper_constant: f64,
}

/// Shifts of one pair: `0` followed by `count` random dyadic vectors.
fn pair_shifts(k: usize, count: usize, seed: u64, stream: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = vec![vec![0.0; k]];
    for _ in 0..count {
        out.push((0..k).map(|_| snap_dyadic(rng.gen::<f64>(), 40)).collect());
    }
    out
}

struct Prepared {
    boxes: Vec<Vec<BoxSpec>>,
    lambdas: Vec<BigRational>,
}

fn prepare(system: &AdmissibleSystem, n_max: u64) -> Result<Prepared, QiError> {
    if system.y.iter().any(|&v| v != 0.0) {
        return Err(QiError::NotHomogeneous);
    }
    let boxes: Vec<Vec<BoxSpec>> = (1..=n_max).map(|n| system.boxes(n)).collect();
    for b in &boxes {
        check_disjoint(b)?;
    }
    let lambdas = (1..=n_max).map(|n| system.lambda_exact(n)).collect();
    Ok(Prepared { boxes, lambdas })
}

/// Smallest constant making the set-level bound hold for all
/// `2 ≤ n′ ≤ n ≤ n_max` over `γ = 0` and `shifts` random dyadic shifts.
pub fn qi_bound_report(system: &AdmissibleSystem, n_max: u64, shifts: usize, seed: u64) -> Result<QiBoundReport, QiError> {
    let k = system.k;
    let prep = prepare(system, n_max)?;
    let pairs: Vec<(u64, u64)> = (2..=n_max).flat_map(|n| (2..=n).map(move |n2| (n, n2))).collect();
    let rows: Vec<Option<QiPairRow>> = pairs
        .par_iter()
        .map(|&(n, n2)| {
            let (a, b) = (&prep.boxes[n as usize - 1], &prep.boxes[n2 as usize - 1]);
            if a.is_empty() || b.is_empty() {
                return Ok(None);
            }
            let (la, lb) = (&prep.lambdas[n as usize - 1], &prep.lambdas[n2 as usize - 1]);
            let main = la * lb;
            let err = qi_error_term(k, system.tau, n, n2, la.to_f64().unwrap_or(0.0), lb.to_f64().unwrap_or(0.0));
            let mut best: Option<QiPairRow> = None;
            for gamma in pair_shifts(k, shifts, seed, n * 4096 + n2) {
                let vol = volume_unchecked(a, b, &gamma)?;
                let excess = (&vol - &main).to_f64().unwrap_or(f64::NAN);
                let c = (excess / err).max(0.0);
                if best.as_ref().is_none_or(|r| c > r.constant) {
                    best = Some(QiPairRow {
                        n,
                        n2,
                        gcd: n.gcd(&n2),
                        volume: vol.to_string(),
                        volume_f64: vol.to_f64().unwrap_or(f64::NAN),
                        main: main.to_f64().unwrap_or(f64::NAN),
                        error_term: err,
                        constant: c,
                        gamma,
                    });
                }
            }
            Ok(best)
        })
        .collect::<Result<_, QiError>>()?;
    let rows: Vec<QiPairRow> = rows.into_iter().flatten().collect();
    let max_over = |pred: &dyn Fn(&QiPairRow) -> bool| rows.iter().filter(|r| pred(r)).map(|r| r.constant).fold(0.0, f64::max);
    let half = n_max / 2;
    Ok(QiBoundReport {
        k,
        tau: system.tau,
        n_max,
        shifts,
        global_constant: max_over(&|_| true),
        lower_constant: max_over(&|r| r.n <= half),
        upper_constant: max_over(&|r| r.n > half),
        rows,
    })
}

/// Aggregate over all ordered pairs `n, n′ ≤ N` with one random shift each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiSumRow {
    pub horizon: u64,
    /// `Σ_{n,n′≤N} λ(A_n ∩ (A_{n′} + γ_{n,n′}))`.
    pub lhs: f64,
    /// `E = Σ_{n≤N} λ(A_n)`.
    pub e: f64,
    /// `(LHS − E²)/E`, evaluated exactly before rounding.
    pub ratio: f64,
}

/// Largest number of ordered pairs [`qi_sum_report`] will evaluate.
pub const PAIR_BUDGET: u64 = 1 << 20;

pub fn qi_sum_report(system: &AdmissibleSystem, checkpoints: &[u64], seed: u64) -> Result<Vec<QiSumRow>, QiError> {
    let k = system.k;
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    if top * top > PAIR_BUDGET {
        return Err(QiError::BudgetExceeded {
            pairs: top * top,
            budget: PAIR_BUDGET,
        });
    }
    let prep = prepare(system, top)?;
    // Contribution of each n: pairs (n, n′) and (n′, n) with n′ < n, plus (n, n).
    let per_n: Vec<BigRational> = (1..=top)
        .into_par_iter()
        .map(|n| {
            let a = &prep.boxes[n as usize - 1];
            let mut s = BigRational::zero();
            if a.is_empty() {
                return Ok(s);
            }
            for n2 in 1..=n {
                let b = &prep.boxes[n2 as usize - 1];
                if b.is_empty() {
                    continue;
                }
                let g1 = pair_shifts(k, 1, seed, n * 4096 + n2).pop().expect("one shift");
                s += volume_unchecked(a, b, &g1)?;
                if n2 != n {
                    let g2 = pair_shifts(k, 1, seed, n2 * 4096 + n).pop().expect("one shift");
                    s += volume_unchecked(b, a, &g2)?;
                }
            }
            Ok(s)
        })
        .collect::<Result<_, QiError>>()?;
    let mut lhs = BigRational::zero();
    let mut e = BigRational::zero();
    let mut out = Vec::new();
    for n in 1..=top {
        lhs += &per_n[n as usize - 1];
        e += &prep.lambdas[n as usize - 1];
        if checkpoints.contains(&n) {
            let ratio = if e.is_zero() {
                f64::NAN
            } else {
                ((&lhs - &e * &e) / &e).to_f64().unwrap_or(f64::NAN)
            };
            out.push(QiSumRow {
                horizon: n,
                lhs: lhs.to_f64().unwrap_or(f64::NAN),
                e: e.to_f64().unwrap_or(f64::NAN),
                ratio,
            });
        }
    }
    Ok(out)
}

/// `∫_0^1 φ_A(x) φ_B(x + γ) dx` for one axis of two windows, by quadrature
/// over the overlapping supports of nearby copies.
fn axis_functional(
    a: &BoxSpec,
    ba: &BumpFunction,
    b: &BoxSpec,
    bb: &BumpFunction,
    j: usize,
    gamma: f64,
) -> f64 {
    let g = a.n.gcd(&b.n);
    let cell = 1.0 / g as f64;
    let (da, db) = (a.d[j], b.d[j]);
    let (ra, rb) = (ba.radius() * da, bb.radius() * db);
    let rule = GaussLegendre::cached(24);
    let panels = 16;
    let mut total = 0.0;
    for ia in 0..a.n / g {
        let ca = (ia as f64 + a.y[j]) / a.n as f64;
        for ib in 0..b.n / g {
            let cb = (ib as f64 + b.y[j]) / b.n as f64 + gamma;
            let base = (cb - ca).rem_euclid(cell);
            for delta in [base - cell, base, base + cell] {
                let lo = (-ra).max(delta - rb);
                let hi = ra.min(delta + rb);
                if hi <= lo {
                    continue;
                }
                let h = (hi - lo) / panels as f64;
                for s in 0..panels {
                    let x0 = lo + h * s as f64;
                    total += rule.integrate(x0, x0 + h, |r| ba.eval(r / da) * bb.eval((r - delta) / db));
                }
            }
        }
    }
    total * g as f64
}

/// `λ(f_n f_{n′}(· + γ))` for two window sums.
pub fn functional_overlap(fa: &[WindowProduct], fb: &[WindowProduct], gamma: &[f64]) -> f64 {
    let mut total = 0.0;
    for wa in fa {
        for wb in fb {
            let mut v = 1.0;
            for j in 0..gamma.len() {
                v *= axis_functional(&wa.spec, &wa.bumps[j], &wb.spec, &wb.bumps[j], j, gamma[j]);
                if v == 0.0 {
                    break;
                }
            }
            total += v;
        }
    }
    total
}

/// The functional constant `C = sup_n (λ(A_n)/λ(f_n))²` over `n ≤ n_max`
/// for plateau windows with parameter `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConstant {
    pub p: f64,
    pub constant: f64,
    pub worst_n: u64,
}

pub fn functional_constant(system: &AdmissibleSystem, p: f64, n_max: u64) -> FunctionalConstant {
    let smooth = SmoothedSystem::new(system.clone(), Profile::plateau(p));
    let mut best = FunctionalConstant {
        p,
        constant: 1.0,
        worst_n: 0,
    };
    for n in 1..=n_max {
        let lf = smooth.lambda(n);
        if lf <= 0.0 {
            continue;
        }
        let c = (system.lambda(n) / lf).powi(2);
        if c > best.constant || best.worst_n == 0 {
            best.constant = c;
            best.worst_n = n;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ApproxFunction;

    fn fam(n: u64, w: f64) -> PeriodicIntervalFamily {
        PeriodicIntervalFamily::new(n, 0.0, vec![(-w, w)])
    }

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn fixed_point_roundtrip() {
        assert_eq!(frac_bits(0.75), 2);
        assert_eq!(frac_bits(3.0), 0);
        assert_eq!(to_fixed(0.75, 4), Some(12));
        assert_eq!(to_fixed(-0.5, 1), Some(-1));
        assert_eq!(to_fixed(0.3, 4), None);
    }

    #[test]
    fn axis_examples() {
        let a = fam(2, 0.05);
        assert_eq!(axis_intersection(&a, &a, 0.0).unwrap(), axis_intersection(&a, &a, 0.5).unwrap());
        // The A₂ family sits inside the A₄ family.
        let b = fam(4, 0.05);
        let v = axis_intersection(&a, &b, 0.0).unwrap();
        assert!((v.to_f64().unwrap() - 0.2).abs() < 1e-15);
        // Shift by half a period of B moves it off A.
        let small = fam(4, 1.0 / 64.0);
        assert!(axis_intersection(&small, &small, 1.0 / 8.0).unwrap().is_zero());
        assert_eq!(axis_intersection(&small, &small, 0.0).unwrap(), r(4 * 2, 64));
    }

    #[test]
    fn unfolding_counts_gcd_copies() {
        // Tiny intervals at the lattice points: overlaps are the coincident
        // centres, gcd(n, n′) of them on [0, 1).
        let w = 2f64.powi(-12);
        for (n, n2) in [(6u64, 4u64), (12, 8), (9, 6), (7, 5)] {
            let v = axis_intersection(&fam(n, w), &fam(n2, w), 0.0).unwrap();
            let g = n.gcd(&n2) as i64;
            assert_eq!(v, r(g, 1) * r(2, 4096));
        }
    }

    #[test]
    fn full_torus_and_symmetry() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(3.0), 0.4, 6, 2, vec![0.0; 2]).unwrap();
        let a = sys.boxes(21);
        let full = vec![BoxSpec::new(1, vec![0.5, 0.5], vec![IntervalType::Full; 2], vec![0.0; 2]).unwrap()];
        assert_eq!(intersection_volume(&a, &full, &[0.3125, 0.75]).unwrap(), sys.lambda_exact(21));
        let b = sys.boxes(12);
        let g = [0.1875, 0.640625];
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        assert_eq!(
            intersection_volume(&a, &b, &g).unwrap(),
            intersection_volume(&b, &a, &neg).unwrap()
        );
    }

    #[test]
    fn overlapping_union_rejected() {
        let b = BoxSpec::new(3, vec![0.0625, 0.0625], vec![IntervalType::Full; 2], vec![0.0; 2]).unwrap();
        let err = intersection_volume(&[b.clone(), b.clone()], &[b], &[0.0, 0.0]).unwrap_err();
        assert_eq!(err, QiError::Overlap(0, 1));
    }

    #[test]
    fn star_overlap_examples() {
        let h = StarSet::new(vec![vec![0.25, 0.0625], vec![0.0625, 0.25]]).unwrap();
        // Self-overlap at t = 0 is the area of the cross: 2·(1/2·1/8) − 1/8·1/8.
        assert_eq!(star_overlap(&h, &h, &[0.0, 0.0]).unwrap(), r(7, 64));
        assert!(gallagher_monotonicity_check(&h, &h, &[0.1, 0.0], &[0.1, 0.0]).unwrap());
        assert!(gallagher_monotonicity_check(&h, &h, &[0.0, 0.0], &[0.3, -0.2]).unwrap());
        assert_eq!(
            gallagher_monotonicity_check(&h, &h, &[0.3, 0.0], &[0.1, 0.0]),
            Err(QiError::NotOrdered(0))
        );
        assert!(StarSet::new(vec![vec![0.6, 0.1]]).is_err());
    }

    #[test]
    fn functional_below_setwise() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(3.0), 0.4, 5, 2, vec![0.0; 2]).unwrap();
        let smooth = SmoothedSystem::new(sys.clone(), Profile::Classic);
        for (n, n2) in [(9u64, 6u64), (16, 16), (13, 11)] {
            let g = [0.015625, 0.2890625];
            let f = functional_overlap(&smooth.windows(n), &smooth.windows(n2), &g);
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let set = intersection_volume(&sys.boxes(n), &sys.boxes(n2), &neg).unwrap().to_f64().unwrap();
            assert!(f <= set * (1.0 + 1e-12), "{n},{n2}: {f} > {set}");
        }
        // γ = 0 self-overlap equals λ(f_n²) from the spatial window integrals.
        let w = smooth.windows(16);
        let f = functional_overlap(&w, &w, &[0.0, 0.0]);
        assert!(f > 0.0 && f < smooth.lambda(16));
    }

    #[test]
    fn plateau_constant_decreases() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(4.0), 0.2, 6, 3, vec![0.0; 3]).unwrap();
        let cs: Vec<f64> = [0.5, 0.9, 0.99].iter().map(|&p| functional_constant(&sys, p, 63).constant).collect();
        assert!(cs[0] > cs[1] && cs[1] > cs[2] && cs[2] >= 1.0, "{cs:?}");
    }

    #[test]
    fn intersection_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(3.0), 0.4, 6, 2, vec![0.0; 2]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (n, n2) in [(21u64, 12u64), (21, 21), (30, 17), (40, 33)] {
            let (a, b) = (sys.boxes(n), sys.boxes(n2));
            let w = a.iter().flat_map(|bx| bx.d.iter().copied()).fold(f64::INFINITY, f64::min);
            let g = [snap_dyadic(w * rng.gen::<f64>(), 24), snap_dyadic(w * rng.gen::<f64>(), 24)];
            let exact = intersection_volume(&a, &b, &g).unwrap().to_f64().unwrap();
            assert!(exact > 0.0, "n = {n}, n′ = {n2}: empty intersection");
            let samples = 1_000_000;
            let hits = (0..samples)
                .filter(|_| {
                    let x: [f64; 2] = [rng.gen(), rng.gen()];
                    let shifted = [(x[0] - g[0]).rem_euclid(1.0), (x[1] - g[1]).rem_euclid(1.0)];
                    a.iter().any(|bx| bx.contains_raw(&x)) && b.iter().any(|bx| bx.contains_raw(&shifted))
                })
                .count();
            let p = hits as f64 / samples as f64;
            let se = (exact * (1.0 - exact) / samples as f64).sqrt().max(1e-9);
            assert!((p - exact).abs() < 4.0 * se, "n = {n}, n′ = {n2}: {p} vs {exact} (se {se:e})");
        }
    }
}
