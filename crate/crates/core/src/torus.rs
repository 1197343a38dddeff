//! Torus arithmetic and the multiplicative approximation sets `A_n^×(ψ, y)`.
//!
//! A point of `[0,1)^k` is approximated at level `n` when
//! `‖n x_1 − y_1‖ ⋯ ‖n x_k − y_k‖ < ψ(n)`, where `‖·‖` is the distance to
//! the nearest integer. Comparison is strict throughout.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::ApproxFunction;
use crate::precise::Precise;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("dimension mismatch: point has {point} coordinates, shift has {shift}")]
    DimensionMismatch { point: usize, shift: usize },
    #[error("dimension must be at least 1")]
    EmptyPoint,
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("horizon {0} is below the minimum {1}")]
    HorizonTooSmall(u64, u64),
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn nearest_int_dist(x: f64) -> Result<f64, TorusError> {
    if !x.is_finite() {
        return Err(TorusError::NonFinite(x));
    }
    Ok(dist_unchecked(x))
}

#[inline]
pub(crate) fn dist_unchecked(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// A point of the torus `[0,1)^k`, each coordinate reduced mod 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, TorusError> {
        if coords.is_empty() {
            return Err(TorusError::EmptyPoint);
        }
        let mut reduced = Vec::with_capacity(coords.len());
        for c in coords {
            if !c.is_finite() {
                return Err(TorusError::NonFinite(c));
            }
            let mut r = c - c.floor();
            // `c - floor(c)` can round up to exactly 1.0 for tiny negative c.
            if r >= 1.0 {
                r = 0.0;
            }
            reduced.push(r);
        }
        Ok(Self { coords: reduced })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Inhomogeneous shift `y ∈ ℝ^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub y: Vec<f64>,
}

impl Shift {
    pub fn new(y: Vec<f64>) -> Result<Self, TorusError> {
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(TorusError::NonFinite(*bad));
        }
        Ok(Self { y })
    }

    pub fn zero(k: usize) -> Self {
        Self { y: vec![0.0; k] }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn is_zero(&self) -> bool {
        self.y.iter().all(|v| *v == 0.0)
    }
}

fn check_dims(x: &TorusPoint, y: &Shift) -> Result<(), TorusError> {
    if x.dim() != y.dim() {
        return Err(TorusError::DimensionMismatch {
            point: x.dim(),
            shift: y.dim(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn mult_error_raw(x: &[f64], n: u64, y: &[f64]) -> f64 {
    let nf = n as f64;
    x.iter()
        .zip(y)
        .map(|(xj, yj)| dist_unchecked(nf * xj - yj))
        .product()
}

/// `∏_j ‖n x_j − y_j‖`, a value in `[0, 2^{−k}]`.
pub fn mult_error(x: &TorusPoint, n: u64, y: &Shift) -> Result<f64, TorusError> {
    check_dims(x, y)?;
    if n == 0 {
        return Err(TorusError::ZeroModulus);
    }
    Ok(mult_error_raw(x.coords(), n, &y.y))
}

/// Membership of `x` in `A_n^×(ψ, y)`.
pub fn in_a_times(
    x: &TorusPoint,
    n: u64,
    psi: &ApproxFunction,
    y: &Shift,
) -> Result<bool, TorusError> {
    let err = mult_error(x, n, y)?;
    Ok(err < psi.eval(n))
}

/// Membership decided in double precision, except within `band` of the
/// threshold where the high-precision oracle is consulted.
pub fn in_a_times_adjudicated(
    x: &[Precise],
    n: u64,
    psi: &ApproxFunction,
    y: &[Precise],
    band: f64,
) -> bool {
    let approx: Vec<f64> = x.iter().map(Precise::to_f64).collect();
    let shift: Vec<f64> = y.iter().map(Precise::to_f64).collect();
    let threshold = psi.eval(n);
    let fast = mult_error_raw(&approx, n, &shift);
    if (fast - threshold).abs() > band {
        return fast < threshold;
    }
    crate::precise::membership(x, n, y, threshold)
        .expect("precision exhausted while adjudicating a near-threshold point")
}

/// All `n ≤ horizon` with `x ∈ A_n^×(ψ, y)`, in increasing order.
pub fn solution_count(
    x: &TorusPoint,
    psi: &ApproxFunction,
    y: &Shift,
    horizon: u64,
) -> Result<Vec<u64>, TorusError> {
    check_dims(x, y)?;
    if horizon < 1 {
        return Err(TorusError::HorizonTooSmall(horizon, 1));
    }
    const CHUNK: u64 = 1 << 14;
    let chunks: Vec<(u64, u64)> = (0..horizon.div_ceil(CHUNK))
        .map(|c| (c * CHUNK + 1, ((c + 1) * CHUNK).min(horizon)))
        .collect();
    let hits: Vec<Vec<u64>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            (lo..=hi)
                .filter(|&n| mult_error_raw(x.coords(), n, &y.y) < psi.eval(n))
                .collect()
        })
        .collect();
    Ok(hits.into_iter().flatten().collect())
}

/// Same scan as [`solution_count`] with every index decided by the
/// high-precision oracle.
pub fn solution_count_precise(
    x: &[Precise],
    psi: &ApproxFunction,
    y: &[Precise],
    horizon: u64,
) -> Vec<u64> {
    (1..=horizon)
        .filter(|&n| {
            crate::precise::membership(x, n, y, psi.eval(n))
                .expect("precision exhausted in exhaustive scan")
        })
        .collect()
}

/// `min_{3 ≤ n ≤ N} n (log n)^2 ‖n x_1‖ ‖n x_2‖`.
pub fn liminf_statistic(x: (f64, f64), horizon: u64) -> Result<f64, TorusError> {
    if horizon < 3 {
        return Err(TorusError::HorizonTooSmall(horizon, 3));
    }
    for v in [x.0, x.1] {
        if !v.is_finite() {
            return Err(TorusError::NonFinite(v));
        }
    }
    let mut best = f64::INFINITY;
    for n in 3..=horizon {
        let nf = n as f64;
        let l = nf.ln();
        let v = nf * l * l * dist_unchecked(nf * x.0) * dist_unchecked(nf * x.1);
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// Running values of [`liminf_statistic`] at each checkpoint (ascending).
pub fn liminf_trace(x: (f64, f64), checkpoints: &[u64]) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut best = f64::INFINITY;
    let mut n = 3u64;
    for &cp in checkpoints {
        while n <= cp {
            let nf = n as f64;
            let l = nf.ln();
            let v = nf * l * l * dist_unchecked(nf * x.0) * dist_unchecked(nf * x.1);
            best = best.min(v);
            n += 1;
        }
        out.push((cp, best));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_int_examples() {
        assert!((nearest_int_dist(2.7).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(nearest_int_dist(0.5).unwrap(), 0.5);
        assert!((nearest_int_dist(-0.4).unwrap() - 0.4).abs() < 1e-15);
        assert!(nearest_int_dist(f64::NAN).is_err());
        assert!(nearest_int_dist(f64::INFINITY).is_err());
    }

    #[test]
    fn mult_error_examples() {
        let y = Shift::zero(2);
        let x = TorusPoint::new(vec![1.0 / 3.0, 0.25]).unwrap();
        assert_eq!(mult_error(&x, 4, &y).unwrap(), 0.0);
        let x = TorusPoint::new(vec![0.1, 0.2]).unwrap();
        assert!((mult_error(&x, 1, &y).unwrap() - 0.02).abs() < 1e-15);
        let bad = Shift::zero(3);
        assert!(matches!(
            mult_error(&x, 1, &bad),
            Err(TorusError::DimensionMismatch { .. })
        ));
        assert_eq!(mult_error(&x, 0, &y), Err(TorusError::ZeroModulus));
    }

    #[test]
    fn membership_examples() {
        let y = Shift::zero(2);
        let psi = ApproxFunction::constant(0.05);
        let x = TorusPoint::new(vec![1.0 / 3.0, 0.12]).unwrap();
        assert!(in_a_times(&x, 3, &psi, &y).unwrap());
        let zero = ApproxFunction::constant(0.0);
        assert!(!in_a_times(&x, 3, &zero, &y).unwrap());
        let psi = ApproxFunction::constant(0.01);
        let x = TorusPoint::new(vec![0.26, 0.49]).unwrap();
        assert!(in_a_times(&x, 2, &psi, &y).unwrap());
    }

    #[test]
    fn reduction_into_unit_interval() {
        let p = TorusPoint::new(vec![-0.25, 3.5, -1e-20]).unwrap();
        assert_eq!(p.coords()[0], 0.75);
        assert_eq!(p.coords()[1], 0.5);
        assert!(p.coords()[2] < 1.0);
    }

    #[test]
    fn zero_coordinate_hits_every_supported_index() {
        let psi = ApproxFunction::log_power(2.0);
        let x = TorusPoint::new(vec![0.0, 0.3719, 0.11]).unwrap();
        let hits = solution_count(&x, &psi, &Shift::zero(3), 200).unwrap();
        let expected: Vec<u64> = (1..=200).filter(|&n| psi.eval(n) > 0.0).collect();
        assert_eq!(hits, expected);
        let none = solution_count(&x, &ApproxFunction::constant(0.0), &Shift::zero(3), 200);
        assert!(none.unwrap().is_empty());
    }

    #[test]
    fn liminf_is_running_minimum() {
        let x = (2f64.sqrt(), 3f64.sqrt());
        let trace = liminf_trace(x, &[10, 100, 1000, 10_000]);
        for w in trace.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        assert_eq!(liminf_statistic(x, 1000).unwrap(), trace[2].1);
        assert_eq!(liminf_statistic((0.0, 0.7), 50).unwrap(), 0.0);
        assert!(liminf_statistic(x, 2).is_err());
    }
}
