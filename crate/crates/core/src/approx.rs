//! Approximation functions `ψ: ℕ → [0,1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("approximation function value {value} at n = {n} lies outside [0, 1)")]
    OutOfRange { n: u64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("function flagged monotone increases at n = {0}")]
    NotMonotone(u64),
}

/// The concrete family a [`ApproxFunction`] evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// `c · n^{−τ}`.
    PowerLaw { c: f64, tau: f64 },
    /// `1 / (n (log n)^a)` for `n ≥ 3`, zero below.
    LogPower { a: f64 },
    /// Explicit values for `n = 1, 2, …`; zero past the end.
    Table { values: Vec<f64> },
    /// `1 / (√n (log n)^k)` when `n ≥ 3` is a perfect square, zero otherwise.
    SquaresOnly { k: u32 },
    /// The constant function.
    Constant { value: f64 },
    /// `max{ψ(n), 1/(n (log n)^{k+1})}`.
    Floor { inner: Box<ApproxFunction>, k: u32 },
    /// `min{ψ(n), 1/(2n)}`.
    Cap { inner: Box<ApproxFunction> },
    /// `min{ψ(n) + n^{−e}, 1 − 2^{−53}}`.
    PlusPower { inner: Box<ApproxFunction>, exponent: f64 },
}

/// A named approximation function together with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxFunction {
    pub family: Family,
    #[serde(default)]
    pub monotone: bool,
    /// The `ε` in `ψ(n) ≪ n^{−ε}`, when known.
    #[serde(default)]
    pub decay_floor: Option<f64>,
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// `1/(n (log n)^{k+1})` for `n ≥ 3`, zero below.
pub fn psi_l(n: u64, k: u32) -> f64 {
    if n < 3 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 / (nf * nf.ln().powi(k as i32 + 1))
}

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).any(|s| s * s == n)
}

impl ApproxFunction {
    pub fn new(family: Family) -> Result<Self, ApproxError> {
        let monotone = match &family {
            Family::PowerLaw { c, tau } => {
                if !(0.0..1.0).contains(c) || !tau.is_finite() || *tau < 0.0 {
                    return Err(ApproxError::InvalidParameter(format!(
                        "power law needs c in [0,1) and tau >= 0, got c={c}, tau={tau}"
                    )));
                }
                true
            }
            Family::LogPower { a } => {
                if !a.is_finite() || *a < 0.0 {
                    return Err(ApproxError::InvalidParameter(format!(
                        "log power exponent must be >= 0, got {a}"
                    )));
                }
                false
            }
            Family::Table { values } => {
                for (i, v) in values.iter().enumerate() {
                    if !(0.0..1.0).contains(v) {
                        return Err(ApproxError::OutOfRange {
                            n: i as u64 + 1,
                            value: *v,
                        });
                    }
                }
                values.windows(2).all(|w| w[1] <= w[0])
            }
            Family::SquaresOnly { .. } => false,
            Family::Constant { value } => {
                if !(0.0..1.0).contains(value) {
                    return Err(ApproxError::OutOfRange { n: 1, value: *value });
                }
                true
            }
            Family::Floor { inner, .. } | Family::Cap { inner } => inner.monotone,
            Family::PlusPower { inner, exponent } => {
                if !exponent.is_finite() || *exponent <= 0.0 {
                    return Err(ApproxError::InvalidParameter(format!(
                        "power exponent must be positive, got {exponent}"
                    )));
                }
                inner.monotone
            }
        };
        Ok(Self {
            family,
            monotone,
            decay_floor: None,
        })
    }

    pub fn power_law(c: f64, tau: f64) -> Self {
        let mut f = Self::new(Family::PowerLaw { c, tau }).expect("valid power law");
        if tau > 0.0 && tau <= 1.0 {
            f.decay_floor = Some(tau);
        }
        f
    }

    pub fn log_power(a: f64) -> Self {
        let mut f = Self::new(Family::LogPower { a }).expect("valid log power");
        f.monotone = true;
        f.decay_floor = Some(1.0);
        f
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Family::Constant { value }).expect("constant in [0,1)")
    }

    pub fn table(values: Vec<f64>) -> Result<Self, ApproxError> {
        Self::new(Family::Table { values })
    }

    pub fn squares_only(k: u32) -> Self {
        let mut f = Self::new(Family::SquaresOnly { k }).expect("valid");
        f.decay_floor = Some(0.5);
        f
    }

    pub fn with_decay_floor(mut self, eps: f64) -> Result<Self, ApproxError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(ApproxError::InvalidParameter(format!(
                "decay floor must lie in (0, 1], got {eps}"
            )));
        }
        self.decay_floor = Some(eps);
        Ok(self)
    }

    pub fn eval(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        match &self.family {
            Family::PowerLaw { c, tau } => c * nf.powf(-tau),
            Family::LogPower { a } => {
                if n < 3 {
                    0.0
                } else {
                    1.0 / (nf * nf.ln().powf(*a))
                }
            }
            Family::Table { values } => values.get(n as usize - 1).copied().unwrap_or(0.0),
            Family::SquaresOnly { k } => {
                if n >= 3 && is_square(n) {
                    1.0 / (nf.sqrt() * nf.ln().powi(*k as i32))
                } else {
                    0.0
                }
            }
            Family::Constant { value } => *value,
            Family::Floor { inner, k } => inner.eval(n).max(psi_l(n, *k)).min(BELOW_ONE),
            Family::Cap { inner } => inner.eval(n).min(0.5 / nf),
            Family::PlusPower { inner, exponent } => {
                (inner.eval(n) + nf.powf(-exponent)).min(BELOW_ONE)
            }
        }
    }

    /// Checks `0 ≤ ψ(n) < 1` for `n ≤ upto` and, when flagged, monotonicity
    /// from `n = 3` on (the log families vanish below 3 by convention).
    pub fn validate(&self, upto: u64) -> Result<(), ApproxError> {
        let mut prev = f64::INFINITY;
        for n in 1..=upto {
            let v = self.eval(n);
            if !(0.0..1.0).contains(&v) {
                return Err(ApproxError::OutOfRange { n, value: v });
            }
            if self.monotone && n > 3 && v > prev {
                return Err(ApproxError::NotMonotone(n));
            }
            prev = v;
        }
        Ok(())
    }

    /// Partial sums of `ψ(n) (log n)^{k−1}` at the given checkpoints.
    pub fn gallagher_partial_sums(&self, k: u32, checkpoints: &[u64]) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut n = 1u64;
        for &cp in checkpoints {
            while n <= cp {
                acc += self.eval(n) * (n as f64).ln().powi(k as i32 - 1);
                n += 1;
            }
            out.push((cp, acc));
        }
        out
    }
}

/// `ψ̃ = max{ψ, ψ_L}` with `ψ_L(n) = 1/(n (log n)^{k+1})`.
pub fn psi_floor(psi: &ApproxFunction, k: u32) -> Result<ApproxFunction, ApproxError> {
    if k < 2 {
        return Err(ApproxError::InvalidParameter(format!(
            "floor needs k >= 2, got {k}"
        )));
    }
    let mut f = ApproxFunction::new(Family::Floor {
        inner: Box::new(psi.clone()),
        k,
    })?;
    f.decay_floor = psi.decay_floor;
    Ok(f)
}

/// `ψ_1 = min{ψ, 1/(2n)}`.
pub fn psi_cap(psi: &ApproxFunction) -> ApproxFunction {
    let mut f = ApproxFunction::new(Family::Cap {
        inner: Box::new(psi.clone()),
    })
    .expect("cap of a valid function is valid");
    f.decay_floor = Some(1.0);
    f
}

/// `ψ + n^{−e}`, used to keep `ψ` above a power floor.
pub fn psi_plus_power(psi: &ApproxFunction, exponent: f64) -> Result<ApproxFunction, ApproxError> {
    ApproxFunction::new(Family::PlusPower {
        inner: Box::new(psi.clone()),
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_stay_in_unit_interval() {
        for f in [
            ApproxFunction::power_law(0.5, 1.0),
            ApproxFunction::log_power(2.0),
            ApproxFunction::log_power(0.0),
            ApproxFunction::squares_only(3),
            psi_floor(&ApproxFunction::constant(0.0), 2).unwrap(),
        ] {
            f.validate(5000).unwrap();
        }
        assert!(ApproxFunction::new(Family::PowerLaw { c: 1.5, tau: 1.0 }).is_err());
        assert!(ApproxFunction::table(vec![0.2, 1.0]).is_err());
    }

    #[test]
    fn log_power_vanishes_below_three() {
        let f = ApproxFunction::log_power(4.0);
        assert_eq!(f.eval(1), 0.0);
        assert_eq!(f.eval(2), 0.0);
        assert!(f.eval(3) > 0.0);
    }

    #[test]
    fn squares_only_support() {
        let f = ApproxFunction::squares_only(2);
        assert_eq!(f.eval(1), 0.0);
        assert!(f.eval(4) > 0.0);
        assert_eq!(f.eval(5), 0.0);
        assert!(f.eval(10_000) > 0.0);
        assert!(!f.monotone);
    }

    #[test]
    fn floor_of_zero_is_psi_l() {
        let z = ApproxFunction::constant(0.0);
        let t = psi_floor(&z, 2).unwrap();
        for n in 2..500 {
            assert_eq!(t.eval(n), psi_l(n, 2));
        }
        assert!(psi_floor(&z, 1).is_err());
    }

    #[test]
    fn cap_of_one_over_n_halves_everywhere() {
        let f = ApproxFunction::table((1..=300).map(|n| 0.99 / n as f64).collect()).unwrap();
        let c = psi_cap(&f);
        for n in 1..=300u64 {
            assert_eq!(c.eval(n), 0.5 / n as f64);
        }
    }

    #[test]
    fn floor_crossover_for_inverse_square() {
        // Independent scan: ψ wins on a middle range, the floor wins after
        // the last index where n ≥ (log n)^4 fails.
        let psi = ApproxFunction::power_law(0.999_999, 2.0);
        let t = psi_floor(&psi, 3).unwrap();
        let psi_wins = |n: u64| {
            let nf = n as f64;
            n < 3 || 0.999_999 / (nf * nf) >= 1.0 / (nf * nf.ln().powi(4))
        };
        let last = (1..100_000u64).filter(|&n| psi_wins(n)).max().unwrap();
        assert!((5000..6000).contains(&last));
        for n in 1..100_000u64 {
            let want = if psi_wins(n) { psi.eval(n) } else { psi_l(n, 3) };
            assert_eq!(t.eval(n), want);
        }
    }
}
