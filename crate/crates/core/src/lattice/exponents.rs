//! Continued fractions and record-based estimators of the Diophantine
//! exponents `ω`, `ω*` and `ω×`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::LatticeError;
use crate::precise::Precise;

/// Partial quotients with exact convergents `p_i/q_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    pub convergents: Vec<(BigInt, BigInt)>,
}

/// Expansion of a real number known only through the enclosure `alpha`.
///
/// Both endpoints are expanded in lockstep; a quotient is accepted only when
/// they agree, so every returned term is certain.
pub fn continued_fraction(alpha: &Precise, depth: usize) -> Result<ContinuedFraction, LatticeError> {
    let (lo, hi) = alpha.bounds();
    continued_fraction_of_interval(lo, hi, depth)
}

pub fn continued_fraction_of_interval(
    mut lo: BigRational,
    mut hi: BigRational,
    depth: usize,
) -> Result<ContinuedFraction, LatticeError> {
    let mut quotients = Vec::with_capacity(depth);
    let mut convergents = Vec::with_capacity(depth);
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    for i in 0..depth {
        let a_lo = lo.floor().to_integer();
        let a_hi = hi.floor().to_integer();
        if a_lo != a_hi {
            return Err(LatticeError::PrecisionExhausted { depth: i });
        }
        let a = a_lo;
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        quotients.push(a.clone());
        convergents.push((p.clone(), q.clone()));
        let a_rat = BigRational::from_integer(a);
        let f_lo = &lo - &a_rat;
        let f_hi = &hi - &a_rat;
        if f_lo.is_zero() && f_hi.is_zero() {
            break;
        }
        if f_lo.is_zero() || f_hi.is_zero() {
            return Err(LatticeError::PrecisionExhausted { depth: i + 1 });
        }
        // Reciprocation reverses the order of the endpoints.
        lo = f_hi.recip();
        hi = f_lo.recip();
    }
    Ok(ContinuedFraction {
        quotients,
        convergents,
    })
}

/// `max(|lo − p/q|, |hi − p/q|) < 1/q²` over the enclosure.
pub fn convergent_property_holds(alpha: &Precise, p: &BigInt, q: &BigInt) -> bool {
    let (lo, hi) = alpha.bounds();
    let r = BigRational::new(p.clone(), q.clone());
    let bound = BigRational::new(BigInt::one(), q * q);
    (lo - &r).abs() < bound && (hi - &r).abs() < bound
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    /// `max_j ‖q x_j‖ < q^{−w}`.
    Simultaneous,
    /// `‖n·x‖ < ‖n‖_∞^{−w}` over `n ∈ ℤ^k`.
    Dual,
    /// `∏_j ‖q x_j‖ < q^{−w}`.
    Multiplicative,
}

impl ExponentKind {
    /// Dirichlet's exponent for `k` coordinates.
    pub fn trivial_bound(self, k: usize) -> f64 {
        match self {
            ExponentKind::Simultaneous => 1.0 / k as f64,
            ExponentKind::Dual => k as f64,
            ExponentKind::Multiplicative => 1.0,
        }
    }
}

/// A new best approximation: error smaller than at every smaller size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub label: String,
    /// Natural logarithm of the size `q` or `‖n‖_∞`.
    pub log_size: f64,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub kind: ExponentKind,
    pub records: Vec<Record>,
    /// Max quality over records in the tail `[√Q, Q]`; `+∞` on exact hits.
    pub exponent: f64,
    /// Natural logarithm of the search horizon.
    pub log_horizon: f64,
    /// An exact hit (rational relation) was found.
    pub exact_hit: bool,
    /// Dropping the last decade changes the tail maximum by less than 0.05.
    pub stable: bool,
}

impl ExponentEstimate {
    fn from_records(kind: ExponentKind, records: Vec<Record>, log_horizon: f64, exact_hit: bool) -> Self {
        if exact_hit {
            return Self {
                kind,
                records,
                exponent: f64::INFINITY,
                log_horizon,
                exact_hit,
                stable: true,
            };
        }
        let tail_start = 0.5 * log_horizon;
        let last_decade = log_horizon - std::f64::consts::LN_10;
        let tail_max = |upto: f64| {
            records
                .iter()
                .filter(|r| r.log_size >= tail_start && r.log_size <= upto)
                .map(|r| r.quality)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let exponent = tail_max(log_horizon);
        let earlier = tail_max(last_decade);
        let stable = exponent.is_finite() && earlier.is_finite() && (exponent - earlier).abs() < 0.05;
        Self {
            kind,
            records,
            exponent,
            log_horizon,
            exact_hit,
            stable,
        }
    }
}

/// Errors this close to zero count as exact hits.
fn is_exact(err: f64, scale: f64) -> bool {
    err <= 8.0 * f64::EPSILON * scale.max(1.0)
}

fn dist(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Records of the chosen exponent up to the horizon `q ≤ Q` (or `‖n‖_∞ ≤ Q`).
pub fn omega_fit(kind: ExponentKind, x: &[f64], horizon: u64) -> Result<ExponentEstimate, LatticeError> {
    if horizon < 100 {
        return Err(LatticeError::HorizonTooSmall(horizon));
    }
    if x.is_empty() {
        return Err(LatticeError::InvalidInput("empty point".into()));
    }
    let log_h = (horizon as f64).ln();
    match kind {
        ExponentKind::Simultaneous | ExponentKind::Multiplicative => {
            let mut best = f64::INFINITY;
            let mut records = Vec::new();
            for q in 2..=horizon {
                let qf = q as f64;
                let errs = x.iter().map(|&v| dist(qf * v));
                let err = match kind {
                    ExponentKind::Simultaneous => errs.fold(0.0, f64::max),
                    _ => errs.product(),
                };
                let scale = x.iter().fold(qf, |a, v| a.max(qf * v.abs()));
                if err == 0.0 || is_exact(err, scale) {
                    records.push(Record {
                        label: format!("q={q}"),
                        log_size: qf.ln(),
                        quality: f64::INFINITY,
                    });
                    return Ok(ExponentEstimate::from_records(kind, records, log_h, true));
                }
                if err < best {
                    best = err;
                    records.push(Record {
                        label: format!("q={q}"),
                        log_size: qf.ln(),
                        quality: -err.ln() / qf.ln(),
                    });
                }
            }
            Ok(ExponentEstimate::from_records(kind, records, log_h, false))
        }
        ExponentKind::Dual => dual_records(x, horizon, log_h),
    }
}

/// Best approximations of the linear form `n·x`, shell by shell in `‖n‖_∞`.
fn dual_records(x: &[f64], horizon: u64, log_h: f64) -> Result<ExponentEstimate, LatticeError> {
    let k = x.len();
    let h = horizon as i64;
    let mut best = f64::INFINITY;
    let mut records = Vec::new();
    for s in 1..=h {
        let mut shell_best = f64::INFINITY;
        let mut shell_arg: Vec<i64> = Vec::new();
        let mut n = vec![-s; k];
        // Enumerate the shell ‖n‖_∞ = s up to the sign n ~ −n.
        loop {
            let on_shell = n.iter().any(|v| v.abs() == s);
            let canonical = n.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0);
            if on_shell && canonical {
                let form: f64 = n.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
                let err = dist(form);
                let scale = n.iter().zip(x).map(|(&a, &b)| (a as f64 * b).abs()).sum::<f64>();
                if err == 0.0 || is_exact(err, scale) {
                    records.push(Record {
                        label: format!("n={n:?}"),
                        log_size: (s as f64).ln(),
                        quality: f64::INFINITY,
                    });
                    return Ok(ExponentEstimate::from_records(ExponentKind::Dual, records, log_h, true));
                }
                if err < shell_best {
                    shell_best = err;
                    shell_arg = n.clone();
                }
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    break;
                }
                n[pos] += 1;
                if n[pos] <= s {
                    break;
                }
                n[pos] = -s;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
        if shell_best < best && s >= 2 {
            best = shell_best;
            records.push(Record {
                label: format!("n={shell_arg:?}"),
                log_size: (s as f64).ln(),
                quality: -shell_best.ln() / (s as f64).ln(),
            });
        } else if shell_best < best {
            best = shell_best;
        }
    }
    Ok(ExponentEstimate::from_records(ExponentKind::Dual, records, log_h, false))
}

fn log_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("finite below 2^1000").abs().ln();
    }
    let shift = bits - 60;
    let top: BigInt = v.abs() >> shift;
    top.to_f64().expect("60-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

fn log_rational(r: &BigRational) -> f64 {
    log_big(r.numer()) - log_big(r.denom())
}

/// Simultaneous exponent of a one-dimensional `α` from its continued
/// fraction: the records are the convergents, with
/// `‖q_i α‖ = |q_i α − p_i|` evaluated on the enclosure.
pub fn omega_from_convergents(alpha: &Precise, depth: usize) -> Result<ExponentEstimate, LatticeError> {
    let cf = continued_fraction(alpha, depth)?;
    let (lo, hi) = alpha.bounds();
    let mut records = Vec::new();
    let mut log_h: f64 = 0.0;
    for (p, q) in cf.convergents.iter() {
        if q <= &BigInt::one() {
            continue;
        }
        let qr = BigRational::from_integer(q.clone());
        let pr = BigRational::from_integer(p.clone());
        let e_lo = (&qr * &lo - &pr).abs();
        let e_hi = (&qr * &hi - &pr).abs();
        if e_lo.is_zero() && e_hi.is_zero() {
            records.push(Record {
                label: format!("q={q}"),
                log_size: log_big(q),
                quality: f64::INFINITY,
            });
            return Ok(ExponentEstimate::from_records(
                ExponentKind::Simultaneous,
                records,
                log_big(q),
                true,
            ));
        }
        // The enclosure must be much tighter than the error itself.
        let width = (&hi - &lo) * &qr;
        if width * BigRational::from_integer(BigInt::from(1000)) > e_lo.clone().min(e_hi.clone()) {
            return Err(LatticeError::PrecisionExhausted { depth: records.len() });
        }
        let err = e_lo.max(e_hi);
        let log_q = log_big(q);
        log_h = log_h.max(log_q);
        records.push(Record {
            label: format!("q={q}"),
            log_size: log_q,
            quality: -log_rational(&err) / log_q,
        });
    }
    Ok(ExponentEstimate::from_records(ExponentKind::Simultaneous, records, log_h, false))
}

/// `Σ_{j ≥ 1} 2^{−j!}`: the records are the truncations
/// `p_J/q_J = Σ_{j ≤ J} 2^{−j!}` with `q_J = 2^{J!}`, and
/// `‖q_J α‖ = Σ_{j > J} 2^{J! − j!}`, summed exactly until the remainder is
/// negligible.
pub fn liouville_records(terms: u32) -> ExponentEstimate {
    let fact = |j: u32| -> u64 { (1..=j as u64).product() };
    let mut records = Vec::new();
    let mut log_h: f64 = 0.0;
    for big_j in 2..=terms {
        let fj = fact(big_j);
        // Two further terms bound the tail to relative precision 2^{−(J+2)!+(J+1)!}.
        let mut err = BigRational::zero();
        for j in big_j + 1..=big_j + 2 {
            let e = fact(j) - fj;
            err += BigRational::new(BigInt::one(), BigInt::one() << e);
        }
        let log_q = fj as f64 * std::f64::consts::LN_2;
        log_h = log_h.max(log_q);
        records.push(Record {
            label: format!("q=2^{fj}"),
            log_size: log_q,
            quality: -log_rational(&err) / log_q,
        });
    }
    ExponentEstimate::from_records(ExponentKind::Simultaneous, records, log_h, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precise::PreciseConfig;

    fn golden() -> Precise {
        let cfg = PreciseConfig::default();
        Precise::sqrt_int(5, cfg)
            .add(&Precise::from_int(1, cfg))
            .mul(&Precise::from_ratio(1, 2, cfg))
    }

    #[test]
    fn golden_and_sqrt2_expansions() {
        let g = continued_fraction(&golden(), 40).unwrap();
        assert!(g.quotients.iter().all(|a| a == &BigInt::one()));
        let r2 = continued_fraction(&Precise::sqrt_int(2, PreciseConfig::default()), 30).unwrap();
        assert_eq!(r2.quotients[0], BigInt::one());
        assert!(r2.quotients[1..].iter().all(|a| a == &BigInt::from(2)));
        for (p, q) in &g.convergents[1..] {
            assert!(convergent_property_holds(&golden(), p, q));
        }
        // Consecutive Fibonacci numbers.
        assert_eq!(g.convergents[10], (BigInt::from(144), BigInt::from(89)));
    }

    #[test]
    fn precision_exhaustion_is_signalled() {
        let low = Precise::sqrt_int(2, PreciseConfig { digits: 5 });
        assert!(matches!(
            continued_fraction(&low, 200),
            Err(LatticeError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn rational_expansion_terminates() {
        let cf = continued_fraction_of_interval(
            BigRational::new(BigInt::from(355), BigInt::from(113)),
            BigRational::new(BigInt::from(355), BigInt::from(113)),
            10,
        )
        .unwrap();
        assert_eq!(cf.quotients, vec![3, 7, 16].into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn golden_exponent_from_convergents() {
        let est = omega_from_convergents(&golden(), 40).unwrap();
        assert!((est.exponent - 1.0).abs() < 0.1, "{est:?}");
        let mut last = f64::INFINITY;
        for r in &est.records[3..] {
            assert!(r.quality < last);
            last = r.quality;
        }
    }

    #[test]
    fn rationals_are_flagged() {
        let est = omega_fit(ExponentKind::Simultaneous, &[0.375], 200).unwrap();
        assert!(est.exact_hit && est.exponent.is_infinite());
        let est = omega_fit(ExponentKind::Dual, &[0.5, 0.25], 100).unwrap();
        assert!(est.exact_hit);
        assert!(omega_fit(ExponentKind::Dual, &[0.5], 50).is_err());
    }

    #[test]
    fn liouville_qualities_grow() {
        let est = liouville_records(7);
        for (j, r) in est.records.iter().enumerate() {
            let big_j = j as f64 + 2.0;
            assert!((r.quality - big_j).abs() < 0.1, "{r:?}");
        }
        assert!(est.exponent > 5.0);
    }

    #[test]
    fn fits_reach_the_trivial_bounds() {
        let x = [2f64.sqrt(), 3f64.sqrt()];
        for kind in [ExponentKind::Simultaneous, ExponentKind::Multiplicative] {
            let est = omega_fit(kind, &x, 5000).unwrap();
            assert!(est.exponent >= kind.trivial_bound(2) - 0.1, "{est:?}");
        }
    }
}
