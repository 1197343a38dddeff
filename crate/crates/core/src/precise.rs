//! Fixed-point binary interval arithmetic used to adjudicate membership near
//! the threshold, where double precision cancellation makes `‖n x‖` unreliable.
//!
//! A [`Precise`] stores a midpoint and a radius, both as integers scaled by
//! `2^bits`. Every operation widens the radius enough to contain the exact
//! result, so comparisons that succeed are certain.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Working precision, expressed in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreciseConfig {
    pub digits: u32,
}

impl Default for PreciseConfig {
    fn default() -> Self {
        Self { digits: 50 }
    }
}

impl PreciseConfig {
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32
    }
}

/// An enclosure `[mid − rad, mid + rad] / 2^bits` of a real number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precise {
    mid: BigInt,
    rad: BigInt,
    bits: u32,
}

fn shr_round(v: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return v.clone();
    }
    let half = BigInt::one() << (s - 1);
    let r: BigInt = (v + &half) >> s;
    r
}

impl Precise {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn from_int(v: i64, cfg: PreciseConfig) -> Self {
        let bits = cfg.bits();
        Self {
            mid: BigInt::from(v) << bits,
            rad: BigInt::zero(),
            bits,
        }
    }

    /// `p / q` rounded to the working precision.
    pub fn from_ratio(p: i64, q: i64, cfg: PreciseConfig) -> Self {
        assert!(q != 0, "zero denominator");
        let bits = cfg.bits();
        let num = BigInt::from(p) << bits;
        let den = BigInt::from(q);
        let exact = (&num % &den).is_zero();
        Self {
            mid: num / den,
            rad: if exact { BigInt::zero() } else { BigInt::one() },
            bits,
        }
    }

    /// `√a` for a non-negative integer `a`.
    pub fn sqrt_int(a: u64, cfg: PreciseConfig) -> Self {
        let bits = cfg.bits();
        let scaled = BigInt::from(a) << (2 * bits);
        let root = scaled.sqrt();
        let exact = &root * &root == scaled;
        Self {
            mid: root,
            rad: if exact { BigInt::zero() } else { BigInt::one() },
            bits,
        }
    }

    /// The exact value of a double, rounded only if it has more than
    /// `bits` fractional binary digits.
    pub fn from_f64(x: f64, cfg: PreciseConfig) -> Self {
        Self::from_f64_bits(x, cfg.bits())
    }

    fn from_f64_bits(x: f64, bits: u32) -> Self {
        assert!(x.is_finite(), "non-finite input");
        if x == 0.0 {
            return Self {
                mid: BigInt::zero(),
                rad: BigInt::zero(),
                bits,
            };
        }
        let raw = x.abs().to_bits();
        let exp = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let mut m = BigInt::from(mant);
        let shift = e + bits as i64;
        let mut rad = BigInt::zero();
        if shift >= 0 {
            m <<= shift as usize;
        } else {
            let s = (-shift) as u32;
            let exact = (&m & ((BigInt::one() << s) - 1u32)).is_zero();
            m = shr_round(&m, s);
            if !exact {
                rad = BigInt::one();
            }
        }
        if x < 0.0 {
            m = -m;
        }
        Self { mid: m, rad, bits }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.bits, other.bits, "precision mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        Self {
            mid: &self.mid + &other.mid,
            rad: &self.rad + &other.rad,
            bits: self.bits,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        Self {
            mid: &self.mid - &other.mid,
            rad: &self.rad + &other.rad,
            bits: self.bits,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            mid: -&self.mid,
            rad: self.rad.clone(),
            bits: self.bits,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let mid = &self.mid * &other.mid;
        let rad = self.mid.abs() * &other.rad + other.mid.abs() * &self.rad + &self.rad * &other.rad;
        let s = self.bits;
        Self {
            mid: shr_round(&mid, s),
            rad: (rad >> s) + 2u32,
            bits: s,
        }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        let f = BigInt::from(n);
        Self {
            mid: &self.mid * &f,
            rad: &self.rad * f.abs(),
            bits: self.bits,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let v = self.mid.to_f64().unwrap_or(f64::NAN);
        v * 2f64.powi(-(self.bits as i32))
    }

    /// Lower and upper endpoints as exact rationals.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        let den = BigInt::one() << self.bits;
        (
            BigRational::new(&self.mid - &self.rad, den.clone()),
            BigRational::new(&self.mid + &self.rad, den),
        )
    }

    /// Enclosure of the radius in units of `2^{-bits}`.
    pub fn radius_ulps(&self) -> &BigInt {
        &self.rad
    }

    /// Enclosure of `‖x‖`, or `None` when the interval straddles a
    /// half-integer and the nearest integer is ambiguous.
    pub fn nearest_int_dist(&self) -> Option<Self> {
        let one = BigInt::one() << self.bits;
        let half = BigInt::one() << (self.bits - 1);
        let nearest = (&self.mid + &half).div_floor(&one) * &one;
        let lo = &self.mid - &self.rad - &nearest;
        let hi = &self.mid + &self.rad - &nearest;
        if lo < -half.clone() || hi >= half {
            return None;
        }
        let (dlo, dhi) = if lo.sign() != Sign::Minus {
            (lo, hi)
        } else if hi.sign() != Sign::Plus {
            (-hi, -lo)
        } else {
            (BigInt::zero(), lo.abs().max(hi))
        };
        Some(Self {
            mid: (&dlo + &dhi) >> 1,
            rad: ((&dhi - &dlo) >> 1) + 1u32,
            bits: self.bits,
        })
    }

    /// Certain comparison with an exact double; `None` when undecided.
    pub fn lt_f64(&self, t: f64) -> Option<bool> {
        let tp = Self::from_f64_bits(t, self.bits);
        if &self.mid + &self.rad < &tp.mid - &tp.rad {
            Some(true)
        } else if &self.mid - &self.rad >= &tp.mid + &tp.rad {
            Some(false)
        } else {
            None
        }
    }

    /// Decimal rendering of the midpoint with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let v = shr_round(&(self.mid.abs() * &scale), self.bits);
        let s = format!("{:0>width$}", v.to_string(), width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.mid.sign() == Sign::Minus { "-" } else { "" };
        format!("{sign}{int}.{frac}")
    }
}

/// Enclosure of `∏_j ‖n x_j − y_j‖`, or `None` if precision is insufficient.
pub fn mult_error(x: &[Precise], n: u64, y: &[Precise]) -> Option<Precise> {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    let mut acc: Option<Precise> = None;
    for (xj, yj) in x.iter().zip(y) {
        let d = xj.mul_int(n as i64).sub(yj).nearest_int_dist()?;
        acc = Some(match acc {
            None => d,
            Some(a) => a.mul(&d),
        });
    }
    acc
}

/// Certain decision of `∏_j ‖n x_j − y_j‖ < threshold`.
pub fn membership(x: &[Precise], n: u64, y: &[Precise], threshold: f64) -> Option<bool> {
    mult_error(x, n, y)?.lt_f64(threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PreciseConfig {
        PreciseConfig::default()
    }

    #[test]
    fn sqrt_two_digits() {
        let r = Precise::sqrt_int(2, cfg());
        assert_eq!(
            r.to_decimal(40),
            "1.4142135623730950488016887242096980785697"
        );
    }

    #[test]
    fn f64_round_trip_is_exact() {
        for v in [0.1, -3.75, 1e-30, 123456.789, 0.0] {
            let p = Precise::from_f64(v, cfg());
            assert_eq!(p.to_f64(), v);
        }
    }

    #[test]
    fn mult_error_of_quadratic_point() {
        // Reference value from an independent 60-digit evaluation.
        let c = cfg();
        let one = Precise::from_int(1, c);
        let x = [
            Precise::sqrt_int(2, c).sub(&one),
            Precise::sqrt_int(3, c).sub(&one),
        ];
        let y = [Precise::from_int(0, c), Precise::from_int(0, c)];
        let v = mult_error(&x, 5, &y).unwrap();
        assert_eq!(
            v.to_decimal(30),
            "0.024145002120530014604512674495"
        );
    }

    #[test]
    fn membership_example_near_threshold() {
        let c = cfg();
        let x = [Precise::from_ratio(26, 100, c), Precise::from_ratio(49, 100, c)];
        let y = [Precise::from_int(0, c), Precise::from_int(0, c)];
        assert_eq!(membership(&x, 2, &y, 0.01), Some(true));
        assert_eq!(membership(&x, 2, &y, 0.009), Some(false));
    }

    #[test]
    fn ambiguous_half_integer_is_reported() {
        let c = PreciseConfig { digits: 1 };
        let mut p = Precise::from_ratio(1, 2, c);
        p.rad = BigInt::from(4);
        assert!(p.nearest_int_dist().is_none());
    }
}
