//! Diophantine exponent estimators and exhaustive counting oracles for the
//! frequency sums: `N♭(u,v)`, the pair counts `N(m,m′,u,u′,v;i,i′)` with their
//! parallel/independent split, the gcd lattice, and gcd sums.

mod counts;
mod exponents;

pub use counts::{
    count_flat, count_flat_by_box, count_pairs, count_pairs_by_x, is_parallel, pair_candidates, tube_constant,
    CountParams, CountRow, FlatCount, FlatQuery, PairCount, Tube, DEFAULT_BUDGET,
};
pub use exponents::{
    continued_fraction, continued_fraction_of_interval, convergent_property_holds, liouville_records,
    omega_fit, omega_from_convergents, ContinuedFraction, ExponentEstimate, ExponentKind, Record,
};

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::AdmissibleSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("enclosure too wide to certify partial quotient {depth}")]
    PrecisionExhausted { depth: usize },
    #[error("search horizon {0} is below the minimum of 100")]
    HorizonTooSmall(u64),
    #[error("enumeration needs {needed:.3e} candidates, over the budget {budget:.3e}")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Overlap pattern of `(1/n′)ℤ^k` reduced modulo `(1/n)ℤ^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdLattice {
    /// The spacing `gcd(n,n′)/(nn′)` as a reduced fraction `(num, den)`.
    pub spacing: (u64, u64),
    pub multiplicity: u64,
}

pub fn gcd_lattice(n: u64, n2: u64, k: u32) -> GcdLattice {
    assert!(n >= 1 && n2 >= 1, "moduli must be positive");
    let g = n.gcd(&n2);
    let (num, den) = (g, n * n2);
    let r = num.gcd(&den);
    GcdLattice {
        spacing: (num / r, den / r),
        multiplicity: g.pow(k),
    }
}

/// Buckets the `(n′)^k` points `a/n′` modulo `1/n` and reads off the
/// spacing and the common multiplicity; `None` if the buckets are uneven or
/// do not form a lattice.
pub fn gcd_lattice_enumerated(n: u64, n2: u64, k: u32) -> Option<GcdLattice> {
    // Scale by L = lcm(n, n′): a/n′ ↦ a·L/n′, reduced mod L/n.
    let l = n.lcm(&n2);
    let step = l / n2;
    let period = l / n;
    let mut buckets: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut a = vec![0u64; k as usize];
    loop {
        let key: Vec<u64> = a.iter().map(|&v| (v * step) % period).collect();
        *buckets.entry(key).or_insert(0) += 1;
        let mut pos = 0;
        while pos < a.len() {
            a[pos] += 1;
            if a[pos] < n2 {
                break;
            }
            a[pos] = 0;
            pos += 1;
        }
        if pos == a.len() {
            break;
        }
    }
    let mult = *buckets.values().next()?;
    if buckets.values().any(|&c| c != mult) {
        return None;
    }
    // Smallest positive coordinate among occupied residues is the spacing.
    let unit = buckets
        .keys()
        .flat_map(|key| key.iter().copied())
        .filter(|&v| v > 0)
        .min()
        .unwrap_or(period);
    let per_axis = period / unit;
    if buckets.len() as u64 != per_axis.pow(k) || buckets.keys().any(|key| key.iter().any(|v| v % unit != 0)) {
        return None;
    }
    // Spacing unit/L in the original coordinates.
    let r = unit.gcd(&l);
    Some(GcdLattice {
        spacing: (unit / r, l / r),
        multiplicity: mult,
    })
}

/// The gcd sums of the aggregate quasi-independence bound at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct GcdSums {
    pub horizon: u64,
    /// `S₂ = Σ_{n′ ≤ n ≤ N} (λ(A_n)/n^k) gcd(n,n′)^k`, exact.
    pub s2: BigRational,
    /// `S₃ = Σ_{n′ ≤ n ≤ N} (λ(A_n)/n^k) gcd^k ((n′)^{τ−1−1/k} nn′/gcd)^{k−1}`.
    pub s3: f64,
    /// `E = Σ_{n ≤ N} λ(A_n)`, exact.
    pub e: BigRational,
}

impl GcdSums {
    pub fn ratio2(&self) -> Option<f64> {
        (!self.e.is_zero()).then(|| (&self.s2 / &self.e).to_f64().unwrap_or(f64::NAN))
    }

    pub fn ratio3(&self) -> Option<f64> {
        let e = self.e.to_f64()?;
        (e > 0.0).then(|| self.s3 / e)
    }
}

/// `Σ_{n′ ≤ n} gcd(n, n′)^k`.
fn gcd_power_sum(n: u64, k: u32) -> u128 {
    (1..=n).map(|n2| (n.gcd(&n2) as u128).pow(k)).sum()
}

/// Gcd sums at each checkpoint, accumulated in a single pass over `n`.
pub fn gcd_sum_check(system: &AdmissibleSystem, checkpoints: &[u64]) -> Vec<GcdSums> {
    let k = system.k as u32;
    let kf = k as f64;
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let expo = (system.tau - 1.0 - 1.0 / kf) * (kf - 1.0);
    let mut s2 = BigRational::zero();
    let mut e = BigRational::zero();
    let mut s3 = 0.0;
    let mut out = Vec::new();
    for n in 1..=top {
        let lam = system.lambda_exact(n);
        if !lam.is_zero() {
            let nk = BigInt::from(n).pow(k);
            s2 += &lam * BigRational::from_integer(BigInt::from(gcd_power_sum(n, k))) / BigRational::from_integer(nk);
            e += &lam;
            let lam_f = lam.to_f64().unwrap_or(0.0);
            let nf = n as f64;
            let mut inner = 0.0;
            for n2 in 1..=n {
                let g = n.gcd(&n2) as f64;
                let n2f = n2 as f64;
                inner += g.powi(k as i32) * (n2f.powf(expo)) * (nf * n2f / g).powi(k as i32 - 1);
            }
            s3 += lam_f / nf.powi(k as i32) * inner;
        }
        if checkpoints.contains(&n) {
            out.push(GcdSums {
                horizon: n,
                s2: s2.clone(),
                s3,
                e: e.clone(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ApproxFunction;

    #[test]
    fn gcd_lattice_examples() {
        for k in 1..=3 {
            let g = gcd_lattice(6, 4, k);
            assert_eq!(g.spacing, (1, 12));
            assert_eq!(g.multiplicity, 2u64.pow(k));
            assert_eq!(gcd_lattice_enumerated(6, 4, k), Some(g));
        }
        assert_eq!(gcd_lattice(7, 5, 2), GcdLattice { spacing: (1, 35), multiplicity: 1 });
        assert_eq!(gcd_lattice(9, 9, 2), GcdLattice { spacing: (1, 9), multiplicity: 81 });
        assert_eq!(gcd_lattice_enumerated(9, 9, 2), Some(gcd_lattice(9, 9, 2)));
    }

    #[test]
    fn gcd_power_sum_matches_divisor_form() {
        // Σ_{n′≤n} gcd(n,n′)^k = Σ_{d | n} d^k φ(n/d).
        let phi = |m: u64| (1..=m).filter(|&a| a.gcd(&m) == 1).count() as u128;
        for n in 1..40u64 {
            let div: u128 = (1..=n).filter(|d| n % d == 0).map(|d| (d as u128).pow(3) * phi(n / d)).sum();
            assert_eq!(gcd_power_sum(n, 3), div);
        }
    }

    #[test]
    fn gcd_sums_first_horizon() {
        let sys = AdmissibleSystem::new(&ApproxFunction::log_power(4.0), 0.2, 8, 3, vec![0.0; 3]).unwrap();
        let sums = gcd_sum_check(&sys, &[1, 64, 128]);
        assert_eq!(sums[0].s2, sys.lambda_exact(1));
        // Σ_{s | n} s^{−(k−1)} ≤ ζ(2) bounds S₂/E at k = 3.
        for s in &sums[1..] {
            let r = s.ratio2().unwrap();
            assert!((1.0..=std::f64::consts::PI.powi(2) / 6.0).contains(&r), "{r}");
        }
    }
}
