//! Lebesgue volumes of hyperbolic regions.

use thiserror::Error;

use crate::approx::ApproxFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolumeError {
    #[error("negative or non-finite radius {0}")]
    BadRadius(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// `λ{x ∈ [0,1]^k : x_1 ⋯ x_k ≤ ρ}`.
///
/// For `ρ ∈ (0,1)` this is `ρ Σ_{s<k} (−log ρ)^s / s!`; it is `1` for
/// `ρ ≥ 1` and `0` at `ρ = 0`.
pub fn hyperbolic_volume(k: usize, rho: f64) -> Result<f64, VolumeError> {
    if k == 0 {
        return Err(VolumeError::ZeroDimension);
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(VolumeError::BadRadius(rho));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if rho >= 1.0 {
        return Ok(1.0);
    }
    let l = -rho.ln();
    let mut term = 1.0;
    let mut sum = 1.0;
    for s in 1..k {
        term *= l / s as f64;
        sum += term;
    }
    Ok((rho * sum).min(1.0))
}

/// `λ(A_n^×(ψ, y)) = hyperbolic_volume(k, 2^k ψ(n))`, independent of `n`
/// beyond `ψ(n)` and of the shift.
pub fn lambda_a_times(k: usize, n: u64, psi: &ApproxFunction) -> Result<f64, VolumeError> {
    let rho = psi.eval(n) * 2f64.powi(k as i32);
    hyperbolic_volume(k, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_values() {
        assert_eq!(hyperbolic_volume(1, 0.37).unwrap(), 0.37);
        assert!((hyperbolic_volume(2, 0.1).unwrap() - 0.330259).abs() < 1e-6);
        assert!((hyperbolic_volume(3, 0.01).unwrap() - 0.162090).abs() < 1e-6);
        assert_eq!(hyperbolic_volume(4, 0.0).unwrap(), 0.0);
        assert_eq!(hyperbolic_volume(4, 1.0).unwrap(), 1.0);
        assert!(hyperbolic_volume(2, -0.1).is_err());
    }

    #[test]
    fn lambda_examples() {
        let psi = ApproxFunction::constant(0.05);
        assert!((lambda_a_times(2, 7, &psi).unwrap() - 0.521888).abs() < 1e-6);
        assert_eq!(lambda_a_times(3, 7, &ApproxFunction::constant(0.2)).unwrap(), 1.0);
        assert_eq!(lambda_a_times(3, 7, &ApproxFunction::constant(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn continuous_at_one() {
        let below = hyperbolic_volume(3, 1.0 - 1e-12).unwrap();
        assert!((below - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agreement_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (k, rho) = (3usize, 0.05);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| (0..k).map(|_| rng.gen::<f64>()).product::<f64>() <= rho)
            .count();
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - hyperbolic_volume(k, rho).unwrap()).abs() < 4.0 * se);
    }
}
