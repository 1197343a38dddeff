use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Measure, MeasureError};

/// Least-squares decay exponent of `|μ̂|` along rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Radii `R` at which each octave maximum was attained.
    pub frequencies: Vec<f64>,
    /// Per-octave maxima of `|μ̂(Rω)|` over the directions.
    pub magnitudes: Vec<f64>,
    /// `−slope` of `log |μ̂|` against `log R`.
    pub sigma: f64,
    /// Two standard errors of the fitted slope.
    pub band: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

impl DecayFit {
    /// Largest per-octave value of `|μ̂|·R^target`.
    pub fn normalized_max(&self, target: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.magnitudes)
            .map(|(r, m)| m * r.powf(target))
            .fold(0.0, f64::max)
    }

    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.sigma - target).abs() <= tol
    }
}

/// Unit vectors within `half_angle` of `±e_k`, uniformly in angle.
pub fn cone_directions(k: usize, half_angle: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let th = rng.gen_range(0.0..half_angle);
            let mut w: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            w.iter_mut().for_each(|v| *v *= th.sin() / n);
            w.push(th.cos());
            w
        })
        .collect()
}

/// Fits `σ` from per-octave maxima of `|μ̂(Rω)|` over `R ∈ [r_lo, r_lo·2^octaves]`,
/// sampling `per_octave` geometrically spaced radii in each octave.
pub fn decay_fit<M: Measure + ?Sized>(
    measure: &M,
    directions: &[Vec<f64>],
    r_lo: f64,
    octaves: usize,
    per_octave: usize,
) -> Result<DecayFit, MeasureError> {
    if octaves < 3 {
        return Err(MeasureError::InsufficientRange {
            needed: 3,
            got: octaves,
        });
    }
    if directions.is_empty() || per_octave == 0 {
        return Err(MeasureError::InvalidParameter("no sample rays".into()));
    }
    for d in directions {
        if d.len() != measure.dim() {
            return Err(MeasureError::DimensionMismatch {
                expected: measure.dim(),
                got: d.len(),
            });
        }
    }
    let mut frequencies = Vec::with_capacity(octaves);
    let mut magnitudes = Vec::with_capacity(octaves);
    for o in 0..octaves {
        let jobs: Vec<(f64, &Vec<f64>)> = (0..per_octave)
            .flat_map(|s| {
                let r = r_lo * 2f64.powf(o as f64 + s as f64 / per_octave as f64);
                directions.iter().map(move |d| (r, d))
            })
            .collect();
        let vals: Vec<(f64, f64)> = jobs
            .par_iter()
            .map(|(r, d)| {
                let xi: Vec<f64> = d.iter().map(|v| v * r).collect();
                measure.fourier(&xi).map(|z| (*r, z.norm()))
            })
            .collect::<Result<_, _>>()?;
        let (r, m) = vals
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty octave");
        frequencies.push(r);
        magnitudes.push(m);
    }
    let xs: Vec<f64> = frequencies.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = magnitudes.iter().map(|m| m.max(1e-300).ln()).collect();
    let (slope, intercept, se) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(DecayFit {
        frequencies,
        magnitudes,
        sigma: -slope,
        band: 2.0 * se,
        residual,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = if xs.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Lebesgue;

    #[test]
    fn exact_power_law_is_recovered() {
        let (s, i, se) = least_squares(&[0.0, 1.0, 2.0, 3.0], &[1.0, -1.0, -3.0, -5.0]);
        assert!((s + 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && se < 1e-12);
    }

    #[test]
    fn too_few_octaves_rejected() {
        let m = Lebesgue { k: 2 };
        let e = decay_fit(&m, &[vec![1.0, 0.0]], 4.0, 2, 4).unwrap_err();
        assert_eq!(e, MeasureError::InsufficientRange { needed: 3, got: 2 });
    }

    #[test]
    fn lebesgue_on_generic_ray_decays_like_product() {
        // Along (1, 1)/√2 the transform is a product of two 1/R factors.
        let m = Lebesgue { k: 2 };
        let d = vec![std::f64::consts::FRAC_1_SQRT_2; 2];
        let fit = decay_fit(&m, &[d], 8.3, 4, 16).unwrap();
        assert!((fit.sigma - 2.0).abs() < 0.15, "{fit:?}");
    }
}
