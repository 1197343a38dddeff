//! First and second moments of a smoothed system under a measure.
//!
//! All `μ`-statistics at a given `N` come from one [`SampleSet`], so the
//! algebraic identity linking the pair sum, the variance and the two
//! expectations holds exactly at the empirical level.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::approx::ApproxFunction;
use crate::decomposition::{AdmissibleSystem, IntervalType};
use crate::fourier::{SmoothedSystem, WindowProduct, WindowTable};
use crate::measures::{Measure, MeasureError, SurfacePatch};
use crate::torus::mult_error_raw;
use crate::volume::lambda_a_times;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("statistics come from different sample sets ({0:016x} vs {1:016x})")]
    MismatchedSamples(u64, u64),
    #[error("horizon {n} exceeds the window table horizon {horizon}")]
    BeyondHorizon { n: u64, horizon: u64 },
    #[error("sum of μ(f_n) over the range is zero")]
    ZeroMass,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Points drawn once from a measure and reused for every statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub fingerprint: u64,
}

impl SampleSet {
    pub fn draw<M: Measure + ?Sized>(measure: &M, count: usize, seed: u64) -> Result<Self, MeasureError> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let points = measure.sample(&mut rng, count)?;
        Ok(Self::from_points(points, seed))
    }

    pub fn from_points(points: Vec<Vec<f64>>, seed: u64) -> Self {
        let mut h = Sha256::new();
        for p in &points {
            for v in p {
                h.update(v.to_le_bytes());
            }
        }
        let digest = h.finalize();
        let fingerprint = u64::from_le_bytes(digest[..8].try_into().expect("eight bytes"));
        Self {
            points,
            seed,
            fingerprint,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A sample mean with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub value: f64,
    pub se: f64,
    pub fingerprint: u64,
}

/// Pairwise summation, used for every reduction so results do not depend on
/// thread scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_se(v: &[f64], fingerprint: u64) -> Stat {
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    let dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
    Stat {
        value: mean,
        se: (var / n).sqrt(),
        fingerprint,
    }
}

/// `Σ_{n≤N} f(n, x)` at every checkpoint `N`, one row per sample.
fn partial_sums<F>(f: F, samples: &SampleSet, checkpoints: &[u64]) -> Vec<Vec<f64>>
where
    F: Fn(u64, &[f64]) -> f64 + Sync,
{
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let mut order: Vec<(usize, u64)> = checkpoints.iter().copied().enumerate().collect();
    order.sort_by_key(|p| p.1);
    samples
        .points
        .par_iter()
        .map(|x| {
            let mut acc = 0.0;
            let mut next = 0;
            let mut vals = vec![0.0; checkpoints.len()];
            for n in 1..=top {
                acc += f(n, x);
                while next < order.len() && order[next].1 == n {
                    vals[order[next].0] = acc;
                    next += 1;
                }
            }
            while next < order.len() {
                vals[order[next].0] = acc;
                next += 1;
            }
            vals
        })
        .collect()
}

fn assemble(rows: &[Vec<f64>], e_lambda: &[f64], samples: &SampleSet, checkpoints: &[u64]) -> Vec<MomentReport> {
    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let el = e_lambda[c];
            let s: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let dev: Vec<f64> = s.iter().map(|v| (v - el).powi(2)).collect();
            let sq: Vec<f64> = s.iter().map(|v| v * v).collect();
            MomentReport {
                n,
                e_lambda: el,
                e_mu: mean_se(&s, samples.fingerprint),
                v_mu: mean_se(&dev, samples.fingerprint),
                pair_mu: mean_se(&sq, samples.fingerprint),
                samples: samples.len(),
            }
        })
        .collect()
}

/// `E_N(λ) = Σ_{n≤N} λ(f_n)` from the zero coefficients.
pub fn expectation_lambda(table: &WindowTable, n_max: u64) -> Result<f64, MomentError> {
    check_horizon(table, n_max)?;
    let v: Vec<f64> = (1..=n_max).map(|n| table.lambda(n)).collect();
    Ok(pairwise_sum(&v))
}

/// `E_N(λ)` by spatial quadrature of every window.
pub fn expectation_lambda_spatial(system: &SmoothedSystem, n_max: u64) -> f64 {
    let v: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(|n| system.lambda_spatial(n))
        .collect();
    pairwise_sum(&v)
}

fn check_horizon(table: &WindowTable, n: u64) -> Result<(), MomentError> {
    if n > table.horizon() {
        return Err(MomentError::BeyondHorizon {
            n,
            horizon: table.horizon(),
        });
    }
    Ok(())
}

/// `E_N(μ)` estimated on the sample set.
pub fn expectation(table: &WindowTable, samples: &SampleSet, n_max: u64) -> Result<Stat, MomentError> {
    Ok(moment_report(table, samples, n_max)?.e_mu)
}

/// `V_N(μ)` estimated on the sample set.
pub fn variance(table: &WindowTable, samples: &SampleSet, n_max: u64) -> Result<Stat, MomentError> {
    Ok(moment_report(table, samples, n_max)?.v_mu)
}

/// `Σ_{m,n≤N} μ(f_m f_n)` estimated on the sample set.
pub fn pair_sum(table: &WindowTable, samples: &SampleSet, n_max: u64) -> Result<Stat, MomentError> {
    Ok(moment_report(table, samples, n_max)?.pair_mu)
}

/// Moments at one horizon `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: u64,
    pub e_lambda: f64,
    pub e_mu: Stat,
    pub v_mu: Stat,
    pub pair_mu: Stat,
    pub samples: usize,
}

pub fn moment_report(table: &WindowTable, samples: &SampleSet, n_max: u64) -> Result<MomentReport, MomentError> {
    Ok(moment_reports(table, samples, &[n_max])?.remove(0))
}

/// Reports at several horizons from a single pass over the samples.
pub fn moment_reports(
    table: &WindowTable,
    samples: &SampleSet,
    checkpoints: &[u64],
) -> Result<Vec<MomentReport>, MomentError> {
    if samples.is_empty() {
        return Err(MomentError::InvalidRange("empty sample set".into()));
    }
    for &n in checkpoints {
        check_horizon(table, n)?;
    }
    let rows = partial_sums(|n, x| table.eval(n, x), samples, checkpoints);
    let e_lambda = checkpoints
        .iter()
        .map(|&n| expectation_lambda(table, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(&rows, &e_lambda, samples, checkpoints))
}

/// Moments of the raw indicator sums `Σ_{n≤N} 1_{A_n^×(ψ, y)}`, with
/// `E_N(λ)` from the closed-form volume.
pub fn raw_moment_reports(
    psi: &ApproxFunction,
    y: &[f64],
    samples: &SampleSet,
    checkpoints: &[u64],
) -> Result<Vec<MomentReport>, MomentError> {
    if samples.is_empty() {
        return Err(MomentError::InvalidRange("empty sample set".into()));
    }
    let k = y.len();
    if let Some(p) = samples.points.iter().find(|p| p.len() != k) {
        return Err(MomentError::InvalidRange(format!("sample of dimension {} for k = {k}", p.len())));
    }
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let thresholds: Vec<f64> = (1..=top).map(|n| psi.eval(n)).collect();
    let lam: Vec<f64> = (1..=top)
        .map(|n| lambda_a_times(k, n, psi).map_err(|e| MomentError::InvalidRange(e.to_string())))
        .collect::<Result<_, _>>()?;
    let rows = partial_sums(
        |n, x| f64::from(u8::from(mult_error_raw(x, n, y) < thresholds[(n - 1) as usize])),
        samples,
        checkpoints,
    );
    let e_lambda: Vec<f64> = checkpoints.iter().map(|&n| pairwise_sum(&lam[..n as usize])).collect();
    Ok(assemble(&rows, &e_lambda, samples, checkpoints))
}

/// `|pair − (V − E_λ² + 2 E_μ E_λ)| / max(1, pair)`.
pub fn second_moment_identity(report: &MomentReport) -> Result<f64, MomentError> {
    second_moment_identity_parts(report.e_lambda, &report.e_mu, &report.v_mu, &report.pair_mu)
}

pub fn second_moment_identity_parts(
    e_lambda: f64,
    e_mu: &Stat,
    v_mu: &Stat,
    pair: &Stat,
) -> Result<f64, MomentError> {
    for s in [v_mu, pair] {
        if s.fingerprint != e_mu.fingerprint {
            return Err(MomentError::MismatchedSamples(e_mu.fingerprint, s.fingerprint));
        }
    }
    let rhs = v_mu.value - e_lambda * e_lambda + 2.0 * e_mu.value * e_lambda;
    Ok((pair.value - rhs).abs() / pair.value.abs().max(1.0))
}

/// `V_N(λ) = Σ_{ξ≠0} |Σ_{n≤N} f̂_n(ξ)|²` truncated to `|ξ|_∞ ≤ cutoff`.
pub fn variance_lambda_fourier(system: &SmoothedSystem, n_max: u64, cutoff: i64) -> f64 {
    let k = system.k();
    let windows: Vec<WindowProduct> = (1..=n_max).flat_map(|n| system.windows(n)).collect();
    let side = (2 * cutoff + 1) as usize;
    let total = side.pow(k as u32);
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut xi = vec![0i64; k];
            for v in xi.iter_mut() {
                *v = (idx % side) as i64 - cutoff;
                idx /= side;
            }
            if xi.iter().all(|v| *v == 0) {
                return 0.0;
            }
            let f: Complex64 = windows.iter().map(|w| w.coefficient(&xi)).sum();
            f.norm_sqr()
        })
        .collect();
    pairwise_sum(&terms)
}

/// Output of the divergence Borel–Cantelli bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbcBound {
    pub c: f64,
    pub ratio: f64,
    pub bound: f64,
}

/// `(1/C)·(Σ_{X<n≤Y} μ(f_n) / Σ_{n≤Y} μ(f_n))²`, where `mu_f[n−1] = μ(f_n)`.
///
/// When `c` is `None` the constant is the empirical
/// `Σ_{m,n≤Y} μ(f_m f_n) / (Σ_{n≤Y} μ(f_n))²`, read from `pair_sum_y`.
pub fn dbc_lower_bound(
    mu_f: &[f64],
    pair_sum_y: Option<f64>,
    c: Option<f64>,
    x: usize,
    y: usize,
) -> Result<DbcBound, MomentError> {
    if x >= y || y > mu_f.len() {
        return Err(MomentError::InvalidRange(format!(
            "need X < Y ≤ {}, got X = {x}, Y = {y}",
            mu_f.len()
        )));
    }
    let total = pairwise_sum(&mu_f[..y]);
    let tail = pairwise_sum(&mu_f[x..y]);
    if total <= 0.0 || tail <= 0.0 {
        return Err(MomentError::ZeroMass);
    }
    let c = match (c, pair_sum_y) {
        (Some(c), _) => c,
        (None, Some(p)) => p / (total * total),
        (None, None) => {
            return Err(MomentError::InvalidRange(
                "either a constant or a pair sum is required".into(),
            ))
        }
    };
    if !(c > 0.0) {
        return Err(MomentError::InvalidRange(format!("C = {c}")));
    }
    let ratio = tail / total;
    Ok(DbcBound {
        c,
        ratio,
        bound: ratio * ratio / c,
    })
}

/// ETP ratios and VTP excesses along dyadic horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferenceVerdict {
    pub ns: Vec<u64>,
    pub etp_ratio: Vec<f64>,
    pub etp_se: Vec<f64>,
    pub vtp_excess: Vec<f64>,
    pub vtp_se: Vec<f64>,
}

/// Builds the verdict from `μ` samples and Lebesgue samples; every horizon
/// must be a power of two.
pub fn transference_report(
    table: &WindowTable,
    mu_samples: &SampleSet,
    lambda_samples: &SampleSet,
    ns: &[u64],
) -> Result<TransferenceVerdict, MomentError> {
    if let Some(n) = ns.iter().find(|n| !n.is_power_of_two()) {
        return Err(MomentError::InvalidRange(format!("{n} is not a power of two")));
    }
    let mu = moment_reports(table, mu_samples, ns)?;
    let lam = moment_reports(table, lambda_samples, ns)?;
    Ok(verdict(ns, &mu, &lam))
}

/// [`transference_report`] for the raw sets `A_n^×(ψ, y)`.
pub fn raw_transference_report(
    psi: &ApproxFunction,
    y: &[f64],
    mu_samples: &SampleSet,
    lambda_samples: &SampleSet,
    ns: &[u64],
) -> Result<TransferenceVerdict, MomentError> {
    let mu = raw_moment_reports(psi, y, mu_samples, ns)?;
    let lam = raw_moment_reports(psi, y, lambda_samples, ns)?;
    Ok(verdict(ns, &mu, &lam))
}

fn verdict(ns: &[u64], mu: &[MomentReport], lam: &[MomentReport]) -> TransferenceVerdict {
    let mut v = TransferenceVerdict {
        ns: ns.to_vec(),
        etp_ratio: vec![],
        etp_se: vec![],
        vtp_excess: vec![],
        vtp_se: vec![],
    };
    for (m, l) in mu.iter().zip(lam) {
        let e2 = m.e_mu.value * m.e_mu.value;
        v.etp_ratio.push(m.e_mu.value / m.e_lambda);
        v.etp_se.push(m.e_mu.se / m.e_lambda);
        v.vtp_excess.push((m.v_mu.value - l.v_mu.value) / e2);
        v.vtp_se.push((m.v_mu.se.powi(2) + l.v_mu.se.powi(2)).sqrt() / e2);
    }
    v
}

/// The window `A_n^*(d)` of the row whose axes are all of full type.
pub fn reference_window(system: &SmoothedSystem, n: u64) -> Option<WindowProduct> {
    let block = system.base.block_of(n)?;
    let row = block
        .rows
        .iter()
        .find(|r| r.types.iter().all(|t| *t == IntervalType::Full))
        .or_else(|| block.rows.first())?;
    Some(WindowProduct::new(row.box_spec(n, &system.base.y), system.profile))
}

/// `(d₁⋯d_k)^{−(1−σ/k)} / n^k`.
pub fn etp_envelope(window: &WindowProduct, sigma: f64) -> f64 {
    let k = window.dim() as f64;
    let prod: f64 = window.spec.d.iter().product();
    prod.powf(-(1.0 - sigma / k)) / (window.spec.n as f64).powf(k)
}

/// One row of an envelope fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub n: u64,
    pub mu: f64,
    pub lambda: f64,
    pub ratio: f64,
    pub envelope: f64,
}

impl EnvelopeRow {
    /// `|ratio − 1| / envelope`.
    pub fn scaled(&self) -> f64 {
        (self.ratio - 1.0).abs() / self.envelope
    }
}

/// Fitted constant on one set of `n` and its check on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub rows: Vec<EnvelopeRow>,
    pub fit_ns: Vec<u64>,
    pub c: f64,
    pub worst_verify: f64,
}

impl EnvelopeFit {
    pub fn holds(&self) -> bool {
        self.worst_verify <= self.c
    }
}

/// `μ(A_n^*)/λ(A_n^*)` on a curved patch for each `n`; the constant is the
/// largest scaled deviation over `fit_ns` and is then checked on the rest.
pub fn curved_etp_envelope(
    system: &SmoothedSystem,
    patch: &SurfacePatch,
    ns: &[u64],
    fit_ns: &[u64],
    sigma: f64,
    order: usize,
) -> EnvelopeFit {
    let rows: Vec<EnvelopeRow> = ns
        .iter()
        .filter_map(|&n| reference_window(system, n).map(|w| (n, w)))
        .map(|(n, w)| {
            let mu = patch.window_mass(&w, order);
            let lambda = w.volume();
            EnvelopeRow {
                n,
                mu,
                lambda,
                ratio: mu / lambda,
                envelope: etp_envelope(&w, sigma),
            }
        })
        .collect();
    summarize(rows, fit_ns)
}

fn summarize(rows: Vec<EnvelopeRow>, fit_ns: &[u64]) -> EnvelopeFit {
    let c = rows
        .iter()
        .filter(|r| fit_ns.contains(&r.n))
        .map(EnvelopeRow::scaled)
        .fold(0.0, f64::max);
    let worst_verify = rows
        .iter()
        .filter(|r| !fit_ns.contains(&r.n))
        .map(EnvelopeRow::scaled)
        .fold(0.0, f64::max);
    EnvelopeFit {
        rows,
        fit_ns: fit_ns.to_vec(),
        c,
        worst_verify,
    }
}

/// `μ(A^*)` by the truncated pairing `Σ_t Â^*(nt) μ̂(−nt)` over
/// `|t_j| ≤ radius/(n d_j)`.
pub fn pairing_mass<M: Measure + ?Sized>(
    window: &WindowProduct,
    measure: &M,
    radius: f64,
) -> Result<f64, MeasureError> {
    let n = window.spec.n as i64;
    let bounds: Vec<i64> = window
        .spec
        .d
        .iter()
        .map(|d| (radius / (n as f64 * d)).ceil() as i64)
        .collect();
    let sides: Vec<usize> = bounds.iter().map(|b| (2 * b + 1) as usize).collect();
    let factors: Vec<Vec<Complex64>> = bounds
        .iter()
        .enumerate()
        .map(|(j, &b)| window.axis_coefficients(j, b))
        .collect();
    let total: usize = sides.iter().product();
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut xi = Vec::with_capacity(bounds.len());
            let mut coef = Complex64::new(1.0, 0.0);
            for ((b, s), f) in bounds.iter().zip(&sides).zip(&factors) {
                let i = idx % s;
                coef *= f[i];
                xi.push(-(((i as i64) - b) * n) as f64);
                idx /= s;
            }
            Ok((coef * measure.fourier(&xi)?).re)
        })
        .collect::<Result<_, MeasureError>>()?;
    Ok(pairwise_sum(&terms))
}

/// Ratios `μ(A_n^*)/λ(A_n^*)` on a flat measure via the Fourier pairing.
pub fn flat_etp_ratios<M: Measure + ?Sized>(
    system: &SmoothedSystem,
    measure: &M,
    ns: &[u64],
    radius: f64,
) -> Result<Vec<EnvelopeRow>, MeasureError> {
    let k = system.k() as f64;
    ns.iter()
        .filter_map(|&n| reference_window(system, n).map(|w| (n, w)))
        .map(|(n, w)| {
            let mu = pairing_mass(&w, measure, radius)?;
            let lambda = w.volume();
            Ok(EnvelopeRow {
                n,
                mu,
                lambda,
                ratio: mu / lambda,
                envelope: (n as f64).powf(1.0 - k),
            })
        })
        .collect()
}

/// The smoothed system of an admissible system, as used throughout.
pub fn smoothed(base: AdmissibleSystem, profile: crate::bump::Profile) -> SmoothedSystem {
    SmoothedSystem::new(base, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ApproxFunction;
    use crate::bump::Profile;
    use crate::measures::Lebesgue;

    fn system(k: usize, m_max: u32) -> SmoothedSystem {
        let psi = ApproxFunction::log_power(2.0);
        let base = AdmissibleSystem::new(&psi, 0.5 / k as f64, m_max, k, vec![0.0; k]).unwrap();
        SmoothedSystem::new(base, Profile::Classic)
    }

    #[test]
    fn lambda_expectation_is_exact_sum() {
        let s = system(2, 5);
        let t = WindowTable::new(&s, 31);
        let e = expectation_lambda(&t, 31).unwrap();
        let direct: f64 = (1..=31).map(|n| s.lambda(n)).sum();
        assert!((e - direct).abs() < 1e-15 * direct.max(1.0));
        let spatial = expectation_lambda_spatial(&s, 31);
        assert!((e - spatial).abs() < 1e-10 * e.max(1.0), "{e} vs {spatial}");
        assert!(expectation_lambda(&t, 32).is_err());
    }

    #[test]
    fn identity_holds_on_samples() {
        let s = system(2, 4);
        let t = WindowTable::new(&s, 15);
        let samples = SampleSet::draw(&Lebesgue { k: 2 }, 5000, 11).unwrap();
        for n in [1, 7, 15] {
            let r = moment_report(&t, &samples, n).unwrap();
            assert!(second_moment_identity(&r).unwrap() < 1e-10);
            assert!(r.v_mu.value >= 0.0);
        }
        let r1 = moment_report(&t, &samples, 1).unwrap();
        assert!(r1.pair_mu.value <= r1.e_mu.value + 1e-15);
        let other = SampleSet::draw(&Lebesgue { k: 2 }, 100, 12).unwrap();
        let r2 = moment_report(&t, &other, 7).unwrap();
        assert!(matches!(
            second_moment_identity_parts(r1.e_lambda, &r1.e_mu, &r2.v_mu, &r1.pair_mu),
            Err(MomentError::MismatchedSamples(..))
        ));
        let again = SampleSet::draw(&Lebesgue { k: 2 }, 5000, 11).unwrap();
        assert_eq!(moment_report(&t, &again, 7).unwrap(), moment_report(&t, &samples, 7).unwrap());
    }

    #[test]
    fn lebesgue_variance_matches_fourier_diagonal() {
        let s = system(2, 3);
        let t = WindowTable::new(&s, 7);
        let samples = SampleSet::draw(&Lebesgue { k: 2 }, 400_000, 5).unwrap();
        let r = moment_report(&t, &samples, 7).unwrap();
        let exact = variance_lambda_fourier(&s, 7, 160);
        assert!(
            (r.v_mu.value - exact).abs() < 4.0 * r.v_mu.se,
            "{} ± {} vs {exact}",
            r.v_mu.value,
            r.v_mu.se
        );
        assert!((r.e_mu.value - r.e_lambda).abs() < 4.0 * r.e_mu.se);
    }

    #[test]
    fn dbc_examples() {
        let mu = vec![0.5, 0.25, 0.25];
        let b = dbc_lower_bound(&mu, None, Some(2.0), 0, 3).unwrap();
        assert_eq!(b.ratio, 1.0);
        assert_eq!(b.bound, 0.5);
        let one = dbc_lower_bound(&[0.3], Some(0.09), None, 0, 1).unwrap();
        assert!((one.bound - 1.0).abs() < 1e-15);
        let later = dbc_lower_bound(&mu, None, Some(2.0), 1, 3).unwrap();
        assert!(later.bound <= b.bound);
        assert!(dbc_lower_bound(&[0.0, 0.0], None, Some(1.0), 0, 2).is_err());
        assert!(dbc_lower_bound(&mu, None, Some(1.0), 3, 3).is_err());
    }

    #[test]
    fn lebesgue_transference_is_trivial() {
        let s = system(2, 4);
        let t = WindowTable::new(&s, 16);
        let a = SampleSet::draw(&Lebesgue { k: 2 }, 2000, 1).unwrap();
        let v = transference_report(&t, &a, &a, &[4, 8, 16]).unwrap();
        assert!(v.vtp_excess.iter().all(|e| *e == 0.0));
        assert!(transference_report(&t, &a, &a, &[6]).is_err());
        // Pairing against λ itself only keeps the zero mode.
        let w = reference_window(&s, 8).unwrap();
        let m = pairing_mass(&w, &Lebesgue { k: 2 }, 4.0).unwrap();
        assert!((m - w.volume()).abs() < 1e-15);
    }

    #[test]
    fn pairing_agrees_with_monte_carlo_on_sphere() {
        use crate::decomposition::BoxSpec;
        let patch = SurfacePatch::sphere_cap(3, 0.4, 0.3).unwrap();
        let spec = BoxSpec::new(2, vec![0.2; 3], vec![IntervalType::Full; 3], vec![0.1, 0.0, 0.3]).unwrap();
        let w = WindowProduct::new(spec, Profile::Classic);
        let pair = pairing_mass(&w, &patch, 6.0).unwrap();
        let samples = SampleSet::draw(&patch, 200_000, 9).unwrap();
        let vals: Vec<f64> = samples.points.iter().map(|p| w.eval(p)).collect();
        let st = mean_se(&vals, 0);
        assert!((pair - st.value).abs() < 4.0 * st.se, "{pair} vs {} ± {}", st.value, st.se);
        let local = patch.window_mass(&w, 16);
        assert!((pair - local).abs() < 1e-3 * local, "{pair} vs {local}");
    }

    #[test]
    fn raw_indicator_moments_match_volume_and_identity() {
        let psi = ApproxFunction::power_law(0.05, 1.0);
        let y = vec![0.3, 0.7];
        let a = SampleSet::draw(&Lebesgue { k: 2 }, 40_000, 5).unwrap();
        let reps = raw_moment_reports(&psi, &y, &a, &[16, 64]).unwrap();
        for r in &reps {
            assert!((r.e_mu.value - r.e_lambda).abs() < 4.0 * r.e_mu.se, "{r:?}");
            assert!(second_moment_identity(r).unwrap() < 1e-12);
        }
        let v = raw_transference_report(&psi, &y, &a, &a, &[16, 64]).unwrap();
        assert!(v.vtp_excess.iter().all(|e| *e == 0.0));
        assert!(raw_moment_reports(&psi, &[0.0; 3], &a, &[4]).is_err());
    }
}
