use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fmt_f64, ExperimentConfig, Horizons, HarnessError, MeasureConfig, RunContext, Table, CONFIG_VERSION};
use crate::approx::{psi_plus_power, Family};
use crate::bump::Profile;
use crate::decomposition::AdmissibleSystem;
use crate::fourier::{SmoothedSystem, WindowTable};
use crate::lattice::{omega_fit, ExponentKind};
use crate::measures::{HyperplaneSpec, Lebesgue, Measure};
use crate::moments::{
    curved_etp_envelope, flat_etp_ratios, moment_reports, raw_moment_reports, second_moment_identity, MomentReport,
    SampleSet,
};
use crate::qi::{functional_constant, gallagher_trials, qi_bound_report, qi_sum_report};
use crate::torus::{solution_count, Shift, TorusPoint};
use crate::volume::lambda_a_times;

/// A runnable experiment.
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub description: &'static str,
    /// The mathematical statements the preset probes.
    pub exercises: &'static str,
    pub outputs: &'static [&'static str],
    pub budget_seconds: f64,
    pub min_k: usize,
    pub max_k: usize,
    /// Largest admissible horizons.
    pub caps: Horizons,
    pub defaults: fn() -> ExperimentConfig,
    pub run: fn(&mut RunContext) -> Result<(), HarnessError>,
}

/// Cap of a horizon the preset does not read.
const ANY: u64 = u64::MAX;
const ANY_S: usize = usize::MAX;
const ANY_F: f64 = f64::INFINITY;

pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "lebesgue-gallagher",
            summary: "hit-count growth of random points in the multiplicative limsup set",
            description: "Draws random points of the unit cube and counts the n ≤ N with \
                ‖nx₁‖⋯‖nx_k‖ < ψ(n) at decade checkpoints. The growth table sets the empirical \
                medians beside the expected count Σλ(A_n^×) and the partial sums \
                Σψ(n)(log n)^{k−1} that decide convergence or divergence of the Lebesgue theory.",
            exercises: "the hyperbolic volume formula; the Lebesgue zero-one threshold Σψ(n)(log n)^{k−1}",
            outputs: &["hits.csv", "growth.csv"],
            budget_seconds: 300.0,
            min_k: 2,
            max_k: 6,
            caps: caps(10_000_000, ANY, ANY_F, ANY, 10_000, ANY_S, ANY_S),
            defaults: lebesgue_gallagher_defaults,
            run: lebesgue_gallagher,
        },
        Preset {
            name: "curved-etp",
            summary: "ETP envelope and transference on a curved hypersurface (k ≥ 3, σ = (k−1)/2)",
            description: "Builds the admissible system of the floored function \
                ψ̃(n) = max{ψ(n), (n log^{k+1} n)^{−1}} and compares μ(A_n^*) with λ(A_n^*) on the \
                reference window for a sphere cap. One constant is fitted on the lower eighth of the \
                range and checked on a geometric grid above it against the envelope \
                (d₁⋯d_k)^{−(1−σ/k)}/n^k with σ = (k−1)/2. A transference table over dyadic N follows.",
            exercises: "the curved equidistribution estimate; Fourier decay of curved surface measure; the second-moment identity",
            outputs: &["envelope.csv", "transference.csv"],
            budget_seconds: 600.0,
            min_k: 3,
            max_k: 4,
            caps: caps(1024, ANY, ANY_F, 128, ANY_S, 100_000, ANY_S),
            defaults: curved_etp_defaults,
            run: curved_etp,
        },
        Preset {
            name: "curved-vtp",
            summary: "variance transference on a curved hypersurface over dyadic N",
            description: "Estimates E_N, V_N and the pair sum for the smoothed system under a sphere-cap \
                measure and under Lebesgue measure from shared sample sets. Reports the ETP ratio, the VTP \
                excess (V_N(μ) − V_N(λ))/E_N(μ)² and the residual of the second-moment identity at each dyadic N.",
            exercises: "the variance transference principle; the second-moment identity",
            outputs: &["transference.csv", "moments.csv"],
            budget_seconds: 300.0,
            min_k: 2,
            max_k: 4,
            caps: caps(ANY, ANY, ANY_F, 256, ANY_S, 200_000, ANY_S),
            defaults: curved_vtp_defaults,
            run: curved_vtp,
        },
        Preset {
            name: "flat-etp",
            summary: "ETP ratios on a mollified hyperplane with the exponent conditions of the flat theory",
            description: "Estimates the simultaneous exponent ω(α₂,…,α_k) of the normal. If ω < ℓ, fixes ϖ = (ω + ℓ)/2, replaces ψ by ψ(n) + n^{−ℓ/ϖ} so that \
                ψ(n) ≥ n^{−ℓ/ϖ}, and reports μ(A_n^*)/λ(A_n^*) by Fourier pairing on every n in range.",
            exercises: "the flat equidistribution estimate; the simultaneous-exponent condition ω < ℓ",
            outputs: &["etp.csv", "exponents.csv"],
            budget_seconds: 300.0,
            min_k: 2,
            max_k: 4,
            caps: caps(128, 4096, 8.0, ANY, ANY_S, ANY_S, ANY_S),
            defaults: flat_etp_defaults,
            run: flat_etp,
        },
        Preset {
            name: "flat-vtp",
            summary: "VTP excess on a hyperplane in dimension 9 with the condition k > 4 + 2 max ω*",
            description: "Uses the normal (1, √2, √3, √5, √6, √7, √10, √11, √13). Estimates every pairwise \
                dual exponent ω*(α_i, α_j) for i, j ≥ 2 and records the condition k > 4 + 2 max ω*. \
                Admissible systems have no rows in dimension 9 at these horizons, so the variance \
                transference table is computed for the raw sets A_n^×(ψ) from shared samples of the \
                hyperplane measure and of Lebesgue measure.",
            exercises: "the flat variance transference principle; the pairwise dual-exponent condition",
            outputs: &["transference.csv", "moments.csv", "conditions.csv"],
            budget_seconds: 300.0,
            min_k: 3,
            max_k: 12,
            caps: caps(ANY, 1024, ANY_F, 4096, ANY_S, 200_000, ANY_S),
            defaults: flat_vtp_defaults,
            run: flat_vtp,
        },
        Preset {
            name: "quasi-independence",
            summary: "exact pairwise overlaps, the aggregate bound, functional variants and Gallagher monotonicity",
            description: "Computes λ(A_n ∩ (A_{n′} + γ)) exactly for all 2 ≤ n′ ≤ n ≤ N and random dyadic \
                shifts γ, and fits the smallest constant c with overlap ≤ λ(A_n)λ(A_{n′}) + c·(gcd error term). \
                Sums the overlaps over n, n′ ≤ N to track (LHS − E²)/E; the aggregate bound is stated for k ≥ 3. \
                Repeats the chain for plateau windows to measure the functional constant as p → 1, and runs \
                randomized exact checks that star-shaped overlaps shrink as the shift grows.",
            exercises: "pairwise quasi-independence with its gcd error term; the aggregate bound; \
                the functional variants and their plateau constant; monotonicity of star-shaped overlaps",
            outputs: &["pairs.csv", "aggregate.csv", "functional.csv", "gallagher.csv"],
            budget_seconds: 300.0,
            min_k: 2,
            max_k: 3,
            caps: caps(96, ANY, ANY_F, 256, 100_000, ANY_S, 64),
            defaults: qi_defaults,
            run: quasi_independence,
        },
    ]
}

pub fn find_preset(name: &str) -> Result<Preset, HarnessError> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
}

fn caps(n_max: u64, q_max: u64, freq_ceiling: f64, aggregate_max: u64, points: usize, samples: usize, shifts: usize) -> Horizons {
    Horizons {
        n_max,
        q_max,
        freq_ceiling,
        aggregate_max,
        points,
        samples,
        shifts,
    }
}

fn base(preset: &str, k: usize, tau: f64, psi: Family, measure: MeasureConfig, horizons: Horizons) -> ExperimentConfig {
    ExperimentConfig {
        version: CONFIG_VERSION,
        preset: preset.to_string(),
        k,
        tau,
        plateau: None,
        seed: crate::acceptance::DEFAULT_SEED,
        output_dir: PathBuf::from("out").join(preset),
        psi,
        measure,
        horizons,
    }
}

fn lebesgue_gallagher_defaults() -> ExperimentConfig {
    base(
        "lebesgue-gallagher",
        3,
        0.2,
        Family::LogPower { a: 2.0 },
        MeasureConfig::Lebesgue,
        caps(1_000_000, 1, 1.0, 1, 100, 1, 1),
    )
}

fn curved_etp_defaults() -> ExperimentConfig {
    base(
        "curved-etp",
        3,
        0.1,
        Family::PowerLaw { c: 0.5, tau: 1.0 },
        MeasureConfig::SphereCap { radius: 0.4, r0: 0.3 },
        caps(512, 1, 1.0, 64, 1, 20_000, 1),
    )
}

fn curved_vtp_defaults() -> ExperimentConfig {
    base(
        "curved-vtp",
        3,
        0.2,
        Family::LogPower { a: 4.0 },
        MeasureConfig::SphereCap { radius: 0.4, r0: 0.3 },
        caps(1, 1, 1.0, 128, 1, 20_000, 1),
    )
}

fn flat_etp_defaults() -> ExperimentConfig {
    base(
        "flat-etp",
        3,
        0.1,
        Family::PowerLaw { c: 0.5, tau: 1.0 },
        MeasureConfig::Hyperplane {
            roots: vec![1, 2, 3],
            eta: 0.01,
        },
        caps(64, 512, 4.0, 1, 1, 1, 1),
    )
}

fn flat_vtp_defaults() -> ExperimentConfig {
    base(
        "flat-vtp",
        9,
        0.05,
        Family::PowerLaw {
            c: 1.0 / 512.0,
            tau: 2.0,
        },
        MeasureConfig::Hyperplane {
            roots: vec![1, 2, 3, 5, 6, 7, 10, 11, 13],
            eta: 0.01,
        },
        caps(1, 128, 1.0, 256, 1, 20_000, 1),
    )
}

fn qi_defaults() -> ExperimentConfig {
    base(
        "quasi-independence",
        3,
        0.2,
        Family::LogPower { a: 4.0 },
        MeasureConfig::Lebesgue,
        caps(32, 1, 1.0, 128, 1000, 1, 20),
    )
}

fn floor_log2(n: u64) -> u32 {
    63 - n.max(1).leading_zeros()
}

/// Blocks up to the one containing `n`.
fn system_for(cfg: &ExperimentConfig, n: u64) -> Result<AdmissibleSystem, String> {
    let psi = cfg.approx_function().map_err(|e| e.to_string())?;
    AdmissibleSystem::new(&psi, cfg.tau, floor_log2(n) + 1, cfg.k, vec![0.0; cfg.k]).map_err(|e| e.to_string())
}

fn dyadic_upto(top: u64) -> Vec<u64> {
    (1..=floor_log2(top)).map(|e| 1u64 << e).collect()
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

fn lebesgue_gallagher(ctx: &mut RunContext) -> Result<(), HarnessError> {
    let cfg = ctx.config;
    let k = cfg.k;
    let psi = cfg.approx_function()?;
    let top = cfg.horizons.n_max;
    let mut checkpoints: Vec<u64> = std::iter::successors(Some(10u64), |c| c.checked_mul(10))
        .take_while(|c| *c <= top)
        .collect();
    if checkpoints.last() != Some(&top) {
        checkpoints.push(top);
    }
    let points = cfg.horizons.points;
    let counts = ctx.stage("hit-counts", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zero = Shift::zero(k);
        (0..points)
            .map(|_| {
                let x = TorusPoint::new((0..k).map(|_| rng.gen()).collect())?;
                let hits = solution_count(&x, &psi, &zero, top)?;
                Ok(checkpoints.iter().map(|&c| hits.partition_point(|&n| n <= c)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>, crate::torus::TorusError>>()
    })?;
    let expected = ctx.stage("expected-hits", |_| {
        let mut acc = 0.0;
        let mut out = Vec::new();
        let mut next = 0;
        for n in 1..=top {
            acc += lambda_a_times(k, n, &psi)?;
            if checkpoints[next] == n {
                out.push(acc);
                next += 1;
            }
        }
        Ok::<_, crate::volume::VolumeError>(out)
    })?;
    let partial = psi.gallagher_partial_sums(k as u32, &checkpoints);

    let mut hits = Table::new("hits.csv", &["point", "horizon", "hits"]);
    for (i, row) in counts.iter().enumerate() {
        for (c, h) in checkpoints.iter().zip(row) {
            hits.push(vec![s(i), s(c), s(h)]);
        }
    }
    let mut growth = Table::new(
        "growth.csv",
        &["horizon", "points", "median_hits", "mean_hits", "expected_hits", "gallagher_sum"],
    );
    for (c, &h) in checkpoints.iter().enumerate() {
        let mut col: Vec<usize> = counts.iter().map(|r| r[c]).collect();
        col.sort_unstable();
        let m = col.len() / 2;
        let median = if col.len() % 2 == 1 { col[m] as f64 } else { 0.5 * (col[m - 1] + col[m]) as f64 };
        let mean = col.iter().sum::<usize>() as f64 / col.len() as f64;
        growth.push(vec![
            s(h),
            s(points),
            fmt_f64(median),
            fmt_f64(mean),
            fmt_f64(expected[c]),
            fmt_f64(partial[c].1),
        ]);
    }
    ctx.emit(hits);
    ctx.emit(growth);
    Ok(())
}

const TRANSFERENCE_HEADER: [&str; 15] = [
    "measure",
    "n",
    "samples",
    "e_lambda",
    "e_mu",
    "e_mu_se",
    "etp_ratio",
    "etp_se",
    "v_mu",
    "v_mu_se",
    "v_lambda",
    "v_lambda_se",
    "vtp_excess",
    "vtp_se",
    "identity_residual",
];

const MOMENTS_HEADER: [&str; 12] = [
    "sample_measure",
    "n",
    "samples",
    "fingerprint",
    "e_lambda",
    "e_mu",
    "e_mu_se",
    "v",
    "v_se",
    "pair",
    "pair_se",
    "identity_residual",
];

/// Transference and moment tables from paired `μ` and Lebesgue reports.
fn transference_tables(
    ctx: &mut RunContext,
    label: &str,
    mu: &[MomentReport],
    lam: &[MomentReport],
) -> Result<(Table, Table), HarnessError> {
    let mut tr = Table::new("transference.csv", &TRANSFERENCE_HEADER);
    let mut mo = Table::new("moments.csv", &MOMENTS_HEADER);
    let mut worst: f64 = 0.0;
    for (m, l) in mu.iter().zip(lam).filter(|(m, _)| m.e_lambda > 0.0) {
        let e2 = m.e_mu.value * m.e_mu.value;
        let rm = second_moment_identity(m).map_err(|e| HarnessError::Invariant(e.to_string()))?;
        let rl = second_moment_identity(l).map_err(|e| HarnessError::Invariant(e.to_string()))?;
        worst = worst.max(rm).max(rl);
        tr.push(vec![
            s(label),
            s(m.n),
            s(m.samples),
            fmt_f64(m.e_lambda),
            fmt_f64(m.e_mu.value),
            fmt_f64(m.e_mu.se),
            fmt_f64(m.e_mu.value / m.e_lambda),
            fmt_f64(m.e_mu.se / m.e_lambda),
            fmt_f64(m.v_mu.value),
            fmt_f64(m.v_mu.se),
            fmt_f64(l.v_mu.value),
            fmt_f64(l.v_mu.se),
            fmt_f64((m.v_mu.value - l.v_mu.value) / e2),
            fmt_f64((m.v_mu.se.powi(2) + l.v_mu.se.powi(2)).sqrt() / e2),
            fmt_f64(rm),
        ]);
        for (name, r, res) in [(label, m, rm), ("lebesgue", l, rl)] {
            mo.push(vec![
                s(name),
                s(r.n),
                s(r.samples),
                format!("{:016x}", r.e_mu.fingerprint),
                fmt_f64(r.e_lambda),
                fmt_f64(r.e_mu.value),
                fmt_f64(r.e_mu.se),
                fmt_f64(r.v_mu.value),
                fmt_f64(r.v_mu.se),
                fmt_f64(r.pair_mu.value),
                fmt_f64(r.pair_mu.se),
                fmt_f64(res),
            ]);
        }
    }
    if !(worst <= 1e-10) {
        ctx.violation(format!("second-moment identity residual {worst:.3e} exceeds 1e-10"));
    }
    Ok((tr, mo))
}

fn draw_pair(cfg: &ExperimentConfig, measure: &dyn Measure, seed: u64) -> Result<(SampleSet, SampleSet), String> {
    let n = cfg.horizons.samples;
    let mu = SampleSet::draw(measure, n, seed).map_err(|e| e.to_string())?;
    let lam = SampleSet::draw(&Lebesgue { k: cfg.k }, n, seed ^ 0x9e37_79b9_7f4a_7c15).map_err(|e| e.to_string())?;
    Ok((mu, lam))
}

fn smoothed_transference(ctx: &mut RunContext) -> Result<(Table, Table), HarnessError> {
    let cfg = ctx.config;
    let top = cfg.horizons.aggregate_max;
    let ns = dyadic_upto(top);
    let measure = cfg.measure.build(cfg.k)?;
    let table = ctx.stage("window-table", |_| {
        let sys = SmoothedSystem::new(system_for(cfg, top)?, profile(cfg));
        Ok::<_, String>(WindowTable::new(&sys, top))
    })?;
    let (mu_s, lam_s) = ctx.stage("samples", |seed| draw_pair(cfg, measure.as_ref(), seed))?;
    let (mu, lam) = ctx.stage("moments", |_| {
        Ok::<_, crate::moments::MomentError>((
            moment_reports(&table, &mu_s, &ns)?,
            moment_reports(&table, &lam_s, &ns)?,
        ))
    })?;
    transference_tables(ctx, cfg.measure.label(), &mu, &lam)
}

fn profile(cfg: &ExperimentConfig) -> Profile {
    cfg.plateau.map_or(Profile::Classic, Profile::plateau)
}

fn curved_etp(ctx: &mut RunContext) -> Result<(), HarnessError> {
    let cfg = ctx.config;
    if cfg.k < 3 {
        return Err(HarnessError::Config("the curved envelope needs k ≥ 3".into()));
    }
    if !matches!(cfg.measure, MeasureConfig::SphereCap { .. }) {
        return Err(HarnessError::Config("curved-etp needs a sphere-cap measure".into()));
    }
    let sigma = (cfg.k as f64 - 1.0) / 2.0;
    let top = cfg.horizons.n_max;
    let fit_top = (top / 8).max(8);
    let fit: Vec<u64> = (8..=fit_top).collect();
    let verify: Vec<u64> = (1..)
        .map(|j| (fit_top as f64 * 2f64.powf(j as f64 / 4.0)).round() as u64)
        .take_while(|n| *n <= top)
        .collect();
    let ns: Vec<u64> = fit.iter().chain(&verify).copied().collect();
    let env = ctx.stage("envelope", |_| {
        let sys = SmoothedSystem::new(system_for(cfg, top)?, profile(cfg));
        let MeasureConfig::SphereCap { radius, r0 } = cfg.measure else {
            unreachable!()
        };
        let patch = crate::measures::SurfacePatch::sphere_cap(cfg.k, radius, r0).map_err(|e| e.to_string())?;
        Ok::<_, String>(curved_etp_envelope(&sys, &patch, &ns, &fit, sigma, 12))
    })?;
    let mut t = Table::new(
        "envelope.csv",
        &["n", "role", "mu", "lambda", "ratio", "envelope", "scaled_deviation", "fitted_constant", "sigma"],
    );
    for r in &env.rows {
        t.push(vec![
            s(r.n),
            s(if fit.contains(&r.n) { "fit" } else { "verify" }),
            fmt_f64(r.mu),
            fmt_f64(r.lambda),
            fmt_f64(r.ratio),
            fmt_f64(r.envelope),
            fmt_f64(r.scaled()),
            fmt_f64(env.c),
            fmt_f64(sigma),
        ]);
    }
    ctx.emit(t);
    let (tr, _) = smoothed_transference(ctx)?;
    ctx.emit(tr);
    Ok(())
}

fn curved_vtp(ctx: &mut RunContext) -> Result<(), HarnessError> {
    let (tr, mo) = smoothed_transference(ctx)?;
    ctx.emit(tr);
    ctx.emit(mo);
    Ok(())
}

const CONDITION_HEADER: [&str; 8] = ["kind", "i", "j", "horizon", "value", "threshold", "holds", "stable"];

fn hyperplane_roots(cfg: &ExperimentConfig) -> Result<(&[u64], f64), HarnessError> {
    match &cfg.measure {
        MeasureConfig::Hyperplane { roots, eta } => Ok((roots, *eta)),
        _ => Err(HarnessError::Config(format!("preset `{}` needs a hyperplane measure", cfg.preset))),
    }
}

/// Dual exponents of every pair `(α_i, α_j)`, `2 ≤ i < j ≤ k` (1-based).
fn pair_exponents(alpha: &[f64], q: u64, threshold: f64, table: &mut Table) -> Result<f64, String> {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..alpha.len() {
        for j in i + 1..alpha.len() {
            let e = omega_fit(ExponentKind::Dual, &[alpha[i], alpha[j]], q).map_err(|e| e.to_string())?;
            worst = worst.max(e.exponent);
            table.push(vec![
                s("dual-pair"),
                s(i + 1),
                s(j + 1),
                s(q),
                fmt_f64(e.exponent),
                fmt_f64(threshold),
                s(e.exponent < threshold),
                s(e.stable),
            ]);
        }
    }
    Ok(worst)
}

fn flat_etp(ctx: &mut RunContext) -> Result<(), HarnessError> {
    let cfg = ctx.config;
    let (roots, eta) = hyperplane_roots(cfg)?;
    let alpha = MeasureConfig::alpha(roots);
    let spec = HyperplaneSpec::through_centre(alpha.clone(), eta).map_err(|e| HarnessError::Config(e.to_string()))?;
    let ell = spec.ell() as f64;
    let q = cfg.horizons.q_max;
    let mut ex = Table::new("exponents.csv", &CONDITION_HEADER);
    let omega = ctx.stage("exponents", |_| {
        let e = omega_fit(ExponentKind::Simultaneous, &alpha[1..], q).map_err(|e| e.to_string())?;
        ex.push(vec![
            s("simultaneous"),
            s(2),
            s(alpha.len()),
            s(q),
            fmt_f64(e.exponent),
            fmt_f64(ell),
            s(e.exponent < ell),
            s(e.stable),
        ]);
        Ok::<_, String>(e.exponent)
    })?;
    let psi = cfg.approx_function()?;
    let psi = if omega < ell {
        let varpi = 0.5 * (omega + ell);
        ex.push(vec![
            s("varpi"),
            s(2),
            s(alpha.len()),
            s(q),
            fmt_f64(varpi),
            fmt_f64(ell),
            s(true),
            s(true),
        ]);
        psi_plus_power(&psi, ell / varpi).map_err(|e| HarnessError::Config(e.to_string()))?
    } else {
        ctx.violation(format!("simultaneous exponent {omega:.3} is not below ℓ = {ell}"));
        psi
    };
    let top = cfg.horizons.n_max;
    let ns: Vec<u64> = (8..=top).collect();
    let radius = cfg.horizons.freq_ceiling;
    let rows = ctx.stage("etp-ratios", |_| {
        let base = AdmissibleSystem::new(&psi, cfg.tau, floor_log2(top) + 1, cfg.k, vec![0.0; cfg.k])
            .map_err(|e| e.to_string())?;
        let sys = SmoothedSystem::new(base, profile(cfg));
        flat_etp_ratios(&sys, &spec, &ns, radius).map_err(|e| e.to_string())
    })?;
    let mut t = Table::new(
        "etp.csv",
        &["n", "mu", "lambda", "ratio", "deviation", "envelope", "scaled_deviation", "radius"],
    );
    for r in &rows {
        t.push(vec![
            s(r.n),
            fmt_f64(r.mu),
            fmt_f64(r.lambda),
            fmt_f64(r.ratio),
            fmt_f64(r.ratio - 1.0),
            fmt_f64(r.envelope),
            fmt_f64(r.scaled()),
            fmt_f64(radius),
        ]);
    }
    ctx.emit(t);
    ctx.emit(ex);
    Ok(())
}

fn flat_vtp(ctx: &mut RunContext) -> Result<(), HarnessError> {
    let cfg = ctx.config;
    let k = cfg.k;
    let (roots, _) = hyperplane_roots(cfg)?;
    let alpha = MeasureConfig::alpha(roots);
    let q = cfg.horizons.q_max;
    let per_pair = (k as f64 - 4.0) / 2.0;
    let mut cond = Table::new("conditions.csv", &CONDITION_HEADER);
    let worst = ctx.stage("exponents", |_| pair_exponents(&alpha, q, per_pair, &mut cond))?;
    let bound = 4.0 + 2.0 * worst;
    cond.push(vec![
        s("max"),
        s(0),
        s(0),
        s(q),
        fmt_f64(bound),
        fmt_f64(k as f64),
        s((k as f64) > bound),
        s(true),
    ]);
    let measure = cfg.measure.build(k)?;
    let psi = cfg.approx_function()?;
    let ns = dyadic_upto(cfg.horizons.aggregate_max);
    let (mu_s, lam_s) = ctx.stage("samples", |seed| draw_pair(cfg, measure.as_ref(), seed))?;
    let y = vec![0.0; k];
    let (mu, lam) = ctx.stage("moments", |_| {
        Ok::<_, crate::moments::MomentError>((
            raw_moment_reports(&psi, &y, &mu_s, &ns)?,
            raw_moment_reports(&psi, &y, &lam_s, &ns)?,
        ))
    })?;
    let (tr, mo) = transference_tables(ctx, cfg.measure.label(), &mu, &lam)?;
    ctx.emit(tr);
    ctx.emit(mo);
    ctx.emit(cond);
    Ok(())
}

fn quasi_independence(ctx: &mut RunContext) -> Result<(), HarnessError> {
    let cfg = ctx.config;
    let k = cfg.k;
    let h = &cfg.horizons;
    let sys = ctx.stage("system", |_| system_for(cfg, h.n_max.max(h.aggregate_max)))?;
    let report = ctx.stage("pairs", |seed| qi_bound_report(&sys, h.n_max, h.shifts, seed))?;
    let checkpoints: Vec<u64> = dyadic_upto(h.aggregate_max).into_iter().filter(|n| *n >= 16).collect();
    let sums = ctx.stage("aggregate", |seed| qi_sum_report(&sys, &checkpoints, seed))?;
    let mut ps = vec![0.5, 0.9, 0.99];
    if let Some(p) = cfg.plateau {
        if !ps.contains(&p) {
            ps.push(p);
            ps.sort_by(f64::total_cmp);
        }
    }
    let functional = ctx.stage("functional", |_| {
        Ok::<_, String>(ps.iter().map(|&p| functional_constant(&sys, p, h.aggregate_max)).collect::<Vec<_>>())
    })?;
    let star = ctx.stage("gallagher", |seed| gallagher_trials(k, h.points, seed))?;

    let mut pairs = Table::new(
        "pairs.csv",
        &["n", "n2", "gcd", "volume", "volume_f64", "main", "error_term", "constant", "gamma"],
    );
    for r in &report.rows {
        pairs.push(vec![
            s(r.n),
            s(r.n2),
            s(r.gcd),
            r.volume.clone(),
            fmt_f64(r.volume_f64),
            fmt_f64(r.main),
            fmt_f64(r.error_term),
            fmt_f64(r.constant),
            r.gamma.iter().map(|g| fmt_f64(*g)).collect::<Vec<_>>().join(";"),
        ]);
    }
    let mut agg = Table::new("aggregate.csv", &["horizon", "lhs", "e", "ratio"]);
    for r in &sums {
        agg.push(vec![s(r.horizon), fmt_f64(r.lhs), fmt_f64(r.e), fmt_f64(r.ratio)]);
    }
    let mut fun = Table::new("functional.csv", &["p", "constant", "worst_n", "plateau_bound", "horizon"]);
    for f in &functional {
        fun.push(vec![
            fmt_f64(f.p),
            fmt_f64(f.constant),
            s(f.worst_n),
            fmt_f64((2.0 / (1.0 + f.p)).powi(2 * k as i32)),
            s(h.aggregate_max),
        ]);
    }
    let mut gal = Table::new("gallagher.csv", &["k", "trials", "violations", "strict"]);
    gal.push(vec![s(k), s(star.trials), s(star.violations), s(star.strict)]);

    if !report.global_constant.is_finite() {
        ctx.violation("pairwise constant is not finite".into());
    }
    if star.violations > 0 {
        ctx.violation(format!("{} star-shaped monotonicity violations", star.violations));
    }
    ctx.emit(pairs);
    ctx.emit(agg);
    ctx.emit(fun);
    ctx.emit(gal);
    Ok(())
}
