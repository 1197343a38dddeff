//! Experiment presets, configuration, seeding and CSV/JSON emission.
//!
//! A run starts from the defaults of a named preset, overlays a TOML file and
//! then `key=value` overrides, validates the result against the preset's
//! horizon caps and executes the preset's stages. Every CSV row starts with
//! the configuration hash; `manifest.json` records checksums and timings.

mod presets;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::approx::{ApproxFunction, Family};
use crate::measures::{HyperplaneSpec, Lebesgue, Measure, SurfacePatch};

pub use presets::{find_preset, presets, Preset};

/// Current configuration schema version.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for invariant violations, 3 for exceeded
    /// budgets, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant(_) => 2,
            HarnessError::Budget(_) => 3,
            _ => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// The measure a preset integrates against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    Lebesgue,
    /// Smoothed cap of a sphere of radius `radius`, over a parameter ball of radius `r0`.
    SphereCap { radius: f64, r0: f64 },
    /// Hyperplane with normal `(√roots[0], √roots[1], …)`; `roots[0]` must be 1.
    Hyperplane { roots: Vec<u64>, eta: f64 },
}

impl MeasureConfig {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureConfig::Lebesgue => "lebesgue",
            MeasureConfig::SphereCap { .. } => "sphere-cap",
            MeasureConfig::Hyperplane { .. } => "hyperplane",
        }
    }

    pub fn alpha(roots: &[u64]) -> Vec<f64> {
        roots.iter().map(|r| (*r as f64).sqrt()).collect()
    }

    pub fn build(&self, k: usize) -> Result<Box<dyn Measure>, HarnessError> {
        let bad = |e: crate::measures::MeasureError| HarnessError::Config(format!("measure: {e}"));
        Ok(match self {
            MeasureConfig::Lebesgue => Box::new(Lebesgue { k }),
            MeasureConfig::SphereCap { radius, r0 } => Box::new(SurfacePatch::sphere_cap(k, *radius, *r0).map_err(bad)?),
            MeasureConfig::Hyperplane { roots, eta } => {
                if roots.len() != k {
                    return Err(HarnessError::Config(format!(
                        "hyperplane has {} roots but k = {k}",
                        roots.len()
                    )));
                }
                Box::new(HyperplaneSpec::through_centre(Self::alpha(roots), *eta).map_err(bad)?)
            }
        })
    }
}

/// Horizons and sample sizes. Each preset reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizons {
    /// Largest `n` of the main table.
    pub n_max: u64,
    /// Search horizon `Q` of exponent fits.
    pub q_max: u64,
    /// Frequency cut-off of Fourier pairings, in dual-radius units.
    pub freq_ceiling: f64,
    /// Largest `N` of aggregate or transference sums.
    pub aggregate_max: u64,
    /// Random points or randomized trials.
    pub points: usize,
    /// Samples per measure.
    pub samples: usize,
    /// Random shifts per pair.
    pub shifts: usize,
}

impl Horizons {
    fn exceeded(&self, cap: &Horizons) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, v: f64, c: f64| {
            if v > c {
                out.push(format!("{name} = {v} exceeds the cap {c}"));
            }
        };
        check("n_max", self.n_max as f64, cap.n_max as f64);
        check("q_max", self.q_max as f64, cap.q_max as f64);
        check("freq_ceiling", self.freq_ceiling, cap.freq_ceiling);
        check("aggregate_max", self.aggregate_max as f64, cap.aggregate_max as f64);
        check("points", self.points as f64, cap.points as f64);
        check("samples", self.samples as f64, cap.samples as f64);
        check("shifts", self.shifts as f64, cap.shifts as f64);
        out
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub preset: String,
    pub k: usize,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub psi: Family,
    pub measure: MeasureConfig,
    pub horizons: Horizons,
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            let kind_changes = matches!((b.get("kind"), o.get("kind")), (Some(x), Some(y)) if x != y);
            if kind_changes {
                *b = o;
                return;
            }
            for (key, v) in o {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(key, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl ExperimentConfig {
    /// The defaults of a preset.
    pub fn preset(name: &str) -> Result<Self, HarnessError> {
        let p = find_preset(name)?;
        Ok((p.defaults)())
    }

    /// Preset defaults overlaid with a TOML document, then with dotted
    /// `key=value` overrides such as `horizons.n_max=128`.
    pub fn resolve(preset: Option<&str>, toml_text: Option<&str>, overrides: &[String]) -> Result<Self, HarnessError> {
        let user: toml::Value = match toml_text {
            Some(t) => toml::Value::Table(
                t.parse::<toml::Table>()
                    .map_err(|e| HarnessError::Config(format!("parse: {e}")))?,
            ),
            None => toml::Value::Table(toml::Table::new()),
        };
        let from_file = user.get("preset").and_then(|v| v.as_str()).map(str::to_string);
        let name = match (preset, from_file) {
            (Some(cli), Some(file)) if cli != file => {
                return Err(HarnessError::Config(format!(
                    "preset `{cli}` on the command line but `{file}` in the file"
                )))
            }
            (Some(cli), _) => cli.to_string(),
            (None, Some(file)) => file,
            (None, None) => return Err(HarnessError::Config("no preset given".into())),
        };
        let defaults = Self::preset(&name)?;
        let mut value = toml::Value::try_from(&defaults).map_err(|e| HarnessError::Config(e.to_string()))?;
        merge(&mut value, user);
        for o in overrides {
            let (path, raw) = o
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("override `{o}` is not key=value")))?;
            let mut patch = parse_scalar(raw.trim());
            for key in path.trim().rsplit('.') {
                let mut t = toml::Table::new();
                t.insert(key.to_string(), patch);
                patch = toml::Value::Table(t);
            }
            merge(&mut value, patch);
        }
        let cfg: Self = value
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, preset: Option<&str>, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::resolve(preset, Some(&text), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks the version, the preset, the parameters and the horizon caps.
    /// Horizons above the caps are reported as an exceeded budget.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.version != CONFIG_VERSION {
            return Err(HarnessError::Config(format!(
                "version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let p = find_preset(&self.preset)?;
        if self.k < p.min_k || self.k > p.max_k {
            return Err(HarnessError::Config(format!(
                "preset `{}` needs {} ≤ k ≤ {}, got {}",
                p.name, p.min_k, p.max_k, self.k
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0 / self.k as f64) {
            return Err(HarnessError::Config(format!("τ = {} must lie in (0, 1/k)", self.tau)));
        }
        if let Some(pl) = self.plateau {
            if !(pl > 0.0 && pl < 1.0) {
                return Err(HarnessError::Config(format!("plateau p = {pl} must lie in (0, 1)")));
            }
        }
        self.approx_function()?;
        self.measure.build(self.k)?;
        let over = self.horizons.exceeded(&p.caps);
        if !over.is_empty() {
            return Err(HarnessError::Budget(format!("preset `{}`: {}", p.name, over.join("; "))));
        }
        Ok(())
    }

    pub fn approx_function(&self) -> Result<ApproxFunction, HarnessError> {
        ApproxFunction::new(self.psi.clone()).map_err(|e| HarnessError::Config(format!("ψ: {e}")))
    }

    /// First 16 hex digits of the SHA-256 of the configuration, excluding the
    /// output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("configuration serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }
}

/// Seed of stage `index`, derived from the master seed by stream selection.
pub fn stage_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Text form of a float: plain decimals in the usual range, scientific
/// otherwise. Both are shortest round-trip representations.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV table assembled in memory; the hash column is added on write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &'static str, header: &[&'static str]) -> Self {
        Self {
            file,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    /// CSV bytes with `config_hash` as the first column.
    pub fn to_bytes(&self, config_hash: &str) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head = vec!["config_hash"];
        head.extend(&self.header);
        w.write_record(&head).expect("in-memory write");
        for r in &self.rows {
            w.write_record(std::iter::once(config_hash).chain(r.iter().map(String::as_str)))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub preset: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<OutputRecord>,
    pub invariant_violations: Vec<String>,
    pub total_seconds: f64,
    pub budget_seconds: f64,
}

/// State threaded through a preset's stages.
pub struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    stages: Vec<StageRecord>,
    tables: Vec<Table>,
    violations: Vec<String>,
}

impl<'a> RunContext<'a> {
    fn new(config: &'a ExperimentConfig) -> Self {
        Self {
            config,
            stages: Vec::new(),
            tables: Vec::new(),
            violations: Vec::new(),
        }
    }

    /// Runs one named stage with its own seed; errors carry the stage name.
    pub fn stage<T, E: std::fmt::Display>(
        &mut self,
        name: &str,
        body: impl FnOnce(u64) -> Result<T, E>,
    ) -> Result<T, HarnessError> {
        let seed = stage_seed(self.config.seed, self.stages.len() as u64);
        let start = Instant::now();
        let out = body(seed).map_err(|e| HarnessError::Stage {
            stage: name.to_string(),
            message: e.to_string(),
        });
        self.stages.push(StageRecord {
            name: name.to_string(),
            seed,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn emit(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn violation(&mut self, message: String) {
        self.violations.push(message);
    }
}

/// Runs the configured preset, writes its CSV files and `manifest.json`.
///
/// Outputs are written even when an invariant is violated or the budget is
/// exceeded; the error is returned afterwards.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest, HarnessError> {
    config.validate()?;
    let preset = find_preset(&config.preset)?;
    let start = Instant::now();
    let mut ctx = RunContext::new(config);
    (preset.run)(&mut ctx)?;
    let total_seconds = start.elapsed().as_secs_f64();

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let hash = config.hash();
    let mut outputs = Vec::new();
    for t in &ctx.tables {
        let bytes = t.to_bytes(&hash);
        let path = dir.join(t.file);
        fs::write(&path, &bytes).map_err(|e| HarnessError::io(&path, e))?;
        outputs.push(OutputRecord {
            file: t.file.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            rows: t.rows.len(),
        });
    }
    let manifest = RunManifest {
        config_hash: hash,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        preset: config.preset.clone(),
        seed: config.seed,
        config: config.clone(),
        stages: ctx.stages,
        outputs,
        invariant_violations: ctx.violations,
        total_seconds,
        budget_seconds: preset.budget_seconds,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;

    if !manifest.invariant_violations.is_empty() {
        return Err(HarnessError::Invariant(manifest.invariant_violations.join("; ")));
    }
    if total_seconds > preset.budget_seconds {
        return Err(HarnessError::Budget(format!(
            "preset `{}` took {total_seconds:.1} s of {:.0} s",
            preset.name, preset.budget_seconds
        )));
    }
    Ok(manifest)
}

/// One line per preset: name, budget and summary.
pub fn list_presets() -> String {
    let mut out = String::new();
    for p in presets() {
        let _ = writeln!(out, "{:<20} {:>5.0} s  {}", p.name, p.budget_seconds, p.summary);
    }
    out
}

/// Long description of a preset, including its default configuration.
pub fn describe(name: &str) -> Result<String, HarnessError> {
    let p = find_preset(name)?;
    Ok(format!(
        "{}\n\n{}\n\nExercises: {}\nOutputs: {}\nBudget: {:.0} s\n\nDefault configuration:\n{}",
        p.name,
        p.description,
        p.exercises,
        p.outputs.join(", "),
        p.budget_seconds,
        (p.defaults)().to_toml()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_default_validates_and_roundtrips() {
        for p in presets() {
            let cfg = (p.defaults)();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let back = ExperimentConfig::resolve(None, Some(&cfg.to_toml()), &[]).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn overlay_and_overrides() {
        let text = "preset = \"curved-vtp\"\nseed = 7\n[horizons]\nsamples = 500\n";
        let cfg = ExperimentConfig::resolve(None, Some(text), &["horizons.aggregate_max=32".into(), "measure.radius=0.35".into()])
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.horizons.samples, 500);
        assert_eq!(cfg.horizons.aggregate_max, 32);
        assert_eq!(cfg.measure, MeasureConfig::SphereCap { radius: 0.35, r0: 0.3 });
        let switched = ExperimentConfig::resolve(Some("curved-vtp"), None, &[]).unwrap();
        assert_ne!(switched.hash(), cfg.hash());
    }

    #[test]
    fn rejections() {
        assert!(matches!(ExperimentConfig::preset("nope"), Err(HarnessError::UnknownPreset(_))));
        assert!(matches!(
            ExperimentConfig::resolve(Some("curved-etp"), Some("bogus = 1"), &[]),
            Err(HarnessError::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::resolve(Some("curved-etp"), None, &["k=2".into()]),
            Err(HarnessError::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::resolve(Some("curved-etp"), None, &["version=2".into()]),
            Err(HarnessError::Config(_))
        ));
        let e = ExperimentConfig::resolve(Some("quasi-independence"), None, &["horizons.n_max=100000".into()]).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert_eq!(HarnessError::Invariant(String::new()).exit_code(), 2);
        assert!(describe("nope").is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = ExperimentConfig::preset("flat-etp").unwrap();
        let h = a.hash();
        assert_eq!(h.len(), 16);
        a.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), h);
        a.seed += 1;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn stage_seeds_are_distinct_and_stable() {
        let s: Vec<u64> = (0..8).map(|i| stage_seed(1, i)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 8);
        assert_eq!(s[3], stage_seed(1, 3));
    }

    #[test]
    fn table_bytes_carry_the_hash() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec!["1".into(), fmt_f64(2.5e-7)]);
        let text = String::from_utf8(t.to_bytes("abc")).unwrap();
        assert_eq!(text, "config_hash,a,b\nabc,1,2.5e-7\n");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn listing_names_all_six() {
        let l = list_presets();
        for name in ["lebesgue-gallagher", "curved-etp", "curved-vtp", "flat-etp", "flat-vtp", "quasi-independence"] {
            assert!(l.contains(name), "{name}");
        }
        let d = describe("quasi-independence").unwrap();
        assert!(d.contains("gcd"));
    }
}
