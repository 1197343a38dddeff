use std::fs;
use std::path::Path;

use mdalab::harness::{run, ExperimentConfig, HarnessError};
use sha2::{Digest, Sha256};

fn small(preset: &str, dir: &Path, extra: &[&str]) -> ExperimentConfig {
    let mut sets: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    sets.push(format!("output_dir=\"{}\"", dir.display()));
    ExperimentConfig::resolve(Some(preset), None, &sets).unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn assert_reproducible(preset: &str, extra: &[&str]) {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ma = run(&small(preset, &a, extra)).unwrap();
    let mb = run(&small(preset, &b, extra)).unwrap();
    assert_eq!(ma.config_hash, mb.config_hash);
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb, "{preset}: CSV bytes differ between identical runs");

    let listed: Vec<&str> = ma.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(listed.len(), fa.len(), "every CSV file is listed in the manifest");
    for (name, bytes) in &fa {
        let rec = ma.outputs.iter().find(|o| &o.file == name).expect("listed");
        assert_eq!(rec.sha256, hex::encode(Sha256::digest(bytes)));
        let text = String::from_utf8(bytes.clone()).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("config_hash,"));
        let mut rows = 0;
        for line in lines {
            assert!(line.starts_with(&format!("{},", ma.config_hash)), "{name}: {line}");
            rows += 1;
        }
        assert_eq!(rows, rec.rows);
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], ma.config_hash.as_str());
    assert_eq!(manifest["stages"].as_array().unwrap().len(), ma.stages.len());
}

#[test]
fn quasi_independence_is_reproducible() {
    assert_reproducible(
        "quasi-independence",
        &["horizons.n_max=12", "horizons.aggregate_max=32", "horizons.shifts=3", "horizons.points=50"],
    );
}

#[test]
fn curved_vtp_is_reproducible() {
    assert_reproducible("curved-vtp", &["horizons.aggregate_max=32", "horizons.samples=500"]);
}

#[test]
fn flat_presets_are_reproducible() {
    assert_reproducible("flat-etp", &["horizons.n_max=16", "horizons.q_max=128"]);
    assert_reproducible("flat-vtp", &["horizons.aggregate_max=16", "horizons.samples=500", "horizons.q_max=100"]);
}

#[test]
fn lebesgue_gallagher_tracks_expected_hits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small("lebesgue-gallagher", tmp.path(), &["horizons.n_max=2000", "horizons.points=400"]);
    run(&cfg).unwrap();
    let mut rdr = csv::Reader::from_path(tmp.path().join("growth.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let mean: f64 = r[4].parse().unwrap();
        let expected: f64 = r[5].parse().unwrap();
        assert!((mean - expected).abs() < 0.1 * expected + 1.0, "{r:?}");
    }
}

#[test]
fn seeds_and_settings_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["horizons.aggregate_max=16", "horizons.samples=300"];
    let a = run(&small("curved-vtp", &tmp.path().join("a"), &base)).unwrap();
    let mut more = base.to_vec();
    more.push("seed=99");
    let b = run(&small("curved-vtp", &tmp.path().join("b"), &more)).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert_ne!(a.outputs[0].sha256, b.outputs[0].sha256);
}

#[test]
fn budget_and_preset_errors() {
    let err = ExperimentConfig::resolve(Some("curved-etp"), None, &["horizons.n_max=100000".into()]).unwrap_err();
    assert!(matches!(err, HarnessError::Budget(_)));
    assert_eq!(err.exit_code(), 3);
    assert!(matches!(
        ExperimentConfig::resolve(Some("no-such-preset"), None, &[]),
        Err(HarnessError::UnknownPreset(_))
    ));
    assert!(matches!(
        ExperimentConfig::resolve(Some("flat-etp"), None, &["measure.roots=[1, 2]".into()]),
        Err(HarnessError::Config(_))
    ));
}

#[test]
fn config_file_overlay() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("exp.toml");
    fs::write(
        &path,
        "version = 1\npreset = \"quasi-independence\"\nk = 2\n[psi]\nkind = \"power-law\"\nc = 0.25\ntau = 1.0\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path, None, &["horizons.n_max=16".into()]).unwrap();
    assert_eq!(cfg.k, 2);
    assert_eq!(cfg.horizons.n_max, 16);
    assert_eq!(cfg.horizons.shifts, 20);
    assert!(matches!(cfg.psi, mdalab::approx::Family::PowerLaw { .. }));
    assert!(ExperimentConfig::load(&path, Some("flat-etp"), &[]).is_err());
}
