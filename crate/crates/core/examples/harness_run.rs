//! Runs a preset at reduced horizons and prints the manifest summary.

use mdalab::harness::{run, ExperimentConfig};

fn main() {
    let out = std::env::temp_dir().join("mdalab-example");
    let sets = vec![
        "horizons.aggregate_max=32".to_string(),
        "horizons.samples=2000".to_string(),
        format!("output_dir={}", toml::Value::String(out.display().to_string())),
    ];
    let cfg = ExperimentConfig::resolve(Some("curved-vtp"), None, &sets).unwrap();
    print!("{}", cfg.to_toml());
    let manifest = run(&cfg).unwrap();
    for o in &manifest.outputs {
        println!("{} rows={} sha256={}", o.file, o.rows, o.sha256);
    }
    println!("hash {} in {:.2} s", manifest.config_hash, manifest.total_seconds);
}
