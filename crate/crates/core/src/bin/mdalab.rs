use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdalab::acceptance;
use mdalab::harness::{self, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "mdalab", version, about = "Multiplicative diophantine approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write its CSV files and manifest.
    Run {
        /// Preset name; may instead be given as `preset` in the config file.
        preset: Option<String>,
        /// TOML configuration overlaid on the preset defaults.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        /// Dotted override, e.g. `horizons.n_max=128`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Print the resolved configuration and stop.
        #[arg(long)]
        dry_run: bool,
    },
    /// List the available presets.
    ListPresets,
    /// Describe one preset and print its default configuration.
    Describe { preset: String },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
        seed: u64,
        /// Run only the named checks.
        #[arg(long = "only", value_name = "ID")]
        only: Vec<String>,
    },
}

fn fail(e: &HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            preset,
            config,
            seed,
            k,
            output_dir,
            mut sets,
            dry_run,
        } => {
            if let Some(s) = seed {
                sets.push(format!("seed={s}"));
            }
            if let Some(k) = k {
                sets.push(format!("k={k}"));
            }
            if let Some(d) = output_dir {
                sets.push(format!("output_dir={}", toml::Value::String(d.display().to_string())));
            }
            let cfg = match config {
                Some(path) => ExperimentConfig::load(&path, preset.as_deref(), &sets),
                None => ExperimentConfig::resolve(preset.as_deref(), None, &sets),
            };
            let cfg = match cfg {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if dry_run {
                print!("{}", cfg.to_toml());
                return ExitCode::SUCCESS;
            }
            match harness::run(&cfg) {
                Ok(m) => {
                    for o in &m.outputs {
                        println!("{} ({} rows, sha256 {})", cfg.output_dir.join(&o.file).display(), o.rows, o.sha256);
                    }
                    println!("config hash {}; {:.1} s", m.config_hash, m.total_seconds);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::ListPresets => {
            print!("{}", harness::list_presets());
            ExitCode::SUCCESS
        }
        Command::Describe { preset } => match harness::describe(&preset) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Verify { seed, only } => {
            let mut criteria = acceptance::criteria();
            if !only.is_empty() {
                if let Some(bad) = only.iter().find(|id| acceptance::find(id).is_none()) {
                    eprintln!("error: unknown check `{bad}`");
                    return ExitCode::from(1);
                }
                criteria.retain(|c| only.iter().any(|id| id == c.id));
            }
            let mut failed = false;
            let mut slow = false;
            for c in &criteria {
                let o = c.run(seed);
                println!("{o}");
                failed |= !o.passed && o.within_budget;
                slow |= !o.within_budget;
            }
            if failed {
                ExitCode::from(2)
            } else if slow {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
