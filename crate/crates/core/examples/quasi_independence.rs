//! Exact pairwise intersection volumes of the inner covers and the
//! monotonicity of star-body overlaps.

use mdalab::approx::ApproxFunction;
use mdalab::decomposition::AdmissibleSystem;
use mdalab::qi::{gallagher_trials, qi_bound_report};

fn main() {
    let system = AdmissibleSystem::new(&ApproxFunction::log_power(4.0), 0.2, 6, 2, vec![0.0; 2]).unwrap();
    let report = qi_bound_report(&system, 24, 6, 5).unwrap();
    println!(
        "pairs {}  constant {:.4}  (lower half {:.4}, upper half {:.4})",
        report.rows.len(),
        report.global_constant,
        report.lower_constant,
        report.upper_constant
    );
    let worst = report.rows.iter().max_by(|a, b| a.constant.total_cmp(&b.constant)).unwrap();
    println!(
        "worst pair (n, n') = ({}, {}), gcd {}: volume {} ~ {:.4e}, main {:.4e}",
        worst.n, worst.n2, worst.gcd, worst.volume, worst.volume_f64, worst.main
    );
    let g = gallagher_trials(3, 500, 9).unwrap();
    println!("star overlaps: {} trials, {} violations, {} strict", g.trials, g.violations, g.strict);
}
