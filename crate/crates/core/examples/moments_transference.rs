//! First and second moments of the counting function under a curved
//! measure, compared with Lebesgue measure.

use mdalab::approx::ApproxFunction;
use mdalab::bump::Profile;
use mdalab::decomposition::AdmissibleSystem;
use mdalab::fourier::WindowTable;
use mdalab::measures::SurfacePatch;
use mdalab::measures::Lebesgue;
use mdalab::moments::{moment_reports, second_moment_identity, smoothed, transference_report, SampleSet};

fn main() {
    let k = 3;
    let base = AdmissibleSystem::new(&ApproxFunction::log_power(4.0), 0.2, 8, k, vec![0.0; k]).unwrap();
    let system = smoothed(base, Profile::Classic);
    let ns = [16u64, 32, 64, 128];
    let table = WindowTable::new(&system, 128);

    let cap = SurfacePatch::sphere_cap(k, 0.4, 0.3).unwrap();
    let mu = SampleSet::draw(&cap, 4000, 1).unwrap();
    let lam = SampleSet::draw(&Lebesgue { k }, 4000, 2).unwrap();

    println!("   N   E_lambda    E_mu      V_mu   identity residual");
    for r in moment_reports(&table, &mu, &ns).unwrap() {
        println!(
            "{:4}  {:.4}   {:.4}   {:.4}   {:.1e}",
            r.n,
            r.e_lambda,
            r.e_mu.value,
            r.v_mu.value,
            second_moment_identity(&r).unwrap()
        );
    }
    let verdict = transference_report(&table, &mu, &lam, &ns).unwrap();
    println!("\n   N   ETP ratio        VTP excess");
    for i in 0..verdict.ns.len() {
        println!(
            "{:4}  {:.3} +/- {:.3}  {:7.2} +/- {:.2}",
            verdict.ns[i], verdict.etp_ratio[i], verdict.etp_se[i], verdict.vtp_excess[i], verdict.vtp_se[i]
        );
    }
}
