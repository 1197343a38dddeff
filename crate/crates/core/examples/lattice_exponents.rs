//! Diophantine exponents from continued fractions and from brute-force
//! record searches.

use mdalab::lattice::{continued_fraction, liouville_records, omega_fit, omega_from_convergents, ExponentKind};
use mdalab::precise::{Precise, PreciseConfig};

fn main() {
    let sqrt2 = Precise::sqrt_int(2, PreciseConfig::default());
    let cf = continued_fraction(&sqrt2, 12).unwrap();
    let q: Vec<String> = cf.quotients.iter().map(|a| a.to_string()).collect();
    println!("sqrt 2 = [{}]", q.join("; "));
    let est = omega_from_convergents(&sqrt2, 40).unwrap();
    println!("omega(sqrt 2) from convergents: {:.3}", est.exponent);

    let x: Vec<f64> = [2.0f64, 3.0].iter().map(|v| v.sqrt()).collect();
    for kind in [ExponentKind::Simultaneous, ExponentKind::Dual, ExponentKind::Multiplicative] {
        let est = omega_fit(kind, &x, 4000).unwrap();
        println!(
            "(sqrt 2, sqrt 3) {kind:?}: omega ~ {:.3} (Dirichlet {:.3}, stable {})",
            est.exponent,
            kind.trivial_bound(2),
            est.stable
        );
    }
    let liou = liouville_records(4);
    println!("Liouville number: {} records, exponent {:.2}", liou.records.len(), liou.exponent);
}
