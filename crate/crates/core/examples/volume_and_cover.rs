//! Closed-form volumes of the multiplicative target sets and the dyadic
//! box covers that approximate them.

use mdalab::approx::ApproxFunction;
use mdalab::decomposition::{outer_cover, verify_property_p, AdmissibleSystem};
use mdalab::volume::{hyperbolic_volume, lambda_a_times};
use rand::SeedableRng;

fn main() {
    for k in 1..=4 {
        let v: Vec<String> = [1e-1, 1e-3, 1e-6].iter().map(|&r| format!("{:.4e}", hyperbolic_volume(k, r).unwrap())).collect();
        println!("k={k}  V(0.1), V(1e-3), V(1e-6) = {}", v.join(", "));
    }

    let k = 3;
    let psi = ApproxFunction::log_power(4.0);
    let system = AdmissibleSystem::new(&psi, 0.2, 7, k, vec![0.0; k]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    println!("\n   n  lambda(A_n)  inner cover  boxes  outer boxes  property-P misses");
    for n in [8u64, 16, 32, 64] {
        let inner = system.boxes(n);
        let outer = outer_cover(n, &psi, k, &[0.0; 3]);
        println!(
            "{n:4}  {:.4e}   {:.4e}  {:5}  {:11}  {}",
            lambda_a_times(k, n, &psi).unwrap(),
            system.lambda(n),
            inner.len(),
            outer.len(),
            verify_property_p(&inner, 2000, &mut rng)
        );
    }
}
