//! Fourier decay of a curved sphere-cap measure and of a flat hyperplane
//! patch along a cone of directions.

use mdalab::measures::{Measure, cone_directions, decay_fit, HyperplaneSpec, SurfacePatch};
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let cap = SurfacePatch::sphere_cap(3, 0.4, 0.3).unwrap();
    let dirs = cone_directions(3, 0.3, 8, &mut rng);
    let fit = decay_fit(&cap, &dirs, 16.0, 5, 6).unwrap();
    println!("sphere cap:  sigma = {:.3} +/- {:.3} (curved target 1.0)", fit.sigma, fit.band);

    let alpha = vec![1.0, 2.0f64.sqrt(), 3.0f64.sqrt()];
    let plane = HyperplaneSpec::through_centre(alpha.clone(), 0.05).unwrap();
    let norm = alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
    for r in [16.0, 256.0, 4096.0] {
        let xi: Vec<f64> = alpha.iter().map(|v| r * v / norm).collect();
        println!("hyperplane along its normal, R = {r:6.0}: |mu^| = {:.3e}", plane.fourier(&xi).unwrap().norm());
    }
    let dirs = cone_directions(3, 0.3, 8, &mut rng);
    let fit = decay_fit(&plane, &dirs, 16.0, 5, 6).unwrap();
    println!("hyperplane:  sigma = {:.3} +/- {:.3} (cone about e_k, off the normal)", fit.sigma, fit.band);
    for (r, m) in fit.frequencies.iter().zip(&fit.magnitudes) {
        println!("  R = {r:8.1}  max |mu^| = {m:.3e}");
    }
}
