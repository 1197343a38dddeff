//! Fourier coefficients of a smoothed dyadic window: support on the
//! lattice `nZ^k` and rapid decay beyond the dual radius.

use mdalab::bump::Profile;
use mdalab::decomposition::{BoxSpec, IntervalType};
use mdalab::fourier::WindowProduct;

fn main() {
    let n = 4;
    let spec = BoxSpec::new(n, vec![1.0 / 64.0, 1.0 / 256.0], vec![IntervalType::Half, IntervalType::Full], vec![0.0, 0.0]).unwrap();
    let w = WindowProduct::new(spec, Profile::Classic);
    println!("volume {:.6e}, spatial {:.6e}", w.volume(), w.volume_spatial());
    println!("coefficient at (1, 0): {:.3e}", w.coefficient(&[1, 0]).norm());
    for m in [0i64, 16, 64, 256, 1024, 4096] {
        let xi = [4 * m, 4 * m];
        println!(
            "xi = ({:5}, {:5})  |c| = {:.3e}  dual radius {:.2}",
            xi[0],
            xi[1],
            w.coefficient(&xi).norm(),
            w.dual_radius(&[xi[0] as f64, xi[1] as f64])
        );
    }
    println!("Parseval residual (cutoff 2048): {:.3e}", w.parseval_residual(2048));
}
