//! Geodesic drives on the Bolza surface and on the flat manifolds.
//!
//! Usage: `cargo run --example geodesics [T]`

use std::f64::consts::PI;

use geodrive::trajectories::{
    flat_samples, BolzaPropagator, BolzaSpec, Direction, FlatManifold, FlatSpec,
};
use num_complex::Complex64;
use rug::Float;

fn main() -> geodrive::Result<()> {
    let t_max: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50.0);

    let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 1.0, t_max, 0.01);
    println!("bolza: lambda = 1, T = {t_max}, {} digits", spec.digits());
    let mut prop = BolzaPropagator::new(&spec)?;
    let mut last = None;
    for (k, s) in prop.by_ref().enumerate() {
        let s = s?;
        if k % 1000 == 0 {
            println!("  t = {:7.2}  z = {:+.6}  word length {}", s.t, s.z(), s.word_len);
        }
        last = Some(s);
    }
    let energy = Float::with_val(64, prop.phase().energy() - 0.5f64);
    println!("  final z = {:+.12}", last.unwrap().z());
    println!("  side crossings: {}", prop.crossings().len());
    println!("  energy - 1/2 at working precision: {:e}", energy.to_f64());

    for manifold in [FlatManifold::Torus, FlatManifold::Klein, FlatManifold::Rp2] {
        let theta0 = match manifold {
            FlatManifold::Klein => [0.0, -PI],
            _ => [0.0, 0.0],
        };
        let spec = FlatSpec { manifold, theta0, omega: [1.0, 0.5 * (1.0 + 5f64.sqrt())], t_max: 10.0, dt: 2.5 };
        println!("{manifold:?}:");
        for s in flat_samples(&spec)? {
            println!(
                "  t = {:5.2}  theta = ({:+.4}, {:+.4})  velocity = ({:+.3}, {:+.3})  crossings {:?}",
                s.t, s.x[0], s.x[1], s.velocity[0], s.velocity[1], s.crossings
            );
        }
    }
    Ok(())
}
