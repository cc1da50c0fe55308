//! Quadrupolar Chern number on RP^2 and the response that measures it.
//!
//! Usage: `cargo run --release --example rp2_quadrupole [T]`

use std::f64::consts::PI;

use geodrive::experiment::{default_theta0, GOLDEN};
use geodrive::models::rp2_qubit;
use geodrive::response::{run_response, ResponseKind, ResponseSetup};
use geodrive::topology::quadrupole_chern;
use geodrive::trajectories::{FlatManifold, FlatSpec, GeodesicSpec, Manifold};

fn main() -> geodrive::Result<()> {
    let t_max: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20000.0);
    let unit = 0.5 * PI * PI;
    for m in [1.0, 2.5, 4.0] {
        let model = rp2_qubit(m)?;
        let q = quadrupole_chern(&model, 1, [200, 200])?;
        let drive = FlatSpec {
            manifold: FlatManifold::Rp2,
            theta0: default_theta0(Manifold::Rp2),
            omega: [0.02, GOLDEN * 0.02],
            t_max,
            dt: 0.01,
        };
        let setup = ResponseSetup {
            drive: GeodesicSpec::Flat(drive),
            kind: ResponseKind::Rp2,
            dt: 0.01,
            band: 1,
            record_stride: usize::MAX,
            target: Some(q.value),
        };
        let mu = run_response(&model, &setup)?.final_value();
        println!("m = {m}: Q = {:.5} ({} x pi^2/2), mu(T) = {:.4} ({:.3} x pi^2/2)", q.value, q.quanta(), mu, mu / unit);
    }
    Ok(())
}
