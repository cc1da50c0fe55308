//! Dipolar Chern number on the Klein bottle and the matching drive response.
//!
//! Usage: `cargo run --release --example klein_response [m] [T]`

use geodrive::experiment::{default_theta0, GOLDEN};
use geodrive::models::klein_qubit;
use geodrive::response::{run_response, ResponseKind, ResponseSetup};
use geodrive::topology::dipolar_chern;
use geodrive::trajectories::{FlatManifold, FlatSpec, GeodesicSpec, Manifold};

fn arg(k: usize, default: f64) -> f64 {
    std::env::args().nth(k).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> geodrive::Result<()> {
    let (m, t_max) = (arg(1, 0.5), arg(2, 20000.0));
    let model = klein_qubit(m)?;
    let d = dipolar_chern(&model, 1, [400, 200])?;
    println!("m = {m}: D_y = {:.6} = {} x pi/2", d.value, d.quanta());

    let wx = 0.02;
    let drive = FlatSpec {
        manifold: FlatManifold::Klein,
        theta0: default_theta0(Manifold::Klein),
        omega: [wx, GOLDEN * wx],
        t_max,
        dt: 0.01,
    };
    let setup = ResponseSetup {
        drive: GeodesicSpec::Flat(drive),
        kind: ResponseKind::Klein,
        dt: 0.01,
        band: 1,
        record_stride: 200000,
        target: Some(d.value),
    };
    let out = run_response(&model, &setup)?;
    for (t, nu) in out.curve.horizons.iter().zip(&out.curve.running_average) {
        println!("  T = {t:8.0}  nu = {nu:+.4}");
    }
    Ok(())
}
