//! Running response `w(T)` of a qubit driven along a slow Bolza geodesic.
//!
//! Usage: `cargo run --release --example hdqs_response [epsilon] [lambda] [T]`

use geodrive::models::bolza_qubit;
use geodrive::response::{run_response, ResponseKind, ResponseSetup};
use geodrive::trajectories::{BolzaSpec, Direction, GeodesicSpec};
use geodrive::topology::chern_bolza;
use num_complex::Complex64;

fn arg(k: usize, default: f64) -> f64 {
    std::env::args().nth(k).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> geodrive::Result<()> {
    let (eps, lambda, t_max) = (arg(1, 0.5), arg(2, 0.05), arg(3, 500.0));
    let model = bolza_qubit(eps)?;
    let chern = chern_bolza(&model, 1, 100)?;
    let setup = ResponseSetup {
        drive: GeodesicSpec::Bolza(BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), lambda, t_max, 0.01)),
        kind: ResponseKind::Hdqs,
        dt: 0.01,
        band: 1,
        record_stride: 5000,
        target: Some(chern.value.round()),
    };
    let out = run_response(&model, &setup)?;
    println!("eps = {eps}, lambda = {lambda}, C = {}", chern.value.round());
    for (t, w) in out.curve.horizons.iter().zip(&out.curve.running_average) {
        println!("  T = {t:8.1}  w = {w:+.4}");
    }
    println!("min band fidelity {:.6}, norm error {:.1e}", out.min_fidelity, out.max_norm_error);
    Ok(())
}
