//! Plain versus counterdiabatic driving at a speed where the plain drive is
//! far from adiabatic.
//!
//! Usage: `cargo run --release --example counterdiabatic [T]`

use geodrive::models::bolza_qubit;
use geodrive::response::{run_response, ResponseKind, ResponseSetup};
use geodrive::trajectories::{BolzaSpec, Direction, GeodesicSpec};
use num_complex::Complex64;

fn main() -> geodrive::Result<()> {
    let t_max: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500.0);
    let model = bolza_qubit(0.5)?;
    let drive = GeodesicSpec::Bolza(BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 0.5, t_max, 0.01));
    for (name, kind) in [("plain", ResponseKind::Hdqs), ("counterdiabatic", ResponseKind::Counterdiabatic { band: 1 })] {
        let setup = ResponseSetup { drive: drive.clone(), kind, dt: 0.01, band: 1, record_stride: 1000, target: Some(1.0) };
        let out = run_response(&model, &setup)?;
        println!(
            "{name:>16}: w(T) = {:+.4}, band infidelity {:.3e}, |w - 1| < 0.15 from T = {:?}",
            out.final_value(),
            1.0 - out.min_fidelity,
            out.curve.plateau_time(1.0, 0.15)
        );
    }
    Ok(())
}
