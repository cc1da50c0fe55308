//! First-order adiabatic correction `|G(t)|` for two drive speeds.
//!
//! Usage: `cargo run --release --example g_diagnostic`

use geodrive::evolution::g_correction;
use geodrive::experiment::late_quarter_maxima;
use geodrive::models::bolza_qubit;
use geodrive::trajectories::{BolzaPropagator, BolzaSpec, Direction};
use num_complex::Complex64;

fn main() -> geodrive::Result<()> {
    let model = bolza_qubit(0.5)?;
    let mut maxima = Vec::new();
    for lambda in [0.05, 0.025] {
        let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), lambda, 100.0 / lambda, 0.01);
        let g = g_correction(&model, BolzaPropagator::new(&spec)?, 0, 1, 100)?;
        let max = g.iter().map(|p| p.1).fold(0.0, f64::max);
        let (q3, q4) = late_quarter_maxima(&g);
        println!("lambda = {lambda}: max|G| = {max:.4}, third quarter {q3:.4}, last quarter {q4:.4}");
        maxima.push(max);
    }
    println!("ratio {:.3}", maxima[0] / maxima[1]);
    Ok(())
}
