//! Time average of a disk indicator along a unit-speed Bolza geodesic.
//!
//! Usage: `cargo run --release --example ergodicity [T] [radius]`

use geodrive::ergodicity::ergodicity_report;
use geodrive::trajectories::{BolzaPropagator, BolzaSpec, Direction};
use num_complex::Complex64;

fn arg(k: usize, default: f64) -> f64 {
    std::env::args().nth(k).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> geodrive::Result<()> {
    let (t_max, r) = (arg(1, 2000.0), arg(2, 0.6));
    let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 1.0, t_max, 0.01);
    let samples = BolzaPropagator::new(&spec)?.collect::<geodrive::Result<Vec<_>>>()?;
    let horizons: Vec<f64> = (1..=10).map(|k| t_max * k as f64 / 10.0).collect();
    let report = ergodicity_report(&samples, r, &horizons, 36)?;
    println!("exact hyperbolic area of the r = {r} disk: {:.5}", report.exact_area);
    for (t, s) in &report.estimates {
        println!("  T = {t:7.0}  S_est = {s:.5}");
    }
    let h = &report.histogram;
    println!("momentum angles in the disk: {} samples, chi2 = {:.1}, p = {:.3e}, max bin deviation {:.3}", h.total(), h.chi_square, h.p_value, h.max_deviation);
    Ok(())
}
