//! Chern number of the upper Bolza band across the transition at |epsilon| = 1.
//!
//! Usage: `cargo run --example chern_sweep [resolution]`

use geodrive::models::{bolza_qubit, gap_report, ParentHamiltonian, SampleGrid};
use geodrive::topology::chern_bolza;
use geodrive::trajectories::Manifold;

fn main() -> geodrive::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    println!("{:>6} {:>10} {:>10} {:>12}", "eps", "min gap", "C", "residue");
    for eps in [-2.0, -1.5, -0.5, 0.5, 1.5, 2.0] {
        let model = bolza_qubit(eps)?;
        let gap = gap_report(&model, &SampleGrid::for_manifold(Manifold::Bolza, 64, 64), 1e-6)?.min_gap();
        let c = chern_bolza(&model, 1, n)?;
        println!("{eps:>6} {gap:>10.4} {:>10.6} {:>12.2e}   ({})", c.value, c.residue, model.name());
    }
    Ok(())
}
