//! Declarative runs: build a JSON config, validate it, run it, read the
//! manifest. The `geodrive` binary does the same from files.
//!
//! Usage: `cargo run --example config_run [out_dir]`

use geodrive::experiment::{describe, run_config, ExperimentConfig};
use serde_json::json;

fn main() -> geodrive::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/config_run".into());
    let v = json!({
        "kind": "invariant",
        "manifold": "klein",
        "model": {"name": "klein_qubit", "m": 2.0},
        "numerics": {"grid": [200, 100]},
        "output": {"prefix": format!("{out}/klein_m2")}
    });
    let cfg = ExperimentConfig::from_value(&v, None)?;
    for line in describe(&cfg) {
        println!("{line}");
    }
    let manifest = run_config(&cfg)?;
    println!("value = {:?}", manifest.metric("value"));
    for f in &manifest.files {
        println!("wrote {f}");
    }
    Ok(())
}
