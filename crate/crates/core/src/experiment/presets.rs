//! Built-in parameter sets for the published figures.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::run::{run_config, RunManifest};
use crate::io::write_json;
use crate::{Error, Result};

pub const PRESETS: [&str; 7] = [
    "fig4-chern",
    "fig4-response",
    "fig5-dipolar",
    "fig5-response",
    "si-rp2",
    "si-ergodicity",
    "si-gt",
];

pub const GOLDEN: f64 = 1.618_033_988_749_895;

/// Knobs a preset exposes beyond the published values.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetOptions {
    /// Horizon of the flat-manifold responses; must satisfy `omega_x T >= 400`.
    pub flat_t_max: f64,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self { flat_t_max: 20_000.0 }
    }
}

#[derive(Clone, Debug)]
pub struct PresetRun {
    pub label: String,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn within(name: impl Into<String>, value: Option<f64>, target: f64, tolerance: f64) -> Self {
        let pass = value.is_some_and(|v| (v - target).abs() < tolerance);
        Self { name: name.into(), value, target, tolerance, pass }
    }

    fn below(name: impl Into<String>, value: Option<f64>, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: bound,
            tolerance: 0.0,
            pass: value.is_some_and(|v| v < bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PresetReport {
    pub preset: String,
    pub version: String,
    pub wall_time_s: f64,
    pub runs: Vec<(String, RunManifest)>,
    pub checks: Vec<Check>,
}

impl PresetReport {
    pub fn manifest(&self, label: &str) -> Option<&RunManifest> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, m)| m)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn bolza_drive(lambda: f64) -> Value {
    json!({"lambda": lambda, "z0": [0.0, 0.0], "direction": {"pi_fraction": [1, 9]}})
}

fn flat_drive(manifold: &str) -> Value {
    let wx = 0.02;
    let theta0 = if manifold == "klein" { json!([-PI, -PI]) } else { json!([0.0, 0.0]) };
    json!({"omega": [wx, GOLDEN * wx], "theta0": theta0})
}

/// The runs making up a preset, with outputs under `out/<name>/`.
pub fn preset_runs(name: &str, out: &Path, opts: &PresetOptions) -> Result<Vec<PresetRun>> {
    let dir = out.join(name);
    let prefix = |label: &str| dir.join(label).display().to_string();
    let mut docs: Vec<(String, Value)> = Vec::new();
    let mut add = |label: String, v: Value| docs.push((label, v));
    match name {
        "fig4-chern" => {
            for eps in [-2.0, -1.5, -0.5, 0.5, 1.5, 2.0] {
                let label = format!("chern_eps{eps}");
                add(label.clone(), json!({
                    "kind": "invariant", "manifold": "bolza",
                    "model": {"name": "bolza_qubit", "epsilon": eps},
                    "numerics": {"grid": [200, 200], "band": 1},
                    "output": {"prefix": prefix(&label)}
                }));
            }
        }
        "fig4-response" => {
            for (tag, lambda) in [("10", 0.1), ("20", 0.05), ("40", 0.025)] {
                for eps in [0.5, 1.5] {
                    let label = format!("hdqs_eps{eps}_lambda1_{tag}");
                    add(label.clone(), json!({
                        "kind": "response", "manifold": "bolza",
                        "model": {"name": "bolza_qubit", "epsilon": eps},
                        "drive": bolza_drive(lambda),
                        "numerics": {"t_max": 2000.0, "dt": 0.01, "band": 1, "record_stride": 100},
                        "output": {"prefix": prefix(&label)}
                    }));
                }
            }
            add("fast_eps0.5_lambda1_2".into(), json!({
                "kind": "evolve", "manifold": "bolza",
                "model": {"name": "bolza_qubit", "epsilon": 0.5},
                "drive": bolza_drive(0.5),
                "numerics": {"t_max": 200.0, "dt": 0.01, "band": 1, "record_stride": 10},
                "output": {"prefix": prefix("fast_eps0.5_lambda1_2")}
            }));
            add("cd_eps0.5_lambda1_2".into(), json!({
                "kind": "response", "manifold": "bolza",
                "model": {"name": "bolza_qubit", "epsilon": 0.5},
                "drive": bolza_drive(0.5),
                "numerics": {"t_max": 500.0, "dt": 0.01, "band": 1, "record_stride": 100, "counterdiabatic": true},
                "output": {"prefix": prefix("cd_eps0.5_lambda1_2")}
            }));
        }
        "fig5-dipolar" | "fig5-response" => {
            let response = name == "fig5-response";
            for m in [0.5, 2.0, 4.0] {
                let label = format!("{}_m{m}", if response { "klein_response" } else { "dipolar" });
                let v = if response {
                    json!({
                        "kind": "response", "manifold": "klein",
                        "model": {"name": "klein_qubit", "m": m},
                        "drive": flat_drive("klein"),
                        "numerics": {"t_max": opts.flat_t_max, "dt": 0.01, "band": 1, "record_stride": 1000},
                        "output": {"prefix": prefix(&label)}
                    })
                } else {
                    json!({
                        "kind": "invariant", "manifold": "klein",
                        "model": {"name": "klein_qubit", "m": m},
                        "numerics": {"grid": [400, 200], "band": 1},
                        "output": {"prefix": prefix(&label)}
                    })
                };
                add(label, v);
            }
        }
        "si-rp2" => {
            for m in [1.0, 2.5, 4.0] {
                let label = format!("quadrupole_m{m}");
                add(label.clone(), json!({
                    "kind": "invariant", "manifold": "rp2",
                    "model": {"name": "rp2_qubit", "m": m},
                    "numerics": {"grid": [200, 200], "band": 1},
                    "output": {"prefix": prefix(&label)}
                }));
            }
            for m in [1.0, 4.0] {
                let label = format!("rp2_response_m{m}");
                add(label.clone(), json!({
                    "kind": "response", "manifold": "rp2",
                    "model": {"name": "rp2_qubit", "m": m},
                    "drive": flat_drive("rp2"),
                    "numerics": {"t_max": opts.flat_t_max, "dt": 0.01, "band": 1, "record_stride": 1000},
                    "output": {"prefix": prefix(&label)}
                }));
            }
        }
        "si-ergodicity" => {
            add("ergodicity".into(), json!({
                "kind": "ergodicity", "manifold": "bolza",
                "drive": bolza_drive(1.0),
                "numerics": {"t_max": 2000.0, "dt": 0.01, "radius": 0.6, "bins": 36, "horizon_step": 10.0},
                "output": {"prefix": prefix("ergodicity")}
            }));
        }
        "si-gt" => {
            for (tag, lambda) in [("20", 0.05), ("40", 0.025)] {
                let label = format!("g_lambda1_{tag}");
                add(label.clone(), json!({
                    "kind": "evolve", "manifold": "bolza",
                    "model": {"name": "bolza_qubit", "epsilon": 0.5},
                    "drive": bolza_drive(lambda),
                    "numerics": {"t_max": 100.0 / lambda, "dt": 0.01, "band": 1, "record_stride": 100, "g_correction": true},
                    "output": {"prefix": prefix(&label)}
                }));
            }
        }
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
            ))
        }
    }
    docs.into_iter()
        .map(|(label, v)| {
            Ok(PresetRun {
                label,
                config: ExperimentConfig::from_value(&v, None)?,
            })
        })
        .collect()
}

fn metric(report: &[(String, RunManifest)], label: &str, key: &str) -> Option<f64> {
    report.iter().find(|(l, _)| l == label).and_then(|(_, m)| m.metric(key))
}

fn checks(name: &str, runs: &[(String, RunManifest)]) -> Vec<Check> {
    let get = |label: &str, key: &str| metric(runs, label, key);
    let mut c = Vec::new();
    match name {
        "fig4-chern" => {
            for eps in [-0.5, 0.5, 1.5, 2.0] {
                let l = format!("chern_eps{eps}");
                let expected = if f64::abs(eps) < 1.0 { 1.0 } else { 0.0 };
                c.push(Check::within(format!("C(eps={eps})"), get(&l, "value"), expected, 1e-3));
            }
        }
        "fig4-response" => {
            let plain = "hdqs_eps0.5_lambda1_20";
            c.push(Check::within("w(2000), eps=0.5, lambda=1/20", get(plain, "final_value"), 1.0, 0.15));
            c.push(Check::within("w(2000), eps=1.5, lambda=1/20", get("hdqs_eps1.5_lambda1_20", "final_value"), 0.0, 0.15));
            c.push(Check::below("norm error, lambda=1/20", get(plain, "max_norm_error"), 1e-9));
            c.push(Check::below("infidelity, lambda=1/20", get(plain, "min_fidelity").map(|f| 1.0 - f), 0.01));
            c.push(Check::below("min fidelity, lambda=1/2", get("fast_eps0.5_lambda1_2", "min_fidelity"), 0.9));
            let cd = "cd_eps0.5_lambda1_2";
            c.push(Check::within("w_CD(500), eps=0.5, lambda=1/2", get(cd, "final_value"), 1.0, 0.05));
            c.push(Check::below("counterdiabatic infidelity", get(cd, "min_fidelity").map(|f| 1.0 - f), 1e-8));
            // plain plateau not reached counts as the full horizon
            let t_plain = get(plain, "plateau_time_0.15").or(get(plain, "final_T"));
            let t_cd = get(cd, "plateau_time_0.15");
            c.push(Check {
                name: "plateau speedup (plain / counterdiabatic)".into(),
                value: t_plain.zip(t_cd).map(|(a, b)| a / b),
                target: 3.0,
                tolerance: 0.0,
                pass: t_plain.zip(t_cd).is_some_and(|(a, b)| a >= 3.0 * b),
            });
        }
        "fig5-dipolar" => {
            for (m, d) in [(0.5, PI), (2.0, 0.5 * PI), (4.0, 0.0)] {
                let v = get(&format!("dipolar_m{m}"), "value").map(f64::abs);
                c.push(Check::within(format!("|D_y|(m={m})"), v, d, 0.01 * PI));
            }
        }
        "fig5-response" => {
            for (m, d) in [(0.5, PI), (2.0, 0.5 * PI), (4.0, 0.0)] {
                let v = get(&format!("klein_response_m{m}"), "final_value").map(f64::abs);
                c.push(Check::within(format!("|nu(T)|(m={m})"), v, d, 0.15 * 0.5 * PI));
            }
        }
        "si-rp2" => {
            let q = 0.5 * PI * PI;
            c.push(Check::within("Q(m=1)", get("quadrupole_m1", "value"), q, 0.02 * q));
            c.push(Check::within("Q(m=4)", get("quadrupole_m4", "value"), 0.0, 0.02 * q));
            for m in [1.0, 4.0] {
                let l = format!("rp2_response_m{m}");
                let target = get(&l, "target_invariant").unwrap_or(f64::NAN);
                c.push(Check::within(format!("mu(T)(m={m})"), get(&l, "final_value"), target, 0.15 * q));
            }
        }
        "si-ergodicity" => {
            let exact = get("ergodicity", "exact_area").unwrap_or(f64::NAN);
            c.push(Check::within("S_est(2000)", get("ergodicity", "final_estimate"), exact, 0.05 * exact));
            let early = get("ergodicity", "early_mean_abs_error");
            c.push(Check::below("late-time error", get("ergodicity", "final_abs_error"), early.unwrap_or(f64::NAN)));
            c.push(Check::below("max bin deviation", get("ergodicity", "max_bin_deviation"), 0.15));
        }
        "si-gt" => {
            let a = get("g_lambda1_20", "max_abs_g");
            let b = get("g_lambda1_40", "max_abs_g");
            let ratio = a.zip(b).map(|(a, b)| a / b);
            c.push(Check::within("max|G| ratio lambda=1/20 vs 1/40", ratio, 2.0, 0.5));
            for l in ["g_lambda1_20", "g_lambda1_40"] {
                let growth = get(l, "max_abs_g_last_quarter")
                    .zip(get(l, "max_abs_g_third_quarter"))
                    .map(|(x, y)| x / y);
                c.push(Check::below(format!("late growth of max|G| ({l})"), growth, 1.2));
            }
        }
        _ => {}
    }
    c
}

/// Runs a preset on `jobs` threads (all cores by default) and writes
/// `summary.json` and `manifest.json` into `out/<name>/`.
pub fn run_preset(name: &str, out: &Path, jobs: Option<usize>, opts: &PresetOptions) -> Result<PresetReport> {
    let runs = preset_runs(name, out, opts)?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Numeric(e.to_string()))?;
    let results: Vec<(String, RunManifest)> = pool.install(|| {
        runs.par_iter()
            .map(|r| Ok((r.label.clone(), run_config(&r.config)?)))
            .collect::<Result<_>>()
    })?;
    let report = PresetReport {
        preset: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        checks: checks(name, &results),
        runs: results,
    };
    let dir: PathBuf = out.join(name);
    let summary = json!({
        "preset": name,
        "checks": report.checks,
        "runs": report.runs.iter().map(|(l, m)| json!({"label": l, "metrics": m.metrics})).collect::<Vec<_>>(),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    write_json(&dir.join("manifest.json"), &report)?;
    Ok(report)
}
