use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, Kind};
use crate::ergodicity::ergodicity_report;
use crate::evolution::g_correction;
use crate::io::{
    write_area_csv, write_curvature_csv, write_file, write_g_csv, write_histogram_csv, write_json,
    write_response_csv, write_states_csv, write_trajectory_csv, InvariantSummary, ResponseSummary,
};
use crate::models::{ModelSpec, ParentHamiltonian};
use crate::response::{run_response, ResponseKind, ResponseSetup};
use crate::topology::{
    chern_bolza, dipolar_chern, plaquette_field, quadrupole_chern, InvariantResult,
    BOLZA_CHERN_RADIUS,
};
use crate::models::SampleGrid;
use crate::trajectories::Manifold;
use crate::{Error, Result};

/// Record of one completed run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: Value,
    pub version: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub metrics: Map<String, Value>,
}

impl RunManifest {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

struct Outputs<'a> {
    cfg: &'a ExperimentConfig,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, suffix: &str) -> PathBuf {
        let p = self.cfg.output_path(suffix);
        self.files.push(p.display().to_string());
        p
    }
}

/// Static invariant of the configured model on the given grid.
pub fn invariant_of(model: &dyn ParentHamiltonian, manifold: Manifold, band: usize, grid: [usize; 2]) -> Result<InvariantResult> {
    match manifold {
        Manifold::Bolza => chern_bolza(model, band, grid[0]),
        Manifold::Klein => dipolar_chern(model, band, grid),
        Manifold::Rp2 => quadrupole_chern(model, band, grid),
        Manifold::Torus => Err(Error::Unsupported("no invariant is tabulated on the torus".into())),
    }
}

fn model_of(cfg: &ExperimentConfig) -> Result<(ModelSpec, Box<dyn ParentHamiltonian>)> {
    let spec = cfg
        .model
        .clone()
        .ok_or_else(|| Error::config("model", "missing required field"))?;
    let model = spec.build()?;
    Ok((spec, model))
}

fn response_kind(cfg: &ExperimentConfig) -> Result<ResponseKind> {
    if cfg.numerics.counterdiabatic {
        Ok(ResponseKind::Counterdiabatic { band: cfg.numerics.band })
    } else {
        ResponseKind::for_manifold(cfg.manifold)
    }
}

fn insert(m: &mut Map<String, Value>, key: &str, v: impl Serialize) {
    m.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
}

/// Max of `|G|` over the last two quarters of a series.
pub fn late_quarter_maxima(g: &[(f64, f64)]) -> (f64, f64) {
    let n = g.len();
    let max = |a: &[(f64, f64)]| a.iter().map(|x| x.1).fold(0.0, f64::max);
    (max(&g[n / 2..(3 * n) / 4]), max(&g[(3 * n) / 4..]))
}

/// Runs a validated config, writes its artifacts and manifest.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let mut out = Outputs { cfg, files: Vec::new() };
    let mut metrics = Map::new();
    let n = &cfg.numerics;
    match cfg.kind {
        Kind::Trajectory => {
            let traj = cfg.geodesic()?.expect("validated drive").collect()?;
            write_file(&out.path("trajectory.csv"), |w| write_trajectory_csv(w, &traj, n.record_stride))?;
            insert(&mut metrics, "samples", traj.len());
            insert(&mut metrics, "final_t", traj.duration());
            if let Some(s) = traj.samples.last() {
                insert(&mut metrics, "final_word_len", s.word_len);
            }
        }
        Kind::Evolve | Kind::Response => {
            let (_, model) = model_of(cfg)?;
            let drive = cfg.geodesic()?.expect("validated drive");
            let kind = response_kind(cfg)?;
            let target = if cfg.kind == Kind::Response {
                Some(invariant_of(model.as_ref(), cfg.manifold, n.band, cfg.grid())?)
            } else {
                None
            };
            let setup = ResponseSetup {
                drive: drive.clone(),
                kind,
                dt: n.dt,
                band: n.band,
                record_stride: n.record_stride,
                target: target.as_ref().map(|t| t.nearest_quantum),
            };
            let res = run_response(model.as_ref(), &setup)?;
            write_file(&out.path("states.csv"), |w| write_states_csv(w, &res.states))?;
            insert(&mut metrics, "steps", res.steps);
            insert(&mut metrics, "min_fidelity", res.min_fidelity);
            insert(&mut metrics, "max_norm_error", res.max_norm_error);
            if cfg.kind == Kind::Response {
                write_file(&out.path("response.csv"), |w| write_response_csv(w, &res.curve))?;
                let final_value = res.final_value();
                let target = target.expect("response target");
                let abs_error = if cfg.manifold == Manifold::Klein {
                    (final_value.abs() - target.nearest_quantum.abs()).abs()
                } else {
                    (final_value - target.nearest_quantum).abs()
                };
                let summary = ResponseSummary {
                    final_t: res.curve.final_horizon().unwrap_or(0.0),
                    final_value,
                    target_invariant: Some(target.nearest_quantum),
                    abs_error: Some(abs_error),
                };
                write_json(&out.path("summary.json"), &summary)?;
                insert(&mut metrics, "final_T", summary.final_t);
                insert(&mut metrics, "final_value", final_value);
                insert(&mut metrics, "target_invariant", target.nearest_quantum);
                insert(&mut metrics, "invariant_value", target.value);
                insert(&mut metrics, "abs_error", abs_error);
                for tol in [0.05, 0.15] {
                    let tgt = if cfg.manifold == Manifold::Klein && final_value < 0.0 {
                        -target.nearest_quantum.abs()
                    } else if cfg.manifold == Manifold::Klein {
                        target.nearest_quantum.abs()
                    } else {
                        target.nearest_quantum
                    };
                    let scale = if cfg.manifold == Manifold::Bolza { 1.0 } else { target.quantization_unit };
                    insert(&mut metrics, &format!("plateau_time_{tol}"), res.curve.plateau_time(tgt, tol * scale));
                }
            }
            if n.g_correction {
                let m = 1 - n.band;
                let g = g_correction(model.as_ref(), drive.samples()?, m, n.band, n.record_stride)?;
                write_file(&out.path("g.csv"), |w| write_g_csv(w, &g))?;
                let max = g.iter().map(|x| x.1).fold(0.0, f64::max);
                let (q3, q4) = late_quarter_maxima(&g);
                insert(&mut metrics, "max_abs_g", max);
                insert(&mut metrics, "max_abs_g_third_quarter", q3);
                insert(&mut metrics, "max_abs_g_last_quarter", q4);
            }
        }
        Kind::Invariant => {
            let (_, model) = model_of(cfg)?;
            let grid = cfg.grid();
            let inv = invariant_of(model.as_ref(), cfg.manifold, n.band, grid)?;
            let chart = if cfg.manifold == Manifold::Bolza {
                let r = BOLZA_CHERN_RADIUS;
                SampleGrid::new([-r, r], [-r, r], grid[0], grid[0])
            } else {
                SampleGrid::for_manifold(cfg.manifold, grid[0], grid[1])
            };
            let field = plaquette_field(model.as_ref(), n.band, &chart)?;
            write_file(&out.path("curvature.csv"), |w| write_curvature_csv(w, &field))?;
            write_json(&out.path("invariant.json"), &InvariantSummary::from(&inv))?;
            insert(&mut metrics, "value", inv.value);
            insert(&mut metrics, "nearest_quantum", inv.nearest_quantum);
            insert(&mut metrics, "quantization_unit", inv.quantization_unit);
            insert(&mut metrics, "residue", inv.residue);
            insert(&mut metrics, "quanta", inv.quanta());
        }
        Kind::Ergodicity => {
            let traj = cfg.geodesic()?.expect("validated drive").collect()?;
            let t_max = n.t_max.expect("validated horizon");
            let steps = (t_max / n.horizon_step).floor() as usize;
            let mut horizons: Vec<f64> = (1..=steps).map(|k| k as f64 * n.horizon_step).collect();
            if horizons.last().is_none_or(|&h| h < traj.duration()) {
                horizons.push(traj.duration());
            }
            let report = ergodicity_report(&traj.samples, n.radius, &horizons, n.bins)?;
            write_file(&out.path("area.csv"), |w| write_area_csv(w, &report.estimates))?;
            write_file(&out.path("histogram.csv"), |w| write_histogram_csv(w, &report.histogram))?;
            let (final_t, final_s) = report.final_estimate().expect("nonempty horizons");
            let late = (final_s - report.exact_area).abs();
            let summary = json!({
                "exact_area": report.exact_area,
                "final_T": final_t,
                "final_estimate": final_s,
                "relative_error": report.relative_error(),
                "early_mean_abs_error": report.mean_abs_error(100.0, 200.0),
                "final_abs_error": late,
                "chi_square": report.histogram.chi_square,
                "p_value": report.histogram.p_value,
                "max_bin_deviation": report.histogram.max_deviation,
                "region_samples": report.histogram.total(),
            });
            write_json(&out.path("summary.json"), &summary)?;
            if let Value::Object(m) = summary {
                metrics.extend(m);
            }
        }
    }
    let manifest_path = out.path("manifest.json");
    let manifest = RunManifest {
        config: serde_json::to_value(cfg)?,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        files: out.files,
        metrics,
    };
    write_json(&manifest_path, &manifest)?;
    Ok(manifest)
}

/// Loads, validates and runs the config at `path`.
pub fn run_path(path: &Path) -> Result<RunManifest> {
    run_config(&ExperimentConfig::load(path)?)
}

/// Human-readable plan for `validate`.
pub fn describe(cfg: &ExperimentConfig) -> Vec<String> {
    let kind = serde_json::to_value(cfg.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let mut lines = vec![format!("config ok: {kind} on {}", cfg.manifold)];
    if let Some(d) = cfg.numerics.digits {
        let src = match cfg.numerics.digits_source {
            Some(super::config::DigitsSource::Config) => "numerics.digits",
            Some(super::config::DigitsSource::Environment) => super::config::DIGITS_ENV,
            _ => "max(50, ceil(0.434 lambda T) + 30)",
        };
        lines.push(format!("digits = {d} ({src})"));
    }
    if let Some(s) = cfg.step_count() {
        lines.push(format!("steps = {s}"));
    }
    if matches!(cfg.kind, Kind::Invariant | Kind::Response) {
        let g = cfg.grid();
        lines.push(format!("grid = {}x{}", g[0], g[1]));
    }
    lines.push(format!("output prefix = {}", cfg.output.display()));
    lines
}
