//! Plot-ready CSV and JSON artifacts.
//!
//! Numbers are written in the shortest representation that parses back to
//! the same double, so files are exact and byte-stable. Lines end in `\n`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::ergodicity::AngleHistogram;
use crate::response::{ResponseCurve, StatePoint};
use crate::topology::{BerryField, InvariantResult};
use crate::trajectories::{Manifold, Trajectory};
use crate::Result;

/// Shortest round-trip decimal form of `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn row(w: &mut impl Write, cells: &[f64]) -> std::io::Result<()> {
    let line: Vec<String> = cells.iter().map(|&v| fmt_f64(v)).collect();
    writeln!(w, "{}", line.join(","))
}

/// `t,re_z,im_z,re_p,im_p,word_len` for Bolza drives, otherwise
/// `t,theta_x,theta_y,vx,vy,nx,ny`. Every `stride`-th sample is written.
pub fn write_trajectory_csv(w: &mut impl Write, traj: &Trajectory, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    if traj.manifold == Manifold::Bolza {
        writeln!(w, "t,re_z,im_z,re_p,im_p,word_len")?;
        for s in traj.samples.iter().step_by(stride) {
            let head: Vec<String> = [s.t, s.x[0], s.x[1], s.momentum[0], s.momentum[1]]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect();
            writeln!(w, "{},{}", head.join(","), s.word_len)?;
        }
    } else {
        writeln!(w, "t,theta_x,theta_y,vx,vy,nx,ny")?;
        for s in traj.samples.iter().step_by(stride) {
            let head: Vec<String> = [s.t, s.x[0], s.x[1], s.velocity[0], s.velocity[1]]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect();
            writeln!(w, "{},{},{}", head.join(","), s.crossings[0], s.crossings[1])?;
        }
    }
    Ok(())
}

/// `t,fidelity,norm,re_a0,im_a0,...`.
pub fn write_states_csv(w: &mut impl Write, states: &[StatePoint]) -> Result<()> {
    let dim = states.first().map_or(0, |s| s.amplitudes.len());
    let mut header = vec!["t".to_string(), "fidelity".into(), "norm".into()];
    for k in 0..dim {
        header.push(format!("re_a{k}"));
        header.push(format!("im_a{k}"));
    }
    writeln!(w, "{}", header.join(","))?;
    for s in states {
        let mut cells = vec![s.t, s.fidelity, s.norm];
        cells.extend(s.amplitudes.iter().flatten());
        row(w, &cells)?;
    }
    Ok(())
}

/// `T,expectation,running_average`.
pub fn write_response_csv(w: &mut impl Write, curve: &ResponseCurve) -> Result<()> {
    writeln!(w, "T,expectation,running_average")?;
    for k in 0..curve.horizons.len() {
        row(w, &[curve.horizons[k], curve.expectation[k], curve.running_average[k]])?;
    }
    Ok(())
}

/// `x1,x2,omega` at plaquette centres.
pub fn write_curvature_csv(w: &mut impl Write, field: &BerryField) -> Result<()> {
    writeln!(w, "x1,x2,omega")?;
    for r in field.rows() {
        row(w, &r)?;
    }
    Ok(())
}

/// `T,S_est`.
pub fn write_area_csv(w: &mut impl Write, estimates: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "T,S_est")?;
    for &(t, s) in estimates {
        row(w, &[t, s])?;
    }
    Ok(())
}

/// `bin_center,count,density`.
pub fn write_histogram_csv(w: &mut impl Write, h: &AngleHistogram) -> Result<()> {
    writeln!(w, "bin_center,count,density")?;
    for ((c, n), d) in h.centers().iter().zip(&h.counts).zip(h.density()) {
        writeln!(w, "{},{},{}", fmt_f64(*c), n, fmt_f64(d))?;
    }
    Ok(())
}

/// `t,abs_g`.
pub fn write_g_csv(w: &mut impl Write, g: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "t,abs_g")?;
    for &(t, v) in g {
        row(w, &[t, v])?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseSummary {
    #[serde(rename = "final_T")]
    pub final_t: f64,
    pub final_value: f64,
    pub target_invariant: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantSummary {
    pub value: f64,
    pub nearest_quantum: f64,
    pub residue: f64,
    pub grid: [usize; 2],
}

impl From<&InvariantResult> for InvariantSummary {
    fn from(r: &InvariantResult) -> Self {
        Self {
            value: r.value,
            nearest_quantum: r.nearest_quantum,
            residue: r.residue,
            grid: r.grid,
        }
    }
}

/// Creates `path` (and its parent directories) and fills it with `f`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectories::{FlatManifold, FlatSpec, GeodesicSpec};

    #[test]
    fn round_trip_format() {
        for v in [0.1, 1.0, -2.5e-20, 1e300, std::f64::consts::PI] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn torus_csv_layout() {
        let spec = GeodesicSpec::Flat(FlatSpec {
            manifold: FlatManifold::Torus,
            theta0: [0.0, 0.0],
            omega: [1.0, 0.0],
            t_max: 1.0,
            dt: 0.5,
        });
        let mut out = Vec::new();
        write_trajectory_csv(&mut out, &spec.collect().unwrap(), 1).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,theta_x,theta_y,vx,vy,nx,ny");
        assert_eq!(lines[2], "0.5,0.5,0.0,1.0,0.0,0,0");
        assert_eq!(lines.len(), 4);
    }
}
