//! Berry curvature and the static invariants.
//!
//! Sign convention: `Omega = d_y A_x - d_x A_y` with `A = i <psi|d psi>`, so
//! the flux through a plaquette is `arg(U_x(k) U_y(k+x) U_x(k+y)^* U_y(k)^*)`
//! for the counterclockwise loop, `U_mu(k) = <psi(k)|psi(k+mu)>`. With this
//! sign the upper band of the `epsilon = 0.5` Bolza qubit has Chern number +1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::models::{
    eigensystem, gap_report, require_symmetry, CVector, ParentHamiltonian, SampleGrid,
};
use crate::trajectories::Manifold;
use crate::{Error, Result};

/// Smallest link overlap accepted by the plaquette method.
pub const MIN_LINK_OVERLAP: f64 = 1e-6;

/// Tolerated residual of the protecting symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Radius of the disk covered by the Bolza Chern grid.
pub const BOLZA_CHERN_RADIUS: f64 = 0.62;

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMethod {
    Plaquette,
    TwoLevel,
}

/// Curvature density per plaquette, stored row-major in `(i, j)` with
/// `j` the fast index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerryField {
    pub grid: SampleGrid,
    pub band: usize,
    pub method: CurvatureMethod,
    pub omega: Vec<f64>,
}

impl BerryField {
    pub fn cell_area(&self) -> f64 {
        let g = &self.grid;
        (g.x[1] - g.x[0]) / g.nx as f64 * (g.y[1] - g.y[0]) / g.ny as f64
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let a = self.grid.point(i, j);
        let b = self.grid.point(i + 1, j + 1);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.omega[i * self.grid.ny + j]
    }

    /// `sum w(center) Omega dA` over the plaquettes.
    pub fn weighted_integral(&self, w: impl Fn([f64; 2]) -> f64 + Sync) -> f64 {
        let ny = self.grid.ny;
        let area = self.cell_area();
        let terms: Vec<f64> = (0..self.omega.len())
            .into_par_iter()
            .map(|k| w(self.center(k / ny, k % ny)) * self.omega[k] * area)
            .collect();
        pairwise_sum(&terms)
    }

    pub fn integral(&self) -> f64 {
        self.weighted_integral(|_| 1.0)
    }

    /// Rows `(x1, x2, omega)` at plaquette centres.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        let ny = self.grid.ny;
        (0..self.omega.len())
            .map(|k| {
                let c = self.center(k / ny, k % ny);
                [c[0], c[1], self.omega[k]]
            })
            .collect()
    }
}

fn grid_index(grid: &SampleGrid, i: usize, j: usize) -> usize {
    i * (grid.ny + 1) + j
}

/// Plaquette curvature from eigenvectors on the `(nx+1) x (ny+1)` grid
/// points, ordered as [`SampleGrid::points`].
pub fn curvature_plaquette(states: &[CVector], grid: &SampleGrid, band: usize) -> Result<BerryField> {
    let (nx, ny) = (grid.nx, grid.ny);
    if nx == 0 || ny == 0 {
        return Err(Error::Input("grid needs at least one plaquette".into()));
    }
    if states.len() != (nx + 1) * (ny + 1) {
        return Err(Error::Input(format!(
            "expected {} states, got {}",
            (nx + 1) * (ny + 1),
            states.len()
        )));
    }
    let area = (grid.x[1] - grid.x[0]) / nx as f64 * (grid.y[1] - grid.y[0]) / ny as f64;
    let omega = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / ny, k % ny);
            let s = |a: usize, b: usize| &states[grid_index(grid, a, b)];
            let link = |u: &CVector, v: &CVector| -> Result<Complex64> {
                let o = u.dotc(v);
                let m = o.norm();
                if m < MIN_LINK_OVERLAP {
                    return Err(Error::Resolution {
                        overlap: m,
                        location: grid.point(i, j),
                    });
                }
                Ok(o / m)
            };
            let loop_product = link(s(i, j), s(i + 1, j))?
                * link(s(i + 1, j), s(i + 1, j + 1))?
                * link(s(i + 1, j + 1), s(i, j + 1))?
                * link(s(i, j + 1), s(i, j))?;
            Ok(loop_product.arg() / area)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BerryField {
        grid: *grid,
        band,
        method: CurvatureMethod::Plaquette,
        omega,
    })
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `Omega = s (1/2) d . (d_1 d x d_2 d)` for a unit field on grid points;
/// `s = +1` for the upper band, `-1` for the lower. Derivatives are central
/// differences at plaquette centres.
pub fn curvature_two_level(field: &[[f64; 3]], grid: &SampleGrid, band: usize) -> Result<BerryField> {
    let (nx, ny) = (grid.nx, grid.ny);
    if field.len() != (nx + 1) * (ny + 1) || nx == 0 || ny == 0 {
        return Err(Error::Input("field does not match the grid".into()));
    }
    if band > 1 {
        return Err(Error::Input(format!("two-level band index {band} out of range")));
    }
    if let Some(d) = field
        .iter()
        .find(|d| ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() - 1.0).abs() > 1e-8)
    {
        return Err(Error::Validation(format!("field {d:?} is not a unit vector")));
    }
    let sign = if band == 1 { 1.0 } else { -1.0 };
    let hx = (grid.x[1] - grid.x[0]) / nx as f64;
    let hy = (grid.y[1] - grid.y[0]) / ny as f64;
    let omega = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / ny, k % ny);
            let f = |a: usize, b: usize| field[grid_index(grid, a, b)];
            let (d00, d10, d01, d11) = (f(i, j), f(i + 1, j), f(i, j + 1), f(i + 1, j + 1));
            let mut c = [0.0; 3];
            let mut dx = [0.0; 3];
            let mut dy = [0.0; 3];
            for q in 0..3 {
                c[q] = 0.25 * (d00[q] + d10[q] + d01[q] + d11[q]);
                dx[q] = 0.5 * (d10[q] + d11[q] - d00[q] - d01[q]) / hx;
                dy[q] = 0.5 * (d01[q] + d11[q] - d00[q] - d10[q]) / hy;
            }
            let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let x = cross(dx, dy);
            sign * 0.5 * (c[0] * x[0] + c[1] * x[1] + c[2] * x[2]) / n
        })
        .collect();
    Ok(BerryField {
        grid: *grid,
        band,
        method: CurvatureMethod::TwoLevel,
        omega,
    })
}

/// Band eigenvectors of a model on every grid point.
pub fn band_states(model: &dyn ParentHamiltonian, band: usize, grid: &SampleGrid) -> Result<Vec<CVector>> {
    if band >= model.dim() {
        return Err(Error::Input(format!("band {band} out of range for dimension {}", model.dim())));
    }
    grid.points()
        .par_iter()
        .map(|&x| Ok(eigensystem(&model.evaluate(x))?.state(band)))
        .collect()
}

/// Plaquette curvature of a model band on a grid, after a gap check.
pub fn plaquette_field(model: &dyn ParentHamiltonian, band: usize, grid: &SampleGrid) -> Result<BerryField> {
    gap_report(model, grid, crate::models::DEFAULT_GAP_THRESHOLD)?.require_gapped()?;
    curvature_plaquette(&band_states(model, band, grid)?, grid, band)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantResult {
    pub value: f64,
    pub quantization_unit: f64,
    pub nearest_quantum: f64,
    pub residue: f64,
    pub grid: [usize; 2],
    pub band: usize,
}

impl InvariantResult {
    pub fn new(value: f64, unit: f64, grid: [usize; 2], band: usize) -> Self {
        let nearest = unit * (value / unit).round();
        Self {
            value,
            quantization_unit: unit,
            nearest_quantum: nearest,
            residue: (value - nearest).abs(),
            grid,
            band,
        }
    }

    /// Multiple of the quantisation unit.
    pub fn quanta(&self) -> i64 {
        (self.value / self.quantization_unit).round() as i64
    }
}

/// First Chern number of a compactly supported Bolza texture, integrated on
/// an `n x n` grid over `[-0.62, 0.62]^2`.
pub fn chern_bolza(model: &dyn ParentHamiltonian, band: usize, resolution: usize) -> Result<InvariantResult> {
    if model.manifold() != Manifold::Bolza {
        return Err(Error::Unsupported(format!("{} is not a Bolza model", model.name())));
    }
    let support = model.compact_support().ok_or_else(|| {
        Error::Unsupported(format!(
            "{} has no compact texture; octagon-identified integration is not implemented",
            model.name()
        ))
    })?;
    if support >= BOLZA_CHERN_RADIUS {
        return Err(Error::Unsupported(format!(
            "texture support {support} exceeds the integration disk {BOLZA_CHERN_RADIUS}"
        )));
    }
    let r = BOLZA_CHERN_RADIUS;
    let grid = SampleGrid::new([-r, r], [-r, r], resolution, resolution);
    let field = plaquette_field(model, band, &grid)?;
    // plaquettes entirely outside the disk carry no flux; mask them anyway
    let h = 2.0 * r / resolution as f64;
    let reach = r + h * std::f64::consts::SQRT_2;
    let total = field.weighted_integral(|c| if c[0].hypot(c[1]) <= reach { 1.0 } else { 0.0 });
    Ok(InvariantResult::new(total / (2.0 * PI), 1.0, [resolution, resolution], band))
}

/// `D_y = (1/2pi) int theta_y Omega` over `[-pi, pi] x [-pi, 0]`.
pub fn dipolar_chern(model: &dyn ParentHamiltonian, band: usize, resolution: [usize; 2]) -> Result<InvariantResult> {
    if model.manifold() != Manifold::Klein {
        return Err(Error::Unsupported(format!("{} is not a Klein-bottle model", model.name())));
    }
    let grid = SampleGrid::for_manifold(Manifold::Klein, resolution[0], resolution[1]);
    require_symmetry(model, &grid, SYMMETRY_TOLERANCE)?;
    let field = plaquette_field(model, band, &grid)?;
    let v = field.weighted_integral(|c| c[1]) / (2.0 * PI);
    Ok(InvariantResult::new(v, 0.5 * PI, resolution, band))
}

/// `Q_xy = (1/pi) int theta_x theta_y Omega` over `[0, pi]^2`.
pub fn quadrupole_chern(model: &dyn ParentHamiltonian, band: usize, resolution: [usize; 2]) -> Result<InvariantResult> {
    if model.manifold() != Manifold::Rp2 {
        return Err(Error::Unsupported(format!("{} is not an RP2 model", model.name())));
    }
    let grid = SampleGrid::for_manifold(Manifold::Rp2, resolution[0], resolution[1]);
    require_symmetry(model, &grid, SYMMETRY_TOLERANCE)?;
    let field = plaquette_field(model, band, &grid)?;
    let v = field.weighted_integral(|c| c[0] * c[1]) / PI;
    Ok(InvariantResult::new(v, 0.5 * PI * PI, resolution, band))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BolzaQubit, KleinQubit, Rp2Qubit};

    #[test]
    fn pairwise_sum_matches() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }

    #[test]
    fn invariant_rounding() {
        let r = InvariantResult::new(3.1, 0.5 * PI, [1, 1], 1);
        assert_eq!(r.quanta(), 2);
        assert!((r.nearest_quantum - PI).abs() < 1e-15);
        assert!((r.residue - (PI - 3.1)).abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_no_curvature() {
        let grid = SampleGrid::new([0.0, 1.0], [0.0, 1.0], 4, 4);
        let d = vec![[0.0, 0.0, 1.0]; 25];
        let f = curvature_two_level(&d, &grid, 1).unwrap();
        assert!(f.omega.iter().all(|&w| w == 0.0));
        assert!(curvature_two_level(&vec![[0.0, 0.0, 2.0]; 25], &grid, 1).is_err());
    }

    #[test]
    fn bolza_chern_values() {
        for (eps, c) in [(0.5, 1i64), (-0.5, 1), (1.5, 0)] {
            let r = chern_bolza(&BolzaQubit::new(eps).unwrap(), 1, 100).unwrap();
            assert_eq!(r.quanta(), c, "epsilon {eps}: {}", r.value);
            assert!(r.residue < 1e-3);
        }
    }

    #[test]
    fn flat_invariants_small_grid() {
        let d = dipolar_chern(&KleinQubit::new(2.0).unwrap(), 1, [100, 50]).unwrap();
        assert_eq!(d.quanta().abs(), 1);
        let q = quadrupole_chern(&Rp2Qubit::new(1.0).unwrap(), 1, [80, 80]).unwrap();
        assert_eq!(q.quanta(), 1);
    }

    #[test]
    fn wrong_manifold_is_unsupported() {
        assert!(matches!(
            dipolar_chern(&Rp2Qubit::new(1.0).unwrap(), 1, [10, 10]),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            chern_bolza(&KleinQubit::new(1.0).unwrap(), 1, 10),
            Err(Error::Unsupported(_))
        ));
    }
}
