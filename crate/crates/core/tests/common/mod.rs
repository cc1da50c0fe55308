//! Independent oracles shared by the test targets.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use geodrive::models::KleinQubit;
use geodrive::topology::BerryField;

pub struct Folded {
    pub x: [f64; 2],
    pub velocity: [f64; 2],
    /// Signed counts of the two generators.
    pub word: [i64; 2],
}

/// Klein bottle: `tau(x, y) = (x + 2pi, y)`, `chi(x, y) = (-x, y + pi)`.
pub fn klein_oracle(l: [f64; 2], omega: [f64; 2]) -> Folded {
    let [mut x, mut y] = l;
    let mut v = omega;
    let mut chi = 0;
    while y >= 0.0 {
        (x, y) = (-x, y - PI);
        v[0] = -v[0];
        chi -= 1;
    }
    while y < -PI {
        (x, y) = (-x, y + PI);
        v[0] = -v[0];
        chi += 1;
    }
    let mut tau = 0;
    while x >= PI {
        x -= TAU;
        tau -= 1;
    }
    while x < -PI {
        x += TAU;
        tau += 1;
    }
    Folded { x: [x, y], velocity: v, word: [tau, chi] }
}

/// Projective plane: `a(x, y) = (x + pi, pi - y)`, `b(x, y) = (pi - x, y + pi)`.
pub fn rp2_oracle(l: [f64; 2], omega: [f64; 2]) -> Folded {
    let [mut x, mut y] = l;
    let mut v = omega;
    let (mut a, mut b) = (0, 0);
    while x >= PI {
        (x, y) = (x - PI, PI - y);
        v[1] = -v[1];
        a += 1;
    }
    while x < 0.0 {
        (x, y) = (x + PI, PI - y);
        v[1] = -v[1];
        a -= 1;
    }
    while y >= PI {
        (x, y) = (PI - x, y - PI);
        v[0] = -v[0];
        b += 1;
    }
    while y < 0.0 {
        (x, y) = (PI - x, y + PI);
        v[0] = -v[0];
        b -= 1;
    }
    Folded { x: [x, y], velocity: v, word: [a, b] }
}

/// Distance of `v` from the nearest multiple of `pi`.
pub fn off_lattice(v: f64) -> f64 {
    let r = v.rem_euclid(PI);
    r.min(PI - r)
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Upper-band curvature `(1/2) n . (dx n x dy n)` from the analytic field.
pub fn klein_curvature(m: &KleinQubit, x: [f64; 2]) -> f64 {
    let d = m.field(x);
    let g = m.field_gradient(x);
    let r = dot(d, d).sqrt();
    let n = d.map(|v| v / r);
    let unit = |gi: [f64; 3]| {
        let p = dot(n, gi);
        [(gi[0] - n[0] * p) / r, (gi[1] - n[1] * p) / r, (gi[2] - n[2] * p) / r]
    };
    0.5 * dot(n, cross(unit(g[0]), unit(g[1])))
}

pub fn max_error(field: &BerryField, exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let ny = field.grid.ny;
    (0..field.omega.len())
        .map(|k| (field.omega[k] - exact(field.center(k / ny, k % ny))).abs())
        .fold(0.0, f64::max)
}


/// Max plaquette error against the analytic Klein curvature (m = 2) on
/// `2n x n` grids.
pub fn plaquette_errors(ns: &[usize]) -> Vec<f64> {
    use geodrive::models::SampleGrid;
    use geodrive::topology::{band_states, curvature_plaquette};
    use geodrive::trajectories::Manifold;
    let model = KleinQubit::new(2.0).unwrap();
    ns.iter()
        .map(|&n| {
            let grid = SampleGrid::for_manifold(Manifold::Klein, 2 * n, n);
            let f = curvature_plaquette(&band_states(&model, 1, &grid).unwrap(), &grid, 1).unwrap();
            max_error(&f, |c| klein_curvature(&model, c))
        })
        .collect()
}
