//! Straight-line geodesics folded into flat fundamental domains.
//!
//! Torus: `[0, 2pi)^2`. Klein bottle: `[-pi, pi] x [-pi, 0]` with
//! `tau_1 (x, y) = (x + 2pi, y)` and `tau_2 (x, y) = (2pi - x, y + pi)`.
//! RP^2: `[0, pi]^2` with `chi_1 (x, y) = (pi - x, y + pi)` and
//! `chi_2 (x, y) = (x + pi, pi - y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{sample_count, DriveSample, Manifold};
use crate::{Error, Result};

const TAU: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlatManifold {
    Torus,
    Klein,
    Rp2,
}

impl From<FlatManifold> for Manifold {
    fn from(m: FlatManifold) -> Self {
        match m {
            FlatManifold::Torus => Manifold::Torus,
            FlatManifold::Klein => Manifold::Klein,
            FlatManifold::Rp2 => Manifold::Rp2,
        }
    }
}

impl TryFrom<Manifold> for FlatManifold {
    type Error = Error;
    fn try_from(m: Manifold) -> Result<Self> {
        match m {
            Manifold::Torus => Ok(FlatManifold::Torus),
            Manifold::Klein => Ok(FlatManifold::Klein),
            Manifold::Rp2 => Ok(FlatManifold::Rp2),
            Manifold::Bolza => Err(Error::Input("bolza is not a flat manifold".into())),
        }
    }
}

fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(omega_i t + theta0_i) mod 2pi`.
pub fn torus_geodesic(theta0: [f64; 2], omega: [f64; 2], t: f64) -> [f64; 2] {
    [
        (omega[0] * t + theta0[0]).rem_euclid(TAU),
        (omega[1] * t + theta0[1]).rem_euclid(TAU),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KleinPoint {
    pub theta: [f64; 2],
    /// `(-1)^{n_y}`.
    pub x_velocity_sign: f64,
    pub n_y: i64,
    /// Exact time derivative of the folded coordinates.
    pub velocity: [f64; 2],
}

/// Klein-bottle geodesic from the closed folding formula.
pub fn klein_geodesic(theta0: [f64; 2], omega: [f64; 2], t: f64) -> KleinPoint {
    let lx = omega[0] * t + theta0[0];
    let ly = omega[1] * t + theta0[1];
    let n_y = (ly / PI).floor() as i64;
    let sign = parity_sign(n_y);
    let x = sign * (PI - (lx + PI).rem_euclid(TAU));
    let y = ly.rem_euclid(PI) - PI;
    KleinPoint {
        theta: [x, y],
        x_velocity_sign: sign,
        n_y,
        velocity: [-sign * omega[0], omega[1]],
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rp2Point {
    pub theta: [f64; 2],
    /// `((-1)^{n_y} omega_x, (-1)^{n_x} omega_y)`.
    pub velocity: [f64; 2],
    pub crossings: [i64; 2],
}

/// RP^2 geodesic in wrapped coordinates with crossing numbers.
pub fn rp2_geodesic(theta0: [f64; 2], omega: [f64; 2], t: f64) -> Rp2Point {
    let lx = omega[0] * t + theta0[0];
    let ly = omega[1] * t + theta0[1];
    let nx = (lx / PI).floor() as i64;
    let ny = (ly / PI).floor() as i64;
    let (sx, sy) = (parity_sign(nx), parity_sign(ny));
    let wx = lx.rem_euclid(PI);
    let wy = ly.rem_euclid(PI);
    Rp2Point {
        theta: [
            sy * wx + 0.5 * PI * (1.0 - sy),
            sx * wy + 0.5 * PI * (1.0 - sx),
        ],
        velocity: [sy * omega[0], sx * omega[1]],
        crossings: [nx, ny],
    }
}

/// Parameters of a flat drive.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSpec {
    pub manifold: FlatManifold,
    pub theta0: [f64; 2],
    pub omega: [f64; 2],
    pub t_max: f64,
    pub dt: f64,
}

impl FlatSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Parameter(format!("T must be nonnegative, got {}", self.t_max)));
        }
        if !self.omega.iter().chain(&self.theta0).all(|v| v.is_finite()) {
            return Err(Error::Parameter("omega and theta0 must be finite".into()));
        }
        let [x, y] = self.theta0;
        let inside = match self.manifold {
            FlatManifold::Torus => true,
            FlatManifold::Klein => (-PI..=PI).contains(&x) && (-PI..=0.0).contains(&y),
            FlatManifold::Rp2 => (0.0..=PI).contains(&x) && (0.0..=PI).contains(&y),
        };
        if !inside {
            return Err(Error::Domain(format!(
                "theta0 = ({x}, {y}) is outside the {} fundamental domain",
                Manifold::from(self.manifold)
            )));
        }
        Ok(())
    }

    pub fn sample_at(&self, t: f64) -> DriveSample {
        match self.manifold {
            FlatManifold::Torus => DriveSample {
                t,
                x: torus_geodesic(self.theta0, self.omega, t),
                momentum: self.omega,
                velocity: self.omega,
                word_len: 0,
                crossings: [
                    ((self.omega[0] * t + self.theta0[0]) / TAU).floor() as i64,
                    ((self.omega[1] * t + self.theta0[1]) / TAU).floor() as i64,
                ],
            },
            FlatManifold::Klein => {
                let k = klein_geodesic(self.theta0, self.omega, t);
                DriveSample {
                    t,
                    x: k.theta,
                    momentum: [k.x_velocity_sign * self.omega[0], self.omega[1]],
                    velocity: k.velocity,
                    word_len: 0,
                    crossings: [
                        ((self.omega[0] * t + self.theta0[0] + PI) / TAU).floor() as i64,
                        k.n_y,
                    ],
                }
            }
            FlatManifold::Rp2 => {
                let r = rp2_geodesic(self.theta0, self.omega, t);
                DriveSample {
                    t,
                    x: r.theta,
                    momentum: r.velocity,
                    velocity: r.velocity,
                    word_len: 0,
                    crossings: r.crossings,
                }
            }
        }
    }
}

/// Samples `t_k = k dt` of a flat drive.
#[derive(Clone, Debug)]
pub struct FlatPropagator {
    spec: FlatSpec,
    next: usize,
    count: usize,
}

impl FlatPropagator {
    pub fn new(spec: &FlatSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: spec.clone(),
            next: 0,
            count: sample_count(spec.t_max, spec.dt) + 1,
        })
    }
}

impl Iterator for FlatPropagator {
    type Item = DriveSample;

    fn next(&mut self) -> Option<DriveSample> {
        if self.next >= self.count {
            return None;
        }
        let t = self.next as f64 * self.spec.dt;
        self.next += 1;
        Some(self.spec.sample_at(t))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.count - self.next;
        (left, Some(left))
    }
}

pub fn flat_samples(spec: &FlatSpec) -> Result<Vec<DriveSample>> {
    Ok(FlatPropagator::new(spec)?.collect())
}
