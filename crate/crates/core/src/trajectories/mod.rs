//! Geodesic drives on the supported parameter manifolds.
//!
//! Every drive is reduced to a common [`DriveSample`] stream: chart position,
//! chart velocity and the canonical momentum used by the observables. Bolza
//! samples come from an exact high-precision propagator, flat samples from
//! closed formulas evaluated at each sample time.

mod bolza;
mod flat;
pub mod ode;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bolza::{
    default_digits, rebase, rescale_speed, unit_geodesic_from_origin, BolzaPropagator, BolzaSpec,
    CrossingEvent, Direction, DiskPhase,
};
pub use flat::{
    flat_samples, klein_geodesic, rp2_geodesic, torus_geodesic, FlatManifold, FlatPropagator,
    FlatSpec, KleinPoint, Rp2Point,
};
pub use ode::{integrate_cogeodesic, OdeOptions};

use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Bolza,
    Torus,
    Klein,
    Rp2,
}

impl Manifold {
    pub fn name(&self) -> &'static str {
        match self {
            Manifold::Bolza => "bolza",
            Manifold::Torus => "torus",
            Manifold::Klein => "klein",
            Manifold::Rp2 => "rp2",
        }
    }
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Manifold {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bolza" => Ok(Manifold::Bolza),
            "torus" => Ok(Manifold::Torus),
            "klein" => Ok(Manifold::Klein),
            "rp2" => Ok(Manifold::Rp2),
            other => Err(crate::Error::Input(format!("unknown manifold `{other}`"))),
        }
    }
}

/// One trajectory sample in double precision on the reduced chart.
///
/// For the Bolza surface `x = (Re z, Im z)`, `momentum = (Re p, Im p)` and
/// `velocity = g(z)^{-1} p`. For flat manifolds `x = (theta_x, theta_y)`,
/// `momentum` holds the effective frequencies that enter the observables and
/// `velocity` the exact time derivative of the folded coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSample {
    pub t: f64,
    pub x: [f64; 2],
    pub momentum: [f64; 2],
    pub velocity: [f64; 2],
    /// Length of the accumulated reduction word (Bolza only).
    pub word_len: usize,
    /// Crossing numbers `(n_x, n_y)` (flat manifolds only).
    pub crossings: [i64; 2],
}

impl DriveSample {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x[0], self.x[1])
    }

    pub fn p(&self) -> Complex64 {
        Complex64::new(self.momentum[0], self.momentum[1])
    }
}

/// Any geodesic drive, as a lazily evaluated stream of samples.
#[derive(Clone, Debug, PartialEq)]
pub enum GeodesicSpec {
    Bolza(BolzaSpec),
    Flat(FlatSpec),
}

impl GeodesicSpec {
    pub fn manifold(&self) -> Manifold {
        match self {
            GeodesicSpec::Bolza(_) => Manifold::Bolza,
            GeodesicSpec::Flat(f) => f.manifold.into(),
        }
    }

    pub fn dt(&self) -> f64 {
        match self {
            GeodesicSpec::Bolza(s) => s.dt,
            GeodesicSpec::Flat(s) => s.dt,
        }
    }

    pub fn t_max(&self) -> f64 {
        match self {
            GeodesicSpec::Bolza(s) => s.t_max,
            GeodesicSpec::Flat(s) => s.t_max,
        }
    }

    /// Same drive sampled at a different spacing.
    pub fn with_dt(&self, dt: f64) -> Self {
        match self {
            GeodesicSpec::Bolza(s) => GeodesicSpec::Bolza(BolzaSpec { dt, ..s.clone() }),
            GeodesicSpec::Flat(s) => GeodesicSpec::Flat(FlatSpec { dt, ..s.clone() }),
        }
    }

    pub fn samples(&self) -> Result<Box<dyn Iterator<Item = Result<DriveSample>> + Send>> {
        match self {
            GeodesicSpec::Bolza(s) => Ok(Box::new(BolzaPropagator::new(s)?)),
            GeodesicSpec::Flat(s) => Ok(Box::new(FlatPropagator::new(s)?.map(Ok))),
        }
    }

    /// Materialises the whole trajectory.
    pub fn collect(&self) -> Result<Trajectory> {
        let samples = self.samples()?.collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            manifold: self.manifold(),
            samples,
        })
    }
}

/// Number of sample intervals for horizon `t_max` at spacing `dt`.
pub fn sample_count(t_max: f64, dt: f64) -> usize {
    let n = t_max / dt;
    let r = n.round();
    if (n - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        n.floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub manifold: Manifold,
    pub samples: Vec<DriveSample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }
}
