//! Experiment configs: JSON documents with top-level keys `kind`,
//! `manifold`, `model`, `drive`, `numerics` and `output`.
//!
//! Validation is explicit so every diagnostic names the offending field
//! path, e.g. `drive.lambda`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::models::ModelSpec;
use crate::trajectories::{
    default_digits, sample_count, BolzaSpec, Direction, FlatManifold, FlatSpec, GeodesicSpec,
    Manifold,
};
use crate::{Error, Precision, Result};

/// Environment variable overriding the precision rule.
pub const DIGITS_ENV: &str = "GEODRIVE_DIGITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Trajectory,
    Evolve,
    Response,
    Invariant,
    Ergodicity,
}

impl Kind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "trajectory" => Kind::Trajectory,
            "evolve" => Kind::Evolve,
            "response" => Kind::Response,
            "invariant" => Kind::Invariant,
            "ergodicity" => Kind::Ergodicity,
            _ => return None,
        })
    }

    fn needs_model(self) -> bool {
        matches!(self, Kind::Evolve | Kind::Response | Kind::Invariant)
    }

    fn needs_drive(self) -> bool {
        self != Kind::Invariant
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DriveConfig {
    Bolza {
        lambda: f64,
        z0: [f64; 2],
        direction: Direction,
    },
    Flat {
        omega: [f64; 2],
        theta0: [f64; 2],
    },
}

/// Where the working precision came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitsSource {
    Config,
    Environment,
    Rule,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Numerics {
    pub t_max: Option<f64>,
    pub dt: f64,
    /// Resolved working digits (Bolza drives only).
    pub digits: Option<u32>,
    pub digits_source: Option<DigitsSource>,
    pub grid: Option<[usize; 2]>,
    pub band: usize,
    pub record_stride: usize,
    pub counterdiabatic: bool,
    pub g_correction: bool,
    pub locate_crossings: bool,
    pub radius: f64,
    pub bins: usize,
    pub horizon_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub manifold: Manifold,
    pub model: Option<ModelSpec>,
    pub drive: Option<DriveConfig>,
    pub numerics: Numerics,
    pub output: PathBuf,
}

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::config(path, msg)
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// A JSON object being validated, with its field path.
struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(path: &str, v: &'a Value) -> Result<Self> {
        let map = v
            .as_object()
            .ok_or_else(|| cfg_err(path_or_root(path), "expected an object"))?;
        Ok(Self {
            path: path.to_string(),
            map,
        })
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(cfg_err(&join(&self.path, k), "unknown field")),
            None => Ok(()),
        }
    }

    fn p(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn require(&self, key: &str) -> Result<&'a Value> {
        self.get(key)
            .ok_or_else(|| cfg_err(&self.p(key), "missing required field"))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| number(&self.p(key), v)).transpose()
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        number(&self.p(key), self.require(key)?)
    }

    fn pair_opt(&self, key: &str) -> Result<Option<[f64; 2]>> {
        self.get(key).map(|v| pair(&self.p(key), v)).transpose()
    }

    fn uint_opt(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| cfg_err(&self.p(key), "expected a nonnegative integer"))
            })
            .transpose()
    }

    fn bool_opt(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| v.as_bool().ok_or_else(|| cfg_err(&self.p(key), "expected true or false")))
            .transpose()
    }

    fn str_req(&self, key: &str) -> Result<&'a str> {
        self.require(key)?
            .as_str()
            .ok_or_else(|| cfg_err(&self.p(key), "expected a string"))
    }
}

fn path_or_root(path: &str) -> &str {
    if path.is_empty() {
        "$"
    } else {
        path
    }
}

fn number(path: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| cfg_err(path, "expected a finite number"))
}

fn pair(path: &str, v: &Value) -> Result<[f64; 2]> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok([number(&format!("{path}[0]"), a)?, number(&format!("{path}[1]"), b)?]),
        _ => Err(cfg_err(path, "expected an array of two numbers")),
    }
}

/// Reads [`DIGITS_ENV`]; unset or empty means no override.
pub fn env_digits() -> Result<Option<u32>> {
    match std::env::var(DIGITS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse::<u32>()
            .map(Some)
            .map_err(|_| cfg_err(DIGITS_ENV, format!("`{s}` is not a positive integer"))),
        _ => Ok(None),
    }
}

fn parse_model(v: &Value) -> Result<ModelSpec> {
    let o = Obj::new("model", v)?;
    let name = o.str_req("name")?;
    let spec = match name {
        "bolza_qubit" => {
            o.allow(&["name", "epsilon"])?;
            let epsilon = o.f64_req("epsilon")?;
            if (epsilon.abs() - 1.0).abs() < 1e-12 {
                return Err(cfg_err("model.epsilon", "|epsilon| = 1 is a gapless point"));
            }
            ModelSpec::BolzaQubit { epsilon }
        }
        "klein_qubit" | "rp2_qubit" => {
            o.allow(&["name", "m"])?;
            let m = o.f64_req("m")?;
            if name == "klein_qubit" {
                ModelSpec::KleinQubit { m }
            } else {
                ModelSpec::Rp2Qubit { m }
            }
        }
        other => {
            return Err(cfg_err(
                "model.name",
                format!("unknown model `{other}` (expected bolza_qubit, klein_qubit or rp2_qubit)"),
            ))
        }
    };
    Ok(spec)
}

fn parse_direction(v: &Value) -> Result<Direction> {
    let o = Obj::new("drive.direction", v)?;
    o.allow(&["angle", "pi_fraction"])?;
    match (o.get("angle"), o.get("pi_fraction")) {
        (Some(a), None) => Ok(Direction::Angle(number("drive.direction.angle", a)?)),
        (None, Some(f)) => {
            let path = "drive.direction.pi_fraction";
            let parts = f.as_array().map(Vec::as_slice);
            match parts {
                Some([p, q]) => {
                    let p = p.as_i64().ok_or_else(|| cfg_err(&format!("{path}[0]"), "expected an integer"))?;
                    let q = q
                        .as_u64()
                        .filter(|&q| q > 0)
                        .ok_or_else(|| cfg_err(&format!("{path}[1]"), "expected a positive integer"))?;
                    Ok(Direction::PiFraction(p, q))
                }
                _ => Err(cfg_err(path, "expected [numerator, denominator]")),
            }
        }
        _ => Err(cfg_err("drive.direction", "give exactly one of `angle` or `pi_fraction`")),
    }
}

/// Default starting point of flat drives.
pub fn default_theta0(m: Manifold) -> [f64; 2] {
    match m {
        Manifold::Klein => [-PI, -PI],
        _ => [0.0, 0.0],
    }
}

fn parse_drive(v: &Value, manifold: Manifold, kind: Kind) -> Result<DriveConfig> {
    let o = Obj::new("drive", v)?;
    if manifold == Manifold::Bolza {
        o.allow(&["lambda", "z0", "direction"])?;
        let lambda = o.f64_req("lambda")?;
        if !(lambda > 0.0) {
            return Err(cfg_err("drive.lambda", format!("must be positive, got {lambda}")));
        }
        if kind == Kind::Ergodicity && lambda != 1.0 {
            return Err(cfg_err("drive.lambda", "ergodicity diagnostics need a unit-speed drive (lambda = 1)"));
        }
        let z0 = o.pair_opt("z0")?.unwrap_or([0.0, 0.0]);
        if z0[0].hypot(z0[1]) >= 1.0 {
            return Err(cfg_err("drive.z0", "must lie inside the unit disk"));
        }
        let direction = match o.get("direction") {
            Some(d) => parse_direction(d)?,
            None => Direction::PiFraction(1, 9),
        };
        Ok(DriveConfig::Bolza { lambda, z0, direction })
    } else {
        o.allow(&["omega", "theta0"])?;
        let omega = o.pair_opt("omega")?.ok_or_else(|| cfg_err("drive.omega", "missing required field"))?;
        let theta0 = o.pair_opt("theta0")?.unwrap_or_else(|| default_theta0(manifold));
        let probe = FlatSpec {
            manifold: FlatManifold::try_from(manifold)?,
            theta0,
            omega,
            t_max: 0.0,
            dt: 1.0,
        };
        probe.validate().map_err(|e| cfg_err("drive.theta0", e.to_string()))?;
        Ok(DriveConfig::Flat { omega, theta0 })
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(&path.display().to_string(), format!("cannot read config: {e}")))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| cfg_err("$", format!("invalid JSON: {e}")))?;
        Self::from_value(&value, env_digits()?)
    }

    /// Validates a parsed document. `env_digits` overrides the precision
    /// rule but not an explicit `numerics.digits`.
    pub fn from_value(v: &Value, env_digits: Option<u32>) -> Result<Self> {
        let top = Obj::new("", v)?;
        top.allow(&["kind", "manifold", "model", "drive", "numerics", "output"])?;
        let kind_s = top.str_req("kind")?;
        let kind = Kind::parse(kind_s).ok_or_else(|| {
            cfg_err("kind", format!("unknown kind `{kind_s}` (expected trajectory, evolve, response, invariant or ergodicity)"))
        })?;
        let manifold: Manifold = top
            .str_req("manifold")?
            .parse()
            .map_err(|e: Error| cfg_err("manifold", e.to_string()))?;

        let model = match top.get("model") {
            Some(m) => Some(parse_model(m)?),
            None if kind.needs_model() => return Err(cfg_err("model", "missing required field")),
            None => None,
        };
        if let Some(m) = &model {
            if m.manifold() != manifold {
                return Err(cfg_err(
                    "model.name",
                    format!("model lives on {} but the manifold is {manifold}", m.manifold()),
                ));
            }
        }
        if kind.needs_model() && manifold == Manifold::Torus {
            return Err(cfg_err("manifold", "no model is defined on the torus"));
        }
        if kind == Kind::Ergodicity && manifold != Manifold::Bolza {
            return Err(cfg_err("manifold", "ergodicity diagnostics are defined for the Bolza surface"));
        }

        let drive = match top.get("drive") {
            Some(d) if kind.needs_drive() => Some(parse_drive(d, manifold, kind)?),
            Some(_) => return Err(cfg_err("drive", "invariant runs take no drive")),
            None if kind.needs_drive() => return Err(cfg_err("drive", "missing required field")),
            None => None,
        };

        let empty = Value::Object(Map::new());
        let n = Obj::new("numerics", top.get("numerics").unwrap_or(&empty))?;
        n.allow(&[
            "t_max", "dt", "digits", "grid", "band", "record_stride", "counterdiabatic",
            "g_correction", "locate_crossings", "radius", "bins", "horizon_step",
        ])?;
        let t_max = n.f64_opt("t_max")?;
        if kind.needs_drive() {
            match t_max {
                None => return Err(cfg_err("numerics.t_max", "missing required field")),
                Some(t) if !(t > 0.0) => return Err(cfg_err("numerics.t_max", "must be positive")),
                _ => {}
            }
        }
        let dt = n.f64_opt("dt")?.unwrap_or(0.01);
        if !(dt > 0.0) {
            return Err(cfg_err("numerics.dt", format!("must be positive, got {dt}")));
        }
        if let Some(t) = t_max {
            if dt > t {
                return Err(cfg_err("numerics.dt", "exceeds the horizon numerics.t_max"));
            }
        }
        let explicit_digits = n.uint_opt("digits")?;
        let (digits, digits_source) = match &drive {
            Some(DriveConfig::Bolza { lambda, .. }) => {
                let (d, src) = match (explicit_digits, env_digits) {
                    (Some(d), _) => (d as u32, DigitsSource::Config),
                    (None, Some(d)) => (d, DigitsSource::Environment),
                    (None, None) => (default_digits(*lambda, t_max.unwrap_or(0.0)), DigitsSource::Rule),
                };
                if d < Precision::MIN_DIGITS {
                    let path = if src == DigitsSource::Environment { DIGITS_ENV } else { "numerics.digits" };
                    return Err(cfg_err(path, format!("at least {} digits are required, got {d}", Precision::MIN_DIGITS)));
                }
                (Some(d), Some(src))
            }
            _ => {
                if explicit_digits.is_some() {
                    return Err(cfg_err("numerics.digits", "only Bolza drives use extended precision"));
                }
                (None, None)
            }
        };
        let grid = match n.get("grid") {
            None => None,
            Some(g) => {
                let arr = g.as_array().map(Vec::as_slice);
                match arr {
                    Some([a, b]) => {
                        let a = a.as_u64().filter(|&x| x >= 2);
                        let b = b.as_u64().filter(|&x| x >= 2);
                        match (a, b) {
                            (Some(a), Some(b)) => Some([a as usize, b as usize]),
                            _ => return Err(cfg_err("numerics.grid", "resolutions must be integers >= 2")),
                        }
                    }
                    _ => return Err(cfg_err("numerics.grid", "expected [nx, ny]")),
                }
            }
        };
        let band = n.uint_opt("band")?.unwrap_or(1) as usize;
        if band > 1 {
            return Err(cfg_err("numerics.band", format!("qubit models have bands 0 and 1, got {band}")));
        }
        let default_stride = if kind == Kind::Trajectory { 1 } else { 100 };
        let record_stride = n.uint_opt("record_stride")?.unwrap_or(default_stride) as usize;
        if record_stride == 0 {
            return Err(cfg_err("numerics.record_stride", "must be at least 1"));
        }
        let counterdiabatic = n.bool_opt("counterdiabatic")?.unwrap_or(false);
        if counterdiabatic && !(manifold == Manifold::Bolza && matches!(kind, Kind::Evolve | Kind::Response)) {
            return Err(cfg_err("numerics.counterdiabatic", "only Bolza evolve and response runs support counterdiabatic driving"));
        }
        let g_correction = n.bool_opt("g_correction")?.unwrap_or(false);
        if g_correction && kind != Kind::Evolve {
            return Err(cfg_err("numerics.g_correction", "only evolve runs record the G diagnostic"));
        }
        let locate_crossings = n.bool_opt("locate_crossings")?.unwrap_or(false);
        let radius = n.f64_opt("radius")?.unwrap_or(0.6);
        if !(radius > 0.0 && radius < 1.0) {
            return Err(cfg_err("numerics.radius", "must lie in (0, 1)"));
        }
        let bins = n.uint_opt("bins")?.unwrap_or(36) as usize;
        if bins < 2 {
            return Err(cfg_err("numerics.bins", "need at least two bins"));
        }
        let horizon_step = n.f64_opt("horizon_step")?.unwrap_or(10.0);
        if !(horizon_step > 0.0) {
            return Err(cfg_err("numerics.horizon_step", "must be positive"));
        }

        let out = Obj::new("output", top.require("output")?)?;
        out.allow(&["prefix"])?;
        let prefix = out.str_req("prefix")?;
        if prefix.is_empty() {
            return Err(cfg_err("output.prefix", "must not be empty"));
        }

        Ok(Self {
            kind,
            manifold,
            model,
            drive,
            numerics: Numerics {
                t_max,
                dt,
                digits,
                digits_source,
                grid,
                band,
                record_stride,
                counterdiabatic,
                g_correction,
                locate_crossings,
                radius,
                bins,
                horizon_step,
            },
            output: PathBuf::from(prefix),
        })
    }

    /// Drive described by the config, if any.
    pub fn geodesic(&self) -> Result<Option<GeodesicSpec>> {
        let t_max = self.numerics.t_max.unwrap_or(0.0);
        let dt = self.numerics.dt;
        Ok(match &self.drive {
            None => None,
            Some(DriveConfig::Bolza { lambda, z0, direction }) => {
                let mut s = BolzaSpec::new(Complex64::new(z0[0], z0[1]), *direction, *lambda, t_max, dt);
                s.digits = self.numerics.digits;
                s.locate_crossings = self.numerics.locate_crossings;
                Some(GeodesicSpec::Bolza(s))
            }
            Some(DriveConfig::Flat { omega, theta0 }) => Some(GeodesicSpec::Flat(FlatSpec {
                manifold: FlatManifold::try_from(self.manifold)?,
                theta0: *theta0,
                omega: *omega,
                t_max,
                dt,
            })),
        })
    }

    /// Number of drive intervals (evolution steps for quantum runs).
    pub fn step_count(&self) -> Option<usize> {
        self.numerics.t_max.map(|t| sample_count(t, self.numerics.dt))
    }

    /// Grid used by invariant and target computations.
    pub fn grid(&self) -> [usize; 2] {
        self.numerics.grid.unwrap_or(match self.manifold {
            Manifold::Klein => [400, 200],
            _ => [200, 200],
        })
    }

    /// Path `<prefix>.<suffix>`.
    pub fn output_path(&self, suffix: &str) -> PathBuf {
        let mut s = self.output.clone().into_os_string();
        s.push(".");
        s.push(suffix);
        PathBuf::from(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "kind": "response",
            "manifold": "bolza",
            "model": {"name": "bolza_qubit", "epsilon": 0.5},
            "drive": {"lambda": 0.05},
            "numerics": {"t_max": 2000.0, "dt": 0.01},
            "output": {"prefix": "out/hdqs"}
        })
    }

    fn err_path(v: &Value) -> String {
        match ExperimentConfig::from_value(v, None) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn valid_config_resolves_digits() {
        let c = ExperimentConfig::from_value(&base(), None).unwrap();
        assert_eq!(c.numerics.digits, Some(74));
        assert_eq!(c.step_count(), Some(200_000));
        assert_eq!(c.output_path("response.csv"), PathBuf::from("out/hdqs.response.csv"));
        let c = ExperimentConfig::from_value(&base(), Some(60)).unwrap();
        assert_eq!((c.numerics.digits, c.numerics.digits_source), (Some(60), Some(DigitsSource::Environment)));
    }

    #[test]
    fn diagnostics_name_fields() {
        let mut v = base();
        v["drive"]["lambda"] = json!(-1.0);
        assert_eq!(err_path(&v), "drive.lambda");
        let mut v = base();
        v["model"].as_object_mut().unwrap().remove("epsilon");
        assert_eq!(err_path(&v), "model.epsilon");
        let mut v = base();
        v["model"]["epsilon"] = json!(-1.0);
        assert_eq!(err_path(&v), "model.epsilon");
        let mut v = base();
        v["numerics"]["digits"] = json!(20);
        assert_eq!(err_path(&v), "numerics.digits");
        let mut v = base();
        v["numerics"]["dtt"] = json!(0.1);
        assert_eq!(err_path(&v), "numerics.dtt");
        let mut v = base();
        v["manifold"] = json!("klein");
        assert_eq!(err_path(&v), "model.name");
        assert!(matches!(
            ExperimentConfig::from_value(&base(), Some(10)),
            Err(Error::Config { path, .. }) if path == DIGITS_ENV
        ));
    }

    #[test]
    fn flat_defaults() {
        let v = json!({
            "kind": "trajectory",
            "manifold": "klein",
            "drive": {"omega": [0.02, 0.03]},
            "numerics": {"t_max": 1.0, "dt": 0.5},
            "output": {"prefix": "k"}
        });
        let c = ExperimentConfig::from_value(&v, None).unwrap();
        assert_eq!(c.drive, Some(DriveConfig::Flat { omega: [0.02, 0.03], theta0: [-PI, -PI] }));
        assert_eq!(c.numerics.digits, None);
        assert_eq!(c.numerics.record_stride, 1);
    }
}
