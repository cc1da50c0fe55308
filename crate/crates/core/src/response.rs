//! Response observables and their scaled running time averages.
//!
//! | drive | observable | normalisation |
//! |---|---|---|
//! | Bolza | `2 g^{-1} (p_2 dH/dx^1 - p_1 dH/dx^2)` | `lambda^2` |
//! | Klein | `omega_y theta_y dH/dtheta_x` | `omega_y^2 / pi` |
//! | RP^2 | `omega_y(t) theta_x theta_y dH/dtheta_x` | `omega_y^2 / pi` |
//!
//! The running average at horizon `T` is `(1 / (norm T)) int_0^T <O> dt`.

use num_complex::Complex64;
use serde::Serialize;

use crate::evolution::{
    counterdiabatic_from, driven_hamiltonian, overlap_fidelity, time_derivative, unitary_step,
    Driving, MidpointSteps, QuantumState,
};
use crate::hyperbolic::inverse_metric;
use crate::models::{eigensystem, grad_h, CMatrix, ParentHamiltonian, FD_STEP};
use crate::trajectories::{DriveSample, GeodesicSpec, Manifold};
use crate::{Error, Result};

/// Which response is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Hdqs,
    Klein,
    Rp2,
    /// Bolza response of the counterdiabatic Hamiltonian for `band`.
    Counterdiabatic { band: usize },
}

impl ResponseKind {
    pub fn for_manifold(m: Manifold) -> Result<Self> {
        match m {
            Manifold::Bolza => Ok(ResponseKind::Hdqs),
            Manifold::Klein => Ok(ResponseKind::Klein),
            Manifold::Rp2 => Ok(ResponseKind::Rp2),
            Manifold::Torus => Err(Error::Unsupported("no response observable on the torus".into())),
        }
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            ResponseKind::Hdqs | ResponseKind::Counterdiabatic { .. } => Manifold::Bolza,
            ResponseKind::Klein => Manifold::Klein,
            ResponseKind::Rp2 => Manifold::Rp2,
        }
    }
}

fn combine(g: &[CMatrix; 2], a: f64, b: f64) -> CMatrix {
    &g[0] * Complex64::from(a) + &g[1] * Complex64::from(b)
}

fn hdqs_from_gradient(g: &[CMatrix; 2], s: &DriveSample) -> CMatrix {
    let k = 2.0 * inverse_metric(s.z());
    combine(g, k * s.momentum[1], -k * s.momentum[0])
}

/// `2 g(z)^{-1} (p_2 dH/dx^1 - p_1 dH/dx^2)` on a reduced Bolza sample.
pub fn observable_hdqs(model: &dyn ParentHamiltonian, s: &DriveSample) -> Result<CMatrix> {
    Ok(hdqs_from_gradient(&grad_h(model, s.x, FD_STEP)?, s))
}

/// `omega_y theta_y dH/dtheta_x`.
pub fn observable_klein(model: &dyn ParentHamiltonian, s: &DriveSample) -> Result<CMatrix> {
    let g = grad_h(model, s.x, FD_STEP)?;
    Ok(&g[0] * Complex64::from(s.momentum[1] * s.x[1]))
}

/// `omega_y(t) theta_x theta_y dH/dtheta_x`.
pub fn observable_rp2(model: &dyn ParentHamiltonian, s: &DriveSample) -> Result<CMatrix> {
    let g = grad_h(model, s.x, FD_STEP)?;
    Ok(&g[0] * Complex64::from(s.momentum[1] * s.x[0] * s.x[1]))
}

fn cd_potential(model: &dyn ParentHamiltonian, s: &DriveSample, n: usize) -> Result<CMatrix> {
    let bands = eigensystem(&model.evaluate(s.x))?;
    counterdiabatic_from(&bands, &time_derivative(model, s)?, n, s.x)
}

/// HDQS observable with `H` replaced by `H + V_Q(z, p)`; the chart
/// derivatives of `V_Q` are central differences at fixed momentum.
pub fn observable_cd(model: &dyn ParentHamiltonian, s: &DriveSample, n: usize) -> Result<CMatrix> {
    let g = grad_h(model, s.x, FD_STEP)?;
    let shifted = |dx: f64, dy: f64| -> Result<CMatrix> {
        let x = [s.x[0] + dx, s.x[1] + dy];
        let ginv = inverse_metric(Complex64::new(x[0], x[1]));
        let moved = DriveSample {
            x,
            velocity: [ginv * s.momentum[0], ginv * s.momentum[1]],
            ..*s
        };
        cd_potential(model, &moved, n)
    };
    let h = FD_STEP;
    let dvx = (shifted(h, 0.0)? - shifted(-h, 0.0)?).unscale(2.0 * h);
    let dvy = (shifted(0.0, h)? - shifted(0.0, -h)?).unscale(2.0 * h);
    let total = [&g[0] + dvx, &g[1] + dvy];
    Ok(hdqs_from_gradient(&total, s))
}

pub fn observable(model: &dyn ParentHamiltonian, kind: ResponseKind, s: &DriveSample) -> Result<CMatrix> {
    match kind {
        ResponseKind::Hdqs => observable_hdqs(model, s),
        ResponseKind::Klein => observable_klein(model, s),
        ResponseKind::Rp2 => observable_rp2(model, s),
        ResponseKind::Counterdiabatic { band } => observable_cd(model, s, band),
    }
}

/// Normalisation constant of the running average for a drive.
pub fn normalization(kind: ResponseKind, spec: &GeodesicSpec) -> Result<f64> {
    match (kind, spec) {
        (ResponseKind::Hdqs | ResponseKind::Counterdiabatic { .. }, GeodesicSpec::Bolza(b)) => {
            Ok(b.lambda * b.lambda)
        }
        (ResponseKind::Klein | ResponseKind::Rp2, GeodesicSpec::Flat(f)) => {
            Ok(f.omega[1] * f.omega[1] / std::f64::consts::PI)
        }
        _ => Err(Error::Input(format!(
            "response {kind:?} does not apply to a {} drive",
            spec.manifold()
        ))),
    }
}

/// Largest tolerated imaginary part of an expectation value.
pub const IMAG_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn push(&mut self, t: f64, value: Complex64) -> Result<()> {
        if value.im.abs() > IMAG_TOLERANCE * value.re.abs().max(1.0) {
            return Err(Error::Numeric(format!(
                "expectation value at t = {t} has imaginary part {:e}",
                value.im
            )));
        }
        self.times.push(t);
        self.values.push(value.re);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseCurve {
    pub horizons: Vec<f64>,
    pub expectation: Vec<f64>,
    pub running_average: Vec<f64>,
    pub normalization: f64,
    pub target: Option<f64>,
}

impl ResponseCurve {
    pub fn final_value(&self) -> Option<f64> {
        self.running_average.last().copied()
    }

    pub fn final_horizon(&self) -> Option<f64> {
        self.horizons.last().copied()
    }

    /// First horizon after which the average stays within `tol` of `target`.
    pub fn plateau_time(&self, target: f64, tol: f64) -> Option<f64> {
        let mut idx = None;
        for (k, v) in self.running_average.iter().enumerate().rev() {
            if (v - target).abs() > tol {
                break;
            }
            idx = Some(k);
        }
        idx.map(|k| self.horizons[k])
    }
}

/// Trapezoid cumulative integral over `normalization * T`; `T = 0` is skipped.
pub fn running_average(series: &ObservableSeries, normalization: f64) -> Result<ResponseCurve> {
    if series.is_empty() {
        return Err(Error::Input("observable series is empty".into()));
    }
    if !(normalization > 0.0) {
        return Err(Error::Parameter(format!("normalization must be positive, got {normalization}")));
    }
    let mut acc = 0.0;
    let mut curve = ResponseCurve {
        horizons: Vec::new(),
        expectation: Vec::new(),
        running_average: Vec::new(),
        normalization,
        target: None,
    };
    let t0 = series.times[0];
    for k in 0..series.len() {
        if k > 0 {
            acc += 0.5 * (series.values[k] + series.values[k - 1]) * (series.times[k] - series.times[k - 1]);
        }
        let span = series.times[k] - t0;
        if span > 0.0 {
            curve.horizons.push(span);
            curve.expectation.push(series.values[k]);
            curve.running_average.push(acc / (normalization * span));
        }
    }
    Ok(curve)
}

/// One evolution of a drive with on-the-fly response accumulation.
#[derive(Clone, Debug)]
pub struct ResponseSetup {
    pub drive: GeodesicSpec,
    pub kind: ResponseKind,
    /// Evolution step; the drive is re-sampled at `dt / 2`.
    pub dt: f64,
    pub band: usize,
    /// Record curve and state points every `record_stride` steps.
    pub record_stride: usize,
    pub target: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatePoint {
    pub t: f64,
    pub fidelity: f64,
    pub norm: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseOutput {
    pub curve: ResponseCurve,
    pub states: Vec<StatePoint>,
    pub min_fidelity: f64,
    pub max_norm_error: f64,
    pub steps: usize,
}

impl ResponseOutput {
    pub fn final_value(&self) -> f64 {
        self.curve.final_value().unwrap_or(0.0)
    }
}

/// Evolves from band `setup.band` and accumulates the running response.
pub fn run_response(model: &dyn ParentHamiltonian, setup: &ResponseSetup) -> Result<ResponseOutput> {
    if model.manifold() != setup.kind.manifold() || setup.drive.manifold() != setup.kind.manifold() {
        return Err(Error::Input(format!(
            "model on {}, drive on {} and response {:?} do not match",
            model.manifold(),
            setup.drive.manifold(),
            setup.kind
        )));
    }
    if !(setup.dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {}", setup.dt)));
    }
    if setup.band >= model.dim() {
        return Err(Error::Input(format!("band {} out of range", setup.band)));
    }
    let norm = normalization(setup.kind, &setup.drive)?;
    let driving = match setup.kind {
        ResponseKind::Counterdiabatic { band } => Driving::Counterdiabatic { band },
        _ => Driving::Plain,
    };
    let stride = setup.record_stride.max(1);
    let half = setup.drive.with_dt(0.5 * setup.dt);
    let mut steps = MidpointSteps::new(half.samples()?, setup.dt);
    let first = steps.start()?;

    let bands0 = eigensystem(&model.evaluate(first.x))?;
    let mut psi = QuantumState::band(&bands0, setup.band);
    let expect = |psi: &QuantumState, s: &DriveSample| -> Result<Complex64> {
        Ok(psi.expectation(&observable(model, setup.kind, s)?))
    };
    let mut series_t = first.t;
    let mut prev_val = checked(expect(&psi, &first)?, first.t)?;
    let mut acc = 0.0;
    let mut curve = ResponseCurve {
        horizons: Vec::new(),
        expectation: Vec::new(),
        running_average: Vec::new(),
        normalization: norm,
        target: setup.target,
    };
    let mut states = vec![state_point(first.t, 1.0, &psi)];
    let mut min_fid: f64 = 1.0;
    let mut max_norm_err: f64 = 0.0;
    let mut count = 0;
    for step in steps {
        let (_, mid, b) = step?;
        let u = unitary_step(&driven_hamiltonian(model, &mid, driving)?, setup.dt);
        psi.apply(&u);
        count += 1;
        let val = checked(expect(&psi, &b)?, b.t)?;
        acc += 0.5 * (val + prev_val) * (b.t - series_t);
        series_t = b.t;
        prev_val = val;
        let bands = eigensystem(&model.evaluate(b.x))?;
        let fid = overlap_fidelity(psi.amplitudes(), &bands.state(setup.band));
        min_fid = min_fid.min(fid);
        max_norm_err = max_norm_err.max((psi.norm() - 1.0).abs());
        let span = b.t - first.t;
        if count % stride == 0 && span > 0.0 {
            curve.horizons.push(span);
            curve.expectation.push(val);
            curve.running_average.push(acc / (norm * span));
            states.push(state_point(b.t, fid, &psi));
        }
    }
    if count == 0 {
        return Err(Error::Input("drive is shorter than one evolution step".into()));
    }
    let span = series_t - first.t;
    if curve.horizons.last() != Some(&span) {
        curve.horizons.push(span);
        curve.expectation.push(prev_val);
        curve.running_average.push(acc / (norm * span));
    }
    Ok(ResponseOutput {
        curve,
        states,
        min_fidelity: min_fid,
        max_norm_error: max_norm_err,
        steps: count,
    })
}

fn checked(v: Complex64, t: f64) -> Result<f64> {
    if v.im.abs() > IMAG_TOLERANCE * v.re.abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "expectation value at t = {t} has imaginary part {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

fn state_point(t: f64, fidelity: f64, psi: &QuantumState) -> StatePoint {
    StatePoint {
        t,
        fidelity,
        norm: psi.norm(),
        amplitudes: psi.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BolzaQubit, KleinQubit};
    use crate::trajectories::{BolzaSpec, Direction};

    #[derive(Debug)]
    struct Flat(Manifold);

    impl ParentHamiltonian for Flat {
        fn name(&self) -> String {
            "constant".into()
        }
        fn dim(&self) -> usize {
            2
        }
        fn manifold(&self) -> Manifold {
            self.0
        }
        fn evaluate(&self, _x: [f64; 2]) -> CMatrix {
            crate::models::pauli()[2].clone()
        }
        fn analytic_gradient(&self, _x: [f64; 2]) -> Option<[CMatrix; 2]> {
            Some([CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)])
        }
    }

    fn sample(x: [f64; 2], p: [f64; 2]) -> DriveSample {
        let ginv = inverse_metric(Complex64::new(x[0], x[1]));
        DriveSample {
            t: 0.0,
            x,
            momentum: p,
            velocity: [ginv * p[0], ginv * p[1]],
            word_len: 0,
            crossings: [0, 0],
        }
    }

    #[test]
    fn constant_models_give_zero_observables() {
        let s = sample([0.1, 0.2], [0.3, -0.4]);
        for o in [
            observable_hdqs(&Flat(Manifold::Bolza), &s).unwrap(),
            observable_klein(&Flat(Manifold::Klein), &s).unwrap(),
            observable_rp2(&Flat(Manifold::Rp2), &s).unwrap(),
            observable_cd(&Flat(Manifold::Bolza), &s, 1).unwrap(),
        ] {
            assert!(o.iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn observables_are_hermitian() {
        let m = BolzaQubit::new(0.5).unwrap();
        let s = sample([0.2, -0.15], [0.04, 0.09]);
        let o = observable_hdqs(&m, &s).unwrap();
        assert!(crate::models::hermiticity_residual(&o) < 1e-12);
        let o = observable_cd(&m, &s, 1).unwrap();
        assert!(crate::models::hermiticity_residual(&o) < 1e-10);
    }

    #[test]
    fn hdqs_scales_with_momentum() {
        let m = BolzaQubit::new(0.5).unwrap();
        let a = observable_hdqs(&m, &sample([0.2, 0.1], [0.1, 0.05])).unwrap();
        let b = observable_hdqs(&m, &sample([0.2, 0.1], [0.05, 0.025])).unwrap();
        assert!((a - b.scale(2.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_series_average() {
        let mut s = ObservableSeries::default();
        for k in 0..=100 {
            s.push(k as f64 * 0.1, Complex64::new(0.3, 0.0)).unwrap();
        }
        let lam2 = 0.05f64.powi(2);
        let c = running_average(&s, lam2).unwrap();
        assert_eq!(c.horizons.len(), 100);
        assert!(c.running_average.iter().all(|v| (v - 0.3 / lam2).abs() < 1e-9));
        let wy: f64 = 0.032;
        let c = running_average(&s, wy * wy / std::f64::consts::PI).unwrap();
        assert!((c.final_value().unwrap() - std::f64::consts::PI * 0.3 / (wy * wy)).abs() < 1e-9);
        assert!(running_average(&ObservableSeries::default(), 1.0).is_err());
    }

    #[test]
    fn short_bolza_response_runs() {
        let m = BolzaQubit::new(0.5).unwrap();
        let setup = ResponseSetup {
            drive: GeodesicSpec::Bolza(BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 0.05, 20.0, 0.01)),
            kind: ResponseKind::Hdqs,
            dt: 0.02,
            band: 1,
            record_stride: 10,
            target: Some(1.0),
        };
        let out = run_response(&m, &setup).unwrap();
        assert_eq!(out.steps, 1000);
        assert!(out.max_norm_error < 1e-12);
        assert!(out.min_fidelity > 0.99);
        assert_eq!(out.curve.final_horizon(), Some(20.0));
    }

    #[test]
    fn mismatched_drive_is_rejected() {
        let m = KleinQubit::new(0.5).unwrap();
        let setup = ResponseSetup {
            drive: GeodesicSpec::Bolza(BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::Angle(0.0), 0.05, 1.0, 0.01)),
            kind: ResponseKind::Klein,
            dt: 0.02,
            band: 1,
            record_stride: 1,
            target: None,
        };
        assert!(run_response(&m, &setup).is_err());
    }
}
