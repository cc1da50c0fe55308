//! Schrödinger evolution along a drive, band tracking and diabatic
//! diagnostics.
//!
//! The propagator is the midpoint exponential `exp(-i H(t + dt/2) dt)`, so a
//! drive used for evolution with step `dt` is sampled at spacing `dt/2`: even
//! samples are step end points and odd samples midpoints.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::models::{eigensystem, grad_h, hermitize, BandSystem, CMatrix, CVector, ParentHamiltonian, FD_STEP};
use crate::trajectories::DriveSample;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amps: CVector,
}

impl QuantumState {
    pub fn new(amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Input(format!("state norm is {n}, expected 1")));
        }
        Ok(Self { amps })
    }

    pub fn from_slice(a: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(a))
    }

    pub fn band(bands: &BandSystem, n: usize) -> Self {
        Self { amps: bands.state(n) }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `<psi|O|psi>`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        self.amps.dotc(&(op * &self.amps))
    }

    pub fn apply(&mut self, u: &CMatrix) {
        self.amps = u * &self.amps;
    }
}

/// `|<phi|psi>|^2`.
pub fn fidelity(psi: &QuantumState, phi: &QuantumState) -> f64 {
    phi.amps.dotc(&psi.amps).norm_sqr()
}

pub fn overlap_fidelity(psi: &CVector, phi: &CVector) -> f64 {
    phi.dotc(psi).norm_sqr()
}

/// `exp(-i H dt)` for Hermitian `H`: closed form for two levels, spectral
/// decomposition otherwise.
pub fn unitary_step(h: &CMatrix, dt: f64) -> CMatrix {
    let n = h.nrows();
    if n == 2 {
        let h0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let hz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
        let off = 0.5 * (h[(1, 0)] + h[(0, 1)].conj());
        let r = (off.norm_sqr() + hz * hz).sqrt();
        let (s, c) = (r * dt).sin_cos();
        let k = if r > 0.0 { s / r } else { dt };
        let ph = (-I * h0 * dt).exp();
        // cos(r dt) - i sin(r dt) (h . sigma) / r
        let u00 = Complex64::new(c, -k * hz);
        let u11 = Complex64::new(c, k * hz);
        let u10 = -I * k * off;
        let u01 = -I * k * off.conj();
        return CMatrix::from_row_slice(2, 2, &[u00 * ph, u01 * ph, u10 * ph, u11 * ph]);
    }
    let eig = SymmetricEigen::new(hermitize(h));
    let v = &eig.eigenvectors;
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| (-I * e * dt).exp()));
    v * d * v.adjoint()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    MidpointExponential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub method: Method,
    /// Record every `sampling_stride`-th step.
    pub sampling_stride: usize,
}

impl EvolutionConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            method: Method::MidpointExponential,
            sampling_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sampling_stride == 0 {
            return Err(Error::Parameter("sampling stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Hamiltonian actually applied along the drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driving {
    Plain,
    /// `H + V + V^dag` for band `n`.
    Counterdiabatic { band: usize },
}

/// `dH/dt = v^i dH/dx^i` at a drive sample.
pub fn time_derivative(model: &dyn ParentHamiltonian, s: &DriveSample) -> Result<CMatrix> {
    let [gx, gy] = grad_h(model, s.x, FD_STEP)?;
    Ok(gx * Complex64::from(s.velocity[0]) + gy * Complex64::from(s.velocity[1]))
}

/// Minimum gap accepted by band-resolved operations.
pub const GAP_THRESHOLD: f64 = 1e-6;

fn check_gap(bands: &BandSystem, n: usize, at: [f64; 2]) -> Result<()> {
    for m in 0..bands.dim() {
        if m != n {
            let gap = (bands.energies[n] - bands.energies[m]).abs();
            if gap < GAP_THRESHOLD {
                return Err(Error::Degeneracy {
                    lower: m.min(n),
                    upper: m.max(n),
                    location: at,
                    gap,
                    threshold: GAP_THRESHOLD,
                });
            }
        }
    }
    Ok(())
}

/// Hermitised counterdiabatic term for band `n` from given bands and `dH/dt`.
pub fn counterdiabatic_from(bands: &BandSystem, dh: &CMatrix, n: usize, at: [f64; 2]) -> Result<CMatrix> {
    check_gap(bands, n, at)?;
    let d = bands.dim();
    let psi_n = bands.state(n);
    let dn = dh * &psi_n;
    let mut v = CMatrix::zeros(d, d);
    for m in 0..d {
        if m == n {
            continue;
        }
        let psi_m = bands.state(m);
        let amp = I * psi_m.dotc(&dn) / (bands.energies[n] - bands.energies[m]);
        v += (&psi_m * psi_n.adjoint()) * amp;
    }
    Ok(&v + v.adjoint())
}

/// `V + V^dag` with `V = i sum_{m != n} |m><m| dH/dt |n><n| / (E_n - E_m)`.
pub fn counterdiabatic_term(model: &dyn ParentHamiltonian, s: &DriveSample, n: usize) -> Result<CMatrix> {
    let bands = eigensystem(&model.evaluate(s.x))?;
    counterdiabatic_from(&bands, &time_derivative(model, s)?, n, s.x)
}

pub fn driven_hamiltonian(model: &dyn ParentHamiltonian, s: &DriveSample, driving: Driving) -> Result<CMatrix> {
    let h = model.evaluate(s.x);
    match driving {
        Driving::Plain => Ok(h),
        Driving::Counterdiabatic { band } => {
            let bands = eigensystem(&h)?;
            let v = counterdiabatic_from(&bands, &time_derivative(model, s)?, band, s.x)?;
            Ok(h + v)
        }
    }
}

/// Groups a half-step sample stream into `(start, midpoint, end)` triples.
pub struct MidpointSteps<I> {
    inner: I,
    last: Option<DriveSample>,
    half: f64,
    started: bool,
}

impl<I: Iterator<Item = Result<DriveSample>>> MidpointSteps<I> {
    pub fn new(inner: I, dt: f64) -> Self {
        Self {
            inner,
            last: None,
            half: 0.5 * dt,
            started: false,
        }
    }

    /// First sample of the stream.
    pub fn start(&mut self) -> Result<DriveSample> {
        let s = self
            .inner
            .next()
            .ok_or_else(|| Error::Input("drive has no samples".into()))??;
        self.last = Some(s);
        self.started = true;
        Ok(s)
    }

    fn check_spacing(&self, a: &DriveSample, b: &DriveSample) -> Result<()> {
        let h = b.t - a.t;
        if (h - self.half).abs() > 1e-9 * self.half.max(1.0) {
            return Err(Error::Input(format!(
                "drive sample spacing {h} does not match half the evolution step {}",
                self.half
            )));
        }
        Ok(())
    }
}

impl<I: Iterator<Item = Result<DriveSample>>> Iterator for MidpointSteps<I> {
    type Item = Result<(DriveSample, DriveSample, DriveSample)>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            if let Err(e) = self.start() {
                return Some(Err(e));
            }
        }
        let a = self.last?;
        let mid = match self.inner.next()? {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let b = match self.inner.next()? {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        if let Err(e) = self.check_spacing(&a, &mid).and(self.check_spacing(&mid, &b)) {
            self.last = None;
            return Some(Err(e));
        }
        self.last = Some(b);
        Some(Ok((a, mid, b)))
    }
}

/// Evolves `psi0` along a half-step drive stream up to `horizon` (defaults to
/// the end of the drive) and returns `(t, state)` every stride.
pub fn evolve<I>(
    psi0: &QuantumState,
    model: &dyn ParentHamiltonian,
    drive: I,
    config: &EvolutionConfig,
    driving: Driving,
    horizon: Option<f64>,
) -> Result<Vec<(f64, QuantumState)>>
where
    I: Iterator<Item = Result<DriveSample>>,
{
    config.validate()?;
    if psi0.dim() != model.dim() {
        return Err(Error::Input(format!(
            "state dimension {} does not match model dimension {}",
            psi0.dim(),
            model.dim()
        )));
    }
    let mut steps = MidpointSteps::new(drive, config.dt);
    let first = steps.start()?;
    let mut psi = psi0.clone();
    let mut out = vec![(first.t, psi.clone())];
    let mut t_end = first.t;
    for (k, step) in steps.by_ref().enumerate() {
        let (_, mid, b) = step?;
        if let Some(h) = horizon {
            if b.t > h + 1e-9 * config.dt {
                break;
            }
        }
        let u = unitary_step(&driven_hamiltonian(model, &mid, driving)?, config.dt);
        psi.apply(&u);
        t_end = b.t;
        if (k + 1) % config.sampling_stride == 0 {
            out.push((b.t, psi.clone()));
        }
    }
    if let Some(h) = horizon {
        if t_end < h - 1e-9 * config.dt {
            return Err(Error::Input(format!(
                "drive ends at t = {t_end}, before the requested horizon {h}"
            )));
        }
    }
    Ok(out)
}

/// Dynamic and geometric phase of a tracked band.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct PhaseAccumulator {
    pub band: usize,
    /// `-int E_n dt`.
    pub dynamic_phase: f64,
    /// `-sum Im log <psi_n(t_k)|psi_n(t_{k+1})>`.
    pub berry_phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackedBand {
    pub t: f64,
    pub energy: f64,
    pub state: CVector,
    pub phases: PhaseAccumulator,
}

/// Follows band `n` along any sample sequence, accumulating its phases.
pub fn track_band<I>(model: &dyn ParentHamiltonian, drive: I, n: usize) -> Result<Vec<TrackedBand>>
where
    I: IntoIterator<Item = Result<DriveSample>>,
{
    track_band_with(drive, n, |s| eigensystem(&model.evaluate(s.x)))
}

/// [`track_band`] with a caller-supplied eigensolver (used to test gauge
/// invariance).
pub fn track_band_with<I, F>(drive: I, n: usize, mut bands_at: F) -> Result<Vec<TrackedBand>>
where
    I: IntoIterator<Item = Result<DriveSample>>,
    F: FnMut(&DriveSample) -> Result<BandSystem>,
{
    let mut out: Vec<TrackedBand> = Vec::new();
    for s in drive {
        let s = s?;
        let bands = bands_at(&s)?;
        if n >= bands.dim() {
            return Err(Error::Input(format!("band {n} out of range")));
        }
        check_gap(&bands, n, s.x)?;
        let state = bands.state(n);
        let energy = bands.energies[n];
        let phases = match out.last() {
            None => PhaseAccumulator {
                band: n,
                ..Default::default()
            },
            Some(prev) => {
                let dt = s.t - prev.t;
                PhaseAccumulator {
                    band: n,
                    dynamic_phase: prev.phases.dynamic_phase - 0.5 * (prev.energy + energy) * dt,
                    berry_phase: prev.phases.berry_phase - prev.state.dotc(&state).arg(),
                }
            }
        };
        out.push(TrackedBand {
            t: s.t,
            energy,
            state,
            phases,
        });
    }
    Ok(out)
}

/// `|G(t)|` for bands `(m, n)` sampled every `stride` drive samples.
///
/// Both bands are carried in a parallel-transported gauge, which absorbs the
/// Berry phase factors and makes the magnitude independent of the eigensolver
/// gauge:
/// `G(t) = int_0^t conj(<m|dH/dt|n>) / (E_n - E_m) e^{-i (phi_n - phi_m)} ds`.
pub fn g_correction<I>(
    model: &dyn ParentHamiltonian,
    drive: I,
    m: usize,
    n: usize,
    stride: usize,
) -> Result<Vec<(f64, f64)>>
where
    I: IntoIterator<Item = Result<DriveSample>>,
{
    if m == n {
        return Err(Error::Input("G requires two distinct bands".into()));
    }
    let stride = stride.max(1);
    let mut out = Vec::new();
    let mut g = Complex64::new(0.0, 0.0);
    let mut phase = 0.0; // phi_n - phi_m
    let mut prev: Option<(f64, Complex64, f64, CVector, CVector)> = None;
    for (k, s) in drive.into_iter().enumerate() {
        let s = s?;
        let bands = eigensystem(&model.evaluate(s.x))?;
        if m.max(n) >= bands.dim() {
            return Err(Error::Input("band index out of range".into()));
        }
        check_gap(&bands, n, s.x)?;
        let (mut pn, mut pm) = (bands.state(n), bands.state(m));
        if let Some((_, _, _, qn, qm)) = &prev {
            pn *= (-I * qn.dotc(&pn).arg()).exp();
            pm *= (-I * qm.dotc(&pm).arg()).exp();
        }
        let gap = bands.energies[n] - bands.energies[m];
        let dh = time_derivative(model, &s)?;
        let coupling = pm.dotc(&(&dh * &pn)).conj() / gap;
        match &prev {
            None => {}
            Some((t0, f0, gap0, _, _)) => {
                let dt = s.t - t0;
                phase -= 0.5 * (gap0 + gap) * dt;
                let f1 = coupling * (-I * phase).exp();
                g += (f0 + f1) * (0.5 * dt);
            }
        }
        let f = coupling * (-I * phase).exp();
        if k % stride == 0 {
            out.push((s.t, g.norm()));
        }
        prev = Some((s.t, f, gap, pn, pm));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{pauli, KleinQubit};
    use crate::trajectories::{FlatManifold, FlatPropagator, FlatSpec, Manifold};

    #[derive(Debug)]
    struct Constant(CMatrix);

    impl ParentHamiltonian for Constant {
        fn name(&self) -> String {
            "constant".into()
        }
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn manifold(&self) -> Manifold {
            Manifold::Torus
        }
        fn evaluate(&self, _x: [f64; 2]) -> CMatrix {
            self.0.clone()
        }
        fn analytic_gradient(&self, _x: [f64; 2]) -> Option<[CMatrix; 2]> {
            let z = CMatrix::zeros(self.0.nrows(), self.0.nrows());
            Some([z.clone(), z])
        }
    }

    fn torus(t_max: f64, dt: f64) -> FlatPropagator {
        FlatPropagator::new(&FlatSpec {
            manifold: FlatManifold::Torus,
            theta0: [0.0, 0.0],
            omega: [0.3, 0.7],
            t_max,
            dt,
        })
        .unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let a = QuantumState::from_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let b = QuantumState::from_slice(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let s = 0.5f64.sqrt();
        let c = QuantumState::from_slice(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap();
        assert_eq!(fidelity(&a, &a), 1.0);
        assert_eq!(fidelity(&a, &b), 0.0);
        assert!((fidelity(&a, &c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_sigma_z() {
        let model = Constant(pauli()[2].clone());
        let psi0 = QuantumState::from_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let t = 7.3;
        let out = evolve(&psi0, &model, torus(t, 0.005).map(Ok), &EvolutionConfig::new(0.01), Driving::Plain, Some(t)).unwrap();
        let (tf, psi) = out.last().unwrap();
        assert!((tf - t).abs() < 1e-12);
        let expect = (-I * t).exp();
        assert!((psi.amplitudes()[0] - expect).norm() < 1e-12);
        assert!(psi.amplitudes()[1].norm() < 1e-15);
    }

    #[test]
    fn unitary_matches_spectral_form() {
        let h = crate::models::qubit_matrix([0.3, -0.8, 0.4]) + CMatrix::identity(2, 2) * Complex64::from(0.25);
        let u = unitary_step(&h, 0.37);
        let eig = SymmetricEigen::new(h.clone());
        let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| (-I * e * 0.37).exp()));
        let v = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        assert!((u - v).norm() < 1e-13);
    }

    #[test]
    fn horizon_beyond_drive_is_rejected() {
        let model = Constant(pauli()[2].clone());
        let psi0 = QuantumState::from_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let r = evolve(&psi0, &model, torus(1.0, 0.005).map(Ok), &EvolutionConfig::new(0.01), Driving::Plain, Some(2.0));
        assert!(matches!(r, Err(Error::Input(_))));
        let r = evolve(&psi0, &model, torus(1.0, 0.01).map(Ok), &EvolutionConfig::new(0.01), Driving::Plain, None);
        assert!(r.is_err());
    }

    #[test]
    fn constant_band_phases() {
        let model = Constant(pauli()[2].clone() * Complex64::from(2.0));
        let tr = track_band(&model, torus(5.0, 0.1).map(Ok), 1).unwrap();
        let last = tr.last().unwrap();
        assert_eq!(last.phases.berry_phase, 0.0);
        assert!((last.phases.dynamic_phase + 10.0).abs() < 1e-12);
    }

    #[test]
    fn counterdiabatic_constant_is_zero() {
        let model = Constant(pauli()[0].clone());
        let s = torus(1.0, 0.1).next().unwrap();
        let v = counterdiabatic_term(&model, &s, 1).unwrap();
        assert!(v.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn counterdiabatic_is_hermitian() {
        let model = KleinQubit::new(0.5).unwrap();
        for s in torus(20.0, 0.7) {
            let v = counterdiabatic_term(&model, &s, 1).unwrap();
            assert!(crate::models::hermiticity_residual(&v) < 1e-12);
        }
    }

    #[test]
    fn g_starts_at_zero() {
        let model = KleinQubit::new(0.5).unwrap();
        let g = g_correction(&model, torus(3.0, 0.01).map(Ok), 0, 1, 10).unwrap();
        assert_eq!(g[0], (0.0, 0.0));
        assert!(g.iter().all(|(_, v)| v.is_finite()));
    }
}
