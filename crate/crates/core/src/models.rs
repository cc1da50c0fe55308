//! Parent Hamiltonians and their band structure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Debug;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::trajectories::Manifold;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Radius of the bump function of the Bolza model.
pub const BUMP_RADIUS: f64 = 0.6;

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Symmetry that protects a nonorientable invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// `H(x, y) = sigma_z H(x, -y) sigma_z`.
    KleinMirror,
    /// `H(x, y) = U^dag H(y, pi - x) U` with `U = exp(-i pi sigma_z / 4)`.
    Rp2Rotation,
}

/// A Hermitian matrix field over a manifold chart.
pub trait ParentHamiltonian: Send + Sync + Debug {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn manifold(&self) -> Manifold;
    fn evaluate(&self, x: [f64; 2]) -> CMatrix;

    fn analytic_gradient(&self, _x: [f64; 2]) -> Option<[CMatrix; 2]> {
        None
    }

    /// `d(x)` for models of the form `H = d . sigma`.
    fn qubit_field(&self, _x: [f64; 2]) -> Option<[f64; 3]> {
        None
    }

    /// Radius outside which the field is constant (disk models).
    fn compact_support(&self) -> Option<f64> {
        None
    }

    fn symmetry(&self) -> Option<Symmetry> {
        None
    }
}

pub fn pauli() -> [CMatrix; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}

/// `d . sigma`.
pub fn qubit_matrix(d: [f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(d[2], 0.0),
            Complex64::new(d[0], -d[1]),
            Complex64::new(d[0], d[1]),
            Complex64::new(-d[2], 0.0),
        ],
    )
}

pub fn hermiticity_residual(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(H + H^dag) / 2`.
pub fn hermitize(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()).scale(0.5)
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Bump profile value, derivative and `(cos f, sin f)` at radius `r`.
///
/// Inside the bump `f = pi/2 - delta` with `delta = -pi expm1(-s)`,
/// `s = r^2 / (rho^2 (rho^2 - r^2))`, which keeps `cos f = sin delta` accurate
/// near the origin.
pub fn bump_profile(r: f64) -> (f64, f64, f64, f64) {
    let rho2 = BUMP_RADIUS * BUMP_RADIUS;
    let r2 = r * r;
    if r >= BUMP_RADIUS {
        return (-FRAC_PI_2, 0.0, 0.0, -1.0);
    }
    let gap = rho2 - r2;
    let s = r2 / (rho2 * gap);
    let e = (-s).exp();
    let delta = -PI * (-s).exp_m1();
    let f = FRAC_PI_2 - delta;
    let df = -PI * e * 2.0 * r / (gap * gap);
    (f, df, delta.sin(), delta.cos())
}

/// `f(z) = A exp(-1/(rho^2 - |z|^2)) + B` inside `|z| < rho`, `B` outside, with
/// `A = pi e^{1/rho^2}` and `B = -pi/2`.
pub fn bump(z: Complex64) -> f64 {
    bump_profile(z.norm()).0
}

/// Qubit on the Bolza surface with a compactly supported skyrmion texture.
#[derive(Clone, Debug, PartialEq)]
pub struct BolzaQubit {
    pub epsilon: f64,
}

impl BolzaQubit {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || (epsilon.abs() - 1.0).abs() < 1e-12 {
            return Err(Error::Parameter(format!(
                "|epsilon| = 1 makes the field vanish outside the bump (epsilon = {epsilon})"
            )));
        }
        Ok(Self { epsilon })
    }

    /// Unnormalised field and its chart derivatives.
    fn primitive(&self, x: [f64; 2]) -> ([f64; 3], [[f64; 3]; 2]) {
        let r = x[0].hypot(x[1]);
        let (_, df, cf, sf) = bump_profile(r);
        if r < 1e-30 {
            return ([0.0, 0.0, sf + self.epsilon], [[0.0; 3]; 2]);
        }
        let (u, v) = (x[0] / r, x[1] / r);
        let d = [cf * u, cf * v, sf + self.epsilon];
        // d/dx (cos f . x/r) = -sin f f' x^2/r^2 + cos f y^2/r^3, and so on
        let r3 = r * r * r;
        let dx = [
            -sf * df * u * u + cf * x[1] * x[1] / r3,
            -sf * df * u * v - cf * x[0] * x[1] / r3,
            cf * df * u,
        ];
        let dy = [
            -sf * df * u * v - cf * x[0] * x[1] / r3,
            -sf * df * v * v + cf * x[0] * x[0] / r3,
            cf * df * v,
        ];
        (d, [dx, dy])
    }

    pub fn field(&self, x: [f64; 2]) -> [f64; 3] {
        let (d, _) = self.primitive(x);
        let n = norm3(d);
        [d[0] / n, d[1] / n, d[2] / n]
    }

    pub fn field_gradient(&self, x: [f64; 2]) -> [[f64; 3]; 2] {
        let (d, g) = self.primitive(x);
        let n = norm3(d);
        let u = [d[0] / n, d[1] / n, d[2] / n];
        g.map(|gi| {
            let proj = dot3(u, gi);
            [
                (gi[0] - u[0] * proj) / n,
                (gi[1] - u[1] * proj) / n,
                (gi[2] - u[2] * proj) / n,
            ]
        })
    }
}

impl ParentHamiltonian for BolzaQubit {
    fn name(&self) -> String {
        format!("bolza_qubit(epsilon={})", self.epsilon)
    }
    fn dim(&self) -> usize {
        2
    }
    fn manifold(&self) -> Manifold {
        Manifold::Bolza
    }
    fn evaluate(&self, x: [f64; 2]) -> CMatrix {
        qubit_matrix(self.field(x))
    }
    fn analytic_gradient(&self, x: [f64; 2]) -> Option<[CMatrix; 2]> {
        Some(self.field_gradient(x).map(qubit_matrix))
    }
    fn qubit_field(&self, x: [f64; 2]) -> Option<[f64; 3]> {
        Some(self.field(x))
    }
    fn compact_support(&self) -> Option<f64> {
        Some(BUMP_RADIUS)
    }
}

/// Klein-bottle qubit `d = (sin x sin y, cos x sin 2y, m - cos x + 2 cos 2y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KleinQubit {
    pub m: f64,
}

impl KleinQubit {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Parameter("m must be finite".into()));
        }
        Ok(Self { m })
    }

    pub fn field(&self, t: [f64; 2]) -> [f64; 3] {
        let (sx, cx) = t[0].sin_cos();
        let (sy, _) = t[1].sin_cos();
        let (s2y, c2y) = (2.0 * t[1]).sin_cos();
        [sx * sy, cx * s2y, self.m - cx + 2.0 * c2y]
    }

    pub fn field_gradient(&self, t: [f64; 2]) -> [[f64; 3]; 2] {
        let (sx, cx) = t[0].sin_cos();
        let (sy, cy) = t[1].sin_cos();
        let (s2y, c2y) = (2.0 * t[1]).sin_cos();
        [
            [cx * sy, -sx * s2y, sx],
            [sx * cy, 2.0 * cx * c2y, -4.0 * s2y],
        ]
    }
}

impl ParentHamiltonian for KleinQubit {
    fn name(&self) -> String {
        format!("klein_qubit(m={})", self.m)
    }
    fn dim(&self) -> usize {
        2
    }
    fn manifold(&self) -> Manifold {
        Manifold::Klein
    }
    fn evaluate(&self, x: [f64; 2]) -> CMatrix {
        qubit_matrix(self.field(x))
    }
    fn analytic_gradient(&self, x: [f64; 2]) -> Option<[CMatrix; 2]> {
        Some(self.field_gradient(x).map(qubit_matrix))
    }
    fn qubit_field(&self, x: [f64; 2]) -> Option<[f64; 3]> {
        Some(self.field(x))
    }
    fn symmetry(&self) -> Option<Symmetry> {
        Some(Symmetry::KleinMirror)
    }
}

/// RP^2 qubit `d = (sin x sin 2y, sin 2x sin y, m + cos 2x + cos 2y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rp2Qubit {
    pub m: f64,
}

impl Rp2Qubit {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Parameter("m must be finite".into()));
        }
        Ok(Self { m })
    }

    pub fn field(&self, t: [f64; 2]) -> [f64; 3] {
        let (sx, _) = t[0].sin_cos();
        let (sy, _) = t[1].sin_cos();
        let (s2x, c2x) = (2.0 * t[0]).sin_cos();
        let (s2y, c2y) = (2.0 * t[1]).sin_cos();
        [sx * s2y, s2x * sy, self.m + c2x + c2y]
    }

    pub fn field_gradient(&self, t: [f64; 2]) -> [[f64; 3]; 2] {
        let (sx, cx) = t[0].sin_cos();
        let (sy, cy) = t[1].sin_cos();
        let (s2x, c2x) = (2.0 * t[0]).sin_cos();
        let (s2y, c2y) = (2.0 * t[1]).sin_cos();
        [
            [cx * s2y, 2.0 * c2x * sy, -2.0 * s2x],
            [2.0 * sx * c2y, s2x * cy, -2.0 * s2y],
        ]
    }
}

impl ParentHamiltonian for Rp2Qubit {
    fn name(&self) -> String {
        format!("rp2_qubit(m={})", self.m)
    }
    fn dim(&self) -> usize {
        2
    }
    fn manifold(&self) -> Manifold {
        Manifold::Rp2
    }
    fn evaluate(&self, x: [f64; 2]) -> CMatrix {
        qubit_matrix(self.field(x))
    }
    fn analytic_gradient(&self, x: [f64; 2]) -> Option<[CMatrix; 2]> {
        Some(self.field_gradient(x).map(qubit_matrix))
    }
    fn qubit_field(&self, x: [f64; 2]) -> Option<[f64; 3]> {
        Some(self.field(x))
    }
    fn symmetry(&self) -> Option<Symmetry> {
        Some(Symmetry::Rp2Rotation)
    }
}

pub fn bolza_qubit(epsilon: f64) -> Result<BolzaQubit> {
    BolzaQubit::new(epsilon)
}

pub fn klein_qubit(m: f64) -> Result<KleinQubit> {
    KleinQubit::new(m)
}

pub fn rp2_qubit(m: f64) -> Result<Rp2Qubit> {
    Rp2Qubit::new(m)
}

/// Named built-in model with its parameter, as it appears in configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    BolzaQubit { epsilon: f64 },
    KleinQubit { m: f64 },
    Rp2Qubit { m: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn ParentHamiltonian>> {
        Ok(match *self {
            ModelSpec::BolzaQubit { epsilon } => Box::new(BolzaQubit::new(epsilon)?),
            ModelSpec::KleinQubit { m } => Box::new(KleinQubit::new(m)?),
            ModelSpec::Rp2Qubit { m } => Box::new(Rp2Qubit::new(m)?),
        })
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            ModelSpec::BolzaQubit { .. } => Manifold::Bolza,
            ModelSpec::KleinQubit { .. } => Manifold::Klein,
            ModelSpec::Rp2Qubit { .. } => Manifold::Rp2,
        }
    }
}

/// Eigen-decomposition with ascending energies.
///
/// Gauge: the largest-magnitude component of every state is real positive
/// (lowest index on ties).
#[derive(Clone, Debug, PartialEq)]
pub struct BandSystem {
    pub energies: Vec<f64>,
    /// States as columns.
    pub states: CMatrix,
}

impl BandSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn state(&self, n: usize) -> CVector {
        self.states.column(n).into_owned()
    }
}

fn fix_gauge(v: &mut CVector) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, c) in v.iter().enumerate() {
        let m = c.norm();
        if m > best_mag + 1e-8 {
            best = i;
            best_mag = m;
        }
    }
    if best_mag < 1e-8 {
        return;
    }
    let c = v[best];
    let phase = c.conj() / c.norm();
    v.iter_mut().for_each(|x| *x *= phase);
    v[best] = Complex64::new(v[best].re, 0.0);
}

fn qubit_bands(h: &CMatrix) -> BandSystem {
    let h0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let hz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let off = 0.5 * (h[(1, 0)] + h[(0, 1)].conj());
    let (hx, hy) = (off.re, off.im);
    let r = (hx * hx + hy * hy + hz * hz).sqrt();
    let (lo, up) = if hz >= 0.0 {
        (
            [Complex64::new(-hx, hy), Complex64::new(r + hz, 0.0)],
            [Complex64::new(r + hz, 0.0), Complex64::new(hx, hy)],
        )
    } else {
        (
            [Complex64::new(r - hz, 0.0), Complex64::new(-hx, -hy)],
            [Complex64::new(hx, -hy), Complex64::new(r - hz, 0.0)],
        )
    };
    let normed = |v: [Complex64; 2]| {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let mut out = if n > 0.0 {
            CVector::from_vec(vec![v[0] / n, v[1] / n])
        } else {
            CVector::from_vec(vec![Complex64::new(0.0, 0.0); 2])
        };
        fix_gauge(&mut out);
        out
    };
    let (mut lo, mut up) = (normed(lo), normed(up));
    if r == 0.0 {
        lo = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        up = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    }
    let mut states = CMatrix::zeros(2, 2);
    states.set_column(0, &lo);
    states.set_column(1, &up);
    BandSystem {
        energies: vec![h0 - r, h0 + r],
        states,
    }
}

pub fn eigensystem(h: &CMatrix) -> Result<BandSystem> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::Validation("Hamiltonian must be a nonempty square matrix".into()));
    }
    let scale = h.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let res = hermiticity_residual(h);
    if res > 1e-10 * scale {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (residual {res:.3e})"
        )));
    }
    if n == 2 {
        return Ok(qubit_bands(h));
    }
    let eig = SymmetricEigen::new(hermitize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut states = CMatrix::zeros(n, n);
    let mut energies = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let norm = v.norm();
        v.unscale_mut(norm);
        fix_gauge(&mut v);
        states.set_column(k, &v);
        energies.push(eig.eigenvalues[i]);
    }
    Ok(BandSystem { energies, states })
}

/// `(dH/dx^1, dH/dx^2)`: analytic when the model provides it, otherwise
/// central differences with step `h`, Hermitised.
pub fn grad_h(model: &dyn ParentHamiltonian, x: [f64; 2], h: f64) -> Result<[CMatrix; 2]> {
    if let Some(g) = model.analytic_gradient(x) {
        return Ok(g);
    }
    finite_difference_gradient(model, x, h)
}

pub fn finite_difference_gradient(
    model: &dyn ParentHamiltonian,
    x: [f64; 2],
    h: f64,
) -> Result<[CMatrix; 2]> {
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {h}")));
    }
    if model.manifold() == Manifold::Bolza {
        let oct = crate::hyperbolic::FundamentalOctagon::new(crate::Precision::digits(30));
        let within = [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)].iter().all(|(a, b)| {
            oct.contains_c64(Complex64::new(x[0] + a, x[1] + b))
        });
        if !within && model.compact_support().is_none() {
            return Err(Error::Domain(format!(
                "finite-difference stencil at ({}, {}) leaves the octagon chart",
                x[0], x[1]
            )));
        }
    }
    let central = |d: [f64; 2]| {
        let p = model.evaluate([x[0] + d[0], x[1] + d[1]]);
        let m = model.evaluate([x[0] - d[0], x[1] - d[1]]);
        hermitize(&(p - m).unscale(2.0 * h))
    };
    Ok([central([h, 0.0]), central([0.0, h])])
}

/// Rectangular sampling grid with inclusive end points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl SampleGrid {
    pub fn new(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Self {
        Self { x, y, nx, ny }
    }

    /// Natural chart of each manifold.
    pub fn for_manifold(manifold: Manifold, nx: usize, ny: usize) -> Self {
        match manifold {
            Manifold::Bolza => Self::new([-0.62, 0.62], [-0.62, 0.62], nx, ny),
            Manifold::Torus => Self::new([0.0, 2.0 * PI], [0.0, 2.0 * PI], nx, ny),
            Manifold::Klein => Self::new([-PI, PI], [-PI, 0.0], nx, ny),
            Manifold::Rp2 => Self::new([0.0, PI], [0.0, PI], nx, ny),
        }
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let fx = if self.nx == 0 { 0.0 } else { i as f64 / self.nx as f64 };
        let fy = if self.ny == 0 { 0.0 } else { j as f64 / self.ny as f64 };
        [
            self.x[0] + (self.x[1] - self.x[0]) * fx,
            self.y[0] + (self.y[1] - self.y[0]) * fy,
        ]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity((self.nx + 1) * (self.ny + 1));
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                out.push(self.point(i, j));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairGap {
    pub lower: usize,
    pub upper: usize,
    pub min_gap: f64,
    pub location: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub pairs: Vec<PairGap>,
    pub threshold: f64,
    pub fully_gapped: bool,
}

impl GapReport {
    pub fn min_gap(&self) -> f64 {
        self.pairs.iter().map(|p| p.min_gap).fold(f64::INFINITY, f64::min)
    }

    /// Fails with a degeneracy error naming the worst pair.
    pub fn require_gapped(&self) -> Result<()> {
        match self.pairs.iter().find(|p| p.min_gap <= self.threshold) {
            None => Ok(()),
            Some(p) => Err(Error::Degeneracy {
                lower: p.lower,
                upper: p.upper,
                location: p.location,
                gap: p.min_gap,
                threshold: self.threshold,
            }),
        }
    }
}

pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-3;

pub fn gap_report(model: &dyn ParentHamiltonian, grid: &SampleGrid, threshold: f64) -> Result<GapReport> {
    let pts: Vec<[f64; 2]> = grid
        .points()
        .into_iter()
        .filter(|x| model.manifold() != Manifold::Bolza || x[0].hypot(x[1]) < 1.0)
        .collect();
    if pts.is_empty() {
        return Err(Error::Input("gap scan grid is empty".into()));
    }
    let d = model.dim();
    let per_point: Vec<(Vec<f64>, [f64; 2])> = pts
        .par_iter()
        .map(|&x| {
            let bands = eigensystem(&model.evaluate(x))?;
            Ok(((0..d - 1).map(|n| bands.energies[n + 1] - bands.energies[n]).collect(), x))
        })
        .collect::<Result<_>>()?;
    let pairs = (0..d - 1)
        .map(|n| {
            let (gap, loc) = per_point
                .iter()
                .map(|(g, x)| (g[n], *x))
                .fold((f64::INFINITY, [0.0, 0.0]), |a, b| if b.0 < a.0 { b } else { a });
            PairGap {
                lower: n,
                upper: n + 1,
                min_gap: gap,
                location: loc,
            }
        })
        .collect::<Vec<_>>();
    let fully_gapped = pairs.iter().all(|p| p.min_gap > threshold);
    Ok(GapReport {
        pairs,
        threshold,
        fully_gapped,
    })
}

fn symmetry_unitary(s: Symmetry) -> CMatrix {
    match s {
        Symmetry::KleinMirror => pauli()[2].clone(),
        Symmetry::Rp2Rotation => {
            let e = (-I * PI / 4.0).exp();
            CMatrix::from_row_slice(2, 2, &[e, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), e.conj()])
        }
    }
}

/// Largest entrywise violation of the model's protecting symmetry on `grid`.
pub fn symmetry_residual(model: &dyn ParentHamiltonian, grid: &SampleGrid) -> Result<(f64, [f64; 2])> {
    let sym = model
        .symmetry()
        .ok_or_else(|| Error::Unsupported(format!("{} declares no symmetry", model.name())))?;
    let u = symmetry_unitary(sym);
    let ud = u.adjoint();
    let worst = grid
        .points()
        .par_iter()
        .map(|&x| {
            let h = model.evaluate(x);
            let image = match sym {
                Symmetry::KleinMirror => &u * model.evaluate([x[0], -x[1]]) * &ud,
                Symmetry::Rp2Rotation => &ud * model.evaluate([x[1], PI - x[0]]) * &u,
            };
            let r = (h - image).iter().map(|c| c.norm()).fold(0.0, f64::max);
            (r, x)
        })
        .reduce(|| (0.0, [0.0, 0.0]), |a, b| if b.0 > a.0 { b } else { a });
    Ok(worst)
}

pub fn require_symmetry(model: &dyn ParentHamiltonian, grid: &SampleGrid, tol: f64) -> Result<()> {
    let (residual, location) = symmetry_residual(model, grid)?;
    if residual > tol {
        return Err(Error::Symmetry { residual, location });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_values() {
        assert_relative_eq!(bump(Complex64::new(0.0, 0.0)), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(bump(Complex64::new(0.0, 0.6)), -FRAC_PI_2);
        assert_eq!(bump(Complex64::new(0.9, 0.0)), -FRAC_PI_2);
        let near = bump(Complex64::new(0.5999999, 0.0));
        assert!((near + FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn bolza_field() {
        assert!(BolzaQubit::new(1.0).is_err());
        assert!(BolzaQubit::new(-1.0).is_err());
        let m = BolzaQubit::new(0.5).unwrap();
        assert_eq!(m.field([0.0, 0.0]), [0.0, 0.0, 1.0]);
        assert_eq!(m.field([0.6, 0.0]), [0.0, 0.0, -1.0]);
        assert_eq!(m.field([0.3, 0.7]), [0.0, 0.0, -1.0]);
        for x in [[0.1, 0.2], [0.4, -0.3], [0.59, 0.0], [1e-31, 0.0]] {
            assert!((norm3(m.field(x)) - 1.0).abs() < 1e-14);
        }
        let g = m.field_gradient([0.8, 0.0]);
        assert_eq!(g, [[0.0; 3]; 2]);
    }

    #[test]
    fn bolza_gradient_matches_differences() {
        let m = BolzaQubit::new(0.5).unwrap();
        for x in [[0.1, 0.2], [0.35, -0.1], [-0.2, -0.45], [0.01, 0.003]] {
            let g = m.field_gradient(x);
            let h = 1e-6;
            for k in 0..2 {
                let mut a = x;
                let mut b = x;
                a[k] -= h;
                b[k] += h;
                let (fa, fb) = (m.field(a), m.field(b));
                for c in 0..3 {
                    assert!(((fb[c] - fa[c]) / (2.0 * h) - g[k][c]).abs() < 1e-6, "{x:?} {k} {c}");
                }
            }
        }
    }

    #[test]
    fn bolza_seam_continuity() {
        let m = BolzaQubit::new(0.5).unwrap();
        let inside = m.field([0.6 - 1e-7, 0.0]);
        let outside = m.field([0.6 + 1e-7, 0.0]);
        for c in 0..3 {
            assert!((inside[c] - outside[c]).abs() < 1e-6);
        }
        let gi = m.field_gradient([0.6 - 1e-7, 0.0]);
        assert!(gi.iter().flatten().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn klein_examples() {
        let k = KleinQubit::new(2.0).unwrap();
        let d = k.field([0.0, 0.0]);
        assert_eq!(d, [0.0, 0.0, 3.0]);
        let d = k.field([FRAC_PI_2, -FRAC_PI_2]);
        assert!((d[0] + 1.0).abs() < 1e-15 && d[1].abs() < 1e-15 && d[2].abs() < 1e-15);
        let g = k.field_gradient([PI / 4.0, 0.0]);
        assert_relative_eq!(g[0][2], (PI / 4.0).sin(), epsilon = 1e-15);
        let grid = SampleGrid::for_manifold(Manifold::Klein, 40, 20);
        assert!(symmetry_residual(&k, &grid).unwrap().0 < 1e-12);
    }

    #[test]
    fn rp2_examples() {
        let r = Rp2Qubit::new(1.0).unwrap();
        assert_eq!(r.field([0.0, 0.0]), [0.0, 0.0, 3.0]);
        let grid = SampleGrid::for_manifold(Manifold::Rp2, 50, 50);
        assert!(symmetry_residual(&r, &grid).unwrap().0 < 1e-12);
        let min = SampleGrid::for_manifold(Manifold::Rp2, 200, 200)
            .points()
            .iter()
            .map(|&x| norm3(r.field(x)))
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
    }

    #[test]
    fn eigensystem_examples() {
        let b = eigensystem(&pauli()[2]).unwrap();
        assert_eq!(b.energies, vec![-1.0, 1.0]);
        assert_eq!(b.state(0), CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]));
        assert_eq!(b.state(1), CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]));
        let h = qubit_matrix([0.6, -0.48, 0.64]);
        let b1 = eigensystem(&h).unwrap();
        let b2 = eigensystem(&h).unwrap();
        assert_eq!(b1, b2);
        assert_relative_eq!(b1.energies[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(b1.energies[1], 1.0, epsilon = 1e-15);
        for n in 0..2 {
            let v = b1.state(n);
            let r = &h * &v - v.scale(b1.energies[n]);
            assert!(r.norm() < 1e-12);
        }
        let bad = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(eigensystem(&bad).is_err());
    }

    #[test]
    fn eigensystem_general_dimension() {
        let n = 4;
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.3);
                h[(i, j)] += v;
                h[(j, i)] += v.conj();
            }
        }
        let b = eigensystem(&h).unwrap();
        assert!(b.energies.windows(2).all(|w| w[0] <= w[1]));
        let overlap = b.states.adjoint() * &b.states;
        assert!((overlap - CMatrix::identity(n, n)).norm() < 1e-10);
        for k in 0..n {
            assert!((&h * b.state(k) - b.state(k).scale(b.energies[k])).norm() < 1e-10);
        }
    }

    #[derive(Debug)]
    struct NoGradient(KleinQubit);

    impl ParentHamiltonian for NoGradient {
        fn name(&self) -> String {
            "klein-fd".into()
        }
        fn dim(&self) -> usize {
            2
        }
        fn manifold(&self) -> Manifold {
            Manifold::Klein
        }
        fn evaluate(&self, x: [f64; 2]) -> CMatrix {
            self.0.evaluate(x)
        }
    }

    #[test]
    fn finite_differences_match_analytic() {
        let k = KleinQubit::new(0.7).unwrap();
        let fd = NoGradient(k.clone());
        for i in 0..100 {
            let x = [-PI + 0.0628 * i as f64, -PI + 0.0311 * i as f64];
            let a = grad_h(&k, x, FD_STEP).unwrap();
            let n = grad_h(&fd, x, FD_STEP).unwrap();
            for c in 0..2 {
                assert!((&a[c] - &n[c]).iter().all(|e| e.norm() < 1e-8));
            }
        }
    }

    #[test]
    fn gap_reports() {
        let b = BolzaQubit::new(0.5).unwrap();
        let r = gap_report(&b, &SampleGrid::for_manifold(Manifold::Bolza, 60, 60), DEFAULT_GAP_THRESHOLD).unwrap();
        assert!((r.min_gap() - 2.0).abs() < 1e-12);
        let k2 = gap_report(&KleinQubit::new(2.0).unwrap(), &SampleGrid::for_manifold(Manifold::Klein, 80, 40), DEFAULT_GAP_THRESHOLD).unwrap();
        assert!(k2.fully_gapped);
        let k3 = gap_report(&KleinQubit::new(3.0).unwrap(), &SampleGrid::for_manifold(Manifold::Klein, 80, 40), DEFAULT_GAP_THRESHOLD).unwrap();
        assert!(!k3.fully_gapped);
        assert!(k3.require_gapped().is_err());
        assert!(k3.min_gap() < 1e-12);
    }
}
