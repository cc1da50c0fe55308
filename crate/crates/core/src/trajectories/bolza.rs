//! Exact Bolza geodesics.
//!
//! A speed-`lambda` geodesic is stored as the SU(1,1) frame `M` with
//! `M(0) = z_t`. Starting from `M_0 = R_{z0} Rot_n`, one sample step is the
//! right multiplication by the real-axis translation `T_{lambda dt}`, and a
//! domain exit is undone by a left multiplication with the side pairing that
//! brings the point back. Left and right actions commute, so the reduced
//! frame is exactly the Fuchsian translate of the unreduced geodesic; at the
//! origin the frame gives `z = b / conj(a)` and `p = 2 lambda a^2`.

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::{sample_count, DriveSample};
use crate::hp::{HpComplex, Precision};
use crate::hyperbolic::{
    kinetic_energy, BolzaGeometry, CotangentVector, DiskPoint, GeneratorIndex, MobiusMap,
};
use crate::{Error, Result};

/// Precision rule `max(50, ceil(0.434 lambda T) + 30)`.
pub fn default_digits(lambda: f64, t_max: f64) -> u32 {
    let v = 0.434 * lambda * t_max;
    let r = v.round();
    let c = if (v - r).abs() < 1e-9 { r } else { v.ceil() };
    (c.max(0.0) as u32 + 30).max(50)
}

/// Initial direction of a geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Angle in radians, taken exactly as the given double.
    Angle(f64),
    /// The angle `pi * num / den`, formed at the working precision.
    PiFraction(i64, u64),
}

impl Direction {
    pub fn angle(&self, prec: Precision) -> Float {
        match *self {
            Direction::Angle(a) => prec.float(a),
            Direction::PiFraction(num, den) => {
                let pi = prec.pi();
                let x = Float::with_val(prec.bits(), &pi * num);
                x / den
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Direction::Angle(a) => a,
            Direction::PiFraction(num, den) => std::f64::consts::PI * num as f64 / den as f64,
        }
    }

    pub fn unit(&self, prec: Precision) -> HpComplex {
        HpComplex::cis(&self.angle(prec))
    }
}

/// High-precision phase point `(z, p)` on the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskPhase {
    pub z: DiskPoint,
    pub p: CotangentVector,
}

impl DiskPhase {
    pub fn energy(&self) -> Float {
        kinetic_energy(&self.z, &self.p)
    }
}

/// `(n tanh(t/2), n (1 + cosh t))`: the unit-speed geodesic leaving the
/// origin in direction `n`.
pub fn unit_geodesic_from_origin(n: &HpComplex, t: &Float) -> DiskPhase {
    let prec = t.prec();
    let half = Float::with_val(prec, t / 2u32);
    let th = Float::with_val(prec, half.tanh_ref());
    let ch = Float::with_val(prec, t.cosh_ref()) + 1u32;
    DiskPhase {
        z: DiskPoint::new_unchecked(n.scale(&th)),
        p: CotangentVector::new(n.scale(&ch)).expect("finite"),
    }
}

fn initial_frame(z0: &DiskPoint, n: &HpComplex) -> MobiusMap {
    let rot = MobiusMap::from_parts(n.sqrt(), HpComplex::zero(precision_of(n)));
    MobiusMap::moving_origin_to(z0).compose(&rot)
}

fn precision_of(z: &HpComplex) -> Precision {
    Precision::digits(crate::hyperbolic::digits_of_bits(z.prec()))
}

/// Unit-speed geodesic through `z0` at `t = 0`, transported by
/// `R(z) = (z + z0) / (1 + conj(z0) z)`.
pub fn rebase(z0: &DiskPoint, t: &Float, n: &HpComplex) -> DiskPhase {
    let m = initial_frame(z0, n).compose(&MobiusMap::translation(t));
    frame_phase(&m, &Float::with_val(t.prec(), 1))
}

/// `(z_{lambda t}, lambda p_{lambda t})` along the geodesic of [`rebase`].
pub fn rescale_speed(z0: &DiskPoint, t: &Float, n: &HpComplex, lambda: &Float) -> DiskPhase {
    let s = Float::with_val(t.prec(), t * lambda);
    let unit = rebase(z0, &s, n);
    DiskPhase {
        z: unit.z,
        p: CotangentVector::new(unit.p.p().scale(lambda)).expect("finite"),
    }
}

fn frame_phase(m: &MobiusMap, lambda: &Float) -> DiskPhase {
    let z = m.apply_origin();
    let two_lambda = Float::with_val(lambda.prec(), lambda * 2u32);
    let p = m.a().square().scale(&two_lambda);
    DiskPhase {
        z,
        p: CotangentVector::new(p).expect("finite"),
    }
}

/// Parameters of a Bolza drive.
#[derive(Clone, Debug, PartialEq)]
pub struct BolzaSpec {
    pub z0: Complex64,
    pub direction: Direction,
    pub lambda: f64,
    pub t_max: f64,
    pub dt: f64,
    /// Working digits; `None` applies [`default_digits`].
    pub digits: Option<u32>,
    /// Bisect each domain exit to `10^(-digits/2)` and record it.
    pub locate_crossings: bool,
}

impl BolzaSpec {
    pub fn new(z0: Complex64, direction: Direction, lambda: f64, t_max: f64, dt: f64) -> Self {
        Self {
            z0,
            direction,
            lambda,
            t_max,
            dt,
            digits: None,
            locate_crossings: false,
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
            .unwrap_or_else(|| default_digits(self.lambda, self.t_max))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Parameter(format!("T must be nonnegative, got {}", self.t_max)));
        }
        if self.digits() < Precision::MIN_DIGITS {
            return Err(Error::Parameter(format!(
                "precision must be at least {} digits",
                Precision::MIN_DIGITS
            )));
        }
        if self.z0.norm_sqr() >= 1.0 || !self.z0.is_finite() {
            return Err(Error::Domain(format!("z0 = {} is not inside the disk", self.z0)));
        }
        Ok(())
    }
}

/// Time at which a sample step first left the octagon.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingEvent {
    pub t: f64,
    /// First translate applied on re-entry.
    pub generator: GeneratorIndex,
}

/// Streaming propagator for a [`BolzaSpec`].
#[derive(Debug)]
pub struct BolzaPropagator {
    geo: BolzaGeometry,
    lambda: Float,
    two_lambda: Float,
    lambda_f64: f64,
    dt: f64,
    frame: MobiusMap,
    step: MobiusMap,
    word: Vec<GeneratorIndex>,
    crossings: Vec<CrossingEvent>,
    locate: bool,
    next: usize,
    count: usize,
    failed: bool,
}

impl BolzaPropagator {
    pub fn new(spec: &BolzaSpec) -> Result<Self> {
        spec.validate()?;
        let prec = Precision::digits(spec.digits());
        let geo = BolzaGeometry::new(prec);
        let z0 = DiskPoint::from_c64(spec.z0, prec)?;
        let n = spec.direction.unit(prec);
        let lambda = prec.float(spec.lambda);
        let s = Float::with_val(prec.bits(), &lambda * prec.float(spec.dt));
        let mut this = Self {
            geo,
            two_lambda: Float::with_val(prec.bits(), &lambda * 2u32),
            lambda,
            lambda_f64: spec.lambda,
            dt: spec.dt,
            frame: initial_frame(&z0, &n),
            step: MobiusMap::translation(&s),
            word: Vec::new(),
            crossings: Vec::new(),
            locate: spec.locate_crossings,
            next: 0,
            count: sample_count(spec.t_max, spec.dt) + 1,
            failed: false,
        };
        this.reduce_frame(0.0)?;
        Ok(this)
    }

    pub fn precision(&self) -> Precision {
        self.geo.prec
    }

    pub fn geometry(&self) -> &BolzaGeometry {
        &self.geo
    }

    /// Current reduced frame.
    pub fn frame(&self) -> &MobiusMap {
        &self.frame
    }

    pub fn phase(&self) -> DiskPhase {
        frame_phase(&self.frame, &self.lambda)
    }

    /// Unreduced phase point, i.e. the inverse word applied to the reduced one.
    pub fn unreduced_phase(&self) -> DiskPhase {
        let back = self.geo.group.word_map(&self.word).inverse();
        frame_phase(&back.compose(&self.frame), &self.lambda)
    }

    /// Generators applied so far, in order.
    pub fn word(&self) -> &[GeneratorIndex] {
        &self.word
    }

    pub fn crossings(&self) -> &[CrossingEvent] {
        &self.crossings
    }

    /// Time of the sample the next call to `next` returns.
    pub fn next_time(&self) -> f64 {
        self.next as f64 * self.dt
    }

    fn reduce_frame(&mut self, t: f64) -> Result<()> {
        let mut applied = 0;
        loop {
            let z = self.frame.apply_origin();
            if self.geo.octagon.contains(&z) {
                return Ok(());
            }
            if applied >= self.geo.max_word {
                return Err(Error::Propagation {
                    t,
                    reason: format!(
                        "no reduction within {} translates at |z| = {}",
                        self.geo.max_word,
                        z.to_c64().norm()
                    ),
                });
            }
            let k = self.geo.reduction_step(&z).map_err(|e| Error::Propagation {
                t,
                reason: e.to_string(),
            })?;
            self.frame = self.geo.group.generator(k).compose(&self.frame);
            self.word.push(k);
            applied += 1;
        }
    }

    fn locate_exit(&self, prev: &MobiusMap, t0: f64) -> Result<f64> {
        let prec = self.geo.prec;
        let bits = prec.bits();
        let tol = prec.pow10_neg((prec.decimal_digits() / 2) as i32);
        let mut lo = Float::with_val(bits, 0);
        let mut hi = prec.float(self.dt);
        let max_iter = 4 * bits as usize;
        for _ in 0..max_iter {
            let width = Float::with_val(bits, &hi - &lo);
            if width <= tol {
                let mid = Float::with_val(bits, &lo + &hi) / 2u32;
                return Ok(t0 + mid.to_f64());
            }
            let mid = Float::with_val(bits, &lo + &hi) / 2u32;
            let s = Float::with_val(bits, &mid * &self.lambda);
            let z = prev.compose(&MobiusMap::translation(&s)).apply_origin();
            if self.geo.octagon.contains(&z) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Propagation {
            t: t0,
            reason: "crossing bisection did not converge".into(),
        })
    }

    fn sample(&self, t: f64) -> DriveSample {
        let a = self.frame.a();
        let z = self.frame.apply_origin().to_c64();
        let p = a.square().scale(&self.two_lambda).to_c64();
        // g^{-1} p = lambda / (2 conj(a)^2)
        let ac = a.conj().to_c64();
        let v = self.lambda_f64 / (2.0 * ac * ac);
        DriveSample {
            t,
            x: [z.re, z.im],
            momentum: [p.re, p.im],
            velocity: [v.re, v.im],
            word_len: self.word.len(),
            crossings: [0, 0],
        }
    }

    fn advance(&mut self) -> Result<DriveSample> {
        let k = self.next;
        let t = k as f64 * self.dt;
        if k > 0 {
            let prev = self.locate.then(|| self.frame.clone());
            self.frame = self.frame.compose(&self.step);
            let before = self.word.len();
            self.reduce_frame(t)?;
            if let (Some(prev), true) = (prev, self.word.len() > before) {
                let tc = self.locate_exit(&prev, (k - 1) as f64 * self.dt)?;
                self.crossings.push(CrossingEvent {
                    t: tc,
                    generator: self.word[before],
                });
            }
        }
        self.next += 1;
        Ok(self.sample(t))
    }
}

impl Iterator for BolzaPropagator {
    type Item = Result<DriveSample>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next >= self.count {
            return None;
        }
        let out = self.advance();
        if out.is_err() {
            self.failed = true;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.count.saturating_sub(self.next);
        (left, Some(left))
    }
}
