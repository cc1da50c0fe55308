//! Arbitrary-precision Taylor integrator for the cogeodesic flow
//!
//! ```text
//! dz/dt = (1 - |z|^2)^2 p / 4,    dp/dt = z (1 - |z|^2) |p|^2 / 2
//! ```
//!
//! used as an independent oracle for the exact propagator. Taylor
//! coefficients follow from the usual Cauchy-product recurrences on the real
//! components; the step is chosen from the size of the last two coefficients.

use rug::Float;

use super::bolza::DiskPhase;
use crate::hp::{HpComplex, Precision};
use crate::hyperbolic::{BolzaGeometry, CotangentVector, DiskPoint, GeneratorIndex};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct OdeOptions {
    pub digits: u32,
    /// Taylor order; defaults to `ceil(1.15 digits)`.
    pub order: Option<usize>,
    /// Map the state back into the octagon after every step.
    pub reduce: bool,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn digits(digits: u32) -> Self {
        Self {
            digits,
            order: None,
            reduce: false,
            max_steps: 1_000_000,
        }
    }

    pub fn reduced(mut self) -> Self {
        self.reduce = true;
        self
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub points: Vec<DiskPhase>,
    /// Reduction word when `reduce` was set.
    pub word: Vec<GeneratorIndex>,
    pub steps: usize,
}

struct Series {
    x: Vec<Float>,
    y: Vec<Float>,
    px: Vec<Float>,
    py: Vec<Float>,
}

fn conv(a: &[Float], b: &[Float], k: usize, bits: u32) -> Float {
    let mut acc = Float::with_val(bits, 0);
    for j in 0..=k {
        acc += &a[j] * &b[k - j];
    }
    acc
}

fn taylor(state: [&Float; 4], order: usize, bits: u32) -> Series {
    let mut s = Series {
        x: vec![state[0].clone()],
        y: vec![state[1].clone()],
        px: vec![state[2].clone()],
        py: vec![state[3].clone()],
    };
    let (mut w, mut w2, mut q, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..order {
        let mut u = conv(&s.x, &s.x, k, bits);
        u += conv(&s.y, &s.y, k, bits);
        let wk = if k == 0 { 1 - u } else { -u };
        w.push(wk);
        w2.push(conv(&w, &w, k, bits));
        let mut qk = conv(&s.px, &s.px, k, bits);
        qk += conv(&s.py, &s.py, k, bits);
        q.push(qk);
        b.push(conv(&w, &q, k, bits));
        let d4 = 4 * (k as u32 + 1);
        let d2 = 2 * (k as u32 + 1);
        let ax = conv(&w2, &s.px, k, bits) / d4;
        let ay = conv(&w2, &s.py, k, bits) / d4;
        let cx = conv(&s.x, &b, k, bits) / d2;
        let cy = conv(&s.y, &b, k, bits) / d2;
        s.x.push(ax);
        s.y.push(ay);
        s.px.push(cx);
        s.py.push(cy);
    }
    s
}

fn horner(c: &[Float], h: &Float) -> Float {
    let mut acc = c.last().expect("nonempty").clone();
    for v in c.iter().rev().skip(1) {
        acc *= h;
        acc += v;
    }
    acc
}

/// Integrates from `(z0, p0)` and reports the state at `t_k = k dt`.
pub fn integrate_cogeodesic(
    z0: &DiskPoint,
    p0: &CotangentVector,
    t_max: f64,
    dt: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution> {
    if opts.digits < Precision::MIN_DIGITS {
        return Err(Error::Parameter(format!(
            "precision must be at least {} digits",
            Precision::MIN_DIGITS
        )));
    }
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(Error::Parameter("dt must be positive and T nonnegative".into()));
    }
    let prec = Precision::digits(opts.digits);
    let bits = prec.bits();
    let order = opts
        .order
        .unwrap_or(((opts.digits as f64) * 1.15).ceil() as usize)
        .max(8);
    let geo = opts.reduce.then(|| BolzaGeometry::new(prec));
    // tolerances and coefficient sizes are compared in log space: both leave
    // the double range at a few hundred digits
    let ln_tol = -(opts.digits as f64) * std::f64::consts::LN_10;

    let lift = |v: &Float| Float::with_val(bits, v);
    let mut st = [
        lift(&z0.z().re),
        lift(&z0.z().im),
        lift(&p0.p().re),
        lift(&p0.p().im),
    ];
    let mut word = Vec::new();
    let mut t = Float::with_val(bits, 0);
    let n_out = super::sample_count(t_max, dt);
    let mut times = Vec::with_capacity(n_out + 1);
    let mut points = Vec::with_capacity(n_out + 1);
    let phase = |st: &[Float; 4]| -> Result<DiskPhase> {
        Ok(DiskPhase {
            z: DiskPoint::new(HpComplex::new(st[0].clone(), st[1].clone()))?,
            p: CotangentVector::new(HpComplex::new(st[2].clone(), st[3].clone()))?,
        })
    };
    times.push(0.0);
    points.push(phase(&st)?);
    let mut steps = 0;
    for k in 1..=n_out {
        let target = Float::with_val(bits, prec.float(k as f64) * prec.float(dt));
        loop {
            let remaining = Float::with_val(bits, &target - &t);
            if remaining <= 0 {
                break;
            }
            if steps >= opts.max_steps {
                return Err(Error::Integration {
                    t: t.to_f64(),
                    reason: format!("step budget of {} exhausted", opts.max_steps),
                });
            }
            let series = taylor([&st[0], &st[1], &st[2], &st[3]], order, bits);
            let scale = st.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
            let h = log_step(&series, order, ln_tol + scale.ln()).unwrap_or(f64::INFINITY);
            if h < 1e-12 * remaining.to_f64().min(1.0) {
                return Err(Error::Integration {
                    t: t.to_f64(),
                    reason: format!("step size collapsed to {h:e}"),
                });
            }
            let hf = if prec.float(h) >= remaining {
                remaining.clone()
            } else {
                prec.float(h)
            };
            st = [
                horner(&series.x, &hf),
                horner(&series.y, &hf),
                horner(&series.px, &hf),
                horner(&series.py, &hf),
            ];
            t += &hf;
            steps += 1;
            if let Some(geo) = &geo {
                let ph = phase(&st).map_err(|e| Error::Integration {
                    t: t.to_f64(),
                    reason: e.to_string(),
                })?;
                if !geo.octagon.contains(&ph.z) {
                    let r = geo.reduce(&ph.z, &ph.p).map_err(|e| Error::Integration {
                        t: t.to_f64(),
                        reason: e.to_string(),
                    })?;
                    word.extend_from_slice(&r.word);
                    let (z, p) = (r.z.into_inner(), r.p.p().clone());
                    st = [z.re, z.im, p.re, p.im];
                }
            }
        }
        times.push(k as f64 * dt);
        points.push(phase(&st).map_err(|e| Error::Integration {
            t: t.to_f64(),
            reason: e.to_string(),
        })?);
    }
    Ok(OdeSolution {
        times,
        points,
        word,
        steps,
    })
}

fn log_step(s: &Series, order: usize, ln_tol: f64) -> Option<f64> {
    let mut lh = f64::INFINITY;
    for j in [order - 1, order] {
        let m = [&s.x[j], &s.y[j], &s.px[j], &s.py[j]]
            .iter()
            .map(|v| Float::with_val(53, v.abs_ref()))
            .fold(Float::with_val(53, 0), |a, b| if b > a { b } else { a });
        if m > 0 {
            let lm = m.ln().to_f64();
            lh = lh.min((ln_tol - lm) / j as f64);
        }
    }
    lh.is_finite().then(|| 0.9 * lh.exp())
}
