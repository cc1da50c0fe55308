//! Arbitrary-precision scalars for the hyperbolic flow.
//!
//! The Bolza geodesic flow is chaotic with Lyapunov rate one per unit arc
//! length, so long trajectories are carried at a decimal precision that grows
//! with the arc length. Every value here is an MPFR float; complex numbers are
//! a plain pair of them since only field arithmetic is needed.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 30;

    pub fn digits(digits: u32) -> Self {
        Self { digits }
    }

    pub fn decimal_digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision used for MPFR, with a few guard bits.
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * BITS_PER_DIGIT).ceil() as u32 + 16
    }

    /// Unit roundoff of the working precision.
    pub fn epsilon(&self) -> Float {
        let bits = self.bits();
        Float::with_val(bits, Float::u_exp(1, 1 - bits as i32))
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.bits(), v)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }

    /// `10^(-k)` at this precision.
    pub fn pow10_neg(&self, k: i32) -> Float {
        let ten = Float::with_val(self.bits(), 10);
        Float::with_val(self.bits(), ten.pow(-k))
    }
}

/// Complex number with MPFR components sharing one precision.
#[derive(Clone, PartialEq)]
pub struct HpComplex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.to_c64();
        write!(f, "HpComplex({:e}{:+e}i @{}b)", z.re, z.im, self.prec())
    }
}

impl HpComplex {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn zero(p: Precision) -> Self {
        Self::from_f64(p, 0.0, 0.0)
    }

    pub fn one(p: Precision) -> Self {
        Self::from_f64(p, 1.0, 0.0)
    }

    pub fn from_f64(p: Precision, re: f64, im: f64) -> Self {
        Self {
            re: p.float(re),
            im: p.float(im),
        }
    }

    pub fn from_c64(p: Precision, z: Complex64) -> Self {
        Self::from_f64(p, z.re, z.im)
    }

    pub fn from_real(x: Float) -> Self {
        let im = Float::new(x.prec());
        Self { re: x, im }
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        Self {
            re: Float::with_val(prec, theta.cos_ref()),
            im: Float::with_val(prec, theta.sin_ref()),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut s = Float::with_val(p, self.re.square_ref());
        s += Float::with_val(p, self.im.square_ref());
        s
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn scale(&self, k: &Float) -> Self {
        let p = self.prec();
        Self {
            re: Float::with_val(p, &self.re * k),
            im: Float::with_val(p, &self.im * k),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        let r = self.abs();
        if r.is_zero() {
            return self.clone();
        }
        // sqrt(z) = sqrt((r + x)/2) + i sign(y) sqrt((r - x)/2)
        let re = Float::with_val(p, &r + &self.re) / 2u32;
        let im = Float::with_val(p, &r - &self.re) / 2u32;
        let re = re.sqrt();
        let mut im = im.sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Self { re, im }
    }
}

impl<'a> Add<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn add(self, o: &HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl<'a> Sub<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn sub(self, o: &HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl<'a> Mul<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn mul(self, o: &HpComplex) -> HpComplex {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= &self.im * &o.im;
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += &self.im * &o.re;
        HpComplex { re, im }
    }
}

impl<'a> Div<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn div(self, o: &HpComplex) -> HpComplex {
        let d = o.norm_sqr();
        let num = self * &o.conj();
        HpComplex {
            re: num.re / &d,
            im: num.im / &d,
        }
    }
}

impl Neg for &HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        let p = self.prec();
        HpComplex {
            re: Float::with_val(p, -&self.re),
            im: Float::with_val(p, -&self.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_bits_cover_digits() {
        let p = Precision::digits(50);
        assert!(p.bits() as f64 >= 50.0 * BITS_PER_DIGIT);
        let eps = p.epsilon().to_f64();
        assert!(eps < 1e-50 && eps > 1e-60);
    }

    #[test]
    fn field_ops_match_double() {
        let p = Precision::digits(40);
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(-2.0, 0.7);
        let (ha, hb) = (HpComplex::from_c64(p, a), HpComplex::from_c64(p, b));
        assert!(((&ha * &hb).to_c64() - a * b).norm() < 1e-15);
        assert!(((&ha / &hb).to_c64() - a / b).norm() < 1e-15);
        assert!(((&ha - &hb).to_c64() - (a - b)).norm() < 1e-15);
        assert!((ha.sqrt().to_c64() - a.sqrt()).norm() < 1e-15);
        assert!((hb.sqrt().to_c64() - b.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn sqrt_is_exact_at_high_precision() {
        let p = Precision::digits(200);
        let z = HpComplex::from_f64(p, -3.0, 4.0);
        let s = z.sqrt();
        let back = &s * &s;
        let err = (&back - &z).abs();
        assert!(err < p.pow10_neg(195));
    }
}
