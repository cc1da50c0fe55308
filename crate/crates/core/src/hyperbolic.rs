//! Poincaré-disk geometry and the Bolza surface.
//!
//! Isometries are SU(1,1) matrices `[[a, b], [conj(b), conj(a)]]` acting by
//! `z -> (a z + b) / (conj(b) z + conj(a))`. The Bolza surface is the quotient
//! of the disk by the Fuchsian group generated by four side-pairing
//! translations of the regular {8,8} octagon centred at the origin.
//!
//! Normalisation of the side pairing: `gamma_1` translates along the real
//! axis by twice the octagon inradius, i.e. `cosh(l/2) = 1 + sqrt(2)` and
//! `sinh(l/2) = sqrt(2 + 2 sqrt(2))`. The bounding arcs are circles of radius
//! `r = (2 + 2 sqrt(2))^(-1/2)` centred at distance `c` with `c^2 - r^2 = 1`,
//! so every edge is a geodesic and the vertices sit at radius `2^(-1/4)`.

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;

use crate::hp::{HpComplex, Precision};
use crate::{Error, Result};

/// Default bound on the number of translates applied by one reduction.
pub const MAX_REDUCTION_WORD: usize = 64;

/// A point `z` of the open unit disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskPoint {
    z: HpComplex,
}

impl DiskPoint {
    pub fn new(z: HpComplex) -> Result<Self> {
        if !z.is_finite() || z.norm_sqr() >= 1 {
            return Err(Error::Domain(format!(
                "point {:?} is not inside the unit disk",
                z.to_c64()
            )));
        }
        Ok(Self { z })
    }

    pub fn from_c64(z: Complex64, prec: Precision) -> Result<Self> {
        Self::new(HpComplex::from_c64(prec, z))
    }

    pub fn origin(prec: Precision) -> Self {
        Self {
            z: HpComplex::zero(prec),
        }
    }

    pub fn z(&self) -> &HpComplex {
        &self.z
    }

    pub fn into_inner(self) -> HpComplex {
        self.z
    }

    pub fn to_c64(&self) -> Complex64 {
        self.z.to_c64()
    }

    pub(crate) fn new_unchecked(z: HpComplex) -> Self {
        Self { z }
    }
}

/// Momentum `p = p_1 + i p_2` attached to a disk point.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentVector {
    p: HpComplex,
}

impl CotangentVector {
    pub fn new(p: HpComplex) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::Domain("momentum must be finite".into()));
        }
        Ok(Self { p })
    }

    pub fn from_c64(p: Complex64, prec: Precision) -> Result<Self> {
        Self::new(HpComplex::from_c64(prec, p))
    }

    pub fn p(&self) -> &HpComplex {
        &self.p
    }

    pub fn to_c64(&self) -> Complex64 {
        self.p.to_c64()
    }
}

/// Conformal factor `g(z) = 4 / (1 - |z|^2)^2` of the Poincaré metric.
pub fn metric_factor(z: &DiskPoint) -> Float {
    let w: Float = 1 - z.z.norm_sqr();
    let w2 = Float::with_val(w.prec(), w.square_ref());
    4 / w2
}

/// Double-precision `g(z)^{-1}`, used on reduced chart values.
pub fn inverse_metric(z: Complex64) -> f64 {
    let w = 1.0 - z.norm_sqr();
    0.25 * w * w
}

/// `g(z)^{-1} |p|^2 / 2`.
pub fn kinetic_energy(z: &DiskPoint, p: &CotangentVector) -> Float {
    let w: Float = 1 - z.z.norm_sqr();
    let w2 = Float::with_val(w.prec(), w.square_ref());
    w2 * p.p.norm_sqr() / 8u32
}

/// Poincaré distance `2 artanh(|z1 - z2| / |1 - conj(z1) z2|)`.
pub fn hyperbolic_distance(z1: &DiskPoint, z2: &DiskPoint) -> Float {
    let prec = z1.z.prec();
    let num = (&z1.z - &z2.z).abs();
    let one = HpComplex::from_real(Float::with_val(prec, 1));
    let den = (&one - &(&z1.z.conj() * &z2.z)).abs();
    let ratio = num / den;
    2 * ratio.atanh()
}

/// Orientation-preserving disk isometry in SU(1,1).
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusMap {
    a: HpComplex,
    b: HpComplex,
}

impl MobiusMap {
    /// Checked constructor: `|a|^2 - |b|^2 = 1` within 10 ulps.
    pub fn new(a: HpComplex, b: HpComplex) -> Result<Self> {
        let m = Self { a, b };
        let prec = Precision::digits(digits_of_bits(m.a.prec()));
        let det = m.pseudo_determinant();
        let scale = Float::with_val(det.prec(), m.a.norm_sqr() + m.b.norm_sqr());
        let tol = 10 * prec.epsilon() * scale;
        if Float::with_val(det.prec(), &det - 1u32).abs() > tol {
            return Err(Error::Domain(format!(
                "|a|^2 - |b|^2 = {} is not 1",
                det.to_f64()
            )));
        }
        Ok(m)
    }

    pub(crate) fn from_parts(a: HpComplex, b: HpComplex) -> Self {
        Self { a, b }
    }

    pub fn identity(prec: Precision) -> Self {
        Self {
            a: HpComplex::one(prec),
            b: HpComplex::zero(prec),
        }
    }

    /// Disk rotation by angle `2 beta` (`a = e^{i beta}`, `b = 0`).
    pub fn rotation(beta: &Float) -> Self {
        Self {
            a: HpComplex::cis(beta),
            b: HpComplex::from_real(Float::new(beta.prec())),
        }
    }

    /// Hyperbolic translation along the real diameter by arc length `s`.
    pub fn translation(s: &Float) -> Self {
        let prec = s.prec();
        let half = Float::with_val(prec, s / 2u32);
        Self {
            a: HpComplex::from_real(Float::with_val(prec, half.cosh_ref())),
            b: HpComplex::from_real(Float::with_val(prec, half.sinh_ref())),
        }
    }

    /// The isometry `z -> (z + z0) / (1 + conj(z0) z)` sending 0 to `z0`.
    pub fn moving_origin_to(z0: &DiskPoint) -> Self {
        let prec = z0.z.prec();
        let w = Float::with_val(prec, 1 - z0.z.norm_sqr());
        let s = w.sqrt();
        let inv = Float::with_val(prec, 1 / &s);
        Self {
            a: HpComplex::from_real(inv.clone()),
            b: z0.z.scale(&inv),
        }
    }

    pub fn a(&self) -> &HpComplex {
        &self.a
    }

    pub fn b(&self) -> &HpComplex {
        &self.b
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    pub fn pseudo_determinant(&self) -> Float {
        Float::with_val(self.prec(), self.a.norm_sqr() - self.b.norm_sqr())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        // [[a, b], [b*, a*]] [[c, d], [d*, c*]]
        let a = &(&self.a * &other.a) + &(&self.b * &other.b.conj());
        let b = &(&self.a * &other.b) + &(&self.b * &other.a.conj());
        MobiusMap { a, b }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.a.conj(),
            b: -&self.b,
        }
    }

    fn denominator(&self, z: &HpComplex) -> HpComplex {
        &(&self.b.conj() * z) + &self.a.conj()
    }

    /// `(a z + b) / (conj(b) z + conj(a))`.
    pub fn apply(&self, z: &DiskPoint) -> Result<DiskPoint> {
        let den = self.denominator(&z.z);
        let tiny = Float::with_val(den.prec(), Float::u_exp(1, -(den.prec() as i32)));
        if den.norm_sqr() <= tiny {
            return Err(Error::Numeric(
                "Möbius denominator underflow".to_string(),
            ));
        }
        let num = &(&self.a * &z.z) + &self.b;
        Ok(DiskPoint::new_unchecked(&num / &den))
    }

    /// Image of the origin, `b / conj(a)`.
    pub fn apply_origin(&self) -> DiskPoint {
        DiskPoint::new_unchecked(&self.b / &self.a.conj())
    }

    /// `M'(z) = 1 / (conj(b) z + conj(a))^2`.
    pub fn derivative(&self, z: &DiskPoint) -> HpComplex {
        let den = self.denominator(&z.z).square();
        &HpComplex::one(Precision::digits(digits_of_bits(den.prec()))) / &den
    }

    /// Covector transport `p' = p / conj(M'(z))`.
    pub fn pushforward(&self, z: &DiskPoint, p: &CotangentVector) -> CotangentVector {
        let den = self.denominator(&z.z).conj().square();
        CotangentVector { p: &p.p * &den }
    }

    /// True when the map is ±identity within `tol` entrywise.
    pub fn is_projective_identity(&self, tol: &Float) -> bool {
        let prec = self.prec();
        let b_ok = self.b.abs() <= *tol;
        let one = HpComplex::one(Precision::digits(digits_of_bits(prec)));
        let plus = (&self.a - &one).abs() <= *tol;
        let minus = (&self.a + &one).abs() <= *tol;
        b_ok && (plus || minus)
    }

    /// Largest entrywise distance to ±identity.
    pub fn distance_to_identity(&self) -> f64 {
        let prec = Precision::digits(digits_of_bits(self.prec()));
        let one = HpComplex::one(prec);
        let dp = (&self.a - &one).abs().to_f64();
        let dm = (&self.a + &one).abs().to_f64();
        dp.min(dm).max(self.b.abs().to_f64())
    }
}

pub(crate) fn digits_of_bits(bits: u32) -> u32 {
    (((bits.saturating_sub(16)) as f64) / std::f64::consts::LOG2_10).floor() as u32
}

/// Index `1..=8` of a side pairing; `k > 4` denotes `gamma_{k-4}^{-1}`.
pub type GeneratorIndex = u8;

/// The Fuchsian group of the Bolza surface.
#[derive(Clone, Debug)]
pub struct BolzaGroup {
    maps: [MobiusMap; 8],
}

impl BolzaGroup {
    pub fn new(prec: Precision) -> Self {
        let bits = prec.bits();
        let sqrt2 = Float::with_val(bits, 2).sqrt();
        let cosh = Float::with_val(bits, 1 + &sqrt2);
        let sinh = (Float::with_val(bits, &sqrt2 * 2u32) + 2u32).sqrt();
        let g1 = MobiusMap {
            a: HpComplex::from_real(cosh),
            b: HpComplex::from_real(sinh),
        };
        let quarter = Float::with_val(bits, prec.pi() / 4u32);
        let forward: Vec<MobiusMap> = (0..4u32)
            .map(|k| {
                // R gamma_1 R^{-1} with R = diag(e^{ik alpha/2}, e^{-ik alpha/2})
                let half = Float::with_val(bits, &quarter * k) / 2u32;
                let r = MobiusMap::rotation(&half);
                r.compose(&g1).compose(&r.inverse())
            })
            .collect();
        let maps = std::array::from_fn(|i| {
            if i < 4 {
                forward[i].clone()
            } else {
                forward[i - 4].inverse()
            }
        });
        Self { maps }
    }

    /// Generator by its 1-based label.
    pub fn generator(&self, k: GeneratorIndex) -> &MobiusMap {
        assert!((1..=8).contains(&k), "generator index {k} out of range");
        &self.maps[k as usize - 1]
    }

    pub fn generators(&self) -> impl Iterator<Item = (GeneratorIndex, &MobiusMap)> {
        self.maps.iter().enumerate().map(|(i, m)| (i as u8 + 1, m))
    }

    pub fn inverse_index(k: GeneratorIndex) -> GeneratorIndex {
        if k > 4 {
            k - 4
        } else {
            k + 4
        }
    }

    /// The product `g1 g2^-1 g3 g4^-1 g1^-1 g2 g3^-1 g4`, which is ±identity.
    pub fn relator(&self) -> MobiusMap {
        let word: [GeneratorIndex; 8] = [1, 6, 3, 8, 5, 2, 7, 4];
        let prec = Precision::digits(digits_of_bits(self.maps[0].prec()));
        word.iter()
            .fold(MobiusMap::identity(prec), |acc, &k| acc.compose(self.generator(k)))
    }

    /// Composite map of a word applied left to right onto a point, i.e.
    /// `g_{w_n} ∘ ... ∘ g_{w_1}`.
    pub fn word_map(&self, word: &[GeneratorIndex]) -> MobiusMap {
        let prec = Precision::digits(digits_of_bits(self.maps[0].prec()));
        word.iter()
            .fold(MobiusMap::identity(prec), |acc, &k| self.generator(k).compose(&acc))
    }
}

pub fn bolza_group(prec: Precision) -> BolzaGroup {
    BolzaGroup::new(prec)
}

/// The central regular octagon bounded by eight geodesic arcs.
#[derive(Clone, Debug)]
pub struct FundamentalOctagon {
    centers: [HpComplex; 8],
    center_distance: Float,
    arc_radius: Float,
    radius_sqr: Float,
    tolerance: Float,
    centers_f64: [Complex64; 8],
    radius_sqr_f64: f64,
}

impl FundamentalOctagon {
    pub fn new(prec: Precision) -> Self {
        let bits = prec.bits();
        let sqrt2 = Float::with_val(bits, 2).sqrt();
        let denom = Float::with_val(bits, &sqrt2 * 2u32) + 2u32;
        let c2 = (Float::with_val(bits, &sqrt2 * 2u32) + 3u32) / &denom;
        let center_distance = c2.sqrt();
        let arc_radius = Float::with_val(bits, 1 / Float::with_val(bits, denom.sqrt_ref()));
        let radius_sqr = Float::with_val(bits, arc_radius.square_ref());
        let quarter = Float::with_val(bits, prec.pi() / 4u32);
        let centers = std::array::from_fn(|j| {
            let ang = Float::with_val(bits, &quarter * j as u32);
            HpComplex::cis(&ang).scale(&center_distance)
        });
        let centers_f64 = std::array::from_fn(|j: usize| centers[j].to_c64());
        // closed-domain slack: a few thousand ulps of the working precision
        let tolerance = Float::with_val(bits, prec.epsilon() * 4096u32);
        Self {
            centers,
            radius_sqr_f64: radius_sqr.to_f64(),
            center_distance,
            arc_radius,
            radius_sqr,
            tolerance,
            centers_f64,
        }
    }

    pub fn center_distance(&self) -> &Float {
        &self.center_distance
    }

    pub fn arc_radius(&self) -> &Float {
        &self.arc_radius
    }

    /// Arc centre `c_j`, `j = 1..=8`.
    pub fn arc_center(&self, j: usize) -> &HpComplex {
        &self.centers[j - 1]
    }

    /// Vertex radius `2^(-1/4)`.
    pub fn vertex_radius(prec: Precision) -> Float {
        let two = Float::with_val(prec.bits(), 2);
        Float::with_val(prec.bits(), two.pow(Float::with_val(prec.bits(), -0.25)))
    }

    /// Vertex between arcs `j` and `j+1` at angle `(2j - 1) pi / 8`,
    /// `j = 1..=8`.
    pub fn vertex(prec: Precision, j: usize) -> DiskPoint {
        let bits = prec.bits();
        let ang = Float::with_val(bits, prec.pi() * (2 * j as u32 - 1)) / 8u32;
        let v = HpComplex::cis(&ang).scale(&Self::vertex_radius(prec));
        DiskPoint::new_unchecked(v)
    }

    /// Signed margins `|z - c_j|^2 - r^2` in double precision.
    fn margins_f64(&self, z: Complex64) -> [f64; 8] {
        std::array::from_fn(|j| (z - self.centers_f64[j]).norm_sqr() - self.radius_sqr_f64)
    }

    /// Arcs whose exterior side contains `z` (1-based), evaluated at full
    /// precision with a closed-boundary tolerance.
    pub fn violated_arcs(&self, z: &DiskPoint) -> Vec<usize> {
        let zf = z.to_c64();
        let margins = self.margins_f64(zf);
        let mut out = Vec::new();
        for (j, &m) in margins.iter().enumerate() {
            if m > 1e-9 {
                continue;
            }
            if m < -1e-9 {
                out.push(j + 1);
                continue;
            }
            let d = (&z.z - &self.centers[j]).norm_sqr();
            let margin = Float::with_val(d.prec(), &d - &self.radius_sqr);
            if margin < -self.tolerance.clone() {
                out.push(j + 1);
            }
        }
        out
    }

    pub fn contains(&self, z: &DiskPoint) -> bool {
        self.violated_arcs(z).is_empty()
    }

    /// Double-precision membership test for reduced chart values.
    pub fn contains_c64(&self, z: Complex64) -> bool {
        z.norm_sqr() < 1.0 && self.margins_f64(z).iter().all(|&m| m >= -1e-12)
    }
}

/// Group and domain at a common precision.
#[derive(Clone, Debug)]
pub struct BolzaGeometry {
    pub prec: Precision,
    pub group: BolzaGroup,
    pub octagon: FundamentalOctagon,
    pub max_word: usize,
}

/// Result of reducing a phase point into the fundamental octagon.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub z: DiskPoint,
    pub p: CotangentVector,
    /// Generators in the order they were applied.
    pub word: Vec<GeneratorIndex>,
}

impl BolzaGeometry {
    pub fn new(prec: Precision) -> Self {
        Self {
            prec,
            group: BolzaGroup::new(prec),
            octagon: FundamentalOctagon::new(prec),
            max_word: MAX_REDUCTION_WORD,
        }
    }

    /// Picks the translate for one reduction step: the unique generator
    /// whose image lands in the closed domain (lowest label on ties), or,
    /// if none does, the one that brings the point closest to the origin.
    pub fn reduction_step(&self, z: &DiskPoint) -> Result<GeneratorIndex> {
        let mut inside = Vec::new();
        let mut best: Option<(GeneratorIndex, Float)> = None;
        for (k, g) in self.group.generators() {
            let w = g.apply(z)?;
            if self.octagon.contains(&w) {
                inside.push(k);
            }
            let r = w.z.norm_sqr();
            match &best {
                Some((_, br)) if *br <= r => {}
                _ => best = Some((k, r)),
            }
        }
        if let Some(&k) = inside.first() {
            return Ok(k);
        }
        Ok(best.expect("eight generators").0)
    }

    pub fn reduce(&self, z: &DiskPoint, p: &CotangentVector) -> Result<Reduced> {
        let mut z = z.clone();
        let mut p = p.clone();
        let mut word = Vec::new();
        while !self.octagon.contains(&z) {
            if word.len() >= self.max_word {
                return Err(Error::Reduction {
                    max_len: self.max_word,
                    modulus: z.to_c64().norm(),
                });
            }
            let k = self.reduction_step(&z)?;
            let g = self.group.generator(k);
            p = g.pushforward(&z, &p);
            z = g.apply(&z)?;
            word.push(k);
        }
        Ok(Reduced { z, p, word })
    }
}

/// Closed-domain membership in the central octagon.
pub fn in_fundamental_domain(z: &DiskPoint) -> bool {
    let prec = Precision::digits(digits_of_bits(z.z.prec()));
    FundamentalOctagon::new(prec).contains(z)
}

/// Maps `(z, p)` into the fundamental octagon by side-pairing translates.
pub fn reduce_to_domain(z: &DiskPoint, p: &CotangentVector) -> Result<Reduced> {
    let prec = Precision::digits(digits_of_bits(z.z.prec()));
    BolzaGeometry::new(prec).reduce(z, p)
}
