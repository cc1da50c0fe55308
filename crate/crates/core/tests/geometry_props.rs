use geodrive::hp::Precision;
use geodrive::hyperbolic::{
    bolza_group, hyperbolic_distance, kinetic_energy, BolzaGeometry, CotangentVector, DiskPoint,
    MobiusMap,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prec() -> Precision {
    Precision::digits(40)
}

fn point(r: f64, phi: f64) -> DiskPoint {
    DiskPoint::from_c64(Complex64::from_polar(r, phi), prec()).unwrap()
}

fn isometry(beta: f64, s: f64) -> MobiusMap {
    let p = prec();
    MobiusMap::rotation(&p.float(beta)).compose(&MobiusMap::translation(&p.float(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn isometries_preserve_distance(
        beta in -3.2f64..3.2, s in -2.0f64..2.0,
        r1 in 0.0f64..0.9, f1 in -3.2f64..3.2,
        r2 in 0.0f64..0.9, f2 in -3.2f64..3.2,
    ) {
        let g = isometry(beta, s);
        let (a, b) = (point(r1, f1), point(r2, f2));
        let d0 = hyperbolic_distance(&a, &b).to_f64();
        let d1 = hyperbolic_distance(&g.apply(&a).unwrap(), &g.apply(&b).unwrap()).to_f64();
        prop_assert!((d0 - d1).abs() < 1e-25 * (1.0 + d0));
    }

    #[test]
    fn pushforward_preserves_energy(
        beta in -3.2f64..3.2, s in -2.0f64..2.0,
        r in 0.0f64..0.9, f in -3.2f64..3.2,
        px in -3.0f64..3.0, py in -3.0f64..3.0,
    ) {
        let g = isometry(beta, s);
        let z = point(r, f);
        let p = CotangentVector::from_c64(Complex64::new(px, py), prec()).unwrap();
        let e0 = kinetic_energy(&z, &p).to_f64();
        let e1 = kinetic_energy(&g.apply(&z).unwrap(), &g.pushforward(&z, &p)).to_f64();
        prop_assert!((e0 - e1).abs() < 1e-25 * (1.0 + e0));
    }
}

#[test]
fn relator_is_projective_identity() {
    let group = bolza_group(prec());
    let d = group.relator().distance_to_identity();
    assert!(d < 1e-12, "relator distance {d}");
}

#[test]
fn reduction_of_random_points() {
    let geo = BolzaGeometry::new(prec());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut longest = 0;
    for _ in 0..10_000 {
        let r = rng.gen_range(0.0..0.97f64);
        let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let z = point(r, phi);
        let p = CotangentVector::from_c64(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), prec()).unwrap();
        let red = geo.reduce(&z, &p).unwrap();
        assert!(geo.octagon.contains(&red.z));
        longest = longest.max(red.word.len());
        // the recorded word reproduces the reduced point and conserves energy
        let w = geo.group.word_map(&red.word);
        let again = w.apply(&z).unwrap();
        let dz = (again.z() - red.z.z()).abs().to_f64();
        assert!(dz < 1e-28, "word image differs by {dz}");
        let e0 = kinetic_energy(&z, &p).to_f64();
        let e1 = kinetic_energy(&red.z, &red.p).to_f64();
        assert!((e0 - e1).abs() < 1e-25 * (1.0 + e0));
    }
    assert!(longest >= 2);
}
