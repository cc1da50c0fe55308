use std::time::Instant;

use geodrive::hp::Precision;
use geodrive::hyperbolic::{kinetic_energy, CotangentVector, DiskPoint};
use geodrive::trajectories::{
    integrate_cogeodesic, unit_geodesic_from_origin, BolzaPropagator, BolzaSpec, Direction,
    OdeOptions,
};
use num_complex::Complex64;
use rug::Float;

#[test]
fn ode_matches_closed_form_at_t5() {
    let prec = Precision::digits(50);
    let n = Direction::PiFraction(1, 9).unit(prec);
    let z0 = DiskPoint::origin(prec);
    let p0 = CotangentVector::new(n.scale(&prec.float(2.0))).unwrap();
    let start = Instant::now();
    let sol = integrate_cogeodesic(&z0, &p0, 5.0, 5.0, &OdeOptions::digits(50)).unwrap();
    println!("ode t=5: {} steps in {:?}", sol.steps, start.elapsed());
    let exact = unit_geodesic_from_origin(&n, &prec.float(5.0));
    let got = sol.points.last().unwrap();
    let dz = (got.z.z() - exact.z.z()).abs();
    let dp = (got.p.p() - exact.p.p()).abs();
    println!("dz = {:e}, dp = {:e}", dz.to_f64(), dp.to_f64());
    assert!(dz < prec.pow10_neg(20));
    assert!(dp < prec.pow10_neg(20));
}

#[test]
fn reduced_ode_conserves_energy() {
    let prec = Precision::digits(50);
    let z0 = DiskPoint::from_c64(Complex64::new(0.1, -0.2), prec).unwrap();
    let p0 = CotangentVector::from_c64(Complex64::new(1.3, 0.4), prec).unwrap();
    let e0 = kinetic_energy(&z0, &p0);
    let start = Instant::now();
    let sol =
        integrate_cogeodesic(&z0, &p0, 100.0, 1.0, &OdeOptions::digits(50).reduced()).unwrap();
    println!("ode t=100: {} steps, word {}, {:?}", sol.steps, sol.word.len(), start.elapsed());
    let worst = sol
        .points
        .iter()
        .map(|ph| Float::with_val(200, kinetic_energy(&ph.z, &ph.p) - &e0).abs().to_f64())
        .fold(0.0, f64::max);
    println!("energy drift {worst:e}");
    assert!(worst < 1e-30);
}

#[test]
fn propagator_matches_unreduced_ode() {
    for t in [10.0, 50.0] {
        let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 1.0, t, t / 10.0);
        let digits = spec.digits();
        let prec = Precision::digits(digits);
        let mut prop = BolzaPropagator::new(&spec).unwrap();
        for s in prop.by_ref() {
            s.unwrap();
        }
        let back = prop.unreduced_phase();
        let n = Direction::PiFraction(1, 9).unit(prec);
        let p0 = CotangentVector::new(n.scale(&prec.float(2.0))).unwrap();
        let sol = integrate_cogeodesic(&DiskPoint::origin(prec), &p0, t, t, &OdeOptions::digits(digits)).unwrap();
        let ode = sol.points.last().unwrap();
        let dz = (ode.z.z() - back.z.z()).abs();
        println!("t={t} digits={digits} word={} dz={:e}", prop.word().len(), dz.to_f64());
        assert!(dz < prec.pow10_neg(digits as i32 / 3));
    }
}

#[test]
fn long_unit_speed_run_timing() {
    let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 1.0, 2000.0, 0.01);
    let start = Instant::now();
    let mut prop = BolzaPropagator::new(&spec).unwrap();
    let mut worst: f64 = 0.0;
    for s in prop.by_ref() {
        let s = s.unwrap();
        let e = 0.125 * (1.0 - s.z().norm_sqr()).powi(2) * s.p().norm_sqr();
        worst = worst.max((e - 0.5).abs());
    }
    let e = prop.phase().energy();
    println!("T=2000 unit speed: {:?}, word {}, f64 energy err {worst:e}, hp energy {:e}", start.elapsed(), prop.word().len(), Float::with_val(64, e - 0.5f64).to_f64());
}

#[test]
fn reduced_ode_tracks_propagator_over_t100() {
    let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), 1.0, 100.0, 1.0);
    let mut prop = BolzaPropagator::new(&spec).unwrap();
    let samples: Vec<_> = prop.by_ref().map(|s| s.unwrap()).collect();
    let prec = Precision::digits(90);
    let n = Direction::PiFraction(1, 9).unit(prec);
    let p0 = CotangentVector::new(n.scale(&prec.float(2.0))).unwrap();
    let sol = integrate_cogeodesic(&DiskPoint::origin(prec), &p0, 100.0, 1.0, &OdeOptions::digits(90).reduced()).unwrap();
    assert_eq!(sol.word, prop.word());
    let worst = samples
        .iter()
        .zip(&sol.points)
        .map(|(s, ph)| (s.z() - ph.z.to_c64()).norm())
        .fold(0.0, f64::max);
    println!("max |z_prop - z_ode| over t <= 100: {worst:e}");
    assert!(worst < 1e-14);
}
