//! Finite-time ergodicity diagnostics for Bolza geodesics.
//!
//! The Bolza surface has area `4 pi`, so along an ergodic unit-speed
//! geodesic the time fraction spent in a region converges to its area over
//! `4 pi`. The region used here is the hyperbolic disk `|z| < r` about the
//! octagon centre.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::trajectories::DriveSample;
use crate::{Error, Result};

/// Area of the Bolza surface.
pub const SURFACE_AREA: f64 = 4.0 * PI;

/// Hyperbolic area of `|z| < r` for the metric `4|dz|^2/(1-|z|^2)^2`.
pub fn disk_area_exact(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("disk radius {r} must lie in [0, 1)")));
    }
    Ok(4.0 * PI * r * r / (1.0 - r * r))
}

/// `S_est(T) = (4 pi / T) int_0^T I(|z_t| < r) dt` at each horizon, by the
/// trapezoid rule on the sample grid. Samples must be time ordered.
pub fn area_estimate(samples: &[DriveSample], r: f64, horizons: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 2 {
        return Err(Error::Input("area estimate needs at least two samples".into()));
    }
    let t0 = samples[0].t;
    let t_end = samples[samples.len() - 1].t;
    let inside = |s: &DriveSample| if s.x[0].hypot(s.x[1]) < r { 1.0 } else { 0.0 };
    let mut cumulative = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in samples.windows(2) {
        acc += 0.5 * (inside(&w[0]) + inside(&w[1])) * (w[1].t - w[0].t);
        cumulative.push(acc);
    }
    let tol = 1e-9 * t_end.abs().max(1.0);
    horizons
        .iter()
        .map(|&h| {
            if !(h > t0) || h > t_end + tol {
                return Err(Error::Input(format!(
                    "horizon {h} outside the sampled window ({t0}, {t_end}]"
                )));
            }
            let k = samples.partition_point(|s| s.t <= h + tol) - 1;
            // linear completion of the last partial interval
            let mut integral = cumulative[k];
            if k + 1 < samples.len() && samples[k].t < h {
                integral += inside(&samples[k]) * (h - samples[k].t);
            }
            Ok((h, SURFACE_AREA * integral / (h - t0)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub chi_square: f64,
    pub p_value: f64,
    /// `max_k |count_k - E| / E` with `E` the uniform expectation.
    pub max_deviation: f64,
}

impl AngleHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Normalised density per radian.
    pub fn density(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / (n * (w[1] - w[0])))
            .collect()
    }
}

/// Histogram of arbitrary angles on `[-pi, pi]` with a chi-square test
/// against the uniform distribution.
pub fn histogram_of_angles(angles: &[f64], bins: usize) -> Result<AngleHistogram> {
    if bins < 2 {
        return Err(Error::Input("need at least two bins".into()));
    }
    if angles.is_empty() {
        return Err(Error::Input("no angles to bin".into()));
    }
    let width = 2.0 * PI / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| -PI + k as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &a in angles {
        let k = (((a + PI) / width).floor() as isize).clamp(0, bins as isize - 1);
        counts[k as usize] += 1;
    }
    let expected = angles.len() as f64 / bins as f64;
    let chi_square: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((bins - 1) as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    let max_deviation = counts
        .iter()
        .map(|&c| (c as f64 - expected).abs() / expected)
        .fold(0.0, f64::max);
    Ok(AngleHistogram {
        edges,
        counts,
        chi_square,
        p_value: dist.sf(chi_square),
        max_deviation,
    })
}

/// Momentum directions `atan2(p_y, p_x)` of the samples with `|z| < r`.
pub fn angle_histogram(samples: &[DriveSample], r: f64, bins: usize) -> Result<AngleHistogram> {
    let angles: Vec<f64> = samples
        .iter()
        .filter(|s| s.x[0].hypot(s.x[1]) < r)
        .map(|s| s.momentum[1].atan2(s.momentum[0]))
        .collect();
    if angles.is_empty() {
        return Err(Error::EmptyRegion { radius: r });
    }
    histogram_of_angles(&angles, bins)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityReport {
    pub radius: f64,
    pub exact_area: f64,
    pub estimates: Vec<(f64, f64)>,
    pub histogram: AngleHistogram,
}

impl ErgodicityReport {
    pub fn final_estimate(&self) -> Option<(f64, f64)> {
        self.estimates.last().copied()
    }

    pub fn relative_error(&self) -> Option<f64> {
        self.final_estimate()
            .map(|(_, s)| (s - self.exact_area).abs() / self.exact_area)
    }

    /// Mean `|S_est - S_c|` over horizons in `[lo, hi]`.
    pub fn mean_abs_error(&self, lo: f64, hi: f64) -> Option<f64> {
        let e: Vec<f64> = self
            .estimates
            .iter()
            .filter(|(t, _)| (lo..=hi).contains(t))
            .map(|(_, s)| (s - self.exact_area).abs())
            .collect();
        (!e.is_empty()).then(|| e.iter().sum::<f64>() / e.len() as f64)
    }
}

/// Area estimates at the given horizons plus the in-region angle histogram.
pub fn ergodicity_report(
    samples: &[DriveSample],
    r: f64,
    horizons: &[f64],
    bins: usize,
) -> Result<ErgodicityReport> {
    Ok(ErgodicityReport {
        radius: r,
        exact_area: disk_area_exact(r)?,
        estimates: area_estimate(samples, r, horizons)?,
        histogram: angle_histogram(samples, r, bins)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, x: [f64; 2], p: [f64; 2]) -> DriveSample {
        DriveSample {
            t,
            x,
            momentum: p,
            velocity: p,
            word_len: 0,
            crossings: [0, 0],
        }
    }

    #[test]
    fn exact_area_values() {
        assert!((disk_area_exact(0.6).unwrap() - 7.06858).abs() < 1e-5);
        assert_eq!(disk_area_exact(0.0).unwrap(), 0.0);
        let small = disk_area_exact(0.1).unwrap();
        assert!((small / (4.0 * PI * 0.01) - 1.0).abs() < 0.02);
        assert!(disk_area_exact(1.0).is_err());
        assert!(disk_area_exact(-0.1).is_err());
    }

    #[test]
    fn indicator_extremes() {
        let inside: Vec<_> = (0..=100).map(|k| sample(k as f64 * 0.1, [0.0, 0.1], [1.0, 0.0])).collect();
        let est = area_estimate(&inside, 0.5, &[5.0, 10.0]).unwrap();
        for (_, s) in est {
            assert!((s - 4.0 * PI).abs() < 1e-12);
        }
        let est = area_estimate(&inside, 0.05, &[10.0]).unwrap();
        assert_eq!(est[0].1, 0.0);
        assert!(area_estimate(&inside[..1], 0.5, &[1.0]).is_err());
        assert!(area_estimate(&inside, 0.5, &[11.0]).is_err());
    }

    #[test]
    fn single_sample_histogram() {
        let s = vec![sample(0.0, [0.0, 0.2], [0.0, 1.0]), sample(1.0, [0.9, 0.0], [1.0, 0.0])];
        let h = angle_histogram(&s, 0.5, 36).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!(matches!(angle_histogram(&s, 0.1, 36), Err(Error::EmptyRegion { .. })));
    }
}
