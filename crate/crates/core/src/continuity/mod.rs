//! Estimators for continuity, normality, Bloch and growth behaviour of
//! quasiregular maps.

pub mod bloch;
pub mod growth;
pub mod holder;
pub mod orbit;
pub mod profile;
pub mod zalcman;

pub use bloch::{bloch_growth_check, bloch_r, BlochGrowthRow, BlochSettings, BlochStats, LittleBlochEntry};
pub use growth::{growth_suite, sphere_measure, GrowthSeries, GrowthSettings};
pub use holder::{holder_constant, holder_constant_through, local_holder_exponent, HolderFit, SampleBall};
pub use orbit::{exhaustion, orbit_compactness_probe, OrbitVerdict};
pub use profile::{
    continuity_profile, continuity_profile_at, q_estimate, q_estimate_grid, ContinuityProfile, NormalityVerdict,
    ProfileSettings, ProfileWitness, QEstimate,
};
pub use zalcman::{zalcman_rescale, RescaledMap, RescalingSequence, ZalcmanSettings};

use crate::error::{QrError, Result};
use crate::metrics::{ConformalMetric, MetricKind};
use crate::point::ExtPoint;
use crate::zoo::MapDescriptor;

/// Evaluates `f`, turning any failure into a numeric error that names the
/// point.
pub(crate) fn eval_at(f: &MapDescriptor, x: &ExtPoint) -> Result<ExtPoint> {
    f.eval(x)
        .map_err(|e| QrError::Numeric(format!("{} failed at {x:?}: {e}", f.name)))
}

/// Scale used to turn the relative normality threshold into an absolute
/// one: the diameter of the sphere, or 1 for unbounded spaces.
pub fn diameter_scale(metric: &ConformalMetric) -> f64 {
    match metric.kind {
        MetricKind::Spherical => std::f64::consts::PI,
        _ => 1.0,
    }
}

/// Least-squares slope and RMS residual of `ys` against `xs`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Some((slope, intercept, rms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_slope() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (s, b, r) = fit_line(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15 && r < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
