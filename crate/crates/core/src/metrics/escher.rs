//! Escher-condition diagnostics: the density quotient `τ_Z/τ_Y` along a ray
//! running to a boundary point of `Y`. Decay to 0 is evidence that `d_Y`
//! satisfies an Escher condition relative to `d_Z`; a positive limit is not.

use super::ConformalMetric;
use crate::error::{domain, parameter, Result};
use crate::point::{axpy, dist, norm, sub, ExtPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum RayEnd {
    /// A finite boundary point ζ of `Y`.
    Point(Vec<f64>),
    /// The ray `center + s·direction`, `s → ∞`.
    Infinity { direction: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscherRay {
    pub center: Vec<f64>,
    pub end: RayEnd,
    /// Decades covered by the geometric parameter grid.
    pub decades: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscherVerdict {
    Evidence,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscherProfile {
    /// `(parameter, τ_Z/τ_Y)`. The parameter is the Euclidean distance to ζ
    /// for finite ends and the distance travelled for rays to ∞.
    pub samples: Vec<(f64, f64)>,
    pub verdict: EscherVerdict,
    /// Final ratio must fall below this for an evidence verdict.
    pub vanish_tolerance: f64,
}

pub fn escher_ratio(tau_y: &ConformalMetric, tau_z: &ConformalMetric, x: &ExtPoint) -> Result<f64> {
    Ok(tau_z.density(x)? / tau_y.density(x)?)
}

pub const ESCHER_VANISH_TOLERANCE: f64 = 1e-3;

pub fn escher_ratio_profile(
    tau_y: &ConformalMetric,
    tau_z: &ConformalMetric,
    ray: &EscherRay,
    steps: usize,
) -> Result<EscherProfile> {
    if steps < 2 || !(ray.decades > 0.0) {
        return parameter("escher profile needs at least two steps and positive decades");
    }
    let mut samples = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let e = j as f64 * ray.decades / steps as f64;
        let (param, x) = match &ray.end {
            RayEnd::Point(zeta) => {
                let span = dist(zeta, &ray.center);
                if span == 0.0 {
                    return parameter("ray center coincides with its end point");
                }
                let eps = span * 10f64.powf(-e);
                let back = sub(&ray.center, zeta);
                (eps, axpy(zeta, eps / span, &back))
            }
            RayEnd::Infinity { direction } => {
                let u = norm(direction);
                let s = 10f64.powf(e);
                (s, axpy(&ray.center, s / u, direction))
            }
        };
        let x = ExtPoint::Finite(x);
        if !tau_y.region.contains(&x) {
            return domain(format!("ray leaves Y at parameter {param}"));
        }
        samples.push((param, escher_ratio(tau_y, tau_z, &x)?));
    }
    let first = samples[0].1;
    let last = samples[steps].1;
    let tail = &samples[steps / 2..];
    let decreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    let verdict = if decreasing && last <= ESCHER_VANISH_TOLERANCE * first.max(1.0) {
        EscherVerdict::Evidence
    } else {
        EscherVerdict::Failure
    };
    Ok(EscherProfile {
        samples,
        verdict,
        vanish_tolerance: ESCHER_VANISH_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_against_spherical() {
        let y = ConformalMetric::hyperbolic(3);
        let z = ConformalMetric::spherical(3);
        for k in 2..=6 {
            let eps = 10f64.powi(-k);
            let x = ExtPoint::new(&[1.0 - eps, 0.0, 0.0]);
            let r = escher_ratio(&y, &z, &x).unwrap();
            let s = 1.0 - eps;
            assert!((r - (1.0 - s * s) / (1.0 + s * s)).abs() < 1e-15);
            assert!(r <= 2.0 * eps);
        }
        let ray = EscherRay {
            center: vec![0.0; 3],
            end: RayEnd::Point(vec![1.0, 0.0, 0.0]),
            decades: 6.0,
        };
        let prof = escher_ratio_profile(&y, &z, &ray, 12).unwrap();
        assert_eq!(prof.verdict, EscherVerdict::Evidence);
    }

    #[test]
    fn euclidean_against_spherical_to_infinity() {
        let y = ConformalMetric::euclidean(2);
        let z = ConformalMetric::spherical(2);
        let ray = EscherRay {
            center: vec![0.0, 0.0],
            end: RayEnd::Infinity {
                direction: vec![1.0, 1.0],
            },
            decades: 6.0,
        };
        let prof = escher_ratio_profile(&y, &z, &ray, 12).unwrap();
        assert_eq!(prof.verdict, EscherVerdict::Evidence);
        for (s, r) in &prof.samples {
            assert!((r - 2.0 / (1.0 + s * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_metrics_fail() {
        let y = ConformalMetric::euclidean(2);
        let ray = EscherRay {
            center: vec![0.0, 0.0],
            end: RayEnd::Infinity {
                direction: vec![0.0, 1.0],
            },
            decades: 6.0,
        };
        let prof = escher_ratio_profile(&y, &y, &ray, 8).unwrap();
        assert!(prof.samples.iter().all(|s| s.1 == 1.0));
        assert_eq!(prof.verdict, EscherVerdict::Failure);
    }

    #[test]
    fn ray_leaving_y_is_a_domain_error() {
        let y = ConformalMetric::hyperbolic(2);
        let z = ConformalMetric::spherical(2);
        let ray = EscherRay {
            center: vec![0.0, 0.0],
            end: RayEnd::Infinity {
                direction: vec![1.0, 0.0],
            },
            decades: 3.0,
        };
        assert!(matches!(
            escher_ratio_profile(&y, &z, &ray, 6),
            Err(crate::error::QrError::Domain(_))
        ));
    }
}
