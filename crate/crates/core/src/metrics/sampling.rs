//! Points on metric spheres `{y : d(center, y) = r}`.
//!
//! Sampling happens in the chart where `center` sits at the origin: the
//! chart radius `t` with `d(0, t·e) = r` is found once by bisection (every
//! metric here is rotation invariant about 0), random directions are scaled
//! by `t`, and an isometry carries the origin back to `center`.

use super::{ConformalMetric, MetricKind};
use crate::error::{domain, parameter, QrError, Result};
use crate::isometry::{mobius_add, SphereRotation};
use crate::point::{add, ExtPoint};
use crate::rng::{stream, unit_vector};

/// Chart radius `t` with `d(0, t·e₁) = r`.
pub fn chart_radius(metric: &ConformalMetric, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(QrError::Range(format!("sphere radius {r} must be positive")));
    }
    if r >= metric.max_radius_from(&ExtPoint::origin(metric.dim)) {
        return Err(QrError::Range(format!(
            "radius {r} exceeds the diameter of the {:?} space",
            metric.kind
        )));
    }
    let radial = |t: f64| -> f64 {
        let p = ExtPoint::axis(metric.dim, 0, t);
        match metric.kind {
            MetricKind::Euclidean => t,
            MetricKind::Spherical => super::spherical_unchecked(&ExtPoint::origin(metric.dim), &p),
            MetricKind::Hyperbolic => {
                super::hyperbolic_unchecked(&vec![0.0; metric.dim], p.coords().unwrap())
            }
            MetricKind::Quasihyperbolic => unreachable!(),
        }
    };
    let (mut lo, mut hi) = match metric.kind {
        MetricKind::Hyperbolic => (0.0, 1.0),
        MetricKind::Quasihyperbolic => {
            return domain("no isometry sampler is provided for quasihyperbolic spaces")
        }
        _ => {
            let mut hi = 1.0;
            while radial(hi) < r {
                hi *= 2.0;
            }
            (0.0, hi)
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radial(mid) < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if (radial(lo) - r).abs() <= (radial(hi) - r).abs() {
        lo
    } else {
        hi
    };
    if metric.kind == MetricKind::Hyperbolic && t >= 1.0 {
        return Err(QrError::Range(format!("hyperbolic radius {r} is not representable")));
    }
    Ok(t)
}

/// Maps the chart point `p` (center at the origin) back to the space.
pub(crate) fn from_center_chart(
    metric: &ConformalMetric,
    center: &ExtPoint,
    rotation: Option<&SphereRotation>,
    p: &[f64],
) -> ExtPoint {
    match metric.kind {
        MetricKind::Euclidean => ExtPoint::Finite(add(center.coords().unwrap(), p)),
        MetricKind::Hyperbolic => ExtPoint::Finite(mobius_add(center.coords().unwrap(), p)),
        MetricKind::Spherical => rotation
            .expect("spherical sampling needs a rotation")
            .apply_inverse(&ExtPoint::new(p)),
        MetricKind::Quasihyperbolic => unreachable!(),
    }
}

/// `count` points at distance `r` from `center`, reproducible from `seed`.
pub fn metric_sphere_sample(
    metric: &ConformalMetric,
    center: &ExtPoint,
    r: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<ExtPoint>> {
    if count == 0 {
        return parameter("count must be at least 1");
    }
    metric.density(center)?;
    let t = chart_radius(metric, r)?;
    let rotation =
        (metric.kind == MetricKind::Spherical).then(|| SphereRotation::to_zero(center, metric.dim));
    let mut rng = stream(seed);
    Ok((0..count)
        .map(|_| {
            let u = unit_vector(&mut rng, metric.dim);
            let p: Vec<f64> = u.iter().map(|v| v * t).collect();
            from_center_chart(metric, center, rotation.as_ref(), &p)
        })
        .collect())
}
