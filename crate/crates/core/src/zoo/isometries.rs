use rand::Rng;

use super::{mobius_ball_isometry, spherical_isometry_from_zero, translation, MapDescriptor};
use crate::error::{QrError, Result};
use crate::metrics::{dist_hyperbolic, dist_spherical};
use crate::point::{dist, ExtPoint};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometrySpace {
    /// Möbius self-maps of the unit ball with the hyperbolic metric.
    Hyperbolic,
    /// Translations of `R^n`.
    Euclidean,
    /// Rotations of `S^n` seen through stereographic projection.
    Spherical,
}

/// A transitive family of orientation-preserving isometries, produced on
/// demand for given anchors.
#[derive(Debug, Clone)]
pub struct IsometrySampler {
    pub space: IsometrySpace,
    pub dim: usize,
    pub seed: u64,
}

impl IsometrySampler {
    pub fn new(space: IsometrySpace, dim: usize, seed: u64) -> Self {
        IsometrySampler { space, dim, seed }
    }

    /// The isometry `A` with `A(0) = a`, or `x ↦ x + a` for translations.
    pub fn isometry(&self, a: &ExtPoint) -> Result<MapDescriptor> {
        if let Some(c) = a.coords() {
            if c.len() != self.dim {
                return Err(QrError::Parameter(format!(
                    "anchor of dimension {} for a sampler on R^{}",
                    c.len(),
                    self.dim
                )));
            }
        }
        match self.space {
            IsometrySpace::Hyperbolic => match a.coords() {
                Some(_) if a.norm() < 1.0 => mobius_ball_isometry(a),
                _ => Err(QrError::Domain(format!("anchor {a:?} is not in the unit ball"))),
            },
            IsometrySpace::Euclidean => match a.coords() {
                Some(c) => Ok(translation(c)),
                None => Err(QrError::Domain("translations need a finite anchor".into())),
            },
            IsometrySpace::Spherical => Ok(spherical_isometry_from_zero(a, self.dim)),
        }
    }

    /// Anchors spread over the space: uniformly in a hyperbolic ball of
    /// radius `reach`, in a Euclidean ball of radius `reach`, or over the
    /// whole sphere.
    pub fn random_anchors(&self, count: usize, reach: f64) -> Vec<ExtPoint> {
        let mut r = rng::stream(self.seed);
        (0..count)
            .map(|_| match self.space {
                IsometrySpace::Hyperbolic => {
                    let t = (r.random::<f64>() * reach * 0.5).tanh();
                    ExtPoint::Finite(rng::unit_vector(&mut r, self.dim).iter().map(|v| v * t).collect())
                }
                IsometrySpace::Euclidean => ExtPoint::Finite(rng::in_ball(&mut r, self.dim, reach)),
                IsometrySpace::Spherical => {
                    // uniform on S^n, dropped to R^n
                    let p = rng::unit_vector(&mut r, self.dim + 1);
                    crate::isometry::stereo_drop(&p)
                }
            })
            .collect()
    }
}

pub fn sample_isometries(sampler: &IsometrySampler, anchors: &[ExtPoint]) -> Result<Vec<MapDescriptor>> {
    anchors.iter().map(|a| sampler.isometry(a)).collect()
}

/// Largest distance discrepancy of `map` over `pairs` random pairs drawn
/// from the sampler's space.
pub fn verify_isometry(sampler: &IsometrySampler, map: &MapDescriptor, pairs: usize, seed: u64) -> Result<f64> {
    let mut r = rng::stream(seed);
    let n = sampler.dim;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (x, y) = match sampler.space {
            IsometrySpace::Hyperbolic => (
                ExtPoint::Finite(rng::in_ball(&mut r, n, 0.95)),
                ExtPoint::Finite(rng::in_ball(&mut r, n, 0.95)),
            ),
            IsometrySpace::Euclidean => (
                ExtPoint::Finite(rng::in_ball(&mut r, n, 10.0)),
                ExtPoint::Finite(rng::in_ball(&mut r, n, 10.0)),
            ),
            IsometrySpace::Spherical => (
                crate::isometry::stereo_drop(&rng::unit_vector(&mut r, n + 1)),
                crate::isometry::stereo_drop(&rng::unit_vector(&mut r, n + 1)),
            ),
        };
        let fx = map.eval(&x)?;
        let fy = map.eval(&y)?;
        let err = match sampler.space {
            IsometrySpace::Hyperbolic => (dist_hyperbolic(&fx, &fy)? - dist_hyperbolic(&x, &y)?).abs(),
            IsometrySpace::Euclidean => {
                let (Some(a), Some(b), Some(u), Some(v)) = (fx.coords(), fy.coords(), x.coords(), y.coords())
                else {
                    return Err(QrError::Numeric("translation produced ∞".into()));
                };
                (dist(a, b) - dist(u, v)).abs()
            }
            IsometrySpace::Spherical => (dist_spherical(&fx, &fy) - dist_spherical(&x, &y)).abs(),
        };
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_at_origin_give_identity() {
        let x = ExtPoint::new(&[0.3, -0.1, 0.4]);
        for space in [IsometrySpace::Hyperbolic, IsometrySpace::Euclidean, IsometrySpace::Spherical] {
            let s = IsometrySampler::new(space, 3, 0);
            let a = s.isometry(&ExtPoint::origin(3)).unwrap();
            let y = a.eval(&x).unwrap();
            assert!(dist(y.coords().unwrap(), x.coords().unwrap()) < 1e-15);
        }
    }

    #[test]
    fn anchors_are_hit() {
        let s = IsometrySampler::new(IsometrySpace::Spherical, 2, 3);
        for a in s.random_anchors(50, 1.0) {
            let m = s.isometry(&a).unwrap();
            assert!(dist_spherical(&m.eval(&ExtPoint::origin(2)).unwrap(), &a) < 1e-12);
        }
        let s = IsometrySampler::new(IsometrySpace::Spherical, 2, 3);
        let m = s.isometry(&ExtPoint::Infinity).unwrap();
        assert!(m.eval(&ExtPoint::origin(2)).unwrap().is_infinite() || m.eval(&ExtPoint::origin(2)).unwrap().norm() > 1e12);
    }

    #[test]
    fn translations() {
        let s = IsometrySampler::new(IsometrySpace::Euclidean, 2, 0);
        let m = s.isometry(&ExtPoint::new(&[1.0, -2.0])).unwrap();
        assert_eq!(m.eval(&ExtPoint::new(&[0.5, 0.5])).unwrap(), ExtPoint::new(&[1.5, -1.5]));
        assert!(matches!(s.isometry(&ExtPoint::Infinity), Err(QrError::Domain(_))));
    }

    #[test]
    fn hyperbolic_anchor_outside_ball() {
        let s = IsometrySampler::new(IsometrySpace::Hyperbolic, 2, 0);
        assert!(matches!(s.isometry(&ExtPoint::new(&[1.0, 0.0])), Err(QrError::Domain(_))));
    }

    #[test]
    fn near_boundary_anchors_are_isometries() {
        let s = IsometrySampler::new(IsometrySpace::Hyperbolic, 3, 9);
        let mut r = rng::stream(4);
        for _ in 0..20 {
            let a: crate::point::Coords = rng::unit_vector(&mut r, 3).iter().map(|v| v * 0.99).collect();
            let m = s.isometry(&ExtPoint::Finite(a)).unwrap();
            assert!(verify_isometry(&s, &m, 200, 5).unwrap() < 1e-9);
        }
    }
}
