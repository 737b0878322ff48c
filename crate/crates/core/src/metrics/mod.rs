//! Conformal metric spaces: densities, distances, metric-sphere sampling
//! and Escher-condition diagnostics.
//!
//! Distances are closed form for the euclidean, spherical and hyperbolic
//! metrics. The quasihyperbolic metric of a proper subdomain has no closed
//! form and is bracketed by a grid shortest-path estimate (see
//! [`quasihyperbolic`]).

pub mod escher;
pub mod quasihyperbolic;
pub mod sampling;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, QrError, Result};
use crate::point::{dist, norm, norm_sq, ExtPoint};

pub use escher::{escher_ratio, escher_ratio_profile, EscherProfile, EscherRay, RayEnd};
pub use quasihyperbolic::{dist_quasihyperbolic, QhGrid};
pub use sampling::metric_sphere_sample;

/// Signed boundary distance: positive inside the region, the Euclidean
/// distance to the boundary for interior points.
pub type BoundaryFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Subregions of `S^n` used as domains and ranges.
#[derive(Clone)]
pub enum Region {
    /// All of `R^n` (∞ excluded).
    Whole,
    /// All of `S^n = R^n ∪ {∞}`.
    Sphere,
    UnitBall,
    /// `{x : x_n > 0}`
    UpperHalfSpace,
    /// Open cube `(-w, w)^n`.
    Cube { half_width: f64 },
    /// `{|x_i| < π/2 for i < n}`, the strip/beam domain of the Zorich map.
    Beam,
    Ball { center: Vec<f64>, radius: f64 },
    Custom { name: String, boundary: BoundaryFn },
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Whole => write!(f, "Whole"),
            Region::Sphere => write!(f, "Sphere"),
            Region::UnitBall => write!(f, "UnitBall"),
            Region::UpperHalfSpace => write!(f, "UpperHalfSpace"),
            Region::Cube { half_width } => write!(f, "Cube({half_width})"),
            Region::Beam => write!(f, "Beam"),
            Region::Ball { center, radius } => write!(f, "Ball({center:?}, {radius})"),
            Region::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl Region {
    /// Signed distance to the boundary; `None` when the region has no
    /// boundary in `R^n`.
    pub fn boundary_distance(&self, x: &[f64]) -> Option<f64> {
        let n = x.len();
        match self {
            Region::Whole | Region::Sphere => None,
            Region::UnitBall => Some(1.0 - norm(x)),
            Region::UpperHalfSpace => Some(x[n - 1]),
            Region::Cube { half_width } => {
                Some(x.iter().fold(f64::INFINITY, |m, v| m.min(half_width - v.abs())))
            }
            Region::Beam => Some(
                x[..n - 1]
                    .iter()
                    .fold(f64::INFINITY, |m, v| m.min(FRAC_PI_2 - v.abs())),
            ),
            Region::Ball { center, radius } => Some(radius - dist(x, center)),
            Region::Custom { boundary, .. } => Some(boundary(x)),
        }
    }

    pub fn contains(&self, x: &ExtPoint) -> bool {
        match x {
            ExtPoint::Infinity => matches!(self, Region::Sphere),
            ExtPoint::Finite(c) => {
                if c.iter().any(|v| !v.is_finite()) {
                    return false;
                }
                self.boundary_distance(c).is_none_or(|d| d > 0.0)
            }
        }
    }

    /// Whether the region has a boundary in `R^n` (so that a
    /// quasihyperbolic metric exists).
    pub fn is_proper(&self) -> bool {
        !matches!(self, Region::Whole | Region::Sphere)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Euclidean,
    Spherical,
    Hyperbolic,
    Quasihyperbolic,
}

/// A conformal metric `τ(x)|dx|` on a region of `S^n`.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    pub kind: MetricKind,
    pub dim: usize,
    pub region: Region,
}

impl ConformalMetric {
    pub fn euclidean(dim: usize) -> Self {
        ConformalMetric {
            kind: MetricKind::Euclidean,
            dim,
            region: Region::Whole,
        }
    }

    pub fn spherical(dim: usize) -> Self {
        ConformalMetric {
            kind: MetricKind::Spherical,
            dim,
            region: Region::Sphere,
        }
    }

    pub fn hyperbolic(dim: usize) -> Self {
        ConformalMetric {
            kind: MetricKind::Hyperbolic,
            dim,
            region: Region::UnitBall,
        }
    }

    pub fn quasihyperbolic(dim: usize, region: Region) -> Result<Self> {
        if !region.is_proper() {
            return domain("quasihyperbolic metric needs a proper subdomain");
        }
        Ok(ConformalMetric {
            kind: MetricKind::Quasihyperbolic,
            dim,
            region,
        })
    }

    /// Euclidean metric restricted to a subregion (e.g. Example-type cubes).
    pub fn euclidean_on(dim: usize, region: Region) -> Self {
        ConformalMetric {
            kind: MetricKind::Euclidean,
            dim,
            region,
        }
    }

    fn check(&self, x: &ExtPoint) -> Result<()> {
        if let ExtPoint::Finite(c) = x {
            if c.len() != self.dim {
                return Err(QrError::Parameter(format!(
                    "point of dimension {} in a {}-dimensional space",
                    c.len(),
                    self.dim
                )));
            }
        }
        if x.is_infinite() && self.kind != MetricKind::Spherical {
            return domain(format!("∞ is not a point of the {:?} space", self.kind));
        }
        if !self.region.contains(x) {
            return domain(format!("{x:?} lies outside {:?}", self.region));
        }
        Ok(())
    }

    /// The density τ(x). At ∞ the spherical density is read in the swapped
    /// chart, where it equals 2.
    pub fn density(&self, x: &ExtPoint) -> Result<f64> {
        self.check(x)?;
        let c = match x {
            ExtPoint::Infinity => return Ok(2.0),
            ExtPoint::Finite(c) => c,
        };
        Ok(match self.kind {
            MetricKind::Euclidean => 1.0,
            MetricKind::Spherical => 2.0 / (1.0 + norm_sq(c)),
            MetricKind::Hyperbolic => {
                let r = norm(c);
                2.0 / ((1.0 - r) * (1.0 + r))
            }
            MetricKind::Quasihyperbolic => 1.0 / self.region.boundary_distance(c).unwrap(),
        })
    }

    /// Distance between two points. The quasihyperbolic case returns the
    /// value of a default-resolution grid estimate; call
    /// [`dist_quasihyperbolic`] for the bracket.
    pub fn distance(&self, x: &ExtPoint, y: &ExtPoint) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        if x == y {
            return Ok(0.0);
        }
        match self.kind {
            MetricKind::Euclidean => Ok(dist(x.coords().unwrap(), y.coords().unwrap())),
            MetricKind::Spherical => Ok(spherical_unchecked(x, y)),
            MetricKind::Hyperbolic => Ok(hyperbolic_unchecked(
                x.coords().unwrap(),
                y.coords().unwrap(),
            )),
            MetricKind::Quasihyperbolic => {
                let grid = QhGrid::default_for(x.coords().unwrap(), y.coords().unwrap());
                Ok(dist_quasihyperbolic(&self.region, x, y, &grid)?.value)
            }
        }
    }

    /// Supremum of the distance from `center` over the space, if finite.
    pub fn max_radius_from(&self, _center: &ExtPoint) -> f64 {
        match self.kind {
            MetricKind::Spherical => std::f64::consts::PI,
            _ => f64::INFINITY,
        }
    }
}

/// Great-circle distance σ on `S^n`.
pub fn dist_spherical(u: &ExtPoint, v: &ExtPoint) -> f64 {
    spherical_unchecked(u, v)
}

/// Hyperbolic distance ρ on the unit ball.
pub fn dist_hyperbolic(x: &ExtPoint, y: &ExtPoint) -> Result<f64> {
    for p in [x, y] {
        if !Region::UnitBall.contains(p) {
            return domain(format!("{p:?} is not inside the unit ball"));
        }
    }
    Ok(hyperbolic_unchecked(x.coords().unwrap(), y.coords().unwrap()))
}

/// `σ(u,v) = 2·atan2(|u−v|, w)` with `w² = 1 + 2u·v + |u|²|v|²`, which is the
/// closed form `2·arcsin(|u−v|/√((1+|u|²)(1+|v|²)))` rewritten so that it
/// stays accurate near antipodal pairs. When `|u||v| > 1` both points are
/// first moved by the chart swap, a spherical isometry.
pub(crate) fn spherical_unchecked(u: &ExtPoint, v: &ExtPoint) -> f64 {
    match (u, v) {
        (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
        (ExtPoint::Infinity, ExtPoint::Finite(c)) | (ExtPoint::Finite(c), ExtPoint::Infinity) => {
            2.0 * 1.0f64.atan2(norm(c))
        }
        (ExtPoint::Finite(a), ExtPoint::Finite(b)) => {
            let (na, nb) = (norm(a), norm(b));
            if na * nb > 1.0 {
                let a2: crate::point::Coords = a.iter().map(|x| (x / na) / na).collect();
                let b2: crate::point::Coords = b.iter().map(|x| (x / nb) / nb).collect();
                spherical_finite(&a2, &b2)
            } else {
                spherical_finite(a, b)
            }
        }
    }
}

fn spherical_finite(a: &[f64], b: &[f64]) -> f64 {
    let d = dist(a, b);
    if d == 0.0 {
        return 0.0;
    }
    let nb = norm(b);
    let w = if nb == 0.0 {
        1.0
    } else {
        // | |b|·a + b/|b| |
        norm(
            &a.iter()
                .zip(b)
                .map(|(x, y)| nb * x + y / nb)
                .collect::<crate::point::Coords>(),
        )
    };
    2.0 * d.atan2(w)
}

/// `ρ(x,y) = 2·asinh(|x−y| / √((1−|x|²)(1−|y|²)))`.
pub(crate) fn hyperbolic_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let d = dist(x, y);
    if d == 0.0 {
        return 0.0;
    }
    let (rx, ry) = (norm(x), norm(y));
    let gx = (1.0 - rx) * (1.0 + rx);
    let gy = (1.0 - ry) * (1.0 + ry);
    2.0 * (d / (gx * gy).sqrt()).asinh()
}

/// Bracketed distance value; closed-form results have a degenerate bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicEstimate {
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub method: EstimateMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    ClosedForm,
    GraphRefinement,
}

impl GeodesicEstimate {
    pub fn exact(value: f64) -> Self {
        GeodesicEstimate {
            value,
            lower_bound: value,
            upper_bound: value,
            method: EstimateMethod::ClosedForm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(c: &[f64]) -> ExtPoint {
        ExtPoint::new(c)
    }

    #[test]
    fn densities_at_origin() {
        let o = ExtPoint::origin(3);
        assert_eq!(ConformalMetric::euclidean(3).density(&p(&[5.0, 1.0, 2.0])).unwrap(), 1.0);
        assert_eq!(ConformalMetric::spherical(3).density(&o).unwrap(), 2.0);
        assert_eq!(ConformalMetric::hyperbolic(3).density(&o).unwrap(), 2.0);
        let qh = ConformalMetric::quasihyperbolic(3, Region::UnitBall).unwrap();
        assert_eq!(qh.density(&o).unwrap(), 1.0);
        let hs = ConformalMetric::quasihyperbolic(2, Region::UpperHalfSpace).unwrap();
        assert_eq!(hs.density(&p(&[3.0, 0.25])).unwrap(), 4.0);
    }

    #[test]
    fn density_domain_errors() {
        let h = ConformalMetric::hyperbolic(2);
        assert!(matches!(h.density(&p(&[1.0, 0.0])), Err(QrError::Domain(_))));
        assert!(matches!(h.density(&ExtPoint::Infinity), Err(QrError::Domain(_))));
        assert!(matches!(
            ConformalMetric::euclidean(2).density(&ExtPoint::Infinity),
            Err(QrError::Domain(_))
        ));
        assert_eq!(ConformalMetric::spherical(2).density(&ExtPoint::Infinity).unwrap(), 2.0);
        assert!(matches!(
            ConformalMetric::quasihyperbolic(2, Region::Whole),
            Err(QrError::Domain(_))
        ));
    }

    #[test]
    fn spherical_examples() {
        let o = ExtPoint::origin(2);
        assert!((dist_spherical(&o, &ExtPoint::Infinity) - PI).abs() < 1e-15);
        assert!((dist_spherical(&o, &p(&[1.0, 0.0])) - PI / 2.0).abs() < 1e-15);
        // antipodes u and -u/|u|²
        let a = dist_spherical(&p(&[0.3, 0.4]), &p(&[-1.2, -1.6]));
        assert!((a - PI).abs() < 1e-12);
        // huge but finite points agree with their ∞ limit
        let big = p(&[1e250, 0.0]);
        assert!(dist_spherical(&big, &ExtPoint::Infinity) < 1e-249);
        assert!((dist_spherical(&big, &o) - PI).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_examples() {
        let o = ExtPoint::origin(2);
        let x = p(&[0.5, 0.0]);
        assert!((dist_hyperbolic(&o, &x).unwrap() - 3.0f64.ln()).abs() < 1e-15);
        assert_eq!(dist_hyperbolic(&x, &x).unwrap(), 0.0);
        for r in [0.1, 0.5, 0.9, 0.99] {
            let a = p(&[0.0, 0.0, -r]);
            let b = p(&[0.0, 0.0, -(3.0 * r + 1.0) / (r + 3.0)]);
            assert!((dist_hyperbolic(&a, &b).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        }
        assert!(matches!(dist_hyperbolic(&o, &p(&[1.0, 0.0])), Err(QrError::Domain(_))));
    }

    #[test]
    fn degenerate_pairs_are_zero() {
        let x = p(&[0.2, 0.1]);
        for m in [
            ConformalMetric::euclidean(2),
            ConformalMetric::spherical(2),
            ConformalMetric::hyperbolic(2),
            ConformalMetric::quasihyperbolic(2, Region::UnitBall).unwrap(),
        ] {
            assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
        }
    }
}
