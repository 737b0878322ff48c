//! The map zoo: concrete quasiregular maps with their dilatation metadata,
//! isometry families, distortion measurement and iteration.

pub mod distortion;
pub mod isometries;
pub mod zorich;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, parameter, QrError, Result};
use crate::isometry::{mobius_add, SphereRotation};
use crate::metrics::Region;
use crate::point::{norm, norm_sq, Coords, ExtPoint};

pub use distortion::{jacobian_matrix, numeric_jacobian, DistortionSample};
pub use isometries::{verify_isometry, IsometrySampler, IsometrySpace};

#[derive(Debug, Clone)]
pub enum MapKind {
    Identity,
    Constant(ExtPoint),
    /// `x ↦ x|x|^{t−1}`
    RadialPower { t: f64 },
    /// The Zorich map; its domain is either the beam or all of `R³`.
    Zorich,
    /// Inverse branch of the Zorich map, upper half-space → beam.
    ZorichInverse,
    /// `x ↦ Z⁻¹(x + e₃)` on the unit ball.
    ZorichBloch,
    /// Complex polynomial, coefficients in ascending degree.
    Polynomial { coeffs: Vec<Complex64> },
    /// Linear map, row-major `n×n`.
    Linear { matrix: Vec<f64> },
    /// `ψ ∘ f ∘ ψ⁻¹` for the diagonal stretch `ψ`.
    QcConjugate {
        base: Box<MapDescriptor>,
        stretch: Vec<f64>,
    },
    /// Möbius self-map `x ↦ a ⊕ x` of the unit ball.
    MobiusBall { anchor: Coords },
    /// Conformal map of the unit ball onto the upper half-space.
    BallToHalfSpace,
    SphericalIsometry {
        rotation: SphereRotation,
        inverse: bool,
    },
    Translation { offset: Coords },
    /// `z ↦ e^z`
    Exp,
    /// `z ↦ e^{e^z}`
    ExpExp,
    /// The uniformly Lipschitz piecewise-linear maps `(x,y) ↦ (p_m(x), y)`
    /// on `(-1,1)²`.
    PiecewiseLinear { m: f64 },
    /// `outer ∘ inner`
    Compose {
        outer: Box<MapDescriptor>,
        inner: Box<MapDescriptor>,
    },
}

/// An evaluatable quasiregular map with its metadata.
#[derive(Debug, Clone)]
pub struct MapDescriptor {
    pub kind: MapKind,
    pub dim: usize,
    /// Declared dilatation `K ≥ 1`.
    pub dilatation: f64,
    /// `K^{1/(1−n)}`, always derived from `dilatation`.
    pub alpha: f64,
    pub domain: Region,
    pub range: Region,
    pub poles: Vec<ExtPoint>,
    pub name: String,
}

/// `K^{1/(1−n)}`
pub fn holder_exponent(k: f64, n: usize) -> f64 {
    k.powf(1.0 / (1.0 - n as f64))
}

impl MapDescriptor {
    fn new(name: impl Into<String>, kind: MapKind, dim: usize, k: f64, domain: Region, range: Region) -> Self {
        debug_assert!(k >= 1.0);
        MapDescriptor {
            kind,
            dim,
            dilatation: k,
            alpha: holder_exponent(k, dim),
            domain,
            range,
            poles: Vec::new(),
            name: name.into(),
        }
    }

    fn with_poles(mut self, poles: Vec<ExtPoint>) -> Self {
        self.poles = poles;
        self
    }

    /// Replaces the declared dilatation, keeping `α` consistent.
    pub fn with_dilatation(mut self, k: f64) -> Self {
        assert!(k >= 1.0, "dilatation must be at least 1");
        self.dilatation = k;
        self.alpha = holder_exponent(k, self.dim);
        self
    }

    pub fn has_poles_in(&self, region: &Region) -> bool {
        self.poles.iter().any(|p| region.contains(p))
    }

    /// Whether the range sits inside the domain up to the chart swap, so
    /// iterates make sense.
    pub fn is_iterable(&self) -> bool {
        matches!(self.domain, Region::Sphere | Region::Whole)
            && matches!(
                self.kind,
                MapKind::Identity
                    | MapKind::Constant(_)
                    | MapKind::RadialPower { .. }
                    | MapKind::Polynomial { .. }
                    | MapKind::Linear { .. }
                    | MapKind::QcConjugate { .. }
                    | MapKind::SphericalIsometry { .. }
                    | MapKind::Translation { .. }
            )
    }

    pub fn eval(&self, x: &ExtPoint) -> Result<ExtPoint> {
        if let ExtPoint::Finite(c) = x {
            if c.len() != self.dim {
                return parameter(format!(
                    "{}: point of dimension {} for a map on R^{}",
                    self.name,
                    c.len(),
                    self.dim
                ));
            }
        }
        if !self.domain.contains(x) {
            return domain(format!("{}: {x:?} is outside the domain {:?}", self.name, self.domain));
        }
        if let ExtPoint::Infinity = x {
            return self.eval_at_infinity();
        }
        let c = x.coords().unwrap();
        if self.poles.iter().any(|p| p == x) {
            return Ok(ExtPoint::Infinity);
        }
        Ok(match &self.kind {
            MapKind::Identity => x.clone(),
            MapKind::Constant(p) => p.clone(),
            MapKind::RadialPower { t } => {
                let r = norm(c);
                if r == 0.0 {
                    x.clone()
                } else {
                    let s = r.powf(t - 1.0);
                    ExtPoint::from_coords(c.iter().map(|v| v * s).collect())
                }
            }
            MapKind::Zorich => {
                let z = zorich::zorich([c[0], c[1], c[2]]);
                ExtPoint::from_coords(Coords::from_slice(&z))
            }
            MapKind::ZorichInverse => {
                ExtPoint::new(&zorich::zorich_inverse([c[0], c[1], c[2]])?)
            }
            MapKind::ZorichBloch => ExtPoint::new(&zorich::zorich_bloch([c[0], c[1], c[2]])?),
            MapKind::Polynomial { coeffs } => {
                let z = Complex64::new(c[0], c[1]);
                let w = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
                complex_point(w)
            }
            MapKind::Linear { matrix } => ExtPoint::from_coords(mat_vec(matrix, c)),
            MapKind::QcConjugate { base, stretch } => {
                let pre: Coords = c.iter().zip(stretch).map(|(v, s)| v / s).collect();
                match base.eval(&ExtPoint::Finite(pre))? {
                    ExtPoint::Infinity => ExtPoint::Infinity,
                    ExtPoint::Finite(w) => {
                        ExtPoint::from_coords(w.iter().zip(stretch).map(|(v, s)| v * s).collect())
                    }
                }
            }
            MapKind::MobiusBall { anchor } => ExtPoint::Finite(mobius_add(anchor, c)),
            MapKind::BallToHalfSpace => {
                // inversion in the sphere |x + e_n| = √2, then a reflection
                // in x₁ to preserve orientation
                let n = self.dim;
                let mut y: Coords = c.iter().copied().collect();
                y[n - 1] += 1.0;
                let r2 = norm_sq(&y);
                let mut out: Coords = y.iter().map(|v| 2.0 * v / r2).collect();
                out[n - 1] -= 1.0;
                out[0] = -out[0];
                ExtPoint::from_coords(out)
            }
            MapKind::SphericalIsometry { rotation, inverse } => {
                if *inverse {
                    rotation.apply_inverse(x)
                } else {
                    rotation.apply(x)
                }
            }
            MapKind::Translation { offset } => {
                ExtPoint::from_coords(c.iter().zip(offset).map(|(a, b)| a + b).collect())
            }
            MapKind::Exp => complex_point(Complex64::new(c[0], c[1]).exp()),
            MapKind::ExpExp => {
                let w = Complex64::new(c[0], c[1]).exp();
                if !w.re.is_finite() || !w.im.is_finite() {
                    return Err(QrError::Numeric(format!("{}: overflow at {x:?}", self.name)));
                }
                complex_point(w.exp())
            }
            MapKind::PiecewiseLinear { m } => {
                let t = c[0];
                let p = if t <= 0.0 {
                    t
                } else if t < 0.5 {
                    2.0 * (m - 1.0) * t / m
                } else {
                    (2.0 * t + m - 2.0) / m
                };
                ExtPoint::new(&[p, c[1]])
            }
            MapKind::Compose { outer, inner } => outer.eval(&inner.eval(x)?)?,
        })
    }

    fn eval_at_infinity(&self) -> Result<ExtPoint> {
        match &self.kind {
            MapKind::Constant(p) => Ok(p.clone()),
            MapKind::SphericalIsometry { rotation, inverse } => Ok(if *inverse {
                rotation.apply_inverse(&ExtPoint::Infinity)
            } else {
                rotation.apply(&ExtPoint::Infinity)
            }),
            MapKind::Polynomial { coeffs } if coeffs.len() == 1 => {
                Ok(complex_point(coeffs[0]))
            }
            MapKind::Identity
            | MapKind::RadialPower { .. }
            | MapKind::Polynomial { .. }
            | MapKind::Linear { .. }
            | MapKind::QcConjugate { .. }
            | MapKind::Translation { .. } => Ok(ExtPoint::Infinity),
            MapKind::Compose { outer, inner } => outer.eval(&inner.eval(&ExtPoint::Infinity)?),
            _ => domain(format!("{} is not defined at ∞", self.name)),
        }
    }

    /// `f^m(x)`, overflowing to ∞ past [`crate::point::OVERFLOW_NORM`].
    pub fn orbit(&self, x: &ExtPoint, m: usize) -> Result<ExtPoint> {
        let mut p = x.clone();
        for _ in 0..m {
            p = self.eval(&p)?;
        }
        Ok(p)
    }
}

fn complex_point(w: Complex64) -> ExtPoint {
    ExtPoint::from_coords(Coords::from_slice(&[w.re, w.im]))
}

fn mat_vec(m: &[f64], x: &[f64]) -> Coords {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum())
        .collect()
}

/// Dilatation `max(K_O, K_I)` of an invertible linear map.
pub fn linear_dilatation(matrix: &[f64], n: usize) -> Result<f64> {
    let m = DMatrix::from_row_slice(n, n, matrix);
    let det = m.determinant();
    if !(det > 0.0) {
        return parameter("linear map must be orientation preserving and invertible");
    }
    let sv = m.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let ko = smax.powi(n as i32) / det;
    let ki = det / smin.powi(n as i32);
    Ok(ko.max(ki).max(1.0))
}

pub fn identity(n: usize) -> MapDescriptor {
    MapDescriptor::new("identity", MapKind::Identity, n, 1.0, Region::Sphere, Region::Sphere)
}

pub fn constant(p: ExtPoint, n: usize) -> MapDescriptor {
    MapDescriptor::new("constant", MapKind::Constant(p), n, 1.0, Region::Sphere, Region::Sphere)
}

/// `f_t(x) = x|x|^{t−1}` with `K = max(t, 1/t)^{n−1}`.
pub fn radial_power(t: f64, n: usize) -> Result<MapDescriptor> {
    if !(t > 0.0) || !t.is_finite() {
        return parameter(format!("radial power exponent {t} must be positive"));
    }
    if n < 2 {
        return parameter("dimension must be at least 2");
    }
    let k = t.max(1.0 / t).powi(n as i32 - 1);
    Ok(MapDescriptor::new(
        format!("radial-power(t={t})"),
        MapKind::RadialPower { t },
        n,
        k,
        Region::Sphere,
        Region::Sphere,
    ))
}

/// Measured dilatation of the Zorich map (shared by its inverse branch).
///
/// `Z(a,b,c) = e^c·(...)` so the distortion does not depend on `c`, and the
/// symmetries of the square reduce the search to the triangle
/// `0 < b < a < π/2`. The supremum is approached at the corner of the
/// square, so the grid is geometric towards it. Stencils never straddle the
/// diagonal crease, where the map is only piecewise smooth.
pub fn zorich_dilatation() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| {
        let probe = MapDescriptor::new("zorich", MapKind::Zorich, 3, 1.0, Region::Beam, Region::Whole);
        let lim = std::f64::consts::FRAC_PI_2;
        let mut gaps: Vec<f64> = (1..=60).map(|i| i as f64 / 61.0).collect();
        gaps.extend((0..=30).map(|i| 10f64.powf(-2.0 - 4.0 * i as f64 / 30.0)));
        let mut k: f64 = 1.0;
        for &e in &gaps {
            for &d in &gaps {
                let a = lim * (1.0 - e);
                let b = a * (1.0 - d);
                let h = (0.25 * (a - b)).min(0.25 * (lim - a)).min(1e-5);
                let s = numeric_jacobian(&probe, &ExtPoint::new(&[a, b, 0.0]), Some(h))
                    .expect("zorich is smooth off its creases");
                if let (Some(ko), Some(ki)) = (s.k_outer, s.k_inner) {
                    k = k.max(ko).max(ki);
                }
            }
        }
        k
    })
}

/// The Zorich map on the open beam `|a|, |b| < π/2`.
pub fn zorich() -> MapDescriptor {
    MapDescriptor::new("zorich", MapKind::Zorich, 3, zorich_dilatation(), Region::Beam, Region::Whole)
}

/// The Zorich map extended to all of `R³` by reflecting across the beam
/// faces; the dilatation is unchanged because each reflected copy is the
/// beam map composed with isometries.
pub fn zorich_extended() -> MapDescriptor {
    MapDescriptor::new(
        "zorich-extended",
        MapKind::Zorich,
        3,
        zorich_dilatation(),
        Region::Whole,
        Region::Whole,
    )
}

pub fn zorich_inverse_map() -> MapDescriptor {
    MapDescriptor::new(
        "zorich-inverse",
        MapKind::ZorichInverse,
        3,
        zorich_dilatation(),
        Region::UpperHalfSpace,
        Region::Beam,
    )
}

/// Inverse of the Zorich map on the upper half-space.
pub fn zorich_inverse(p: &ExtPoint) -> Result<ExtPoint> {
    zorich_inverse_map().eval(p)
}

pub fn zorich_bloch() -> MapDescriptor {
    MapDescriptor::new(
        "zorich-bloch",
        MapKind::ZorichBloch,
        3,
        zorich_dilatation(),
        Region::UnitBall,
        Region::Beam,
    )
}

/// Planar polynomial with real/imaginary coefficient pairs, ascending degree.
pub fn planar_polynomial(coeffs: &[(f64, f64)]) -> Result<MapDescriptor> {
    if coeffs.is_empty() {
        return parameter("polynomial needs at least one coefficient");
    }
    let c: Vec<Complex64> = coeffs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    let degree = c.iter().rposition(|z| z.norm() > 0.0).unwrap_or(0);
    let poles = if degree >= 1 { vec![ExtPoint::Infinity] } else { Vec::new() };
    Ok(MapDescriptor::new(
        format!("polynomial(deg {degree})"),
        MapKind::Polynomial { coeffs: c },
        2,
        1.0,
        Region::Sphere,
        Region::Sphere,
    )
    .with_poles(poles))
}

/// `ψ ∘ f ∘ ψ⁻¹` for `ψ = diag(stretch)`, declared `K = K(ψ)²·K(f)`.
pub fn qc_conjugate(base: &MapDescriptor, stretch: &[f64]) -> Result<MapDescriptor> {
    if base.dim != 2 || stretch.len() != 2 {
        return parameter("qc conjugates are planar");
    }
    if stretch.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return parameter("stretch entries must be positive");
    }
    let kpsi = linear_dilatation(&[stretch[0], 0.0, 0.0, stretch[1]], 2)?;
    Ok(MapDescriptor::new(
        format!("qc-conjugate({})", base.name),
        MapKind::QcConjugate {
            base: Box::new(base.clone()),
            stretch: stretch.to_vec(),
        },
        2,
        kpsi * kpsi * base.dilatation,
        base.domain.clone(),
        base.range.clone(),
    )
    .with_poles(base.poles.clone()))
}

pub fn linear(matrix: &[f64], n: usize) -> Result<MapDescriptor> {
    if matrix.len() != n * n {
        return parameter("matrix size does not match the dimension");
    }
    let k = linear_dilatation(matrix, n)?;
    Ok(MapDescriptor::new(
        "linear",
        MapKind::Linear {
            matrix: matrix.to_vec(),
        },
        n,
        k,
        Region::Sphere,
        Region::Sphere,
    ))
}

/// The planar stretch `f_K(x + iy) = Kx + iy`.
pub fn planar_stretch(k: f64) -> Result<MapDescriptor> {
    if !(k >= 1.0) {
        return parameter("stretch factor must be at least 1");
    }
    let mut f = linear(&[k, 0.0, 0.0, 1.0], 2)?;
    f.name = format!("f_K(K={k})");
    Ok(f)
}

/// Möbius automorphism φ of the unit ball with φ(0) = a.
pub fn mobius_ball_isometry(a: &ExtPoint) -> Result<MapDescriptor> {
    let Some(c) = a.coords() else {
        return parameter("anchor must be finite");
    };
    if !(norm(c) < 1.0) {
        return parameter(format!("anchor {a:?} must lie in the open unit ball"));
    }
    Ok(MapDescriptor::new(
        "mobius-ball",
        MapKind::MobiusBall {
            anchor: Coords::from_slice(c),
        },
        c.len(),
        1.0,
        Region::UnitBall,
        Region::UnitBall,
    ))
}

/// Conformal map of the unit ball onto the upper half-space, sending 0 to
/// `e_n`; its pole `-e_n` sits on the boundary sphere.
pub fn ball_to_half_space(n: usize) -> MapDescriptor {
    MapDescriptor::new(
        "ball-to-half-space",
        MapKind::BallToHalfSpace,
        n,
        1.0,
        Region::UnitBall,
        Region::UpperHalfSpace,
    )
    .with_poles(vec![ExtPoint::axis(n, n - 1, -1.0)])
}

/// Spherical isometry `A` with `A(p) = 0`.
pub fn spherical_isometry_to_zero(p: &ExtPoint, n: usize) -> MapDescriptor {
    MapDescriptor::new(
        "spherical-isometry",
        MapKind::SphericalIsometry {
            rotation: SphereRotation::to_zero(p, n),
            inverse: false,
        },
        n,
        1.0,
        Region::Sphere,
        Region::Sphere,
    )
}

/// Spherical isometry `A` with `A(0) = p`.
pub fn spherical_isometry_from_zero(p: &ExtPoint, n: usize) -> MapDescriptor {
    MapDescriptor::new(
        "spherical-isometry",
        MapKind::SphericalIsometry {
            rotation: SphereRotation::to_zero(p, n),
            inverse: true,
        },
        n,
        1.0,
        Region::Sphere,
        Region::Sphere,
    )
}

pub fn translation(offset: &[f64]) -> MapDescriptor {
    MapDescriptor::new(
        "translation",
        MapKind::Translation {
            offset: Coords::from_slice(offset),
        },
        offset.len(),
        1.0,
        Region::Sphere,
        Region::Sphere,
    )
}

pub fn exp_map() -> MapDescriptor {
    MapDescriptor::new("exp", MapKind::Exp, 2, 1.0, Region::Whole, Region::Whole)
}

pub fn exp_exp_map() -> MapDescriptor {
    MapDescriptor::new("exp-exp", MapKind::ExpExp, 2, 1.0, Region::Whole, Region::Whole)
}

/// Member `f_m` of the piecewise-linear family on `(-1,1)²`, `m ≥ 2`.
pub fn piecewise_linear(m: f64) -> Result<MapDescriptor> {
    if !(m >= 2.0) {
        return parameter("family index must be at least 2");
    }
    let slopes = [1.0, 2.0 * (m - 1.0) / m, 2.0 / m];
    let k = slopes.iter().fold(1.0f64, |acc, s| acc.max(*s).max(1.0 / s));
    let square = Region::Cube { half_width: 1.0 };
    Ok(MapDescriptor::new(
        format!("piecewise-linear(m={m})"),
        MapKind::PiecewiseLinear { m },
        2,
        k,
        square.clone(),
        square,
    ))
}

/// `outer ∘ inner`, declared `K = K(outer)·K(inner)`.
pub fn compose(outer: &MapDescriptor, inner: &MapDescriptor) -> Result<MapDescriptor> {
    if outer.dim != inner.dim {
        return parameter("composed maps must share a dimension");
    }
    Ok(MapDescriptor::new(
        format!("{}∘{}", outer.name, inner.name),
        MapKind::Compose {
            outer: Box::new(outer.clone()),
            inner: Box::new(inner.clone()),
        },
        inner.dim,
        outer.dilatation * inner.dilatation,
        inner.domain.clone(),
        outer.range.clone(),
    ))
}

/// `x ↦ f(x) + offset`.
pub fn shifted(f: &MapDescriptor, offset: &[f64]) -> Result<MapDescriptor> {
    compose(&translation(offset), f)
}
