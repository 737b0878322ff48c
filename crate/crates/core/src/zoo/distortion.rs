use nalgebra::DMatrix;

use super::MapDescriptor;
use crate::error::{QrError, Result};
use crate::point::{norm, ExtPoint};

/// Finite-difference measurement of `f′(x)`.
#[derive(Debug, Clone)]
pub struct DistortionSample {
    pub jacobian: DMatrix<f64>,
    /// `J_f(x)`
    pub det: f64,
    /// `|f′(x)|`
    pub opnorm: f64,
    /// `ℓ(f′(x))`
    pub minnorm: f64,
    /// `|f′|ⁿ / J_f`, absent where `J_f ≤ 0`.
    pub k_outer: Option<f64>,
    /// `J_f / ℓⁿ`, absent where `J_f ≤ 0` or `ℓ = 0`.
    pub k_inner: Option<f64>,
}

impl DistortionSample {
    pub fn from_matrix(jacobian: DMatrix<f64>) -> Self {
        let n = jacobian.nrows() as i32;
        let det = jacobian.determinant();
        let sv = jacobian.singular_values();
        let opnorm = sv.max();
        let minnorm = sv.min();
        let (k_outer, k_inner) = if det > 0.0 {
            let ki = (minnorm > 0.0).then(|| det / minnorm.powi(n));
            (Some(opnorm.powi(n) / det), ki)
        } else {
            (None, None)
        };
        DistortionSample {
            jacobian,
            det,
            opnorm,
            minnorm,
            k_outer,
            k_inner,
        }
    }
}

pub fn default_step(x: &[f64]) -> f64 {
    1e-5 * norm(x).max(1.0)
}

/// Central-difference Jacobian of `map` at a finite interior point. `h`
/// defaults to `1e-5·max(1, |x|)`.
pub fn numeric_jacobian(map: &MapDescriptor, x: &ExtPoint, h: Option<f64>) -> Result<DistortionSample> {
    jacobian_matrix(map, x, h).map(DistortionSample::from_matrix)
}

/// The central-difference matrix alone, without the singular values.
pub fn jacobian_matrix(map: &MapDescriptor, x: &ExtPoint, h: Option<f64>) -> Result<DMatrix<f64>> {
    let Some(c) = x.coords() else {
        return Err(QrError::Domain(format!("{}: no Jacobian at ∞", map.name)));
    };
    let h = h.unwrap_or_else(|| default_step(c));
    if !(h > 0.0) {
        return Err(QrError::Parameter(format!("step {h} must be positive")));
    }
    let n = c.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = ExtPoint::Finite(c.into());
    for j in 0..n {
        let mut side = |s: f64| -> Result<crate::point::Coords> {
            if let ExtPoint::Finite(p) = &mut probe {
                p[j] = c[j] + s * h;
            }
            let y = map.eval(&probe).map_err(|e| {
                QrError::Numeric(format!("{}: stencil evaluation failed at {probe:?}: {e}", map.name))
            })?;
            match y {
                ExtPoint::Finite(v) => Ok(v),
                ExtPoint::Infinity => Err(QrError::Numeric(format!(
                    "{}: stencil reaches ∞ near {x:?}",
                    map.name
                ))),
            }
        };
        let plus = side(1.0)?;
        let minus = side(-1.0)?;
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
        if let ExtPoint::Finite(p) = &mut probe {
            p[j] = c[j];
        }
    }
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(QrError::Numeric(format!("{}: non-finite Jacobian at {x:?}", map.name)));
    }
    Ok(jac)
}
