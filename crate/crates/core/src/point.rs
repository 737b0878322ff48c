//! Points of the extended space `R^n ∪ {∞}` and the small amount of vector
//! arithmetic the kernels need.

use smallvec::SmallVec;
use std::fmt;

/// Coordinate storage. Dimensions used in practice are 2 and 3, so the
/// inline capacity avoids heap traffic in the hot loops.
pub type Coords = SmallVec<[f64; 4]>;

/// Norm above which a finite value is treated as having escaped to ∞.
pub const OVERFLOW_NORM: f64 = 1e300;

#[derive(Clone, PartialEq)]
pub enum ExtPoint {
    Finite(Coords),
    Infinity,
}

impl fmt::Debug for ExtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtPoint::Finite(c) => write!(f, "{:?}", c.as_slice()),
            ExtPoint::Infinity => write!(f, "∞"),
        }
    }
}

impl ExtPoint {
    pub fn new(coords: &[f64]) -> Self {
        ExtPoint::Finite(Coords::from_slice(coords))
    }

    pub fn origin(n: usize) -> Self {
        ExtPoint::Finite(smallvec::smallvec![0.0; n])
    }

    /// `scale · e_axis` in dimension `n`.
    pub fn axis(n: usize, axis: usize, scale: f64) -> Self {
        let mut c: Coords = smallvec::smallvec![0.0; n];
        c[axis] = scale;
        ExtPoint::Finite(c)
    }

    /// Wraps a computed vector, mapping overflowed or non-finite values to ∞.
    pub fn from_coords(c: Coords) -> Self {
        if c.iter().any(|v| !v.is_finite()) || norm(&c) > OVERFLOW_NORM {
            ExtPoint::Infinity
        } else {
            ExtPoint::Finite(c)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtPoint::Infinity)
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            ExtPoint::Finite(c) => Some(c),
            ExtPoint::Infinity => None,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            ExtPoint::Finite(c) => norm(c),
            ExtPoint::Infinity => f64::INFINITY,
        }
    }

    /// The chart swap `x ↦ x/|x|²` in dimension `n`, exchanging 0 and ∞.
    pub fn chart_swap(&self, n: usize) -> ExtPoint {
        match self {
            ExtPoint::Infinity => ExtPoint::origin(n),
            ExtPoint::Finite(c) => {
                let r2 = norm_sq(c);
                if r2 == 0.0 {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::from_coords(c.iter().map(|v| v / r2).collect())
                }
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Euclidean norm, scaled to avoid overflow for very large entries.
pub fn norm(a: &[f64]) -> f64 {
    let m = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if !(1e-150..=1e150).contains(&m) {
        m * a.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
    } else {
        norm_sq(a).sqrt()
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Coords {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Coords {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Coords {
    a.iter().map(|x| x * s).collect()
}

/// `a + s·b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Coords {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}
