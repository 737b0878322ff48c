//! A Zorich map `R³ → R³ \ {0}` and its inverse branch on the beam.
//!
//! On the beam `Ω = {|a| < π/2, |b| < π/2}` the map is
//! `Z(a,b,c) = e^c · h(v(a,b))`, where `v` is the radial square-to-disk map
//! onto the disk of radius π/2 and `h(v) = (sin|v|·v/|v|, cos|v|)` lifts the
//! disk onto the upper unit hemisphere. The horizontal slice at height `c`
//! goes onto the hemisphere of radius `e^c`. Reflections in the beam faces
//! correspond to reflection in the plane `x₃ = 0`, which extends `Z` to all
//! of `R³`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Result};

/// Radial map of the square `[-s,s]²` onto the disk of radius `s`.
pub fn square_to_disk(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let k = a.abs().max(b.abs()) / r;
    (a * k, b * k)
}

pub fn disk_to_square(v1: f64, v2: f64) -> (f64, f64) {
    let m = v1.abs().max(v2.abs());
    if m == 0.0 {
        return (0.0, 0.0);
    }
    let k = v1.hypot(v2) / m;
    (v1 * k, v2 * k)
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// `Z` on the closed beam.
pub fn zorich_beam(a: f64, b: f64, c: f64) -> [f64; 3] {
    let (v1, v2) = square_to_disk(a, b);
    let t = v1.hypot(v2);
    let s = sinc(t);
    let e = c.exp();
    [e * s * v1, e * s * v2, e * t.cos()]
}

/// Folds `a` into `[-π/2, π/2)`; returns the folded value and the number of
/// face reflections used (mod 2).
fn fold(a: f64) -> (f64, bool) {
    let k = ((a + FRAC_PI_2) / PI).floor();
    let r = a - k * PI;
    let odd = (k as i64).rem_euclid(2) == 1;
    (if odd { -r } else { r }, odd)
}

/// `Z` on all of `R³`.
pub fn zorich(p: [f64; 3]) -> [f64; 3] {
    let (a, fa) = fold(p[0]);
    let (b, fb) = fold(p[1]);
    let mut z = zorich_beam(a, b, p[2]);
    if fa != fb {
        z[2] = -z[2];
    }
    z
}

/// Inverse of `Z|_Ω`, defined on the open upper half-space.
pub fn zorich_inverse(p: [f64; 3]) -> Result<[f64; 3]> {
    if !(p[2] > 0.0) || p.iter().any(|v| !v.is_finite()) {
        return domain(format!("{p:?} is not in the open upper half-space"));
    }
    let horiz = p[0].hypot(p[1]);
    let r = horiz.hypot(p[2]);
    let t = horiz.atan2(p[2]);
    let (v1, v2) = if horiz == 0.0 {
        (0.0, 0.0)
    } else {
        (t * p[0] / horiz, t * p[1] / horiz)
    };
    let (a, b) = disk_to_square(v1, v2);
    Ok([a, b, r.ln()])
}

/// `x ↦ Z⁻¹(x + e₃)` on the unit ball; the image lies in the beam.
pub fn zorich_bloch(x: [f64; 3]) -> Result<[f64; 3]> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if !(r < 1.0) {
        return domain(format!("{x:?} is not in the open unit ball"));
    }
    zorich_inverse([x[0], x[1], x[2] + 1.0])
}
