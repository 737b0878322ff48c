//! Raw isometry kernels: Möbius self-maps of the unit ball and rotations of
//! `S^n` seen through stereographic projection.

use crate::point::{dot, norm, norm_sq, Coords, ExtPoint};

/// Möbius addition `a ⊕ x`, the conformal automorphism of the unit ball
/// sending 0 to `a`. Inverse is `(-a) ⊕ x`.
pub fn mobius_add(a: &[f64], x: &[f64]) -> Coords {
    let ax = dot(a, x);
    let a2 = norm_sq(a);
    let x2 = norm_sq(x);
    let num_a = 1.0 + 2.0 * ax + x2;
    let num_x = 1.0 - a2;
    let den = 1.0 + 2.0 * ax + a2 * x2;
    a.iter()
        .zip(x)
        .map(|(ai, xi)| (num_a * ai + num_x * xi) / den)
        .collect()
}

/// Stereographic lift `R^n ∪ {∞} → S^n ⊂ R^{n+1}`; 0 goes to the south pole
/// `-e_{n+1}` and ∞ to the north pole.
pub fn stereo_lift(x: &ExtPoint, n: usize) -> Coords {
    let mut p: Coords = smallvec::smallvec![0.0; n + 1];
    match x {
        ExtPoint::Infinity => p[n] = 1.0,
        ExtPoint::Finite(c) => {
            let r2 = norm_sq(c);
            if r2 <= 1.0 {
                let d = 1.0 + r2;
                for i in 0..n {
                    p[i] = 2.0 * c[i] / d;
                }
                p[n] = (r2 - 1.0) / d;
            } else {
                // work with x/|x|² to stay finite for huge |x|
                let r = norm(c);
                let s2 = 1.0 / (r * r);
                let d = 1.0 + s2;
                for i in 0..n {
                    p[i] = 2.0 * (c[i] / r) / r / d;
                }
                p[n] = (1.0 - s2) / d;
            }
        }
    }
    p
}

/// Inverse of [`stereo_lift`]; the input is renormalised onto the sphere.
pub fn stereo_drop(p: &[f64]) -> ExtPoint {
    let n = p.len() - 1;
    let r = norm(p);
    let q: Coords = p.iter().map(|v| v / r).collect();
    let h = q[n];
    let horiz = &q[..n];
    if h <= 0.0 {
        ExtPoint::Finite(horiz.iter().map(|v| v / (1.0 - h)).collect())
    } else {
        let s = norm(horiz);
        if s == 0.0 {
            return ExtPoint::Infinity;
        }
        // 1 - h = |horiz|² / (1 + h) on the unit sphere
        let k = (1.0 + h) / s;
        ExtPoint::from_coords(horiz.iter().map(|v| (v / s) * k).collect())
    }
}

fn reflect(p: &mut [f64], u: &[f64]) {
    let d = 2.0 * dot(p, u);
    for (pi, ui) in p.iter_mut().zip(u) {
        *pi -= d * ui;
    }
}

/// An orientation-preserving rotation of `S^n`, stored as the product of two
/// Householder reflections `H_second ∘ H_first` in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRotation {
    n: usize,
    first: Option<Coords>,
    second: Option<Coords>,
}

impl SphereRotation {
    pub fn identity(n: usize) -> Self {
        SphereRotation {
            n,
            first: None,
            second: None,
        }
    }

    /// Rotation carrying the point `p` to 0 (the south pole).
    pub fn to_zero(p: &ExtPoint, n: usize) -> Self {
        let a = stereo_lift(p, n);
        let mut b: Coords = smallvec::smallvec![0.0; n + 1];
        b[n] = -1.0;
        let diff: Coords = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let dn = norm(&diff);
        if dn < 1e-300 {
            return Self::identity(n);
        }
        let u: Coords = diff.iter().map(|v| v / dn).collect();
        // e_1 is orthogonal to the south pole, so H_{e_1} fixes it and
        // restores orientation.
        let mut w: Coords = smallvec::smallvec![0.0; n + 1];
        w[0] = 1.0;
        SphereRotation {
            n,
            first: Some(u),
            second: Some(w),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn rotate(&self, p: &mut [f64]) {
        if let Some(u) = &self.first {
            reflect(p, u);
        }
        if let Some(w) = &self.second {
            reflect(p, w);
        }
    }

    pub fn rotate_inverse(&self, p: &mut [f64]) {
        if let Some(w) = &self.second {
            reflect(p, w);
        }
        if let Some(u) = &self.first {
            reflect(p, u);
        }
    }

    pub fn apply(&self, x: &ExtPoint) -> ExtPoint {
        if self.first.is_none() {
            return x.clone();
        }
        let mut p = stereo_lift(x, self.n);
        self.rotate(&mut p);
        stereo_drop(&p)
    }

    pub fn apply_inverse(&self, x: &ExtPoint) -> ExtPoint {
        if self.first.is_none() {
            return x.clone();
        }
        let mut p = stereo_lift(x, self.n);
        self.rotate_inverse(&mut p);
        stereo_drop(&p)
    }

    /// The `(n+1)×(n+1)` rotation matrix, row-major.
    pub fn matrix(&self) -> Vec<f64> {
        let m = self.n + 1;
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            let mut col: Coords = smallvec::smallvec![0.0; m];
            col[j] = 1.0;
            self.rotate(&mut col);
            for i in 0..m {
                out[i * m + j] = col[i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_add_sends_zero_to_anchor() {
        let a = [0.3, -0.2, 0.5];
        let y = mobius_add(&a, &[0.0, 0.0, 0.0]);
        assert_eq!(y.as_slice(), &a);
        let back = mobius_add(&[-0.3, 0.2, -0.5], &y);
        assert!(norm(&back) < 1e-15);
    }

    #[test]
    fn lift_and_drop_round_trip() {
        for x in [
            ExtPoint::new(&[0.0, 0.0]),
            ExtPoint::new(&[0.3, -4.0]),
            ExtPoint::new(&[1e200, 3e199]),
            ExtPoint::Infinity,
        ] {
            let p = stereo_lift(&x, 2);
            assert!((norm(&p) - 1.0).abs() < 1e-15);
            let back = stereo_drop(&p);
            match (&x, &back) {
                (ExtPoint::Infinity, ExtPoint::Infinity) => {}
                (ExtPoint::Finite(a), ExtPoint::Finite(b)) => {
                    let scale = norm(a).max(1.0);
                    assert!(crate::point::dist(a, b) / scale < 1e-14, "{x:?} {back:?}");
                }
                _ => panic!("{x:?} -> {back:?}"),
            }
        }
    }

    #[test]
    fn rotation_to_zero() {
        let p = ExtPoint::new(&[2.0, -1.0, 0.5]);
        let r = SphereRotation::to_zero(&p, 3);
        assert!(r.apply(&p).norm() < 1e-14);
        let back = r.apply_inverse(&ExtPoint::origin(3));
        assert!(crate::point::dist(back.coords().unwrap(), p.coords().unwrap()) < 1e-13);
        let r = SphereRotation::to_zero(&ExtPoint::Infinity, 2);
        assert!(r.apply(&ExtPoint::Infinity).norm() < 1e-15);
        let m = r.matrix();
        // orthogonal with determinant +1 (3×3)
        let det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6]);
        assert!((det - 1.0).abs() < 1e-14);
    }
}
