use proptest::prelude::*;
use qrlab::metrics::{dist_hyperbolic, dist_spherical, ConformalMetric};
use qrlab::point::{dist, norm, Coords, ExtPoint};
use qrlab::rng::{in_ball, stream, unit_vector};
use rand::Rng;

fn random_point<R: Rng>(rng: &mut R, n: usize, kind: &str) -> ExtPoint {
    match kind {
        "hyperbolic" => ExtPoint::Finite(in_ball(rng, n, 0.999)),
        "spherical" => {
            // mix of small, large and infinite points
            match rng.random_range(0..10) {
                0 => ExtPoint::Infinity,
                1..=3 => {
                    let u = unit_vector(rng, n);
                    let r = 10f64.powf(rng.random_range(-3.0..6.0));
                    ExtPoint::Finite(u.iter().map(|v| v * r).collect())
                }
                _ => ExtPoint::Finite(in_ball(rng, n, 3.0)),
            }
        }
        _ => ExtPoint::Finite(in_ball(rng, n, 10.0)),
    }
}

#[test]
fn symmetry_and_triangle_inequality() {
    for (kind, metric) in [
        ("euclidean", ConformalMetric::euclidean(3)),
        ("spherical", ConformalMetric::spherical(3)),
        ("hyperbolic", ConformalMetric::hyperbolic(3)),
    ] {
        let mut rng = stream(2024);
        for _ in 0..10_000 {
            let a = random_point(&mut rng, 3, kind);
            let b = random_point(&mut rng, 3, kind);
            let c = random_point(&mut rng, 3, kind);
            let ab = metric.distance(&a, &b).unwrap();
            let ba = metric.distance(&b, &a).unwrap();
            let bc = metric.distance(&b, &c).unwrap();
            let ac = metric.distance(&a, &c).unwrap();
            let scale = ab.max(bc).max(ac).max(1e-300);
            assert!((ab - ba).abs() <= 1e-9 * scale, "{kind}: {a:?} {b:?}");
            assert!(ac <= ab + bc + 1e-9 * scale, "{kind}: {a:?} {b:?} {c:?}");
        }
    }
}

#[test]
fn spherical_bi_lipschitz_sandwich_on_closed_ball() {
    let mut rng = stream(77);
    for i in 0..10_000 {
        let r = if i % 10 == 0 { 1.0 } else { 1.0 - rng.random::<f64>() };
        let u: Coords = unit_vector(&mut rng, 3).iter().map(|v| v * r).collect();
        let v = in_ball(&mut rng, 3, 1.0);
        let d = dist(&u, &v);
        let s = dist_spherical(&ExtPoint::Finite(u), &ExtPoint::Finite(v));
        assert!(s - d >= -1e-12);
        assert!(2.0 * d - s >= -1e-12);
    }
}

fn rotation(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    // Gram–Schmidt of a random matrix
    let mut rows: Vec<Vec<f64>> = Vec::new();
    while rows.len() < n {
        let mut v: Vec<f64> = unit_vector(rng, n).to_vec();
        for r in &rows {
            let d: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            for k in 0..n {
                v[k] -= d * r[k];
            }
        }
        let m = norm(&v);
        if m > 1e-6 {
            rows.push(v.iter().map(|x| x / m).collect());
        }
    }
    rows
}

fn apply(rot: &[Vec<f64>], p: &ExtPoint) -> ExtPoint {
    match p {
        ExtPoint::Infinity => ExtPoint::Infinity,
        ExtPoint::Finite(c) => ExtPoint::Finite(
            rot.iter()
                .map(|r| r.iter().zip(c.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        ),
    }
}

#[test]
fn rotations_preserve_spherical_and_hyperbolic_distance() {
    let mut rng = stream(5);
    for _ in 0..1000 {
        let rot = rotation(&mut rng, 3);
        let a = random_point(&mut rng, 3, "spherical");
        let b = random_point(&mut rng, 3, "spherical");
        let s0 = dist_spherical(&a, &b);
        let s1 = dist_spherical(&apply(&rot, &a), &apply(&rot, &b));
        assert!((s0 - s1).abs() <= 1e-9);
        let x = random_point(&mut rng, 3, "hyperbolic");
        let y = random_point(&mut rng, 3, "hyperbolic");
        let h0 = dist_hyperbolic(&x, &y).unwrap();
        let h1 = dist_hyperbolic(&apply(&rot, &x), &apply(&rot, &y)).unwrap();
        assert!((h0 - h1).abs() <= 1e-9 * h0.max(1.0));
    }
}

/// Independent oracle: integrate 2|dx|/(1+|x|²) along the chart image of the
/// great circle through the lifted points with composite Simpson.
fn spherical_by_quadrature(u: &[f64], v: &[f64]) -> Option<f64> {
    let n = u.len();
    let lift = |x: &[f64]| -> Vec<f64> {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        let mut p: Vec<f64> = x.iter().map(|t| 2.0 * t / (1.0 + r2)).collect();
        p.push((r2 - 1.0) / (r2 + 1.0));
        p
    };
    let a = lift(u);
    let b = lift(v);
    let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let mut w: Vec<f64> = b.iter().zip(&a).map(|(y, x)| y - ab * x).collect();
    let wn = norm(&w);
    if wn < 1e-9 {
        return None;
    }
    w.iter_mut().for_each(|t| *t /= wn);
    let theta = ab.clamp(-1.0, 1.0).acos();
    let chart = |t: f64| -> (Vec<f64>, Vec<f64>) {
        let p: Vec<f64> = a.iter().zip(&w).map(|(x, y)| t.cos() * x + t.sin() * y).collect();
        let dp: Vec<f64> = a.iter().zip(&w).map(|(x, y)| -t.sin() * x + t.cos() * y).collect();
        let den = 1.0 - p[n];
        let x: Vec<f64> = p[..n].iter().map(|q| q / den).collect();
        let dx: Vec<f64> = (0..n)
            .map(|k| (dp[k] * den + p[k] * dp[n]) / (den * den))
            .collect();
        (x, dx)
    };
    let panels = 400;
    let mut sum = 0.0;
    for i in 0..=panels {
        let t = theta * i as f64 / panels as f64;
        let (x, dx) = chart(t);
        let r2: f64 = x.iter().map(|q| q * q).sum();
        if r2 > 1e8 {
            return None;
        }
        let f = 2.0 / (1.0 + r2) * norm(&dx);
        let wt = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += wt * f;
    }
    Some(sum * theta / (3.0 * panels as f64))
}

#[test]
fn spherical_closed_form_matches_quadrature() {
    let mut rng = stream(31);
    let mut checked = 0;
    while checked < 1000 {
        let u = in_ball(&mut rng, 3, 4.0);
        let v = in_ball(&mut rng, 3, 4.0);
        let Some(q) = spherical_by_quadrature(&u, &v) else { continue };
        let s = dist_spherical(&ExtPoint::Finite(u), &ExtPoint::Finite(v));
        assert!((s - q).abs() <= 1e-6, "{s} vs {q}");
        checked += 1;
    }
}

#[test]
fn spherical_origin_to_e1_by_quadrature() {
    // 2∫₀¹ dt/(1+t²) = π/2
    let q = spherical_by_quadrature(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
    assert!((q - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    let s = dist_spherical(&ExtPoint::origin(2), &ExtPoint::new(&[1.0, 0.0]));
    assert!((s - q).abs() < 1e-9);
}

proptest! {
    #[test]
    fn hyperbolic_radial_closed_form(r in 0.0f64..0.9999, theta in 0.0f64..std::f64::consts::TAU, phi in 0.0f64..std::f64::consts::PI) {
        let e = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
        let x = ExtPoint::new(&[r * e[0], r * e[1], r * e[2]]);
        let rho = dist_hyperbolic(&ExtPoint::origin(3), &x).unwrap();
        let expected = ((1.0 + r) / (1.0 - r)).ln();
        prop_assert!((rho - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}
