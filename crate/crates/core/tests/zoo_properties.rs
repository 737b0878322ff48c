use proptest::prelude::*;
use qrlab::point::{dist, norm, Coords};
use qrlab::rng;
use qrlab::zoo::{self, isometries::sample_isometries, numeric_jacobian, IsometrySampler, IsometrySpace};
use qrlab::{ExtPoint, Region};
use rand::Rng;

fn beam_point<R: Rng>(r: &mut R, height: f64) -> ExtPoint {
    let lim = std::f64::consts::FRAC_PI_2 * 0.999;
    ExtPoint::new(&[
        r.random_range(-lim..lim),
        r.random_range(-lim..lim),
        r.random_range(-height..height),
    ])
}

#[test]
fn zorich_round_trip_and_modulus() {
    let z = zoo::zorich();
    let mut r = rng::stream(11);
    for _ in 0..1000 {
        let p = beam_point(&mut r, 5.0);
        let c = p.coords().unwrap()[2];
        let q = z.eval(&p).unwrap();
        assert!((q.norm() - c.exp()).abs() <= 1e-12 * c.exp().max(1.0));
        let back = zoo::zorich_inverse(&q).unwrap();
        assert!(dist(back.coords().unwrap(), p.coords().unwrap()) < 1e-9, "{p:?} -> {back:?}");
    }
}

#[test]
fn zorich_bloch_image_stays_in_beam() {
    let f = zoo::zorich_bloch();
    let mut r = rng::stream(12);
    for _ in 0..10_000 {
        let x = ExtPoint::Finite(rng::in_ball(&mut r, 3, 1.0 - 1e-12));
        let y = f.eval(&x).unwrap();
        assert!(Region::Beam.contains(&y), "{x:?} -> {y:?}");
    }
}

#[test]
fn sampled_isometries_preserve_distance() {
    for (space, dim) in [
        (IsometrySpace::Hyperbolic, 2),
        (IsometrySpace::Hyperbolic, 3),
        (IsometrySpace::Euclidean, 3),
        (IsometrySpace::Spherical, 2),
        (IsometrySpace::Spherical, 3),
    ] {
        let sampler = IsometrySampler::new(space, dim, 21);
        let mut anchors = sampler.random_anchors(30, 6.0);
        anchors.push(ExtPoint::origin(dim));
        if space == IsometrySpace::Spherical {
            anchors.push(ExtPoint::Infinity);
        }
        for (i, m) in sample_isometries(&sampler, &anchors).unwrap().iter().enumerate() {
            let worst = zoo::verify_isometry(&sampler, m, 100, i as u64).unwrap();
            assert!(worst < 1e-9, "{space:?} anchor {:?}: {worst}", anchors[i]);
        }
    }
}

#[test]
fn zoo_dilatation_estimates_are_at_least_one() {
    let mut maps = vec![
        (zoo::radial_power(0.5, 3).unwrap(), 2.0),
        (zoo::radial_power(3.0, 2).unwrap(), 2.0),
        (zoo::zorich(), 1.5),
        (zoo::zorich_extended(), 6.0),
        (zoo::zorich_bloch(), 0.95),
        (zoo::exp_map(), 3.0),
        (zoo::exp_exp_map(), 1.0),
        (zoo::planar_stretch(3.0).unwrap(), 4.0),
        (zoo::mobius_ball_isometry(&ExtPoint::new(&[0.4, 0.2])).unwrap(), 0.95),
        (zoo::ball_to_half_space(3), 0.95),
    ];
    let sq = zoo::planar_polynomial(&[(0.5, 0.0), (0.0, 0.0), (1.0, 0.0)]).unwrap();
    maps.push((zoo::qc_conjugate(&sq, &[1.0, 2.0]).unwrap(), 3.0));
    maps.push((sq, 3.0));
    let mut r = rng::stream(13);
    for (f, reach) in &maps {
        let mut checked = 0;
        for _ in 0..300 {
            let x = ExtPoint::Finite(rng::in_ball(&mut r, f.dim, *reach));
            if !f.domain.contains(&x) {
                continue;
            }
            let s = numeric_jacobian(f, &x, None).unwrap();
            if s.det > 1e-8 {
                assert!(s.k_outer.unwrap() >= 1.0 - 1e-4, "{} at {x:?}", f.name);
                assert!(s.k_inner.unwrap() >= 1.0 - 1e-4, "{} at {x:?}", f.name);
                checked += 1;
            }
        }
        assert!(checked > 100, "{}", f.name);
    }
}

#[test]
fn zorich_measured_dilatation_bounds_samples() {
    let z = zoo::zorich();
    assert!(z.dilatation > 1.0 && z.dilatation < 20.0, "{}", z.dilatation);
    let mut r = rng::stream(14);
    for _ in 0..500 {
        let p = beam_point(&mut r, 3.0);
        let c = p.coords().unwrap();
        if (c[0].abs() - c[1].abs()).abs() < 1e-2 || c[0].hypot(c[1]) < 1e-2 {
            continue;
        }
        let s = numeric_jacobian(&z, &p, None).unwrap();
        let k = s.k_outer.unwrap().max(s.k_inner.unwrap());
        assert!(k <= z.dilatation * (1.0 + 1e-3), "{k} > {}", z.dilatation);
    }
}

#[test]
fn conjugate_iterates_match_conjugated_orbit() {
    let base = zoo::planar_polynomial(&[(-0.3, 0.2), (0.0, 0.0), (1.0, 0.0)]).unwrap();
    let stretch = [1.0, 2.0];
    let g = zoo::qc_conjugate(&base, &stretch).unwrap();
    let mut r = rng::stream(15);
    for _ in 0..200 {
        let x: Coords = rng::in_ball(&mut r, 2, 1.5);
        let pre = ExtPoint::new(&[x[0] / stretch[0], x[1] / stretch[1]]);
        for m in 0..=10 {
            let direct = g.orbit(&ExtPoint::Finite(x.clone()), m).unwrap();
            let via = base.orbit(&pre, m).unwrap();
            match (direct, via) {
                (ExtPoint::Infinity, ExtPoint::Infinity) => {}
                (ExtPoint::Finite(a), ExtPoint::Finite(b)) => {
                    let b = [b[0] * stretch[0], b[1] * stretch[1]];
                    let scale = norm(&b).max(1.0);
                    assert!(dist(&a, &b) <= 1e-6 * scale, "m={m}: {a:?} vs {b:?}");
                }
                (a, b) => panic!("m={m}: {a:?} vs {b:?}"),
            }
        }
    }
}

proptest! {
    #[test]
    fn radial_power_modulus(t in 0.05f64..8.0, x in prop::collection::vec(-50.0f64..50.0, 3)) {
        prop_assume!(norm(&x) > 1e-6);
        let f = zoo::radial_power(t, 3).unwrap();
        let y = f.eval(&ExtPoint::new(&x)).unwrap();
        let expected = norm(&x).powf(t);
        prop_assert!((y.norm() - expected).abs() <= 1e-13 * expected);
        prop_assert!((f.alpha - t.min(1.0 / t)).abs() < 1e-12);
    }

    #[test]
    fn zorich_is_periodic(a in -1.5f64..1.5, b in -1.5f64..1.5, c in -3.0f64..3.0, k in -3i32..3, l in -3i32..3) {
        let z = zoo::zorich_extended();
        let tau = 2.0 * std::f64::consts::PI;
        let p = z.eval(&ExtPoint::new(&[a, b, c])).unwrap();
        let q = z.eval(&ExtPoint::new(&[a + k as f64 * tau, b + l as f64 * tau, c])).unwrap();
        prop_assert!(dist(p.coords().unwrap(), q.coords().unwrap()) < 1e-9 * c.exp().max(1.0));
    }
}
