use std::f64::consts::FRAC_PI_2;

use qrlab::continuity::*;
use qrlab::metrics::{dist_spherical, ConformalMetric};
use qrlab::rng;
use qrlab::zoo::{self, IsometrySampler, IsometrySpace};
use qrlab::ExtPoint;
use rand::Rng;

fn decades(hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| hi * 10f64.powi(-(i as i32))).collect()
}

#[test]
fn exponent_can_be_lowered_for_the_bloch_example() {
    let f = zoo::zorich_bloch();
    let e = ConformalMetric::euclidean(3);
    let ball = SampleBall::new(&[0.0; 3], 0.9);
    let base = holder_constant(&f, &e, &e, &ball, f.alpha, 2000, 7).unwrap();
    assert!(base.l_hat.is_finite() && base.l_hat > 0.0);
    for a in [f.alpha / 2.0, 0.75 * f.alpha] {
        let lower = holder_constant(&f, &e, &e, &ball, a, 2000, 7).unwrap();
        assert!(lower.l_hat.is_finite());
    }
}

#[test]
fn zorich_profile_gives_yosida_evidence() {
    let z = zoo::zorich_extended();
    let s = IsometrySampler::new(IsometrySpace::Euclidean, 3, 8);
    let mut settings = ProfileSettings::new(decades(1.0, 5));
    settings.reach = 40.0;
    settings.anchors = 200;
    let p = continuity_profile(&z, &s, &ConformalMetric::euclidean(3), &ConformalMetric::spherical(3), &settings, 9).unwrap();
    assert_eq!(p.verdict, NormalityVerdict::NormalEvidence, "{:?}", p.omega_hat);
    assert!(p.witnesses.is_empty());
    let seq = zalcman_rescale(&z, z.alpha, &p.witnesses, &ZalcmanSettings::new(1.0), 1).unwrap();
    assert!(seq.yosida_evidence && seq.terms.is_empty());
}

#[test]
fn zorich_is_globally_holder_lipschitz_in_the_sphere() {
    let z = zoo::zorich_extended();
    let alpha = z.alpha;
    let mut r = rng::stream(10);
    let draw = |r: &mut rng::Stream| {
        let x = ExtPoint::new(&[r.random_range(-50.0..50.0), r.random_range(-50.0..50.0), r.random_range(-20.0..20.0)]);
        let s = rng::log_uniform(r, 1e-3, 1e3);
        let u = rng::unit_vector(r, 3);
        let xc = x.coords().unwrap();
        let y = ExtPoint::new(&[xc[0] + s * u[0], xc[1] + s * u[1], xc[2] + s * u[2]]);
        let lhs = dist_spherical(&z.eval(&x).unwrap(), &z.eval(&y).unwrap());
        lhs / s.powf(alpha).max(s)
    };
    let c = (0..5000).map(|_| draw(&mut r)).fold(0.0, f64::max);
    assert!(c.is_finite() && c > 0.0);
    let held_out = (0..5000).map(|_| draw(&mut r)).fold(0.0, f64::max);
    assert!(held_out <= 2.0 * c, "{held_out} vs {c}");
}

#[test]
fn exp_exp_rescaling_sequence() {
    let f = zoo::exp_exp_map();
    let s = IsometrySampler::new(IsometrySpace::Euclidean, 2, 3);
    let anchors: Vec<ExtPoint> = (0..8).map(|k| ExtPoint::new(&[2.0 + 0.5 * k as f64, FRAC_PI_2])).collect();
    let settings = ProfileSettings::new(decades(0.1, 3));
    let p = continuity_profile_at(&f, &s, &ConformalMetric::euclidean(2), &ConformalMetric::spherical(2), &anchors, &settings, 4)
        .unwrap();
    assert_eq!(p.verdict, NormalityVerdict::NotNormalEvidence);
    let mut z = ZalcmanSettings::new(1.0);
    z.grid = 60;
    let seq = zalcman_rescale(&f, f.alpha, &p.witnesses, &z, 5).unwrap();
    assert!(!seq.yosida_evidence);
    assert!(seq.terms.len() >= 3);
    assert!(seq.terms.windows(2).all(|w| w[1].rho < w[0].rho && w[1].rho > 0.0));
    assert!(seq.scale_law_holds(1e-9));
    assert!(seq.holder_bound_holds(), "{:?}", seq.terms.iter().map(|t| t.holder_excess).collect::<Vec<_>>());
    for t in &seq.terms {
        let (w1, w2, s) = t.certificate.clone().expect("nonconstant limit candidate");
        let g1 = t.eval(&f, &w1).unwrap();
        let g2 = t.eval(&f, &w2).unwrap();
        assert!((dist_spherical(&g1, &g2) - s).abs() < 1e-12 && s >= 0.1);
        let g = t.map(&f).unwrap();
        assert_eq!(g.eval(&ExtPoint::new(&w1)).unwrap(), g1);
    }
}

#[test]
fn exponential_profile_is_uniformly_continuous() {
    // e^z has spherical derivative at most 1, so translates are equicontinuous
    let f = zoo::exp_map();
    let s = IsometrySampler::new(IsometrySpace::Euclidean, 2, 6);
    let mut settings = ProfileSettings::new(decades(0.1, 4));
    settings.reach = 20.0;
    settings.anchors = 200;
    let p = continuity_profile(&f, &s, &ConformalMetric::euclidean(2), &ConformalMetric::spherical(2), &settings, 2).unwrap();
    assert!(p.omega_hat[0] <= 0.1 + 1e-9, "{:?}", p.omega_hat);
    assert_eq!(p.verdict, NormalityVerdict::NormalEvidence);
}

#[test]
fn q_estimates_of_exp_exp_decay() {
    let f = zoo::exp_exp_map();
    let e = ConformalMetric::euclidean(2);
    let sph = ConformalMetric::spherical(2);
    let points: Vec<ExtPoint> = (0..7)
        .flat_map(|i| (0..5).map(move |j| ExtPoint::new(&[-3.0 + i as f64, -2.0 + j as f64])))
        .collect();
    let scales = decades(1e-1, 6);
    let (sup, all) = q_estimate_grid(&f, &e, &sph, &points, 0.5, &scales, 16, 3).unwrap();
    assert!(sup > 0.0);
    for q in &all {
        let last = q.per_scale.last().unwrap().1;
        let first = q.per_scale[1].1;
        assert!(last < 0.05 * first.max(1e-300) || last < 1e-3, "{:?}", q.per_scale);
    }
}

#[test]
fn growth_orders() {
    let zr: Vec<f64> = (1..=12).map(|k| 50.0 * k as f64).collect();
    let g = growth_suite(&zoo::zorich_extended(), &GrowthSettings::new(zr), 1).unwrap();
    assert!((g.mu_hat.unwrap() - 2.0).abs() < 0.1);
    let er: Vec<f64> = (1..=12).map(|k| 10.0 * k as f64).collect();
    let g = growth_suite(&zoo::exp_map(), &GrowthSettings::new(er), 1).unwrap();
    assert!((g.mu_hat.unwrap() - 1.0).abs() < 0.05);
    let tr: Vec<f64> = (0..12).map(|k| 10f64.powi(20 + 10 * k)).collect();
    for t in [0.5, 2.0] {
        let g = growth_suite(&zoo::radial_power(t, 3).unwrap(), &GrowthSettings::new(tr.clone()), 1).unwrap();
        assert!(g.mu_hat.unwrap().abs() < 0.05, "t={t}: {:?}", g.mu_hat);
        assert!(g.m_values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn spherical_area_is_monotone_in_the_radius() {
    let mut s = GrowthSettings::new(vec![0.5, 1.0, 2.0, 4.0]);
    s.mc_samples = 5000;
    let g = growth_suite(&zoo::zorich_extended(), &s, 2).unwrap();
    assert!(g.a_values.windows(2).all(|w| w[0] <= w[1]));
    assert!(g.a_values.iter().all(|a| *a >= 0.0) && g.a_stderr.iter().all(|e| *e >= 0.0));
}

#[test]
fn zorich_bloch_growth_bound() {
    let f = zoo::zorich_bloch();
    let stats = bloch_r(&f, &BlochSettings::new(vec![0.0, 0.5, 0.9, 0.99, 0.999, 0.9999], 120), 11).unwrap();
    for row in bloch_growth_check(&f, &[0.9, 0.99, 0.999], &stats, 200, 12).unwrap() {
        assert!(row.pass, "{row:?}");
        // M(r) is attained on the negative axis
        assert!((row.m - (1.0 - row.r).ln().abs()).abs() < 1e-9);
    }
}

#[test]
fn piecewise_linear_orbit_dichotomy() {
    let family: Vec<_> = (2..=1000).map(|m| zoo::piecewise_linear(m as f64).unwrap()).collect();
    let range = ConformalMetric::euclidean_on(2, qrlab::Region::Cube { half_width: 1.0 });
    assert!(matches!(
        orbit_compactness_probe(&family, &ExtPoint::origin(2), &range),
        OrbitVerdict::Bounded { .. }
    ));
    match orbit_compactness_probe(&family, &ExtPoint::new(&[0.5, 0.0]), &range) {
        OrbitVerdict::Unbounded { witness, value } => {
            assert_eq!(witness, family.len() - 1);
            assert!((value - 1000.0).abs() < 1e-6);
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn metric_sphere_radius_of_profiles_is_exact() {
    // the profile draws pairs at exactly the requested separation
    let sph = ConformalMetric::spherical(2);
    for y in qrlab::metrics::metric_sphere_sample(&sph, &ExtPoint::origin(2), 0.25, 20, 1).unwrap() {
        assert!((dist_spherical(&ExtPoint::origin(2), &y) - 0.25).abs() < 1e-12);
    }
}
