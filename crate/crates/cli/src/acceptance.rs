//! The acceptance suite. Each criterion runs on its own, times itself and
//! reports a single pass/fail line; a criterion passes only when its checks
//! hold and it finishes inside its time limit.

use std::f64::consts::LN_2;
use std::time::Instant;

use serde::Serialize;

use qrlab::continuity::{
    bloch_growth_check, bloch_r, continuity_profile, growth_suite, local_holder_exponent, orbit_compactness_probe,
    zalcman_rescale, BlochSettings, GrowthSettings, NormalityVerdict, OrbitVerdict, ProfileSettings, ZalcmanSettings,
};
use qrlab::dynamics::{julia_grid, JuliaClass, JuliaSettings, Window};
use qrlab::isometry::stereo_drop;
use qrlab::metrics::escher::EscherVerdict;
use qrlab::metrics::{dist_hyperbolic, dist_spherical, escher_ratio, escher_ratio_profile, EscherRay, RayEnd};
use qrlab::point::dist;
use qrlab::rng;
use qrlab::zoo::{self, IsometrySampler, IsometrySpace};
use qrlab::{ConformalMetric, ExtPoint, Region, Result};

use crate::output::pgm_bytes;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:02} {} ({:.2} s, limit {} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit,
            self.detail
        )
    }
}

fn timed(id: usize, name: &'static str, limit: f64, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds >= limit {
        detail.push_str(&format!("; over the time limit ({seconds:.1} s)"));
    }
    CriterionResult {
        id,
        name,
        pass: ok && seconds < limit,
        detail,
        seconds,
        limit,
    }
}

pub type Criterion = fn(u64) -> CriterionResult;

pub const CRITERIA: [(usize, Criterion); 13] = [
    (1, hyperbolic_closed_form),
    (2, bloch_example_distances),
    (3, spherical_sandwich),
    (4, holder_sharpness),
    (5, escher_ratios),
    (6, bloch_growth_bound),
    (7, little_bloch_witness),
    (8, growth_orders),
    (9, julia_detection),
    (10, zalcman_machinery),
    (11, isometry_invariance),
    (12, spherical_average),
    (13, orbit_dichotomy),
];

/// Runs the selected criteria (all when `only` is `None`) in order.
pub fn run_suite(only: Option<&[usize]>, seed: u64) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|(id, _)| only.is_none_or(|o| o.contains(id)))
        .map(|(_, c)| c(seed))
        .collect()
}

pub fn hyperbolic_closed_form(_seed: u64) -> CriterionResult {
    timed(1, "hyperbolic closed form", 1.0, || {
        let mut worst: f64 = 0.0;
        for n in [2, 3] {
            for r in [0.1, 0.5, 0.9, 0.999] {
                let d = dist_hyperbolic(&ExtPoint::origin(n), &ExtPoint::axis(n, 0, r))?;
                worst = worst.max((d - ((1.0 + r) / (1.0 - r)).ln()).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max error {worst:.2e}")))
    })
}

pub fn bloch_example_distances(_seed: u64) -> CriterionResult {
    timed(2, "bloch example distances", 1.0, || {
        let f = zoo::zorich_bloch();
        let (mut rho_err, mut img_err): (f64, f64) = (0.0, 0.0);
        for r in [0.5, 0.9, 0.99] {
            let x = ExtPoint::new(&[0.0, 0.0, -r]);
            let y = ExtPoint::new(&[0.0, 0.0, -(3.0 * r + 1.0) / (r + 3.0)]);
            rho_err = rho_err.max((dist_hyperbolic(&x, &y)? - LN_2).abs());
            let (fx, fy) = (f.eval(&x)?, f.eval(&y)?);
            let d = dist(fx.coords().unwrap_or(&[]), fy.coords().unwrap_or(&[]));
            img_err = img_err.max((d - ((r + 3.0) / 2.0).ln()).abs());
        }
        Ok((
            rho_err <= 1e-9 && img_err <= 1e-6,
            format!("rho error {rho_err:.2e}, image error {img_err:.2e}"),
        ))
    })
}

pub fn spherical_sandwich(seed: u64) -> CriterionResult {
    timed(3, "spherical sandwich", 1.0, || {
        let mut r = rng::stream(seed.wrapping_add(3));
        let mut slack = f64::INFINITY;
        for i in 0..10_000 {
            // every fourth pair has a point on the boundary sphere
            let u = if i % 4 == 0 {
                rng::unit_vector(&mut r, 3)
            } else {
                rng::in_ball(&mut r, 3, 1.0)
            };
            let v = rng::in_ball(&mut r, 3, 1.0);
            let e = dist(&u, &v);
            let s = dist_spherical(&ExtPoint::from_coords(u), &ExtPoint::from_coords(v));
            slack = slack.min(s - e).min(2.0 * e - s);
        }
        Ok((slack >= -1e-12, format!("minimum slack {slack:.3e} over 10000 pairs")))
    })
}

pub fn holder_sharpness(seed: u64) -> CriterionResult {
    timed(4, "holder sharpness", 5.0, || {
        let e = ConformalMetric::euclidean(3);
        let scales: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
        let mut ok = true;
        let mut parts = Vec::new();
        for t in [0.3, 0.5, 0.8] {
            let f = zoo::radial_power(t, 3)?;
            let fit = local_holder_exponent(&f, &e, &e, &ExtPoint::origin(3), &scales, 32, seed.wrapping_add(4))?;
            let got = fit.exponent_hat.unwrap_or(f64::NAN);
            let alpha = t.powf(-2.0).powf(-0.5);
            ok &= (got - t).abs() <= 0.02 && (f.alpha - alpha).abs() <= 1e-12;
            parts.push(format!("t={t}: {got:.4} (alpha {:.4})", f.alpha));
        }
        Ok((ok, parts.join(", ")))
    })
}

pub fn escher_ratios(_seed: u64) -> CriterionResult {
    timed(5, "escher ratios", 1.0, || {
        let hyp = ConformalMetric::hyperbolic(3);
        let sph = ConformalMetric::spherical(3);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for k in 2..=6 {
            let eps = 10f64.powi(-k);
            let q = escher_ratio(&hyp, &sph, &ExtPoint::new(&[1.0 - eps, 0.0, 0.0]))?;
            ok &= q <= 2.0 * eps;
            worst = worst.max(q / eps);
        }
        let e = ConformalMetric::euclidean(3);
        let ray = EscherRay {
            center: vec![0.0; 3],
            end: RayEnd::Infinity {
                direction: vec![1.0, 0.0, 0.0],
            },
            decades: 6.0,
        };
        let flat = escher_ratio_profile(&e, &e, &ray, 12)?;
        ok &= flat.verdict == EscherVerdict::Failure;
        Ok((
            ok,
            format!("max ratio/10^-k {worst:.4}, euclidean pair verdict {:?}", flat.verdict),
        ))
    })
}

const BLOCH_LEVELS: [f64; 6] = [0.0, 0.5, 0.9, 0.99, 0.999, 0.9999];

pub fn bloch_growth_bound(seed: u64) -> CriterionResult {
    timed(6, "bloch growth bound", 60.0, || {
        let f = zoo::zorich_bloch();
        let stats = bloch_r(&f, &BlochSettings::new(BLOCH_LEVELS.to_vec(), 1000), seed.wrapping_add(6))?;
        let rows = bloch_growth_check(&f, &[0.9, 0.99, 0.999], &stats, 200, seed.wrapping_add(60))?;
        let ok = rows.iter().all(|r| r.pass);
        let detail = rows
            .iter()
            .map(|r| format!("r={}: M={:.4} vs {:.4}", r.r, r.m, 1.05 * r.bound))
            .collect::<Vec<_>>()
            .join(", ");
        Ok((ok, format!("R_hat {:.4} from {} centers; {detail}", stats.r_hat, stats.centers_used)))
    })
}

pub fn little_bloch_witness(seed: u64) -> CriterionResult {
    timed(7, "little bloch witness", 30.0, || {
        let f = zoo::zorich_bloch();
        let levels = vec![0.99, 0.995, 0.999, 0.9995, 0.9999];
        let stats = bloch_r(&f, &BlochSettings::new(levels, 50), seed.wrapping_add(7))?;
        let min = stats.axis_min(0.99, 0.9999).unwrap_or(f64::NAN);
        Ok((min >= 0.9 * LN_2, format!("axis minimum {min:.6} against {:.6}", 0.9 * LN_2)))
    })
}

pub fn growth_orders(seed: u64) -> CriterionResult {
    timed(8, "growth orders", 60.0, || {
        let mu = |f: &zoo::MapDescriptor, radii: Vec<f64>| -> Result<f64> {
            Ok(growth_suite(f, &GrowthSettings::new(radii), seed.wrapping_add(8))?
                .mu_hat
                .unwrap_or(f64::NAN))
        };
        let z = mu(&zoo::zorich_extended(), (1..=12).map(|k| 50.0 * k as f64).collect())?;
        let e = mu(&zoo::exp_map(), (1..=12).map(|k| 10.0 * k as f64).collect())?;
        let mut ok = (z - 2.0).abs() <= 0.1 && (e - 1.0).abs() <= 0.05;
        let mut parts = vec![format!("zorich {z:.4}"), format!("exp {e:.4}")];
        for t in [0.3, 0.5, 0.8] {
            let m = mu(&zoo::radial_power(t, 3)?, (0..12).map(|k| 10f64.powi(20 + 10 * k)).collect())?;
            ok &= m.abs() <= 0.05;
            parts.push(format!("f_{t} {m:.4}"));
        }
        Ok((ok, parts.join(", ")))
    })
}

pub fn julia_detection(seed: u64) -> CriterionResult {
    timed(9, "julia detection", 120.0, || {
        let f = zoo::planar_polynomial(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])?;
        let window = Window::planar((-1.5, 1.5), (-1.5, 1.5));
        let settings = JuliaSettings::new(f.alpha);
        let s = seed.wrapping_add(9);
        let grid = julia_grid(&f, &window, 256, 256, &settings, s)?;
        let (mut far, mut far_fatou, mut near, mut near_julia) = (0usize, 0usize, 0usize, 0usize);
        for i in 0..grid.indicators.len() {
            let off = (grid.pixel_center(i).norm() - 1.0).abs();
            let julia = grid.classification(i) == JuliaClass::JuliaEvidence;
            if off > 0.05 {
                far += 1;
                far_fatou += usize::from(!julia);
            } else if off <= 0.02 {
                near += 1;
                near_julia += usize::from(julia);
            }
        }
        let rerun = julia_grid(&f, &window, 256, 256, &settings, s)?;
        let identical = pgm_bytes(&grid) == pgm_bytes(&rerun);
        let fatou_rate = far_fatou as f64 / far as f64;
        let julia_rate = near_julia as f64 / near as f64;
        Ok((
            fatou_rate >= 0.99 && julia_rate >= 0.90 && identical,
            format!(
                "fatou away from the circle {far_fatou}/{far} ({:.2}%), julia near the circle {near_julia}/{near} ({:.2}%), rerun identical: {identical}",
                100.0 * fatou_rate,
                100.0 * julia_rate
            ),
        ))
    })
}

fn decades(hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| hi * 10f64.powi(-(i as i32))).collect()
}

pub fn zalcman_machinery(seed: u64) -> CriterionResult {
    timed(10, "zalcman machinery", 60.0, || {
        // exponential: the profile feeds its witnesses to the rescaling search
        let f = zoo::exp_map();
        let sampler = IsometrySampler::new(IsometrySpace::Euclidean, 2, seed.wrapping_add(10));
        let mut ps = ProfileSettings::new(decades(0.1, 4));
        ps.reach = 20.0;
        ps.anchors = 200;
        let (e2, s2) = (ConformalMetric::euclidean(2), ConformalMetric::spherical(2));
        let p = continuity_profile(&f, &sampler, &e2, &s2, &ps, seed.wrapping_add(11))?;
        let seq = zalcman_rescale(&f, f.alpha, &p.witnesses, &ZalcmanSettings::new(1.0), seed.wrapping_add(12))?;
        let exp_ok = !seq.terms.is_empty()
            && seq.scale_law_holds(1e-9)
            && seq.terms.iter().any(|t| t.is_nonconstant());
        let exp_detail = format!(
            "exp: profile {}, {} witnesses, {} terms, certificate {}",
            match p.verdict {
                NormalityVerdict::NormalEvidence => "normal-evidence",
                NormalityVerdict::NotNormalEvidence => "not-normal-evidence",
            },
            p.witnesses.len(),
            seq.terms.len(),
            seq.terms.iter().any(|t| t.is_nonconstant())
        );

        let z = zoo::zorich_extended();
        let sampler = IsometrySampler::new(IsometrySpace::Euclidean, 3, seed.wrapping_add(13));
        let mut ps = ProfileSettings::new(decades(1.0, 5));
        ps.reach = 40.0;
        ps.anchors = 200;
        let (e3, s3) = (ConformalMetric::euclidean(3), ConformalMetric::spherical(3));
        let p = continuity_profile(&z, &sampler, &e3, &s3, &ps, seed.wrapping_add(14))?;
        let seq = zalcman_rescale(&z, z.alpha, &p.witnesses, &ZalcmanSettings::new(1.0), seed.wrapping_add(15))?;
        let zorich_ok = seq.yosida_evidence && seq.terms.is_empty();
        Ok((
            exp_ok && zorich_ok,
            format!(
                "{exp_detail}; zorich: yosida-evidence {}, {} terms",
                seq.yosida_evidence,
                seq.terms.len()
            ),
        ))
    })
}

pub fn isometry_invariance(seed: u64) -> CriterionResult {
    timed(11, "isometry invariance", 5.0, || {
        let n = 3;
        let mut r = rng::stream(seed.wrapping_add(11));
        let (mut rho_err, mut sigma_err): (f64, f64) = (0.0, 0.0);
        for _ in 0..1000 {
            let a = ExtPoint::from_coords(rng::in_ball(&mut r, n, 0.9));
            let phi = zoo::mobius_ball_isometry(&a)?;
            let x = ExtPoint::from_coords(rng::in_ball(&mut r, n, 0.9));
            let y = ExtPoint::from_coords(rng::in_ball(&mut r, n, 0.9));
            let moved = dist_hyperbolic(&phi.eval(&x)?, &phi.eval(&y)?)?;
            rho_err = rho_err.max((moved - dist_hyperbolic(&x, &y)?).abs());

            let b = stereo_drop(&rng::unit_vector(&mut r, n + 1));
            let rot = zoo::spherical_isometry_from_zero(&b, n);
            let u = stereo_drop(&rng::unit_vector(&mut r, n + 1));
            let v = stereo_drop(&rng::unit_vector(&mut r, n + 1));
            let moved = dist_spherical(&rot.eval(&u)?, &rot.eval(&v)?);
            sigma_err = sigma_err.max((moved - dist_spherical(&u, &v)).abs());
        }
        Ok((
            rho_err <= 1e-9 && sigma_err <= 1e-9,
            format!("rho error {rho_err:.2e}, sigma error {sigma_err:.2e} over 1000 triples"),
        ))
    })
}

pub fn spherical_average(seed: u64) -> CriterionResult {
    timed(12, "spherical average", 30.0, || {
        let mut s = GrowthSettings::new(vec![1.0]);
        s.mc_samples = 1_000_000;
        let g = growth_suite(&zoo::identity(3), &s, seed.wrapping_add(12))?;
        let (a, e) = (g.a_values[0], g.a_stderr[0]);
        Ok(((a - 0.5).abs() <= 3.0 * e, format!("A(0,1) = {a:.6} ± {e:.2e}")))
    })
}

pub fn orbit_dichotomy(_seed: u64) -> CriterionResult {
    timed(13, "orbit dichotomy", 1.0, || {
        let family = (2..=1000)
            .map(|m| zoo::piecewise_linear(m as f64))
            .collect::<Result<Vec<_>>>()?;
        let range = ConformalMetric::euclidean_on(2, Region::Cube { half_width: 1.0 });
        let at_zero = orbit_compactness_probe(&family, &ExtPoint::origin(2), &range);
        let at_half = orbit_compactness_probe(&family, &ExtPoint::new(&[0.5, 0.0]), &range);
        let ok = matches!(at_zero, OrbitVerdict::Bounded { .. }) && matches!(at_half, OrbitVerdict::Unbounded { .. });
        Ok((ok, format!("(0,0): {at_zero:?}; (1/2,0): {at_half:?}")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_keeps_order() {
        let r = run_suite(Some(&[13, 1]), 0);
        assert_eq!(r.iter().map(|c| c.id).collect::<Vec<_>>(), vec![1, 13]);
        assert!(r.iter().all(|c| c.pass), "{r:?}");
    }

    #[test]
    fn time_limit_fails_a_passing_check() {
        let r = timed(99, "slow", 0.0, || Ok((true, String::new())));
        assert!(!r.pass);
        assert!(r.line().starts_with("[FAIL] 99 slow"));
    }

    #[test]
    fn errors_fail_the_criterion() {
        let r = timed(98, "broken", 10.0, || Err(qrlab::QrError::Numeric("nan".into())));
        assert!(!r.pass && r.detail.contains("nan"));
    }
}
