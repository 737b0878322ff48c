use rand::Rng;

use super::{diameter_scale, eval_at};
use crate::error::{QrError, Result};
use crate::metrics::{metric_sphere_sample, ConformalMetric, MetricKind};
use crate::point::{sub, ExtPoint};
use crate::rng;
use crate::zoo::{IsometrySampler, MapDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalityVerdict {
    NormalEvidence,
    NotNormalEvidence,
}

/// A sampled pair that keeps the oscillation above the threshold at the
/// smallest separation.
#[derive(Debug, Clone)]
pub struct ProfileWitness {
    /// The isometry anchor `a`, with `A(0) = a` (or `A(x) = x + a`).
    pub anchor: ExtPoint,
    /// The pair `(A(0), A(y))` in the domain.
    pub x: ExtPoint,
    pub y: ExtPoint,
    pub delta: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuityProfile {
    /// Decreasing separations.
    pub deltas: Vec<f64>,
    /// Sampled modulus of continuity, one entry per delta.
    pub omega_hat: Vec<f64>,
    /// Pairs sampled at each delta.
    pub pairs_per_delta: usize,
    pub verdict: NormalityVerdict,
    pub threshold: f64,
    /// Largest offending pairs at the smallest delta, strongest first.
    pub witnesses: Vec<ProfileWitness>,
}

#[derive(Debug, Clone)]
pub struct ProfileSettings {
    /// Separations, strictly decreasing.
    pub deltas: Vec<f64>,
    /// Number of random isometries drawn from the sampler.
    pub anchors: usize,
    /// Spread of the random anchors (see [`IsometrySampler::random_anchors`]).
    pub reach: f64,
    /// Sample directions per anchor and separation.
    pub directions: usize,
    /// Threshold as a fraction of the range's diameter scale.
    pub threshold_fraction: f64,
    /// Base point `x₀` for recentring maps into `R^n`.
    pub base_point: Option<ExtPoint>,
    /// Cap on the number of witnesses reported.
    pub max_witnesses: usize,
}

impl ProfileSettings {
    pub fn new(deltas: Vec<f64>) -> Self {
        ProfileSettings {
            deltas,
            anchors: 64,
            reach: 4.0,
            directions: 16,
            threshold_fraction: 1e-2,
            base_point: None,
            max_witnesses: 16,
        }
    }
}

/// Sampled uniform-continuity profile of the family `{f∘A}` over random
/// isometries of `sampler`.
pub fn continuity_profile(
    f: &MapDescriptor,
    sampler: &IsometrySampler,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    settings: &ProfileSettings,
    seed: u64,
) -> Result<ContinuityProfile> {
    let anchors = sampler.random_anchors(settings.anchors, settings.reach);
    continuity_profile_at(f, sampler, metric_in, metric_out, &anchors, settings, seed)
}

/// As [`continuity_profile`] over the given isometry anchors.
///
/// The isometries act transitively, so every pair at distance `δ` is the
/// image of a pair `(0, y)` with `d(0, y) = δ`; only such pairs are drawn.
/// For a range in `R^n` the family is recentred at `x₀`, which leaves
/// differences unchanged but is kept so the sampled maps are the ones
/// the normality statement is about.
pub fn continuity_profile_at(
    f: &MapDescriptor,
    sampler: &IsometrySampler,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    anchors: &[ExtPoint],
    settings: &ProfileSettings,
    seed: u64,
) -> Result<ContinuityProfile> {
    let deltas = &settings.deltas;
    if deltas.is_empty() {
        return Err(QrError::Parameter("delta list is empty".into()));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(QrError::Parameter("deltas must be positive and strictly decreasing".into()));
    }
    if anchors.is_empty() || settings.directions == 0 {
        return Err(QrError::Parameter("need at least one anchor and one direction".into()));
    }
    let n = sampler.dim;
    let origin = ExtPoint::origin(n);
    let base = settings.base_point.clone().unwrap_or_else(|| origin.clone());
    let recentre = metric_out.kind != MetricKind::Spherical;
    let threshold = settings.threshold_fraction * diameter_scale(metric_out);

    let mut raw = vec![0.0f64; deltas.len()];
    let mut finest: Vec<ProfileWitness> = Vec::new();
    for (j, a) in anchors.iter().enumerate() {
        let iso = sampler.isometry(a)?;
        let shift = if recentre {
            match eval_at(f, &iso.eval(&base)?)? {
                ExtPoint::Finite(c) => Some(c),
                ExtPoint::Infinity => {
                    return Err(QrError::Numeric(format!("{} has a pole at the recentring point", f.name)))
                }
            }
        } else {
            None
        };
        let g = |x: &ExtPoint| -> Result<(ExtPoint, ExtPoint)> {
            let ax = iso.eval(x)?;
            let v = eval_at(f, &ax)?;
            let v = match (&shift, v) {
                (Some(s), ExtPoint::Finite(c)) => ExtPoint::Finite(sub(&c, s)),
                (_, v) => v,
            };
            Ok((ax, v))
        };
        let (ax0, g0) = g(&origin)?;
        let mut stream = rng::task_stream(seed, j as u64);
        for (i, &delta) in deltas.iter().enumerate() {
            let ys = metric_sphere_sample(metric_in, &origin, delta, settings.directions, stream.random())?;
            for y in &ys {
                let (ay, gy) = g(y)?;
                let v = metric_out.distance(&g0, &gy)?;
                raw[i] = raw[i].max(v);
                if i + 1 == deltas.len() && v >= threshold {
                    finest.push(ProfileWitness {
                        anchor: a.clone(),
                        x: ax0.clone(),
                        y: ay,
                        delta,
                        value: v,
                    });
                }
            }
        }
    }
    // sup over nested pair sets: every pair at a smaller separation also
    // counts for the larger ones
    let mut omega_hat = raw.clone();
    for i in (0..omega_hat.len().saturating_sub(1)).rev() {
        omega_hat[i] = omega_hat[i].max(omega_hat[i + 1]);
    }
    finest.sort_by(|p, q| q.value.total_cmp(&p.value));
    let mut witnesses: Vec<ProfileWitness> = Vec::new();
    for w in finest {
        if witnesses.len() >= settings.max_witnesses {
            break;
        }
        if !witnesses.iter().any(|v| v.anchor == w.anchor) {
            witnesses.push(w);
        }
    }
    let verdict = if *omega_hat.last().unwrap() < threshold {
        NormalityVerdict::NormalEvidence
    } else {
        NormalityVerdict::NotNormalEvidence
    };
    Ok(ContinuityProfile {
        deltas: deltas.clone(),
        omega_hat,
        pairs_per_delta: anchors.len() * settings.directions,
        verdict,
        threshold,
        witnesses,
    })
}

#[derive(Debug, Clone)]
pub struct QEstimate {
    pub point: ExtPoint,
    /// Maximum of `per_scale` ratios.
    pub value: f64,
    /// `(scale, max d_Y(f(x), f(y)) / scale^α)` over the metric sphere.
    pub per_scale: Vec<(f64, f64)>,
}

/// Sampled `Q_f(x)` estimate: the largest oscillation ratio over the given
/// scales.
#[allow(clippy::too_many_arguments)]
pub fn q_estimate(
    f: &MapDescriptor,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    x: &ExtPoint,
    alpha: f64,
    scales: &[f64],
    samples: usize,
    seed: u64,
) -> Result<QEstimate> {
    if scales.is_empty() {
        return Err(QrError::Parameter("scale list is empty".into()));
    }
    let fx = eval_at(f, x)?;
    let mut per_scale = Vec::with_capacity(scales.len());
    for (i, &s) in scales.iter().enumerate() {
        let ys = metric_sphere_sample(metric_in, x, s, samples, seed.wrapping_add(i as u64))?;
        let mut osc: f64 = 0.0;
        for y in &ys {
            osc = osc.max(metric_out.distance(&fx, &eval_at(f, y)?)?);
        }
        per_scale.push((s, osc / s.powf(alpha)));
    }
    let value = per_scale.iter().fold(0.0f64, |m, (_, r)| m.max(*r));
    Ok(QEstimate {
        point: x.clone(),
        value,
        per_scale,
    })
}

/// `Q̂_f`: the supremum of [`q_estimate`] over a grid of points, together
/// with the individual estimates.
#[allow(clippy::too_many_arguments)]
pub fn q_estimate_grid(
    f: &MapDescriptor,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    points: &[ExtPoint],
    alpha: f64,
    scales: &[f64],
    samples: usize,
    seed: u64,
) -> Result<(f64, Vec<QEstimate>)> {
    let mut all = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        all.push(q_estimate(
            f,
            metric_in,
            metric_out,
            p,
            alpha,
            scales,
            samples,
            rng::task_stream(seed, i as u64).random(),
        )?);
    }
    let sup = all.iter().fold(0.0f64, |m, q| m.max(q.value));
    Ok((sup, all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{self, IsometrySpace};

    fn decades(hi: f64, count: usize) -> Vec<f64> {
        (0..count).map(|i| hi * 10f64.powi(-(i as i32))).collect()
    }

    #[test]
    fn empty_deltas_rejected() {
        let s = IsometrySampler::new(IsometrySpace::Euclidean, 2, 0);
        let e = ConformalMetric::euclidean(2);
        let r = continuity_profile(&zoo::exp_map(), &s, &e, &ConformalMetric::spherical(2), &ProfileSettings::new(vec![]), 0);
        assert!(matches!(r, Err(QrError::Parameter(_))));
    }

    #[test]
    fn profile_is_monotone_and_detects_exp_exp() {
        let s = IsometrySampler::new(IsometrySpace::Euclidean, 2, 5);
        let e = ConformalMetric::euclidean(2);
        let sph = ConformalMetric::spherical(2);
        // on the line Im z = π/2 the inner exponential is nearly unimodular
        let anchors: Vec<ExtPoint> = (0..20).map(|k| ExtPoint::new(&[3.0 + 0.1 * k as f64, std::f64::consts::FRAC_PI_2])).collect();
        let settings = ProfileSettings::new(decades(0.1, 3));
        let p = continuity_profile_at(&zoo::exp_exp_map(), &s, &e, &sph, &anchors, &settings, 1).unwrap();
        assert!(p.omega_hat[0] > 1.0, "{:?}", p.omega_hat);
        assert!(p.omega_hat.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(p.verdict, NormalityVerdict::NotNormalEvidence);
        assert!(!p.witnesses.is_empty());
    }

    #[test]
    fn bounded_ball_map_is_normal() {
        let s = IsometrySampler::new(IsometrySpace::Hyperbolic, 3, 2);
        let h = ConformalMetric::hyperbolic(3);
        let e = ConformalMetric::euclidean(3);
        let f = zoo::mobius_ball_isometry(&ExtPoint::new(&[0.2, 0.0, 0.1])).unwrap();
        let mut settings = ProfileSettings::new(decades(1.0, 5));
        settings.reach = 8.0;
        let p = continuity_profile(&f, &s, &h, &e, &settings, 3).unwrap();
        assert_eq!(p.verdict, NormalityVerdict::NormalEvidence);
        assert!(p.omega_hat.last().unwrap() < &1e-3);
        settings.base_point = Some(ExtPoint::new(&[0.3, 0.0, 0.0]));
        let q = continuity_profile(&f, &s, &h, &e, &settings, 3).unwrap();
        assert_eq!(p.verdict, q.verdict);
    }

    #[test]
    fn q_estimates() {
        let e = ConformalMetric::euclidean(2);
        let x = ExtPoint::new(&[0.4, -0.2]);
        let scales = decades(0.1, 4);
        let q = q_estimate(&zoo::constant(x.clone(), 2), &e, &e, &x, 0.5, &scales, 8, 0).unwrap();
        assert_eq!(q.value, 0.0);
        let q = q_estimate(&zoo::identity(2), &e, &e, &x, 1.0, &scales, 8, 0).unwrap();
        assert!((q.value - 1.0).abs() < 1e-3);
    }
}
