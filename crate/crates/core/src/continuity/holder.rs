use rand::Rng;

use super::{eval_at, fit_line};
use crate::error::{QrError, Result};
use crate::metrics::{metric_sphere_sample, ConformalMetric};
use crate::point::{axpy, dist, Coords, ExtPoint};
use crate::rng;
use crate::zoo::MapDescriptor;

/// A closed Euclidean ball in the chart, used as a compact sampling region.
#[derive(Debug, Clone)]
pub struct SampleBall {
    pub center: Coords,
    pub radius: f64,
}

impl SampleBall {
    pub fn new(center: &[f64], radius: f64) -> Self {
        SampleBall {
            center: Coords::from_slice(center),
            radius,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(x, &self.center) <= self.radius
    }
}

/// Result of a Hölder-type estimate.
#[derive(Debug, Clone)]
pub struct HolderFit {
    pub alpha_used: f64,
    /// `sup d_Y(f(x), f(y)) / d_X(x, y)^α` over the sampled pairs.
    pub l_hat: f64,
    /// Pair attaining `l_hat`.
    pub argmax: Option<(ExtPoint, ExtPoint)>,
    /// Regression slope of log-oscillation against log-scale.
    pub exponent_hat: Option<f64>,
    pub residual: Option<f64>,
    /// `(scale, oscillation)` rows behind `exponent_hat`.
    pub scale_table: Vec<(f64, f64)>,
    /// Set when `f` is constant near the probed point.
    pub degenerate: bool,
    pub pair_count: usize,
    pub seed: u64,
}

impl HolderFit {
    fn constant_fit(alpha: f64, seed: u64) -> Self {
        HolderFit {
            alpha_used: alpha,
            l_hat: 0.0,
            argmax: None,
            exponent_hat: None,
            residual: None,
            scale_table: Vec::new(),
            degenerate: false,
            pair_count: 0,
            seed,
        }
    }
}

/// Ratio of separations covered by the log-uniform pair sampler.
const SEPARATION_DECADES: f64 = 5.0;

fn check_region(f: &MapDescriptor, metric_in: &ConformalMetric, region: &SampleBall) -> Result<()> {
    if region.center.len() != f.dim || !(region.radius > 0.0) {
        return Err(QrError::Parameter("sampling ball must match the map dimension and have positive radius".into()));
    }
    for r in [&f.domain, &metric_in.region] {
        if let Some(d) = r.boundary_distance(&region.center) {
            if !(d > region.radius) {
                return Err(QrError::Domain(format!(
                    "sampling ball {:?} radius {} touches the boundary of {r:?}",
                    region.center, region.radius
                )));
            }
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(QrError::Parameter(format!("exponent {alpha} must lie in (0, 1]")));
    }
    Ok(())
}

/// Estimates the Hölder constant of `f` with exponent `alpha` on a closed
/// ball, from pairs with log-uniform separations over five decades. Each
/// pair is drawn from one sequential stream, so a larger `pairs` only adds
/// pairs and never lowers the estimate.
pub fn holder_constant(
    f: &MapDescriptor,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    region: &SampleBall,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderFit> {
    holder_sup(f, metric_in, metric_out, region, None, alpha, pairs, seed)
}

/// As [`holder_constant`] with every pair passing through `x0`.
#[allow(clippy::too_many_arguments)]
pub fn holder_constant_through(
    f: &MapDescriptor,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    region: &SampleBall,
    x0: &ExtPoint,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderFit> {
    holder_sup(f, metric_in, metric_out, region, Some(x0), alpha, pairs, seed)
}

#[allow(clippy::too_many_arguments)]
fn holder_sup(
    f: &MapDescriptor,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    region: &SampleBall,
    through: Option<&ExtPoint>,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderFit> {
    check_alpha(alpha)?;
    check_region(f, metric_in, region)?;
    let fixed = match through {
        Some(p) => match p.coords() {
            Some(c) if region.contains(c) => Some((Coords::from_slice(c), eval_at(f, p)?)),
            _ => return Err(QrError::Domain(format!("{p:?} is not in the sampling ball"))),
        },
        None => None,
    };
    let n = f.dim;
    let mut rng = rng::stream(seed);
    let hi = 2.0 * region.radius;
    let lo = hi * 10f64.powf(-SEPARATION_DECADES);
    let mut fit = HolderFit::constant_fit(alpha, seed);
    for _ in 0..pairs {
        let (x, y) = loop {
            let x = match &fixed {
                Some((c, _)) => c.clone(),
                None => axpy(&region.center, 1.0, &rng::in_ball(&mut rng, n, region.radius)),
            };
            let s = rng::log_uniform(&mut rng, lo, hi);
            let u = rng::unit_vector(&mut rng, n);
            let y = axpy(&x, s, &u);
            if region.contains(&y) && y != x {
                break (x, y);
            }
        };
        let (xp, yp) = (ExtPoint::Finite(x), ExtPoint::Finite(y));
        let fx = match &fixed {
            Some((_, v)) => v.clone(),
            None => eval_at(f, &xp)?,
        };
        let fy = eval_at(f, &yp)?;
        let din = metric_in.distance(&xp, &yp)?;
        if din == 0.0 {
            continue;
        }
        let ratio = metric_out.distance(&fx, &fy)? / din.powf(alpha);
        fit.pair_count += 1;
        if ratio > fit.l_hat || fit.argmax.is_none() {
            fit.l_hat = fit.l_hat.max(ratio);
            fit.argmax = Some((xp, yp));
        }
    }
    Ok(fit)
}

/// Local Hölder exponent at `x0`: the regression slope of the log of the
/// sampled oscillation `max d_Y(f(y), f(x0))` over the metric sphere of each
/// radius against the log of the radius.
pub fn local_holder_exponent(
    f: &MapDescriptor,
    metric_in: &ConformalMetric,
    metric_out: &ConformalMetric,
    x0: &ExtPoint,
    scales: &[f64],
    samples: usize,
    seed: u64,
) -> Result<HolderFit> {
    if scales.len() < 2 {
        return Err(QrError::Parameter("need at least two scales".into()));
    }
    if scales.windows(2).any(|w| !(w[1] < w[0])) || scales.iter().any(|s| !(*s >= 1e-8)) {
        return Err(QrError::Parameter("scales must decrease and stay at or above 1e-8".into()));
    }
    if !f.domain.contains(x0) {
        return Err(QrError::Domain(format!("{x0:?} is not interior to {:?}", f.domain)));
    }
    let fx = eval_at(f, x0)?;
    let mut fit = HolderFit::constant_fit(1.0, seed);
    for (i, &s) in scales.iter().enumerate() {
        let ys = metric_sphere_sample(metric_in, x0, s, samples, rng::task_stream(seed, i as u64).random())?;
        let mut osc: f64 = 0.0;
        for y in &ys {
            osc = osc.max(metric_out.distance(&eval_at(f, y)?, &fx)?);
        }
        fit.scale_table.push((s, osc));
        fit.pair_count += ys.len();
    }
    if fit.scale_table.iter().any(|&(_, o)| !(o > 0.0)) {
        fit.degenerate = true;
        return Ok(fit);
    }
    let xs: Vec<f64> = fit.scale_table.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = fit.scale_table.iter().map(|(_, o)| o.ln()).collect();
    let (slope, _, rms) = fit_line(&xs, &ys).expect("scales are distinct");
    fit.exponent_hat = Some(slope);
    fit.residual = Some(rms);
    fit.alpha_used = slope.clamp(f64::MIN_POSITIVE, 1.0);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn geometric(hi: f64, lo: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| hi * (lo / hi).powf(i as f64 / (count - 1) as f64))
            .collect()
    }

    #[test]
    fn identity_is_one_lipschitz() {
        let e = ConformalMetric::euclidean(3);
        let fit = holder_constant(&zoo::identity(3), &e, &e, &SampleBall::new(&[0.0; 3], 2.0), 1.0, 500, 1).unwrap();
        assert!((fit.l_hat - 1.0).abs() < 1e-9);
        assert_eq!(fit.pair_count, 500);
    }

    #[test]
    fn radial_power_through_origin() {
        let e = ConformalMetric::euclidean(3);
        for t in [0.2, 0.5, 0.9] {
            let f = zoo::radial_power(t, 3).unwrap();
            let fit = holder_constant_through(
                &f,
                &e,
                &e,
                &SampleBall::new(&[0.0; 3], 1.0),
                &ExtPoint::origin(3),
                t,
                400,
                2,
            )
            .unwrap();
            assert!((fit.l_hat - 1.0).abs() < 1e-3, "t={t}: {}", fit.l_hat);
        }
    }

    #[test]
    fn more_pairs_never_lower_the_estimate() {
        let e = ConformalMetric::euclidean(3);
        let f = zoo::zorich_bloch();
        let ball = SampleBall::new(&[0.0; 3], 0.5);
        let mut last = 0.0;
        for pairs in [10, 100, 1000] {
            let fit = holder_constant(&f, &e, &e, &ball, f.alpha, pairs, 3).unwrap();
            assert!(fit.l_hat >= last && fit.l_hat.is_finite());
            last = fit.l_hat;
        }
    }

    #[test]
    fn region_touching_the_boundary_is_rejected() {
        let e = ConformalMetric::euclidean(3);
        let f = zoo::zorich_bloch();
        let r = holder_constant(&f, &e, &e, &SampleBall::new(&[0.0; 3], 1.0), 0.3, 10, 0);
        assert!(matches!(r, Err(QrError::Domain(_))));
        let r = holder_constant(&f, &e, &e, &SampleBall::new(&[0.0; 3], 0.5), 1.5, 10, 0);
        assert!(matches!(r, Err(QrError::Parameter(_))));
    }

    #[test]
    fn local_exponents() {
        let e = ConformalMetric::euclidean(3);
        let scales = geometric(1e-1, 1e-7, 13);
        for t in [0.3, 0.5, 0.8] {
            let f = zoo::radial_power(t, 3).unwrap();
            let fit = local_holder_exponent(&f, &e, &e, &ExtPoint::origin(3), &scales, 16, 4).unwrap();
            assert!((fit.exponent_hat.unwrap() - t).abs() < 0.02);
        }
        let fit = local_holder_exponent(&zoo::identity(3), &e, &e, &ExtPoint::new(&[0.3, 0.1, 2.0]), &scales, 16, 4).unwrap();
        assert!((fit.exponent_hat.unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn constant_map_is_degenerate() {
        let e = ConformalMetric::euclidean(2);
        let f = zoo::constant(ExtPoint::new(&[1.0, 1.0]), 2);
        let fit = local_holder_exponent(&f, &e, &e, &ExtPoint::origin(2), &[0.1, 0.01], 8, 0).unwrap();
        assert!(fit.degenerate && fit.exponent_hat.is_none());
        assert!(local_holder_exponent(&f, &e, &e, &ExtPoint::origin(2), &[0.01, 0.1], 8, 0).is_err());
    }
}
