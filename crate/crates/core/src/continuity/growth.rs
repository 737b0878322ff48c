use std::f64::consts::PI;

use rand::Rng;

use super::{eval_at, fit_line};
use crate::error::{QrError, Result};
use crate::metrics::Region;
use crate::point::{axpy, norm, Coords, ExtPoint};
use crate::rng;
use crate::zoo::{jacobian_matrix, MapDescriptor};

/// Surface measure `ω_n` of the unit sphere `S^n ⊂ R^{n+1}`.
pub fn sphere_measure(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_measure(n - 2),
    }
}

/// Volume of the unit ball in `R^n`.
fn ball_volume(n: usize) -> f64 {
    sphere_measure(n - 1) / n as f64
}

/// Sampled `M(r, f) = sup_{|x| = r} |f(x)|` over the `2n` axis points and
/// `samples` random directions. Poles give `∞`.
pub fn max_modulus(f: &MapDescriptor, r: f64, samples: usize, seed: u64) -> Result<f64> {
    let n = f.dim;
    let mut rng = rng::stream(seed);
    let mut best: f64 = 0.0;
    let mut check = |p: Coords| -> Result<()> {
        let v = eval_at(f, &ExtPoint::Finite(p))?;
        best = best.max(v.norm());
        Ok(())
    };
    for i in 0..n {
        for s in [r, -r] {
            let mut p = Coords::from_elem(0.0, n);
            p[i] = s;
            check(p)?;
        }
    }
    for _ in 0..samples {
        check(rng::unit_vector(&mut rng, n).iter().map(|v| v * r).collect())?;
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct GrowthSettings {
    /// Increasing radii.
    pub radii: Vec<f64>,
    pub x0: Option<ExtPoint>,
    /// Random directions per radius for `M(r)`.
    pub sphere_samples: usize,
    /// Monte Carlo samples per shell for `A(x₀, r)`; 0 skips `A`.
    pub mc_samples: usize,
    /// Fraction of the radii (the largest ones) used for the order fits.
    pub tail_fraction: f64,
}

impl GrowthSettings {
    pub fn new(radii: Vec<f64>) -> Self {
        GrowthSettings {
            radii,
            x0: None,
            sphere_samples: 64,
            mc_samples: 0,
            tail_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthSeries {
    pub radii: Vec<f64>,
    /// Sampled maximum modulus, made nondecreasing by the maximum principle.
    pub m_values: Vec<f64>,
    /// `A(x₀, r)` per radius; empty when Monte Carlo was skipped.
    pub a_values: Vec<f64>,
    pub a_stderr: Vec<f64>,
    pub mu_hat: Option<f64>,
    pub lambda_hat: Option<f64>,
    /// `ω_n`
    pub omega_n: f64,
    pub jacobian_failures: usize,
}

/// Spherical Jacobian `2^n·max(J_f, 0)/(1 + |f|²)^n`, evaluated as the
/// determinant of the rescaled derivative so huge values of `f` do not
/// overflow.
fn spherical_jacobian(f: &MapDescriptor, x: &ExtPoint) -> Result<f64> {
    let fx = eval_at(f, x)?;
    let Some(c) = fx.coords() else {
        return Err(QrError::Numeric("pole".into()));
    };
    let mut d = jacobian_matrix(f, x, None)?;
    let r = norm(c);
    if r > 1e100 {
        d /= r;
        d /= r;
        d *= 2.0 / (1.0 + r.powi(-2));
    } else {
        d *= 2.0 / (1.0 + r * r);
    }
    let det = d.determinant();
    if !det.is_finite() {
        return Err(QrError::Numeric("non-finite Jacobian".into()));
    }
    Ok(det.max(0.0))
}

/// `M(r)`, `A(x₀, r)` and the order estimates of `f`.
///
/// `A` is a Monte Carlo sum over the nested shells between consecutive
/// radii, each with its own uniform samples, so it never decreases in `r`.
pub fn growth_suite(f: &MapDescriptor, settings: &GrowthSettings, seed: u64) -> Result<GrowthSeries> {
    let n = f.dim;
    let radii = &settings.radii;
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(QrError::Parameter("radii must be positive and increasing".into()));
    }
    let ball = matches!(f.domain, Region::UnitBall);
    let x0 = settings.x0.clone().unwrap_or_else(|| ExtPoint::origin(n));
    let Some(center) = x0.coords() else {
        return Err(QrError::Parameter("x0 must be finite".into()));
    };
    if ball && radii.iter().any(|r| *r >= 1.0) || ball && norm(center) + radii[radii.len() - 1] >= 1.0 {
        return Err(QrError::Domain("radii must stay inside the unit ball".into()));
    }

    let mut m_values = Vec::with_capacity(radii.len());
    let mut running: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        running = running.max(max_modulus(f, r, settings.sphere_samples, rng::task_stream(seed, i as u64).random())?);
        m_values.push(running);
    }

    let omega_n = sphere_measure(n);
    let mut a_values = Vec::new();
    let mut a_stderr = Vec::new();
    let mut failures = 0;
    if settings.mc_samples > 0 {
        let mut total = 0.0;
        let mut var = 0.0;
        let mut inner = 0.0;
        let mut stream = rng::stream(seed ^ 0xa5a5_5a5a_0f0f_f0f0);
        for &outer in radii {
            let q = (inner / outer).powi(n as i32);
            let vol = ball_volume(n) * outer.powi(n as i32) * (1.0 - q);
            let (mut sum, mut sum2, mut ok, mut bad) = (0.0, 0.0, 0usize, 0usize);
            for _ in 0..settings.mc_samples {
                let u = rng::unit_vector(&mut stream, n);
                let rho = outer * (q + stream.random::<f64>() * (1.0 - q)).powf(1.0 / n as f64);
                let x = ExtPoint::Finite(axpy(center, rho, &u));
                match spherical_jacobian(f, &x) {
                    Ok(v) => {
                        sum += v;
                        sum2 += v * v;
                        ok += 1;
                    }
                    Err(_) => bad += 1,
                }
            }
            if bad * 100 > settings.mc_samples {
                return Err(QrError::Numeric(format!(
                    "{}: {bad} of {} Jacobian evaluations failed in the shell {inner} < |x − x0| < {outer}",
                    f.name, settings.mc_samples
                )));
            }
            failures += bad;
            let mean = sum / ok as f64;
            let sample_var = if ok > 1 {
                (sum2 - sum * mean).max(0.0) / (ok - 1) as f64
            } else {
                0.0
            };
            total += vol * mean / omega_n;
            var += (vol / omega_n).powi(2) * sample_var / ok as f64;
            a_values.push(total);
            a_stderr.push(var.sqrt());
            inner = outer;
        }
    }

    let scale = |r: f64| if ball { (1.0 / (1.0 - r)).ln() } else { r.ln() };
    let tail_start = ((1.0 - settings.tail_fraction) * radii.len() as f64).floor() as usize;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let has_poles = !f.poles.is_empty() && f.poles.iter().any(|p| !p.is_infinite());
    for i in tail_start..radii.len() {
        let x = scale(radii[i]);
        if has_poles {
            if let Some(&a) = a_values.get(i) {
                if a > 0.0 && x > 0.0 {
                    xs.push(x);
                    ys.push(a.ln());
                }
            }
        } else if m_values[i] > 1.0 && m_values[i].is_finite() && x > 0.0 {
            xs.push(x);
            ys.push((n as f64 - 1.0) * m_values[i].ln().ln());
        }
    }
    let mu_hat = fit_line(&xs, &ys).map(|(s, _, _)| s);
    let lambda_hat = mu_hat.map(|mu| {
        xs.windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .fold(mu, f64::min)
    });
    Ok(GrowthSeries {
        radii: radii.clone(),
        m_values,
        a_values,
        a_stderr,
        mu_hat,
        lambda_hat,
        omega_n,
        jacobian_failures: failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_measure(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn identity_spherical_area_is_half() {
        for n in [2, 3] {
            let mut s = GrowthSettings::new(vec![0.5, 1.0]);
            s.mc_samples = 40_000;
            let g = growth_suite(&zoo::identity(n), &s, 5).unwrap();
            let (a, e) = (g.a_values[1], g.a_stderr[1]);
            assert!((a - 0.5).abs() < 4.0 * e, "n={n}: {a} ± {e}");
            assert!(g.a_values[0] <= g.a_values[1]);
            assert_eq!(g.m_values, vec![0.5, 1.0]);
        }
    }

    #[test]
    fn exponential_has_order_one() {
        let radii: Vec<f64> = (1..=12).map(|k| 10.0 * k as f64).collect();
        let g = growth_suite(&zoo::exp_map(), &GrowthSettings::new(radii), 0).unwrap();
        assert!((g.mu_hat.unwrap() - 1.0).abs() < 1e-9);
        assert!(g.lambda_hat.unwrap() <= g.mu_hat.unwrap() + 1e-12);
    }

    #[test]
    fn radii_must_increase() {
        assert!(growth_suite(&zoo::exp_map(), &GrowthSettings::new(vec![2.0, 1.0]), 0).is_err());
        assert!(matches!(
            growth_suite(&zoo::zorich_bloch(), &GrowthSettings::new(vec![0.5, 1.0]), 0),
            Err(QrError::Domain(_))
        ));
    }
}
