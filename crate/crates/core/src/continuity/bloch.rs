use rand::Rng;

use super::eval_at;
use super::growth::max_modulus;
use crate::error::{QrError, Result};
use crate::isometry::mobius_add;
use crate::metrics::Region;
use crate::point::{axpy, dist, Coords, ExtPoint};
use crate::rng;
use crate::zoo::{numeric_jacobian, MapDescriptor};

#[derive(Debug, Clone)]
pub struct BlochSettings {
    /// Levels `|x|` at which centers are drawn, approaching 1.
    pub levels: Vec<f64>,
    /// Total number of centers, split evenly across the levels.
    pub centers: usize,
    /// Points sampled in each hyperbolic ball.
    pub ball_samples: usize,
    /// Hyperbolic radius of the balls whose images are measured.
    pub radius: f64,
    /// Centers searched by the Bloch radius probe.
    pub probe_centers: usize,
}

impl BlochSettings {
    pub fn new(levels: Vec<f64>, centers: usize) -> Self {
        BlochSettings {
            levels,
            centers,
            ball_samples: 64,
            radius: 1.0,
            probe_centers: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LittleBlochEntry {
    /// `|x|` of the centers.
    pub radius: f64,
    /// Image diameter at the axis center `-|x|·e_n`.
    pub axis_diam: f64,
    /// Largest image diameter over all centers of this level.
    pub sup_diam: f64,
}

#[derive(Debug, Clone)]
pub struct BlochStats {
    /// `|f(0)| + sup diam f(B_ρ(x, radius))` over the sampled centers.
    pub r_hat: f64,
    pub f0_norm: f64,
    pub sup_diam: f64,
    /// Center attaining `sup_diam`.
    pub argmax_center: ExtPoint,
    pub little_bloch_curve: Vec<LittleBlochEntry>,
    /// Largest ball radius around a sampled image point `f(x)` that the
    /// image of a small sphere about `x` encloses while the Jacobian keeps
    /// a positive sign; a sampled proxy for the Bloch radius.
    pub bloch_radius_probe: f64,
    pub centers_used: usize,
}

impl BlochStats {
    /// Smallest axis diameter over the levels in `[lo, hi]`.
    pub fn axis_min(&self, lo: f64, hi: f64) -> Option<f64> {
        self.little_bloch_curve
            .iter()
            .filter(|e| e.radius >= lo && e.radius <= hi)
            .map(|e| e.axis_diam)
            .reduce(f64::min)
    }
}

/// Sample template for the hyperbolic ball `B_ρ(0, radius)`: the axis
/// endpoints, points on the boundary sphere and interior points.
fn ball_template(n: usize, radius: f64, count: usize, seed: u64) -> Vec<Coords> {
    let t = (radius / 2.0).tanh();
    let mut pts = vec![Coords::from_elem(0.0, n)];
    for i in 0..n {
        for s in [t, -t] {
            let mut p = Coords::from_elem(0.0, n);
            p[i] = s;
            pts.push(p);
        }
    }
    let mut r = rng::stream(seed);
    let mut k = 0;
    while pts.len() < count.max(2 * n + 1) {
        let p = if k % 2 == 0 {
            rng::unit_vector(&mut r, n).iter().map(|v| v * t).collect()
        } else {
            rng::in_ball(&mut r, n, t)
        };
        pts.push(p);
        k += 1;
    }
    pts
}

fn finite(f: &MapDescriptor, x: &ExtPoint) -> Result<Coords> {
    match eval_at(f, x)? {
        ExtPoint::Finite(c) => Ok(c),
        ExtPoint::Infinity => Err(QrError::Domain(format!("{} has a pole at {x:?}", f.name))),
    }
}

fn image_diameter(f: &MapDescriptor, center: &[f64], template: &[Coords]) -> Result<f64> {
    let images = template
        .iter()
        .map(|p| finite(f, &ExtPoint::Finite(mobius_add(center, p))))
        .collect::<Result<Vec<_>>>()?;
    let mut d: f64 = 0.0;
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            d = d.max(dist(a, b));
        }
    }
    Ok(d)
}

/// Sampled Bloch statistics of a map from the unit ball into `R^n`.
pub fn bloch_r(f: &MapDescriptor, settings: &BlochSettings, seed: u64) -> Result<BlochStats> {
    if !matches!(f.domain, Region::UnitBall) {
        return Err(QrError::Domain(format!("{} is not defined on the unit ball", f.name)));
    }
    if f.has_poles_in(&Region::UnitBall) {
        return Err(QrError::Domain(format!("{} has poles in the unit ball", f.name)));
    }
    if settings.levels.is_empty() || settings.levels.iter().any(|r| !(*r >= 0.0 && *r < 1.0)) {
        return Err(QrError::Parameter("levels must lie in [0, 1)".into()));
    }
    if !(settings.radius > 0.0) {
        return Err(QrError::Parameter("ball radius must be positive".into()));
    }
    let n = f.dim;
    let origin = ExtPoint::origin(n);
    let f0_norm = finite(f, &origin)?.iter().map(|v| v * v).sum::<f64>().sqrt();
    let template = ball_template(n, settings.radius, settings.ball_samples, seed);
    let per_level = settings.centers.div_ceil(settings.levels.len()).max(2);
    let mut r = rng::stream(seed ^ 0x9e37_79b9_7f4a_7c15);

    let mut sup_diam = image_diameter(f, origin.coords().unwrap(), &template)?;
    let mut argmax = origin.clone();
    let mut curve = Vec::with_capacity(settings.levels.len());
    let mut all_centers: Vec<Coords> = Vec::new();
    for &level in &settings.levels {
        let mut centers: Vec<Coords> = Vec::with_capacity(per_level);
        let mut down = Coords::from_elem(0.0, n);
        down[n - 1] = -level;
        let mut up = Coords::from_elem(0.0, n);
        up[n - 1] = level;
        centers.push(down);
        centers.push(up);
        while centers.len() < per_level {
            centers.push(rng::unit_vector(&mut r, n).iter().map(|v| v * level).collect());
        }
        let mut axis_diam = 0.0;
        let mut level_sup: f64 = 0.0;
        for (k, c) in centers.iter().enumerate() {
            let d = image_diameter(f, c, &template)?;
            if k == 0 {
                axis_diam = d;
            }
            level_sup = level_sup.max(d);
            if d > sup_diam {
                sup_diam = d;
                argmax = ExtPoint::Finite(c.clone());
            }
        }
        curve.push(LittleBlochEntry {
            radius: level,
            axis_diam,
            sup_diam: level_sup,
        });
        all_centers.extend(centers);
    }
    let probe = bloch_radius_probe(f, &all_centers, settings.probe_centers, seed)?;
    Ok(BlochStats {
        r_hat: f0_norm + sup_diam,
        f0_norm,
        sup_diam,
        argmax_center: argmax,
        little_bloch_curve: curve,
        bloch_radius_probe: probe,
        centers_used: all_centers.len() + 1,
    })
}

fn bloch_radius_probe(f: &MapDescriptor, centers: &[Coords], count: usize, seed: u64) -> Result<f64> {
    let n = f.dim;
    let mut best: f64 = 0.0;
    let mut r = rng::stream(seed.wrapping_add(1));
    let step = (centers.len() / count.max(1)).max(1);
    for c in centers.iter().step_by(step).take(count) {
        let x = ExtPoint::Finite(c.clone());
        let fx = finite(f, &x)?;
        let room = 1.0 - crate::point::norm(c);
        for k in 1..=6 {
            let s = room * 0.5f64.powi(k);
            let dirs: Vec<Coords> = (0..32).map(|_| rng::unit_vector(&mut r, n)).collect();
            let mut positive = match numeric_jacobian(f, &x, Some(1e-3 * s)) {
                Ok(j) => j.det > 0.0,
                Err(_) => false,
            };
            for u in dirs.iter().take(8) {
                let p = ExtPoint::Finite(axpy(c, 0.5 * s * r.random::<f64>(), u));
                positive &= numeric_jacobian(f, &p, Some(1e-3 * s)).is_ok_and(|j| j.det > 0.0);
            }
            if !positive {
                continue;
            }
            let mut d = f64::INFINITY;
            for u in &dirs {
                d = d.min(dist(&finite(f, &ExtPoint::Finite(axpy(c, s, u)))?, &fx));
            }
            best = best.max(d);
        }
    }
    Ok(best)
}

/// One row of the growth comparison `M(r) ≤ R_f·max{1, log((1+r)/(1−r))}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochGrowthRow {
    pub r: f64,
    pub m: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Relative slack allowed in the growth comparison.
pub const BLOCH_GROWTH_SLACK: f64 = 0.05;

pub fn bloch_growth_check(
    f: &MapDescriptor,
    radii: &[f64],
    stats: &BlochStats,
    sphere_samples: usize,
    seed: u64,
) -> Result<Vec<BlochGrowthRow>> {
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let m = max_modulus(f, r, sphere_samples, seed.wrapping_add(i as u64))?;
            let bound = stats.r_hat * 1f64.max(((1.0 + r) / (1.0 - r)).ln());
            Ok(BlochGrowthRow {
                r,
                m,
                bound,
                pass: m <= (1.0 + BLOCH_GROWTH_SLACK) * bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn origin_map() -> MapDescriptor {
        let mut f = zoo::constant(ExtPoint::origin(3), 3);
        f.domain = Region::UnitBall;
        f.range = Region::Whole;
        f
    }

    fn identity_on_ball() -> MapDescriptor {
        let mut f = zoo::identity(3);
        f.domain = Region::UnitBall;
        f
    }

    #[test]
    fn constant_zero_has_zero_statistic() {
        let s = bloch_r(&origin_map(), &BlochSettings::new(vec![0.5, 0.9], 20), 0).unwrap();
        assert_eq!(s.r_hat, 0.0);
        let rows = bloch_growth_check(&origin_map(), &[0.5, 0.9], &s, 16, 0).unwrap();
        assert!(rows.iter().all(|r| r.pass && r.m == 0.0 && r.bound == 0.0));
    }

    #[test]
    fn identity_passes_growth_check() {
        let f = identity_on_ball();
        let s = bloch_r(&f, &BlochSettings::new(vec![0.0, 0.5, 0.9, 0.99], 40), 1).unwrap();
        assert!(s.r_hat >= s.f0_norm && s.sup_diam > 0.0);
        // at the origin the unit hyperbolic ball has Euclidean diameter 2·tanh(1/2)
        assert!(s.sup_diam >= 2.0 * 0.5f64.tanh() - 1e-12);
        for row in bloch_growth_check(&f, &[0.5, 0.9, 0.99], &s, 32, 2).unwrap() {
            assert!((row.m - row.r).abs() < 1e-12);
            assert!(row.pass);
        }
        assert!(s.bloch_radius_probe > 0.0);
    }

    #[test]
    fn half_space_map_is_not_bloch() {
        let f = zoo::ball_to_half_space(3);
        let levels = [0.9, 0.99, 0.999, 0.9999];
        let s = bloch_r(&f, &BlochSettings::new(levels.to_vec(), 40), 3).unwrap();
        let sups: Vec<f64> = s.little_bloch_curve.iter().map(|e| e.sup_diam).collect();
        assert!(sups.windows(2).all(|w| w[1] > 5.0 * w[0]), "{sups:?}");
    }

    #[test]
    fn zorich_bloch_little_bloch_witness() {
        let f = zoo::zorich_bloch();
        let s = bloch_r(&f, &BlochSettings::new(vec![0.99, 0.999, 0.9999], 30), 4).unwrap();
        assert!(s.axis_min(0.99, 0.9999).unwrap() >= 2f64.ln());
    }

    #[test]
    fn wrong_domains_are_rejected() {
        let r = bloch_r(&zoo::exp_map(), &BlochSettings::new(vec![0.5], 4), 0);
        assert!(matches!(r, Err(QrError::Domain(_))));
        let mut f = identity_on_ball();
        f.poles = vec![ExtPoint::new(&[0.0, 0.0, 0.5])];
        assert!(matches!(bloch_r(&f, &BlochSettings::new(vec![0.5], 4), 0), Err(QrError::Domain(_))));
    }
}
