use rand::Rng;

use super::profile::ProfileWitness;
use crate::error::{QrError, Result};
use crate::metrics::dist_spherical;
use crate::point::{add, axpy, dist, norm, scale, sub, Coords, ExtPoint};
use crate::rng;
use crate::zoo::{self, MapDescriptor};

#[derive(Debug, Clone)]
pub struct ZalcmanSettings {
    /// Radius `r` of the search window `|x|, |y| ≤ r`.
    pub window: f64,
    /// Random base points in the coarse search.
    pub grid: usize,
    /// Separations tried per base point in the coarse search.
    pub separations: usize,
    /// Pattern-search iterations in the local refinement.
    pub refinement: usize,
    /// Probe pairs for the Hölder check of each rescaled map.
    pub probes: usize,
    /// Largest number of sequence terms.
    pub max_terms: usize,
}

impl ZalcmanSettings {
    pub fn new(window: f64) -> Self {
        ZalcmanSettings {
            window,
            grid: 200,
            separations: 12,
            refinement: 200,
            probes: 1000,
            max_terms: 8,
        }
    }
}

/// One term `g_m(w) = f(a_m + x_m + ρ_m·w)` of the rescaling sequence.
#[derive(Debug, Clone)]
pub struct RescaledMap {
    pub index: usize,
    /// Translation `a_m`, so `f_m(x) = f(x + a_m)`.
    pub anchor: Coords,
    pub alpha: f64,
    pub x: Coords,
    pub y: Coords,
    pub rho: f64,
    /// `σ(f_m(x_m), f_m(y_m))`
    pub sigma: f64,
    /// Maximal weighted ratio found in the window.
    pub weighted_ratio: f64,
    /// `|ρ^α·σ − |x − y|^α|`
    pub scale_law_error: f64,
    /// Probe pair of `g_m` with separated images, if one was found.
    pub certificate: Option<(Coords, Coords, f64)>,
    /// Radius of the probe ball used in the Hölder check.
    pub probe_radius: f64,
    /// Largest excess `σ(g(w₁), g(w₂)) − 2|w₁ − w₂|^α` over the probes.
    pub holder_excess: f64,
}

impl RescaledMap {
    /// `g_m` as an evaluatable map.
    pub fn map(&self, f: &MapDescriptor) -> Result<MapDescriptor> {
        let n = self.x.len();
        let mut stretch = vec![0.0; n * n];
        for i in 0..n {
            stretch[i * n + i] = self.rho;
        }
        let inner = zoo::compose(&zoo::translation(&add(&self.anchor, &self.x)), &zoo::linear(&stretch, n)?)?;
        zoo::compose(f, &inner)
    }

    pub fn eval(&self, f: &MapDescriptor, w: &[f64]) -> Result<ExtPoint> {
        let p = axpy(&add(&self.anchor, &self.x), self.rho, w);
        f.eval(&ExtPoint::Finite(p))
    }

    pub fn is_nonconstant(&self) -> bool {
        self.certificate.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct RescalingSequence {
    pub alpha: f64,
    pub window: f64,
    /// Terms ordered by strictly decreasing `ρ`.
    pub terms: Vec<RescaledMap>,
    /// No non-normality witnesses were supplied.
    pub yosida_evidence: bool,
}

/// Image separation required of a nonconstancy certificate.
pub const CERTIFICATE_SEPARATION: f64 = 0.1;
/// Allowed excess in the Hölder check of a rescaled map.
pub const HOLDER_TOLERANCE: f64 = 1e-3;

impl RescalingSequence {
    pub fn scale_law_holds(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.scale_law_error <= tol)
    }

    pub fn holder_bound_holds(&self) -> bool {
        self.terms.iter().all(|t| t.holder_excess <= HOLDER_TOLERANCE)
    }
}

struct Search<'a> {
    f: &'a MapDescriptor,
    anchor: &'a [f64],
    alpha: f64,
    r: f64,
}

impl Search<'_> {
    fn value(&self, x: &[f64]) -> Result<ExtPoint> {
        self.f
            .eval(&ExtPoint::Finite(add(x, self.anchor)))
            .map_err(|e| QrError::Numeric(format!("{} failed near {x:?}: {e}", self.f.name)))
    }

    fn weighted(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = dist(x, y);
        if d == 0.0 || norm(x) > self.r || norm(y) > self.r {
            return Ok(f64::NEG_INFINITY);
        }
        let s = dist_spherical(&self.value(x)?, &self.value(y)?);
        Ok((1.0 - (norm(x) / self.r).powi(2)) * s / d.powf(self.alpha))
    }
}

/// Zalcman-type rescaling of a map `f: R^n → S^n` around the anchors of
/// non-normality witnesses. For each anchor the weighted ratio
/// `(1 − |x|²/r²)·σ(f_m(x), f_m(y))/|x − y|^α` is maximised over the window
/// by a coarse random search followed by pattern-search refinement, and
/// the scale `ρ_m = |x − y|/σ^{1/α}` is set from the maximising pair.
pub fn zalcman_rescale(
    f: &MapDescriptor,
    alpha: f64,
    witnesses: &[ProfileWitness],
    settings: &ZalcmanSettings,
    seed: u64,
) -> Result<RescalingSequence> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(settings.window > 0.0) {
        return Err(QrError::Parameter("need α in (0, 1] and a positive window".into()));
    }
    let mut sequence = RescalingSequence {
        alpha,
        window: settings.window,
        terms: Vec::new(),
        yosida_evidence: witnesses.is_empty(),
    };
    let n = f.dim;
    let r = settings.window;
    let mut terms = Vec::new();
    for (k, w) in witnesses.iter().take(settings.max_terms).enumerate() {
        let Some(anchor) = w.anchor.coords() else {
            return Err(QrError::Parameter("witness anchors must be finite".into()));
        };
        let search = Search { f, anchor, alpha, r };
        let mut stream = rng::task_stream(seed, k as u64);

        // coarse stage, seeded with the witness pair itself
        let mut best = (Coords::from_elem(0.0, n), Coords::from_elem(0.0, n), f64::NEG_INFINITY);
        if let Some(wy) = w.y.coords() {
            let y = sub(wy, anchor);
            if norm(&y) <= r {
                let v = search.weighted(&best.0, &y)?;
                best = (best.0.clone(), y, v);
            }
        }
        for _ in 0..settings.grid {
            let x = rng::in_ball(&mut stream, n, r);
            for _ in 0..settings.separations {
                let s = rng::log_uniform(&mut stream, 1e-6 * r, r);
                let y = axpy(&x, s, &rng::unit_vector(&mut stream, n));
                let v = search.weighted(&x, &y)?;
                if v > best.2 {
                    best = (x.clone(), y, v);
                }
            }
        }
        if !(best.2 > 0.0) {
            continue;
        }

        // local pattern search in (x, y)
        let (mut x, mut y, mut v) = best;
        let mut step = 0.25 * dist(&x, &y);
        for _ in 0..settings.refinement {
            let mut improved = false;
            for coord in 0..2 * n {
                for sgn in [1.0, -1.0] {
                    let (mut x2, mut y2) = (x.clone(), y.clone());
                    if coord < n {
                        x2[coord] += sgn * step;
                    } else {
                        y2[coord - n] += sgn * step;
                    }
                    let v2 = search.weighted(&x2, &y2)?;
                    if v2 > v {
                        (x, y, v) = (x2, y2, v2);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-14 * r {
                    break;
                }
            }
        }

        let sigma = dist_spherical(&search.value(&x)?, &search.value(&y)?);
        let sep = dist(&x, &y);
        let rho = sep / sigma.powf(1.0 / alpha);
        let scale_law_error = (rho.powf(alpha) * sigma - sep.powf(alpha)).abs();
        let mut term = RescaledMap {
            index: 0,
            anchor: Coords::from_slice(anchor),
            alpha,
            x,
            y,
            rho,
            sigma,
            weighted_ratio: v,
            scale_law_error,
            certificate: None,
            probe_radius: 0.0,
            holder_excess: f64::NEG_INFINITY,
        };
        check_term(f, &mut term, r, settings.probes, &mut stream)?;
        terms.push(term);
    }
    terms.sort_by(|a, b| b.rho.total_cmp(&a.rho));
    terms.dedup_by(|later, earlier| !(later.rho < earlier.rho));
    for (m, t) in terms.iter_mut().enumerate() {
        t.index = m;
    }
    sequence.terms = terms;
    Ok(sequence)
}

fn check_term<R: Rng>(f: &MapDescriptor, t: &mut RescaledMap, r: f64, probes: usize, stream: &mut R) -> Result<()> {
    let n = t.x.len();
    let frozen = t.clone();
    let g = |w: &[f64]| frozen.eval(f, w);

    // nonconstancy: the witness direction plus random probes
    let wy = scale(&sub(&t.y, &t.x), 1.0 / t.rho);
    let reach = norm(&wy).max(1.0);
    let mut pts: Vec<Coords> = vec![Coords::from_elem(0.0, n), wy];
    pts.extend((0..32).map(|_| rng::in_ball(stream, n, reach)));
    let imgs = pts.iter().map(|p| g(p)).collect::<Result<Vec<_>>>()?;
    let mut cert: Option<(Coords, Coords, f64)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let s = dist_spherical(&imgs[i], &imgs[j]);
            if s >= CERTIFICATE_SEPARATION && cert.as_ref().is_none_or(|c| s > c.2) {
                cert = Some((pts[i].clone(), pts[j].clone(), s));
            }
        }
    }
    t.certificate = cert;

    // Hölder bound on the part of the w-plane where the window weight is at
    // least half of its value at x_m
    let xm = norm(&t.x);
    let big_r = (((r * r + xm * xm) / 2.0).sqrt() - xm) / t.rho;
    t.probe_radius = 1f64.min(big_r / 4.0);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..probes {
        let w1 = rng::in_ball(stream, n, t.probe_radius);
        let s = rng::log_uniform(stream, 1e-4 * t.probe_radius, 2.0 * t.probe_radius);
        let mut w2 = axpy(&w1, s, &rng::unit_vector(stream, n));
        if norm(&w2) > t.probe_radius {
            w2 = scale(&w2, t.probe_radius / norm(&w2));
        }
        let d = dist(&w1, &w2);
        if d == 0.0 {
            continue;
        }
        let lhs = dist_spherical(&g(&w1)?, &g(&w2)?);
        excess = excess.max(lhs - 2.0 * d.powf(t.alpha));
    }
    t.holder_excess = excess;
    Ok(())
}
