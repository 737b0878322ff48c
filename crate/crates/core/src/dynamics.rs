//! Julia-set detection for uniformly quasiregular maps through the growth
//! of the spherical oscillation of iterates.

use rayon::prelude::*;

use crate::error::{QrError, Result};
use crate::metrics::{dist_spherical, metric_sphere_sample, ConformalMetric};
use crate::point::ExtPoint;
use crate::zoo::MapDescriptor;

/// `L(x, f, r)`: the largest `σ(f(y), f(x))` over sampled `y` with
/// `σ(y, x) = r`.
pub fn l_value(f: &MapDescriptor, x: &ExtPoint, r: f64, samples: usize, seed: u64) -> Result<f64> {
    check_radius(r)?;
    check_samples(samples)?;
    let sph = ConformalMetric::spherical(f.dim);
    let fx = f.eval(x)?;
    let mut best: f64 = 0.0;
    for y in metric_sphere_sample(&sph, x, r, samples, seed)? {
        best = best.max(dist_spherical(&f.eval(&y)?, &fx));
    }
    Ok(best)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r < std::f64::consts::PI) {
        return Err(QrError::Parameter(format!("radius {r} must lie in (0, π)")));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 8 {
        return Err(QrError::Parameter("at least 8 samples are needed".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JuliaClass {
    JuliaEvidence,
    FatouEvidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JuliaEntry {
    pub m: usize,
    pub r: f64,
    pub l_hat: f64,
    /// `l_hat / r^α`
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct JuliaSettings {
    pub alpha: f64,
    /// Strictly decreasing radii in `(0, π)`.
    pub r_list: Vec<f64>,
    /// Strictly increasing iterate counts.
    pub m_list: Vec<usize>,
    pub samples: usize,
    pub threshold: f64,
}

impl JuliaSettings {
    /// `r = 2⁻¹, …, 2⁻¹⁰`, `m = 1, …, 20`, 16 samples, threshold `10³`.
    pub fn new(alpha: f64) -> Self {
        JuliaSettings {
            alpha,
            r_list: (1..=10).map(|k| 0.5f64.powi(k)).collect(),
            m_list: (1..=20).collect(),
            samples: 16,
            threshold: 1e3,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(QrError::Parameter(format!("exponent {} must lie in (0, 1]", self.alpha)));
        }
        if self.r_list.is_empty() || self.m_list.is_empty() {
            return Err(QrError::Parameter("radius and iterate lists must be nonempty".into()));
        }
        if self.r_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(QrError::Parameter("radii must be strictly decreasing".into()));
        }
        if self.m_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QrError::Parameter("iterate counts must be strictly increasing".into()));
        }
        for &r in &self.r_list {
            check_radius(r)?;
        }
        check_samples(self.samples)?;
        if !(self.threshold > 0.0) {
            return Err(QrError::Parameter("threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JuliaProbe {
    pub point: ExtPoint,
    /// One entry per `(m, r)`, `m`-major in the order of the settings.
    pub table: Vec<JuliaEntry>,
    pub indicator: f64,
    pub classification: JuliaClass,
    pub threshold: f64,
    /// The orbit of the point reached ∞.
    pub overflow: bool,
}

impl JuliaProbe {
    /// Ratios for a fixed `m`, in the order of the radii.
    pub fn ratios_for(&self, m: usize) -> Vec<f64> {
        self.table.iter().filter(|e| e.m == m).map(|e| e.ratio).collect()
    }
}

/// The indicator `max L(x, f^m, r)/r^α` over the `(m, r)` grid.
///
/// The same sample directions are used at every radius, so the table
/// compares like with like across scales.
pub fn julia_indicator(f: &MapDescriptor, x: &ExtPoint, settings: &JuliaSettings, seed: u64) -> Result<JuliaProbe> {
    settings.validate()?;
    if !f.is_iterable() {
        return Err(QrError::Parameter(format!("{} cannot be iterated", f.name)));
    }
    let sph = ConformalMetric::spherical(f.dim);
    let m_max = *settings.m_list.last().unwrap();
    let mut table = vec![
        JuliaEntry {
            m: 0,
            r: 0.0,
            l_hat: 0.0,
            ratio: 0.0
        };
        settings.m_list.len() * settings.r_list.len()
    ];
    let nr = settings.r_list.len();

    // orbit of the point itself, shared by all radii
    let mut orbit = Vec::with_capacity(m_max + 1);
    orbit.push(x.clone());
    for m in 1..=m_max {
        let next = f
            .eval(&orbit[m - 1])
            .map_err(|e| QrError::Numeric(format!("iterate {m} of {x:?}: {e}")))?;
        orbit.push(next);
    }
    let overflow = orbit.iter().any(|p| p.is_infinite());

    for (ri, &r) in settings.r_list.iter().enumerate() {
        let mut pts = metric_sphere_sample(&sph, x, r, settings.samples, seed)?;
        let scale = r.powf(settings.alpha);
        let mut next_m = 0;
        for m in 0..=m_max {
            if m > 0 {
                for p in pts.iter_mut() {
                    *p = f
                        .eval(p)
                        .map_err(|e| QrError::Numeric(format!("iterate {m} near {x:?}: {e}")))?;
                }
            }
            if next_m < settings.m_list.len() && settings.m_list[next_m] == m {
                let l_hat = pts.iter().map(|p| dist_spherical(p, &orbit[m])).fold(0.0, f64::max);
                table[next_m * nr + ri] = JuliaEntry {
                    m,
                    r,
                    l_hat,
                    ratio: l_hat / scale,
                };
                next_m += 1;
            }
        }
    }
    let indicator = table.iter().map(|e| e.ratio).fold(0.0, f64::max);
    Ok(JuliaProbe {
        point: x.clone(),
        table,
        indicator,
        classification: if indicator > settings.threshold {
            JuliaClass::JuliaEvidence
        } else {
            JuliaClass::FatouEvidence
        },
        threshold: settings.threshold,
        overflow,
    })
}

/// A planar rectangle, or an axis-aligned 2-D slice of `R^n` through
/// `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Coordinates varied along the horizontal and vertical pixel axes.
    pub axes: (usize, usize),
    /// Point supplying the remaining coordinates.
    pub base: Vec<f64>,
}

impl Window {
    pub fn planar(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Window {
            x_range,
            y_range,
            axes: (0, 1),
            base: vec![0.0, 0.0],
        }
    }

    /// Center of pixel `(col, row)`; row 0 is the top edge.
    pub fn pixel_center(&self, col: usize, row: usize, width: usize, height: usize) -> ExtPoint {
        let dx = (self.x_range.1 - self.x_range.0) / width as f64;
        let dy = (self.y_range.1 - self.y_range.0) / height as f64;
        let mut c = self.base.clone();
        c[self.axes.0] = self.x_range.0 + (col as f64 + 0.5) * dx;
        c[self.axes.1] = self.y_range.1 - (row as f64 + 0.5) * dy;
        ExtPoint::new(&c)
    }
}

#[derive(Debug, Clone)]
pub struct JuliaGrid {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    /// Row-major indicators, top row first.
    pub indicators: Vec<f64>,
    /// Pixels whose orbit reached ∞.
    pub overflow: Vec<bool>,
    pub threshold: f64,
    pub seed: u64,
}

impl JuliaGrid {
    pub fn classification(&self, index: usize) -> JuliaClass {
        if self.indicators[index] > self.threshold {
            JuliaClass::JuliaEvidence
        } else {
            JuliaClass::FatouEvidence
        }
    }

    pub fn pixel_center(&self, index: usize) -> ExtPoint {
        self.window
            .pixel_center(index % self.width, index / self.width, self.width, self.height)
    }
}

/// Per-pixel [`julia_indicator`] at the pixel centers. Pixel `i` uses the
/// seed `seed + i`, so the grid does not depend on the thread count.
pub fn julia_grid(
    f: &MapDescriptor,
    window: &Window,
    width: usize,
    height: usize,
    settings: &JuliaSettings,
    seed: u64,
) -> Result<JuliaGrid> {
    settings.validate()?;
    if width < 16 || height < 16 {
        return Err(QrError::Parameter("resolution must be at least 16×16".into()));
    }
    if window.base.len() != f.dim || window.axes.0 >= f.dim || window.axes.1 >= f.dim || window.axes.0 == window.axes.1 {
        return Err(QrError::Parameter("window does not match the map dimension".into()));
    }
    if !(window.x_range.1 > window.x_range.0 && window.y_range.1 > window.y_range.0) {
        return Err(QrError::Parameter("window ranges must be nonempty".into()));
    }
    let probes = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let x = window.pixel_center(i % width, i / width, width, height);
            julia_indicator(f, &x, settings, seed.wrapping_add(i as u64))
                .map(|p| (p.indicator, p.overflow))
                .map_err(|e| QrError::Numeric(format!("pixel {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (indicators, overflow) = probes.into_iter().unzip();
    Ok(JuliaGrid {
        window: window.clone(),
        width,
        height,
        indicators,
        overflow,
        threshold: settings.threshold,
        seed,
    })
}
