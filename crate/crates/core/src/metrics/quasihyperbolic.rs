//! Quasihyperbolic distance `k_X` of a proper subdomain, estimated by
//! shortest paths on nested grids.
//!
//! Each grid edge is weighted by a composite Simpson integral of
//! `1/d(x, ∂X)` along the segment, so every graph path length is the
//! length of an actual polygonal path and bounds `k_X` from above. The lower
//! bound is the distance ratio metric
//! `j(x,y) = log(1 + |x−y| / min(d(x), d(y)))`, which never exceeds `k_X`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EstimateMethod, GeodesicEstimate, Region};
use crate::error::{domain, parameter, Result};
use crate::point::{dist, ExtPoint};

/// Grid parameters. Level `ℓ` uses spacing `spacing / 2^ℓ`; levels are
/// nested, so refining never loses a path.
#[derive(Debug, Clone, PartialEq)]
pub struct QhGrid {
    pub spacing: f64,
    /// Extra room around the bounding box of the two points.
    pub margin: f64,
    pub levels: usize,
    /// Neighbour offsets range over `{-reach..=reach}^n`.
    pub reach: i64,
    /// Even number of Simpson panels per edge.
    pub panels: usize,
}

impl QhGrid {
    pub fn default_for(x: &[f64], y: &[f64]) -> Self {
        let d = dist(x, y).max(1e-12);
        let n = x.len();
        QhGrid {
            spacing: d / if n == 2 { 16.0 } else { 6.0 },
            margin: d,
            levels: if n == 2 { 2 } else { 1 },
            reach: if n == 2 { 2 } else { 1 },
            panels: 8,
        }
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Simpson integral of the quasihyperbolic density along `[a, b]`;
/// `None` when the segment leaves the region.
fn segment_length(region: &Region, a: &[f64], b: &[f64], panels: usize) -> Option<f64> {
    let len = dist(a, b);
    if len == 0.0 {
        return Some(0.0);
    }
    let mut sum = 0.0;
    let mut p = vec![0.0; a.len()];
    for i in 0..=panels {
        let t = i as f64 / panels as f64;
        for k in 0..a.len() {
            p[k] = a[k] + t * (b[k] - a[k]);
        }
        let d = region.boundary_distance(&p)?;
        if d <= 0.0 {
            return None;
        }
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w / d;
    }
    Some(sum * len / (3.0 * panels as f64))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn primitive_offsets(n: usize, reach: i64) -> Vec<Vec<i64>> {
    let side = (2 * reach + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push((c % side) as i64 - reach);
            c /= side;
        }
        let g = v.iter().fold(0, |g, &k| gcd(g, k));
        if g == 1 {
            out.push(v);
        }
    }
    out
}

/// Shortest-path length on a single grid level.
fn graph_distance(region: &Region, x: &[f64], y: &[f64], h: f64, grid: &QhGrid) -> Option<f64> {
    let n = x.len();
    let mut lo = vec![0i64; n];
    let mut dims = vec![0usize; n];
    for k in 0..n {
        let a = x[k].min(y[k]) - grid.margin;
        let b = x[k].max(y[k]) + grid.margin;
        lo[k] = ((a - x[k]) / h).floor() as i64;
        let hi = ((b - x[k]) / h).ceil() as i64;
        dims[k] = (hi - lo[k] + 1) as usize;
    }
    let count: usize = dims.iter().product();
    let point_of = |idx: usize, buf: &mut Vec<f64>| {
        let mut c = idx;
        for k in 0..n {
            let i = (c % dims[k]) as i64 + lo[k];
            c /= dims[k];
            buf[k] = x[k] + i as f64 * h;
        }
    };
    let index_of = |ks: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for k in 0..n {
            let i = ks[k] - lo[k];
            if i < 0 || i as usize >= dims[k] {
                return None;
            }
            idx += i as usize * stride;
            stride *= dims[k];
        }
        Some(idx)
    };
    let mut inside = vec![false; count];
    let mut buf = vec![0.0; n];
    for (idx, flag) in inside.iter_mut().enumerate() {
        point_of(idx, &mut buf);
        *flag = region.boundary_distance(&buf).is_some_and(|d| d > 0.0);
    }
    let offsets = primitive_offsets(n, grid.reach);
    let source = index_of(&vec![0; n])?;
    // the target is an extra node attached to the grid nodes around it
    let y_cell: Vec<i64> = (0..n).map(|k| ((y[k] - x[k]) / h).round() as i64).collect();
    let mut target_links: Vec<(usize, f64)> = Vec::new();
    let side = 2 * grid.reach + 1;
    for code in 0..side.pow(n as u32) {
        let mut c = code;
        let ks: Vec<i64> = (0..n)
            .map(|k| {
                let v = y_cell[k] + (c % side) - grid.reach;
                c /= side;
                v
            })
            .collect();
        if let Some(idx) = index_of(&ks) {
            if inside[idx] {
                point_of(idx, &mut buf);
                if let Some(w) = segment_length(region, &buf, y, grid.panels) {
                    target_links.push((idx, w));
                }
            }
        }
    }
    let mut best = vec![f64::INFINITY; count];
    let mut heap = BinaryHeap::new();
    best[source] = 0.0;
    heap.push(State {
        cost: 0.0,
        node: source,
    });
    let mut target_best = f64::INFINITY;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    while let Some(State { cost, node }) = heap.pop() {
        if cost > best[node] || cost >= target_best {
            continue;
        }
        for &(idx, w) in &target_links {
            if idx == node {
                target_best = target_best.min(cost + w);
            }
        }
        point_of(node, &mut a);
        let ks: Vec<i64> = (0..n).map(|k| ((a[k] - x[k]) / h).round() as i64).collect();
        for off in &offsets {
            let nk: Vec<i64> = ks.iter().zip(off).map(|(p, q)| p + q).collect();
            let Some(next) = index_of(&nk) else { continue };
            if !inside[next] {
                continue;
            }
            point_of(next, &mut b);
            let Some(w) = segment_length(region, &a, &b, grid.panels) else {
                continue;
            };
            let c = cost + w;
            if c < best[next] {
                best[next] = c;
                heap.push(State { cost: c, node: next });
            }
        }
    }
    target_best.is_finite().then_some(target_best)
}

/// Estimates at every refinement level, with the running-minimum upper
/// bound (so the sequence of brackets is nested).
pub fn qh_refinement_sequence(
    region: &Region,
    x: &ExtPoint,
    y: &ExtPoint,
    grid: &QhGrid,
) -> Result<Vec<GeodesicEstimate>> {
    if !region.is_proper() {
        return domain("quasihyperbolic distance is undefined without a boundary");
    }
    if grid.spacing <= 0.0 || grid.panels == 0 || grid.panels % 2 == 1 || grid.reach < 1 {
        return parameter("grid needs positive spacing, reach ≥ 1 and an even panel count");
    }
    let (Some(xc), Some(yc)) = (x.coords(), y.coords()) else {
        return domain("quasihyperbolic distance needs finite points");
    };
    let dx = region.boundary_distance(xc).unwrap();
    let dy = region.boundary_distance(yc).unwrap();
    if dx <= 0.0 || dy <= 0.0 {
        return domain("points must be interior to the region");
    }
    if x == y {
        return Ok(vec![GeodesicEstimate {
            value: 0.0,
            lower_bound: 0.0,
            upper_bound: 0.0,
            method: EstimateMethod::GraphRefinement,
        }]);
    }
    let lower = (dist(xc, yc) / dx.min(dy)).ln_1p();
    let mut upper = f64::INFINITY;
    let mut out = Vec::with_capacity(grid.levels + 1);
    for level in 0..=grid.levels {
        let h = grid.spacing / (1u64 << level) as f64;
        if let Some(v) = graph_distance(region, xc, yc, h, grid) {
            upper = upper.min(v);
        }
        out.push(GeodesicEstimate {
            value: upper.max(lower),
            lower_bound: lower,
            upper_bound: upper.max(lower),
            method: EstimateMethod::GraphRefinement,
        });
    }
    Ok(out)
}

/// Quasihyperbolic distance bracket at the finest requested level.
pub fn dist_quasihyperbolic(
    region: &Region,
    x: &ExtPoint,
    y: &ExtPoint,
    grid: &QhGrid,
) -> Result<GeodesicEstimate> {
    let seq = qh_refinement_sequence(region, x, y, grid)?;
    let last = *seq.last().unwrap();
    if !last.upper_bound.is_finite() {
        return Err(crate::error::QrError::Numeric(
            "no grid path joins the points; enlarge the margin".into(),
        ));
    }
    Ok(last)
}
