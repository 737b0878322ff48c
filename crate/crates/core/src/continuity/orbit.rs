use crate::metrics::{ConformalMetric, Region};
use crate::point::ExtPoint;
use crate::zoo::MapDescriptor;

#[derive(Debug, Clone, PartialEq)]
pub enum OrbitVerdict {
    /// The sampled orbit stays in `{h ≤ sup}` for the exhaustion `h`.
    Bounded { sup: f64 },
    /// The exhaustion keeps growing; `witness` indexes the family member
    /// where it is largest.
    Unbounded { witness: usize, value: f64 },
}

/// Exhaustion function `h(y) = max(|y|, 1/dist(y, ∂Y))` of the region `Y`;
/// compact subsets are exactly the sets where `h` stays bounded. On the
/// whole sphere every set is relatively compact and `h = 0`.
pub fn exhaustion(region: &Region, y: &ExtPoint) -> f64 {
    if matches!(region, Region::Sphere) {
        return 0.0;
    }
    if !region.contains(y) {
        return f64::INFINITY;
    }
    let c = y.coords().expect("finite point inside a region");
    let r = crate::point::norm(c);
    match region.boundary_distance(c) {
        Some(d) => r.max(1.0 / d),
        None => r,
    }
}

/// Relative growth of the exhaustion between the two halves of the family
/// that counts as escape.
pub const ESCAPE_MARGIN: f64 = 0.1;

/// Whether the orbit `{f(x₀)}` of a sampled family stays in a compact part
/// of the range of `metric_out`. The family is read in order of its
/// parameter; the orbit is declared unbounded when the exhaustion over the
/// later half exceeds its maximum over the earlier half by more than
/// [`ESCAPE_MARGIN`]. Maps that fail to evaluate, or send `x₀` out of the
/// range, count as escaping.
pub fn orbit_compactness_probe(family: &[MapDescriptor], x0: &ExtPoint, metric_out: &ConformalMetric) -> OrbitVerdict {
    let h: Vec<f64> = family
        .iter()
        .map(|f| match f.eval(x0) {
            Ok(y) => exhaustion(&metric_out.region, &y),
            Err(_) => f64::INFINITY,
        })
        .collect();
    if let Some(i) = h.iter().position(|v| v.is_infinite()) {
        return OrbitVerdict::Unbounded {
            witness: i,
            value: f64::INFINITY,
        };
    }
    let sup = h.iter().copied().fold(0.0, f64::max);
    if h.len() < 2 {
        return OrbitVerdict::Bounded { sup };
    }
    let half = h.len() / 2;
    let early = h[..half].iter().copied().fold(0.0, f64::max);
    let (offset, late) = h[half..]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(i, m), (j, &v)| if v >= m { (j, v) } else { (i, m) });
    if late > (1.0 + ESCAPE_MARGIN) * early {
        OrbitVerdict::Unbounded {
            witness: half + offset,
            value: late,
        }
    } else {
        OrbitVerdict::Bounded { sup }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn translated_family_escapes_at_the_last_member() {
        let f = zoo::exp_map();
        let family: Vec<MapDescriptor> = (0..=50).map(|m| zoo::shifted(&f, &[m as f64, 0.0]).unwrap()).collect();
        let v = orbit_compactness_probe(&family, &ExtPoint::origin(2), &ConformalMetric::euclidean(2));
        assert!(matches!(v, OrbitVerdict::Unbounded { witness: 50, .. }), "{v:?}");
    }

    #[test]
    fn recentred_family_has_the_origin_as_orbit() {
        let f = zoo::zorich_bloch();
        let sampler = zoo::IsometrySampler::new(zoo::IsometrySpace::Hyperbolic, 3, 1);
        let mut family = Vec::new();
        for a in sampler.random_anchors(40, 6.0) {
            let iso = sampler.isometry(&a).unwrap();
            let base = f.eval(&a).unwrap();
            let shift: Vec<f64> = base.coords().unwrap().iter().map(|v| -v).collect();
            family.push(zoo::shifted(&zoo::compose(&f, &iso).unwrap(), &shift).unwrap());
        }
        let v = orbit_compactness_probe(&family, &ExtPoint::origin(3), &ConformalMetric::euclidean(3));
        assert_eq!(v, OrbitVerdict::Bounded { sup: 0.0 });
    }

    #[test]
    fn spherical_range_is_compact() {
        let family: Vec<MapDescriptor> = (0..10).map(|m| zoo::shifted(&zoo::exp_map(), &[m as f64 * 100.0, 0.0]).unwrap()).collect();
        let v = orbit_compactness_probe(&family, &ExtPoint::origin(2), &ConformalMetric::spherical(2));
        assert!(matches!(v, OrbitVerdict::Bounded { .. }));
    }
}
