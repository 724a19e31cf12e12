//! Tour-length lower bound from a spanning tree over region clearances.
//!
//! Vertices are the start (cluster 0) and one cluster per object (its
//! candidate points, cluster `i + 1` for object `i`). Edge weights are the
//! smallest point-to-point distance between clusters, forced to zero when
//! the continuous effective regions actually intersect: overlapping regions
//! admit a common stop, so no positive travel can be charged between them.
//! Any feasible closed tour connects all clusters, hence its length is at
//! least the MST weight.

use crate::discretize::PointSet;
use crate::error::Result;
use crate::geometry::{can_observe, Object, Point2, SensingSpec};
use crate::harness::Instance;
use crate::tsp::{mst, WeightedGraph};

/// Cluster clearance graph: vertex 0 is the start, vertex `i + 1` object `i`.
#[derive(Debug, Clone)]
pub struct ClusterGraph {
    pub dist: WeightedGraph,
}

/// Whether the effective regions of `a` and `b` intersect. Checks boundary
/// samples of each region (spacing at most `step`) for containment in the
/// other; nested regions are caught because a contained region's boundary
/// lies inside the container. Razor-thin overlaps below the sampling
/// resolution may be missed, which only weakens (never invalidates) a bound
/// built on it.
pub fn regions_overlap(a: &Object, b: &Object, s: &SensingSpec, step: f64) -> bool {
    if a.position.distance(b.position) > 2.0 * s.d_max {
        return false;
    }
    boundary_samples(a, s, step).iter().any(|&p| can_observe(b, p, s))
        || boundary_samples(b, s, step).iter().any(|&p| can_observe(a, p, s))
}

/// Points along the closed boundary of an effective region: both arcs plus
/// both radial edges, sampled at spacing `<= step`.
fn boundary_samples(o: &Object, s: &SensingSpec, step: f64) -> Vec<Point2> {
    let step = step.max(1e-6);
    let mut out = Vec::new();
    let place = |r: f64, ang: f64| {
        let t = o.facing + ang;
        Point2::new(o.position.x + r * t.cos(), o.position.y + r * t.sin())
    };
    for r in [s.d_min, s.d_max] {
        let arc = 2.0 * s.theta * r;
        let segs = (arc / step).ceil().max(1.0) as usize;
        for k in 0..=segs {
            let ang = -s.theta + 2.0 * s.theta * k as f64 / segs as f64;
            out.push(place(r, ang));
        }
    }
    for ang in [-s.theta, s.theta] {
        let segs = ((s.d_max - s.d_min) / step).ceil().max(1.0) as usize;
        for k in 0..=segs {
            let r = s.d_min + (s.d_max - s.d_min) * k as f64 / segs as f64;
            out.push(place(r, ang));
        }
    }
    out
}

/// Build the clearance graph from generated points, zeroing edges whose
/// continuous regions overlap (or that contain the start).
pub fn build_cluster_graph(instance: &Instance, points: &PointSet) -> ClusterGraph {
    let n = instance.objects.len();
    let s = &instance.sensing;
    let step = points.grid.delta;
    let mut g = WeightedGraph::new(n + 1);

    for i in 0..n {
        let w = if can_observe(&instance.objects[i], instance.start, s) {
            0.0
        } else {
            points
                .of_object(i)
                .iter()
                .map(|p| p.position.distance(instance.start))
                .fold(f64::INFINITY, f64::min)
        };
        g.set(0, i + 1, w);
    }

    for i in 0..n {
        for j in i + 1..n {
            let w = if regions_overlap(&instance.objects[i], &instance.objects[j], s, step) {
                0.0
            } else {
                let mut best = f64::INFINITY;
                for pi in points.of_object(i) {
                    for pj in points.of_object(j) {
                        best = best.min(pi.position.distance(pj.position));
                    }
                }
                best
            };
            g.set(i + 1, j + 1, w);
        }
    }
    ClusterGraph { dist: g }
}

/// MST weight of the clearance graph: a floor on every feasible tour length.
pub fn lower_bound(instance: &Instance, points: &PointSet) -> Result<f64> {
    let graph = build_cluster_graph(instance, points);
    Ok(mst(&graph.dist)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quality_bounds;

    fn spec_2_10_30() -> SensingSpec {
        SensingSpec::new(2.0, 10.0, 30f64.to_radians()).unwrap()
    }

    fn obj(x: f64, y: f64, facing: f64) -> Object {
        Object::new(Point2::new(x, y), facing, 1.0).unwrap()
    }

    fn instance(objects: Vec<Object>, start: Point2) -> Instance {
        Instance::new(500.0, objects, start, spec_2_10_30(), 0.5, 0).unwrap()
    }

    #[test]
    fn start_inside_a_region_gets_zero_edge() {
        // Object faces +x; the start sits right on its axis at distance 5.
        let inst = instance(
            vec![obj(100.0, 100.0, 0.0), obj(160.0, 100.0, 0.0)],
            Point2::new(105.0, 100.0),
        );
        let pts = inst.generate_points().unwrap();
        let g = build_cluster_graph(&inst, &pts);
        assert_eq!(g.dist.weight(0, 1), 0.0);
        assert!(g.dist.weight(0, 2) > 0.0);
    }

    #[test]
    fn facing_away_objects_keep_their_separation_minus_reach() {
        // Back to back, 60 m apart: every pair of region points stays at
        // least separation - 2*d_max apart.
        let inst = instance(
            vec![obj(100.0, 100.0, std::f64::consts::PI), obj(160.0, 100.0, 0.0)],
            Point2::new(0.0, 0.0),
        );
        let pts = inst.generate_points().unwrap();
        let g = build_cluster_graph(&inst, &pts);
        assert!(g.dist.weight(1, 2) >= 60.0 - 2.0 * 10.0);
    }

    #[test]
    fn facing_each_other_nearby_overlaps_to_zero() {
        // 5 m apart, facing each other: the regions share points between them.
        let inst = instance(
            vec![obj(100.0, 100.0, 0.0), obj(105.0, 100.0, std::f64::consts::PI)],
            Point2::new(0.0, 0.0),
        );
        let pts = inst.generate_points().unwrap();
        let g = build_cluster_graph(&inst, &pts);
        assert_eq!(g.dist.weight(1, 2), 0.0);
    }

    #[test]
    fn cluster_distance_never_exceeds_center_gap_plus_reach() {
        let inst = instance(
            vec![obj(20.0, 30.0, 1.0), obj(90.0, 40.0, 2.5), obj(50.0, 80.0, 4.0)],
            Point2::new(0.0, 0.0),
        );
        let pts = inst.generate_points().unwrap();
        let g = build_cluster_graph(&inst, &pts);
        for i in 0..3 {
            for j in i + 1..3 {
                let gap = inst.objects[i].position.distance(inst.objects[j].position);
                assert!(g.dist.weight(i + 1, j + 1) <= gap + 2.0 * inst.sensing.d_max + 1e-9);
            }
        }
    }

    #[test]
    fn mst_weight_of_hand_built_clearances() {
        // Start-A 10, Start-B 12, A-B 5: tree takes Start-A and A-B.
        let mut g = WeightedGraph::new(3);
        g.set(0, 1, 10.0);
        g.set(0, 2, 12.0);
        g.set(1, 2, 5.0);
        let (_, w) = mst(&g).unwrap();
        assert!((w - 15.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_is_permutation_invariant() {
        let a = obj(20.0, 30.0, 1.0);
        let b = obj(90.0, 40.0, 2.5);
        let c = obj(50.0, 80.0, 4.0);
        let start = Point2::new(0.0, 0.0);
        let lb1 = {
            let inst = instance(vec![a, b, c], start);
            lower_bound(&inst, &inst.generate_points().unwrap()).unwrap()
        };
        let lb2 = {
            let inst = instance(vec![c, a, b], start);
            lower_bound(&inst, &inst.generate_points().unwrap()).unwrap()
        };
        assert!((lb1 - lb2).abs() < 1e-9);
    }

    /// Refining the mesh can move the sampled minimum either way, but both
    /// stay within one mesh diagonal of the continuous clearance, so the
    /// fine bound can exceed the coarse one by at most that slack per edge.
    #[test]
    fn refinement_slack_is_bounded() {
        let objects =
            vec![obj(20.0, 30.0, 1.0), obj(90.0, 40.0, 2.5), obj(50.0, 80.0, 4.0), obj(140.0, 90.0, 5.5)];
        let start = Point2::new(0.0, 0.0);
        let coarse_inst = Instance::new(500.0, objects.clone(), start, spec_2_10_30(), 1.0, 0).unwrap();
        let fine_inst = Instance::new(500.0, objects, start, spec_2_10_30(), 0.25, 0).unwrap();
        let coarse_pts = coarse_inst.generate_points().unwrap();
        let fine_pts = fine_inst.generate_points().unwrap();
        let lb_coarse = lower_bound(&coarse_inst, &coarse_pts).unwrap();
        let lb_fine = lower_bound(&fine_inst, &fine_pts).unwrap();
        let n = 4.0;
        let slack = n * 2.0 * std::f64::consts::SQRT_2 * fine_pts.grid.delta;
        assert!(lb_fine <= lb_coarse + slack + 1e-9);
    }

    #[test]
    fn quality_bounds_sanity_for_band() {
        // The clearance bound is independent of q*, which lives in a band
        // strictly above zero for these specs.
        let b = quality_bounds(&spec_2_10_30());
        assert!(b.q_min_single > 0.0 && b.q_min_single < b.q_max_single);
    }
}
