//! Visiting-order construction: five heuristics plus exhaustive enumeration.
//!
//! Every method returns the order the planner should refine; the sampling
//! methods also return the concrete seed path so improvement can be measured
//! against it.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discretize::PointSet;
use crate::error::{Error, Result};
use crate::geometry::{can_observe, quality, Point2};
use crate::harness::Instance;
use crate::lower_bound::build_cluster_graph;
use crate::pareto::{DpSolver, LengthMode, PlanResult, PlanStop};
use crate::tsp::{tsp_tour, WeightedGraph};

/// Hard cap for exhaustive order enumeration (8! / 2 = 20160 classes).
pub const BRUTE_MAX_N: usize = 8;

const IMPROVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMethod {
    Rs,
    Npf,
    Gtsp,
    Tspo,
    Lbtsp,
    Brute,
}

impl OrderMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            OrderMethod::Rs => "RS",
            OrderMethod::Npf => "NPF",
            OrderMethod::Gtsp => "GTSP",
            OrderMethod::Tspo => "TSPO",
            OrderMethod::Lbtsp => "LBTSP",
            OrderMethod::Brute => "BRUTE",
        }
    }

    pub fn all_heuristics() -> [OrderMethod; 5] {
        [
            OrderMethod::Rs,
            OrderMethod::Npf,
            OrderMethod::Gtsp,
            OrderMethod::Tspo,
            OrderMethod::Lbtsp,
        ]
    }
}

impl std::fmt::Display for OrderMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for OrderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RS" => Ok(OrderMethod::Rs),
            "NPF" => Ok(OrderMethod::Npf),
            "GTSP" => Ok(OrderMethod::Gtsp),
            "TSPO" => Ok(OrderMethod::Tspo),
            "LBTSP" => Ok(OrderMethod::Lbtsp),
            "BRUTE" => Ok(OrderMethod::Brute),
            _ => Err(Error::domain(format!(
                "unknown method {s:?}; expected RS, NPF, GTSP, TSPO, LBTSP, or BRUTE"
            ))),
        }
    }
}

/// A permutation of object indices for the planner to refine.
#[derive(Debug, Clone)]
pub struct VisitOrder {
    pub method: OrderMethod,
    pub sequence: Vec<usize>,
}

/// Concrete closed path produced while deriving an order.
#[derive(Debug, Clone)]
pub struct InitialPath {
    pub stops: Vec<PlanStop>,
    pub length: f64,
    pub quality: f64,
}

impl InitialPath {
    fn from_stops(instance: &Instance, stops: Vec<PlanStop>) -> InitialPath {
        let mut length = 0.0;
        let mut prev = instance.start;
        for s in &stops {
            length += prev.distance(s.waypoint);
            prev = s.waypoint;
        }
        length += prev.distance(instance.start);
        let q = stops
            .iter()
            .flat_map(|s| s.observes.iter().map(|&o| quality(&instance.objects[o], s.waypoint, &instance.sensing)))
            .sum();
        InitialPath { stops, length, quality: q }
    }
}

/// Random sampling: one uniformly drawn candidate point per object, toured in
/// tour-construction order.
pub fn rs_order(
    instance: &Instance,
    points: &PointSet,
    seed: u64,
) -> Result<(VisitOrder, InitialPath)> {
    let n = instance.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = (0..n)
        .map(|i| rng.random_range(0..points.of_object(i).len()))
        .collect();
    let mut positions = vec![instance.start];
    positions.extend((0..n).map(|i| points.of_object(i)[picks[i]].position));
    let g = WeightedGraph::from_points(&positions);
    let tour = tsp_tour(&g, 0)?;
    let sequence: Vec<usize> = tour[1..].iter().map(|&v| v - 1).collect();
    let stops = sequence
        .iter()
        .map(|&obj| PlanStop {
            waypoint: points.of_object(obj)[picks[obj]].position,
            observes: vec![obj],
        })
        .collect();
    let path = InitialPath::from_stops(instance, stops);
    Ok((VisitOrder { method: OrderMethod::Rs, sequence }, path))
}

/// Nearest point first: repeatedly walk to the closest candidate point of any
/// unobserved object, crossing off everything visible from there.
///
/// Each stop's run lists the incidentally covered objects first and the
/// point's owner last, so refining the induced order can reproduce this exact
/// path.
pub fn npf_order(instance: &Instance, points: &PointSet) -> Result<(VisitOrder, InitialPath)> {
    let n = instance.n();
    let mut remaining = vec![true; n];
    let mut cur = instance.start;
    let mut sequence = Vec::with_capacity(n);
    let mut stops = Vec::new();
    while remaining.iter().any(|&r| r) {
        let mut best: Option<(f64, usize, usize)> = None;
        for obj in 0..n {
            if !remaining[obj] {
                continue;
            }
            for (pi, p) in points.of_object(obj).iter().enumerate() {
                let d = cur.distance(p.position);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, obj, pi));
                }
            }
        }
        let (_, owner, pi) = best.expect("remaining objects have points");
        let wp = points.of_object(owner)[pi].position;
        let mut run: Vec<usize> = (0..n)
            .filter(|&o| {
                o != owner && remaining[o] && can_observe(&instance.objects[o], wp, &instance.sensing)
            })
            .collect();
        run.push(owner);
        for &o in &run {
            remaining[o] = false;
        }
        sequence.extend(&run);
        stops.push(PlanStop { waypoint: wp, observes: run });
        cur = wp;
    }
    let path = InitialPath::from_stops(instance, stops);
    Ok((VisitOrder { method: OrderMethod::Npf, sequence }, path))
}

/// Zone tour: greedy nearest entry point per object, 2-opt on the zone order,
/// then per-zone point re-selection swept to a fixed point.
pub fn gtsp_order(instance: &Instance, points: &PointSet) -> Result<(VisitOrder, InitialPath)> {
    let n = instance.n();
    let start = instance.start;
    let mut sel = vec![0usize; n];
    let mut zord: Vec<usize> = Vec::with_capacity(n);
    let mut chosen = vec![false; n];
    let mut cur = start;
    for _ in 0..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for obj in 0..n {
            if chosen[obj] {
                continue;
            }
            for (pi, p) in points.of_object(obj).iter().enumerate() {
                let d = cur.distance(p.position);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, obj, pi));
                }
            }
        }
        let (_, obj, pi) = best.expect("unchosen objects have points");
        chosen[obj] = true;
        sel[obj] = pi;
        zord.push(obj);
        cur = points.of_object(obj)[pi].position;
    }

    let pos = |zord: &[usize], sel: &[usize], k: isize| -> Point2 {
        if k < 0 || k as usize >= zord.len() {
            start
        } else {
            let obj = zord[k as usize];
            points.of_object(obj)[sel[obj]].position
        }
    };

    // 2-opt on the zone order with the entry points held fixed.
    for _ in 0..50 {
        let mut improved = false;
        'scan: for i in 0..n {
            for j in i + 1..n {
                let (i, j) = (i as isize, j as isize);
                let delta = pos(&zord, &sel, i - 1).distance(pos(&zord, &sel, j))
                    + pos(&zord, &sel, i).distance(pos(&zord, &sel, j + 1))
                    - pos(&zord, &sel, i - 1).distance(pos(&zord, &sel, i))
                    - pos(&zord, &sel, j).distance(pos(&zord, &sel, j + 1));
                if delta < -IMPROVE_TOL {
                    zord[i as usize..=j as usize].reverse();
                    improved = true;
                    break 'scan;
                }
            }
        }
        if !improved {
            break;
        }
    }

    // Re-pick each zone's point against its fixed neighbours until stable.
    for _ in 0..50 {
        let mut changed = false;
        for k in 0..n {
            let obj = zord[k];
            let prev = pos(&zord, &sel, k as isize - 1);
            let next = pos(&zord, &sel, k as isize + 1);
            let cur_cost = prev.distance(pos(&zord, &sel, k as isize))
                + pos(&zord, &sel, k as isize).distance(next);
            let mut best = (cur_cost, sel[obj]);
            for (pi, p) in points.of_object(obj).iter().enumerate() {
                let c = prev.distance(p.position) + p.position.distance(next);
                if c < best.0 - IMPROVE_TOL {
                    best = (c, pi);
                }
            }
            if best.1 != sel[obj] {
                sel[obj] = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let stops = zord
        .iter()
        .map(|&obj| PlanStop {
            waypoint: points.of_object(obj)[sel[obj]].position,
            observes: vec![obj],
        })
        .collect();
    let path = InitialPath::from_stops(instance, stops);
    Ok((VisitOrder { method: OrderMethod::Gtsp, sequence: zord }, path))
}

/// Tour over the object positions themselves.
pub fn tspo_order(instance: &Instance) -> Result<VisitOrder> {
    let mut positions = vec![instance.start];
    positions.extend(instance.objects.iter().map(|o| o.position));
    let g = WeightedGraph::from_points(&positions);
    let tour = tsp_tour(&g, 0)?;
    Ok(VisitOrder {
        method: OrderMethod::Tspo,
        sequence: tour[1..].iter().map(|&v| v - 1).collect(),
    })
}

/// Tour over the clearance cluster graph, so overlapping regions cost zero to
/// chain together.
pub fn lbtsp_order(instance: &Instance, points: &PointSet) -> Result<VisitOrder> {
    let g = build_cluster_graph(instance, points);
    let tour = tsp_tour(&g.dist, 0)?;
    Ok(VisitOrder {
        method: OrderMethod::Lbtsp,
        sequence: tour[1..].iter().map(|&v| v - 1).collect(),
    })
}

/// All visiting orders up to reversal: keep the representative whose first
/// element is smaller than its last. `n!/2` classes, capped at n = 8.
pub fn enumerate_orders(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > BRUTE_MAX_N {
        return Err(Error::domain(format!(
            "exhaustive search is capped at {BRUTE_MAX_N} objects, got {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![vec![0]]);
    }
    Ok((0..n)
        .permutations(n)
        .filter(|p| p[0] < p[n - 1])
        .collect())
}

fn plan_is_better(a: &PlanResult, b: &PlanResult) -> bool {
    match a.total_length.total_cmp(&b.total_length) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.order_used < b.order_used,
    }
}

/// Exhaustive search over order classes, refining each direction of each
/// class and keeping the best plan per threshold.
pub fn brute_solve(
    instance: &Instance,
    points: &PointSet,
    q_stars: &[f64],
    mode: LengthMode,
) -> Result<Vec<Option<PlanResult>>> {
    let classes = enumerate_orders(instance.n())?;
    let per_class: Vec<Vec<Option<PlanResult>>> = classes
        .par_iter()
        .map(|class| {
            let mut best: Vec<Option<PlanResult>> = vec![None; q_stars.len()];
            let mut reversed = class.clone();
            reversed.reverse();
            for dir in [class, &reversed] {
                let solver = DpSolver::new(instance, points, dir, mode)?;
                for (qi, &q) in q_stars.iter().enumerate() {
                    if let Some(plan) = solver.solve(q)? {
                        if best[qi].as_ref().map_or(true, |b| plan_is_better(&plan, b)) {
                            best[qi] = Some(plan);
                        }
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Vec<Option<PlanResult>> = vec![None; q_stars.len()];
    for class_best in per_class {
        for (qi, plan) in class_best.into_iter().enumerate() {
            if let Some(p) = plan {
                if best[qi].as_ref().map_or(true, |b| plan_is_better(&p, b)) {
                    best[qi] = Some(p);
                }
            }
        }
    }
    Ok(best)
}
