//! Label-correcting dynamic program over a fixed visiting order.
//!
//! Objects are visited in the given order, but one physical stop may observe
//! a whole *run* of consecutive objects when it lies inside all of their
//! effective regions, so a tour can have fewer stops than objects. For every
//! (order position, candidate point) cell the program keeps the Pareto
//! frontier of `(path length, accumulated quality)` labels: shorter is
//! better, higher quality is better, and dominated labels are discarded. The
//! answer is the shortest closing label whose quality reaches `q*`.
//!
//! Lengths are either exact euclidean sums ([`LengthMode::Exact`]) or rounded
//! up to multiples of the mesh pitch ([`LengthMode::Rounded`]), which caps
//! every frontier at `ceil(n * (diameter + 2 d_max) / delta) + 1` labels at
//! the cost of at most `n * delta` extra reported length.

use crate::discretize::PointSet;
use crate::error::{Error, Result};
use crate::geometry::{can_observe, quality, Object, Point2, SensingSpec};
use crate::harness::Instance;

/// Absolute tolerance for label comparisons and the `q*` feasibility test.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    Exact,
    Rounded,
}

/// Stable coordinates of a label: stage 0 is the start, stage `s >= 1` holds
/// the points of the object at order position `s - 1`. Earlier stages are
/// frozen once built, so indices stay valid while later stages grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRef {
    pub stage: u32,
    pub point: u32,
    pub label: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct PathLabel {
    pub length: f64,
    pub quality: f64,
    pub pred: Option<LabelRef>,
}

/// Whether `a` renders `b` redundant: not longer and not worse in quality,
/// with equality read at [`DOMINANCE_TOL`]. A label dominates its twin.
pub fn dominates(a: &PathLabel, b: &PathLabel) -> bool {
    a.length <= b.length + DOMINANCE_TOL && a.quality >= b.quality - DOMINANCE_TOL
}

/// Pareto frontier kept sorted by length; qualities ascend in lockstep, so
/// every retained label is the best quality at its length or below.
#[derive(Debug, Clone, Default)]
pub struct ParetoSet {
    labels: Vec<PathLabel>,
}

impl ParetoSet {
    pub fn labels(&self) -> &[PathLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Insert unless dominated; evict members the candidate dominates.
    /// Returns whether the candidate was kept.
    pub fn insert(&mut self, cand: PathLabel) -> bool {
        let idx = self
            .labels
            .partition_point(|l| l.length <= cand.length + DOMINANCE_TOL);
        if idx > 0 && self.labels[idx - 1].quality >= cand.quality - DOMINANCE_TOL {
            return false;
        }
        let lo = self
            .labels
            .partition_point(|l| l.length < cand.length - DOMINANCE_TOL);
        let mut hi = lo;
        while hi < self.labels.len() && self.labels[hi].quality <= cand.quality + DOMINANCE_TOL {
            hi += 1;
        }
        self.labels.splice(lo..hi, [cand]);
        true
    }
}

/// Summed quality of every object in `run` seen from `p`, or `None` when any
/// of them is unobservable from there.
pub fn run_quality(p: Point2, run: &[Object], s: &SensingSpec) -> Option<f64> {
    let mut total = 0.0;
    for o in run {
        if !can_observe(o, p, s) {
            return None;
        }
        total += quality(o, p, s);
    }
    Some(total)
}

/// One physical stop and the objects it observes (original indices, in order
/// position sequence).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanStop {
    pub waypoint: Point2,
    pub observes: Vec<usize>,
}

/// A feasible closed tour: start, stops in sequence, back to start.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub total_length: f64,
    pub total_quality: f64,
    pub stops: Vec<PlanStop>,
    pub order_used: Vec<usize>,
}

impl PlanResult {
    /// Re-derive length and quality from the stop geometry alone.
    pub fn recompute(&self, instance: &Instance) -> (f64, f64) {
        let mut length = 0.0;
        let mut q = 0.0;
        let mut prev = instance.start;
        for stop in &self.stops {
            length += prev.distance(stop.waypoint);
            prev = stop.waypoint;
            for &oi in &stop.observes {
                q += quality(&instance.objects[oi], stop.waypoint, &instance.sensing);
            }
        }
        if !self.stops.is_empty() {
            length += prev.distance(instance.start);
        }
        (length, q)
    }

    /// Consistency check: stops partition the order into consecutive runs and
    /// the stored totals match the geometry (length only in exact mode, where
    /// no rounding was applied).
    pub fn verify(&self, instance: &Instance, mode: LengthMode) -> Result<()> {
        let visited: Vec<usize> = self.stops.iter().flat_map(|s| s.observes.clone()).collect();
        if visited != self.order_used {
            return Err(Error::domain("plan stops do not cover the order in sequence"));
        }
        let (len, q) = self.recompute(instance);
        if (q - self.total_quality).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "plan quality mismatch: stored {} recomputed {}",
                self.total_quality, q
            )));
        }
        match mode {
            LengthMode::Exact => {
                if (len - self.total_length).abs() > 1e-9 {
                    return Err(Error::domain(format!(
                        "plan length mismatch: stored {} recomputed {}",
                        self.total_length, len
                    )));
                }
            }
            LengthMode::Rounded => {
                // Rounded lengths only ever grow, by less than delta per hop.
                if self.total_length < len - 1e-9 {
                    return Err(Error::domain("rounded plan shorter than its geometry"));
                }
            }
        }
        Ok(())
    }
}

/// Filled DP table; read-only once constructed.
#[derive(Debug)]
pub struct DpTable {
    stages: Vec<Vec<ParetoSet>>,
}

impl DpTable {
    pub fn stage_sets(&self, stage: usize) -> &[ParetoSet] {
        &self.stages[stage]
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn label(&self, r: LabelRef) -> &PathLabel {
        &self.stages[r.stage as usize][r.point as usize].labels[r.label as usize]
    }

    /// Largest frontier across all cells.
    pub fn max_set_len(&self) -> usize {
        self.stages
            .iter()
            .flat_map(|s| s.iter().map(ParetoSet::len))
            .max()
            .unwrap_or(0)
    }
}

/// DP over one instance + visiting order; the table is filled once and can
/// be closed against any number of `q*` thresholds.
pub struct DpSolver<'a> {
    instance: &'a Instance,
    points: &'a PointSet,
    order: Vec<usize>,
    mode: LengthMode,
    table: DpTable,
}

impl<'a> DpSolver<'a> {
    pub fn new(
        instance: &'a Instance,
        points: &'a PointSet,
        order: &[usize],
        mode: LengthMode,
    ) -> Result<Self> {
        let n = instance.objects.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::domain(format!(
                "order has {} entries for {} objects",
                order.len(),
                n
            )));
        }
        for &o in order {
            if o >= n || seen[o] {
                return Err(Error::domain("order is not a permutation of the objects"));
            }
            seen[o] = true;
        }

        let mut solver = DpSolver {
            instance,
            points,
            order: order.to_vec(),
            mode,
            table: DpTable { stages: Vec::with_capacity(n + 1) },
        };
        solver.fill();
        Ok(solver)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn table(&self) -> &DpTable {
        &self.table
    }

    fn rounded(&self, length: f64) -> f64 {
        match self.mode {
            LengthMode::Exact => length,
            LengthMode::Rounded => {
                let delta = self.points.grid.delta;
                (length / delta).ceil() * delta
            }
        }
    }

    fn fill(&mut self) {
        let inst = self.instance;
        let n = self.order.len();

        let mut start_set = ParetoSet::default();
        start_set.insert(PathLabel { length: 0.0, quality: 0.0, pred: None });
        self.table.stages.push(vec![start_set]);

        for stage in 1..=n {
            let own_pts = self.points.of_object(self.order[stage - 1]);
            let mut sets = Vec::with_capacity(own_pts.len());
            for p in own_pts {
                let mut set = ParetoSet::default();
                let mut run_q = 0.0;
                // Extend from every earlier stage; the stop covers the run of
                // objects at order positions src..stage. Walking src downward
                // grows the run one object at a time and stops at the first
                // unobservable one, which also rules out every longer run.
                for src in (0..stage).rev() {
                    let added = &inst.objects[self.order[src]];
                    if !can_observe(added, p.position, &inst.sensing) {
                        break;
                    }
                    run_q += quality(added, p.position, &inst.sensing);
                    if src == 0 {
                        let d = inst.start.distance(p.position);
                        set.insert(PathLabel {
                            length: self.rounded(d),
                            quality: run_q,
                            pred: Some(LabelRef { stage: 0, point: 0, label: 0 }),
                        });
                    } else {
                        let src_pts = self.points.of_object(self.order[src - 1]);
                        for (pj, sp) in src_pts.iter().enumerate() {
                            let d = sp.position.distance(p.position);
                            for (li, lab) in
                                self.table.stages[src][pj].labels().iter().enumerate()
                            {
                                set.insert(PathLabel {
                                    length: self.rounded(lab.length + d),
                                    quality: lab.quality + run_q,
                                    pred: Some(LabelRef {
                                        stage: src as u32,
                                        point: pj as u32,
                                        label: li as u32,
                                    }),
                                });
                            }
                        }
                    }
                }
                sets.push(set);
            }
            self.table.stages.push(sets);
        }
    }

    /// Shortest feasible closed tour for the given threshold, or `None` when
    /// no closing label reaches it. Thresholds outside the attainable band
    /// are rejected outright.
    pub fn solve(&self, q_star: f64) -> Result<Option<PlanResult>> {
        if !q_star.is_finite() {
            return Err(Error::domain("q* must be finite"));
        }
        let (lo, hi) = self.instance.q_star_band();
        if q_star < lo - DOMINANCE_TOL || q_star > hi + DOMINANCE_TOL {
            return Err(Error::QualityBand { q_star, lo, hi });
        }

        let n = self.order.len();
        let last_pts = self.points.of_object(self.order[n - 1]);
        let mut cands: Vec<(f64, f64, LabelRef)> = Vec::new();
        for (pi, p) in last_pts.iter().enumerate() {
            let closing = p.position.distance(self.instance.start);
            for (li, lab) in self.table.stages[n][pi].labels().iter().enumerate() {
                if lab.quality >= q_star - DOMINANCE_TOL {
                    cands.push((
                        lab.length + closing,
                        lab.quality,
                        LabelRef { stage: n as u32, point: pi as u32, label: li as u32 },
                    ));
                }
            }
        }
        if cands.is_empty() {
            return Ok(None);
        }

        let best_len = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        cands.retain(|c| c.0 <= best_len + DOMINANCE_TOL);
        let best_q = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        cands.retain(|c| c.1 >= best_q - DOMINANCE_TOL);

        // Remaining ties: smallest stop sequence, compared lexicographically.
        let mut best: Option<(Vec<PlanStop>, f64, f64)> = None;
        for (total, q, tip) in cands {
            let stops = self.reconstruct(tip);
            let better = match &best {
                None => true,
                Some((cur, _, _)) => stops_lt(&stops, cur),
            };
            if better {
                best = Some((stops, total, q));
            }
        }
        let (stops, total_length, total_quality) = best.expect("at least one candidate");
        Ok(Some(PlanResult {
            total_length,
            total_quality,
            stops,
            order_used: self.order.clone(),
        }))
    }

    /// Walk backpointers from a label to the start, materializing stops.
    pub fn reconstruct(&self, tip: LabelRef) -> Vec<PlanStop> {
        let mut rev = Vec::new();
        let mut cur = tip;
        while cur.stage > 0 {
            let lab = self.table.label(cur);
            let pred = lab.pred.expect("non-start label must carry a predecessor");
            let stage = cur.stage as usize;
            let waypoint =
                self.points.of_object(self.order[stage - 1])[cur.point as usize].position;
            let observes = self.order[pred.stage as usize..stage].to_vec();
            rev.push(PlanStop { waypoint, observes });
            cur = pred;
        }
        rev.reverse();
        rev
    }
}

fn stops_lt(a: &[PlanStop], b: &[PlanStop]) -> bool {
    let key = |s: &PlanStop| (s.waypoint.x, s.waypoint.y);
    let ka: Vec<_> = a.iter().map(key).collect();
    let kb: Vec<_> = b.iter().map(key).collect();
    for (x, y) in ka.iter().zip(&kb) {
        match x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    ka.len() < kb.len()
}

/// One-shot convenience: fill the table for `order` and close it at `q_star`.
pub fn dp_solve(
    instance: &Instance,
    points: &PointSet,
    order: &[usize],
    q_star: f64,
    mode: LengthMode,
) -> Result<Option<PlanResult>> {
    DpSolver::new(instance, points, order, mode)?.solve(q_star)
}
