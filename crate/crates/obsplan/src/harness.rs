//! Problem instances, wire formats, and reproducible experiment sweeps.
//!
//! Degrees appear only in the JSON wire structs; everything in memory is
//! radians. Records are deterministic given `(seed, config)` except for the
//! measured `dp_ms` wall-clock column.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{generate_observation_points, PointSet};
use crate::error::{Error, Result};
use crate::geometry::{quality_bounds, Object, Point2, SensingSpec};
use crate::lower_bound::lower_bound;
use crate::orders::{
    brute_solve, gtsp_order, lbtsp_order, npf_order, rs_order, tspo_order, InitialPath,
    OrderMethod, VisitOrder,
};
use crate::pareto::{DpSolver, LengthMode, PlanResult, DOMINANCE_TOL};
use crate::tsp::{tour_length, tsp_tour, WeightedGraph};

/// A complete planning problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub map_size: f64,
    pub objects: Vec<Object>,
    pub start: Point2,
    pub sensing: SensingSpec,
    pub epsilon: f64,
    pub seed: u64,
}

impl Instance {
    pub fn new(
        map_size: f64,
        objects: Vec<Object>,
        start: Point2,
        sensing: SensingSpec,
        epsilon: f64,
        seed: u64,
    ) -> Result<Self> {
        let inst = Instance { map_size, objects, start, sensing, epsilon, seed };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.map_size.is_finite() && self.map_size > 0.0) {
            return Err(Error::domain(format!("map_size must be > 0, got {}", self.map_size)));
        }
        if self.objects.len() < 2 {
            return Err(Error::domain("instance needs at least 2 objects"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            let p = o.position;
            if !(0.0..=self.map_size).contains(&p.x) || !(0.0..=self.map_size).contains(&p.y) {
                return Err(Error::domain(format!(
                    "object {i} at ({}, {}) outside [0, {}]^2",
                    p.x, p.y, self.map_size
                )));
            }
        }
        if !(self.start.x.is_finite() && self.start.y.is_finite()) {
            return Err(Error::domain("start must be finite"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::domain(format!("epsilon must be in (0, 1], got {}", self.epsilon)));
        }
        // Re-run the parameter checks in case fields were set directly.
        SensingSpec::with_constants(
            self.sensing.d_min,
            self.sensing.d_max,
            self.sensing.theta,
            self.sensing.a,
            self.sensing.b,
        )?;
        for o in &self.objects {
            Object::new(o.position, o.facing, o.weight)?;
        }
        Ok(())
    }

    /// Mesh every object's effective region.
    pub fn generate_points(&self) -> Result<PointSet> {
        generate_observation_points(&self.objects, &self.sensing, self.epsilon)
    }

    /// Attainable gross-quality band `[sum w_i q_min, sum w_i q_max]`.
    pub fn q_star_band(&self) -> (f64, f64) {
        let b = quality_bounds(&self.sensing);
        let wsum: f64 = self.objects.iter().map(|o| o.weight).sum();
        (wsum * b.q_min_single, wsum * b.q_max_single)
    }

    pub fn load(path: &Path) -> Result<Instance> {
        let text = std::fs::read_to_string(path)?;
        Instance::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&InstanceFile::from_instance(self))?;
        text.push('\n');
        Ok(text)
    }
}

fn default_a() -> f64 {
    1.0
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
struct SensingFile {
    d_min: f64,
    d_max: f64,
    theta_deg: f64,
    #[serde(default = "default_a")]
    a: f64,
    #[serde(default)]
    b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectFile {
    x: f64,
    y: f64,
    facing_deg: f64,
    #[serde(default = "default_weight")]
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    map_size: f64,
    start: [f64; 2],
    epsilon: f64,
    sensing: SensingFile,
    objects: Vec<ObjectFile>,
    seed: u64,
}

impl InstanceFile {
    fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            map_size: inst.map_size,
            start: [inst.start.x, inst.start.y],
            epsilon: inst.epsilon,
            sensing: SensingFile {
                d_min: inst.sensing.d_min,
                d_max: inst.sensing.d_max,
                theta_deg: inst.sensing.theta.to_degrees(),
                a: inst.sensing.a,
                b: inst.sensing.b,
            },
            objects: inst
                .objects
                .iter()
                .map(|o| ObjectFile {
                    x: o.position.x,
                    y: o.position.y,
                    facing_deg: o.facing.to_degrees(),
                    weight: o.weight,
                })
                .collect(),
            seed: inst.seed,
        }
    }

    fn into_instance(self) -> Result<Instance> {
        let sensing = SensingSpec::with_constants(
            self.sensing.d_min,
            self.sensing.d_max,
            self.sensing.theta_deg.to_radians(),
            self.sensing.a,
            self.sensing.b,
        )?;
        let objects = self
            .objects
            .into_iter()
            .map(|o| Object::new(Point2::new(o.x, o.y), o.facing_deg.to_radians(), o.weight))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(
            self.map_size,
            objects,
            Point2::new(self.start[0], self.start[1]),
            sensing,
            self.epsilon,
            self.seed,
        )
    }
}

/// Uniform random instance: positions in `[0, map]^2`, facings in `[0, 2pi)`.
/// Draw order per object is x, y, facing, so layouts are seed-stable.
pub fn gen_instance(
    n: usize,
    map_size: f64,
    sensing: SensingSpec,
    epsilon: f64,
    seed: u64,
    start: Point2,
) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objects = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(0.0..map_size);
        let y = rng.random_range(0.0..map_size);
        let facing = rng.random_range(0.0..std::f64::consts::TAU);
        objects.push(Object::new(Point2::new(x, y), facing, 1.0)?);
    }
    Instance::new(map_size, objects, start, sensing, epsilon, seed)
}

/// Best attainable gross quality on the mesh: the sum over objects of their
/// best candidate point.
pub fn q_star_base(points: &PointSet) -> f64 {
    (0..points.object_count())
        .map(|i| {
            points
                .of_object(i)
                .iter()
                .map(|p| p.own_quality)
                .fold(0.0f64, f64::max)
        })
        .sum()
}

/// Threshold from a fraction of the best attainable gross quality.
pub fn q_star_from_fraction(points: &PointSet, fraction: f64) -> Result<f64> {
    if !(fraction.is_finite() && fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::domain(format!("q* fraction must be in (0, 1], got {fraction}")));
    }
    Ok(fraction * q_star_base(points))
}

/// One CSV row of an experiment sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub n: usize,
    pub d_max: f64,
    pub epsilon: f64,
    pub method: String,
    pub q_star_frac: f64,
    pub length_m: Option<f64>,
    pub quality: Option<f64>,
    pub lb_m: f64,
    pub ratio_lb: Option<f64>,
    pub ratio_brute: Option<f64>,
    pub feasible: bool,
    pub dp_ms: f64,
}

/// What to run for one instance.
#[derive(Debug, Clone)]
pub struct CaseConfig {
    pub methods: Vec<OrderMethod>,
    pub q_star_fractions: Vec<f64>,
    pub mode: LengthMode,
}

impl Default for CaseConfig {
    fn default() -> Self {
        CaseConfig {
            methods: vec![
                OrderMethod::Rs,
                OrderMethod::Npf,
                OrderMethod::Gtsp,
                OrderMethod::Tspo,
                OrderMethod::Lbtsp,
            ],
            q_star_fractions: vec![0.3, 0.5, 0.7, 0.9],
            mode: LengthMode::Exact,
        }
    }
}

fn ratio(len: f64, base: f64) -> Option<f64> {
    (base > 1e-12).then(|| len / base)
}

/// Run every configured method on one instance, emitting one record per
/// `(method, q*)` plus initial-path and best-quality baselines.
pub fn run_case(instance: &Instance, cfg: &CaseConfig) -> Result<Vec<ExperimentRecord>> {
    instance.validate()?;
    let points = instance.generate_points()?;
    let lb = lower_bound(instance, &points)?;
    let base = q_star_base(&points);
    let q_stars: Vec<f64> = cfg
        .q_star_fractions
        .iter()
        .map(|&f| q_star_from_fraction(&points, f))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let record = |method: &str,
                  frac: f64,
                  plan: Option<(f64, f64)>,
                  feasible: bool,
                  dp_ms: f64,
                  brute_len: Option<f64>| {
        let (length_m, q) = match plan {
            Some((l, q)) => (Some(l), Some(q)),
            None => (None, None),
        };
        ExperimentRecord {
            seed: instance.seed,
            n: instance.n(),
            d_max: instance.sensing.d_max,
            epsilon: instance.epsilon,
            method: method.to_string(),
            q_star_frac: frac,
            length_m,
            quality: q,
            lb_m: lb,
            ratio_lb: length_m.and_then(|l| ratio(l, lb)),
            ratio_brute: match (length_m, brute_len) {
                (Some(l), Some(b)) => ratio(l, b),
                _ => None,
            },
            feasible,
            dp_ms,
        }
    };

    let mut brute_len: Vec<Option<f64>> = vec![None; q_stars.len()];
    if cfg.methods.contains(&OrderMethod::Brute) {
        let t = Instant::now();
        let plans = brute_solve(instance, &points, &q_stars, cfg.mode)?;
        let ms = t.elapsed().as_secs_f64() * 1e3;
        for (qi, plan) in plans.iter().enumerate() {
            brute_len[qi] = plan.as_ref().map(|p| p.total_length);
            records.push(record(
                "BRUTE",
                cfg.q_star_fractions[qi],
                plan.as_ref().map(|p| (p.total_length, p.total_quality)),
                plan.is_some(),
                ms,
                brute_len[qi],
            ));
        }
    }

    for method in &cfg.methods {
        if *method == OrderMethod::Brute {
            continue;
        }
        let (order, initial): (VisitOrder, Option<InitialPath>) = match method {
            OrderMethod::Rs => {
                let (o, p) = rs_order(instance, &points, default_rs_seed(instance.seed))?;
                (o, Some(p))
            }
            OrderMethod::Npf => {
                let (o, p) = npf_order(instance, &points)?;
                (o, Some(p))
            }
            OrderMethod::Gtsp => {
                let (o, p) = gtsp_order(instance, &points)?;
                (o, Some(p))
            }
            OrderMethod::Tspo => (tspo_order(instance)?, None),
            OrderMethod::Lbtsp => (lbtsp_order(instance, &points)?, None),
            OrderMethod::Brute => unreachable!(),
        };

        let t = Instant::now();
        let solver = DpSolver::new(instance, &points, &order.sequence, cfg.mode)?;
        let fill_ms = t.elapsed().as_secs_f64() * 1e3;
        for (qi, &q) in q_stars.iter().enumerate() {
            let plan = solver.solve(q)?;
            if let Some(p) = &plan {
                debug_assert!(p.total_length >= lb - 1e-9, "tour beats its lower bound");
            }
            records.push(record(
                method.tag(),
                cfg.q_star_fractions[qi],
                plan.as_ref().map(|p| (p.total_length, p.total_quality)),
                plan.is_some(),
                fill_ms,
                brute_len[qi],
            ));
        }

        if let Some(init) = initial {
            let tag = format!("{}_init", method.tag());
            for (qi, &q) in q_stars.iter().enumerate() {
                records.push(record(
                    &tag,
                    cfg.q_star_fractions[qi],
                    Some((init.length, init.quality)),
                    init.quality >= q - DOMINANCE_TOL,
                    0.0,
                    brute_len[qi],
                ));
            }
        }
    }

    // Highest-quality baseline: tour the best candidate point of every object.
    let best_pts: Vec<Point2> = (0..instance.n())
        .map(|i| {
            points
                .of_object(i)
                .iter()
                .max_by(|a, b| a.own_quality.total_cmp(&b.own_quality))
                .expect("non-empty point set")
                .position
        })
        .collect();
    let mut all = vec![instance.start];
    all.extend(&best_pts);
    let g = WeightedGraph::from_points(&all);
    let tour = tsp_tour(&g, 0)?;
    let maxq_len = tour_length(&g, &tour);
    for (qi, &q) in q_stars.iter().enumerate() {
        records.push(record(
            "MaxQ",
            cfg.q_star_fractions[qi],
            Some((maxq_len, base)),
            base >= q - DOMINANCE_TOL,
            0.0,
            brute_len[qi],
        ));
    }

    Ok(records)
}

/// Decouple the random-sampling stream from the layout stream.
pub fn default_rs_seed(seed: u64) -> u64 {
    seed ^ 0x52535f53
}

/// A sweep over `n x d_max x cases`; cells share case seeds so comparisons
/// are paired.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_values: Vec<usize>,
    pub d_max_values: Vec<f64>,
    pub cases: usize,
    pub map_size: f64,
    pub d_min: f64,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub base_seed: u64,
    pub start: Point2,
    pub case: CaseConfig,
    /// Include exhaustive order search for cells with `n <= brute_max_n`.
    pub brute_max_n: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_values: vec![3, 4, 5],
            d_max_values: vec![10.0],
            cases: 50,
            map_size: 200.0,
            d_min: 2.0,
            theta: 30f64.to_radians(),
            a: 1.0,
            b: 0.0,
            epsilon: 0.5,
            base_seed: 1,
            start: Point2::new(0.0, 0.0),
            case: CaseConfig::default(),
            brute_max_n: 5,
        }
    }
}

/// Run the whole sweep, parallel over cases, with a deterministic record
/// order (cells in config order, cases by seed).
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<ExperimentRecord>> {
    let mut cells = Vec::new();
    for &n in &cfg.n_values {
        for &d_max in &cfg.d_max_values {
            for case in 0..cfg.cases {
                cells.push((n, d_max, cfg.base_seed + case as u64));
            }
        }
    }
    let batches: Vec<Vec<ExperimentRecord>> = cells
        .par_iter()
        .map(|&(n, d_max, seed)| {
            let sensing = SensingSpec::with_constants(cfg.d_min, d_max, cfg.theta, cfg.a, cfg.b)?;
            let instance = gen_instance(n, cfg.map_size, sensing, cfg.epsilon, seed, cfg.start)?;
            let mut case = cfg.case.clone();
            if n <= cfg.brute_max_n && !case.methods.contains(&OrderMethod::Brute) {
                case.methods.insert(0, OrderMethod::Brute);
            } else if n > cfg.brute_max_n {
                case.methods.retain(|m| *m != OrderMethod::Brute);
            }
            run_case(&instance, &case)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().flatten().collect())
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Aggregates per `(n, d_max, method, q*)` group.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub d_max: f64,
    pub method: String,
    pub q_star_frac: f64,
    pub cases: usize,
    pub feasible_pct: f64,
    pub mean_ratio_lb: Option<f64>,
    pub median_ratio_lb: Option<f64>,
    pub mean_ratio_brute: Option<f64>,
    pub median_ratio_brute: Option<f64>,
    /// For DP rows seeded by an initial path: mean of
    /// `(initial - dp) / initial * 100` over cases whose initial path was
    /// already feasible.
    pub mean_reduction_pct: Option<f64>,
    pub mean_dp_ms: f64,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

type GroupKey = (usize, u64, String, u64);

fn group_key(r: &ExperimentRecord) -> GroupKey {
    (r.n, r.d_max.to_bits(), r.method.clone(), r.q_star_frac.to_bits())
}

pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_key(r)).or_default().push(r);
    }

    // Pair DP rows with their seed paths for the reduction statistic.
    let mut reductions: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
    for r in records {
        let Some(base_method) = r.method.strip_suffix("_init") else { continue };
        if !r.feasible {
            continue;
        }
        let (Some(init_len), true) = (r.length_m, r.length_m.is_some()) else { continue };
        let dp_key: GroupKey =
            (r.n, r.d_max.to_bits(), base_method.to_string(), r.q_star_frac.to_bits());
        if let Some(dp) = groups.get(&dp_key).and_then(|rows| {
            rows.iter().find(|c| c.seed == r.seed && c.epsilon == r.epsilon && c.feasible)
        }) {
            if let Some(dp_len) = dp.length_m {
                if init_len > 1e-12 {
                    reductions
                        .entry(dp_key.clone())
                        .or_default()
                        .push((init_len - dp_len) / init_len * 100.0);
                }
            }
        }
    }

    groups
        .iter()
        .map(|(key, rows)| {
            let feas: Vec<&&ExperimentRecord> = rows.iter().filter(|r| r.feasible).collect();
            let rl: Vec<f64> = feas.iter().filter_map(|r| r.ratio_lb).collect();
            let rb: Vec<f64> = feas.iter().filter_map(|r| r.ratio_brute).collect();
            SummaryRow {
                n: key.0,
                d_max: f64::from_bits(key.1),
                method: key.2.clone(),
                q_star_frac: f64::from_bits(key.3),
                cases: rows.len(),
                feasible_pct: 100.0 * feas.len() as f64 / rows.len() as f64,
                mean_ratio_lb: mean(&rl),
                median_ratio_lb: median(&rl),
                mean_ratio_brute: mean(&rb),
                median_ratio_brute: median(&rb),
                mean_reduction_pct: reductions.get(key).and_then(|v| mean(v)),
                mean_dp_ms: mean(
                    &rows.iter().map(|r| r.dp_ms).collect::<Vec<_>>(),
                )
                .unwrap_or(0.0),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Plan wire format. An infeasible outcome keeps the attempted order with
/// zeroed totals and no stops.
#[derive(Debug, Serialize, Deserialize)]
pub struct PlanFile {
    pub method: String,
    pub order: Vec<usize>,
    pub stops: Vec<PlanStopFile>,
    pub total_length_m: f64,
    pub total_quality: f64,
    pub q_star: f64,
    pub feasible: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlanStopFile {
    pub x: f64,
    pub y: f64,
    pub observes: Vec<usize>,
}

pub fn plan_file(
    method: &str,
    q_star: f64,
    order: &[usize],
    plan: Option<&PlanResult>,
) -> PlanFile {
    match plan {
        Some(p) => PlanFile {
            method: method.to_string(),
            order: p.order_used.clone(),
            stops: p
                .stops
                .iter()
                .map(|s| PlanStopFile { x: s.waypoint.x, y: s.waypoint.y, observes: s.observes.clone() })
                .collect(),
            total_length_m: p.total_length,
            total_quality: p.total_quality,
            q_star,
            feasible: true,
        },
        None => PlanFile {
            method: method.to_string(),
            order: order.to_vec(),
            stops: Vec::new(),
            total_length_m: 0.0,
            total_quality: 0.0,
            q_star,
            feasible: false,
        },
    }
}

/// Candidate-point dump for inspection/plotting.
#[derive(Debug, Serialize, Deserialize)]
pub struct PointsFile {
    pub epsilon: f64,
    pub delta: f64,
    pub per_object_count: usize,
    pub points: Vec<PointFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PointFile {
    pub object: usize,
    pub ring: usize,
    pub angle_slot: i32,
    pub x: f64,
    pub y: f64,
    pub quality: f64,
}

pub fn points_file(points: &PointSet) -> PointsFile {
    PointsFile {
        epsilon: points.grid.epsilon,
        delta: points.grid.delta,
        per_object_count: points.per_object_count(),
        points: points
            .points
            .iter()
            .map(|p| PointFile {
                object: p.object_index,
                ring: p.ring_index,
                angle_slot: p.angle_index,
                x: p.position.x,
                y: p.position.y,
                quality: p.own_quality,
            })
            .collect(),
    }
}
