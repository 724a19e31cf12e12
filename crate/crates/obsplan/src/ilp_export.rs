//! Exact-solver handoff: the point-level routing model as a CPLEX LP file,
//! plus a checker for solver assignments.
//!
//! Zone 0 is the start (a single point); zone `i >= 1` holds the candidate
//! points of object `i - 1`. Binary `X_i_j_p1_p2` routes travel from point
//! `p1` of zone `i` to point `p2` of zone `j`; continuous `u_i` ranks object
//! zones to forbid subtours. Output is byte-identical for identical input.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::discretize::PointSet;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::harness::Instance;

/// Numeric slack when judging solver output.
pub const SOLUTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct IlpModel {
    zone_points: Vec<Vec<Point2>>,
    zone_quality: Vec<Vec<f64>>,
    q_star: f64,
}

impl IlpModel {
    /// Start zone plus one zone per object.
    pub fn zone_count(&self) -> usize {
        self.zone_points.len()
    }

    pub fn zone_len(&self, zone: usize) -> usize {
        self.zone_points[zone].len()
    }

    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    pub fn point(&self, zone: usize, p: usize) -> Point2 {
        self.zone_points[zone][p]
    }

    pub fn point_quality(&self, zone: usize, p: usize) -> f64 {
        self.zone_quality[zone][p]
    }

    /// `sum_{i != j} |P_i| |P_j|`.
    pub fn binary_count(&self) -> usize {
        let total: usize = self.zone_points.iter().map(Vec::len).sum();
        let squares: usize = self.zone_points.iter().map(|z| z.len() * z.len()).sum();
        total * total - squares
    }

    pub fn distance(&self, i: usize, j: usize, p1: usize, p2: usize) -> f64 {
        self.zone_points[i][p1].distance(self.zone_points[j][p2])
    }

    pub fn var_name(i: usize, j: usize, p1: usize, p2: usize) -> String {
        format!("X_{i}_{j}_{p1}_{p2}")
    }

    /// Every arc in `(i, j, p1, p2)` lexicographic order.
    pub fn arcs(&self) -> Vec<(usize, usize, usize, usize)> {
        let nz = self.zone_count();
        let mut out = Vec::with_capacity(self.binary_count());
        for i in 0..nz {
            for j in 0..nz {
                if i == j {
                    continue;
                }
                for p1 in 0..self.zone_len(i) {
                    for p2 in 0..self.zone_len(j) {
                        out.push((i, j, p1, p2));
                    }
                }
            }
        }
        out
    }
}

/// Assemble the model for one instance and threshold. Thresholds outside the
/// attainable band are rejected, mirroring the planner.
pub fn build_model(instance: &Instance, points: &PointSet, q_star: f64) -> Result<IlpModel> {
    instance.validate()?;
    if !q_star.is_finite() {
        return Err(Error::domain("q* must be finite"));
    }
    let (lo, hi) = instance.q_star_band();
    if q_star < lo - 1e-9 || q_star > hi + 1e-9 {
        return Err(Error::QualityBand { q_star, lo, hi });
    }
    let mut zone_points = vec![vec![instance.start]];
    let mut zone_quality = vec![vec![0.0]];
    for i in 0..instance.n() {
        let pts = points.of_object(i);
        zone_points.push(pts.iter().map(|p| p.position).collect());
        zone_quality.push(pts.iter().map(|p| p.own_quality).collect());
    }
    Ok(IlpModel { zone_points, zone_quality, q_star })
}

fn push_terms(out: &mut String, name: &str, terms: &[(f64, String)]) {
    out.push(' ');
    out.push_str(name);
    out.push(':');
    let mut on_line = 0;
    for (k, (c, var)) in terms.iter().enumerate() {
        if on_line == 6 {
            out.push_str("\n   ");
            on_line = 0;
        }
        out.push(' ');
        if *c < 0.0 {
            out.push_str("- ");
        } else if k > 0 {
            out.push_str("+ ");
        }
        let mag = c.abs();
        if mag != 1.0 {
            out.push_str(&format!("{mag} "));
        }
        out.push_str(var);
        on_line += 1;
    }
}

fn push_row(out: &mut String, name: &str, terms: &[(f64, String)], rel: &str, rhs: f64) {
    push_terms(out, name, terms);
    out.push_str(&format!(" {rel} {rhs}\n"));
}

/// Render the model in CPLEX LP format.
pub fn lp_string(model: &IlpModel) -> String {
    let nz = model.zone_count();
    let big_n = nz as f64;
    let mut out = String::new();
    out.push_str("\\ observation tour routing model\n");
    out.push_str(&format!(
        "\\ zones: {nz} (start + {} objects), binaries: {}\n",
        nz - 1,
        model.binary_count()
    ));

    let obj_terms: Vec<(f64, String)> = model
        .arcs()
        .into_iter()
        .map(|(i, j, p1, p2)| (model.distance(i, j, p1, p2), IlpModel::var_name(i, j, p1, p2)))
        .collect();
    out.push_str("Minimize\n");
    push_terms(&mut out, "obj", &obj_terms);
    out.push('\n');

    out.push_str("Subject To\n");

    // One arrival per zone.
    for j in 0..nz {
        let mut terms = Vec::new();
        for i in 0..nz {
            if i == j {
                continue;
            }
            for p1 in 0..model.zone_len(i) {
                for p2 in 0..model.zone_len(j) {
                    terms.push((1.0, IlpModel::var_name(i, j, p1, p2)));
                }
            }
        }
        push_row(&mut out, &format!("eq6_zone{j}"), &terms, "=", 1.0);
    }

    // One departure per zone.
    for i in 0..nz {
        let mut terms = Vec::new();
        for j in 0..nz {
            if i == j {
                continue;
            }
            for p1 in 0..model.zone_len(i) {
                for p2 in 0..model.zone_len(j) {
                    terms.push((1.0, IlpModel::var_name(i, j, p1, p2)));
                }
            }
        }
        push_row(&mut out, &format!("eq7_zone{i}"), &terms, "=", 1.0);
    }

    // Arrive and depart at the same point of each object zone.
    for z in 1..nz {
        for p in 0..model.zone_len(z) {
            let mut terms = Vec::new();
            for other in 0..nz {
                if other == z {
                    continue;
                }
                for po in 0..model.zone_len(other) {
                    terms.push((1.0, IlpModel::var_name(other, z, po, p)));
                }
            }
            for other in 0..nz {
                if other == z {
                    continue;
                }
                for po in 0..model.zone_len(other) {
                    terms.push((-1.0, IlpModel::var_name(z, other, p, po)));
                }
            }
            push_row(&mut out, &format!("eq8_zone{z}_p{p}"), &terms, "=", 0.0);
        }
    }

    // Same matching for the start zone.
    for p in 0..model.zone_len(0) {
        let mut terms = Vec::new();
        for other in 1..nz {
            for po in 0..model.zone_len(other) {
                terms.push((1.0, IlpModel::var_name(other, 0, po, p)));
            }
        }
        for other in 1..nz {
            for po in 0..model.zone_len(other) {
                terms.push((-1.0, IlpModel::var_name(0, other, p, po)));
            }
        }
        push_row(&mut out, &format!("eq9_start_p{p}"), &terms, "=", 0.0);
    }

    // Rank object zones: an arc i -> j forces u_j >= u_i + 1.
    for i in 1..nz {
        for j in 1..nz {
            if i == j {
                continue;
            }
            let mut terms = vec![(1.0, format!("u_{i}")), (-1.0, format!("u_{j}"))];
            for p1 in 0..model.zone_len(i) {
                for p2 in 0..model.zone_len(j) {
                    terms.push((big_n, IlpModel::var_name(i, j, p1, p2)));
                }
            }
            push_row(&mut out, &format!("eq10_mtz_{i}_{j}"), &terms, "<=", big_n - 1.0);
        }
    }

    // Collected quality, credited at each zone's departure point.
    let mut terms = Vec::new();
    for i in 1..nz {
        for p1 in 0..model.zone_len(i) {
            let q = model.point_quality(i, p1);
            for j in 0..nz {
                if i == j {
                    continue;
                }
                for p2 in 0..model.zone_len(j) {
                    terms.push((q, IlpModel::var_name(i, j, p1, p2)));
                }
            }
        }
    }
    push_row(&mut out, "eq11_quality", &terms, ">=", model.q_star);

    out.push_str("Bounds\n");
    for i in 1..nz {
        out.push_str(&format!(" 1 <= u_{i} <= {}\n", nz - 1));
    }

    out.push_str("Binaries\n");
    for (i, j, p1, p2) in model.arcs() {
        out.push(' ');
        out.push_str(&IlpModel::var_name(i, j, p1, p2));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

pub fn write_lp<W: Write>(model: &IlpModel, mut w: W) -> Result<()> {
    w.write_all(lp_string(model).as_bytes())?;
    Ok(())
}

/// Parse `X_i_j_p1_p2`.
pub fn parse_x_name(name: &str) -> Option<(usize, usize, usize, usize)> {
    let rest = name.strip_prefix("X_")?;
    let parts: Vec<&str> = rest.split('_').collect();
    if parts.len() != 4 {
        return None;
    }
    let mut vals = [0usize; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p.parse().ok()?;
    }
    Some((vals[0], vals[1], vals[2], vals[3]))
}

/// Parse `u_i`.
pub fn parse_u_name(name: &str) -> Option<usize> {
    name.strip_prefix("u_")?.parse().ok()
}

/// Assignment encoding a single-point-per-zone tour: `order` lists object
/// indices, `picks[k]` the point chosen inside `order[k]`'s zone.
pub fn tour_assignment(
    model: &IlpModel,
    order: &[usize],
    picks: &[usize],
) -> Result<HashMap<String, f64>> {
    let n = model.zone_count() - 1;
    if order.len() != n || picks.len() != n {
        return Err(Error::domain("order/picks must cover every object zone"));
    }
    let mut map = HashMap::new();
    let mut prev = (0usize, 0usize);
    for (k, (&obj, &pick)) in order.iter().zip(picks).enumerate() {
        let zone = obj + 1;
        if zone >= model.zone_count() || pick >= model.zone_len(zone) {
            return Err(Error::domain("order/picks index out of range"));
        }
        map.insert(IlpModel::var_name(prev.0, zone, prev.1, pick), 1.0);
        map.insert(format!("u_{zone}"), (k + 1) as f64);
        prev = (zone, pick);
    }
    map.insert(IlpModel::var_name(prev.0, 0, prev.1, 0), 1.0);
    Ok(map)
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
    /// Visiting order as object indices, when a single closed tour exists.
    pub order: Option<Vec<usize>>,
    pub length_m: Option<f64>,
    pub quality: Option<f64>,
}

/// Check a solver assignment numerically against every row, then extract the
/// tour and recompute its geometry. Missing binaries count as zero.
pub fn validate_solution(
    model: &IlpModel,
    assignment: &HashMap<String, f64>,
) -> ValidationReport {
    let nz = model.zone_count();
    let mut violations = Vec::new();
    let mut x: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut u: HashMap<usize, f64> = HashMap::new();

    let mut names: Vec<&String> = assignment.keys().collect();
    names.sort();
    for name in names {
        let v = assignment[name];
        if let Some((i, j, p1, p2)) = parse_x_name(name) {
            if i == j
                || i >= nz
                || j >= nz
                || p1 >= model.zone_len(i)
                || p2 >= model.zone_len(j)
            {
                violations.push(format!("variable {name} out of range"));
                continue;
            }
            if v.abs() > SOLUTION_TOL && (v - 1.0).abs() > SOLUTION_TOL {
                violations.push(format!("{name} = {v} is not binary"));
            }
            x.insert((i, j, p1, p2), v);
        } else if let Some(i) = parse_u_name(name) {
            if i == 0 || i >= nz {
                violations.push(format!("variable {name} out of range"));
            } else {
                u.insert(i, v);
            }
        } else {
            violations.push(format!("unknown variable {name}"));
        }
    }

    let arc_sum = |pred: &dyn Fn(usize, usize, usize, usize) -> bool| -> f64 {
        x.iter()
            .filter(|(&(i, j, p1, p2), _)| pred(i, j, p1, p2))
            .map(|(_, &v)| v)
            .sum()
    };

    for z in 0..nz {
        let inbound = arc_sum(&|_, j, _, _| j == z);
        if (inbound - 1.0).abs() > SOLUTION_TOL {
            violations.push(format!("zone {z} inbound degree {inbound}, expected 1"));
        }
        let outbound = arc_sum(&|i, _, _, _| i == z);
        if (outbound - 1.0).abs() > SOLUTION_TOL {
            violations.push(format!("zone {z} outbound degree {outbound}, expected 1"));
        }
    }
    for z in 0..nz {
        for p in 0..model.zone_len(z) {
            let inbound = arc_sum(&|_, j, _, p2| j == z && p2 == p);
            let outbound = arc_sum(&|i, _, p1, _| i == z && p1 == p);
            if (inbound - outbound).abs() > SOLUTION_TOL {
                violations.push(format!(
                    "zone {z} point {p}: inbound {inbound} != outbound {outbound}"
                ));
            }
        }
    }

    let collected: f64 = x
        .iter()
        .map(|(&(i, _, p1, _), &v)| if i >= 1 { v * model.point_quality(i, p1) } else { 0.0 })
        .sum();
    if collected < model.q_star - SOLUTION_TOL {
        violations.push(format!(
            "collected quality {collected} below threshold {}",
            model.q_star
        ));
    }

    if u.len() == nz - 1 {
        let big_n = nz as f64;
        for i in 1..nz {
            for j in 1..nz {
                if i == j {
                    continue;
                }
                let lhs = u[&i] - u[&j] + big_n * arc_sum(&|a, b, _, _| a == i && b == j);
                if lhs > big_n - 1.0 + SOLUTION_TOL {
                    violations.push(format!("rank constraint violated for zones {i} -> {j}"));
                }
            }
        }
    } else if !u.is_empty() {
        violations.push(format!("only {} of {} rank variables provided", u.len(), nz - 1));
    }

    // Follow chosen arcs from the start; a correct solution is one cycle
    // through every zone.
    let mut succ: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (&(i, j, p1, p2), &v) in &x {
        if v >= 0.5 {
            succ.insert((i, p1), (j, p2));
        }
    }
    let mut order = Vec::new();
    let mut length = 0.0;
    let mut quality = 0.0;
    let mut cur = (0usize, 0usize);
    let mut closed = false;
    for _ in 0..nz {
        let Some(&(j, p2)) = succ.get(&cur) else { break };
        length += model.distance(cur.0, j, cur.1, p2);
        if j >= 1 {
            quality += model.point_quality(j, p2);
            order.push(j - 1);
        }
        cur = (j, p2);
        if cur.0 == 0 {
            closed = true;
            break;
        }
    }
    let toured = if closed && order.len() == nz - 1 {
        true
    } else {
        violations.push(format!(
            "arcs from the start reach {} of {} object zones before closing",
            order.len(),
            nz - 1
        ));
        false
    };

    ValidationReport {
        valid: violations.is_empty(),
        violations,
        order: toured.then_some(order),
        length_m: toured.then_some(length),
        quality: toured.then_some(quality),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Object, SensingSpec};
    use crate::harness::{q_star_base, Instance};

    /// Non-overlapping regions, one ring of three points per object (axis
    /// plus one mirrored off-axis slot).
    fn spread_instance(n: usize) -> Instance {
        let spec = SensingSpec::with_constants(6.0, 8.0, 30f64.to_radians(), 1.0, 0.0).unwrap();
        let objects = (0..n)
            .map(|i| {
                Object::new(Point2::new(20.0 + 6.0 * i as f64, 20.0), 0.0, 1.0).unwrap()
            })
            .collect();
        Instance::new(80.0, objects, Point2::new(0.0, 0.0), spec, 1.0, 0).unwrap()
    }

    #[test]
    fn binary_count_matches_closed_form() {
        for n in [2usize, 3] {
            let inst = spread_instance(n);
            let pts = inst.generate_points().unwrap();
            assert_eq!(pts.per_object_count(), 3, "layout chosen for 3 points per zone");
            let model = build_model(&inst, &pts, 0.6 * q_star_base(&pts)).unwrap();
            let sizes: Vec<usize> = (0..model.zone_count()).map(|z| model.zone_len(z)).collect();
            let total: usize = sizes.iter().sum();
            let squares: usize = sizes.iter().map(|s| s * s).sum();
            assert_eq!(model.binary_count(), total * total - squares);
            assert_eq!(model.binary_count(), if n == 2 { 30 } else { 72 });
            assert_eq!(model.arcs().len(), model.binary_count());
        }
    }

    #[test]
    fn lp_text_has_expected_sections_and_row_counts() {
        let inst = spread_instance(2);
        let pts = inst.generate_points().unwrap();
        let model = build_model(&inst, &pts, 0.6 * q_star_base(&pts)).unwrap();
        let text = lp_string(&model);
        for section in ["Minimize", "Subject To", "Bounds", "Binaries", "End"] {
            assert!(text.contains(section), "missing {section}");
        }
        let count = |needle: &str| text.matches(needle).count();
        assert_eq!(count("eq6_zone"), 3);
        assert_eq!(count("eq7_zone"), 3);
        assert_eq!(count("eq8_zone"), 6, "one row per object-zone point");
        assert_eq!(count("eq9_start_p"), 1);
        assert_eq!(count("eq10_mtz_"), 2);
        assert_eq!(count("eq11_quality"), 1);
        // Every binary is declared and referenced.
        assert_eq!(count("\n X_0_1_0_0\n"), 1);
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn lp_output_is_byte_identical_across_builds() {
        let inst = spread_instance(3);
        let pts = inst.generate_points().unwrap();
        let q = 0.6 * q_star_base(&pts);
        let a = lp_string(&build_model(&inst, &pts, q).unwrap());
        let b = lp_string(&build_model(&inst, &pts, q).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn build_model_rejects_unattainable_thresholds() {
        let inst = spread_instance(2);
        let pts = inst.generate_points().unwrap();
        let (_, hi) = inst.q_star_band();
        assert!(matches!(
            build_model(&inst, &pts, hi * 2.0),
            Err(Error::QualityBand { .. })
        ));
    }

    #[test]
    fn tour_assignment_validates_and_recovers_geometry() {
        let inst = spread_instance(2);
        let pts = inst.generate_points().unwrap();
        let q_star = 0.6 * q_star_base(&pts);
        let model = build_model(&inst, &pts, q_star).unwrap();

        // Axis point of each zone (slot order is -1, 0, +1).
        let axis = 1usize;
        let assignment = tour_assignment(&model, &[0, 1], &[axis, axis]).unwrap();
        let report = validate_solution(&model, &assignment);
        assert!(report.valid, "violations: {:?}", report.violations);
        assert_eq!(report.order, Some(vec![0, 1]));

        let p0 = model.point(1, axis);
        let p1 = model.point(2, axis);
        let expect = inst.start.distance(p0) + p0.distance(p1) + p1.distance(inst.start);
        assert!((report.length_m.unwrap() - expect).abs() < 1e-9);
        let expect_q = model.point_quality(1, axis) + model.point_quality(2, axis);
        assert!((report.quality.unwrap() - expect_q).abs() < 1e-12);
        assert!(report.quality.unwrap() >= q_star - SOLUTION_TOL);
    }

    #[test]
    fn validator_rejects_disconnected_subloops() {
        let inst = spread_instance(3);
        let pts = inst.generate_points().unwrap();
        let model = build_model(&inst, &pts, 0.6 * q_star_base(&pts)).unwrap();

        // Two 2-cycles: start <-> zone 1 and zone 2 <-> zone 3. Degrees and
        // point matching all hold; only connectivity is broken.
        let mut assignment = HashMap::new();
        assignment.insert(IlpModel::var_name(0, 1, 0, 0), 1.0);
        assignment.insert(IlpModel::var_name(1, 0, 0, 0), 1.0);
        assignment.insert(IlpModel::var_name(2, 3, 0, 0), 1.0);
        assignment.insert(IlpModel::var_name(3, 2, 0, 0), 1.0);
        let report = validate_solution(&model, &assignment);
        assert!(!report.valid);
        assert!(report.order.is_none());
        assert!(
            report.violations.iter().any(|v| v.contains("object zones before closing")),
            "expected a connectivity violation, got {:?}",
            report.violations
        );
    }

    #[test]
    fn validator_flags_fractional_and_unknown_variables() {
        let inst = spread_instance(2);
        let pts = inst.generate_points().unwrap();
        let model = build_model(&inst, &pts, 0.6 * q_star_base(&pts)).unwrap();
        let mut assignment = tour_assignment(&model, &[0, 1], &[1, 1]).unwrap();
        assignment.insert(IlpModel::var_name(0, 2, 0, 0), 0.4);
        assignment.insert("Y_bogus".into(), 1.0);
        let report = validate_solution(&model, &assignment);
        assert!(!report.valid);
        assert!(report.violations.iter().any(|v| v.contains("not binary")));
        assert!(report.violations.iter().any(|v| v.contains("unknown variable")));
    }

    #[test]
    fn var_name_round_trips() {
        assert_eq!(parse_x_name("X_1_2_0_3"), Some((1, 2, 0, 3)));
        assert_eq!(parse_x_name("X_1_2_0"), None);
        assert_eq!(parse_x_name("u_2"), None);
        assert_eq!(parse_u_name("u_2"), Some(2));
        assert_eq!(parse_u_name("X_1_2_0_3"), None);
    }
}
