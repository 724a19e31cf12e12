//! Shared helpers for integration tests: instance builders and an
//! independent exhaustive reference planner.

#![allow(dead_code)]

use obsplan::discretize::PointSet;
use obsplan::geometry::{can_observe, quality, Point2, SensingSpec};
use obsplan::harness::{gen_instance, Instance};

pub fn spec(d_max: f64) -> SensingSpec {
    SensingSpec::new(2.0, d_max, 30f64.to_radians()).expect("valid sensing parameters")
}

pub fn rand_instance(n: usize, map: f64, d_max: f64, epsilon: f64, seed: u64) -> Instance {
    gen_instance(n, map, spec(d_max), epsilon, seed, Point2::new(0.0, 0.0))
        .expect("generated instance is valid")
}

fn permute(rest: &mut Vec<usize>, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if rest.is_empty() {
        f(cur);
        return;
    }
    for i in 0..rest.len() {
        let v = rest.remove(i);
        cur.push(v);
        permute(rest, cur, f);
        cur.pop();
        rest.insert(i, v);
    }
}

fn explore(
    runs: &[Vec<(Point2, f64)>],
    k: usize,
    prev: Point2,
    len: f64,
    q: f64,
    start: Point2,
    q_star: f64,
    best: &mut Option<f64>,
) {
    if k == runs.len() {
        if q >= q_star - 1e-9 {
            let total = len + prev.distance(start);
            if best.map_or(true, |b| total < b) {
                *best = Some(total);
            }
        }
        return;
    }
    for &(p, run_q) in &runs[k] {
        let nl = len + prev.distance(p);
        // Remaining legs only add length, so this branch cannot win.
        if best.is_some_and(|b| nl >= b) {
            continue;
        }
        explore(runs, k + 1, p, nl, q + run_q, start, q_star, best);
    }
}

/// Minimum closed-tour length over every visiting order, every partition of
/// the order into consecutive runs, and every stop choice (a run is observed
/// from one candidate point of its last object, which must see the whole
/// run), subject to total quality >= q* - 1e-9. Brute force by construction;
/// no shared code with the planner.
pub fn oracle_min_length(instance: &Instance, points: &PointSet, q_star: f64) -> Option<f64> {
    let n = instance.n();
    let s = &instance.sensing;
    let mut best: Option<f64> = None;

    let mut rest: Vec<usize> = (0..n).collect();
    let mut cur = Vec::with_capacity(n);
    permute(&mut rest, &mut cur, &mut |perm: &[usize]| {
        // Each bit of `cuts` splits the order after that position.
        for cuts in 0..(1u32 << (n - 1)) {
            let mut runs: Vec<Vec<(Point2, f64)>> = Vec::new();
            let mut run_start = 0;
            let mut ok = true;
            for pos in 0..n {
                let run_ends = pos == n - 1 || cuts & (1 << pos) != 0;
                if !run_ends {
                    continue;
                }
                let members = &perm[run_start..=pos];
                let owner = *members.last().expect("runs are non-empty");
                let cands: Vec<(Point2, f64)> = points
                    .of_object(owner)
                    .iter()
                    .filter_map(|c| {
                        let mut q = 0.0;
                        for &m in members {
                            if !can_observe(&instance.objects[m], c.position, s) {
                                return None;
                            }
                            q += quality(&instance.objects[m], c.position, s);
                        }
                        Some((c.position, q))
                    })
                    .collect();
                if cands.is_empty() {
                    ok = false;
                    break;
                }
                runs.push(cands);
                run_start = pos + 1;
            }
            if ok {
                explore(&runs, 0, instance.start, 0.0, 0.0, instance.start, q_star, &mut best);
            }
        }
    });
    best
}
