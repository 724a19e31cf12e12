//! End-to-end checks of the compiled binary: file round-trips, output
//! schemas, exit codes, and run-to-run determinism.

use std::path::Path;
use std::process::{Command, Output};

use obsplan::harness::{q_star_from_fraction, Instance, PlanFile, PointsFile};
use obsplan::ilp_export::{build_model, tour_assignment};
use obsplan::orders::gtsp_order;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_obsplan"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary launches");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen_fixture(dir: &Path, n: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(format!("inst_{n}_{seed}.json"));
    run_ok(&[
        "gen",
        "--n",
        &n.to_string(),
        "--map",
        "60",
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    path
}

#[test]
fn gen_points_plan_brute_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_fixture(dir.path(), 3, 7);

    let points_out = run_ok(&["points", "--in", inst_path.to_str().unwrap()]);
    let points: PointsFile = serde_json::from_slice(&points_out.stdout).unwrap();
    assert!(points.delta > 0.0);
    assert!(!points.points.is_empty());
    assert_eq!(
        points.points.iter().map(|p| p.object).max(),
        Some(2),
        "every object contributes candidate points"
    );

    let plan_path = dir.path().join("plan.json");
    run_ok(&[
        "plan",
        "--in",
        inst_path.to_str().unwrap(),
        "--method",
        "GTSP",
        "--qstar-frac",
        "0.5",
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    let plan: PlanFile = serde_json::from_str(&std::fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert!(plan.feasible, "mid threshold is attainable on this fixture");
    assert_eq!(plan.method, "GTSP");
    assert_eq!(plan.order.len(), 3);
    assert!(!plan.stops.is_empty());
    assert!(plan.total_quality >= plan.q_star - 1e-9);

    let brute_path = dir.path().join("brute.json");
    run_ok(&[
        "brute",
        "--in",
        inst_path.to_str().unwrap(),
        "--qstar-frac",
        "0.5",
        "--out",
        brute_path.to_str().unwrap(),
    ]);
    let brute: PlanFile =
        serde_json::from_str(&std::fs::read_to_string(&brute_path).unwrap()).unwrap();
    assert!(brute.feasible);
    assert!(brute.total_length_m <= plan.total_length_m + 1e-9);

    // Coarsened leg lengths can only lengthen the reported tour.
    let rounded_path = dir.path().join("plan_rounded.json");
    run_ok(&[
        "plan",
        "--in",
        inst_path.to_str().unwrap(),
        "--qstar-frac",
        "0.5",
        "--rounded",
        "--out",
        rounded_path.to_str().unwrap(),
    ]);
    let rounded: PlanFile =
        serde_json::from_str(&std::fs::read_to_string(&rounded_path).unwrap()).unwrap();
    assert!(rounded.feasible);
    assert!(rounded.total_length_m >= plan.total_length_m - 1e-9);

    let bound_out = run_ok(&["bound", "--in", inst_path.to_str().unwrap()]);
    let bound: f64 = String::from_utf8_lossy(&bound_out.stdout).trim().parse().unwrap();
    assert!(bound >= 0.0);
    assert!(plan.total_length_m >= bound - 1e-9);
}

#[test]
fn lp_export_and_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_fixture(dir.path(), 3, 11);
    let lp_path = dir.path().join("model.lp");
    run_ok(&[
        "lp-export",
        "--in",
        inst_path.to_str().unwrap(),
        "--qstar-frac",
        "0.5",
        "--out",
        lp_path.to_str().unwrap(),
    ]);
    let lp = std::fs::read_to_string(&lp_path).unwrap();
    assert!(lp.starts_with("\\"), "LP file opens with a comment header");
    assert!(lp.contains("Minimize"));
    assert!(lp.contains("eq11_quality"));
    assert!(lp.trim_end().ends_with("End"));

    // An assignment visiting each zone at its best point satisfies the model.
    let inst = Instance::load(&inst_path).unwrap();
    let points = inst.generate_points().unwrap();
    let q_star = q_star_from_fraction(&points, 0.5).unwrap();
    let model = build_model(&inst, &points, q_star).unwrap();
    let (order, _) = gtsp_order(&inst, &points).unwrap();
    let picks: Vec<usize> = order
        .sequence
        .iter()
        .map(|&obj| {
            let pts = points.of_object(obj);
            (0..pts.len())
                .max_by(|&a, &b| pts[a].own_quality.total_cmp(&pts[b].own_quality))
                .unwrap()
        })
        .collect();
    let assignment = tour_assignment(&model, &order.sequence, &picks).unwrap();
    let sol_path = dir.path().join("solution.json");
    std::fs::write(&sol_path, serde_json::to_string(&assignment).unwrap()).unwrap();
    let out = run_ok(&[
        "validate",
        "--in",
        inst_path.to_str().unwrap(),
        "--qstar-frac",
        "0.5",
        "--solution",
        sol_path.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], serde_json::Value::Bool(true));
    assert!(report["length_m"].as_f64().unwrap() > 0.0);

    // An empty assignment violates the degree rows and exits nonzero.
    let empty_path = dir.path().join("empty.json");
    std::fs::write(&empty_path, "{}").unwrap();
    let out = bin()
        .args([
            "validate",
            "--in",
            inst_path.to_str().unwrap(),
            "--qstar-frac",
            "0.5",
            "--solution",
            empty_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], serde_json::Value::Bool(false));
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn bench_csv_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bench",
        "--n",
        "3",
        "--dmax",
        "10",
        "--cases",
        "2",
        "--map",
        "80",
        "--qstar-frac",
        "0.5,0.9",
        "--methods",
        "GTSP,RS",
        "--brute-max-n",
        "3",
        "--seed",
        "21",
    ];
    let summary_path = dir.path().join("summary.csv");
    let first = run_ok(
        &args
            .iter()
            .copied()
            .chain(["--summary", summary_path.to_str().unwrap()])
            .collect::<Vec<_>>(),
    );
    let second = run_ok(&args);

    let strip_timing = |csv: &[u8]| -> Vec<String> {
        String::from_utf8_lossy(csv)
            .lines()
            .map(|l| l.rsplit_once(',').expect("dp_ms is the last column").0.to_string())
            .collect()
    };
    let a = strip_timing(&first.stdout);
    let b = strip_timing(&second.stdout);
    assert_eq!(a, b, "records differ between identical runs");
    assert_eq!(
        a[0],
        "seed,n,d_max,epsilon,method,q_star_frac,length_m,quality,lb_m,ratio_lb,ratio_brute,feasible",
        "header drifted"
    );
    // 2 cases x 2 thresholds x (BRUTE + 2 x (refined + seed path) + MaxQ).
    assert_eq!(a.len() - 1, 2 * 2 * 6);

    let summary = std::fs::read_to_string(&summary_path).unwrap();
    assert!(summary.starts_with("n,d_max,method,q_star_frac,"));
    assert!(summary.lines().count() > 1);
}

#[test]
fn exit_codes_separate_domain_and_io_failures() {
    let dir = tempfile::tempdir().unwrap();

    let out = bin()
        .args(["plan", "--in", dir.path().join("missing.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "missing input is an I/O failure");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"not\": \"an instance\"}").unwrap();
    let out = bin().args(["plan", "--in", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "malformed content is a domain failure");

    let inst_path = gen_fixture(dir.path(), 3, 7);
    let out = bin()
        .args(["plan", "--in", inst_path.to_str().unwrap(), "--qstar-frac", "2.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "threshold fraction above 1 is rejected");

    let out = bin()
        .args(["plan", "--in", inst_path.to_str().unwrap(), "--method", "NOPE"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("GTSP"),
        "unknown method error lists the valid names"
    );

    let out = bin()
        .args(["gen", "--n", "1", "--out", dir.path().join("x.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "a single object is not a tour instance");
}

#[test]
fn rs_seed_flag_changes_the_draw_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_fixture(dir.path(), 4, 19);
    let plan_with = |extra: &[&str]| -> PlanFile {
        let mut args = vec![
            "plan",
            "--in",
            inst_path.to_str().unwrap(),
            "--method",
            "RS",
            "--qstar-frac",
            "0.3",
        ];
        args.extend_from_slice(extra);
        let out = run_ok(&args);
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let a = plan_with(&["--rs-seed", "5"]);
    let b = plan_with(&["--rs-seed", "5"]);
    let default1 = plan_with(&[]);
    let default2 = plan_with(&[]);
    assert_eq!(a.order, b.order);
    assert_eq!(a.total_length_m, b.total_length_m);
    assert_eq!(default1.order, default2.order);
    assert_eq!(default1.total_length_m, default2.total_length_m);
}
