//! Command-line front end. Angles cross this boundary in degrees; files and
//! stdout carry JSON or CSV. Exit codes: 0 success (including an infeasible
//! plan, reported in the output), 1 domain or validation failure, 2 I/O.

use std::collections::HashMap;
use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use obsplan::error::{Error, Result};
use obsplan::geometry::{Point2, SensingSpec};
use obsplan::harness::{
    default_rs_seed, gen_instance, plan_file, points_file, q_star_from_fraction, run_bench,
    summarize, write_records_csv, write_summary_csv, BenchConfig, CaseConfig, Instance,
};
use obsplan::ilp_export::{build_model, validate_solution, write_lp};
use obsplan::lower_bound::lower_bound;
use obsplan::orders::{
    brute_solve, gtsp_order, lbtsp_order, npf_order, rs_order, tspo_order, OrderMethod,
};
use obsplan::pareto::{DpSolver, LengthMode};

#[derive(Parser)]
#[command(
    name = "obsplan",
    version,
    about = "Plan shortest closed observation tours over directed objects"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SensingArgs {
    /// Closest usable observation distance (m)
    #[arg(long, default_value_t = 2.0)]
    d_min: f64,
    /// Farthest usable observation distance (m)
    #[arg(long, default_value_t = 10.0)]
    d_max: f64,
    /// Angular half-width of the usable sector (degrees)
    #[arg(long, default_value_t = 30.0)]
    theta_deg: f64,
    /// Quality scale constant
    #[arg(long, default_value_t = 1.0)]
    quality_a: f64,
    /// Quality distance-offset constant (m)
    #[arg(long, default_value_t = 0.0)]
    quality_b: f64,
}

impl SensingArgs {
    fn build(&self) -> Result<SensingSpec> {
        SensingSpec::with_constants(
            self.d_min,
            self.d_max,
            self.theta_deg.to_radians(),
            self.quality_a,
            self.quality_b,
        )
    }
}

#[derive(Args)]
struct ThresholdArgs {
    /// Quality threshold as a fraction of the best attainable total
    #[arg(long, conflicts_with = "qstar_abs")]
    qstar_frac: Option<f64>,
    /// Quality threshold as an absolute value
    #[arg(long)]
    qstar_abs: Option<f64>,
}

impl ThresholdArgs {
    fn resolve(&self, points: &obsplan::discretize::PointSet) -> Result<f64> {
        match (self.qstar_frac, self.qstar_abs) {
            (Some(f), None) => q_star_from_fraction(points, f),
            (None, Some(q)) => Ok(q),
            (None, None) => q_star_from_fraction(points, 0.5),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }
}

fn parse_xy(s: &str) -> std::result::Result<Point2, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y: {e}"))?;
    Ok(Point2::new(x, y))
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance file
    Gen {
        /// Number of objects
        #[arg(long)]
        n: usize,
        /// Side of the square map (m)
        #[arg(long, default_value_t = 200.0)]
        map: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Mesh budget parameter in (0, 1]
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Tour start position
        #[arg(long, value_parser = parse_xy, default_value = "0,0")]
        start: Point2,
        #[command(flatten)]
        sensing: SensingArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the candidate observation points of an instance
    Points {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan a tour: heuristic visiting order, then optimal stops along it
    Plan {
        #[arg(long = "in")]
        input: PathBuf,
        /// RS, NPF, GTSP, TSPO, or LBTSP
        #[arg(long, default_value = "GTSP")]
        method: String,
        #[command(flatten)]
        threshold: ThresholdArgs,
        /// Round leg lengths up to the mesh spacing inside the planner
        #[arg(long)]
        rounded: bool,
        /// Seed for the RS method (defaults to a value derived from the instance seed)
        #[arg(long)]
        rs_seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan with an exhaustive search over visiting orders (n <= 8)
    Brute {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long)]
        rounded: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the tour-length lower bound for an instance
    Bound {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Sweep instances and methods, writing a record per (method, threshold)
    Bench {
        /// Object counts, comma separated
        #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
        n: Vec<usize>,
        /// d_max values, comma separated
        #[arg(long, value_delimiter = ',', default_value = "10")]
        dmax: Vec<f64>,
        /// Instances per (n, d_max) cell
        #[arg(long, default_value_t = 30)]
        cases: usize,
        #[arg(long, default_value_t = 200.0)]
        map: f64,
        #[arg(long, default_value_t = 2.0)]
        d_min: f64,
        #[arg(long, default_value_t = 30.0)]
        theta_deg: f64,
        #[arg(long, default_value_t = 1.0)]
        quality_a: f64,
        #[arg(long, default_value_t = 0.0)]
        quality_b: f64,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Thresholds as fractions, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.7,0.9")]
        qstar_frac: Vec<f64>,
        /// Methods to run (RS, NPF, GTSP, TSPO, LBTSP), comma separated
        #[arg(long, value_delimiter = ',', default_value = "RS,NPF,GTSP,TSPO,LBTSP")]
        methods: Vec<String>,
        /// Also run the exhaustive search on cells with n at most this
        #[arg(long, default_value_t = 5)]
        brute_max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = parse_xy, default_value = "0,0")]
        start: Point2,
        #[arg(long)]
        rounded: bool,
        /// Records CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-group aggregate rows to this CSV
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Export the exact routing model as a CPLEX LP file
    LpExport {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a solver assignment against the model and instance geometry
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        threshold: ThresholdArgs,
        /// JSON file mapping variable names to values
        #[arg(long)]
        solution: PathBuf,
    },
}

fn write_json(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn mode_of(rounded: bool) -> LengthMode {
    if rounded {
        LengthMode::Rounded
    } else {
        LengthMode::Exact
    }
}

fn run() -> Result<u8> {
    if let Ok(v) = std::env::var("OBSPLAN_THREADS") {
        let k: usize = v
            .parse()
            .map_err(|_| Error::domain(format!("OBSPLAN_THREADS must be a number, got {v:?}")))?;
        // Ignore failure: the global pool may already exist.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }

    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Gen { n, map, seed, epsilon, start, sensing, out } => {
            let spec = sensing.build()?;
            let inst = gen_instance(n, map, spec, epsilon, seed, start)?;
            // Fail early if the layout cannot be meshed.
            inst.generate_points()?;
            inst.save(&out)?;
        }
        Cmd::Points { input, out } => {
            let inst = Instance::load(&input)?;
            let points = inst.generate_points()?;
            let mut text = serde_json::to_string_pretty(&points_file(&points))?;
            text.push('\n');
            write_json(&out, &text)?;
        }
        Cmd::Plan { input, method, threshold, rounded, rs_seed, out } => {
            let inst = Instance::load(&input)?;
            let points = inst.generate_points()?;
            let q_star = threshold.resolve(&points)?;
            let method: OrderMethod = method.parse()?;
            let order = match method {
                OrderMethod::Rs => {
                    let seed = rs_seed.unwrap_or_else(|| default_rs_seed(inst.seed));
                    rs_order(&inst, &points, seed)?.0
                }
                OrderMethod::Npf => npf_order(&inst, &points)?.0,
                OrderMethod::Gtsp => gtsp_order(&inst, &points)?.0,
                OrderMethod::Tspo => tspo_order(&inst)?,
                OrderMethod::Lbtsp => lbtsp_order(&inst, &points)?,
                OrderMethod::Brute => {
                    return Err(Error::domain("use the brute subcommand for exhaustive search"))
                }
            };
            let mode = mode_of(rounded);
            let solver = DpSolver::new(&inst, &points, &order.sequence, mode)?;
            let plan = solver.solve(q_star)?;
            if let Some(p) = &plan {
                p.verify(&inst, mode)?;
            }
            let file = plan_file(method.tag(), q_star, &order.sequence, plan.as_ref());
            let mut text = serde_json::to_string_pretty(&file)?;
            text.push('\n');
            write_json(&out, &text)?;
        }
        Cmd::Brute { input, threshold, rounded, out } => {
            let inst = Instance::load(&input)?;
            let points = inst.generate_points()?;
            let q_star = threshold.resolve(&points)?;
            let mode = mode_of(rounded);
            let plans = brute_solve(&inst, &points, &[q_star], mode)?;
            let plan = plans.into_iter().next().flatten();
            if let Some(p) = &plan {
                p.verify(&inst, mode)?;
            }
            let order: Vec<usize> = plan.as_ref().map(|p| p.order_used.clone()).unwrap_or_default();
            let file = plan_file("BRUTE", q_star, &order, plan.as_ref());
            let mut text = serde_json::to_string_pretty(&file)?;
            text.push('\n');
            write_json(&out, &text)?;
        }
        Cmd::Bound { input } => {
            let inst = Instance::load(&input)?;
            let points = inst.generate_points()?;
            println!("{}", lower_bound(&inst, &points)?);
        }
        Cmd::Bench {
            n,
            dmax,
            cases,
            map,
            d_min,
            theta_deg,
            quality_a,
            quality_b,
            epsilon,
            qstar_frac,
            methods,
            brute_max_n,
            seed,
            start,
            rounded,
            out,
            summary,
        } => {
            let methods = methods
                .iter()
                .map(|m| m.parse::<OrderMethod>())
                .collect::<Result<Vec<_>>>()?;
            let cfg = BenchConfig {
                n_values: n,
                d_max_values: dmax,
                cases,
                map_size: map,
                d_min,
                theta: theta_deg.to_radians(),
                a: quality_a,
                b: quality_b,
                epsilon,
                base_seed: seed,
                start,
                case: CaseConfig {
                    methods,
                    q_star_fractions: qstar_frac,
                    mode: mode_of(rounded),
                },
                brute_max_n,
            };
            let records = run_bench(&cfg)?;
            match &out {
                Some(p) => write_records_csv(&records, File::create(p)?)?,
                None => write_records_csv(&records, std::io::stdout().lock())?,
            }
            if let Some(p) = &summary {
                write_summary_csv(&summarize(&records), File::create(p)?)?;
            }
        }
        Cmd::LpExport { input, threshold, out } => {
            let inst = Instance::load(&input)?;
            let points = inst.generate_points()?;
            let q_star = threshold.resolve(&points)?;
            let model = build_model(&inst, &points, q_star)?;
            write_lp(&model, File::create(&out)?)?;
        }
        Cmd::Validate { input, threshold, solution } => {
            let inst = Instance::load(&input)?;
            let points = inst.generate_points()?;
            let q_star = threshold.resolve(&points)?;
            let model = build_model(&inst, &points, q_star)?;
            let text = std::fs::read_to_string(&solution)?;
            let assignment: HashMap<String, f64> = serde_json::from_str(&text)?;
            let report = validate_solution(&model, &assignment);
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.valid {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
