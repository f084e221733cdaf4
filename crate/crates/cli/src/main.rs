//! `voltroute` command-line interface.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 when the model or a
//! solver fails (including unreadable or invalid input files).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use voltroute::bench::{self, BenchmarkConfig, DirectionConvention};
use voltroute::dynamics::VehicleParams;
use voltroute::leg::{write_trace_csv, LegDisplacement, LegSimulator, DEFAULT_DT};
use voltroute::planner::{
    self, baseline_orders, build_cost_matrix, milp, order_metrics, solve_min_energy, CostMode, Direction, Mission,
};
use voltroute::table::{EnergyTable, FingerprintCheck, GridSpec};

#[derive(Parser)]
#[command(name = "voltroute", version, about = "Energy-optimal waypoint ordering for multirotor missions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one rest-to-rest leg and print its energy as JSON.
    SimulateLeg(SimulateLegArgs),
    /// Tabulate leg energy over a grid of displacements.
    BuildTable(BuildTableArgs),
    /// Compute the min-energy order and the distance baselines for a mission.
    Plan(PlanArgs),
    /// Write the mission's ATSP as an MTZ integer program in LP format.
    ExportMilp(ExportMilpArgs),
    /// Run a seeded ensemble of random missions and write reports.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct VehicleArg {
    /// Vehicle parameter file (JSON). Defaults to the built-in octorotor.
    #[arg(long)]
    params: Option<PathBuf>,
}

impl VehicleArg {
    fn load(&self) -> anyhow::Result<VehicleParams<f64>> {
        Ok(match &self.params {
            Some(p) => VehicleParams::from_json_file(p)?,
            None => VehicleParams::default_octorotor(),
        })
    }

    /// Loads a table, rejecting it unless it was built for this vehicle or
    /// `skip_fingerprint` is set.
    fn load_table(&self, path: &Path, skip_fingerprint: bool) -> anyhow::Result<EnergyTable<f64>> {
        if skip_fingerprint {
            return Ok(EnergyTable::load(path, FingerprintCheck::Skip)?);
        }
        let fp = self.load()?.fingerprint();
        Ok(EnergyTable::load(path, FingerprintCheck::Require(&fp))?)
    }
}

#[derive(Args)]
struct SimulateLegArgs {
    /// Horizontal distance (m).
    #[arg(long, allow_hyphen_values = true)]
    x_f: f64,
    /// Vertical displacement, positive up (m).
    #[arg(long, allow_hyphen_values = true)]
    z_f: f64,
    #[command(flatten)]
    vehicle: VehicleArg,
    /// Integration step (s).
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Write a time-series CSV (time, x, z, theta, omega, battery_power).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BuildTableArgs {
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    vehicle: VehicleArg,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 120.0)]
    x_max: f64,
    #[arg(long, default_value_t = 2.0)]
    x_step: f64,
    #[arg(long, default_value_t = -60.0, allow_hyphen_values = true)]
    z_min: f64,
    #[arg(long, default_value_t = 60.0, allow_hyphen_values = true)]
    z_max: f64,
    #[arg(long, default_value_t = 2.0)]
    z_step: f64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderKind {
    MinEnergy,
    MinX,
    MinZ,
    MinD,
}

#[derive(Args)]
struct PlanArgs {
    /// Mission file: {"origin": [x, y, z], "waypoints": [[x, y, z], ...]}.
    #[arg(long)]
    mission: PathBuf,
    #[arg(long)]
    table: PathBuf,
    #[command(flatten)]
    vehicle: VehicleArg,
    /// Accept an energy table built for a different vehicle.
    #[arg(long)]
    skip_fingerprint: bool,
    /// Orders to report (default: all four).
    #[arg(long, value_enum, value_delimiter = ',')]
    orders: Vec<OrderKind>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    Energy,
    DistTotal,
    DistHoriz,
    DistVert,
}

#[derive(Args)]
struct ExportMilpArgs {
    #[arg(long)]
    mission: PathBuf,
    /// Energy table; required for `--cost energy`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    vehicle: VehicleArg,
    /// Accept an energy table built for a different vehicle.
    #[arg(long)]
    skip_fingerprint: bool,
    #[arg(long, value_enum, default_value = "energy")]
    cost: CostArg,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Best,
    Forward,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    /// Energy table; overrides the path in the config.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    vehicle: VehicleArg,
    /// Accept an energy table built for a different vehicle.
    #[arg(long)]
    skip_fingerprint: bool,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the config's direction convention.
    #[arg(long, value_enum)]
    direction_convention: Option<ConventionArg>,
}

/// A failure attributable to how the command was invoked.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn write_json(value: &Value, output: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn simulate_leg(args: SimulateLegArgs) -> anyhow::Result<()> {
    let sim = LegSimulator::new(args.vehicle.load()?, args.dt)?;
    let leg = LegDisplacement::new(args.x_f, args.z_f);
    let (result, trace) = sim.simulate_traced(&leg)?;
    if let Some(path) = &args.trace {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(&trace, BufWriter::new(file))?;
    }
    write_json(
        &json!({
            "x_f": args.x_f,
            "z_f": args.z_f,
            "dt": args.dt,
            "result": result,
        }),
        None,
    )
}

fn build_table(args: BuildTableArgs) -> anyhow::Result<()> {
    let vehicle = args.vehicle.load()?;
    let spec = GridSpec {
        x_min: args.x_min,
        x_max: args.x_max,
        x_step: args.x_step,
        z_min: args.z_min,
        z_max: args.z_max,
        z_step: args.z_step,
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let table = pool.install(|| EnergyTable::build(spec, &vehicle, args.dt))?;
    table.save(&args.output)?;
    let (nx, nz) = table.shape();
    eprintln!("wrote {nx} x {nz} table to {}", args.output.display());
    Ok(())
}

fn plan(args: PlanArgs) -> anyhow::Result<()> {
    let mission = Mission::from_json_file(&args.mission)?;
    let table = args.vehicle.load_table(&args.table, args.skip_fingerprint)?;
    let wanted = if args.orders.is_empty() {
        vec![OrderKind::MinEnergy, OrderKind::MinX, OrderKind::MinZ, OrderKind::MinD]
    } else {
        args.orders
    };

    let mut report = Map::new();
    if wanted.contains(&OrderKind::MinEnergy) {
        let best = solve_min_energy(&mission, &table)?;
        let reverse = order_metrics(&best.order, Direction::Reverse, &mission, &table)?;
        report.insert("min_energy".into(), json!({ "forward": best, "reverse": reverse }));
    }
    if wanted.iter().any(|k| *k != OrderKind::MinEnergy) {
        let baselines = baseline_orders(&mission, &table)?;
        for (kind, b) in [
            (OrderKind::MinX, planner::Baseline::MinX),
            (OrderKind::MinZ, planner::Baseline::MinZ),
            (OrderKind::MinD, planner::Baseline::MinD),
        ] {
            if wanted.contains(&kind) {
                report.insert(b.name().into(), serde_json::to_value(baselines.get(b))?);
            }
        }
    }
    write_json(&Value::Object(report), args.output.as_deref())
}

fn export_milp(args: ExportMilpArgs) -> anyhow::Result<()> {
    let mission = Mission::from_json_file(&args.mission)?;
    let mode = match args.cost {
        CostArg::Energy => CostMode::Energy,
        CostArg::DistTotal => CostMode::DistTotal,
        CostArg::DistHoriz => CostMode::DistHoriz,
        CostArg::DistVert => CostMode::DistVert,
    };
    let matrix = match (&args.table, mode) {
        (Some(path), _) => build_cost_matrix(&mission, &args.vehicle.load_table(path, args.skip_fingerprint)?, mode)?,
        (None, CostMode::Energy) => return Err(usage("--table is required for --cost energy")),
        (None, _) => planner::CostMatrix::distances(&mission, mode)?,
    };
    milp::export_milp(&matrix, &args.output)?;
    eprintln!("wrote MTZ model for {} waypoints to {}", mission.len(), args.output.display());
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> anyhow::Result<()> {
    let mut config = BenchmarkConfig::from_json_file(&args.config)?;
    if let Some(c) = args.direction_convention {
        config.direction_convention = match c {
            ConventionArg::Best => DirectionConvention::Best,
            ConventionArg::Forward => DirectionConvention::Forward,
        };
    }
    let table_path = match (&args.table, &config.table) {
        (Some(p), _) => p.clone(),
        // relative paths in the config are taken from the config's directory
        (None, Some(p)) => args.config.parent().unwrap_or(Path::new("")).join(p),
        (None, None) => return Err(usage("no table given: pass --table or set \"table\" in the config")),
    };
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let table = args.vehicle.load_table(&table_path, args.skip_fingerprint)?;
    let (records, stats) = bench::run_benchmark(&config, &table, workers)?;
    let paths = config.outputs.resolve(&args.out_dir);
    bench::emit_reports(&records, &stats, &paths)?;

    let mut err = std::io::stderr().lock();
    writeln!(err, "{} missions, direction convention {:?}", stats.mission_count, config.direction_convention)?;
    for b in planner::Baseline::ALL {
        let s = stats.get(b);
        writeln!(err, "  {:<6} mean {:+.2}%  p90 {:+.2}%  max {:+.2}%", b.name(), s.mean_pct, s.p90_pct, s.max_pct)?;
    }
    writeln!(err, "  min-D differs from min-energy in {:.1}% of missions", 100.0 * stats.min_d_differs_fraction)?;
    Ok(())
}

/// The error chain joined with ": ", skipping causes whose text is already
/// part of the message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::SimulateLeg(a) => simulate_leg(a),
        Command::BuildTable(a) => build_table(a),
        Command::Plan(a) => plan(a),
        Command::ExportMilp(a) => export_milp(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.is::<Usage>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
