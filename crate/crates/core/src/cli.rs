//! The `flatplan` command line: plan, replan, benchmark, validate, edt-dump.
//!
//! Exit codes: 0 success, 1 bad arguments, input or i/o failure, 2
//! infeasible endpoints, 3 no solution within the budget, 4 incompatible
//! tree dump, 5 validation failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FormatError, PlanError};
use crate::io::{
    write_distance_csv, write_json, write_sim_csv, write_trajectory_csv, PlanReport, TimingReport,
};
use crate::planner::{
    dump, extract_trajectory, plan, replan, Environment, ParentSearch, PlanResult, PlannerConfig,
    PruneRule, TrajectoryTree,
};
use crate::scenario::Scenario;
use crate::sim::validate_flat_trajectory;
use crate::steer::FlatState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NO_SOLUTION: i32 = 3;
pub const EXIT_INCOMPATIBLE: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FLATPLAN_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "flatplan",
    version,
    about = "Flat-informed RRT* trajectory planning for a 3D gantry crane"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Plan from the scenario's start to its target.
    Plan(PlanArgs),
    /// Reuse a dumped tree for a new target (or a batch of random ones).
    Replan(ReplanArgs),
    /// Plan at several budgets and seeds and tabulate the results.
    Benchmark(BenchmarkArgs),
    /// Simulate the best trajectory of a dumped tree and check consistency.
    Validate(ValidateArgs),
    /// Write the scenario's distance field as CSV.
    EdtDump(EdtDumpArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PruneArg {
    Off,
    Cost,
    Informed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParentArg {
    BestFirst,
    Children,
    Parent,
}

#[derive(Args, Debug, Clone)]
pub struct PlannerFlags {
    /// Wall-clock planning budget in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub t_plan: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parallel tree stacks (capped by FLATPLAN_THREADS).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Stop after this many iterations; makes runs machine independent.
    #[arg(long)]
    pub max_iterations: Option<u64>,
    #[arg(long, value_enum, default_value_t = PruneArg::Cost)]
    pub prune: PruneArg,
    /// Disable informed rejection of samples.
    #[arg(long)]
    pub no_informed: bool,
    #[arg(long, value_enum, default_value_t = ParentArg::BestFirst)]
    pub parent_search: ParentArg,
    /// Audit the tree every N operations.
    #[arg(long)]
    pub audit_every: Option<u64>,
}

impl PlannerFlags {
    pub fn config(&self) -> PlannerConfig {
        let cap = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(usize::MAX);
        PlannerConfig {
            t_plan: self.t_plan,
            max_iterations: self.max_iterations,
            workers: self.workers.min(cap),
            seed: self.seed,
            prune_rule: match self.prune {
                PruneArg::Off => PruneRule::Off,
                PruneArg::Cost => PruneRule::CostToCome,
                PruneArg::Informed => PruneRule::CostToComePlusHeuristic,
            },
            informed: !self.no_informed,
            parent_search: match self.parent_search {
                ParentArg::BestFirst => ParentSearch::BestFirst,
                ParentArg::Children => ParentSearch::QueueChildren,
                ParentArg::Parent => ParentSearch::QueueParent,
            },
            audit_every: self.audit_every.or(PlannerConfig::default().audit_every),
            ..PlannerConfig::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    pub scenario: PathBuf,
    #[command(flatten)]
    pub planner: PlannerFlags,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Tree dump path (default: <out-dir>/tree.json).
    #[arg(long)]
    pub tree_out: Option<PathBuf>,
    /// Time step of the trajectory CSV, s.
    #[arg(long, default_value_t = 0.01)]
    pub output_step: f64,
}

#[derive(Args, Debug)]
pub struct ReplanArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub tree_in: PathBuf,
    /// New target position; defaults to the tree's current target.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true)]
    pub new_target: Option<Vec<f64>>,
    /// Replan toward N random targets around the tree's target instead.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Per-axis deviation of batch targets, m.
    #[arg(long, default_value_t = 0.3)]
    pub max_deviation: f64,
    /// Refinement budget after a successful reconnection, s.
    #[arg(long, default_value_t = 1.0)]
    pub replan_budget: f64,
    /// Budget of the resumed loop when no reconnection exists, s.
    #[arg(long, default_value_t = 10.0)]
    pub fallback_budget: f64,
    #[command(flatten)]
    pub planner: PlannerFlags,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub tree_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub output_step: f64,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    pub scenario: PathBuf,
    /// Budgets in seconds before scaling.
    #[arg(long, value_delimiter = ',', default_value = "30,50,100,200")]
    pub budgets: Vec<f64>,
    /// Factor applied to every budget (desk runs use e.g. 0.1).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub planner: PlannerFlags,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub tree_in: PathBuf,
    /// Integration step, s.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Largest accepted state deviation.
    #[arg(long, default_value_t = 1e-4)]
    pub validate_tol: f64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct EdtDumpArgs {
    pub scenario: PathBuf,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit only this z layer.
    #[arg(long)]
    pub slice_z: Option<usize>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::IncompatibleDump(_) => EXIT_INCOMPATIBLE,
            _ => EXIT_INPUT,
        };
        Self::new(code, e)
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        let code = match e {
            PlanError::InfeasibleEndpoints(_) => EXIT_INFEASIBLE,
            PlanError::NoSolutionFound | PlanError::NoSolution => EXIT_NO_SOLUTION,
            PlanError::IncompatibleTrees(_) => EXIT_INCOMPATIBLE,
            _ => EXIT_INPUT,
        };
        Self::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_INPUT, e)
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cmd: &Command) -> Result<i32, Failure> {
    match cmd {
        Command::Plan(a) => cmd_plan(a),
        Command::Replan(a) => cmd_replan(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Validate(a) => cmd_validate(a),
        Command::EdtDump(a) => cmd_edt_dump(a),
    }
}

fn load(path: &Path) -> Result<(Scenario, Environment), Failure> {
    let scenario = Scenario::load(path)?;
    let env = scenario
        .environment()
        .map_err(|e| Failure::new(EXIT_INPUT, e))?;
    Ok((scenario, env))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Trajectory CSV, tree dump, stats and timing of one run.
fn write_artifacts(
    out_dir: &Path,
    tree_out: Option<&Path>,
    scenario: &Scenario,
    env: &Environment,
    r: &PlanResult,
    step: f64,
) -> Result<(), Failure> {
    fs::create_dir_all(out_dir)?;
    if r.is_solved() {
        let mut w = create(&out_dir.join("trajectory.csv"))?;
        write_trajectory_csv(&mut w, &r.trajectory, &env.params, step)?;
        w.flush()?;
    }
    let tree_path = tree_out.map_or_else(|| out_dir.join("tree.json"), Path::to_path_buf);
    let mut w = create(&tree_path)?;
    w.write_all(dump::to_json(&r.tree)?.as_bytes())?;
    w.flush()?;
    write_json(
        create(&out_dir.join("stats.json"))?,
        &PlanReport::new(&scenario.name, r),
    )?;
    let timing = TimingReport {
        seed: r.stats.seed,
        timing: r.timing.clone(),
    };
    write_json(create(&out_dir.join("timing.json"))?, &timing)?;
    Ok(())
}

fn summary(r: &PlanResult) -> String {
    if r.is_solved() {
        format!(
            "J* = {:.4}, t* = {:.3} s, |T| = {}, wall {:.2} s",
            r.total_cost,
            r.travel_time,
            r.tree.len(),
            r.timing.wall_time
        )
    } else {
        format!(
            "no solution, |T| = {}, wall {:.2} s",
            r.tree.len(),
            r.timing.wall_time
        )
    }
}

pub fn cmd_plan(a: &PlanArgs) -> Result<i32, Failure> {
    let (scenario, env) = load(&a.scenario)?;
    let cfg = a.planner.config();
    let r = plan(&env, scenario.start_state(), scenario.target_state(), &cfg)?;
    write_artifacts(
        &a.out_dir,
        a.tree_out.as_deref(),
        &scenario,
        &env,
        &r,
        a.output_step,
    )?;
    eprintln!("{}", summary(&r));
    Ok(if r.is_solved() {
        EXIT_OK
    } else {
        EXIT_NO_SOLUTION
    })
}

fn load_tree(path: &Path, scenario: &Scenario) -> Result<TrajectoryTree, Failure> {
    let tree = dump::load(path)?;
    let root = tree.node(tree.root()).map(|n| n.state);
    if root.map_or(true, |r| !r.bitwise_eq(&scenario.start_state())) {
        return Err(Failure::new(
            EXIT_INCOMPATIBLE,
            "tree root does not match the scenario start",
        ));
    }
    Ok(tree)
}

pub fn cmd_replan(a: &ReplanArgs) -> Result<i32, Failure> {
    let (scenario, env) = load(&a.scenario)?;
    let tree = load_tree(&a.tree_in, &scenario)?;
    let cfg = PlannerConfig {
        replan_budget: a.replan_budget,
        replan_fallback_budget: a.fallback_budget,
        ..a.planner.config()
    };
    if let Some(n) = a.batch {
        return replan_batch(a, &env, &tree, &cfg, n);
    }
    let target = match &a.new_target {
        Some(p) => FlatState::at_rest([p[0], p[1], p[2]]),
        None => *tree.target(),
    };
    let r = replan(&env, tree, target, &cfg)?;
    write_artifacts(
        &a.out_dir,
        a.tree_out.as_deref(),
        &scenario,
        &env,
        &r,
        a.output_step,
    )?;
    eprintln!(
        "{} (reconnected without sampling: {})",
        summary(&r),
        r.stats.connected_without_sampling
    );
    Ok(if r.is_solved() {
        EXIT_OK
    } else {
        EXIT_NO_SOLUTION
    })
}

/// Random rest targets within `max_deviation` per axis of `center`, all in
/// free space.
pub fn random_targets(
    env: &Environment,
    center: [f64; 3],
    max_deviation: f64,
    n: usize,
    seed: u64,
) -> Vec<FlatState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n && attempts < 1000 * n.max(1) {
        attempts += 1;
        let p: [f64; 3] =
            std::array::from_fn(|i| center[i] + rng.gen_range(-max_deviation..=max_deviation));
        let x = FlatState::at_rest(p);
        if env.workspace.contains(&p) && env.state_feasible(&x) {
            out.push(x);
        }
    }
    out
}

fn replan_batch(
    a: &ReplanArgs,
    env: &Environment,
    tree: &TrajectoryTree,
    cfg: &PlannerConfig,
    n: usize,
) -> Result<i32, Failure> {
    fs::create_dir_all(&a.out_dir)?;
    let targets = random_targets(env, tree.target().position(), a.max_deviation, n, cfg.seed);
    let mut w = create(&a.out_dir.join("replan_batch.csv"))?;
    writeln!(
        w,
        "index,x,y,z,connected_without_sampling,solved,j_star,t_star,first_solution_s,wall_time_s"
    )?;
    let mut connected = 0;
    for (i, target) in targets.iter().enumerate() {
        let r = replan(env, tree.clone(), *target, cfg)?;
        let p = target.position();
        connected += r.stats.connected_without_sampling as usize;
        writeln!(
            w,
            "{i},{},{},{},{},{},{},{},{},{}",
            p[0],
            p[1],
            p[2],
            r.stats.connected_without_sampling,
            r.is_solved(),
            r.total_cost,
            r.travel_time,
            r.timing.first_solution.unwrap_or(f64::NAN),
            r.timing.wall_time
        )?;
    }
    w.flush()?;
    eprintln!(
        "{connected}/{} targets reconnected without sampling",
        targets.len()
    );
    Ok(EXIT_OK)
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<i32, Failure> {
    let (scenario, env) = load(&a.scenario)?;
    fs::create_dir_all(&a.out_dir)?;
    let mut w = create(&a.out_dir.join("benchmark.csv"))?;
    writeln!(w, "seed,t_plan,t_star,j_star,tree_size,wall_time_s")?;
    for &seed in &a.seeds {
        for &budget in &a.budgets {
            let cfg = PlannerConfig {
                t_plan: budget * a.scale,
                seed,
                ..a.planner.config()
            };
            let r = plan(&env, scenario.start_state(), scenario.target_state(), &cfg)?;
            let row = format!(
                "{seed},{},{},{},{},{}",
                cfg.t_plan,
                r.travel_time,
                r.total_cost,
                r.tree.len(),
                r.timing.wall_time
            );
            eprintln!("{row}");
            writeln!(w, "{row}")?;
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32, Failure> {
    let (scenario, env) = load(&a.scenario)?;
    let tree = load_tree(&a.tree_in, &scenario)?;
    let traj = extract_trajectory(&tree)?;
    let r = validate_flat_trajectory(&traj, &env.params, a.dt)
        .map_err(|e| Failure::new(EXIT_VALIDATION, e))?;
    fs::create_dir_all(&a.out_dir)?;
    let mut w = create(&a.out_dir.join("sim.csv"))?;
    write_sim_csv(&mut w, &r)?;
    w.flush()?;
    eprintln!(
        "max state error {:e} (tolerance {:e})",
        r.max_state_error, a.validate_tol
    );
    Ok(if r.max_state_error <= a.validate_tol {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    })
}

pub fn cmd_edt_dump(a: &EdtDumpArgs) -> Result<i32, Failure> {
    let (_, env) = load(&a.scenario)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            write_distance_csv(&mut w, &env.field, a.slice_z)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_distance_csv(&mut w, &env.field, a.slice_z)?;
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}
