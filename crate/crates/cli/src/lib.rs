//! Command-line driver: validation, single-objective and Pareto solves,
//! capacity and demand scenarios, LP export.

mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use hwlrp::formulation::{
    build_model, evaluate_objectives, solve_instance, ObjectiveKind, Objectives, SolveError, Solution,
};
use hwlrp::instance::{parse_instance, validate_instance, CapacityMode, Instance, Scenario, Severity};
use hwlrp::milp::export_lp;
use hwlrp::moo::{
    build_augmented_model, front_csv, pareto_params, payoff_table, points_csv, sweep, MooError, Scalarization,
    SweepConfig, DEFAULT_GRID,
};
use hwlrp::solver::{NodeSelection, SolveParams, SolveStatus};

pub use report::{deltas_csv, render_front, render_solution, render_validation, Delta};

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const LIMIT: u8 = 4;
    pub const IO: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "hwlrp", version, about = "Hazardous-waste location-routing: solve, sweep Pareto fronts, run scenarios")]
pub struct Cli {
    /// Directory for written artifacts.
    #[arg(long, global = true, env = "HWLRP_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Log solver progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an instance document and list findings.
    Validate {
        path: PathBuf,
        /// Print findings as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Minimize one objective.
    Solve {
        path: PathBuf,
        #[arg(short, long, default_value = "f1", value_parser = parse_objective)]
        objective: ObjectiveKind,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Sweep the Pareto front with the augmented epsilon-constraint method.
    Pareto {
        path: PathBuf,
        /// Grid points per constrained objective.
        #[arg(short = 'n', long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Objective kept in the objective function; the other two are bounded.
        #[arg(long, default_value = "f1", value_parser = parse_objective)]
        primary: ObjectiveKind,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compare the baseline optima with a capacity, demand or objective scenario.
    Sensitivity {
        path: PathBuf,
        #[arg(long, default_value = "paper", value_parser = parse_capacity)]
        capacity: CapacityMode,
        /// Comma-separated per-level factors for `increased`/`decreased`.
        #[arg(long, value_delimiter = ',')]
        capacity_factors: Vec<f64>,
        /// Multiplier on every demand.
        #[arg(long, default_value_t = 1.0)]
        waste_scale: f64,
        /// `off` minimizes cost alone and evaluates risk and emissions there.
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        sustainability: Toggle,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write the model in LP format.
    Export {
        path: PathBuf,
        #[arg(short, long, default_value = "f1", value_parser = parse_objective)]
        objective: ObjectiveKind,
        /// Bounds on the two constrained objectives; writes the augmented model.
        #[arg(long, value_name = "E1,E2", value_parser = parse_pair)]
        eps: Option<[f64; 2]>,
        /// Ranges of the constrained objectives; computed from the payoff table when omitted.
        #[arg(long, value_name = "R1,R2", value_parser = parse_pair, requires = "eps")]
        ranges: Option<[f64; 2]>,
        /// Output file instead of `<out-dir>/<stem>-<objective>.lp`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    BestBound,
    Dive,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Relative optimality gap.
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Wall-clock limit per solve, in seconds. Results may then vary between runs.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, value_enum)]
    pub node_selection: Option<Selection>,
}

impl SolverArgs {
    pub fn params(&self) -> Result<SolveParams, Failure> {
        let mut p = SolveParams::default();
        if let Some(g) = self.gap {
            p.mip_rel_gap = g;
        }
        if let Some(n) = self.node_limit {
            p.node_limit = n;
        }
        p.time_limit_seconds = self.time_limit;
        if let Some(s) = self.node_selection {
            p.node_selection = match s {
                Selection::BestBound => NodeSelection::BestBound,
                Selection::Dive => NodeSelection::DiveThenBestBound,
            };
        }
        p.validate().map_err(|e| Failure::new(exit::INVALID, e.to_string()))?;
        Ok(p)
    }
}

fn parse_objective(s: &str) -> Result<ObjectiveKind, String> {
    s.parse()
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"))).collect::<Result<_, _>>()?;
    <[f64; 2]>::try_from(v).map_err(|v| format!("expected two comma-separated numbers, got {}", v.len()))
}

fn parse_capacity(s: &str) -> Result<CapacityMode, String> {
    s.parse()
}

/// A command that did not finish cleanly.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure::new(exit::INTERNAL, e.to_string())
    }
}

impl From<MooError> for Failure {
    fn from(e: MooError) -> Self {
        let code = match e {
            MooError::Infeasible(_) => exit::INFEASIBLE,
            MooError::NoIncumbent(_) => exit::LIMIT,
            MooError::EpsConstant(_) | MooError::Grid(_) => exit::INVALID,
            _ => exit::INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

/// What a command produced: text for stdout and the exit status.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
    /// Files written, in order.
    pub written: Vec<PathBuf>,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let out = Output { dir: cli.out_dir.clone() };
    match &cli.command {
        Command::Validate { path, json } => cmd_validate(path, *json),
        Command::Solve { path, objective, solver } => cmd_solve(&out, path, *objective, &solver.params()?),
        Command::Pareto { path, grid, primary, solver } => {
            let cfg = SweepConfig {
                grid: *grid,
                scalarization: Scalarization { primary: *primary },
                params: pareto_params(&solver.params()?),
            };
            cmd_pareto(&out, path, &cfg)
        }
        Command::Sensitivity { path, capacity, capacity_factors, waste_scale, sustainability, solver } => {
            let scenario = Scenario {
                capacity: *capacity,
                capacity_factors: capacity_factors.clone(),
                waste_scale: *waste_scale,
                sustainability: *sustainability == Toggle::On,
            };
            cmd_sensitivity(&out, path, &scenario, &solver.params()?)
        }
        Command::Export { path, objective, eps, ranges, output, solver } => {
            cmd_export(&out, path, *objective, *eps, *ranges, output.as_deref(), &solver.params()?)
        }
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn write(&self, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), Failure> {
        fs::create_dir_all(&self.dir).map_err(|e| io_failure(&self.dir, e))?;
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        written.push(path);
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(exit::IO, format!("{}: {e}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

/// Reads and parses an instance; fatal validation findings are an error.
pub fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let inst = parse_instance(&text).map_err(|e| Failure::new(exit::INVALID, format!("{}: {e}", path.display())))?;
    let fatal: Vec<String> =
        validate_instance(&inst).iter().filter(|f| f.severity == Severity::Fatal).map(ToString::to_string).collect();
    if !fatal.is_empty() {
        return Err(Failure::new(exit::INVALID, format!("{}:\n  {}", path.display(), fatal.join("\n  "))));
    }
    Ok(inst)
}

fn cmd_validate(path: &Path, json: bool) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let inst = parse_instance(&text).map_err(|e| Failure::new(exit::INVALID, format!("{}: {e}", path.display())))?;
    let findings = validate_instance(&inst);
    let fatal = findings.iter().any(|f| f.severity == Severity::Fatal);
    let stdout = if json {
        serde_json::to_string_pretty(&findings).expect("findings serialize") + "\n"
    } else {
        render_validation(&inst, &findings)
    };
    Ok(Outcome { stdout, code: if fatal { exit::INVALID } else { exit::OK }, written: Vec::new() })
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => exit::OK,
        SolveStatus::Infeasible => exit::INFEASIBLE,
        SolveStatus::LimitReached => exit::LIMIT,
        SolveStatus::Unbounded => exit::INTERNAL,
    }
}

fn cmd_solve(out: &Output, path: &Path, objective: ObjectiveKind, params: &SolveParams) -> Result<Outcome, Failure> {
    let inst = load_instance(path)?;
    let solved = solve_instance(&inst, objective, params)?;
    let status = solved.result.status;
    let mut o = Outcome { code: status_code(status), ..Outcome::default() };
    let name = format!("{}-{}", stem(path), objective.label());
    o.stdout = render_solution(&inst, objective, &solved.result, solved.solution.as_ref());
    out.write(&format!("{name}.txt"), &o.stdout, &mut o.written)?;
    if let Some(sol) = &solved.solution {
        out.write(&format!("{name}.json"), &(sol.to_json() + "\n"), &mut o.written)?;
    }
    Ok(o)
}

fn cmd_pareto(out: &Output, path: &Path, cfg: &SweepConfig) -> Result<Outcome, Failure> {
    let inst = load_instance(path)?;
    let front = sweep(&inst, cfg)?;
    let s = stem(path);
    let mut o = Outcome::default();
    out.write(&format!("{s}-front.csv"), &front_csv(&front, cfg.scalarization), &mut o.written)?;
    out.write(&format!("{s}-points.csv"), &points_csv(&front), &mut o.written)?;
    for (i, p) in front.points.iter().enumerate() {
        out.write(&format!("{s}-point-{}.json", i + 1), &(p.solution.to_json() + "\n"), &mut o.written)?;
    }
    o.stdout = render_front(&inst, &front, cfg);
    if front.cells.iter().any(|c| c.status == SolveStatus::LimitReached) {
        o.code = exit::LIMIT;
    }
    Ok(o)
}

/// Per-objective optima of `inst`, or `None` for objectives it cannot reach.
fn optima(inst: &Instance, params: &SolveParams) -> Result<([Option<f64>; 3], u8), Failure> {
    let mut values = [None; 3];
    let mut code = exit::OK;
    for obj in ObjectiveKind::ALL {
        let solved = solve_instance(inst, obj, params)?;
        code = code.max(status_code(solved.result.status));
        values[obj.index()] = solved.solution.map(|s| s.objectives.get(obj));
    }
    Ok((values, code))
}

/// Objectives of the cost-optimal plan.
fn cost_plan(inst: &Instance, params: &SolveParams) -> Result<(Option<Objectives>, u8), Failure> {
    let solved = solve_instance(inst, ObjectiveKind::Cost, params)?;
    let code = status_code(solved.result.status);
    Ok((solved.solution.as_ref().map(|s: &Solution| evaluate_objectives(inst, s)), code))
}

fn cmd_sensitivity(out: &Output, path: &Path, scenario: &Scenario, params: &SolveParams) -> Result<Outcome, Failure> {
    let inst = load_instance(path)?;
    let varied = scenario.apply(&inst).map_err(|e| Failure::new(exit::INVALID, e.to_string()))?;
    let (baseline, base_code) = optima(&inst, params)?;
    if base_code == exit::INFEASIBLE {
        return Err(Failure::new(exit::INFEASIBLE, "baseline is infeasible"));
    }
    let (scen, scen_code) = if scenario.sustainability {
        optima(&varied, params)?
    } else {
        let (objs, code) = cost_plan(&varied, params)?;
        (objs.map_or([None; 3], |o| o.as_array().map(Some)), code)
    };
    if scen_code == exit::INFEASIBLE {
        log::warn!("scenario is infeasible; only the baseline is reported");
    }
    let deltas: Vec<Delta> = ObjectiveKind::ALL
        .iter()
        .map(|&k| Delta { objective: k, baseline: baseline[k.index()], scenario: scen[k.index()] })
        .collect();
    let mut o = Outcome::default();
    o.stdout = report::render_deltas(&inst, scenario, &deltas);
    out.write(&format!("{}-sensitivity.csv", stem(path)), &deltas_csv(&deltas), &mut o.written)?;
    if base_code == exit::LIMIT || scen_code == exit::LIMIT {
        o.code = exit::LIMIT;
    }
    Ok(o)
}

fn cmd_export(
    out: &Output,
    path: &Path,
    objective: ObjectiveKind,
    eps: Option<[f64; 2]>,
    ranges: Option<[f64; 2]>,
    output: Option<&Path>,
    params: &SolveParams,
) -> Result<Outcome, Failure> {
    let inst = load_instance(path)?;
    let (model, name) = match eps {
        None => {
            let (model, _) = build_model(&inst, objective).map_err(|e| Failure::new(exit::INTERNAL, e.to_string()))?;
            (model, format!("{}-{}.lp", stem(path), objective.label()))
        }
        Some(eps) => {
            let scal = Scalarization { primary: objective };
            let ranges = match ranges {
                Some(r) => r,
                None => {
                    let table = payoff_table(&inst, params)?;
                    scal.constrained().map(|k| table.ranges[k.index()])
                }
            };
            let (model, _, _) = build_augmented_model(&inst, scal, eps, ranges)?;
            (model, format!("{}-{}-eps.lp", stem(path), objective.label()))
        }
    };
    let text = export_lp(&model).map_err(|e| Failure::new(exit::INTERNAL, e.to_string()))?;
    let mut o = Outcome::default();
    match output {
        Some(p) => {
            write_file(p, &text)?;
            o.written.push(p.to_path_buf());
        }
        None => out.write(&name, &text, &mut o.written)?,
    }
    o.stdout = format!("wrote {} ({} variables, {} constraints)\n", o.written[0].display(), model.num_vars(), model.num_constraints());
    Ok(o)
}
