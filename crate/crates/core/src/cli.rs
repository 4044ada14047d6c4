//! The `mgt` command line: scenario runs, kernel classification, resolvent
//! export and convergence studies.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assumptions::{classify, AssumptionReport};
use crate::config::{ConfigError, Scenario, ScenarioConfig};
use crate::diagnostics::{analyze, render_svg, write_csv, EnergyReport};
use crate::discretization::ParamsError;
use crate::kernels::{resolvent, Kernel};
use crate::stepper::{run, DiracModal, StepperError, Trajectory};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 2,
    Compatibility = 3,
    Params = 4,
    Solver = 5,
    /// Energy went negative although the parameters are admissible.
    EnergyAnomaly = 6,
}

#[derive(Debug)]
pub struct Failure {
    pub code: Exit,
    pub message: String,
}

impl Failure {
    fn new(code: Exit, message: impl ToString) -> Self {
        Failure { code, message: message.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(Exit::Config, format!("config error: {e}"))
    }
}

impl From<StepperError> for Failure {
    fn from(e: StepperError) -> Self {
        let code = match &e {
            StepperError::Params(_) => Exit::Params,
            StepperError::Compatibility(_) => Exit::Compatibility,
            StepperError::MissingRateOfChange | StepperError::Grid { .. } => Exit::Config,
            StepperError::Kernel(_) | StepperError::ResolventGrid { .. } | StepperError::Solver { .. } => Exit::Solver,
        };
        let hint = match &e {
            StepperError::Params(ParamsError::NotWellPosed { .. }) => {
                " (well-posedness needs gamma >= tau c^2 and nu > 0)"
            }
            _ => "",
        };
        Failure::new(code, format!("{e}{hint}"))
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(Exit::Config, format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "mgt", version, about = "Moore-Gibson-Thompson equations with memory on an interval")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Scenario file (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files
    #[arg(long, global = true, value_name = "PATH")]
    pub out_dir: Option<PathBuf>,
    /// Print the normalized scenario and exit
    #[arg(long, global = true)]
    pub dump_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write energy CSV, SVG and a text report
    Run,
    /// Classify a kernel against the well-posedness, decay and weak-decay conditions
    CheckKernel {
        /// Kernel spec, e.g. "exponential(beta=1)"; defaults to the scenario's kernel
        spec: Option<String>,
        /// Also write assumptions.csv to the output directory
        #[arg(long)]
        csv: bool,
    },
    /// Export the resolvent A delta_0 + r of a kernel on a uniform grid
    Resolvent {
        /// Kernel spec; defaults to the scenario's kernel
        spec: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Halve the time step repeatedly and report errors and observed orders
    Convergence {
        /// Number of step sizes dt, dt/2, ...
        #[arg(long, default_value_t = 4)]
        refinements: usize,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Config as i32 } else { Exit::Ok as i32 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            Exit::Ok as i32
        }
        Err(f) => {
            eprintln!("mgt: {}", f.message);
            f.code as i32
        }
    }
}

/// Runs a parsed command, returning what would be printed on success.
pub fn execute(cli: &Cli) -> Result<String, Failure> {
    let cfg = match &cli.global.config {
        Some(p) => Some(ScenarioConfig::load(p)?),
        None => None,
    };
    if cli.global.dump_config {
        let c = cfg.ok_or_else(|| Failure::new(Exit::Config, "--dump-config needs --config"))?;
        return Ok(c.to_toml());
    }
    let out_dir = cli.global.out_dir.clone();
    match &cli.command {
        Command::Run => {
            let c = cfg.ok_or_else(|| Failure::new(Exit::Config, "run needs --config"))?;
            cmd_run(&c, out_dir.as_deref().unwrap_or(Path::new("."))).map(|o| o.summary)
        }
        Command::CheckKernel { spec, csv } => {
            let kernel = kernel_from(spec.as_deref(), cfg.as_ref())?;
            let report = classify(&kernel);
            if *csv {
                let dir = out_dir.as_deref().unwrap_or(Path::new("."));
                write_file(dir, "assumptions.csv", &report.to_csv())?;
            }
            Ok(report.to_string())
        }
        Command::Resolvent { spec, dt, n } => {
            let kernel = kernel_from(spec.as_deref(), cfg.as_ref())?;
            let text = cmd_resolvent(&kernel, *dt, *n)?;
            match &out_dir {
                Some(dir) => {
                    let p = write_file(dir, "resolvent.csv", &text)?;
                    Ok(format!("wrote {}\n", p.display()))
                }
                None => Ok(text),
            }
        }
        Command::Convergence { refinements } => {
            let c = cfg.ok_or_else(|| Failure::new(Exit::Config, "convergence needs --config"))?;
            let table = cmd_convergence(&c, *refinements)?;
            let text = table.to_string();
            if let Some(dir) = &out_dir {
                write_file(dir, "convergence.csv", &table.to_csv())?;
            }
            Ok(text)
        }
    }
}

fn kernel_from(spec: Option<&str>, cfg: Option<&ScenarioConfig>) -> Result<Kernel, Failure> {
    let s = match (spec, cfg) {
        (Some(s), _) => s.to_string(),
        (None, Some(c)) => c.kernel.spec.clone(),
        (None, None) => return Err(Failure::new(Exit::Config, "give a kernel spec or --config")),
    };
    Kernel::parse(&s).map_err(|e| Failure::new(Exit::Config, format!("kernel: {e}")))
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| io_fail(&p, e))?;
    Ok(p)
}

pub struct RunOutput {
    pub trajectory: Trajectory,
    pub energy: EnergyReport,
    pub assumptions: AssumptionReport,
    pub report: String,
    pub summary: String,
}

fn build(cfg: &ScenarioConfig) -> Result<Scenario, Failure> {
    let sc = cfg.scenario()?;
    sc.params.validate().map_err(|e| Failure::new(Exit::Params, e))?;
    sc.params.require_wellposed().map_err(|e| Failure::from(StepperError::Params(e)))?;
    Ok(sc)
}

/// Runs a scenario, writes its outputs under `out_dir` and returns the report.
pub fn cmd_run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunOutput, Failure> {
    let sc = build(cfg)?;
    let assumptions = classify(&sc.kernel);
    let traj = run(&sc.system, &sc.params, &sc.kernel, sc.dt, sc.steps)?;
    let c_a2 = assumptions.c_a2.unwrap_or(0.0);
    let ctilde = if assumptions.decay.passed() { assumptions.ctilde } else { None };
    let energy = analyze(&traj, c_a2, ctilde, cfg.fit_window());

    let mut csv = Vec::new();
    write_csv(&energy, &mut csv).map_err(|e| io_fail(out_dir, e))?;
    write_file(out_dir, &cfg.output.csv, &String::from_utf8_lossy(&csv))?;
    if cfg.diagnostics.svg {
        write_file(out_dir, &cfg.output.svg, &render_svg(&energy))?;
    }
    let report = render_report(cfg, &assumptions, &energy, c_a2, assumptions.c_a2.is_none());
    write_file(out_dir, &cfg.output.report, &report)?;

    let e0 = energy.snaps[0].e;
    let et = energy.snaps.last().map(|s| s.e).unwrap_or(f64::NAN);
    let mut summary = format!(
        "E(0) = {e0:.6e}, E(T) = {et:.6e}, {}, dissipation {}\nwrote {}\n",
        fit_text(&energy),
        if energy.dissipation.pass { "pass" } else { "FAIL" },
        out_dir.join(&cfg.output.report).display()
    );
    if energy.negative_energy_steps > 0 {
        return Err(Failure::new(
            Exit::EnergyAnomaly,
            format!("energy became negative at {} steps although gamma >= tau c^2", energy.negative_energy_steps),
        ));
    }
    if !energy.dissipation.pass {
        summary.push_str("warning: dissipation budget violated\n");
    }
    Ok(RunOutput { trajectory: traj, energy, assumptions, report, summary })
}

fn fit_text(e: &EnergyReport) -> String {
    match &e.fit {
        Ok(f) => f.verdict(),
        Err(err) => format!("no exponential fit ({err})"),
    }
}

fn render_report(cfg: &ScenarioConfig, a: &AssumptionReport, e: &EnergyReport, c_a2: f64, c_a2_assumed: bool) -> String {
    let mut s = String::new();
    let p = cfg.params();
    let _ = writeln!(s, "scenario");
    let _ = writeln!(s, "  tau = {}, c = {}, gamma = {}, nu = {}", p.tau, p.c, p.gamma, p.nu);
    let _ = writeln!(s, "  gamma - tau c^2 = {:.6e} (decay regime: {})", p.gamma - p.tau_c2(), p.decay_ok());
    let _ = writeln!(s, "  L = {}, modes = {}, dt = {}, steps = {}", cfg.domain.length, cfg.domain.n_modes, cfg.time.dt, cfg.time.n_steps);
    let _ = writeln!(s, "\nkernel classification");
    for line in a.to_string().lines() {
        let _ = writeln!(s, "  {line}");
    }
    let _ = writeln!(s, "\ncompatibility: ok");
    let first = &e.snaps[0];
    let last = e.snaps.last().unwrap();
    let _ = writeln!(s, "\nenergy");
    let _ = writeln!(s, "  E(0) = {:.9e}", first.e);
    let _ = writeln!(s, "  E(T) = {:.9e}", last.e);
    let _ = writeln!(s, "  norm_mod(0) = {:.9e}, norm_mod(T) = {:.9e}", first.norm_mod, last.norm_mod);
    let _ = writeln!(s, "  fit window = [{}, {}]", e.window.0, e.window.1);
    let _ = writeln!(s, "  {}", fit_text(e));
    match e.lambda_fit() {
        Some(l) => {
            let _ = writeln!(s, "  lambda_fit = {l:.9e}, r2 = {:.6}", e.fit_r2());
        }
        None => {
            let _ = writeln!(s, "  lambda_fit = none, r2 = {:.6}", e.fit_r2());
        }
    }
    let d = &e.dissipation;
    let _ = writeln!(s, "\ndissipation budget");
    let _ = writeln!(s, "  C_A2 = {c_a2}{}", if c_a2_assumed { " (not certified; 0 assumed)" } else { "" });
    let _ = writeln!(s, "  RHS = {:.9e}, min residual = {:.3e}: {}", d.rhs, d.min_residual, if d.pass { "pass" } else { "fail" });
    if cfg.diagnostics.lyapunov {
        if let (Some(lc), Some(v)) = (&e.constants, e.sandwich_violations) {
            let _ = writeln!(s, "\nlyapunov functional");
            let _ = writeln!(
                s,
                "  N0 = {}, N1 = {}, c0 = {:.6}, c_tilde = {}",
                lc.n0,
                lc.n1,
                lc.c0,
                lc.ctilde.map_or("n/a".to_string(), |c| format!("{c:.6e}"))
            );
            let _ = writeln!(s, "  sandwich (N0-c0)E <= L <= (N0+c0)E violations: {v}");
        }
    }
    if cfg.diagnostics.bound_checks {
        if let Some(l) = &e.bounds {
            let _ = writeln!(s, "\npointwise bounds (constant {:.6})", l.constant);
            let _ = writeln!(
                s,
                "  c^2 |grad psi|^2 <= K E: worst ratio {:.6}, violations {}",
                l.worst_gradient_ratio, l.gradient_violations
            );
            let _ = writeln!(
                s,
                "  |tau (K*psi_t)_t|^2 <= K E_mod: worst ratio {:.6}, violations {}",
                l.worst_pressure_ratio, l.pressure_violations
            );
        }
    }
    let _ = writeln!(s, "\nnegative energy steps: {}", e.negative_energy_steps);
    s
}

/// CSV: a `# atom_A=` comment, then `t,r` rows on `t_n = n dt`.
pub fn cmd_resolvent(kernel: &Kernel, dt: f64, n: usize) -> Result<String, Failure> {
    if !(dt > 0.0 && dt.is_finite()) || n == 0 {
        return Err(Failure::new(Exit::Config, "resolvent grid needs dt > 0 and n >= 1"));
    }
    let r = resolvent(kernel, dt, n).map_err(|e| Failure::new(Exit::Solver, format!("resolvent: {e}")))?;
    let mut s = format!("# atom_A={:?}\nt,r\n", r.atom);
    for (i, v) in r.r_samples().iter().enumerate() {
        let _ = writeln!(s, "{:?},{:?}", i as f64 * dt, v);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub steps: usize,
    pub max_error: f64,
    /// Error ratio to the previous (coarser) row.
    pub ratio: Option<f64>,
    /// `log2(ratio)`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dt,steps,max_error,ratio,order\n");
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
        for r in &self.rows {
            let _ = writeln!(s, "{:?},{},{:?},{},{}", r.dt, r.steps, r.max_error, opt(r.ratio), opt(r.order));
        }
        s
    }
}

impl std::fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "reference: {}", self.reference)?;
        writeln!(f, "{:>12} {:>9} {:>14} {:>8} {:>8}", "dt", "steps", "max error", "ratio", "order")?;
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
            writeln!(f, "{:>12.4e} {:>9} {:>14.6e} {:>8} {:>8}", r.dt, r.steps, r.max_error, opt(r.ratio), opt(r.order))?;
        }
        Ok(())
    }
}

/// Runs the scenario at `dt, dt/2, ..., dt/2^(k-1)` over the same horizon.
/// The Dirac kernel is compared with its exact modal solution; other kernels
/// with one further halving, on the coarse nodes.
pub fn cmd_convergence(cfg: &ScenarioConfig, refinements: usize) -> Result<ConvergenceTable, Failure> {
    if refinements == 0 {
        return Err(Failure::new(Exit::Config, "refinements must be at least 1"));
    }
    let sc = build(cfg)?;
    let exact: Option<Vec<DiracModal>> = if sc.kernel.is_dirac() {
        let s = &sc.system;
        (0..s.n)
            .map(|i| DiracModal::new(&sc.params, sc.kernel.point_mass, s.mu[i], (s.xi0[i], s.xi1[i], s.xi2[i])).ok())
            .collect()
    } else {
        None
    };
    let levels = if exact.is_some() { refinements } else { refinements + 1 };
    let mut runs = Vec::with_capacity(levels);
    for k in 0..levels {
        let f = 1usize << k;
        runs.push(run(&sc.system, &sc.params, &sc.kernel, sc.dt / f as f64, sc.steps * f)?);
    }
    let mut rows = Vec::new();
    for (k, tr) in runs.iter().take(refinements).enumerate() {
        let mut err = 0.0f64;
        for m in 0..tr.n_modes() {
            for n in 0..=tr.steps {
                let reference = match &exact {
                    Some(ex) => ex[m].eval(tr.times[n], 0),
                    None => {
                        let fine = runs.last().unwrap();
                        fine.xi[m][n << (levels - 1 - k)]
                    }
                };
                err = err.max((tr.xi[m][n] - reference).abs());
            }
        }
        let ratio = rows.last().map(|p: &ConvergenceRow| p.max_error / err).filter(|r: &f64| r.is_finite());
        rows.push(ConvergenceRow {
            dt: tr.dt,
            steps: tr.steps,
            max_error: err,
            ratio,
            order: ratio.map(f64::log2),
        });
    }
    let reference = match &exact {
        Some(_) => "exact modal solution of the Dirac kernel".to_string(),
        None => format!("run at dt = {:e}", runs.last().unwrap().dt),
    };
    Ok(ConvergenceTable { reference, rows })
}
