//! Command-line front-end: scenario runs, sweeps, bundled presets and the
//! energy-detector calculator. All output is CSV.
//!
//! Exit status: 0 on success, 2 for input errors (unreadable or invalid
//! files, bad flags), 3 when a solve fails to converge, 1 when output
//! cannot be written.

pub mod presets;
pub mod report;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use coexist::mcsim::SimConfig;
use coexist::{
    analyze, detection_probability, parse_scenarios, parse_sweeps, run_sweep,
    simulate_with_detection, simulate_with_trace, EdConfig, Error, Execution, NamedScenario,
    SolverConfig,
};

use presets::PresetKind;
use report::Row;

pub const OUT_DIR_ENV: &str = "COEXIST_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "coexist", version, about = "Wi-Fi / LTE-LAA coexistence throughput model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the scenarios of a file with the analytical model and/or the simulator.
    Run(RunArgs),
    /// Run the parameter sweeps of a file.
    Sweep(SweepArgs),
    /// List bundled presets, or print one.
    Presets(PresetsArgs),
    /// Energy-detector detection probability.
    Detect(DetectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Simulate,
    Both,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Fixed-point residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    /// Weight of the new iterate in the damped iteration.
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            damping: self.damping,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output CSV file. Defaults to `$COEXIST_OUT_DIR/<name>.csv`, else stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, hide_env_values = true)]
    pub out_dir: Option<PathBuf>,
    /// Evaluate independent items on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl OutputArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn destination(&self, stem: &str) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| self.out_dir.as_ref().map(|d| d.join(format!("{stem}.csv"))))
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file (TOML).
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Bundled scenario preset, see `coexist presets`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum, default_value_t = Engine::Analytic)]
    pub engine: Engine,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated channel events, including warm-up.
    #[arg(long, default_value_t = 2_000_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 10_000)]
    pub warmup: u64,
    /// Write a per-event simulator trace (single-scenario files only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep file (TOML) with `[[sweep]]` entries.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Bundled sweep preset, see `coexist presets`.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    /// Print this preset's file.
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Detection thresholds in dBm.
    #[arg(long = "threshold-dbm", required = true, num_args = 1.., allow_negative_numbers = true)]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 22.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    #[arg(long, default_value_t = -94.0, allow_negative_numbers = true)]
    pub noise_dbm: f64,
    #[arg(long, default_value_t = 680)]
    pub samples: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => CliError::Numeric(e.to_string()),
            Error::Io(_) => CliError::Output(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Result of a command: CSV text (if any), where it goes, and diagnostics.
#[derive(Debug, Default)]
pub struct Outcome {
    pub csv: Option<String>,
    pub destination: Option<PathBuf>,
    pub warnings: Vec<String>,
    /// Set when some rows failed to converge.
    pub numeric_failure: bool,
    pub text: Option<String>,
}

fn read_source(path: Option<&Path>, preset: Option<&str>, kind: PresetKind) -> Result<(String, String), CliError> {
    if let Some(name) = preset {
        let p = presets::find(name).ok_or_else(|| CliError::Input(format!("unknown preset `{name}`")))?;
        if p.kind != kind {
            let cmd = match p.kind {
                PresetKind::Scenario => "run",
                PresetKind::Sweep => "sweep",
            };
            return Err(CliError::Input(format!("preset `{name}` is for `coexist {cmd}`")));
        }
        return Ok((p.name.to_owned(), p.text.to_owned()));
    }
    let path = path.expect("clap requires a file or a preset");
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .map_or_else(|| "out".to_owned(), |s| s.to_string_lossy().into_owned());
    Ok((stem, text))
}

fn run_one(item: &NamedScenario, args: &RunArgs, cfg: &SolverConfig) -> (Vec<Row>, Option<String>) {
    let s = item.scenario.effective();
    let mut rows = Vec::new();
    let mut failure = None;
    if matches!(args.engine, Engine::Analytic | Engine::Both) {
        match analyze(&s, cfg) {
            Ok((sol, r)) => rows.push(report::analytic_row(&item.name, &s, &sol, &r)),
            Err(e) => {
                rows.push(report::failed_row(&item.name, &s, &e));
                failure = Some(format!("{}: {e}", item.name));
            }
        }
    }
    if matches!(args.engine, Engine::Simulate | Engine::Both) {
        let sim = SimConfig::new(s)
            .with_seed(args.seed)
            .with_horizon(args.horizon)
            .with_warmup(args.warmup);
        let r = simulate_with_detection(&sim).expect("simulation config validated before the run");
        rows.push(report::simulate_row(&item.name, &s, args.seed, args.horizon, args.warmup, &r));
    }
    (rows, failure)
}

pub fn run_command(args: &RunArgs) -> Result<Outcome, CliError> {
    let (stem, text) = read_source(args.scenario.as_deref(), args.preset.as_deref(), PresetKind::Scenario)?;
    let scenarios = parse_scenarios(&text)?;
    let cfg = args.solver.config();
    cfg.validate()?;
    let simulating = args.engine != Engine::Analytic;
    if simulating {
        for item in &scenarios {
            SimConfig::new(item.scenario)
                .with_horizon(args.horizon)
                .with_warmup(args.warmup)
                .validate()?;
        }
    }
    if let Some(path) = &args.trace {
        if !simulating {
            return Err(CliError::Input("--trace needs --engine simulate or both".into()));
        }
        if scenarios.len() != 1 {
            return Err(CliError::Input("--trace needs a file with a single scenario".into()));
        }
        let file = fs::File::create(path)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        let sim = SimConfig::new(scenarios[0].scenario.effective())
            .with_seed(args.seed)
            .with_horizon(args.horizon)
            .with_warmup(args.warmup);
        simulate_with_trace(&sim, &mut w)?;
        w.flush()
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    }

    let results = args.output.execution().map(&scenarios, |item| run_one(item, args, &cfg));
    let mut outcome = Outcome {
        destination: args.output.destination(&stem),
        ..Outcome::default()
    };
    let mut rows = Vec::new();
    for (r, failure) in results {
        rows.extend(r);
        if let Some(msg) = failure {
            outcome.warnings.push(msg);
            outcome.numeric_failure = true;
        }
    }
    outcome.csv = Some(report::to_csv(&rows).map_err(|e| CliError::Output(e.to_string()))?);
    Ok(outcome)
}

pub fn sweep_command(args: &SweepArgs) -> Result<Outcome, CliError> {
    let (stem, text) = read_source(args.spec.as_deref(), args.preset.as_deref(), PresetKind::Sweep)?;
    let sweeps = parse_sweeps(&text)?;
    let cfg = args.solver.config();
    let exec = args.output.execution();
    let mut outcome = Outcome {
        destination: args.output.destination(&stem),
        ..Outcome::default()
    };
    let mut rows = Vec::new();
    for spec in &sweeps {
        for p in run_sweep(spec, &cfg, exec)? {
            match report::sweep_status(&p) {
                "no_convergence" => {
                    outcome.numeric_failure = true;
                    outcome
                        .warnings
                        .push(format!("{} at {}: solver did not converge", spec.label, p.value));
                }
                "multiple_fixed_points" => outcome.warnings.push(format!(
                    "{} at {}: {} fixed points found",
                    spec.label, p.value, p.fixed_points
                )),
                _ => {}
            }
            rows.push(report::sweep_row(&spec.label, spec.axis.name(), &p));
        }
    }
    outcome.csv = Some(report::to_csv(&rows).map_err(|e| CliError::Output(e.to_string()))?);
    Ok(outcome)
}

pub fn presets_command(args: &PresetsArgs) -> Result<Outcome, CliError> {
    let text = match &args.name {
        Some(name) => presets::find(name)
            .ok_or_else(|| CliError::Input(format!("unknown preset `{name}`")))?
            .text
            .to_owned(),
        None => presets::PRESETS
            .iter()
            .map(|p| {
                let kind = match p.kind {
                    PresetKind::Scenario => "run",
                    PresetKind::Sweep => "sweep",
                };
                format!("{:<14} {:<6} {}\n", p.name, kind, p.summary())
            })
            .collect(),
    };
    Ok(Outcome {
        text: Some(text),
        ..Outcome::default()
    })
}

pub fn detect_command(args: &DetectArgs) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for &t in &args.thresholds {
        let c = EdConfig::from_snr(t, args.snr_db, args.noise_dbm, args.samples);
        c.validate()?;
        rows.push(report::detect_row(&c, args.snr_db, detection_probability(&c)));
    }
    Ok(Outcome {
        csv: Some(report::to_csv(&rows).map_err(|e| CliError::Output(e.to_string()))?),
        destination: args.output.destination("detect"),
        ..Outcome::default()
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Run(a) => run_command(a),
        Command::Sweep(a) => sweep_command(a),
        Command::Presets(a) => presets_command(a),
        Command::Detect(a) => detect_command(a),
    }
}

/// Run a parsed command line, writing results and diagnostics. Returns the
/// process exit status.
pub fn main_with(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    for w in &outcome.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    if let Some(text) = &outcome.text {
        if stdout.write_all(text.as_bytes()).is_err() {
            return 1;
        }
    }
    if let Some(csv) = &outcome.csv {
        let written = match &outcome.destination {
            Some(path) => write_file(path, csv).map(|()| {
                let _ = writeln!(stderr, "wrote {}", path.display());
            }),
            None => stdout
                .write_all(csv.as_bytes())
                .map_err(|e| CliError::Output(e.to_string())),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    }
    if outcome.numeric_failure {
        let _ = writeln!(stderr, "error: some points failed to converge");
        return 3;
    }
    0
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let cli = Cli::parse();
    main_with(&cli, &mut io::stdout().lock(), &mut io::stderr().lock())
}
