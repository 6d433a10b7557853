use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polling_core::approx::{self, pcl_rhs};
use polling_core::experiments::{self, presets, ComparisonConfig, Grid, Oracle, Subset};
use polling_core::sim::{expected_events, simulate_replication_with_events, EventRecord};
use polling_core::{derive_moments, simulate, Discipline, Method, SimConfig, SystemSpec};
use serde::Serialize;

mod specfile;

use specfile::SpecFile;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Budget(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Budget(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<polling_core::Error> for CliError {
    fn from(e: polling_core::Error) -> Self {
        use polling_core::Error as E;
        match e {
            E::NumericalBudget { .. } => CliError::Budget(format!("{e}; raise --max-events or shorten the run")),
            E::ZeroLoad => CliError::Validation(format!(
                "{e}; the simulator needs arrivals to measure, so give a positive load \
                 (set rho in the spec or pass --rho), or use `polling analyze` for the rho = 0 limit"
            )),
            E::Data(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "polling", version, about = "Mean waiting times in cyclic polling systems")]
struct Cli {
    /// Worker threads for simulation and test-bed runs.
    #[arg(long, env = "POLLING_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form mean waiting times, queue lengths and interpolation constants.
    Analyze {
        spec: PathBuf,
        #[arg(long, default_value = "interpolation", value_parser = parse_method)]
        method: Method,
        /// Override the load in the spec file.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Mean waiting times over a grid of loads, as CSV.
    Sweep {
        /// Spec file; required unless --preset is given.
        spec: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "spec")]
        preset: Option<Preset>,
        /// start:stop:step, stop inclusive.
        #[arg(long, default_value = "0.1:0.9:0.1")]
        rho_grid: String,
        #[arg(long, value_delimiter = ',', default_value = "interpolation", value_parser = parse_method)]
        methods: Vec<Method>,
        /// Add simulated points (default for the figure1 preset).
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete-event simulation with batch-means confidence intervals, as JSON.
    Simulate {
        spec: PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
        /// Write every server event of replication 0 as JSON lines.
        #[arg(long)]
        event_log: Option<PathBuf>,
    },
    /// Approximation versus simulation over the test bed; writes tables and raw rows.
    Testbed {
        #[arg(long, value_enum, default_value_t = DisciplineArg::Exhaustive)]
        discipline: DisciplineArg,
        #[arg(long, value_enum, default_value_t = SubsetArg::Sampled)]
        subset: SubsetArg,
        #[arg(long, value_enum, default_value_t = GridArg::Table1)]
        grid: GridArg,
        /// Defaults to every method for exhaustive service, the interpolation for gated.
        #[arg(long, value_delimiter = ',', value_parser = parse_method)]
        methods: Option<Vec<Method>>,
        /// Cases per (N, rho) cell in the sampled subset.
        #[arg(long, default_value_t = 4)]
        per_cell: usize,
        #[arg(long, default_value_t = 2010)]
        sample_seed: u64,
        /// Allow the full test bed and lift the total event budget.
        #[arg(long)]
        paper_fidelity: bool,
        /// Total simulated events allowed without --paper-fidelity.
        #[arg(long, default_value_t = 2e10)]
        event_budget: f64,
        /// Relative CI half-width above which oracle values are flagged.
        #[arg(long, default_value_t = experiments::DEFAULT_CI_FLAG)]
        ci_flag: f64,
        /// Base cycle count for rho > 0.9 runs before their 0.1 / (1 - rho)
        /// lengthening; defaults to --cycles.
        #[arg(long)]
        heavy_cycles: Option<u64>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy)]
struct SimArgs {
    /// Measured cycles per replication.
    #[arg(long, default_value_t = SimConfig::default().measured_cycles)]
    cycles: u64,
    #[arg(long, default_value_t = SimConfig::default().warmup_cycles)]
    warmup: u64,
    #[arg(long, default_value_t = SimConfig::default().replications)]
    reps: u32,
    #[arg(long, default_value_t = SimConfig::default().batch_count)]
    batches: u32,
    #[arg(long, default_value_t = SimConfig::default().base_seed)]
    seed: u64,
    #[arg(long, default_value_t = SimConfig::default().max_events)]
    max_events: u64,
}

impl SimArgs {
    fn config(&self) -> CliResult<SimConfig> {
        let cfg = SimConfig {
            warmup_cycles: self.warmup,
            measured_cycles: self.cycles,
            replications: self.reps,
            base_seed: self.seed,
            batch_count: self.batches,
            max_events: self.max_events,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Three queues, hyperexponential arrivals; simulated points included.
    Figure1,
    /// Two Poisson queues with switch-over times smaller than service times.
    SmallSwitchover,
}

#[derive(Clone, Copy, ValueEnum)]
enum DisciplineArg {
    Exhaustive,
    Gated,
}

impl From<DisciplineArg> for Discipline {
    fn from(d: DisciplineArg) -> Self {
        match d {
            DisciplineArg::Exhaustive => Discipline::Exhaustive,
            DisciplineArg::Gated => Discipline::Gated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsetArg {
    Poisson,
    Sampled,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Table1,
    HighScv,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut stdout = std::io::stdout().lock();
    match run(cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, out: &mut dyn std::io::Write) -> CliResult<()> {
    let text = match command {
        Command::Analyze { spec, method, rho, format } => {
            let system = SpecFile::load(&spec)?.system(rho)?;
            let report = analyze(&system, method)?;
            match format {
                Format::Json => to_json(&report)?,
                Format::Csv => report.to_csv()?,
                Format::Text => report.to_text(),
            }
        }
        Command::Sweep { spec, preset, rho_grid, methods, simulate, sim, out: path } => {
            let grid = parse_rho_grid(&rho_grid)?;
            let build: Box<dyn Fn(f64) -> polling_core::Result<SystemSpec>> = match (preset, spec) {
                (Some(Preset::Figure1), _) => Box::new(presets::showcase),
                (Some(Preset::SmallSwitchover), _) => Box::new(presets::small_switchover),
                (None, Some(path)) => {
                    let file = SpecFile::load(&path)?;
                    Box::new(move |rho| file.system(Some(rho)).map_err(|e| polling_core::Error::InvalidConfig(e.to_string())))
                }
                (None, None) => return Err(CliError::Validation("sweep needs a spec file or --preset".into())),
            };
            let with_sim = simulate || matches!(preset, Some(Preset::Figure1));
            let csv = sweep(&grid, &*build, &methods, with_sim.then_some(sim))?;
            if let Some(path) = path {
                write_file(&path, &csv)?;
                return Ok(());
            }
            csv
        }
        Command::Simulate { spec, rho, sim, event_log } => {
            let system = SpecFile::load(&spec)?.system(rho)?;
            let cfg = sim.config()?;
            let estimate = simulate(&system, &cfg)?;
            if let Some(path) = event_log {
                write_event_log(&system, &cfg, &path)?;
            }
            to_json(&estimate)?
        }
        Command::Testbed {
            discipline,
            subset,
            grid,
            methods,
            per_cell,
            sample_seed,
            paper_fidelity,
            event_budget,
            ci_flag,
            heavy_cycles,
            sim,
            out: dir,
        } => {
            let discipline = Discipline::from(discipline);
            let grid = match grid {
                GridArg::Table1 => Grid::table1(),
                GridArg::HighScv => Grid::high_scv(),
            };
            let subset = match subset {
                SubsetArg::Poisson => Subset::Poisson,
                SubsetArg::Sampled => Subset::Sampled { per_cell, seed: sample_seed },
                SubsetArg::Full if paper_fidelity => Subset::Full,
                SubsetArg::Full => {
                    return Err(CliError::Budget(
                        "the full test bed is a long run; pass --paper-fidelity to allow it".into(),
                    ))
                }
            };
            let methods = methods.unwrap_or_else(|| match discipline {
                Discipline::Exhaustive => Method::ALL.to_vec(),
                Discipline::Gated => vec![Method::Interpolation],
            });
            let cfg = ComparisonConfig {
                sim: sim.config()?,
                heavy_base_cycles: heavy_cycles,
                ci_flag,
                ..ComparisonConfig::default()
            };
            let budget = if paper_fidelity { f64::INFINITY } else { event_budget };
            testbed(discipline, &subset.select(&grid), &methods, &cfg, budget, &dir)?
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    method: Method,
    discipline: Discipline,
    rho: f64,
    /// `sum rho_i E[W_i] - pseudo-conservation right-hand side`.
    pcl_residual: f64,
    queues: Vec<AnalyzeQueue>,
}

#[derive(Debug, Serialize)]
struct AnalyzeQueue {
    queue: usize,
    load: f64,
    mean_wait: f64,
    mean_queue_length: f64,
    k0: f64,
    k1: f64,
    k2: f64,
    omega: f64,
}

fn analyze(spec: &SystemSpec, method: Method) -> CliResult<AnalyzeReport> {
    let result = approx::mean_wait(spec, method)?;
    let dm = derive_moments(spec)?;
    let mut queues = Vec::with_capacity(spec.n());
    let mut weighted = 0.0;
    for (i, q) in result.queues.iter().enumerate() {
        let k = approx::constants(&dm, spec.discipline(), i)?;
        weighted += spec.queue_load(i) * q.mean_wait;
        queues.push(AnalyzeQueue {
            queue: i,
            load: spec.queue_load(i),
            mean_wait: q.mean_wait,
            mean_queue_length: q.mean_queue_length,
            k0: k.k0,
            k1: k.k1,
            k2: k.k2,
            omega: k.omega(),
        });
    }
    Ok(AnalyzeReport {
        method,
        discipline: spec.discipline(),
        rho: spec.rho(),
        pcl_residual: weighted - pcl_rhs(spec)?,
        queues,
    })
}

impl AnalyzeReport {
    fn to_csv(&self) -> CliResult<String> {
        #[derive(Serialize)]
        struct Row {
            method: Method,
            discipline: Discipline,
            rho: f64,
            queue: usize,
            load: f64,
            mean_wait: f64,
            mean_queue_length: f64,
            k0: f64,
            k1: f64,
            k2: f64,
            omega: f64,
            pcl_residual: f64,
        }
        let rows = self.queues.iter().map(|q| Row {
            method: self.method,
            discipline: self.discipline,
            rho: self.rho,
            queue: q.queue,
            load: q.load,
            mean_wait: q.mean_wait,
            mean_queue_length: q.mean_queue_length,
            k0: q.k0,
            k1: q.k1,
            k2: q.k2,
            omega: q.omega,
            pcl_residual: self.pcl_residual,
        });
        csv_string(rows)
    }

    fn to_text(&self) -> String {
        let mut s = format!(
            "method {}  discipline {}  rho {}\n{:>5} {:>10} {:>14} {:>14} {:>12} {:>12} {:>12} {:>12}\n",
            self.method, self.discipline, self.rho, "queue", "load", "E[W]", "E[L]", "K0", "K1", "K2", "omega"
        );
        for q in &self.queues {
            let _ = writeln!(
                s,
                "{:>5} {:>10.6} {:>14.6} {:>14.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                q.queue, q.load, q.mean_wait, q.mean_queue_length, q.k0, q.k1, q.k2, q.omega
            );
        }
        let _ = writeln!(s, "pcl residual {:.3e}", self.pcl_residual);
        s
    }
}

/// Serializes rows with headers; floats keep full round-trip precision.
fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn parse_rho_grid(text: &str) -> CliResult<Vec<f64>> {
    let usage = || CliError::Validation(format!("--rho-grid expects start:stop:step with 0 <= start <= stop < 1 and step > 0, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage())?;
    let [start, stop, step] = parts[..] else { return Err(usage()) };
    if !(step > 0.0 && start >= 0.0 && start <= stop && stop < 1.0) {
        return Err(usage());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Serialize)]
struct SweepRow {
    rho: f64,
    queue: usize,
    method: String,
    mean_wait: f64,
    ci_half_width: Option<f64>,
}

fn sweep(
    grid: &[f64],
    build: &dyn Fn(f64) -> polling_core::Result<SystemSpec>,
    methods: &[Method],
    sim: Option<SimArgs>,
) -> CliResult<String> {
    let cfg = sim.map(|s| s.config()).transpose()?;
    let mut rows = Vec::new();
    for &rho in grid {
        let spec = build(rho)?;
        for &m in methods {
            for (queue, w) in approx::mean_wait(&spec, m)?.mean_waits().into_iter().enumerate() {
                rows.push(SweepRow { rho, queue, method: m.name().into(), mean_wait: w, ci_half_width: None });
            }
        }
        if let (Some(cfg), true) = (&cfg, rho > 0.0) {
            for (queue, q) in simulate(&spec, cfg)?.queues.iter().enumerate() {
                rows.push(SweepRow {
                    rho,
                    queue,
                    method: "simulation".into(),
                    mean_wait: q.mean_wait,
                    ci_half_width: Some(q.ci_half_width),
                });
            }
        }
    }
    csv_string(rows)
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_event_log(spec: &SystemSpec, cfg: &SimConfig, path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let mut failure = None;
    let mut observer = |ev: &EventRecord| {
        if failure.is_none() {
            if let Err(e) = serde_json::to_writer(&mut w, ev).map_err(std::io::Error::from).and_then(|_| w.write_all(b"\n")) {
                failure = Some(e);
            }
        }
    };
    simulate_replication_with_events(spec, cfg, 0, &mut observer)?;
    if let Some(e) = failure {
        return Err(CliError::Io(format!("cannot write {}: {e}", path.display())));
    }
    w.flush().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn testbed(
    discipline: Discipline,
    cases: &[experiments::TestBedCase],
    methods: &[Method],
    cfg: &ComparisonConfig,
    event_budget: f64,
    dir: &Path,
) -> CliResult<String> {
    let mut events = 0.0;
    for (i, case) in cases.iter().enumerate() {
        let spec = experiments::materialize_case(case, discipline)?;
        events += expected_events(&spec, &cfg.sim_for(i, case.rho));
    }
    if events > event_budget {
        return Err(CliError::Budget(format!(
            "about {events:.2e} simulated events exceed the budget of {event_budget:.2e}; \
             shorten the runs, raise --event-budget or pass --paper-fidelity"
        )));
    }
    // Fail on an unusable output location before spending the simulation time.
    let staging = Staging::create(dir)?;

    let report = experiments::run_comparison(cases, discipline, methods, Oracle::Simulation, cfg)?;
    let mut files = vec![("raw.csv".to_string(), report.to_csv()?)];
    for t in report.standard_tables(discipline) {
        files.push((format!("{}.csv", t.name), t.to_csv()));
        files.push((format!("{}.txt", t.name), t.to_text()));
    }

    let mut summary = format!(
        "{} cases, {} queue observations per method, discipline {discipline}, {} flagged (CI above {:.0}%)\n\
         mean relative error (%) by number of queues\n",
        cases.len(),
        report.rows.len() / methods.len().max(1),
        report.flagged(),
        100.0 * cfg.ci_flag
    );
    for m in methods {
        let _ = write!(summary, "{:>14}", m.name());
        for (n, e) in report.mean_by_n(*m) {
            let _ = write!(summary, "  N={n}: {:6.2}", 100.0 * e);
        }
        summary.push('\n');
    }
    files.push(("summary.txt".to_string(), summary.clone()));
    staging.commit(&files)?;
    Ok(summary)
}

/// Writes a set of files next to the target directory and moves them in
/// only once all of them have been written.
struct Staging {
    target: PathBuf,
    path: PathBuf,
}

impl Staging {
    fn create(target: &Path) -> CliResult<Self> {
        let io = |e: std::io::Error| CliError::Io(format!("cannot use output directory {}: {e}", target.display()));
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        if target.exists() && !target.is_dir() {
            return Err(io(std::io::Error::new(std::io::ErrorKind::AlreadyExists, "not a directory")));
        }
        let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
        let path = parent.join(format!(".{name}.partial-{}", std::process::id()));
        std::fs::create_dir_all(&path).map_err(io)?;
        Ok(Staging { target: target.to_path_buf(), path })
    }

    fn commit(self, files: &[(String, String)]) -> CliResult<()> {
        let io = |e: std::io::Error| CliError::Io(format!("cannot write to {}: {e}", self.target.display()));
        for (name, content) in files {
            std::fs::write(self.path.join(name), content).map_err(io)?;
        }
        if !self.target.exists() {
            return std::fs::rename(&self.path, &self.target).map_err(io);
        }
        let mut moved = Vec::new();
        for (name, _) in files {
            let dest = self.target.join(name);
            if let Err(e) = std::fs::rename(self.path.join(name), &dest) {
                for m in moved {
                    let _ = std::fs::remove_file(m);
                }
                return Err(io(e));
            }
            moved.push(dest);
        }
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.path);
    }
}
