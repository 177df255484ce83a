use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use macsim_core::adversary::{
    oblivious_pair_witness, oblivious_station_witness, validate_trace, AdversaryType, ValidationResult,
};
use macsim_core::algorithms::{extract_schedule, ActivityLayout, GroupLayout, PairLayout, ThreadLayout, MAX_GAMMA};
use macsim_core::metrics::{conservation_audit, evaluate_bounds, ExperimentReport};
use macsim_core::rational::{format_rational, parse_rational, Rational};
use macsim_core::scenario::{parse_scenario, parse_trace_csv, write_trace_csv, ScenarioFile};
use macsim_core::{run_simulation, ConfigError, EngineConfig, SimError};

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "macsim", version, about = "Energy-capped multiple access channel routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and check its bounds.
    Run {
        scenario: PathBuf,
        /// Per-round CSV trace; overrides the scenario's output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON summary; overrides the scenario's output path. Printed to stdout when absent.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a scenario once per injection rate.
    Sweep {
        scenario: PathBuf,
        /// Comma-separated rates `p/q`; defaults to the scenario's `sweep` list.
        #[arg(long, value_delimiter = ',', value_parser = rational_arg)]
        rho: Vec<Rational>,
    },
    /// Print the activity layout of an oblivious algorithm.
    Layout {
        algorithm: LayoutAlg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Emit the lower-bound trace against an oblivious algorithm's schedule.
    Witness {
        algorithm: LayoutAlg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = rational_arg)]
        rho: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1")]
        beta: Rational,
        #[arg(long)]
        t: u64,
        #[arg(long, value_enum, default_value_t = WitnessKind::Station)]
        kind: WitnessKind,
        /// Trace CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a `round,station,destination` trace against a leaky bucket.
    ValidateTrace {
        file: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        rho: Rational,
        #[arg(long, value_parser = rational_arg)]
        beta: Rational,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[allow(clippy::enum_variant_names)]
enum LayoutAlg {
    #[value(alias = "kcycle")]
    KCycle,
    #[value(alias = "kclique")]
    KClique,
    #[value(alias = "ksubsets")]
    KSubsets,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Station,
    Pair,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Failure carrying its exit code.
struct Failure(u8, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure(EXIT_BAD_INPUT, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => c.into(),
            SimError::Engine(e) => Failure(EXIT_FAILED_CHECK, e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure(EXIT_BAD_INPUT, format!("{}: {e}", path.display()))
}

fn gamma_from_env() -> Result<Option<u64>, Failure> {
    match std::env::var("MACSIM_MAX_GAMMA") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure(EXIT_BAD_INPUT, format!("MACSIM_MAX_GAMMA must be an integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut scenario: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Failure(EXIT_BAD_INPUT, format!("{}: {e}", path.display())))?;
    if scenario.config.max_gamma.is_none() {
        scenario.config.max_gamma = gamma_from_env()?;
    }
    parse_scenario(&serde_json::to_string(&scenario).expect("scenario serializes"))
        .map_err(|e| Failure(EXIT_BAD_INPUT, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure(EXIT_FAILED_CHECK, format!("{}: {e}", path.display())))
}

/// Prints every check to stderr; true when nothing failed.
fn report_checks(label: &str, report: &ExperimentReport) -> bool {
    let mut ok = true;
    for check in evaluate_bounds(report) {
        eprintln!("{label}{}", check.describe());
        ok &= !check.is_failure();
    }
    let audit = conservation_audit(report);
    if !audit.is_pass() {
        eprintln!("{label}conservation audit: {audit:?}");
        ok = false;
    }
    ok
}

fn run(scenario: &Path, csv: Option<PathBuf>, json: Option<PathBuf>) -> Result<bool, Failure> {
    let s = load_scenario(scenario)?;
    let report = run_simulation(&s.config)?;
    if let Some(path) = csv.or(s.output.csv) {
        write_file(&path, &report.csv_string())?;
    }
    let summary = report.summary_json();
    match json.or(s.output.json) {
        Some(path) => write_file(&path, &summary)?,
        None => print!("{summary}"),
    }
    Ok(report_checks("", &report))
}

fn with_suffix(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{i}.{ext}"),
        None => format!("{stem}.{i}"),
    };
    path.with_file_name(name)
}

fn sweep(scenario: &Path, rho: Vec<Rational>) -> Result<bool, Failure> {
    let s = load_scenario(scenario)?;
    let rates = if rho.is_empty() { s.sweep.clone() } else { rho };
    if rates.is_empty() {
        return Err(Failure(EXIT_BAD_INPUT, "no rates to sweep".into()));
    }
    let configs = rates
        .iter()
        .map(|&r| {
            let c = EngineConfig { rho: r, ..s.config.clone() };
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<ExperimentReport, SimError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(|| run_simulation(c))).collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let mut ok = true;
    for (i, (rate, result)) in rates.iter().zip(results).enumerate() {
        let label = format!("rho={}: ", format_rational(rate));
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                let Failure(_, msg) = e.into();
                eprintln!("{label}{msg}");
                ok = false;
                continue;
            }
        };
        if let Some(path) = &s.output.csv {
            write_file(&with_suffix(path, i), &report.csv_string())?;
        }
        if let Some(path) = &s.output.json {
            write_file(&with_suffix(path, i), &report.summary_json())?;
        }
        let sm = &report.summary;
        println!(
            "{},{},{},{},{}",
            format_rational(rate),
            sm.max_queue,
            sm.max_latency_delivered.map(|l| l.to_string()).unwrap_or_default(),
            sm.undelivered,
            sm.max_on_count
        );
        ok &= report_checks(&label, &report);
    }
    Ok(ok)
}

fn gamma_limit() -> Result<u64, Failure> {
    Ok(gamma_from_env()?.unwrap_or(MAX_GAMMA))
}

fn build_layout(alg: LayoutAlg, n: usize, k: usize) -> Result<Box<dyn ActivityLayout>, Failure> {
    Ok(match alg {
        LayoutAlg::KCycle => Box::new(GroupLayout::new(n, k)?),
        LayoutAlg::KClique => Box::new(PairLayout::new(n, k)?),
        LayoutAlg::KSubsets => Box::new(ThreadLayout::with_limit(n, k, gamma_limit()?)?),
    })
}

fn layout(alg: LayoutAlg, n: usize, k: usize) -> Result<bool, Failure> {
    let json = match alg {
        LayoutAlg::KCycle => serde_json::to_string_pretty(&GroupLayout::new(n, k)?),
        LayoutAlg::KClique => serde_json::to_string_pretty(&PairLayout::new(n, k)?),
        LayoutAlg::KSubsets => serde_json::to_string_pretty(&ThreadLayout::with_limit(n, k, gamma_limit()?)?),
    }
    .expect("layouts serialize");
    println!("{json}");
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn witness(
    alg: LayoutAlg,
    n: usize,
    k: usize,
    rho: Rational,
    beta: Rational,
    t: u64,
    kind: WitnessKind,
    out: Option<PathBuf>,
) -> Result<bool, Failure> {
    if t == 0 {
        return Err(Failure(EXIT_BAD_INPUT, "--t must be positive".into()));
    }
    let adv = AdversaryType::new(rho, beta)?;
    let schedule = extract_schedule(build_layout(alg, n, k)?.as_ref(), t);
    let inapplicable = |e: macsim_core::adversary::WitnessError| Failure(EXIT_BAD_INPUT, e.to_string());
    let trace = match kind {
        WitnessKind::Station => {
            let w = oblivious_station_witness(&schedule, &adv, t).map_err(inapplicable)?;
            eprintln!(
                "station {} on in {} of {t} rounds; residual at least {}",
                w.station,
                w.on_count,
                format_rational(&w.residual)
            );
            w.trace
        }
        WitnessKind::Pair => {
            let w = oblivious_pair_witness(&schedule, &adv, t).map_err(inapplicable)?;
            eprintln!(
                "pair ({}, {}) jointly on in {} of {t} rounds; residual at least {}",
                w.source,
                w.destination,
                w.joint_on_count,
                format_rational(&w.residual)
            );
            w.trace
        }
    };
    let csv = write_trace_csv(&trace);
    match out {
        Some(path) => write_file(&path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(true)
}

fn validate(file: &Path, rho: Rational, beta: Rational) -> Result<bool, Failure> {
    let adv = AdversaryType::new(rho, beta)?;
    let text = std::fs::read_to_string(file).map_err(|e| io_failure(file, e))?;
    let trace = parse_trace_csv(&text).map_err(|e| Failure(EXIT_BAD_INPUT, format!("{}: {e}", file.display())))?;
    match validate_trace(&trace, &adv) {
        ValidationResult::Pass => {
            println!("admissible: {} packets over {} rounds", trace.total(), trace.horizon());
            Ok(true)
        }
        ValidationResult::Violation { start, end, count } => {
            let allowed = rho * Rational::from_integer((end - start + 1) as i128) + beta;
            println!(
                "violation: {count} packets in rounds [{start}, {end}], at most {} allowed",
                format_rational(&allowed)
            );
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { scenario, csv, json } => run(&scenario, csv, json),
        Command::Sweep { scenario, rho } => sweep(&scenario, rho),
        Command::Layout { algorithm, n, k } => layout(algorithm, n, k),
        Command::Witness { algorithm, n, k, rho, beta, t, kind, out } => {
            witness(algorithm, n, k, rho, beta, t, kind, out)
        }
        Command::ValidateTrace { file, rho, beta } => validate(&file, rho, beta),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED_CHECK),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
