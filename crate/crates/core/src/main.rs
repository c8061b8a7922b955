use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crnoma::experiments::{self, SweepRange, SweepSpec, ThroughputMode};
use crnoma::{Error, SchemeKind};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    FixedRate,
    AdaptiveRate,
}

/// Sweep the CR-NOMA schemes through closed forms and Monte Carlo, and write CSV.
#[derive(Debug, Parser)]
#[command(name = "crnoma", version)]
struct Cli {
    /// JSON sweep configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig1a, fig1b, fig2a, fig2b or fig3.
    #[arg(long)]
    preset: Option<String>,
    /// Schemes to run (repeat or comma-separate): RS, QOS_SIC, NH_SIC, CSI_SIC, OMA_PRIMARY.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    #[arg(long = "p0-db", allow_negative_numbers = true)]
    p0_db: Option<f64>,
    #[arg(long = "p1-db", allow_negative_numbers = true)]
    p1_db: Option<f64>,
    /// Primary target rate (BPCU).
    #[arg(long)]
    r0: Option<f64>,
    /// Secondary target rate (BPCU).
    #[arg(long)]
    r1: Option<f64>,
    /// Swept range as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// RNG streams per grid point.
    #[arg(long)]
    streams: Option<u32>,
    #[arg(long = "throughput-mode", value_enum)]
    throughput_mode: Option<Mode>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare Monte Carlo against the closed forms and print a report.
    #[arg(long)]
    validate: bool,
    #[arg(long = "sigma-band", default_value_t = 4.0)]
    sigma_band: f64,
    /// Write the validation report as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long = "print-config")]
    print_config: bool,
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.into(), reason: reason.into() }
}

fn build_spec(cli: &Cli) -> Result<SweepSpec, Error> {
    let mut spec = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            SweepSpec::from_json(&text)?
        }
        (None, Some(name)) => SweepSpec::preset(name)?,
        (None, None) => SweepSpec::preset("fig1a")?,
    };
    if cli.config.is_some() {
        if let Some(name) = &cli.preset {
            return Err(config_err("preset", format!("--preset {name} conflicts with --config")));
        }
    }
    if !cli.scheme.is_empty() {
        spec.schemes = cli
            .scheme
            .iter()
            .map(|s| SchemeKind::parse(s).ok_or_else(|| config_err("scheme", format!("unknown scheme `{s}`"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = cli.p0_db {
        spec.p0_db = v;
        spec.power_coupling = experiments::PowerCoupling::Fixed;
    }
    if let Some(v) = cli.p1_db {
        spec.p1_db = v;
    }
    if let Some(v) = cli.r0 {
        spec.r0_target = v;
    }
    if let Some(v) = cli.r1 {
        spec.r1_target = v;
    }
    if let Some(r) = &cli.range {
        let parts: Vec<f64> = r
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| config_err("range", e.to_string()))?;
        let [start, stop, step] = parts[..] else {
            return Err(config_err("range", "expected start:stop:step"));
        };
        spec.range = SweepRange { start, stop, step };
    }
    if let Some(v) = cli.trials {
        spec.trials = v;
    }
    if let Some(v) = cli.seed {
        spec.seed = v;
    }
    if let Some(v) = cli.streams {
        spec.streams = v;
    }
    if let Some(m) = cli.throughput_mode {
        spec.throughput_mode = match m {
            Mode::FixedRate => ThroughputMode::FixedRate,
            Mode::AdaptiveRate => ThroughputMode::AdaptiveRate,
        };
    }
    spec.validate()?;
    Ok(spec)
}

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Io { .. } | Error::Csv { .. } => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn write_rows(rows: &[experiments::ResultRow], out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => experiments::emit_csv(rows, path),
        None => experiments::write_csv(rows, std::io::stdout().lock())
            .map_err(|source| Error::Csv { path: PathBuf::from("<stdout>"), source }),
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let spec = build_spec(cli)?;
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&spec).expect("spec serializes"));
        return Ok(true);
    }
    if !cli.validate {
        let rows = experiments::run_sweep(&spec)?;
        write_rows(&rows, &cli.out)?;
        return Ok(true);
    }
    let (rows, report) = experiments::validate(&spec, cli.sigma_band)?;
    if cli.out.is_some() {
        write_rows(&rows, &cli.out)?;
    }
    println!("{report}");
    if let Some(path) = &cli.summary {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json).map_err(|source| Error::Io { path: path.clone(), source })?;
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
