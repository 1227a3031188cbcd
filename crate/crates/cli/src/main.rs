use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wiretap_sdof::converse::aligned::{Codebook, DEFAULT_AIS_D_MAX, DEFAULT_GRID_POINTS};
use wiretap_sdof::experiment::{
    self, AisConfig, ConverseCheck, ConverseRequest, ExperimentConfig, ExperimentReport,
    OutputFormat,
};
use wiretap_sdof::sdof::{compute_sdof, fmt_ratio};
use wiretap_sdof::{AntennaConfig, Error};

/// Directory used for output files when `--out` is not given.
const OUT_DIR_ENV: &str = "WIRETAP_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "wiretap",
    version,
    about = "Secure DoF of the blind MIMOME wiretap channel with delayed CSIT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact secure DoF of one antenna configuration.
    Sdof(SdofArgs),
    /// Achievability and network comparison tables.
    Tables(TablesArgs),
    /// Run a scheme end to end: encode, transmit, decode, measure leakage.
    Simulate(SimulateArgs),
    /// Rank-analogue converse checks.
    Converse(ConverseArgs),
    /// Aligned-image-set enumeration on the deterministic channel.
    Ais(AisArgs),
}

#[derive(Args)]
struct Output {
    /// json or csv.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Output file (a directory for multi-table CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave out the run section (workers, timing).
    #[arg(long)]
    canonical: bool,
}

#[derive(Args)]
struct SdofArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n1: usize,
    /// Eavesdropper antenna counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    neve: Vec<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TablesArgs {
    /// Compare every (m, n1, n_max) up to these maxima instead of the examples.
    #[arg(long, value_delimiter = ',', value_name = "M,N1,NMAX")]
    sweep: Option<Vec<usize>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Add unit-variance receiver noise.
    #[arg(long)]
    noisy: bool,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConverseArgs {
    /// lal, eri-delayed, eri-nocsit, eri-nocsit-cond, joint, prop1, prop2, or all.
    #[arg(long, default_value = "all")]
    lemma: String,
    /// Experiment config (JSON); defaults to m=4, n1=2, one 3-antenna eavesdropper.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    /// Receiver antennas: n1 followed by the eavesdroppers. For `joint`,
    /// exactly three values (n1, n2, n3).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AisArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    /// Slots.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: u32,
    #[arg(long, default_value_t = DEFAULT_AIS_D_MAX)]
    d_max: i64,
    /// Legitimate channels sampled.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only the all-zero input.
    #[arg(long)]
    zero_codebook: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalFailure(_) | Error::DegenerateDraw(_) => {
                Failure::Runtime(e.to_string())
            }
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sdof(a) => cmd_sdof(a),
        Command::Tables(a) => cmd_tables(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Converse(a) => cmd_converse(a),
        Command::Ais(a) => cmd_ais(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `--out`, else `$WIRETAP_OUT_DIR/<default_name>`, else stdout (`None`).
fn target(out: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    out.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name)))
}

fn emit(text: &str, path: Option<PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&p, text)?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_sdof(a: SdofArgs) -> Result<bool, Failure> {
    let config = AntennaConfig::new(a.m, a.n1, a.neve)?;
    let r = compute_sdof(&config);
    let decimal = *r.value.numer() as f64 / *r.value.denom() as f64;
    let text = match a.output.format {
        None => format!("{}\t{decimal:.6}\n", fmt_ratio(&r.value)),
        Some(OutputFormat::Json) => {
            let v = serde_json::json!({
                "m": config.m(),
                "n1": config.n1(),
                "eavesdroppers": config.eavesdroppers(),
                "n_max": config.n_max(),
                "sdof": r,
                "decimal": decimal,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Some(OutputFormat::Csv) => format!(
            "m,n1,n_max,m_bar,n_bar,sdof,decimal\n{},{},{},{},{},{},{decimal}\n",
            config.m(),
            config.n1(),
            config.n_max(),
            r.m_bar,
            r.n_bar,
            fmt_ratio(&r.value)
        ),
    };
    emit(&text, a.output.out)?;
    Ok(true)
}

fn cmd_tables(a: TablesArgs) -> Result<bool, Failure> {
    let bounds = match a.sweep.as_deref() {
        None => None,
        Some(&[m, n1, n_max]) => Some((m, n1, n_max)),
        Some(_) => return Err(Failure::Invalid("--sweep needs M,N1,NMAX".into())),
    };
    let t = experiment::tables(bounds);
    match a.output.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => emit(
            &format!("{}\n", t.to_json()),
            target(&a.output.out, "tables.json"),
        )?,
        OutputFormat::Csv => match target(&a.output.out, "tables") {
            Some(dir) => {
                fs::create_dir_all(&dir)?;
                for (name, body) in t.csv_files() {
                    emit(&body, Some(dir.join(name)))?;
                }
            }
            None => {
                let sections: Vec<String> = t
                    .csv_files()
                    .into_iter()
                    .map(|(name, body)| format!("# {name}\n{body}"))
                    .collect();
                print!("{}", sections.join("\n"));
            }
        },
    }
    Ok(true)
}

fn write_report(report: &ExperimentReport, output: &Output, name: &str) -> Result<bool, Failure> {
    let format = output.format.unwrap_or(OutputFormat::Json);
    let body = match format {
        OutputFormat::Json if output.canonical => report.canonical_json(),
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.checks_csv(),
    };
    let ext = if format == OutputFormat::Json {
        "json"
    } else {
        "csv"
    };
    emit(
        &format!("{}\n", body.trim_end()),
        target(&output.out, &format!("{name}.{ext}")),
    )?;
    let passed = report.checks.iter().filter(|c| c.pass).count();
    eprintln!(
        "{name}: {} ({passed}/{} checks)",
        if report.pass { "PASS" } else { "FAIL" },
        report.checks.len()
    );
    Ok(report.pass)
}

fn apply_common(cfg: &mut ExperimentConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn cmd_simulate(a: SimulateArgs) -> Result<bool, Failure> {
    let mut cfg = load_config(&a.config)?;
    apply_common(&mut cfg, &a.common);
    if a.noisy {
        cfg.noise = wiretap_sdof::model::NoiseMode::UnitVariance;
    }
    let report = experiment::simulate(&cfg)?;
    write_report(&report, &a.output, "simulate")
}

fn cmd_converse(a: ConverseArgs) -> Result<bool, Failure> {
    let checks = ConverseCheck::parse_selection(&a.lemma)?;
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => {
            let mut c = ExperimentConfig::new(AntennaConfig::triple(4, 2, 3)?);
            c.trials = 1000;
            c
        }
    };
    let mut req = ConverseRequest {
        checks,
        ..Default::default()
    };
    let joint_only = req.checks == [ConverseCheck::Joint];
    if let Some(n) = &a.n {
        if joint_only {
            let [n1, n2, n3] = n[..] else {
                return Err(Failure::Invalid("joint needs --n n1,n2,n3".into()));
            };
            req.receivers = Some((n1, n2, n3));
        }
        let (&n1, eaves) = n
            .split_first()
            .ok_or_else(|| Failure::Invalid("--n needs at least two values".into()))?;
        cfg.antennas = AntennaConfig::new(a.m.unwrap_or(cfg.antennas.m()), n1, eaves.to_vec())?;
    } else if let Some(m) = a.m {
        cfg.antennas =
            AntennaConfig::new(m, cfg.antennas.n1(), cfg.antennas.eavesdroppers().to_vec())?;
    }
    req.m = a.m;
    apply_common(&mut cfg, &a.common);
    let report = experiment::converse(&cfg, &req)?;
    write_report(&report, &a.output, "converse")
}

fn cmd_ais(a: AisArgs) -> Result<bool, Failure> {
    let cfg = AisConfig {
        p: a.p,
        m: a.m,
        n0: a.n0,
        n: a.n,
        grid_points: a.grid,
        d_max: a.d_max,
        samples: a.samples,
        seed: a.seed,
        codebook: if a.zero_codebook {
            Codebook::ZeroOnly
        } else {
            Codebook::Full
        },
        workers: a.workers,
    };
    let report = experiment::ais(&cfg)?;
    write_report(&report, &a.output, "ais")
}
