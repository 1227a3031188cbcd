//! Seeded experiment configuration, runners, and reports.
//!
//! Every runner is deterministic in its configuration and master seed:
//! trials are evaluated in parallel but collected in index order, and the
//! only run-dependent data (worker count, timing) lives in [`RunInfo`], which
//! the canonical JSON form omits.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::converse::aligned::{
    check_alignment_bounds, AlignedImageSetReport, ChannelGrid, Codebook, DeterministicChannelSpec,
    DEFAULT_AIS_D_MAX, DEFAULT_GRID_POINTS,
};
use crate::converse::rank::{
    check_eri_delayed, check_eri_nocsit, check_joint_claim, check_least_alignment,
    check_proposition1, check_proposition2, LinearStrategy, RankCheckReport, TrialPlan,
};
use crate::error::{Error, Result};
use crate::model::{
    apply_channel, generate_channel, rng_from_seed, sub_seed, trial_seed, AntennaConfig,
    ChannelLaw, NoiseMode, LEGITIMATE,
};
use crate::receiver::{
    decode_case_a, decode_legitimate, leakage_dof, normalized_mse, secrecy_rank_check,
    LinearEncoding, SLOPE_POWERS, SLOPE_TOL,
};
use crate::scheme::{case_a_applies, encode_case_a, encode_two_phase, TwoPhasePlan};
use crate::sdof::{
    achievability_table, comparison_table, compute_sdof, fmt_ratio, network_table, sweep,
    AchievabilityRow, ComparisonRow, NetworkRow,
};

pub const SCHEMA: &str = "wiretap-experiment/1";
pub const TOOL: &str = concat!("wiretap-sdof ", env!("CARGO_PKG_VERSION"));

/// Degenerate draws tolerated per trial before it is reported as failed.
pub const MAX_RESAMPLES: u32 = 16;
/// Largest acceptable fraction of degenerate draws.
pub const MAX_DEGENERATE_RATE: f64 = 1e-3;

const RESAMPLE_STREAM: u64 = 1000;
const POWER_NOTE: &str = "symbols drawn with variance p/m_bar; two-phase blocks scaled by a constant so the expected per-slot transmit power equals p";
const SURROGATE_NOTE: &str =
    "entropy inequalities are checked through linear-rank surrogates: h(.) -> rank, h(a|c) -> rank[a;c] - rank(c)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::InvalidParameter(format!(
                "unknown format {s:?}, expected json or csv"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed distance of a DoF slope from its target.
    pub slope: f64,
    /// Relative error of a noiseless decode.
    pub decode: f64,
    /// Normalized per-symbol MSE bound in noisy mode.
    pub mse: f64,
    /// Slack on each per-draw rank inequality.
    pub converse: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope: SLOPE_TOL,
            decode: 1e-8,
            mse: 1e-4,
            converse: 1e-9,
        }
    }
}

fn default_schema() -> String {
    SCHEMA.into()
}
fn default_trials() -> u64 {
    100
}
fn default_power() -> f64 {
    1e8
}
fn default_p0() -> f64 {
    SLOPE_POWERS.0
}
fn default_p1() -> f64 {
    SLOPE_POWERS.1
}
fn default_noise() -> NoiseMode {
    NoiseMode::Off
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub antennas: AntennaConfig,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Transmit power used for encoding and noisy decoding.
    #[serde(default = "default_power")]
    pub power: f64,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default = "default_p1")]
    pub p1: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_noise")]
    pub noise: NoiseMode,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(antennas: AntennaConfig) -> Self {
        Self {
            schema: default_schema(),
            antennas,
            trials: default_trials(),
            seed: 0,
            power: default_power(),
            p0: default_p0(),
            p1: default_p1(),
            tolerances: Tolerances::default(),
            noise: default_noise(),
            workers: None,
            format: OutputFormat::Json,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        if !(self.p0 > 1.0 && self.p1 > self.p0 && self.p1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 1 < p0 < p1, got p0={}, p1={}",
                self.p0, self.p1
            )));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power must be positive, got {}",
                self.power
            )));
        }
        let t = &self.tolerances;
        if [t.slope, t.decode, t.mse, t.converse]
            .iter()
            .any(|&x| !(x > 0.0 && x.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive, got {t:?}"
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Configuration of an aligned-image-set run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AisConfig {
    pub p: u64,
    pub m: usize,
    pub n0: usize,
    pub n: usize,
    pub grid_points: u32,
    pub d_max: i64,
    pub samples: usize,
    pub seed: u64,
    pub codebook: Codebook,
    pub workers: Option<usize>,
}

impl AisConfig {
    pub fn new(p: u64, m: usize) -> Self {
        Self {
            p,
            m,
            n0: 1,
            n: 1,
            grid_points: DEFAULT_GRID_POINTS,
            d_max: DEFAULT_AIS_D_MAX,
            samples: 50,
            seed: 0,
            codebook: Codebook::Full,
            workers: None,
        }
    }

    pub fn spec(&self) -> Result<DeterministicChannelSpec> {
        let grid = ChannelGrid::new(self.grid_points, self.d_max)?;
        Ok(
            DeterministicChannelSpec::new(self.p, self.m, self.n0, self.n, grid)?
                .with_codebook(self.codebook),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ConfigEcho {
    Experiment(ExperimentConfig),
    Ais(AisConfig),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub passed: u64,
    pub total: u64,
    pub detail: String,
}

impl CheckOutcome {
    fn counted(name: &str, passed: u64, total: u64, detail: String) -> Self {
        Self {
            name: name.into(),
            pass: passed == total,
            passed,
            total,
            detail,
        }
    }

    fn flag(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            pass,
            passed: u64::from(pass),
            total: 1,
            detail,
        }
    }
}

/// Run-dependent metadata, excluded from the canonical report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunInfo {
    pub workers: usize,
    pub elapsed_ms: u128,
    pub finished_unix_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub command: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub converse: Vec<RankCheckReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aligned: Option<AlignedImageSetReport>,
    pub failing_seeds: Vec<u64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
}

impl ExperimentReport {
    /// The worker count is dropped from the echo; it belongs to [`RunInfo`].
    fn new(command: &str, config: ConfigEcho) -> Self {
        let config = match config {
            ConfigEcho::Experiment(c) => {
                ConfigEcho::Experiment(ExperimentConfig { workers: None, ..c })
            }
            ConfigEcho::Ais(c) => ConfigEcho::Ais(AisConfig { workers: None, ..c }),
        };
        Self {
            tool: TOOL.into(),
            command: command.into(),
            config,
            note: None,
            checks: Vec::new(),
            simulation: None,
            converse: Vec::new(),
            skipped: Vec::new(),
            aligned: None,
            failing_seeds: Vec::new(),
            pass: true,
            run: None,
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.pass);
        self.failing_seeds.sort_unstable();
        self.failing_seeds.dedup();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the run section; identical for identical config and seed.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.run = None;
        r.to_json()
    }

    /// One line per check: `name,pass,passed,total,detail`.
    pub fn checks_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "pass", "passed", "total", "detail"])
            .expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                c.pass.to_string(),
                c.passed.to_string(),
                c.total.to_string(),
                c.detail.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

fn with_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<(T, RunInfo)> {
    let pool = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let out = pool.install(f)?;
    let finished = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    Ok((
        out,
        RunInfo {
            workers: pool.current_num_threads(),
            elapsed_ms: start.elapsed().as_millis(),
            finished_unix_ms: finished,
        },
    ))
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// m ≤ n_max: nothing can be sent securely.
    None,
    SingleSlot,
    TwoPhase,
}

/// One trial after resampling degenerate draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    /// Seed of the draw that was evaluated.
    pub seed: u64,
    pub resamples: u32,
    pub decoded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    pub legitimate_slope: f64,
    pub eavesdropper_slope_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decodable_dims: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eavesdropper_ranks_equal: Option<bool>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub scheme: SchemeKind,
    pub sdof: String,
    pub symbols_per_block: usize,
    pub block_len: usize,
    /// Information symbols per slot actually delivered.
    pub rate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_scale: Option<f64>,
    pub power_normalization: String,
    pub trials: u64,
    pub degenerate: u64,
    pub degenerate_rate: f64,
    pub degenerate_seeds: Vec<u64>,
    pub legitimate_slope_mean: Option<f64>,
    pub eavesdropper_slope_max: Option<f64>,
    pub max_relative_error: Option<f64>,
    pub mean_mse: Option<f64>,
    pub records: Vec<TrialRecord>,
}

struct Attempt {
    decoded_error: f64,
    legit_slope: f64,
    eve_slope: f64,
    decodable: Option<usize>,
    eve_equal: Option<bool>,
}

fn relative_error(v_hat: &crate::linalg::CVector, v: &crate::linalg::CVector) -> f64 {
    let scale = v.norm();
    let err = (v_hat - v).norm();
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn attempt_case_a(cfg: &ExperimentConfig, seed: u64) -> Result<Attempt> {
    let a = &cfg.antennas;
    let real = generate_channel(a, 1, ChannelLaw::default(), sub_seed(seed, 0))?;
    let enc = encode_case_a(a, cfg.power, &mut rng_from_seed(sub_seed(seed, 1)))?;
    let ys = apply_channel(
        &real,
        &enc.x,
        cfg.noise,
        &mut rng_from_seed(sub_seed(seed, 2)),
    )?;
    let v_hat = decode_case_a(a, &ys[LEGITIMATE].values, &real)?;
    let err = match cfg.noise {
        NoiseMode::Off => relative_error(&v_hat, &enc.v),
        NoiseMode::UnitVariance => normalized_mse(&v_hat, &enc.v, cfg.power / a.m() as f64),
    };
    let lin = LinearEncoding::case_a(a)?;
    let slopes = slopes(&lin, &real, cfg)?;
    Ok(Attempt {
        decoded_error: err,
        legit_slope: slopes.0,
        eve_slope: slopes.1,
        decodable: None,
        eve_equal: None,
    })
}

fn attempt_two_phase(cfg: &ExperimentConfig, plan: &TwoPhasePlan, seed: u64) -> Result<Attempt> {
    let a = &cfg.antennas;
    let real = generate_channel(
        a,
        plan.block_len(),
        ChannelLaw::default(),
        sub_seed(seed, 0),
    )?;
    let enc = encode_two_phase(a, cfg.power, &real, &mut rng_from_seed(sub_seed(seed, 1)))?;
    let ys = apply_channel(
        &real,
        &enc.transmit.values,
        cfg.noise,
        &mut rng_from_seed(sub_seed(seed, 2)),
    )?;
    let v_hat = decode_legitimate(plan, enc.scale, &ys[LEGITIMATE].values, &real)?;
    let err = match cfg.noise {
        NoiseMode::Off => relative_error(&v_hat, &enc.v),
        NoiseMode::UnitVariance => normalized_mse(&v_hat, &enc.v, cfg.power / plan.m_bar as f64),
    };
    let mut decodable = None;
    let mut eve_equal = true;
    for j in 0..a.receiver_count() {
        let r = secrecy_rank_check(&enc.precoder, &real, j)?;
        if j == LEGITIMATE {
            decodable = Some(r.decodable_dims);
        } else {
            eve_equal &= r.rank_full == r.rank_noise;
        }
    }
    let slopes = slopes(&LinearEncoding::from_encoding(&enc), &real, cfg)?;
    Ok(Attempt {
        decoded_error: err,
        legit_slope: slopes.0,
        eve_slope: slopes.1,
        decodable,
        eve_equal: Some(eve_equal),
    })
}

/// (legitimate slope, largest eavesdropper slope).
fn slopes(
    lin: &LinearEncoding,
    real: &crate::model::ChannelRealization,
    cfg: &ExperimentConfig,
) -> Result<(f64, f64)> {
    let legit = leakage_dof(lin, real, LEGITIMATE, cfg.p0, cfg.p1)?.slope;
    let mut eve = f64::NEG_INFINITY;
    for j in 1..real.receiver_count() {
        eve = eve.max(leakage_dof(lin, real, j, cfg.p0, cfg.p1)?.slope);
    }
    Ok((legit, eve))
}

fn resampled_seed(base: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        base
    } else {
        sub_seed(base, RESAMPLE_STREAM + u64::from(attempt))
    }
}

/// Runs one trial, redrawing on degenerate draws. Returns the record and the
/// seeds of every degenerate draw.
fn run_trial<F>(cfg: &ExperimentConfig, index: u64, attempt: F) -> Result<(TrialRecord, Vec<u64>)>
where
    F: Fn(u64) -> Result<Attempt>,
{
    let base = trial_seed(cfg.seed, index);
    let mut degenerate = Vec::new();
    for k in 0..=MAX_RESAMPLES {
        let seed = resampled_seed(base, k);
        match attempt(seed) {
            Err(Error::DegenerateDraw(_)) => degenerate.push(seed),
            Err(e) => return Err(e),
            Ok(a) => {
                let limit = match cfg.noise {
                    NoiseMode::Off => cfg.tolerances.decode,
                    NoiseMode::UnitVariance => cfg.tolerances.mse,
                };
                let (relative_error, mse) = match cfg.noise {
                    NoiseMode::Off => (Some(a.decoded_error), None),
                    NoiseMode::UnitVariance => (None, Some(a.decoded_error)),
                };
                let record = TrialRecord {
                    index,
                    seed,
                    resamples: k,
                    decoded: a.decoded_error <= limit,
                    relative_error,
                    mse,
                    legitimate_slope: a.legit_slope,
                    eavesdropper_slope_max: a.eve_slope,
                    decodable_dims: a.decodable,
                    eavesdropper_ranks_equal: a.eve_equal,
                    failure: None,
                };
                return Ok((record, degenerate));
            }
        }
    }
    let record = TrialRecord {
        index,
        seed: base,
        resamples: MAX_RESAMPLES,
        decoded: false,
        relative_error: None,
        mse: None,
        legitimate_slope: f64::NAN,
        eavesdropper_slope_max: f64::NAN,
        decodable_dims: None,
        eavesdropper_ranks_equal: None,
        failure: Some(format!(
            "{} consecutive degenerate draws",
            MAX_RESAMPLES + 1
        )),
    };
    Ok((record, degenerate))
}

/// Encode, transmit, decode, and measure leakage for `config.trials` blocks.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (report, run) = with_pool(cfg.workers, || simulate_in_pool(cfg))?;
    Ok(ExperimentReport {
        run: Some(run),
        ..report
    })
}

fn simulate_in_pool(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let a = &cfg.antennas;
    let sdof = compute_sdof(a).value;
    let plan = TwoPhasePlan::new(a).ok();
    let (scheme, symbols, block) = match &plan {
        Some(p) => (SchemeKind::TwoPhase, p.info_len(), p.block_len()),
        None if case_a_applies(a) => (SchemeKind::SingleSlot, a.m() - a.n_max(), 1),
        None => (SchemeKind::None, 0, 1),
    };
    let rate = Rational64::new(symbols as i64, block as i64);
    let mut report = ExperimentReport::new("simulate", ConfigEcho::Experiment(cfg.clone()));

    let outcomes: Vec<(TrialRecord, Vec<u64>)> = match scheme {
        SchemeKind::None => Vec::new(),
        SchemeKind::SingleSlot => (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, i, |s| attempt_case_a(cfg, s)))
            .collect::<Result<_>>()?,
        SchemeKind::TwoPhase => {
            let plan = plan.as_ref().expect("two-phase plan");
            (0..cfg.trials)
                .into_par_iter()
                .map(|i| run_trial(cfg, i, |s| attempt_two_phase(cfg, plan, s)))
                .collect::<Result<_>>()?
        }
    };
    let records: Vec<TrialRecord> = outcomes.iter().map(|(r, _)| r.clone()).collect();
    let degenerate_seeds: Vec<u64> = outcomes
        .iter()
        .flat_map(|(_, d)| d.iter().copied())
        .collect();
    let evaluated: Vec<&TrialRecord> = records.iter().filter(|r| r.failure.is_none()).collect();
    let n_eval = evaluated.len() as u64;
    let degenerate = degenerate_seeds.len() as u64;
    let draws = n_eval + degenerate;
    let degenerate_rate = if draws == 0 {
        0.0
    } else {
        degenerate as f64 / draws as f64
    };

    let tol = &cfg.tolerances;
    let decoded = evaluated.iter().filter(|r| r.decoded).count() as u64;
    let legit_ok = evaluated
        .iter()
        .filter(|r| (r.legitimate_slope - symbols as f64).abs() <= tol.slope)
        .count() as u64;
    let eve_ok = evaluated
        .iter()
        .filter(|r| r.eavesdropper_slope_max <= tol.slope)
        .count() as u64;
    let total = cfg.trials;
    let decode_what = match cfg.noise {
        NoiseMode::Off => format!("relative error <= {:e}", tol.decode),
        NoiseMode::UnitVariance => {
            format!("normalized MSE <= {:e} at p = {:e}", tol.mse, cfg.power)
        }
    };
    if scheme != SchemeKind::None {
        report
            .checks
            .push(CheckOutcome::counted("decode", decoded, total, decode_what));
        report.checks.push(CheckOutcome::counted(
            "legitimate-leakage",
            legit_ok,
            total,
            format!("|slope - {symbols}| <= {}", tol.slope),
        ));
        report.checks.push(CheckOutcome::counted(
            "eavesdropper-leakage",
            eve_ok,
            total,
            format!("slope <= {} at every eavesdropper", tol.slope),
        ));
    }
    if scheme == SchemeKind::TwoPhase {
        let ranks_ok = evaluated
            .iter()
            .filter(|r| {
                r.eavesdropper_ranks_equal == Some(true) && r.decodable_dims == Some(symbols)
            })
            .count() as u64;
        report.checks.push(CheckOutcome::counted(
            "secrecy-ranks",
            ranks_ok,
            total,
            format!("eavesdropper rank_full = rank_noise; legitimate decodable_dims = {symbols}"),
        ));
    }
    report.checks.push(CheckOutcome::flag(
        "rate-equals-sdof",
        rate == sdof,
        format!(
            "{symbols} symbols / {block} slots = {} vs SDoF {}",
            fmt_ratio(&rate),
            fmt_ratio(&sdof)
        ),
    ));
    report.checks.push(CheckOutcome::flag(
        "degenerate-rate",
        degenerate_rate < MAX_DEGENERATE_RATE,
        format!("{degenerate} degenerate of {draws} draws"),
    ));

    for r in &records {
        let bad = !r.decoded
            || (r.legitimate_slope - symbols as f64).abs() > tol.slope
            || r.eavesdropper_slope_max.is_nan()
            || r.eavesdropper_slope_max > tol.slope
            || r.eavesdropper_ranks_equal == Some(false)
            || r.decodable_dims.is_some_and(|d| d != symbols);
        if bad {
            report.failing_seeds.push(r.seed);
        }
    }
    let mean = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Option<f64> {
        let v: Vec<f64> = evaluated.iter().filter_map(|r| f(r)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let max = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Option<f64> {
        evaluated.iter().filter_map(|r| f(r)).reduce(f64::max)
    };
    report.simulation = Some(SimulationSummary {
        scheme,
        sdof: fmt_ratio(&sdof),
        symbols_per_block: symbols,
        block_len: block,
        rate: fmt_ratio(&rate),
        power_scale: plan.as_ref().map(|p| p.power_scale(&ChannelLaw::default())),
        power_normalization: POWER_NOTE.into(),
        trials: total,
        degenerate,
        degenerate_rate,
        degenerate_seeds,
        legitimate_slope_mean: mean(&|r| Some(r.legitimate_slope)),
        eavesdropper_slope_max: max(&|r| Some(r.eavesdropper_slope_max)),
        max_relative_error: max(&|r| r.relative_error),
        mean_mse: mean(&|r| r.mse),
        records,
    });
    Ok(report.finish())
}

// ---------------------------------------------------------------- converse

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConverseCheck {
    LeastAlignment,
    EriDelayed,
    EriNocsit,
    EriNocsitConditional,
    Joint,
    Proposition1,
    Proposition2,
}

impl ConverseCheck {
    pub const ALL: [Self; 7] = [
        Self::LeastAlignment,
        Self::EriDelayed,
        Self::EriNocsit,
        Self::EriNocsitConditional,
        Self::Joint,
        Self::Proposition1,
        Self::Proposition2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LeastAlignment => "lal",
            Self::EriDelayed => "eri-delayed",
            Self::EriNocsit => "eri-nocsit",
            Self::EriNocsitConditional => "eri-nocsit-cond",
            Self::Joint => "joint",
            Self::Proposition1 => "prop1",
            Self::Proposition2 => "prop2",
        }
    }

    /// A single name, or `all`.
    pub fn parse_selection(s: &str) -> Result<Vec<Self>> {
        if s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .map(|c| vec![c])
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check {s:?}")))
    }
}

impl fmt::Display for ConverseCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConverseRequest {
    pub checks: Vec<ConverseCheck>,
    /// Transmit antennas for the joint check; defaults to the config's m.
    pub m: Option<usize>,
    /// (n₁, n₂, n₃) for the joint check; defaults to (n₁, 1, 1).
    pub receivers: Option<(usize, usize, usize)>,
}

/// Channel-independent strategies at full and at reduced dimension, plus the
/// two-phase precoder when the configuration is in its regime.
pub fn converse_strategies(config: &AntennaConfig, horizon: usize) -> Vec<LinearStrategy> {
    let mut out = vec![
        LinearStrategy::ChannelIndependent {
            dims: horizon * config.m(),
        },
        LinearStrategy::ChannelIndependent { dims: horizon },
    ];
    if TwoPhasePlan::new(config).is_ok() {
        out.push(LinearStrategy::TwoPhase {
            config: config.clone(),
        });
    }
    out
}

fn run_converse_check(
    check: ConverseCheck,
    cfg: &ExperimentConfig,
    req: &ConverseRequest,
    strategy: &LinearStrategy,
    horizon: usize,
) -> Result<RankCheckReport> {
    let a = &cfg.antennas;
    let plan = TrialPlan {
        trials: cfg.trials,
        master_seed: cfg.seed,
        tol: cfg.tolerances.converse,
    };
    let (m, n1, n_max) = (a.m(), a.n1(), a.n_max());
    match check {
        ConverseCheck::LeastAlignment => check_least_alignment(m, n1, horizon, strategy, plan),
        ConverseCheck::EriDelayed => check_eri_delayed(m, n1, n_max, horizon, strategy, plan),
        ConverseCheck::EriNocsit | ConverseCheck::EriNocsitConditional => {
            let cond = (check == ConverseCheck::EriNocsitConditional).then_some(a.n_bar());
            check_eri_nocsit(
                m,
                n1.max(n_max),
                n1.min(n_max),
                cond,
                n1,
                horizon,
                strategy,
                plan,
            )
        }
        ConverseCheck::Joint => {
            let jm = req.m.unwrap_or(m);
            let ns = req.receivers.unwrap_or((n1, 1, 1));
            check_joint_claim(jm, ns, horizon, strategy, plan)
        }
        ConverseCheck::Proposition1 => check_proposition1(a, horizon, strategy, plan),
        ConverseCheck::Proposition2 => check_proposition2(a, horizon, strategy, plan),
    }
}

/// Whether the two-phase strategy fits the setup `check` builds.
fn two_phase_fits(check: ConverseCheck, cfg: &ExperimentConfig, req: &ConverseRequest) -> bool {
    if check != ConverseCheck::Joint {
        return true;
    }
    let a = &cfg.antennas;
    req.m.is_none_or(|m| m == a.m()) && req.receivers.is_none_or(|(n1, _, _)| n1 == a.n1())
}

fn applicable(check: ConverseCheck, cfg: &ExperimentConfig) -> std::result::Result<(), String> {
    let a = &cfg.antennas;
    match check {
        ConverseCheck::Proposition1 if a.m() <= a.n1().max(a.n_max()) => {
            Err("needs m > max(n1, n_max)".into())
        }
        ConverseCheck::Proposition2 if !(a.n1() < a.n_max() && a.n_max() < a.m()) => {
            Err("needs n1 < n_max < m".into())
        }
        _ => Ok(()),
    }
}

/// Runs the selected rank-analogue checks under every applicable strategy.
/// A check that does not apply to the configuration is an error when it is
/// the only one requested, and is listed under `skipped` otherwise.
pub fn converse(cfg: &ExperimentConfig, req: &ConverseRequest) -> Result<ExperimentReport> {
    cfg.validate()?;
    if req.checks.is_empty() {
        return Err(Error::InvalidParameter("no checks selected".into()));
    }
    if let [only] = req.checks.as_slice() {
        if let Err(why) = applicable(*only, cfg) {
            return Err(Error::NotApplicable(format!("{only}: {why}")));
        }
    }
    let (report, run) = with_pool(cfg.workers, || {
        let mut report = ExperimentReport::new("converse", ConfigEcho::Experiment(cfg.clone()));
        report.note = Some(SURROGATE_NOTE.into());
        let horizon = TwoPhasePlan::new(&cfg.antennas).map_or(1, |p| p.block_len());
        for &check in &req.checks {
            if let Err(why) = applicable(check, cfg) {
                report.skipped.push(format!("{check}: {why}"));
                continue;
            }
            for strategy in converse_strategies(&cfg.antennas, horizon) {
                if matches!(strategy, LinearStrategy::TwoPhase { .. })
                    && !two_phase_fits(check, cfg, req)
                {
                    report.skipped.push(format!(
                        "{check} / {}: legitimate receiver differs from the config",
                        strategy.label()
                    ));
                    continue;
                }
                let r = run_converse_check(check, cfg, req, &strategy, horizon)?;
                report.checks.push(CheckOutcome {
                    name: format!("{check} / {}", r.strategy),
                    pass: r.pass,
                    passed: r.passed,
                    total: r.trials - r.degenerate,
                    detail: format!(
                        "{}; pass rate {:.4}; mean lhs {:.4}, mean rhs {:.4}; {} degenerate",
                        r.inequality, r.pass_rate, r.lhs_mean, r.rhs_mean, r.degenerate
                    ),
                });
                report.failing_seeds.extend(&r.failing_seeds);
                report.converse.push(r);
            }
        }
        Ok(report.finish())
    })?;
    Ok(ExperimentReport {
        run: Some(run),
        ..report
    })
}

// ---------------------------------------------------------------- aligned image sets

pub fn ais(cfg: &AisConfig) -> Result<ExperimentReport> {
    let spec = cfg.spec()?;
    if cfg.workers == Some(0) {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let (report, run) = with_pool(cfg.workers, || {
        let r = check_alignment_bounds(&spec, cfg.samples, cfg.seed)?;
        let mut report = ExperimentReport::new("ais", ConfigEcho::Ais(cfg.clone()));
        report.checks.push(CheckOutcome::counted(
            "probability-bound",
            (r.probability_checks - r.probability_violations) as u64,
            r.probability_checks as u64,
            format!(
                "Pr(y1 in S | G1) <= density factor * prod 1/max(1, |y1| - m); {} informative; max ratio {:.4}",
                r.informative_checks, r.max_probability_ratio
            ),
        ));
        report.checks.push(CheckOutcome::flag(
            "size-bound",
            r.size_bound_holds,
            format!(
                "E|S| = {} <= {:.4} (leading {:.4} + slack {:.4})",
                r.mean_set_size, r.size_bound_f64, r.leading_term, r.slack
            ),
        ));
        report.checks.push(CheckOutcome::flag(
            "members-reverified",
            r.members_reverified,
            "every member maps to its image".into(),
        ));
        report.checks.push(CheckOutcome::flag(
            "partition",
            r.partition_holds,
            "sets for distinct images partition the outputs".into(),
        ));
        report.failing_seeds = r
            .instances
            .iter()
            .filter(|i| i.probability_violations > 0)
            .map(|i| i.seed)
            .collect();
        report.aligned = Some(r);
        Ok(report.finish())
    })?;
    Ok(ExperimentReport {
        run: Some(run),
        ..report
    })
}

// ---------------------------------------------------------------- tables

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tables {
    pub achievability: Vec<AchievabilityRow>,
    pub networks: Vec<NetworkRow>,
    pub comparison: Vec<ComparisonRow>,
}

/// Example configurations used when no sweep is given.
pub fn example_configs() -> Vec<AntennaConfig> {
    [(4, 2, 3), (3, 1, 2), (5, 2, 2)]
        .iter()
        .map(|&(m, n1, nm)| AntennaConfig::triple(m, n1, nm).expect("valid"))
        .collect()
}

/// The fixed tables plus a comparison over `sweep_bounds` = (m, n₁, n_max)
/// maxima, or over the example configurations.
pub fn tables(sweep_bounds: Option<(usize, usize, usize)>) -> Tables {
    let configs = match sweep_bounds {
        Some((m, n1, nm)) => sweep(m, n1, nm),
        None => example_configs(),
    };
    Tables {
        achievability: achievability_table(),
        networks: network_table(),
        comparison: comparison_table(&configs),
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

impl Tables {
    pub fn achievability_csv(&self) -> String {
        csv_string(
            &[
                "configuration",
                "example",
                "prior_formula",
                "sdof_formula",
                "prior_value",
                "sdof_value",
            ],
            self.achievability.iter().map(|r| {
                vec![
                    r.class.into(),
                    r.example.into(),
                    r.prior_formula.into(),
                    r.sdof_formula.into(),
                    fmt_ratio(&r.prior_value),
                    fmt_ratio(&r.sdof_value),
                ]
            }),
        )
    }

    pub fn networks_csv(&self) -> String {
        csv_string(
            &[
                "network",
                "m <= max(n1,n_max)",
                "max(n1,n_max) < m <= n1+n_max",
                "m > n1+n_max",
            ],
            self.networks.iter().map(|r| {
                std::iter::once(r.network.to_string())
                    .chain(r.formulas.iter().map(|f| f.to_string()))
                    .collect()
            }),
        )
    }

    pub fn comparison_csv(&self) -> String {
        csv_string(
            &[
                "m",
                "n1",
                "n_max",
                "regime",
                "blind_sdof",
                "prior_achievable",
                "delayed_eavesdropper_sdof",
                "strict_improvement",
            ],
            self.comparison.iter().map(|r| {
                vec![
                    r.m.to_string(),
                    r.n1.to_string(),
                    r.n_max.to_string(),
                    serde_json::to_value(r.regime)
                        .expect("regime")
                        .as_str()
                        .unwrap_or_default()
                        .to_string(),
                    fmt_ratio(&r.blind_sdof),
                    r.prior_achievable
                        .as_ref()
                        .map(fmt_ratio)
                        .unwrap_or_default(),
                    fmt_ratio(&r.delayed_eavesdropper_sdof),
                    r.strict_improvement()
                        .map(|b| b.to_string())
                        .unwrap_or_default(),
                ]
            }),
        )
    }

    /// Named CSV documents, in output order.
    pub fn csv_files(&self) -> Vec<(&'static str, String)> {
        vec![
            ("achievability.csv", self.achievability_csv()),
            ("networks.csv", self.networks_csv()),
            ("comparison.csv", self.comparison_csv()),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, n1: usize, n_max: usize, trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(AntennaConfig::triple(m, n1, n_max).unwrap());
        c.trials = trials;
        c.seed = 7;
        c
    }

    #[test]
    fn config_round_trips() {
        let mut c = cfg(4, 2, 3, 10);
        c.noise = NoiseMode::UnitVariance;
        c.workers = Some(3);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn config_defaults_fill_in() {
        let c =
            ExperimentConfig::from_json(r#"{"antennas": {"m": 4, "n1": 2, "eavesdroppers": [3]}}"#)
                .unwrap();
        assert_eq!(c.trials, 100);
        assert_eq!((c.p0, c.p1), SLOPE_POWERS);
        assert_eq!(c.schema, SCHEMA);
    }

    #[test]
    fn config_rejects_bad_values() {
        let base = cfg(4, 2, 3, 1);
        let mut c = base.clone();
        c.p1 = c.p0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tolerances.slope = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.schema = "other/2".into();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"antennas": {"m": 4, "n1": 2, "eavesdroppers": [3]}, "bogus": 1}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"antennas": {"m": 0, "n1": 2, "eavesdroppers": [3]}}"#
        )
        .is_err());
    }

    #[test]
    fn two_phase_simulation_passes() {
        let r = simulate(&cfg(4, 2, 3, 30)).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
        let s = r.simulation.unwrap();
        assert_eq!(s.rate, "2/3");
        assert!(s.records.iter().all(|t| t.decodable_dims == Some(2)));
        assert!(s.eavesdropper_slope_max.unwrap() < 0.05);
    }

    #[test]
    fn single_slot_simulation_passes() {
        let r = simulate(&cfg(2, 2, 1, 30)).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
        let s = r.simulation.unwrap();
        assert_eq!(s.scheme, SchemeKind::SingleSlot);
        assert!((s.legitimate_slope_mean.unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn noisy_simulation_reports_mse() {
        let mut c = cfg(2, 2, 1, 20);
        c.noise = NoiseMode::UnitVariance;
        let r = simulate(&c).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
        assert!(r.simulation.unwrap().mean_mse.unwrap() < 1e-4);
    }

    #[test]
    fn zero_sdof_and_zero_trials() {
        let r = simulate(&cfg(2, 3, 2, 10)).unwrap();
        assert!(r.pass);
        assert_eq!(r.simulation.unwrap().scheme, SchemeKind::None);
        let r = simulate(&cfg(4, 2, 3, 0)).unwrap();
        assert!(r.pass);
        assert!(r.simulation.unwrap().records.is_empty());
    }

    #[test]
    fn canonical_report_ignores_workers() {
        let mut c = cfg(3, 1, 2, 12);
        c.workers = Some(1);
        let a = simulate(&c).unwrap();
        c.workers = Some(4);
        let b = simulate(&c).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_ne!(a.to_json(), a.canonical_json());
    }

    #[test]
    fn converse_selection_parses() {
        assert_eq!(ConverseCheck::parse_selection("all").unwrap().len(), 7);
        assert_eq!(
            ConverseCheck::parse_selection("joint").unwrap(),
            vec![ConverseCheck::Joint]
        );
        assert!(ConverseCheck::parse_selection("lemma9").is_err());
    }

    #[test]
    fn converse_default_config_passes() {
        let c = cfg(4, 2, 3, 50);
        let req = ConverseRequest {
            checks: ConverseCheck::ALL.to_vec(),
            ..Default::default()
        };
        let r = converse(&c, &req).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
        assert!(r.skipped.is_empty());
        assert_eq!(r.converse.len(), 21);
    }

    #[test]
    fn converse_single_inapplicable_check_is_an_error() {
        let c = cfg(2, 2, 1, 5);
        let req = ConverseRequest {
            checks: vec![ConverseCheck::Proposition1],
            ..Default::default()
        };
        assert!(matches!(converse(&c, &req), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn ais_report_passes_for_small_spec() {
        let mut c = AisConfig::new(4, 1);
        c.samples = 5;
        let r = ais(&c).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
        assert_eq!(r.aligned.unwrap().alphabet_size, 3);
    }

    #[test]
    fn tables_render() {
        let t = tables(None);
        let csv = t.achievability_csv();
        assert!(csv.contains("1/2") && csv.contains("2/3") && csv.contains("1/3"));
        let empty = tables(Some((0, 0, 0)));
        assert_eq!(empty.comparison_csv().lines().count(), 1);
        let swept = tables(Some((8, 4, 4)));
        assert_eq!(swept.comparison.len(), 128);
    }
}
