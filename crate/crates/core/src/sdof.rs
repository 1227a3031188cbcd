//! Exact secure-DoF values of the blind MIMOME wiretap channel with delayed
//! CSIT, and the comparison formulas it is tabulated against.

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::AntennaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// m ≤ max(n₁, n_max): a single-slot scheme, SDoF = [m − n_max]⁺.
    SingleSlot,
    /// m > max(n₁, n_max): the two-phase artificial-noise alignment scheme.
    TwoPhase,
}

impl Regime {
    pub fn of(config: &AntennaConfig) -> Self {
        if config.m() <= config.n1().max(config.n_max()) {
            Regime::SingleSlot
        } else {
            Regime::TwoPhase
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SdofResult {
    #[serde(serialize_with = "ser_ratio")]
    pub value: Rational64,
    pub regime: Regime,
    pub m_bar: usize,
    pub n_bar: usize,
}

pub(crate) fn ser_ratio<S: Serializer>(
    r: &Rational64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(r))
}

pub(crate) fn ser_opt_ratio<S: Serializer>(
    r: &Option<Rational64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_ratio(r)),
        None => s.serialize_none(),
    }
}

/// `a/b` in lowest terms, or `a` when the denominator is 1.
pub fn fmt_ratio(r: &Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ratio(n: usize, d: usize) -> Rational64 {
    Rational64::new(n as i64, d as i64)
}

fn pos_part(a: usize, b: usize) -> usize {
    a.saturating_sub(b)
}

pub fn compute_sdof(config: &AntennaConfig) -> SdofResult {
    let (m, n1, n_max) = (config.m(), config.n1(), config.n_max());
    let (m_bar, n_bar) = (config.m_bar(), config.n_bar());
    let regime = Regime::of(config);
    let value = match regime {
        Regime::SingleSlot => ratio(pos_part(m, n_max), 1),
        Regime::TwoPhase => ratio(n1 * (m_bar - n_max), m_bar - n_max + n_bar),
    };
    SdofResult {
        value,
        regime,
        m_bar,
        n_bar,
    }
}

/// Which row of the achievability comparison a configuration falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorRow {
    /// n₁ ≤ n_max < m ≤ n₁ + n_max
    Moderate,
    /// n₁ ≤ n_max, m > n₁ + n_max
    Large,
}

impl PriorRow {
    pub fn of(config: &AntennaConfig) -> Option<Self> {
        let (m, n1, n_max) = (config.m(), config.n1(), config.n_max());
        if n1 > n_max || m <= n_max {
            None
        } else if m <= n1 + n_max {
            Some(PriorRow::Moderate)
        } else {
            Some(PriorRow::Large)
        }
    }
}

/// Secure DoF achieved by the earlier delayed-CSIT scheme on the two
/// configuration classes where the two-phase scheme improves on it.
pub fn compute_prior_achievable(config: &AntennaConfig) -> Result<Rational64> {
    let (m, n1, n_max) = (config.m(), config.n1(), config.n_max());
    match PriorRow::of(config) {
        Some(PriorRow::Moderate) => Ok(ratio(n1 * (m - n_max), m)),
        Some(PriorRow::Large) => Ok(ratio(n1 * n1, n1 + n_max)),
        None => Err(Error::NotApplicable(format!(
            "(m={m}, n1={n1}, n_max={n_max}) is outside both comparison classes"
        ))),
    }
}

/// Secure DoF when the transmitter also has delayed CSIT from the eavesdroppers.
pub fn compute_reference_sdof(config: &AntennaConfig) -> Rational64 {
    let (m, n1, n_max) = (config.m(), config.n1(), config.n_max());
    if m <= n1.max(n_max) {
        ratio(pos_part(m, n_max), 1)
    } else if m <= n1 + n_max {
        ratio(n1 * m * (m - n_max), n1 * n_max + m * (m - n_max))
    } else {
        ratio(n1 * (n1 + n_max), n1 + 2 * n_max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub m: usize,
    pub n1: usize,
    pub n_max: usize,
    pub regime: Regime,
    #[serde(serialize_with = "ser_ratio")]
    pub blind_sdof: Rational64,
    /// Absent when the configuration is outside both comparison classes.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub prior_achievable: Option<Rational64>,
    #[serde(serialize_with = "ser_ratio")]
    pub delayed_eavesdropper_sdof: Rational64,
}

impl ComparisonRow {
    pub fn strict_improvement(&self) -> Option<bool> {
        self.prior_achievable.map(|p| self.blind_sdof > p)
    }
}

pub fn comparison_table(configs: &[AntennaConfig]) -> Vec<ComparisonRow> {
    configs
        .iter()
        .map(|c| ComparisonRow {
            m: c.m(),
            n1: c.n1(),
            n_max: c.n_max(),
            regime: Regime::of(c),
            blind_sdof: compute_sdof(c).value,
            prior_achievable: compute_prior_achievable(c).ok(),
            delayed_eavesdropper_sdof: compute_reference_sdof(c),
        })
        .collect()
}

/// Every `(m, n₁, n_max)` with each count in `1..=max`.
pub fn sweep(m_max: usize, n1_max: usize, n_max_max: usize) -> Vec<AntennaConfig> {
    let mut out = Vec::new();
    for m in 1..=m_max {
        for n1 in 1..=n1_max {
            for n_max in 1..=n_max_max {
                out.push(AntennaConfig::triple(m, n1, n_max).expect("positive counts"));
            }
        }
    }
    out
}

/// A row of the achievability comparison as printed: class, example,
/// prior-scheme formula, new formula, and both evaluated at the example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AchievabilityRow {
    pub class: &'static str,
    pub example: &'static str,
    pub prior_formula: &'static str,
    pub sdof_formula: &'static str,
    #[serde(serialize_with = "ser_ratio")]
    pub prior_value: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub sdof_value: Rational64,
}

pub fn achievability_table() -> Vec<AchievabilityRow> {
    let rows = [
        (
            "n1 <= n_max < m <= n1 + n_max",
            (4, 2, 3),
            "n1(m - n_max)/m",
            "n1(m - n_max)/(m - n_max + n1)",
        ),
        (
            "n1 <= n_max, m > n1 + n_max",
            (3, 1, 2),
            "n1^2/(n1 + n_max)",
            "n1/2",
        ),
    ];
    rows.iter()
        .map(|&(class, (m, n1, n_max), prior_formula, sdof_formula)| {
            let c = AntennaConfig::triple(m, n1, n_max).expect("valid");
            AchievabilityRow {
                class,
                example: if m == 4 {
                    "m=4, n1=2, n_max=3"
                } else {
                    "m=3, n1=1, n_max=2"
                },
                prior_formula,
                sdof_formula,
                prior_value: compute_prior_achievable(&c).expect("row applies"),
                sdof_value: compute_sdof(&c).value,
            }
        })
        .collect()
}

/// Formula cells of the two-network comparison, one row per network,
/// columns ordered by regime: m ≤ max(n₁,n_max); max(n₁,n_max) < m ≤ n₁+n_max; m > n₁+n_max.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetworkRow {
    pub network: &'static str,
    pub formulas: [&'static str; 3],
}

pub fn network_table() -> Vec<NetworkRow> {
    vec![
        NetworkRow {
            network: "MIMOME WTP with delayed CSIT",
            formulas: [
                "[m - n_max]+",
                "n1 m (m - n_max)/(n1 n_max + m(m - n_max))",
                "n1(n1 + n_max)/(n1 + 2 n_max)",
            ],
        },
        NetworkRow {
            network: "Blind MIMOME WTP with delayed CSIT",
            formulas: [
                "[m - n_max]+",
                "n1(m - n_max)/(m - n_max + min(n1, n_max))",
                "n1^2/(n1 + min(n1, n_max))",
            ],
        },
    ]
}
