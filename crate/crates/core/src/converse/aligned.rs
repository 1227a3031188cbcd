//! Deterministic (floor-quantized) channel model and exhaustive enumeration
//! of aligned image sets, with the probability and average-size bounds
//! evaluated exactly.
//!
//! Channel coefficients live on a uniform rational grid over `[-d, d]`, so
//! every output is an exact integer and every bound an exact rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rng_from_seed, trial_seed};

/// Largest codebook (and largest eavesdropper grid) enumerated exhaustively.
pub const STATE_LIMIT: u128 = 1_000_000;

pub const DEFAULT_GRID_POINTS: u32 = 8;
/// With 8 grid points the per-instance probability bound holds for every
/// legitimate channel up to d_max = 8 at p = 16; at d_max = 10 single grid
/// points outweigh the density bound (see the test below).
pub const DEFAULT_AIS_D_MAX: i64 = 4;

/// Uniform grid of `points` values `d·(2k + 1 − points)/points`, k = 0..points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelGrid {
    pub points: u32,
    pub d_max: i64,
}

impl ChannelGrid {
    pub fn new(points: u32, d_max: i64) -> Result<Self> {
        if points == 0 || d_max <= 0 {
            return Err(Error::InvalidParameter(format!(
                "grid needs points >= 1 and d_max > 0, got {points}, {d_max}"
            )));
        }
        Ok(Self { points, d_max })
    }

    pub fn value(&self, k: u32) -> Rational64 {
        let n = i64::from(self.points);
        Rational64::new(self.d_max * (2 * i64::from(k) + 1 - n), n)
    }

    pub fn values(&self) -> Vec<Rational64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }

    /// Point density `points / (2·d_max)`.
    pub fn f_max(&self) -> Rational64 {
        Rational64::new(i64::from(self.points), 2 * self.d_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Codebook {
    /// Every input sequence in the alphabet.
    Full,
    /// Only the all-zero input.
    ZeroOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterministicChannelSpec {
    pub p: u64,
    pub m: usize,
    pub n0: usize,
    /// Number of slots.
    pub n: usize,
    pub grid: ChannelGrid,
    pub codebook: Codebook,
}

impl DeterministicChannelSpec {
    pub fn new(p: u64, m: usize, n0: usize, n: usize, grid: ChannelGrid) -> Result<Self> {
        if m == 0 || n0 == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "m, n0, n must be positive, got {m}, {n0}, {n}"
            )));
        }
        Ok(Self {
            p,
            m,
            n0,
            n,
            grid,
            codebook: Codebook::Full,
        })
    }

    pub fn with_codebook(mut self, codebook: Codebook) -> Self {
        self.codebook = codebook;
        self
    }

    /// ⌈√p⌉, the largest input symbol.
    pub fn max_input(&self) -> u64 {
        let r = self.p.isqrt();
        if r * r == self.p {
            r
        } else {
            r + 1
        }
    }

    pub fn alphabet_size(&self) -> u64 {
        self.max_input() + 1
    }

    /// Number of input sequences, `alphabet^(m·n)`.
    pub fn input_states(&self) -> u128 {
        match self.codebook {
            Codebook::ZeroOnly => 1,
            Codebook::Full => saturating_pow(u128::from(self.alphabet_size()), self.m * self.n),
        }
    }

    /// Number of eavesdropper channel realizations, `points^(m·n0·n)`.
    pub fn grid_states(&self) -> u128 {
        saturating_pow(u128::from(self.grid.points), self.coefficients())
    }

    fn coefficients(&self) -> usize {
        self.n * self.n0 * self.m
    }

    fn check_size(&self) -> Result<()> {
        for states in [self.input_states(), self.grid_states()] {
            if states > STATE_LIMIT {
                return Err(Error::TooLarge {
                    states,
                    limit: STATE_LIMIT,
                });
            }
        }
        Ok(())
    }
}

fn saturating_pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Channel of one receiver: `n` slots of `n0 × m` coefficients, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetChannel {
    pub m: usize,
    pub n0: usize,
    pub slots: Vec<Vec<Rational64>>,
}

impl DetChannel {
    pub fn new(m: usize, n0: usize, slots: Vec<Vec<Rational64>>) -> Result<Self> {
        if slots.iter().any(|s| s.len() != m * n0) {
            return Err(Error::Dimension(format!(
                "every slot needs {} coefficients",
                m * n0
            )));
        }
        Ok(Self { m, n0, slots })
    }

    /// Channel whose coefficient `c` (slot-major, then row-major) is grid point `idx[c]`.
    fn from_grid(grid: &ChannelGrid, m: usize, n0: usize, idx: &[u32]) -> Self {
        let slots = idx
            .chunks(m * n0)
            .map(|c| c.iter().map(|&k| grid.value(k)).collect())
            .collect();
        Self { m, n0, slots }
    }
}

/// `ȳ_j(t) = Σ_i ⌊g_{j,i}(t)·x̄_i(t)⌋` per antenna and slot, in exact arithmetic.
pub fn deterministic_output(x: &[i64], g: &DetChannel, max_input: u64) -> Result<Vec<i64>> {
    if x.len() != g.m * g.slots.len() {
        return Err(Error::Dimension(format!(
            "input has {} entries, need {}",
            x.len(),
            g.m * g.slots.len()
        )));
    }
    if let Some(bad) = x.iter().find(|&&v| v < 0 || v as u64 > max_input) {
        return Err(Error::Range(format!(
            "input symbol {bad} outside 0..={max_input}"
        )));
    }
    Ok(unchecked_output(x, g))
}

fn unchecked_output(x: &[i64], g: &DetChannel) -> Vec<i64> {
    let mut y = Vec::with_capacity(g.n0 * g.slots.len());
    for (t, coeffs) in g.slots.iter().enumerate() {
        let xt = &x[t * g.m..(t + 1) * g.m];
        for row in coeffs.chunks(g.m) {
            y.push(
                row.iter()
                    .zip(xt)
                    .map(|(c, &xi)| (c * xi).floor().to_integer())
                    .sum(),
            );
        }
    }
    y
}

/// L0: each reachable legitimate output mapped to its lexicographically
/// smallest input sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageMap {
    map: BTreeMap<Vec<i64>, Vec<i64>>,
}

impl PreimageMap {
    pub fn build(spec: &DeterministicChannelSpec, g1: &DetChannel) -> Result<Self> {
        spec.check_size()?;
        let mut map = BTreeMap::new();
        for x in codebook_inputs(spec) {
            map.entry(unchecked_output(&x, g1)).or_insert(x);
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, y1: &[i64]) -> Option<&[i64]> {
        self.map.get(y1).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], &[i64])> {
        self.map.iter().map(|(y, x)| (y.as_slice(), x.as_slice()))
    }
}

/// Input sequences in lexicographic order.
fn codebook_inputs(spec: &DeterministicChannelSpec) -> Vec<Vec<i64>> {
    let len = spec.m * spec.n;
    match spec.codebook {
        Codebook::ZeroOnly => vec![vec![0; len]],
        Codebook::Full => {
            let top = spec.max_input() as i64;
            let mut out = Vec::new();
            let mut x = vec![0i64; len];
            loop {
                out.push(x.clone());
                let Some(pos) = x.iter().rposition(|&v| v < top) else {
                    break;
                };
                x[pos] += 1;
                x[pos + 1..].iter_mut().for_each(|v| *v = 0);
            }
            out
        }
    }
}

/// `{ȳ₁ⁿ : image at receiver 2 under L0 equals v̄}`, members in ascending order.
pub fn enumerate_aligned_image_set(l0: &PreimageMap, g2: &DetChannel, v: &[i64]) -> Vec<Vec<i64>> {
    l0.iter()
        .filter(|(_, x)| unchecked_output(x, g2) == v)
        .map(|(y, _)| y.to_vec())
        .collect()
}

/// All aligned image sets for one `(G₁, G₂)`, keyed by image.
pub fn partition_by_image(l0: &PreimageMap, g2: &DetChannel) -> BTreeMap<Vec<i64>, Vec<Vec<i64>>> {
    let mut sets: BTreeMap<Vec<i64>, Vec<Vec<i64>>> = BTreeMap::new();
    for (y, x) in l0.iter() {
        sets.entry(unchecked_output(x, g2))
            .or_default()
            .push(y.to_vec());
    }
    sets
}

/// `max(1, f_max·m·d_max)^(n·n0)`.
pub fn density_factor(spec: &DeterministicChannelSpec) -> Rational64 {
    let f = spec.grid.f_max() * Rational64::from_integer((spec.m as i64) * spec.grid.d_max);
    let base = if f > Rational64::one() {
        f
    } else {
        Rational64::one()
    };
    (0..spec.n * spec.n0).fold(Rational64::one(), |acc, _| acc * base)
}

/// Per-instance bound on Pr(ȳ₁ⁿ ∈ S | G₁ⁿ): the density factor times
/// `Π 1/max(1, |ȳ₁| − m)` over all output entries.
pub fn probability_bound(spec: &DeterministicChannelSpec, y1: &[i64]) -> Rational64 {
    let m = spec.m as i64;
    y1.iter().fold(density_factor(spec), |acc, &y| {
        acc / Rational64::from_integer((y.abs() - m).max(1))
    })
}

/// `q = m·d_max·⌈√p⌉ + m`, the largest possible |ȳ₁| entry.
pub fn output_magnitude_cap(spec: &DeterministicChannelSpec) -> i64 {
    let m = spec.m as i64;
    m * spec.grid.d_max * spec.max_input() as i64 + m
}

/// Exact average-size bound: density factor times
/// `[(2m + 1) + 2·H_{q−m}]^(n·n0)`, where the bracket is the sum of
/// `1/max(1, |y| − m)` over all integers |y| ≤ q.
pub fn size_bound(spec: &DeterministicChannelSpec) -> BigRational {
    let m = spec.m as i64;
    let q = output_magnitude_cap(spec);
    let harmonic = (1..=(q - m).max(0)).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(BigInt::one(), k.into())
    });
    let per_entry = BigRational::from_integer((2 * m + 1).into())
        + harmonic * BigRational::from_integer(2.into());
    let d = density_factor(spec);
    let factor = BigRational::new((*d.numer()).into(), (*d.denom()).into());
    (0..spec.n * spec.n0).fold(factor, |acc, _| acc * &per_entry)
}

/// Leading term `max(1, f_max·m·d_max)^(n·n0) · (ln √p)^(n·n0)`.
pub fn leading_size_term(spec: &DeterministicChannelSpec) -> f64 {
    let e = (spec.n * spec.n0) as i32;
    ratio_f64(&density_factor(spec)) * (0.5 * (spec.p as f64).ln()).powi(e)
}

fn ratio_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn big_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub seed: u64,
    pub reachable_outputs: usize,
    pub max_set_size: usize,
    pub probability_checks: usize,
    pub probability_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedImageSetReport {
    pub spec: DeterministicChannelSpec,
    pub alphabet_size: u64,
    pub f_max: String,
    pub samples: usize,
    pub master_seed: u64,
    pub eavesdropper_grid_states: u128,
    /// Largest over images v̄ of the mean of |S_v̄| over all sampled G₁ and every G₂.
    pub mean_set_size: String,
    pub mean_set_size_f64: f64,
    pub max_set_size: usize,
    pub leading_term: f64,
    pub slack: f64,
    pub size_bound: String,
    pub size_bound_f64: f64,
    pub size_bound_holds: bool,
    pub probability_checks: usize,
    /// Checks whose bound is below 1, i.e. not vacuous.
    pub informative_checks: usize,
    pub probability_violations: usize,
    /// Largest empirical probability divided by its bound.
    pub max_probability_ratio: f64,
    pub members_reverified: bool,
    pub partition_holds: bool,
    pub instances: Vec<InstanceSummary>,
    pub pass: bool,
}

struct InstanceResult {
    summary: InstanceSummary,
    informative: usize,
    max_ratio: f64,
    size_sums: BTreeMap<Vec<i64>, u64>,
    members_ok: bool,
    partition_ok: bool,
}

fn all_grid_indices(coefficients: usize, points: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = saturating_pow(u128::from(points), coefficients);
    (0..total).map(move |mut k| {
        let mut idx = vec![0u32; coefficients];
        for slot in idx.iter_mut().rev() {
            *slot = (k % u128::from(points)) as u32;
            k /= u128::from(points);
        }
        idx
    })
}

fn run_instance(spec: &DeterministicChannelSpec, seed: u64) -> Result<InstanceResult> {
    let mut rng = rng_from_seed(seed);
    let g1_idx: Vec<u32> = (0..spec.coefficients())
        .map(|_| rng.random_range(0..spec.grid.points))
        .collect();
    let g1 = DetChannel::from_grid(&spec.grid, spec.m, spec.n0, &g1_idx);
    let l0 = PreimageMap::build(spec, &g1)?;
    let grid_total = spec.grid_states() as i64;

    // (ȳ₁, v̄) -> number of G₂ mapping ȳ₁ onto v̄
    let mut hits: BTreeMap<(Vec<i64>, Vec<i64>), i64> = BTreeMap::new();
    let mut size_sums: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let (mut members_ok, mut partition_ok, mut max_set) = (true, true, 0usize);
    for idx in all_grid_indices(spec.coefficients(), spec.grid.points) {
        let g2 = DetChannel::from_grid(&spec.grid, spec.m, spec.n0, &idx);
        let sets = partition_by_image(&l0, &g2);
        partition_ok &= sets.values().map(Vec::len).sum::<usize>() == l0.len();
        for (v, members) in &sets {
            members_ok &= members.iter().all(|y| {
                l0.get(y).is_some_and(|x| {
                    deterministic_output(x, &g2, spec.max_input()).as_deref() == Ok(v.as_slice())
                })
            });
            max_set = max_set.max(members.len());
            *size_sums.entry(v.clone()).or_default() += members.len() as u64;
            for y in members {
                *hits.entry((y.clone(), v.clone())).or_default() += 1;
            }
        }
    }

    let (mut violations, mut informative, mut max_ratio) = (0usize, 0usize, 0.0f64);
    for ((y, _), count) in &hits {
        let empirical = Rational64::new(*count, grid_total);
        let bound = probability_bound(spec, y);
        if empirical > bound {
            violations += 1;
        }
        if bound < Rational64::one() {
            informative += 1;
        }
        max_ratio = max_ratio.max(ratio_f64(&(empirical / bound)));
    }
    Ok(InstanceResult {
        summary: InstanceSummary {
            seed,
            reachable_outputs: l0.len(),
            max_set_size: max_set,
            probability_checks: hits.len(),
            probability_violations: violations,
        },
        informative,
        max_ratio,
        size_sums,
        members_ok,
        partition_ok,
    })
}

/// Samples `samples` legitimate channels, enumerates every eavesdropper
/// channel on the grid, and checks both bounds exactly.
pub fn check_alignment_bounds(
    spec: &DeterministicChannelSpec,
    samples: usize,
    master_seed: u64,
) -> Result<AlignedImageSetReport> {
    spec.check_size()?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let results = (0..samples as u64)
        .into_par_iter()
        .map(|i| run_instance(spec, trial_seed(master_seed, i)))
        .collect::<Result<Vec<_>>>()?;

    let mut totals: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for r in &results {
        for (v, s) in &r.size_sums {
            *totals.entry(v.clone()).or_default() += s;
        }
    }
    let denom = BigInt::from(samples as u64) * BigInt::from(spec.grid_states());
    let worst = totals.values().max().copied().unwrap_or(0);
    let mean = BigRational::new(BigInt::from(worst), denom);
    let bound = size_bound(spec);
    let leading = leading_size_term(spec);
    let size_ok = mean <= bound;

    let probability_checks = results.iter().map(|r| r.summary.probability_checks).sum();
    let probability_violations = results
        .iter()
        .map(|r| r.summary.probability_violations)
        .sum::<usize>();
    let members_reverified = results.iter().all(|r| r.members_ok);
    let partition_holds = results.iter().all(|r| r.partition_ok);
    Ok(AlignedImageSetReport {
        spec: spec.clone(),
        alphabet_size: spec.alphabet_size(),
        f_max: spec.grid.f_max().to_string(),
        samples,
        master_seed,
        eavesdropper_grid_states: spec.grid_states(),
        mean_set_size: mean.to_string(),
        mean_set_size_f64: big_f64(&mean),
        max_set_size: results
            .iter()
            .map(|r| r.summary.max_set_size)
            .max()
            .unwrap_or(0),
        leading_term: leading,
        slack: big_f64(&bound) - leading,
        size_bound: bound.to_string(),
        size_bound_f64: big_f64(&bound),
        size_bound_holds: size_ok,
        probability_checks,
        informative_checks: results.iter().map(|r| r.informative).sum(),
        probability_violations,
        max_probability_ratio: results.iter().map(|r| r.max_ratio).fold(0.0, f64::max),
        members_reverified,
        partition_holds,
        pass: size_ok && probability_violations == 0 && members_reverified && partition_holds,
        instances: results.into_iter().map(|r| r.summary).collect(),
    })
}
