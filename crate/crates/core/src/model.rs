//! Physical model: antenna configuration, bounded random channels,
//! block-diagonal stacking over slots, and channel application.
//!
//! Receivers are indexed from 0. Receiver 0 is the legitimate receiver and
//! the only one whose (delayed) channel state reaches the transmitter;
//! receivers 1.. are eavesdroppers.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diagonal, complex_gaussian, CMatrix, CVector};

/// Index of the legitimate receiver.
pub const LEGITIMATE: usize = 0;

/// Default magnitude bound on channel coefficients.
pub const DEFAULT_D_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAntennaConfig", into = "RawAntennaConfig")]
pub struct AntennaConfig {
    m: usize,
    receivers: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawAntennaConfig {
    m: usize,
    n1: usize,
    eavesdroppers: Vec<usize>,
}

impl TryFrom<RawAntennaConfig> for AntennaConfig {
    type Error = Error;

    fn try_from(raw: RawAntennaConfig) -> Result<Self> {
        AntennaConfig::new(raw.m, raw.n1, raw.eavesdroppers)
    }
}

impl From<AntennaConfig> for RawAntennaConfig {
    fn from(c: AntennaConfig) -> Self {
        RawAntennaConfig {
            m: c.m,
            n1: c.receivers[0],
            eavesdroppers: c.receivers[1..].to_vec(),
        }
    }
}

impl AntennaConfig {
    pub fn new(m: usize, n1: usize, eavesdroppers: Vec<usize>) -> Result<Self> {
        if m == 0 || n1 == 0 {
            return Err(Error::InvalidParameter(
                "antenna counts must be positive".into(),
            ));
        }
        if eavesdroppers.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one eavesdropper is required".into(),
            ));
        }
        if eavesdroppers.contains(&0) {
            return Err(Error::InvalidParameter(
                "eavesdropper antenna counts must be positive".into(),
            ));
        }
        let mut receivers = Vec::with_capacity(eavesdroppers.len() + 1);
        receivers.push(n1);
        receivers.extend(eavesdroppers);
        Ok(Self { m, receivers })
    }

    /// Single-eavesdropper shorthand `(m, n₁, n_max)`.
    pub fn triple(m: usize, n1: usize, n_max: usize) -> Result<Self> {
        Self::new(m, n1, vec![n_max])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n1(&self) -> usize {
        self.receivers[0]
    }

    /// Antenna count of receiver `j`.
    pub fn n(&self, j: usize) -> usize {
        self.receivers[j]
    }

    pub fn receiver_antennas(&self) -> &[usize] {
        &self.receivers
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers.len()
    }

    pub fn eavesdroppers(&self) -> &[usize] {
        &self.receivers[1..]
    }

    pub fn n_max(&self) -> usize {
        *self
            .eavesdroppers()
            .iter()
            .max()
            .expect("validated non-empty")
    }

    /// Receiver index of the strongest eavesdropper; ties go to the smallest index.
    pub fn max_index(&self) -> usize {
        let n_max = self.n_max();
        1 + self
            .eavesdroppers()
            .iter()
            .position(|&n| n == n_max)
            .expect("max exists")
    }

    /// m̄ = min(m, n₁ + n_max)
    pub fn m_bar(&self) -> usize {
        self.m.min(self.n1() + self.n_max())
    }

    /// n̄ = min(n₁, n_max)
    pub fn n_bar(&self) -> usize {
        self.n1().min(self.n_max())
    }
}

/// Per-entry channel law: complex circular Gaussian CN(0, 1), redrawn while
/// the magnitude exceeds `d_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelLaw {
    pub d_max: f64,
}

impl Default for ChannelLaw {
    fn default() -> Self {
        Self {
            d_max: DEFAULT_D_MAX,
        }
    }
}

impl ChannelLaw {
    pub fn new(d_max: f64) -> Result<Self> {
        if !(d_max.is_finite() && d_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "d_max must be positive, got {d_max}"
            )));
        }
        Ok(Self { d_max })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> num_complex::Complex64 {
        loop {
            let g = complex_gaussian(rng, 1.0);
            if g.norm() <= self.d_max {
                return g;
            }
        }
    }

    /// E|g|² under the truncated law. |g|² is Exp(1) before truncation at d².
    pub fn second_moment(&self) -> f64 {
        let d2 = self.d_max * self.d_max;
        let tail = (-d2).exp();
        1.0 - d2 * tail / (1.0 - tail)
    }
}

/// Channel matrices `G_j(t)` for every receiver and slot of a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    m: usize,
    antennas: Vec<usize>,
    d_max: f64,
    seed: u64,
    /// `blocks[j][t]` is `n_j × m`.
    blocks: Vec<Vec<CMatrix>>,
}

impl ChannelRealization {
    pub fn horizon(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn antennas(&self, j: usize) -> usize {
        self.antennas[j]
    }

    pub fn receiver_count(&self) -> usize {
        self.antennas.len()
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn block(&self, j: usize, t: usize) -> &CMatrix {
        &self.blocks[j][t]
    }

    /// Copy with `G_j(t)` replaced; used to probe which channels an encoder reads.
    pub fn with_block(&self, j: usize, t: usize, g: CMatrix) -> Result<Self> {
        if j >= self.antennas.len() || t >= self.horizon() {
            return Err(Error::Range(format!(
                "block ({j}, {t}) outside realization"
            )));
        }
        if g.shape() != (self.antennas[j], self.m) {
            return Err(Error::Dimension(format!(
                "block must be {}x{}, got {:?}",
                self.antennas[j],
                self.m,
                g.shape()
            )));
        }
        let mut out = self.clone();
        out.blocks[j][t] = g;
        Ok(out)
    }

    /// Same channels with every `G_j(t)` truncated to its first `cols` transmit antennas.
    pub fn leading_columns(&self, j: usize, t: usize, cols: usize) -> CMatrix {
        self.blocks[j][t].columns(0, cols).into_owned()
    }
}

/// Draws a realization over `horizon` slots. Entries are drawn slot by slot,
/// receiver by receiver, column-major within a block, from a ChaCha8 stream
/// seeded with `seed`.
pub fn generate_channel(
    config: &AntennaConfig,
    horizon: usize,
    law: ChannelLaw,
    seed: u64,
) -> Result<ChannelRealization> {
    if horizon == 0 {
        return Err(Error::InvalidParameter(
            "slot count must be at least 1".into(),
        ));
    }
    let law = ChannelLaw::new(law.d_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let antennas = config.receiver_antennas().to_vec();
    let m = config.m();
    let mut blocks: Vec<Vec<CMatrix>> = antennas
        .iter()
        .map(|_| Vec::with_capacity(horizon))
        .collect();
    for _t in 0..horizon {
        for (j, &nj) in antennas.iter().enumerate() {
            let g = CMatrix::from_iterator(nj, m, (0..nj * m).map(|_| law.sample(&mut rng)));
            blocks[j].push(g);
        }
    }
    let real = ChannelRealization {
        m,
        antennas,
        d_max: law.d_max,
        seed,
        blocks,
    };
    debug_assert!(real
        .blocks
        .iter()
        .flatten()
        .flat_map(|b| b.iter())
        .all(|g| g.norm() <= law.d_max));
    Ok(real)
}

/// `diag(G_j(t0), ..., G_j(t1))` over an inclusive, 0-based slot range.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedChannel {
    pub receiver: usize,
    pub slots: RangeInclusive<usize>,
    pub matrix: CMatrix,
}

pub fn stack_block_diagonal(
    real: &ChannelRealization,
    j: usize,
    t0: usize,
    t1: usize,
) -> Result<StackedChannel> {
    if j >= real.receiver_count() {
        return Err(Error::Range(format!("receiver {j} does not exist")));
    }
    if t0 > t1 || t1 >= real.horizon() {
        return Err(Error::Range(format!(
            "slots {t0}..={t1} outside horizon {}",
            real.horizon()
        )));
    }
    let blocks: Vec<&CMatrix> = (t0..=t1).map(|t| real.block(j, t)).collect();
    Ok(StackedChannel {
        receiver: j,
        slots: t0..=t1,
        matrix: block_diagonal(&blocks),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Off,
    /// CN(0, I) at every receive antenna.
    UnitVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalRole {
    Transmit,
    Received { receiver: usize },
    Noise { receiver: usize },
    ArtificialNoise,
    Information,
    NoiseEquations,
}

/// A slot-stacked signal vector tagged with what it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBlock {
    pub role: SignalRole,
    pub slots: RangeInclusive<usize>,
    pub values: CVector,
}

impl SignalBlock {
    /// Entries belonging to slot `t` when each slot holds `width` entries.
    pub fn slot(&self, t: usize, width: usize) -> CVector {
        let first = *self.slots.start();
        self.values.rows((t - first) * width, width).into_owned()
    }
}

/// y_j(t) = G_j(t)·x(t) (+ z_j(t)) for every receiver and slot.
pub fn apply_channel<R: Rng + ?Sized>(
    real: &ChannelRealization,
    x: &CVector,
    noise: NoiseMode,
    rng: &mut R,
) -> Result<Vec<SignalBlock>> {
    let n = real.horizon();
    let m = real.m();
    if x.len() != n * m {
        return Err(Error::Dimension(format!(
            "transmit block has length {}, expected {}",
            x.len(),
            n * m
        )));
    }
    let mut out = Vec::with_capacity(real.receiver_count());
    for j in 0..real.receiver_count() {
        let nj = real.antennas(j);
        let mut y = CVector::zeros(n * nj);
        for t in 0..n {
            let xt = x.rows(t * m, m);
            let mut yt = real.block(j, t) * xt;
            if noise == NoiseMode::UnitVariance {
                for v in yt.iter_mut() {
                    *v += complex_gaussian(rng, 1.0);
                }
            }
            y.rows_mut(t * nj, nj).copy_from(&yt);
        }
        out.push(SignalBlock {
            role: SignalRole::Received { receiver: j },
            slots: 0..=n - 1,
            values: y,
        });
    }
    Ok(out)
}

/// SplitMix64 finalizer; decorrelates nearby counters.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`. A trial is re-runnable from this
/// value alone.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Named sub-streams of a trial (channel, symbols, noise, ...).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::receiver::{numeric_rank, RANK_REL_TOL};
    use num_complex::Complex64;

    #[test]
    fn derived_quantities() {
        let c = AntennaConfig::new(5, 2, vec![1, 3, 3, 2]).unwrap();
        assert_eq!(c.n_max(), 3);
        assert_eq!(c.max_index(), 2);
        assert_eq!(c.m_bar(), 5);
        assert_eq!(c.n_bar(), 2);
        let c = AntennaConfig::triple(9, 2, 3).unwrap();
        assert_eq!(c.m_bar(), 5);
        assert!(c.m_bar() <= c.m());
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(AntennaConfig::new(0, 1, vec![1]).is_err());
        assert!(AntennaConfig::new(2, 0, vec![1]).is_err());
        assert!(AntennaConfig::new(2, 1, vec![]).is_err());
        assert!(AntennaConfig::new(2, 1, vec![2, 0]).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let c = AntennaConfig::new(5, 2, vec![2, 1]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"m":5,"n1":2,"eavesdroppers":[2,1]}"#);
        assert_eq!(serde_json::from_str::<AntennaConfig>(&s).unwrap(), c);
        assert!(
            serde_json::from_str::<AntennaConfig>(r#"{"m":5,"n1":0,"eavesdroppers":[1]}"#).is_err()
        );
    }

    #[test]
    fn generated_blocks_have_full_rank() {
        let c = AntennaConfig::triple(4, 2, 3).unwrap();
        for seed in 0..50 {
            let r = generate_channel(&c, 3, ChannelLaw::default(), seed).unwrap();
            for j in 0..2 {
                for t in 0..3 {
                    let g = r.block(j, t);
                    assert_eq!(g.shape(), (c.n(j), 4));
                    assert_eq!(numeric_rank(g, RANK_REL_TOL), c.n(j).min(4));
                }
            }
        }
    }

    #[test]
    fn same_seed_same_realization() {
        let c = AntennaConfig::triple(3, 1, 2).unwrap();
        let a = generate_channel(&c, 4, ChannelLaw::default(), 7).unwrap();
        let b = generate_channel(&c, 4, ChannelLaw::default(), 7).unwrap();
        assert_eq!(a, b);
        let d = generate_channel(&c, 4, ChannelLaw::default(), 8).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn magnitudes_respect_bound() {
        let c = AntennaConfig::triple(4, 4, 4).unwrap();
        let law = ChannelLaw::new(0.5).unwrap();
        let r = generate_channel(&c, 20, law, 3).unwrap();
        for j in 0..2 {
            for t in 0..20 {
                assert!(r.block(j, t).iter().all(|g| g.norm() <= 0.5));
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        let c = AntennaConfig::triple(2, 1, 1).unwrap();
        assert!(matches!(
            generate_channel(&c, 0, ChannelLaw::default(), 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            generate_channel(&c, 1, ChannelLaw { d_max: 0.0 }, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            generate_channel(&c, 1, ChannelLaw { d_max: -1.0 }, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn coefficient_mean_is_zero() {
        // 1e5 single-coefficient draws; mean within 3 standard errors of 0.
        let law = ChannelLaw::default();
        let mut rng = rng_from_seed(11);
        let n = 100_000;
        let mut sum = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            sum += law.sample(&mut rng);
        }
        let mean = sum / n as f64;
        let se = (0.5 / n as f64).sqrt();
        assert!(mean.re.abs() < 3.0 * se, "re mean {}", mean.re);
        assert!(mean.im.abs() < 3.0 * se, "im mean {}", mean.im);
    }

    #[test]
    fn truncated_second_moment() {
        assert!((ChannelLaw::default().second_moment() - 1.0).abs() < 1e-40);
        // d = 1: 1 - e^{-1}/(1 - e^{-1})
        let want = 1.0 - (-1f64).exp() / (1.0 - (-1f64).exp());
        assert!((ChannelLaw { d_max: 1.0 }.second_moment() - want).abs() < 1e-15);
    }

    #[test]
    fn stacking_shapes_and_zeros() {
        let c = AntennaConfig::triple(4, 2, 3).unwrap();
        let r = generate_channel(&c, 3, ChannelLaw::default(), 1).unwrap();
        let s = stack_block_diagonal(&r, 0, 1, 1).unwrap();
        assert_eq!(&s.matrix, r.block(0, 1));
        let s = stack_block_diagonal(&r, 0, 0, 2).unwrap();
        assert_eq!(s.matrix.shape(), (6, 12));
        for t in 0..3 {
            for u in 0..3 {
                let blk = s.matrix.view((2 * t, 4 * u), (2, 4));
                if t == u {
                    assert_eq!(blk.into_owned(), *r.block(0, t));
                } else {
                    assert!(blk.iter().all(|z| *z == ZERO));
                }
            }
        }
        assert!(matches!(
            stack_block_diagonal(&r, 0, 2, 1),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            stack_block_diagonal(&r, 0, 0, 3),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            stack_block_diagonal(&r, 2, 0, 0),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn stacked_rank_is_sum_of_block_ranks() {
        let c = AntennaConfig::new(3, 2, vec![4]).unwrap();
        for seed in 0..20 {
            let r = generate_channel(&c, 4, ChannelLaw::default(), seed).unwrap();
            for j in 0..2 {
                let s = stack_block_diagonal(&r, j, 0, 3).unwrap();
                let sum: usize = (0..4)
                    .map(|t| numeric_rank(r.block(j, t), RANK_REL_TOL))
                    .sum();
                assert_eq!(numeric_rank(&s.matrix, RANK_REL_TOL), sum);
            }
        }
    }

    #[test]
    fn apply_scalar_and_zero() {
        let c = AntennaConfig::triple(1, 1, 1).unwrap();
        let r = generate_channel(&c, 1, ChannelLaw::default(), 1).unwrap();
        let r = r
            .with_block(0, 0, CMatrix::from_element(1, 1, Complex64::new(2.0, 0.0)))
            .unwrap();
        let x = CVector::from_element(1, Complex64::new(3.0, 0.0));
        let y = apply_channel(&r, &x, NoiseMode::Off, &mut rng_from_seed(0)).unwrap();
        assert_eq!(y[0].values[0], Complex64::new(6.0, 0.0));

        let c = AntennaConfig::triple(3, 2, 2).unwrap();
        let r = generate_channel(&c, 2, ChannelLaw::default(), 1).unwrap();
        let y = apply_channel(
            &r,
            &CVector::zeros(6),
            NoiseMode::Off,
            &mut rng_from_seed(0),
        )
        .unwrap();
        assert!(y.iter().all(|b| b.values.iter().all(|v| *v == ZERO)));
        assert!(matches!(
            apply_channel(
                &r,
                &CVector::zeros(5),
                NoiseMode::Off,
                &mut rng_from_seed(0)
            ),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn noise_has_unit_variance() {
        let c = AntennaConfig::triple(1, 1, 1).unwrap();
        let n = 100_000;
        let r = generate_channel(&c, n, ChannelLaw::default(), 5).unwrap();
        let y = apply_channel(
            &r,
            &CVector::zeros(n),
            NoiseMode::UnitVariance,
            &mut rng_from_seed(9),
        )
        .unwrap();
        for b in &y {
            let var = b.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            assert!((var - 1.0).abs() < 0.02, "variance {var}");
        }
    }

    #[test]
    fn stacked_product_matches_slot_products() {
        let c = AntennaConfig::triple(3, 2, 2).unwrap();
        let r = generate_channel(&c, 3, ChannelLaw::default(), 4).unwrap();
        let x = crate::linalg::complex_gaussian_vector(&mut rng_from_seed(2), 9, 1.0);
        let y = apply_channel(&r, &x, NoiseMode::Off, &mut rng_from_seed(0)).unwrap();
        for (j, yj) in y.iter().enumerate() {
            let s = stack_block_diagonal(&r, j, 0, 2).unwrap();
            let direct = &s.matrix * &x;
            assert!((direct - &yj.values).norm() < 1e-12);
        }
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| trial_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
    }
}
