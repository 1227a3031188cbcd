//! Receiver side: numeric rank, log-det DoF slopes, leakage to each
//! receiver, the rank identities behind secrecy of the two-phase scheme, and
//! zero-forcing decoders for both schemes.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{logdet_identity_plus, singular_values, CMatrix, CVector};
use crate::model::{stack_block_diagonal, AntennaConfig, ChannelRealization, LEGITIMATE};
use crate::scheme::{case_a_applies, Precoder, TwoPhaseEncoding, TwoPhasePlan};

/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Relative singular values in this band are too close to the rank
/// threshold to classify; draws that produce them are treated as degenerate.
pub const AMBIGUOUS_BAND: (f64, f64) = (1e-12, 1e-7);

/// Power pair used for DoF slopes.
pub const SLOPE_POWERS: (f64, f64) = (1e6, 1e8);

pub const SLOPE_TOL: f64 = 0.05;

/// Matrices whose largest singular value is at or below this are zero. Every
/// matrix ranked here is built from order-one channel and precoder entries.
pub const ZERO_FLOOR: f64 = 1e-10;

/// Number of singular values above `rel_tol × σ_max`. Empty matrices, and
/// matrices with σ_max ≤ [`ZERO_FLOOR`], have rank 0.
pub fn numeric_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > ZERO_FLOOR => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

/// Rank at [`RANK_REL_TOL`], or a degenerate-draw error when some singular
/// value sits in [`AMBIGUOUS_BAND`].
pub fn checked_rank(m: &CMatrix) -> Result<usize> {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return Ok(0) };
    if !top.is_finite() {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    if top <= ZERO_FLOOR {
        return Ok(0);
    }
    let (lo, hi) = AMBIGUOUS_BAND;
    if let Some(s) = sv.iter().map(|s| s / top).find(|r| *r > lo && *r < hi) {
        return Err(Error::DegenerateDraw(format!(
            "relative singular value {s:e} near the rank threshold"
        )));
    }
    Ok(sv.iter().filter(|&&s| s > RANK_REL_TOL * top).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoFEstimate {
    pub slope: f64,
    pub interpreted_rank: i64,
    pub p0: f64,
    pub p1: f64,
}

impl DoFEstimate {
    fn new(slope: f64, p0: f64, p1: f64) -> Self {
        Self {
            slope,
            interpreted_rank: slope.round() as i64,
            p0,
            p1,
        }
    }

    pub fn deviation(&self) -> f64 {
        (self.slope - self.interpreted_rank as f64).abs()
    }
}

fn check_powers(p0: f64, p1: f64) -> Result<()> {
    if p0 > 1.0 && p1 > p0 && p1.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "need 1 < p0 < p1, got p0={p0}, p1={p1}"
        )))
    }
}

fn logdet(m: &CMatrix, scale: f64) -> Result<f64> {
    logdet_identity_plus(m, scale)
        .ok_or_else(|| Error::NumericalFailure("log-det is not finite".into()))
}

/// [log det(I + p₁AAᴴ) − log det(I + p₀AAᴴ)] / (log p₁ − log p₀)
pub fn logdet_dof_slope(a: &CMatrix, p0: f64, p1: f64) -> Result<DoFEstimate> {
    check_powers(p0, p1)?;
    let slope = (logdet(a, p1)? - logdet(a, p0)?) / (p1.ln() - p0.ln());
    Ok(DoFEstimate::new(slope, p0, p1))
}

/// A linear scheme `x = T·[u; v]` with u, v i.i.d. CN(0, κ·p). The first
/// `noise_cols` columns of T carry artificial noise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEncoding {
    pub transmit_map: CMatrix,
    pub noise_cols: usize,
    pub variance_per_power: f64,
}

impl LinearEncoding {
    pub fn case_a(config: &AntennaConfig) -> Result<Self> {
        if !case_a_applies(config) {
            return Err(Error::NotApplicable(
                "single-slot scheme needs n_max < m <= n1".into(),
            ));
        }
        Ok(Self {
            transmit_map: CMatrix::identity(config.m(), config.m()),
            noise_cols: config.n_max(),
            variance_per_power: 1.0 / config.m() as f64,
        })
    }

    pub fn two_phase(precoder: &Precoder, scale: f64) -> Self {
        Self {
            transmit_map: precoder.lifted() * Complex64::new(scale, 0.0),
            noise_cols: precoder.plan.noise_len(),
            variance_per_power: 1.0 / precoder.plan.m_bar as f64,
        }
    }

    pub fn from_encoding(enc: &TwoPhaseEncoding) -> Self {
        Self::two_phase(&enc.precoder, enc.scale)
    }

    /// Drops the information columns, leaving a pure-noise scheme.
    pub fn without_information(&self) -> Self {
        Self {
            transmit_map: self.transmit_map.columns(0, self.noise_cols).into_owned(),
            noise_cols: self.noise_cols,
            variance_per_power: self.variance_per_power,
        }
    }

    pub fn slots(&self, m: usize) -> usize {
        self.transmit_map.nrows() / m
    }
}

/// Slope of log det(I + H K_x Hᴴ) − log det(I + H K_{x|v} Hᴴ) for an
/// effective channel `h` acting on `T`'s rows.
pub fn leakage_dof_for_channel(
    h: &CMatrix,
    enc: &LinearEncoding,
    p0: f64,
    p1: f64,
) -> Result<DoFEstimate> {
    check_powers(p0, p1)?;
    if h.ncols() != enc.transmit_map.nrows() {
        return Err(Error::Dimension(format!(
            "channel has {} columns, transmit map has {} rows",
            h.ncols(),
            enc.transmit_map.nrows()
        )));
    }
    let full = h * &enc.transmit_map;
    let noise = full.columns(0, enc.noise_cols).into_owned();
    let k = enc.variance_per_power;
    let at = |p: f64| -> Result<f64> { Ok(logdet(&full, k * p)? - logdet(&noise, k * p)?) };
    let slope = (at(p1)? - at(p0)?) / (p1.ln() - p0.ln());
    Ok(DoFEstimate::new(slope, p0, p1))
}

/// Leakage DoF of the information symbols to receiver `j` over the slots the
/// encoding spans, starting at slot 0.
pub fn leakage_dof(
    enc: &LinearEncoding,
    real: &ChannelRealization,
    j: usize,
    p0: f64,
    p1: f64,
) -> Result<DoFEstimate> {
    let slots = enc.slots(real.m());
    if slots == 0 || slots > real.horizon() {
        return Err(Error::Dimension(format!(
            "encoding spans {slots} slots, horizon is {}",
            real.horizon()
        )));
    }
    let g = stack_block_diagonal(real, j, 0, slots - 1)?;
    leakage_dof_for_channel(&g.matrix, enc, p0, p1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecrecyRankReport {
    pub receiver: usize,
    /// rank [G_j^{n̄}; G_j^{phase 2}·A]
    pub rank_noise: usize,
    pub rank_full: usize,
    pub decodable_dims: usize,
    /// n₁(m̄ − n_max) at the legitimate receiver, 0 at eavesdroppers.
    pub expected_dims: usize,
}

impl SecrecyRankReport {
    pub fn holds(&self) -> bool {
        self.decodable_dims == self.expected_dims
    }
}

/// Rank of the received noise subspace and of the full received signal at
/// receiver `j` over one block.
pub fn secrecy_rank_check(
    precoder: &Precoder,
    real: &ChannelRealization,
    j: usize,
) -> Result<SecrecyRankReport> {
    let b = precoder.plan.block_len();
    let g = stack_block_diagonal(real, j, 0, b - 1)?.matrix;
    let lifted = precoder.lifted();
    let full = &g * &lifted;
    let noise = full.columns(0, precoder.plan.noise_len()).into_owned();
    let rank_noise = checked_rank(&noise)?;
    let rank_full = checked_rank(&full)?;
    if rank_full < rank_noise {
        return Err(Error::NumericalFailure(format!(
            "rank_full {rank_full} < rank_noise {rank_noise}"
        )));
    }
    let info_cols_zero = precoder.info_columns().iter().all(|z| z.norm() == 0.0);
    let expected_dims = if j == LEGITIMATE && !info_cols_zero {
        precoder.plan.info_len()
    } else {
        0
    };
    Ok(SecrecyRankReport {
        receiver: j,
        rank_noise,
        rank_full,
        decodable_dims: rank_full - rank_noise,
        expected_dims,
    })
}

fn solve_square(a: &CMatrix, y: &CVector) -> Result<CVector> {
    if checked_rank(a)? < a.ncols() {
        return Err(Error::DegenerateDraw("singular decoding subsystem".into()));
    }
    a.clone()
        .lu()
        .solve(y)
        .ok_or_else(|| Error::DegenerateDraw("singular decoding subsystem".into()))
}

/// Recovers the information symbols of one two-phase block at the legitimate
/// receiver from its own outputs `y` (`b·n₁` entries).
///
/// In phase-2 slot n̄+s the receiver rebuilds the resent noise equations from
/// what its antenna s heard in phase 1, cancels them, and inverts the
/// leading n₁×n₁ block of G₁(n̄+s).
pub fn decode_legitimate(
    plan: &TwoPhasePlan,
    scale: f64,
    y: &CVector,
    real: &ChannelRealization,
) -> Result<CVector> {
    let (n1, nb) = (plan.n1, plan.n_bar);
    if y.len() != plan.block_len() * n1 {
        return Err(Error::Dimension(format!(
            "expected {} received entries, got {}",
            plan.block_len() * n1,
            y.len()
        )));
    }
    if scale <= 0.0 {
        return Err(Error::InvalidParameter(
            "power scale must be positive".into(),
        ));
    }
    let mut v_hat = CVector::zeros(plan.info_len());
    for s in 0..plan.phase2_len() {
        let t = plan.phase1_len() + s;
        // c·u'(t): antenna s of Rx1 across phase-1 slots
        let heard = CVector::from_iterator(nb, (0..nb).map(|i| y[i * n1 + s]));
        let g = real.block(LEGITIMATE, t);
        let yt = y.rows(t * n1, n1).into_owned();
        let residual = yt - g.columns(0, nb) * heard;
        let lead = g.columns(0, n1).into_owned();
        let cv = solve_square(&lead, &residual)?;
        v_hat
            .rows_mut(s * n1, n1)
            .copy_from(&(cv / Complex64::new(scale, 0.0)));
    }
    Ok(v_hat)
}

/// Least-squares solve of the single-slot system at the legitimate receiver;
/// returns the information part x̂[n_max..m].
pub fn decode_case_a(
    config: &AntennaConfig,
    y: &CVector,
    real: &ChannelRealization,
) -> Result<CVector> {
    if !case_a_applies(config) {
        return Err(Error::NotApplicable(
            "single-slot scheme needs n_max < m <= n1".into(),
        ));
    }
    let g = real.block(LEGITIMATE, 0);
    if y.len() != g.nrows() {
        return Err(Error::Dimension(format!(
            "expected {} received entries, got {}",
            g.nrows(),
            y.len()
        )));
    }
    if checked_rank(g)? < config.m() {
        return Err(Error::DegenerateDraw(
            "legitimate channel is rank deficient".into(),
        ));
    }
    let svd = g.clone().svd(true, true);
    let x_hat = svd
        .solve(y, 0.0)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    Ok(x_hat
        .rows(config.n_max(), config.m() - config.n_max())
        .into_owned())
}

/// Mean |v̂ − v|² per symbol, normalized by the symbol variance.
pub fn normalized_mse(v_hat: &CVector, v: &CVector, symbol_variance: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v_hat - v).norm_squared() / (v.len() as f64 * symbol_variance)
}
