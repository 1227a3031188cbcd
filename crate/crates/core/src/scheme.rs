//! Transmit-side construction of both achievable schemes.
//!
//! Single-slot scheme (n_max < m ≤ n₁): the first n_max antennas carry
//! artificial noise and the remaining m − n_max carry information.
//!
//! Two-phase scheme (m > max(n₁, n_max)), block length b = m̄ − n_max + n̄,
//! only the first m̄ antennas active:
//!
//! ```text
//! x^b = c · [ I_{n̄m̄}   0                               ] [u]
//!           [ A        I_{m̄−n_max} ⊗ [I_{n₁}; 0_{(m̄−n₁)×n₁}] ] [v]
//! ```
//!
//! Phase 1 (slots 0..n̄) sends fresh noise on every active antenna. In
//! phase-2 slot n̄+s the first n̄ antennas resend the noise equations that
//! legitimate antenna s heard during phase 1, which the transmitter rebuilds
//! from delayed CSIT. `c` is a fixed power normalization.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian_vector, identity, kron, CMatrix, CVector, ONE, ZERO};
use crate::model::{
    AntennaConfig, ChannelLaw, ChannelRealization, SignalBlock, SignalRole, LEGITIMATE,
};
use crate::sdof::Regime;

fn check_power(p: f64) -> Result<()> {
    if p.is_finite() && p >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "power must be finite and non-negative, got {p}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseAEncoding {
    pub p: f64,
    /// Artificial noise on antennas 0..n_max.
    pub u: CVector,
    /// Information on antennas n_max..m.
    pub v: CVector,
    pub x: CVector,
    pub k_x: CMatrix,
    pub k_x_given_v: CMatrix,
}

pub fn case_a_applies(config: &AntennaConfig) -> bool {
    config.n_max() < config.m() && config.m() <= config.n1()
}

pub fn encode_case_a<R: Rng + ?Sized>(
    config: &AntennaConfig,
    p: f64,
    rng: &mut R,
) -> Result<CaseAEncoding> {
    check_power(p)?;
    if !case_a_applies(config) {
        return Err(Error::NotApplicable(format!(
            "single-slot scheme needs n_max < m <= n1, got m={}, n1={}, n_max={}",
            config.m(),
            config.n1(),
            config.n_max()
        )));
    }
    let (m, n_max) = (config.m(), config.n_max());
    let var = p / m as f64;
    let u = complex_gaussian_vector(rng, n_max, var);
    let v = complex_gaussian_vector(rng, m - n_max, var);
    Ok(case_a_from_symbols(config, p, u, v))
}

/// Builds the encoding for given symbols (no randomness).
pub fn case_a_from_symbols(
    config: &AntennaConfig,
    p: f64,
    u: CVector,
    v: CVector,
) -> CaseAEncoding {
    let (m, n_max) = (config.m(), config.n_max());
    assert_eq!((u.len(), v.len()), (n_max, m - n_max));
    let var = num_complex::Complex64::new(p / m as f64, 0.0);
    let mut x = CVector::zeros(m);
    x.rows_mut(0, n_max).copy_from(&u);
    x.rows_mut(n_max, m - n_max).copy_from(&v);
    let k_x = identity(m) * var;
    let mut k_x_given_v = CMatrix::zeros(m, m);
    for i in 0..n_max {
        k_x_given_v[(i, i)] = var;
    }
    CaseAEncoding {
        p,
        u,
        v,
        x,
        k_x,
        k_x_given_v,
    }
}

/// Block geometry of the two-phase scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TwoPhasePlan {
    pub m: usize,
    pub n1: usize,
    pub n_max: usize,
    pub m_bar: usize,
    pub n_bar: usize,
}

impl TwoPhasePlan {
    pub fn new(config: &AntennaConfig) -> Result<Self> {
        if Regime::of(config) != Regime::TwoPhase {
            return Err(Error::NotApplicable(format!(
                "two-phase scheme needs m > max(n1, n_max), got m={}, n1={}, n_max={}",
                config.m(),
                config.n1(),
                config.n_max()
            )));
        }
        let plan = Self {
            m: config.m(),
            n1: config.n1(),
            n_max: config.n_max(),
            m_bar: config.m_bar(),
            n_bar: config.n_bar(),
        };
        debug_assert!(plan.phase2_len() <= plan.n1);
        Ok(plan)
    }

    /// b = m̄ − n_max + n̄
    pub fn block_len(&self) -> usize {
        self.phase1_len() + self.phase2_len()
    }

    pub fn phase1_len(&self) -> usize {
        self.n_bar
    }

    pub fn phase2_len(&self) -> usize {
        self.m_bar - self.n_max
    }

    pub fn noise_len(&self) -> usize {
        self.n_bar * self.m_bar
    }

    /// Information symbols per block, n₁(m̄ − n_max).
    pub fn info_len(&self) -> usize {
        self.n1 * self.phase2_len()
    }

    /// c² = b·m̄ / E‖P‖²_F, so that E‖x^b‖² = b·p when u, v ~ CN(0, p/m̄).
    pub fn power_scale(&self, law: &ChannelLaw) -> f64 {
        let b = self.block_len() as f64;
        let mb = self.m_bar as f64;
        let frob = self.noise_len() as f64
            + (self.phase2_len() * self.n_bar * self.m_bar) as f64 * law.second_moment()
            + self.info_len() as f64;
        (b * mb / frob).sqrt()
    }
}

/// Stacked noise-equation selector A, `(m̄−n_max)·m̄ × n̄·m̄`, built from the
/// legitimate receiver's phase-1 channels of the block starting at slot
/// `block_start`. In the slot-s sub-block, row i holds the channel row of
/// legitimate antenna s at phase-1 slot i (first m̄ columns) in block column
/// i, so that `(A·u)` rows are exactly the noiseless phase-1 outputs of
/// legitimate antennas 0..m̄−n_max.
pub fn build_noise_selector(
    plan: &TwoPhasePlan,
    real: &ChannelRealization,
    block_start: usize,
) -> Result<CMatrix> {
    if real.m() != plan.m || real.antennas(LEGITIMATE) != plan.n1 {
        return Err(Error::Dimension(format!(
            "realization has m={}, n1={}; plan needs m={}, n1={}",
            real.m(),
            real.antennas(LEGITIMATE),
            plan.m,
            plan.n1
        )));
    }
    if block_start + plan.phase1_len() > real.horizon() {
        return Err(Error::Precondition(format!(
            "phase-1 channels for slots {}..{} are not available (horizon {})",
            block_start,
            block_start + plan.phase1_len(),
            real.horizon()
        )));
    }
    let (mb, nb) = (plan.m_bar, plan.n_bar);
    let mut a = CMatrix::zeros(plan.phase2_len() * mb, nb * mb);
    for s in 0..plan.phase2_len() {
        for i in 0..nb {
            let g = real.block(LEGITIMATE, block_start + i);
            for col in 0..mb {
                a[(s * mb + i, i * mb + col)] = g[(s, col)];
            }
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub plan: TwoPhasePlan,
    /// `b·m̄ × (n̄m̄ + n₁(m̄−n_max))`, columns ordered [u | v].
    pub matrix: CMatrix,
}

impl Precoder {
    pub fn noise_columns(&self) -> CMatrix {
        self.matrix.columns(0, self.plan.noise_len()).into_owned()
    }

    pub fn info_columns(&self) -> CMatrix {
        self.matrix
            .columns(self.plan.noise_len(), self.plan.info_len())
            .into_owned()
    }

    pub fn noise_selector(&self) -> CMatrix {
        let pl = &self.plan;
        self.matrix
            .view(
                (pl.noise_len(), 0),
                (pl.phase2_len() * pl.m_bar, pl.noise_len()),
            )
            .into_owned()
    }

    /// Same precoder with the information columns zeroed.
    pub fn without_information(&self) -> Self {
        let mut out = self.clone();
        let (nl, il) = (self.plan.noise_len(), self.plan.info_len());
        out.matrix.columns_mut(nl, il).fill(ZERO);
        out
    }

    /// Rows spread over all m transmit antennas per slot; antennas m̄..m stay zero.
    pub fn lifted(&self) -> CMatrix {
        let pl = &self.plan;
        let mut out = CMatrix::zeros(pl.block_len() * pl.m, self.matrix.ncols());
        for t in 0..pl.block_len() {
            out.view_mut((t * pl.m, 0), (pl.m_bar, self.matrix.ncols()))
                .copy_from(&self.matrix.rows(t * pl.m_bar, pl.m_bar));
        }
        out
    }

    fn check_structure(&self) -> Result<()> {
        let pl = &self.plan;
        let (nl, il) = (pl.noise_len(), pl.info_len());
        let top = self.matrix.rows(0, nl);
        let top_ok =
            (0..nl).all(|r| (0..nl + il).all(|c| top[(r, c)] == if r == c { ONE } else { ZERO }));
        if !top_ok {
            return Err(Error::Precondition("phase-1 rows must be [I 0]".into()));
        }
        let a = self.noise_selector();
        for s in 0..pl.phase2_len() {
            for r in pl.n_bar..pl.m_bar {
                if a.row(s * pl.m_bar + r).iter().any(|z| *z != ZERO) {
                    return Err(Error::Precondition(format!(
                        "selector row {r} of slot block {s} must be zero"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Assembles P from a noise selector A.
pub fn build_phase2_precoder(plan: &TwoPhasePlan, a: &CMatrix) -> Result<Precoder> {
    let (mb, nl, il, p2) = (
        plan.m_bar,
        plan.noise_len(),
        plan.info_len(),
        plan.phase2_len(),
    );
    if a.shape() != (p2 * mb, nl) {
        return Err(Error::Dimension(format!(
            "selector must be {}x{}, got {:?}",
            p2 * mb,
            nl,
            a.shape()
        )));
    }
    let mut info_map = CMatrix::zeros(mb, plan.n1);
    for i in 0..plan.n1 {
        info_map[(i, i)] = ONE;
    }
    let info_block = kron(&identity(p2), &info_map);
    let mut matrix = CMatrix::zeros(plan.block_len() * mb, nl + il);
    matrix.view_mut((0, 0), (nl, nl)).copy_from(&identity(nl));
    matrix.view_mut((nl, 0), (p2 * mb, nl)).copy_from(a);
    matrix
        .view_mut((nl, nl), (p2 * mb, il))
        .copy_from(&info_block);
    let pre = Precoder {
        plan: *plan,
        matrix,
    };
    pre.check_structure()?;
    Ok(pre)
}

/// Precoder for the block starting at `block_start`.
pub fn precoder_for_block(
    plan: &TwoPhasePlan,
    real: &ChannelRealization,
    block_start: usize,
) -> Result<Precoder> {
    let a = build_noise_selector(plan, real, block_start)?;
    build_phase2_precoder(plan, &a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseEncoding {
    pub plan: TwoPhasePlan,
    pub precoder: Precoder,
    pub p: f64,
    /// Power normalization c applied to the whole block.
    pub scale: f64,
    pub u: CVector,
    pub v: CVector,
    /// x^b over all m antennas, `b·m` entries.
    pub transmit: SignalBlock,
}

impl TwoPhaseEncoding {
    pub fn from_symbols(
        plan: &TwoPhasePlan,
        p: f64,
        real: &ChannelRealization,
        u: CVector,
        v: CVector,
    ) -> Result<Self> {
        if u.len() != plan.noise_len() || v.len() != plan.info_len() {
            return Err(Error::Dimension(format!(
                "u, v must have lengths {}, {}; got {}, {}",
                plan.noise_len(),
                plan.info_len(),
                u.len(),
                v.len()
            )));
        }
        let precoder = precoder_for_block(plan, real, 0)?;
        let scale = plan.power_scale(&ChannelLaw::new(real.d_max())?);
        let mut w = CVector::zeros(u.len() + v.len());
        w.rows_mut(0, u.len()).copy_from(&u);
        w.rows_mut(u.len(), v.len()).copy_from(&v);
        let x = precoder.lifted() * w * num_complex::Complex64::new(scale, 0.0);
        let transmit = SignalBlock {
            role: SignalRole::Transmit,
            slots: 0..=plan.block_len() - 1,
            values: x,
        };
        Ok(Self {
            plan: *plan,
            precoder,
            p,
            scale,
            u,
            v,
            transmit,
        })
    }

    /// Symbols per slot actually carried, n₁(m̄ − n_max)/b.
    pub fn rate(&self) -> num_rational::Rational64 {
        num_rational::Rational64::new(self.plan.info_len() as i64, self.plan.block_len() as i64)
    }
}

/// Draws u, v ~ CN(0, p/m̄) and encodes one block over slots 0..b.
pub fn encode_two_phase<R: Rng + ?Sized>(
    config: &AntennaConfig,
    p: f64,
    real: &ChannelRealization,
    rng: &mut R,
) -> Result<TwoPhaseEncoding> {
    check_power(p)?;
    let plan = TwoPhasePlan::new(config)?;
    let var = p / plan.m_bar as f64;
    let u = complex_gaussian_vector(rng, plan.noise_len(), var);
    let v = complex_gaussian_vector(rng, plan.info_len(), var);
    TwoPhaseEncoding::from_symbols(&plan, p, real, u, v)
}
