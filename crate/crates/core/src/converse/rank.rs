//! Linear-rank analogues of the converse inequalities.
//!
//! Each check draws channels, builds a linear transmit matrix `X` (rows are
//! slot-stacked transmit antennas), forms the noiseless outputs
//! `Y_j = G_jⁿ X`, and compares rank ratios. Differential entropies are
//! replaced by ranks; conditional entropy `h(Y_a | Y_c)` by
//! `rank [Y_a; Y_c] − rank Y_c`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    block_diagonal, complex_gaussian_matrix, identity, singular_values, vstack, CMatrix,
};
use crate::model::{
    generate_channel, rng_from_seed, stack_block_diagonal, sub_seed, trial_seed, AntennaConfig,
    ChannelLaw, ChannelRealization, LEGITIMATE,
};
use crate::receiver::checked_rank;
use crate::scheme::{precoder_for_block, TwoPhasePlan};

/// Minimum fraction of non-degenerate trials on which a per-draw inequality must hold.
pub const REQUIRED_PASS_RATE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    ChannelIndependentRandom,
    TwoPhasePrecoder,
    CustomMatrix,
}

/// How the transmitter maps symbols to `xⁿ`. None of the variants read an
/// eavesdropper or probe-receiver channel.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearStrategy {
    /// i.i.d. CN(0, 1) matrix with `dims` columns, drawn independently of all channels.
    ChannelIndependent { dims: usize },
    /// A fixed matrix with `horizon·m` rows.
    Fixed(CMatrix),
    /// The two-phase precoder of `config`, one block per `b` slots, each
    /// block's selector built from the legitimate receiver's phase-1 channels.
    TwoPhase { config: AntennaConfig },
    /// Per slot, a basis of the null space of the legitimate receiver's
    /// current channel. Uses current rather than delayed CSIT.
    LegitimateNullSpace,
}

impl LinearStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Self::ChannelIndependent { .. } => StrategyKind::ChannelIndependentRandom,
            Self::TwoPhase { .. } => StrategyKind::TwoPhasePrecoder,
            Self::Fixed(_) | Self::LegitimateNullSpace => StrategyKind::CustomMatrix,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::ChannelIndependent { dims } => format!("channel-independent(dims={dims})"),
            Self::Fixed(x) => format!("fixed({}x{})", x.nrows(), x.ncols()),
            Self::TwoPhase { config } => {
                format!(
                    "two-phase(m={}, n1={}, n_max={})",
                    config.m(),
                    config.n1(),
                    config.n_max()
                )
            }
            Self::LegitimateNullSpace => "legitimate-null-space".into(),
        }
    }

    /// Whether `X` may depend on the legitimate receiver's channels at all.
    pub fn reads_legitimate_channel(&self) -> bool {
        matches!(self, Self::TwoPhase { .. } | Self::LegitimateNullSpace)
    }

    /// Antenna count the strategy expects at the legitimate receiver, if any.
    fn required_legitimate(&self) -> Option<usize> {
        match self {
            Self::TwoPhase { config } => Some(config.n1()),
            _ => None,
        }
    }

    /// Natural horizon for one run of the strategy.
    pub fn default_horizon(&self) -> usize {
        match self {
            Self::TwoPhase { config } => TwoPhasePlan::new(config).map_or(1, |p| p.block_len()),
            _ => 1,
        }
    }

    pub fn transmit_matrix(&self, real: &ChannelRealization, seed: u64) -> Result<CMatrix> {
        let (m, n) = (real.m(), real.horizon());
        match self {
            Self::ChannelIndependent { dims } => Ok(complex_gaussian_matrix(
                &mut rng_from_seed(seed),
                n * m,
                *dims,
                1.0,
            )),
            Self::Fixed(x) => {
                if x.nrows() != n * m {
                    return Err(Error::Dimension(format!(
                        "fixed X has {} rows, need {}",
                        x.nrows(),
                        n * m
                    )));
                }
                Ok(x.clone())
            }
            Self::TwoPhase { config } => {
                let plan = TwoPhasePlan::new(config)?;
                if config.m() != m {
                    return Err(Error::Dimension(format!(
                        "strategy has m={}, channel has m={m}",
                        config.m()
                    )));
                }
                let b = plan.block_len();
                if n % b != 0 {
                    return Err(Error::Precondition(format!(
                        "horizon {n} is not a multiple of block length {b}"
                    )));
                }
                let scale = plan.power_scale(&ChannelLaw::new(real.d_max())?);
                let blocks = (0..n / b)
                    .map(|k| {
                        precoder_for_block(&plan, real, k * b)
                            .map(|p| p.lifted() * num_complex::Complex64::new(scale, 0.0))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(block_diagonal(&blocks.iter().collect::<Vec<_>>()))
            }
            Self::LegitimateNullSpace => {
                let blocks: Vec<CMatrix> = (0..n)
                    .map(|t| null_space_basis(real.block(LEGITIMATE, t)))
                    .collect();
                Ok(block_diagonal(&blocks.iter().collect::<Vec<_>>()))
            }
        }
    }
}

/// Orthonormal basis of the null space of `g` (columns).
fn null_space_basis(g: &CMatrix) -> CMatrix {
    let m = g.ncols();
    let pinv = g
        .clone()
        .pseudo_inverse(1e-12)
        .expect("non-negative epsilon");
    let proj = identity(m) - pinv * g;
    let svd = proj.svd(true, false);
    let u = svd.u.expect("requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 0.5)
        .collect();
    u.select_columns(keep.iter())
}

/// `rank [a; c] − rank c`.
pub fn conditional_rank(a: &CMatrix, c: &CMatrix) -> Result<usize> {
    if c.nrows() == 0 {
        return checked_rank(a);
    }
    if a.nrows() == 0 {
        return Ok(0);
    }
    let joint = checked_rank(&vstack(&[a, c]))?;
    let base = checked_rank(c)?;
    Ok(joint - base)
}

fn rows_of_antennas(y: &CMatrix, antennas: usize, start: usize, len: usize) -> CMatrix {
    if len == 0 {
        return CMatrix::zeros(0, y.ncols());
    }
    crate::linalg::select_slot_rows(y, antennas, start, len)
}

/// Transmitter size, horizon, and the receivers a check observes. Receiver 0
/// is the legitimate receiver (the only source of CSIT); the probes supply none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSetup {
    pub m: usize,
    pub horizon: usize,
    pub legitimate: usize,
    pub probes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub master_seed: u64,
    pub tol: f64,
}

/// Outcome of a rank-analogue check over many draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankCheckReport {
    pub check: String,
    /// The inequality checked per draw, as `lhs <= rhs + tol`.
    pub inequality: String,
    pub strategy: String,
    pub strategy_kind: StrategyKind,
    pub setup: RankSetup,
    pub trials: u64,
    pub degenerate: u64,
    pub passed: u64,
    pub pass_rate: f64,
    pub lhs_mean: f64,
    pub rhs_mean: f64,
    pub averaged_holds: bool,
    pub failing_seeds: Vec<u64>,
    pub degenerate_seeds: Vec<u64>,
    pub pass: bool,
}

enum Draw {
    Value { lhs: f64, rhs: f64 },
    Degenerate,
}

fn one_draw<F>(setup: &RankSetup, strategy: &LinearStrategy, seed: u64, eval: &F) -> Result<Draw>
where
    F: Fn(&[CMatrix]) -> Result<(f64, f64)>,
{
    let config = AntennaConfig::new(setup.m, setup.legitimate, setup.probes.clone())?;
    let real = generate_channel(
        &config,
        setup.horizon,
        ChannelLaw::default(),
        sub_seed(seed, 0),
    )?;
    let x = strategy.transmit_matrix(&real, sub_seed(seed, 1))?;
    let outputs = (0..config.receiver_count())
        .map(|j| stack_block_diagonal(&real, j, 0, setup.horizon - 1).map(|g| g.matrix * &x))
        .collect::<Result<Vec<_>>>()?;
    match eval(&outputs) {
        Ok((lhs, rhs)) => Ok(Draw::Value { lhs, rhs }),
        Err(Error::DegenerateDraw(_)) => Ok(Draw::Degenerate),
        Err(e) => Err(e),
    }
}

fn run_check<F>(
    check: &str,
    inequality: &str,
    setup: RankSetup,
    strategy: &LinearStrategy,
    plan: TrialPlan,
    eval: F,
) -> Result<RankCheckReport>
where
    F: Fn(&[CMatrix]) -> Result<(f64, f64)> + Sync,
{
    if let Some(n) = strategy.required_legitimate() {
        if n != setup.legitimate {
            return Err(Error::Precondition(format!(
                "strategy needs a {n}-antenna legitimate receiver, setup has {}",
                setup.legitimate
            )));
        }
    }
    if setup.horizon == 0 || setup.probes.is_empty() {
        return Err(Error::InvalidParameter(
            "need a positive horizon and at least one probe receiver".into(),
        ));
    }
    if plan.tol.is_nan() || plan.tol < 0.0 {
        return Err(Error::InvalidParameter(
            "tolerance must be non-negative".into(),
        ));
    }
    let draws = (0..plan.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(plan.master_seed, i);
            one_draw(&setup, strategy, seed, &eval).map(|d| (seed, d))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut passed, mut degenerate) = (0u64, 0u64);
    let (mut lhs_sum, mut rhs_sum) = (0.0, 0.0);
    let mut failing_seeds = Vec::new();
    let mut degenerate_seeds = Vec::new();
    for (seed, d) in &draws {
        match d {
            Draw::Degenerate => {
                degenerate += 1;
                degenerate_seeds.push(*seed);
            }
            Draw::Value { lhs, rhs } => {
                lhs_sum += lhs;
                rhs_sum += rhs;
                if *lhs <= rhs + plan.tol {
                    passed += 1;
                } else {
                    failing_seeds.push(*seed);
                }
            }
        }
    }
    let counted = plan.trials - degenerate;
    let (pass_rate, lhs_mean, rhs_mean) = if counted == 0 {
        (1.0, 0.0, 0.0)
    } else {
        (
            passed as f64 / counted as f64,
            lhs_sum / counted as f64,
            rhs_sum / counted as f64,
        )
    };
    let averaged_holds = lhs_mean <= rhs_mean + plan.tol;
    Ok(RankCheckReport {
        check: check.into(),
        inequality: inequality.into(),
        strategy: strategy.label(),
        strategy_kind: strategy.kind(),
        setup,
        trials: plan.trials,
        degenerate,
        passed,
        pass_rate,
        lhs_mean,
        rhs_mean,
        averaged_holds,
        failing_seeds,
        degenerate_seeds,
        pass: pass_rate >= REQUIRED_PASS_RATE && averaged_holds,
    })
}

fn ratio(rank: usize, dims: usize) -> f64 {
    rank as f64 / dims as f64
}

/// Two `n0`-antenna receivers, the second unseen by the transmitter:
/// rank(G₁ⁿX) ≤ rank(G₂ⁿX).
pub fn check_least_alignment(
    m: usize,
    n0: usize,
    horizon: usize,
    strategy: &LinearStrategy,
    plan: TrialPlan,
) -> Result<RankCheckReport> {
    let setup = RankSetup {
        m,
        horizon,
        legitimate: n0,
        probes: vec![n0],
    };
    run_check(
        "least-alignment",
        "rank(Y1) <= rank(Y2)",
        setup,
        strategy,
        plan,
        |y| Ok((checked_rank(&y[0])? as f64, checked_rank(&y[1])? as f64)),
    )
}

/// Receiver 2 supplies no CSIT:
/// rank[Y₁; Y₂]/min(m, n₁+n₂) ≤ rank(Y₂)/min(m, n₂).
pub fn check_eri_delayed(
    m: usize,
    n1: usize,
    n2: usize,
    horizon: usize,
    strategy: &LinearStrategy,
    plan: TrialPlan,
) -> Result<RankCheckReport> {
    let setup = RankSetup {
        m,
        horizon,
        legitimate: n1,
        probes: vec![n2],
    };
    run_check(
        "eri-delayed",
        "rank([Y1;Y2])/min(m,n1+n2) <= rank(Y2)/min(m,n2)",
        setup,
        strategy,
        plan,
        move |y| {
            let joint = checked_rank(&vstack(&[&y[0], &y[1]]))?;
            Ok((
                ratio(joint, m.min(n1 + n2)),
                ratio(checked_rank(&y[1])?, m.min(n2)),
            ))
        },
    )
}

/// Two receivers with n₁ ≥ n₂ antennas, neither supplying CSIT, optionally
/// conditioned on a third (n₃ antennas, also no CSIT):
/// rank(Y₁|Y₃)/min(m,n₁) ≤ rank(Y₂|Y₃)/min(m,n₂).
///
/// `legitimate` is the antenna count of the receiver the strategy may read;
/// it is not part of the inequality.
#[allow(clippy::too_many_arguments)]
pub fn check_eri_nocsit(
    m: usize,
    n1: usize,
    n2: usize,
    n3: Option<usize>,
    legitimate: usize,
    horizon: usize,
    strategy: &LinearStrategy,
    plan: TrialPlan,
) -> Result<RankCheckReport> {
    if n1 < n2 {
        return Err(Error::Precondition(format!(
            "need n1 >= n2, got {n1} < {n2}"
        )));
    }
    let mut probes = vec![n1, n2];
    probes.extend(n3);
    let setup = RankSetup {
        m,
        horizon,
        legitimate,
        probes,
    };
    let (name, ineq) = match n3 {
        Some(_) => (
            "eri-nocsit-conditional",
            "rank(Y1|Y3)/min(m,n1) <= rank(Y2|Y3)/min(m,n2)",
        ),
        None => ("eri-nocsit", "rank(Y1)/min(m,n1) <= rank(Y2)/min(m,n2)"),
    };
    run_check(name, ineq, setup, strategy, plan, move |y| {
        let empty = CMatrix::zeros(0, y[1].ncols());
        let cond = if n3.is_some() { &y[3] } else { &empty };
        Ok((
            ratio(conditional_rank(&y[1], cond)?, m.min(n1)),
            ratio(conditional_rank(&y[2], cond)?, m.min(n2)),
        ))
    })
}

/// m ≥ n₁+n₂+n₃, receivers 2 and 3 supply no CSIT:
/// rank(Y₁|Y₂,Y₃)/n₁ ≤ rank(Y₂|Y₃)/n₂.
pub fn check_joint_claim(
    m: usize,
    (n1, n2, n3): (usize, usize, usize),
    horizon: usize,
    strategy: &LinearStrategy,
    plan: TrialPlan,
) -> Result<RankCheckReport> {
    if m < n1 + n2 + n3 {
        return Err(Error::Precondition(format!(
            "need m >= n1+n2+n3, got {m} < {}",
            n1 + n2 + n3
        )));
    }
    let setup = RankSetup {
        m,
        horizon,
        legitimate: n1,
        probes: vec![n2, n3],
    };
    run_check(
        "joint",
        "rank(Y1|Y2,Y3)/n1 <= rank(Y2|Y3)/n2",
        setup,
        strategy,
        plan,
        move |y| {
            let y23 = vstack(&[&y[1], &y[2]]);
            Ok((
                ratio(conditional_rank(&y[0], &y23)?, n1),
                ratio(conditional_rank(&y[1], &y[2])?, n2),
            ))
        },
    )
}

/// m > max(n₁, n_max): rank(Y₁) ≤ (n₁/n̄)·rank(Y_{max,1}), where Y_{max,1}
/// is the first n̄ antennas of the strongest eavesdropper.
pub fn check_proposition1(
    config: &AntennaConfig,
    horizon: usize,
    strategy: &LinearStrategy,
    plan: TrialPlan,
) -> Result<RankCheckReport> {
    let (m, n1, n_max, n_bar) = (config.m(), config.n1(), config.n_max(), config.n_bar());
    if m <= n1.max(n_max) {
        return Err(Error::NotApplicable("needs m > max(n1, n_max)".into()));
    }
    let setup = RankSetup {
        m,
        horizon,
        legitimate: n1,
        probes: vec![n_max],
    };
    run_check(
        "proposition1",
        "rank(Y1) <= (n1/n_bar)*rank(Y_max,1)",
        setup,
        strategy,
        plan,
        move |y| {
            let first = rows_of_antennas(&y[1], n_max, 0, n_bar);
            Ok((
                checked_rank(&y[0])? as f64,
                n1 as f64 / n_bar as f64 * checked_rank(&first)? as f64,
            ))
        },
    )
}

/// n₁ < n_max < m: the joint-claim inequality with Y₁ the first m̄−n_max
/// legitimate antennas, Y₂ the last n_max−n̄ eavesdropper antennas and Y₃ the
/// first n̄ eavesdropper antennas.
pub fn check_proposition2(
    config: &AntennaConfig,
    horizon: usize,
    strategy: &LinearStrategy,
    plan: TrialPlan,
) -> Result<RankCheckReport> {
    let (m, n1, n_max, n_bar, m_bar) = (
        config.m(),
        config.n1(),
        config.n_max(),
        config.n_bar(),
        config.m_bar(),
    );
    if !(n1 < n_max && n_max < m) {
        return Err(Error::NotApplicable("needs n1 < n_max < m".into()));
    }
    let setup = RankSetup {
        m,
        horizon,
        legitimate: n1,
        probes: vec![n_max],
    };
    let lead = m_bar - n_max;
    run_check(
        "proposition2",
        "rank(Y1,1|Y_max)/(m_bar-n_max) <= rank(Y_max,2|Y_max,1)/(n_max-n_bar)",
        setup,
        strategy,
        plan,
        move |y| {
            let y11 = rows_of_antennas(&y[0], n1, 0, lead);
            let ymax1 = rows_of_antennas(&y[1], n_max, 0, n_bar);
            let ymax2 = rows_of_antennas(&y[1], n_max, n_bar, n_max - n_bar);
            Ok((
                ratio(conditional_rank(&y11, &y[1])?, lead),
                ratio(conditional_rank(&ymax2, &ymax1)?, n_max - n_bar),
            ))
        },
    )
}

/// Largest relative gap test used by reports: the smallest retained singular
/// value of `m` relative to its largest.
pub fn conditioning(m: &CMatrix) -> Option<f64> {
    let sv = singular_values(m);
    let top = *sv.first()?;
    sv.iter().rev().find(|&&s| s > 1e-9 * top).map(|s| s / top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn plan(trials: u64) -> TrialPlan {
        TrialPlan {
            trials,
            master_seed: 1,
            tol: 1e-9,
        }
    }

    fn two_phase(m: usize, n1: usize, nm: usize) -> LinearStrategy {
        LinearStrategy::TwoPhase {
            config: AntennaConfig::triple(m, n1, nm).unwrap(),
        }
    }

    #[test]
    fn conditional_rank_is_additive() {
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let a = complex_gaussian_matrix(&mut rng, 2, 5, 1.0);
            let c = complex_gaussian_matrix(&mut rng, 2, 5, 1.0);
            let joint = checked_rank(&vstack(&[&a, &c])).unwrap();
            assert_eq!(
                joint,
                conditional_rank(&a, &c).unwrap() + checked_rank(&c).unwrap()
            );
        }
        let a = complex_gaussian_matrix(&mut rng, 2, 5, 1.0);
        assert_eq!(conditional_rank(&a, &CMatrix::zeros(0, 5)).unwrap(), 2);
        assert_eq!(conditional_rank(&a, &CMatrix::zeros(3, 5)).unwrap(), 2);
    }

    #[test]
    fn null_space_basis_is_annihilated() {
        let mut rng = rng_from_seed(5);
        let g = complex_gaussian_matrix(&mut rng, 2, 5, 1.0);
        let b = null_space_basis(&g);
        assert_eq!(b.shape(), (5, 3));
        assert!((g * b).norm() < 1e-10);
    }

    #[test]
    fn least_alignment_independent_strategy_gives_equal_ranks() {
        let s = LinearStrategy::ChannelIndependent { dims: 6 };
        let r = check_least_alignment(4, 2, 2, &s, plan(200)).unwrap();
        assert!(r.pass);
        assert_eq!(r.passed, 200);
        assert_eq!(r.lhs_mean, r.rhs_mean);
    }

    #[test]
    fn least_alignment_with_deliberate_alignment_is_strict() {
        let r = check_least_alignment(4, 2, 1, &LinearStrategy::LegitimateNullSpace, plan(100))
            .unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs_mean, 0.0);
        assert_eq!(r.rhs_mean, 2.0);
    }

    #[test]
    fn least_alignment_two_phase() {
        let r = check_least_alignment(4, 2, 3, &two_phase(4, 2, 3), plan(300)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.passed, 300 - r.degenerate);
    }

    #[test]
    fn zero_strategy_passes_everywhere() {
        let zero = |rows| LinearStrategy::Fixed(CMatrix::zeros(rows, 3));
        let r = check_eri_delayed(4, 2, 3, 1, &zero(4), plan(10)).unwrap();
        assert!(r.pass && r.lhs_mean == 0.0 && r.rhs_mean == 0.0);
        let r = check_joint_claim(4, (2, 1, 1), 1, &zero(4), plan(10)).unwrap();
        assert!(r.pass && r.lhs_mean == 0.0);
        let c = AntennaConfig::triple(4, 2, 3).unwrap();
        let r = check_proposition1(&c, 1, &zero(4), plan(10)).unwrap();
        assert!(r.pass && r.lhs_mean == 0.0);
    }

    #[test]
    fn eri_delayed_full_random_single_slot() {
        // rank(Y2) = min(m,n2) and rank[Y1;Y2] = min(m,n1+n2): both ratios are 1.
        for (m, n1, n2) in [(4, 2, 3), (3, 1, 1), (6, 2, 2)] {
            let s = LinearStrategy::ChannelIndependent { dims: m };
            let r = check_eri_delayed(m, n1, n2, 1, &s, plan(100)).unwrap();
            assert!(r.pass);
            assert!((r.lhs_mean - 1.0).abs() < 1e-12 && (r.rhs_mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eri_nocsit_analytic_ratios() {
        // X full rank r: min(n1,r)/min(m,n1) vs min(n2,r)/min(m,n2)
        for (m, n1, n2, r) in [(5, 3, 2, 1), (5, 3, 2, 2), (5, 3, 2, 4), (6, 4, 1, 3)] {
            let s = LinearStrategy::ChannelIndependent { dims: r };
            let rep = check_eri_nocsit(m, n1, n2, None, 1, 1, &s, plan(50)).unwrap();
            let want_l = n1.min(r) as f64 / m.min(n1) as f64;
            let want_r = n2.min(r) as f64 / m.min(n2) as f64;
            assert!((rep.lhs_mean - want_l).abs() < 1e-12, "{rep:?}");
            assert!((rep.rhs_mean - want_r).abs() < 1e-12);
            assert!(rep.pass);
        }
        let s = LinearStrategy::ChannelIndependent { dims: 3 };
        let rep = check_eri_nocsit(4, 2, 2, None, 1, 2, &s, plan(50)).unwrap();
        assert_eq!(rep.passed, 50);
        assert_eq!(rep.lhs_mean, rep.rhs_mean);
        assert!(matches!(
            check_eri_nocsit(4, 1, 2, None, 1, 1, &s, plan(1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn eri_conditional_on_zero_receiver_reduces_to_unconditional() {
        let s = LinearStrategy::ChannelIndependent { dims: 3 };
        let a = check_eri_nocsit(4, 3, 2, None, 1, 2, &s, plan(30)).unwrap();
        let y3 = CMatrix::zeros(0, 3);
        let _ = y3;
        // a third receiver whose outputs are always zero: use a fixed X with zero rows? Instead check
        // conditional_rank with an all-zero conditioning block directly.
        let mut rng = rng_from_seed(8);
        let y = complex_gaussian_matrix(&mut rng, 3, 4, 1.0);
        assert_eq!(
            conditional_rank(&y, &CMatrix::from_element(2, 4, ZERO)).unwrap(),
            checked_rank(&y).unwrap()
        );
        assert!(a.pass);
    }

    #[test]
    fn joint_claim_generic() {
        let s = LinearStrategy::ChannelIndependent { dims: 4 };
        let r = check_joint_claim(4, (2, 1, 1), 1, &s, plan(1000)).unwrap();
        assert!(r.pass);
        assert_eq!(r.passed + r.degenerate, 1000);
        assert!(matches!(
            check_joint_claim(3, (2, 1, 1), 1, &s, plan(1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn propositions_under_two_phase() {
        for (m, n1, nm) in [(4, 2, 3), (3, 1, 2), (6, 2, 3)] {
            let c = AntennaConfig::triple(m, n1, nm).unwrap();
            let s = two_phase(m, n1, nm);
            let h = s.default_horizon();
            let r = check_proposition1(&c, h, &s, plan(200)).unwrap();
            assert!(r.pass, "{r:?}");
            let r = check_proposition2(&c, h, &s, plan(200)).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let c = AntennaConfig::triple(5, 2, 2).unwrap();
        let s = two_phase(5, 2, 2);
        assert!(check_proposition1(&c, 4, &s, plan(50)).unwrap().pass);
        assert!(matches!(
            check_proposition2(&c, 4, &s, plan(1)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn two_phase_needs_matching_legitimate_receiver() {
        let s = two_phase(4, 2, 3);
        assert!(matches!(
            check_least_alignment(4, 3, 3, &s, plan(1)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            check_least_alignment(4, 2, 2, &s, plan(1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn two_phase_multi_block_horizon() {
        let s = two_phase(4, 2, 3);
        let r = check_eri_delayed(4, 2, 3, 6, &s, plan(50)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let s = LinearStrategy::ChannelIndependent { dims: 3 };
        let a = check_joint_claim(5, (2, 2, 1), 2, &s, plan(40)).unwrap();
        let b = check_joint_claim(5, (2, 2, 1), 2, &s, plan(40)).unwrap();
        assert_eq!(a, b);
    }
}
