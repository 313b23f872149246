//! Alternating optimization of the power split `α`, the NOMA coefficients
//! and the IRS phases.
//!
//! Each outer iteration fixes the phases, sets `α` and `a` in closed form,
//! then improves the phases through the rank-penalized lifted program with
//! `α`, `a` and the decoding order held fixed. A phase update is kept only if
//! the re-optimized strong-user rate does not drop, so the rate trace is
//! nondecreasing.

use crate::baselines::random_phases;
use crate::channel::{ChannelRealization, NUM_USERS};
use crate::phase::{
    build_subproblem, extract_phases, sca_penalty_loop, LiftedMatrix, PenaltyConfig,
};
use crate::rates::{
    alpha_feasible, alpha_lower_bound, decoding_order, optimal_alpha, optimal_power_coeff,
    primary_sinr, rate, residual_sic_alpha_cap, residual_sic_ok, residual_sic_power, secondary_snr,
    sinr_imperfect_sic, DecodingOrder, EffectiveGains, LinkBudget, NomaAllocation, SicModel,
};
use crate::{CVector, Error, Infeasibility, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Slack on the weak user's feasibility window after the coefficient update.
const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoConfig {
    /// Stop once the strong-user rate moves by less than this (bits/s/Hz).
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Seeds the initial phases and coefficients.
    pub seed: u64,
    pub penalty: PenaltyConfig,
    /// Imperfect SIC; the cap, when present, constrains the phase update.
    pub sic: Option<SicModel>,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_outer_iters: 30,
            seed: 0,
            penalty: PenaltyConfig::default(),
            sic: None,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain("rate tolerance ε must be positive".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Domain(
                "at least one outer iteration is required".into(),
            ));
        }
        if let Some(sic) = &self.sic {
            sic.validate()?;
        }
        self.penalty.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Infeasible(Infeasibility),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    Noma,
    /// Two equal time slots, one user each.
    Oma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub alpha: f64,
    /// NOMA power coefficients per user; zero under OMA.
    pub a: [f64; NUM_USERS],
    /// Reflection vector `v` (`Θ = diag(v)`).
    pub phases: CVector,
    /// Per-slot reflection vectors under OMA with time-varying phases.
    pub slot_phases: Option<[CVector; NUM_USERS]>,
    pub access: AccessMode,
    pub order: DecodingOrder,
    pub rates: [f64; NUM_USERS],
    pub rate_strong: f64,
    pub rate_weak: f64,
    pub secondary_snr: [f64; NUM_USERS],
    pub status: Status,
    /// Strong-user rate after every accepted outer iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// Whether the run stopped on the rate tolerance rather than the cap.
    pub converged: bool,
    pub order_flips: usize,
    /// Phase updates discarded because they lowered the rate.
    pub rejected_steps: usize,
    /// Relative rank residual of every penalty loop run.
    pub rank_residuals: Vec<f64>,
}

impl Solution {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }

    pub(crate) fn infeasible(kind: Infeasibility, phases: CVector, access: AccessMode) -> Self {
        Self {
            alpha: 0.0,
            a: [0.0; NUM_USERS],
            phases,
            slot_phases: None,
            access,
            order: DecodingOrder::STRONG_FIRST,
            rates: [0.0; NUM_USERS],
            rate_strong: 0.0,
            rate_weak: 0.0,
            secondary_snr: [0.0; NUM_USERS],
            status: Status::Infeasible(kind),
            trace: Vec::new(),
            iterations: 0,
            converged: true,
            order_flips: 0,
            rejected_steps: 0,
            rank_residuals: Vec::new(),
        }
    }
}

/// Rates and link quantities of a fixed solution on a given set of channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatesReport {
    /// `|g_k|²` (per served slot under OMA).
    pub gains: [f64; NUM_USERS],
    pub sinr: [f64; NUM_USERS],
    pub rates: [f64; NUM_USERS],
    pub rate_strong: f64,
    pub rate_weak: f64,
    pub sum_rate: f64,
    pub secondary_snr: [f64; NUM_USERS],
    pub residual_sic_power: f64,
}

/// Initial phases and strong-user coefficient drawn from `seed`.
pub fn initial_point(num_elements: usize, seed: u64) -> (CVector, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = random_phases(num_elements, &mut rng);
    let a_strong = rng.random_range(0.05..0.5);
    (phases, a_strong)
}

/// Full alternating optimization from the seeded initial point.
pub fn solve(
    channels: &ChannelRealization,
    budget: &LinkBudget,
    config: &AoConfig,
) -> Result<Solution> {
    let (phases, a_strong) = initial_point(channels.num_elements(), config.seed);
    run(channels, budget, config, phases, a_strong, true)
}

/// Iterate with closed-form `α`, `a` for a fixed phase vector.
#[derive(Debug, Clone)]
struct Iterate {
    phases: CVector,
    order: DecodingOrder,
    alloc: NomaAllocation,
    rate: f64,
    sic_ok: bool,
}

fn closed_form(
    channels: &ChannelRealization,
    phases: CVector,
    previous_strong: f64,
    budget: &LinkBudget,
    sic: Option<&SicModel>,
) -> Result<Iterate> {
    let gains = EffectiveGains::compute(channels, &phases);
    let order = decoding_order(&gains);
    let mut alpha = optimal_alpha(&gains, budget)?;
    if let Some(cap) = sic.and_then(|s| residual_sic_alpha_cap(&gains, order, budget, s)) {
        // Shrunk by a rounding margin so the capped point passes the inclusive check.
        let cap = cap * (1.0 - 1e-12);
        if cap < alpha {
            if !(cap > 0.0) || optimal_power_coeff(cap, gains.power(order.weak), budget).is_err() {
                return Err(Error::Infeasible(Infeasibility::ResidualSic));
            }
            alpha = cap;
        }
    }
    let before = NomaAllocation::from_strong(alpha, order, previous_strong);
    if !alpha_feasible(alpha, &before, order, &gains, budget) {
        log::debug!(
            "power split {alpha:.6} outside the weak-user window before the coefficient update"
        );
    }
    let a_strong = optimal_power_coeff(alpha, gains.power(order.weak), budget)?;
    let alloc = NomaAllocation::from_strong(alpha, order, a_strong);
    match alpha_lower_bound(&alloc, order, &gains, budget) {
        Some(bound) if bound <= alpha * (1.0 + WINDOW_SLACK) => {}
        _ => return Err(Error::Infeasible(Infeasibility::PowerSplitWindow)),
    }
    let sinr = match sic {
        Some(s) => sinr_imperfect_sic(&alloc, order, &gains, budget, s),
        None => primary_sinr(&alloc, order, order.strong, &gains, budget),
    };
    let sic_ok = match sic {
        Some(s) if s.gamma_sic.is_some() => residual_sic_ok(&alloc, order, &gains, budget, s)?,
        _ => true,
    };
    Ok(Iterate {
        phases,
        order,
        alloc,
        rate: rate(sinr)?,
        sic_ok,
    })
}

/// One phase update at fixed `(α, a, order)`.
fn phase_step(
    channels: &ChannelRealization,
    alloc: &NomaAllocation,
    order: DecodingOrder,
    budget: &LinkBudget,
    config: &AoConfig,
) -> Result<(CVector, f64)> {
    let mut problem = build_subproblem(channels, alloc, order, budget)?;
    if let Some(sic) = config.sic.as_ref().filter(|s| s.gamma_sic.is_some()) {
        problem.add_residual_sic_cap(alloc, order, budget, sic)?;
    }
    let m = channels.num_elements();
    let outcome = sca_penalty_loop(&problem, &LiftedMatrix::identity(m), &config.penalty)?;
    if !outcome.rank_one {
        log::debug!(
            "rank residual {:.3e} above tolerance",
            outcome.rank_residual
        );
    }
    Ok((extract_phases(&outcome.matrix), outcome.rank_residual))
}

/// Cap-feasible first, then higher rate.
fn better(a: &Iterate, b: &Iterate) -> bool {
    (a.sic_ok, a.rate) > (b.sic_ok, b.rate)
}

pub(crate) fn run(
    channels: &ChannelRealization,
    budget: &LinkBudget,
    config: &AoConfig,
    init_phases: CVector,
    init_strong: f64,
    optimize_phases: bool,
) -> Result<Solution> {
    budget.validate()?;
    config.validate()?;
    let sic = config.sic.as_ref();
    let mut state = match closed_form(channels, init_phases.clone(), init_strong, budget, sic) {
        Ok(s) => s,
        Err(Error::Infeasible(kind)) => {
            return Ok(Solution::infeasible(kind, init_phases, AccessMode::Noma))
        }
        Err(e) => return Err(e),
    };
    let mut trace = vec![state.rate];
    let mut flips = 0;
    let mut rejected = 0;
    let mut rank_residuals = Vec::new();
    let mut converged = true;
    let skip_phases = !optimize_phases || channels.num_elements() == 1;

    if !skip_phases {
        converged = false;
        while trace.len() < config.max_outer_iters {
            // The first update also tries the opposite decoding order; later
            // updates keep the order of the current iterate.
            let orders = if trace.len() == 1 {
                vec![state.order, DecodingOrder::with_strong(state.order.weak)]
            } else {
                vec![state.order]
            };
            let a_strong = state.alloc.strong_coeff(state.order);
            let mut best: Option<Iterate> = None;
            for order in orders {
                let alloc = NomaAllocation::from_strong(state.alloc.alpha, order, a_strong);
                let phases = match phase_step(channels, &alloc, order, budget, config) {
                    Ok((phases, residual)) => {
                        rank_residuals.push(residual);
                        phases
                    }
                    Err(Error::Infeasible(kind)) => {
                        log::debug!("phase update infeasible ({kind})");
                        continue;
                    }
                    Err(e) if order != state.order => {
                        log::debug!("opposite-order phase update skipped: {e}");
                        continue;
                    }
                    Err(e) => {
                        log::warn!("phase update failed after rate trace {trace:?}");
                        return Err(e);
                    }
                };
                match closed_form(channels, phases, a_strong, budget, sic) {
                    Ok(c) => {
                        if best.as_ref().is_none_or(|b| better(&c, b)) {
                            best = Some(c);
                        }
                    }
                    Err(Error::Infeasible(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            let Some(candidate) = best else {
                rejected += 1;
                converged = true;
                break;
            };
            let improves = candidate.sic_ok && (candidate.rate >= state.rate || !state.sic_ok);
            if !improves {
                rejected += 1;
                converged = true;
                break;
            }
            if candidate.order != state.order {
                flips += 1;
            }
            let delta = (candidate.rate - state.rate).abs();
            let was_sic_ok = state.sic_ok;
            state = candidate;
            trace.push(state.rate);
            if delta < config.epsilon && was_sic_ok {
                converged = true;
                break;
            }
        }
    }

    if !state.sic_ok {
        let mut out =
            Solution::infeasible(Infeasibility::ResidualSic, state.phases, AccessMode::Noma);
        out.iterations = trace.len();
        out.trace = trace;
        return Ok(out);
    }
    let mut solution = Solution {
        alpha: state.alloc.alpha,
        a: state.alloc.a,
        phases: state.phases,
        slot_phases: None,
        access: AccessMode::Noma,
        order: state.order,
        rates: [0.0; NUM_USERS],
        rate_strong: 0.0,
        rate_weak: 0.0,
        secondary_snr: [0.0; NUM_USERS],
        status: Status::Feasible,
        iterations: trace.len(),
        trace,
        converged,
        order_flips: flips,
        rejected_steps: rejected,
        rank_residuals,
    };
    let report = evaluate(&solution, channels, budget, sic, None);
    solution.rates = report.rates;
    solution.rate_strong = report.rate_strong;
    solution.rate_weak = report.rate_weak;
    solution.secondary_snr = report.secondary_snr;
    Ok(solution)
}

/// Re-evaluates `solution` on `csi_truth` (or on `channels` when absent),
/// keeping its decoding order, power split and phases.
pub fn evaluate(
    solution: &Solution,
    channels: &ChannelRealization,
    budget: &LinkBudget,
    sic: Option<&SicModel>,
    csi_truth: Option<&ChannelRealization>,
) -> RatesReport {
    let ch = csi_truth.unwrap_or(channels);
    let alloc = NomaAllocation {
        alpha: solution.alpha,
        a: solution.a,
    };
    let order = solution.order;
    let l = f64::from(budget.spreading_gain);
    let (gains, sinr, rates, residual) = match solution.access {
        AccessMode::Noma => {
            let g = EffectiveGains::compute(ch, &solution.phases);
            let mut sinr = [0.0; NUM_USERS];
            sinr[order.weak] = primary_sinr(&alloc, order, order.weak, &g, budget);
            sinr[order.strong] = match sic {
                Some(s) => sinr_imperfect_sic(&alloc, order, &g, budget, s),
                None => primary_sinr(&alloc, order, order.strong, &g, budget),
            };
            let residual = sic.map_or(0.0, |s| residual_sic_power(&alloc, order, &g, budget, s));
            (g.powers(), sinr, sinr.map(log2_1p), residual)
        }
        AccessMode::Oma => {
            let mut gains = [0.0; NUM_USERS];
            for (k, gain) in gains.iter_mut().enumerate() {
                let v = solution
                    .slot_phases
                    .as_ref()
                    .map_or(&solution.phases, |s| &s[k]);
                *gain = EffectiveGains::compute(ch, v).power(k);
            }
            let sinr = gains.map(|g| solution.alpha * budget.tx_power * g / budget.noise_power);
            (gains, sinr, sinr.map(|s| 0.5 * log2_1p(s)), 0.0)
        }
    };
    let secondary = match solution.access {
        AccessMode::Noma => gains.map(|g| secondary_snr(&alloc, g, budget)),
        AccessMode::Oma => {
            gains.map(|g| l * (1.0 - solution.alpha) * budget.tx_power * g / budget.noise_power)
        }
    };
    RatesReport {
        gains,
        sinr,
        rates,
        rate_strong: rates[order.strong],
        rate_weak: rates[order.weak],
        sum_rate: rates.iter().sum(),
        secondary_snr: secondary,
        residual_sic_power: residual,
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}
