//! SNR/SINR and rate formulas, and the closed-form power split and NOMA
//! coefficients.
//!
//! Users are indexed `0` and `1` internally; they print as users 1 and 2.

use crate::channel::{ChannelRealization, NUM_USERS};
use crate::{CVector, Error, Infeasibility, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// AP transmit power `P_T` in watts.
    pub tx_power: f64,
    /// Receiver noise power `σ²` in watts.
    pub noise_power: f64,
    /// Linear QoS threshold `γ_th` shared by the weak user and the IRS data.
    pub qos_threshold: f64,
    /// IRS bit period over AP symbol period.
    pub spreading_gain: u32,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.tx_power > 0.0) || !(self.noise_power > 0.0) {
            return Err(Error::Domain(
                "transmit and noise power must be positive".into(),
            ));
        }
        if !(self.qos_threshold >= 0.0) || !self.qos_threshold.is_finite() {
            return Err(Error::Domain("QoS threshold must be non-negative".into()));
        }
        if self.spreading_gain == 0 {
            return Err(Error::Domain("spreading gain must be at least 1".into()));
        }
        Ok(())
    }

    /// `P_T / σ²`.
    pub fn snr(&self) -> f64 {
        self.tx_power / self.noise_power
    }

    fn spreading(&self) -> f64 {
        f64::from(self.spreading_gain)
    }
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power: crate::units::dbm_to_watts(10.0),
            noise_power: crate::units::dbm_to_watts(-110.0),
            qos_threshold: crate::units::db_to_linear(10.0),
            spreading_gain: 10,
        }
    }
}

/// Cascaded channel products `g_k = h Θ f_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveGains {
    pub g: [C64; NUM_USERS],
}

impl EffectiveGains {
    /// `g_k = Σ_m h_m v_m f_k,m` for unit-modulus reflection coefficients `v`.
    pub fn compute(channels: &ChannelRealization, phases: &CVector) -> Self {
        let g = |k: usize| {
            channels
                .h
                .iter()
                .zip(phases.iter())
                .zip(channels.f[k].iter())
                .map(|((h, v), f)| h * v * f)
                .sum::<C64>()
        };
        Self { g: [g(0), g(1)] }
    }

    /// Real-valued gains with the given squared magnitudes.
    pub fn from_powers(powers: [f64; NUM_USERS]) -> Self {
        Self {
            g: powers.map(|p| C64::new(p.sqrt(), 0.0)),
        }
    }

    /// `G_k = |g_k|²`.
    pub fn power(&self, user: usize) -> f64 {
        self.g[user].norm_sqr()
    }

    pub fn powers(&self) -> [f64; NUM_USERS] {
        [self.power(0), self.power(1)]
    }
}

/// The strong user is decoded interference-free after SIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecodingOrder {
    pub strong: usize,
    pub weak: usize,
}

impl DecodingOrder {
    pub const STRONG_FIRST: DecodingOrder = DecodingOrder { strong: 0, weak: 1 };
    pub const STRONG_SECOND: DecodingOrder = DecodingOrder { strong: 1, weak: 0 };

    pub fn with_strong(strong: usize) -> Self {
        assert!(strong < NUM_USERS);
        Self {
            strong,
            weak: 1 - strong,
        }
    }
}

/// Power split `α` and NOMA coefficients `a_k`, indexed by user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NomaAllocation {
    pub alpha: f64,
    pub a: [f64; NUM_USERS],
}

impl NomaAllocation {
    /// Allocation giving `a_strong` to the strong user and the rest to the weak one.
    pub fn from_strong(alpha: f64, order: DecodingOrder, a_strong: f64) -> Self {
        let mut a = [0.0; NUM_USERS];
        a[order.strong] = a_strong;
        a[order.weak] = 1.0 - a_strong;
        Self { alpha, a }
    }

    pub fn strong_coeff(&self, order: DecodingOrder) -> f64 {
        self.a[order.strong]
    }

    pub fn weak_coeff(&self, order: DecodingOrder) -> f64 {
        self.a[order.weak]
    }
}

/// Imperfect successive interference cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicModel {
    /// Fraction of the weak user's power left after cancellation.
    pub beta: f64,
    /// Cap on the residual interference power, if enforced.
    pub gamma_sic: Option<f64>,
}

impl SicModel {
    pub const PERFECT: SicModel = SicModel {
        beta: 0.0,
        gamma_sic: None,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Domain(
                "SIC imperfection factor must lie in [0, 1]".into(),
            ));
        }
        if let Some(cap) = self.gamma_sic {
            if !(cap > 0.0) {
                return Err(Error::Domain("residual SIC cap must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Ties go to user 1.
pub fn decoding_order(gains: &EffectiveGains) -> DecodingOrder {
    if gains.power(0) >= gains.power(1) {
        DecodingOrder::STRONG_FIRST
    } else {
        DecodingOrder::STRONG_SECOND
    }
}

/// SNR of the IRS data at a user with cascaded power `gain`.
pub fn secondary_snr(alloc: &NomaAllocation, gain: f64, budget: &LinkBudget) -> f64 {
    budget.spreading() * (1.0 - alloc.alpha) * budget.tx_power * gain / budget.noise_power
}

/// SINR of `user`'s own data under perfect SIC.
pub fn primary_sinr(
    alloc: &NomaAllocation,
    order: DecodingOrder,
    user: usize,
    gains: &EffectiveGains,
    budget: &LinkBudget,
) -> f64 {
    let signal = alloc.alpha * budget.tx_power * alloc.a[user] * gains.power(user);
    if user == order.strong {
        signal / budget.noise_power
    } else {
        let interference =
            alloc.alpha * budget.tx_power * alloc.a[order.strong] * gains.power(user);
        signal / (interference + budget.noise_power)
    }
}

/// `log₂(1 + sinr)` in bits/s/Hz.
pub fn rate(sinr: f64) -> Result<f64> {
    if sinr < 0.0 || sinr.is_nan() {
        return Err(Error::Domain(format!(
            "SINR must be non-negative, got {sinr}"
        )));
    }
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Largest power split meeting the IRS-data QoS at both users.
pub fn optimal_alpha(gains: &EffectiveGains, budget: &LinkBudget) -> Result<f64> {
    if budget.qos_threshold == 0.0 {
        return Ok(1.0);
    }
    let alpha = (0..NUM_USERS)
        .map(|k| {
            let g = gains.power(k);
            if g > 0.0 {
                1.0 - budget.noise_power * budget.qos_threshold
                    / (budget.spreading() * budget.tx_power * g)
            } else {
                f64::NEG_INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min);
    if alpha > 0.0 {
        Ok(alpha)
    } else {
        Err(Error::Infeasible(Infeasibility::SecondaryQos))
    }
}

/// Smallest power split at which the weak user meets its QoS under `alloc`,
/// or `None` when no split works.
pub fn alpha_lower_bound(
    alloc: &NomaAllocation,
    order: DecodingOrder,
    gains: &EffectiveGains,
    budget: &LinkBudget,
) -> Option<f64> {
    let gamma = budget.qos_threshold;
    if gamma == 0.0 {
        return Some(0.0);
    }
    let margin = alloc.weak_coeff(order) - alloc.strong_coeff(order) * gamma;
    let g_weak = gains.power(order.weak);
    if margin <= 0.0 || g_weak <= 0.0 {
        return None;
    }
    Some(budget.noise_power * gamma / (budget.tx_power * g_weak * margin))
}

/// Whether `alpha` lies inside the weak user's feasibility window.
pub fn alpha_feasible(
    alpha: f64,
    alloc: &NomaAllocation,
    order: DecodingOrder,
    gains: &EffectiveGains,
    budget: &LinkBudget,
) -> bool {
    if budget.qos_threshold == 0.0 {
        return alpha > 0.0;
    }
    match alpha_lower_bound(alloc, order, gains, budget) {
        Some(bound) => bound <= alpha,
        None => false,
    }
}

/// Strong-user coefficient that leaves the weak user exactly at the QoS
/// threshold. `gain_weak` is the squared cascaded magnitude.
pub fn optimal_power_coeff(alpha: f64, gain_weak: f64, budget: &LinkBudget) -> Result<f64> {
    let gamma = budget.qos_threshold;
    if !(alpha > 0.0) || !(gain_weak > 0.0) {
        return Err(Error::Infeasible(Infeasibility::WeakUserQos));
    }
    let a_strong =
        (1.0 - gamma * budget.noise_power / (alpha * budget.tx_power * gain_weak)) / (1.0 + gamma);
    if a_strong > 0.0 {
        Ok(a_strong)
    } else {
        Err(Error::Infeasible(Infeasibility::WeakUserQos))
    }
}

/// Residual weak-user interference `β a_w α P_T G_s` seen by the strong user.
pub fn residual_sic_power(
    alloc: &NomaAllocation,
    order: DecodingOrder,
    gains: &EffectiveGains,
    budget: &LinkBudget,
    sic: &SicModel,
) -> f64 {
    sic.beta * alloc.weak_coeff(order) * alloc.alpha * budget.tx_power * gains.power(order.strong)
}

/// Strong-user SINR when a fraction `β` of the weak user's signal survives SIC.
pub fn sinr_imperfect_sic(
    alloc: &NomaAllocation,
    order: DecodingOrder,
    gains: &EffectiveGains,
    budget: &LinkBudget,
    sic: &SicModel,
) -> f64 {
    let signal =
        alloc.alpha * budget.tx_power * alloc.strong_coeff(order) * gains.power(order.strong);
    signal / (residual_sic_power(alloc, order, gains, budget, sic) + budget.noise_power)
}

/// `β a_w α P_T G_s ≤ γ_SIC` (inclusive).
pub fn residual_sic_ok(
    alloc: &NomaAllocation,
    order: DecodingOrder,
    gains: &EffectiveGains,
    budget: &LinkBudget,
    sic: &SicModel,
) -> Result<bool> {
    let cap = sic
        .gamma_sic
        .ok_or_else(|| Error::Domain("residual SIC check needs a cap".into()))?;
    Ok(residual_sic_power(alloc, order, gains, budget, sic) <= cap)
}

/// Largest `α` whose residual meets the cap once `a` follows the weak-user
/// closed form: `β a_w α P_T G_s` is increasing in `α` along that curve, so the
/// cap is one more upper bound on the power split. `None` when nothing binds.
pub fn residual_sic_alpha_cap(
    gains: &EffectiveGains,
    order: DecodingOrder,
    budget: &LinkBudget,
    sic: &SicModel,
) -> Option<f64> {
    let cap = sic.gamma_sic?;
    let gamma = budget.qos_threshold;
    if sic.beta <= 0.0 || gamma <= 0.0 {
        return None;
    }
    let p = budget.tx_power;
    // a_w α = γ(α + σ²/(P G_w)) / (1 + γ).
    Some(
        (1.0 + gamma) * cap / (gamma * sic.beta * p * gains.power(order.strong))
            - budget.noise_power / (p * gains.power(order.weak)),
    )
}
