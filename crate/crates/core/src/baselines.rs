//! Reference designs: NOMA with frozen random phases, and two-slot OMA with
//! aligned or random phases.

use crate::ao::{self, AccessMode, AoConfig, Solution, Status};
use crate::channel::{ChannelRealization, NUM_USERS};
use crate::rates::{decoding_order, optimal_alpha, DecodingOrder, EffectiveGains, LinkBudget};
use crate::{CVector, Error, Infeasibility, Result, C64};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// NOMA with phases frozen at a random draw.
    RandomPhase,
    /// Equal-time OMA with phases aligned to the served user in each slot.
    OmaAligned,
    /// Equal-time OMA with one random phase draw.
    OmaRandomPhase,
    FullAlgorithm,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::FullAlgorithm,
        BaselineKind::RandomPhase,
        BaselineKind::OmaAligned,
        BaselineKind::OmaRandomPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::RandomPhase => "random_phase",
            BaselineKind::OmaAligned => "oma_aligned",
            BaselineKind::OmaRandomPhase => "oma_random_phase",
            BaselineKind::FullAlgorithm => "full_algorithm",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// OMA options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OmaConfig {
    /// Also require the IRS-data QoS in both slots when picking `α`.
    pub enforce_secondary_qos: bool,
}

impl Default for OmaConfig {
    fn default() -> Self {
        Self {
            enforce_secondary_qos: true,
        }
    }
}

/// `θ_m` i.i.d. uniform on `[0, 2π)`.
pub fn random_phases<R: Rng + ?Sized>(num_elements: usize, rng: &mut R) -> CVector {
    CVector::from_fn(num_elements, |_, _| {
        let theta = rng.random::<f64>() * TAU;
        C64::new(theta.cos(), theta.sin())
    })
}

/// `θ_m = −arg(h_m f_m)`, making every cascaded term real and positive.
pub fn aligned_phases(h: &CVector, f: &CVector) -> Result<CVector> {
    if h.len() != f.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            h.len(),
            f.len()
        )));
    }
    Ok(h.zip_map(f, |a, b| {
        let p = a * b;
        if p.norm() > 0.0 {
            p.conj() / p.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }))
}

/// NOMA with `α` and `a` from closed form and the phases left at the
/// seeded initial draw of the full algorithm.
pub fn solve_benchmark1(
    channels: &ChannelRealization,
    budget: &LinkBudget,
    config: &AoConfig,
) -> Result<Solution> {
    let (phases, a_strong) = ao::initial_point(channels.num_elements(), config.seed);
    ao::run(channels, budget, config, phases, a_strong, false)
}

/// Two equal slots serving one user each at power `α P_T`.
pub fn solve_oma(
    channels: &ChannelRealization,
    budget: &LinkBudget,
    config: &AoConfig,
    oma: &OmaConfig,
    kind: BaselineKind,
) -> Result<Solution> {
    budget.validate()?;
    let slots: [CVector; NUM_USERS] = match kind {
        BaselineKind::OmaAligned => [
            aligned_phases(&channels.h, &channels.f[0])?,
            aligned_phases(&channels.h, &channels.f[1])?,
        ],
        BaselineKind::OmaRandomPhase => {
            let (v, _) = ao::initial_point(channels.num_elements(), config.seed);
            [v.clone(), v]
        }
        _ => return Err(Error::Domain(format!("{kind} is not an OMA scheme"))),
    };
    let served = [
        EffectiveGains::compute(channels, &slots[0]).power(0),
        EffectiveGains::compute(channels, &slots[1]).power(1),
    ];
    // The IRS data rides on both slots, so each user sees both phase settings.
    let mut alpha: f64 = 1.0;
    if oma.enforce_secondary_qos {
        for slot in &slots {
            let g = EffectiveGains::compute(channels, slot);
            match optimal_alpha(&g, budget) {
                Ok(a) => alpha = alpha.min(a),
                Err(Error::Infeasible(kind)) => {
                    return Ok(Solution::infeasible(
                        kind,
                        slots[0].clone(),
                        AccessMode::Oma,
                    ))
                }
                Err(e) => return Err(e),
            }
        }
    }
    if !(alpha > 0.0) {
        return Ok(Solution::infeasible(
            Infeasibility::SecondaryQos,
            slots[0].clone(),
            AccessMode::Oma,
        ));
    }
    let order: DecodingOrder = decoding_order(&EffectiveGains::from_powers(served));
    let mut solution = Solution {
        alpha,
        a: [0.0; NUM_USERS],
        phases: slots[0].clone(),
        slot_phases: Some(slots),
        access: AccessMode::Oma,
        order,
        rates: [0.0; NUM_USERS],
        rate_strong: 0.0,
        rate_weak: 0.0,
        secondary_snr: [0.0; NUM_USERS],
        status: Status::Feasible,
        trace: Vec::new(),
        iterations: 1,
        converged: true,
        order_flips: 0,
        rejected_steps: 0,
        rank_residuals: Vec::new(),
    };
    let report = ao::evaluate(&solution, channels, budget, None, None);
    solution.rates = report.rates;
    solution.rate_strong = report.rate_strong;
    solution.rate_weak = report.rate_weak;
    solution.secondary_snr = report.secondary_snr;
    solution.trace = vec![report.rate_strong];
    Ok(solution)
}

/// Dispatches on `kind`.
pub fn solve_scheme(
    kind: BaselineKind,
    channels: &ChannelRealization,
    budget: &LinkBudget,
    config: &AoConfig,
    oma: &OmaConfig,
) -> Result<Solution> {
    match kind {
        BaselineKind::FullAlgorithm => ao::solve(channels, budget, config),
        BaselineKind::RandomPhase => solve_benchmark1(channels, budget, config),
        BaselineKind::OmaAligned | BaselineKind::OmaRandomPhase => {
            solve_oma(channels, budget, config, oma, kind)
        }
    }
}
