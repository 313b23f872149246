use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which constraint could not be met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// The IRS data cannot reach the QoS threshold even with all power unmodulated.
    SecondaryQos,
    /// The weak user cannot reach the QoS threshold at any NOMA split.
    WeakUserQos,
    /// The power-split lower bound exceeds the optimal split.
    PowerSplitWindow,
    /// The lifted phase-shift program has an empty feasible set.
    PhaseSubproblem,
    /// The residual-SIC cap is violated at the final iterate.
    ResidualSic,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Infeasibility::SecondaryQos => "secondary (IRS data) QoS",
            Infeasibility::WeakUserQos => "weak-user QoS",
            Infeasibility::PowerSplitWindow => "power-split feasibility window",
            Infeasibility::PhaseSubproblem => "phase-shift subproblem",
            Infeasibility::ResidualSic => "residual SIC cap",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),
    #[error(
        "solver failure after {iterations} iterations \
         (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}, gap {gap:.3e})"
    )]
    SolverFailure {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        gap: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}
