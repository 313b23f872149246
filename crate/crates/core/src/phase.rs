//! Phase-shift optimization through the lifted (semidefinite) program and
//! a rank-one penalty.
//!
//! With reflection vector `v` (row, `|v_m| = 1`) and `H = diag(h)`, the
//! cascaded power of user `k` is `|v H f_k|² = Tr(R_k V)` where
//! `R_k = H f_k f_k^H H^H` and `V = v^H v`. Dropping `rank(V) = 1` gives a
//! convex program over `V ⪰ 0, diag(V) = 1`. Rank one is recovered by
//! subtracting `(‖V‖_* − ‖V‖₂) / 2μ` from the objective and linearizing the
//! concave part `‖V‖₂` around the current iterate.

use crate::channel::ChannelRealization;
use crate::linalg::{
    hermitian_defect, hermitian_eigen, hermitian_eigenvalues, outer, principal_eigenpair,
    trace_product,
};
use crate::rates::{DecodingOrder, LinkBudget, NomaAllocation, SicModel};
use crate::sdp::{HermitianSdp, LinearInequality, SdpSettings};
use crate::{CMatrix, CVector, Error, Infeasibility, Result, C64};
use serde::{Deserialize, Serialize};

/// Lifted phase matrix `V = v^H v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix(CMatrix);

impl LiftedMatrix {
    pub fn new(v: CMatrix) -> Self {
        Self(v)
    }

    pub fn identity(m: usize) -> Self {
        Self(CMatrix::identity(m, m))
    }

    /// Lift of the reflection vector `v`: `V_ij = conj(v_i) v_j`.
    pub fn from_phases(v: &CVector) -> Self {
        Self(outer(&v.map(|z| z.conj())))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Hermitian, PSD and unit-diagonal to the stated tolerances.
    pub fn validate(&self) -> Result<()> {
        let v = &self.0;
        if hermitian_defect(v) > 1e-10 * v.norm().max(1.0) {
            return Err(Error::Domain("lifted matrix is not Hermitian".into()));
        }
        let eig = hermitian_eigenvalues(v);
        let spectral = eig.iter().map(|l| l.abs()).fold(0.0, f64::max);
        if eig[0] < -1e-8 * spectral {
            return Err(Error::Domain(format!(
                "lifted matrix is not PSD (min eigenvalue {:.3e})",
                eig[0]
            )));
        }
        if (0..v.nrows()).any(|m| (v[(m, m)] - C64::new(1.0, 0.0)).norm() > 1e-8) {
            return Err(Error::Domain("lifted matrix diagonal is not 1".into()));
        }
        Ok(())
    }
}

/// What a subproblem constraint encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    WeakUserQos,
    SecondaryQos { user: usize },
    DecodingOrder,
    ResidualSic,
}

/// `Re Tr(matrix · V) ≥ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemConstraint {
    pub kind: ConstraintKind,
    pub matrix: CMatrix,
    pub bound: f64,
}

impl SubproblemConstraint {
    pub fn value(&self, v: &CMatrix) -> f64 {
        trace_product(&self.matrix, v).re
    }

    /// Scale-aware violation: positive when `v` misses the bound.
    pub fn relative_violation(&self, v: &CMatrix) -> f64 {
        let lhs = self.value(v);
        (self.bound - lhs) / (self.bound.abs().max(lhs.abs()).max(f64::MIN_POSITIVE))
    }
}

/// Lifted phase-shift program: maximize `c · Tr(A V)` over the constraint set.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSubproblem {
    /// `A = R_strong`.
    pub objective_matrix: CMatrix,
    /// `c = α a_s P_T / σ²`, so that `c Tr(A V)` is the strong-user SNR.
    pub objective_scale: f64,
    pub constraints: Vec<SubproblemConstraint>,
    pub unit_diagonal: bool,
    pub psd: bool,
}

impl SdpSubproblem {
    pub fn dim(&self) -> usize {
        self.objective_matrix.nrows()
    }

    /// Strong-user SNR `c Tr(A V)`.
    pub fn objective(&self, v: &CMatrix) -> f64 {
        self.objective_scale * trace_product(&self.objective_matrix, v).re
    }

    /// Largest relative violation over all constraints (≤ 0 when feasible).
    pub fn max_violation(&self, v: &CMatrix) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.relative_violation(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `c Tr(A V) − (Tr V − ‖V‖₂) / 2μ`.
    pub fn penalized_objective(&self, v: &LiftedMatrix, mu: f64) -> f64 {
        self.objective(v.matrix()) - rank_penalty(v) / (2.0 * mu)
    }

    /// Adds `β a_w α P_T Tr(R_s V) ≤ γ_SIC`.
    pub fn add_residual_sic_cap(
        &mut self,
        alloc: &NomaAllocation,
        order: DecodingOrder,
        budget: &LinkBudget,
        sic: &SicModel,
    ) -> Result<()> {
        let cap = sic
            .gamma_sic
            .ok_or_else(|| Error::Domain("residual SIC constraint needs a cap".into()))?;
        let coeff = sic.beta * alloc.weak_coeff(order) * alloc.alpha * budget.tx_power;
        if coeff > 0.0 {
            self.constraints.push(SubproblemConstraint {
                kind: ConstraintKind::ResidualSic,
                matrix: &self.objective_matrix * C64::from(-coeff),
                bound: -cap,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// Penalty factor; the rank term is weighted by `1 / 2μ`.
    pub mu: f64,
    /// Relative change of the penalized objective that ends the loop.
    pub sca_tol: f64,
    pub max_sca_iters: usize,
    /// Accepted `(‖V‖_* − ‖V‖₂) / ‖V‖_*` at exit.
    pub rank_tol: f64,
    /// Optional decreasing-μ continuation; off by default.
    #[serde(default)]
    pub mu_schedule: Option<MuSchedule>,
}

/// `μ ← max(μ · factor, min_mu)` after every SCA step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSchedule {
    pub factor: f64,
    pub min_mu: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            mu: 5e-5,
            sca_tol: 1e-5,
            max_sca_iters: 50,
            rank_tol: 1e-4,
            mu_schedule: None,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Domain("penalty factor μ must be positive".into()));
        }
        if !(self.sca_tol > 0.0) || !(self.rank_tol > 0.0) || self.max_sca_iters == 0 {
            return Err(Error::Domain(
                "SCA tolerances and iteration cap must be positive".into(),
            ));
        }
        if let Some(s) = self.mu_schedule {
            if !(s.factor > 0.0 && s.factor <= 1.0) || !(s.min_mu > 0.0) {
                return Err(Error::Domain(
                    "μ schedule needs factor in (0, 1] and positive floor".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Emits the lifted program for fixed `(α, a)` and decoding order.
pub fn build_subproblem(
    channels: &ChannelRealization,
    alloc: &NomaAllocation,
    order: DecodingOrder,
    budget: &LinkBudget,
) -> Result<SdpSubproblem> {
    let alpha = alloc.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "power split must lie in (0, 1), got {alpha}"
        )));
    }
    let gamma = budget.qos_threshold;
    let noise = budget.noise_power;
    let p = budget.tx_power;
    let r = [outer(&channels.cascaded(0)), outer(&channels.cascaded(1))];
    let (rs, rw) = (&r[order.strong], &r[order.weak]);

    let weak_coeff =
        alpha * alloc.weak_coeff(order) * p - gamma * alpha * alloc.strong_coeff(order) * p;
    if weak_coeff <= 0.0 {
        return Err(Error::Infeasible(Infeasibility::WeakUserQos));
    }
    let mut constraints = vec![SubproblemConstraint {
        kind: ConstraintKind::WeakUserQos,
        matrix: rw * C64::from(weak_coeff),
        bound: gamma * noise,
    }];
    let secondary = f64::from(budget.spreading_gain) * (1.0 - alpha) * p;
    for (k, rk) in r.iter().enumerate() {
        constraints.push(SubproblemConstraint {
            kind: ConstraintKind::SecondaryQos { user: k },
            matrix: rk * C64::from(secondary),
            bound: gamma * noise,
        });
    }
    constraints.push(SubproblemConstraint {
        kind: ConstraintKind::DecodingOrder,
        matrix: rs - rw,
        bound: 0.0,
    });

    Ok(SdpSubproblem {
        objective_matrix: rs.clone(),
        objective_scale: alpha * alloc.strong_coeff(order) * p / noise,
        constraints,
        unit_diagonal: true,
        psd: true,
    })
}

/// `‖V‖_* − ‖V‖₂`; zero exactly for rank-one `V`.
pub fn rank_penalty(v: &LiftedMatrix) -> f64 {
    let eig = hermitian_eigenvalues(v.matrix());
    let nuclear: f64 = eig.iter().map(|l| l.abs()).sum();
    let spectral = eig.iter().map(|l| l.abs()).fold(0.0, f64::max);
    (nuclear - spectral).max(0.0)
}

/// `(‖V‖_* − ‖V‖₂) / ‖V‖_*`.
pub fn relative_rank_residual(v: &LiftedMatrix) -> f64 {
    let eig = hermitian_eigenvalues(v.matrix());
    let nuclear: f64 = eig.iter().map(|l| l.abs()).sum();
    if nuclear == 0.0 {
        return 0.0;
    }
    rank_penalty(v) / nuclear
}

/// Gradient of `‖V‖₂` at `V`: `u u^H` for a unit principal eigenvector `u`.
pub fn spectral_subgradient(v: &LiftedMatrix) -> Result<CMatrix> {
    if v.matrix().iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::Domain(
            "spectral subgradient of the zero matrix".into(),
        ));
    }
    let (_, u) = principal_eigenpair(v.matrix());
    Ok(outer(&u))
}

/// Solves `max c Tr(A V) − (Tr V − Tr(U V)) / 2μ` over the constraint set,
/// with `U` the linearization direction. `None` (or infinite `μ`) drops the
/// penalty.
pub fn solve_sdp_subproblem(
    problem: &SdpSubproblem,
    penalty_direction: Option<&CMatrix>,
    mu: f64,
) -> Result<LiftedMatrix> {
    let m = problem.dim();
    if !problem.unit_diagonal || !problem.psd {
        return Err(Error::Domain(
            "only unit-diagonal PSD programs are supported".into(),
        ));
    }
    if m == 1 {
        let one = CMatrix::identity(1, 1);
        return if problem.max_violation(&one) <= 1e-9 {
            Ok(LiftedMatrix(one))
        } else {
            Err(Error::Infeasible(Infeasibility::PhaseSubproblem))
        };
    }
    // Tr V = M on the feasible set, so only the `Tr(U V)` part of the
    // penalty changes the maximizer.
    let mut objective = &problem.objective_matrix * C64::from(problem.objective_scale);
    if let Some(u) = penalty_direction {
        if mu.is_finite() {
            objective += u * C64::from(1.0 / (2.0 * mu));
        }
    }
    let sdp = HermitianSdp {
        objective,
        inequalities: problem
            .constraints
            .iter()
            .map(|c| LinearInequality {
                matrix: c.matrix.clone(),
                bound: c.bound,
            })
            .collect(),
    };
    let sol = sdp.solve(&SdpSettings::default())?;
    Ok(LiftedMatrix(sol.x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub matrix: LiftedMatrix,
    /// Number of penalized solves performed.
    pub iterations: usize,
    /// Penalized objective at the start point and after every solve.
    pub objective_trace: Vec<f64>,
    pub rank_residual: f64,
    /// False when the final rank residual exceeds `rank_tol`.
    pub rank_one: bool,
}

/// Minorize-maximize loop on the rank-penalized program.
pub fn sca_penalty_loop(
    problem: &SdpSubproblem,
    init: &LiftedMatrix,
    config: &PenaltyConfig,
) -> Result<ScaOutcome> {
    config.validate()?;
    let mut v = init.clone();
    if problem.max_violation(v.matrix()) > 1e-9 {
        v = solve_sdp_subproblem(problem, None, f64::INFINITY)?;
    }
    let mut mu = config.mu;
    let mut obj = problem.penalized_objective(&v, mu);
    let mut trace = vec![obj];
    let mut iterations = 0;
    if problem.dim() > 1 {
        while iterations < config.max_sca_iters {
            let u = spectral_subgradient(&v)?;
            let next = solve_sdp_subproblem(problem, Some(&u), mu)?;
            iterations += 1;
            let next_obj = problem.penalized_objective(&next, mu);
            trace.push(next_obj);
            v = next;
            let done = (next_obj - obj).abs() <= config.sca_tol * obj.abs().max(1.0);
            obj = next_obj;
            if let Some(schedule) = config.mu_schedule {
                let next_mu = (mu * schedule.factor).max(schedule.min_mu);
                if next_mu != mu {
                    mu = next_mu;
                    obj = problem.penalized_objective(&v, mu);
                    continue;
                }
            }
            if done {
                break;
            }
        }
    }
    let rank_residual = relative_rank_residual(&v);
    Ok(ScaOutcome {
        rank_one: rank_residual <= config.rank_tol,
        matrix: v,
        iterations,
        objective_trace: trace,
        rank_residual,
    })
}

/// Principal eigenvector scaled by `√λ_max`, projected entrywise onto the
/// unit circle. Returns the reflection vector `v` (so `V ≈ v^H v`); zero
/// entries map to phase 0.
pub fn extract_phases(v: &LiftedMatrix) -> CVector {
    let (lambda, u) = principal_eigenpair(v.matrix());
    let w = u * C64::from(lambda.max(0.0).sqrt());
    w.map(|z| {
        let r = z.norm();
        if r > 0.0 && r.is_finite() {
            z.conj() / r
        } else {
            C64::new(1.0, 0.0)
        }
    })
}

/// Full spectrum, for diagnostics.
pub fn spectrum(v: &LiftedMatrix) -> Vec<f64> {
    hermitian_eigen(v.matrix()).0
}
