//! Primal-dual interior-point solver for small complex Hermitian SDPs of
//! the form
//!
//! ```text
//! maximize    Re Tr(C X)
//! subject to  X_mm = 1            for every m
//!             Re Tr(G_j X) ≥ d_j  for every j
//!             X ⪰ 0
//! ```
//!
//! Inequalities are turned into equalities with non-negative slacks. The
//! search direction is HKM (`ΔX = sym(σμZ⁻¹ − X − X ΔZ Z⁻¹)`) with a
//! Mehrotra predictor-corrector step. The Schur complement has one row per
//! diagonal entry plus one per inequality, so for the sizes used here
//! (`M ≤ 64`, a handful of inequalities) every iteration is a few dense
//! `M³` kernels.

use crate::linalg::{hermitian_eigenvalues, hermitian_part, trace_product};
use crate::{CMatrix, Error, Result, C64};
use nalgebra::{Cholesky, DMatrix, DVector};

/// `Re Tr(G X) ≥ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub matrix: CMatrix,
    pub bound: f64,
}

/// A unit-diagonal Hermitian SDP with a linear objective to maximize.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSdp {
    pub objective: CMatrix,
    pub inequalities: Vec<LinearInequality>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpSettings {
    pub max_iters: usize,
    /// Relative primal/dual infeasibility for early exit.
    pub feas_tol: f64,
    /// Relative complementarity gap for early exit.
    pub gap_tol: f64,
    /// Looser residuals still accepted when the iteration cap is hit.
    pub accept_feas: f64,
    pub accept_gap: f64,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            max_iters: 100,
            feas_tol: 1e-10,
            gap_tol: 1e-10,
            accept_feas: 1e-7,
            accept_gap: 1e-6,
            step_fraction: 0.98,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: CMatrix,
    /// `Re Tr(C X)` in the caller's units.
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

struct Scaled {
    n: usize,
    /// Minimization cost: off-diagonal part of `-C`, unit Frobenius norm.
    cost: CMatrix,
    rows: Vec<CMatrix>,
    bounds: Vec<f64>,
}

#[derive(Clone)]
struct Residuals {
    rp: DVector<f64>,
    rd: CMatrix,
    rds: DVector<f64>,
    primal: f64,
    dual: f64,
    gap: f64,
    mu: f64,
    dobj: f64,
}

impl Residuals {
    /// `y / dobj` certifies primal infeasibility once the dual objective
    /// dominates `‖C‖ + ‖r_d‖`: then `-Aᵀy ⪰ -(‖C‖ + ‖r_d‖) I` and `bᵀy > 0`.
    fn farkas_ray(&self, c_norm: f64) -> bool {
        let rd_abs = (self.rd.norm_squared() + self.rds.norm_squared()).sqrt();
        self.dobj > 0.0 && c_norm + rd_abs <= FARKAS_TOL * self.dobj
    }
}

const FARKAS_TOL: f64 = 1e-8;

/// Cholesky of the Schur complement, with a growing diagonal shift when
/// rounding has made it numerically indefinite near the optimum.
fn factor_schur(schur: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(chol) = Cholesky::new(schur.clone()) {
        return Some(chol);
    }
    let scale = schur.diagonal().amax().max(f64::MIN_POSITIVE);
    [1e-14, 1e-12, 1e-10].into_iter().find_map(|shift| {
        let mut shifted = schur.clone();
        for k in 0..shifted.nrows() {
            shifted[(k, k)] += shift * scale;
        }
        Cholesky::new(shifted)
    })
}

/// Iterations without improvement on an acceptable iterate before stopping.
const STALL_ITERS: usize = 5;

struct Direction {
    dx: CMatrix,
    dz: CMatrix,
    ds: DVector<f64>,
    dzs: DVector<f64>,
    dy: DVector<f64>,
}

impl HermitianSdp {
    pub fn dim(&self) -> usize {
        self.objective.nrows()
    }

    fn scaled(&self) -> Result<Scaled> {
        let n = self.dim();
        if n == 0 || self.objective.ncols() != n {
            return Err(Error::Domain(
                "objective must be a non-empty square matrix".into(),
            ));
        }
        // The diagonal of X is fixed, so the diagonal of C only shifts the objective.
        let mut off_diagonal = hermitian_part(&self.objective);
        off_diagonal.fill_diagonal(C64::new(0.0, 0.0));
        let norm = off_diagonal.norm();
        let cost = off_diagonal * C64::from(-1.0 / if norm > 0.0 { norm } else { 1.0 });
        let mut rows = Vec::new();
        let mut bounds = Vec::new();
        for ineq in &self.inequalities {
            if ineq.matrix.nrows() != n || ineq.matrix.ncols() != n {
                return Err(Error::Domain("constraint matrix dimension mismatch".into()));
            }
            let g = hermitian_part(&ineq.matrix);
            let gn = g.norm();
            if gn == 0.0 || !gn.is_finite() {
                if ineq.bound > 0.0 {
                    return Err(Error::Infeasible(crate::Infeasibility::PhaseSubproblem));
                }
                continue;
            }
            rows.push(g * C64::from(1.0 / gn));
            bounds.push(ineq.bound / gn);
        }
        Ok(Scaled {
            n,
            cost,
            rows,
            bounds,
        })
    }

    /// Runs the interior-point method to the tolerances in `settings`.
    pub fn solve(&self, settings: &SdpSettings) -> Result<SdpSolution> {
        let data = self.scaled()?;
        let n = data.n;
        let p = data.rows.len();
        let m = n + p;
        let degree = (n + p) as f64;

        let mut x = CMatrix::identity(n, n);
        let mut z = CMatrix::identity(n, n) * C64::from((n as f64).sqrt().max(1.0));
        // Slacks start at the row margins of X = I so satisfied rows begin feasible.
        let mut s = DVector::from_fn(p, |j, _| {
            (data.rows[j].trace().re - data.bounds[j]).max(1.0)
        });
        let mut zs = DVector::from_element(p, 1.0);
        let mut y = DVector::<f64>::zeros(m);
        let b_norm = (n as f64 + data.bounds.iter().map(|d| d * d).sum::<f64>()).sqrt();
        let c_norm = data.cost.norm();

        let mut last = data.residuals(&x, &z, &s, &zs, &y, b_norm, c_norm);
        // Rounding can push the primal residual back up once mu is tiny; keep the best iterate.
        let score = |r: &Residuals| {
            (r.primal.max(r.dual) / settings.accept_feas).max(r.gap / settings.accept_gap)
        };
        let mut best = (x.clone(), last.clone(), 0);
        for iter in 0..settings.max_iters {
            if last.primal <= settings.feas_tol
                && last.dual <= settings.feas_tol
                && last.gap <= settings.gap_tol
            {
                return Ok(self.finish(x, iter, &last));
            }
            if last.farkas_ray(c_norm) {
                return Err(Error::Infeasible(crate::Infeasibility::PhaseSubproblem));
            }

            let Some(z_chol) = Cholesky::new(z.clone()) else {
                break;
            };
            let Some(x_chol) = Cholesky::new(x.clone()) else {
                break;
            };
            let w = z_chol.inverse();
            let schur = data.schur(&x, &w, &s, &zs);
            let Some(s_chol) = factor_schur(schur) else {
                break;
            };

            let pred = data.direction(&x, &w, &s, &zs, &last, &s_chol, 0.0, None);
            let ap = step_to_boundary(&x_chol, &pred.dx)
                .min(vec_step(&s, &pred.ds))
                .min(1.0);
            let ad = step_to_boundary(&z_chol, &pred.dz)
                .min(vec_step(&zs, &pred.dzs))
                .min(1.0);
            let x_aff = &x + &pred.dx * C64::from(ap);
            let z_aff = &z + &pred.dz * C64::from(ad);
            let mu_aff = (trace_product(&x_aff, &z_aff).re
                + (&s + &pred.ds * ap).dot(&(&zs + &pred.dzs * ad)))
                / degree;
            let sigma = (mu_aff.max(0.0) / last.mu).powi(3).clamp(0.0, 1.0);

            let corr_x = &pred.dx * &pred.dz * &w;
            let corr_s = pred.ds.component_mul(&pred.dzs).component_div(&zs);
            let dir = data.direction(
                &x,
                &w,
                &s,
                &zs,
                &last,
                &s_chol,
                sigma * last.mu,
                Some((&corr_x, &corr_s)),
            );

            let tau = settings.step_fraction;
            let ap = (tau * step_to_boundary(&x_chol, &dir.dx).min(vec_step(&s, &dir.ds))).min(1.0);
            let ad =
                (tau * step_to_boundary(&z_chol, &dir.dz).min(vec_step(&zs, &dir.dzs))).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            x += &dir.dx * C64::from(ap);
            x = hermitian_part(&x);
            s += &dir.ds * ap;
            z += &dir.dz * C64::from(ad);
            z = hermitian_part(&z);
            zs += &dir.dzs * ad;
            y += &dir.dy * ad;

            last = data.residuals(&x, &z, &s, &zs, &y, b_norm, c_norm);
            if score(&last) < score(&best.1) {
                best = (x.clone(), last.clone(), iter + 1);
            } else if score(&best.1) <= 1.0 && iter + 1 >= best.2 + STALL_ITERS {
                break;
            }
            log::trace!(
                "sdp iter {iter}: primal {:.3e} dual {:.3e} gap {:.3e} dobj {:.3e} mu {:.3e} steps {ap:.2e}/{ad:.2e}",
                last.primal,
                last.dual,
                last.gap,
                last.dobj,
                last.mu
            );
            if iter + 1 == settings.max_iters {
                break;
            }
        }

        if score(&best.1) <= 1.0 {
            return Ok(self.finish(best.0, best.2, &best.1));
        }
        if last.farkas_ray(c_norm) {
            return Err(Error::Infeasible(crate::Infeasibility::PhaseSubproblem));
        }
        Err(Error::SolverFailure {
            iterations: settings.max_iters,
            primal_residual: last.primal,
            dual_residual: last.dual,
            gap: last.gap,
        })
    }

    fn finish(&self, x: CMatrix, iterations: usize, res: &Residuals) -> SdpSolution {
        let objective = trace_product(&self.objective, &x).re;
        SdpSolution {
            x,
            objective,
            iterations,
            primal_residual: res.primal,
            dual_residual: res.dual,
            gap: res.gap,
        }
    }
}

impl Scaled {
    /// `A^T y = diag(y[..n]) + Σ_j y[n+j] G_j`.
    fn adjoint(&self, y: &DVector<f64>) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            out[(k, k)] = C64::from(y[k]);
        }
        for (j, g) in self.rows.iter().enumerate() {
            out += g * C64::from(y[n + j]);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn residuals(
        &self,
        x: &CMatrix,
        z: &CMatrix,
        s: &DVector<f64>,
        zs: &DVector<f64>,
        y: &DVector<f64>,
        b_norm: f64,
        c_norm: f64,
    ) -> Residuals {
        let n = self.n;
        let p = self.rows.len();
        let mut rp = DVector::zeros(n + p);
        for k in 0..n {
            rp[k] = 1.0 - x[(k, k)].re;
        }
        for (j, g) in self.rows.iter().enumerate() {
            rp[n + j] = self.bounds[j] - trace_product(g, x).re + s[j];
        }
        let rd = &self.cost - self.adjoint(y) - z;
        let rds = DVector::from_fn(p, |j, _| y[n + j] - zs[j]);
        let pobj = trace_product(&self.cost, x).re;
        let dobj = (0..n).map(|k| y[k]).sum::<f64>()
            + (0..p).map(|j| self.bounds[j] * y[n + j]).sum::<f64>();
        let complementarity = trace_product(x, z).re + s.dot(zs);
        let mu = complementarity / (n + p) as f64;
        Residuals {
            primal: rp.norm() / (1.0 + b_norm),
            dual: (rd.norm_squared() + rds.norm_squared()).sqrt() / (1.0 + c_norm),
            gap: complementarity.abs() / (1.0 + pobj.abs() + dobj.abs()),
            rp,
            rd,
            rds,
            mu,
            dobj,
        }
    }

    /// `S_kl = Re Tr(A_k X A_l Z⁻¹)` plus the slack block `s/z`.
    fn schur(&self, x: &CMatrix, w: &CMatrix, s: &DVector<f64>, zs: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let p = self.rows.len();
        let mut out = DMatrix::zeros(n + p, n + p);
        for k in 0..n {
            for l in 0..n {
                out[(k, l)] = (x[(k, l)] * w[(l, k)]).re;
            }
        }
        let products: Vec<CMatrix> = self.rows.iter().map(|g| x * g * w).collect();
        for (j, pj) in products.iter().enumerate() {
            for k in 0..n {
                let v = pj[(k, k)].re;
                out[(k, n + j)] = v;
                out[(n + j, k)] = v;
            }
            for (i, gi) in self.rows.iter().enumerate() {
                out[(n + i, n + j)] = trace_product(gi, pj).re;
            }
            out[(n + j, n + j)] += s[j] / zs[j];
        }
        (&out + out.transpose()) * 0.5
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        x: &CMatrix,
        w: &CMatrix,
        s: &DVector<f64>,
        zs: &DVector<f64>,
        res: &Residuals,
        schur: &Cholesky<f64, nalgebra::Dyn>,
        sigma_mu: f64,
        corr: Option<(&CMatrix, &DVector<f64>)>,
    ) -> Direction {
        let n = self.n;
        let p = self.rows.len();
        let mut rx = w * C64::from(sigma_mu) - x - x * &res.rd * w;
        let mut rs = DVector::from_fn(p, |j, _| {
            sigma_mu / zs[j] - s[j] - s[j] / zs[j] * res.rds[j]
        });
        if let Some((cx, cs)) = corr {
            rx -= cx;
            rs -= cs;
        }
        let rx = hermitian_part(&rx);

        let mut rhs = res.rp.clone();
        for k in 0..n {
            rhs[k] -= rx[(k, k)].re;
        }
        for (j, g) in self.rows.iter().enumerate() {
            rhs[n + j] += rs[j] - trace_product(g, &rx).re;
        }
        let dy = schur.solve(&rhs);

        let aty = self.adjoint(&dy);
        let dz = hermitian_part(&(&res.rd - &aty));
        let dx = &rx + hermitian_part(&(x * &aty * w));
        let dzs = DVector::from_fn(p, |j, _| res.rds[j] + dy[n + j]);
        let ds = DVector::from_fn(p, |j, _| rs[j] - s[j] / zs[j] * dy[n + j]);
        Direction {
            dx,
            dz,
            ds,
            dzs,
            dy,
        }
    }
}

/// Largest `t` with `X + t D ⪰ 0`, given the Cholesky factor of `X ≻ 0`.
fn step_to_boundary(chol: &Cholesky<C64, nalgebra::Dyn>, d: &CMatrix) -> f64 {
    let l = chol.l();
    let Some(t) = l.solve_lower_triangular(d) else {
        return 0.0;
    };
    let Some(m) = l.solve_lower_triangular(&t.adjoint()) else {
        return 0.0;
    };
    let lmin = hermitian_eigenvalues(&m)[0];
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn vec_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(a, d)| -a / d)
        .fold(f64::INFINITY, f64::min)
}
