//! Constrained minimization of the discrete energy and the continuation in
//! the relaxed order t.
//!
//! The optimizer is projected gradient descent with Armijo backtracking:
//! each node moves against the tangential part of the energy gradient and is
//! projected back to the target. No curvature model is used — the energies
//! are p-Laplacian-like (degenerate elliptic), where a robust first-order
//! method with monotone acceptance is the safe default.
//!
//! Continuation minimizes along a strictly decreasing schedule of relaxed
//! orders t → s⁺, warm-starting each stage from the previous minimizer, and
//! records per-stage diagnostics: both energies E_t and E_s, the uniform
//! comparison E_s ≤ 2^{(t−s)p} E_t, the Euler–Lagrange residual, the degree,
//! and energy-concentration centers.

use serde::{Deserialize, Serialize};

use crate::energy::{
    energy_gradient, residual_from_gradient, row_energies, total_energy, EnergyParams,
};
use crate::error::{Error, Result};
use crate::geometry::{project_to_target, tangential_project};
use crate::homotopy::degree;
use crate::mesh::{ball_indices, Field};
use crate::reduce::pairwise_sum;

/// Armijo line-search parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArmijoParams {
    /// Sufficient-decrease fraction c₁ ∈ (0, 1).
    pub c1: f64,
    /// Multiplicative step shrink per backtrack, in (0, 1).
    pub shrink: f64,
    /// Backtracks allowed per iteration before declaring a stall.
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        ArmijoParams {
            c1: 1e-4,
            shrink: 0.5,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub max_iters: usize,
    /// Stop when the weighted Euler–Lagrange residual falls below this.
    pub tol_grad: f64,
    pub armijo: ArmijoParams,
    pub initial_step: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            max_iters: 500,
            tol_grad: 1e-4,
            armijo: ArmijoParams::default(),
            initial_step: 1e-2,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        if !(self.tol_grad > 0.0) {
            return Err(Error::invalid("tol_grad must be positive"));
        }
        if !(self.armijo.c1 > 0.0 && self.armijo.c1 < 1.0) {
            return Err(Error::invalid("armijo c1 must lie in (0,1)"));
        }
        if !(self.armijo.shrink > 0.0 && self.armijo.shrink < 1.0) {
            return Err(Error::invalid("armijo shrink factor must lie in (0,1)"));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::invalid("initial_step must be positive"));
        }
        Ok(())
    }
}

/// Strictly decreasing relaxed orders in (s, 1), approaching s.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationSchedule {
    s: f64,
    t_values: Vec<f64>,
}

impl ContinuationSchedule {
    pub fn new(s: f64, t_values: Vec<f64>) -> Result<Self> {
        if t_values.is_empty() {
            return Err(Error::invalid("schedule needs at least one stage"));
        }
        for pair in t_values.windows(2) {
            if !(pair[1] < pair[0]) {
                return Err(Error::invalid(format!(
                    "schedule must be strictly decreasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &t in &t_values {
            if !(t > s && t < 1.0) {
                return Err(Error::invalid(format!(
                    "schedule value {t} outside (s, 1) with s = {s}"
                )));
            }
        }
        Ok(ContinuationSchedule { s, t_values })
    }

    /// Default halving schedule t_k = s + 0.2·2^{−k}, four stages.
    pub fn default_for(s: f64) -> Result<Self> {
        let ts = (0..4).map(|k| s + 0.2 * 0.5f64.powi(k)).collect();
        ContinuationSchedule::new(s, ts)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizeStatus {
    /// Residual fell below tol_grad.
    Converged,
    /// Iteration budget exhausted with the residual still above tolerance.
    MaxIters,
    /// Line search exhausted its backtracks without an acceptable step.
    Stalled,
}

#[derive(Debug)]
pub struct MinimizeResult {
    pub field: Field,
    /// Energy after 0, 1, … accepted steps (nonincreasing).
    pub energies: Vec<f64>,
    /// Residual at the same checkpoints.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub status: MinimizeStatus,
    pub params: EnergyParams,
}

impl MinimizeResult {
    pub fn converged(&self) -> bool {
        self.status == MinimizeStatus::Converged
    }

    pub fn initial_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("trajectory never empty")
    }

    pub fn initial_residual(&self) -> f64 {
        self.residuals[0]
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("trajectory never empty")
    }
}

/// Minimizes the energy at fixed parameters by projected gradient descent.
///
/// Each iteration: compute the gradient, project it to the tangent spaces,
/// step all nodes by −α·direction, re-project to the target, and accept via
/// the Armijo test E(trial) ≤ E − c₁·α·|direction|². A trial that leaves the
/// tubular neighborhood counts as a failed backtrack. The accepted step is
/// doubled as the next iteration's first trial. Stalls are reported as a
/// status, not an error; the returned field is then the best iterate.
pub fn minimize(field0: &Field, params: &EnergyParams, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    if params.p() < 2.0 {
        return Err(Error::UnsupportedExponent(params.p()));
    }
    let m = field0.dim();
    let nn = field0.len();

    let mut u = field0.clone();
    let mut energy_now = total_energy(&u, params)?;
    let mut energies = vec![energy_now];
    let mut residuals = Vec::new();
    let mut step = cfg.initial_step;
    let mut iterations = 0;

    loop {
        let grad = energy_gradient(&u, params)?;
        let res = residual_from_gradient(&u, &grad)?;
        residuals.push(res);
        if res <= cfg.tol_grad {
            return Ok(MinimizeResult {
                field: u,
                energies,
                residuals,
                iterations,
                status: MinimizeStatus::Converged,
                params: *params,
            });
        }
        if iterations >= cfg.max_iters {
            return Ok(MinimizeResult {
                field: u,
                energies,
                residuals,
                iterations,
                status: MinimizeStatus::MaxIters,
                params: *params,
            });
        }

        // Tangential descent direction and its squared norm (the predicted
        // first-order decrease per unit step).
        let mut dir = vec![0.0; nn * m];
        let mut dir_sq = vec![0.0; nn];
        for i in 0..nn {
            let tang = tangential_project(u.value(i), &grad[i * m..(i + 1) * m])?;
            dir_sq[i] = tang.iter().map(|c| c * c).sum();
            dir[i * m..(i + 1) * m].copy_from_slice(&tang);
        }
        let decrease_rate = pairwise_sum(&dir_sq);

        let mut accepted = false;
        for _ in 0..=cfg.armijo.max_backtracks {
            match try_step(&u, &dir, step) {
                Ok(trial) => {
                    let trial_energy = total_energy(&trial, params)?;
                    if trial_energy <= energy_now - cfg.armijo.c1 * step * decrease_rate {
                        u = trial;
                        energy_now = trial_energy;
                        energies.push(trial_energy);
                        iterations += 1;
                        step *= 2.0;
                        accepted = true;
                        break;
                    }
                }
                Err(Error::TubularViolation { .. }) => {
                    // Step overshot the collar; treat as a failed trial.
                }
                Err(other) => return Err(other),
            }
            step *= cfg.armijo.shrink;
        }
        if !accepted {
            return Ok(MinimizeResult {
                field: u,
                energies,
                residuals,
                iterations,
                status: MinimizeStatus::Stalled,
                params: *params,
            });
        }
    }
}

fn try_step(u: &Field, dir: &[f64], step: f64) -> Result<Field> {
    let m = u.dim();
    let mut next = u.clone();
    let mut moved = vec![0.0; m];
    for i in 0..u.len() {
        let v = u.value(i);
        for k in 0..m {
            moved[k] = v[k] - step * dir[i * m + k];
        }
        let projected = project_to_target(&moved, u.target()).map_err(|e| match e {
            Error::TubularViolation { dist, radius, .. } => Error::TubularViolation {
                node: i,
                dist,
                radius,
            },
            other => other,
        })?;
        next.set_value(i, &projected)?;
    }
    Ok(next)
}

/// One continuation stage's record.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub t: f64,
    /// Final energy at this stage's relaxed order.
    pub energy_t: f64,
    /// Energy of the same field at the base order s.
    pub energy_s: f64,
    /// Uniform-bound comparison: E_s ≤ 2^{(t−s)p} E_t.
    pub bound_rhs: f64,
    pub bound_holds: bool,
    pub residual: f64,
    pub iterations: usize,
    pub status: MinimizeStatus,
    /// Degree of the stage minimizer, if well-conditioned.
    pub degree: Option<i64>,
    /// Energy-concentration centers (node indices) at this stage.
    pub centers: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContinuationConfig {
    pub minimize: MinimizeConfig,
    /// Ball-energy threshold for concentration detection.
    pub conc_eps: f64,
    /// Ball radius (and suppression distance) for concentration detection.
    pub conc_rho: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            minimize: MinimizeConfig::default(),
            conc_eps: 20.0,
            conc_rho: 0.5,
        }
    }
}

#[derive(Debug)]
pub struct ContinuationReport {
    pub stages: Vec<StageRecord>,
    pub field: Field,
}

/// Runs minimize along the schedule, warm-starting each stage from the
/// previous minimizer. Stage stalls are recorded in the stage status and the
/// continuation proceeds; only structural failures abort.
pub fn continuation(
    field0: &Field,
    schedule: &ContinuationSchedule,
    params_base: &EnergyParams,
    cfg: &ContinuationConfig,
) -> Result<ContinuationReport> {
    if (params_base.s() - schedule.s()).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "schedule base order {} does not match params s = {}",
            schedule.s(),
            params_base.s()
        )));
    }
    let mut current = field0.clone();
    let mut stages = Vec::with_capacity(schedule.t_values().len());
    for &t in schedule.t_values() {
        let params_t = params_base.at_t(t)?;
        let result = minimize(&current, &params_t, &cfg.minimize)?;
        let energy_t = result.final_energy();
        let stage_residual = result.final_residual();
        current = result.field;
        let params_s = params_base.at_base();
        let energy_s = total_energy(&current, &params_s)?;
        let bound_rhs = 2.0f64.powf((t - params_base.s()) * params_base.p()) * energy_t;
        let deg = match degree(&current) {
            Ok(d) => Some(d),
            Err(Error::IllConditionedDegree { .. }) | Err(Error::DimensionMismatch(_)) => None,
            Err(other) => return Err(other),
        };
        let centers = detect_concentration(&current, &params_t, cfg.conc_eps, cfg.conc_rho)?;
        stages.push(StageRecord {
            t,
            energy_t,
            energy_s,
            bound_rhs,
            bound_holds: energy_s <= bound_rhs * (1.0 + 1e-12),
            residual: stage_residual,
            iterations: result.iterations,
            status: result.status,
            degree: deg,
            centers,
        });
    }
    Ok(ContinuationReport {
        stages,
        field: current,
    })
}

/// Greedy energy-concentration scan: nodes c with E(ball(c, rho), full) >
/// eps, visited in decreasing ball energy, suppressing candidates within
/// chordal distance rho of an already-reported center.
pub fn detect_concentration(
    u: &Field,
    params: &EnergyParams,
    eps: f64,
    rho: f64,
) -> Result<Vec<usize>> {
    if !(rho > 0.0 && rho < 2.0) {
        return Err(Error::invalid(format!(
            "concentration radius must lie in (0,2), got {rho}"
        )));
    }
    let mesh = u.mesh();
    let rows = row_energies(u, params)?;
    let nn = mesh.node_count();
    let mut ball_energy = vec![0.0; nn];
    for c in 0..nn {
        let ball = ball_indices(mesh, &mesh.node_point(c), rho)?;
        let terms: Vec<f64> = ball.iter().map(|&i| rows[i]).collect();
        ball_energy[c] = pairwise_sum(&terms);
    }
    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&a, &b| {
        ball_energy[b]
            .partial_cmp(&ball_energy[a])
            .expect("ball energies are finite")
            .then(a.cmp(&b))
    });
    let mut centers: Vec<usize> = Vec::new();
    for c in order {
        if ball_energy[c] <= eps {
            break;
        }
        let xc = mesh.node(c);
        let suppressed = centers.iter().any(|&k| {
            let xk = mesh.node(k);
            let d2: f64 = xc
                .iter()
                .zip(xk)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2.sqrt() < rho
        });
        if !suppressed {
            centers.push(c);
        }
    }
    Ok(centers)
}
