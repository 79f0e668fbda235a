//! Verification harness: finite-difference gradient audit, quadrature check
//! of the off-diagonal double-integral bound, and the bubbling experiment
//! driver that ties continuation, concentration detection, and the balance
//! comparison into one reproducible report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::energy::{
    energy_gradient, total_energy, total_energy_of_values, DiagonalPolicy, EnergyParams,
    QuadraturePolicy,
};
use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, SpherePoint, TargetManifold};
use crate::homotopy::{degree, winding_field};
use crate::mesh::{build_mesh, Field, SphereMesh};
use crate::minimizer::{
    detect_concentration, minimize, ContinuationSchedule, MinimizeConfig, MinimizeStatus,
};
use crate::reduce::sum_indexed;
use crate::rescaling::{balance_ratio, BalanceReport};

/// Seeded random on-manifold field: independent directions per node,
/// uniform on the target sphere up to the cube-rejection construction.
pub fn random_field(mesh: &Arc<SphereMesh>, target: TargetManifold, seed: u64) -> Result<Field> {
    let m = target.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(mesh.node_count() * m);
    for _ in 0..mesh.node_count() {
        loop {
            let v: Vec<f64> = (0..m).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
            let norm2: f64 = v.iter().map(|c| c * c).sum();
            if norm2 > 1e-2 && norm2 <= 1.0 {
                let norm = norm2.sqrt();
                values.extend(v.into_iter().map(|c| c / norm));
                break;
            }
        }
    }
    Field::from_values(mesh.clone(), target, values)
}

/// Degree-k circle field with a seeded tangential (angle) perturbation of
/// the given amplitude, the standard rough starting point for continuation.
pub fn noisy_winding(
    mesh: &Arc<SphereMesh>,
    k: i64,
    amplitude: f64,
    seed: u64,
) -> Result<Field> {
    if mesh.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "winding fields live on the circle (n = 1)".into(),
        ));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid(format!(
            "noise amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = TargetManifold::sphere(2)?;
    let mut values = Vec::with_capacity(mesh.node_count() * 2);
    for i in 0..mesh.node_count() {
        let phi = k as f64 * mesh.angle(i) + amplitude * (2.0 * rng.gen::<f64>() - 1.0);
        values.push(phi.sin());
        values.push(-phi.cos());
    }
    Field::from_values(mesh.clone(), target, values)
}

/// Central-difference audit of the analytic energy gradient: perturbs every
/// node coordinate by ±h (off the manifold — the gradient is the ambient
/// one) and returns the maximum relative error over coordinates where the
/// analytic gradient exceeds 1e−10 in magnitude. 0 when none qualify.
pub fn check_gradient(u: &Field, params: &EnergyParams, h: f64) -> Result<f64> {
    if u.len() > 128 {
        return Err(Error::invalid(format!(
            "gradient check is O(N³); capped at 128 nodes, got {}",
            u.len()
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let grad = energy_gradient(u, params)?;
    let dim = u.dim();
    let mesh = u.mesh();
    let mut values = u.values().to_vec();
    let mut worst = 0.0f64;
    for idx in 0..values.len() {
        let g = grad[idx];
        if g.abs() <= 1e-10 {
            continue;
        }
        let orig = values[idx];
        values[idx] = orig + h;
        let e_plus = total_energy_of_values(mesh, dim, &values, params)?;
        values[idx] = orig - h;
        let e_minus = total_energy_of_values(mesh, dim, &values, params)?;
        values[idx] = orig;
        let fd = (e_plus - e_minus) / (2.0 * h);
        worst = worst.max(((fd - g) / g).abs());
    }
    Ok(worst)
}

/// Quadrature measurement of the off-diagonal kernel bound
/// ∫∫_{[λR,R]²} |rθ − ρω|^{−α} dr dρ ≤ C(α) (1−λ) λ^{1−α} R (R|θ−ω|)^{1−α}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuperdifficultReport {
    pub alpha: f64,
    pub lambda: f64,
    pub r: f64,
    pub grid: usize,
    /// Chordal separation |θ − ω| of the two directions.
    pub separation: f64,
    /// Midpoint quadrature of the double integral.
    pub lhs: f64,
    /// The bound's structural part, constant left symbolic.
    pub bound: f64,
    /// lhs / bound — an empirical sample of C(α).
    pub ratio: f64,
}

/// Composite-midpoint evaluation of both sides of the off-diagonal bound.
/// The two unit directions must differ; at θ = ω the bound degenerates.
pub fn check_superdifficult(
    alpha: f64,
    lambda: f64,
    theta: &SpherePoint,
    omega: &SpherePoint,
    big_r: f64,
    grid: usize,
) -> Result<SuperdifficultReport> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "kernel exponent α must exceed 1, got {alpha}"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!(
            "inner radius fraction λ must lie in (0, 1), got {lambda}"
        )));
    }
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::invalid(format!(
            "outer radius must be positive, got {big_r}"
        )));
    }
    if grid == 0 {
        return Err(Error::invalid("quadrature grid must be positive"));
    }
    if theta.dim() != omega.dim() {
        return Err(Error::DimensionMismatch(
            "the two directions must live on the same sphere".into(),
        ));
    }
    let g = chordal_distance(theta, omega);
    if g == 0.0 {
        return Err(Error::DegenerateDirection(g));
    }
    let h = (big_r - lambda * big_r) / grid as f64;
    let gg = g * g;
    let lhs = sum_indexed(grid, true, |i| {
        let r = lambda * big_r + (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..grid {
            let p = lambda * big_r + (j as f64 + 0.5) * h;
            let d = r - p;
            row += (d * d + r * p * gg).powf(-0.5 * alpha);
        }
        row
    }) * h
        * h;
    let bound =
        (1.0 - lambda) * lambda.powf(1.0 - alpha) * big_r * (big_r * g).powf(1.0 - alpha);
    Ok(SuperdifficultReport {
        alpha,
        lambda,
        r: big_r,
        grid,
        separation: g,
        lhs,
        bound,
        ratio: lhs / bound,
    })
}

/// Configuration of the bubbling experiment: continuation toward the
/// critical order from a (possibly perturbed) degree-k circle field, with
/// concentration detection and the balance comparison at every stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Winding number of the starting field; must be nonzero.
    pub degree: i64,
    /// Critical order s.
    pub s: f64,
    /// Strictly decreasing t-schedule in (s, 1).
    pub schedule: Vec<f64>,
    /// Circle node count.
    pub resolution: usize,
    /// Absolute ball-energy threshold for concentration detection.
    pub eps: f64,
    /// Ball radius for both concentration and the balance comparison.
    pub rho: f64,
    /// Tangential noise amplitude on the start field (0 = clean winding).
    pub noise: f64,
    /// Seed for the noise.
    pub seed: u64,
    pub optimizer: MinimizeConfig,
    /// Bit-reproducible reductions when set.
    pub deterministic: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            degree: 1,
            s: 0.5,
            schedule: ContinuationSchedule::default_for(0.5)
                .map(|sch| sch.t_values().to_vec())
                .unwrap_or_default(),
            resolution: 256,
            eps: 20.0,
            rho: 0.5,
            noise: 0.0,
            seed: 7,
            optimizer: MinimizeConfig::default(),
            deterministic: true,
        }
    }
}

/// One continuation stage of the experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentStage {
    pub t: f64,
    pub energy_t: f64,
    pub energy_s: f64,
    pub residual: f64,
    pub status: MinimizeStatus,
    /// None when the winding is ill-conditioned at this stage.
    pub degree: Option<i64>,
    pub centers: Vec<usize>,
    pub balance: Vec<BalanceReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: String,
    pub reduction: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub stages: Vec<ExperimentStage>,
    pub provenance: Provenance,
}

/// Runs the bubbling experiment: warm-started minimization down the
/// t-schedule, recording energies at t and at the critical order, the
/// Euler–Lagrange residual, a degree audit, concentration centers, and the
/// balance comparison at each center. Stage stalls are recorded in the
/// stage status, not fatal.
pub fn bubbling_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.degree == 0 {
        return Err(Error::invalid(
            "experiment degree must be nonzero: a trivial class has nothing to concentrate",
        ));
    }
    let schedule = ContinuationSchedule::new(cfg.s, cfg.schedule.clone())?;
    cfg.optimizer.validate()?;
    let rho_max = (4.0f64 / 5.0).sqrt();
    if !(cfg.rho > 0.0 && cfg.rho < rho_max) {
        return Err(Error::invalid(format!(
            "experiment ball radius must lie in (0, {rho_max:.4}), got {}",
            cfg.rho
        )));
    }
    let quad = QuadraturePolicy {
        diagonal: DiagonalPolicy::Exclude,
        deterministic: cfg.deterministic,
    };
    let mesh = build_mesh(1, cfg.resolution)?;
    let mut field = if cfg.noise == 0.0 {
        winding_field(&mesh, cfg.degree)?
    } else {
        noisy_winding(&mesh, cfg.degree, cfg.noise, cfg.seed)?
    };
    let mut stages = Vec::with_capacity(schedule.t_values().len());
    for &t in schedule.t_values() {
        let params = EnergyParams::with_quad(1, cfg.s, t, quad)?;
        let result = minimize(&field, &params, &cfg.optimizer)?;
        let energy_t = result.final_energy();
        let residual = result.final_residual();
        let status = result.status;
        field = result.field;
        let energy_s = total_energy(&field, &params.at_base())?;
        let deg = match degree(&field) {
            Ok(d) => Some(d),
            Err(Error::IllConditionedDegree { .. }) => None,
            Err(e) => return Err(e),
        };
        let centers = detect_concentration(&field, &params, cfg.eps, cfg.rho)?;
        let balance = centers
            .iter()
            .map(|&c| balance_ratio(&field, &mesh.node_point(c), cfg.rho, &params))
            .collect::<Result<Vec<_>>>()?;
        stages.push(ExperimentStage {
            t,
            energy_t,
            energy_s,
            residual,
            status,
            degree: deg,
            centers,
            balance,
        });
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        stages,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            reduction: if cfg.deterministic {
                "deterministic".to_string()
            } else {
                "parallel".to_string()
            },
        },
    })
}
