//! Discrete Gagliardo energy, its gradient, and the constrained
//! Euler–Lagrange residual.
//!
//! For a field u over mesh nodes x_i with quadrature weights w_i,
//!
//! ```text
//! E(u; A, B) = Σ_{i∈A} Σ_{j∈B, j≠i} |u_i − u_j|^p · d_ij^{−(n + t·p)} · w_i w_j
//! ```
//!
//! with d_ij the chordal node distance and p = n/s. At t = s the kernel
//! exponent is the scale-critical 2n. The diagonal i = j is excluded; an
//! optional policy additionally multiplies mesh-adjacent pair terms by an
//! analytic factor that restores the mass of the omitted diagonal strip
//! under a locally linear model (see [`QuadraturePolicy`]).
//!
//! Deterministic mode routes sums through the fixed-shape pairwise reduction
//! of [`crate::reduce`], making results bit-identical across runs and thread
//! counts. The gradient is deterministic either way: each node's row is
//! accumulated sequentially in index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::tangential_project;
use crate::mesh::{Field, ScalarField, SphereMesh};
use crate::reduce::{pairwise_sum, sum_indexed};

/// How the excluded quadrature diagonal is compensated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// Drop i = j terms, keep everything else as-is (default).
    Exclude,
    /// Drop i = j terms and multiply mesh-adjacent pair terms by
    /// 1 + 1/((γ+1)(γ+2)) with γ = p − n − t·p: under a locally linear
    /// field model the omitted diagonal strip carries
    /// ∫₀^h Δ^γ (1 − Δ/h) dΔ = h^{γ+1}/((γ+1)(γ+2)) per side relative to
    /// each adjacent term h^{γ+1}. Skipped when γ ≤ −1 (strip mass
    /// divergent; plain exclusion is then the consistent reading). At
    /// p = 2, n = 1, t = s the factor is 3/2 and the identity map's energy
    /// becomes exactly (2π)².
    ExcludeWithLocalCorrection,
}

/// Quadrature policy: diagonal handling plus the reduction mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraturePolicy {
    pub diagonal: DiagonalPolicy,
    /// Bit-reproducible pairwise reduction when true.
    pub deterministic: bool,
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        QuadraturePolicy {
            diagonal: DiagonalPolicy::Exclude,
            deterministic: true,
        }
    }
}

/// Energy parameters (n, s, t) with p = n/s and a quadrature policy.
///
/// Invariants: n ∈ {1, 2}, 0 < s < 1, s ≤ t < 1; the stored p satisfies
/// |p·s − n| ≤ 1e−14.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyParams {
    n: usize,
    s: f64,
    t: f64,
    p: f64,
    pub quad: QuadraturePolicy,
}

impl EnergyParams {
    pub fn new(n: usize, s: f64, t: f64) -> Result<Self> {
        EnergyParams::with_quad(n, s, t, QuadraturePolicy::default())
    }

    pub fn with_quad(n: usize, s: f64, t: f64, quad: QuadraturePolicy) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::invalid(format!(
                "domain dimension n must be 1 or 2, got {n}"
            )));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::invalid(format!("base order s must be in (0,1), got {s}")));
        }
        if !(t >= s && t < 1.0) {
            return Err(Error::invalid(format!(
                "relaxed order t must satisfy s ≤ t < 1, got t = {t} with s = {s}"
            )));
        }
        let p = n as f64 / s;
        if (p * s - n as f64).abs() > 1e-14 {
            return Err(Error::invalid(format!(
                "exponent consistency p·s = {} drifted from n = {n}",
                p * s
            )));
        }
        Ok(EnergyParams { n, s, t, p, quad })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// n + t·p, the kernel's distance exponent; 2n at t = s.
    pub fn kernel_exponent(&self) -> f64 {
        self.n as f64 + self.t * self.p
    }

    /// Same (n, s, policy) at a different relaxed order.
    pub fn at_t(&self, t: f64) -> Result<Self> {
        EnergyParams::with_quad(self.n, self.s, t, self.quad)
    }

    /// Same parameters at the base order t = s.
    pub fn at_base(&self) -> Self {
        EnergyParams::with_quad(self.n, self.s, self.s, self.quad)
            .expect("base order is always admissible")
    }

    /// Adjacent-pair multiplier under the current policy, if any.
    fn correction(&self) -> Option<f64> {
        match self.quad.diagonal {
            DiagonalPolicy::Exclude => None,
            DiagonalPolicy::ExcludeWithLocalCorrection => {
                let gamma = self.p - self.kernel_exponent();
                if gamma <= -1.0 {
                    None
                } else {
                    Some(1.0 + 1.0 / ((gamma + 1.0) * (gamma + 2.0)))
                }
            }
        }
    }
}

/// The kernel d ↦ d^{−(n + t·p)} at chordal distance d > 0.
pub fn pair_kernel(d: f64, params: &EnergyParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::KernelSingularity(d));
    }
    Ok(d.powf(-params.kernel_exponent()))
}

#[inline]
pub(crate) fn dist_pow(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        sq
    } else {
        sq.powf(0.5 * p)
    }
}

/// |Δ|^{p−2} from |Δ|², continuous at 0: value 1 at p = 2, value 0 for p > 2.
#[inline]
fn grad_weight(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if sq == 0.0 {
        0.0
    } else {
        sq.powf(0.5 * p - 1.0)
    }
}

fn check_index_sets(mesh: &SphereMesh, sets: &[&[usize]]) -> Result<()> {
    let nn = mesh.node_count();
    for set in sets {
        if let Some(&bad) = set.iter().find(|&&i| i >= nn) {
            return Err(Error::invalid(format!(
                "index {bad} out of range for a {nn}-node mesh"
            )));
        }
    }
    Ok(())
}

/// Double sum Σ_{i∈A} Σ_{j∈B, j≠i} diff_sq(i,j)^{p/2} K(d_ij) w_i w_j with
/// the policy's adjacency factor. `diff_sq` returns the squared value
/// difference for a node pair.
fn pair_sum(
    mesh: &SphereMesh,
    params: &EnergyParams,
    set_a: &[usize],
    set_b: &[usize],
    diff_sq: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<f64> {
    check_index_sets(mesh, &[set_a, set_b])?;
    let p = params.p;
    let corr = params.correction();
    let exponent = params.kernel_exponent();

    let total = if mesh.is_uniform_circle() {
        let nn = mesh.node_count();
        // Offset-indexed kernel table: d(i,j) = 2 sin(π k / N), k = (j−i) mod N.
        let kernel: Vec<f64> = (0..nn)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    let d = 2.0 * (std::f64::consts::PI * k as f64 / nn as f64).sin();
                    d.powf(-exponent)
                }
            })
            .collect();
        let w2 = mesh.weight(0) * mesh.weight(0);
        sum_indexed(set_a.len(), params.quad.deterministic, |ai| {
            let i = set_a[ai];
            let mut row = 0.0;
            for &j in set_b {
                let k = (j + nn - i) % nn;
                if k == 0 {
                    continue;
                }
                let mut term = dist_pow(diff_sq(i, j), p) * kernel[k];
                if let Some(c) = corr {
                    if k == 1 || k == nn - 1 {
                        term *= c;
                    }
                }
                row += term;
            }
            row * w2
        })
    } else {
        let d = mesh.ambient_dim();
        sum_indexed(set_a.len(), params.quad.deterministic, |ai| {
            let i = set_a[ai];
            let xi = mesh.node(i);
            let wi = mesh.weight(i);
            let mut row = 0.0;
            for &j in set_b {
                if i == j {
                    continue;
                }
                let xj = mesh.node(j);
                let dist2: f64 = (0..d).map(|k| (xi[k] - xj[k]) * (xi[k] - xj[k])).sum();
                let mut term =
                    dist_pow(diff_sq(i, j), p) * dist2.powf(-0.5 * exponent) * mesh.weight(j);
                if let Some(c) = corr {
                    if mesh.is_adjacent(i, j) {
                        term *= c;
                    }
                }
                row += term;
            }
            row * wi
        })
    };
    if !total.is_finite() {
        return Err(Error::KernelSingularity(0.0));
    }
    Ok(total)
}

/// Restricted energy E(u; A, B). Symmetric in (A, B); additive over
/// partitions of the index set.
pub fn energy(u: &Field, params: &EnergyParams, set_a: &[usize], set_b: &[usize]) -> Result<f64> {
    if u.mesh().dim() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "field lives on S^{}, params expect n = {}",
            u.mesh().dim(),
            params.n
        )));
    }
    let m = u.dim();
    pair_sum(u.mesh(), params, set_a, set_b, |i, j| {
        let (a, b) = (u.value(i), u.value(j));
        (0..m).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()
    })
}

/// Full-domain energy E(u) = E(u; all, all).
pub fn total_energy(u: &Field, params: &EnergyParams) -> Result<f64> {
    let all = crate::mesh::all_indices(u.mesh());
    energy(u, params, &all, &all)
}

/// Total energy of raw node values that need not lie on the target — the
/// finite-difference gradient check perturbs single coordinates off the
/// manifold. Takes the exact same summation path as [`total_energy`].
pub(crate) fn total_energy_of_values(
    mesh: &crate::mesh::SphereMesh,
    dim: usize,
    values: &[f64],
    params: &EnergyParams,
) -> Result<f64> {
    let all = crate::mesh::all_indices(mesh);
    pair_sum(mesh, params, &all, &all, |i, j| {
        (0..dim)
            .map(|k| {
                let d = values[i * dim + k] - values[j * dim + k];
                d * d
            })
            .sum()
    })
}

/// Gagliardo seminorm [u] = E(u)^{1/p}.
pub fn seminorm(u: &Field, params: &EnergyParams) -> Result<f64> {
    Ok(total_energy(u, params)?.powf(1.0 / params.p))
}

/// Restricted energy for a scalar field (|f_i − f_j|^p numerator).
pub fn scalar_energy(
    f: &ScalarField,
    params: &EnergyParams,
    set_a: &[usize],
    set_b: &[usize],
) -> Result<f64> {
    if f.mesh().dim() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "scalar field lives on S^{}, params expect n = {}",
            f.mesh().dim(),
            params.n
        )));
    }
    pair_sum(f.mesh(), params, set_a, set_b, |i, j| {
        let d = f.value(i) - f.value(j);
        d * d
    })
}

/// Full-domain scalar energy.
pub fn scalar_total_energy(f: &ScalarField, params: &EnergyParams) -> Result<f64> {
    let all = crate::mesh::all_indices(f.mesh());
    scalar_energy(f, params, &all, &all)
}

/// Scalar seminorm (full energy)^{1/p}.
pub fn scalar_seminorm(f: &ScalarField, params: &EnergyParams) -> Result<f64> {
    Ok(scalar_total_energy(f, params)?.powf(1.0 / params.p))
}

/// Per-node row sums R_i = Σ_{j≠i} |u_i−u_j|^p K(d_ij) c_ij w_i w_j, so that
/// E(u; A, full) = Σ_{i∈A} R_i for any index set A. One O(N²) pass serves
/// every ball query in concentration scans.
pub(crate) fn row_energies(u: &Field, params: &EnergyParams) -> Result<Vec<f64>> {
    let mesh = u.mesh();
    let all = crate::mesh::all_indices(mesh);
    (0..mesh.node_count())
        .into_par_iter()
        .map(|i| energy(u, params, &all[i..=i], &all))
        .collect()
}

/// Exact gradient of the discrete energy with respect to each node value:
///
/// g_i = 2p Σ_{j≠i} |u_i−u_j|^{p−2} (u_i−u_j) · K(d_ij) · c_ij · w_i w_j
///
/// (c_ij the policy's adjacency factor). Requires p ≥ 2 so the weight is
/// continuous at coincident values. Row accumulation is sequential per node,
/// so the result is bit-deterministic under any thread count.
pub fn energy_gradient(u: &Field, params: &EnergyParams) -> Result<Vec<f64>> {
    if u.mesh().dim() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "field lives on S^{}, params expect n = {}",
            u.mesh().dim(),
            params.n
        )));
    }
    if params.p < 2.0 {
        return Err(Error::UnsupportedExponent(params.p));
    }
    let mesh = u.mesh();
    let nn = mesh.node_count();
    let m = u.dim();
    let p = params.p;
    let corr = params.correction();
    let exponent = params.kernel_exponent();
    let circle_kernel: Option<Vec<f64>> = if mesh.is_uniform_circle() {
        Some(
            (0..nn)
                .map(|k| {
                    if k == 0 {
                        0.0
                    } else {
                        let d = 2.0 * (std::f64::consts::PI * k as f64 / nn as f64).sin();
                        d.powf(-exponent)
                    }
                })
                .collect(),
        )
    } else {
        None
    };

    let mut grad = vec![0.0; nn * m];
    grad.par_chunks_mut(m).enumerate().for_each(|(i, gi)| {
        let ui = u.value(i);
        let wi = mesh.weight(i);
        for j in 0..nn {
            if j == i {
                continue;
            }
            let uj = u.value(j);
            let sq: f64 = (0..m).map(|k| (ui[k] - uj[k]) * (ui[k] - uj[k])).sum();
            let kernel = match &circle_kernel {
                Some(table) => table[(j + nn - i) % nn],
                None => {
                    let (xi, xj) = (mesh.node(i), mesh.node(j));
                    let d2: f64 = (0..mesh.ambient_dim())
                        .map(|k| (xi[k] - xj[k]) * (xi[k] - xj[k]))
                        .sum();
                    d2.powf(-0.5 * exponent)
                }
            };
            let mut factor = 2.0 * p * grad_weight(sq, p) * kernel * wi * mesh.weight(j);
            if let Some(c) = corr {
                if mesh.is_adjacent(i, j) {
                    factor *= c;
                }
            }
            for k in 0..m {
                gi[k] += factor * (ui[k] - uj[k]);
            }
        }
    });
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::KernelSingularity(0.0));
    }
    Ok(grad)
}

/// Constrained Euler–Lagrange residual: the weighted ℓ² norm
/// √(Σ_i w_i |Π_{u_i} g_i|²) of the tangential gradient. Zero exactly at
/// discrete critical points constrained to the target.
pub fn el_residual(u: &Field, params: &EnergyParams) -> Result<f64> {
    let grad = energy_gradient(u, params)?;
    residual_from_gradient(u, &grad)
}

/// Residual from an already-computed gradient (avoids recomputation inside
/// optimizer loops).
pub fn residual_from_gradient(u: &Field, grad: &[f64]) -> Result<f64> {
    let m = u.dim();
    let mesh = u.mesh();
    let mut terms = vec![0.0; u.len()];
    let result: Result<Vec<f64>> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let tang = tangential_project(u.value(i), &grad[i * m..(i + 1) * m])?;
            Ok(mesh.weight(i) * tang.iter().map(|c| c * c).sum::<f64>())
        })
        .collect();
    terms.copy_from_slice(&result?);
    Ok(pairwise_sum(&terms).sqrt())
}
