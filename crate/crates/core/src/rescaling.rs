//! Conformal (Möbius) rescaling of sphere fields and the kernel that
//! controls how the relaxed energy transforms under it.
//!
//! The dilation acts through the stereographic chart: u_λ(x) = u(τ(λ τ⁻¹(x)))
//! with τ the chart inverse based at the south pole. At the critical order
//! t = s the energy is exactly invariant; for t > s the change of variables
//! produces the explicit kernel
//!
//! ```text
//! K_λ(r, R) = [ (r²+λ²)/(λ(r²+1)) · (R²+λ²)/(λ(R²+1)) ]^e ,
//! ```
//!
//! e = (t/s−1)/2 for n = 1 and e = (n/2)(t/s−1) for n ≥ 2, which is bounded
//! piecewise by (2λ)^{n(t/s−1)} when both chart radii are ≤ λ, by
//! (2/λ)^{n(t/s−1)} when both are ≥ λ, and by their average in the mixed
//! regime. Those bounds drive the rescaled-energy inequality: the energy of
//! u_λ is at most the ball/complement split of the original energy weighted
//! by the two regime constants, with the ball of chordal radius
//! r_λ = 2λ/√(λ²+1) around the south pole.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy, total_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::{stereo_project, SpherePoint};
use crate::mesh::{all_indices, ball_indices, complement_indices, Field};

/// Pullback of the field under the chart dilation by λ.
///
/// Nodes at the north pole (the chart's point at infinity) are fixed points
/// of the dilation and keep their value. Requires at least 32 nodes so the
/// chart-resampling interpolation error stays small.
pub fn conformal_rescale(u: &Field, lambda: f64) -> Result<Field> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "rescaling factor must be positive, got {lambda}"
        )));
    }
    if u.len() < 32 {
        return Err(Error::ResolutionTooCoarse(format!(
            "conformal rescaling needs ≥ 32 nodes, mesh has {}",
            u.len()
        )));
    }
    let mesh = u.mesh_arc().clone();
    let mut out = u.clone();
    for i in 0..u.len() {
        let x = mesh.node_point(i);
        match stereo_project(&x) {
            Err(Error::AtPole { .. }) => {} // fixed point: keep u_i
            Err(other) => return Err(other),
            Ok(chart) => {
                let scaled: Vec<f64> = chart.iter().map(|c| lambda * c).collect();
                let v = u.sample_chart(&scaled)?;
                out.set_value(i, &v)?;
            }
        }
    }
    Ok(out)
}

/// The rescaling kernel K_λ(r, R) at chart radii r, R.
pub fn kernel_k(lambda: f64, r: f64, big_r: f64, params: &EnergyParams) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "kernel factor λ must be positive, got {lambda}"
        )));
    }
    let e = if params.n() == 1 {
        (params.t() / params.s() - 1.0) / 2.0
    } else {
        params.n() as f64 / 2.0 * (params.t() / params.s() - 1.0)
    };
    let a = |x: f64| (x * x + lambda * lambda) / (lambda * (x * x + 1.0));
    Ok((a(r) * a(big_r)).powf(e))
}

/// Exponent n(t/s − 1) of the regime bounds.
fn regime_exponent(params: &EnergyParams) -> f64 {
    params.n() as f64 * (params.t() / params.s() - 1.0)
}

/// Samples K_λ against its piecewise regime bounds, (r, R) log-uniform over
/// [10⁻³, 10³]², and returns the maximum of K/bound − 1 (expected ≤ 0 up to
/// rounding).
pub fn kernel_bound_check(
    lambda: f64,
    params: &EnergyParams,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::invalid(format!(
            "kernel bound check needs λ ∈ (0,2), got {lambda}"
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let nexp = regime_exponent(params);
    let bound_small = (2.0 * lambda).powf(nexp);
    let bound_large = (2.0 / lambda).powf(nexp);
    let bound_mixed = 0.5 * (bound_small + bound_large);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1e-3f64.ln();
    let span = 1e3f64.ln() - lo;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let r = (lo + span * rng.gen::<f64>()).exp();
        let big_r = (lo + span * rng.gen::<f64>()).exp();
        let k = kernel_k(lambda, r, big_r, params)?;
        let bound = match (r <= lambda, big_r <= lambda) {
            (true, true) => bound_small,
            (false, false) => bound_large,
            _ => bound_mixed,
        };
        worst = worst.max(k / bound - 1.0);
    }
    Ok(worst)
}

/// Measured sides of the rescaled-energy inequality
/// E_t(u_λ) ≤ (2λ)^{n(t/s−1)} E_t(u; ball, all) + (2/λ)^{n(t/s−1)} E_t(u; rest, all).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundReport {
    pub lambda: f64,
    /// E_t of the rescaled field.
    pub lhs: f64,
    /// Weighted ball term of the original field.
    pub rhs_ball: f64,
    /// Weighted complement term of the original field.
    pub rhs_complement: f64,
    /// Chordal ball radius 2λ/√(λ²+1) around the south pole.
    pub r_lambda: f64,
    /// rhs − lhs; negative values are recorded, not rejected.
    pub slack: f64,
}

/// Evaluates both sides of the rescaled-energy inequality for the field.
/// At t = s the prefactors are 1 and the inequality is partition additivity.
pub fn rescale_bound_check(u: &Field, lambda: f64, params: &EnergyParams) -> Result<BoundReport> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::invalid(format!(
            "rescaled-energy check needs λ ∈ (0,2), got {lambda}"
        )));
    }
    let u_lam = conformal_rescale(u, lambda)?;
    let lhs = total_energy(&u_lam, params)?;
    let r_lambda = 2.0 * lambda / (lambda * lambda + 1.0).sqrt();
    let mesh = u.mesh();
    let south = SpherePoint::south(mesh.dim());
    let ball = ball_indices(mesh, &south, r_lambda)?;
    let comp = complement_indices(mesh, &ball);
    let all = all_indices(mesh);
    let nexp = regime_exponent(params);
    let rhs_ball = (2.0 * lambda).powf(nexp) * energy(u, params, &ball, &all)?;
    let rhs_complement = (2.0 / lambda).powf(nexp) * energy(u, params, &comp, &all)?;
    Ok(BoundReport {
        lambda,
        lhs,
        rhs_ball,
        rhs_complement,
        r_lambda,
        slack: rhs_ball + rhs_complement - lhs,
    })
}

/// Measured sides of the balanced-energy comparison: the energy a minimizer
/// keeps inside a small ball against the energy of the rest, with the
/// implied constant of lhs ≤ C ρ^{−n(t/s−1)} rhs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BalanceReport {
    pub rho: f64,
    pub t: f64,
    /// E_t(u; ball(y₀, ρ), all).
    pub lhs: f64,
    /// E_t(u; complement, all).
    pub rhs_core: f64,
    /// lhs · ρ^{n(t/s−1)} / rhs_core (0 when 0/0).
    pub implied_constant: f64,
}

/// Computes the balanced-energy comparison at center y₀ and radius ρ.
/// Records data only; the constant is the comparison's unknown.
pub fn balance_ratio(
    u: &Field,
    y0: &SpherePoint,
    rho: f64,
    params: &EnergyParams,
) -> Result<BalanceReport> {
    let rho_max = (4.0f64 / 5.0).sqrt();
    if !(rho > 0.0 && rho < rho_max) {
        return Err(Error::invalid(format!(
            "balance radius must lie in (0, √(4/5)) = (0, {rho_max:.4}), got {rho}"
        )));
    }
    let mesh = u.mesh();
    let ball = ball_indices(mesh, y0, rho)?;
    let comp = complement_indices(mesh, &ball);
    let all = all_indices(mesh);
    let lhs = energy(u, params, &ball, &all)?;
    let rhs_core = energy(u, params, &comp, &all)?;
    let implied_constant = if rhs_core == 0.0 && lhs == 0.0 {
        0.0
    } else {
        lhs * rho.powf(regime_exponent(params)) / rhs_core
    };
    Ok(BalanceReport {
        rho,
        t: params.t(),
        lhs,
        rhs_core,
        implied_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chordal_distance, TargetManifold};
    use crate::homotopy::{degree, winding_field};
    use crate::mesh::build_mesh;
    use crate::minimizer::detect_concentration;

    #[test]
    fn rescale_identity_factor_is_identity() {
        let mesh = build_mesh(1, 64).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let v = conformal_rescale(&u, 1.0).unwrap();
        for i in 0..u.len() {
            for (a, b) in u.value(i).iter().zip(v.value(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rescale_preserves_constants() {
        let mesh = build_mesh(1, 32).unwrap();
        let target = TargetManifold::sphere(2).unwrap();
        let c = [0.6, 0.8];
        let u = Field::constant(mesh, target, &c).unwrap();
        for lam in [0.3, 1.0, 5.0] {
            let v = conformal_rescale(&u, lam).unwrap();
            for i in 0..v.len() {
                assert!((v.value(i)[0] - c[0]).abs() < 1e-12);
                assert!((v.value(i)[1] - c[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rescale_parameter_validation() {
        let mesh = build_mesh(1, 64).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        assert!(conformal_rescale(&u, 0.0).is_err());
        assert!(conformal_rescale(&u, -2.0).is_err());
        let tiny = winding_field(&build_mesh(1, 16).unwrap(), 1).unwrap();
        assert!(matches!(
            conformal_rescale(&tiny, 2.0),
            Err(Error::ResolutionTooCoarse(_))
        ));
    }

    #[test]
    fn rescale_group_property() {
        let mesh = build_mesh(1, 512).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let back = conformal_rescale(&conformal_rescale(&u, 2.0).unwrap(), 0.5).unwrap();
        // Identity-map variation per node spacing is one spacing; allow two.
        let tol = 2.0 * 2.0 * (std::f64::consts::PI / 512.0).sin();
        let mut sup: f64 = 0.0;
        for i in 0..u.len() {
            let d: f64 = u
                .value(i)
                .iter()
                .zip(back.value(i))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(d);
        }
        assert!(sup < tol, "round trip drifted by {sup} (tol {tol})");
    }

    #[test]
    fn critical_energy_nearly_invariant() {
        // At t = s the continuum energy is exactly conformally invariant;
        // the frozen value pins the discretization at N = 512, λ = 1.5.
        let mesh = build_mesh(1, 512).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let e0 = total_energy(&u, &ps).unwrap();
        assert!((e0 - 39.40131131997392).abs() / e0 < 1e-11);
        let e1 = total_energy(&conformal_rescale(&u, 1.5).unwrap(), &ps).unwrap();
        assert!((e1 - 39.39488579617564).abs() / e1 < 1e-9);
        assert!((e1 - e0).abs() / e0 < 0.01);
    }

    #[test]
    fn rescale_keeps_degree() {
        let mesh = build_mesh(1, 128).unwrap();
        let u = winding_field(&mesh, 2).unwrap();
        for lam in [0.5, 1.5, 3.0] {
            let v = conformal_rescale(&u, lam).unwrap();
            assert_eq!(degree(&v).unwrap(), 2, "λ = {lam}");
        }
    }

    #[test]
    fn kernel_closed_form_values() {
        let ps = EnergyParams::new(1, 0.5, 0.6).unwrap();
        // λ = 1 collapses both factors to 1.
        for (r, big_r) in [(0.0, 0.0), (0.3, 2.0), (10.0, 0.01)] {
            assert!((kernel_k(1.0, r, big_r, &ps).unwrap() - 1.0).abs() < 1e-15);
        }
        // t = s zeroes the exponent.
        let base = EnergyParams::new(1, 0.5, 0.5).unwrap();
        assert_eq!(kernel_k(1.7, 0.4, 5.0, &base).unwrap(), 1.0);
        // r = R = 0: each factor is λ, combined exponent t/s−1.
        let lam = 1.3f64;
        let k = kernel_k(lam, 0.0, 0.0, &ps).unwrap();
        assert!((k - lam.powf(0.2)).abs() < 1e-14);
        let ps2 = EnergyParams::new(2, 0.5, 0.6).unwrap();
        let k2 = kernel_k(lam, 0.0, 0.0, &ps2).unwrap();
        assert!((k2 - lam.powf(2.0 * 0.2)).abs() < 1e-14);
        assert!(kernel_k(0.0, 1.0, 1.0, &ps).is_err());
    }

    #[test]
    fn kernel_bounds_hold_on_samples() {
        let ps = EnergyParams::new(1, 0.5, 0.6).unwrap();
        for lam in [0.5, 1.0, 1.5, 1.9] {
            let v = kernel_bound_check(lam, &ps, 10_000, 7).unwrap();
            assert!(v <= 1e-12, "λ = {lam}: violation {v}");
        }
        // t = s: kernel and bounds all equal 1, violation exactly 0.
        let base = EnergyParams::new(1, 0.5, 0.5).unwrap();
        assert_eq!(kernel_bound_check(1.5, &base, 1000, 7).unwrap(), 0.0);
        assert!(kernel_bound_check(2.0, &ps, 100, 7).is_err());
        assert!(kernel_bound_check(1.0, &ps, 0, 7).is_err());
    }

    #[test]
    fn rescaled_energy_inequality_identity_map() {
        let mesh = build_mesh(1, 256).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.6).unwrap();
        let rep = rescale_bound_check(&u, 1.5, &ps).unwrap();
        assert!((rep.r_lambda - 2.0 * 1.5 / (3.25f64).sqrt()).abs() < 1e-15);
        assert!(
            rep.slack >= -0.01 * rep.lhs,
            "slack {} vs lhs {}",
            rep.slack,
            rep.lhs
        );
        // λ = 1: prefactors ≥ 1 on a partition of the total energy, so the
        // slack is nonnegative up to interpolation error.
        let rep1 = rescale_bound_check(&u, 1.0, &ps).unwrap();
        assert!(rep1.slack >= -1e-9 * rep1.lhs);
        assert!((rep1.r_lambda - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn balance_ratio_conventions() {
        let mesh = build_mesh(1, 64).unwrap();
        let target = TargetManifold::sphere(2).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.6).unwrap();
        let south = SpherePoint::south(1);
        let constant = Field::constant(mesh.clone(), target, &[1.0, 0.0]).unwrap();
        let rep = balance_ratio(&constant, &south, 0.5, &ps).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs_core, 0.0);
        assert_eq!(rep.implied_constant, 0.0);
        // Radius domain: √(4/5) ≈ 0.894.
        let u = winding_field(&mesh, 1).unwrap();
        assert!(balance_ratio(&u, &south, 0.9, &ps).is_err());
        assert!(balance_ratio(&u, &south, 0.0, &ps).is_err());
        let rep = balance_ratio(&u, &south, 0.5, &ps).unwrap();
        assert!(rep.implied_constant.is_finite() && rep.implied_constant > 0.0);
    }

    #[test]
    fn concentrated_rescale_reference_values() {
        // λ = 20 pullback of the identity at N = 256, measured at t = 0.6:
        // frozen against an independent implementation, and the
        // concentration scan isolates the south-pole bubble.
        let mesh = build_mesh(1, 256).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let v = conformal_rescale(&u, 20.0).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.6).unwrap();
        let total = total_energy(&v, &ps).unwrap();
        assert!((total - 53.15279368826446).abs() / total < 1e-9, "total {total}");
        let centers = detect_concentration(&v, &ps, 0.5 * total, 0.5).unwrap();
        assert_eq!(centers, vec![0]);
        // The bubble sits at the south pole.
        let south = SpherePoint::south(1);
        assert!(chordal_distance(&mesh.node_point(0), &south) < 1e-15);
    }
}
