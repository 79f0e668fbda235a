//! Constructive comparison maps: cut-off interpolation between two fields,
//! the Luckhaus-style boundary glue, inversion extension, capacity cutoffs,
//! and the chart-opening map. Each construction either produces a valid
//! on-manifold field or reports precisely where it degenerates, and the
//! quantitative ones return the measured terms of the energy estimate they
//! realize.

use serde::Serialize;
use std::sync::Arc;

use crate::energy::{dist_pow, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, project_to_target, SpherePoint};
use crate::mesh::{Field, ScalarField, SphereMesh};

/// Polynomial ramp 3x² − 2x³ clamped to [0, 1].
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Checks two fields live on the same mesh and target.
fn require_same_layout(u: &Field, v: &Field) -> Result<()> {
    if !u.mesh().same_discretization(v.mesh()) || u.target() != v.target() {
        return Err(Error::DimensionMismatch(
            "fields must share mesh and target".into(),
        ));
    }
    Ok(())
}

/// Projects a convex blend of node values, tracking the worst collar
/// excursion so a failed glue can name the node where the blend dips
/// deepest into the tube.
struct BlendTracker {
    worst_node: usize,
    worst_collar: f64,
}

impl BlendTracker {
    fn new() -> Self {
        Self {
            worst_node: 0,
            worst_collar: f64::NEG_INFINITY,
        }
    }

    fn observe(&mut self, node: usize, collar: f64) {
        if collar > self.worst_collar {
            self.worst_collar = collar;
            self.worst_node = node;
        }
    }

    fn check(&self, radius: f64) -> Result<()> {
        if self.worst_collar >= radius {
            return Err(Error::TubularViolation {
                node: self.worst_node,
                dist: self.worst_collar,
                radius,
            });
        }
        Ok(())
    }
}

/// Interpolates from v (inside the ball of chordal radius ρ around the
/// center) to u (outside radius 2ρ) through the projected convex blend
/// π((1−η)u + ηv), η the smoothstep profile in chordal distance.
///
/// Fails with a tubular violation naming the worst node when the blend
/// leaves the target's tubular neighborhood anywhere on the annulus.
pub fn cutoff_interpolate(
    u: &Field,
    v: &Field,
    center: &SpherePoint,
    rho: f64,
) -> Result<Field> {
    require_same_layout(u, v)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!(
            "cutoff radius must lie in (0, 1) so the outer radius 2ρ stays below the diameter, got {rho}"
        )));
    }
    if center.dim() != u.mesh().dim() {
        return Err(Error::DimensionMismatch(
            "cutoff center must live on the mesh sphere".into(),
        ));
    }
    let mesh = u.mesh_arc().clone();
    let target = *u.target();
    let mut out = u.clone();
    let mut tracker = BlendTracker::new();
    let mut blended: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in 0..u.len() {
        let d = chordal_distance(&mesh.node_point(i), center);
        let eta = 1.0 - smoothstep((d - rho) / rho);
        if eta >= 1.0 {
            out.set_value(i, v.value(i))?;
        } else if eta <= 0.0 || u.value(i) == v.value(i) {
            // w = u there, already in place (bit-for-bit when u = v).
        } else {
            let blend: Vec<f64> = u
                .value(i)
                .iter()
                .zip(v.value(i))
                .map(|(a, b)| (1.0 - eta) * a + eta * b)
                .collect();
            tracker.observe(i, target.collar_distance(&blend));
            blended.push((i, blend));
        }
    }
    tracker.check(target.tubular_radius())?;
    for (i, blend) in blended {
        out.set_value(i, &project_to_target(&blend, &target)?)?;
    }
    Ok(out)
}

/// Measured sides of the glue energy estimate: the glued field's energy over
/// the chart ball B(2r) against the four right-hand-side terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GlueEnergyReport {
    pub r: f64,
    pub delta: f64,
    /// [w]^p over the chart ball of radius 2r.
    pub lhs: f64,
    /// [u]^p over the chart annulus r ≤ |ξ| < 2r.
    pub outer_term: f64,
    /// [v]^p over the chart ball |ξ| < r.
    pub inner_term: f64,
    /// δ^{−sp} · r · (boundary-to-bulk energies of u and v at |ξ| = r).
    pub boundary_term: f64,
    /// δ^{−σ} · r^{n−sp} · sup|v−u|^p on the boundary, σ = max(p−1, sp).
    pub sup_term: f64,
    /// lhs / (sum of the four terms); 0 when everything vanishes.
    pub fitted_constant: f64,
}

/// Chart bookkeeping for the circle: signed chart coordinate, chart weight,
/// and the wrapped angle relative to the chart center.
struct CircleChart {
    theta_c: f64,
    xi: Vec<f64>,
    chart_w: Vec<f64>,
    is_pole: Vec<bool>,
}

const ANTIPODE_ANGLE_TOL: f64 = 1e-12;

impl CircleChart {
    fn new(mesh: &SphereMesh, center: &SpherePoint) -> Self {
        let nn = mesh.node_count();
        let theta_c = center.angle();
        let mut xi = Vec::with_capacity(nn);
        let mut chart_w = Vec::with_capacity(nn);
        let mut is_pole = Vec::with_capacity(nn);
        for i in 0..nn {
            let t2 = (mesh.angle(i) - theta_c + std::f64::consts::PI)
                .rem_euclid(std::f64::consts::TAU)
                - std::f64::consts::PI;
            let x = (t2 / 2.0).tan();
            xi.push(x);
            chart_w.push(mesh.weight(i) * (x * x + 1.0) / 2.0);
            is_pole.push((t2.abs() - std::f64::consts::PI).abs() < ANTIPODE_ANGLE_TOL);
        }
        Self {
            theta_c,
            xi,
            chart_w,
            is_pole,
        }
    }

    /// Angle of the chart coordinate c, for sampling a field there.
    fn angle_of(&self, c: f64) -> f64 {
        self.theta_c + 2.0 * c.atan()
    }

    /// Gagliardo double sum of the field over the masked chart nodes with
    /// kernel |Δξ|^{−(n+sp)} and chart weights.
    fn energy(&self, vals: &Field, mask: &[usize], params: &EnergyParams) -> f64 {
        let ex = params.n() as f64 + params.s() * params.p();
        let mut total = 0.0;
        for (a, &i) in mask.iter().enumerate() {
            let mut row = 0.0;
            for (b, &j) in mask.iter().enumerate() {
                if a == b {
                    continue;
                }
                let dx = (self.xi[i] - self.xi[j]).abs();
                if dx == 0.0 {
                    continue;
                }
                let sq: f64 = vals
                    .value(i)
                    .iter()
                    .zip(vals.value(j))
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum();
                row += dist_pow(sq, params.p()) * dx.powf(-ex) * self.chart_w[j];
            }
            total += row * self.chart_w[i];
        }
        total
    }

    /// Boundary-to-bulk energy: masked nodes against the two boundary
    /// samples at chart ±r, counting measure on the boundary.
    fn boundary_energy(
        &self,
        vals: &Field,
        mask: &[usize],
        r: f64,
        params: &EnergyParams,
    ) -> Result<f64> {
        let ex = params.n() as f64 + params.s() * params.p();
        let mut total = 0.0;
        for sgn in [-1.0, 1.0] {
            let vb = vals.sample_angle(self.angle_of(sgn * r))?;
            for &i in mask {
                let dy = (self.xi[i] - sgn * r).abs();
                if dy == 0.0 {
                    continue;
                }
                let sq: f64 = vals
                    .value(i)
                    .iter()
                    .zip(&vb)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum();
                total += dist_pow(sq, params.p()) * dy.powf(-ex) * self.chart_w[i];
            }
        }
        Ok(total)
    }
}

/// Glues u (outside chart radius r from the center) to the dilated copy of
/// v (inside (1−δ)r) through a radial blend of the two boundary values, and
/// measures the glue energy estimate.
///
/// Circle meshes only: the construction works in the 1-D stereographic
/// chart based at the center, where the chart-ball boundary is the node
/// pair ±r. Energies are measured at the base order s of `params`.
pub fn luckhaus_glue(
    u: &Field,
    v: &Field,
    center: &SpherePoint,
    r: f64,
    delta: f64,
    params: &EnergyParams,
) -> Result<(Field, GlueEnergyReport)> {
    require_same_layout(u, v)?;
    if u.mesh().dim() != 1 {
        return Err(Error::DimensionMismatch(
            "the glue construction is implemented for circle meshes (n = 1)".into(),
        ));
    }
    if params.n() != 1 {
        return Err(Error::invalid(
            "glue energy parameters must have n = 1 to match the mesh",
        ));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::invalid(format!(
            "glue width δ must lie in (0, 1/4), got {delta}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "glue chart radius must be positive, got {r}"
        )));
    }
    let mesh = u.mesh_arc().clone();
    let chart = CircleChart::new(&mesh, center);
    let target = *u.target();

    // Blend profile: 1 up to a = (1−3δ/4)r, 0 beyond b = (1−δ/2)r.
    let a = (1.0 - 0.75 * delta) * r;
    let b = (1.0 - 0.5 * delta) * r;
    let eta = |d: f64| 1.0 - smoothstep((d - a) / (b - a));

    // The four boundary samples used by every blended node.
    let u_bdry = [
        u.sample_angle(chart.angle_of(-r))?,
        u.sample_angle(chart.angle_of(r))?,
    ];
    let v_bdry = [
        v.sample_angle(chart.angle_of(-r))?,
        v.sample_angle(chart.angle_of(r))?,
    ];

    let mut out = u.clone();
    let mut tracker = BlendTracker::new();
    let mut blended: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in 0..u.len() {
        let x = chart.xi[i];
        if chart.is_pole[i] || x.abs() >= r {
            continue; // w = u there, already in place
        }
        if x.abs() <= (1.0 - delta) * r {
            let val = v.sample_angle(chart.angle_of(x / (1.0 - delta)))?;
            out.set_value(i, &val)?;
        } else {
            let side = if x < 0.0 { 0 } else { 1 };
            let e = eta(x.abs());
            let blend: Vec<f64> = u_bdry[side]
                .iter()
                .zip(&v_bdry[side])
                .map(|(p, q)| (1.0 - e) * p + e * q)
                .collect();
            tracker.observe(i, target.collar_distance(&blend));
            blended.push((i, blend));
        }
    }
    tracker.check(target.tubular_radius())?;
    for (i, blend) in blended {
        out.set_value(i, &project_to_target(&blend, &target)?)?;
    }

    // Region masks by chart radius; the antipode never qualifies.
    let inner: Vec<usize> = (0..u.len()).filter(|&i| chart.xi[i].abs() < r).collect();
    let ball2: Vec<usize> = (0..u.len())
        .filter(|&i| chart.xi[i].abs() < 2.0 * r)
        .collect();
    let annulus: Vec<usize> = ball2
        .iter()
        .copied()
        .filter(|&i| chart.xi[i].abs() >= r)
        .collect();

    let sp = params.s() * params.p();
    let lhs = chart.energy(&out, &ball2, params);
    let outer_term = chart.energy(u, &annulus, params);
    let inner_term = chart.energy(v, &inner, params);
    let boundary_term = delta.powf(-sp)
        * r
        * (chart.boundary_energy(u, &annulus, r, params)?
            + chart.boundary_energy(v, &inner, r, params)?);
    let sigma = (params.p() - 1.0).max(sp);
    let sup: f64 = (0..2)
        .map(|side| {
            u_bdry[side]
                .iter()
                .zip(&v_bdry[side])
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let sup_term = delta.powf(-sigma) * r.powf(params.n() as f64 - sp) * sup.powf(params.p());
    let rhs = outer_term + inner_term + boundary_term + sup_term;
    let fitted_constant = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    let report = GlueEnergyReport {
        r,
        delta,
        lhs,
        outer_term,
        inner_term,
        boundary_term,
        sup_term,
        fitted_constant,
    };
    Ok((out, report))
}

/// Measured energy comparison of an inversion extension.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InversionReport {
    pub rho: f64,
    pub lambda: f64,
    /// Chart energy of the extension over |ξ| < λρ.
    pub energy_extended: f64,
    /// Chart energy of the original over |ξ| < ρ.
    pub energy_original: f64,
    /// Their ratio; 1 by convention when both vanish.
    pub ratio: f64,
}

/// Extends the field from the chart ball B(ρ) to B(λρ) by the inversion
/// v(ξ) = u(ρ²ξ/|ξ|²), resampled on the mesh; nodes outside the annulus
/// keep their original values. Circle meshes use the 1-D chart at the
/// south pole.
pub fn inversion_extend(
    u: &Field,
    rho: f64,
    lambda: f64,
    params: &EnergyParams,
) -> Result<(Field, InversionReport)> {
    if u.mesh().dim() != 1 {
        return Err(Error::DimensionMismatch(
            "the inversion extension is implemented for circle meshes (n = 1)".into(),
        ));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!(
            "inversion radius must be positive, got {rho}"
        )));
    }
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "inversion extension factor must be ≥ 1, got {lambda}"
        )));
    }
    let mesh = u.mesh_arc().clone();
    let chart = CircleChart::new(&mesh, &SpherePoint::south(1));
    let mut out = u.clone();
    for i in 0..u.len() {
        if chart.is_pole[i] {
            continue;
        }
        let x = chart.xi[i];
        if x.abs() > rho && x.abs() <= lambda * rho {
            let val = u.sample_angle(chart.angle_of(rho * rho / x))?;
            out.set_value(i, &val)?;
        }
    }
    let ball_big: Vec<usize> = (0..u.len())
        .filter(|&i| chart.xi[i].abs() < lambda * rho)
        .collect();
    let ball: Vec<usize> = (0..u.len())
        .filter(|&i| chart.xi[i].abs() < rho)
        .collect();
    let energy_extended = chart.energy(&out, &ball_big, params);
    let energy_original = chart.energy(u, &ball, params);
    let ratio = if energy_extended == 0.0 && energy_original == 0.0 {
        1.0
    } else {
        energy_extended / energy_original
    };
    Ok((
        out,
        InversionReport {
            rho,
            lambda,
            energy_extended,
            energy_original,
            ratio,
        },
    ))
}

/// Truncated-logarithm capacity profile around the center:
/// ζ_ℓ(x) = clamp(log(R_ℓ/d) / log(R_ℓ/ρ_ℓ), 0, 1) with R_ℓ = 2^{−ℓ} and
/// ρ_ℓ = R_ℓ², so ζ_ℓ ≡ 1 inside ρ_ℓ and ≡ 0 outside R_ℓ. Its seminorm at
/// the critical order decays in ℓ — the discrete zero-capacity witness.
pub fn capacity_cutoff(
    mesh: &Arc<SphereMesh>,
    ell: u32,
    center: &SpherePoint,
) -> Result<ScalarField> {
    if ell == 0 {
        return Err(Error::invalid("capacity level ℓ must be positive"));
    }
    if center.dim() != mesh.dim() {
        return Err(Error::DimensionMismatch(
            "capacity center must live on the mesh sphere".into(),
        ));
    }
    let big_r = 2f64.powi(-(ell as i32));
    let rho = big_r * big_r;
    let distances: Vec<f64> = (0..mesh.node_count())
        .map(|i| chordal_distance(&mesh.node_point(i), center))
        .collect();
    let inside = distances.iter().filter(|&&d| d < rho).count();
    if inside < 4 {
        return Err(Error::ResolutionTooCoarse(format!(
            "capacity level ℓ = {ell} needs ≥ 4 nodes inside the plateau radius {rho:.3e}, found {inside}"
        )));
    }
    let denom = (big_r / rho).ln();
    let values = distances
        .into_iter()
        .map(|d| {
            if d == 0.0 {
                1.0
            } else {
                ((big_r / d).ln() / denom).clamp(0.0, 1.0)
            }
        })
        .collect();
    ScalarField::new(mesh.clone(), values)
}

/// Opens the field in the chart: identity inside chart radius 2ρ, collapse
/// to the chart origin outside 3ρ, linear radial clamp between, composed
/// with the field by resampling. Far nodes all receive the value at the
/// chart origin, so the result is constant there.
pub fn opening_map(u: &Field, rho: f64) -> Result<Field> {
    if u.mesh().dim() != 1 {
        return Err(Error::DimensionMismatch(
            "the opening map is implemented for circle meshes (n = 1)".into(),
        ));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!(
            "opening radius must be positive, got {rho}"
        )));
    }
    let mesh = u.mesh_arc().clone();
    let chart = CircleChart::new(&mesh, &SpherePoint::south(1));
    let origin_value = u.sample_angle(chart.angle_of(0.0))?;
    let mut out = u.clone();
    for i in 0..u.len() {
        let collapse = chart.is_pole[i] || chart.xi[i].abs() >= 3.0 * rho;
        if collapse {
            out.set_value(i, &origin_value)?;
            continue;
        }
        let d = chart.xi[i].abs();
        if d <= 2.0 * rho {
            continue; // identity region
        }
        let clamped = 2.0 * (3.0 * rho - d) * chart.xi[i].signum();
        let val = u.sample_angle(chart.angle_of(clamped))?;
        out.set_value(i, &val)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::scalar_seminorm;
    use crate::geometry::TargetManifold;
    use crate::homotopy::{degree, winding_field};
    use crate::mesh::build_mesh;

    fn rotated_field(mesh: &Arc<SphereMesh>, rot: f64) -> Field {
        let m = mesh.clone();
        Field::from_fn(mesh.clone(), TargetManifold::sphere(2).unwrap(), |i, _| {
            let th = m.angle(i) + rot;
            vec![th.sin(), -th.cos()]
        })
        .unwrap()
    }

    #[test]
    fn cutoff_same_field_is_identity() {
        let mesh = build_mesh(1, 64).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let w = cutoff_interpolate(&u, &u, &SpherePoint::south(1), 0.4).unwrap();
        for i in 0..u.len() {
            assert_eq!(u.value(i), w.value(i));
        }
    }

    #[test]
    fn cutoff_blends_close_constants() {
        let mesh = build_mesh(1, 128).unwrap();
        let target = TargetManifold::sphere(3).unwrap();
        let cu = [1.0, 0.0, 0.0];
        let ang = 0.1f64;
        let cv = [ang.cos(), ang.sin(), 0.0];
        let u = Field::constant(mesh.clone(), target, &cu).unwrap();
        let v = Field::constant(mesh.clone(), target, &cv).unwrap();
        let center = SpherePoint::south(1);
        let w = cutoff_interpolate(&u, &v, &center, 0.3).unwrap();
        for i in 0..w.len() {
            let val = w.value(i);
            let norm: f64 = val.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            // Projected segment: stays in the great-circle arc between the
            // two constants.
            assert_eq!(val[2], 0.0);
            let phi = val[1].atan2(val[0]);
            assert!((-1e-15..=ang + 1e-15).contains(&phi));
            let d = chordal_distance(&mesh.node_point(i), &center);
            if d <= 0.3 {
                assert_eq!(val, v.value(i));
            } else if d >= 0.6 {
                assert_eq!(val, u.value(i));
            }
        }
    }

    #[test]
    fn cutoff_antipodal_constants_fail_naming_worst_node() {
        let mesh = build_mesh(1, 64).unwrap();
        let target = TargetManifold::sphere(2).unwrap();
        let u = Field::constant(mesh.clone(), target, &[0.0, 1.0]).unwrap();
        let v = Field::constant(mesh.clone(), target, &[0.0, -1.0]).unwrap();
        match cutoff_interpolate(&u, &v, &SpherePoint::south(1), 0.4) {
            Err(Error::TubularViolation { dist, radius, .. }) => {
                assert_eq!(radius, 0.5);
                assert!(dist >= 0.5, "collar excursion {dist}");
            }
            other => panic!("expected tubular violation, got {other:?}"),
        }
    }

    #[test]
    fn cutoff_rejects_mismatched_inputs() {
        let mesh = build_mesh(1, 64).unwrap();
        let other = build_mesh(1, 128).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let v = winding_field(&other, 1).unwrap();
        assert!(cutoff_interpolate(&u, &v, &SpherePoint::south(1), 0.4).is_err());
        let v = winding_field(&mesh, 1).unwrap();
        assert!(cutoff_interpolate(&u, &v, &SpherePoint::south(1), 0.0).is_err());
        assert!(cutoff_interpolate(&u, &v, &SpherePoint::south(1), 1.0).is_err());
    }

    #[test]
    fn glue_reference_measurements() {
        // Identity u against the 0.1-rotated copy at N = 512, r = 1,
        // s = 1/2, p = 2 — frozen against an independent implementation.
        let mesh = build_mesh(1, 512).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let v = rotated_field(&mesh, 0.1);
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let south = SpherePoint::south(1);

        let (w, rep) = luckhaus_glue(&u, &v, &south, 1.0, 0.1, &ps).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        assert!(close(rep.lhs, 20.31469623102548), "lhs {}", rep.lhs);
        assert!(close(rep.outer_term, 1.613208043586261));
        assert!(close(rep.inner_term, 9.908157543281117));
        assert!(close(rep.boundary_term, 88.48192932122868));
        assert!(close(rep.sup_term, 0.09991669443948487));
        assert!(close(rep.fitted_constant, 0.2029375072568693));

        // Boundary identities, node-exact: w = u outside chart radius r,
        // w = the dilate of v well inside. Mask sizes are frozen with the
        // energies.
        let chart = CircleChart::new(&mesh, &south);
        let mut outside = 0;
        let mut inner = 0;
        for i in 0..w.len() {
            let x = chart.xi[i];
            if chart.is_pole[i] || x.abs() >= 1.0 {
                assert_eq!(w.value(i), u.value(i), "node {i}");
                outside += 1;
            } else {
                inner += 1;
                if x.abs() <= 0.9 {
                    let expect = v.sample_angle(chart.angle_of(x / 0.9)).unwrap();
                    assert_eq!(w.value(i), &expect[..], "node {i}");
                }
            }
        }
        assert_eq!(inner, 257);
        assert_eq!(outside, 512 - 257);
        let in_annulus = (0..512)
            .filter(|&i| chart.xi[i].abs() >= 1.0 && chart.xi[i].abs() < 2.0)
            .count();
        assert_eq!(in_annulus, 104);

        let (_, rep2) = luckhaus_glue(&u, &v, &south, 1.0, 0.2, &ps).unwrap();
        assert!(close(rep2.lhs, 21.04968503796424));
        assert!(close(rep2.boundary_term, 44.24096466061434));
        assert!(close(rep2.sup_term, 0.04995834721974243));
        assert!(close(rep2.fitted_constant, 0.37715144044393467));
        // The fitted constant is stable across δ (within the factor-4 band).
        let ratio = rep2.fitted_constant / rep.fitted_constant;
        assert!(ratio < 4.0 && ratio > 0.25, "constant drifted by {ratio}");
    }

    #[test]
    fn glue_of_equal_constants_is_trivial() {
        // Axis-aligned constant: every blend renormalizes exactly, so all
        // measured energies vanish identically.
        let mesh = build_mesh(1, 128).unwrap();
        let target = TargetManifold::sphere(2).unwrap();
        let c = [0.0, -1.0];
        let u = Field::constant(mesh.clone(), target, &c).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let (w, rep) = luckhaus_glue(&u, &u, &SpherePoint::south(1), 1.0, 0.2, &ps).unwrap();
        for i in 0..w.len() {
            assert_eq!(w.value(i), &c[..]);
        }
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.outer_term, 0.0);
        assert_eq!(rep.inner_term, 0.0);
        assert_eq!(rep.boundary_term, 0.0);
        assert_eq!(rep.sup_term, 0.0);
        assert_eq!(rep.fitted_constant, 0.0);
    }

    #[test]
    fn glue_parameter_validation() {
        let mesh = build_mesh(1, 64).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let v = rotated_field(&mesh, 0.1);
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let south = SpherePoint::south(1);
        assert!(luckhaus_glue(&u, &v, &south, 1.0, 0.25, &ps).is_err());
        assert!(luckhaus_glue(&u, &v, &south, 1.0, 0.0, &ps).is_err());
        assert!(luckhaus_glue(&u, &v, &south, 0.0, 0.1, &ps).is_err());
        // Antipodal constants cannot be glued: the boundary blend leaves
        // the tube. Needs a mesh fine enough to put a node in the narrow
        // transition window of the profile.
        let fine = build_mesh(1, 512).unwrap();
        let target = TargetManifold::sphere(2).unwrap();
        let a = Field::constant(fine.clone(), target, &[0.0, 1.0]).unwrap();
        let b = Field::constant(fine.clone(), target, &[0.0, -1.0]).unwrap();
        assert!(matches!(
            luckhaus_glue(&a, &b, &south, 1.0, 0.1, &ps),
            Err(Error::TubularViolation { .. })
        ));
    }

    #[test]
    fn inversion_reference_ratio() {
        let mesh = build_mesh(1, 512).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let (v, rep) = inversion_extend(&u, 0.5, 2.0, &ps).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        assert!(close(rep.energy_extended, 6.0381599881896095));
        assert!(close(rep.energy_original, 3.411049494700226));
        assert!(close(rep.ratio, 1.7701765974287813));
        assert!(rep.ratio < 10.0);
        // Inside the ball nothing moved.
        let chart = CircleChart::new(&mesh, &SpherePoint::south(1));
        for i in 0..v.len() {
            if chart.xi[i].abs() <= 0.5 {
                assert_eq!(v.value(i), u.value(i));
            }
        }
    }

    #[test]
    fn inversion_fixes_ring_nodes_and_constants() {
        // Choose ρ exactly at a node's chart coordinate: that ring node is
        // in the closed ball and keeps its value bit-for-bit.
        let mesh = build_mesh(1, 512).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let k = 100usize;
        let rho = CircleChart::new(&mesh, &SpherePoint::south(1)).xi[k];
        let (v, _) = inversion_extend(&u, rho, 2.0, &ps).unwrap();
        assert_eq!(v.value(k), u.value(k));

        let target = TargetManifold::sphere(2).unwrap();
        let c = Field::constant(mesh.clone(), target, &[0.0, -1.0]).unwrap();
        let (_, rep) = inversion_extend(&c, 0.5, 2.0, &ps).unwrap();
        assert_eq!(rep.energy_extended, 0.0);
        assert_eq!(rep.energy_original, 0.0);
        assert_eq!(rep.ratio, 1.0);

        assert!(inversion_extend(&u, 0.5, 0.9, &ps).is_err());
        assert!(inversion_extend(&u, 0.0, 2.0, &ps).is_err());
    }

    #[test]
    fn capacity_profile_values() {
        let mesh = build_mesh(1, 256).unwrap();
        let south = SpherePoint::south(1);
        let z = capacity_cutoff(&mesh, 1, &south).unwrap();
        assert_eq!(z.value(0), 1.0);
        // All values in [0,1]; zero beyond R = 1/2, one inside ρ = 1/4.
        for i in 0..mesh.node_count() {
            let d = chordal_distance(&mesh.node_point(i), &south);
            let v = z.value(i);
            assert!((0.0..=1.0).contains(&v));
            if d >= 0.5 {
                assert_eq!(v, 0.0, "node {i} at distance {d}");
            }
            if d < 0.25 {
                assert_eq!(v, 1.0, "node {i} at distance {d}");
            }
        }
    }

    #[test]
    fn capacity_seminorms_match_reference() {
        let mesh = build_mesh(1, 256).unwrap();
        let south = SpherePoint::south(1);
        let ps = EnergyParams::new(1, 0.5, 0.5).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        let z1 = capacity_cutoff(&mesh, 1, &south).unwrap();
        assert!(close(scalar_seminorm(&z1, &ps).unwrap(), 3.1508372599710595));
        let z2 = capacity_cutoff(&mesh, 2, &south).unwrap();
        assert!(close(scalar_seminorm(&z2, &ps).unwrap(), 2.6787146228449195));
        // Level 3 puts a single node in the plateau at N = 256.
        assert!(matches!(
            capacity_cutoff(&mesh, 3, &south),
            Err(Error::ResolutionTooCoarse(_))
        ));
        assert!(capacity_cutoff(&mesh, 0, &south).is_err());
    }

    #[test]
    fn opening_regions() {
        let mesh = build_mesh(1, 512).unwrap();
        let u = winding_field(&mesh, 1).unwrap();
        let rho = 0.3;
        let w = opening_map(&u, rho).unwrap();
        let chart = CircleChart::new(&mesh, &SpherePoint::south(1));
        let origin = u.sample_angle(0.0).unwrap();
        for i in 0..w.len() {
            let d = chart.xi[i].abs();
            if chart.is_pole[i] || d >= 3.0 * rho {
                assert_eq!(w.value(i), &origin[..], "node {i}");
            } else if d <= 2.0 * rho {
                assert_eq!(w.value(i), u.value(i), "node {i}");
            }
        }
        // Collapsing the far field kills the winding.
        assert_eq!(degree(&u).unwrap(), 1);
        assert_eq!(degree(&w).unwrap(), 0);
    }

    #[test]
    fn opening_preserves_constants() {
        let mesh = build_mesh(1, 64).unwrap();
        let target = TargetManifold::sphere(2).unwrap();
        let c = [0.6, 0.8];
        let u = Field::constant(mesh.clone(), target, &c).unwrap();
        let w = opening_map(&u, 0.5).unwrap();
        for i in 0..w.len() {
            assert!((w.value(i)[0] - c[0]).abs() < 1e-15);
            assert!((w.value(i)[1] - c[1]).abs() < 1e-15);
        }
        assert!(opening_map(&u, 0.0).is_err());
    }
}
