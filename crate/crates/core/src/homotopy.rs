//! Discrete homotopy invariants for sphere-to-sphere fields.
//!
//! The degree (winding number for S¹ → S¹, Brouwer degree for S² → S²) is
//! the integer tracked along minimization to audit that descent stays in a
//! homotopy class. The computation needs consecutive values to stay away
//! from antipodal: a chordal jump of 2 makes the local angle/area increment
//! ambiguous, and the field is then too coarse for its variation.

use crate::energy::{seminorm, EnergyParams};
use crate::error::{Error, Result};
use crate::mesh::{signed_spherical_area, Field, SphereMesh};
use std::sync::Arc;

const TAU: f64 = std::f64::consts::TAU;

/// Chordal gap at which a consecutive pair counts as antipodal.
const ANTIPODAL_GAP: f64 = 2.0 - 1e-9;

fn check_gap(u: &Field, i: usize, j: usize) -> Result<()> {
    let (a, b) = (u.value(i), u.value(j));
    let gap: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    if gap >= ANTIPODAL_GAP {
        return Err(Error::IllConditionedDegree { i, j, gap });
    }
    Ok(())
}

/// Integer degree of a sphere-to-sphere field (target dimension must match
/// the domain: M = n + 1).
///
/// n = 1 sums signed angle increments between consecutive node values and
/// divides by 2π; n = 2 sums signed spherical areas of the image triangles
/// of the mesh faces and divides by 4π. Both are exact integers up to
/// rounding for fields passing the antipodal-gap precondition.
pub fn degree(u: &Field) -> Result<i64> {
    let n = u.mesh().dim();
    if u.dim() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "degree needs a S^{n} → S^{n} field; target ambient dim is {}",
            u.dim()
        )));
    }
    match n {
        1 => {
            let nn = u.len();
            let mut total = 0.0;
            for i in 0..nn {
                let j = (i + 1) % nn;
                check_gap(u, i, j)?;
                let (a, b) = (u.value(i), u.value(j));
                total += (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
            }
            Ok((total / TAU).round() as i64)
        }
        _ => {
            let mut total = 0.0;
            for f in u.mesh().faces() {
                check_gap(u, f[0], f[1])?;
                check_gap(u, f[1], f[2])?;
                check_gap(u, f[2], f[0])?;
                total += signed_spherical_area(u.value(f[0]), u.value(f[1]), u.value(f[2]));
            }
            Ok((total / (2.0 * TAU)).round() as i64)
        }
    }
}

/// Whether the field's critical-order seminorm is below `eps` — the discrete
/// stand-in for "small energy implies homotopically trivial".
pub fn is_energy_trivial(u: &Field, params: &EnergyParams, eps: f64) -> Result<bool> {
    Ok(seminorm(u, &params.at_base())? < eps)
}

/// The winding map θ ↦ kθ on a circle mesh (the standard degree-k
/// representative used to seed experiments).
pub fn winding_field(mesh: &Arc<SphereMesh>, k: i64) -> Result<Field> {
    if mesh.dim() != 1 {
        return Err(Error::invalid("winding fields require a circle mesh"));
    }
    let target = crate::geometry::TargetManifold::sphere(2)?;
    Field::from_fn(mesh.clone(), target, |i, _| {
        let th = k as f64 * mesh.angle(i);
        vec![th.sin(), -th.cos()]
    })
}
