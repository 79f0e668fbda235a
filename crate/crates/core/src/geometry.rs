//! Points on the unit sphere S^n ⊂ ℝ^{n+1}, the stereographic chart, and
//! round-sphere target manifolds.
//!
//! Conventions used throughout the crate:
//!
//! - The pole axis is the *last* coordinate: north pole N = e_{n+1}, south
//!   pole S = −e_{n+1}. The stereographic chart τ : ℝⁿ → Sⁿ ∖ {N} is
//!
//!   ```text
//!   τ(x) = ( 2x/(|x|²+1), (|x|²−1)/(|x|²+1) ),
//!   ```
//!
//!   so τ(0) = S and |x| → ∞ approaches N. On S¹ this means the node at
//!   angle θ (measured from the south pole) is (sin θ, −cos θ) and the chart
//!   coordinate is r = tan(θ/2).
//! - Distances between sphere points are *chordal* (ambient Euclidean), the
//!   same convention the energy kernel uses. The chart is conformal for it:
//!   |τ(a) − τ(b)|² = |a − b|² · (2/(|a|²+1)) · (2/(|b|²+1)).
//! - Targets are round unit spheres S^{M−1} ⊂ ℝ^M with nearest-point
//!   projection v ↦ v/|v| and tangential projector Π(p)w = w − ⟨w,p⟩p.

use crate::error::{Error, Result};

/// Constructor tolerance for stored unit vectors.
pub const ON_SPHERE_TOL: f64 = 1e-12;

/// How close to the north pole the chart refuses to evaluate. Chosen so the
/// chart coordinate stays below ~2/POLE_TOL ≈ 2e9, far from overflow but
/// already meaningless for interpolation.
pub const POLE_TOL: f64 = 1e-9;

/// On-manifold tolerance for *field values* (looser than the constructor
/// tolerance: values accumulate rounding through projections).
pub const VALUE_TOL: f64 = 1e-9;

/// A point on S^n, stored as a unit vector in ℝ^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `coords` onto the unit sphere. Rejects zero and non-finite
    /// input; after normalization the invariant ||v| − 1| ≤ 1e−12 holds by
    /// construction.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(format!(
                "a sphere point needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("sphere point coordinates must be finite"));
        }
        let norm = norm(&coords);
        if norm == 0.0 {
            return Err(Error::OffManifold {
                norm,
                dev: 1.0,
                tol: ON_SPHERE_TOL,
            });
        }
        let coords = coords.into_iter().map(|c| c / norm).collect::<Vec<_>>();
        Ok(SpherePoint { coords })
    }

    /// The unit coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Sphere dimension n (= ambient − 1).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// North pole e_{n+1} of S^n.
    pub fn north(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        SpherePoint { coords: c }
    }

    /// South pole −e_{n+1} of S^n.
    pub fn south(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = -1.0;
        SpherePoint { coords: c }
    }

    /// The point of S¹ at angle θ from the south pole: (sin θ, −cos θ).
    pub fn circle(theta: f64) -> Self {
        SpherePoint {
            coords: vec![theta.sin(), -theta.cos()],
        }
    }

    /// Angle from the south pole in (−π, π], inverse of [`SpherePoint::circle`].
    pub fn angle(&self) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        self.coords[0].atan2(-self.coords[1])
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Chordal (ambient Euclidean) distance between two points of the same S^n.
pub fn chordal_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    assert_eq!(
        a.coords.len(),
        b.coords.len(),
        "chordal_distance: mismatched ambient dimensions"
    );
    a.coords
        .iter()
        .zip(&b.coords)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Lifts a chart coordinate x ∈ ℝⁿ to τ(x) ∈ Sⁿ ∖ {N}.
pub fn stereo_lift(chart: &[f64]) -> Result<SpherePoint> {
    if chart.is_empty() {
        return Err(Error::invalid("stereo_lift: empty chart coordinate"));
    }
    if chart.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid(
            "stereo_lift: chart coordinates must be finite",
        ));
    }
    let q = chart.iter().map(|c| c * c).sum::<f64>();
    let denom = q + 1.0;
    let mut coords = Vec::with_capacity(chart.len() + 1);
    for &c in chart {
        coords.push(2.0 * c / denom);
    }
    coords.push((q - 1.0) / denom);
    // Renormalize: the closed form is unit up to one rounding, but the
    // stored invariant is ||v| − 1| ≤ 1e−12 and q near overflow loses digits.
    SpherePoint::new(coords)
}

/// Chart coordinate of a point of Sⁿ ∖ {N}: x ↦ (x₁,…,xₙ)/(1 − x_{n+1}).
///
/// Errors within chordal distance [`POLE_TOL`] of the north pole, where the
/// chart degenerates.
pub fn stereo_project(p: &SpherePoint) -> Result<Vec<f64>> {
    let n = p.dim();
    let last = p.coords[n];
    let dist_north = chordal_distance(p, &SpherePoint::north(n));
    if dist_north <= POLE_TOL {
        return Err(Error::AtPole {
            dist: dist_north,
            tol: POLE_TOL,
        });
    }
    let denom = 1.0 - last;
    Ok(p.coords[..n].iter().map(|c| c / denom).collect())
}

/// A round-sphere target S^{M−1} ⊂ ℝ^M with its tubular neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TargetManifold {
    ambient_dim: usize,
    tubular_radius: f64,
}

impl TargetManifold {
    /// Tubular radius used for every sphere target. For the round sphere the
    /// nearest-point projection only breaks down at the origin; 1/2 is a
    /// deliberately conservative collar so that blends drifting toward the
    /// origin fail loudly instead of silently renormalizing garbage.
    pub const SPHERE_TUBULAR_RADIUS: f64 = 0.5;

    /// The unit sphere S^{M−1} in ℝ^M (M ≥ 2).
    pub fn sphere(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::invalid(format!(
                "sphere target needs ambient dimension ≥ 2, got {ambient_dim}"
            )));
        }
        Ok(TargetManifold {
            ambient_dim,
            tubular_radius: Self::SPHERE_TUBULAR_RADIUS,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn tubular_radius(&self) -> f64 {
        self.tubular_radius
    }

    /// Distance from an ambient vector to the target *in the direction where
    /// the projection can fail*. For the sphere that is the inward side:
    /// 1 − |v| (negative outside the unit ball, where projection is always
    /// fine).
    pub fn collar_distance(&self, v: &[f64]) -> f64 {
        1.0 - norm(v)
    }
}

/// Nearest-point projection π onto the target.
///
/// For the sphere target this is v ↦ v/|v|, defined whenever v stays out of
/// the inner collar: 1 − |v| < tubular_radius. Vectors at or inside
/// |v| = 1 − tubular_radius produce a [`Error::TubularViolation`]; this error
/// is load-bearing — the cut-off constructions rely on it to detect blends
/// that pass too close to the origin.
pub fn project_to_target(v: &[f64], tgt: &TargetManifold) -> Result<Vec<f64>> {
    if v.len() != tgt.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "project_to_target: vector has dim {}, target ambient dim {}",
            v.len(),
            tgt.ambient_dim()
        )));
    }
    let dist = tgt.collar_distance(v);
    if dist >= tgt.tubular_radius() {
        return Err(Error::TubularViolation {
            node: usize::MAX,
            dist,
            radius: tgt.tubular_radius(),
        });
    }
    let nv = norm(v);
    Ok(v.iter().map(|c| c / nv).collect())
}

/// Tangential projector Π(p)w = w − ⟨w,p⟩p at a point p of the sphere target.
///
/// `p` must be on the target within 1e−9; the output is orthogonal to `p`
/// within 1e−12 of its own scale.
pub fn tangential_project(p: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if p.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "tangential_project: point dim {} vs vector dim {}",
            p.len(),
            w.len()
        )));
    }
    let np = norm(p);
    let dev = (np - 1.0).abs();
    if dev > VALUE_TOL {
        return Err(Error::OffManifold {
            norm: np,
            dev,
            tol: VALUE_TOL,
        });
    }
    let dot: f64 = p.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok(w.iter().zip(p).map(|(wi, pi)| wi - dot * pi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {a} ≈ {b} (tol {tol})");
    }

    #[test]
    fn constructor_normalizes_and_validates() {
        let p = SpherePoint::new(vec![3.0, 4.0]).unwrap();
        assert_close(p.coords()[0], 0.6, 1e-15);
        assert_close(p.coords()[1], 0.8, 1e-15);
        let nrm: f64 = p.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((nrm - 1.0).abs() <= ON_SPHERE_TOL);
        assert!(SpherePoint::new(vec![0.0, 0.0]).is_err());
        assert!(SpherePoint::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SpherePoint::new(vec![1.0]).is_err());
    }

    #[test]
    fn chart_reference_points() {
        // τ(0) is the south pole, τ(1) = (1, 0), τ(r→∞) → north.
        let s = stereo_lift(&[0.0]).unwrap();
        assert_eq!(s.coords(), &[0.0, -1.0]);
        let e = stereo_lift(&[1.0]).unwrap();
        assert_close(e.coords()[0], 1.0, 1e-15);
        assert_close(e.coords()[1], 0.0, 1e-15);
        let near_north = stereo_lift(&[1e8]).unwrap();
        assert!(near_north.coords()[1] > 1.0 - 1e-15);
    }

    #[test]
    fn chordal_examples() {
        let a = SpherePoint::circle(0.0);
        assert_eq!(chordal_distance(&a, &a), 0.0);
        // Antipodal pair has the diameter.
        let b = SpherePoint::circle(std::f64::consts::PI);
        assert_close(chordal_distance(&a, &b), 2.0, 1e-15);
        // |τ(0) − τ(1)|² = (1−0)² · (2/1) · (2/2) = 2.
        let t0 = stereo_lift(&[0.0]).unwrap();
        let t1 = stereo_lift(&[1.0]).unwrap();
        assert_close(chordal_distance(&t0, &t1), 2.0_f64.sqrt(), 1e-15);
    }

    #[test]
    fn chordal_identity_against_chart_factors() {
        // |τ(a) − τ(b)|² = (a−b)² · 2/(a²+1) · 2/(b²+1) on S¹.
        for &(a, b) in &[(0.3, 1.7), (-2.0, 0.25), (5.0, -5.0), (0.0, 0.001)] {
            let lhs = chordal_distance(&stereo_lift(&[a]).unwrap(), &stereo_lift(&[b]).unwrap());
            let rhs = ((a - b) * (a - b) * 2.0 / (a * a + 1.0) * 2.0 / (b * b + 1.0)).sqrt();
            assert_close(lhs, rhs, 1e-12);
        }
    }

    #[test]
    fn stereo_round_trip() {
        for &r in &[-10.0, -1.0, -0.01, 0.0, 0.5, 3.0, 250.0] {
            let p = stereo_lift(&[r]).unwrap();
            let back = stereo_project(&p).unwrap();
            assert!((back[0] - r).abs() <= 1e-10 * r.abs().max(1.0));
        }
        // n = 2 round trip.
        for &xy in &[[0.2, -0.7], [3.0, 4.0], [0.0, 0.0]] {
            let p = stereo_lift(&xy).unwrap();
            let back = stereo_project(&p).unwrap();
            assert!((back[0] - xy[0]).abs() <= 1e-10);
            assert!((back[1] - xy[1]).abs() <= 1e-10);
        }
    }

    #[test]
    fn stereo_project_rejects_pole() {
        let n = SpherePoint::north(1);
        assert!(matches!(stereo_project(&n), Err(Error::AtPole { .. })));
        // Just inside the guard: still rejected.
        let near = SpherePoint::new(vec![POLE_TOL / 2.0, 1.0]).unwrap();
        assert!(stereo_project(&near).is_err());
        // Far from the pole: fine.
        let s = SpherePoint::south(1);
        assert_eq!(stereo_project(&s).unwrap(), vec![0.0]);
    }

    #[test]
    fn chordal_triangle_inequality_random() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            // xorshift; plenty for test point generation
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let mk = |a: f64, b: f64, c: f64| SpherePoint::new(vec![a, b, c]).unwrap();
            let p = mk(next(), next(), next() + 1.5);
            let q = mk(next(), next(), next() + 1.5);
            let r = mk(next(), next(), next() + 1.5);
            let (pq, qr, pr) = (
                chordal_distance(&p, &q),
                chordal_distance(&q, &r),
                chordal_distance(&p, &r),
            );
            assert!(pr <= pq + qr + 1e-14);
        }
    }

    #[test]
    fn projection_examples() {
        let s2 = TargetManifold::sphere(3).unwrap();
        // Outward vectors always project.
        assert_eq!(
            project_to_target(&[2.0, 0.0, 0.0], &s2).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
        // Idempotent on the target (up to one rounding of the norm).
        let u = project_to_target(&[0.6, 0.8, 0.0], &s2).unwrap();
        let uu = project_to_target(&u, &s2).unwrap();
        for (a, b) in u.iter().zip(&uu) {
            assert_close(*a, *b, 1e-15);
        }
        // Inside the collar: 1 − 0.6 = 0.4 < 0.5 still passes…
        assert!(project_to_target(&[0.6, 0.0, 0.0], &s2).is_ok());
        // …but 1 − 0.4 = 0.6 ≥ 0.5 violates the tubular neighborhood.
        match project_to_target(&[0.4, 0.0, 0.0], &s2) {
            Err(Error::TubularViolation { dist, .. }) => assert_close(dist, 0.6, 1e-15),
            other => panic!("expected tubular violation, got {other:?}"),
        }
    }

    #[test]
    fn projection_is_radial_for_sphere() {
        // Nearest-point optimality for the sphere: projection ∥ input.
        let s2 = TargetManifold::sphere(3).unwrap();
        let v = [0.7, -1.1, 0.4];
        let p = project_to_target(&v, &s2).unwrap();
        let cross = [
            v[1] * p[2] - v[2] * p[1],
            v[2] * p[0] - v[0] * p[2],
            v[0] * p[1] - v[1] * p[0],
        ];
        for c in cross {
            assert_close(c, 0.0, 1e-15);
        }
    }

    #[test]
    fn tangential_projector_identities() {
        let p = [1.0, 0.0, 0.0];
        assert_eq!(
            tangential_project(&p, &[1.0, 0.0, 0.0]).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(
            tangential_project(&p, &[0.0, 1.0, 0.0]).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
        // Idempotence and orthogonality on a generic input.
        let w = [0.3, -2.0, 0.9];
        let pw = tangential_project(&p, &w).unwrap();
        let ppw = tangential_project(&p, &pw).unwrap();
        for (a, b) in pw.iter().zip(&ppw) {
            assert_close(*a, *b, 1e-12);
        }
        let dot: f64 = pw.iter().zip(&p).map(|(a, b)| a * b).sum();
        assert!(dot.abs() <= 1e-12);
        // Off-manifold base point is a domain error.
        assert!(tangential_project(&[0.9, 0.0, 0.0], &w).is_err());
    }

    #[test]
    fn circle_angle_round_trip() {
        for k in -3..=3 {
            let theta = 0.37 + k as f64;
            let p = SpherePoint::circle(theta);
            let wrapped = (theta + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
                - std::f64::consts::PI;
            assert_close(p.angle(), wrapped, 1e-12);
        }
    }
}
