//! Quadrature meshes on S^n and node fields over them.
//!
//! Two mesh families cover the desk-scale experiments:
//!
//! - n = 1: N angle-uniform nodes θ_k = 2πk/N with trapezoidal weights
//!   2π/N. For periodic smooth integrands the trapezoidal rule is spectrally
//!   accurate, so quadrature noise never dominates an acceptance tolerance.
//!   Node 0 sits at the south pole (the chart origin).
//! - n = 2: icosphere — a subdivided icosahedron projected to the sphere —
//!   with circumcentric (Voronoi) dual-area weights. Subdivision level L has
//!   10·4^L + 2 nodes; face orientation is outward-consistent so signed
//!   image areas can be summed for the degree.
//!
//! Balls are *chordal*: `ball_indices(c, ρ)` returns exactly the nodes with
//! |x_i − c| < ρ in the ambient metric, matching the kernel's distance.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project_to_target, SpherePoint, TargetManifold, VALUE_TOL};

const TAU: f64 = std::f64::consts::TAU;

/// Deviations below [`VALUE_TOL`] are accepted as-is; deviations in
/// [VALUE_TOL, REPROJECT_TOL) are silently renormalized on load (files store
/// finite decimal digits); anything larger is rejected as corrupt.
pub const REPROJECT_TOL: f64 = 1e-6;

/// A quadrature mesh on S^n (n ∈ {1, 2}).
#[derive(Debug)]
pub struct SphereMesh {
    n: usize,
    resolution: usize,
    /// Node coordinates, row-major N × (n+1).
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Outward-oriented triangles (n = 2 only; empty for n = 1).
    faces: Vec<[usize; 3]>,
    /// Sorted edge list for adjacency queries (n = 2 only).
    edges: Vec<(usize, usize)>,
}

impl SphereMesh {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    /// N for n = 1, subdivision level for n = 2.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.ambient_dim();
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn node_point(&self, i: usize) -> SpherePoint {
        SpherePoint::new(self.node(i).to_vec()).expect("mesh nodes are unit vectors")
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Angle of node i from the south pole (n = 1), in [0, 2π).
    pub fn angle(&self, i: usize) -> f64 {
        debug_assert_eq!(self.n, 1);
        TAU * i as f64 / self.node_count() as f64
    }

    /// True when the mesh is the angle-uniform circle (enables the
    /// offset-indexed kernel table in the energy module).
    pub fn is_uniform_circle(&self) -> bool {
        self.n == 1
    }

    /// Whether nodes i and j are joined by a mesh edge.
    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        match self.n {
            1 => {
                let nn = self.node_count();
                (i + 1) % nn == j || (j + 1) % nn == i
            }
            _ => {
                let key = (i.min(j), i.max(j));
                self.edges.binary_search(&key).is_ok()
            }
        }
    }

    /// Same discretization (two fields on equal (n, resolution) meshes are
    /// interoperable even if the `Arc`s differ).
    pub fn same_discretization(&self, other: &SphereMesh) -> bool {
        self.n == other.n && self.resolution == other.resolution
    }
}

/// Builds the mesh for S^n at the given resolution.
///
/// n = 1 requires resolution ≥ 8 (node count); n = 2 requires subdivision
/// level ≥ 1 (42 nodes). Node ordering is deterministic.
pub fn build_mesh(n: usize, resolution: usize) -> Result<Arc<SphereMesh>> {
    match n {
        1 => {
            if resolution < 8 {
                return Err(Error::invalid(format!(
                    "circle mesh needs at least 8 nodes, got {resolution}"
                )));
            }
            let nn = resolution;
            let mut nodes = Vec::with_capacity(2 * nn);
            for k in 0..nn {
                let theta = TAU * k as f64 / nn as f64;
                nodes.push(theta.sin());
                nodes.push(-theta.cos());
            }
            Ok(Arc::new(SphereMesh {
                n: 1,
                resolution,
                nodes,
                weights: vec![TAU / nn as f64; nn],
                faces: Vec::new(),
                edges: Vec::new(),
            }))
        }
        2 => {
            if resolution < 1 {
                return Err(Error::invalid(
                    "icosphere needs subdivision level ≥ 1".to_string(),
                ));
            }
            if resolution > 5 {
                return Err(Error::invalid(format!(
                    "icosphere level {resolution} exceeds the desk-scale cap of 5"
                )));
            }
            Ok(Arc::new(build_icosphere(resolution)))
        }
        _ => Err(Error::invalid(format!(
            "unsupported domain dimension n = {n} (expected 1 or 2)"
        ))),
    }
}

/// Indices of nodes strictly within chordal distance `rho` of `center`.
pub fn ball_indices(mesh: &SphereMesh, center: &SpherePoint, rho: f64) -> Result<Vec<usize>> {
    if !(rho > 0.0 && rho < 2.0) {
        return Err(Error::invalid(format!(
            "ball radius must lie in (0, 2), got {rho}"
        )));
    }
    if center.coords().len() != mesh.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ball center has ambient dim {}, mesh has {}",
            center.coords().len(),
            mesh.ambient_dim()
        )));
    }
    let c = center.coords();
    let d = mesh.ambient_dim();
    Ok((0..mesh.node_count())
        .filter(|&i| {
            let node = mesh.node(i);
            let dist2: f64 = (0..d).map(|k| (node[k] - c[k]) * (node[k] - c[k])).sum();
            dist2.sqrt() < rho
        })
        .collect())
}

/// Complement of an index set, in increasing order.
pub fn complement_indices(mesh: &SphereMesh, set: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; mesh.node_count()];
    for &i in set {
        inside[i] = true;
    }
    (0..mesh.node_count()).filter(|&i| !inside[i]).collect()
}

/// All node indices 0..N.
pub fn all_indices(mesh: &SphereMesh) -> Vec<usize> {
    (0..mesh.node_count()).collect()
}

// ---------------------------------------------------------------------------
// icosphere
// ---------------------------------------------------------------------------

fn build_icosphere(level: usize) -> SphereMesh {
    // Icosahedron vertices from golden-ratio rectangles, normalized.
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw: [[f64; 3]; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<[f64; 3]> = raw.iter().map(|v| normalize3(*v)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let [a, b, c] = *f;
            let ab = midpoint_index(&mut verts, &mut midpoint, a, b);
            let bc = midpoint_index(&mut verts, &mut midpoint, b, c);
            let ca = midpoint_index(&mut verts, &mut midpoint, c, a);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    // Orient every face outward (positive determinant).
    for f in faces.iter_mut() {
        if det3(verts[f[0]], verts[f[1]], verts[f[2]]) < 0.0 {
            f.swap(1, 2);
        }
    }

    // Circumcentric dual (Voronoi) weights: each face is split into six
    // spherical triangles by its edge midpoints and circumcenter; each vertex
    // collects the two pieces incident to it. The pieces tile the face, so
    // the weights sum to the total area 4π exactly up to rounding.
    let mut weights = vec![0.0; verts.len()];
    for f in &faces {
        let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        let o = circumcenter(a, b, c);
        let mab = normalize3(add3(a, b));
        let mbc = normalize3(add3(b, c));
        let mca = normalize3(add3(c, a));
        weights[f[0]] += spherical_area(a, mab, o) + spherical_area(a, o, mca);
        weights[f[1]] += spherical_area(b, mbc, o) + spherical_area(b, o, mab);
        weights[f[2]] += spherical_area(c, mca, o) + spherical_area(c, o, mbc);
    }

    let mut edges: Vec<(usize, usize)> = faces
        .iter()
        .flat_map(|f| {
            [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
                .into_iter()
                .map(|(i, j)| (i.min(j), i.max(j)))
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let nodes = verts.iter().flat_map(|v| v.iter().copied()).collect();
    SphereMesh {
        n: 2,
        resolution: level,
        nodes,
        weights,
        faces,
        edges,
    }
}

fn midpoint_index(
    verts: &mut Vec<[f64; 3]>,
    cache: &mut HashMap<(usize, usize), usize>,
    i: usize,
    j: usize,
) -> usize {
    let key = (i.min(j), i.max(j));
    *cache.entry(key).or_insert_with(|| {
        verts.push(normalize3(add3(verts[i], verts[j])));
        verts.len() - 1
    })
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Circumcenter of a spherical triangle, on the same side as the triangle.
fn circumcenter(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ac = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let cross = [
        ab[1] * ac[2] - ab[2] * ac[1],
        ab[2] * ac[0] - ab[0] * ac[2],
        ab[0] * ac[1] - ab[1] * ac[0],
    ];
    let o = normalize3(cross);
    let centroid = add3(add3(a, b), c);
    if o[0] * centroid[0] + o[1] * centroid[1] + o[2] * centroid[2] < 0.0 {
        [-o[0], -o[1], -o[2]]
    } else {
        o
    }
}

/// Unsigned area (solid angle) of the spherical triangle a, b, c via the
/// van Oosterom–Strackee half-angle formula.
fn spherical_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let num = det3(a, b, c).abs();
    let den = 1.0
        + (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
        + (b[0] * c[0] + b[1] * c[1] + b[2] * c[2])
        + (a[0] * c[0] + a[1] * c[1] + a[2] * c[2]);
    2.0 * num.atan2(den)
}

/// Signed area of the image triangle (a, b, c) on the target S²; positive for
/// outward (counterclockwise seen from outside) orientation.
pub(crate) fn signed_spherical_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let den = 1.0
        + (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
        + (b[0] * c[0] + b[1] * c[1] + b[2] * c[2])
        + (a[0] * c[0] + a[1] * c[1] + a[2] * c[2]);
    2.0 * det.atan2(den)
}

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

/// A manifold-valued node field: one point of the target per mesh node.
///
/// The on-manifold invariant (`||v| − 1| ≤ 1e−9` for sphere targets) is
/// validated on every write path.
#[derive(Debug, Clone)]
pub struct Field {
    mesh: Arc<SphereMesh>,
    target: TargetManifold,
    /// Row-major N × M values.
    values: Vec<f64>,
}

impl Field {
    /// Wraps a flat row-major value buffer, validating the on-manifold
    /// invariant at every node.
    pub fn from_values(
        mesh: Arc<SphereMesh>,
        target: TargetManifold,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = target.ambient_dim();
        if values.len() != mesh.node_count() * m {
            return Err(Error::DimensionMismatch(format!(
                "field needs {} × {} values, got {}",
                mesh.node_count(),
                m,
                values.len()
            )));
        }
        let field = Field {
            mesh,
            target,
            values,
        };
        field.validate()?;
        Ok(field)
    }

    /// Builds a field by evaluating `f` at every node (index, coordinates).
    /// The returned vectors are validated, not projected.
    pub fn from_fn(
        mesh: Arc<SphereMesh>,
        target: TargetManifold,
        mut f: impl FnMut(usize, &[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let m = target.ambient_dim();
        let mut values = Vec::with_capacity(mesh.node_count() * m);
        for i in 0..mesh.node_count() {
            let v = f(i, mesh.node(i));
            if v.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "from_fn returned {} components at node {i}, target ambient dim is {m}",
                    v.len()
                )));
            }
            values.extend_from_slice(&v);
        }
        Field::from_values(mesh, target, values)
    }

    /// The constant field at `value` (must be on the target).
    pub fn constant(mesh: Arc<SphereMesh>, target: TargetManifold, value: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(mesh.node_count() * value.len());
        for _ in 0..mesh.node_count() {
            values.extend_from_slice(value);
        }
        Field::from_values(mesh, target, values)
    }

    fn validate(&self) -> Result<()> {
        let m = self.dim();
        for i in 0..self.len() {
            let v = self.value(i);
            let nrm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            let dev = (nrm - 1.0).abs();
            if !(dev <= VALUE_TOL) {
                return Err(Error::OffManifold {
                    norm: nrm,
                    dev,
                    tol: VALUE_TOL,
                });
            }
        }
        let _ = m;
        Ok(())
    }

    pub fn mesh(&self) -> &SphereMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<SphereMesh> {
        &self.mesh
    }

    pub fn target(&self) -> &TargetManifold {
        &self.target
    }

    /// Target ambient dimension M.
    pub fn dim(&self) -> usize {
        self.target.ambient_dim()
    }

    /// Node count.
    pub fn len(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn is_empty(&self) -> bool {
        false // a mesh always has nodes
    }

    pub fn value(&self, i: usize) -> &[f64] {
        let m = self.dim();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Overwrites the value at node i, validating the invariant.
    pub fn set_value(&mut self, i: usize, v: &[f64]) -> Result<()> {
        let m = self.dim();
        if v.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "set_value: {} components, expected {m}",
                v.len()
            )));
        }
        let nrm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let dev = (nrm - 1.0).abs();
        if !(dev <= VALUE_TOL) {
            return Err(Error::OffManifold {
                norm: nrm,
                dev,
                tol: VALUE_TOL,
            });
        }
        self.values[i * m..(i + 1) * m].copy_from_slice(v);
        Ok(())
    }

    /// Samples the field at angle `phi` (n = 1) by periodic linear
    /// interpolation between the two surrounding nodes, projected back to
    /// the target.
    pub fn sample_angle(&self, phi: f64) -> Result<Vec<f64>> {
        assert_eq!(self.mesh.dim(), 1, "sample_angle is for circle meshes");
        let nn = self.len();
        let h = TAU / nn as f64;
        let x = phi.rem_euclid(TAU) / h;
        let i0 = (x.floor() as usize) % nn;
        let frac = x - x.floor();
        let i1 = (i0 + 1) % nn;
        let (a, b) = (self.value(i0), self.value(i1));
        let blended: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(ai, bi)| (1.0 - frac) * ai + frac * bi)
            .collect();
        project_to_target(&blended, &self.target)
    }

    /// Samples the field at an arbitrary domain point, projected to the
    /// target. n = 1 interpolates in angle; n = 2 interpolates on the
    /// containing face with conic barycentric weights.
    pub fn sample_point(&self, p: &SpherePoint) -> Result<Vec<f64>> {
        match self.mesh.dim() {
            1 => self.sample_angle(p.angle()),
            2 => self.sample_on_face(p),
            n => Err(Error::invalid(format!("sampling unsupported for n = {n}"))),
        }
    }

    /// Samples at the chart coordinate x (the point τ(x)).
    pub fn sample_chart(&self, chart: &[f64]) -> Result<Vec<f64>> {
        let p = crate::geometry::stereo_lift(chart)?;
        self.sample_point(&p)
    }

    fn sample_on_face(&self, p: &SpherePoint) -> Result<Vec<f64>> {
        let c = p.coords();
        let mesh = &self.mesh;
        let mut best: Option<([f64; 3], [usize; 3], f64)> = None;
        for f in mesh.faces() {
            let (a, b, cc) = (mesh.node(f[0]), mesh.node(f[1]), mesh.node(f[2]));
            if let Some(l) = conic_barycentric(a, b, cc, c) {
                let min = l[0].min(l[1]).min(l[2]);
                if best.as_ref().map_or(true, |(_, _, m)| min > *m) {
                    best = Some((l, *f, min));
                }
            }
        }
        let (l, f, min) = best.ok_or_else(|| {
            Error::invalid("sample point not covered by any mesh face".to_string())
        })?;
        if min < -1e-9 {
            return Err(Error::invalid(
                "sample point escapes the mesh triangulation".to_string(),
            ));
        }
        let m = self.dim();
        let mut v = vec![0.0; m];
        let total = l[0] + l[1] + l[2];
        for (k, &ni) in f.iter().enumerate() {
            let val = self.value(ni);
            for d in 0..m {
                v[d] += l[k] / total * val[d];
            }
        }
        project_to_target(&v, &self.target)
    }

    // -- JSON I/O -----------------------------------------------------------

    pub fn to_json(&self) -> String {
        let m = self.dim();
        let rows: Vec<Vec<f64>> = (0..self.len()).map(|i| self.value(i).to_vec()).collect();
        let file = FieldFile {
            n: self.mesh.dim(),
            resolution: self.mesh.resolution(),
            target_dim: m,
            values: rows,
        };
        serde_json::to_string_pretty(&file).expect("field serialization cannot fail")
    }

    /// Parses a field file, rebuilding its canonical mesh from
    /// (n, resolution). Values with on-manifold deviation below
    /// [`REPROJECT_TOL`] are renormalized; larger deviations reject the file.
    pub fn from_json(text: &str) -> Result<Field> {
        let file: FieldFile = serde_json::from_str(text)?;
        let mesh = build_mesh(file.n, file.resolution)?;
        let target = TargetManifold::sphere(file.target_dim)?;
        if file.values.len() != mesh.node_count() {
            return Err(Error::InvalidFieldFile(format!(
                "{} value rows for a {}-node mesh",
                file.values.len(),
                mesh.node_count()
            )));
        }
        let mut values = Vec::with_capacity(mesh.node_count() * file.target_dim);
        for (i, row) in file.values.iter().enumerate() {
            if row.len() != file.target_dim {
                return Err(Error::InvalidFieldFile(format!(
                    "row {i} has {} components, target_dim is {}",
                    row.len(),
                    file.target_dim
                )));
            }
            let nrm: f64 = row.iter().map(|c| c * c).sum::<f64>().sqrt();
            let dev = (nrm - 1.0).abs();
            if dev >= REPROJECT_TOL || !nrm.is_finite() {
                return Err(Error::InvalidFieldFile(format!(
                    "row {i} is off the target by {dev:.3e} (limit {REPROJECT_TOL:.1e})"
                )));
            }
            if dev <= VALUE_TOL {
                values.extend_from_slice(row);
            } else {
                values.extend(row.iter().map(|c| c / nrm));
            }
        }
        Field::from_values(mesh, target, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Field> {
        let text = std::fs::read_to_string(path)?;
        Field::from_json(&text)
    }
}

/// Solves p = αa + βb + γc for the conic barycentric coordinates of the ray
/// through p against the planar triangle (a, b, c). Returns None for a
/// degenerate (near-coplanar-with-origin) triangle.
fn conic_barycentric(a: &[f64], b: &[f64], c: &[f64], p: &[f64]) -> Option<[f64; 3]> {
    let det = det3(
        [a[0], a[1], a[2]],
        [b[0], b[1], b[2]],
        [c[0], c[1], c[2]],
    );
    if det.abs() < 1e-12 {
        return None;
    }
    let da = det3(
        [p[0], p[1], p[2]],
        [b[0], b[1], b[2]],
        [c[0], c[1], c[2]],
    );
    let db = det3(
        [a[0], a[1], a[2]],
        [p[0], p[1], p[2]],
        [c[0], c[1], c[2]],
    );
    let dc = det3(
        [a[0], a[1], a[2]],
        [b[0], b[1], b[2]],
        [p[0], p[1], p[2]],
    );
    Some([da / det, db / det, dc / det])
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    n: usize,
    resolution: usize,
    target_dim: usize,
    values: Vec<Vec<f64>>,
}

/// A real-valued node field (cut-off profiles and similar weights).
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<SphereMesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<SphereMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} scalar values for a {}-node mesh",
                values.len(),
                mesh.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scalar field values must be finite"));
        }
        Ok(ScalarField { mesh, values })
    }

    pub fn mesh(&self) -> &SphereMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<SphereMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
}
