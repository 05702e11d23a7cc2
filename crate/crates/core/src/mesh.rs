//! Triangle meshes and point clouds.
//!
//! Both types check their invariants on construction and are immutable
//! afterwards; accessors hand out slices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{triangle_area, Aabb, Vec3};

/// Which coordinate frame a mesh lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Task,
    Canonical,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Task => "task",
            Frame::Canonical => "canonical",
        }
    }

    pub fn parse(s: &str) -> Option<Frame> {
        match s {
            "task" => Some(Frame::Task),
            "canonical" => Some(Frame::Canonical),
            _ => None,
        }
    }
}

/// Indexed triangle surface with optional per-vertex canonical labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    frame: Frame,
    nocs_labels: Option<Vec<Vec3>>,
}

fn in_unit_cube(p: &Vec3) -> bool {
    p.iter().all(|c| (0.0..=1.0).contains(c))
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        Self::with_labels(vertices, triangles, Frame::Task, None)
    }

    pub fn with_labels(
        vertices: Vec<Vec3>,
        triangles: Vec<[u32; 3]>,
        frame: Frame,
        nocs_labels: Option<Vec<Vec3>>,
    ) -> Result<Self> {
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i as usize >= n {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references vertex {i}, but the mesh has {n} vertices"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} repeats a vertex index: {tri:?}"
                )));
            }
        }
        if let Some(labels) = &nocs_labels {
            if labels.len() != n {
                return Err(Error::InvalidMesh(format!(
                    "{} nocs labels for {n} vertices",
                    labels.len()
                )));
            }
            if let Some(i) = labels.iter().position(|l| !in_unit_cube(l)) {
                return Err(Error::InvalidMesh(format!(
                    "nocs label of vertex {i} lies outside [0,1]^3: {:?}",
                    labels[i].as_slice()
                )));
            }
        }
        Ok(TriMesh {
            vertices,
            triangles,
            frame,
            nocs_labels,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn nocs_labels(&self) -> Option<&[Vec3]> {
        self.nocs_labels.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    #[inline]
    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        triangle_area(&a, &b, &c)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    /// Replaces (or drops) the per-vertex labels, re-checking the invariants.
    pub fn with_nocs_labels(self, labels: Option<Vec<Vec3>>) -> Result<Self> {
        TriMesh::with_labels(self.vertices, self.triangles, self.frame, labels)
    }

    /// Applies `f` to every vertex position. Connectivity and labels are kept.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
            frame: self.frame,
            nocs_labels: self.nocs_labels.clone(),
        }
    }

    /// Same surface with every triangle's orientation reversed.
    pub fn flipped(&self) -> TriMesh {
        TriMesh {
            vertices: self.vertices.clone(),
            triangles: self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect(),
            frame: self.frame,
            nocs_labels: self.nocs_labels.clone(),
        }
    }

    /// Keeps the triangles for which `keep` returns true, then drops unreferenced vertices.
    pub fn filter_triangles(&self, mut keep: impl FnMut(usize) -> bool) -> TriMesh {
        let kept: Vec<[u32; 3]> = (0..self.triangles.len())
            .filter(|&t| keep(t))
            .map(|t| self.triangles[t])
            .collect();
        self.compact(kept)
    }

    fn compact(&self, triangles: Vec<[u32; 3]>) -> TriMesh {
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut labels = self.nocs_labels.as_ref().map(|_| Vec::new());
        let mut out = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let mut nt = [0u32; 3];
            for (k, &v) in tri.iter().enumerate() {
                let v = v as usize;
                if remap[v] == u32::MAX {
                    remap[v] = vertices.len() as u32;
                    vertices.push(self.vertices[v]);
                    if let (Some(dst), Some(src)) = (labels.as_mut(), self.nocs_labels.as_ref()) {
                        dst.push(src[v]);
                    }
                }
                nt[k] = remap[v];
            }
            out.push(nt);
        }
        TriMesh {
            vertices,
            triangles: out,
            frame: self.frame,
            nocs_labels: labels,
        }
    }

    /// Concatenates two meshes; labels survive only if both carry them.
    pub fn concat(&self, other: &TriMesh) -> TriMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
        let nocs_labels = match (&self.nocs_labels, &other.nocs_labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b.iter()).copied().collect()),
            _ => None,
        };
        TriMesh {
            vertices,
            triangles,
            frame: self.frame,
            nocs_labels,
        }
    }
}

/// Per-point feature vectors of uniform width, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureChannels {
    dim: usize,
    data: Vec<f32>,
}

impl FeatureChannels {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 && !data.is_empty() {
            return Err(Error::InvalidCloud("zero-width features with data".into()));
        }
        if dim > 0 && data.len() % dim != 0 {
            return Err(Error::InvalidCloud(format!(
                "feature buffer of length {} is not a multiple of width {dim}",
                data.len()
            )));
        }
        Ok(FeatureChannels { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// Point set with optional color, canonical-coordinate, confidence and feature channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Vec3>,
    colors: Option<Vec<[f32; 3]>>,
    nocs: Option<Vec<Vec3>>,
    confidence: Option<Vec<[f32; 3]>>,
    features: Option<FeatureChannels>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            ..Default::default()
        }
    }

    pub fn with_colors(mut self, colors: Vec<[f32; 3]>) -> Result<Self> {
        self.check_len("colors", colors.len())?;
        if colors.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidCloud("colors must lie in [0,1]".into()));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn with_nocs(mut self, nocs: Vec<Vec3>) -> Result<Self> {
        self.check_len("nocs", nocs.len())?;
        if let Some(i) = nocs.iter().position(|l| !in_unit_cube(l)) {
            return Err(Error::InvalidCloud(format!(
                "nocs of point {i} lies outside [0,1]^3"
            )));
        }
        self.nocs = Some(nocs);
        Ok(self)
    }

    pub fn with_confidence(mut self, confidence: Vec<[f32; 3]>) -> Result<Self> {
        self.check_len("confidence", confidence.len())?;
        if confidence.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidCloud("confidences must lie in [0,1]".into()));
        }
        self.confidence = Some(confidence);
        Ok(self)
    }

    pub fn with_features(mut self, features: FeatureChannels) -> Result<Self> {
        if features.dim() > 0 {
            self.check_len("features", features.len())?;
        }
        self.features = Some(features);
        Ok(self)
    }

    fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.points.len() {
            return Err(Error::InvalidCloud(format!(
                "{what} channel has {len} entries for {} points",
                self.points.len()
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[f32; 3]]> {
        self.colors.as_deref()
    }

    pub fn nocs(&self) -> Option<&[Vec3]> {
        self.nocs.as_deref()
    }

    pub fn confidence(&self) -> Option<&[[f32; 3]]> {
        self.confidence.as_deref()
    }

    pub fn features(&self) -> Option<&FeatureChannels> {
        self.features.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reorders every channel by `order` (a permutation of `0..len`).
    pub fn permuted(&self, order: &[usize]) -> PointCloud {
        let pick3 = |v: &Vec<Vec3>| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let pickf = |v: &Vec<[f32; 3]>| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        PointCloud {
            points: pick3(&self.points),
            colors: self.colors.as_ref().map(pickf),
            nocs: self.nocs.as_ref().map(pick3),
            confidence: self.confidence.as_ref().map(pickf),
            features: self.features.as_ref().map(|f| FeatureChannels {
                dim: f.dim,
                data: order.iter().flat_map(|&i| f.row(i).iter().copied()).collect(),
            }),
        }
    }
}

/// Summary of mesh health. Never mutates or rejects the mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub degenerate_triangle_count: usize,
    pub duplicate_vertex_count: usize,
    pub is_watertight: bool,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
}

pub const DEFAULT_AREA_EPSILON: f64 = 1e-10;

pub fn validate(mesh: &TriMesh, area_epsilon: f64) -> ValidationReport {
    let degenerate_triangle_count = (0..mesh.triangle_count())
        .filter(|&t| mesh.triangle_area(t) < area_epsilon)
        .count();

    let mut seen: HashMap<[u64; 3], usize> = HashMap::new();
    let mut duplicate_vertex_count = 0;
    for v in mesh.vertices() {
        // +0.0 so that -0.0 and 0.0 hash alike
        let key = [(v.x + 0.0).to_bits(), (v.y + 0.0).to_bits(), (v.z + 0.0).to_bits()];
        let e = seen.entry(key).or_insert(0);
        if *e > 0 {
            duplicate_vertex_count += 1;
        }
        *e += 1;
    }

    let (bbox_min, bbox_max) = if mesh.vertex_count() == 0 {
        ([0.0; 3], [0.0; 3])
    } else {
        let b = mesh.bbox();
        ([b.min.x, b.min.y, b.min.z], [b.max.x, b.max.y, b.max.z])
    };

    ValidationReport {
        degenerate_triangle_count,
        duplicate_vertex_count,
        is_watertight: is_watertight(mesh),
        bbox_min,
        bbox_max,
    }
}

/// Counts of directed half-edges per undirected edge.
pub(crate) fn edge_incidence(mesh: &TriMesh) -> HashMap<(u32, u32), (u32, u32)> {
    let mut edges: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for tri in mesh.triangles() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    edges
}

/// True iff every edge is used exactly twice, once in each direction.
pub fn is_watertight(mesh: &TriMesh) -> bool {
    !mesh.is_empty()
        && edge_incidence(mesh)
            .values()
            .all(|&(fwd, bwd)| fwd == 1 && bwd == 1)
}

/// Number of closed loops formed by edges used by exactly one triangle.
pub fn boundary_loop_count(mesh: &TriMesh) -> usize {
    let boundary: Vec<(u32, u32)> = edge_incidence(mesh)
        .into_iter()
        .filter(|(_, (f, b))| f + b == 1)
        .map(|(e, _)| e)
        .collect();
    if boundary.is_empty() {
        return 0;
    }
    // union-find over boundary vertices
    let mut parent: HashMap<u32, u32> = HashMap::new();
    fn find(parent: &mut HashMap<u32, u32>, x: u32) -> u32 {
        let p = *parent.entry(x).or_insert(x);
        if p == x {
            x
        } else {
            let r = find(parent, p);
            parent.insert(x, r);
            r
        }
    }
    for &(a, b) in &boundary {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let keys: Vec<u32> = parent.keys().copied().collect();
    let mut roots: Vec<u32> = keys.into_iter().map(|k| find(&mut parent, k)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}
