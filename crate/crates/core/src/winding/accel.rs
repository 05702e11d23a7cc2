//! Hierarchical winding-number evaluation with far-field expansions.
//!
//! Each node stores the sum of its triangles' area-weighted normals (a dipole
//! moment), their area-weighted centroid and the first two area moments. Far
//! from the node, its solid angle is the Taylor expansion of the kernel
//! `(x - q) / |x - q|^3` about the centroid, truncated at the requested order;
//! the leading term is `dipole . (c - q) / |c - q|^3`.

use nalgebra::Matrix3;
use rayon::prelude::*;

use super::{solid_angle_triangle, WindingValue, FOUR_PI, NEAR_SURFACE_FRACTION};
use crate::bvh::{TriangleBvh, DEFAULT_LEAF_SIZE};
use crate::error::{Error, Result};
use crate::geom::{triangle_cross, Vec3};
use crate::mesh::TriMesh;

pub const DEFAULT_BETA: f64 = 2.0;

/// Truncation order of the per-node Taylor expansion of the solid-angle kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, clap::ValueEnum)]
pub enum FarFieldOrder {
    /// Area-weighted normal only.
    Dipole,
    /// Adds the first-moment term.
    First,
    /// Adds the second-moment term.
    #[default]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingQueryParams {
    /// A node is approximated when `|q - centroid| > beta * radius`.
    pub beta: f64,
    /// Evaluate admissible nodes that hold at most one leaf's worth of
    /// triangles exactly instead of by their far field.
    pub exact_fallback: bool,
    pub order: FarFieldOrder,
}

impl Default for WindingQueryParams {
    fn default() -> Self {
        WindingQueryParams {
            beta: DEFAULT_BETA,
            exact_fallback: false,
            order: FarFieldOrder::default(),
        }
    }
}

impl WindingQueryParams {
    pub fn new(beta: f64, exact_fallback: bool) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        Ok(WindingQueryParams {
            beta,
            exact_fallback,
            ..Default::default()
        })
    }

    pub fn with_order(mut self, order: FarFieldOrder) -> Self {
        self.order = order;
        self
    }

    /// Parameters that never take the far-field branch.
    pub fn exact() -> Self {
        WindingQueryParams {
            beta: f64::INFINITY,
            exact_fallback: true,
            order: FarFieldOrder::default(),
        }
    }
}

/// Expansion data of one node about its area-weighted centroid `c`.
#[derive(Debug, Clone, Copy)]
struct FarField {
    /// `sum A n`
    dipole: Vec3,
    centroid: Vec3,
    radius: f64,
    /// `first[(j, i)] = sum A n_i (x - c)_j`, integrated over each triangle
    first: Matrix3<f64>,
    /// `second[i][(j, k)] = sum A n_i (x - c)_j (x - c)_k`, integrated
    second: [Matrix3<f64>; 3],
}

impl FarField {
    fn zero() -> Self {
        FarField {
            dipole: Vec3::zeros(),
            centroid: Vec3::zeros(),
            radius: 0.0,
            first: Matrix3::zeros(),
            second: [Matrix3::zeros(); 3],
        }
    }

    /// Solid angle of the node seen from `q`, with `r = c - q`.
    #[inline]
    fn eval(&self, r: &Vec3, dist2: f64, order: FarFieldOrder) -> f64 {
        let inv = 1.0 / dist2.sqrt();
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let mut omega = self.dipole.dot(r) * inv3;
        if order >= FarFieldOrder::First {
            let inv5 = inv3 * inv2;
            omega += self.first.trace() * inv3 - 3.0 * r.dot(&(self.first * r)) * inv5;
            if order >= FarFieldOrder::Second {
                let inv7 = inv5 * inv2;
                let mut lin = 0.0;
                let mut tr = 0.0;
                let mut cubic = 0.0;
                for i in 0..3 {
                    let cr = self.second[i] * r;
                    lin += cr[i];
                    tr += r[i] * self.second[i].trace();
                    cubic += r[i] * r.dot(&cr);
                }
                omega += 0.5 * (-3.0 * (2.0 * lin + tr) * inv5 + 15.0 * cubic * inv7);
            }
        }
        omega
    }
}

/// Triangle hierarchy with per-node far-field moments.
#[derive(Debug, Clone)]
pub struct WindingAccel {
    bvh: TriangleBvh,
    far: Vec<FarField>,
    diagonal: f64,
}

impl WindingAccel {
    pub fn build(mesh: &TriMesh, leaf_size: usize) -> Result<Self> {
        let bvh = TriangleBvh::build(mesh, leaf_size)?;
        let tris = bvh.triangles();
        let far: Vec<FarField> = bvh
            .nodes()
            .par_iter()
            .map(|node| {
                let mut ff = FarField::zero();
                let mut area = 0.0;
                let mut moment = Vec3::zeros();
                for [a, b, c] in &tris[node.range()] {
                    let vector_area = triangle_cross(a, b, c) * 0.5;
                    let ar = vector_area.norm();
                    ff.dipole += vector_area;
                    area += ar;
                    moment += (a + b + c) * (ar / 3.0);
                }
                ff.centroid = if area > 0.0 {
                    moment / area
                } else {
                    node.bbox.center()
                };
                ff.radius = 0.5 * node.bbox.diagonal();
                let c0 = ff.centroid;
                for [a, b, c] in &tris[node.range()] {
                    let vector_area = triangle_cross(a, b, c) * 0.5;
                    let d = [a - c0, b - c0, c - c0];
                    let s = d[0] + d[1] + d[2];
                    // integral of (x - c) over the triangle is A * mean(d)
                    ff.first += (s / 3.0) * vector_area.transpose();
                    // integral of (x - c)(x - c)^T is A/12 (sum d d^T + s s^T)
                    let q = d[0] * d[0].transpose()
                        + d[1] * d[1].transpose()
                        + d[2] * d[2].transpose()
                        + s * s.transpose();
                    for i in 0..3 {
                        ff.second[i] += q * (vector_area[i] / 12.0);
                    }
                }
                ff
            })
            .collect();
        let diagonal = bvh.root().bbox.diagonal();
        Ok(WindingAccel { bvh, far, diagonal })
    }

    pub fn with_default_leaf(mesh: &TriMesh) -> Result<Self> {
        Self::build(mesh, DEFAULT_LEAF_SIZE)
    }

    pub fn bvh(&self) -> &TriangleBvh {
        &self.bvh
    }

    /// Sum of area-weighted unit normals below node `i`.
    pub fn node_dipole(&self, i: usize) -> Vec3 {
        self.far[i].dipole
    }

    pub fn node_centroid(&self, i: usize) -> Vec3 {
        self.far[i].centroid
    }

    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub fn winding_fast(&self, q: &Vec3, params: &WindingQueryParams) -> f64 {
        let nodes = self.bvh.nodes();
        let tris = self.bvh.triangles();
        let mut sum = 0.0;
        let mut stack: [u32; 96] = [0; 96];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let i = stack[top] as usize;
            let node = &nodes[i];
            let ff = &self.far[i];
            let r = ff.centroid - q;
            let dist2 = r.norm_squared();
            let admissible = dist2 > (params.beta * ff.radius).powi(2);
            let small = params.exact_fallback && (node.count as usize) <= self.bvh.leaf_size();
            if admissible && !small {
                sum += ff.eval(&r, dist2, params.order);
                continue;
            }
            match node.children() {
                None => {
                    for [a, b, c] in &tris[node.range()] {
                        sum += solid_angle_triangle(q, a, b, c);
                    }
                }
                Some((l, r)) => {
                    stack[top] = r as u32;
                    stack[top + 1] = l as u32;
                    top += 2;
                }
            }
        }
        sum / FOUR_PI
    }

    /// Fast winding number with a near-surface flag from a bounded closest-point query.
    pub fn winding_fast_flagged(&self, q: &Vec3, params: &WindingQueryParams) -> WindingValue {
        let tol = NEAR_SURFACE_FRACTION * self.diagonal;
        let near = self.bvh.closest_point(q, tol * tol);
        WindingValue {
            value: self.winding_fast(q, params),
            near_surface: near.is_some_and(|h| h.distance_squared < tol * tol),
            degenerate: near.is_some_and(|h| h.distance_squared == 0.0),
        }
    }

    /// Evaluates many queries in parallel; output order matches input order.
    pub fn winding_batch(&self, queries: &[Vec3], params: &WindingQueryParams) -> Vec<f64> {
        queries
            .par_iter()
            .with_min_len(256)
            .map(|q| self.winding_fast(q, params))
            .collect()
    }
}

/// Free-function form of [`WindingAccel::build`].
pub fn build_accel(mesh: &TriMesh, leaf_size: usize) -> Result<WindingAccel> {
    WindingAccel::build(mesh, leaf_size)
}
