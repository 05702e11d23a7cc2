//! Bounding-volume hierarchy over the triangles of a mesh.
//!
//! Binary tree built by median split along the longest axis of each node's
//! box. Triangles are stored in leaf order so that every node covers a
//! contiguous range.

use crate::error::{Error, Result};
use crate::geom::{closest_point_on_triangle, Aabb, Vec3};
use crate::mesh::TriMesh;

pub const DEFAULT_LEAF_SIZE: usize = 16;

const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct BvhNode {
    pub bbox: Aabb,
    pub start: u32,
    pub count: u32,
    left: u32,
    right: u32,
}

impl BvhNode {
    pub fn is_leaf(&self) -> bool {
        self.left == NO_CHILD
    }

    pub fn children(&self) -> Option<(usize, usize)> {
        (!self.is_leaf()).then_some((self.left as usize, self.right as usize))
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start as usize..(self.start + self.count) as usize
    }
}

#[derive(Debug, Clone)]
pub struct TriangleBvh {
    nodes: Vec<BvhNode>,
    /// Triangle corners in leaf order.
    tris: Vec<[Vec3; 3]>,
    /// Original mesh triangle index for each slot of `tris`.
    order: Vec<u32>,
    leaf_size: usize,
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestHit {
    pub distance_squared: f64,
    pub point: Vec3,
    pub triangle: usize,
}

impl TriangleBvh {
    pub fn build(mesh: &TriMesh, leaf_size: usize) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::Empty("cannot build a hierarchy over an empty mesh".into()));
        }
        if leaf_size == 0 {
            return Err(Error::InvalidArgument("leaf size must be at least 1".into()));
        }
        let n = mesh.triangle_count();
        let corners: Vec<[Vec3; 3]> = (0..n).map(|t| mesh.triangle(t)).collect();
        let centroids: Vec<Vec3> = corners.iter().map(|c| (c[0] + c[1] + c[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / leaf_size + 1);
        build_node(&corners, &centroids, &mut order, 0, n, leaf_size, &mut nodes);
        let tris = order.iter().map(|&t| corners[t as usize]).collect();
        Ok(TriangleBvh {
            nodes,
            tris,
            order,
            leaf_size,
        })
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    /// Triangle corners in leaf order.
    pub fn triangles(&self) -> &[[Vec3; 3]] {
        &self.tris
    }

    /// Maps a leaf-order slot back to the mesh triangle index.
    pub fn original_index(&self, slot: usize) -> usize {
        self.order[slot] as usize
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[BvhNode], i: usize) -> usize {
            match nodes[i].children() {
                None => 1,
                Some((l, r)) => 1 + rec(nodes, l).max(rec(nodes, r)),
            }
        }
        rec(&self.nodes, 0)
    }

    /// Closest surface point to `p` among triangles closer than `sqrt(max_distance_squared)`.
    pub fn closest_point(&self, p: &Vec3, max_distance_squared: f64) -> Option<ClosestHit> {
        let mut best: Option<ClosestHit> = None;
        let mut best_d2 = max_distance_squared;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            if node.bbox.distance_squared(p) > best_d2 {
                continue;
            }
            match node.children() {
                None => {
                    for slot in node.range() {
                        let [a, b, c] = &self.tris[slot];
                        let q = closest_point_on_triangle(p, a, b, c);
                        let d2 = (q - p).norm_squared();
                        // ties go to the lowest mesh index
                        let better = match best {
                            _ if d2 < best_d2 => true,
                            Some(h) if d2 == best_d2 => (self.order[slot] as usize) < h.triangle,
                            None if d2 <= best_d2 => true,
                            _ => false,
                        };
                        if better {
                            best_d2 = d2;
                            best = Some(ClosestHit {
                                distance_squared: d2,
                                point: q,
                                triangle: self.order[slot] as usize,
                            });
                        }
                    }
                }
                Some((l, r)) => {
                    let dl = self.nodes[l].bbox.distance_squared(p);
                    let dr = self.nodes[r].bbox.distance_squared(p);
                    // nearer child popped first
                    if dl <= dr {
                        stack.push(r as u32);
                        stack.push(l as u32);
                    } else {
                        stack.push(l as u32);
                        stack.push(r as u32);
                    }
                }
            }
        }
        best
    }

    /// Unsigned distance from `p` to the surface.
    pub fn distance(&self, p: &Vec3) -> f64 {
        self.closest_point(p, f64::INFINITY)
            .map(|h| h.distance_squared.sqrt())
            .unwrap_or(f64::INFINITY)
    }

    /// Slot ranges of all triangles whose node box intersects `query`.
    pub fn visit_overlapping(&self, query: &Aabb, mut f: impl FnMut(usize, &[Vec3; 3])) {
        let mut stack = vec![0u32];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            let overlaps = (0..3).all(|a| node.bbox.min[a] <= query.max[a] && node.bbox.max[a] >= query.min[a]);
            if !overlaps {
                continue;
            }
            match node.children() {
                None => {
                    for slot in node.range() {
                        f(self.order[slot] as usize, &self.tris[slot]);
                    }
                }
                Some((l, r)) => {
                    stack.push(r as u32);
                    stack.push(l as u32);
                }
            }
        }
    }
}

fn build_node(
    corners: &[[Vec3; 3]],
    centroids: &[Vec3],
    order: &mut [u32],
    start: usize,
    end: usize,
    leaf_size: usize,
    nodes: &mut Vec<BvhNode>,
) -> u32 {
    let mut bbox = Aabb::empty();
    for &t in &order[start..end] {
        for c in &corners[t as usize] {
            bbox.grow(c);
        }
    }
    let index = nodes.len() as u32;
    nodes.push(BvhNode {
        bbox,
        start: start as u32,
        count: (end - start) as u32,
        left: NO_CHILD,
        right: NO_CHILD,
    });
    if end - start <= leaf_size {
        return index;
    }
    let axis = bbox.longest_axis();
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let left = build_node(corners, centroids, order, start, mid, leaf_size, nodes);
    let right = build_node(corners, centroids, order, mid, end, leaf_size, nodes);
    nodes[index as usize].left = left;
    nodes[index as usize].right = right;
    index
}
