//! Exact nearest-neighbor search over a fixed 3D point set.

use crate::geom::Vec3;

const LEAF: usize = 8;

/// Balanced kd-tree. Ties in distance resolve to the lowest point index.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    // permutation of point indices; each range is split at its middle
    order: Vec<u32>,
    // split axis per internal range, keyed by the range's middle slot
    axis: Vec<u8>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> KdTree {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut axis = vec![0u8; points.len()];
        build(points, &mut order, &mut axis, 0);
        KdTree { points: points.to_vec(), order, axis }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Index and squared distance of the nearest point, `None` when empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, u32::MAX);
        self.search(q, 0, self.points.len(), &mut best);
        Some((best.1 as usize, best.0))
    }

    fn consider(&self, q: &Vec3, slot: usize, best: &mut (f64, u32)) {
        let i = self.order[slot];
        let d2 = (self.points[i as usize] - q).norm_squared();
        if d2 < best.0 || (d2 == best.0 && i < best.1) {
            *best = (d2, i);
        }
    }

    fn search(&self, q: &Vec3, lo: usize, hi: usize, best: &mut (f64, u32)) {
        if hi - lo <= LEAF {
            for slot in lo..hi {
                self.consider(q, slot, best);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let a = self.axis[mid] as usize;
        let split = self.points[self.order[mid] as usize][a];
        let diff = q[a] - split;
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(q, near.0, near.1, best);
        self.consider(q, mid, best);
        // equality keeps tied candidates on the far side reachable
        if diff * diff <= best.0 {
            self.search(q, far.0, far.1, best);
        }
    }
}

fn build(points: &[Vec3], order: &mut [u32], axis: &mut [u8], offset: usize) {
    let n = order.len();
    if n <= LEAF {
        return;
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in order.iter() {
        lo = lo.inf(&points[i as usize]);
        hi = hi.sup(&points[i as usize]);
    }
    let a = (hi - lo).imax();
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&x, &y| {
        points[x as usize][a].total_cmp(&points[y as usize][a]).then(x.cmp(&y))
    });
    axis[offset + mid] = a as u8;
    let (left, rest) = order.split_at_mut(mid);
    build(points, left, axis, offset);
    build(points, &mut rest[1..], axis, offset + mid + 1);
}
