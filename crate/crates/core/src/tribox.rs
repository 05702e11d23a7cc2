//! Triangle / axis-aligned cube overlap by the separating axis theorem.

use crate::geom::Vec3;

/// True if the triangle touches the closed cube `center +- half` on every axis.
///
/// Tests the 13 candidate axes: the three box normals, the triangle normal and
/// the nine cross products of box axes with triangle edges.
pub fn triangle_box_overlap(tri: &[Vec3; 3], center: &Vec3, half: f64) -> bool {
    let v = [tri[0] - center, tri[1] - center, tri[2] - center];

    for a in 0..3 {
        let lo = v[0][a].min(v[1][a]).min(v[2][a]);
        let hi = v[0][a].max(v[1][a]).max(v[2][a]);
        if lo > half || hi < -half {
            return false;
        }
    }

    let edges = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let normal = edges[0].cross(&edges[1]);
    if normal != Vec3::zeros() {
        let r = half * normal.abs().sum();
        if normal.dot(&v[0]).abs() > r {
            return false;
        }
    }

    for f in &edges {
        for a in 0..3 {
            let mut e = Vec3::zeros();
            e[a] = 1.0;
            let axis = e.cross(f);
            if axis == Vec3::zeros() {
                continue;
            }
            let p = [axis.dot(&v[0]), axis.dot(&v[1]), axis.dot(&v[2])];
            let lo = p[0].min(p[1]).min(p[2]);
            let hi = p[0].max(p[1]).max(p[2]);
            let r = half * axis.abs().sum();
            if lo > r || hi < -r {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [Vec3; 3] {
        [Vec3::from(a), Vec3::from(b), Vec3::from(c)]
    }

    #[test]
    fn basic_cases() {
        let c = Vec3::zeros();
        // through the middle
        assert!(triangle_box_overlap(&tri([-2.0, -2.0, 0.0], [2.0, -2.0, 0.0], [0.0, 2.0, 0.0]), &c, 0.5));
        // plane misses
        assert!(!triangle_box_overlap(&tri([-2.0, -2.0, 0.6], [2.0, -2.0, 0.6], [0.0, 2.0, 0.6]), &c, 0.5));
        // fully inside
        assert!(triangle_box_overlap(&tri([0.1, 0.1, 0.1], [0.2, 0.1, 0.1], [0.1, 0.2, 0.1]), &c, 0.5));
        // bboxes overlap, but the triangle slices past the corner: only an edge axis separates
        assert!(!triangle_box_overlap(&tri([0.4, 1.0, 0.0], [1.0, 0.4, 0.0], [1.0, 1.0, 0.0]), &c, 0.5));
        assert!(triangle_box_overlap(&tri([0.4, 0.6, 0.0], [0.6, 0.4, 0.0], [1.0, 1.0, 0.0]), &c, 0.5));
    }
}
