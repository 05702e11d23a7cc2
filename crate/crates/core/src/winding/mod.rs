//! Generalized winding numbers of triangle soups.
//!
//! `w(q) = (1 / 4pi) * sum of signed solid angles`. A triangle contributes a
//! positive solid angle when its normal `(b-a)x(c-a)` points away from `q`, so
//! outward-oriented closed surfaces give 1 inside and 0 outside.

mod accel;

pub use accel::{build_accel, FarFieldOrder, WindingAccel, WindingQueryParams, DEFAULT_BETA};

use std::f64::consts::PI;

use crate::geom::{point_triangle_distance_squared, triangle_cross, Vec3};
use crate::mesh::TriMesh;

/// Queries closer than this fraction of the bbox diagonal are flagged near-surface.
pub const NEAR_SURFACE_FRACTION: f64 = 1e-7;

pub(crate) const FOUR_PI: f64 = 4.0 * PI;

/// Signed solid angle subtended by triangle `(a, b, c)` at `q`.
///
/// Van Oosterom-Strackee closed form. Returns 0 for degenerate triangles and
/// when `q` coincides with a corner.
#[inline]
pub fn solid_angle_triangle(q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    solid_angle_flagged(q, a, b, c).0
}

/// Like [`solid_angle_triangle`], also reporting whether `q` hit a corner.
#[inline]
pub fn solid_angle_flagged(q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (f64, bool) {
    let ra = a - q;
    let rb = b - q;
    let rc = c - q;
    let la = ra.norm();
    let lb = rb.norm();
    let lc = rc.norm();
    if la == 0.0 || lb == 0.0 || lc == 0.0 {
        return (0.0, true);
    }
    if triangle_cross(a, b, c) == Vec3::zeros() {
        return (0.0, false);
    }
    let det = ra.dot(&rb.cross(&rc));
    let denom = la * lb * lc + ra.dot(&rb) * lc + ra.dot(&rc) * lb + rb.dot(&rc) * la;
    if det == 0.0 && denom >= 0.0 {
        // coplanar with q outside the triangle, or zero area
        return (0.0, false);
    }
    (2.0 * det.atan2(denom), false)
}

/// Winding number with diagnostic flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingValue {
    pub value: f64,
    /// `q` lies within `NEAR_SURFACE_FRACTION * diagonal` of some triangle.
    pub near_surface: bool,
    /// `q` coincided with a triangle corner.
    pub degenerate: bool,
}

/// Exact winding number by summing every triangle's solid angle.
pub fn winding_exact(mesh: &TriMesh, q: &Vec3) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        sum += solid_angle_triangle(q, &a, &b, &c);
    }
    sum / FOUR_PI
}

/// Exact winding number plus near-surface and corner-hit flags.
pub fn winding_exact_flagged(mesh: &TriMesh, q: &Vec3) -> WindingValue {
    let tol = NEAR_SURFACE_FRACTION * mesh.bbox().diagonal();
    let tol2 = tol * tol;
    let mut sum = 0.0;
    let mut near_surface = false;
    let mut degenerate = false;
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        let (omega, corner) = solid_angle_flagged(q, &a, &b, &c);
        sum += omega;
        degenerate |= corner;
        if !near_surface && point_triangle_distance_squared(q, &a, &b, &c) < tol2 {
            near_surface = true;
        }
    }
    WindingValue {
        value: sum / FOUR_PI,
        near_surface,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn octant_triangle() {
        let o = Vec3::zeros();
        let (a, b, c) = (Vec3::x(), Vec3::y(), Vec3::z());
        assert!((solid_angle_triangle(&o, &a, &b, &c) - PI / 2.0).abs() < 1e-14);
        assert!((solid_angle_triangle(&o, &b, &a, &c) + PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn far_triangle_vanishes() {
        let (a, b, c) = (Vec3::x(), Vec3::y(), Vec3::z());
        let diam = 2f64.sqrt();
        let q = Vec3::repeat(1e3 * diam);
        assert!(solid_angle_triangle(&q, &a, &b, &c).abs() < 1e-5);
    }

    #[test]
    fn corner_query_is_flagged() {
        let (a, b, c) = (Vec3::x(), Vec3::y(), Vec3::z());
        assert_eq!(solid_angle_flagged(&a, &a, &b, &c), (0.0, true));
        let zero_area = solid_angle_triangle(
            &Vec3::new(0.3, -2.0, 0.1),
            &Vec3::zeros(),
            &Vec3::new(1.0, 0.0, 0.0),
            &Vec3::new(2.0, 0.0, 0.0),
        );
        assert_eq!(zero_area, 0.0);
    }

    #[test]
    fn cube_inside_outside() {
        let cube = shapes::unit_cube();
        assert!((winding_exact(&cube, &Vec3::repeat(0.5)) - 1.0).abs() < 1e-9);
        assert!(winding_exact(&cube, &Vec3::repeat(5.0)).abs() < 1e-9);
    }

    // Solid angle of an axis-centered square of half-side a seen from height h:
    // 4 atan(a^2 / (h sqrt(2a^2 + h^2))).
    fn square_solid_angle(a: f64, h: f64) -> f64 {
        4.0 * (a * a / (h * (2.0 * a * a + h * h).sqrt())).atan()
    }

    #[test]
    fn square_patch_analytic() {
        let patch = shapes::square_patch(1.0);
        let w = winding_exact(&patch, &Vec3::new(0.0, 0.0, 1.0));
        assert!((square_solid_angle(1.0, 1.0) / FOUR_PI - 1.0 / 6.0).abs() < 1e-15);
        assert!((w - 1.0 / 6.0).abs() < 1e-12, "{w}");
        for h in [0.1, 0.5, 2.0, 10.0] {
            let w = winding_exact(&patch, &Vec3::new(0.0, 0.0, h));
            assert!((w - square_solid_angle(1.0, h) / FOUR_PI).abs() < 1e-12);
        }
    }

    #[test]
    fn flags_near_surface_and_corners() {
        let cube = shapes::unit_cube();
        let on_face = winding_exact_flagged(&cube, &Vec3::new(0.5, 0.5, 0.0));
        assert!(on_face.near_surface);
        assert!(!on_face.degenerate);
        let corner = winding_exact_flagged(&cube, &Vec3::zeros());
        assert!(corner.degenerate && corner.near_surface);
        let inside = winding_exact_flagged(&cube, &Vec3::repeat(0.5));
        assert!(!inside.near_surface && (inside.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn additivity_over_triangle_subsets() {
        let shell = shapes::garment_shell(30, 12);
        let a = shell.filter_triangles(|t| t % 3 == 0);
        let b = shell.filter_triangles(|t| t % 3 != 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let whole = winding_exact(&shell, &q);
            let parts = winding_exact(&a, &q) + winding_exact(&b, &q);
            assert!((whole - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn orientation_flip_negates() {
        let shell = shapes::garment_shell(30, 12);
        let flipped = shell.flipped();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let q = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            assert!((winding_exact(&shell, &q) + winding_exact(&flipped, &q)).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_across_surface() {
        // interior point of a cylinder wall, stepping along the wall normal
        let cyl = shapes::capless_cylinder(Vec3::zeros(), 1.0, 2.0, 64, 16);
        let eps = 1e-4 * cyl.bbox().diagonal();
        let p = Vec3::new(1.0, 0.0, 0.06);
        let inside = winding_exact(&cyl, &(p - Vec3::x() * eps));
        let outside = winding_exact(&cyl, &(p + Vec3::x() * eps));
        assert!((inside - outside - 1.0).abs() < 0.05, "{inside} {outside}");
    }

    #[test]
    fn smooth_through_opening() {
        let radius = 1.0;
        let cyl = shapes::capless_cylinder(Vec3::zeros(), radius, 2.0, 64, 16);
        let step = 0.05 * radius;
        let values: Vec<f64> = (0..=80)
            .map(|k| winding_exact(&cyl, &Vec3::new(0.0, 0.0, k as f64 * step)))
            .collect();
        for pair in values.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "not monotone");
            assert!(pair[0] - pair[1] < 0.2);
        }
        assert!(values[0] > 0.5 && *values.last().unwrap() < 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn rigid_motion_invariance(
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.1..1.0f64,
            angle in -3.0..3.0f64,
            tx in -5.0..5.0f64, ty in -5.0..5.0f64, tz in -5.0..5.0f64,
            qx in -0.2..1.2f64, qy in -0.2..1.2f64, qz in -0.2..1.2f64,
        ) {
            let shell = shapes::garment_shell(20, 8);
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(ax, ay, az)), angle);
            let t = Vec3::new(tx, ty, tz);
            let moved = shell.map_vertices(|p| rot * p + t);
            let q = Vec3::new(qx, qy, qz);
            let before = winding_exact(&shell, &q);
            let after = winding_exact(&moved, &(rot * q + t));
            prop_assert!((before - after).abs() < 1e-9);
        }
    }
}
