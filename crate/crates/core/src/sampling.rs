//! Area-weighted random sampling of triangle surfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::{PointCloud, TriMesh, DEFAULT_AREA_EPSILON};

/// Surface samples together with the triangle each one came from.
#[derive(Debug, Clone)]
pub struct SurfaceSamples {
    pub cloud: PointCloud,
    pub triangles: Vec<u32>,
}

/// Draws `n` points uniformly by area. Labels are interpolated with the
/// same barycentric weights when the mesh carries them.
pub fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointCloud> {
    Ok(sample_surface_traced(mesh, n, seed)?.cloud)
}

pub fn sample_surface_traced(mesh: &TriMesh, n: usize, seed: u64) -> Result<SurfaceSamples> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangle_count());
    let mut total = 0.0;
    for t in 0..mesh.triangle_count() {
        let a = mesh.triangle_area(t);
        if a >= DEFAULT_AREA_EPSILON {
            total += a;
        }
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::InvalidMesh("no non-degenerate triangle to sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = mesh.nocs_labels();
    let mut points = Vec::with_capacity(n);
    let mut nocs = labels.map(|_| Vec::with_capacity(n));
    let mut tris = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.gen::<f64>() * total;
        // first triangle whose cumulative area exceeds u; zero-area ones never qualify
        let t = cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        let w = [1.0 - s, s * (1.0 - r2), s * r2];
        let [a, b, c] = mesh.triangle(t);
        points.push(a * w[0] + b * w[1] + c * w[2]);
        if let (Some(l), Some(out)) = (labels, nocs.as_mut()) {
            let [i, j, k] = mesh.triangles()[t];
            let p: Vec3 = l[i as usize] * w[0] + l[j as usize] * w[1] + l[k as usize] * w[2];
            out.push(p.map(|x| x.clamp(0.0, 1.0)));
        }
        tris.push(t as u32);
    }
    let mut cloud = PointCloud::new(points);
    if let Some(nocs) = nocs {
        cloud = cloud.with_nocs(nocs)?;
    }
    Ok(SurfaceSamples { cloud, triangles: tris })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point_triangle_distance_squared;
    use crate::shapes;

    #[test]
    fn density_follows_area() {
        // unit square split into triangles of area 0.125 and 0.875
        let m = TriMesh::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.25, 0.0, 0.0)],
            vec![[0, 4, 3], [4, 1, 2], [4, 2, 3]],
        )
        .unwrap();
        let n = 100_000;
        let s = sample_surface_traced(&m, n, 1).unwrap();
        let mut counts = [0usize; 3];
        for t in &s.triangles {
            counts[*t as usize] += 1;
        }
        for t in 0..3 {
            let expect = m.triangle_area(t) * n as f64;
            assert!((counts[t] as f64 - expect).abs() < 0.02 * expect, "{counts:?}");
        }
    }

    #[test]
    fn single_sample_on_surface_and_deterministic() {
        let m = shapes::icosphere(Vec3::zeros(), 1.0, 1);
        let s = sample_surface_traced(&m, 1, 9).unwrap();
        let p = s.cloud.points()[0];
        let [a, b, c] = m.triangle(s.triangles[0] as usize);
        assert!(point_triangle_distance_squared(&p, &a, &b, &c).sqrt() < 1e-9);
        assert_eq!(sample_surface(&m, 500, 4).unwrap(), sample_surface(&m, 500, 4).unwrap());
        assert_ne!(sample_surface(&m, 500, 4).unwrap(), sample_surface(&m, 500, 5).unwrap());
    }

    #[test]
    fn degenerate_mesh_is_rejected() {
        let m = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]).unwrap();
        assert!(sample_surface(&m, 10, 0).is_err());
        assert!(sample_surface(&shapes::unit_cube(), 0, 0).is_err());
    }

    #[test]
    fn labels_are_interpolated() {
        let m = shapes::two_lobes(1);
        let c = sample_surface(&m, 200, 2).unwrap();
        // labels equal positions on this shape
        for (p, l) in c.points().iter().zip(c.nocs().unwrap()) {
            assert!((p - l).norm() < 1e-12);
        }
    }
}
