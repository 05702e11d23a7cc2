//! Procedural test geometry: closed solids, open shells and labeled shapes.
//!
//! Every generator returns triangles wound so that the normal `(b-a)x(c-a)`
//! points away from the shape's "inside" (the side whose winding number
//! approaches one).

use std::f64::consts::PI;

use crate::geom::{triangle_cross, Vec3};
use crate::mesh::{Frame, TriMesh};

fn orient_away_from(
    vertices: &[Vec3],
    mut tris: Vec<[u32; 3]>,
    inside: impl Fn(&Vec3) -> Vec3,
) -> Vec<[u32; 3]> {
    for t in tris.iter_mut() {
        let [a, b, c] = t.map(|i| vertices[i as usize]);
        let centroid = (a + b + c) / 3.0;
        if triangle_cross(&a, &b, &c).dot(&(centroid - inside(&centroid))) < 0.0 {
            t.swap(1, 2);
        }
    }
    tris
}

/// Closed axis-aligned cube `[0,1]^3`, 8 vertices and 12 triangles.
pub fn unit_cube() -> TriMesh {
    cube(Vec3::zeros(), Vec3::repeat(1.0))
}

/// Closed axis-aligned box between `min` and `max`.
pub fn cube(min: Vec3, max: Vec3) -> TriMesh {
    let corner = |i: usize| {
        Vec3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        )
    };
    let vertices: Vec<Vec3> = (0..8).map(corner).collect();
    // quads as corner bit patterns, traversed around the face
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let tris: Vec<[u32; 3]> = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    let center = (min + max) * 0.5;
    let tris = orient_away_from(&vertices, tris, |_| center);
    TriMesh::new(vertices, tris).expect("cube is valid")
}

/// Geodesic sphere from a subdivided icosahedron: `20 * 4^subdivisions` triangles.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut tris: Vec<[u32; 3]> = vec![
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
    for _ in 0..subdivisions {
        let mut midpoint = std::collections::HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = ((verts[a as usize] + verts[b as usize]) * 0.5).normalize();
                verts.push(m);
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    let vertices: Vec<Vec3> = verts.iter().map(|v| center + v * radius).collect();
    let tris = orient_away_from(&vertices, tris, |_| center);
    TriMesh::new(vertices, tris).expect("icosphere is valid")
}

/// Open tube around the z axis through `center`, no end caps.
///
/// `segments` vertices around, `rings` quads along the axis; normals face outward.
pub fn capless_cylinder(
    center: Vec3,
    radius: f64,
    height: f64,
    segments: usize,
    rings: usize,
) -> TriMesh {
    let mut vertices = Vec::with_capacity(segments * (rings + 1));
    for j in 0..=rings {
        let z = center.z - height / 2.0 + height * j as f64 / rings as f64;
        for i in 0..segments {
            let th = 2.0 * PI * i as f64 / segments as f64;
            vertices.push(Vec3::new(
                center.x + radius * th.cos(),
                center.y + radius * th.sin(),
                z,
            ));
        }
    }
    let idx = |i: usize, j: usize| (j * segments + (i % segments)) as u32;
    let mut tris = Vec::with_capacity(2 * segments * rings);
    for j in 0..rings {
        for i in 0..segments {
            tris.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            tris.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let tris = orient_away_from(&vertices, tris, |p| Vec3::new(center.x, center.y, p.z));
    TriMesh::new(vertices, tris).expect("cylinder is valid")
}

/// Square `[-half, half]^2` in the z=0 plane split into two triangles, normal facing -z.
pub fn square_patch(half: f64) -> TriMesh {
    let vertices = vec![
        Vec3::new(-half, -half, 0.0),
        Vec3::new(half, -half, 0.0),
        Vec3::new(half, half, 0.0),
        Vec3::new(-half, half, 0.0),
    ];
    TriMesh::new(vertices, vec![[0, 2, 1], [0, 3, 2]]).expect("patch is valid")
}

/// Flat square `[0, extent]^2` at height `z`, subdivided into `n x n` quads, normal +z.
pub fn plate(extent: f64, n: usize, z: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Vec3::new(
                extent * i as f64 / n as f64,
                extent * j as f64 / n as f64,
                z,
            ));
        }
    }
    let idx = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            tris.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            tris.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, tris).expect("plate is valid")
}

/// Garment-like thin shell inside the unit cube: a wavy elliptic tube, open at
/// both ends, with a vertical slit down the front (+x side).
///
/// Produces `2 * around * along` triangles; `(100, 50)` gives 10k.
pub fn garment_shell(around: usize, along: usize) -> TriMesh {
    let gap = 0.35; // half-angle of the front opening, radians
    let (z0, z1) = (0.2, 0.8);
    let mut vertices = Vec::with_capacity((around + 1) * (along + 1));
    for j in 0..=along {
        let s = j as f64 / along as f64;
        let z = z0 + (z1 - z0) * s;
        // narrower waist, flared hem
        let profile = 1.0 - 0.18 * (PI * s).sin() + 0.12 * (1.0 - s).powi(3);
        for i in 0..=around {
            let th = gap + (2.0 * PI - 2.0 * gap) * i as f64 / around as f64;
            let ripple = 1.0 + 0.04 * (5.0 * th + 7.0 * s).sin();
            vertices.push(Vec3::new(
                0.5 + 0.22 * profile * ripple * th.cos(),
                0.5 + 0.15 * profile * ripple * th.sin(),
                z,
            ));
        }
    }
    let idx = |i: usize, j: usize| (j * (around + 1) + i) as u32;
    let mut tris = Vec::with_capacity(2 * around * along);
    for j in 0..along {
        for i in 0..around {
            tris.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            tris.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let tris = orient_away_from(&vertices, tris, |p| Vec3::new(0.5, 0.5, p.z));
    TriMesh::new(vertices, tris)
        .expect("shell is valid")
        .with_frame(Frame::Canonical)
}

/// Two separate spheres mirrored about the plane x = 0.5, each vertex labeled
/// with its own position (the shape already lives in the unit cube).
pub fn two_lobes(subdivisions: u32) -> TriMesh {
    let left = icosphere(Vec3::new(0.2, 0.5, 0.5), 0.15, subdivisions);
    let right = left.map_vertices(|p| Vec3::new(1.0 - p.x, p.y, p.z)).flipped();
    let both = left.concat(&right);
    let labels = both.vertices().to_vec();
    both.with_nocs_labels(Some(labels)).expect("labels in unit cube")
}
