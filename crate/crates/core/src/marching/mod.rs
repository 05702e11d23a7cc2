//! Isosurface extraction by marching cubes over voxel-center samples.
//!
//! Cells join eight neighboring voxel centers. Output vertices sit on the
//! segments between adjacent centers and are shared by every cell touching
//! that segment, so the mesh is welded by construction.

mod tables;

use log::warn;

use crate::geom::Vec3;
use crate::grid::ScalarGrid;
use crate::mesh::{Frame, TriMesh};
use tables::TRI_TABLE;

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Triangulates the level set `value == iso`.
///
/// Triangle normals point toward decreasing field values. The returned mesh
/// is tagged canonical, the frame the winding fields are built in.
pub fn marching_cubes(grid: &ScalarGrid, iso: f64) -> TriMesh {
    let (lo, hi) = grid.min_max();
    if !((lo as f64) < iso && iso <= hi as f64) {
        warn!("iso level {iso} outside field range [{lo}, {hi}]; empty surface");
        return TriMesh::with_labels(vec![], vec![], Frame::Canonical, None).expect("empty mesh");
    }
    let spec = *grid.spec();
    let [nx, ny, nz] = spec.dims;
    let data = grid.data();

    // one slot per (grid point, axis) edge
    let mut edge_vertex = vec![u32::MAX; 3 * spec.len()];
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let mut values = [0f64; 8];
                let mut case = 0usize;
                for (n, c) in CORNERS.iter().enumerate() {
                    let v = data[spec.index(i + c[0], j + c[1], k + c[2])] as f64;
                    values[n] = v;
                    if v < iso {
                        case |= 1 << n;
                    }
                }
                if case == 0 || case == 255 || values.iter().any(|v| v.is_nan()) {
                    continue;
                }
                let row = &TRI_TABLE[case];
                let mut local = [u32::MAX; 12];
                for t in row.chunks_exact(3) {
                    if t[0] < 0 {
                        break;
                    }
                    let mut tri = [0u32; 3];
                    for (slot, &e) in t.iter().enumerate() {
                        let e = e as usize;
                        if local[e] == u32::MAX {
                            let [c0, c1] = EDGES[e];
                            // orient every edge from its lower grid point
                            let (a, b) = if CORNERS[c0] < CORNERS[c1] { (c0, c1) } else { (c1, c0) };
                            let pa = [i + CORNERS[a][0], j + CORNERS[a][1], k + CORNERS[a][2]];
                            let axis = (0..3).find(|&d| CORNERS[a][d] != CORNERS[b][d]).unwrap();
                            let key = 3 * spec.index(pa[0], pa[1], pa[2]) + axis;
                            if edge_vertex[key] == u32::MAX {
                                let (va, vb) = (values[a], values[b]);
                                let s = ((iso - va) / (vb - va)).clamp(0.0, 1.0);
                                let mut p = spec.center(pa[0], pa[1], pa[2]);
                                p[axis] += s * spec.voxel_size;
                                edge_vertex[key] = vertices.len() as u32;
                                vertices.push(p);
                            }
                            local[e] = edge_vertex[key];
                        }
                        tri[slot] = local[e];
                    }
                    triangles.push(tri);
                }
            }
        }
    }
    TriMesh::with_labels(vertices, triangles, Frame::Canonical, None)
        .expect("marching cubes output is valid")
}
