//! Mesh rasterizers: winding-number field, occupancy, truncated signed and
//! unsigned distance. Values are taken at voxel centers.

use log::warn;
use rayon::prelude::*;

use crate::bvh::{TriangleBvh, DEFAULT_LEAF_SIZE};
use crate::error::{Error, Result};
use crate::grid::{FieldKind, GridSpec, ScalarGrid};
use crate::mesh::TriMesh;
use crate::tribox::triangle_box_overlap;
use crate::winding::{WindingAccel, WindingQueryParams};

/// Default truncation band, in voxels.
pub const DEFAULT_TRUNC_VOXELS: f64 = 10.0;

fn check_coverage(mesh: &TriMesh, spec: &GridSpec) {
    if mesh.vertex_count() > 0 && !spec.covers(&mesh.bbox()) {
        warn!("grid does not cover the mesh bounding box with a one-voxel margin");
    }
}

fn check_trunc(trunc: f64) -> Result<()> {
    if !(trunc > 0.0 && trunc.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "truncation must be positive, got {trunc}"
        )));
    }
    Ok(())
}

/// Winding number at every voxel center.
pub fn rasterize_wnf(
    mesh: &TriMesh,
    spec: &GridSpec,
    accel: &WindingAccel,
    params: &WindingQueryParams,
) -> Result<ScalarGrid> {
    check_coverage(mesh, spec);
    let values = accel.winding_batch(&spec.centers(), params);
    ScalarGrid::new(
        *spec,
        FieldKind::Wnf,
        values.into_iter().map(|v| v as f32).collect(),
        None,
    )
}

/// 1 for every voxel cube that some triangle touches, else 0.
pub fn rasterize_occupancy(mesh: &TriMesh, spec: &GridSpec) -> Result<ScalarGrid> {
    check_coverage(mesh, spec);
    let h = spec.voxel_size;
    let half = 0.5 * h;
    let hits: Vec<Vec<usize>> = (0..mesh.triangle_count())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for a in 0..3 {
                let min = tri.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
                let max = tri.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
                // voxel i spans [origin + (i - 1/2) h, origin + (i + 1/2) h]
                let first = ((min - spec.origin[a]) / h - 0.5).floor();
                let last = ((max - spec.origin[a]) / h + 0.5).ceil();
                let top = (spec.dims[a] - 1) as f64;
                if last < 0.0 || first > top {
                    return Vec::new();
                }
                lo[a] = first.max(0.0) as usize;
                hi[a] = last.min(top) as usize;
            }
            let mut out = Vec::new();
            for k in lo[2]..=hi[2] {
                for j in lo[1]..=hi[1] {
                    for i in lo[0]..=hi[0] {
                        if triangle_box_overlap(&tri, &spec.center(i, j, k), half) {
                            out.push(spec.index(i, j, k));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut data = vec![0f32; spec.len()];
    for idx in hits.into_iter().flatten() {
        data[idx] = 1.0;
    }
    ScalarGrid::new(*spec, FieldKind::Occupancy, data, None)
}

fn unsigned_band(bvh: &TriangleBvh, spec: &GridSpec, trunc: f64) -> Vec<f64> {
    spec.centers()
        .par_iter()
        .with_min_len(256)
        .map(|c| match bvh.closest_point(c, trunc * trunc) {
            Some(hit) => hit.distance_squared.sqrt().min(trunc),
            None => trunc,
        })
        .collect()
}

/// Truncated signed distance, negative where the winding number exceeds 1/2.
pub fn rasterize_tsdf(
    mesh: &TriMesh,
    spec: &GridSpec,
    trunc: f64,
    accel: &WindingAccel,
    params: &WindingQueryParams,
) -> Result<ScalarGrid> {
    check_trunc(trunc)?;
    check_coverage(mesh, spec);
    let dist = unsigned_band(accel.bvh(), spec, trunc);
    let centers = spec.centers();
    let data: Vec<f32> = dist
        .par_iter()
        .zip(centers.par_iter())
        .with_min_len(256)
        .map(|(&d, c)| {
            let inside = accel.winding_fast(c, params) > 0.5;
            let v = d as f32;
            if inside {
                -v
            } else {
                v
            }
        })
        .collect();
    ScalarGrid::new(*spec, FieldKind::Tsdf, data, Some(trunc))
}

/// Truncated unsigned distance to the surface.
pub fn rasterize_tdf(mesh: &TriMesh, spec: &GridSpec, trunc: f64) -> Result<ScalarGrid> {
    check_trunc(trunc)?;
    check_coverage(mesh, spec);
    let bvh = TriangleBvh::build(mesh, DEFAULT_LEAF_SIZE)?;
    let data = unsigned_band(&bvh, spec, trunc)
        .into_iter()
        .map(|d| d as f32)
        .collect();
    ScalarGrid::new(*spec, FieldKind::Tdf, data, Some(trunc))
}
