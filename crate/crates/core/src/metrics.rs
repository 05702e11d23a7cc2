//! Shape and pose metrics over sampled surfaces.

use rayon::prelude::*;
use serde::Serialize;

use crate::bvh::{TriangleBvh, DEFAULT_LEAF_SIZE};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::kdtree::KdTree;
use crate::mesh::{PointCloud, TriMesh};
use crate::nocs::{mirror_nocs, Axis};
use crate::sampling::sample_surface;

pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChamferResult {
    /// Mean distance from pred samples to the nearest gt sample.
    pub accuracy_mean: f64,
    /// Mean distance from gt samples to the nearest pred sample.
    pub completeness_mean: f64,
    pub symmetric_mean: f64,
    pub sample_count: usize,
    pub seed: u64,
}

/// One JSON metric line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub metric: String,
    pub value: f64,
    pub n: usize,
    pub seed: u64,
    pub units: String,
}

/// Mean nearest distance from each query to `tree`, summed in query order.
pub fn mean_nearest_distance(queries: &[Vec3], tree: &KdTree) -> f64 {
    let d: Vec<f64> = queries
        .par_iter()
        .with_min_len(256)
        .map(|q| tree.nearest(q).map_or(f64::INFINITY, |(_, d2)| d2.sqrt()))
        .collect();
    d.iter().sum::<f64>() / d.len() as f64
}

/// Symmetric Chamfer distance between `n` samples of each mesh.
///
/// Both meshes are sampled with the same seed, so a mesh compared with
/// itself scores exactly zero.
pub fn chamfer(pred: &TriMesh, gt: &TriMesh, n: usize, seed: u64) -> Result<ChamferResult> {
    let ps = sample_surface(pred, n, seed)?;
    let gs = sample_surface(gt, n, seed)?;
    Ok(chamfer_clouds(ps.points(), gs.points(), seed))
}

/// Chamfer distance between two fixed point sets.
pub fn chamfer_clouds(pred: &[Vec3], gt: &[Vec3], seed: u64) -> ChamferResult {
    let accuracy_mean = mean_nearest_distance(pred, &KdTree::new(gt));
    let completeness_mean = mean_nearest_distance(gt, &KdTree::new(pred));
    ChamferResult {
        accuracy_mean,
        completeness_mean,
        symmetric_mean: (accuracy_mean + completeness_mean) / 2.0,
        sample_count: pred.len(),
        seed,
    }
}

/// Diagnostic variant measuring exact distance from samples to the other surface.
pub fn chamfer_point_to_surface(pred: &TriMesh, gt: &TriMesh, n: usize, seed: u64) -> Result<ChamferResult> {
    let one_way = |from: &TriMesh, to: &TriMesh| -> Result<f64> {
        let samples = sample_surface(from, n, seed)?;
        let bvh = TriangleBvh::build(to, DEFAULT_LEAF_SIZE)?;
        let d: Vec<f64> = samples.points().par_iter().map(|p| bvh.distance(p)).collect();
        Ok(d.iter().sum::<f64>() / n as f64)
    };
    let accuracy_mean = one_way(pred, gt)?;
    let completeness_mean = one_way(gt, pred)?;
    Ok(ChamferResult {
        accuracy_mean,
        completeness_mean,
        symmetric_mean: (accuracy_mean + completeness_mean) / 2.0,
        sample_count: n,
        seed,
    })
}

/// Mean 3D distance between pred samples and the gt samples whose labels
/// are nearest in canonical space (pred to gt direction).
pub fn correspondence_distance(pred: &TriMesh, gt: &TriMesh, n: usize, seed: u64) -> Result<f64> {
    if pred.nocs_labels().is_none() || gt.nocs_labels().is_none() {
        return Err(Error::InvalidMesh(
            "correspondence distance needs nocs labels on both meshes".into(),
        ));
    }
    let ps = sample_surface(pred, n, seed)?;
    let gs = sample_surface(gt, n, seed)?;
    Ok(correspondence_clouds(&ps, &gs))
}

/// Correspondence distance between labeled clouds. Both must carry nocs.
pub fn correspondence_clouds(pred: &PointCloud, gt: &PointCloud) -> f64 {
    let (pl, gl) = (pred.nocs().expect("pred labels"), gt.nocs().expect("gt labels"));
    let tree = KdTree::new(gl);
    let d: Vec<f64> = pl
        .par_iter()
        .zip(pred.points().par_iter())
        .map(|(l, p)| {
            let (j, _) = tree.nearest(l).expect("gt samples");
            (p - gt.points()[j]).norm()
        })
        .collect();
    d.iter().sum::<f64>() / d.len() as f64
}

fn mean_label_error(pred: &[Vec3], gt: impl Iterator<Item = Vec3>) -> f64 {
    pred.iter().zip(gt).map(|(p, g)| (p - g).norm()).sum::<f64>() / pred.len() as f64
}

/// Mean per-point L2 error in canonical space.
///
/// In symmetric mode the error is also computed against the mirrored
/// ground truth and the smaller of the two aggregates is returned.
pub fn nocs_error(pred: &[Vec3], gt: &[Vec3], symmetric: bool, axis: Axis) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predicted labels for {} ground-truth labels",
            pred.len(),
            gt.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Empty("no labels to compare".into()));
    }
    let plain = mean_label_error(pred, gt.iter().copied());
    if !symmetric {
        return Ok(plain);
    }
    let mirrored = mean_label_error(pred, gt.iter().map(|g| mirror_nocs(g, axis)));
    Ok(plain.min(mirrored))
}

/// Canonical label of the observed point closest to the grasp origin.
pub fn infer_grasp_nocs(cloud: &PointCloud) -> Result<Vec3> {
    let nocs = cloud
        .nocs()
        .ok_or_else(|| Error::InvalidCloud("grasp inference needs a nocs channel".into()))?;
    let mut best: Option<(f64, usize)> = None;
    for (i, p) in cloud.points().iter().enumerate() {
        let d = p.norm_squared();
        if best.map_or(true, |(b, _)| d < b) {
            best = Some((d, i));
        }
    }
    let (_, i) = best.ok_or_else(|| Error::Empty("point cloud has no points".into()))?;
    Ok(nocs[i])
}
