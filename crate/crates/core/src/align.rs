//! Recovering the free rotation about the gravity axis.

use std::f64::consts::{PI, TAU};

use nalgebra::Rotation3;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::kdtree::KdTree;
use crate::mesh::{PointCloud, TriMesh};
use crate::metrics::{mean_nearest_distance, DEFAULT_SAMPLES};
use crate::sampling::sample_surface;

pub const DEFAULT_COARSE_STEPS: usize = 72;
pub const DEFAULT_REFINE_ITERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignParams {
    pub coarse_steps: usize,
    pub refine_iters: usize,
    /// Samples drawn from the predicted surface.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AlignParams {
    fn default() -> Self {
        AlignParams {
            coarse_steps: DEFAULT_COARSE_STEPS,
            refine_iters: DEFAULT_REFINE_ITERS,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Alignment {
    /// Rotation about +z in radians, in (-pi, pi].
    pub angle: f64,
    /// Mean distance from observed points to the rotated prediction.
    pub objective: f64,
    /// Objective at each coarse angle `2 pi k / coarse_steps`.
    pub coarse_objectives: Vec<f64>,
    pub aligned: TriMesh,
}

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Rotation of `mesh` by `angle` about the z-axis through the origin.
pub fn rotate_z(mesh: &TriMesh, angle: f64) -> TriMesh {
    let r = Rotation3::from_axis_angle(&Vec3::z_axis(), angle);
    mesh.map_vertices(|p| r * p)
}

/// Finds the z rotation of `pred` that best explains `observed`.
///
/// The objective is the one-directional Chamfer distance from the observed
/// points to samples of the rotated prediction. A uniform grid of
/// `coarse_steps` angles is searched first (ties keep the smallest angle),
/// then golden-section search refines within one grid step of the winner.
/// The refined angle is only taken if it does not score worse. With a single
/// coarse step there is no bracket and angle 0 is returned.
pub fn align_rotation_z(pred: &TriMesh, observed: &PointCloud, params: &AlignParams) -> Result<Alignment> {
    if observed.is_empty() {
        return Err(Error::Empty("observed point cloud has no points".into()));
    }
    if params.coarse_steps == 0 {
        return Err(Error::InvalidArgument("coarse_steps must be at least 1".into()));
    }
    let samples = sample_surface(pred, params.samples, params.seed)?;
    let tree = KdTree::new(samples.points());
    // rotating the observation by -angle is the same as rotating pred by +angle
    let objective = |angle: f64| {
        let r = Rotation3::from_axis_angle(&Vec3::z_axis(), -angle);
        let q: Vec<Vec3> = observed.points().iter().map(|p| r * p).collect();
        mean_nearest_distance(&q, &tree)
    };

    let step = TAU / params.coarse_steps as f64;
    let coarse: Vec<f64> = (0..params.coarse_steps).map(|k| objective(k as f64 * step)).collect();
    let mut best_k = 0;
    for (k, v) in coarse.iter().enumerate() {
        if *v < coarse[best_k] {
            best_k = k;
        }
    }
    let mut angle = best_k as f64 * step;
    let mut best = coarse[best_k];

    if params.coarse_steps > 1 && params.refine_iters > 0 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (angle - step, angle + step);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (objective(x1), objective(x2));
        for _ in 0..params.refine_iters {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = objective(x2);
            }
        }
        let (x, f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if f < best {
            angle = x;
            best = f;
        }
    }
    let angle = wrap(angle);
    Ok(Alignment { angle, objective: best, coarse_objectives: coarse, aligned: rotate_z(pred, angle) })
}
