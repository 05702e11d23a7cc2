//! Surface/opening classification of extracted winding-number isosurfaces.
//!
//! Across a real sheet the field jumps by about one within a voxel, so the
//! gradient magnitude is near `1/h`. Through an opening the same unit drop is
//! spread over the width of the hole and the gradient stays small.

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::grid::ScalarGrid;
use crate::mesh::TriMesh;

/// Default opening threshold as a multiple of `1/h`.
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 0.5;

/// How vertex gradients are evaluated on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum GradientScheme {
    /// Analytic gradient of the trilinear interpolant in the vertex's cell.
    #[default]
    Cell,
    /// Central differences of the trilinear field with step `h`.
    Central,
}

#[derive(Debug, Clone)]
pub struct LabeledMesh {
    pub mesh: TriMesh,
    pub grad_mag: Vec<f64>,
    pub is_opening: Vec<bool>,
    pub iso_level: f64,
    pub threshold: f64,
}

impl LabeledMesh {
    /// Assembles a labeled mesh, checking array lengths and the threshold rule.
    pub fn new(
        mesh: TriMesh,
        grad_mag: Vec<f64>,
        is_opening: Vec<bool>,
        iso_level: f64,
        threshold: f64,
    ) -> Result<Self> {
        let n = mesh.vertex_count();
        if grad_mag.len() != n || is_opening.len() != n {
            return Err(Error::InvalidMesh(format!(
                "{} vertices but {} gradient magnitudes and {} opening flags",
                n,
                grad_mag.len(),
                is_opening.len()
            )));
        }
        if let Some(v) = grad_mag.iter().position(|g| !(*g >= 0.0)) {
            return Err(Error::InvalidMesh(format!("vertex {v}: gradient magnitude must be >= 0")));
        }
        if let Some(v) = (0..n).find(|&v| is_opening[v] != (grad_mag[v] < threshold)) {
            return Err(Error::InvalidMesh(format!(
                "vertex {v}: opening flag disagrees with threshold {threshold}"
            )));
        }
        Ok(LabeledMesh { mesh, grad_mag, is_opening, iso_level, threshold })
    }

    pub fn opening_count(&self) -> usize {
        self.is_opening.iter().filter(|o| **o).count()
    }
}

/// Threshold `factor / h` for a grid.
pub fn threshold_for(grid: &ScalarGrid, factor: f64) -> f64 {
    factor / grid.voxel_size()
}

/// Labels each vertex of `surface` by the gradient magnitude of `grid`.
///
/// `threshold` is absolute (field units per length); vertices with
/// `grad_mag < threshold` are openings. The iso level is recorded as 0.5.
pub fn classify_openings(surface: &TriMesh, grid: &ScalarGrid, threshold: f64) -> LabeledMesh {
    classify_openings_with(surface, grid, threshold, 0.5, GradientScheme::default())
}

pub fn classify_openings_with(
    surface: &TriMesh,
    grid: &ScalarGrid,
    threshold: f64,
    iso_level: f64,
    scheme: GradientScheme,
) -> LabeledMesh {
    let hull = grid.spec().hull();
    let h = grid.voxel_size();
    // the central scheme needs one voxel of room on each side
    let (lo, hi) = match scheme {
        GradientScheme::Cell => (hull.min, hull.max),
        GradientScheme::Central => (hull.min.add_scalar(h), hull.max.add_scalar(-h)),
    };
    let results: Vec<(f64, bool)> = surface
        .vertices()
        .par_iter()
        .map(|v| {
            let p = Vec3::new(
                v.x.clamp(lo.x, hi.x.max(lo.x)),
                v.y.clamp(lo.y, hi.y.max(lo.y)),
                v.z.clamp(lo.z, hi.z.max(lo.z)),
            );
            let clamped = p != *v;
            let g = match scheme {
                GradientScheme::Cell => grid.gradient_cell(&p),
                GradientScheme::Central => grid.gradient(&p),
            };
            (g.map(|g| g.norm()).unwrap_or(0.0), clamped)
        })
        .collect();
    let clamped = results.iter().filter(|r| r.1).count();
    if clamped > 0 {
        warn!("{clamped} vertices outside the grid hull were clamped before gradient evaluation");
    }
    let grad_mag: Vec<f64> = results.into_iter().map(|r| r.0).collect();
    let is_opening = grad_mag.iter().map(|g| *g < threshold).collect();
    LabeledMesh { mesh: surface.clone(), grad_mag, is_opening, iso_level, threshold }
}

/// Removes triangles whose three vertices are all openings.
pub fn strip_openings(labeled: &LabeledMesh) -> TriMesh {
    let tris = labeled.mesh.triangles();
    labeled
        .mesh
        .filter_triangles(|t| !tris[t].iter().all(|&v| labeled.is_opening[v as usize]))
}
