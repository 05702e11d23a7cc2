//! Reading and writing meshes, point clouds and volumes.

pub mod obj;
pub mod ply;
pub mod volb;

use std::fs;
use std::path::Path;

use clap::ValueEnum;

use crate::error::{Error, Result};
use crate::grid::ScalarGrid;
use crate::mesh::{PointCloud, TriMesh};
use crate::openings::LabeledMesh;
use crate::scatter::FeatureVolume;
pub use volb::Volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Picks the format from the file extension.
    pub fn from_path(path: &Path) -> Result<MeshFormat> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::Unsupported(format!(
                "cannot infer mesh format of {} (expected .obj or .ply)",
                path.display()
            ))),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh> {
    let bytes = read(path)?;
    match format {
        MeshFormat::Obj => {
            let text = String::from_utf8(bytes).map_err(|e| {
                Error::parse(format!("{}: byte {}", label(path), e.utf8_error().valid_up_to()), "OBJ is not UTF-8")
            })?;
            obj::parse_obj(&text, &label(path))
        }
        MeshFormat::Ply => ply::parse_ply_mesh(&bytes, &label(path)),
    }
}

pub fn save_mesh(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<()> {
    match format {
        MeshFormat::Obj => write(path, obj::write_obj(mesh)?.as_bytes()),
        MeshFormat::Ply => write(path, &ply::encode_ply_mesh(mesh)),
    }
}

/// Loads a mesh, choosing the format by extension.
pub fn load_mesh_auto(path: &Path) -> Result<TriMesh> {
    load_mesh(path, MeshFormat::from_path(path)?)
}

pub fn save_mesh_auto(mesh: &TriMesh, path: &Path) -> Result<()> {
    save_mesh(mesh, path, MeshFormat::from_path(path)?)
}

pub fn load_labeled_mesh(path: &Path) -> Result<LabeledMesh> {
    ply::parse_labeled_ply(&read(path)?, &label(path))
}

pub fn save_labeled_mesh(labeled: &LabeledMesh, path: &Path) -> Result<()> {
    write(path, &ply::encode_labeled_ply(labeled))
}

pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    ply::parse_ply_cloud(&read(path)?, &label(path))
}

pub fn save_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    write(path, &ply::encode_ply_cloud(cloud))
}

pub fn load_volume(path: &Path) -> Result<Volume> {
    volb::parse_volume(&read(path)?, &label(path))
}

pub fn save_volume(volume: &Volume, path: &Path) -> Result<()> {
    write(path, &volb::encode_volume(volume))
}

pub fn load_grid(path: &Path) -> Result<ScalarGrid> {
    match load_volume(path)? {
        Volume::Scalar(g) => Ok(g),
        Volume::Feature(_) => Err(Error::Unsupported(format!("{} holds a feature volume", path.display()))),
    }
}

pub fn save_grid(grid: &ScalarGrid, path: &Path) -> Result<()> {
    write(path, &volb::encode_grid(grid))
}

pub fn load_feature_volume(path: &Path) -> Result<FeatureVolume> {
    match load_volume(path)? {
        Volume::Feature(f) => Ok(f),
        Volume::Scalar(_) => Err(Error::Unsupported(format!("{} holds a scalar grid", path.display()))),
    }
}

pub fn save_feature_volume(volume: &FeatureVolume, path: &Path) -> Result<()> {
    write(path, &volb::encode_feature(volume))
}
