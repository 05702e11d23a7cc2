//! Category-level normalized canonical space.
//!
//! All instances of a category share one uniform scale and translation that
//! place the joint bounding box inside the unit cube: the largest axis spans
//! `[0, 1]`, the other two are centered.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::mesh::{Frame, TriMesh};

pub const DEFAULT_BINS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NocsTransform {
    pub category_id: String,
    pub scale: f64,
    pub translation: [f64; 3],
}

impl NocsTransform {
    pub fn new(category_id: impl Into<String>, scale: f64, translation: Vec3) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "nocs scale must be positive and finite, got {scale}"
            )));
        }
        Ok(NocsTransform {
            category_id: category_id.into(),
            scale,
            translation: [translation.x, translation.y, translation.z],
        })
    }

    pub fn identity(category_id: impl Into<String>) -> Self {
        NocsTransform {
            category_id: category_id.into(),
            scale: 1.0,
            translation: [0.0; 3],
        }
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::from(self.translation)
    }

    pub fn to_nocs(&self, p: &Vec3) -> Vec3 {
        p * self.scale + self.translation()
    }

    pub fn from_nocs(&self, q: &Vec3) -> Vec3 {
        (q - self.translation()) / self.scale
    }

    /// Maps every vertex into canonical space and tags the mesh canonical.
    pub fn apply(&self, mesh: &TriMesh) -> TriMesh {
        mesh.map_vertices(|p| self.to_nocs(p))
            .with_frame(Frame::Canonical)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transform serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: NocsTransform = serde_json::from_str(text)
            .map_err(|e| Error::parse("nocs transform json", e.to_string()))?;
        NocsTransform::new(t.category_id, t.scale, Vec3::from(t.translation))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Fits the shared transform for a category from its canonical-pose meshes.
pub fn fit_category_transform(
    category_id: &str,
    meshes: &[TriMesh],
) -> Result<NocsTransform> {
    if meshes.is_empty() {
        return Err(Error::Empty("no meshes to fit a category transform".into()));
    }
    let mut bbox = Aabb::empty();
    for m in meshes {
        if m.frame() != Frame::Canonical {
            return Err(Error::InvalidArgument(
                "category transforms are fitted on canonical-frame meshes".into(),
            ));
        }
        for v in m.vertices() {
            bbox.grow(v);
        }
    }
    if bbox.is_empty() {
        return Err(Error::Empty("meshes have no vertices".into()));
    }
    let extent = bbox.extent();
    let largest = extent.max();
    if !(largest > 0.0) {
        return Err(Error::InvalidArgument(
            "joint bounding box has zero extent".into(),
        ));
    }
    let scale = 1.0 / largest;
    // after scaling, axis a spans extent[a] * scale <= 1; center it
    let translation = Vec3::from_fn(|a, _| {
        let span = extent[a] * scale;
        (1.0 - span) / 2.0 - bbox.min[a] * scale
    });
    NocsTransform::new(category_id, scale, translation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinnedCoord {
    pub ix: u32,
    pub iy: u32,
    pub iz: u32,
    pub bins: u32,
}

impl BinnedCoord {
    pub fn new(ix: u32, iy: u32, iz: u32, bins: u32) -> Result<Self> {
        if bins < 2 || ix >= bins || iy >= bins || iz >= bins {
            return Err(Error::InvalidArgument(format!(
                "bin ({ix}, {iy}, {iz}) out of range for {bins} bins"
            )));
        }
        Ok(BinnedCoord { ix, iy, iz, bins })
    }

    pub fn as_array(&self) -> [u32; 3] {
        [self.ix, self.iy, self.iz]
    }

    /// Linear cell index with x fastest.
    pub fn linear(&self) -> usize {
        let b = self.bins as usize;
        self.ix as usize + b * (self.iy as usize + b * self.iz as usize)
    }
}

#[inline]
pub(crate) fn bin_axis(v: f64, bins: u32) -> u32 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    ((v * bins as f64).floor() as u32).min(bins - 1)
}

/// Discretizes a canonical coordinate into `bins` cells per axis.
pub fn bin_coord(p: &Vec3, bins: u32) -> Result<BinnedCoord> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    Ok(BinnedCoord {
        ix: bin_axis(p.x, bins),
        iy: bin_axis(p.y, bins),
        iz: bin_axis(p.z, bins),
        bins,
    })
}

/// Center of a bin.
pub fn unbin_coord(b: &BinnedCoord) -> Vec3 {
    let n = b.bins as f64;
    Vec3::new(
        (b.ix as f64 + 0.5) / n,
        (b.iy as f64 + 0.5) / n,
        (b.iz as f64 + 0.5) / n,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[default]
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Left-right mirror: the chosen component becomes `1 - component`.
pub fn mirror_nocs(p: &Vec3, axis: Axis) -> Vec3 {
    let mut q = *p;
    let a = axis.index();
    q[a] = 1.0 - q[a];
    q
}
