//! Scattering per-point features into a dense canonical feature volume.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::PointCloud;
use crate::nocs::bin_coord;

pub const DEFAULT_DIMS: usize = 32;
/// Width of the backbone feature in the reference configuration.
pub const DEFAULT_BACKBONE_DIM: usize = 128;
/// Position, canonical coordinate and confidence, three values each.
pub const GEOMETRY_CHANNELS: usize = 9;

/// Per-point feature rows `[task xyz | nocs xyz | confidence xyz | backbone]`
/// together with the canonical coordinates used for binning.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterInput {
    channels: usize,
    nocs: Vec<Vec3>,
    rows: Vec<f32>,
}

impl ScatterInput {
    /// Builds an input from raw rows of `channels` values.
    pub fn new(nocs: Vec<Vec3>, channels: usize, rows: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidArgument("feature rows need at least one channel".into()));
        }
        if rows.len() != nocs.len() * channels {
            return Err(Error::InvalidCloud(format!(
                "{} feature values for {} points of {} channels",
                rows.len(),
                nocs.len(),
                channels
            )));
        }
        if let Some(i) = nocs.iter().position(|p| p.iter().any(|c| !(0.0..=1.0).contains(c))) {
            return Err(Error::InvalidCloud(format!("nocs of point {i} lies outside [0,1]^3")));
        }
        Ok(ScatterInput { channels, nocs, rows })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.nocs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nocs.is_empty()
    }

    pub fn nocs(&self) -> &[Vec3] {
        &self.nocs
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.channels..(i + 1) * self.channels]
    }
}

/// Concatenates the cloud channels into scatter rows.
///
/// The nocs and confidence channels are required. A cloud without backbone
/// features yields the 9-channel geometry-only layout.
pub fn assemble_features(cloud: &PointCloud) -> Result<ScatterInput> {
    let nocs = cloud
        .nocs()
        .ok_or_else(|| Error::InvalidCloud("missing nocs channel".into()))?;
    let conf = cloud
        .confidence()
        .ok_or_else(|| Error::InvalidCloud("missing confidence channel".into()))?;
    let backbone = cloud.features().filter(|f| f.dim() > 0);
    let f = backbone.map_or(0, |b| b.dim());
    let channels = GEOMETRY_CHANNELS + f;
    let mut rows = Vec::with_capacity(cloud.len() * channels);
    for (i, p) in cloud.points().iter().enumerate() {
        rows.extend(p.iter().map(|v| *v as f32));
        rows.extend(nocs[i].iter().map(|v| *v as f32));
        rows.extend_from_slice(&conf[i]);
        if let Some(b) = backbone {
            rows.extend_from_slice(b.row(i));
        }
    }
    ScatterInput::new(nocs.to_vec(), channels, rows)
}

/// Dense `D^3 x C` volume over the unit cube, cell-major then channel,
/// cells ordered x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVolume {
    dims: usize,
    channels: usize,
    data: Vec<f32>,
    mask: Vec<bool>,
}

impl FeatureVolume {
    /// Checks the layout and that unoccupied cells are all zero.
    pub fn new(dims: usize, channels: usize, data: Vec<f32>, mask: Vec<bool>) -> Result<Self> {
        if dims < 2 || channels == 0 {
            return Err(Error::InvalidArgument(format!(
                "feature volume needs dims >= 2 and channels >= 1, got {dims} and {channels}"
            )));
        }
        let cells = dims * dims * dims;
        if mask.len() != cells || data.len() != cells * channels {
            return Err(Error::InvalidArgument(format!(
                "expected {cells} cells of {channels} channels, got {} values and {} mask entries",
                data.len(),
                mask.len()
            )));
        }
        if let Some(c) = (0..cells).find(|&c| {
            !mask[c] && data[c * channels..(c + 1) * channels].iter().any(|v| v.to_bits() != 0)
        }) {
            return Err(Error::InvalidArgument(format!("unoccupied cell {c} holds nonzero data")));
        }
        Ok(FeatureVolume { dims, channels, data, mask })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn cell_count(&self) -> usize {
        self.mask.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    fn linear(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims * (j + self.dims * k)
    }

    pub fn cell(&self, i: usize, j: usize, k: usize) -> &[f32] {
        let c = self.linear(i, j, k);
        &self.data[c * self.channels..(c + 1) * self.channels]
    }

    /// Center of cell `(i, j, k)` in the unit cube.
    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let d = self.dims as f64;
        Vec3::new((i as f64 + 0.5) / d, (j as f64 + 0.5) / d, (k as f64 + 0.5) / d)
    }

    /// Trilinear blend of the eight cell centers around `q`.
    ///
    /// Queries in the outer half-cell border are clamped onto the hull of
    /// cell centers.
    pub fn gather_trilinear(&self, q: &Vec3) -> Vec<f32> {
        let d = self.dims;
        let mut base = [0usize; 3];
        let mut t = [0f64; 3];
        for a in 0..3 {
            let u = (q[a] * d as f64 - 0.5).clamp(0.0, (d - 1) as f64);
            let i0 = (u.floor() as usize).min(d - 2);
            base[a] = i0;
            t[a] = u - i0 as f64;
        }
        let mut out = vec![0f64; self.channels];
        for n in 0..8 {
            let (dx, dy, dz) = (n & 1, (n >> 1) & 1, (n >> 2) & 1);
            let w = [(1.0 - t[0], t[0]), (1.0 - t[1], t[1]), (1.0 - t[2], t[2])];
            let weight = (if dx == 1 { w[0].1 } else { w[0].0 })
                * (if dy == 1 { w[1].1 } else { w[1].0 })
                * (if dz == 1 { w[2].1 } else { w[2].0 });
            if weight == 0.0 {
                continue;
            }
            let cell = self.cell(base[0] + dx, base[1] + dy, base[2] + dz);
            for (o, v) in out.iter_mut().zip(cell) {
                *o += weight * *v as f64;
            }
        }
        out.into_iter().map(|v| v as f32).collect()
    }
}

fn max_total(a: f32, b: f32) -> f32 {
    if b.total_cmp(&a).is_gt() {
        b
    } else {
        a
    }
}

/// Channel-wise maximum of all rows landing in each cell.
///
/// Points are grouped per cell with a counting sort, then cells are reduced
/// in parallel. Maxima use the IEEE total order, so the result is bitwise
/// independent of point order and worker count.
pub fn scatter_max(input: &ScatterInput, dims: usize) -> Result<FeatureVolume> {
    if dims < 2 {
        return Err(Error::InvalidArgument(format!("dims must be >= 2, got {dims}")));
    }
    let c = input.channels;
    let cells = dims * dims * dims;
    let cell_of: Vec<usize> = input
        .nocs
        .iter()
        .map(|p| bin_coord(p, dims as u32).map(|b| b.linear()))
        .collect::<Result<_>>()?;

    let mut start = vec![0usize; cells + 1];
    for &cell in &cell_of {
        start[cell + 1] += 1;
    }
    for i in 0..cells {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut members = vec![0usize; cell_of.len()];
    for (p, &cell) in cell_of.iter().enumerate() {
        members[fill[cell]] = p;
        fill[cell] += 1;
    }

    let mut data = vec![0f32; cells * c];
    data.par_chunks_mut(c).enumerate().for_each(|(cell, out)| {
        let group = &members[start[cell]..start[cell + 1]];
        if let Some((&first, rest)) = group.split_first() {
            out.copy_from_slice(input.row(first));
            for &p in rest {
                for (o, v) in out.iter_mut().zip(input.row(p)) {
                    *o = max_total(*o, *v);
                }
            }
        }
    });
    let mask = (0..cells).map(|cell| start[cell + 1] > start[cell]).collect();
    Ok(FeatureVolume { dims, channels: c, data, mask })
}
