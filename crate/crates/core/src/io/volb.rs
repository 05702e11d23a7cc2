//! VOLB volume container.
//!
//! One UTF-8 JSON header line terminated by `\n`, then little-endian
//! float32 samples with x fastest. Header keys: `kind`, `dims`, `origin`
//! (center of voxel (0,0,0)), `voxel_size`, and `trunc` for distance fields.
//! Feature volumes use kind `feat`, add `channels`, store samples cell-major
//! then channel, and append one byte per cell (0/1) holding the occupancy
//! mask, flagged by `"mask": true`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::grid::{FieldKind, GridSpec, ScalarGrid};
use crate::scatter::FeatureVolume;

pub const FEATURE_KIND: &str = "feat";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: String,
    dims: [usize; 3],
    origin: [f64; 3],
    voxel_size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trunc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<bool>,
}

/// Contents of a VOLB file.
#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Scalar(ScalarGrid),
    Feature(FeatureVolume),
}

fn encode(header: &Header, samples: &[f32], tail: &[u8]) -> Vec<u8> {
    let mut buf = serde_json::to_vec(header).expect("header serializes");
    buf.push(b'\n');
    buf.reserve(samples.len() * 4 + tail.len());
    for v in samples {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(tail);
    buf
}

pub fn encode_grid(grid: &ScalarGrid) -> Vec<u8> {
    let s = grid.spec();
    let header = Header {
        kind: grid.kind().as_str().to_string(),
        dims: s.dims,
        origin: [s.origin.x, s.origin.y, s.origin.z],
        voxel_size: s.voxel_size,
        trunc: grid.trunc(),
        channels: None,
        mask: None,
    };
    encode(&header, grid.data(), &[])
}

pub fn encode_feature(volume: &FeatureVolume) -> Vec<u8> {
    let d = volume.dims();
    let h = 1.0 / d as f64;
    let header = Header {
        kind: FEATURE_KIND.to_string(),
        dims: [d; 3],
        origin: [0.5 * h; 3],
        voxel_size: h,
        trunc: None,
        channels: Some(volume.channels()),
        mask: Some(true),
    };
    let mask: Vec<u8> = volume.mask().iter().map(|m| *m as u8).collect();
    encode(&header, volume.data(), &mask)
}

pub fn encode_volume(volume: &Volume) -> Vec<u8> {
    match volume {
        Volume::Scalar(g) => encode_grid(g),
        Volume::Feature(f) => encode_feature(f),
    }
}

fn floats(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

pub fn parse_volume(bytes: &[u8], name: &str) -> Result<Volume> {
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| Error::parse(name, "missing header line"))?;
    let header: Header = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| Error::parse(format!("{name}: header"), e.to_string()))?;
    let body = &bytes[nl + 1..];
    let cells: usize = header.dims.iter().product();
    let expect = |len: usize| -> Result<()> {
        if body.len() != len {
            return Err(Error::parse(
                format!("{name}: byte {}", nl + 1),
                format!("expected {len} data bytes, found {}", body.len()),
            ));
        }
        Ok(())
    };

    if header.kind == FEATURE_KIND {
        let channels = header
            .channels
            .ok_or_else(|| Error::parse(name, "feature volume header lacks channels"))?;
        let [d, dy, dz] = header.dims;
        if d != dy || d != dz {
            return Err(Error::parse(name, "feature volumes must be cubic"));
        }
        let with_mask = header.mask.unwrap_or(false);
        let data_len = cells * channels * 4;
        expect(data_len + if with_mask { cells } else { 0 })?;
        let data = floats(&body[..data_len]);
        let mask = if with_mask {
            body[data_len..].iter().map(|b| *b != 0).collect()
        } else {
            // without a stored mask, occupancy is inferred from nonzero data
            data.chunks_exact(channels.max(1)).map(|c| c.iter().any(|v| v.to_bits() != 0)).collect()
        };
        return Ok(Volume::Feature(FeatureVolume::new(d, channels, data, mask)?));
    }

    let kind = FieldKind::parse(&header.kind)
        .ok_or_else(|| Error::parse(name, format!("unknown volume kind {:?}", header.kind)))?;
    expect(cells * 4)?;
    let spec = GridSpec::new(header.dims, Vec3::from(header.origin), header.voxel_size)?;
    Ok(Volume::Scalar(ScalarGrid::new(spec, kind, floats(body), header.trunc)?))
}
