//! Dense scalar grids sampled at voxel centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};

/// Placement of a regular grid. `origin` is the center of voxel (0, 0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub origin: Vec3,
    pub voxel_size: f64,
}

/// Voxels of padding around the unit cube in the canonical grid.
pub const CANONICAL_MARGIN: usize = 4;

impl GridSpec {
    pub fn new(dims: [usize; 3], origin: Vec3, voxel_size: f64) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 voxels per axis, got {dims:?}"
            )));
        }
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "voxel size must be positive, got {voxel_size}"
            )));
        }
        Ok(GridSpec {
            dims,
            origin,
            voxel_size,
        })
    }

    /// `n^3` grid over the unit cube with a four-voxel margin on every side.
    pub fn canonical(n: usize) -> Result<Self> {
        if n <= 2 * CANONICAL_MARGIN {
            return Err(Error::InvalidArgument(format!(
                "canonical grid needs more than {} voxels per axis",
                2 * CANONICAL_MARGIN
            )));
        }
        let h = 1.0 / (n - 2 * CANONICAL_MARGIN) as f64;
        let o = -(CANONICAL_MARGIN as f64 - 0.5) * h;
        GridSpec::new([n; 3], Vec3::repeat(o), h)
    }

    /// Cubic `n^3` grid around `bbox`: the largest extent spans `n - 2 * margin`
    /// voxels, and the box sits in the middle.
    pub fn fit(bbox: &Aabb, n: usize, margin: usize) -> Result<Self> {
        if n <= 2 * margin {
            return Err(Error::InvalidArgument("grid too small for its margin".into()));
        }
        let extent = bbox.extent().max();
        if !(extent > 0.0) {
            return Err(Error::InvalidArgument("bounding box has zero extent".into()));
        }
        let h = extent / (n - 2 * margin) as f64;
        let half_span = 0.5 * (n as f64 - 1.0) * h;
        GridSpec::new([n; 3], bbox.center() - Vec3::repeat(half_span), h)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.voxel_size
    }

    /// All voxel centers in storage order.
    pub fn centers(&self) -> Vec<Vec3> {
        (0..self.len())
            .map(|idx| {
                let [i, j, k] = self.unindex(idx);
                self.center(i, j, k)
            })
            .collect()
    }

    /// Box spanned by the voxel centers (the trilinear sampling hull).
    pub fn hull(&self) -> Aabb {
        Aabb {
            min: self.origin,
            max: self.center(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1),
        }
    }

    /// True if `bbox` lies at least one voxel inside the outer voxel faces.
    pub fn covers(&self, bbox: &Aabb) -> bool {
        let hull = self.hull();
        let pad = 0.5 * self.voxel_size;
        (0..3).all(|a| bbox.min[a] >= hull.min[a] + pad && bbox.max[a] <= hull.max[a] - pad)
    }

    /// Continuous voxel coordinate of `p`, snapped to integers within 1e-9.
    #[inline]
    fn continuous(&self, p: &Vec3) -> Vec3 {
        let mut u = (p - self.origin) / self.voxel_size;
        for a in 0..3 {
            let r = u[a].round();
            if (u[a] - r).abs() < 1e-9 {
                u[a] = r;
            }
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Wnf,
    Occupancy,
    Tsdf,
    Tdf,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Wnf => "wnf",
            FieldKind::Occupancy => "occupancy",
            FieldKind::Tsdf => "tsdf",
            FieldKind::Tdf => "tdf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wnf" => Some(FieldKind::Wnf),
            "occupancy" | "occ" => Some(FieldKind::Occupancy),
            "tsdf" => Some(FieldKind::Tsdf),
            "tdf" => Some(FieldKind::Tdf),
            _ => None,
        }
    }
}

/// A single scalar field on a [`GridSpec`], stored x-fastest as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    spec: GridSpec,
    kind: FieldKind,
    data: Vec<f32>,
    trunc: Option<f64>,
}

impl ScalarGrid {
    pub fn new(spec: GridSpec, kind: FieldKind, data: Vec<f32>, trunc: Option<f64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "grid data has {} values, dims {:?} need {}",
                data.len(),
                spec.dims,
                spec.len()
            )));
        }
        match kind {
            FieldKind::Occupancy => {
                if data.iter().any(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::InvalidArgument("occupancy values must be 0 or 1".into()));
                }
            }
            FieldKind::Tsdf | FieldKind::Tdf => {
                let t = trunc.ok_or_else(|| {
                    Error::InvalidArgument(format!("{} grid needs a truncation distance", kind.as_str()))
                })?;
                if !(t > 0.0) {
                    return Err(Error::InvalidArgument("truncation must be positive".into()));
                }
                let t32 = t as f32;
                let lo = if kind == FieldKind::Tsdf { -t32 } else { 0.0 };
                if data.iter().any(|&v| !(v >= lo && v <= t32)) {
                    return Err(Error::InvalidArgument(format!(
                        "{} values must lie within the truncation band",
                        kind.as_str()
                    )));
                }
            }
            FieldKind::Wnf => {}
        }
        let trunc = match kind {
            FieldKind::Tsdf | FieldKind::Tdf => trunc,
            _ => None,
        };
        Ok(ScalarGrid {
            spec,
            kind,
            data,
            trunc,
        })
    }

    /// Grid filled by evaluating `f` at every voxel center.
    pub fn from_fn(spec: GridSpec, kind: FieldKind, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        let data = spec.centers().iter().map(|c| f(c) as f32).collect();
        ScalarGrid::new(spec, kind, data, None)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn trunc(&self) -> Option<f64> {
        self.trunc
    }

    pub fn dims(&self) -> [usize; 3] {
        self.spec.dims
    }

    pub fn voxel_size(&self) -> f64 {
        self.spec.voxel_size
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f32 {
        self.data[self.spec.index(i, j, k)]
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Fraction of voxels holding a nonzero value.
    pub fn nonzero_fraction(&self) -> f64 {
        self.data.iter().filter(|&&v| v != 0.0).count() as f64 / self.data.len() as f64
    }

    fn locate(&self, p: &Vec3) -> Result<([usize; 3], Vec3)> {
        let u = self.spec.continuous(p);
        let mut base = [0usize; 3];
        let mut t = Vec3::zeros();
        for a in 0..3 {
            let top = (self.spec.dims[a] - 1) as f64;
            if !(u[a] >= 0.0 && u[a] <= top) {
                return Err(Error::OutOfHull { x: p.x, y: p.y, z: p.z });
            }
            let i0 = (u[a].floor() as usize).min(self.spec.dims[a] - 2);
            base[a] = i0;
            t[a] = u[a] - i0 as f64;
        }
        Ok((base, t))
    }

    fn corners(&self, [i, j, k]: [usize; 3]) -> [f64; 8] {
        let mut c = [0.0; 8];
        for (n, v) in c.iter_mut().enumerate() {
            *v = self.at(i + (n & 1), j + ((n >> 1) & 1), k + ((n >> 2) & 1)) as f64;
        }
        c
    }

    /// Trilinear blend of the eight surrounding voxel centers.
    pub fn trilinear_sample(&self, p: &Vec3) -> Result<f64> {
        let (base, t) = self.locate(p)?;
        let c = self.corners(base);
        let lerp = |a: f64, b: f64, s: f64| a * (1.0 - s) + b * s;
        let x00 = lerp(c[0], c[1], t.x);
        let x10 = lerp(c[2], c[3], t.x);
        let x01 = lerp(c[4], c[5], t.x);
        let x11 = lerp(c[6], c[7], t.x);
        Ok(lerp(lerp(x00, x10, t.y), lerp(x01, x11, t.y), t.z))
    }

    /// Central difference of the trilinear field with step `h` per axis.
    pub fn gradient(&self, p: &Vec3) -> Result<Vec3> {
        let h = self.spec.voxel_size;
        let mut g = Vec3::zeros();
        for a in 0..3 {
            let mut e = Vec3::zeros();
            e[a] = h;
            g[a] = (self.trilinear_sample(&(p + e))? - self.trilinear_sample(&(p - e))?) / (2.0 * h);
        }
        Ok(g)
    }

    /// Exact gradient of the trilinear interpolant inside the cell holding `p`.
    ///
    /// On a cell face the cell on the positive side is used (the last cell at
    /// the upper hull boundary).
    pub fn gradient_cell(&self, p: &Vec3) -> Result<Vec3> {
        let (base, t) = self.locate(p)?;
        let c = self.corners(base);
        let h = self.spec.voxel_size;
        let lerp = |a: f64, b: f64, s: f64| a * (1.0 - s) + b * s;
        let dx = lerp(
            lerp(c[1] - c[0], c[3] - c[2], t.y),
            lerp(c[5] - c[4], c[7] - c[6], t.y),
            t.z,
        );
        let dy = lerp(
            lerp(c[2] - c[0], c[3] - c[1], t.x),
            lerp(c[6] - c[4], c[7] - c[5], t.x),
            t.z,
        );
        let dz = lerp(
            lerp(c[4] - c[0], c[5] - c[1], t.x),
            lerp(c[6] - c[2], c[7] - c[3], t.x),
            t.y,
        );
        Ok(Vec3::new(dx, dy, dz) / h)
    }

    /// Splits the grid into `parts[0] * parts[1] * parts[2]` equal blocks,
    /// ordered with the x block index fastest.
    pub fn slice(&self, parts: [usize; 3]) -> Result<Vec<ScalarGrid>> {
        let dims = self.spec.dims;
        for a in 0..3 {
            if parts[a] == 0 || dims[a] % parts[a] != 0 || dims[a] / parts[a] < 2 {
                return Err(Error::InvalidArgument(format!(
                    "dims {dims:?} cannot be split into {parts:?} blocks of at least 2 voxels"
                )));
            }
        }
        let sub = [dims[0] / parts[0], dims[1] / parts[1], dims[2] / parts[2]];
        let mut out = Vec::with_capacity(parts.iter().product());
        for bz in 0..parts[2] {
            for by in 0..parts[1] {
                for bx in 0..parts[0] {
                    let off = [bx * sub[0], by * sub[1], bz * sub[2]];
                    let mut origin = self.spec.origin;
                    for a in 0..3 {
                        if off[a] > 0 {
                            origin[a] += off[a] as f64 * self.spec.voxel_size;
                        }
                    }
                    let spec = GridSpec::new(sub, origin, self.spec.voxel_size)?;
                    let mut data = Vec::with_capacity(spec.len());
                    for k in 0..sub[2] {
                        for j in 0..sub[1] {
                            let start = self.spec.index(off[0], off[1] + j, off[2] + k);
                            data.extend_from_slice(&self.data[start..start + sub[0]]);
                        }
                    }
                    out.push(ScalarGrid {
                        spec,
                        kind: self.kind,
                        data,
                        trunc: self.trunc,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`ScalarGrid::slice`].
    pub fn merge(parts_grid: &[ScalarGrid], parts: [usize; 3]) -> Result<ScalarGrid> {
        let count: usize = parts.iter().product();
        if parts_grid.len() != count || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "expected {count} blocks, got {}",
                parts_grid.len()
            )));
        }
        let first = &parts_grid[0];
        let sub = first.spec.dims;
        if parts_grid.iter().any(|g| {
            g.spec.dims != sub
                || g.kind != first.kind
                || g.trunc != first.trunc
                || g.spec.voxel_size != first.spec.voxel_size
        }) {
            return Err(Error::InvalidArgument("blocks disagree on dims, kind or spacing".into()));
        }
        let dims = [sub[0] * parts[0], sub[1] * parts[1], sub[2] * parts[2]];
        let spec = GridSpec::new(dims, first.spec.origin, first.spec.voxel_size)?;
        let mut data = vec![0f32; spec.len()];
        for (b, g) in parts_grid.iter().enumerate() {
            let bx = b % parts[0];
            let by = (b / parts[0]) % parts[1];
            let bz = b / (parts[0] * parts[1]);
            let off = [bx * sub[0], by * sub[1], bz * sub[2]];
            for k in 0..sub[2] {
                for j in 0..sub[1] {
                    let dst = spec.index(off[0], off[1] + j, off[2] + k);
                    let src = g.spec.index(0, j, k);
                    data[dst..dst + sub[0]].copy_from_slice(&g.data[src..src + sub[0]]);
                }
            }
        }
        Ok(ScalarGrid {
            spec,
            kind: first.kind,
            data,
            trunc: first.trunc,
        })
    }
}

/// Splits into the eight octant blocks.
pub fn slice_volume(grid: &ScalarGrid) -> Result<Vec<ScalarGrid>> {
    grid.slice([2, 2, 2])
}

pub fn merge_volume(parts: &[ScalarGrid]) -> Result<ScalarGrid> {
    ScalarGrid::merge(parts, [2, 2, 2])
}
