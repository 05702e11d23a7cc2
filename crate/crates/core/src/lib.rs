//! Geometry kernel for thin-shell garment shape representation.
//!
//! Winding-number fields and baseline volumetric rasterizers, canonical
//! coordinate space utilities, feature scattering, isosurface extraction with
//! opening detection, and point-cloud evaluation metrics.

pub mod align;
pub mod bvh;
pub mod error;
pub mod geom;
pub mod grid;
pub mod io;
pub mod kdtree;
pub mod marching;
pub mod mesh;
pub mod metrics;
pub mod nocs;
pub mod openings;
pub mod raster;
pub mod sampling;
pub mod scatter;
pub mod shapes;
pub mod tribox;
pub mod winding;

pub use error::{Error, Result};
pub use geom::{Aabb, Vec3};
pub use mesh::{Frame, PointCloud, TriMesh, ValidationReport};
