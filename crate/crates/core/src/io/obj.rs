//! Wavefront OBJ: positions and triangular faces only.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::{Frame, TriMesh};

/// Parses OBJ text. `name` is used in error context.
///
/// Normals, texture coordinates, groups and materials are skipped. A
/// `# frame canonical` comment tags the mesh frame.
pub fn parse_obj(text: &str, name: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces: Vec<([i64; 3], usize)> = Vec::new();
    let mut frame = Frame::Task;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let ctx = || format!("{name}:{line_no}");
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("frame") {
                if let Some(f) = words.next().and_then(Frame::parse) {
                    frame = f;
                }
            }
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut p = [0f64; 3];
                for c in p.iter_mut() {
                    let t = tok.next().ok_or_else(|| Error::parse(ctx(), "vertex needs 3 coordinates"))?;
                    *c = t
                        .parse()
                        .map_err(|_| Error::parse(ctx(), format!("bad coordinate {t:?}")))?;
                }
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(Error::parse(ctx(), "non-finite coordinate"));
                }
                vertices.push(Vec3::from(p));
            }
            Some("f") => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    return Err(Error::parse(
                        ctx(),
                        format!("only triangles are supported, face has {} corners", refs.len()),
                    ));
                }
                let mut idx = [0i64; 3];
                for (slot, r) in idx.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or("");
                    *slot = head
                        .parse()
                        .map_err(|_| Error::parse(ctx(), format!("bad vertex reference {r:?}")))?;
                }
                faces.push((idx, line_no));
            }
            _ => {}
        }
    }
    let nv = vertices.len() as i64;
    let mut triangles = Vec::with_capacity(faces.len());
    for (idx, line_no) in faces {
        let mut tri = [0u32; 3];
        for (slot, &i) in tri.iter_mut().zip(&idx) {
            // 1-based, negative counts back from the end
            let resolved = if i > 0 { i - 1 } else { nv + i };
            if i == 0 || resolved < 0 || resolved >= nv {
                return Err(Error::parse(
                    format!("{name}:{line_no}"),
                    format!("vertex index {i} out of range for {nv} vertices"),
                ));
            }
            *slot = resolved as u32;
        }
        triangles.push(tri);
    }
    TriMesh::with_labels(vertices, triangles, frame, None)
}

/// Serializes geometry to OBJ text. Labels cannot be stored in OBJ.
pub fn write_obj(mesh: &TriMesh) -> Result<String> {
    if mesh.nocs_labels().is_some() {
        return Err(Error::Unsupported(
            "OBJ cannot carry per-vertex nocs labels; save as PLY".into(),
        ));
    }
    let mut out = String::new();
    writeln!(out, "# frame {}", mesh.frame().as_str()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    Ok(out)
}
