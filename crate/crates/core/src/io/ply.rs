//! Stanford PLY for meshes, labeled isosurfaces and point clouds.
//!
//! Files are written as binary little endian. ASCII and big-endian binary
//! are accepted on read. Extra vertex properties:
//!
//! - meshes: `nocs_x nocs_y nocs_z` (float)
//! - labeled isosurfaces: additionally `grad_mag` (float) and `is_opening`
//!   (uchar 0/1); iso level and threshold live in `comment` lines
//! - point clouds: `red green blue` (float in [0,1], uchar accepted on read),
//!   `nocs_*`, `conf_x conf_y conf_z` and `feat_0 .. feat_{F-1}` (float)
//!
//! Positions are stored as double. The mesh frame is a `comment frame ...`
//! header line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::{FeatureChannels, Frame, PointCloud, TriMesh};
use crate::openings::LabeledMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Scalar> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
    BinaryBe,
}

#[derive(Debug, Clone)]
enum PropType {
    Scalar(Scalar),
    List(Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct PropDef {
    name: String,
    ty: PropType,
}

#[derive(Debug, Clone)]
struct ElementDef {
    name: String,
    count: usize,
    props: Vec<PropDef>,
}

#[derive(Debug)]
enum Column {
    Scalar(Vec<f64>),
    List(Vec<Vec<f64>>),
}

#[derive(Debug)]
struct Element {
    def: ElementDef,
    columns: Vec<Column>,
}

impl Element {
    fn scalar(&self, name: &str) -> Option<&[f64]> {
        self.def.props.iter().zip(&self.columns).find_map(|(p, c)| match c {
            Column::Scalar(v) if p.name == name => Some(v.as_slice()),
            _ => None,
        })
    }

    fn list(&self, names: &[&str]) -> Option<&[Vec<f64>]> {
        self.def.props.iter().zip(&self.columns).find_map(|(p, c)| match c {
            Column::List(v) if names.contains(&p.name.as_str()) => Some(v.as_slice()),
            _ => None,
        })
    }

    fn scalar_type(&self, name: &str) -> Option<Scalar> {
        self.def.props.iter().find_map(|p| match p.ty {
            PropType::Scalar(s) if p.name == name => Some(s),
            _ => None,
        })
    }
}

#[derive(Debug)]
struct PlyData {
    comments: Vec<String>,
    elements: Vec<Element>,
}

impl PlyData {
    fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.def.name == name)
    }

    fn frame(&self) -> Frame {
        self.comments
            .iter()
            .find_map(|c| c.strip_prefix("frame ").and_then(|f| Frame::parse(f.trim())))
            .unwrap_or_default()
    }

    fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments
            .iter()
            .find_map(|c| c.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
            .map(str::trim)
    }
}

fn split_header(bytes: &[u8], name: &str) -> Result<(Vec<String>, usize)> {
    let mut lines = Vec::new();
    let mut pos = 0;
    loop {
        let rest = &bytes[pos..];
        let nl = rest
            .iter()
            .position(|b| *b == b'\n')
            .ok_or_else(|| Error::parse(name, "header has no end_header line"))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::parse(format!("{name}: byte {pos}"), "header is not UTF-8"))?
            .trim_end_matches('\r')
            .to_string();
        pos += nl + 1;
        let done = line.trim() == "end_header";
        lines.push(line);
        if done {
            return Ok((lines, pos));
        }
    }
}

fn parse_header(lines: &[String], name: &str) -> Result<(Encoding, Vec<String>, Vec<ElementDef>)> {
    let ctx = |i: usize| format!("{name}: header line {}", i + 1);
    if lines.first().map(|l| l.trim()) != Some("ply") {
        return Err(Error::parse(ctx(0), "missing ply magic"));
    }
    let mut encoding = None;
    let mut comments = Vec::new();
    let mut elements: Vec<ElementDef> = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                encoding = Some(match tok.next() {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLe,
                    Some("binary_big_endian") => Encoding::BinaryBe,
                    other => return Err(Error::parse(ctx(i), format!("unknown format {other:?}"))),
                });
            }
            Some("comment") => {
                comments.push(line.trim_start()["comment".len()..].trim().to_string());
            }
            Some("obj_info") | Some("end_header") | None => {}
            Some("element") => {
                let ename = tok.next().ok_or_else(|| Error::parse(ctx(i), "element needs a name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::parse(ctx(i), "element needs a count"))?;
                elements.push(ElementDef { name: ename.to_string(), count, props: Vec::new() });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(ctx(i), "property before any element"))?;
                let words: Vec<&str> = tok.collect();
                let bad = || Error::parse(ctx(i), format!("malformed property {line:?}"));
                let prop = match words.as_slice() {
                    ["list", c, t, n] => PropDef {
                        name: n.to_string(),
                        ty: PropType::List(Scalar::parse(c).ok_or_else(bad)?, Scalar::parse(t).ok_or_else(bad)?),
                    },
                    [t, n] => PropDef { name: n.to_string(), ty: PropType::Scalar(Scalar::parse(t).ok_or_else(bad)?) },
                    _ => return Err(bad()),
                };
                el.props.push(prop);
            }
            Some(other) => return Err(Error::parse(ctx(i), format!("unknown header keyword {other:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse(name, "header has no format line"))?;
    Ok((encoding, comments, elements))
}

struct BinReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    big: bool,
    name: &'a str,
}

impl BinReader<'_> {
    fn read(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        if self.pos + n > self.bytes.len() {
            return Err(Error::parse(format!("{}: byte {}", self.name, self.pos), "unexpected end of data"));
        }
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(&self.bytes[self.pos..self.pos + n]);
        if self.big {
            buf[..n].reverse();
        }
        self.pos += n;
        Ok(match ty {
            Scalar::I8 => buf[0] as i8 as f64,
            Scalar::U8 => buf[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(buf),
        })
    }
}

fn parse_ply(bytes: &[u8], name: &str) -> Result<PlyData> {
    let (lines, body_start) = split_header(bytes, name)?;
    let (encoding, comments, defs) = parse_header(&lines, name)?;
    let body = &bytes[body_start..];
    let mut elements = Vec::with_capacity(defs.len());

    let columns_for = |def: &ElementDef| -> Vec<Column> {
        def.props
            .iter()
            .map(|p| match p.ty {
                PropType::Scalar(_) => Column::Scalar(Vec::with_capacity(def.count)),
                PropType::List(..) => Column::List(Vec::with_capacity(def.count)),
            })
            .collect()
    };

    match encoding {
        Encoding::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| Error::parse(name, "ASCII body is not UTF-8"))?;
            let mut rows = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            for def in defs {
                let mut columns = columns_for(&def);
                for r in 0..def.count {
                    let (line_no, line) = rows.next().ok_or_else(|| {
                        Error::parse(name, format!("element {} ends after {r} of {} rows", def.name, def.count))
                    })?;
                    let ctx = || format!("{name}: body line {}", line_no + 1);
                    let mut tok = line.split_whitespace();
                    let mut next = || -> Result<f64> {
                        let t = tok.next().ok_or_else(|| Error::parse(ctx(), "row too short"))?;
                        t.parse().map_err(|_| Error::parse(ctx(), format!("bad number {t:?}")))
                    };
                    for (p, col) in def.props.iter().zip(columns.iter_mut()) {
                        match (&p.ty, col) {
                            (PropType::Scalar(_), Column::Scalar(v)) => v.push(next()?),
                            (PropType::List(..), Column::List(v)) => {
                                let n = next()? as usize;
                                v.push((0..n).map(|_| next()).collect::<Result<_>>()?);
                            }
                            _ => unreachable!(),
                        }
                    }
                }
                elements.push(Element { def, columns });
            }
        }
        Encoding::BinaryLe | Encoding::BinaryBe => {
            let mut rd = BinReader { bytes: body, pos: 0, big: encoding == Encoding::BinaryBe, name };
            for def in defs {
                let mut columns = columns_for(&def);
                for _ in 0..def.count {
                    for (p, col) in def.props.iter().zip(columns.iter_mut()) {
                        match (&p.ty, col) {
                            (PropType::Scalar(t), Column::Scalar(v)) => v.push(rd.read(*t)?),
                            (PropType::List(c, t), Column::List(v)) => {
                                let n = rd.read(*c)?;
                                if !(n >= 0.0) {
                                    return Err(Error::parse(format!("{name}: byte {}", rd.pos), "negative list length"));
                                }
                                v.push((0..n as usize).map(|_| rd.read(*t)).collect::<Result<_>>()?);
                            }
                            _ => unreachable!(),
                        }
                    }
                }
                elements.push(Element { def, columns });
            }
            if rd.pos != body.len() {
                return Err(Error::parse(
                    format!("{name}: byte {}", body_start + rd.pos),
                    format!("{} trailing bytes after last element", body.len() - rd.pos),
                ));
            }
        }
    }
    Ok(PlyData { comments, elements })
}

fn xyz(el: &Element, prefix: &str, name: &str) -> Result<Option<Vec<Vec3>>> {
    let cols: Vec<Option<&[f64]>> = ["x", "y", "z"].iter().map(|a| el.scalar(&format!("{prefix}{a}"))).collect();
    match cols.as_slice() {
        [Some(x), Some(y), Some(z)] => Ok(Some((0..x.len()).map(|i| Vec3::new(x[i], y[i], z[i])).collect())),
        [None, None, None] => Ok(None),
        _ => Err(Error::parse(name, format!("incomplete {prefix}x/y/z property set"))),
    }
}

fn mesh_from(data: &PlyData, name: &str) -> Result<TriMesh> {
    let vert = data.element("vertex").ok_or_else(|| Error::parse(name, "no vertex element"))?;
    let positions = xyz(vert, "", name)?.ok_or_else(|| Error::parse(name, "vertex element lacks x/y/z"))?;
    let labels = xyz(vert, "nocs_", name)?;
    let nv = positions.len();
    let mut triangles = Vec::new();
    if let Some(face) = data.element("face") {
        let lists = face
            .list(&["vertex_indices", "vertex_index"])
            .ok_or_else(|| Error::parse(name, "face element lacks vertex_indices"))?;
        triangles.reserve(lists.len());
        for (f, l) in lists.iter().enumerate() {
            let ctx = || format!("{name}: face {f}");
            if l.len() != 3 {
                return Err(Error::parse(ctx(), format!("only triangles are supported, face has {} corners", l.len())));
            }
            let mut tri = [0u32; 3];
            for (slot, &i) in tri.iter_mut().zip(l) {
                if !(i >= 0.0 && (i as usize) < nv) {
                    return Err(Error::parse(ctx(), format!("vertex index {i} out of range for {nv} vertices")));
                }
                *slot = i as u32;
            }
            triangles.push(tri);
        }
    }
    TriMesh::with_labels(positions, triangles, data.frame(), labels)
}

/// Parses a PLY mesh, reading `nocs_x/y/z` labels when present.
pub fn parse_ply_mesh(bytes: &[u8], name: &str) -> Result<TriMesh> {
    mesh_from(&parse_ply(bytes, name)?, name)
}

/// Parses a labeled isosurface. The stored opening flags are kept as written.
pub fn parse_labeled_ply(bytes: &[u8], name: &str) -> Result<LabeledMesh> {
    let data = parse_ply(bytes, name)?;
    let mesh = mesh_from(&data, name)?;
    let vert = data.element("vertex").unwrap();
    let grad = vert.scalar("grad_mag").ok_or_else(|| Error::parse(name, "vertex element lacks grad_mag"))?;
    let open = vert.scalar("is_opening").ok_or_else(|| Error::parse(name, "vertex element lacks is_opening"))?;
    let number = |key: &str| -> Result<f64> {
        data.comment_value(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(name, format!("missing `comment {key}` header line")))
    };
    Ok(LabeledMesh {
        mesh,
        grad_mag: grad.to_vec(),
        is_opening: open.iter().map(|v| *v != 0.0).collect(),
        iso_level: number("iso_level")?,
        threshold: number("threshold")?,
    })
}

/// Parses a point cloud with any of the optional channels.
pub fn parse_ply_cloud(bytes: &[u8], name: &str) -> Result<PointCloud> {
    let data = parse_ply(bytes, name)?;
    let vert = data.element("vertex").ok_or_else(|| Error::parse(name, "no vertex element"))?;
    let points = xyz(vert, "", name)?.ok_or_else(|| Error::parse(name, "vertex element lacks x/y/z"))?;
    let n = points.len();
    let mut cloud = PointCloud::new(points);

    let triple = |names: [&str; 3], scale: f64| -> Option<Vec<[f32; 3]>> {
        let c: Vec<&[f64]> = names.iter().map(|a| vert.scalar(a)).collect::<Option<_>>()?;
        Some((0..n).map(|i| [(c[0][i] / scale) as f32, (c[1][i] / scale) as f32, (c[2][i] / scale) as f32]).collect())
    };
    let color_scale = match vert.scalar_type("red") {
        Some(Scalar::F32) | Some(Scalar::F64) | None => 1.0,
        Some(Scalar::U8) => 255.0,
        Some(Scalar::U16) => 65535.0,
        Some(other) => return Err(Error::parse(name, format!("unsupported color type {other:?}"))),
    };
    if let Some(colors) = triple(["red", "green", "blue"], color_scale) {
        cloud = cloud.with_colors(colors)?;
    }
    if let Some(nocs) = xyz(vert, "nocs_", name)? {
        cloud = cloud.with_nocs(nocs)?;
    }
    if let Some(conf) = triple(["conf_x", "conf_y", "conf_z"], 1.0) {
        cloud = cloud.with_confidence(conf)?;
    }
    let mut feats = Vec::new();
    while let Some(col) = vert.scalar(&format!("feat_{}", feats.len())) {
        feats.push(col);
    }
    if !feats.is_empty() {
        let dim = feats.len();
        let data = (0..n).flat_map(|i| feats.iter().map(move |c| c[i] as f32)).collect();
        cloud = cloud.with_features(FeatureChannels::new(dim, data)?)?;
    }
    Ok(cloud)
}

#[derive(Clone, Copy)]
enum Out {
    F64,
    F32,
    U8,
}

impl Out {
    fn name(self) -> &'static str {
        match self {
            Out::F64 => "double",
            Out::F32 => "float",
            Out::U8 => "uchar",
        }
    }

    fn push(self, buf: &mut Vec<u8>, v: f64) {
        match self {
            Out::F64 => buf.extend_from_slice(&v.to_le_bytes()),
            Out::F32 => buf.extend_from_slice(&(v as f32).to_le_bytes()),
            Out::U8 => buf.push(v as u8),
        }
    }
}

struct VertexColumn<'a> {
    name: String,
    ty: Out,
    value: Box<dyn Fn(usize) -> f64 + 'a>,
}

fn col<'a>(name: impl Into<String>, ty: Out, value: impl Fn(usize) -> f64 + 'a) -> VertexColumn<'a> {
    VertexColumn { name: name.into(), ty, value: Box::new(value) }
}

fn encode(comments: &[String], n: usize, columns: &[VertexColumn], faces: Option<&[[u32; 3]]>) -> Vec<u8> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    for c in comments {
        writeln!(header, "comment {c}").unwrap();
    }
    writeln!(header, "element vertex {n}").unwrap();
    for c in columns {
        writeln!(header, "property {} {}", c.ty.name(), c.name).unwrap();
    }
    if let Some(f) = faces {
        writeln!(header, "element face {}", f.len()).unwrap();
        header.push_str("property list uchar int vertex_indices\n");
    }
    header.push_str("end_header\n");

    let row: usize = columns.iter().map(|c| match c.ty {
        Out::F64 => 8,
        Out::F32 => 4,
        Out::U8 => 1,
    }).sum();
    let mut buf = header.into_bytes();
    buf.reserve(n * row + faces.map_or(0, |f| f.len() * 13));
    for i in 0..n {
        for c in columns {
            c.ty.push(&mut buf, (c.value)(i));
        }
    }
    for t in faces.unwrap_or(&[]) {
        buf.push(3);
        for &v in t {
            buf.extend_from_slice(&(v as i32).to_le_bytes());
        }
    }
    buf
}

fn mesh_columns(mesh: &TriMesh) -> Vec<VertexColumn<'_>> {
    let v = mesh.vertices();
    let mut cols = vec![
        col("x", Out::F64, move |i| v[i].x),
        col("y", Out::F64, move |i| v[i].y),
        col("z", Out::F64, move |i| v[i].z),
    ];
    if let Some(l) = mesh.nocs_labels() {
        for (a, name) in ["nocs_x", "nocs_y", "nocs_z"].into_iter().enumerate() {
            cols.push(col(name, Out::F32, move |i| l[i][a]));
        }
    }
    cols
}

/// Encodes a mesh (with labels when present) as binary PLY.
pub fn encode_ply_mesh(mesh: &TriMesh) -> Vec<u8> {
    let comments = [format!("frame {}", mesh.frame().as_str())];
    encode(&comments, mesh.vertex_count(), &mesh_columns(mesh), Some(mesh.triangles()))
}

/// Encodes a labeled isosurface as binary PLY.
pub fn encode_labeled_ply(labeled: &LabeledMesh) -> Vec<u8> {
    let mesh = &labeled.mesh;
    let comments = [
        format!("frame {}", mesh.frame().as_str()),
        format!("iso_level {}", labeled.iso_level),
        format!("threshold {}", labeled.threshold),
    ];
    let mut cols = mesh_columns(mesh);
    let (g, o) = (&labeled.grad_mag, &labeled.is_opening);
    cols.push(col("grad_mag", Out::F32, move |i| g[i]));
    cols.push(col("is_opening", Out::U8, move |i| o[i] as u8 as f64));
    encode(&comments, mesh.vertex_count(), &cols, Some(mesh.triangles()))
}

/// Encodes a point cloud and its channels as binary PLY.
pub fn encode_ply_cloud(cloud: &PointCloud) -> Vec<u8> {
    let p = cloud.points();
    let mut cols = vec![
        col("x", Out::F64, move |i| p[i].x),
        col("y", Out::F64, move |i| p[i].y),
        col("z", Out::F64, move |i| p[i].z),
    ];
    if let Some(c) = cloud.colors() {
        for (a, name) in ["red", "green", "blue"].into_iter().enumerate() {
            cols.push(col(name, Out::F32, move |i| c[i][a] as f64));
        }
    }
    if let Some(l) = cloud.nocs() {
        for (a, name) in ["nocs_x", "nocs_y", "nocs_z"].into_iter().enumerate() {
            cols.push(col(name, Out::F32, move |i| l[i][a]));
        }
    }
    if let Some(c) = cloud.confidence() {
        for (a, name) in ["conf_x", "conf_y", "conf_z"].into_iter().enumerate() {
            cols.push(col(name, Out::F32, move |i| c[i][a] as f64));
        }
    }
    if let Some(f) = cloud.features().filter(|f| f.dim() > 0) {
        for a in 0..f.dim() {
            cols.push(col(format!("feat_{a}"), Out::F32, move |i| f.row(i)[a] as f64));
        }
    }
    encode(&[], cloud.len(), &cols, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled_quad() -> TriMesh {
        TriMesh::with_labels(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.1), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2], [0, 2, 3]],
            Frame::Canonical,
            Some(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.3), Vec3::new(0.0, 1.0, 0.7)]),
        )
        .unwrap()
    }

    #[test]
    fn mesh_round_trip() {
        let m = labeled_quad();
        let bytes = encode_ply_mesh(&m);
        let back = parse_ply_mesh(&bytes, "t").unwrap();
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.frame(), Frame::Canonical);
        for (a, b) in back.nocs_labels().unwrap().iter().zip(m.nocs_labels().unwrap()) {
            assert!((a - b).norm() < 1e-6);
        }
        assert_eq!(encode_ply_mesh(&back), bytes);
    }

    #[test]
    fn ascii_with_labels() {
        let text = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
                    property float nocs_x\nproperty float nocs_y\nproperty float nocs_z\n\
                    element face 1\nproperty list uchar int vertex_indices\nend_header\n\
                    0 0 0 0.1 0.2 0.3\n1 0 0 0.4 0.5 0.6\n0 1 0 0.7 0.8 0.9\n3 0 1 2\n";
        let m = parse_ply_mesh(text.as_bytes(), "t").unwrap();
        assert_eq!(m.triangle_count(), 1);
        assert!((m.nocs_labels().unwrap()[2].z - 0.9).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_face_is_reported() {
        let text = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
                    element face 1\nproperty list uchar int vertex_indices\nend_header\n\
                    0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n";
        let msg = parse_ply_mesh(text.as_bytes(), "bad.ply").unwrap_err().to_string();
        assert!(msg.contains("face 0") && msg.contains("out of range"), "{msg}");
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let bytes = encode_ply_mesh(&labeled_quad());
        assert!(parse_ply_mesh(&bytes[..bytes.len() - 3], "t").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(parse_ply_mesh(&extra, "t").is_err());
    }

    #[test]
    fn labeled_round_trip() {
        let m = labeled_quad();
        let lab = LabeledMesh::new(m, vec![0.1, 30.0, 2.5, 0.0], vec![true, false, true, true], 0.5, 3.0).unwrap();
        let bytes = encode_labeled_ply(&lab);
        let back = parse_labeled_ply(&bytes, "t").unwrap();
        assert_eq!(back.is_opening, lab.is_opening);
        assert_eq!((back.iso_level, back.threshold), (0.5, 3.0));
        assert_eq!(encode_labeled_ply(&back), bytes);
    }

    #[test]
    fn cloud_round_trip() {
        let cloud = PointCloud::new(vec![Vec3::new(0.5, -1.0, 2.0), Vec3::new(0.0, 0.25, 1.0)])
            .with_colors(vec![[0.0, 0.5, 1.0], [0.25, 0.25, 0.25]])
            .unwrap()
            .with_nocs(vec![Vec3::new(0.5, 0.5, 0.5), Vec3::new(0.0, 1.0, 0.25)])
            .unwrap()
            .with_confidence(vec![[1.0, 0.5, 0.0], [0.5, 0.5, 0.5]])
            .unwrap()
            .with_features(FeatureChannels::new(2, vec![1.0, -2.0, 3.5, 0.0]).unwrap())
            .unwrap();
        let bytes = encode_ply_cloud(&cloud);
        let back = parse_ply_cloud(&bytes, "t").unwrap();
        assert_eq!(back, cloud);
        assert_eq!(encode_ply_cloud(&back), bytes);
    }

    #[test]
    fn uchar_colors_are_normalized() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n\
                    property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n0 0 0 255 0 51\n";
        let c = parse_ply_cloud(text.as_bytes(), "t").unwrap();
        assert_eq!(c.colors().unwrap()[0], [1.0, 0.0, 0.2]);
    }
}
