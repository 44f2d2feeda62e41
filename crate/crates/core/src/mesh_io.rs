//! Geometric base types and the ascii mesh / point-cloud formats.
//!
//! Meshes: Wavefront OBJ (`v` and `f` records, polygons fan-triangulated from
//! their first vertex) and OFF. Point clouds: XYZ, ascii PLY and CSV with the
//! header `x,y,z`. Coordinates are written with the shortest representation
//! that parses back to the same `f64`, so save/load is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Indexed triangle surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, checking index bounds and rejecting faces that repeat a vertex.
    /// An empty face list is allowed here; sampling rejects it.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (i, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx >= vertices.len() {
                    return Err(Error::Index {
                        line: i + 1,
                        index: idx as i64,
                        count: vertices.len(),
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::parse(i + 1, format!("face {i} repeats a vertex")));
            }
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite vertex coordinate".into()));
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        let u = sub(b, a);
        let v = sub(c, a);
        0.5 * norm(cross(u, v))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.triangle_area(f)).sum()
    }

    /// Axis-aligned bounds of the vertex set, `None` when there are no vertices.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1]), lo[2].min(p[2])],
                [hi[0].max(p[0]), hi[1].max(p[1]), hi[2].max(p[2])],
            )
        }))
    }
}

/// Unordered set of 3-D points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite point coordinate".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }
}

pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("off") => Ok(MeshFormat::Off),
            Some("stl") => Err(Error::UnsupportedFormat(
                "STL meshes are not supported; convert to ascii OBJ or OFF".into(),
            )),
            other => Err(Error::UnsupportedFormat(format!(
                "unknown mesh extension {:?}",
                other.unwrap_or("")
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Off => "off",
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "off" => Ok(MeshFormat::Off),
            other => Err(Error::UnsupportedFormat(format!("mesh format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudFormat {
    Xyz,
    Ply,
    Csv,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("xyz") => Ok(CloudFormat::Xyz),
            Some("ply") => Ok(CloudFormat::Ply),
            Some("csv") => Ok(CloudFormat::Csv),
            other => Err(Error::UnsupportedFormat(format!(
                "unknown point cloud extension {:?}",
                other.unwrap_or("")
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            CloudFormat::Xyz => "xyz",
            CloudFormat::Ply => "ply",
            CloudFormat::Csv => "csv",
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xyz" => Ok(CloudFormat::Xyz),
            "ply" | "ply-ascii" => Ok(CloudFormat::Ply),
            "csv" => Ok(CloudFormat::Csv),
            other => Err(Error::UnsupportedFormat(format!("point cloud format {other:?}"))),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| {
        Error::UnsupportedFormat(format!("{} is not ascii/utf-8 text", path.display()))
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let text = read_text(path)?;
    match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::Off => parse_off(&text),
    }
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let text = match format {
        MeshFormat::Obj => write_obj(mesh),
        MeshFormat::Off => write_off(mesh),
    };
    write_text(path, &text)
}

pub fn load_point_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = read_text(path)?;
    match format {
        CloudFormat::Xyz => parse_xyz(&text),
        CloudFormat::Ply => parse_ply(&text),
        CloudFormat::Csv => parse_csv(&text),
    }
}

pub fn save_point_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    let text = match format {
        CloudFormat::Xyz => write_xyz(cloud),
        CloudFormat::Ply => write_ply(cloud),
        CloudFormat::Csv => write_csv(cloud),
    };
    write_text(path, &text)
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite coordinate {tok:?}")));
    }
    Ok(v)
}

fn parse_point<'a>(mut toks: impl Iterator<Item = &'a str>, line: usize) -> Result<Point3> {
    let mut p = [0.0; 3];
    for (axis, slot) in p.iter_mut().enumerate() {
        let tok = toks.next().ok_or_else(|| {
            Error::parse(line, format!("expected 3 coordinates, found {axis}"))
        })?;
        *slot = parse_f64(tok, line)?;
    }
    Ok(p)
}

fn push_fan(
    faces: &mut Vec<[usize; 3]>,
    polygon: &[usize],
    line: usize,
) -> Result<()> {
    if polygon.len() < 3 {
        return Err(Error::parse(
            line,
            format!("face needs at least 3 vertices, found {}", polygon.len()),
        ));
    }
    for k in 1..polygon.len() - 1 {
        let tri = [polygon[0], polygon[k], polygon[k + 1]];
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(Error::parse(line, "face repeats a vertex index"));
        }
        faces.push(tri);
    }
    Ok(())
}

/// Parses the OBJ subset: `v x y z [w]` and `f i[/t[/n]] ...`; other records are ignored.
/// Negative (relative) indices are resolved against the vertices seen so far.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut polygons: Vec<(usize, Vec<i64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => vertices.push(parse_point(toks, line)?),
            Some("f") => {
                let mut poly = Vec::new();
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|_| {
                        Error::parse(line, format!("bad face index {tok:?}"))
                    })?;
                    let resolved = match idx {
                        0 => return Err(Error::parse(line, "face index 0 (OBJ is 1-based)")),
                        n if n > 0 => n - 1,
                        n => vertices.len() as i64 + n,
                    };
                    poly.push(resolved);
                }
                polygons.push((line, poly));
            }
            _ => {}
        }
    }
    let mut faces = Vec::new();
    for (line, poly) in polygons {
        let mut idx = Vec::with_capacity(poly.len());
        for v in poly {
            if v < 0 || v as usize >= vertices.len() {
                return Err(Error::Index {
                    line,
                    index: if v < 0 { v } else { v + 1 },
                    count: vertices.len(),
                });
            }
            idx.push(v as usize);
        }
        push_fan(&mut faces, &idx, line)?;
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::new(vertices, faces)
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    })
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))
}

pub fn parse_off(text: &str) -> Result<TriangleMesh> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let mut htoks = header.split_whitespace();
    let magic = htoks.next().unwrap_or("");
    if !magic.ends_with("OFF") {
        return Err(Error::parse(hline, format!("expected OFF header, found {magic:?}")));
    }
    if magic != "OFF" {
        return Err(Error::UnsupportedFormat(format!("OFF variant {magic:?}")));
    }
    let mut rest: Vec<&str> = htoks.collect();
    if rest.first() == Some(&"BINARY") {
        return Err(Error::UnsupportedFormat("binary OFF".into()));
    }
    let mut count_line = hline;
    if rest.is_empty() {
        let (l, c) = lines
            .next()
            .ok_or_else(|| Error::parse(hline, "missing vertex/face counts"))?;
        count_line = l;
        rest = c.split_whitespace().collect();
    }
    let mut ct = rest.into_iter();
    let nv = parse_count(ct.next(), count_line, "vertex count")?;
    let nf = parse_count(ct.next(), count_line, "face count")?;

    let mut last_line = count_line;
    let mut vertices = Vec::with_capacity(nv.min(1 << 20));
    for k in 0..nv {
        let (line, content) = lines.next().ok_or_else(|| {
            Error::parse(
                last_line,
                format!("expected {nv} vertices, found {k} (missing {})", nv - k),
            )
        })?;
        last_line = line;
        vertices.push(parse_point(content.split_whitespace(), line)?);
    }
    let mut faces = Vec::new();
    for k in 0..nf {
        let (line, content) = lines.next().ok_or_else(|| {
            Error::parse(
                last_line,
                format!("expected {nf} faces, found {k} (missing {})", nf - k),
            )
        })?;
        last_line = line;
        let mut toks = content.split_whitespace();
        let n = parse_count(toks.next(), line, "face vertex count")?;
        let mut poly = Vec::with_capacity(n.min(64));
        for j in 0..n {
            let tok = toks.next().ok_or_else(|| {
                Error::parse(line, format!("face declares {n} vertices, found {j}"))
            })?;
            let idx: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line, format!("bad face index {tok:?}")))?;
            if idx < 0 || idx as usize >= vertices.len() {
                return Err(Error::Index {
                    line,
                    index: idx,
                    count: vertices.len(),
                });
            }
            poly.push(idx as usize);
        }
        push_fan(&mut faces, &poly, line)?;
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::new(vertices, faces)
}

pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn write_off(mesh: &TriangleMesh) -> String {
    let mut out = String::from("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (line, content) in content_lines(text) {
        let mut toks = content.split_whitespace();
        let p = parse_point(&mut toks, line)?;
        if toks.next().is_some() {
            return Err(Error::parse(line, "expected exactly 3 values"));
        }
        points.push(p);
    }
    PointCloud::new(points)
}

pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(hline + 1, format!("header lacks column {name:?}")))
    };
    let idx = [find("x")?, find("y")?, find("z")?];
    let mut points = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let mut p = [0.0; 3];
        for (slot, &col) in p.iter_mut().zip(&idx) {
            *slot = parse_f64(fields[col], line)?;
        }
        points.push(p);
    }
    PointCloud::new(points)
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
}

/// Parses ascii PLY; the `vertex` element must carry `x`, `y` and `z`
/// properties. Other elements (faces, edges) are skipped.
pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(Error::parse(1, "missing `ply` magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    let mut header_done = false;
    for (line, l) in lines.by_ref() {
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("format") => {
                match toks.next() {
                    Some("ascii") => {}
                    Some(other) => {
                        return Err(Error::UnsupportedFormat(format!(
                            "PLY encoding {other:?}; only ascii is supported"
                        )))
                    }
                    None => return Err(Error::parse(line, "format line lacks encoding")),
                }
                saw_format = true;
            }
            Some("element") => {
                let name = toks
                    .next()
                    .ok_or_else(|| Error::parse(line, "element without name"))?;
                let count = parse_count(toks.next(), line, "element count")?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(line, "property before any element"))?;
                let rest: Vec<&str> = toks.collect();
                let name = rest
                    .last()
                    .ok_or_else(|| Error::parse(line, "property without name"))?;
                el.properties.push((*name).to_string());
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some("comment") | Some("obj_info") | None => {}
            Some(other) => {
                return Err(Error::parse(line, format!("unexpected header keyword {other:?}")))
            }
        }
    }
    if !saw_format {
        return Err(Error::parse(1, "PLY header lacks a format line"));
    }
    if !header_done {
        return Err(Error::parse(1, "PLY header lacks end_header"));
    }
    let mut body = lines.filter(|(_, l)| !l.is_empty());
    let mut points = Vec::new();
    let mut found_vertex = false;
    for el in &elements {
        if el.name != "vertex" {
            for k in 0..el.count {
                if body.next().is_none() {
                    return Err(Error::parse(
                        0,
                        format!("element {} declares {} rows, found {k}", el.name, el.count),
                    ));
                }
            }
            continue;
        }
        found_vertex = true;
        let pos = |n: &str| {
            el.properties
                .iter()
                .position(|p| p == n)
                .ok_or_else(|| Error::parse(0, format!("vertex element lacks property {n:?}")))
        };
        let idx = [pos("x")?, pos("y")?, pos("z")?];
        points.reserve(el.count.min(1 << 22));
        for k in 0..el.count {
            let (line, l) = body.next().ok_or_else(|| {
                Error::parse(0, format!("expected {} vertices, found {k}", el.count))
            })?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() < el.properties.len() {
                return Err(Error::parse(
                    line,
                    format!(
                        "expected {} vertex properties, found {}",
                        el.properties.len(),
                        toks.len()
                    ),
                ));
            }
            let mut p = [0.0; 3];
            for (slot, &col) in p.iter_mut().zip(&idx) {
                *slot = parse_f64(toks[col], line)?;
            }
            points.push(p);
        }
    }
    if !found_vertex {
        return Err(Error::parse(0, "PLY has no vertex element"));
    }
    PointCloud::new(points)
}

pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.count() * 48);
    for p in &cloud.points {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    out
}

pub fn write_csv(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.count() * 48 + 6);
    out.push_str("x,y,z\n");
    for p in &cloud.points {
        let _ = writeln!(out, "{},{},{}", p[0], p[1], p[2]);
    }
    out
}

pub fn write_ply(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.count() * 48 + 128);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.count());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in &cloud.points {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_obj() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.vertices().len(), 3);
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn obj_quad_is_fan_triangulated() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn obj_slash_and_negative_indices() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3/1/1 -2/2/2 -1/3/3\n").unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn obj_errors() {
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nf 1 2 3\n"),
            Err(Error::Index { line: 3, index: 3, count: 2 })
        ));
        assert!(matches!(
            parse_obj("v 0 0 zz\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_obj("v 0 0 0\n"), Err(Error::EmptyMesh)));
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n"),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn off_vertex_deficit_is_reported() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n";
        match parse_off(text) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("expected 4 vertices, found 3"), "{message}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn off_roundtrip() {
        let m = parse_off("OFF\n# comment\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
            .unwrap();
        assert_eq!(m.faces().len(), 2);
        let again = parse_off(&write_off(&m)).unwrap();
        assert_eq!(m, again);
        assert_eq!(parse_obj(&write_obj(&m)).unwrap(), m);
    }

    #[test]
    fn xyz_basic() {
        let c = parse_xyz("1 2 3\n4 5 6").unwrap();
        assert_eq!(c.count(), 2);
        assert_eq!(c.points()[1], [4.0, 5.0, 6.0]);
    }

    #[test]
    fn ply_with_zero_vertices() {
        let c = parse_ply(
            "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        )
        .unwrap();
        assert_eq!(c.count(), 0);
    }

    #[test]
    fn ply_extra_properties_and_faces() {
        let text = "ply\nformat ascii 1.0\ncomment hi\nelement vertex 2\nproperty float nx\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n9 1 2 3\n9 4 5 6\n3 0 1 1\n";
        let c = parse_ply(text).unwrap();
        assert_eq!(c.points(), &[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
    }

    #[test]
    fn binary_ply_rejected() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse_ply(text), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(
            MeshFormat::from_path(Path::new("a.stl")),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn csv_missing_z() {
        assert!(matches!(parse_csv("x,y\n1,2\n"), Err(Error::Parse { .. })));
        let c = parse_csv("x,y,z\n1,2,3\n").unwrap();
        assert_eq!(c.points(), &[[1.0, 2.0, 3.0]]);
    }

    #[test]
    fn empty_cloud_files_are_valid() {
        let empty = PointCloud::default();
        for text in [write_xyz(&empty), write_csv(&empty), write_ply(&empty)] {
            assert!(!text.contains('\u{0}'));
        }
        assert_eq!(parse_csv(&write_csv(&empty)).unwrap().count(), 0);
        assert_eq!(parse_ply(&write_ply(&empty)).unwrap().count(), 0);
        assert_eq!(parse_xyz(&write_xyz(&empty)).unwrap().count(), 0);
    }

    #[test]
    fn nan_rejected() {
        assert!(parse_xyz("nan 0 0\n").is_err());
        assert!(PointCloud::new(vec![[f64::INFINITY, 0.0, 0.0]]).is_err());
    }
}
