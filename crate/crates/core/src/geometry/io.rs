//! OBJ and STL reading and writing.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Point3, TriMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFormat {
    Obj,
    StlAscii,
    StlBinary,
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "stl" | "stl-binary" => Ok(MeshFormat::StlBinary),
            "stl-ascii" => Ok(MeshFormat::StlAscii),
            _ => Err(Error::Unknown(format!("mesh format '{s}'"))),
        }
    }
}

pub fn export_mesh(mesh: &TriMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    match format {
        MeshFormat::Obj => {
            writeln!(out, "# {} vertices, {} faces", mesh.vertices().len(), mesh.faces().len())?;
            for v in mesh.vertices() {
                writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z)?;
            }
            for f in mesh.faces() {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
        MeshFormat::StlAscii => {
            writeln!(out, "solid monostatic")?;
            for fi in 0..mesh.faces().len() {
                let [a, b, c] = mesh.triangle(fi);
                let n = (b - a).cross(&(c - a)).normalize();
                writeln!(out, "  facet normal {:e} {:e} {:e}", n.x, n.y, n.z)?;
                writeln!(out, "    outer loop")?;
                for p in [a, b, c] {
                    writeln!(out, "      vertex {:e} {:e} {:e}", p.x as f32, p.y as f32, p.z as f32)?;
                }
                writeln!(out, "    endloop")?;
                writeln!(out, "  endfacet")?;
            }
            writeln!(out, "endsolid monostatic")?;
        }
        MeshFormat::StlBinary => {
            let mut header = [0u8; 80];
            let tag = b"binary STL written by monostatic";
            header[..tag.len()].copy_from_slice(tag);
            out.write_all(&header)?;
            out.write_all(&(mesh.faces().len() as u32).to_le_bytes())?;
            for fi in 0..mesh.faces().len() {
                let [a, b, c] = mesh.triangle(fi);
                let n = (b - a).cross(&(c - a)).normalize();
                for p in [n, a, b, c] {
                    for x in p.iter() {
                        out.write_all(&(*x as f32).to_le_bytes())?;
                    }
                }
                out.write_all(&0u16.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads OBJ (by extension) or STL (ASCII or binary, detected by layout).
pub fn import_mesh(path: &Path) -> Result<TriMesh> {
    let bytes = fs::read(path)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("obj") => parse_obj(&String::from_utf8_lossy(&bytes), path),
        _ => {
            if is_binary_stl(&bytes) {
                parse_stl_binary(&bytes, path)
            } else {
                parse_stl_ascii(&String::from_utf8_lossy(&bytes), path)
            }
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_obj(text: &str, path: &Path) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(path, ln, format!("bad vertex: {e}")))?;
                if c.len() != 3 {
                    return Err(parse_err(path, ln, "vertex needs three coordinates"));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in parts {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| parse_err(path, ln, format!("bad face index '{tok}'")))?;
                    let n = vertices.len() as i64;
                    let resolved = if i < 0 { n + i } else { i - 1 };
                    if resolved < 0 || resolved >= n {
                        return Err(parse_err(path, ln, format!("face index {i} out of range")));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(parse_err(path, ln, "face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

fn is_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    bytes.len() == 84 + 50 * n
}

/// Merges bitwise-identical corners into shared vertices.
#[derive(Default)]
struct Welder {
    index: HashMap<[u32; 3], usize>,
    vertices: Vec<Point3>,
}

impl Welder {
    fn add(&mut self, p: [f32; 3]) -> usize {
        let key = p.map(f32::to_bits);
        *self.index.entry(key).or_insert_with(|| {
            self.vertices
                .push(Point3::new(p[0] as f64, p[1] as f64, p[2] as f64));
            self.vertices.len() - 1
        })
    }
}

fn parse_stl_binary(bytes: &[u8], _path: &Path) -> Result<TriMesh> {
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let mut welder = Welder::default();
    let mut faces = Vec::with_capacity(n);
    for t in 0..n {
        let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap());
        let mut tri = [0usize; 3];
        for (c, slot) in tri.iter_mut().enumerate() {
            let base = 3 + 3 * c;
            *slot = welder.add([f(base), f(base + 1), f(base + 2)]);
        }
        faces.push(tri);
    }
    TriMesh::new(welder.vertices, faces)
}

fn parse_stl_ascii(text: &str, path: &Path) -> Result<TriMesh> {
    let mut welder = Welder::default();
    let mut faces = Vec::new();
    let mut corners = Vec::with_capacity(3);
    let mut saw_solid = false;
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("solid") => saw_solid = true,
            Some("vertex") => {
                let c: Vec<f32> = parts
                    .map(|s| s.parse::<f32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(path, ln, format!("bad vertex: {e}")))?;
                if c.len() != 3 {
                    return Err(parse_err(path, ln, "vertex needs three coordinates"));
                }
                corners.push(welder.add([c[0], c[1], c[2]]));
            }
            Some("endloop") => {
                if corners.len() != 3 {
                    return Err(parse_err(path, ln, format!("facet has {} vertices", corners.len())));
                }
                faces.push([corners[0], corners[1], corners[2]]);
                corners.clear();
            }
            Some("facet" | "outer" | "endfacet" | "endsolid") | None => {}
            Some(other) => {
                return Err(parse_err(path, ln, format!("unexpected token '{other}'")));
            }
        }
    }
    if !saw_solid {
        return Err(parse_err(path, 1, "not an STL file"));
    }
    TriMesh::new(welder.vertices, faces)
}
