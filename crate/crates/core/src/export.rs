//! SVG and CSV output of optimized designs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::HexMesh;
use crate::optimizer::IterationRecord;

/// Grayscale hexagon plot settings: density 1 is black, 0 is white.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub path: PathBuf,
    /// Pixels per element edge length.
    pub scale: f64,
    pub stroke: bool,
}

impl RenderSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        RenderSpec {
            path: path.into(),
            scale: 10.0,
            stroke: false,
        }
    }
}

/// Gray level (0 = black, 255 = white) for a density.
pub fn gray_level(density: f64) -> u8 {
    let d = if density.is_nan() { 0.0 } else { density.clamp(0.0, 1.0) };
    ((1.0 - d) * 255.0).round() as u8
}

/// Standalone SVG document with one polygon per element.
pub fn svg_document(mesh: &HexMesh, xphys: &[f64], spec: &RenderSpec) -> Result<String> {
    if xphys.len() != mesh.nelem() {
        return Err(Error::Parse(format!(
            "density vector has {} entries, mesh has {} elements",
            xphys.len(),
            mesh.nelem()
        )));
    }
    let [x0, x1, y0, y1] = mesh.bounds();
    let s = spec.scale;
    let (w, h) = ((x1 - x0) * s, (y1 - y0) * s);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.4}" height="{h:.4}" viewBox="0 0 {w:.4} {h:.4}">"#
    );
    let stroke = if spec.stroke {
        r##" stroke="#808080" stroke-width="0.5""##
    } else {
        ""
    };
    let _ = writeln!(out, r#"<g id="design"{stroke}>"#);
    for (e, nodes) in mesh.conn().iter().enumerate() {
        let g = gray_level(xphys[e]);
        let _ = write!(out, r##"<polygon id="e{}" fill="#{g:02x}{g:02x}{g:02x}" points=""##, e + 1);
        for (k, &n) in nodes.iter().enumerate() {
            let p = mesh.coords()[n];
            let sep = if k == 0 { "" } else { " " };
            // flip y: SVG grows downwards
            let _ = write!(out, "{sep}{:.4},{:.4}", (p[0] - x0) * s, (y1 - p[1]) * s);
        }
        out.push_str("\"/>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn render_svg(mesh: &HexMesh, xphys: &[f64], spec: &RenderSpec) -> Result<()> {
    let doc = svg_document(mesh, xphys, spec)?;
    std::fs::write(&spec.path, doc).map_err(|e| Error::io(&spec.path, e))
}

pub const DENSITY_HEADER: &str = "element_id,centroid_x,centroid_y,density";
pub const HISTORY_HEADER: &str = "iteration,compliance,volume_fraction,change";

/// `element_id,centroid_x,centroid_y,density` rows; floats use the shortest
/// representation that parses back to the same value.
pub fn density_csv(mesh: &HexMesh, xphys: &[f64]) -> Result<String> {
    if xphys.len() != mesh.nelem() {
        return Err(Error::Parse(format!(
            "density vector has {} entries, mesh has {} elements",
            xphys.len(),
            mesh.nelem()
        )));
    }
    let mut out = format!("{DENSITY_HEADER}\n");
    for (e, (c, d)) in mesh.centroids().iter().zip(xphys).enumerate() {
        let _ = writeln!(out, "{},{:?},{:?},{:?}", e + 1, c[0], c[1], d);
    }
    Ok(out)
}

pub fn write_density_csv(mesh: &HexMesh, xphys: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, density_csv(mesh, xphys)?).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub element: usize,
    pub centroid: [f64; 2],
    pub density: f64,
}

pub fn read_density_csv(path: impl AsRef<Path>) -> Result<Vec<DensityRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rows(&text, DENSITY_HEADER, |f| {
        Ok(DensityRow {
            element: parse_field(f[0])?,
            centroid: [parse_field(f[1])?, parse_field(f[2])?],
            density: parse_field(f[3])?,
        })
    })
}

pub fn history_csv(history: &[IterationRecord]) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in history {
        let _ = writeln!(out, "{},{:?},{:?},{:?}", r.iteration, r.compliance, r.volume_fraction, r.change);
    }
    out
}

pub fn write_history_csv(history: &[IterationRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, history_csv(history)).map_err(|e| Error::io(path, e))
}

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<IterationRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rows(&text, HISTORY_HEADER, |f| {
        Ok(IterationRecord {
            iteration: parse_field(f[0])?,
            compliance: parse_field(f[1])?,
            volume_fraction: parse_field(f[2])?,
            change: parse_field(f[3])?,
        })
    })
}

fn parse_field<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse field {s:?}")))
}

fn parse_rows<T>(text: &str, header: &str, row: impl Fn(&[&str]) -> Result<T>) -> Result<Vec<T>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(header) {
        return Err(Error::Parse(format!("expected header {header:?}")));
    }
    let width = header.split(',').count();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != width {
                return Err(Error::Parse(format!("row {l:?} has {} fields, expected {width}", fields.len())));
            }
            row(&fields)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, MeshSpec};

    #[test]
    fn gray_levels() {
        assert_eq!(gray_level(1.0), 0);
        assert_eq!(gray_level(0.0), 255);
        assert_eq!(gray_level(1.7), 0);
        assert_eq!(gray_level(-0.2), 255);
        assert_eq!(gray_level(0.5), 128);
    }

    #[test]
    fn svg_polygons() {
        let mesh = build_mesh(MeshSpec::new(3, 2).unwrap()).unwrap();
        let spec = RenderSpec::new("unused.svg");
        let solid = svg_document(&mesh, &[1.0; 6], &spec).unwrap();
        assert_eq!(solid.matches("<polygon").count(), 6);
        assert_eq!(solid.matches(r##"fill="#000000""##).count(), 6);
        let void = svg_document(&mesh, &[0.0; 6], &spec).unwrap();
        assert_eq!(void.matches(r##"fill="#ffffff""##).count(), 6);
        assert!(svg_document(&mesh, &[0.0; 5], &spec).is_err());
        assert_eq!(solid, svg_document(&mesh, &[1.0; 6], &spec).unwrap());
    }

    #[test]
    fn history_rows() {
        let h = vec![
            IterationRecord {
                iteration: 1,
                compliance: 10.5,
                volume_fraction: 0.5,
                change: 0.2,
            },
            IterationRecord {
                iteration: 2,
                compliance: 9.25,
                volume_fraction: 0.5,
                change: 0.1,
            },
        ];
        let text = history_csv(&h);
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(HISTORY_HEADER));
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(read_density_csv(&p).is_err());
        assert!(read_history_csv(&p).is_err());
    }
}
