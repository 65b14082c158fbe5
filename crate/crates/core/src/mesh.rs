//! Honeycomb tessellation of a rectangular design domain.
//!
//! Hexagons are regular with unit edge length and two vertical edges
//! (vertex-up). Element rows are stacked with a vertical pitch of 3/2 and a
//! horizontal pitch of √3; every second row (1-based rows 2, 4, ...) is
//! shifted right by √3/2.
//!
//! Nodes live on `hney + 1` zig-zag node rows. Node row `j` separates element
//! rows `j - 1` and `j`, and its lattice positions sit at `x = k·√3/2`. Nodes
//! and elements are both numbered row by row from the bottom, left to right.
//! Lattice points that no element touches (the hanging node at the top-left
//! corner when `hney` is even, and the unused right-end slots) are removed and
//! the numbering compacted.
//!
//! All indices in this module are 0-based.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Horizontal distance between neighbouring element centres in one row.
pub const PITCH_X: f64 = SQRT3;
/// Vertical distance between element rows.
pub const PITCH_Y: f64 = 1.5;

/// Element-local vertex offsets from the centre, anticlockwise from the
/// bottom-left vertex.
pub const HEX_VERTICES: [[f64; 2]; 6] = [
    [-SQRT3 / 2.0, -0.5],
    [0.0, -1.0],
    [SQRT3 / 2.0, -0.5],
    [SQRT3 / 2.0, 0.5],
    [0.0, 1.0],
    [-SQRT3 / 2.0, 0.5],
];

/// Number of hexagons along x and y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshSpec {
    pub hnex: usize,
    pub hney: usize,
}

impl MeshSpec {
    pub fn new(hnex: usize, hney: usize) -> Result<Self> {
        let spec = MeshSpec { hnex, hney };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hnex < 1 || self.hney < 1 {
            return Err(Error::Mesh(format!(
                "element counts must be at least 1, got {}x{}",
                self.hnex, self.hney
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HexMesh {
    spec: MeshSpec,
    coords: Vec<[f64; 2]>,
    conn: Vec<[usize; 6]>,
    centroids: Vec<[f64; 2]>,
    // node_rows[j]..node_rows[j + 1] is node row j
    node_rows: Vec<usize>,
}

/// Builds the honeycomb mesh for an `hnex × hney` domain.
pub fn build_mesh(spec: MeshSpec) -> Result<HexMesh> {
    spec.validate()?;
    let MeshSpec { hnex, hney } = spec;
    let width = 2 * hnex + 2;
    let lattice = |j: usize, k: usize| j * width + k;

    let mut lattice_conn = Vec::with_capacity(hnex * hney);
    for row in 0..hney {
        for i in 0..hnex {
            let k0 = 2 * i + row % 2;
            lattice_conn.push([
                lattice(row, k0),
                lattice(row, k0 + 1),
                lattice(row, k0 + 2),
                lattice(row + 1, k0 + 2),
                lattice(row + 1, k0 + 1),
                lattice(row + 1, k0),
            ]);
        }
    }

    let mut used = vec![false; (hney + 1) * width];
    for element in &lattice_conn {
        for &p in element {
            used[p] = true;
        }
    }

    let mut node_of = vec![usize::MAX; used.len()];
    let mut coords = Vec::new();
    let mut node_rows = Vec::with_capacity(hney + 2);
    for j in 0..=hney {
        node_rows.push(coords.len());
        for k in 0..width {
            let p = lattice(j, k);
            if used[p] {
                node_of[p] = coords.len();
                coords.push(lattice_coords(j, k));
            }
        }
    }
    node_rows.push(coords.len());

    let conn: Vec<[usize; 6]> = lattice_conn
        .iter()
        .map(|element| element.map(|p| node_of[p]))
        .collect();
    let centroids = conn.iter().map(|nodes| centroid_of(&coords, nodes)).collect();

    Ok(HexMesh {
        spec,
        coords,
        conn,
        centroids,
        node_rows,
    })
}

fn lattice_coords(j: usize, k: usize) -> [f64; 2] {
    let drop = if k % 2 == j % 2 { 0.5 } else { 1.0 };
    [k as f64 * SQRT3 / 2.0, 1.0 + PITCH_Y * j as f64 - drop]
}

fn centroid_of(coords: &[[f64; 2]], nodes: &[usize; 6]) -> [f64; 2] {
    let mut c = [0.0; 2];
    for &n in nodes {
        c[0] += coords[n][0];
        c[1] += coords[n][1];
    }
    [c[0] / 6.0, c[1] / 6.0]
}

/// Per-element arithmetic mean of the vertex coordinates.
pub fn centroids(mesh: &HexMesh) -> Vec<[f64; 2]> {
    mesh.conn
        .iter()
        .map(|nodes| centroid_of(&mesh.coords, nodes))
        .collect()
}

impl HexMesh {
    pub fn spec(&self) -> MeshSpec {
        self.spec
    }

    pub fn nelem(&self) -> usize {
        self.conn.len()
    }

    pub fn nnode(&self) -> usize {
        self.coords.len()
    }

    pub fn ndof(&self) -> usize {
        2 * self.coords.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn conn(&self) -> &[[usize; 6]] {
        &self.conn
    }

    pub fn centroids(&self) -> &[[f64; 2]] {
        &self.centroids
    }

    /// DOFs of element `e`: `(2n, 2n + 1)` for each node `n` in `conn` order.
    pub fn element_dofs(&self, e: usize) -> [usize; 12] {
        let nodes = &self.conn[e];
        std::array::from_fn(|a| 2 * nodes[a / 2] + a % 2)
    }

    pub fn dofs(&self) -> Vec<[usize; 12]> {
        (0..self.nelem()).map(|e| self.element_dofs(e)).collect()
    }

    /// Node ids on zig-zag node row `j` (0 = bottom, `hney` = top), ordered by x.
    pub fn node_row(&self, j: usize) -> Range<usize> {
        self.node_rows[j]..self.node_rows[j + 1]
    }

    pub fn node_row_count(&self) -> usize {
        self.node_rows.len() - 1
    }

    /// Bounding box `[xmin, xmax, ymin, ymax]` of the node coordinates.
    pub fn bounds(&self) -> [f64; 4] {
        self.coords.iter().fold(
            [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])],
        )
    }

    /// Nodes whose x coordinate equals the domain minimum.
    pub fn left_edge_nodes(&self) -> Vec<usize> {
        let xmin = self.bounds()[0];
        (0..self.nnode())
            .filter(|&n| (self.coords[n][0] - xmin).abs() < 1e-9)
            .collect()
    }

    /// Node closest to `(x, y)`; ties go to the lower id.
    pub fn nearest_node(&self, x: f64, y: f64) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (n, p) in self.coords.iter().enumerate() {
            let d = (p[0] - x).powi(2) + (p[1] - y).powi(2);
            if d < best.0 {
                best = (d, n);
            }
        }
        best.1
    }

    /// Writes the mesh as CSV with `nodes: id,x,y` and `elements: id,n1..n6`
    /// sections, all ids 1-based.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("nodes: id,x,y\n");
        for (n, p) in self.coords.iter().enumerate() {
            let _ = writeln!(out, "{},{:?},{:?}", n + 1, p[0], p[1]);
        }
        out.push_str("elements: id,n1,n2,n3,n4,n5,n6\n");
        for (e, nodes) in self.conn.iter().enumerate() {
            let _ = write!(out, "{}", e + 1);
            for n in nodes {
                let _ = write!(out, ",{}", n + 1);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_domain() {
        assert!(build_mesh(MeshSpec { hnex: 0, hney: 3 }).is_err());
        assert!(build_mesh(MeshSpec { hnex: 2, hney: 0 }).is_err());
        assert!(MeshSpec::new(0, 0).is_err());
    }

    #[test]
    fn single_hexagon() {
        let mesh = build_mesh(MeshSpec::new(1, 1).unwrap()).unwrap();
        assert_eq!(mesh.nelem(), 1);
        assert_eq!(mesh.nnode(), 6);
        let c = mesh.centroids()[0];
        for (a, &n) in mesh.conn()[0].iter().enumerate() {
            let p = mesh.coords()[n];
            assert!((p[0] - c[0] - HEX_VERTICES[a][0]).abs() < 1e-12);
            assert!((p[1] - c[1] - HEX_VERTICES[a][1]).abs() < 1e-12);
        }
        // bottom-left vertex comes first, then anticlockwise
        assert_eq!(mesh.conn()[0], [0, 1, 2, 5, 4, 3]);
    }

    #[test]
    fn dof_table_follows_connectivity() {
        let mesh = build_mesh(MeshSpec::new(3, 2).unwrap()).unwrap();
        for e in 0..mesh.nelem() {
            let dofs = mesh.element_dofs(e);
            for k in 0..6 {
                assert_eq!(dofs[2 * k], 2 * mesh.conn()[e][k]);
                assert_eq!(dofs[2 * k + 1], 2 * mesh.conn()[e][k] + 1);
            }
        }
    }

    #[test]
    fn node_counts_by_parity() {
        // odd row count: no hanging node at the top
        let odd = build_mesh(MeshSpec::new(4, 3).unwrap()).unwrap();
        assert_eq!(odd.nnode(), 4 * (2 * 4 + 1) + 2);
        // even row count: the top-left lattice point is dropped
        let even = build_mesh(MeshSpec::new(4, 2).unwrap()).unwrap();
        assert_eq!(even.nnode(), 3 * (2 * 4 + 1) + 2 - 1);
        let top = even.node_row(2);
        assert!((even.coords()[top.start][0] - SQRT3 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn centroid_spacing() {
        let mesh = build_mesh(MeshSpec::new(2, 1).unwrap()).unwrap();
        let c = mesh.centroids();
        assert!((c[1][0] - c[0][0] - SQRT3).abs() < 1e-12);
        assert!((c[1][1] - c[0][1]).abs() < 1e-12);
    }

    #[test]
    fn centroids_inside_bounding_box() {
        let mesh = build_mesh(MeshSpec::new(3, 3).unwrap()).unwrap();
        let [x0, x1, y0, y1] = mesh.bounds();
        for c in centroids(&mesh) {
            assert!(c[0] > x0 && c[0] < x1 && c[1] > y0 && c[1] < y1);
        }
    }

    #[test]
    fn benchmark_width() {
        let mesh = build_mesh(MeshSpec::new(60, 20).unwrap()).unwrap();
        assert_eq!(mesh.nelem(), 1200);
        let [x0, x1, _, _] = mesh.bounds();
        let width = x1 - x0;
        assert!((width - 60.0 * SQRT3).abs() <= SQRT3 / 2.0 + 1e-9);
        // filter radius 2.4·√3 is 4% of the domain length
        assert!((2.4 * SQRT3 / (60.0 * SQRT3) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn csv_dump_is_one_based() {
        let mesh = build_mesh(MeshSpec::new(1, 1).unwrap()).unwrap();
        let csv = mesh.to_csv();
        assert!(csv.starts_with("nodes: id,x,y\n1,"));
        assert!(csv.contains("elements: id,n1,n2,n3,n4,n5,n6\n1,1,2,3,6,5,4\n"));
    }
}
