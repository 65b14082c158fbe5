//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use hextop::fea::SparseMatrix;
use hextop::mesh::{HEX_VERTICES, SQRT3};
use hextop::{ElementStiffness, HexMesh, MaterialModel};
use nalgebra::DMatrix;

pub fn coord_key(p: [f64; 2]) -> (i64, i64) {
    ((p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64)
}

/// Hexagons placed one by one, coincident vertices merged.
pub struct Merged {
    pub centres: Vec<[f64; 2]>,
    pub vertices: Vec<[f64; 2]>,
    pub conn: Vec<[usize; 6]>,
}

pub fn vertex_merge(hnex: usize, hney: usize) -> Merged {
    let mut index = HashMap::new();
    let mut vertices = Vec::new();
    let mut centres = Vec::new();
    let mut conn = Vec::new();
    for r in 0..hney {
        for i in 0..hnex {
            let cx = SQRT3 * (i as f64 + 0.5 + 0.5 * (r % 2) as f64);
            let cy = 1.0 + 1.5 * r as f64;
            centres.push([cx, cy]);
            let mut nodes = [0; 6];
            for (k, off) in HEX_VERTICES.iter().enumerate() {
                let p = [cx + off[0], cy + off[1]];
                nodes[k] = *index.entry(coord_key(p)).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
            }
            conn.push(nodes);
        }
    }
    Merged {
        centres,
        vertices,
        conn,
    }
}

/// Compares a mesh with the vertex-merge construction; `Err` names the
/// first mismatch.
pub fn check_against_merge(mesh: &HexMesh) -> Result<(), String> {
    let spec = mesh.spec();
    let oracle = vertex_merge(spec.hnex, spec.hney);
    if mesh.nnode() != oracle.vertices.len() || mesh.nelem() != oracle.conn.len() {
        return Err(format!("sizes {}/{} vs {}/{}", mesh.nnode(), mesh.nelem(), oracle.vertices.len(), oracle.conn.len()));
    }
    for (e, (nodes, onodes)) in mesh.conn().iter().zip(&oracle.conn).enumerate() {
        for k in 0..6 {
            let a = mesh.coords()[nodes[k]];
            let b = oracle.vertices[onodes[k]];
            if (a[0] - b[0]).abs() > 1e-12 || (a[1] - b[1]).abs() > 1e-12 {
                return Err(format!("element {e} vertex {k}: {a:?} vs {b:?}"));
            }
        }
        let (c, oc) = (mesh.centroids()[e], oracle.centres[e]);
        if (c[0] - oc[0]).abs() > 1e-12 || (c[1] - oc[1]).abs() > 1e-12 {
            return Err(format!("centroid {e}: {c:?} vs {oc:?}"));
        }
    }
    let mut seen = std::collections::HashSet::new();
    if !mesh.coords().iter().all(|&p| seen.insert(coord_key(p))) {
        return Err("duplicate node coordinates".into());
    }
    Ok(())
}

pub fn simp(x: f64, m: &MaterialModel) -> f64 {
    m.emin + x.powf(m.penal) * (m.e0 - m.emin)
}

/// `K = Σ_e E(x_e) k0` scattered entry by entry into a dense matrix.
pub fn dense_stiffness(mesh: &HexMesh, x: &[f64], m: &MaterialModel, k0: &ElementStiffness) -> DMatrix<f64> {
    let n = mesh.ndof();
    let mut k = DMatrix::zeros(n, n);
    for e in 0..mesh.nelem() {
        let dofs = mesh.element_dofs(e);
        let s = simp(x[e], m);
        for a in 0..12 {
            for b in 0..12 {
                k[(dofs[a], dofs[b])] += s * k0.get(a, b);
            }
        }
    }
    k
}

pub fn to_dense(k: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(k.nrows(), k.ncols());
    let sym = k.symbolic();
    for j in 0..k.ncols() {
        for p in sym.col_ptr()[j]..sym.col_ptr()[j + 1] {
            d[(sym.row_idx()[p], j)] += k.val()[p];
        }
    }
    d
}

/// `H[j][i] = max(0, r - |c_j - c_i|)` over all pairs.
pub fn dense_filter(centroids: &[[f64; 2]], r: f64) -> DMatrix<f64> {
    let n = centroids.len();
    DMatrix::from_fn(n, n, |j, i| {
        let d = ((centroids[j][0] - centroids[i][0]).powi(2) + (centroids[j][1] - centroids[i][1]).powi(2)).sqrt();
        (r - d).max(0.0)
    })
}
