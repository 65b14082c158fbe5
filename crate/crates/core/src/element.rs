//! Hexagonal element stiffness and SIMP material interpolation.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::mesh::HEX_VERTICES;
use crate::quadrature::triangle_rule;

pub type Matrix12 = SMatrix<f64, 12, 12>;

/// Modified SIMP material: `E(x) = emin + x^penal (e0 - emin)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel {
    pub e0: f64,
    pub emin: f64,
    pub penal: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            e0: 1.0,
            emin: 1e-9,
            penal: 3.0,
        }
    }
}

impl MaterialModel {
    pub fn with_penal(penal: f64) -> Result<Self> {
        let m = MaterialModel {
            penal,
            ..Default::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.emin > 0.0 && self.emin < self.e0) {
            return Err(Error::Element(format!(
                "need 0 < emin < e0, got emin={} e0={}",
                self.emin, self.e0
            )));
        }
        if !(self.penal >= 1.0) {
            return Err(Error::Element(format!("penal must be >= 1, got {}", self.penal)));
        }
        Ok(())
    }
}

const DENSITY_SLACK: f64 = 1e-12;

fn check_density(x: f64) -> Result<()> {
    if !(x >= -DENSITY_SLACK && x <= 1.0 + DENSITY_SLACK) {
        return Err(Error::Element(format!("density {x} outside [0, 1]")));
    }
    Ok(())
}

/// Young's modulus of an element with density `x`.
pub fn simp_modulus(x: f64, m: &MaterialModel) -> Result<f64> {
    check_density(x)?;
    Ok(modulus(x, m))
}

/// `d/dx simp_modulus = penal (e0 - emin) x^(penal - 1)`, returned positive.
pub fn simp_dmodulus(x: f64, m: &MaterialModel) -> Result<f64> {
    check_density(x)?;
    Ok(dmodulus(x, m))
}

#[inline]
pub(crate) fn modulus(x: f64, m: &MaterialModel) -> f64 {
    m.emin + x.max(0.0).powf(m.penal) * (m.e0 - m.emin)
}

#[inline]
pub(crate) fn dmodulus(x: f64, m: &MaterialModel) -> f64 {
    m.penal * (m.e0 - m.emin) * x.max(0.0).powf(m.penal - 1.0)
}

/// Quadrature used to integrate the element stiffness: the hexagon is cut
/// into six centroid triangles, each refined `subdivisions` times and
/// integrated with an `order × order` collapsed Gauss rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 8,
            subdivisions: 1,
        }
    }
}

/// Stiffness matrix of the unit-edge regular hexagon with `E = 1`, unit
/// thickness, plane stress. DOF order follows the mesh: `(ux, uy)` per vertex,
/// vertices anticlockwise from the bottom-left.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStiffness {
    pub k0: Matrix12,
    pub nu: f64,
}

impl ElementStiffness {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.k0[(a, b)]
    }

    /// `uᵀ k0 u` for a 12-vector of element displacements.
    ///
    /// The rigid-body part of `u` is removed first. `k0` annihilates it, but
    /// in a deflected structure it dwarfs the deformation and the quadratic
    /// form would lose most of its digits to cancellation.
    #[inline]
    pub fn energy(&self, u: &[f64; 12]) -> f64 {
        let u = SVector::<f64, 12>::from_column_slice(&deformation(u));
        (u.transpose() * self.k0 * u)[(0, 0)]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in 0..12 {
            let row: Vec<String> = (0..12).map(|b| format!("{:?}", self.k0[(a, b)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `u` minus its least-squares rigid motion (two translations and the
/// linearized rotation about the element centre).
pub fn deformation(u: &[f64; 12]) -> [f64; 12] {
    let (mut tx, mut ty) = (0.0, 0.0);
    for k in 0..6 {
        tx += u[2 * k];
        ty += u[2 * k + 1];
    }
    tx /= 6.0;
    ty /= 6.0;
    // vertices lie on the unit circle, so Σ |p|² = 6
    let mut theta = 0.0;
    for (k, p) in HEX_VERTICES.iter().enumerate() {
        theta += p[0] * (u[2 * k + 1] - ty) - p[1] * (u[2 * k] - tx);
    }
    theta /= 6.0;
    let mut out = *u;
    for (k, p) in HEX_VERTICES.iter().enumerate() {
        out[2 * k] -= tx - theta * p[1];
        out[2 * k + 1] -= ty + theta * p[0];
    }
    out
}

/// Plane-stress constitutive matrix for `E = 1`.
pub fn plane_stress(nu: f64) -> SMatrix<f64, 3, 3> {
    let f = 1.0 / (1.0 - nu * nu);
    SMatrix::<f64, 3, 3>::new(f, f * nu, 0.0, f * nu, f, 0.0, 0.0, 0.0, f * (1.0 - nu) / 2.0)
}

/// Wachspress basis values and gradients at `p` for the convex polygon
/// `verts` (anticlockwise).
pub fn wachspress(verts: &[[f64; 2]; 6], p: [f64; 2]) -> ([f64; 6], [[f64; 2]; 6]) {
    // scaled outward normals p_i = n_i / h_i(p) of each edge v_i -> v_{i+1}
    let mut scaled = [[0.0; 2]; 6];
    for i in 0..6 {
        let (v, w) = (verts[i], verts[(i + 1) % 6]);
        let (dx, dy) = (w[0] - v[0], w[1] - v[1]);
        let len = dx.hypot(dy);
        let n = [dy / len, -dx / len];
        let h = (v[0] - p[0]) * n[0] + (v[1] - p[1]) * n[1];
        scaled[i] = [n[0] / h, n[1] / h];
    }
    let mut w = [0.0; 6];
    let mut r = [[0.0; 2]; 6];
    for i in 0..6 {
        let (a, b) = (scaled[(i + 5) % 6], scaled[i]);
        w[i] = a[0] * b[1] - a[1] * b[0];
        r[i] = [a[0] + b[0], a[1] + b[1]];
    }
    let total: f64 = w.iter().sum();
    let phi = w.map(|wi| wi / total);
    let mut mean_r = [0.0; 2];
    for i in 0..6 {
        mean_r[0] += phi[i] * r[i][0];
        mean_r[1] += phi[i] * r[i][1];
    }
    let mut grad = [[0.0; 2]; 6];
    for i in 0..6 {
        grad[i] = [phi[i] * (r[i][0] - mean_r[0]), phi[i] * (r[i][1] - mean_r[1])];
    }
    (phi, grad)
}

/// Strain-displacement matrix at `p` (engineering shear strain).
pub fn strain_displacement(verts: &[[f64; 2]; 6], p: [f64; 2]) -> SMatrix<f64, 3, 12> {
    let (_, grad) = wachspress(verts, p);
    let mut b = SMatrix::<f64, 3, 12>::zeros();
    for (i, g) in grad.iter().enumerate() {
        b[(0, 2 * i)] = g[0];
        b[(1, 2 * i + 1)] = g[1];
        b[(2, 2 * i)] = g[1];
        b[(2, 2 * i + 1)] = g[0];
    }
    b
}

/// Element stiffness of the regular unit hexagon with the default quadrature.
pub fn wachspress_k0(nu: f64) -> Result<ElementStiffness> {
    wachspress_k0_with(nu, QuadratureSpec::default())
}

pub fn wachspress_k0_with(nu: f64, quad: QuadratureSpec) -> Result<ElementStiffness> {
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::Element(format!("Poisson ratio {nu} outside [0, 0.5)")));
    }
    let d = plane_stress(nu);
    let verts = HEX_VERTICES;
    let mut k0 = Matrix12::zeros();
    for i in 0..6 {
        let rule = triangle_rule([0.0, 0.0], verts[i], verts[(i + 1) % 6], quad.order, quad.subdivisions);
        for q in rule {
            let b = strain_displacement(&verts, [q[0], q[1]]);
            k0 += b.transpose() * d * b * q[2];
        }
    }
    // remove round-off asymmetry
    let k0 = (k0 + k0.transpose()) * 0.5;
    Ok(ElementStiffness { k0, nu })
}
