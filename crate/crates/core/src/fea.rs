//! Global assembly and linear-elastic solves.
//!
//! Assembly follows the triplet pattern: every element contributes a 12×12
//! block of `(row, col, value)` entries which are then compressed (duplicates
//! summed) into a CSC matrix. Supports are imposed by reduction: only the
//! free-DOF block `K_ff` is factorized.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::element::{modulus, ElementStiffness, MaterialModel};
use crate::error::{Error, Result};
use crate::mesh::HexMesh;

pub type SparseMatrix = SparseColMat<usize, f64>;

/// Relative residual `|K_ff u_f - F_f| / |F_f|` every solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 3;

/// Point loads for one or more load cases plus the supported DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSet {
    ndof: usize,
    forces: Vec<Vec<(usize, f64)>>,
    fixed: Vec<usize>,
    free: Vec<usize>,
}

impl LoadSet {
    /// `forces[k]` lists `(dof, value)` entries of load case `k`; repeated DOFs
    /// are summed.
    pub fn new(
        ndof: usize,
        forces: Vec<Vec<(usize, f64)>>,
        fixed: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if forces.is_empty() {
            return Err(Error::Problem("at least one load case is required".into()));
        }
        let mut is_fixed = vec![false; ndof];
        for dof in fixed {
            if dof >= ndof {
                return Err(Error::Problem(format!("fixed dof {dof} out of range {ndof}")));
            }
            is_fixed[dof] = true;
        }
        let mut merged = Vec::with_capacity(forces.len());
        for case in forces {
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(case.len());
            for (dof, value) in case {
                if dof >= ndof {
                    return Err(Error::Problem(format!("loaded dof {dof} out of range {ndof}")));
                }
                if !value.is_finite() {
                    return Err(Error::Problem(format!("non-finite load on dof {dof}")));
                }
                match entries.iter_mut().find(|e| e.0 == dof) {
                    Some(e) => e.1 += value,
                    None => entries.push((dof, value)),
                }
            }
            entries.sort_by_key(|e| e.0);
            merged.push(entries);
        }
        let fixed = (0..ndof).filter(|&d| is_fixed[d]).collect();
        let free = (0..ndof).filter(|&d| !is_fixed[d]).collect();
        Ok(LoadSet {
            ndof,
            forces: merged,
            fixed,
            free,
        })
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn ncases(&self) -> usize {
        self.forces.len()
    }

    pub fn forces(&self) -> &[Vec<(usize, f64)>] {
        &self.forces
    }

    pub fn fixed_dofs(&self) -> &[usize] {
        &self.fixed
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn dense_force(&self, case: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.ndof];
        for &(dof, value) in &self.forces[case] {
            f[dof] += value;
        }
        f
    }

    /// Keeps the first `n` load cases.
    pub fn first_cases(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.ncases() {
            return Err(Error::Problem(format!("cannot keep {n} of {} load cases", self.ncases())));
        }
        Ok(LoadSet {
            forces: self.forces[..n].to_vec(),
            ..self.clone()
        })
    }

    fn free_index(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.ndof];
        for (i, &d) in self.free.iter().enumerate() {
            map[d] = Some(i);
        }
        map
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Displacements per load case, zero on fixed DOFs.
    pub u: Vec<Vec<f64>>,
    /// `u_jᵀ k0 u_j` per load case and element.
    pub element_energies: Vec<Vec<f64>>,
    /// External work `Fᵀu` per load case.
    pub work: Vec<f64>,
}

// Sparsity pattern of element blocks restricted to a DOF subset.
struct Pattern {
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
}

impl Pattern {
    fn new(mesh: &HexMesh, index: &[Option<usize>], n: usize) -> Result<Self> {
        let mut pairs = Vec::with_capacity(mesh.nelem() * 144);
        for_each_entry(mesh, index, |row, col, _, _| pairs.push(Pair::new(row, col)));
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::DimensionMismatch(format!("sparse pattern: {e:?}")))?;
        Ok(Pattern { symbolic, argsort })
    }

    fn matrix(&self, values: &[f64]) -> Result<SparseMatrix> {
        SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::DimensionMismatch(format!("sparse values: {e:?}")))
    }
}

// Visits every (row, col) entry of every element block whose DOFs are both
// mapped, in a fixed order: element, then local row, then local column.
fn for_each_entry(
    mesh: &HexMesh,
    index: &[Option<usize>],
    mut visit: impl FnMut(usize, usize, usize, (usize, usize)),
) {
    for e in 0..mesh.nelem() {
        let dofs = mesh.element_dofs(e);
        let mapped = dofs.map(|d| index[d]);
        for a in 0..12 {
            let Some(row) = mapped[a] else { continue };
            for b in 0..12 {
                if let Some(col) = mapped[b] {
                    visit(row, col, e, (a, b));
                }
            }
        }
    }
}

fn entry_values(
    mesh: &HexMesh,
    index: &[Option<usize>],
    scale: &[f64],
    k0: &ElementStiffness,
    capacity: usize,
) -> Vec<f64> {
    let mut values = Vec::with_capacity(capacity);
    for_each_entry(mesh, index, |_, _, e, (a, b)| values.push(scale[e] * k0.k0[(a, b)]));
    values
}

fn check_densities(mesh: &HexMesh, xphys: &[f64]) -> Result<()> {
    if xphys.len() != mesh.nelem() {
        return Err(Error::DimensionMismatch(format!(
            "density vector has {} entries, mesh has {} elements",
            xphys.len(),
            mesh.nelem()
        )));
    }
    if let Some(x) = xphys.iter().find(|x| !(**x >= -1e-12 && **x <= 1.0 + 1e-12)) {
        return Err(Error::DimensionMismatch(format!("density {x} outside [0, 1]")));
    }
    Ok(())
}

/// Global stiffness `K = Σ_j E(x_j) k0` scattered over all `2·nnode` DOFs.
pub fn assemble(
    mesh: &HexMesh,
    xphys: &[f64],
    m: &MaterialModel,
    k0: &ElementStiffness,
) -> Result<SparseMatrix> {
    check_densities(mesh, xphys)?;
    let index: Vec<Option<usize>> = (0..mesh.ndof()).map(Some).collect();
    let pattern = Pattern::new(mesh, &index, mesh.ndof())?;
    let scale: Vec<f64> = xphys.iter().map(|&x| modulus(x, m)).collect();
    let values = entry_values(mesh, &index, &scale, k0, mesh.nelem() * 144);
    pattern.matrix(&values)
}

/// Solves `K_ff u_f = F_f` for every load case of `loads`.
pub fn solve(k: &SparseMatrix, loads: &LoadSet) -> Result<Vec<Vec<f64>>> {
    if k.nrows() != loads.ndof() || k.ncols() != loads.ndof() {
        return Err(Error::DimensionMismatch(format!(
            "stiffness is {}x{}, load set has {} dofs",
            k.nrows(),
            k.ncols(),
            loads.ndof()
        )));
    }
    let index = loads.free_index();
    let mut pairs = Vec::new();
    let mut values = Vec::new();
    let col_ptr = k.symbolic().col_ptr();
    let row_idx = k.symbolic().row_idx();
    let val = k.val();
    for col in 0..k.ncols() {
        let Some(fc) = index[col] else { continue };
        for p in col_ptr[col]..col_ptr[col + 1] {
            if let Some(fr) = index[row_idx[p]] {
                pairs.push(Pair::new(fr, fc));
                values.push(val[p]);
            }
        }
    }
    let n = loads.free_dofs().len();
    let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
        .map_err(|e| Error::DimensionMismatch(format!("sparse pattern: {e:?}")))?;
    let kff = SparseColMat::new_from_argsort(symbolic, &argsort, &values)
        .map_err(|e| Error::DimensionMismatch(format!("sparse values: {e:?}")))?;
    let llt_symbolic = SymbolicLlt::try_new(kff.symbolic(), Side::Lower)
        .map_err(|e| Error::InsufficientConstraints(format!("{e:?}")))?;
    reduced_solve(&kff, &llt_symbolic, loads)
}

fn reduced_solve(
    kff: &SparseMatrix,
    llt_symbolic: &SymbolicLlt<usize>,
    loads: &LoadSet,
) -> Result<Vec<Vec<f64>>> {
    let llt = Llt::try_new_with_symbolic(llt_symbolic.clone(), kff.as_ref(), Side::Lower)
        .map_err(|e| Error::InsufficientConstraints(format!("{e:?}")))?;
    let free = loads.free_dofs();
    let n = free.len();
    let mut out = Vec::with_capacity(loads.ncases());
    for case in 0..loads.ncases() {
        let f_full = loads.dense_force(case);
        let f: Vec<f64> = free.iter().map(|&d| f_full[d]).collect();
        let fnorm = norm(&f);
        let mut u_full = vec![0.0; loads.ndof()];
        if fnorm == 0.0 {
            out.push(u_full);
            continue;
        }
        let mut u = vec![0.0; n];
        let mut r = f.clone();
        let mut residual = 1.0;
        for _ in 0..=MAX_REFINEMENTS {
            let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
            llt.solve_in_place(rhs.as_mut());
            for i in 0..n {
                u[i] += rhs[(i, 0)];
            }
            r = f.clone();
            spmv_sub(kff, &u, &mut r);
            residual = norm(&r) / fnorm;
            if !residual.is_finite() {
                return Err(Error::InsufficientConstraints("non-finite displacement".into()));
            }
            if residual <= RESIDUAL_TOL * 1e-3 {
                break;
            }
        }
        if residual > RESIDUAL_TOL {
            return Err(Error::SolverTolerance {
                residual,
                tolerance: RESIDUAL_TOL,
            });
        }
        for (i, &d) in free.iter().enumerate() {
            u_full[d] = u[i];
        }
        out.push(u_full);
    }
    Ok(out)
}

// r -= K u
fn spmv_sub(k: &SparseMatrix, u: &[f64], r: &mut [f64]) {
    let col_ptr = k.symbolic().col_ptr();
    let row_idx = k.symbolic().row_idx();
    let val = k.val();
    for col in 0..k.ncols() {
        let uc = u[col];
        if uc == 0.0 {
            continue;
        }
        for p in col_ptr[col]..col_ptr[col + 1] {
            r[row_idx[p]] -= val[p] * uc;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Per-element energies `u_jᵀ k0 u_j` for one displacement vector.
pub fn element_energies(mesh: &HexMesh, k0: &ElementStiffness, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != mesh.ndof() {
        return Err(Error::DimensionMismatch(format!(
            "displacement has {} entries, mesh has {} dofs",
            u.len(),
            mesh.ndof()
        )));
    }
    Ok((0..mesh.nelem())
        .map(|e| {
            let ue = mesh.element_dofs(e).map(|d| u[d]);
            k0.energy(&ue)
        })
        .collect())
}

/// Reusable analysis for one mesh and load set: the reduced sparsity pattern
/// and its symbolic Cholesky factorization are computed once, so each design
/// only pays for numeric factorization and triangular solves.
pub struct FeSystem<'m> {
    mesh: &'m HexMesh,
    k0: ElementStiffness,
    loads: LoadSet,
    index: Vec<Option<usize>>,
    pattern: Pattern,
    nnz: usize,
    llt_symbolic: SymbolicLlt<usize>,
}

impl<'m> FeSystem<'m> {
    pub fn new(mesh: &'m HexMesh, k0: ElementStiffness, loads: LoadSet) -> Result<Self> {
        if loads.ndof() != mesh.ndof() {
            return Err(Error::DimensionMismatch(format!(
                "load set has {} dofs, mesh has {}",
                loads.ndof(),
                mesh.ndof()
            )));
        }
        let index = loads.free_index();
        let n = loads.free_dofs().len();
        let pattern = Pattern::new(mesh, &index, n)?;
        let mut nnz = 0;
        for_each_entry(mesh, &index, |_, _, _, _| nnz += 1);
        let llt_symbolic = SymbolicLlt::try_new(pattern.symbolic.as_ref(), Side::Lower)
            .map_err(|e| Error::InsufficientConstraints(format!("{e:?}")))?;
        Ok(FeSystem {
            mesh,
            k0,
            loads,
            index,
            pattern,
            nnz,
            llt_symbolic,
        })
    }

    pub fn mesh(&self) -> &HexMesh {
        self.mesh
    }

    pub fn loads(&self) -> &LoadSet {
        &self.loads
    }

    pub fn k0(&self) -> &ElementStiffness {
        &self.k0
    }

    /// Reduced stiffness `K_ff` for the given physical densities.
    pub fn reduced_stiffness(&self, xphys: &[f64], m: &MaterialModel) -> Result<SparseMatrix> {
        check_densities(self.mesh, xphys)?;
        let scale: Vec<f64> = xphys.iter().map(|&x| modulus(x, m)).collect();
        let values = entry_values(self.mesh, &self.index, &scale, &self.k0, self.nnz);
        self.pattern.matrix(&values)
    }

    pub fn solve(&self, xphys: &[f64], m: &MaterialModel) -> Result<SolveResult> {
        let kff = self.reduced_stiffness(xphys, m)?;
        let u = reduced_solve(&kff, &self.llt_symbolic, &self.loads)?;
        let element_energies = u
            .iter()
            .map(|u| element_energies(self.mesh, &self.k0, u))
            .collect::<Result<_>>()?;
        let work = u
            .iter()
            .enumerate()
            .map(|(k, u)| self.loads.forces()[k].iter().map(|&(d, f)| f * u[d]).sum())
            .collect();
        Ok(SolveResult {
            u,
            element_energies,
            work,
        })
    }
}
