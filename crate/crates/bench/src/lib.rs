//! Shared fixtures for the benchmarks.

use hextop::{build_filter, build_mesh, FilterMode, FilterOperator, HexMesh, MeshSpec, Problem};

/// MBB mesh, problem and filter at the given size with the usual radius
/// scaling (`0.04 * hnex * sqrt3`).
pub fn mbb_fixture(hnex: usize, hney: usize, mode: FilterMode) -> (HexMesh, Problem, FilterOperator) {
    let mesh = build_mesh(MeshSpec::new(hnex, hney).unwrap()).unwrap();
    let problem = Problem::mbb(&mesh).unwrap();
    let rfill = 0.04 * hnex as f64 * hextop::mesh::SQRT3;
    let filter = build_filter(mesh.centroids(), rfill, mode).unwrap();
    (mesh, problem, filter)
}
