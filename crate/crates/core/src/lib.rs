//! Compliance topology optimization on honeycomb meshes of regular hexagonal
//! (Wachspress) elements, with SIMP interpolation, neighbourhood filtering
//! and an optimality-criteria update.

pub mod config;
pub mod element;
pub mod error;
pub mod export;
pub mod fea;
pub mod filter;
pub mod mesh;
pub mod optimizer;
pub mod problems;
pub mod quadrature;

pub use config::{parse_radius, run, RunConfig, RunOutput};
pub use element::{wachspress_k0, ElementStiffness, MaterialModel, QuadratureSpec};
pub use error::{Error, Result};
pub use fea::{assemble, FeSystem, LoadSet, SolveResult};
pub use filter::{build_filter, FilterMode, FilterOperator};
pub use mesh::{build_mesh, HexMesh, MeshSpec};
pub use optimizer::{
    oc_update, DesignState, ElementTag, IterationRecord, Optimizer, OptimizerSettings, PassiveMask,
};
pub use problems::{CustomProblem, Problem, ProblemKind};
