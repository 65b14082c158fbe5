//! Run configuration shared by the library driver and the command line.

use std::path::{Path, PathBuf};

use crate::element::{wachspress_k0, MaterialModel};
use crate::error::{Error, Result};
use crate::filter::{build_filter, FilterMode};
use crate::mesh::{build_mesh, HexMesh, MeshSpec, SQRT3};
use crate::optimizer::{DesignState, IterationRecord, Optimizer, OptimizerSettings};
use crate::problems::{CustomProblem, Problem, ProblemKind};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hnex: usize,
    pub hney: usize,
    pub rfill: f64,
    pub volfrac: f64,
    pub penal: f64,
    pub ft: FilterMode,
    pub problem: ProblemKind,
    /// Problem definition file, required when `problem` is `custom`.
    pub problem_file: Option<PathBuf>,
    pub nu: f64,
    pub move_limit: f64,
    pub maxiter: usize,
    pub change_tol: f64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hnex: 60,
            hney: 20,
            rfill: 2.4 * SQRT3,
            volfrac: 0.5,
            penal: 3.0,
            ft: FilterMode::Sensitivity,
            problem: ProblemKind::Mbb,
            problem_file: None,
            nu: 0.3,
            move_limit: 0.2,
            maxiter: 200,
            change_tol: 0.01,
            output: PathBuf::from("out"),
        }
    }
}

/// Parses a filter radius: a plain number, `sqrt3`, or `<k>*sqrt3`.
pub fn parse_radius(s: &str) -> Result<f64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(vec![format!("rfill: cannot parse {s:?}, expected <number> or <k>*sqrt3")]);
    let value = if compact == "sqrt3" {
        SQRT3
    } else if let Some(k) = compact.strip_suffix("*sqrt3") {
        k.parse::<f64>().map_err(|_| bad())? * SQRT3
    } else {
        compact.parse::<f64>().map_err(|_| bad())?
    };
    Ok(value)
}

impl RunConfig {
    /// Every violated constraint, or `Ok(())`.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.hnex < 1 {
            errs.push(format!("hnex must be >= 1, got {}", self.hnex));
        }
        if self.hney < 1 {
            errs.push(format!("hney must be >= 1, got {}", self.hney));
        }
        if !(self.rfill > 0.0 && self.rfill.is_finite()) {
            errs.push(format!("rfill must be positive, got {}", self.rfill));
        }
        if !(self.volfrac > 0.0 && self.volfrac <= 1.0) {
            errs.push(format!("volfrac must lie in (0, 1], got {}", self.volfrac));
        }
        if !(self.penal >= 1.0 && self.penal.is_finite()) {
            errs.push(format!("penal must be >= 1, got {}", self.penal));
        }
        if !(0.0..0.5).contains(&self.nu) {
            errs.push(format!("nu must lie in [0, 0.5), got {}", self.nu));
        }
        if !(self.move_limit > 0.0 && self.move_limit <= 1.0) {
            errs.push(format!("move must lie in (0, 1], got {}", self.move_limit));
        }
        if self.maxiter < 1 {
            errs.push("maxiter must be >= 1".to_string());
        }
        if !(self.change_tol > 0.0) {
            errs.push(format!("change-tol must be positive, got {}", self.change_tol));
        }
        if self.problem == ProblemKind::Custom && self.problem_file.is_none() {
            errs.push("problem custom needs problem-file".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Applies one `key = value` setting. Keys match the long command-line
    /// flags (`hnex`, `rfill`, `change-tol`, ...); `_` and `-` are
    /// interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |what: &str| Error::Config(vec![format!("{key}: {value:?} is not {what}")]);
        match key.as_str() {
            "hnex" => self.hnex = value.parse().map_err(|_| bad("a non-negative integer"))?,
            "hney" => self.hney = value.parse().map_err(|_| bad("a non-negative integer"))?,
            "rfill" => self.rfill = parse_radius(value)?,
            "volfrac" => self.volfrac = value.parse().map_err(|_| bad("a number"))?,
            "penal" => self.penal = value.parse().map_err(|_| bad("a number"))?,
            "ft" => {
                self.ft = value
                    .parse()
                    .map_err(|_| Error::Config(vec![format!("ft: must be 0, 1 or 2, got {value:?}")]))?
            }
            "problem" => self.problem = value.parse().map_err(|e: Error| Error::Config(vec![e.to_string()]))?,
            "problem-file" => self.problem_file = Some(PathBuf::from(value)),
            "nu" => self.nu = value.parse().map_err(|_| bad("a number"))?,
            "move" => self.move_limit = value.parse().map_err(|_| bad("a number"))?,
            "maxiter" => self.maxiter = value.parse().map_err(|_| bad("a non-negative integer"))?,
            "change-tol" => self.change_tol = value.parse().map_err(|_| bad("a number"))?,
            "output" => self.output = PathBuf::from(value),
            other => return Err(Error::Config(vec![format!("unknown key {other:?}")])),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file (`#` starts a comment). All bad
    /// lines are reported together.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut errs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(Error::Config(e)) = self.set(k, v) {
                        errs.extend(e.into_iter().map(|e| format!("line {}: {e}", i + 1)));
                    }
                }
                None => errs.push(format!("line {}: expected key = value", i + 1)),
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }
}

/// Outcome of [`run`]: the mesh and the final design state.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub mesh: HexMesh,
    pub problem: Problem,
    pub state: DesignState,
}

impl RunConfig {
    pub fn settings(&self) -> OptimizerSettings {
        OptimizerSettings {
            volfrac: self.volfrac,
            move_limit: self.move_limit,
            max_iter: self.maxiter,
            change_tol: self.change_tol,
        }
    }

    pub fn problem_for(&self, mesh: &HexMesh) -> Result<Problem> {
        match (self.problem, &self.problem_file) {
            (ProblemKind::Custom, Some(path)) => CustomProblem::from_file(path)?.build(mesh),
            (kind, _) => Problem::build(kind, mesh),
        }
    }
}

/// Mesh, problem, filter, element matrix and optimization loop in one call.
/// `observer` sees every iteration record as it is produced.
pub fn run(cfg: &RunConfig, observer: impl FnMut(&IterationRecord)) -> Result<RunOutput> {
    cfg.validate()?;
    let mesh = build_mesh(MeshSpec::new(cfg.hnex, cfg.hney)?)?;
    let problem = cfg.problem_for(&mesh)?;
    let filter = build_filter(mesh.centroids(), cfg.rfill, cfg.ft)?;
    let material = MaterialModel::with_penal(cfg.penal)?;
    let k0 = wachspress_k0(cfg.nu)?;
    let state = Optimizer::new(&mesh, &problem, &filter, material, k0, cfg.settings())?.run_with(observer)?;
    Ok(RunOutput { mesh, problem, state })
}
