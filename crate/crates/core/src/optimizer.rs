//! Compliance minimization with the optimality-criteria update.

use crate::element::{dmodulus, modulus, ElementStiffness, MaterialModel};
use crate::error::{Error, Result};
use crate::fea::{FeSystem, SolveResult};
use crate::filter::{FilterMode, FilterOperator};
use crate::mesh::HexMesh;
use crate::problems::Problem;

/// Upper end of the bisection bracket for the volume multiplier.
pub const LAMBDA_MAX: f64 = 1e9;
/// Bisection stops once `(high - low) / (high + low)` drops below this.
pub const BISECTION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementTag {
    Active,
    Solid,
    Void,
}

/// Non-design regions: solid elements are held at density 1, void at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassiveMask {
    tags: Vec<ElementTag>,
}

impl PassiveMask {
    pub fn all_active(nelem: usize) -> Self {
        PassiveMask {
            tags: vec![ElementTag::Active; nelem],
        }
    }

    pub fn from_tags(tags: Vec<ElementTag>) -> Self {
        PassiveMask { tags }
    }

    pub fn tags(&self) -> &[ElementTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn is_active(&self, e: usize) -> bool {
        self.tags[e] == ElementTag::Active
    }

    pub fn count(&self, tag: ElementTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.tags.len()).filter(move |&e| self.is_active(e))
    }

    /// Overwrites solid and void entries with 1 and 0.
    pub fn apply(&self, x: &mut [f64]) {
        for (v, tag) in x.iter_mut().zip(&self.tags) {
            match tag {
                ElementTag::Solid => *v = 1.0,
                ElementTag::Void => *v = 0.0,
                ElementTag::Active => {}
            }
        }
    }
}

/// Maps design variables to physical densities: density filtering (mode 2
/// only) followed by the passive mask.
#[derive(Clone, Copy)]
pub struct DensityMap<'a> {
    pub filter: &'a FilterOperator,
    pub mask: &'a PassiveMask,
}

impl DensityMap<'_> {
    pub fn physical(&self, x: &[f64]) -> Vec<f64> {
        let mut xphys = match self.filter.mode() {
            FilterMode::Density => self.filter.density_unchecked(x),
            _ => x.to_vec(),
        };
        self.mask.apply(&mut xphys);
        xphys
    }
}

/// Starting design: active elements share the material left over after the
/// solid region is accounted for, so the total volume fraction is `volfrac`.
pub fn initial_design(mask: &PassiveMask, volfrac: f64) -> Vec<f64> {
    let nelem = mask.len() as f64;
    let nsolid = mask.count(ElementTag::Solid) as f64;
    let nactive = mask.count(ElementTag::Active);
    let fill = if nactive > 0 {
        ((volfrac * nelem - nsolid) / nactive as f64).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut x = vec![fill; mask.len()];
    mask.apply(&mut x);
    x
}

/// Compliance summed over load cases and its derivative with respect to the
/// physical densities.
///
/// At equilibrium `Σ_j E_j ce_j = Fᵀu`; the value returned is
/// `2 Fᵀu - Σ_j E_j ce_j`, which is stationary in `u`, so solver round-off
/// only enters at second order. This keeps finite differences of the
/// objective meaningful down to small steps.
pub fn objective_and_sensitivity(xphys: &[f64], result: &SolveResult, m: &MaterialModel) -> (f64, Vec<f64>) {
    let mut c = 0.0;
    let mut dc = vec![0.0; xphys.len()];
    for (ce, work) in result.element_energies.iter().zip(&result.work) {
        let mut energy = 0.0;
        for (j, (&x, &e)) in xphys.iter().zip(ce).enumerate() {
            energy += modulus(x, m) * e;
            dc[j] -= dmodulus(x, m) * e;
        }
        c += 2.0 * work - energy;
    }
    (c, dc)
}

#[derive(Debug, Clone)]
pub struct OcStep {
    pub x: Vec<f64>,
    pub xphys: Vec<f64>,
    pub lambda: f64,
    /// `Σ xphys` of the returned design.
    pub volume: f64,
    /// `volfrac · nelem`.
    pub target: f64,
}

/// One optimality-criteria update with bisection on the volume multiplier.
///
/// Active elements move to `x · sqrt(-dc / (dv Λ))`, clamped to the move
/// limit and to `[0, 1]`; passive elements keep their values. `Λ` is bisected
/// on `[0, LAMBDA_MAX]` until the physical volume `Σ map(x_new)` meets
/// `volfrac · nelem`.
pub fn oc_update(
    x: &[f64],
    dc: &[f64],
    dv: &[f64],
    volfrac: f64,
    move_limit: f64,
    map: &DensityMap<'_>,
) -> Result<OcStep> {
    let n = x.len();
    if dc.len() != n || dv.len() != n || map.mask.len() != n || map.filter.len() != n {
        return Err(Error::Optimizer("oc_update: inconsistent vector lengths".into()));
    }
    if !(volfrac > 0.0 && volfrac <= 1.0) {
        return Err(Error::Optimizer(format!("volume fraction {volfrac} outside (0, 1]")));
    }
    if !(move_limit > 0.0) {
        return Err(Error::Optimizer(format!("move limit must be positive, got {move_limit}")));
    }
    let scale = dc.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    for e in map.mask.active() {
        if dc[e] > 1e-12 * (1.0 + scale) || !dc[e].is_finite() {
            return Err(Error::Optimizer(format!("compliance sensitivity of element {e} is {}", dc[e])));
        }
        if !(dv[e] > 0.0) {
            return Err(Error::Optimizer(format!("volume sensitivity of element {e} is {}", dv[e])));
        }
    }

    let target = volfrac * n as f64;
    let candidate = |lambda: f64| -> Vec<f64> {
        let mut out = x.to_vec();
        for e in map.mask.active() {
            let lo = (x[e] - move_limit).max(0.0);
            let hi = (x[e] + move_limit).min(1.0);
            let step = if lambda > 0.0 {
                x[e] * ((-dc[e]).max(0.0) / (dv[e] * lambda)).sqrt()
            } else {
                hi
            };
            out[e] = step.clamp(lo, hi).clamp(0.0, 1.0);
        }
        out
    };
    let volume = |xc: &[f64]| -> (Vec<f64>, f64) {
        let xp = map.physical(xc);
        let v = xp.iter().sum();
        (xp, v)
    };

    // Λ -> 0 pushes every active element to its upper bound
    let upper = candidate(0.0);
    let (xp, v) = volume(&upper);
    if v <= target * (1.0 + 1e-12) {
        return Ok(OcStep {
            x: upper,
            xphys: xp,
            lambda: 0.0,
            volume: v,
            target,
        });
    }
    let (_, v_low) = volume(&candidate(LAMBDA_MAX));
    if v_low > target {
        return Err(Error::BisectionBracket {
            target,
            low: v_low,
            high: v,
        });
    }

    let (mut l1, mut l2) = (0.0, LAMBDA_MAX);
    let mut best = None;
    // the cap only matters when the volume jumps at Λ = 0 (zero sensitivities)
    for _ in 0..2000 {
        if (l2 - l1) / (l1 + l2) <= BISECTION_TOL {
            break;
        }
        let lmid = 0.5 * (l1 + l2);
        let xc = candidate(lmid);
        let (xp, v) = volume(&xc);
        if v > target {
            l1 = lmid;
        } else {
            l2 = lmid;
        }
        best = Some((xc, xp, lmid, v));
    }
    let (x, xphys, lambda, volume) = best.expect("bisection runs at least once");
    Ok(OcStep {
        x,
        xphys,
        lambda,
        volume,
        target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub volfrac: f64,
    pub move_limit: f64,
    pub max_iter: usize,
    pub change_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            volfrac: 0.5,
            move_limit: 0.2,
            max_iter: 200,
            change_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub compliance: f64,
    pub volume_fraction: f64,
    pub change: f64,
}

impl IterationRecord {
    /// `it=<n> obj=<c> vol=<v> change=<d>`
    pub fn log_line(&self) -> String {
        format!(
            "it={} obj={:.4} vol={:.3} change={:.3}",
            self.iteration, self.compliance, self.volume_fraction, self.change
        )
    }
}

#[derive(Debug, Clone)]
pub struct DesignState {
    pub x: Vec<f64>,
    pub xphys: Vec<f64>,
    /// Compliance of the last analysed design.
    pub c: f64,
    /// Sensitivities handed to the last OC update.
    pub dc: Vec<f64>,
    pub dv: Vec<f64>,
    pub iteration: usize,
    pub change: f64,
    pub history: Vec<IterationRecord>,
    /// Volume targets met by each OC update: `(Σ xphys, target)`.
    pub oc_volumes: Vec<(f64, f64)>,
}

/// Objective and sensitivities for one design.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub xphys: Vec<f64>,
    pub c: f64,
    /// Exact `dC/dx` through the design-to-physical map (zero on passive
    /// elements).
    pub gradient: Vec<f64>,
    /// Sensitivities for the OC update: the gradient, sensitivity-filtered
    /// when the filter mode asks for it.
    pub dc: Vec<f64>,
    pub dv: Vec<f64>,
    pub solve: SolveResult,
}

pub struct Optimizer<'a> {
    system: FeSystem<'a>,
    filter: &'a FilterOperator,
    mask: &'a PassiveMask,
    material: MaterialModel,
    settings: OptimizerSettings,
}

impl<'a> Optimizer<'a> {
    pub fn new(
        mesh: &'a HexMesh,
        problem: &'a Problem,
        filter: &'a FilterOperator,
        material: MaterialModel,
        k0: ElementStiffness,
        settings: OptimizerSettings,
    ) -> Result<Self> {
        material.validate()?;
        if filter.len() != mesh.nelem() || problem.mask.len() != mesh.nelem() {
            return Err(Error::Optimizer("filter, mask and mesh sizes differ".into()));
        }
        if !(settings.volfrac > 0.0 && settings.volfrac <= 1.0) {
            return Err(Error::Optimizer(format!("volume fraction {} outside (0, 1]", settings.volfrac)));
        }
        let system = FeSystem::new(mesh, k0, problem.loads.clone())?;
        Ok(Optimizer {
            system,
            filter,
            mask: &problem.mask,
            material,
            settings,
        })
    }

    pub fn density_map(&self) -> DensityMap<'a> {
        DensityMap {
            filter: self.filter,
            mask: self.mask,
        }
    }

    pub fn settings(&self) -> &OptimizerSettings {
        &self.settings
    }

    pub fn initial_design(&self) -> Vec<f64> {
        initial_design(self.mask, self.settings.volfrac)
    }

    /// Compliance of design `x`.
    pub fn compliance(&self, x: &[f64]) -> Result<f64> {
        let xphys = self.density_map().physical(x);
        let result = self.system.solve(&xphys, &self.material)?;
        Ok(objective_and_sensitivity(&xphys, &result, &self.material).0)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let n = x.len();
        let xphys = self.density_map().physical(x);
        let solve = self.system.solve(&xphys, &self.material)?;
        let (c, mut dphys) = objective_and_sensitivity(&xphys, &solve, &self.material);
        let mut dvphys = vec![1.0 / (n as f64 * self.settings.volfrac); n];
        for e in 0..n {
            if !self.mask.is_active(e) {
                dphys[e] = 0.0;
                dvphys[e] = 0.0;
            }
        }
        let (gradient, dc, mut dv) = match self.filter.mode() {
            FilterMode::Null => (dphys.clone(), dphys, dvphys),
            FilterMode::Sensitivity => {
                let filtered = self.filter.with_mode(FilterMode::Sensitivity).filter_sensitivities(x, &dphys)?;
                (dphys, filtered, dvphys)
            }
            FilterMode::Density => {
                let g = self.filter.chainrule_density(&dphys)?;
                let dv = self.filter.chainrule_density(&dvphys)?;
                (g.clone(), g, dv)
            }
        };
        let mut dc = dc;
        for e in 0..n {
            if !self.mask.is_active(e) {
                dc[e] = 0.0;
                dv[e] = 0.0;
            }
        }
        Ok(Evaluation {
            xphys,
            c,
            gradient,
            dc,
            dv,
            solve,
        })
    }

    pub fn run(&self) -> Result<DesignState> {
        self.run_with(|_| {})
    }

    /// Runs the optimization loop, reporting every iteration to `observer`.
    pub fn run_with(&self, mut observer: impl FnMut(&IterationRecord)) -> Result<DesignState> {
        let s = self.settings;
        let n = self.mask.len();
        let map = self.density_map();
        let mut x = self.initial_design();
        let mut history = Vec::new();
        let mut oc_volumes = Vec::new();
        let mut iteration = 0;
        loop {
            iteration += 1;
            let eval = self.evaluate(&x)?;
            if !eval.c.is_finite() {
                return Err(Error::NonFinite { iteration });
            }
            let step = oc_update(&x, &eval.dc, &eval.dv, s.volfrac, s.move_limit, &map)?;
            let change = self
                .mask
                .active()
                .map(|e| (step.x[e] - x[e]).abs())
                .fold(0.0, f64::max);
            oc_volumes.push((step.volume, step.target));
            x = step.x;
            let xphys = step.xphys;
            let record = IterationRecord {
                iteration,
                compliance: eval.c,
                volume_fraction: xphys.iter().sum::<f64>() / n as f64,
                change,
            };
            observer(&record);
            history.push(record);
            if change < s.change_tol || iteration >= s.max_iter {
                return Ok(DesignState {
                    x,
                    xphys,
                    c: eval.c,
                    dc: eval.dc,
                    dv: eval.dv,
                    iteration,
                    change,
                    history,
                    oc_volumes,
                });
            }
        }
    }
}
