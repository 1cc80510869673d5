//! Fixed-point and eigen iterations for the radial system.
//!
//! Every converged result carries a [`Certificate`]: the fixed-point defect
//! of the returned pair and the residuals of the ODE system, each checked
//! against its gate. An iteration that settles but fails a gate is reported
//! as [`Status::Uncertified`], never as converged.

mod eigen;
mod general;
mod picard;

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use eigen::{
    normalized_iteration, principal_constant, rescale_factor, rescale_to_fixed_point,
    single_equation_eigen, EigenResult, EigenSummary, NormalizedIteration, RATIO_CUTOFF,
};
pub use general::{solve_general, Damping};
pub use picard::solve_picard_sublinear;

use crate::analysis::{ode_residual, residual_gate, verify_bounds, ResidualReport};
use crate::error::{Error, Result};
use crate::operators::{apply_t2_scaled, apply_t_scaled, Classification, ProblemSpec, Regime};
use crate::profile::{cone_report, ConeReport, Grid, RadialProfile};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_NODES: usize = 2048;

/// Relative mismatch `|λμ^{α/N} - C| / C` above which a balanced problem is
/// declared unsolvable.
pub const TUNING_REL_TOL: f64 = 1e-6;

/// Starting profile of an iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// `1 - t²`.
    Parabola,
    /// `1 - t`.
    Linear,
    /// The constant 1 cut down to `min(1, 4(1 - t))`.
    ConstantOnCone,
    Custom(RadialProfile),
}

impl InitialProfile {
    pub fn name(&self) -> &'static str {
        match self {
            InitialProfile::Parabola => "parabola",
            InitialProfile::Linear => "linear",
            InitialProfile::ConstantOnCone => "constant-on-cone",
            InitialProfile::Custom(_) => "custom",
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<RadialProfile> {
        match self {
            InitialProfile::Parabola => RadialProfile::from_fn(grid.clone(), |t| 1.0 - t * t),
            InitialProfile::Linear => RadialProfile::from_fn(grid.clone(), |t| 1.0 - t),
            InitialProfile::ConstantOnCone => {
                RadialProfile::from_fn(grid.clone(), |t| (4.0 * (1.0 - t)).min(1.0))
            }
            InitialProfile::Custom(v) => {
                if v.grid().as_ref() != grid.as_ref() {
                    return Err(Error::GridMismatch);
                }
                Ok(v.clone())
            }
        }
    }
}

impl FromStr for InitialProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabola" => Ok(InitialProfile::Parabola),
            "linear" => Ok(InitialProfile::Linear),
            "constant-on-cone" => Ok(InitialProfile::ConstantOnCone),
            other => Err(Error::InvalidSpec(format!(
                "unknown initial profile {other:?} (expected parabola, linear or constant-on-cone)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub grid: Arc<Grid>,
    pub tol_fixpoint: f64,
    pub max_iter: usize,
    pub initial_profile: InitialProfile,
    /// Keep the per-iteration change (or κ) in [`SolveResult::trace`].
    pub record_trace: bool,
    /// Check the two-sided norm bounds on every iterate in the cone.
    pub check_bounds: bool,
}

impl SolveConfig {
    pub fn new(n_nodes: usize) -> Result<Self> {
        Ok(SolveConfig {
            grid: Grid::uniform(n_nodes)?,
            tol_fixpoint: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            initial_profile: InitialProfile::Parabola,
            record_trace: false,
            check_bounds: false,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_fixpoint = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_initial(mut self, initial: InitialProfile) -> Self {
        self.initial_profile = initial;
        self
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn with_bound_checks(mut self, on: bool) -> Self {
        self.check_bounds = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_fixpoint > 0.0 && self.tol_fixpoint.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "tol_fixpoint must be positive, got {}",
                self.tol_fixpoint
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidSpec("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    NonexistenceCertified,
    MaxIterExceeded,
    /// The iteration settled but the pair failed a certificate gate.
    Uncertified,
    /// The iterate collapsed to zero or blew up.
    Diverged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::NonexistenceCertified => "nonexistence_certified",
            Status::MaxIterExceeded => "max_iter_exceeded",
            Status::Uncertified => "uncertified",
            Status::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gate-by-gate verdict on a candidate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `max(‖T̃v₁ - v₁‖/‖v₁‖, ‖T̃₂v₁ - v₂‖/‖v₂‖)`.
    pub fixed_point_defect: f64,
    pub fixed_point_gate: f64,
    pub residuals: ResidualReport,
    pub residual_gate: f64,
    pub cone_v1: ConeReport,
    pub cone_v2: ConeReport,
    pub failed_gates: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.failed_gates.is_empty()
    }

    pub(crate) fn assemble(
        v1: &RadialProfile,
        v2: &RadialProfile,
        fixed_point_defect: f64,
        fixed_point_gate: f64,
        residuals: ResidualReport,
    ) -> Certificate {
        let gate = residual_gate(v1.len());
        let cone_v1 = cone_report(v1, None);
        let cone_v2 = cone_report(v2, None);
        let mut failed = Vec::new();
        let mut check = |ok: bool, name: &str| {
            if !ok {
                failed.push(name.to_string());
            }
        };
        check(v1.sup_norm() > 0.0 && v2.sup_norm() > 0.0, "nonzero");
        check(fixed_point_defect <= fixed_point_gate, "fixed_point");
        check(residuals.ode_residual_sup <= gate, "ode_residual");
        check(residuals.pde_residual_sup <= gate, "pde_residual");
        check(
            residuals.boundary_relative[0] <= 1e-12 && residuals.boundary_relative[1] <= gate,
            "boundary",
        );
        check(cone_v1.passes() && cone_v2.passes(), "cone");
        Certificate {
            fixed_point_defect,
            fixed_point_gate,
            residuals,
            residual_gate: gate,
            cone_v1,
            cone_v2,
            failed_gates: failed,
        }
    }

    /// True when every failed gate is the fixed-point one, which further
    /// iteration can still fix.
    pub(crate) fn only_fixed_point_failed(&self) -> bool {
        self.failed_gates.iter().all(|g| g == "fixed_point")
    }
}

fn relative_distance(a: &RadialProfile, b: &RadialProfile) -> Result<f64> {
    let d = a.distance(b)?;
    let scale = b.sup_norm();
    Ok(if scale > 0.0 { d / scale } else { d })
}

/// Certifies `(v₁, v₂)` as a solution pair of the scaled system `spec`.
///
/// The fixed-point gate is `10·tol`, widened by [`TUNING_REL_TOL`] in the
/// balanced regime where `λμ^{α/N}` only matches `C` to that tolerance.
pub fn certify(
    spec: &ProblemSpec,
    tol: f64,
    v1: &RadialProfile,
    v2: &RadialProfile,
) -> Result<Certificate> {
    v1.check_same_grid(v2)?;
    let defect = relative_distance(&apply_t_scaled(v1, spec)?, v1)?
        .max(relative_distance(&apply_t2_scaled(v1, spec)?, v2)?);
    let mut gate = 10.0 * tol;
    if spec.regime() == Regime::Balanced {
        gate += TUNING_REL_TOL;
    }
    let residuals = ode_residual(v1, v2, spec)?;
    Ok(Certificate::assemble(v1, v2, defect, gate, residuals))
}

/// Count of iterates on which the norm sandwich was evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundTally {
    pub checked: usize,
    pub violations: usize,
    /// Iterates outside the cone, where only the upper bound applies.
    pub outside_cone: usize,
}

impl BoundTally {
    pub(crate) fn record(&mut self, v: &RadialProfile, spec: &ProblemSpec) -> Result<()> {
        let b = verify_bounds(v, spec)?;
        self.checked += 1;
        if b.lower_margin.is_none() {
            self.outside_cone += 1;
        }
        let lower_bad = b.lower_margin.is_some() && !b.lower_ok();
        if !b.upper_ok() || lower_bad {
            self.violations += 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// `None` for the general system.
    pub regime: Option<Regime>,
    pub status: Status,
    pub v1: Option<RadialProfile>,
    pub v2: Option<RadialProfile>,
    pub iterations: usize,
    pub final_change: f64,
    /// Gated ODE residual of the returned pair.
    pub residual_sup: Option<f64>,
    pub certificate: Option<Certificate>,
    pub eigen: Option<EigenResult>,
    pub classification: Option<Classification>,
    pub trace: Vec<f64>,
    pub bounds: Option<BoundTally>,
    pub damping: Option<Damping>,
}

impl SolveResult {
    pub(crate) fn empty(regime: Option<Regime>, status: Status) -> Self {
        SolveResult {
            regime,
            status,
            v1: None,
            v2: None,
            iterations: 0,
            final_change: f64::NAN,
            residual_sup: None,
            certificate: None,
            eigen: None,
            classification: None,
            trace: Vec::new(),
            bounds: None,
            damping: None,
        }
    }

    pub(crate) fn with_pair(
        mut self,
        v1: RadialProfile,
        v2: RadialProfile,
        cert: Certificate,
    ) -> Self {
        self.residual_sup = Some(cert.residuals.ode_residual_sup);
        self.certificate = Some(cert);
        self.v1 = Some(v1);
        self.v2 = Some(v2);
        self
    }

    /// `u₁ = -v₁`.
    pub fn u1(&self) -> Option<RadialProfile> {
        self.v1.as_ref().map(RadialProfile::negated)
    }

    /// `u₂ = -v₂`.
    pub fn u2(&self) -> Option<RadialProfile> {
        self.v2.as_ref().map(RadialProfile::negated)
    }

    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Solves the scaled system for any exponents.
///
/// Sublinear problems use Picard iteration. Superlinear problems use the
/// normalized iteration followed by the homogeneous rescale. Balanced
/// problems compute the threshold constant `C` and either certify
/// nonexistence or, when `λμ^{α/N}` matches `C`, return the eigen shape.
pub fn solve_system(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    spec.validate()?;
    cfg.validate()?;
    match spec.regime() {
        Regime::Sublinear => solve_picard_sublinear(spec, cfg),
        Regime::Superlinear => eigen::solve_superlinear(spec, cfg),
        Regime::Balanced => eigen::solve_balanced(spec, cfg),
    }
}
