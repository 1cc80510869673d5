use serde::{Deserialize, Serialize};

use crate::analysis::critical_radius_from_constant;
use crate::error::{Error, Result};
use crate::operators::{
    apply_power, apply_t, apply_t2_scaled, apply_t_scaled, ProblemSpec, Regime,
};
use crate::profile::RadialProfile;

use super::{
    certify, BoundTally, InitialProfile, SolveConfig, SolveResult, Status, TUNING_REL_TOL,
};

/// Nodes with `w ≤ RATIO_CUTOFF` are excluded from the ratio spread.
pub const RATIO_CUTOFF: f64 = 1e-6;

const COLLAPSE_FLOOR: f64 = 1e-280;
const REFINEMENT_ROUNDS: usize = 3;

/// Outcome of `w ← T̃(w)/‖T̃(w)‖`.
#[derive(Debug, Clone)]
pub struct NormalizedIteration {
    pub shape: RadialProfile,
    /// `‖T̃(w)‖` at the final shape.
    pub kappa: f64,
    pub iterations: usize,
    pub final_change: f64,
    /// κ after every step.
    pub trace: Vec<f64>,
}

/// Principal factor of the balanced composite and the threshold it implies.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub kappa: f64,
    /// `C = κ^{-N}`.
    pub c: f64,
    pub eigen_shape: RadialProfile,
    /// `R* = C^{1/(2(N+α))}`.
    pub critical_radius: f64,
    pub iterations: usize,
    /// `max - min` of `T(w)/w` over nodes with `w > RATIO_CUTOFF`.
    pub ratio_spread: f64,
}

/// Summary of an [`EigenResult`] without the shape, for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub kappa: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub critical_radius: f64,
    pub iterations: usize,
    pub ratio_spread: f64,
}

impl EigenResult {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary {
            kappa: self.kappa,
            c: self.c,
            critical_radius: self.critical_radius,
            iterations: self.iterations,
            ratio_spread: self.ratio_spread,
        }
    }
}

fn normalized_start(cfg: &SolveConfig) -> Result<RadialProfile> {
    let v = cfg.initial_profile.sample(&cfg.grid)?;
    let norm = v.sup_norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroCollapse { iteration: 0 });
    }
    Ok(v.scaled(1.0 / norm))
}

fn power_iteration(
    start: RadialProfile,
    tol: f64,
    max_iter: usize,
    mut step: impl FnMut(&RadialProfile) -> Result<RadialProfile>,
) -> Result<NormalizedIteration> {
    let mut w = start;
    let mut trace = Vec::new();
    let mut change = f64::INFINITY;
    for k in 1..=max_iter {
        let y = step(&w)?;
        let kappa = y.sup_norm();
        if !(kappa > COLLAPSE_FLOOR) || !kappa.is_finite() {
            return Err(Error::ZeroCollapse { iteration: k });
        }
        let next = y.scaled(1.0 / kappa);
        change = next.distance(&w)?;
        w = next;
        trace.push(kappa);
        if change < tol {
            return Ok(NormalizedIteration {
                shape: w,
                kappa,
                iterations: k,
                final_change: change,
                trace,
            });
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
        last_change: change,
    })
}

/// Power-style iteration `w ← T̃(w)/‖T̃(w)‖` from the configured start.
pub fn normalized_iteration(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<NormalizedIteration> {
    spec.validate()?;
    cfg.validate()?;
    let start = normalized_start(cfg)?;
    power_iteration(start, cfg.tol_fixpoint, cfg.max_iter, |w| {
        apply_t_scaled(w, spec)
    })
}

/// `c = κ^{1/(1-p)}`, the factor with `c^{p-1} κ = 1`.
pub fn rescale_factor(kappa: f64, degree: f64) -> f64 {
    kappa.powf(1.0 / (1.0 - degree))
}

/// Turns an approximate eigen shape `T̃(w) ≈ κw` into a fixed point `c·w`
/// using the homogeneity `T̃(cw) = c^p T̃(w)`.
pub fn rescale_to_fixed_point(
    shape: &RadialProfile,
    kappa: f64,
    spec: &ProblemSpec,
) -> Result<RadialProfile> {
    if spec.regime() == Regime::Balanced {
        return Err(Error::BalancedRegime);
    }
    Ok(shape.scaled(rescale_factor(kappa, spec.degree())))
}

fn ratio_spread(shape: &RadialProfile, image: &RadialProfile) -> f64 {
    let (lo, hi) = shape
        .values()
        .iter()
        .zip(image.values())
        .filter(|(&w, _)| w > RATIO_CUTOFF)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&w, &y)| {
            let r = y / w;
            (lo.min(r), hi.max(r))
        });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

fn balanced_eigen(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<EigenResult> {
    let unit = ProblemSpec::new(spec.dim, spec.alpha, spec.beta)?;
    if unit.regime() != Regime::Balanced {
        return Err(Error::WrongRegime {
            expected: Regime::Balanced.as_str(),
            actual: unit.regime().as_str(),
        });
    }
    let it = normalized_iteration(&unit, cfg)?;
    let image = apply_t(&it.shape, &unit)?;
    let kappa = image.sup_norm();
    let c = kappa.powi(-(spec.dim as i32));
    Ok(EigenResult {
        kappa,
        c,
        critical_radius: critical_radius_from_constant(c, spec.dim, spec.alpha),
        iterations: it.iterations,
        ratio_spread: ratio_spread(&it.shape, &image),
        eigen_shape: it.shape,
    })
}

/// Threshold constant `C` of the balanced system with exponents
/// `(α, N²/α)` and unit coefficients.
pub fn principal_constant(dim: u32, alpha: f64, cfg: &SolveConfig) -> Result<EigenResult> {
    let n = dim as f64;
    let spec = ProblemSpec::new(dim, alpha, n * n / alpha)?;
    balanced_eigen(&spec, cfg)
}

/// `λ₁ = 1/κ_S` for the single-equation map
/// `S(v)(t) = ∫_t^1 (∫_0^s N τ^{N-1} v^N dτ)^{1/N} ds`.
///
/// `N = 1` is accepted for testing against `π²/4`.
pub fn single_equation_eigen(dim: u32, cfg: &SolveConfig) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidSpec("dimension must be positive".into()));
    }
    cfg.validate()?;
    let start = normalized_start(cfg)?;
    let it = power_iteration(start, cfg.tol_fixpoint, cfg.max_iter, |w| {
        apply_power(w, dim as f64, dim)
    })?;
    Ok(1.0 / it.kappa)
}

pub(super) fn solve_superlinear(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    let mut round_cfg = cfg.clone();
    let mut total = 0;
    let mut trace = Vec::new();
    let mut bounds = cfg.check_bounds.then(BoundTally::default);
    for round in 0..REFINEMENT_ROUNDS {
        let budget = cfg.max_iter.saturating_sub(total);
        if budget == 0 {
            break;
        }
        round_cfg.max_iter = budget;
        round_cfg.check_bounds = false;
        let it = match power_iteration(
            normalized_start(&round_cfg)?,
            round_cfg.tol_fixpoint,
            budget,
            |w| {
                if let Some(tally) = bounds.as_mut() {
                    tally.record(w, spec)?;
                }
                apply_t_scaled(w, spec)
            },
        ) {
            Ok(it) => it,
            Err(Error::MaxIterExceeded { last_change, .. }) => {
                let mut r = SolveResult::empty(Some(Regime::Superlinear), Status::MaxIterExceeded);
                r.iterations = cfg.max_iter;
                r.final_change = last_change;
                r.trace = trace;
                r.bounds = bounds;
                return Ok(r);
            }
            Err(Error::ZeroCollapse { iteration }) => {
                let mut r = SolveResult::empty(Some(Regime::Superlinear), Status::Diverged);
                r.iterations = total + iteration;
                r.trace = trace;
                r.bounds = bounds;
                return Ok(r);
            }
            Err(e) => return Err(e),
        };
        total += it.iterations;
        if cfg.record_trace {
            trace.extend_from_slice(&it.trace);
        }
        let v1 = rescale_to_fixed_point(&it.shape, it.kappa, spec)?;
        let v2 = apply_t2_scaled(&v1, spec)?;
        let cert = certify(spec, cfg.tol_fixpoint, &v1, &v2)?;
        let last_round = round + 1 == REFINEMENT_ROUNDS;
        if !cert.passed() && cert.only_fixed_point_failed() && !last_round {
            round_cfg.initial_profile = InitialProfile::Custom(it.shape);
            round_cfg.tol_fixpoint *= 0.1;
            continue;
        }
        let status = if cert.passed() {
            Status::Converged
        } else {
            Status::Uncertified
        };
        let mut r = SolveResult::empty(Some(Regime::Superlinear), status);
        r.iterations = total;
        r.final_change = it.final_change;
        r.trace = trace;
        r.bounds = bounds;
        return Ok(r.with_pair(v1, v2, cert));
    }
    let mut r = SolveResult::empty(Some(Regime::Superlinear), Status::MaxIterExceeded);
    r.iterations = total;
    r.trace = trace;
    r.bounds = bounds;
    Ok(r)
}

pub(super) fn solve_balanced(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    let eigen = match balanced_eigen(spec, cfg) {
        Ok(e) => e,
        Err(Error::MaxIterExceeded {
            iterations,
            last_change,
        }) => {
            let mut r = SolveResult::empty(Some(Regime::Balanced), Status::MaxIterExceeded);
            r.iterations = iterations;
            r.final_change = last_change;
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let target = spec.threshold_product();
    let mismatch = (target - eigen.c).abs() / eigen.c;
    let iterations = eigen.iterations;
    if mismatch > TUNING_REL_TOL {
        let mut r = SolveResult::empty(Some(Regime::Balanced), Status::NonexistenceCertified);
        r.iterations = iterations;
        r.final_change = 0.0;
        r.eigen = Some(eigen);
        return Ok(r);
    }
    let v1 = eigen.eigen_shape.clone();
    let v2 = apply_t2_scaled(&v1, spec)?;
    let cert = certify(spec, cfg.tol_fixpoint, &v1, &v2)?;
    let status = if cert.passed() {
        Status::Converged
    } else {
        Status::Uncertified
    };
    let mut r = SolveResult::empty(Some(Regime::Balanced), status);
    r.iterations = iterations;
    r.final_change = cert.fixed_point_defect;
    r.eigen = Some(eigen);
    Ok(r.with_pair(v1, v2, cert))
}
