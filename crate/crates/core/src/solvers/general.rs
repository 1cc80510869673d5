use serde::{Deserialize, Serialize};

use crate::analysis::ode_residual_with;
use crate::error::{Error, Result};
use crate::operators::{apply_general, classify_general, Nonlinearity};
use crate::profile::RadialProfile;

use super::{Certificate, SolveConfig, SolveResult, Status};

const PROBE_LO: f64 = 1e-6;
const PROBE_HI: f64 = 1e6;
const NORM_FLOOR: f64 = 1e-100;
const NORM_CEILING: f64 = 1e100;

/// Damping history of [`solve_general`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Damping {
    pub final_theta: f64,
    pub halvings: usize,
}

/// Damped Picard iteration `v ← (1-θ)v + θ T₁ᶠ(T₂ᵍ(v))` for
/// `det D²u₁ = f(-u₂)`, `det D²u₂ = g(-u₁)`.
///
/// `θ` starts at 1 and halves whenever the sup-norm increment changes sign
/// twice in a row; increments below `tol·‖v‖` are ignored. An iterate whose
/// norm leaves `[1e-100, 1e100]` ends the run as [`Status::Diverged`].
pub fn solve_general(
    f: &Nonlinearity,
    g: &Nonlinearity,
    dim: u32,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    if dim < 2 {
        return Err(Error::InvalidSpec(format!(
            "dimension N must be at least 2, got {dim}"
        )));
    }
    cfg.validate()?;
    let classification = classify_general(f, g, dim, PROBE_LO, PROBE_HI)?;
    let composite = |v: &RadialProfile| apply_general(&apply_general(v, g, dim)?, f, dim);

    let mut v = cfg.initial_profile.sample(&cfg.grid)?;
    let mut theta = 1.0;
    let mut halvings = 0;
    let mut increments: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut change = f64::INFINITY;
    let mut status = Status::MaxIterExceeded;
    let mut iterations = cfg.max_iter;
    let mut cert = None;

    for k in 1..=cfg.max_iter {
        let image = composite(&v)?;
        let next = if theta == 1.0 {
            image
        } else {
            v.zip_with(&image, |a, b| (1.0 - theta) * a + theta * b)?
        };
        let norm = next.sup_norm();
        if !(NORM_FLOOR..=NORM_CEILING).contains(&norm) {
            status = Status::Diverged;
            iterations = k;
            v = next;
            break;
        }
        change = next.distance(&v)? / norm;
        let increment = norm - v.sup_norm();
        if cfg.record_trace {
            trace.push(change);
        }
        if increment.abs() > cfg.tol_fixpoint * norm {
            increments.push(increment);
            let n = increments.len();
            if n >= 3
                && increments[n - 1] * increments[n - 2] < 0.0
                && increments[n - 2] * increments[n - 3] < 0.0
            {
                theta *= 0.5;
                halvings += 1;
                increments.clear();
            }
        }
        v = next;
        if change < cfg.tol_fixpoint {
            let c = certify_general(f, g, dim, cfg.tol_fixpoint, &v)?;
            if c.passed() {
                status = Status::Converged;
            } else if c.only_fixed_point_failed() && k < cfg.max_iter {
                continue;
            } else {
                status = Status::Uncertified;
            }
            iterations = k;
            cert = Some(c);
            break;
        }
    }

    let mut result = SolveResult::empty(None, status);
    result.iterations = iterations;
    result.final_change = change;
    result.classification = Some(classification);
    result.trace = trace;
    result.damping = Some(Damping {
        final_theta: theta,
        halvings,
    });
    if status == Status::Diverged {
        return Ok(result);
    }
    let cert = match cert {
        Some(c) => c,
        None => certify_general(f, g, dim, cfg.tol_fixpoint, &v)?,
    };
    let v2 = apply_general(&v, g, dim)?;
    Ok(result.with_pair(v, v2, cert))
}

fn certify_general(
    f: &Nonlinearity,
    g: &Nonlinearity,
    dim: u32,
    tol: f64,
    v1: &RadialProfile,
) -> Result<Certificate> {
    let v2 = apply_general(v1, g, dim)?;
    let image = apply_general(&v2, f, dim)?;
    let norm = v1.sup_norm();
    let d = image.distance(v1)?;
    let defect = if norm > 0.0 { d / norm } else { d };
    let residuals = ode_residual_with(v1, &v2, dim, &|y| f.eval(y), &|y| g.eval(y))?;
    Ok(Certificate::assemble(
        v1,
        &v2,
        defect,
        10.0 * tol,
        residuals,
    ))
}
