use crate::error::{Error, Result};
use crate::operators::{apply_t2_scaled, apply_t_scaled, ProblemSpec, Regime};

use super::{certify, BoundTally, SolveConfig, SolveResult, Status};

/// Picard iteration `v ← T̃(v)` for `αβ < N²`.
///
/// Stops when the relative sup-norm change drops below `tol_fixpoint`, then
/// certifies `(v, T̃₂ v)`. A pair that settled but still fails the
/// fixed-point gate keeps iterating while the budget lasts.
pub fn solve_picard_sublinear(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    spec.validate()?;
    cfg.validate()?;
    let regime = spec.regime();
    if regime != Regime::Sublinear {
        return Err(Error::WrongRegime {
            expected: Regime::Sublinear.as_str(),
            actual: regime.as_str(),
        });
    }

    let mut v = cfg.initial_profile.sample(&cfg.grid)?;
    let mut trace = Vec::new();
    let mut bounds = cfg.check_bounds.then(BoundTally::default);
    let mut change = f64::INFINITY;
    for k in 1..=cfg.max_iter {
        if let Some(tally) = bounds.as_mut() {
            tally.record(&v, spec)?;
        }
        let next = apply_t_scaled(&v, spec)?;
        let norm = next.sup_norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroCollapse { iteration: k });
        }
        change = next.distance(&v)? / norm;
        v = next;
        if cfg.record_trace {
            trace.push(change);
        }
        if change >= cfg.tol_fixpoint {
            continue;
        }
        let v2 = apply_t2_scaled(&v, spec)?;
        let cert = certify(spec, cfg.tol_fixpoint, &v, &v2)?;
        let status = if cert.passed() {
            Status::Converged
        } else if cert.only_fixed_point_failed() && k < cfg.max_iter {
            continue;
        } else {
            Status::Uncertified
        };
        let mut result = SolveResult::empty(Some(regime), status);
        result.iterations = k;
        result.final_change = change;
        result.trace = trace;
        result.bounds = bounds;
        return Ok(result.with_pair(v, v2, cert));
    }

    let v2 = apply_t2_scaled(&v, spec)?;
    let cert = certify(spec, cfg.tol_fixpoint, &v, &v2)?;
    let mut result = SolveResult::empty(Some(regime), Status::MaxIterExceeded);
    result.iterations = cfg.max_iter;
    result.final_change = change;
    result.trace = trace;
    result.bounds = bounds;
    Ok(result.with_pair(v, v2, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::InitialProfile;

    #[test]
    fn rejects_other_regimes() {
        let cfg = SolveConfig::new(64).unwrap();
        for (a, b) in [(2.0, 2.0), (4.0, 4.0)] {
            let spec = ProblemSpec::new(2, a, b).unwrap();
            assert!(matches!(
                solve_picard_sublinear(&spec, &cfg),
                Err(Error::WrongRegime { .. })
            ));
        }
    }

    #[test]
    fn converges_on_coarse_grid_with_scaled_gate() {
        let cfg = SolveConfig::new(257).unwrap();
        let spec = ProblemSpec::new(2, 1.0, 1.0).unwrap();
        let r = solve_picard_sublinear(&spec, &cfg).unwrap();
        assert_eq!(r.status, Status::Converged, "{:?}", r.certificate);
        let v1 = r.v1.as_ref().unwrap();
        let u1 = r.u1().unwrap();
        for (a, b) in v1.values().iter().zip(u1.values()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn max_iter_is_reported() {
        let cfg = SolveConfig::new(64)
            .unwrap()
            .with_max_iter(2)
            .with_initial(InitialProfile::Linear);
        let spec = ProblemSpec::new(2, 1.0, 1.0).unwrap();
        let r = solve_picard_sublinear(&spec, &cfg).unwrap();
        assert_eq!(r.status, Status::MaxIterExceeded);
        assert_eq!(r.iterations, 2);
    }
}
