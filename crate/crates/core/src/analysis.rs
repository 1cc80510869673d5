//! Verification artifacts: the constant Γ, the two-sided norm bounds of the
//! composite operator, ODE/PDE residuals of computed pairs, the threshold
//! bracket of the balanced regime and reconstruction on the ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{apply_t_scaled, ProblemSpec};
use crate::profile::{cone_report, frac_pow, RadialProfile};
use crate::quadrature::{GaussLegendre, MonotoneCubic};
use crate::solvers::{principal_constant, SolveConfig};

/// Absolute slack allowed on either side of the norm sandwich.
pub const BOUND_SLACK: f64 = 1e-9;

/// Residual gate at the reference resolution of 2048 nodes.
pub const RESIDUAL_GATE_REF: f64 = 1e-5;

/// Default inner cut-off of the PDE residual.
pub const DEFAULT_T_CUT: f64 = 0.1;

const REFERENCE_NODES: f64 = 2048.0;

/// Residual gate for a grid of `n_nodes`: `1e-5` at 2048 nodes or finer,
/// growing like `h²` on coarser grids.
pub fn residual_gate(n_nodes: usize) -> f64 {
    let ratio = (REFERENCE_NODES - 1.0) / (n_nodes as f64 - 1.0);
    RESIDUAL_GATE_REF * ratio.powi(2).max(1.0)
}

/// `Γ = ∫_{1/4}^{3/4} (s^N - 4^{-N})^{1/N} ds`.
///
/// Substituting `s = 1/4 + u^N / 2` removes the `(s - 1/4)^{1/N}` endpoint
/// singularity; the transformed integrand is a polynomial-like smooth
/// function integrated by a 64-point Gauss-Legendre rule.
pub fn gamma_constant(dim: u32) -> f64 {
    assert!(dim >= 1, "dimension must be positive");
    let n = dim as i32;
    let nf = dim as f64;
    let a = 0.25f64;
    let rule = GaussLegendre::new(64);
    let integrand = |u: f64| {
        let s = a + 0.5 * u.powi(n);
        // s^N - a^N = (s - a) * Σ_k s^k a^{N-1-k}
        let p: f64 = (0..n).map(|k| s.powi(k) * a.powi(n - 1 - k)).sum();
        0.5 * nf * u.powi(n) * (0.5 * p).powf(1.0 / nf)
    };
    rule.integrate(0.0, 1.0, integrand)
}

/// `Γ₁ = Γ^{1+α/N} 4^{-α/N-αβ/N²}`, the constant of the lower norm bound.
pub fn gamma1(dim: u32, alpha: f64, beta: f64) -> f64 {
    let n = dim as f64;
    let g = gamma_constant(dim);
    g.powf(1.0 + alpha / n) * 4f64.powf(-alpha / n - alpha * beta / (n * n))
}

/// Certified enclosure `[1, (4/Γ)^{N+α}]` of the balanced threshold constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    pub lower: f64,
    pub upper: f64,
    pub gamma: f64,
    pub gamma1: f64,
}

impl ThresholdBracket {
    pub fn contains(&self, c: f64) -> bool {
        c >= self.lower && c <= self.upper
    }
}

pub fn threshold_bracket(dim: u32, alpha: f64) -> ThresholdBracket {
    let n = dim as f64;
    let gamma = gamma_constant(dim);
    ThresholdBracket {
        lower: 1.0,
        upper: (4.0 / gamma).powf(n + alpha),
        gamma,
        gamma1: gamma1(dim, alpha, n * n / alpha),
    }
}

/// `R* = C^{1/(2(N+α))}`.
pub fn critical_radius_from_constant(c: f64, dim: u32, alpha: f64) -> f64 {
    c.powf(1.0 / (2.0 * (dim as f64 + alpha)))
}

/// Radius of the ball on which the balanced system with unit coefficients
/// becomes solvable.
pub fn critical_radius(dim: u32, alpha: f64, cfg: &SolveConfig) -> Result<f64> {
    Ok(principal_constant(dim, alpha, cfg)?.critical_radius)
}

/// Margins of `Γ₁‖v‖^p ≤ ‖T v‖ ≤ ‖v‖^p` (times `λ^{1/N}μ^{α/N²}` when scaled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub norm_v: f64,
    pub norm_tv: f64,
    pub degree: f64,
    pub gamma1: f64,
    /// `‖v‖^p - ‖Tv‖`.
    pub upper_margin: f64,
    /// `‖Tv‖ - Γ₁‖v‖^p`; `None` when `v` is outside the cone.
    pub lower_margin: Option<f64>,
    pub harnack_ratio: f64,
}

impl BoundCheck {
    pub fn upper_ok(&self) -> bool {
        self.upper_margin >= -BOUND_SLACK
    }

    pub fn lower_ok(&self) -> bool {
        self.lower_margin.is_some_and(|m| m >= -BOUND_SLACK)
    }

    /// Both sides hold. Fails when the lower side was skipped.
    pub fn passes(&self) -> bool {
        self.upper_ok() && self.lower_ok()
    }

    /// Lower margin, or `NotInCone` when the profile failed the cone test.
    pub fn lower(&self) -> Result<f64> {
        self.lower_margin.ok_or(Error::NotInCone {
            harnack_ratio: self.harnack_ratio,
        })
    }
}

pub fn verify_bounds(v: &RadialProfile, spec: &ProblemSpec) -> Result<BoundCheck> {
    let p = spec.degree();
    let s = spec.scale_factor();
    let g1 = gamma1(spec.dim, spec.alpha, spec.beta);
    let norm_v = v.sup_norm();
    let norm_tv = apply_t_scaled(v, spec)?.sup_norm();
    let pow = norm_v.powf(p);
    let cone = cone_report(v, None);
    Ok(BoundCheck {
        norm_v,
        norm_tv,
        degree: p,
        gamma1: g1,
        upper_margin: s * pow - norm_tv,
        lower_margin: cone.passes().then_some(norm_tv - s * g1 * pow),
        harnack_ratio: cone.harnack_ratio,
    })
}

/// Residuals of a computed pair against the radial ODE system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Once-integrated ODE residual (see [`ode_residual`]), relative.
    pub ode_residual_sup: f64,
    /// Pointwise `((-v')^N)' - N t^{N-1} rhs` by nested central differences,
    /// relative. Diagnostic only: it is `O(√h)` next to `t = 1` whenever an
    /// exponent is below one.
    pub ode_pointwise_sup: f64,
    /// `(max |v_i(1)|, max |v_i'(0)|)` over both profiles.
    pub boundary_defect: [f64; 2],
    /// Relative boundary defect: `|v(1)|/‖v‖` and `|v'(0)|/sup|v'|`.
    pub boundary_relative: [f64; 2],
    pub pde_residual_sup: f64,
}

impl ResidualReport {
    pub fn zero() -> Self {
        ResidualReport {
            ode_residual_sup: 0.0,
            ode_pointwise_sup: 0.0,
            boundary_defect: [0.0; 2],
            boundary_relative: [0.0; 2],
            pde_residual_sup: 0.0,
        }
    }
}

struct EquationResidual {
    integrated: f64,
    pointwise: f64,
    boundary: [f64; 2],
    boundary_relative: [f64; 2],
    pde: f64,
}

/// Residuals of `(v₁, v₂)` for `((-v₁')^N)' = N t^{N-1} λ v₂^α` and
/// `((-v₂')^N)' = N t^{N-1} μ v₁^β`.
///
/// The gated figure compares the exact cell averages `(v_i - v_{i+1})/h` of
/// `-v'` with cell averages of `(∫_0^s N τ^{N-1} rhs dτ)^{1/N}` evaluated by
/// nested 4-point Gauss-Legendre on the linear interpolant of the partner
/// profile. It is scaled by the largest such average. The boundary condition
/// `v'(0) = 0` is built into the lower limit of the integral; `v(1) = 0` is
/// reported separately.
pub fn ode_residual(
    v1: &RadialProfile,
    v2: &RadialProfile,
    spec: &ProblemSpec,
) -> Result<ResidualReport> {
    let (l, m) = (spec.lambda, spec.mu);
    let (a, b) = (spec.alpha, spec.beta);
    ode_residual_with(v1, v2, spec.dim, &|y| Ok(l * frac_pow(y, a)), &|y| {
        Ok(m * frac_pow(y, b))
    })
}

type Rhs<'a> = &'a dyn Fn(f64) -> Result<f64>;

/// [`ode_residual`] for arbitrary right-hand sides `rhs1(v₂)` and `rhs2(v₁)`.
pub fn ode_residual_with(
    v1: &RadialProfile,
    v2: &RadialProfile,
    dim: u32,
    rhs1: Rhs<'_>,
    rhs2: Rhs<'_>,
) -> Result<ResidualReport> {
    v1.check_same_grid(v2)?;
    let e1 = equation_residual(v1, v2, dim, rhs1)?;
    let e2 = equation_residual(v2, v1, dim, rhs2)?;
    Ok(ResidualReport {
        ode_residual_sup: e1.integrated.max(e2.integrated),
        ode_pointwise_sup: e1.pointwise.max(e2.pointwise),
        boundary_defect: [
            e1.boundary[0].max(e2.boundary[0]),
            e1.boundary[1].max(e2.boundary[1]),
        ],
        boundary_relative: [
            e1.boundary_relative[0].max(e2.boundary_relative[0]),
            e1.boundary_relative[1].max(e2.boundary_relative[1]),
        ],
        pde_residual_sup: e1.pde.max(e2.pde),
    })
}

fn ratio_or_raw(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn equation_residual(
    x: &RadialProfile,
    partner: &RadialProfile,
    dim: u32,
    rhs: Rhs<'_>,
) -> Result<EquationResidual> {
    let grid = x.grid();
    let t = grid.nodes();
    let h = grid.spacing();
    let n = t.len();
    let nf = dim as f64;
    let root = 1.0 / nf;
    let xs = x.values();
    let ys = partner.values();
    let rule = GaussLegendre::new(4);

    let integrand = |i: usize, s: f64| -> Result<f64> {
        let y = ys[i] + (ys[i + 1] - ys[i]) * (s - t[i]) / h;
        Ok(nf * s.powi(dim as i32 - 1) * rhs(y.max(0.0))?)
    };

    let mut cumulative = 0.0;
    let mut max_avg = 0.0f64;
    let mut max_diff = 0.0f64;
    let mut max_slope = 0.0f64;
    for i in 0..n - 1 {
        let (lo, hi) = (t[i], t[i + 1]);
        let mut avg = 0.0;
        for (s, w) in rule.mapped(lo, hi) {
            let mut partial = 0.0;
            for (tau, wt) in rule.mapped(lo, s) {
                partial += wt * integrand(i, tau)?;
            }
            avg += w * frac_pow(cumulative + partial, root);
        }
        avg /= h;
        let mut cell = 0.0;
        for (tau, wt) in rule.mapped(lo, hi) {
            cell += wt * integrand(i, tau)?;
        }
        cumulative += cell;

        let slope = (xs[i] - xs[i + 1]) / h;
        max_avg = max_avg.max(avg.abs());
        max_slope = max_slope.max(slope.abs());
        max_diff = max_diff.max((slope - avg).abs());
    }
    let integrated = ratio_or_raw(max_diff, max_avg);

    let signed_pow = |d: f64| d.signum() * d.abs().powi(dim as i32);
    let rhs_nodes = ys
        .iter()
        .map(|&y| rhs(y.max(0.0)))
        .collect::<Result<Vec<f64>>>()?;
    let mut max_rhs = 0.0f64;
    let mut max_point = 0.0f64;
    for i in 1..n - 1 {
        let flux_right = signed_pow((xs[i] - xs[i + 1]) / h);
        let flux_left = signed_pow((xs[i - 1] - xs[i]) / h);
        let lhs = (flux_right - flux_left) / h;
        let r = nf * t[i].powi(dim as i32 - 1) * rhs_nodes[i];
        max_rhs = max_rhs.max(r.abs());
        max_point = max_point.max((lhs - r).abs());
    }
    let pointwise = ratio_or_raw(max_point, max_rhs);

    let end_value = xs[n - 1].abs();
    let start_slope = ((-3.0 * xs[0] + 4.0 * xs[1] - xs[2]) / (2.0 * h)).abs();
    let boundary_relative = [
        ratio_or_raw(end_value, x.sup_norm()),
        ratio_or_raw(start_slope, max_slope),
    ];

    let rhs_profile = RadialProfile::new(grid.clone(), rhs_nodes)?;
    let pde = pde_residual(x, &rhs_profile, dim, DEFAULT_T_CUT)?;

    Ok(EquationResidual {
        integrated,
        pointwise,
        boundary: [end_value, start_slope],
        boundary_relative,
        pde,
    })
}

/// Relative defect of the radial Monge-Ampère identity
/// `det D²u = ū''(t) (ū'(t)/t)^{N-1}` for `ū = -v`, over nodes `t ≥ t_cut`.
///
/// `ū'` comes from central differences of `v`; `ū''` comes from the integral
/// representation `ū'' = (1/N) I^{1/N-1} N t^{N-1} rhs` with
/// `I(t) = ∫_0^t N τ^{N-1} rhs dτ`, so no second difference is taken.
pub fn pde_residual(v: &RadialProfile, rhs: &RadialProfile, dim: u32, t_cut: f64) -> Result<f64> {
    if !(t_cut > 0.0 && t_cut <= 0.25) {
        return Err(Error::InvalidSpec(format!(
            "t_cut must lie in (0, 1/4], got {t_cut}"
        )));
    }
    v.check_same_grid(rhs)?;
    let grid = v.grid();
    let t = grid.nodes();
    let h = grid.spacing();
    let n = t.len();
    let nf = dim as f64;
    let r = rhs.values();
    let vs = v.values();
    let rule = GaussLegendre::new(4);

    let mut integral = vec![0.0; n];
    for i in 0..n - 1 {
        let cell: f64 = rule
            .mapped(t[i], t[i + 1])
            .map(|(s, w)| {
                let y = r[i] + (r[i + 1] - r[i]) * (s - t[i]) / h;
                w * nf * s.powi(dim as i32 - 1) * y
            })
            .sum();
        integral[i + 1] = integral[i] + cell;
    }

    let scale = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        if t[i] < t_cut {
            continue;
        }
        let du = (vs[i - 1] - vs[i + 1]) / (2.0 * h);
        let d2u = if integral[i] > 0.0 {
            integral[i].powf(1.0 / nf - 1.0) * t[i].powi(dim as i32 - 1) * r[i]
        } else {
            0.0
        };
        let det = d2u * (du / t[i]).powi(dim as i32 - 1);
        worst = worst.max((det - r[i]).abs());
    }
    Ok(ratio_or_raw(worst, scale))
}

/// `u(x) = -v(|x|)` at each sample point, using a monotone cubic
/// interpolant of the profile with zero slope at the origin.
pub fn reconstruct_ball(v: &RadialProfile, dim: usize, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let interp = MonotoneCubic::with_zero_left_slope(v.grid().nodes(), v.values());
    points
        .iter()
        .map(|x| {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    got: x.len(),
                    expected: dim,
                });
            }
            let radius = radial_norm(x);
            if !(radius <= 1.0) {
                return Err(Error::OutOfDomain { radius });
            }
            Ok(-interp.eval(radius))
        })
        .collect()
}

/// Euclidean norm summed in ascending magnitude order, so that coordinate
/// permutations and sign flips give bit-identical radii.
fn radial_norm(x: &[f64]) -> f64 {
    let mut sq: Vec<f64> = x.iter().map(|c| c * c).collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().sum::<f64>().sqrt()
}
