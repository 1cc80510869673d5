//! Cone operators of the radial system.
//!
//! For a nonnegative profile `v` and exponent `γ`,
//!
//! ```text
//! T_γ(v)(t) = ∫_t^1 ( ∫_0^s N τ^{N-1} v(τ)^γ dτ )^{1/N} ds
//! ```
//!
//! `T₁` uses `γ = α`, `T₂` uses `γ = β`, and the composite is `T = T₁ ∘ T₂`.
//! A pair `(v₁, v₂)` of positive concave profiles with `v₁ = T₁ v₂` and
//! `v₂ = T₂ v₁` gives the radial convex solution `u_i(x) = -v_i(|x|)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{frac_pow, inner_cumulative, inner_from_samples, outer_tail, RadialProfile};

/// Relative tolerance used to decide whether `αβ = N²`.
pub const BALANCE_REL_TOL: f64 = 1e-12;

/// Sign of `αβ - N²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Sublinear,
    Balanced,
    Superlinear,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Sublinear => "sublinear",
            Regime::Balanced => "balanced",
            Regime::Superlinear => "superlinear",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exponents, dimension and coefficients of
/// `det D²u₁ = λ(-u₂)^α`, `det D²u₂ = μ(-u₁)^β` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(rename = "N")]
    pub dim: u32,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ProblemSpec {
    pub fn new(dim: u32, alpha: f64, beta: f64) -> Result<Self> {
        Self::scaled(dim, alpha, beta, 1.0, 1.0)
    }

    pub fn scaled(dim: u32, alpha: f64, beta: f64, lambda: f64, mu: f64) -> Result<Self> {
        let spec = ProblemSpec {
            dim,
            alpha,
            beta,
            lambda,
            mu,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidSpec(format!(
                "dimension N must be at least 2, got {}",
                self.dim
            )));
        }
        for (name, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("mu", self.mu),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be a finite positive number, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Homogeneity degree `p = αβ/N²` of `T`.
    pub fn degree(&self) -> f64 {
        let n = self.dim as f64;
        self.alpha * self.beta / (n * n)
    }

    pub fn regime(&self) -> Regime {
        let n2 = (self.dim as f64).powi(2);
        let prod = self.alpha * self.beta;
        if (prod - n2).abs() <= BALANCE_REL_TOL * n2 {
            Regime::Balanced
        } else if prod < n2 {
            Regime::Sublinear
        } else {
            Regime::Superlinear
        }
    }

    /// `λ μ^{α/N}`, the combination that the balanced threshold constrains.
    pub fn threshold_product(&self) -> f64 {
        self.lambda * self.mu.powf(self.alpha / self.dim as f64)
    }

    /// `λ^{1/N} μ^{α/N²}`, the factor relating the scaled and unscaled composites.
    pub fn scale_factor(&self) -> f64 {
        let n = self.dim as f64;
        self.lambda.powf(1.0 / n) * self.mu.powf(self.alpha / (n * n))
    }

    pub fn is_unscaled(&self) -> bool {
        self.lambda == 1.0 && self.mu == 1.0
    }
}

/// A right-hand side `f: [0, ∞) → [0, ∞)` for the general system.
#[derive(Clone)]
pub struct Nonlinearity {
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Caller's claim that `f` is nondecreasing; spot-checked by [`classify_general`].
    pub monotone_nondecreasing: bool,
    label: String,
}

impl Nonlinearity {
    pub fn new(
        label: impl Into<String>,
        monotone_nondecreasing: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Nonlinearity {
            evaluator: Arc::new(f),
            monotone_nondecreasing,
            label: label.into(),
        }
    }

    /// `x ↦ c·x^γ`.
    pub fn power(coefficient: f64, gamma: f64) -> Self {
        Self::new(format!("{coefficient}*x^{gamma}"), true, move |x| {
            coefficient * frac_pow(x, gamma)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates `f(x)`, rejecting negative or non-finite output.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let value = (self.evaluator)(x);
        if value.is_finite() && value >= 0.0 {
            Ok(value)
        } else {
            Err(Error::NonlinearityRange { x, value })
        }
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("label", &self.label)
            .field("monotone_nondecreasing", &self.monotone_nondecreasing)
            .finish()
    }
}

/// `T_γ(v)` for a single exponent.
pub fn apply_power(v: &RadialProfile, gamma: f64, dim: u32) -> Result<RadialProfile> {
    Ok(outer_tail(&inner_cumulative(v, gamma, dim)?))
}

pub fn apply_t1(v: &RadialProfile, spec: &ProblemSpec) -> Result<RadialProfile> {
    apply_power(v, spec.alpha, spec.dim)
}

pub fn apply_t2(v: &RadialProfile, spec: &ProblemSpec) -> Result<RadialProfile> {
    apply_power(v, spec.beta, spec.dim)
}

/// `T = T₁ ∘ T₂`.
pub fn apply_t(v: &RadialProfile, spec: &ProblemSpec) -> Result<RadialProfile> {
    apply_t1(&apply_t2(v, spec)?, spec)
}

/// `T̃₁(v)`: `T₁` with right-hand side `λ v^α`, equal to `λ^{1/N} T₁(v)`.
pub fn apply_t1_scaled(v: &RadialProfile, spec: &ProblemSpec) -> Result<RadialProfile> {
    let c = spec.lambda.powf(1.0 / spec.dim as f64);
    Ok(apply_t1(v, spec)?.scaled(c))
}

/// `T̃₂(v)`: `T₂` with right-hand side `μ v^β`, equal to `μ^{1/N} T₂(v)`.
pub fn apply_t2_scaled(v: &RadialProfile, spec: &ProblemSpec) -> Result<RadialProfile> {
    let c = spec.mu.powf(1.0 / spec.dim as f64);
    Ok(apply_t2(v, spec)?.scaled(c))
}

/// `T̃ = T̃₁ ∘ T̃₂`.
pub fn apply_t_scaled(v: &RadialProfile, spec: &ProblemSpec) -> Result<RadialProfile> {
    apply_t1_scaled(&apply_t2_scaled(v, spec)?, spec)
}

/// `t ↦ ∫_t^1 ( ∫_0^s N τ^{N-1} f(v(τ)) dτ )^{1/N} ds`.
pub fn apply_general(v: &RadialProfile, f: &Nonlinearity, dim: u32) -> Result<RadialProfile> {
    let samples = v
        .clamped_nonnegative()?
        .into_iter()
        .map(|x| f.eval(x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(outer_tail(&inner_from_samples(v.grid(), &samples, dim)))
}

/// Which existence condition for the general system the probes suggest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralCase {
    /// `q → 0` at `0⁺` and `q → ∞` at `∞`.
    Case1,
    /// `q → ∞` at `0⁺` and `q → 0` at `∞`.
    Case2,
    Indeterminate,
}

/// Outcome of [`classify_general`], with the numbers that led to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub case: GeneralCase,
    pub q_lo: f64,
    pub q_hi: f64,
    pub probe_lo: f64,
    pub probe_hi: f64,
    pub small_threshold: f64,
    pub large_threshold: f64,
    /// Random probe pairs `x < y` with `f(x) > f(y)` or `g(x) > g(y)`.
    pub monotonicity_violations: usize,
    pub monotonicity_probes: usize,
}

pub const CLASSIFY_SMALL: f64 = 0.1;
pub const CLASSIFY_LARGE: f64 = 10.0;
const MONOTONE_PROBES: usize = 64;

/// `q(x) = f(g(x)^{1/N})^{1/N} / x`.
fn composite_ratio(f: &Nonlinearity, g: &Nonlinearity, dim: u32, x: f64) -> Result<f64> {
    let root = 1.0 / dim as f64;
    let inner = frac_pow(g.eval(x)?, root);
    Ok(frac_pow(f.eval(inner)?, root) / x)
}

/// Finite-probe classifier for the general system's existence conditions.
///
/// The limits at `0⁺` and `∞` are replaced by values at `probe_lo` and
/// `probe_hi`; `q < 0.1` counts as small and `q > 10` as large.
pub fn classify_general(
    f: &Nonlinearity,
    g: &Nonlinearity,
    dim: u32,
    probe_lo: f64,
    probe_hi: f64,
) -> Result<Classification> {
    if !(probe_lo > 0.0 && probe_lo < probe_hi && probe_hi.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "probes must satisfy 0 < lo < hi, got {probe_lo} and {probe_hi}"
        )));
    }
    let q_lo = composite_ratio(f, g, dim, probe_lo)?;
    let q_hi = composite_ratio(f, g, dim, probe_hi)?;
    let case = if q_lo < CLASSIFY_SMALL && q_hi > CLASSIFY_LARGE {
        GeneralCase::Case1
    } else if q_lo > CLASSIFY_LARGE && q_hi < CLASSIFY_SMALL {
        GeneralCase::Case2
    } else {
        GeneralCase::Indeterminate
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x6d61_636f_7570_6c65);
    let (ln_lo, ln_hi) = (probe_lo.ln(), probe_hi.ln());
    let mut violations = 0;
    for _ in 0..MONOTONE_PROBES {
        let a = rng.gen_range(ln_lo..ln_hi).exp();
        let b = rng.gen_range(ln_lo..ln_hi).exp();
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        if f.eval(x)? > f.eval(y)? || g.eval(x)? > g.eval(y)? {
            violations += 1;
        }
    }

    Ok(Classification {
        case,
        q_lo,
        q_hi,
        probe_lo,
        probe_hi,
        small_threshold: CLASSIFY_SMALL,
        large_threshold: CLASSIFY_LARGE,
        monotonicity_violations: violations,
        monotonicity_probes: MONOTONE_PROBES,
    })
}
