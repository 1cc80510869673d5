//! Radial grids, sampled profiles and the cumulative quadratures that the
//! cone operators are assembled from.
//!
//! A [`RadialProfile`] is a function on `[0, 1]` sampled at the nodes of a
//! uniform [`Grid`]. Profiles share their grid through an `Arc`, so cloning a
//! profile copies the values only.
//!
//! Both cumulative integrals use trapezoid-type rules. The inner integral
//! `∫₀ˢ N τ^{N-1} v(τ)^γ dτ` treats the kernel `N τ^{N-1}` exactly on every
//! cell and interpolates `v^γ` linearly (product trapezoid), so constant
//! inputs are integrated exactly for every dimension.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

/// Relative tolerance below which small negative samples are clamped to zero.
pub const CLAMP_REL_TOL: f64 = 1e-12;

/// Floor applied before taking fractional powers of tiny positive values.
const POW_FLOOR: f64 = 1e-300;

/// Uniform discretization of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    spacing: f64,
}

impl Grid {
    pub fn uniform(n_nodes: usize) -> Result<Arc<Grid>> {
        if n_nodes < MIN_NODES {
            return Err(Error::GridTooCoarse {
                got: n_nodes,
                min: MIN_NODES,
            });
        }
        let last = (n_nodes - 1) as f64;
        let nodes = (0..n_nodes).map(|i| i as f64 / last).collect();
        Ok(Arc::new(Grid {
            nodes,
            spacing: 1.0 / last,
        }))
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Exact cell weights `(w_left, w_right)` of `∫ N τ^{N-1} ℓ(τ) dτ` where
    /// `ℓ` is the linear interpolant of the two endpoint samples.
    ///
    /// The binomial expansion around the left endpoint avoids the
    /// cancellation of the naive moment formula on cells far from zero.
    pub(crate) fn kernel_weights(&self, dim: u32) -> Vec<(f64, f64)> {
        let h = self.spacing;
        let m = dim as usize - 1;
        let binom = binomial_row(m);
        self.nodes[..self.nodes.len() - 1]
            .iter()
            .map(|&a| {
                let mut a_pows = vec![1.0f64; m + 1];
                for j in 1..=m {
                    a_pows[j] = a_pows[j - 1] * a;
                }
                let mut wl = 0.0;
                let mut wr = 0.0;
                let mut h_pow = 1.0;
                for (k, &c) in binom.iter().enumerate() {
                    let term = c * a_pows[m - k] * h_pow;
                    let kf = k as f64;
                    wr += term / (kf + 2.0);
                    wl += term * (1.0 / (kf + 1.0) - 1.0 / (kf + 2.0));
                    h_pow *= h;
                }
                let scale = h * dim as f64;
                (wl * scale, wr * scale)
            })
            .collect()
    }
}

fn binomial_row(m: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; m + 1];
    for k in 1..m {
        row[k] = row[k - 1] * (m - k + 1) as f64 / k as f64;
    }
    row
}

/// A function on `[0, 1]` sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected: grid.n_nodes(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(RadialProfile { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n_nodes();
        RadialProfile {
            grid,
            values: vec![0.0; n],
        }
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        RadialProfile { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }

    pub fn scaled(&self, c: f64) -> RadialProfile {
        self.map(|v| c * v)
    }

    pub fn negated(&self) -> RadialProfile {
        self.map(|v| -v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialProfile {
        RadialProfile::from_parts_unchecked(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Node-wise `self - other`.
    pub fn sub(&self, other: &RadialProfile) -> Result<RadialProfile> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &RadialProfile,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<RadialProfile> {
        self.check_same_grid(other)?;
        Ok(RadialProfile::from_parts_unchecked(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `sup |self - other|`.
    pub fn distance(&self, other: &RadialProfile) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs())))
    }

    pub fn check_same_grid(&self, other: &RadialProfile) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Values with small negatives clamped to zero; larger negatives are an error.
    pub(crate) fn clamped_nonnegative(&self) -> Result<Vec<f64>> {
        let tol = CLAMP_REL_TOL * self.sup_norm();
        self.values
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value >= 0.0 {
                    Ok(value)
                } else if value >= -tol {
                    Ok(0.0)
                } else {
                    Err(Error::NegativeInput { index, value })
                }
            })
            .collect()
    }
}

/// `max |v(t_i)|` over the nodes.
pub fn sup_norm(v: &RadialProfile) -> f64 {
    v.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `x^γ` for `x ≥ 0`, with exact zero preserved and tiny values floored.
#[inline]
pub fn frac_pow(x: f64, gamma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.max(POW_FLOOR).powf(gamma)
    }
}

/// Running compensated (Neumaier) sum, returning every partial sum.
pub(crate) fn cumulative_sum(terms: impl Iterator<Item = f64>, out: &mut Vec<f64>) {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    out.push(0.0);
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
}

/// Cumulative kernel integral `s ↦ ∫₀ˢ N τ^{N-1} g(τ) dτ` of node samples `g`.
pub(crate) fn kernel_cumulative(grid: &Grid, g: &[f64], dim: u32) -> Vec<f64> {
    let weights = grid.kernel_weights(dim);
    let mut out = Vec::with_capacity(g.len());
    cumulative_sum(
        weights
            .iter()
            .zip(g.windows(2))
            .map(|(&(wl, wr), pair)| wl * pair[0] + wr * pair[1]),
        &mut out,
    );
    out
}

/// `s ↦ (∫₀ˢ N τ^{N-1} v(τ)^γ dτ)^{1/N}`.
pub fn inner_cumulative(v: &RadialProfile, gamma: f64, dim: u32) -> Result<RadialProfile> {
    let powered: Vec<f64> = v
        .clamped_nonnegative()?
        .into_iter()
        .map(|x| frac_pow(x, gamma))
        .collect();
    Ok(inner_from_samples(v.grid(), &powered, dim))
}

/// Inner cumulative integral of already-evaluated integrand samples `g ≥ 0`.
pub(crate) fn inner_from_samples(grid: &Arc<Grid>, g: &[f64], dim: u32) -> RadialProfile {
    let root = 1.0 / dim as f64;
    let values = kernel_cumulative(grid, g, dim)
        .into_iter()
        .map(|i| frac_pow(i, root))
        .collect();
    RadialProfile::from_parts_unchecked(grid.clone(), values)
}

/// `t ↦ ∫_t^1 w(s) ds` by the composite trapezoid rule swept from the right.
pub fn outer_tail(w: &RadialProfile) -> RadialProfile {
    let h = w.grid().spacing();
    let vals = w.values();
    let mut rev = Vec::with_capacity(vals.len());
    cumulative_sum(
        vals.windows(2)
            .rev()
            .map(|pair| 0.5 * h * (pair[0] + pair[1])),
        &mut rev,
    );
    rev.reverse();
    RadialProfile::from_parts_unchecked(w.grid().clone(), rev)
}

/// Cone-membership diagnostics for a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub nonnegative: bool,
    pub concave_within_tol: bool,
    /// `min_{1/4 ≤ t ≤ 3/4} v(t) / ‖v‖`, or 1 for the zero profile.
    pub harnack_ratio: f64,
    pub tolerance_used: f64,
}

impl ConeReport {
    /// Nonnegative with Harnack ratio at least `1/4` up to tolerance.
    pub fn passes(&self) -> bool {
        self.nonnegative && self.harnack_ratio >= 0.25 - self.tolerance_used
    }
}

/// Default concavity/membership tolerance: `10 h²`.
pub fn default_cone_tolerance(grid: &Grid) -> f64 {
    10.0 * grid.spacing() * grid.spacing()
}

/// Checks nonnegativity, discrete concavity and the quarter-interval Harnack
/// bound. Tolerances are relative to the sup norm; `None` selects `10 h²`.
pub fn cone_report(v: &RadialProfile, tol: Option<f64>) -> ConeReport {
    let tol = tol.unwrap_or_else(|| default_cone_tolerance(v.grid()));
    let norm = v.sup_norm();
    let vals = v.values();
    let nonnegative = vals.iter().all(|&x| x >= -tol * norm);
    let concave_within_tol = vals
        .windows(3)
        .all(|w| w[0] - 2.0 * w[1] + w[2] <= tol * norm);
    let harnack_ratio = if norm > 0.0 {
        let min_mid = v
            .grid()
            .nodes()
            .iter()
            .zip(vals)
            .filter(|(&t, _)| (0.25 - 1e-14..=0.75 + 1e-14).contains(&t))
            .fold(f64::INFINITY, |m, (_, &x)| m.min(x));
        (min_mid / norm).clamp(0.0, 1.0)
    } else {
        1.0
    };
    ConeReport {
        nonnegative,
        concave_within_tol,
        harnack_ratio,
        tolerance_used: tol,
    }
}
