#![allow(dead_code)]

use std::sync::Arc;

use ma_couple::{Grid, RadialProfile};
use rand::Rng;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_t^1 (∫_0^s N τ^{N-1} g(τ) dτ)^{1/N} ds` by nested adaptive quadrature.
pub fn nested_operator<G: Fn(f64) -> f64>(g: &G, dim: u32, t: f64) -> f64 {
    let n = dim as f64;
    let inner = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let i = simpson(
            &|tau: f64| n * tau.powi(dim as i32 - 1) * g(tau),
            0.0,
            s,
            1e-15,
        );
        i.max(0.0).powf(1.0 / n)
    };
    simpson(&inner, t, 1.0, 1e-13)
}

/// Concave nonnegative basis functions on `[0, 1]`; positive combinations
/// lie in the cone.
pub fn cone_basis(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0 - t,
        1 => 1.0 - t * t,
        2 => (4.0 * (1.0 - t)).min(1.0),
        3 => (0.5 * std::f64::consts::PI * t).cos(),
        4 => 1.0,
        5 => t,
        6 => (2.0 * (1.0 - t)).min(1.0),
        _ => (1.0 - t).sqrt(),
    }
}

pub const BASIS_LEN: usize = 8;

pub fn cone_profile(grid: &Arc<Grid>, weights: &[f64], scale: f64) -> RadialProfile {
    RadialProfile::from_fn(grid.clone(), |t| {
        scale
            * weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * cone_basis(k, t))
                .sum::<f64>()
    })
    .unwrap()
}

pub fn random_cone_profile<R: Rng>(rng: &mut R, grid: &Arc<Grid>) -> RadialProfile {
    let mut weights: Vec<f64> = (0..BASIS_LEN).map(|_| rng.gen_range(0.0..1.0)).collect();
    weights[rng.gen_range(0..BASIS_LEN)] += 0.1;
    let scale = 10f64.powf(rng.gen_range(-1.5..1.5));
    cone_profile(grid, &weights, scale)
}

/// Classical RK4 shooting for `((-v_i')^N)' = N t^{N-1} rhs_i`.
///
/// State `(v₁, v₂, φ₁, φ₂)` with `v_i' = -φ_i^{1/N}`, `φ₁' = N t^{N-1} v₂^α`,
/// `φ₂' = N t^{N-1} v₁^β`, started from `v₁(0) = 1`, `v₂(0) = b`. The
/// ratio `b` is bisected until both profiles vanish at the same radius
/// `t*`, and the pair is rescaled onto the unit interval.
pub struct Shooting {
    pub dim: u32,
    pub alpha: f64,
    pub beta: f64,
    pub steps_per_unit: f64,
}

impl Shooting {
    fn rhs(&self, t: f64, y: [f64; 4]) -> [f64; 4] {
        let n = self.dim as f64;
        let w = n * t.powi(self.dim as i32 - 1);
        let pos = |x: f64| if x > 0.0 { x } else { 0.0 };
        [
            -pos(y[2]).powf(1.0 / n),
            -pos(y[3]).powf(1.0 / n),
            w * pos(y[1]).powf(self.alpha),
            w * pos(y[0]).powf(self.beta),
        ]
    }

    fn rk4(&self, t: f64, y: [f64; 4], h: f64) -> [f64; 4] {
        let add = |a: [f64; 4], b: [f64; 4], c: f64| {
            [
                a[0] + c * b[0],
                a[1] + c * b[1],
                a[2] + c * b[2],
                a[3] + c * b[3],
            ]
        };
        let k1 = self.rhs(t, y);
        let k2 = self.rhs(t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = self.rhs(t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = self.rhs(t + h, add(y, k3, h));
        let mut out = y;
        for i in 0..4 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    /// First zero crossings of `v₁` and `v₂`, located by cubic Hermite
    /// interpolation inside the step.
    pub fn crossings(&self, b: f64) -> (f64, f64) {
        let h = 1.0 / self.steps_per_unit;
        let mut t = 0.0;
        let mut y = [1.0, b, 0.0, 0.0];
        let mut hits = [f64::NAN; 2];
        while hits.iter().any(|x| x.is_nan()) {
            let next = self.rk4(t, y, h);
            let d0 = self.rhs(t, y);
            let d1 = self.rhs(t + h, next);
            for i in 0..2 {
                if hits[i].is_nan() && y[i] > 0.0 && next[i] <= 0.0 {
                    hits[i] = t + h * hermite_root(y[i], next[i], h * d0[i], h * d1[i]);
                }
            }
            y = next;
            t += h;
            assert!(t < 1e4, "shooting did not reach a zero");
        }
        (hits[0], hits[1])
    }

    /// `(v₁(0), v₂(0))` of the unit-ball solution.
    pub fn center_values(&self) -> (f64, f64) {
        let mismatch = |ln_b: f64| {
            let (t1, t2) = self.crossings(ln_b.exp());
            t1 - t2
        };
        let (mut lo, mut hi) = (-2.0f64, 2.0f64);
        while mismatch(lo) < 0.0 {
            lo -= 2.0;
        }
        while mismatch(hi) > 0.0 {
            hi += 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mismatch(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        let ln_b = 0.5 * (lo + hi);
        let (t1, t2) = self.crossings(ln_b.exp());
        let l = (0.5 * (t1 + t2)).ln();
        let n = self.dim as f64;
        let denom = n * n - self.alpha * self.beta;
        let a1 = -2.0 * n * l * (n + self.alpha) / denom;
        let a2 = -2.0 * n * l * (n + self.beta) / denom;
        (a1.exp(), (a2 + ln_b).exp())
    }
}

/// Root in `[0, 1]` of the cubic Hermite interpolant with end values
/// `p0, p1` and scaled end slopes `m0, m1`.
fn hermite_root(p0: f64, p1: f64, m0: f64, m1: f64) -> f64 {
    let eval = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
