mod common;

use std::f64::consts::PI;

use common::{nested_operator, rel, Shooting};
use ma_couple::operators::{apply_general, apply_t, apply_t2, Nonlinearity, ProblemSpec};
use ma_couple::{
    principal_constant, single_equation_eigen, solve_system, Grid, RadialProfile, SolveConfig,
};

#[test]
fn apply_t2_of_linear_profile_matches_nested_quadrature() {
    let grid = Grid::uniform(8193).unwrap();
    let v = RadialProfile::from_fn(grid.clone(), |t| 1.0 - t).unwrap();
    let spec = ProblemSpec::new(2, 1.0, 1.0).unwrap();
    let out = apply_t2(&v, &spec).unwrap();
    let scale = out.sup_norm();
    for i in (0..grid.n_nodes()).step_by(512) {
        let t = grid.nodes()[i];
        let oracle = nested_operator(&|s: f64| 1.0 - s, 2, t);
        let err = (out.values()[i] - oracle).abs() / scale;
        assert!(err <= 1e-8, "t={t} err={err:e}");
    }
}

#[test]
fn apply_t_of_one_matches_nested_quadrature() {
    let grid = Grid::uniform(2048).unwrap();
    let one = RadialProfile::from_fn(grid, |_| 1.0).unwrap();
    let spec = ProblemSpec::new(2, 2.0, 2.0).unwrap();
    let got = apply_t(&one, &spec).unwrap().values()[0];
    let t2_of_one = |s: f64| (1.0 - s * s) / 2.0;
    let oracle = nested_operator(&|s: f64| t2_of_one(s).powi(2), 2, 0.0);
    assert!(rel(got, oracle) <= 1e-6, "{got} vs {oracle}");
}

#[test]
fn apply_general_exponential_matches_closed_form() {
    let grid = Grid::uniform(2048).unwrap();
    let one = RadialProfile::from_fn(grid, |_| 1.0).unwrap();
    let f = Nonlinearity::new("exp(x)-1", true, f64::exp_m1);
    let got = apply_general(&one, &f, 2).unwrap().values()[0];
    let oracle = nested_operator(&|_| 1f64.exp_m1(), 2, 0.0);
    assert!((oracle - (1f64.exp_m1()).sqrt() / 2.0).abs() < 1e-12);
    assert!(rel(got, oracle) <= 1e-12, "{got} vs {oracle}");
}

#[test]
fn picard_matches_shooting_sublinear() {
    let cfg = SolveConfig::new(2048).unwrap();
    let spec = ProblemSpec::new(2, 1.0, 1.0).unwrap();
    let r = solve_system(&spec, &cfg).unwrap();
    assert!(r.is_converged());
    let shoot = Shooting {
        dim: 2,
        alpha: 1.0,
        beta: 1.0,
        steps_per_unit: 4000.0,
    };
    let (c1, c2) = shoot.center_values();
    let v1 = r.v1.unwrap().values()[0];
    let v2 = r.v2.unwrap().values()[0];
    assert!(rel(v1, c1) <= 1e-6, "{v1} vs {c1}");
    assert!(rel(v2, c2) <= 1e-6, "{v2} vs {c2}");
}

#[test]
fn rescaled_eigen_shape_matches_shooting_superlinear() {
    let cfg = SolveConfig::new(2048).unwrap();
    let spec = ProblemSpec::new(2, 1.0, 8.0).unwrap();
    let r = solve_system(&spec, &cfg).unwrap();
    assert!(r.is_converged());
    let shoot = Shooting {
        dim: 2,
        alpha: 1.0,
        beta: 8.0,
        steps_per_unit: 4000.0,
    };
    let (c1, _) = shoot.center_values();
    let v1 = r.v1.unwrap().values()[0];
    assert!(rel(v1, c1) <= 1e-5, "{v1} vs {c1}");
}

#[test]
fn one_dimensional_eigenvalue_is_pi_squared_over_four() {
    let cfg = SolveConfig::new(2048).unwrap();
    let lambda = single_equation_eigen(1, &cfg).unwrap();
    assert!(rel(lambda, PI * PI / 4.0) <= 1e-6, "{lambda}");
}

/// Richardson extrapolation from grids with 10× and 20× the 2048-node
/// resolution.
#[test]
fn threshold_constant_agrees_with_refined_extrapolation() {
    let c_at = |n: usize| {
        principal_constant(2, 2.0, &SolveConfig::new(n).unwrap())
            .unwrap()
            .c
    };
    let (fine, finer) = (c_at(20471), c_at(40941));
    let extrapolated = finer + (finer - fine) / 3.0;
    let c = c_at(2048);
    assert!(rel(c, extrapolated) <= 1e-6, "{c} vs {extrapolated}");
    assert!(c > 1.0);

    let l_at = |n: usize| single_equation_eigen(2, &SolveConfig::new(n).unwrap()).unwrap();
    let (fine, finer) = (l_at(20471), l_at(40941));
    let extrapolated = finer + (finer - fine) / 3.0;
    let lambda = l_at(2048);
    assert!(rel(lambda, extrapolated) <= 1e-6);
    assert!(lambda > 1.0);
}
