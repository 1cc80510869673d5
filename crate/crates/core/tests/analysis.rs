mod common;

use common::{nested_operator, random_cone_profile, rel};
use ma_couple::analysis::{
    critical_radius, critical_radius_from_constant, ode_residual, pde_residual, residual_gate,
    threshold_bracket, verify_bounds,
};
use ma_couple::operators::ProblemSpec;
use ma_couple::{cone_report, principal_constant, solve_system, Grid, RadialProfile, SolveConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn upper_bound_for_unit_profile() {
    let grid = Grid::uniform(2048).unwrap();
    let one = RadialProfile::from_fn(grid, |_| 1.0).unwrap();
    let spec = ProblemSpec::new(2, 2.0, 2.0).unwrap();
    let b = verify_bounds(&one, &spec).unwrap();
    let oracle = nested_operator(&|s: f64| ((1.0 - s * s) / 2.0).powi(2), 2, 0.0);
    assert!(rel(b.norm_tv, oracle) < 1e-6);
    assert!((b.upper_margin - (1.0 - oracle)).abs() < 1e-6);
    assert!(b.upper_margin >= 0.0);
    assert!(b.passes());
}

#[test]
fn bounds_hold_on_frozen_random_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for dim in [2u32, 3] {
        let grid = Grid::uniform(257).unwrap();
        for (a, b) in [(1.0, 1.0), (2.0, 2.0), (1.0, 8.0)] {
            let spec = ProblemSpec::new(dim, a, b).unwrap();
            for _ in 0..100 {
                let v = random_cone_profile(&mut rng, &grid);
                assert!(cone_report(&v, None).passes());
                let check = verify_bounds(&v, &spec).unwrap();
                assert!(check.upper_margin >= -1e-9, "{check:?}");
                assert!(check.lower().unwrap() >= -1e-9, "{check:?}");
            }
        }
    }
}

#[test]
fn residuals_of_converged_pair() {
    let cfg = SolveConfig::new(2048).unwrap();
    for (a, b) in [(1.0, 1.0), (0.5, 0.5), (8.0, 8.0), (1.0, 8.0)] {
        let spec = ProblemSpec::new(2, a, b).unwrap();
        let r = solve_system(&spec, &cfg).unwrap();
        let (v1, v2) = (r.v1.unwrap(), r.v2.unwrap());
        let rep = ode_residual(&v1, &v2, &spec).unwrap();
        assert!(rep.ode_residual_sup <= 1e-5);
        assert!(rep.ode_residual_sup <= residual_gate(2048));
        assert_eq!(rep.boundary_defect[0], 0.0);
        assert!(rep.pde_residual_sup <= residual_gate(2048), "{rep:?}");
        if a * b <= 8.0 {
            assert!(rep.pde_residual_sup <= 1e-6, "{rep:?}");
        }
        let ratio = rep.pde_residual_sup / rep.ode_residual_sup;
        assert!((0.01..=100.0).contains(&ratio), "{rep:?}");

        let rhs = v2.map(|y| y.powf(a));
        assert!(pde_residual(&v1, &rhs, 2, 0.1).unwrap() <= rep.pde_residual_sup);
    }
}

#[test]
fn single_node_perturbation_is_detected() {
    let cfg = SolveConfig::new(2048).unwrap();
    let spec = ProblemSpec::new(2, 1.0, 1.0).unwrap();
    let r = solve_system(&spec, &cfg).unwrap();
    let v2 = r.v2.unwrap();
    let mut vals = r.v1.unwrap().into_values();
    vals[700] += 0.01;
    let bumped = RadialProfile::new(v2.grid().clone(), vals).unwrap();
    let rep = ode_residual(&bumped, &v2, &spec).unwrap();
    assert!(rep.ode_residual_sup > 1e-2);
}

#[test]
fn threshold_constants_lie_in_bracket() {
    let cfg = SolveConfig::new(1024).unwrap();
    for dim in [2u32, 3] {
        let n = dim as f64;
        for alpha in [1.0, n, n * n, n * n / 2.0] {
            let e = principal_constant(dim, alpha, &cfg).unwrap();
            let b = threshold_bracket(dim, alpha);
            assert_eq!(b.lower, 1.0);
            assert!(
                b.contains(e.c) && e.c > 1.0,
                "N={dim} alpha={alpha} C={}",
                e.c
            );
        }
    }
}

#[test]
fn critical_radius_properties() {
    let cfg = SolveConfig::new(2048).unwrap();
    for alpha in [1.0, 2.0, 4.0] {
        let r = critical_radius(2, alpha, &cfg).unwrap();
        assert!(r > 1.0);
        let c = principal_constant(2, alpha, &cfg).unwrap().c;
        assert!(rel(r.powf(2.0 * (2.0 + alpha)), c) <= 1e-12);
        assert_eq!(critical_radius_from_constant(c, 2, alpha), r);
    }
    let coarse = critical_radius(2, 2.0, &SolveConfig::new(1024).unwrap()).unwrap();
    let fine = critical_radius(2, 2.0, &cfg).unwrap();
    assert!(rel(coarse, fine) < 1e-4);
}
