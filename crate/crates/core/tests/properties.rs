mod common;

use common::{cone_profile, BASIS_LEN};
use ma_couple::analysis::{reconstruct_ball, verify_bounds};
use ma_couple::operators::{apply_t, apply_t1, apply_t2, apply_t_scaled, ProblemSpec};
use ma_couple::{cone_report, inner_cumulative, outer_tail, Grid, RadialProfile};
use proptest::prelude::*;

const NODES: usize = 129;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, BASIS_LEN).prop_map(|mut w| {
        w[1] += 0.05;
        w
    })
}

fn exponents() -> impl Strategy<Value = (u32, f64, f64)> {
    (2u32..=4, 0.25f64..6.0, 0.25f64..6.0)
}

fn close(a: &RadialProfile, b: &RadialProfile, tol: f64) -> bool {
    let scale = a.sup_norm().max(b.sup_norm());
    a.distance(b).unwrap() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_is_nondecreasing_from_zero(
        vals in prop::collection::vec(0.0f64..10.0, NODES),
        gamma in 0.1f64..8.0,
        dim in 1u32..=5,
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = RadialProfile::new(g, vals).unwrap();
        let w = inner_cumulative(&v, gamma, dim).unwrap();
        prop_assert_eq!(w.values()[0], 0.0);
        prop_assert!(w.values().windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn outer_is_nonincreasing_to_zero(vals in prop::collection::vec(0.0f64..10.0, NODES)) {
        let g = Grid::uniform(NODES).unwrap();
        let w = outer_tail(&RadialProfile::new(g, vals).unwrap());
        prop_assert_eq!(*w.values().last().unwrap(), 0.0);
        prop_assert!(w.values().windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn inner_scales_by_power(w in weights(), gamma in 0.1f64..8.0, dim in 2u32..=5) {
        let g = Grid::uniform(NODES).unwrap();
        let v = cone_profile(&g, &w, 1.0);
        let base = inner_cumulative(&v, gamma, dim).unwrap();
        for c in [2.0, 10.0, 0.5] {
            let scaled = inner_cumulative(&v.scaled(c), gamma, dim).unwrap();
            let expect = base.scaled(c.powf(gamma / dim as f64));
            prop_assert!(close(&scaled, &expect, 1e-12));
        }
    }

    #[test]
    fn operators_are_monotone(
        w in weights(),
        bump in prop::collection::vec(0.0f64..0.5, NODES),
        (dim, alpha, beta) in exponents(),
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = cone_profile(&g, &w, 1.0);
        let larger = v.zip_with(&RadialProfile::new(g, bump).unwrap(), |a, b| a + b).unwrap();
        let spec = ProblemSpec::new(dim, alpha, beta).unwrap();
        for op in [apply_t1, apply_t2, apply_t] {
            let lo = op(&v, &spec).unwrap();
            let hi = op(&larger, &spec).unwrap();
            prop_assert!(lo.values().iter().zip(hi.values()).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn operators_are_homogeneous(
        w in weights(),
        scale in 0.1f64..10.0,
        (dim, alpha, beta) in exponents(),
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = cone_profile(&g, &w, scale);
        let spec = ProblemSpec::new(dim, alpha, beta).unwrap();
        let n = dim as f64;
        for c in [0.5, 2.0, 10.0] {
            let cv = v.scaled(c);
            let pairs = [
                (apply_t1(&cv, &spec).unwrap(), apply_t1(&v, &spec).unwrap(), alpha / n),
                (apply_t2(&cv, &spec).unwrap(), apply_t2(&v, &spec).unwrap(), beta / n),
                (apply_t(&cv, &spec).unwrap(), apply_t(&v, &spec).unwrap(), spec.degree()),
            ];
            for (lhs, rhs, p) in pairs {
                prop_assert!(close(&lhs, &rhs.scaled(c.powf(p)), 1e-11));
            }
        }
    }

    #[test]
    fn image_of_nonnegative_input_is_in_cone(
        vals in prop::collection::vec(0.0f64..5.0, NODES),
        (dim, alpha, beta) in exponents(),
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = RadialProfile::new(g, vals).unwrap();
        let spec = ProblemSpec::new(dim, alpha, beta).unwrap();
        let tv = apply_t(&v, &spec).unwrap();
        let rep = cone_report(&tv, None);
        prop_assert!(rep.passes());
        prop_assert!(rep.concave_within_tol);
        prop_assert_eq!(*tv.values().last().unwrap(), 0.0);
    }

    #[test]
    fn norm_bounds_hold_in_cone(
        w in weights(),
        scale in 0.05f64..20.0,
        (dim, alpha, beta) in exponents(),
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = cone_profile(&g, &w, scale);
        let spec = ProblemSpec::new(dim, alpha, beta).unwrap();
        let b = verify_bounds(&v, &spec).unwrap();
        prop_assert!(b.upper_ok(), "upper {:?}", b);
        prop_assert!(b.lower_ok(), "lower {:?}", b);
    }

    #[test]
    fn scaled_operator_factorizes(
        w in weights(),
        (dim, alpha, beta) in exponents(),
        lambda in 0.01f64..100.0,
        mu in 0.01f64..100.0,
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = cone_profile(&g, &w, 1.0);
        let spec = ProblemSpec::scaled(dim, alpha, beta, lambda, mu).unwrap();
        let lhs = apply_t_scaled(&v, &spec).unwrap();
        let rhs = apply_t(&v, &spec).unwrap().scaled(spec.scale_factor());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn reconstruction_is_radially_symmetric(
        w in weights(),
        coords in prop::collection::vec(-0.57f64..0.57, 3),
        flips in prop::collection::vec(any::<bool>(), 3),
        rot in 0usize..3,
    ) {
        let g = Grid::uniform(NODES).unwrap();
        let v = cone_profile(&g, &w, 1.0);
        let mut q: Vec<f64> = coords.iter().zip(&flips).map(|(x, f)| if *f { -x } else { *x }).collect();
        q.rotate_left(rot);
        let mut rev = coords.clone();
        rev.reverse();
        let u = reconstruct_ball(&v, 3, &[coords.clone(), q, rev]).unwrap();
        prop_assert_eq!(u[0], u[1]);
        prop_assert_eq!(u[0], u[2]);
    }
}

#[test]
fn reconstruction_center_and_boundary() {
    let g = Grid::uniform(257).unwrap();
    let v = cone_profile(&g, &[0.3, 1.0, 0.2, 0.5, 0.0, 0.0, 0.1, 0.0], 2.0);
    let s = 1.0 / 3f64.sqrt();
    let u = reconstruct_ball(&v, 3, &[vec![0.0; 3], vec![s, s, s], vec![0.0, -1.0, 0.0]]).unwrap();
    assert_eq!(u[0], -v.values()[0]);
    assert!(u[1].abs() <= 1e-10);
    assert!(u[2].abs() <= 1e-10);
}
