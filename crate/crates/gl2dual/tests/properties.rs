//! Randomized invariants.

use std::f64::consts::PI;

use gl2dual::duality::check_s_equation;
use gl2dual::glrep::{commutator_residual, Gen, Module, WeightSubspace};
use gl2dual::integrand::{phi_q, w_rat, w_trig, xi_pp};
use gl2dual::params::dual_params;
use gl2dual::special::{q_factorial, ArgRange};
use gl2dual::{make_params, C64};
use proptest::prelude::*;

fn complex(r: std::ops::Range<f64>) -> impl Strategy<Value = C64> {
    (r.clone(), r).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trigonometric_factorial_is_a_sine_product(n in 0usize..8, kappa in 1.05f64..6.0) {
        let direct: f64 = (1..=n).map(|j| (PI * j as f64 / kappa).sin() / (PI / kappa).sin()).product();
        let ours = q_factorial(n, kappa);
        prop_assert!((ours - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn integrand_factorizes(
        l in 1usize..=3,
        m1 in complex(-2.0..2.0),
        z in complex(-2.0..2.0),
        mu_im in 0.3f64..5.9,
        kappa in 0.7f64..2.5,
        ts in prop::collection::vec(complex(-1.5..1.5), 3),
        a in 0usize..=3,
        b in 0usize..=3,
    ) {
        let (a, b) = (a.min(l), b.min(l));
        let p = make_params(m1, l as i64, l as i64, kappa, z, C64::new(-0.4, mu_im)).unwrap();
        let t = &ts[..l];
        let lhs = phi_q(t, &p).and_then(|f| Ok(f * w_rat(t, &p, a)? * w_trig(t, &p, b)?));
        let rhs = xi_pp(t, &p, a, b);
        if let (Ok(lhs), Ok(rhs)) = (lhs, rhs) {
            if lhs.is_finite() && lhs.norm() > 1e-200 && lhs.norm() < 1e200 {
                prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm(), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn gl2_relations_hold_on_tensor_products(
        m in complex(-3.0..3.0),
        fin in 0usize..4,
        level in 0usize..4,
    ) {
        let space = WeightSubspace::new(vec![Module::Verma(m), Module::Irreducible(fin), Module::Verma(-m)], level).unwrap();
        for x in Gen::ALL {
            for y in Gen::ALL {
                prop_assert!(commutator_residual(&space, None, x, y) < 1e-12);
                for site in 0..space.n() {
                    prop_assert!(commutator_residual(&space, Some(site), x, y) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn s_solves_its_difference_equation(
        m1 in complex(-3.0..3.0),
        m2 in 0usize..5,
        t in complex(-4.0..4.0),
        kappa in 0.5f64..3.0,
    ) {
        let p = make_params(m1, m2 as i64, 1, kappa, C64::new(-3.0, 0.1), C64::new(0.0, 1.0)).unwrap();
        if let Ok(r) = check_s_equation(&p, t) {
            prop_assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn dual_tuple_is_an_involution_up_to_the_log_branch(
        m1 in complex(-3.0..3.0),
        m2 in 0i64..4,
        l2 in 0i64..4,
        z in complex(-4.0..4.0),
        mu in (-2.0f64..2.0, 0.1f64..6.1).prop_map(|(a, b)| C64::new(a, b)),
    ) {
        let p = make_params(m1, m2, l2, 1.37, z, mu).unwrap();
        let pd = dual_params(&p);
        let back = dual_params(&pd);
        prop_assert_eq!((back.m1(), back.m2(), back.l1(), back.l2()), (p.m1(), p.m2(), p.l1(), p.l2()));
        prop_assert!((ArgRange::ZeroTwoPi.log(pd.z()) - mu).norm() < 1e-12);
        prop_assert!((back.mu() - pd.z()).norm() < 1e-12 * pd.z().norm());
        prop_assert!((back.z() - z.exp()).norm() <= 1e-12 * z.exp().norm());
    }
}
