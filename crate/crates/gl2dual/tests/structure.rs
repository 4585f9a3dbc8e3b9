//! Index ranges, degenerate dimensions and contour shapes.

use gl2dual::contour::{barnes_contour, loops_b, loops_j, Family, LoopOptions};
use gl2dual::glrep::WeightSubspace;
use gl2dual::integrals::{i_ab, j_ab, j_vector};
use gl2dual::params::{admissible_pairs, dual_params};
use gl2dual::{make_params, Error, QuadConfig, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn point(m2: i64, l2: i64) -> gl2dual::Params {
    make_params(c(-5.3, 0.7), m2, l2, 1.37, c(-30.0, 0.2), c(-0.8, 1.3)).unwrap()
}

#[test]
fn index_bound_is_the_smaller_dimension() {
    let cfg = QuadConfig::with_rel_tol(1e-6);
    for (m2, l2) in [(1, 3), (3, 1)] {
        let p = point(m2, l2);
        assert_eq!(p.rank(), 1);
        assert_eq!(admissible_pairs(&p).len(), 4);
        assert!(matches!(i_ab(&p, 2, 0, &cfg), Err(Error::InvalidParams(_))));
        assert!(matches!(i_ab(&p, 0, 2, &cfg), Err(Error::InvalidParams(_))));
        let pd = dual_params(&p);
        assert_eq!(pd.rank(), 1);
        assert!(matches!(j_ab(&pd, 2, 1, &cfg), Err(Error::InvalidParams(_))));
    }
}

#[test]
fn zero_dimensional_integrals_are_one() {
    let cfg = QuadConfig::with_rel_tol(1e-8);
    let p = point(2, 0);
    assert_eq!(i_ab(&p, 0, 0, &cfg).unwrap().value, c(1.0, 0.0));
    let q = point(0, 2);
    let j = j_vector(&dual_params(&q), 0, &cfg).unwrap();
    assert_eq!(j.values[0], c(1.0, 0.0));
}

#[test]
fn dual_tuple_swaps_roles() {
    let p = point(2, 1);
    let pd = dual_params(&p);
    assert_eq!((pd.m1(), pd.m2(), pd.l1(), pd.l2()), (p.l1(), p.l2(), p.m1(), p.m2()));
    assert_eq!(pd.z(), p.mu().exp());
    assert_eq!(pd.mu(), p.z());
    assert_eq!(p.m1() + C64::from(p.m2() as f64), p.l1() + C64::from(p.l2() as f64));
}

#[test]
fn barnes_contour_has_one_path_per_variable() {
    let p = point(2, 2);
    let (contour, _) = barnes_contour(&p, 1, 1e-8).unwrap();
    assert_eq!(contour.family, Family::Barnes);
    assert_eq!(contour.dim(), 2);
}

#[test]
fn loops_split_between_the_two_branch_points() {
    let pd = dual_params(&point(3, 2));
    for b in 0..=2 {
        let contour = loops_j(&pd, b, &LoopOptions::default()).unwrap();
        assert_eq!(contour.dim(), 3);
        let around_z = contour.vars.iter().filter(|v| v.center == Some(pd.z())).count();
        assert_eq!(around_z, b);
        for v in &contour.vars {
            assert_eq!(v.legs.len(), 2);
        }
    }
    assert!(loops_j(&pd, 4, &LoopOptions::default()).is_err());
}

#[test]
fn hankel_loops_are_nested() {
    let contour = loops_b(3, 40.0).unwrap();
    let radii: Vec<f64> = contour.vars.iter().map(|v| v.radius).collect();
    assert!(radii.windows(2).all(|w| w[0] < w[1]));
    assert!(contour.anchors().iter().all(|a| a.re < 0.0 && a.im.abs() < 1e-15));
    assert!(loops_b(2, 0.5).is_err());
}

#[test]
fn weight_subspace_dimension() {
    for m2 in 0..5 {
        for l2 in 0..5 {
            let space = WeightSubspace::verma_finite(c(-0.3, 0.4), m2, l2);
            assert_eq!(space.dim(), m2.min(l2) + 1, "({m2},{l2})");
            for (k, d) in space.basis().iter().enumerate() {
                assert_eq!(d[1], k);
            }
        }
    }
}
