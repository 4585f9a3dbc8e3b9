//! gl2 representation calculus on finite weight subspaces of tensor products
//! of highest weight modules, the rational R-matrix, the KZ, qKZ and
//! dynamical operators, and the operator-level checks built on them.
//!
//! A weight subspace of `V_1 (x) ... (x) V_n` is spanned by the products
//! `E21^{d_1} v_1 / d_1! (x) ... (x) E21^{d_n} v_n / d_n!` with a fixed total
//! `L = sum d_i`, the *level*. Every operator is a dense complex matrix in that
//! basis; generators that change the level map between neighbouring levels.

mod operators;
mod rmatrix;
mod solutions;
pub mod sweep;

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use operators::{
    b_series, build_operator, check_commutation, check_intertwining, g_duality, phi_iso, BSeries, Commutation,
    Intertwining, OperatorKind, ShiftPart, ShiftedOperator, Slot,
};
pub use rmatrix::{build_r, RMatrix};
pub use solutions::{check_solution, SolutionCheck, SolutionSide};

pub type Mat = DMatrix<C64>;

/// A highest weight gl2-module with highest weight `(m, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Module {
    /// Verma module `M_m`.
    Verma(C64),
    /// Irreducible `L_m`, of dimension `m + 1`.
    Irreducible(usize),
}

impl Module {
    pub fn highest(&self) -> C64 {
        match *self {
            Module::Verma(m) => m,
            Module::Irreducible(m) => C64::from(m as f64),
        }
    }

    /// Largest admissible `d` in `E21^d v`, if finite.
    pub fn cap(&self) -> Option<usize> {
        match *self {
            Module::Verma(_) => None,
            Module::Irreducible(m) => Some(m),
        }
    }

    fn admits(&self, d: usize) -> bool {
        self.cap().is_none_or(|c| d <= c)
    }

    /// `g e_d = coeff e_{d'}` in the normalized basis `e_d = E21^d v / d!`.
    fn act(&self, g: Gen, d: usize) -> Option<(usize, C64)> {
        let m = self.highest();
        let df = d as f64;
        match g {
            Gen::E11 => Some((d, m - df)),
            Gen::E22 => Some((d, C64::from(df))),
            Gen::E21 => self.admits(d + 1).then(|| (d + 1, C64::from(df + 1.0))),
            Gen::E12 => (d > 0).then(|| (d - 1, m - df + 1.0)),
        }
    }
}

/// Standard generators `E_ij` of gl2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Gen {
    E11,
    E12,
    E21,
    E22,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::E11, Gen::E12, Gen::E21, Gen::E22];

    pub fn from_indices(i: usize, j: usize) -> Gen {
        match (i, j) {
            (1, 1) => Gen::E11,
            (1, 2) => Gen::E12,
            (2, 1) => Gen::E21,
            _ => Gen::E22,
        }
    }

    pub fn indices(self) -> (usize, usize) {
        match self {
            Gen::E11 => (1, 1),
            Gen::E12 => (1, 2),
            Gen::E21 => (2, 1),
            Gen::E22 => (2, 2),
        }
    }

    /// Change of the level under the action.
    pub fn level_shift(self) -> isize {
        match self {
            Gen::E12 => -1,
            Gen::E21 => 1,
            _ => 0,
        }
    }
}

/// A weight subspace of a tensor product of highest weight modules.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSubspace {
    modules: Vec<Module>,
    level: usize,
    basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

fn compositions(modules: &[Module], level: usize) -> Vec<Vec<usize>> {
    fn rec(modules: &[Module], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let k = cur.len();
        if k + 1 == modules.len() {
            if modules[k].admits(left) {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for d in 0..=left {
            if !modules[k].admits(d) {
                break;
            }
            cur.push(d);
            rec(modules, left - d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if !modules.is_empty() {
        rec(modules, level, &mut Vec::new(), &mut out);
    }
    // order by the last index first, so for two factors F^a sits at position a
    out.sort_by(|x, y| x.iter().rev().cmp(y.iter().rev()));
    out
}

impl WeightSubspace {
    pub fn new(modules: Vec<Module>, level: usize) -> Result<Self> {
        if modules.is_empty() {
            return Err(Error::InvalidParams("a weight subspace needs at least one module".into()));
        }
        let basis = compositions(&modules, level);
        let index = basis.iter().enumerate().map(|(k, d)| (d.clone(), k)).collect();
        Ok(WeightSubspace { modules, level, basis, index })
    }

    /// `(M_{m1} (x) L_{m2})[l1, l2]`, with `l2` the level.
    pub fn verma_finite(m1: C64, m2: usize, l2: usize) -> Self {
        Self::new(vec![Module::Verma(m1), Module::Irreducible(m2)], l2).expect("two modules")
    }

    pub fn modules(&self) -> &[Module] {
        &self.modules
    }

    pub fn n(&self) -> usize {
        self.modules.len()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn position(&self, d: &[usize]) -> Option<usize> {
        self.index.get(d).copied()
    }

    /// Total weight `(w1, w2)`.
    pub fn weight(&self) -> (C64, C64) {
        let top: C64 = self.modules.iter().map(|m| m.highest()).sum();
        let l = self.level as f64;
        (top - l, C64::from(l))
    }

    /// The subspace `steps` levels away; `None` below the top.
    pub fn shifted(&self, steps: isize) -> Option<Self> {
        let l = self.level as isize + steps;
        (l >= 0).then(|| Self::new(self.modules.clone(), l as usize).expect("same modules"))
    }

    /// `E_ij^{(site)}` from this subspace to the one it lands in. Below the
    /// top level the target is empty and the matrix has zero rows.
    pub fn site_op(&self, g: Gen, site: usize) -> Mat {
        let target = self.shifted(g.level_shift());
        let rows = target.as_ref().map_or(0, |t| t.dim());
        let mut out = Mat::zeros(rows, self.dim());
        let Some(target) = target else { return out };
        for (col, d) in self.basis.iter().enumerate() {
            if let Some((d2, c)) = self.modules[site].act(g, d[site]) {
                let mut e = d.clone();
                e[site] = d2;
                if let Some(row) = target.position(&e) {
                    out[(row, col)] += c;
                }
            }
        }
        out
    }

    /// `sum_a E_ij^{(a)}`.
    pub fn total_op(&self, g: Gen) -> Mat {
        let mut acc = self.site_op(g, 0);
        for a in 1..self.n() {
            acc += self.site_op(g, a);
        }
        acc
    }

    fn target_dim(&self, steps: isize) -> usize {
        self.shifted(steps).map_or(0, |t| t.dim())
    }

    /// `x^{(a)} y^{(b)}` on this subspace (apply `y` at site `b` first).
    pub fn product(&self, x: Gen, a: usize, y: Gen, b: usize) -> Mat {
        let first = self.site_op(y, b);
        match self.shifted(y.level_shift()) {
            Some(mid) => mid.site_op(x, a) * first,
            None => Mat::zeros(self.target_dim(x.level_shift() + y.level_shift()), self.dim()),
        }
    }

    /// `x~ y~` for the total actions.
    pub fn total_product(&self, x: Gen, y: Gen) -> Mat {
        let first = self.total_op(y);
        match self.shifted(y.level_shift()) {
            Some(mid) => mid.total_op(x) * first,
            None => Mat::zeros(self.target_dim(x.level_shift() + y.level_shift()), self.dim()),
        }
    }

    /// Diagonal of `E_ii^{(a)}`.
    pub fn cartan(&self, i: usize, site: usize) -> Vec<C64> {
        let m = self.modules[site].highest();
        self.basis
            .iter()
            .map(|d| {
                let df = d[site] as f64;
                if i == 1 {
                    m - df
                } else {
                    C64::from(df)
                }
            })
            .collect()
    }
}

/// Matrix of an operator in the basis of a weight subspace, with a label.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub entries: Mat,
    pub name: String,
}

impl OperatorMatrix {
    pub fn new(name: impl Into<String>, entries: Mat) -> Self {
        OperatorMatrix { entries, name: name.into() }
    }
}

/// `E_ij` acting on `space`, at one site or through the coproduct.
pub fn gl2_action(g: Gen, site: Option<usize>, space: &WeightSubspace) -> OperatorMatrix {
    let (i, j) = g.indices();
    match site {
        Some(a) => OperatorMatrix::new(format!("E{i}{j}^({})", a + 1), space.site_op(g, a)),
        None => OperatorMatrix::new(format!("E{i}{j}"), space.total_op(g)),
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Residual of `[E_ij, E_kl] = delta_jk E_il - delta_li E_kj` on `space`,
/// for one site or the total action, scaled by the entry magnitudes.
pub fn commutator_residual(space: &WeightSubspace, site: Option<usize>, x: Gen, y: Gen) -> f64 {
    let op = |s: &WeightSubspace, g: Gen| match site {
        Some(a) => s.site_op(g, a),
        None => s.total_op(g),
    };
    let target = space.shifted(x.level_shift() + y.level_shift());
    let rows = target.as_ref().map_or(0, |t| t.dim());
    if rows == 0 {
        return 0.0;
    }
    // a product through a level below the top vanishes
    let compose = |outer: Gen, inner: Gen| match space.shifted(inner.level_shift()) {
        Some(mid) => op(&mid, outer) * op(space, inner),
        None => Mat::zeros(rows, space.dim()),
    };
    let xy = compose(x, y);
    let yx = compose(y, x);
    let (i, j) = x.indices();
    let (k, l) = y.indices();
    let mut rhs = Mat::zeros(rows, space.dim());
    if j == k {
        rhs += op(space, Gen::from_indices(i, l));
    }
    if l == i {
        rhs -= op(space, Gen::from_indices(k, j));
    }
    let diff = &xy - &yx - &rhs;
    let scale = 1.0f64.max(max_abs(&xy)).max(max_abs(&yx));
    max_abs(&diff) / scale
}

/// Evaluation point of the operators: `z_1..z_n` and `lambda_1, lambda_2`,
/// with the logarithms used wherever a variable appears as a base of a
/// complex power.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    pub z: Vec<C64>,
    pub log_z: Vec<C64>,
    pub lambda: [C64; 2],
    pub log_lambda: [C64; 2],
}

impl Point {
    /// Principal logarithms.
    pub fn new(z: Vec<C64>, lambda: [C64; 2]) -> Self {
        let log_z = z.iter().map(|w| w.ln()).collect();
        Point { log_z, z, log_lambda: [lambda[0].ln(), lambda[1].ln()], lambda }
    }

    /// Point with `lambda_i = e^{mu_i}` and `log lambda_i = mu_i`.
    pub fn with_log_lambda(z: Vec<C64>, mu: [C64; 2]) -> Self {
        let mut p = Point::new(z, [mu[0].exp(), mu[1].exp()]);
        p.log_lambda = mu;
        p
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Exchange of the roles of `z` and `lambda` (two sites only).
    pub fn swapped(&self) -> Result<Point> {
        if self.n() != 2 {
            return Err(Error::InvalidParams("swapping z and lambda needs n = 2".into()));
        }
        Ok(Point {
            z: self.lambda.to_vec(),
            log_z: self.log_lambda.to_vec(),
            lambda: [self.z[0], self.z[1]],
            log_lambda: [self.log_z[0], self.log_z[1]],
        })
    }

    /// `x -> x + by` for one slot; the logarithm follows continuously for
    /// steps shorter than `|x|`.
    pub fn shifted(&self, slot: Slot, by: C64) -> Point {
        let mut p = self.clone();
        let follow = |x: C64, lg: C64| lg + (1.0 + by / x).ln();
        match slot {
            Slot::Z(a) => {
                p.log_z[a] = follow(p.z[a], p.log_z[a]);
                p.z[a] += by;
            }
            Slot::Lambda(i) => {
                p.log_lambda[i] = follow(p.lambda[i], p.log_lambda[i]);
                p.lambda[i] += by;
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn finite_module_truncates() {
        let s = WeightSubspace::new(vec![Module::Irreducible(2)], 2).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(max_abs(&s.site_op(Gen::E21, 0)), 0.0);
        assert!(WeightSubspace::new(vec![Module::Irreducible(2)], 3).unwrap().dim() == 0);
        let all: usize = (0..4).map(|l| WeightSubspace::new(vec![Module::Irreducible(2)], l).unwrap().dim()).sum();
        assert_eq!(all, 3);
    }

    #[test]
    fn highest_vector_is_killed_by_e12() {
        let s = WeightSubspace::verma_finite(c(0.3, 0.1), 2, 0);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.site_op(Gen::E12, 0).nrows(), 0);
    }

    #[test]
    fn two_factor_basis_is_indexed_by_the_second_degree() {
        let s = WeightSubspace::verma_finite(c(0.3, 0.1), 2, 3);
        assert_eq!(s.basis(), &[vec![3, 0], vec![2, 1], vec![1, 2]]);
        let t = WeightSubspace::verma_finite(c(0.3, 0.1), 5, 2);
        assert_eq!(t.dim(), 3);
    }

    #[test]
    fn commutation_relations() {
        let s = WeightSubspace::new(vec![Module::Verma(c(0.4, -1.2)), Module::Irreducible(2), Module::Verma(c(-1.1, 0.3))], 3)
            .unwrap();
        for x in Gen::ALL {
            for y in Gen::ALL {
                assert!(commutator_residual(&s, None, x, y) < 1e-13);
                for a in 0..3 {
                    assert!(commutator_residual(&s, Some(a), x, y) < 1e-13);
                }
            }
        }
    }
}
