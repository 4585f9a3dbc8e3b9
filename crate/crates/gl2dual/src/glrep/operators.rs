//! KZ, qKZ and dynamical operators as matrices with a shift or derivative
//! slot, their mutual commutation checks and the duality isomorphism.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{build_r, max_abs, Gen, Mat, Module, OperatorMatrix, Point, WeightSubspace};
use crate::error::{Error, Result};

/// Distance below which a denominator counts as zero.
const SINGULAR: f64 = 1e-12;

/// A variable slot of the operators (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Slot {
    Z(usize),
    Lambda(usize),
}

/// The non-matrix part: `T_x` with `(T_x f)(x) = f(x + kappa)`, or
/// `kappa x d/dx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ShiftPart {
    Shift(Slot),
    Derivative(Slot),
}

/// `matrix * T` or `part + matrix`: difference operators carry the matrix in
/// front of the shift, differential operators add it to `kappa x d/dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedOperator {
    pub matrix: OperatorMatrix,
    pub part: ShiftPart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    /// Trigonometric KZ operator `nabla_a`.
    Kz,
    /// qKZ operator `Z_a`.
    Qkz,
    /// Dynamical difference operator `Q_i`.
    DynQ,
    /// Dynamical differential operator `D_i`.
    DynD,
}

fn diag(v: &[C64]) -> Mat {
    Mat::from_diagonal(&nalgebra::DVector::from_column_slice(v))
}

fn nonzero(x: C64, what: &str) -> Result<C64> {
    if x.norm() < SINGULAR {
        return Err(Error::Singular(format!("{what} vanishes")));
    }
    Ok(x)
}

fn inverse(m: Mat, what: &str) -> Result<Mat> {
    m.try_inverse().ok_or_else(|| Error::Singular(format!("{what} is not invertible")))
}

/// `B(t)` on a weight subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct BSeries {
    pub matrix: Mat,
    /// Largest `s` with `E12^s != 0` on the subspace; the series stops there.
    pub depth: usize,
}

/// `B(t) = 1 + sum_s E21^s E12^s prod_{j<=s} 1/(j (t - E11 + E22 - j))`.
pub fn b_series(t: C64, space: &WeightSubspace) -> Result<BSeries> {
    let (w1, w2) = space.weight();
    let h = w1 - w2;
    let dim = space.dim();
    let mut matrix = Mat::identity(dim, dim);
    // E12^s from this level down to level - s
    let mut down = Mat::identity(dim, dim);
    let mut coeff = C64::new(1.0, 0.0);
    let mut depth = 0;
    for s in 1..=space.level() {
        let here = space.shifted(-(s as isize) + 1).expect("within the level");
        down = here.total_op(Gen::E12) * down;
        if max_abs(&down) == 0.0 {
            break;
        }
        depth = s;
        let j = s as f64;
        coeff /= j * nonzero(t - h - j, "a denominator of B(t)")?;
        let mut up = down.clone();
        for r in (0..s).rev() {
            up = space.shifted(-(r as isize) - 1).expect("within the level").total_op(Gen::E21) * up;
        }
        matrix += up * coeff;
    }
    Ok(BSeries { matrix, depth })
}

/// `r(x)^{(ab)}`.
fn r_trig(space: &WeightSubspace, x: C64, a: usize, b: usize) -> Result<Mat> {
    let den = nonzero(x - 1.0, "z_a/z_b - 1")?;
    let cartan = space.product(Gen::E11, a, Gen::E11, b) + space.product(Gen::E22, a, Gen::E22, b);
    let m = cartan * ((x + 1.0) / 2.0) + space.product(Gen::E12, a, Gen::E21, b) * x + space.product(Gen::E21, a, Gen::E12, b);
    Ok(m / den)
}

fn nabla_matrix(space: &WeightSubspace, a: usize, p: &Point) -> Result<Mat> {
    let (w1, w2) = space.weight();
    let w = [w1, w2];
    let mut acc = Mat::zeros(space.dim(), space.dim());
    for i in 0..2 {
        let e: Vec<C64> = space.cartan(i + 1, a).iter().map(|x| -(p.lambda[i] - w[i] / 2.0) * x).collect();
        acc += diag(&e);
    }
    for b in 0..space.n() {
        if b != a {
            acc -= r_trig(space, p.z[a] / p.z[b], a, b)?;
        }
    }
    Ok(acc)
}

/// `prod_a z_a^{-E_ii^{(a)}}`, through the stored logarithms.
fn z_power(space: &WeightSubspace, i: usize, p: &Point) -> Mat {
    let mut e = vec![C64::new(0.0, 0.0); space.dim()];
    for a in 0..space.n() {
        for (k, x) in space.cartan(i, a).into_iter().enumerate() {
            e[k] -= x * p.log_z[a];
        }
    }
    diag(&e.into_iter().map(|x| x.exp()).collect::<Vec<_>>())
}

fn q_matrix(space: &WeightSubspace, i: usize, p: &Point, kappa: f64) -> Result<Mat> {
    let t = p.lambda[0] - p.lambda[1];
    if i == 0 {
        let b = b_series(t, space)?.matrix;
        Ok(inverse(b, "B(lambda1 - lambda2)")? * z_power(space, 1, p))
    } else {
        Ok(z_power(space, 2, p) * b_series(t - kappa, space)?.matrix)
    }
}

fn r_embedded(space: &WeightSubspace, i: usize, j: usize, t: C64) -> Result<Mat> {
    let m = space.modules();
    build_r(t, m[i], m[j], space.level())?.embed(space, i, j)
}

/// The three factors of `Z_a = L^{-1} Lambda R`.
struct QkzParts {
    left_inv: Mat,
    lambda: Mat,
    right: Mat,
}

fn qkz_parts(space: &WeightSubspace, a: usize, p: &Point, kappa: f64) -> Result<QkzParts> {
    let n = space.n();
    let dim = space.dim();
    let mut left = Mat::identity(dim, dim);
    for b in (a + 1..n).rev() {
        left *= r_embedded(space, a, b, p.z[a] - p.z[b])?;
    }
    let mut right = Mat::identity(dim, dim);
    for b in 0..a {
        right *= r_embedded(space, b, a, p.z[b] - p.z[a] - kappa)?;
    }
    let e1 = space.cartan(1, a);
    let e2 = space.cartan(2, a);
    let lam: Vec<C64> = e1
        .iter()
        .zip(&e2)
        .map(|(x, y)| (-x * p.log_lambda[0] - y * p.log_lambda[1]).exp())
        .collect();
    Ok(QkzParts { left_inv: inverse(left, "the R-matrix product")?, lambda: diag(&lam), right })
}

fn qkz_matrix(space: &WeightSubspace, a: usize, p: &Point, kappa: f64) -> Result<Mat> {
    let q = qkz_parts(space, a, p, kappa)?;
    Ok(q.left_inv * q.lambda * q.right)
}

fn d_matrix(space: &WeightSubspace, i: usize, p: &Point) -> Result<Mat> {
    let (w1, w2) = space.weight();
    let w = if i == 0 { w1 } else { w2 };
    let dim = space.dim();
    let ii = i + 1;
    let mut acc = Mat::identity(dim, dim) * (w * w / 2.0);
    for a in 0..space.n() {
        let e: Vec<C64> = space.cartan(ii, a).iter().map(|x| -p.z[a] * x).collect();
        acc += diag(&e);
    }
    for j in 1..=2 {
        let (x, y) = (Gen::from_indices(ii, j), Gen::from_indices(j, ii));
        for a in 0..space.n() {
            for b in a + 1..space.n() {
                acc -= space.product(x, a, y, b);
            }
        }
    }
    let other = 1 - i;
    let den = nonzero(p.lambda[i] - p.lambda[other], "lambda_1 - lambda_2")?;
    let tail = space.total_product(Gen::E21, Gen::E12) - space.total_op(Gen::E22);
    acc -= tail * (p.lambda[other] / den);
    Ok(acc)
}

fn check_index(kind: OperatorKind, idx: usize, space: &WeightSubspace, p: &Point) -> Result<()> {
    if space.n() < 2 || p.n() != space.n() {
        return Err(Error::InvalidParams(format!(
            "operators need n >= 2 sites and a matching point, got {} sites and {} coordinates",
            space.n(),
            p.n()
        )));
    }
    let bound = match kind {
        OperatorKind::Kz | OperatorKind::Qkz => space.n(),
        OperatorKind::DynQ | OperatorKind::DynD => 2,
    };
    if idx >= bound {
        return Err(Error::InvalidParams(format!("{kind:?} index {idx} out of range")));
    }
    Ok(())
}

/// Builds `nabla_a`, `Z_a`, `Q_i` or `D_i` (0-based index) at a point.
pub fn build_operator(kind: OperatorKind, idx: usize, p: &Point, space: &WeightSubspace, kappa: f64) -> Result<ShiftedOperator> {
    check_index(kind, idx, space, p)?;
    let k = idx + 1;
    let (name, m, part) = match kind {
        OperatorKind::Kz => (format!("nabla_{k}"), nabla_matrix(space, idx, p)?, ShiftPart::Derivative(Slot::Z(idx))),
        OperatorKind::Qkz => (format!("Z_{k}"), qkz_matrix(space, idx, p, kappa)?, ShiftPart::Shift(Slot::Z(idx))),
        OperatorKind::DynQ => (format!("Q_{k}"), q_matrix(space, idx, p, kappa)?, ShiftPart::Shift(Slot::Lambda(idx))),
        OperatorKind::DynD => (format!("D_{k}"), d_matrix(space, idx, p)?, ShiftPart::Derivative(Slot::Lambda(idx))),
    };
    Ok(ShiftedOperator { matrix: OperatorMatrix::new(name, m), part })
}

/// Pairs of operators whose commutator should vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Commutation {
    ZZ { a: usize, b: usize },
    QQ,
    NablaQ { a: usize, i: usize },
    ZD { a: usize, i: usize },
}

fn relative(diff: &Mat, terms: &[&Mat]) -> f64 {
    let scale = terms.iter().fold(1e-300f64, |s, m| s.max(max_abs(m)));
    max_abs(diff) / scale
}

/// Matrix residual of a commutator of shifted operators, with the
/// derivative parts differentiated analytically.
pub fn check_commutation(c: Commutation, space: &WeightSubspace, p: &Point, kappa: f64) -> Result<f64> {
    let kc = C64::from(kappa);
    match c {
        Commutation::ZZ { a, b } => {
            check_index(OperatorKind::Qkz, a.max(b), space, p)?;
            let x = qkz_matrix(space, a, p, kappa)? * qkz_matrix(space, b, &p.shifted(Slot::Z(a), kc), kappa)?;
            let y = qkz_matrix(space, b, p, kappa)? * qkz_matrix(space, a, &p.shifted(Slot::Z(b), kc), kappa)?;
            Ok(relative(&(&x - &y), &[&x, &y]))
        }
        Commutation::QQ => {
            check_index(OperatorKind::DynQ, 1, space, p)?;
            let x = q_matrix(space, 0, p, kappa)? * q_matrix(space, 1, &p.shifted(Slot::Lambda(0), kc), kappa)?;
            let y = q_matrix(space, 1, p, kappa)? * q_matrix(space, 0, &p.shifted(Slot::Lambda(1), kc), kappa)?;
            Ok(relative(&(&x - &y), &[&x, &y]))
        }
        Commutation::NablaQ { a, i } => {
            check_index(OperatorKind::Kz, a, space, p)?;
            check_index(OperatorKind::DynQ, i, space, p)?;
            let m = q_matrix(space, i, p, kappa)?;
            let e = super::Mat::from_diagonal(&nalgebra::DVector::from_vec(space.cartan(i + 1, a)));
            // kappa z_a d/dz_a of the z-powers in Q_i
            let dm = if i == 0 { -(&m * &e) * kc } else { -(&e * &m) * kc };
            let x = &m * nabla_matrix(space, a, &p.shifted(Slot::Lambda(i), kc))?;
            let y = nabla_matrix(space, a, p)? * &m;
            Ok(relative(&(&dm + &y - &x), &[&dm, &x, &y]))
        }
        Commutation::ZD { a, i } => {
            check_index(OperatorKind::Qkz, a, space, p)?;
            check_index(OperatorKind::DynD, i, space, p)?;
            let q = qkz_parts(space, a, p, kappa)?;
            let z = &q.left_inv * &q.lambda * &q.right;
            let e = super::Mat::from_diagonal(&nalgebra::DVector::from_vec(space.cartan(i + 1, a)));
            // kappa lambda_i d/dlambda_i of lambda_i^{-E_ii^{(a)}}
            let dz = -(&q.left_inv * e * &q.lambda * &q.right) * kc;
            let x = &z * d_matrix(space, i, &p.shifted(Slot::Z(a), kc))?;
            let y = d_matrix(space, i, p)? * &z;
            Ok(relative(&(&x - &y - &dz), &[&x, &y, &dz]))
        }
    }
}

/// `G(t; m1, m2) = prod_{j<m2} (t + j - m1)/(t + j + 1)`.
pub fn g_duality(t: C64, m1: C64, m2: usize) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for j in 0..m2 {
        let jf = j as f64;
        acc *= (t + jf - m1) / nonzero(t + jf + 1.0, "a denominator of G")?;
    }
    Ok(acc)
}

/// `phi: (M_{m1} (x) L_{m2})[l1, l2] -> (M_{l1} (x) L_{l2})[m1, m2]`, returned
/// with its matrix in the `F^a` coordinates of both sides.
pub fn phi_iso(space: &WeightSubspace) -> Result<(WeightSubspace, Mat)> {
    let (m1, m2) = match space.modules() {
        [Module::Verma(m1), Module::Irreducible(m2)] => (*m1, *m2),
        _ => return Err(Error::InvalidParams("phi is defined on M_{m1} (x) L_{m2}".into())),
    };
    let l2 = space.level();
    let l1 = m1 + m2 as f64 - l2 as f64;
    let dual = WeightSubspace::verma_finite(l1, l2, m2);
    if dual.dim() != space.dim() {
        return Err(Error::InvalidParams(format!("dimension mismatch {} vs {}", space.dim(), dual.dim())));
    }
    let n = space.dim();
    Ok((dual, Mat::identity(n, n)))
}

/// Which duality statement to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Intertwining {
    /// `phi Z_1 = G(z1 - z2)^{-1} Q_1(lambda, z) phi` and
    /// `phi Z_2 = G(z1 - z2 - kappa) Q_2(lambda, z) phi`.
    QkzQ,
    /// `phi D_a(z, lambda) = nabla_a(lambda, z) phi`.
    DKz,
}

/// Largest matrix residual of the intertwining relations over both indices.
pub fn check_intertwining(which: Intertwining, space: &WeightSubspace, p: &Point, kappa: f64) -> Result<f64> {
    let (dual, phi) = phi_iso(space)?;
    let q = p.swapped()?;
    let m1 = space.modules()[0].highest();
    let m2 = space.modules()[1].cap().expect("finite second factor");
    let t = p.z[0] - p.z[1];
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        let (lhs, rhs) = match which {
            Intertwining::QkzQ => {
                let g = if a == 0 { 1.0 / g_duality(t, m1, m2)? } else { g_duality(t - kappa, m1, m2)? };
                (&phi * qkz_matrix(space, a, p, kappa)?, q_matrix(&dual, a, &q, kappa)? * &phi * g)
            }
            Intertwining::DKz => (&phi * d_matrix(space, a, p)?, nabla_matrix(&dual, a, &q)? * &phi),
        };
        worst = worst.max(relative(&(&lhs - &rhs), &[&lhs, &rhs]));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn point2() -> Point {
        Point::new(vec![c(0.9, 0.4), c(-1.3, 0.7)], [c(1.7, -0.2), c(-0.6, 1.1)])
    }

    #[test]
    fn b_series_is_trivial_on_the_top_line() {
        let s = WeightSubspace::verma_finite(c(0.3, 0.2), 2, 0);
        let b = b_series(c(0.4, 0.1), &s).unwrap();
        assert_eq!(b.depth, 0);
        assert!(max_abs(&(b.matrix - Mat::identity(1, 1))) == 0.0);
    }

    #[test]
    fn b_series_depth_is_the_raising_depth() {
        let s = WeightSubspace::verma_finite(c(0.3, 0.2), 2, 3);
        let b = b_series(c(0.4, 0.1), &s).unwrap();
        assert_eq!(b.depth, 3);
        let inv = b.matrix.clone().try_inverse().unwrap();
        assert!(max_abs(&(inv * b.matrix - Mat::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn qkz_on_the_top_line_is_a_lambda_power() {
        let s = WeightSubspace::verma_finite(c(0.3, 0.2), 2, 0);
        let p = point2();
        let kappa = 1.3;
        for a in 0..2 {
            let z = build_operator(OperatorKind::Qkz, a, &p, &s, kappa).unwrap();
            let m = s.modules()[a].highest();
            let expect = (-m * p.log_lambda[0]).exp();
            assert!((z.matrix.entries[(0, 0)] - expect).norm() < 1e-13 * expect.norm());
        }
    }

    #[test]
    fn phi_dimensions_agree() {
        for (m2, l2) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            let s = WeightSubspace::verma_finite(c(0.3, 0.2), m2, l2);
            let (d, phi) = phi_iso(&s).unwrap();
            assert_eq!(s.dim(), m2.min(l2) + 1);
            assert_eq!(d.dim(), s.dim());
            assert_eq!(phi, Mat::identity(s.dim(), s.dim()));
        }
    }

    #[test]
    fn commutators_vanish_on_a_small_example() {
        let s = WeightSubspace::verma_finite(c(0.35, 0.25), 2, 2);
        let p = point2();
        let kappa = 1.3;
        for c in [
            Commutation::ZZ { a: 0, b: 1 },
            Commutation::QQ,
            Commutation::NablaQ { a: 0, i: 0 },
            Commutation::NablaQ { a: 1, i: 1 },
            Commutation::ZD { a: 0, i: 0 },
            Commutation::ZD { a: 1, i: 1 },
        ] {
            let r = check_commutation(c, &s, &p, kappa).unwrap();
            assert!(r < 1e-10, "{c:?}: {r:e}");
        }
    }

    #[test]
    fn intertwining_small_example() {
        let s = WeightSubspace::verma_finite(c(0.35, 0.25), 1, 1);
        let p = point2();
        for w in [Intertwining::QkzQ, Intertwining::DKz] {
            let r = check_intertwining(w, &s, &p, 1.3).unwrap();
            assert!(r < 1e-10, "{w:?}: {r:e}");
        }
    }
}
