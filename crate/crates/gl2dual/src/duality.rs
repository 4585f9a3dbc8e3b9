//! Connection factors between the two integral families and the end-to-end
//! identity check `C_b I_ab = D_b E_b X(z) Y(mu) J_ab`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{i_vector, j_vector};
use crate::params::{dual_params, Params};
use crate::quad::{QuadConfig, VecIntegral};
use crate::special::{log_gamma, log_sin_pi, q_factorial};

/// Log-space values of the factors of the identity for one `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectionFactors {
    pub log_c: C64,
    pub log_d: C64,
    pub log_e: C64,
    pub log_x: C64,
    pub log_y: C64,
}

impl ConnectionFactors {
    /// `log(D E X Y / C)`, the factor turning `J_ab` into `I_ab`.
    pub fn log_ratio(&self) -> C64 {
        self.log_d + self.log_e + self.log_x + self.log_y - self.log_c
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `log [n]!` for the trigonometric factorial; fails where it vanishes.
pub(crate) fn log_q_factorial(n: usize, kappa: f64) -> Result<C64> {
    let v = q_factorial(n, kappa);
    if v.abs() < 1e-300 {
        return Err(Error::Singular(format!("[{n}]! vanishes at kappa = {kappa}")));
    }
    Ok(C64::from(v).ln())
}

/// `log sin(pi x / kappa)`; fails on zeros.
fn log_sin_k(x: C64, kappa: f64) -> Result<C64> {
    let w = x / kappa;
    let n = w.re.round();
    if C64::new(w.re - n, w.im).norm() < 1e-14 {
        return Err(Error::Singular(format!("sin(pi x / kappa) vanishes at x = {x}")));
    }
    Ok(log_sin_pi(w))
}

/// `X(t; m1, m2) = prod_{j<m2} Gamma((j - m1 - t)/kappa) / Gamma((j + 1 - t)/kappa)`, in log space.
pub fn log_x(t: C64, m1: C64, m2: usize, kappa: f64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..m2 {
        let jf = j as f64;
        acc += log_gamma((jf - m1 - t) / kappa)? - log_gamma((jf + 1.0 - t) / kappa)?;
    }
    Ok(acc)
}

/// `log Y(mu)`, with `arg(1 - e^mu)` principal.
pub fn log_y(p: &Params, mu: C64) -> C64 {
    let (k, l2) = (p.kappa(), p.l2() as f64);
    mu * l2 * (l2 - 2.0 * p.m1() - 1.0) / (2.0 * k) + (p.l1() + 1.0) * l2 / k * (1.0 - mu.exp()).ln()
}

/// Factors for column `b`. The constant `C_b` carries
/// `1/(l2! [l2-b]! [b]!)` with trigonometric factorials in the last two slots;
/// with ordinary factorials there the identity is off by `[n]!/n!`.
pub fn factors(p: &Params, b: usize) -> Result<ConnectionFactors> {
    if b > p.rank() {
        return Err(Error::InvalidParams(format!("b={b} exceeds min(m2, l2)={}", p.rank())));
    }
    let k = p.kappa();
    let (m1, l1) = (p.m1(), p.l1());
    let (m2, l2) = (p.m2(), p.l2());
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let mut log_c = -(l2 as f64) * two_pi_i.ln() - ln_factorial(l2)
        - log_q_factorial(l2 - b, k)?
        - log_q_factorial(b, k)?;
    for j in 0..l2 - b {
        log_c += log_sin_k(m1 - j as f64, k)?;
    }
    for j in 0..b {
        log_c += log_sin_k(C64::from((m2 - j) as f64), k)?;
    }
    for j in 0..l2 {
        let jf = j as f64;
        log_c += log_gamma(C64::from(1.0 + 1.0 / k))? + log_gamma(1.0 + (m1 - jf) / k)?
            - log_gamma(C64::from(1.0 + (jf + 1.0) / k))?;
    }
    let mut log_d = -(m2 as f64) * C64::new(0.0, 2.0).ln();
    for j in 0..m2 - b {
        log_d -= log_sin_k(C64::from((j + 1) as f64), k)?;
    }
    for j in 0..b {
        log_d -= log_sin_k(C64::from((j + 1) as f64), k)?;
    }
    for j in 0..m2 {
        let jf = j as f64;
        log_d += log_gamma(1.0 + (l1 - jf) / k)?
            - log_gamma(C64::from(-1.0 / k))?
            - log_gamma(C64::from(1.0 + (jf + 1.0) / k))?;
    }
    let (bf, l2f) = (b as f64, l2 as f64);
    let log_e = C64::new(0.0, PI / k) * (bf * bf - (bf - l2f) * (l1 + l2f) - l2f * (l2f - 1.0) / 2.0);
    Ok(ConnectionFactors {
        log_c,
        log_d,
        log_e,
        log_x: log_x(p.z(), m1, m2, k)?,
        log_y: log_y(p, p.mu()),
    })
}

/// `G(t; m1, m2) = prod_{j<m2} (t + j - m1)/(t + j + 1)`.
pub fn g_factor(t: C64, p: &Params) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for j in 0..p.m2() {
        let jf = j as f64;
        let den = t + jf + 1.0;
        if den.norm() < 1e-14 {
            return Err(Error::Singular(format!("G has a pole at t = {t}")));
        }
        acc *= (t + jf - p.m1()) / den;
    }
    Ok(acc)
}

/// Relative residual of `S(t + kappa) = G(t) S(t)` for `S(t) = X(-t)`.
pub fn check_s_equation(p: &Params, t: C64) -> Result<f64> {
    let k = p.kappa();
    let g = g_factor(t, p)?;
    let ratio = (log_x(-t - k, p.m1(), p.m2(), k)? - log_x(-t, p.m1(), p.m2(), k)?).exp();
    Ok((ratio - g).norm() / g.norm())
}

/// One entry of the identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremEntry {
    pub a: usize,
    pub b: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    /// Quadrature error bound translated into a relative residual.
    pub quad_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub params: Params,
    pub entries: Vec<TheoremEntry>,
    pub factors: Vec<ConnectionFactors>,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

impl TheoremReport {
    pub fn residual(&self, a: usize, b: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.a == a && e.b == b).map(|e| e.residual)
    }
}

/// The `I` and `J` matrices, indexed `[b][a]`.
pub struct SideMatrices {
    pub i: Vec<VecIntegral>,
    pub j: Vec<VecIntegral>,
}

fn require_region(p: &Params) -> Result<()> {
    if !(p.mu().im > 0.0 && p.mu().im < 2.0 * PI) {
        return Err(Error::Region(format!("Im mu = {} is not in (0, 2 pi)", p.mu().im)));
    }
    let z = p.z();
    if z.re > 0.0 && z.im == 0.0 {
        return Err(Error::Region(format!("z = {z} lies on the positive real axis")));
    }
    Ok(())
}

/// Evaluates all `I_ab` and `J_ab` (columns over `b` in parallel).
pub fn side_matrices(p: &Params, cfg: &QuadConfig) -> Result<SideMatrices> {
    require_region(p)?;
    let pd = dual_params(p);
    let n = p.rank() + 1;
    let cols: Vec<Result<(VecIntegral, VecIntegral)>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let i = i_vector(p, b, cfg).map_err(|e| e.tagged(0, b))?;
            let j = j_vector(&pd, b, cfg).map_err(|e| e.tagged(0, b))?;
            Ok((i, j))
        })
        .collect();
    let mut out = SideMatrices { i: Vec::with_capacity(n), j: Vec::with_capacity(n) };
    for c in cols {
        let (i, j) = c?;
        out.i.push(i);
        out.j.push(j);
    }
    Ok(out)
}

fn rel_diff(x: C64, y: C64) -> f64 {
    let d = (x - y).norm();
    let s = x.norm().max(y.norm());
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

/// Compares both sides of the identity for every admissible `(a, b)`.
pub fn verify_theorem1(p: &Params, cfg: &QuadConfig) -> Result<TheoremReport> {
    let sides = side_matrices(p, cfg)?;
    theorem_from_sides(p, &sides)
}

pub fn theorem_from_sides(p: &Params, sides: &SideMatrices) -> Result<TheoremReport> {
    let n = p.rank() + 1;
    let mut entries = Vec::new();
    let mut facs = Vec::new();
    let mut warnings = Vec::new();
    for b in 0..n {
        let f = factors(p, b)?;
        facs.push(f);
        let (i, j) = (&sides.i[b], &sides.j[b]);
        warnings.extend(i.warnings.iter().chain(&j.warnings).cloned());
        for a in 0..n {
            let lhs = (f.log_c.exp()) * i.values[a];
            let rhs = (f.log_d + f.log_e + f.log_x + f.log_y).exp() * j.values[a];
            let quad_rel_err = i.errs[a] / i.values[a].norm().max(1e-300) + j.errs[a] / j.values[a].norm().max(1e-300);
            entries.push(TheoremEntry { a, b, lhs, rhs, residual: rel_diff(lhs, rhs), quad_rel_err });
        }
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(TheoremReport { params: *p, entries, factors: facs, max_residual, warnings })
}

/// Connection coefficients recovered from computed integrals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionMatrix {
    /// `g[b][c]`.
    pub g: Vec<Vec<C64>>,
    /// `C_b / (D_b E_b Y)` for every `b`: the predicted diagonal.
    pub predicted: Vec<C64>,
    /// Largest scale-aware off-diagonal contribution.
    pub off_diagonal: f64,
    /// Largest relative deviation of the diagonal from the prediction.
    pub diagonal_error: f64,
    /// Condition number of `I` after scaling each column to unit max norm.
    pub condition: f64,
}

/// Solves `X(z) J_ab = sum_c I_ac G_bc` for `G`.
pub fn connection_matrix(p: &Params, cfg: &QuadConfig) -> Result<ConnectionMatrix> {
    let sides = side_matrices(p, cfg)?;
    connection_from_sides(p, &sides)
}

pub fn connection_from_sides(p: &Params, sides: &SideMatrices) -> Result<ConnectionMatrix> {
    let n = p.rank() + 1;
    let x = log_x(p.z(), p.m1(), p.m2(), p.kappa())?.exp();
    // I as a matrix [a][c]
    let imat = DMatrix::from_fn(n, n, |a, c| sides.i[c].values[a]);
    // columns differ by exponential scales; condition the column-normalized matrix
    let mut scaled = imat.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if norm > 0.0 {
            col /= C64::from(norm);
        }
    }
    let svd = scaled.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let lu = imat.clone().lu();
    let mut g = vec![vec![C64::new(0.0, 0.0); n]; n];
    let mut off_diagonal: f64 = 0.0;
    for b in 0..n {
        let rhs = nalgebra::DVector::from_fn(n, |a, _| x * sides.j[b].values[a]);
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("I matrix is singular (condition {condition:.3e})")))?;
        let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for c in 0..n {
            g[b][c] = sol[c];
            if c != b {
                let contrib = (0..n).map(|a| (imat[(a, c)] * sol[c]).norm()).fold(0.0, f64::max);
                off_diagonal = off_diagonal.max(contrib / scale);
            }
        }
    }
    let mut predicted = Vec::with_capacity(n);
    let mut diagonal_error: f64 = 0.0;
    for (b, row) in g.iter().enumerate() {
        let f = factors(p, b)?;
        let pred = (f.log_c - f.log_d - f.log_e - f.log_y).exp();
        diagonal_error = diagonal_error.max(rel_diff(row[b], pred));
        predicted.push(pred);
    }
    Ok(ConnectionMatrix { g, predicted, off_diagonal, diagonal_error, condition })
}

/// Structural checks on recovered connection coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionInvariance {
    pub at_base: ConnectionMatrix,
    /// Largest relative change of `G_bb` under `z -> z - kappa`.
    pub shift_residual: f64,
    /// Largest relative mismatch of `G_bb(mu) / G_bb(mu2)` against `Y(mu2) / Y(mu)`.
    pub mu_ratio_residual: f64,
}

/// Compares `G` recovered from `sides` (at `p`) with `G` at `(z - kappa, mu)`
/// and at `(z, mu2)`: `G` is `kappa`-periodic in `z` and proportional to
/// `1/Y` in `mu`.
pub fn connection_invariance(p: &Params, sides: &SideMatrices, mu2: C64, cfg: &QuadConfig) -> Result<ConnectionInvariance> {
    let base = connection_from_sides(p, sides)?;
    let (shifted, other) = rayon::join(
        || connection_matrix(&p.with_z(p.z() - p.kappa()), cfg),
        || connection_matrix(&p.with_mu(mu2), cfg),
    );
    let (shifted, other) = (shifted?, other?);
    let mut shift_residual: f64 = 0.0;
    let mut mu_ratio_residual: f64 = 0.0;
    let y_ratio = (log_y(p, mu2) - log_y(p, p.mu())).exp();
    for b in 0..base.g.len() {
        shift_residual = shift_residual.max(rel_diff(base.g[b][b], shifted.g[b][b]));
        mu_ratio_residual = mu_ratio_residual.max(rel_diff(base.g[b][b] / other.g[b][b], y_ratio));
    }
    Ok(ConnectionInvariance { at_base: base, shift_residual, mu_ratio_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn x_is_one_without_factors() {
        assert_eq!(log_x(c(0.3, 0.2), c(-1.0, 0.5), 0, 1.3).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn e_at_top_index() {
        let p = make_params(c(-2.3, 0.4), 2, 2, 1.37, c(-30.0, 0.2), c(-0.8, 1.3)).unwrap();
        let f = factors(&p, 2).unwrap();
        let expect = C64::new(0.0, PI / 1.37) * (4.0 - 1.0);
        assert!((f.log_e - expect).norm() < 1e-13);
    }

    #[test]
    fn g_factor_instances() {
        let p0 = make_params(c(-2.3, 0.4), 0, 0, 1.37, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(g_factor(c(0.7, 0.1), &p0).unwrap(), c(1.0, 0.0));
        let p1 = make_params(c(-2.3, 0.4), 1, 0, 1.37, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        let t = c(0.7, 0.1);
        assert!((g_factor(t, &p1).unwrap() - (t - p1.m1()) / (t + 1.0)).norm() < 1e-15);
        let p2 = make_params(c(-2.3, 0.4), 2, 0, 1.37, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        let m1 = p2.m1();
        assert!((g_factor(c(0.0, 0.0), &p2).unwrap() - (-m1) * (1.0 - m1) / 2.0).norm() < 1e-14);
        assert!(g_factor(c(-1.0, 0.0), &p1).is_err());
    }

    #[test]
    fn s_equation_trivial_case() {
        let p0 = make_params(c(-2.3, 0.4), 0, 0, 1.37, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(check_s_equation(&p0, c(0.4, -0.3)).unwrap(), 0.0);
    }
}
