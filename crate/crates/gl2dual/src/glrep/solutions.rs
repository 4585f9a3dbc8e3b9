//! Residuals of the hypergeometric solutions in the operator equations.
//!
//! The I-side solution
//! `U_b = exp((mu1 (m1 z1 + m2 z2) - mu1 (m1^2 + m2^2)/2 - (mu1 - mu2)(l2 z1 + l2/2))/kappa)
//!        (1 - e^{mu2 - mu1})^{-l2/kappa} Ibar_b(z2 - z1, mu2 - mu1)`
//! lives in `(M_{m1} (x) L_{m2})[l1, l2]` and should solve the qKZ equations
//! and the dynamical differential equations. The J-side solution
//! `U_b = z1^{(lambda1 (l1 - m2) + lambda2 m2 - m2^2 - m1 l1 + l1^2/2)/kappa}
//!        z2^{l2 (lambda1 - m1 + l2/2)/kappa} (z1 - z2)^{l1 l2/kappa} Jbar_b(z2/z1, lambda2 - lambda1)`
//! lives in `(M_{l1} (x) L_{l2})[m1, m2]` and should solve the KZ and the
//! dynamical difference equations. Shifts re-evaluate the integrals;
//! derivatives use central differences with Richardson extrapolation.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::operators::{build_operator, OperatorKind};
use super::{Mat, Point, WeightSubspace};
use crate::error::{Error, Result};
use crate::integrals::{i_vector, j_vector};
use crate::params::{dual_params, make_params, Params};
use crate::quad::QuadConfig;

/// Step of the central differences, in units of `kappa`.
pub const FD_STEP: f64 = 1e-4;

/// Base point of the I-side checks: `(z1, mu1)`; the tuple supplies the
/// differences `z2 - z1` and `mu2 - mu1`.
const I_BASE: (C64, C64) = (C64::new(0.3, 0.2), C64::new(0.15, -0.05));

/// Base point of the J-side checks: `(z1, lambda1)`; the tuple supplies
/// `log(z2/z1)` in the `mu` slot and `lambda2 - lambda1` in the `z` slot.
const J_BASE: (C64, C64) = (C64::new(1.2, 0.35), C64::new(0.45, -0.3));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolutionSide {
    /// I-side solution in the qKZ equations.
    Qkz,
    /// J-side solution in the KZ and dynamical difference equations.
    KzDyn,
    /// I-side solution in the dynamical differential equations.
    DynDe,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionCheck {
    pub side: SolutionSide,
    pub b: usize,
    /// Relative residual per equation.
    pub residuals: Vec<(String, f64)>,
    pub max_residual: f64,
    /// Largest relative gap between the step-`h` and step-`h/2` derivatives.
    pub richardson_gap: Option<f64>,
    pub warnings: Vec<String>,
}

/// A solution normalized by its prefactor at a reference point.
struct Sampled {
    log_pref: C64,
    vector: Vec<C64>,
}

impl Sampled {
    fn relative_to(&self, base: C64) -> Vec<C64> {
        let f = (self.log_pref - base).exp();
        self.vector.iter().map(|v| v * f).collect()
    }
}

fn tuple(p: &Params, z: C64, mu: C64) -> Result<Params> {
    make_params(p.m1(), p.m2() as i64, p.l2() as i64, p.kappa(), z, mu)
}

/// I-side solution at `(z1, z2, mu1, mu2)`.
fn u_i(p: &Params, z: [C64; 2], mu: [C64; 2], b: usize, cfg: &QuadConfig) -> Result<Sampled> {
    let (k, m1, m2, l2) = (p.kappa(), p.m1(), p.m2() as f64, p.l2() as f64);
    let q = tuple(p, z[1] - z[0], mu[1] - mu[0])?;
    let vector = i_vector(&q, b, cfg)?.values;
    let log_pref = (mu[0] * (m1 * z[0] + m2 * z[1]) - mu[0] * (m1 * m1 + m2 * m2) / 2.0
        - (mu[0] - mu[1]) * (l2 * z[0] + l2 / 2.0))
        / k
        - l2 / k * (1.0 - (mu[1] - mu[0]).exp()).ln();
    Ok(Sampled { log_pref, vector })
}

/// J-side solution at `(z1, z2, lambda1, lambda2)`.
fn u_j(p: &Params, z: [C64; 2], lam: [C64; 2], b: usize, cfg: &QuadConfig) -> Result<Sampled> {
    let (k, m1, l1) = (p.kappa(), p.m1(), p.l1());
    let (m2, l2) = (p.m2() as f64, p.l2() as f64);
    let q = tuple(p, lam[1] - lam[0], (z[1] / z[0]).ln())?;
    let vector = j_vector(&dual_params(&q), b, cfg)?.values;
    let e1 = (lam[0] * (l1 - m2) + lam[1] * m2 - m2 * m2 - m1 * l1 + l1 * l1 / 2.0) / k;
    let e2 = l2 * (lam[0] - m1 + l2 / 2.0) / k;
    let log_pref = e1 * z[0].ln() + e2 * z[1].ln() + l1 * l2 / k * (z[0] - z[1]).ln();
    Ok(Sampled { log_pref, vector })
}

fn norm(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.norm()))
}

fn mat_vec(m: &Mat, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// `kappa x d/dx` of a sampled function along one coordinate, relative to the
/// prefactor at the base point, returned with the Richardson gap.
fn log_derivative<F>(x: C64, kappa: f64, base: C64, f: F) -> Result<(Vec<C64>, f64)>
where
    F: Fn(C64) -> Result<Sampled>,
{
    let h = FD_STEP * kappa;
    let central = |h: f64| -> Result<Vec<C64>> {
        let plus = f(x + h)?.relative_to(base);
        let minus = f(x - h)?.relative_to(base);
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    let rich: Vec<C64> = d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let gap = d1.iter().zip(&d2).fold(0.0f64, |g, (a, b)| g.max((a - b).norm())) / norm(&rich).max(1e-300);
    Ok((rich.into_iter().map(|d| d * x * kappa).collect(), gap))
}

fn relative(lhs: &[C64], rhs: &[C64]) -> f64 {
    let diff: Vec<C64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(lhs).max(norm(rhs)).max(1e-300)
}

fn check_qkz(p: &Params, b: usize, cfg: &QuadConfig) -> Result<SolutionCheck> {
    let (z1, mu1) = I_BASE;
    let z = [z1, z1 + p.z()];
    let mu = [mu1, mu1 + p.mu()];
    let k = p.kappa();
    let space = WeightSubspace::verma_finite(p.m1(), p.m2(), p.l2());
    let point = Point::with_log_lambda(z.to_vec(), mu);
    let here = u_i(p, z, mu, b, cfg)?;
    let u0 = here.relative_to(here.log_pref);
    let mut residuals = Vec::new();
    for a in 0..2 {
        let op = build_operator(OperatorKind::Qkz, a, &point, &space, k)?;
        let mut zs = z;
        zs[a] += k;
        let shifted = u_i(p, zs, mu, b, cfg)?.relative_to(here.log_pref);
        let lhs = mat_vec(&op.matrix.entries, &shifted);
        residuals.push((format!("Z_{} U = U", a + 1), relative(&lhs, &u0)));
    }
    Ok(finish(SolutionSide::Qkz, b, residuals, None))
}

fn check_dynde(p: &Params, b: usize, cfg: &QuadConfig) -> Result<SolutionCheck> {
    let (z1, mu1) = I_BASE;
    let z = [z1, z1 + p.z()];
    let mu = [mu1, mu1 + p.mu()];
    let k = p.kappa();
    let space = WeightSubspace::verma_finite(p.m1(), p.m2(), p.l2());
    let point = Point::with_log_lambda(z.to_vec(), mu);
    let here = u_i(p, z, mu, b, cfg)?;
    let u0 = here.relative_to(here.log_pref);
    let mut residuals = Vec::new();
    let mut gap: f64 = 0.0;
    for i in 0..2 {
        let op = build_operator(OperatorKind::DynD, i, &point, &space, k)?;
        // kappa lambda d/dlambda = kappa d/dmu
        let (d, g) = log_derivative(C64::new(1.0, 0.0), k, here.log_pref, |x| {
            let mut m = mu;
            m[i] += x - 1.0;
            u_i(p, z, m, b, cfg)
        })?;
        gap = gap.max(g);
        let m = mat_vec(&op.matrix.entries, &u0);
        let lhs: Vec<C64> = d.iter().zip(&m).map(|(a, b)| a + b).collect();
        let scale = norm(&d).max(norm(&m)).max(1e-300);
        residuals.push((format!("D_{} U = 0", i + 1), norm(&lhs) / scale));
    }
    Ok(finish(SolutionSide::DynDe, b, residuals, Some(gap)))
}

fn check_kz(p: &Params, b: usize, cfg: &QuadConfig) -> Result<SolutionCheck> {
    let (z1, lam1) = J_BASE;
    let z = [z1, z1 * p.mu().exp()];
    let lam = [lam1, lam1 + p.z()];
    let k = p.kappa();
    let space = WeightSubspace::verma_finite(p.l1(), p.l2(), p.m2());
    let point = Point::new(z.to_vec(), lam);
    let here = u_j(p, z, lam, b, cfg)?;
    let u0 = here.relative_to(here.log_pref);
    let mut residuals = Vec::new();
    let mut gap: f64 = 0.0;
    for a in 0..2 {
        let op = build_operator(OperatorKind::Kz, a, &point, &space, k)?;
        let (d, g) = log_derivative(z[a], k, here.log_pref, |x| {
            let mut zz = z;
            zz[a] = x;
            u_j(p, zz, lam, b, cfg)
        })?;
        gap = gap.max(g);
        let m = mat_vec(&op.matrix.entries, &u0);
        let lhs: Vec<C64> = d.iter().zip(&m).map(|(a, b)| a + b).collect();
        let scale = norm(&d).max(norm(&m)).max(1e-300);
        residuals.push((format!("nabla_{} U = 0", a + 1), norm(&lhs) / scale));
    }
    for i in 0..2 {
        let op = build_operator(OperatorKind::DynQ, i, &point, &space, k)?;
        let mut ls = lam;
        ls[i] += k;
        let shifted = u_j(p, z, ls, b, cfg)?.relative_to(here.log_pref);
        let lhs = mat_vec(&op.matrix.entries, &shifted);
        residuals.push((format!("Q_{} U = U", i + 1), relative(&lhs, &u0)));
    }
    Ok(finish(SolutionSide::KzDyn, b, residuals, Some(gap)))
}

fn finish(side: SolutionSide, b: usize, residuals: Vec<(String, f64)>, richardson_gap: Option<f64>) -> SolutionCheck {
    let max_residual = residuals.iter().fold(0.0f64, |a, (_, r)| a.max(*r));
    let mut warnings = Vec::new();
    if let Some(g) = richardson_gap {
        // the h and h/2 estimates should agree far better than the target
        if g > 1e-4 {
            warnings.push(format!("finite differences unstable: step-halving gap {g:.2e}"));
        }
    }
    SolutionCheck { side, b, residuals, max_residual, richardson_gap, warnings }
}

/// Residual of the solution `U_b` built from the tuple `p` in the equations
/// of `side`. For the I side `p.z()` and `p.mu()` are `z2 - z1` and
/// `mu2 - mu1`; for the J side they are `lambda2 - lambda1` and `log(z2/z1)`.
pub fn check_solution(side: SolutionSide, p: &Params, b: usize, cfg: &QuadConfig) -> Result<SolutionCheck> {
    if b > p.rank() {
        return Err(Error::InvalidParams(format!("b={b} exceeds min(m2, l2)={}", p.rank())));
    }
    match side {
        SolutionSide::Qkz => check_qkz(p, b, cfg),
        SolutionSide::DynDe => check_dynde(p, b, cfg),
        SolutionSide::KzDyn => check_kz(p, b, cfg),
    }
}
