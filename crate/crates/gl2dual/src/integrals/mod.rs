//! The integrals `I_ab` (vertical lines) and `J_ab` (nested loops), the
//! Selberg-type integrals and the leading asymptotic terms.

pub mod barnes;
pub mod loops;
pub mod selberg;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::contour::{barnes_centers, barnes_lines, loops_j, LoopOptions};
use crate::error::{Error, Result};
use crate::integrand::{barnes_terms, psi_exponents};
use crate::params::{dual_params, Params};
use crate::quad::{IntegralResult, QuadConfig, VecIntegral};
use crate::special::{gamma_ratio, hyp2f1, q_factorial, ArgRange};

pub use barnes::{integrate_lines, LinePlan};
pub use loops::{integrate_loops, LoopProblem, LoopWeight, PowerFactor};
pub use selberg::{selberg_a, selberg_a_numeric, selberg_b, selberg_b_numeric, SelbergClosedForm};

fn check_pair(p: &Params, a: usize, b: usize) -> Result<()> {
    if a > p.rank() || b > p.rank() {
        return Err(Error::InvalidParams(format!(
            "(a, b) = ({a}, {b}) is not admissible, the bound is {}",
            p.rank()
        )));
    }
    Ok(())
}

/// Line plan used for `I_ab` with index `b`.
pub fn i_line_plan(p: &Params, b: usize) -> LinePlan {
    let rate = p.mu().im.min(2.0 * PI - p.mu().im) / p.kappa();
    LinePlan {
        x: barnes_lines(p, b),
        y0: barnes_centers(p, b),
        half: 4.0 / rate + 0.5 * (p.z().im.abs() + p.m1().im.abs()),
    }
}

/// `I_ab` for all `a = 0..=rank` at once.
pub fn i_vector(p: &Params, b: usize, cfg: &QuadConfig) -> Result<VecIntegral> {
    check_pair(p, 0, b)?;
    if !(p.mu().im > 0.0 && p.mu().im < 2.0 * PI) {
        return Err(Error::Region(format!("Im mu = {} is not in (0, 2 pi)", p.mu().im)));
    }
    let amax = p.rank();
    if p.l2() == 0 {
        let mut out = VecIntegral::zeros(amax + 1);
        out.values[0] = C64::new(1.0, 0.0);
        out.abs[0] = 1.0;
        return Ok(out);
    }
    let ti = barnes_terms(p, b, amax)?;
    integrate_lines(&ti, &i_line_plan(p, b), cfg)
}

pub fn i_ab(p: &Params, a: usize, b: usize, cfg: &QuadConfig) -> Result<IntegralResult> {
    check_pair(p, a, b)?;
    Ok(i_vector(p, b, cfg)?.component(a))
}

/// Loop problem of `J_ab` on the loop-side tuple `pd`; the dimension is
/// `pd.l2()`, `pd.z()` is the finite branch point and `pd.mu()` the exponent.
pub fn j_problem(pd: &Params, b: usize, opts: &LoopOptions) -> Result<LoopProblem> {
    let e = psi_exponents(pd);
    let z = pd.z();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    Ok(LoopProblem {
        single: vec![
            PowerFactor { c1: one, c0: zero, exponent: e.t, range: ArgRange::ZeroTwoPi },
            PowerFactor { c1: -one, c0: one, exponent: e.one_minus_t, range: ArgRange::Principal },
            PowerFactor { c1: -one, c0: z, exponent: e.z_minus_t, range: ArgRange::ZeroTwoPi },
        ],
        pair_exponent: e.pair,
        lin: zero,
        weight: LoopWeight::G { z, amax: pd.rank() },
        contour: loops_j(pd, b, opts)?,
    })
}

/// `J_ab` for all `a = 0..=rank` at once, on the loop-side tuple.
pub fn j_vector_with(pd: &Params, b: usize, cfg: &QuadConfig, opts: &LoopOptions) -> Result<VecIntegral> {
    check_pair(pd, 0, b)?;
    let prob = j_problem(pd, b, &LoopOptions { tol: cfg.rel_tol, ..*opts })?;
    let mut out = integrate_loops(&prob, cfg)?;
    if out.dim() < pd.rank() + 1 {
        let n = pd.rank() + 1;
        out.values.resize(n, C64::new(0.0, 0.0));
        out.errs.resize(n, 0.0);
        out.abs.resize(n, 0.0);
    }
    Ok(out)
}

pub fn j_vector(pd: &Params, b: usize, cfg: &QuadConfig) -> Result<VecIntegral> {
    j_vector_with(pd, b, cfg, &LoopOptions::default())
}

pub fn j_ab(pd: &Params, a: usize, b: usize, cfg: &QuadConfig) -> Result<IntegralResult> {
    check_pair(pd, a, b)?;
    Ok(j_vector(pd, b, cfg)?.component(a))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Leading term of `I_ab` as `Re z -> -inf`. The constant is
/// `l2! [l2-b]! [b]!` with trigonometric factorials, see [`q_factorial`].
pub fn i_asymptotic(p: &Params, a: usize, b: usize) -> Result<C64> {
    check_pair(p, a, b)?;
    if a != b {
        return Ok(C64::new(0.0, 0.0));
    }
    let (k, l2, m2) = (p.kappa(), p.l2(), p.m2() as f64);
    let (z, mu, m1) = (p.z(), p.mu(), p.m1());
    let bf = b as f64;
    let l2f = l2 as f64;
    let expo = -(2.0 * bf * bf + bf * (m1 - m2 - 2.0 * l2f) + m2 * l2f) / k;
    let log = C64::from(factorial(l2) * q_factorial(l2 - b, k) * q_factorial(b, k)).ln() - l2f * C64::from(-PI).ln()
        + mu * z * bf / k
        + expo * (-z / k).ln()
        + selberg_a(l2 - b, m1, mu, k)?.log_value
        + selberg_a(b, C64::from(m2), mu, k)?.log_value;
    Ok(log.exp())
}

/// Leading term of `J_ab` as `Re(mu-slot) -> -inf`, on the loop-side tuple.
pub fn j_asymptotic(pd: &Params, a: usize, b: usize) -> Result<C64> {
    check_pair(pd, a, b)?;
    if a != b {
        return Ok(C64::new(0.0, 0.0));
    }
    let p = dual_params(pd);
    let k = p.kappa();
    let (l1, l2, m2) = (p.l1(), p.l2() as f64, p.m2());
    let m2f = m2 as f64;
    // the loop side carries (e^mu, z); mu is recovered with arg e^mu in (0, 2 pi)
    let (z, mu) = (pd.mu(), ArgRange::ZeroTwoPi.log(pd.z()));
    let bf = b as f64;
    let e1 = -(2.0 * bf * bf + bf * (l1 - l2 - 2.0 * m2f) + m2f * l2) / k;
    let e2 = -(2.0 * bf * bf + bf * (l1 - l2 - 2.0 * m2f) + m2f * (m2f - l1 - 1.0)) / k;
    let log = (factorial(m2 - b) * factorial(b)).ln()
        + C64::new(0.0, PI * (m2f - bf) * (2.0 * bf - l2) / k)
        + mu * bf * (z + l1 - 2.0 * m2f + bf) / k
        + e1 * (1.0 - mu.exp()).ln()
        + e2 * (-z).ln()
        + selberg_b(m2 - b, l1, k)?.log_value
        + selberg_b(b, C64::from(l2), k)?.log_value;
    Ok(log.exp())
}

/// Closed form of the one-dimensional `I_00` with `m2 = l2 = 1` through the
/// Gauss series: with `alpha = -m1/kappa`, `beta = -(z + m1)/kappa` and
/// `gamma = (1 - z - m1)/kappa`,
/// `I_00 = -2i e^{-(mu - pi i) m1/kappa} Gamma(alpha) Gamma(beta)/Gamma(gamma) 2F1(alpha, beta; gamma; e^mu)`.
pub fn gauss_i00(p: &Params) -> Result<C64> {
    if p.m2() != 1 || p.l2() != 1 {
        return Err(Error::InvalidParams("the Gauss form needs m2 = l2 = 1".into()));
    }
    let (k, z, m1, mu) = (p.kappa(), p.z(), p.m1(), p.mu());
    let alpha = -m1 / k;
    let beta = -(z + m1) / k;
    let gamma = (1.0 - z - m1) / k;
    let pref = C64::new(0.0, -2.0) * (-(mu - C64::new(0.0, PI)) * m1 / k).exp();
    Ok(pref * gamma_ratio(&[alpha, beta], &[gamma])? * hyp2f1(alpha, beta, gamma, mu.exp())?)
}
