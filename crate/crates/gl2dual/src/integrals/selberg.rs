//! Selberg-type integrals `A_l(mu; m)` and `B_m(l)`: closed forms in log space
//! and direct numerical evaluation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::barnes::{integrate_lines, LinePlan};
use super::loops::{integrate_loops, LoopProblem, LoopWeight, PowerFactor};
use crate::contour::loops_b;
use crate::error::{Error, Result};
use crate::integrand::{GammaTerm, Multiplier, TermIntegrand};
use crate::quad::{IntegralResult, QuadConfig};
use crate::special::{log_gamma, ArgRange};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelbergClosedForm {
    pub log_value: C64,
    pub branch_note: String,
}

impl SelbergClosedForm {
    pub fn value(&self) -> C64 {
        self.log_value.exp()
    }
}

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

/// Closed form of `A_l(mu; m)`, with `arg(1 - e^mu)` principal.
pub fn selberg_a(l: usize, m: C64, mu: C64, kappa: f64) -> Result<SelbergClosedForm> {
    if !(mu.im > 0.0 && mu.im < 2.0 * PI) {
        return Err(Error::Region(format!("Im mu = {} is not in (0, 2 pi)", mu.im)));
    }
    let one_minus = 1.0 - mu.exp();
    if one_minus.im == 0.0 && one_minus.re <= 0.0 {
        return Err(Error::Region("1 - e^mu lies on the negative real axis".into()));
    }
    let lf = l as f64;
    let mut acc = lf * (2.0 * PI * i()).ln()
        + (mu - PI * i()) * (lf - 1.0 - 2.0 * m) * lf / (2.0 * kappa)
        + lf * (m - lf + 1.0) / kappa * one_minus.ln();
    for j in 0..l {
        let jf = j as f64;
        acc += log_gamma(C64::from(1.0 + (jf + 1.0) / kappa))? - log_gamma(C64::from(1.0 + 1.0 / kappa))?
            + log_gamma((jf - m) / kappa)?;
    }
    Ok(SelbergClosedForm { log_value: acc, branch_note: "arg(1 - e^mu) in (-pi, pi)".into() })
}

/// Closed form of `B_m(l)`.
pub fn selberg_b(m: usize, l: C64, kappa: f64) -> Result<SelbergClosedForm> {
    let mf = m as f64;
    let mut acc = mf * (-2.0 * PI * i()).ln() + mf * (mf - 1.0 - l) / kappa * kappa.ln();
    for j in 0..m {
        let jf = j as f64;
        acc += log_gamma(C64::from(1.0 - 1.0 / kappa))?
            - log_gamma(1.0 + (l - jf) / kappa)?
            - log_gamma(C64::from(1.0 - (jf + 1.0) / kappa))?;
    }
    Ok(SelbergClosedForm {
        log_value: acc,
        branch_note: "arg(-s_u) = 0 and arg(s_u - s_v) = 0 where all s_u < 0".into(),
    })
}

/// The integrand of `A_l` in term-wise form.
pub fn selberg_a_terms(l: usize, m: C64, mu: C64, kappa: f64) -> TermIntegrand {
    let unit = |u: usize, c: f64| {
        let mut v = vec![0.0; l];
        v[u] = c;
        v
    };
    let mut terms = Vec::new();
    for u in 0..l {
        terms.push(GammaTerm::num(unit(u, 1.0), C64::new(0.0, 0.0)));
        terms.push(GammaTerm::num(unit(u, -1.0), -m / kappa));
    }
    for u in 0..l {
        for v in 0..l {
            if u != v {
                let mut c = vec![0.0; l];
                c[u] = 1.0;
                c[v] = -1.0;
                terms.push(GammaTerm::num(c, C64::from(1.0 / kappa)));
            }
        }
    }
    TermIntegrand {
        l,
        terms,
        lin: mu - PI * i(),
        log_const: C64::new(0.0, 0.0),
        multiplier: Multiplier::ReciprocalPairs,
    }
}

/// `A_l(mu; m)` by quadrature over the lines `Re s_u = -Re m/(2 kappa)`.
/// For `l >= 2` this requires `Re m < 0`.
pub fn selberg_a_numeric(l: usize, m: C64, mu: C64, kappa: f64, cfg: &QuadConfig) -> Result<IntegralResult> {
    if !(mu.im > 0.0 && mu.im < 2.0 * PI) {
        return Err(Error::Region(format!("Im mu = {} is not in (0, 2 pi)", mu.im)));
    }
    if l >= 2 && m.re >= 0.0 {
        return Err(Error::Region("numeric A_l with l >= 2 needs Re m < 0".into()));
    }
    let ti = selberg_a_terms(l, m, mu, kappa);
    let rate = mu.im.min(2.0 * PI - mu.im);
    let plan = LinePlan {
        x: vec![-m.re / (2.0 * kappa); l],
        y0: vec![-m.im / (2.0 * kappa); l],
        half: 4.0 / rate + (m.im / kappa).abs(),
    };
    let r = integrate_lines(&ti, &plan, cfg)?;
    Ok(r.component(0))
}

/// `B_m(l)` by quadrature over nested loops around the origin.
pub fn selberg_b_numeric(m: usize, l: C64, kappa: f64, cfg: &QuadConfig) -> Result<IntegralResult> {
    let reach = kappa * ((1e3 / cfg.rel_tol).ln() + 8.0 + (1.0 + l.re.abs() / kappa) * 4.0);
    let contour = loops_b(m, reach)?;
    let prob = LoopProblem {
        single: vec![PowerFactor {
            c1: C64::new(-1.0, 0.0),
            c0: C64::new(0.0, 0.0),
            exponent: -1.0 - l / kappa,
            range: ArgRange::Principal,
        }],
        pair_exponent: C64::from(2.0 / kappa),
        lin: C64::from(-1.0 / kappa),
        weight: LoopWeight::One,
        contour,
    };
    Ok(integrate_loops(&prob, cfg)?.component(0))
}
