//! Iterated integration of gamma-product integrands over vertical lines.
//!
//! Variable `v` runs over `Re t_v = x_v`. Poles of gamma factors whose last
//! variable is `v` and which sit on the wrong side of that line are picked up
//! as residues; the remaining variables are then integrated with the pole
//! factor removed. This realizes a contour that separates every left family
//! from every right family, even when families of later variables move with
//! the earlier ones.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::integrand::TermIntegrand;
use crate::quad::{integrate_real_line, QuadConfig, VecIntegral};

/// A pole closer than this to its line (in real part) is refused.
pub const LINE_CLEARANCE: f64 = 1e-6;
/// Two poles closer than this count as a coincidence (double pole).
pub const COINCIDENCE: f64 = 1e-9;

/// Line placement for every variable.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePlan {
    /// Real parts of the lines.
    pub x: Vec<f64>,
    /// Imaginary centers of the first integration chunk.
    pub y0: Vec<f64>,
    /// Half-width of the first chunk.
    pub half: f64,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Distance of `w` to the nearest nonpositive integer, or `None` when `w` is
/// clearly away from the poles of the gamma function.
fn pole_gap(w: C64) -> Option<f64> {
    if w.re > 0.5 {
        return None;
    }
    let n = w.re.round();
    Some(C64::new(w.re - n, w.im).norm())
}

struct Engine<'a> {
    ti: &'a TermIntegrand,
    plan: &'a LinePlan,
}

impl Engine<'_> {
    fn level(&self, v: usize, fixed: &[C64], skip: &[bool], extra: C64, cfg: &QuadConfig) -> Result<VecIntegral> {
        let dim = self.ti.dim();
        if v == self.ti.l {
            let vals = self.ti.eval_skipping(fixed, skip)?;
            let f = extra.exp();
            let mut out = VecIntegral::zeros(dim);
            for k in 0..dim {
                out.values[k] = vals[k] * f;
                out.abs[k] = out.values[k].norm();
            }
            out.n_evals = 1;
            return Ok(out);
        }
        let x = self.plan.x[v];
        let mut total = VecIntegral::zeros(dim);
        for (i, term) in self.ti.terms.iter().enumerate() {
            if skip[i] || !term.numerator || term.top_var() != Some(v) {
                continue;
            }
            let alpha = term.coef[v];
            let mut probe = fixed.to_vec();
            probe.push(C64::new(0.0, 0.0));
            probe.resize(self.ti.l, C64::new(0.0, 0.0));
            let rest = term.arg(&probe);
            let left = alpha > 0.0;
            for n in 0usize.. {
                let pole = (-(n as f64) - rest) / alpha;
                if (pole.re - x).abs() < LINE_CLEARANCE {
                    return Err(Error::PoleProximity(format!("pole {pole} of variable {v} lies on Re t = {x}")));
                }
                let wrong = if left { pole.re > x } else { pole.re < x };
                if !wrong {
                    break;
                }
                let mut at = fixed.to_vec();
                at.push(pole);
                let mut sub_skip = skip.to_vec();
                sub_skip[i] = true;
                if !self.pole_is_simple(&at, v, &sub_skip, pole)? {
                    continue;
                }
                // Res Gamma(alpha t + c) at alpha t + c = -n is (-1)^n / (n! alpha)
                let sign = if n % 2 == 1 { PI } else { 0.0 };
                let log_res = C64::new(-ln_factorial(n) - alpha.abs().ln(), sign + if alpha < 0.0 { PI } else { 0.0 });
                let sub = self.level(v + 1, &at, &sub_skip, extra + log_res, cfg)?;
                let weight = C64::new(0.0, if left { 2.0 * PI } else { -2.0 * PI });
                total.add_scaled(&sub, weight);
            }
        }
        let inner = cfg.inner();
        let line = integrate_real_line(
            dim,
            self.plan.y0[v],
            self.plan.half,
            |y| {
                let mut at = fixed.to_vec();
                at.push(C64::new(x, y));
                let sub = self.level(v + 1, &at, skip, extra, &inner)?;
                Ok(sub.values.iter().map(|s| s * C64::new(0.0, 1.0)).collect())
            },
            cfg,
        )?;
        total.add_scaled(&line, C64::new(1.0, 0.0));
        Ok(total)
    }

    /// After fixing `t_v` at a pole, the remaining fully determined factors
    /// must neither add another pole nor a zero.
    fn pole_is_simple(&self, at: &[C64], v: usize, skip: &[bool], pole: C64) -> Result<bool> {
        let mut probe = at.to_vec();
        probe.resize(self.ti.l, C64::new(0.0, 0.0));
        let (mut poles, mut zeros) = (0, 0);
        for (j, term) in self.ti.terms.iter().enumerate() {
            if skip[j] || term.top_var().is_some_and(|u| u > v) {
                continue;
            }
            if let Some(gap) = pole_gap(term.arg(&probe)) {
                if gap < COINCIDENCE {
                    if term.numerator {
                        poles += 1;
                    } else {
                        zeros += 1;
                    }
                }
            }
        }
        if poles > zeros || (poles > 0 && poles == zeros) {
            return Err(Error::Pinch(format!("pole families coincide at t_{} = {pole}", v + 1)));
        }
        Ok(zeros == 0)
    }
}

/// Integrates `ti` over the lines of `plan`, adding wrong-side residues.
pub fn integrate_lines(ti: &TermIntegrand, plan: &LinePlan, cfg: &QuadConfig) -> Result<VecIntegral> {
    cfg.validate()?;
    if plan.x.len() != ti.l || plan.y0.len() != ti.l {
        return Err(Error::InvalidParams("line plan does not match the number of variables".into()));
    }
    let engine = Engine { ti, plan };
    engine.level(0, &[], &vec![false; ti.terms.len()], C64::new(0.0, 0.0), cfg)
}
