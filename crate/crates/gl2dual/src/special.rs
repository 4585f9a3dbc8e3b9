//! Complex special functions and continuous branch tracking.
//!
//! All gamma products of the library are accumulated in log space through
//! [`log_gamma`]. Multivalued power functions on loop contours are realized by
//! [`BranchState`], which carries a continuous logarithm for every factor.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `B_{2k} / (2k (2k-1))` for k = 1..=9.
const STIRLING: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
];

/// Below this modulus the argument is shifted upward before Stirling's series.
const STIRLING_RADIUS: f64 = 16.0;

fn stirling(x: C64) -> C64 {
    let inv = x.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

fn log_gamma_right(w: C64) -> C64 {
    let mut x = w;
    let mut prod = C64::new(1.0, 0.0);
    let mut arg = 0.0;
    while x.norm() < STIRLING_RADIUS {
        prod *= x;
        arg += x.arg();
        x += 1.0;
    }
    if prod == C64::new(1.0, 0.0) {
        return stirling(x);
    }
    // Each shift factor has positive real part, so summing their arguments
    // keeps the result on the principal branch.
    stirling(x) - C64::new(prod.norm().ln(), arg)
}

/// `log(sin(pi w))` computed without overflow for large `|Im w|`. The result is
/// correct modulo `2 pi i`.
pub fn log_sin_pi(w: C64) -> C64 {
    let n = w.re.round();
    let r = C64::new(w.re - n, w.im);
    let parity = if (n as i64).rem_euclid(2) == 1 { C64::new(0.0, PI) } else { C64::new(0.0, 0.0) };
    let core = if r.im.abs() < 8.0 {
        (r * PI).sin().ln()
    } else if r.im > 0.0 {
        // sin(pi r) = e^{-i pi r} (e^{2 i pi r} - 1) / (2i)
        let e = (C64::new(0.0, TAU) * r).exp();
        C64::new(0.0, -PI) * r + (e - 1.0).ln() - C64::new(LN_2, PI / 2.0)
    } else {
        let e = (C64::new(0.0, -TAU) * r).exp();
        C64::new(0.0, PI) * r + (1.0 - e).ln() - C64::new(LN_2, PI / 2.0)
    };
    core + parity
}

/// Principal-branch `log Gamma(w)`.
///
/// For `Re w >= 1/2` the result is the principal branch; the reflection used
/// for `Re w < 1/2` fixes it only modulo `2 pi i`, which is all the
/// exponentiated products of this crate need.
pub fn log_gamma(w: C64) -> Result<C64> {
    if w.im == 0.0 && w.re <= 0.0 && w.re == w.re.round() {
        return Err(Error::GammaPole(w));
    }
    if w.re >= 0.5 {
        Ok(log_gamma_right(w))
    } else {
        Ok(C64::from(LN_PI) - log_sin_pi(w) - log_gamma_right(1.0 - w))
    }
}

/// `Gamma(w)` itself; overflows for large arguments, prefer [`log_gamma`].
pub fn gamma(w: C64) -> Result<C64> {
    Ok(log_gamma(w)?.exp())
}

/// `prod Gamma(nums) / prod Gamma(dens)`, accumulated in log space.
pub fn gamma_ratio(nums: &[C64], dens: &[C64]) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for &w in nums {
        acc += log_gamma(w)?;
    }
    for &w in dens {
        acc -= log_gamma(w)?;
    }
    Ok(acc.exp())
}

/// `Gamma(x / kappa)`.
pub fn gamma_k(x: C64, kappa: f64) -> Result<C64> {
    gamma(x / kappa)
}

/// `sin(pi x / kappa)`.
pub fn sin_k(x: C64, kappa: f64) -> C64 {
    (x * (PI / kappa)).sin()
}

/// `exp(pi i x / kappa)`.
pub fn exp_k(x: C64, kappa: f64) -> C64 {
    (C64::new(0.0, PI / kappa) * x).exp()
}

/// Trigonometric factorial `[n]! = prod_{j=1}^n sin(pi j/kappa)/sin(pi/kappa)`.
///
/// Each factor is evaluated as the Chebyshev polynomial `U_{j-1}(cos(pi/kappa))`,
/// so `kappa = 1/k` gives the limiting values instead of `0/0`.
pub fn q_factorial(n: usize, kappa: f64) -> f64 {
    let c2 = 2.0 * (PI / kappa).cos();
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= cur;
        (prev, cur) = (cur, c2 * cur - prev);
    }
    acc
}

/// Gauss series `2F1(alpha, beta; gamma; x)` for `|x| < 1`.
pub fn hyp2f1(alpha: C64, beta: C64, gamma: C64, x: C64) -> Result<C64> {
    if x.norm() >= 1.0 {
        return Err(Error::Divergent(x.norm()));
    }
    if gamma.im == 0.0 && gamma.re <= 0.0 && gamma.re == gamma.re.round() {
        return Err(Error::GammaPole(gamma));
    }
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0;
    for k in 0..200_000u32 {
        let kf = f64::from(k);
        term *= (alpha + kf) * (beta + kf) / ((gamma + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if term == C64::new(0.0, 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::Divergent(x.norm()))
}

/// Where the argument of a multivalued factor is placed at the anchor point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgRange {
    /// `(-pi, pi]`.
    Principal,
    /// `[0, 2 pi)`.
    ZeroTwoPi,
}

impl ArgRange {
    pub fn log(self, w: C64) -> C64 {
        let a = w.arg();
        let a = match self {
            ArgRange::Principal => a,
            ArgRange::ZeroTwoPi => {
                if a < 0.0 {
                    a + TAU
                } else {
                    a
                }
            }
        };
        C64::new(w.norm().ln(), a)
    }
}

/// Largest argument change accepted in a single continuation step.
pub const MAX_STEP_ARG: f64 = PI / 2.0;

/// Continuous logarithms of a list of factors along a path.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    values: Vec<C64>,
    logs: Vec<C64>,
    param: f64,
}

impl BranchState {
    /// Starts tracking at a base point with the given argument ranges.
    pub fn new(values: &[C64], ranges: &[ArgRange], param: f64) -> Result<Self> {
        assert_eq!(values.len(), ranges.len());
        let mut logs = Vec::with_capacity(values.len());
        for (k, (&v, &r)) in values.iter().zip(ranges).enumerate() {
            if v == C64::new(0.0, 0.0) {
                return Err(Error::ZeroFactor(k));
            }
            logs.push(r.log(v));
        }
        Ok(BranchState { values: values.to_vec(), logs, param })
    }

    /// Replaces the logarithms, which must be logarithms of the tracked values.
    pub fn with_logs(mut self, logs: Vec<C64>) -> Result<Self> {
        if logs.len() != self.values.len() {
            return Err(Error::InvalidParams("log count does not match the tracked factors".into()));
        }
        for (&v, lg) in self.values.iter().zip(&logs) {
            if (lg.exp() - v).norm() > 1e-9 * v.norm() {
                return Err(Error::BranchMismatch { expected: v, found: lg.exp() });
            }
        }
        self.logs = logs;
        Ok(self)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn logs(&self) -> &[C64] {
        &self.logs
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    /// Updates factor `k` to `v`, keeping its logarithm continuous.
    pub fn update(&mut self, k: usize, v: C64) -> Result<()> {
        if v == C64::new(0.0, 0.0) {
            return Err(Error::ZeroFactor(k));
        }
        let darg = (v / self.values[k]).arg();
        if darg.abs() > MAX_STEP_ARG {
            return Err(Error::StepTooLarge { factor: k, darg });
        }
        let target = self.logs[k].im + darg;
        let a = v.arg();
        let im = a + TAU * ((target - a) / TAU).round();
        self.logs[k] = C64::new(v.norm().ln(), im);
        self.values[k] = v;
        Ok(())
    }

    pub fn set_param(&mut self, param: f64) {
        self.param = param;
    }
}

/// Advances every tracked factor to new values at path parameter `next_param`.
pub fn branch_advance(state: &BranchState, next_param: f64, values: &[C64]) -> Result<BranchState> {
    let mut s = state.clone();
    for (k, &v) in values.iter().enumerate() {
        s.update(k, v)?;
    }
    s.param = next_param;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn classical_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half - c(0.5 * PI.ln(), 0.0)).norm() < 1e-14);
        // Gamma(10) = 9!
        assert!(rel(gamma(c(10.0, 0.0)).unwrap(), c(362_880.0, 0.0)) < 1e-14);
        // Gamma(-1/2) = -2 sqrt(pi)
        assert!(rel(gamma(c(-0.5, 0.0)).unwrap(), c(-2.0 * PI.sqrt(), 0.0)) < 1e-14);
    }

    #[test]
    fn q_factorial_against_sines() {
        for &k in &[1.37, 2.5, 3.1, 7.0] {
            let q = PI / k;
            let mut direct = 1.0;
            for n in 0..6 {
                if n > 0 {
                    direct *= (n as f64 * q).sin() / q.sin();
                }
                assert!((q_factorial(n, k) - direct).abs() < 1e-12 * direct.abs().max(1.0));
            }
        }
        // large kappa recovers the ordinary factorial
        assert!((q_factorial(4, 1e7) - 24.0).abs() < 1e-9);
        // kappa = 1: [n] = (-1)^(n-1) n
        assert!((q_factorial(3, 1.0) + 6.0).abs() < 1e-12);
        assert!((q_factorial(2, 1.0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn poles_are_rejected() {
        assert_eq!(log_gamma(c(0.0, 0.0)), Err(Error::GammaPole(c(0.0, 0.0))));
        assert!(log_gamma(c(-3.0, 0.0)).is_err());
        assert!(gamma_ratio(&[], &[c(-2.0, 0.0)]).is_err());
    }

    #[test]
    fn recurrence_modulo_two_pi_i() {
        let w = c(2.5, 1.0);
        let d = log_gamma(w + 1.0).unwrap() - log_gamma(w).unwrap() - w.ln();
        assert!(d.re.abs() < 1e-14);
        assert!((d.im / TAU - (d.im / TAU).round()).abs() < 1e-14);
    }

    #[test]
    fn stirling_branch_is_principal_on_the_right() {
        // Im log Gamma is continuous along a vertical line with Re w >= 1/2.
        let mut prev = log_gamma(c(0.7, 0.0)).unwrap();
        for k in 1..400 {
            let cur = log_gamma(c(0.7, 0.1 * k as f64)).unwrap();
            assert!((cur.im - prev.im).abs() < 1.0);
            prev = cur;
        }
    }

    #[test]
    fn ratio_examples() {
        assert!(rel(gamma_ratio(&[c(4.2, 0.0)], &[c(3.2, 0.0)]).unwrap(), c(3.2, 0.0)) < 1e-14);
        let w = c(0.3, 0.2);
        let lhs = gamma_ratio(&[w, 1.0 - w], &[]).unwrap();
        assert!(rel(lhs, PI / (w * PI).sin()) < 1e-13);
        assert_eq!(gamma_ratio(&[], &[]).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn large_arguments_stay_finite_in_log_space() {
        let a = log_gamma(c(-80.3, 0.5)).unwrap();
        let b = log_gamma(c(81.3, -0.5)).unwrap();
        // reflection: log G(w) + log G(1-w) = log pi - log sin(pi w)
        let s = a + b - (C64::from(LN_PI) - log_sin_pi(c(-80.3, 0.5)));
        assert!(s.re.abs() < 1e-12);
        let far = log_gamma(c(0.6, 300.0)).unwrap();
        assert!(far.re.is_finite());
    }

    #[test]
    fn log_sin_matches_direct_sine() {
        for &w in &[c(0.3, 0.1), c(-7.4, 2.0), c(12.2, -9.0), c(0.1, 12.0), c(-3.6, -15.0)] {
            let d = log_sin_pi(w).exp();
            assert!(rel(d, (w * PI).sin()) < 1e-12, "{w}");
        }
    }

    #[test]
    fn gauss_series() {
        assert_eq!(hyp2f1(c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let v = hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((v - c(2.0 * LN_2, 0.0)).norm() < 1e-14);
        let a = c(0.7, 0.0);
        let v = hyp2f1(a, c(1.3, 0.4), c(1.3, 0.4), c(0.3, 0.0)).unwrap();
        assert!(rel(v, (1.0 - c(0.3, 0.0)).powc(-a)) < 1e-14);
        assert!(hyp2f1(a, a, a, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn winding_once_around_a_point() {
        let center = c(1.0, 0.0);
        let mut st = BranchState::new(&[c(0.5, 0.0)], &[ArgRange::Principal], 0.0).unwrap();
        let n = 64;
        for k in 1..=n {
            let th = TAU * k as f64 / n as f64;
            let t = center + 0.5 * c(th.cos(), th.sin());
            st = branch_advance(&st, th, &[t - center]).unwrap();
        }
        assert!((st.logs()[0].im - TAU).abs() < 1e-12);
        assert!((st.logs()[0].exp() - st.values()[0]).norm() < 1e-15);
    }

    #[test]
    fn straight_segment_has_no_offset() {
        let a = c(-2.0, 1.0);
        let b = c(3.0, 0.5);
        let mut st = BranchState::new(&[a], &[ArgRange::Principal], 0.0).unwrap();
        for k in 1..=50 {
            let s = k as f64 / 50.0;
            st = branch_advance(&st, s, &[a + (b - a) * s]).unwrap();
        }
        assert!((st.logs()[0] - b.ln()).norm() < 1e-14);
    }

    #[test]
    fn oversized_step_is_refused() {
        let st = BranchState::new(&[c(1.0, 0.0)], &[ArgRange::Principal], 0.0).unwrap();
        assert!(matches!(
            branch_advance(&st, 1.0, &[c(-1.0, 0.1)]),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn anchor_conventions() {
        assert_eq!(ArgRange::Principal.log(c(0.5, 0.0)).im, 0.0);
        assert!((ArgRange::ZeroTwoPi.log(c(-2.5, 0.0)).im - PI).abs() < 1e-15);
        assert_eq!(ArgRange::ZeroTwoPi.log(c(0.2, 0.0)).im, 0.0);
        assert!((ArgRange::ZeroTwoPi.log(c(0.0, -1.0)).im - 1.5 * PI).abs() < 1e-15);
    }
}
