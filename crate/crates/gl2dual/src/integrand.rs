//! Integrand builders for both integral families.
//!
//! The Barnes-side integrand exists in two equivalent forms: `phi_q * w_rat *
//! w_trig` and `xi * p_poly * big_p`. Quadrature uses a third, per-term form
//! ([`barnes_terms`]): one permutation term of the trigonometric factor, with
//! its sines absorbed into reciprocal gammas. It integrates to `1/l!` of the
//! symmetric integral and carries each pole family in a single gamma factor.

use std::f64::consts::PI;

use itertools::Itertools;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::special::{exp_k, log_gamma, log_sin_pi, sin_k, ArgRange, BranchState};

/// Largest number of variables for explicit symmetrization.
pub const SYM_CAP: usize = 6;

/// Distance of a gamma argument to a pole that counts as "on the pole".
pub const POLE_PROXIMITY: f64 = 1e-8;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Sign of a permutation given as images of `0..n`.
pub fn perm_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_cap(l: usize) -> Result<()> {
    if l > SYM_CAP {
        Err(Error::Cap(format!("symmetrization over {l} variables exceeds the cap {SYM_CAP}")))
    } else {
        Ok(())
    }
}

/// `Sym f(t) = sum over permutations s of f(t_s1, ..., t_sl)`.
pub fn sym<F>(t: &[C64], f: F) -> Result<C64>
where
    F: Fn(&[C64]) -> C64,
{
    check_cap(t.len())?;
    let mut buf = t.to_vec();
    let mut acc = zero();
    for p in (0..t.len()).permutations(t.len()) {
        for (k, &i) in p.iter().enumerate() {
            buf[k] = t[i];
        }
        acc += f(&buf);
    }
    Ok(acc)
}

fn pole_distance(w: C64) -> f64 {
    if w.re > 0.5 {
        f64::INFINITY
    } else {
        C64::new(w.re - w.re.round(), w.im).norm()
    }
}

/// `log Gamma(w)` for a numerator factor, refusing arguments near a pole.
fn log_gamma_num(w: C64) -> Result<C64> {
    if pole_distance(w) < POLE_PROXIMITY {
        return Err(Error::PoleProximity(format!("gamma argument {w} is within {POLE_PROXIMITY:e} of a pole")));
    }
    log_gamma(w)
}

/// `-log Gamma(w)` for a denominator factor; `None` when `1/Gamma` vanishes.
fn log_rgamma(w: C64) -> Result<Option<C64>> {
    match log_gamma(w) {
        Ok(v) => Ok(Some(-v)),
        Err(Error::GammaPole(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The q-master function `Phi_l(t, z, mu; m1, m2)`.
pub fn phi_q(t: &[C64], p: &Params) -> Result<C64> {
    let k = p.kappa();
    let (z, m1, m2) = (p.z(), p.m1(), C64::from(p.m2() as f64));
    let mut acc = p.mu() * t.iter().sum::<C64>() / k;
    for &tu in t {
        acc += log_gamma_num(tu / k)? + log_gamma_num((tu - z) / k)?;
        for w in [(tu + m1) / k, (tu - z + m2) / k] {
            match log_rgamma(w)? {
                Some(v) => acc += v,
                None => return Ok(zero()),
            }
        }
    }
    for u in 0..t.len() {
        for v in u + 1..t.len() {
            let d = t[u] - t[v];
            acc += log_gamma_num((d + 1.0) / k)?;
            match log_rgamma((d - 1.0) / k)? {
                Some(x) => acc += x,
                None => return Ok(zero()),
            }
        }
    }
    Ok(acc.exp())
}

/// The rational weight function `w_{l-a,a}(t, z; m1, m2)`.
pub fn w_rat(t: &[C64], p: &Params, a: usize) -> Result<C64> {
    let l = t.len();
    if a > l {
        return Err(Error::InvalidParams(format!("weight index a={a} exceeds l={l}")));
    }
    let (z, m1, m2) = (p.z(), p.m1(), C64::from(p.m2() as f64));
    let mut pre = one();
    for u in 0..l {
        pre /= t[u] + m1;
        for v in u + 1..l {
            pre *= (t[u] - t[v]) / (t[u] - t[v] - 1.0);
        }
    }
    let s = sym(t, |s| {
        let mut f = one();
        for &su in &s[l - a..] {
            f *= su / (su - z + m2);
        }
        for u in 0..l {
            for v in u + 1..l {
                f *= (s[u] - s[v] - 1.0) / (s[u] - s[v]);
            }
        }
        f
    })?;
    Ok(pre * s)
}

/// The trigonometric weight function `W_{l-b,b}(t, z; m1, m2)`.
pub fn w_trig(t: &[C64], p: &Params, b: usize) -> Result<C64> {
    let l = t.len();
    if b > l {
        return Err(Error::InvalidParams(format!("weight index b={b} exceeds l={l}")));
    }
    let k = p.kappa();
    let (z, m1, m2) = (p.z(), p.m1(), C64::from(p.m2() as f64));
    let mut pre = one();
    for u in 0..l {
        pre *= exp_k(-t[u], k) / sin_k(t[u] + m1, k);
        for v in u + 1..l {
            pre *= sin_k(t[u] - t[v], k) / sin_k(t[u] - t[v] - 1.0, k);
        }
    }
    let s = sym(t, |s| {
        let mut f = one();
        for &su in &s[l - b..] {
            f *= exp_k(z, k) * sin_k(su, k) / sin_k(su - z + m2, k);
        }
        for u in 0..l {
            for v in u + 1..l {
                f *= sin_k(s[u] - s[v] - 1.0, k) / sin_k(s[u] - s[v], k);
            }
        }
        f
    })?;
    Ok(pre * s)
}

/// `Xi_l(t, z, mu; m1, m2)`, the factor carrying all poles.
pub fn xi(t: &[C64], p: &Params) -> Result<C64> {
    let l = t.len();
    let k = p.kappa();
    let (z, m1, m2) = (p.z(), p.m1(), C64::from(p.m2() as f64));
    let n = (l * (l + 3) / 2) as f64;
    let mut acc = -n * C64::new((PI * k).ln(), PI) + (p.mu() - C64::new(0.0, PI)) * t.iter().sum::<C64>() / k;
    for &tu in t {
        acc += log_gamma_num(tu / k)?
            + log_gamma_num(-(m1 + tu) / k)?
            + log_gamma_num((tu - z) / k)?
            + log_gamma_num((z - m2 - tu) / k)?;
    }
    let mut extra = one();
    for u in 0..l {
        for v in u + 1..l {
            let d = t[u] - t[v];
            acc += log_gamma_num((d + 1.0) / k)? + log_gamma_num((1.0 - d) / k)?;
            extra *= d * sin_k(d, k);
        }
    }
    Ok(acc.exp() * extra)
}

/// The polynomial `p_{l-a,a}(t, z; m2)`, evaluated through its defining
/// symmetrization (requires distinct `t`).
pub fn p_poly(t: &[C64], z: C64, m2: f64, a: usize) -> Result<C64> {
    let l = t.len();
    if a > l {
        return Err(Error::InvalidParams(format!("weight index a={a} exceeds l={l}")));
    }
    sym(t, |s| {
        let mut f = one();
        for &su in &s[..l - a] {
            f *= su - z + m2;
        }
        for &su in &s[l - a..] {
            f *= su;
        }
        for u in 0..l {
            for v in u + 1..l {
                f *= (s[u] - s[v] - 1.0) / (s[u] - s[v]);
            }
        }
        f
    })
}

/// `prod_{u<v} (t_u - t_v) * p_{l-a,a}(t)` for `a = 0..=amax`, computed without
/// division as the alternating sum over permutations. Valid on the diagonals.
pub fn pair_times_p(t: &[C64], z: C64, m2: f64, amax: usize) -> Result<Vec<C64>> {
    let l = t.len();
    check_cap(l)?;
    let amax = amax.min(l);
    let mut out = vec![zero(); amax + 1];
    let mut s = t.to_vec();
    for perm in (0..l).permutations(l) {
        for (k, &i) in perm.iter().enumerate() {
            s[k] = t[i];
        }
        let mut pair = one();
        for u in 0..l {
            for v in u + 1..l {
                pair *= s[u] - s[v] - 1.0;
            }
        }
        let sign = perm_sign(&perm);
        for (a, slot) in out.iter_mut().enumerate() {
            let mut f = pair * sign;
            for &su in &s[..l - a] {
                f *= su - z + m2;
            }
            for &su in &s[l - a..] {
                f *= su;
            }
            *slot += f;
        }
    }
    Ok(out)
}

/// The trigonometric polynomial `P_{l-b,b}(t, z; m2)`.
pub fn big_p(t: &[C64], z: C64, m2: f64, kappa: f64, b: usize) -> Result<C64> {
    let l = t.len();
    if b > l {
        return Err(Error::InvalidParams(format!("weight index b={b} exceeds l={l}")));
    }
    let s = sym(t, |s| {
        let mut f = one();
        for &su in &s[..l - b] {
            f *= sin_k(su - z + m2, kappa);
        }
        for &su in &s[l - b..] {
            f *= sin_k(su, kappa);
        }
        for u in 0..l {
            for v in u + 1..l {
                f *= sin_k(s[u] - s[v] - 1.0, kappa) / sin_k(s[u] - s[v], kappa);
            }
        }
        f
    })?;
    Ok(exp_k(z * b as f64, kappa) * s)
}

/// `Xi * p_{l-a,a} * P_{l-b,b}`.
pub fn xi_pp(t: &[C64], p: &Params, a: usize, b: usize) -> Result<C64> {
    let m2 = p.m2() as f64;
    Ok(xi(t, p)? * p_poly(t, p.z(), m2, a)? * big_p(t, p.z(), m2, p.kappa(), b)?)
}

/// A factor `Gamma(sum_u coef[u] t_u + c0)` (numerator) or its reciprocal.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaTerm {
    pub numerator: bool,
    pub coef: Vec<f64>,
    pub c0: C64,
}

impl GammaTerm {
    pub fn num(coef: Vec<f64>, c0: C64) -> Self {
        GammaTerm { numerator: true, coef, c0 }
    }

    pub fn den(coef: Vec<f64>, c0: C64) -> Self {
        GammaTerm { numerator: false, coef, c0 }
    }

    pub fn arg(&self, t: &[C64]) -> C64 {
        self.coef.iter().zip(t).fold(self.c0, |acc, (c, x)| acc + x * *c)
    }

    /// Highest variable index with a nonzero coefficient.
    pub fn top_var(&self) -> Option<usize> {
        self.coef.iter().rposition(|c| *c != 0.0)
    }
}

/// Entire multiplier of a term-wise integrand.
#[derive(Clone, Debug, PartialEq)]
pub enum Multiplier {
    /// `prod_{u<v}(t_u - t_v) * p_{l-a,a}` for `a = 0..=amax`.
    PairP { z: C64, m2: f64, amax: usize },
    /// `prod_{u<v} 1/(Gamma(x) Gamma(-x))` with `x = t_u - t_v`.
    ReciprocalPairs,
    One,
}

impl Multiplier {
    pub fn dim(&self) -> usize {
        match self {
            Multiplier::PairP { amax, .. } => amax + 1,
            _ => 1,
        }
    }

    /// Returns `(log scale, values)`; the multiplier equals `exp(scale) * values`.
    pub fn eval(&self, t: &[C64]) -> Result<(C64, Vec<C64>)> {
        match self {
            Multiplier::PairP { z, m2, amax } => {
                let mut v = pair_times_p(t, *z, *m2, *amax)?;
                v.resize(amax + 1, zero());
                Ok((zero(), v))
            }
            Multiplier::ReciprocalPairs => {
                let mut acc = zero();
                for u in 0..t.len() {
                    for v in u + 1..t.len() {
                        let x = t[u] - t[v];
                        if x == zero() {
                            return Ok((zero(), vec![zero()]));
                        }
                        // 1/(Gamma(x) Gamma(-x)) = -x sin(pi x) / pi
                        acc += (-x / PI).ln() + log_sin_pi(x);
                    }
                }
                Ok((acc, vec![one()]))
            }
            Multiplier::One => Ok((zero(), vec![one()])),
        }
    }
}

/// An integrand `exp(log_const + lin * sum t) * prod Gamma-terms * multiplier`.
#[derive(Clone, Debug, PartialEq)]
pub struct TermIntegrand {
    pub l: usize,
    pub terms: Vec<GammaTerm>,
    pub lin: C64,
    pub log_const: C64,
    pub multiplier: Multiplier,
}

impl TermIntegrand {
    pub fn dim(&self) -> usize {
        self.multiplier.dim()
    }

    /// Value at `t`, skipping the terms flagged in `skip`.
    pub fn eval_skipping(&self, t: &[C64], skip: &[bool]) -> Result<Vec<C64>> {
        let mut acc = self.log_const + self.lin * t.iter().sum::<C64>();
        for (term, &s) in self.terms.iter().zip(skip) {
            if s {
                continue;
            }
            let w = term.arg(t);
            if term.numerator {
                acc += log_gamma_num(w)?;
            } else {
                match log_rgamma(w)? {
                    Some(v) => acc += v,
                    None => return Ok(vec![zero(); self.dim()]),
                }
            }
        }
        let (scale, vals) = self.multiplier.eval(t)?;
        let f = (acc + scale).exp();
        Ok(vals.into_iter().map(|v| v * f).collect())
    }

    pub fn eval(&self, t: &[C64]) -> Result<Vec<C64>> {
        self.eval_skipping(t, &vec![false; self.terms.len()])
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Per-term form of the Barnes-side integrand for index `b`, as a vector over
/// `a = 0..=amax`.
///
/// Variables `0..l-b` carry `sin_k(t - z + m2)` and lose the poles
/// `z - m2 + kappa N`; variables `l-b..l` carry `sin(pi t/kappa)` and lose the
/// poles `-kappa N`. Each pair keeps only `t_v = t_u + 1 + kappa N`. The result is
/// scaled by `l!`, so integrating it gives the symmetric integral.
pub fn barnes_terms(p: &Params, b: usize, amax: usize) -> Result<TermIntegrand> {
    let l = p.l2();
    if b > l {
        return Err(Error::InvalidParams(format!("b={b} exceeds l2={l}")));
    }
    let k = p.kappa();
    let (z, m1, m2) = (p.z(), p.m1(), C64::from(p.m2() as f64));
    let unit = |u: usize, c: f64| {
        let mut v = vec![0.0; l];
        v[u] = c;
        v
    };
    let mut terms = Vec::new();
    for u in 0..l {
        terms.push(GammaTerm::num(unit(u, -1.0 / k), -m1 / k));
        terms.push(GammaTerm::num(unit(u, 1.0 / k), -z / k));
        if u < l - b {
            terms.push(GammaTerm::num(unit(u, 1.0 / k), zero()));
            terms.push(GammaTerm::den(unit(u, 1.0 / k), (k - z + m2) / k));
        } else {
            terms.push(GammaTerm::den(unit(u, -1.0 / k), one()));
            terms.push(GammaTerm::num(unit(u, -1.0 / k), (z - m2) / k));
        }
    }
    for u in 0..l {
        for v in u + 1..l {
            let mut c = vec![0.0; l];
            c[u] = 1.0 / k;
            c[v] = -1.0 / k;
            terms.push(GammaTerm::num(c.clone(), C64::from(1.0 / k)));
            terms.push(GammaTerm::den(c, C64::from((k - 1.0) / k)));
        }
    }
    let n = l * (l + 3) / 2;
    let pairs = l * (l.saturating_sub(1)) / 2;
    let odd = (n + (l - b) + pairs) % 2 == 1;
    let log_const = -(n as f64) * (PI * k).ln()
        + ((l + pairs) as f64) * PI.ln()
        + C64::new(0.0, if odd { PI } else { 0.0 })
        + C64::new(0.0, PI * b as f64 / k) * z
        + ln_factorial(l);
    Ok(TermIntegrand {
        l,
        terms,
        lin: (p.mu() - C64::new(0.0, PI)) / k,
        log_const,
        multiplier: Multiplier::PairP { z, m2: p.m2() as f64, amax },
    })
}

/// Exponents of the master function `Psi_l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiExponents {
    pub t: C64,
    pub one_minus_t: C64,
    pub z_minus_t: C64,
    pub pair: C64,
}

/// Exponents of `Psi_l(t, z, mu; m1, m2)` with `l = p.l2()` variables.
pub fn psi_exponents(p: &Params) -> PsiExponents {
    let k = p.kappa();
    let l = p.l2() as f64;
    PsiExponents {
        t: (p.mu() + p.m1() + p.m2() as f64 - 2.0 * l + 1.0) / k,
        one_minus_t: -p.m1() / k,
        z_minus_t: C64::from(-(p.m2() as f64) / k),
        pair: C64::from(2.0 / k),
    }
}

/// Factor values of `Psi` in tracking order: `t_u, 1 - t_u, z - t_u` for each
/// `u`, then `t_u - t_v` for `u < v`.
pub fn psi_factor_values(t: &[C64], z: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(3 * t.len() + t.len() * t.len() / 2);
    for &tu in t {
        out.extend([tu, 1.0 - tu, z - tu]);
    }
    for u in 0..t.len() {
        for v in u + 1..t.len() {
            out.push(t[u] - t[v]);
        }
    }
    out
}

/// Side of the duality, for branch initialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Barnes side: only principal logarithms are involved.
    Barnes,
    /// Loop side with `b` variables on loops around `z`.
    Loops { b: usize },
}

fn on_unit_interval(w: C64) -> bool {
    w.im.abs() <= 1e-12 * w.norm().max(1.0) && w.re > 0.0 && w.re < 1.0
}

/// Logarithms of the master-function factors at a base point.
///
/// On the loop side the base point must be the anchor: `t_u / z` in `(0,1)`
/// for the first `b` variables and `t_u` in `(0,1)` for the rest. The arguments
/// then satisfy `arg t in [0, 2 pi)`, `arg(1 - t)` principal, `arg(z - t) in
/// (0, 2 pi)` and `arg(t_u - t_v) in [0, 2 pi)`.
pub fn init_branch(t: &[C64], z: C64, side: Side) -> Result<BranchState> {
    let values = psi_factor_values(t, z);
    let ranges: Vec<ArgRange> = match side {
        Side::Barnes => vec![ArgRange::Principal; values.len()],
        Side::Loops { b } => {
            if b > t.len() {
                return Err(Error::Anchor(format!("b={b} exceeds the number of variables {}", t.len())));
            }
            for (u, &tu) in t.iter().enumerate() {
                let ok = if u < b { z != zero() && on_unit_interval(tu / z) } else { on_unit_interval(tu) };
                if !ok {
                    return Err(Error::Anchor(format!("t_{} = {tu} is not on the anchor segment", u + 1)));
                }
                let zt = z - tu;
                if zt.im == 0.0 && zt.re > 0.0 {
                    return Err(Error::Anchor(format!("z - t_{} = {zt} has argument 0", u + 1)));
                }
            }
            let mut r = Vec::with_capacity(values.len());
            for _ in t {
                r.extend([ArgRange::ZeroTwoPi, ArgRange::Principal, ArgRange::ZeroTwoPi]);
            }
            r.resize(values.len(), ArgRange::ZeroTwoPi);
            r
        }
    };
    BranchState::new(&values, &ranges, 0.0)
}

/// The master function `Psi_l` from tracked logarithms.
pub fn psi_master(t: &[C64], p: &Params, branch: &BranchState) -> Result<C64> {
    let values = psi_factor_values(t, p.z());
    if values.len() != branch.values().len() {
        return Err(Error::InvalidParams("branch state tracks a different number of factors".into()));
    }
    for (v, s) in values.iter().zip(branch.values()) {
        if (v - s).norm() > 1e-12 * (1.0 + v.norm()) {
            return Err(Error::BranchMismatch { expected: *s, found: *v });
        }
    }
    let e = psi_exponents(p);
    let logs = branch.logs();
    let l = t.len();
    let mut acc = zero();
    for u in 0..l {
        acc += e.t * logs[3 * u] + e.one_minus_t * logs[3 * u + 1] + e.z_minus_t * logs[3 * u + 2];
    }
    for lg in &logs[3 * l..] {
        acc += e.pair * lg;
    }
    Ok(acc.exp())
}

/// The weight function `g_{l-a,a}(t, z)`.
pub fn g_weight(t: &[C64], z: C64, a: usize) -> Result<C64> {
    let l = t.len();
    if a > l {
        return Err(Error::InvalidParams(format!("weight index a={a} exceeds l={l}")));
    }
    sym(t, |s| {
        let mut f = one();
        for &su in &s[..l - a] {
            f /= 1.0 - su;
        }
        for &su in &s[l - a..] {
            f /= z - su;
        }
        f
    })
}

/// `g_{l-a,a}(t, z)` for `a = 0..=amax`, sharing the permutation loop.
pub fn g_vector(t: &[C64], z: C64, amax: usize) -> Result<Vec<C64>> {
    let l = t.len();
    check_cap(l)?;
    let amax = amax.min(l);
    let inv1: Vec<C64> = t.iter().map(|x| 1.0 / (1.0 - x)).collect();
    let invz: Vec<C64> = t.iter().map(|x| 1.0 / (z - x)).collect();
    let mut out = vec![zero(); amax + 1];
    for perm in (0..l).permutations(l) {
        for (a, slot) in out.iter_mut().enumerate() {
            let mut f = one();
            for &i in &perm[..l - a] {
                f *= inv1[i];
            }
            for &i in &perm[l - a..] {
                f *= invz[i];
            }
            *slot += f;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::special::branch_advance;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params() -> Params {
        make_params(c(-0.37, 0.21), 2, 2, 1.37, c(-0.8, 0.4), c(-0.3, 1.9)).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn sym_examples() {
        let t = [c(0.3, 0.1), c(-1.2, 0.5)];
        assert_eq!(sym(&t, |_| one()).unwrap(), c(2.0, 0.0));
        assert!((sym(&t, |s| s[0]).unwrap() - (t[0] + t[1])).norm() < 1e-15);
        assert_eq!(sym(&t, |s| s[0] - s[1]).unwrap(), zero());
        assert!(sym(&[zero(); 7], |_| one()).is_err());
    }

    #[test]
    fn one_variable_instances() {
        let p = params();
        let (m1, m2, z, k) = (p.m1(), 2.0, p.z(), p.kappa());
        let t = [c(0.41, -0.7)];
        let tt = t[0];
        assert!(close(w_rat(&t, &p, 0).unwrap(), 1.0 / (tt + m1), 1e-14));
        assert!(close(w_rat(&t, &p, 1).unwrap(), tt / ((tt + m1) * (tt - z + m2)), 1e-14));
        assert!(close(w_trig(&t, &p, 0).unwrap(), exp_k(-tt, k) / sin_k(tt + m1, k), 1e-14));
        let w1 = exp_k(-tt, k) * exp_k(z, k) * sin_k(tt, k) / (sin_k(tt + m1, k) * sin_k(tt - z + m2, k));
        assert!(close(w_trig(&t, &p, 1).unwrap(), w1, 1e-14));
        let phi = (p.mu() * tt / k).exp()
            * crate::special::gamma_ratio(&[tt / k, (tt - z) / k], &[(tt + m1) / k, (tt - z + m2) / k]).unwrap();
        assert!(close(phi_q(&t, &p).unwrap(), phi, 1e-12));
        assert!(close(g_weight(&t, z, 0).unwrap(), 1.0 / (1.0 - tt), 1e-15));
        assert!(close(g_weight(&t, z, 1).unwrap(), 1.0 / (z - tt), 1e-15));
    }

    #[test]
    fn empty_products() {
        let p = params();
        assert_eq!(phi_q(&[], &p).unwrap(), one());
        assert_eq!(w_rat(&[], &p, 0).unwrap(), one());
        assert_eq!(w_trig(&[], &p, 0).unwrap(), one());
        assert_eq!(xi_pp(&[], &p, 0, 0).unwrap(), one());
    }

    #[test]
    fn g_two_variables() {
        let t = [c(0.2, 0.3), c(-0.5, 0.1)];
        let z = c(-1.0, 0.7);
        let expect = 1.0 / ((1.0 - t[0]) * (z - t[1])) + 1.0 / ((1.0 - t[1]) * (z - t[0]));
        assert!(close(g_weight(&t, z, 1).unwrap(), expect, 1e-14));
        let v = g_vector(&t, z, 2).unwrap();
        for a in 0..=2 {
            assert!(close(v[a], g_weight(&t, z, a).unwrap(), 1e-14));
        }
    }

    #[test]
    fn factorization_identity_two_variables() {
        let p = params();
        let t = [c(0.31, 0.52), c(-0.44, -0.27)];
        for a in 0..=2 {
            for b in 0..=2 {
                let lhs = phi_q(&t, &p).unwrap() * w_rat(&t, &p, a).unwrap() * w_trig(&t, &p, b).unwrap();
                let rhs = xi_pp(&t, &p, a, b).unwrap();
                assert!(close(rhs, lhs, 1e-10), "a={a} b={b}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn pair_times_p_matches_division_form() {
        let t = [c(0.31, 0.52), c(-0.44, -0.27), c(1.1, 0.05)];
        let (z, m2) = (c(-0.8, 0.4), 2.0);
        let v = pair_times_p(&t, z, m2, 3).unwrap();
        let vdm = (t[0] - t[1]) * (t[0] - t[2]) * (t[1] - t[2]);
        for a in 0..=3 {
            assert!(close(v[a], vdm * p_poly(&t, z, m2, a).unwrap(), 1e-12));
        }
    }

    #[test]
    fn per_term_form_symmetrizes_to_full_integrand() {
        let p = params();
        let t = [c(0.31, 0.52), c(-0.44, -0.27)];
        for b in 0..=2 {
            let ti = barnes_terms(&p, b, 2).unwrap();
            let mut acc = vec![zero(); 3];
            for perm in [[0, 1], [1, 0]] {
                let s = [t[perm[0]], t[perm[1]]];
                let v = ti.eval(&s).unwrap();
                for a in 0..3 {
                    acc[a] += v[a];
                }
            }
            for a in 0..=2 {
                // barnes_terms carries the factor l! = 2
                let full = xi_pp(&t, &p, a, b).unwrap();
                assert!(close(acc[a] / 2.0, full, 1e-10), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn w_rat_a0_is_z_independent() {
        let p = params();
        let t = [c(0.31, 0.52), c(-0.44, -0.27)];
        let q = p.with_z(c(3.0, -2.0));
        assert!(close(w_rat(&t, &q, 0).unwrap(), w_rat(&t, &p, 0).unwrap(), 1e-13));
    }

    #[test]
    fn anchor_conventions() {
        let z = c(-2.0, 0.0);
        let st = init_branch(&[c(0.5, 0.0)], z, Side::Loops { b: 0 }).unwrap();
        assert_eq!(st.logs()[1].im, 0.0);
        assert!((st.logs()[2].im - PI).abs() < 1e-15);
        let st = init_branch(&[c(0.7, 0.0), c(0.5, 0.0)], c(-1.0, 1.0), Side::Loops { b: 0 }).unwrap();
        assert_eq!(st.logs()[6].im, 0.0);
        assert!(init_branch(&[c(1.5, 0.0)], z, Side::Loops { b: 0 }).is_err());
        assert!(init_branch(&[c(0.5, 0.1)], z, Side::Loops { b: 0 }).is_err());
        // t/z in (0,1) for a variable attached to z
        let z = c(-1.0, 1.0);
        let st = init_branch(&[z * 0.4], z, Side::Loops { b: 1 }).unwrap();
        assert!((st.logs()[0].im - 0.75 * PI).abs() < 1e-14);
    }

    #[test]
    fn zero_exponents_give_one() {
        // mu = 2l - 1 - m1 - m2 with m1 = m2 = 0 makes every exponent but the pair one vanish
        let p = make_params(zero(), 0, 1, 1.7, c(-1.0, 0.5), c(1.0, 0.0)).unwrap();
        let t = [c(0.4, 0.0)];
        let st = init_branch(&t, p.z(), Side::Loops { b: 0 }).unwrap();
        assert!((psi_master(&t, &p, &st).unwrap() - one()).norm() < 1e-15);
    }

    #[test]
    fn winding_around_one() {
        let p = make_params(c(-0.37, 0.2), 0, 1, 1.37, c(-1.0, 0.5), c(-3.0, 0.3)).unwrap();
        let t0 = c(0.6, 0.0);
        let mut st = init_branch(&[t0], p.z(), Side::Loops { b: 0 }).unwrap();
        let start = psi_master(&[t0], &p, &st).unwrap();
        let n = 200;
        for k in 1..=n {
            let th = PI + TAU * k as f64 / n as f64;
            let t = 1.0 + 0.4 * c(th.cos(), th.sin());
            st = branch_advance(&st, k as f64, &psi_factor_values(&[t], p.z())).unwrap();
        }
        let end = psi_master(&[t0], &p, &st).unwrap();
        let expect = (C64::new(0.0, -TAU) * p.m1() / p.kappa()).exp();
        assert!(close(end / start, expect, 1e-12));
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let p = params();
        let st = init_branch(&[c(0.5, 0.0)], p.z(), Side::Loops { b: 0 }).unwrap();
        let p1 = make_params(p.m1(), 2, 1, 1.37, p.z(), p.mu()).unwrap();
        assert!(matches!(psi_master(&[c(0.6, 0.0)], &p1, &st), Err(Error::BranchMismatch { .. })));
    }
}
