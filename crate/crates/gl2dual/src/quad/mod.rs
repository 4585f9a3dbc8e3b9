//! Adaptive Gauss-Kronrod quadrature for vector-valued integrands along
//! parametrized paths.
//!
//! An integrand may carry a path state (for instance the continuous logarithms
//! of its multivalued factors). Every panel stores the state at its left end and
//! evaluates its nodes in increasing parameter order, so branch tracking never
//! jumps. Panels are summed in parameter order, which makes results independent
//! of how node evaluations are scheduled.

mod rules;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Kronrod nodes per panel: one of 15, 21, 31, 41, 51, 61.
    pub nodes_per_panel: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { rel_tol: 1e-8, abs_tol: 0.0, max_subdivisions: 4000, nodes_per_panel: 21 }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadConfig { rel_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.abs_tol < 0.0 || !self.abs_tol.is_finite() {
            return Err(Error::InvalidParams(format!(
                "tolerances must be positive, got rel={} abs={}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParams("max_subdivisions must be positive".into()));
        }
        rule(self.nodes_per_panel).map(|_| ())
    }

    /// Configuration for an integral nested inside another one: inner errors
    /// act as noise on the outer integrand, so they are kept ten times smaller.
    pub fn inner(&self) -> Self {
        QuadConfig { rel_tol: self.rel_tol * 0.1, abs_tol: self.abs_tol * 0.1, ..*self }
    }
}

/// Scalar result of an integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: C64,
    pub err_estimate: f64,
    pub n_evals: usize,
    pub warnings: Vec<String>,
}

impl IntegralResult {
    pub fn exact(value: C64) -> Self {
        IntegralResult { value, err_estimate: 0.0, n_evals: 0, warnings: Vec::new() }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value.norm() > 0.0 {
            self.err_estimate / self.value.norm()
        } else {
            self.err_estimate
        }
    }
}

/// Vector-valued result: one entry per integrand component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VecIntegral {
    pub values: Vec<C64>,
    pub errs: Vec<f64>,
    /// Integral of the absolute value, used for truncation and roundoff bounds.
    pub abs: Vec<f64>,
    pub n_evals: usize,
    pub warnings: Vec<String>,
}

impl VecIntegral {
    pub fn zeros(dim: usize) -> Self {
        VecIntegral {
            values: vec![C64::new(0.0, 0.0); dim],
            errs: vec![0.0; dim],
            abs: vec![0.0; dim],
            n_evals: 0,
            warnings: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Adds `scale * other`, combining errors linearly.
    pub fn add_scaled(&mut self, other: &VecIntegral, scale: C64) {
        let s = scale.norm();
        for k in 0..self.dim() {
            self.values[k] += other.values[k] * scale;
            self.errs[k] += other.errs[k] * s;
            self.abs[k] += other.abs[k] * s;
        }
        self.n_evals += other.n_evals;
        self.warnings.extend(other.warnings.iter().cloned());
    }

    pub fn component(&self, k: usize) -> IntegralResult {
        IntegralResult {
            value: self.values[k],
            err_estimate: self.errs[k],
            n_evals: self.n_evals,
            warnings: self.warnings.clone(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Relative floor, with respect to the largest component, below which a
/// component is considered converged.
const COMPONENT_FLOOR: f64 = 1e-8;

fn tolerances(values: &[C64], cfg: &QuadConfig) -> Vec<f64> {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    values
        .iter()
        .map(|v| cfg.abs_tol.max(cfg.rel_tol * v.norm()).max(cfg.rel_tol * COMPONENT_FLOOR * max))
        .collect()
}

struct Rule {
    x: &'static [f64],
    wk: &'static [f64],
    wg: &'static [f64],
}

fn rule(n: usize) -> Result<Rule> {
    use rules::*;
    let r = match n {
        15 => Rule { x: &GK15_X, wk: &GK15_WK, wg: &GK15_WG },
        21 => Rule { x: &GK21_X, wk: &GK21_WK, wg: &GK21_WG },
        31 => Rule { x: &GK31_X, wk: &GK31_WK, wg: &GK31_WG },
        41 => Rule { x: &GK41_X, wk: &GK41_WK, wg: &GK41_WG },
        51 => Rule { x: &GK51_X, wk: &GK51_WK, wg: &GK51_WG },
        61 => Rule { x: &GK61_X, wk: &GK61_WK, wg: &GK61_WG },
        _ => {
            return Err(Error::InvalidParams(format!(
                "nodes_per_panel must be one of 15, 21, 31, 41, 51, 61, got {n}"
            )))
        }
    };
    Ok(r)
}

/// An integrand along a parameter interval. `eval` must return the integrand
/// already multiplied by the derivative of the path.
pub trait PathIntegrand: Sync {
    type State: Clone + Send + Sync;

    fn dim(&self) -> usize;

    /// Continues `state` to parameter `to`. Callers only ever move forward
    /// from a panel's left end.
    fn advance(&self, state: &Self::State, to: f64) -> Result<Self::State>;

    fn eval(&self, state: &Self::State, out: &mut [C64]) -> Result<()>;

    /// Evaluates at increasing parameters `taus`, starting from `entry`.
    fn eval_nodes(&self, entry: &Self::State, taus: &[f64]) -> Result<Vec<Vec<C64>>> {
        let mut s = entry.clone();
        let mut rows = Vec::with_capacity(taus.len());
        for &t in taus {
            s = self.advance(&s, t)?;
            let mut out = vec![C64::new(0.0, 0.0); self.dim()];
            self.eval(&s, &mut out)?;
            rows.push(out);
        }
        Ok(rows)
    }
}

/// A stateless integrand given by a closure of the parameter. Nodes of a
/// panel are evaluated in parallel.
pub struct FnIntegrand<F> {
    dim: usize,
    f: F,
}

impl<F> FnIntegrand<F>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnIntegrand { dim, f }
    }
}

impl<F> PathIntegrand for FnIntegrand<F>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync,
{
    type State = f64;

    fn dim(&self) -> usize {
        self.dim
    }

    fn advance(&self, _state: &f64, to: f64) -> Result<f64> {
        Ok(to)
    }

    fn eval(&self, state: &f64, out: &mut [C64]) -> Result<()> {
        let v = (self.f)(*state)?;
        out.copy_from_slice(&v);
        Ok(())
    }

    fn eval_nodes(&self, _entry: &f64, taus: &[f64]) -> Result<Vec<Vec<C64>>> {
        taus.par_iter().map(|&t| (self.f)(t)).collect()
    }
}

struct Panel<S> {
    lo: f64,
    hi: f64,
    entry: S,
    value: Vec<C64>,
    err: Vec<f64>,
    abs: Vec<f64>,
}

fn eval_panel<I: PathIntegrand>(f: &I, r: &Rule, lo: f64, hi: f64, entry: I::State) -> Result<Panel<I::State>> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let taus: Vec<f64> = r.x.iter().map(|x| mid + half * x).collect();
    let rows = f.eval_nodes(&entry, &taus)?;
    let dim = f.dim();
    let mut value = vec![C64::new(0.0, 0.0); dim];
    let mut gauss = vec![C64::new(0.0, 0.0); dim];
    let mut abs = vec![0.0; dim];
    for (i, row) in rows.iter().enumerate() {
        for k in 0..dim {
            if !row[k].re.is_finite() || !row[k].im.is_finite() {
                return Err(Error::Quadrature(format!("non-finite integrand at parameter {}", taus[i])));
            }
            value[k] += row[k] * (r.wk[i] * half);
            gauss[k] += row[k] * (r.wg[i] * half);
            abs[k] += row[k].norm() * r.wk[i] * half.abs();
        }
    }
    let mut err = vec![0.0; dim];
    for k in 0..dim {
        let mean = value[k] / (2.0 * half);
        let resasc: f64 =
            rows.iter().enumerate().map(|(i, row)| r.wk[i] * (row[k] - mean).norm()).sum::<f64>() * half.abs();
        let mut e = (value[k] - gauss[k]).norm();
        if resasc > 0.0 && e > 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        err[k] = e.max(50.0 * f64::EPSILON * abs[k]);
    }
    Ok(Panel { lo, hi, entry, value, err, abs })
}

fn collect<S>(panels: &[Panel<S>], dim: usize, n_evals: usize, warnings: Vec<String>) -> VecIntegral {
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&a, &b| panels[a].lo.total_cmp(&panels[b].lo));
    let mut out = VecIntegral::zeros(dim);
    for &i in &order {
        for k in 0..dim {
            out.values[k] += panels[i].value[k];
            out.errs[k] += panels[i].err[k];
            out.abs[k] += panels[i].abs[k];
        }
    }
    out.n_evals = n_evals;
    out.warnings = warnings;
    out
}

/// Adaptive integration of a stateful integrand over `[lo, hi]`, starting
/// from `entry`, the state at `lo`.
pub fn integrate_adaptive<I: PathIntegrand>(
    f: &I,
    lo: f64,
    hi: f64,
    entry: I::State,
    cfg: &QuadConfig,
) -> Result<VecIntegral> {
    let r = rule(cfg.nodes_per_panel)?;
    let dim = f.dim();
    let mut panels = vec![eval_panel(f, &r, lo, hi, entry)?];
    let mut n_evals = r.x.len();
    let mut warnings = Vec::new();
    loop {
        let total = collect(&panels, dim, 0, Vec::new());
        let tol = tolerances(&total.values, cfg);
        let converged = (0..dim).all(|k| total.errs[k] <= tol[k].max(100.0 * f64::EPSILON * total.abs[k]));
        if converged {
            break;
        }
        if panels.len() >= cfg.max_subdivisions {
            let worst = (0..dim).map(|k| total.errs[k] / tol[k].max(1e-300)).fold(0.0, f64::max);
            warnings.push(format!(
                "tolerance not met after {} panels (error/tolerance = {worst:.2e})",
                panels.len()
            ));
            break;
        }
        let score = |p: &Panel<I::State>| (0..dim).map(|k| p.err[k] / tol[k].max(1e-300)).fold(0.0, f64::max);
        let worst = (0..panels.len())
            .max_by(|&a, &b| score(&panels[a]).total_cmp(&score(&panels[b])))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            warnings.push(format!("panel width underflow near parameter {mid}"));
            panels.push(p);
            break;
        }
        let entry_mid = f.advance(&p.entry, mid)?;
        let left = eval_panel(f, &r, p.lo, mid, p.entry)?;
        let right = eval_panel(f, &r, mid, p.hi, entry_mid)?;
        n_evals += 2 * r.x.len();
        panels.push(left);
        panels.push(right);
    }
    Ok(collect(&panels, dim, n_evals, warnings))
}

/// Adaptive integration of a closure over `[lo, hi]`.
pub fn integrate_fn<F>(dim: usize, lo: f64, hi: f64, f: F, cfg: &QuadConfig) -> Result<VecIntegral>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync,
{
    integrate_adaptive(&FnIntegrand::new(dim, f), lo, hi, lo, cfg)
}

/// Fraction of the running tolerance a truncated tail chunk may contribute.
const TAIL_FRACTION: f64 = 1e-3;
const MAX_CHUNKS: usize = 60;

/// Integrates `f(y)` over the whole real line, where `f` decays at both ends.
///
/// A central chunk `[center - half, center + half]` is integrated first; then
/// chunks of doubling width are added on each side until a chunk's absolute
/// integral drops below a small fraction of the running tolerance.
pub fn integrate_real_line<F>(dim: usize, center: f64, half: f64, f: F, cfg: &QuadConfig) -> Result<VecIntegral>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync,
{
    let g = FnIntegrand::new(dim, &f);
    let mut total = integrate_adaptive(&g, center - half, center + half, center - half, cfg)?;
    for side in [1.0, -1.0] {
        let mut inner = half;
        let mut width = half;
        let mut done = false;
        for _ in 0..MAX_CHUNKS {
            let (a, b) = if side > 0.0 {
                (center + inner, center + inner + width)
            } else {
                (center - inner - width, center - inner)
            };
            let chunk = integrate_adaptive(&g, a, b, a, cfg)?;
            let tol = tolerances(&total.values, cfg);
            total.add_scaled(&chunk, C64::new(1.0, 0.0));
            if (0..dim).all(|k| chunk.abs[k] <= TAIL_FRACTION * tol[k]) {
                done = true;
                break;
            }
            inner += width;
            width *= 2.0;
        }
        if !done {
            return Err(Error::Quadrature(format!(
                "integrand does not decay along the line (reached |y - center| = {inner:.3e})"
            )));
        }
    }
    Ok(total)
}
