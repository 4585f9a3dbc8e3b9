//! Iterated integration of power-product integrands over nested loops with
//! continuous branch tracking.
//!
//! The integrand is
//! `exp(lin * sum t) * prod_u prod_k (c1_k t_u + c0_k)^{e_k} * prod_{u<v} (t_u - t_v)^{pair} * weight(t)`.
//! Each variable starts at its anchor with prescribed arguments. While `t_v`
//! moves, the engine also follows `t_v - a_w` for every later anchor `a_w`,
//! which fixes the starting logarithm of `t_v - t_w` for the inner sweeps.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::contour::{Contour, PathSegment};
use crate::error::{Error, Result};
use crate::integrand::g_vector;
use crate::quad::{integrate_adaptive, PathIntegrand, QuadConfig, VecIntegral};
use crate::special::{ArgRange, BranchState};

/// A single-variable factor `(c1 t + c0)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFactor {
    pub c1: C64,
    pub c0: C64,
    pub exponent: C64,
    /// Argument range at the anchor.
    pub range: ArgRange,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoopWeight {
    /// `g_{l-a,a}(t, z)` for `a = 0..=amax`.
    G { z: C64, amax: usize },
    One,
}

impl LoopWeight {
    fn dim(&self) -> usize {
        match self {
            LoopWeight::G { amax, .. } => amax + 1,
            LoopWeight::One => 1,
        }
    }

    fn eval(&self, t: &[C64]) -> Result<Vec<C64>> {
        match self {
            LoopWeight::G { z, amax } => g_vector(t, *z, *amax),
            LoopWeight::One => Ok(vec![C64::new(1.0, 0.0)]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopProblem {
    pub single: Vec<PowerFactor>,
    pub pair_exponent: C64,
    pub lin: C64,
    pub weight: LoopWeight,
    pub contour: Contour,
}

/// Bisection depth allowed when a continuation step turns a factor too far.
const MAX_SPLIT: usize = 40;

#[derive(Clone)]
struct Tracked {
    s: f64,
    branch: BranchState,
}

/// Context of one level: outer points and the logs they fixed.
struct Level<'a> {
    prob: &'a LoopProblem,
    v: usize,
    fixed: &'a [C64],
    /// `tracks[u][w]` is the log of `t_u - a_w` for `u < v < =w`.
    tracks: &'a [Vec<C64>],
    acc: C64,
    cfg: QuadConfig,
}

impl Level<'_> {
    fn l(&self) -> usize {
        self.prob.contour.dim()
    }

    /// Tracked factor values at `t`: singles, pairs with outer variables,
    /// then offsets to later anchors.
    fn values(&self, t: C64) -> Vec<C64> {
        let anchors = self.prob.contour.anchors();
        let mut out: Vec<C64> = self.prob.single.iter().map(|f| f.c1 * t + f.c0).collect();
        out.extend(self.fixed.iter().map(|tu| tu - t));
        out.extend(anchors[self.v + 1..].iter().map(|a| t - a));
        out
    }

    fn initial(&self) -> Result<BranchState> {
        let v = self.v;
        let anchors = self.prob.contour.anchors();
        let a = anchors[v];
        let values = self.values(a);
        let ranges = vec![ArgRange::ZeroTwoPi; values.len()];
        let mut st = BranchState::new(&values, &ranges, 0.0)?;
        // singles use their own ranges; pairs continue the outer tracks
        let ns = self.prob.single.len();
        let mut logs: Vec<C64> = self.prob.single.iter().zip(&values).map(|(f, &w)| f.range.log(w)).collect();
        for u in 0..v {
            logs.push(self.tracks[u][v]);
        }
        logs.extend(values[ns + v..].iter().map(|&w| ArgRange::ZeroTwoPi.log(w)));
        st = BranchState::with_logs(st, logs)?;
        Ok(st)
    }

    fn log_factor(&self, branch: &BranchState, t: C64) -> C64 {
        let logs = branch.logs();
        let ns = self.prob.single.len();
        let mut acc = self.acc + self.prob.lin * t;
        for (f, lg) in self.prob.single.iter().zip(logs) {
            acc += f.exponent * lg;
        }
        for lg in &logs[ns..ns + self.v] {
            acc += self.prob.pair_exponent * lg;
        }
        acc
    }

    fn integrate(&self) -> Result<VecIntegral> {
        let dim = self.prob.weight.dim();
        let mut total = VecIntegral::zeros(dim);
        let path = &self.prob.contour.vars[self.v];
        for leg in &path.legs {
            let mut branch = self.initial()?;
            for seg in &leg.segments {
                let f = SegmentIntegrand { level: self, seg, sign: leg.sign };
                let entry = Tracked { s: 0.0, branch: branch.clone() };
                let part = integrate_adaptive(&f, 0.0, 1.0, entry.clone(), &self.cfg)?;
                total.add_scaled(&part, C64::new(1.0, 0.0));
                branch = f.advance(&entry, 1.0)?.branch;
            }
        }
        Ok(total)
    }
}

struct SegmentIntegrand<'a> {
    level: &'a Level<'a>,
    seg: &'a PathSegment,
    sign: f64,
}

impl SegmentIntegrand<'_> {
    fn step(&self, state: &Tracked, to: f64, depth: usize) -> Result<Tracked> {
        let values = self.level.values(self.seg.point(to));
        let mut next = state.branch.clone();
        let mut ok = true;
        for (k, &w) in values.iter().enumerate() {
            match next.update(k, w) {
                Ok(()) => {}
                Err(Error::StepTooLarge { .. }) if depth < MAX_SPLIT => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            next.set_param(to);
            return Ok(Tracked { s: to, branch: next });
        }
        let mid = 0.5 * (state.s + to);
        let half = self.step(state, mid, depth + 1)?;
        self.step(&half, to, depth + 1)
    }

    fn value(&self, state: &Tracked) -> Result<Vec<C64>> {
        let lv = self.level;
        let t = self.seg.point(state.s);
        let scale = self.seg.deriv(state.s) * self.sign;
        let log = lv.log_factor(&state.branch, t);
        let mut point = lv.fixed.to_vec();
        point.push(t);
        if lv.v + 1 == lv.l() {
            let f = log.exp() * scale;
            return Ok(lv.prob.weight.eval(&point)?.into_iter().map(|w| w * f).collect());
        }
        // hand the offsets t_v - a_w to the inner levels
        let ns = lv.prob.single.len();
        let mut tracks = lv.tracks.to_vec();
        let mut row = vec![C64::new(0.0, 0.0); lv.l()];
        for (j, lg) in state.branch.logs()[ns + lv.v..].iter().enumerate() {
            row[lv.v + 1 + j] = *lg;
        }
        tracks.push(row);
        let inner = Level { prob: lv.prob, v: lv.v + 1, fixed: &point, tracks: &tracks, acc: log, cfg: lv.cfg.inner() };
        let sub = inner.integrate()?;
        Ok(sub.values.into_iter().map(|w| w * scale).collect())
    }
}

impl PathIntegrand for SegmentIntegrand<'_> {
    type State = Tracked;

    fn dim(&self) -> usize {
        self.level.prob.weight.dim()
    }

    fn advance(&self, state: &Tracked, to: f64) -> Result<Tracked> {
        self.step(state, to, 0)
    }

    fn eval(&self, state: &Tracked, out: &mut [C64]) -> Result<()> {
        out.copy_from_slice(&self.value(state)?);
        Ok(())
    }

    fn eval_nodes(&self, entry: &Tracked, taus: &[f64]) -> Result<Vec<Vec<C64>>> {
        // continuation is sequential, evaluation is not
        let mut s = entry.clone();
        let mut states = Vec::with_capacity(taus.len());
        for &t in taus {
            s = self.advance(&s, t)?;
            states.push(s.clone());
        }
        states.par_iter().map(|st| self.value(st)).collect()
    }
}

/// Integrates a loop problem; a zero-dimensional contour gives `weight(())`.
pub fn integrate_loops(prob: &LoopProblem, cfg: &QuadConfig) -> Result<VecIntegral> {
    cfg.validate()?;
    let l = prob.contour.dim();
    if l == 0 {
        let vals = prob.weight.eval(&[])?;
        let mut out = VecIntegral::zeros(vals.len());
        out.abs = vals.iter().map(|v| v.norm()).collect();
        out.values = vals;
        return Ok(out);
    }
    let top = Level { prob, v: 0, fixed: &[], tracks: &[], acc: C64::new(0.0, 0.0), cfg: *cfg };
    top.integrate()
}
