//! Integration paths: vertical Barnes lines, the nested loops of the
//! hypergeometric side, and the nested loops around the origin used by the
//! Selberg-type integral `B_m`.
//!
//! Every variable gets a [`VarPath`]: an anchor point (where branches are
//! fixed) and a list of legs leaving it. A leg's sign is `+1` when the path
//! orientation follows the leg away from the anchor and `-1` otherwise.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::integrand::{GammaTerm, TermIntegrand};
use crate::params::Params;

/// One smooth piece of a path, parametrized by `s` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PathSegment {
    /// Straight segment with uniform speed.
    Line { from: C64, to: C64 },
    /// Straight ray piece `center + dir * r0 (r1/r0)^s`, geometric in distance.
    Ray { center: C64, dir: C64, r0: f64, r1: f64 },
    /// Circular arc from angle `theta0` to `theta1`.
    Arc { center: C64, radius: f64, theta0: f64, theta1: f64 },
}

impl PathSegment {
    pub fn kind(&self) -> &'static str {
        match self {
            PathSegment::Line { .. } | PathSegment::Ray { .. } => "line",
            PathSegment::Arc { .. } => "arc",
        }
    }

    pub fn point(&self, s: f64) -> C64 {
        match *self {
            PathSegment::Line { from, to } => from + (to - from) * s,
            PathSegment::Ray { center, dir, r0, r1 } => center + dir * (r0 * (r1 / r0).powf(s)),
            PathSegment::Arc { center, radius, theta0, theta1 } => {
                let th = theta0 + (theta1 - theta0) * s;
                center + radius * C64::new(th.cos(), th.sin())
            }
        }
    }

    /// Derivative of [`PathSegment::point`] with respect to `s`.
    pub fn deriv(&self, s: f64) -> C64 {
        match *self {
            PathSegment::Line { from, to } => to - from,
            PathSegment::Ray { dir, r0, r1, .. } => dir * (r0 * (r1 / r0).powf(s) * (r1 / r0).ln()),
            PathSegment::Arc { radius, theta0, theta1, .. } => {
                let th = theta0 + (theta1 - theta0) * s;
                C64::new(0.0, radius * (theta1 - theta0)) * C64::new(th.cos(), th.sin())
            }
        }
    }

    pub fn sample(&self, n: usize) -> Vec<C64> {
        (0..=n).map(|i| self.point(i as f64 / n as f64)).collect()
    }
}

/// Consecutive segments leaving the anchor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Leg {
    pub sign: f64,
    pub segments: Vec<PathSegment>,
}

/// The path of one integration variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarPath {
    pub anchor: C64,
    pub legs: Vec<Leg>,
    /// For loops: the encircled point.
    pub center: Option<C64>,
    /// For loops: radius of the arc around the center.
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    Barnes,
    LoopsJ,
    LoopsB,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contour {
    pub family: Family,
    pub vars: Vec<VarPath>,
    /// Nominal distance from the anchor at which legs are cut.
    pub truncation_radius: f64,
    pub clearance: f64,
}

impl Contour {
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// Anchor points of all variables.
    pub fn anchors(&self) -> Vec<C64> {
        self.vars.iter().map(|v| v.anchor).collect()
    }

    /// JSON dump for plotting: one entry per segment.
    pub fn to_json(&self) -> Value {
        let mut segs = Vec::new();
        for (u, var) in self.vars.iter().enumerate() {
            for leg in &var.legs {
                for seg in &leg.segments {
                    let pts: Vec<[f64; 2]> = seg.sample(64).iter().map(|p| [p.re, p.im]).collect();
                    segs.push(json!({ "var": u, "kind": seg.kind(), "sign": leg.sign, "points": pts }));
                }
            }
        }
        json!({
            "family": format!("{:?}", self.family),
            "truncation_radius": self.truncation_radius,
            "segments": segs,
        })
    }

    /// Points sampled along every leg of variable `u`.
    pub fn sample_var(&self, u: usize, per_segment: usize) -> Vec<C64> {
        self.vars[u]
            .legs
            .iter()
            .flat_map(|leg| leg.segments.iter().flat_map(|s| s.sample(per_segment)))
            .collect()
    }

    /// Smallest distance from the sampled contour to `points` and between
    /// paths of different variables. Fails when below the clearance.
    pub fn audit(&self, points: &[C64]) -> Result<f64> {
        let samples: Vec<Vec<C64>> = (0..self.dim()).map(|u| self.sample_var(u, 96)).collect();
        let mut best = f64::INFINITY;
        for (u, s) in samples.iter().enumerate() {
            for q in s {
                for p in points {
                    best = best.min((q - p).norm());
                }
            }
            for other in &samples[u + 1..] {
                for q in s {
                    for r in other {
                        best = best.min((q - r).norm());
                    }
                }
            }
        }
        if best < self.clearance {
            return Err(Error::Contour(format!(
                "clearance audit failed: distance {best:.3e} below {:.3e}",
                self.clearance
            )));
        }
        Ok(best)
    }
}

/// Default clearance relative to `kappa`.
pub const CLEARANCE_FACTOR: f64 = 1e-3;

/// An arithmetic family of poles `start + step * N`, `N >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleFamily {
    pub label: String,
    pub start: C64,
    pub step: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PoleSide {
    Left,
    Right,
}

/// A pole lying on the wrong side of a line; its residue is added separately.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BypassedPole {
    pub var: usize,
    pub point: C64,
    pub family: String,
    pub side: PoleSide,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleReport {
    pub left_families: Vec<PoleFamily>,
    pub right_families: Vec<PoleFamily>,
    pub bypassed: Vec<BypassedPole>,
    /// Points where a left and a right family meet (informational).
    pub coincident: Vec<C64>,
}

fn wrong_side(fam: &PoleFamily, side: PoleSide, x: f64, var: usize, out: &mut Vec<BypassedPole>) {
    // Families move away from the line monotonically once past it.
    for n in 0..100_000 {
        let p = fam.start + fam.step * n as f64;
        let wrong = match side {
            PoleSide::Left => p.re > x,
            PoleSide::Right => p.re < x,
        };
        if !wrong {
            break;
        }
        out.push(BypassedPole { var, point: p, family: fam.label.clone(), side });
    }
}

/// Classifies the one-variable pole families `{-kappa N}`, `{z - kappa N}`
/// (left) and `{-m1 + kappa N}`, `{z - m2 + kappa N}` (right) against the line
/// `Re t = eps`. `m2` may be any complex number here.
pub fn classify_poles(m1: C64, m2: C64, z: C64, kappa: f64, eps: f64) -> Result<PoleReport> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParams(format!("kappa must be positive, got {kappa}")));
    }
    let k = C64::from(kappa);
    let left = vec![
        PoleFamily { label: "-kappa N".into(), start: C64::new(0.0, 0.0), step: -k },
        PoleFamily { label: "z - kappa N".into(), start: z, step: -k },
    ];
    let right = vec![
        PoleFamily { label: "-m1 + kappa N".into(), start: -m1, step: k },
        PoleFamily { label: "z - m2 + kappa N".into(), start: z - m2, step: k },
    ];
    let clearance = CLEARANCE_FACTOR * kappa;
    let mut bypassed = Vec::new();
    for f in &left {
        wrong_side(f, PoleSide::Left, eps, 0, &mut bypassed);
    }
    for f in &right {
        wrong_side(f, PoleSide::Right, eps, 0, &mut bypassed);
    }
    for bp in &bypassed {
        if (bp.point.re - eps).abs() < clearance && bp.point.im.is_finite() {
            return Err(Error::PoleProximity(format!("pole {} lies on the line Re t = {eps}", bp.point)));
        }
    }
    let mut coincident = Vec::new();
    for l in &left {
        for r in &right {
            // l.start - kappa M = r.start + kappa N  <=>  (l.start - r.start)/kappa in Z>=0
            let q = (l.start - r.start) / kappa;
            if q.im.abs() < clearance && (q.re - q.re.round()).abs() < clearance && q.re.round() >= 0.0 {
                let n = q.re.round() as usize;
                for j in 0..=n {
                    coincident.push(r.start + k * j as f64);
                }
            }
        }
    }
    Ok(PoleReport { left_families: left, right_families: right, bypassed, coincident })
}

/// Distance of `x` to the lattice `atoms + j + kappa N`.
fn lattice_distance(x: f64, atoms: &[f64], kappa: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &a in atoms {
        for j in -2..=2 {
            let y = (x - a - j as f64) / kappa;
            best = best.min((y - y.round()).abs() * kappa);
        }
    }
    best
}

fn best_in_window(lo: f64, width: f64, atoms: &[f64], kappa: f64) -> f64 {
    let n = 400;
    let mut best = (lo + 0.5 * width, -1.0);
    for i in 0..=n {
        let x = lo + width * (0.05 + 0.9 * i as f64 / n as f64);
        let d = lattice_distance(x, atoms, kappa);
        if d > best.1 + 1e-12 {
            best = (x, d);
        }
    }
    best.0
}

/// Real parts of the vertical lines for the per-term Barnes integrand with
/// index `b`: variables `0..l-b` sit right of `max(0, Re z - 1)`, variables
/// `l-b..l` right of `Re z - 1`, each inside a window of width `min(kappa, 1)`
/// and as far as possible from the lattice of pole real parts.
pub fn barnes_lines(p: &Params, b: usize) -> Vec<f64> {
    let l = p.l2();
    let k = p.kappa();
    let (z, m1, m2) = (p.z(), p.m1(), p.m2() as f64);
    let width = k.min(1.0);
    let base = [0.0, z.re, -m1.re, z.re - m2];
    let mut lines: Vec<f64> = Vec::with_capacity(l);
    for u in 0..l {
        let lo = if u < l - b { 0f64.max(z.re - 1.0) } else { z.re - 1.0 };
        let mut atoms = base.to_vec();
        for &x in &lines {
            atoms.push(x + 1.0);
            atoms.push(x - 1.0);
        }
        lines.push(best_in_window(lo, width, &atoms, k));
    }
    lines
}

/// Vertical decay rates of the Barnes integrand, `(upward, downward)`: it
/// behaves like `exp(-y Im mu / kappa)` for `y -> +inf` and like
/// `exp(-|y| (2 pi - Im mu) / kappa)` for `y -> -inf`, up to powers.
pub fn barnes_decay(p: &Params) -> (f64, f64) {
    let k = p.kappa();
    (p.mu().im / k, (2.0 * PI - p.mu().im) / k)
}

/// Vertical-line contour of the per-term Barnes integrand with index `b`,
/// with the report of poles whose residues are added to the line integrals.
pub fn barnes_contour(p: &Params, b: usize, tol: f64) -> Result<(Contour, PoleReport)> {
    if b > p.l2() {
        return Err(Error::InvalidParams(format!("b={b} exceeds l2={}", p.l2())));
    }
    let (up, down) = barnes_decay(p);
    if !(up > 0.0 && down > 0.0) {
        return Err(Error::Region(format!("Im mu = {} is not in (0, 2 pi)", p.mu().im)));
    }
    let lines = barnes_lines(p, b);
    let centers = barnes_centers(p, b);
    let spread = p.z().im.abs() + p.m1().im.abs();
    let trunc = (100.0 / tol).ln() / up.min(down) + spread;
    let vars = lines
        .iter()
        .zip(&centers)
        .map(|(&x, &y0)| {
            let anchor = C64::new(x, y0);
            VarPath {
                anchor,
                legs: vec![
                    Leg { sign: 1.0, segments: vec![PathSegment::Line { from: anchor, to: C64::new(x, y0 + trunc) }] },
                    Leg { sign: -1.0, segments: vec![PathSegment::Line { from: anchor, to: C64::new(x, y0 - trunc) }] },
                ],
                center: None,
                radius: 0.0,
            }
        })
        .collect();
    let ti = crate::integrand::barnes_terms(p, b, 0)?;
    let report = classify_terms(&ti, &lines)?;
    let contour = Contour { family: Family::Barnes, vars, truncation_radius: trunc, clearance: CLEARANCE_FACTOR * p.kappa() };
    Ok((contour, report))
}

/// Imaginary centers of the Barnes lines: `0` for variables paired with the
/// poles at the origin, `Im z` for those paired with `z`.
pub fn barnes_centers(p: &Params, b: usize) -> Vec<f64> {
    let l = p.l2();
    (0..l).map(|u| if u < l - b { 0.0 } else { p.z().im }).collect()
}

/// Wrong-side poles of the single-variable gamma factors of a term-wise
/// integrand with respect to the given lines.
pub fn classify_terms(ti: &TermIntegrand, lines: &[f64]) -> Result<PoleReport> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut bypassed = Vec::new();
    for term in ti.terms.iter().filter(|t| t.numerator) {
        let vars: Vec<usize> = (0..term.coef.len()).filter(|&u| term.coef[u] != 0.0).collect();
        if vars.len() != 1 {
            continue;
        }
        let u = vars[0];
        let fam = single_var_family(term, u);
        let side = if term.coef[u] > 0.0 { PoleSide::Left } else { PoleSide::Right };
        wrong_side(&fam, side, lines[u], u, &mut bypassed);
        match side {
            PoleSide::Left => left.push(fam),
            PoleSide::Right => right.push(fam),
        }
    }
    Ok(PoleReport { left_families: left, right_families: right, bypassed, coincident: Vec::new() })
}

fn single_var_family(term: &GammaTerm, u: usize) -> PoleFamily {
    // coef * t + c0 = -N  =>  t = (-N - c0)/coef
    let a = term.coef[u];
    PoleFamily { label: format!("Gamma({a:.4} t + {:.4})", term.c0), start: -term.c0 / a, step: C64::from(-1.0 / a) }
}

/// Tuning of the loop contours.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LoopOptions {
    /// Target relative accuracy; sets the truncation radius.
    pub tol: f64,
    /// Innermost loop radius; `None` selects the default rule.
    pub radius: Option<f64>,
    /// Ratio between radii of consecutive nested loops.
    pub nesting: f64,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions { tol: 1e-8, radius: None, nesting: 2.0 }
    }
}

/// Half-opening angle of the rays of the loop with nesting rank `rank`.
fn ray_angle(rank: usize) -> f64 {
    0.08 * (rank as f64 + 1.0)
}

/// A loop coming from infinity along direction `dir`, around `center` at
/// distance `radius`, and back. The anchor is the tip `center - radius * dir`;
/// the forward leg runs counterclockwise to the lower ray, the backward leg
/// clockwise to the upper ray.
fn loop_path(center: C64, dir: C64, radius: f64, half_angle: f64, reach: f64) -> VarPath {
    let th = dir.arg();
    let anchor = center - dir * radius;
    let lower = C64::new((th - half_angle).cos(), (th - half_angle).sin());
    let upper = C64::new((th + half_angle).cos(), (th + half_angle).sin());
    let forward = Leg {
        sign: 1.0,
        segments: vec![
            PathSegment::Arc { center, radius, theta0: th + PI, theta1: th + 2.0 * PI - half_angle },
            PathSegment::Ray { center, dir: lower, r0: radius, r1: reach },
        ],
    };
    let backward = Leg {
        sign: -1.0,
        segments: vec![
            PathSegment::Arc { center, radius, theta0: th + PI, theta1: th + half_angle },
            PathSegment::Ray { center, dir: upper, r0: radius, r1: reach },
        ],
    };
    VarPath { anchor, legs: vec![forward, backward], center: Some(center), radius }
}

/// Nested loops for the hypergeometric integral with tuple `p` (the loop-side
/// tuple) and `b` variables around `z`. The number of variables is `p.l2()`.
pub fn loops_j(p: &Params, b: usize, opts: &LoopOptions) -> Result<Contour> {
    let l = p.l2();
    let z = p.z();
    let k = p.kappa();
    if b > l {
        return Err(Error::InvalidParams(format!("b={b} exceeds the dimension {l}")));
    }
    if z.norm() == 0.0 || (z.im == 0.0 && z.re > 0.0) {
        return Err(Error::Region(format!("z = {z} must satisfy 0 < arg z < 2 pi")));
    }
    let mu_re = p.mu().re;
    // integrand ~ |t|^q along a ray, q = (Re mu - 1)/kappa - 1
    let q = (mu_re - 1.0) / k - 1.0;
    if q >= -1.0 {
        return Err(Error::Region(format!("Re mu = {mu_re} too large: loops do not converge")));
    }
    let dz = z / z.norm();
    let base = opts.radius.unwrap_or(0.3 * 1f64.min((z - 1.0).norm()).min(z.norm()) / l.max(1) as f64);
    let mut vars = Vec::with_capacity(l);
    let mut reach_max: f64 = 0.0;
    for u in 0..l {
        let (center, dir, rank, size) = if u < b { (z, dz, u, b) } else { (C64::new(1.0, 0.0), C64::new(1.0, 0.0), u - b, l - b) };
        let scale = center.norm();
        // keep |t|^(mu/kappa) from varying by more than e^2 across the loop
        let cap = if mu_re < 0.0 { scale * 2.0 * k / mu_re.abs() } else { f64::INFINITY };
        let outer = base * opts.nesting.powi(size as i32 - 1);
        let shrink = if outer > cap { cap / outer } else { 1.0 };
        let radius = base * shrink * opts.nesting.powi(rank as i32);
        let tail = 1e-3 * opts.tol * (q + 1.0).abs();
        let reach = (scale * 2.0) * tail.powf(1.0 / (q + 1.0)).max(1.0);
        if !reach.is_finite() || reach > 1e12 * scale {
            return Err(Error::Contour(format!("truncation radius {reach:e} too large for the tolerance")));
        }
        reach_max = reach_max.max(reach);
        vars.push(loop_path(center, dir, radius, ray_angle(rank), reach));
    }
    let contour = Contour { family: Family::LoopsJ, vars, truncation_radius: reach_max, clearance: CLEARANCE_FACTOR * k };
    let pts = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), z];
    let d = contour.audit(&pts)?;
    let _ = d;
    Ok(contour)
}

/// `m` nested loops around the origin along the positive real axis, cut at
/// distance `truncation`. The anchors lie on the negative real axis.
pub fn loops_b(m: usize, truncation: f64) -> Result<Contour> {
    if !(truncation > 1.0) {
        return Err(Error::Contour(format!("truncation radius {truncation} must exceed 1")));
    }
    let base = 0.25;
    let vars = (0..m)
        .map(|u| loop_path(C64::new(0.0, 0.0), C64::new(1.0, 0.0), base * 2f64.powi(u as i32), ray_angle(u), truncation))
        .collect();
    let contour = Contour { family: Family::LoopsB, vars, truncation_radius: truncation, clearance: 1e-3 };
    contour.audit(&[C64::new(0.0, 0.0)])?;
    Ok(contour)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn straight_line_when_families_separate() {
        let r = classify_poles(c(-5.3, 0.7), c(-2.1, 0.0), c(0.0, 0.3), 1.0, 0.5).unwrap();
        assert!(r.bypassed.is_empty());
    }

    #[test]
    fn integer_m2_far_left_z() {
        let r = classify_poles(c(-5.3, 0.7), c(2.0, 0.0), c(-30.0, 0.0), 1.0, 0.5).unwrap();
        assert_eq!(r.bypassed.len(), 33);
        assert!(r.bypassed.iter().all(|b| b.family == "z - m2 + kappa N"));
        // z - kappa N and z - m2 + kappa N share points for integer m2/kappa
        assert!(!r.coincident.is_empty());
    }

    #[test]
    fn m2_zero_count() {
        for (zr, k) in [(-30.0, 1.0), (-41.3, 1.37)] {
            let r = classify_poles(c(-5.3, 0.7), c(0.0, 0.0), c(zr, 0.2), k, 0.5).unwrap();
            let expect = ((0.5 - zr) / k).ceil() as usize;
            assert_eq!(r.bypassed.len(), expect);
        }
    }

    #[test]
    fn segment_derivatives() {
        let segs = [
            PathSegment::Line { from: c(0.0, 1.0), to: c(2.0, -1.0) },
            PathSegment::Ray { center: c(1.0, 0.0), dir: c(0.6, 0.8), r0: 0.1, r1: 50.0 },
            PathSegment::Arc { center: c(-1.0, 0.5), radius: 0.3, theta0: 0.4, theta1: 5.0 },
        ];
        for s in &segs {
            for &x in &[0.1, 0.5, 0.9] {
                let h = 1e-6;
                let fd = (s.point(x + h) - s.point(x - h)) / (2.0 * h);
                assert!((fd - s.deriv(x)).norm() < 1e-6 * (1.0 + s.deriv(x).norm()));
            }
        }
    }

    #[test]
    fn barnes_dump_has_one_pair_per_variable() {
        let p = make_params(c(-5.3, 0.7), 1, 1, 1.37, c(-30.0, 0.2), c(-0.8, 1.3)).unwrap();
        let (cnt, report) = barnes_contour(&p, 0, 1e-8).unwrap();
        assert_eq!(cnt.vars.len(), 1);
        assert_eq!(cnt.vars[0].legs.len(), 2);
        let dump = cnt.to_json();
        assert_eq!(dump["segments"].as_array().unwrap().len(), 2);
        assert!(report.bypassed.iter().all(|b| b.var == 0));
    }

    #[test]
    fn loops_nest_and_keep_clear() {
        let p = make_params(c(-5.3, 0.7), 1, 2, 1.37, c(-0.8, 1.3).exp(), c(-30.0, 0.2)).unwrap();
        // two variables around 1
        let cnt = loops_j(&p, 0, &LoopOptions::default()).unwrap();
        assert_eq!(cnt.vars.len(), 2);
        assert!(cnt.vars[0].radius < cnt.vars[1].radius);
        // one loop around z, one around 1
        let cnt = loops_j(&p, 1, &LoopOptions::default()).unwrap();
        assert_eq!(cnt.vars[0].center, Some(p.z()));
        assert_eq!(cnt.vars[1].center, Some(c(1.0, 0.0)));
        let a = cnt.vars[0].anchor / p.z();
        assert!(a.im.abs() < 1e-12 && a.re > 0.0 && a.re < 1.0);
        // all loops around z
        let cnt = loops_j(&p, 2, &LoopOptions::default()).unwrap();
        assert!(cnt.vars.iter().all(|v| v.center == Some(p.z())));
    }

    #[test]
    fn loops_b_shapes() {
        assert!(loops_b(0, 40.0).unwrap().vars.is_empty());
        assert_eq!(loops_b(1, 40.0).unwrap().vars.len(), 1);
        let two = loops_b(2, 40.0).unwrap();
        assert!(two.vars[0].radius < two.vars[1].radius);
        assert!(two.vars.iter().all(|v| v.anchor.re < 0.0 && v.anchor.im == 0.0));
    }

    #[test]
    fn loops_need_region() {
        let p = make_params(c(-5.3, 0.7), 1, 1, 1.37, c(2.0, 0.0), c(-30.0, 0.2)).unwrap();
        assert!(loops_j(&p, 0, &LoopOptions::default()).is_err());
        let p = make_params(c(-5.3, 0.7), 1, 1, 1.37, c(0.3, 0.3), c(3.0, 0.2)).unwrap();
        assert!(loops_j(&p, 0, &LoopOptions::default()).is_err());
    }
}
