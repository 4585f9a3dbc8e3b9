//! The verification suites. Each returns a report; cases that fail to
//! evaluate are recorded as failures rather than aborting the run.

use gl2dual::duality::{connection_invariance, side_matrices, theorem_from_sides};
use gl2dual::glrep::sweep::{operator_suite, s_equation_sweep};
use gl2dual::glrep::{check_solution, SolutionSide};
use gl2dual::integrals::selberg::{selberg_a, selberg_a_numeric, selberg_b, selberg_b_numeric};
use gl2dual::integrals::{gauss_i00, i_ab, i_asymptotic, i_vector, j_asymptotic, j_vector};
use gl2dual::params::dual_params;
use gl2dual::report::{CaseResult, Report};
use gl2dual::{make_params, Params, QuadConfig, C64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ConfigError, Settings, Suite};

#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub m1: C64,
    pub kappa: f64,
    pub z: C64,
    pub mu: C64,
}

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const THEOREM_POINT: Point = Point { m1: c(-5.3, 0.7), kappa: 1.37, z: c(-30.0, 0.2), mu: c(-0.8, 1.3) };
pub const THEOREM_SHAPES: [(i64, i64); 5] = [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)];
pub const GAUSS_POINTS: [Point; 3] = [
    Point { m1: c(-0.6, 0.0), kappa: 1.0, z: c(-1.1, 0.3), mu: c(-1.0, 1.5) },
    Point { m1: c(-0.4, 0.2), kappa: 1.37, z: c(-0.9, -0.4), mu: c(-0.7, 2.0) },
    Point { m1: c(-0.3, 0.0), kappa: 0.8, z: c(-1.5, 0.5), mu: c(-1.2, 1.0) },
];
pub const ASYMPTOTIC_POINT: Point = Point { m1: c(-0.6, 0.3), kappa: 1.37, z: c(-40.0, 0.2), mu: c(-0.2, 1.5) };
pub const I_SOLUTION_POINT: Point = Point { m1: c(-0.6, 0.3), kappa: 1.37, z: c(-2.3, 0.4), mu: c(-0.3, 1.5) };
pub const J_SOLUTION_POINT: Point = Point { m1: c(-0.6, 0.3), kappa: 1.37, z: c(-3.1, 0.4), mu: c(0.2, 1.9) };
pub const SELBERG_A: (C64, C64, f64) = (c(-0.7, 0.3), c(-0.5, 1.8), 1.37);
pub const SELBERG_B: (C64, f64) = (c(-0.6, 0.2), 1.37);

impl Point {
    fn with(self, s: &Settings) -> Point {
        Point {
            m1: s.m1.unwrap_or(self.m1),
            kappa: s.kappa.unwrap_or(self.kappa),
            z: s.z.unwrap_or(self.z),
            mu: s.mu.unwrap_or(self.mu),
        }
    }

    fn params(self, m2: i64, l2: i64) -> gl2dual::Result<Params> {
        make_params(self.m1, m2, l2, self.kappa, self.z, self.mu)
    }
}

fn rel_diff(x: C64, y: C64) -> f64 {
    let s = x.norm().max(y.norm());
    if s == 0.0 {
        0.0
    } else {
        (x - y).norm() / s
    }
}

fn cx(v: C64) -> serde_json::Value {
    json!([v.re, v.im])
}

/// Shapes `(m2, l2)` to run: the flags select a single one, otherwise `defaults`.
fn shapes(s: &Settings, defaults: &[(i64, i64)]) -> Vec<(i64, i64)> {
    match (s.m2, s.l2) {
        (None, None) => defaults.to_vec(),
        (m2, l2) => vec![(m2.or(l2).unwrap_or(1), l2.or(m2).unwrap_or(1))],
    }
}

fn settings_json(s: &Settings) -> serde_json::Value {
    serde_json::to_value(s).expect("settings serialize")
}

pub fn run(suite: Suite, s: &Settings) -> Result<Report, ConfigError> {
    s.validate()?;
    let mut report = Report::new(suite.name(), settings_json(s));
    match suite {
        Suite::Theorem1 => theorem1(s, &mut report)?,
        Suite::Example2f1 => example2f1(s, &mut report)?,
        Suite::Selberg => selberg(s, &mut report)?,
        Suite::Asymptotics => asymptotics(s, &mut report)?,
        Suite::Operators => operators(s, &mut report)?,
        Suite::Solutions => solutions(s, &mut report)?,
        Suite::All => {
            for sub in [
                Suite::Example2f1,
                Suite::Theorem1,
                Suite::Selberg,
                Suite::Asymptotics,
                Suite::Operators,
                Suite::Solutions,
            ] {
                report.extend(run(sub, s)?);
            }
        }
    }
    Ok(report)
}

fn theorem1(s: &Settings, report: &mut Report) -> Result<(), ConfigError> {
    let pt = THEOREM_POINT.with(s);
    let quad = s.quad_or(1e-6)?;
    let jobs: Vec<(i64, i64)> = shapes(s, &THEOREM_SHAPES);
    let results: Vec<(Vec<CaseResult>, Vec<String>)> =
        jobs.par_iter().map(|&(m2, l2)| theorem_cases(pt, m2, l2, &quad)).collect();
    for (cases, notes) in results {
        cases.into_iter().for_each(|c| report.push(c));
        report.diagnostics.extend(notes);
    }
    Ok(())
}

fn theorem_cases(pt: Point, m2: i64, l2: i64, quad: &QuadConfig) -> (Vec<CaseResult>, Vec<String>) {
    let tag = format!("m2={m2} l2={l2}");
    let threshold = if m2.min(l2) <= 1 { 1e-5 } else { 1e-3 };
    let fail = |e: gl2dual::Error| (vec![CaseResult::error(format!("theorem1 {tag}"), threshold, e)], Vec::new());
    let p = match pt.params(m2, l2) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let sides = match side_matrices(&p, quad) {
        Ok(sides) => sides,
        Err(e) => return fail(e),
    };
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    match theorem_from_sides(&p, &sides) {
        Ok(th) => {
            for e in &th.entries {
                cases.push(CaseResult::new(
                    format!("theorem1 {tag} a={} b={}", e.a, e.b),
                    e.residual,
                    threshold,
                    json!({ "lhs": cx(e.lhs), "rhs": cx(e.rhs), "quad_rel_err": e.quad_rel_err }),
                ));
            }
            notes.extend(th.warnings.iter().map(|w| format!("{tag}: {w}")));
        }
        Err(e) => cases.push(CaseResult::error(format!("theorem1 {tag}"), threshold, e)),
    }
    let mu2 = second_mu(pt.mu);
    match connection_invariance(&p, &sides, mu2, quad) {
        Ok(ci) => {
            let g = &ci.at_base;
            let detail = json!({
                "diagonal": g.g.iter().enumerate().map(|(b, row)| cx(row[b])).collect::<Vec<_>>(),
                "predicted": g.predicted.iter().map(|v| cx(*v)).collect::<Vec<_>>(),
                "condition": g.condition,
                "mu2": cx(mu2),
            });
            for (name, r) in [
                ("off-diagonal", g.off_diagonal),
                ("diagonal vs prediction", g.diagonal_error),
                ("z-shift invariance", ci.shift_residual),
                ("mu-ratio vs Y", ci.mu_ratio_residual),
            ] {
                cases.push(CaseResult::new(format!("connection {tag} {name}"), r, 1e-3, detail.clone()));
            }
        }
        Err(e) => cases.push(CaseResult::error(format!("connection {tag}"), 1e-3, e)),
    }
    (cases, notes)
}

/// A second `mu` in the strip `0 < Im mu < 2 pi` for the `mu`-ratio check.
pub fn second_mu(mu: C64) -> C64 {
    let im = if mu.im + 0.6 < 2.0 * std::f64::consts::PI - 0.5 { mu.im + 0.6 } else { mu.im - 0.6 };
    C64::new(mu.re - 0.2, im)
}

fn example2f1(s: &Settings, report: &mut Report) -> Result<(), ConfigError> {
    let quad = s.quad_or(1e-10)?;
    let points: Vec<Point> = if s.has_point() { vec![GAUSS_POINTS[0].with(s)] } else { GAUSS_POINTS.to_vec() };
    let cases: Vec<CaseResult> = points
        .par_iter()
        .enumerate()
        .map(|(k, pt)| {
            let name = format!("gauss set {}", k + 1);
            let run = || -> gl2dual::Result<CaseResult> {
                let p = pt.params(1, 1)?;
                let numeric = i_ab(&p, 0, 0, &quad)?;
                let oracle = gauss_i00(&p)?;
                Ok(CaseResult::new(
                    name.clone(),
                    rel_diff(numeric.value, oracle),
                    1e-6,
                    json!({
                        "m1": cx(pt.m1), "kappa": pt.kappa, "z": cx(pt.z), "mu": cx(pt.mu),
                        "integral": cx(numeric.value), "series": cx(oracle),
                    }),
                ))
            };
            run().unwrap_or_else(|e| CaseResult::error(name.clone(), 1e-6, e))
        })
        .collect();
    cases.into_iter().for_each(|c| report.push(c));
    Ok(())
}

fn selberg(s: &Settings, report: &mut Report) -> Result<(), ConfigError> {
    let quad = s.quad_or(1e-10)?;
    let (m, mu, ka) = SELBERG_A;
    let (l, kb) = SELBERG_B;
    let jobs: Vec<(&str, usize, f64)> = vec![("A", 1, 1e-6), ("A", 2, 1e-5), ("B", 1, 1e-5), ("B", 2, 1e-5)];
    let cases: Vec<CaseResult> = jobs
        .par_iter()
        .map(|&(which, n, threshold)| {
            let name = format!("selberg {which}_{n}");
            let run = || -> gl2dual::Result<CaseResult> {
                let (numeric, closed) = if which == "A" {
                    (selberg_a_numeric(n, m, mu, ka, &quad)?, selberg_a(n, m, mu, ka)?)
                } else {
                    (selberg_b_numeric(n, l, kb, &quad)?, selberg_b(n, l, kb)?)
                };
                Ok(CaseResult::new(
                    name.clone(),
                    rel_diff(numeric.value, closed.value()),
                    threshold,
                    json!({ "numeric": cx(numeric.value), "closed_form": cx(closed.value()), "branch": closed.branch_note }),
                ))
            };
            run().unwrap_or_else(|e| CaseResult::error(name.clone(), threshold, e))
        })
        .collect();
    cases.into_iter().for_each(|c| report.push(c));
    Ok(())
}

/// Largest `|integral / leading term - delta_ab|` over all admissible pairs.
pub fn asymptotic_deviation(j_side: bool, p: &Params, quad: &QuadConfig) -> gl2dual::Result<f64> {
    let pd = dual_params(p);
    let mut worst: f64 = 0.0;
    for b in 0..=p.rank() {
        let (values, lead) = if j_side {
            (j_vector(&pd, b, quad)?.values, j_asymptotic(&pd, b, b)?)
        } else {
            (i_vector(p, b, quad)?.values, i_asymptotic(p, b, b)?)
        };
        for (a, v) in values.iter().enumerate() {
            let delta = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v / lead - delta).norm());
        }
    }
    Ok(worst)
}

fn asymptotics(s: &Settings, report: &mut Report) -> Result<(), ConfigError> {
    let quad = s.quad_or(1e-7)?;
    let pt = ASYMPTOTIC_POINT.with(s);
    let mut jobs: Vec<(bool, i64, i64)> = Vec::new();
    for (m2, l2) in shapes(s, &[(1, 1), (2, 2), (2, 1), (1, 2)]) {
        if m2 == l2 {
            jobs.push((false, m2, l2));
        }
        if m2 <= 2 {
            jobs.push((true, m2, l2));
        }
    }
    let re = [pt.z.re, 2.0 * pt.z.re];
    let results: Vec<(Vec<CaseResult>, String)> = jobs
        .par_iter()
        .map(|&(j_side, m2, l2)| {
            let side = if j_side { "J" } else { "I" };
            let tag = format!("{side}-asymptotics m2={m2} l2={l2}");
            let devs: Vec<gl2dual::Result<f64>> = re
                .iter()
                .map(|&x| pt.params(m2, l2).and_then(|p| asymptotic_deviation(j_side, &p.with_z(C64::new(x, pt.z.im)), &quad)))
                .collect();
            let mut cases = Vec::new();
            for (x, d) in re.iter().zip(&devs) {
                let bound = 5.0 / x.abs();
                let name = format!("{tag} Re z={x}");
                cases.push(match d {
                    Ok(d) => CaseResult::new(name, *d, bound, json!({ "fitted_c": d * x.abs() })),
                    Err(e) => CaseResult::error(name, bound, e),
                });
            }
            let note = match (&devs[0], &devs[1]) {
                (Ok(d0), Ok(d1)) => format!("{tag}: deviation ratio {:.4} when Re z doubles", d0 / d1),
                _ => format!("{tag}: no deviation ratio"),
            };
            (cases, note)
        })
        .collect();
    for (cases, note) in results {
        cases.into_iter().for_each(|c| report.push(c));
        report.diagnostics.push(note);
    }
    Ok(())
}

fn operators(s: &Settings, report: &mut Report) -> Result<(), ConfigError> {
    let seed = s.seed.unwrap_or(2024);
    let kappa = s.kappa.unwrap_or(1.37);
    match operator_suite(seed, 20, kappa) {
        Ok(results) => {
            for r in results {
                let threshold = match r.name.as_str() {
                    "gl2 relations" => 1e-13,
                    "R-matrix relations" => 1e-12,
                    _ => 1e-10,
                };
                report.push(CaseResult::new(r.name.clone(), r.max_residual, threshold, json!({ "draws": r.draws })));
            }
        }
        Err(e) => report.push(CaseResult::error("operator suite", 1e-10, e)),
    }
    report.push(match s_equation_sweep(seed, 100, kappa, 4) {
        Ok(r) => CaseResult::new(r.name.clone(), r.max_residual, 1e-12, json!({ "draws": r.draws, "max_m2": 4 })),
        Err(e) => CaseResult::error("S(t + kappa) = G(t) S(t)", 1e-12, e),
    });
    Ok(())
}

fn solutions(s: &Settings, report: &mut Report) -> Result<(), ConfigError> {
    let quad = s.quad_or(1e-11)?;
    let ip = I_SOLUTION_POINT.with(s);
    let jp = J_SOLUTION_POINT.with(s);
    let mut jobs: Vec<(SolutionSide, Point, i64, i64)> = Vec::new();
    for (m2, l2) in shapes(s, &[(1, 1), (2, 1)]) {
        jobs.push((SolutionSide::Qkz, ip, m2, l2));
        jobs.push((SolutionSide::DynDe, ip, m2, l2));
    }
    for (m2, l2) in shapes(s, &[(1, 1), (1, 2)]) {
        jobs.push((SolutionSide::KzDyn, jp, m2, l2));
    }
    let cases: Vec<Vec<CaseResult>> = jobs
        .par_iter()
        .map(|&(side, pt, m2, l2)| {
            let tag = format!("solution {side:?} m2={m2} l2={l2}");
            let p = match pt.params(m2, l2) {
                Ok(p) => p,
                Err(e) => return vec![CaseResult::error(tag, 1e-3, e)],
            };
            (0..=p.rank())
                .map(|b| {
                    let name = format!("{tag} b={b}");
                    match check_solution(side, &p, b, &quad) {
                        Ok(r) => CaseResult::new(
                            name,
                            r.max_residual,
                            1e-3,
                            json!({ "residuals": r.residuals, "richardson_gap": r.richardson_gap, "warnings": r.warnings }),
                        ),
                        Err(e) => CaseResult::error(name, 1e-3, e),
                    }
                })
                .collect()
        })
        .collect();
    cases.into_iter().flatten().for_each(|c| report.push(c));
    Ok(())
}
