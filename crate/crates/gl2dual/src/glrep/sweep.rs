//! Seeded random-point sweeps of the operator identities.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::operators::{check_commutation, check_intertwining, Commutation, Intertwining};
use super::{build_r, commutator_residual, Gen, Module, Point, WeightSubspace};
use crate::duality::check_s_equation;
use crate::error::{Error, Result};
use crate::params::make_params;

/// Minimal distance of a draw from the singular loci.
const CLEARANCE: f64 = 1e-2;

/// A complex number with modulus in `[0.5, 3]` and uniform phase.
pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(rng.random_range(0.5..3.0), rng.random_range(-PI..PI))
}

/// A random point with pairwise distinct `z_a/z_b`, `z_a - z_b` and
/// `lambda_1 - lambda_2` away from zero and from the step `kappa`.
pub fn random_point<R: Rng>(rng: &mut R, n: usize, kappa: f64) -> Point {
    loop {
        let z: Vec<C64> = (0..n).map(|_| random_complex(rng)).collect();
        let lambda = [random_complex(rng), random_complex(rng)];
        let far = |x: C64| (x.norm() > CLEARANCE) && ((x - kappa).norm() > CLEARANCE) && ((x + kappa).norm() > CLEARANCE);
        let mut ok = far(lambda[0] - lambda[1]);
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    ok &= far(z[a] - z[b]) && (z[a] / z[b] - 1.0).norm() > CLEARANCE;
                }
            }
        }
        if ok {
            return Point::new(z, lambda);
        }
    }
}

/// Worst residual of one identity over a number of draws.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub name: String,
    pub draws: usize,
    pub max_residual: f64,
}

/// Runs `f` on `draws` independent generators seeded from `seed`, in parallel.
/// The result does not depend on the thread count.
pub fn sweep<F>(name: &str, seed: u64, draws: usize, f: F) -> Result<SweepResult>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let worst = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            f(&mut rng)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SweepResult { name: name.to_string(), draws, max_residual: worst })
}

/// The subspaces used by the operator suite: `(M_{m1} (x) L_2)[l1, 2]` and a
/// three-factor subspace `(M (x) L_1 (x) M)` at level 2.
pub fn suite_spaces<R: Rng>(rng: &mut R) -> Vec<WeightSubspace> {
    let m1 = random_complex(rng);
    let m3 = random_complex(rng);
    vec![
        WeightSubspace::verma_finite(m1, 2, 2),
        WeightSubspace::new(vec![Module::Verma(m1), Module::Irreducible(1), Module::Verma(m3)], 2).expect("three modules"),
    ]
}

/// Every operator identity of the suite, each over `draws` random points.
pub fn operator_suite(seed: u64, draws: usize, kappa: f64) -> Result<Vec<SweepResult>> {
    if kappa <= 0.0 {
        return Err(Error::InvalidParams(format!("kappa must be positive, got {kappa}")));
    }
    let mut out = Vec::new();
    out.push(sweep("gl2 relations", seed, draws, |rng| {
        let mut worst: f64 = 0.0;
        for s in suite_spaces(rng) {
            for x in Gen::ALL {
                for y in Gen::ALL {
                    worst = worst.max(commutator_residual(&s, None, x, y));
                    for a in 0..s.n() {
                        worst = worst.max(commutator_residual(&s, Some(a), x, y));
                    }
                }
            }
        }
        Ok(worst)
    })?);
    out.push(sweep("R-matrix relations", seed, draws, |rng| {
        let t = random_complex(rng);
        let pairs = [
            (Module::Verma(random_complex(rng)), Module::Irreducible(2)),
            (Module::Verma(random_complex(rng)), Module::Verma(random_complex(rng))),
            (Module::Irreducible(1), Module::Irreducible(2)),
        ];
        let mut worst: f64 = 0.0;
        for (v, w) in pairs {
            worst = worst.max(build_r(t, v, w, 3)?.residual);
        }
        Ok(worst)
    })?);
    let cases: Vec<(&str, Box<dyn Fn(usize) -> Vec<Commutation> + Sync>)> = vec![
        ("[Z_a, Z_b]", Box::new(|n| pairs(n).into_iter().map(|(a, b)| Commutation::ZZ { a, b }).collect())),
        ("[Q_1, Q_2]", Box::new(|_| vec![Commutation::QQ])),
        (
            "[nabla_a, Q_i]",
            Box::new(|n| (0..n).flat_map(|a| (0..2).map(move |i| Commutation::NablaQ { a, i })).collect()),
        ),
        ("[Z_a, D_i]", Box::new(|n| (0..n).flat_map(|a| (0..2).map(move |i| Commutation::ZD { a, i })).collect())),
    ];
    for (name, list) in &cases {
        out.push(sweep(name, seed, draws, |rng| {
            let mut worst: f64 = 0.0;
            for s in suite_spaces(rng) {
                let p = random_point(rng, s.n(), kappa);
                for c in list(s.n()) {
                    worst = worst.max(check_commutation(c, &s, &p, kappa)?);
                }
            }
            Ok(worst)
        })?);
    }
    for (name, which) in [("phi Z = G^(+-1) Q phi", Intertwining::QkzQ), ("phi D = nabla phi", Intertwining::DKz)] {
        out.push(sweep(name, seed, draws, |rng| {
            let m1 = random_complex(rng);
            let mut worst: f64 = 0.0;
            for (m2, l2) in [(1, 1), (2, 1), (2, 2), (1, 2)] {
                let s = WeightSubspace::verma_finite(m1, m2, l2);
                let p = random_point(rng, 2, kappa);
                worst = worst.max(check_intertwining(which, &s, &p, kappa)?);
            }
            Ok(worst)
        })?);
    }
    Ok(out)
}

/// `S(t + kappa) = G(t) S(t)` for `S(t) = X(-t)`, for every `m2 <= max_m2`,
/// at `draws` random `(m1, t)`.
pub fn s_equation_sweep(seed: u64, draws: usize, kappa: f64, max_m2: usize) -> Result<SweepResult> {
    sweep("S(t + kappa) = G(t) S(t)", seed, draws, |rng| {
        let m1 = random_complex(rng);
        let t = random_complex(rng);
        let mut worst: f64 = 0.0;
        for m2 in 0..=max_m2 {
            let p = make_params(m1, m2 as i64, 0, kappa, C64::new(0.0, 0.0), C64::new(0.0, 1.0))?;
            worst = worst.max(check_s_equation(&p, t)?);
        }
        Ok(worst)
    })
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}
