//! The parameter tuple `(m1, m2, l1, l2)` with `kappa`, `z`, `mu`, and the
//! region predicates consulted by the integral and verification code.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step of the difference equations. Always a finite positive real.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Kappa(value))
        } else {
            Err(Error::InvalidParams(format!("kappa must be positive, got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Kappa {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Kappa::new(v)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

/// Parameters of the pair of integrals. `l1` is always derived from the
/// balance condition `m1 + m2 = l1 + l2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    m1: C64,
    m2: usize,
    l1: C64,
    l2: usize,
    kappa: Kappa,
    z: C64,
    mu: C64,
}

/// Builds a parameter tuple, deriving `l1 = m1 + m2 - l2`.
pub fn make_params(m1: C64, m2: i64, l2: i64, kappa: f64, z: C64, mu: C64) -> Result<Params> {
    if m2 < 0 || l2 < 0 {
        return Err(Error::InvalidParams(format!(
            "m2 and l2 must be nonnegative, got m2={m2}, l2={l2}"
        )));
    }
    let kappa = Kappa::new(kappa)?;
    let (m2, l2) = (m2 as usize, l2 as usize);
    Ok(Params {
        m1,
        m2,
        l1: m1 + C64::from((m2 as f64) - (l2 as f64)),
        l2,
        kappa,
        z,
        mu,
    })
}

impl Params {
    pub fn m1(&self) -> C64 {
        self.m1
    }
    pub fn m2(&self) -> usize {
        self.m2
    }
    pub fn l1(&self) -> C64 {
        self.l1
    }
    pub fn l2(&self) -> usize {
        self.l2
    }
    pub fn kappa(&self) -> f64 {
        self.kappa.get()
    }
    pub fn z(&self) -> C64 {
        self.z
    }
    pub fn mu(&self) -> C64 {
        self.mu
    }

    /// `min(m2, l2)`, the largest admissible index.
    pub fn rank(&self) -> usize {
        self.m2.min(self.l2)
    }

    pub fn with_z(mut self, z: C64) -> Self {
        self.z = z;
        self
    }

    pub fn with_mu(mut self, mu: C64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = Kappa::new(kappa)?;
        Ok(self)
    }

    pub fn flags(&self, th: &Thresholds) -> RegionFlags {
        RegionFlags::of(self, th)
    }
}

/// An admissible pair `(a, b)` with `0 <= a, b <= min(m2, l2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub a: usize,
    pub b: usize,
}

pub fn admissible_pairs(p: &Params) -> Vec<AdmissiblePair> {
    let n = p.rank();
    (0..=n)
        .flat_map(|a| (0..=n).map(move |b| AdmissiblePair { a, b }))
        .collect()
}

/// The tuple entering the loop-integral side: `(m1, m2, l1, l2)` is replaced by
/// `(l1, l2, m1, m2)` and the `(z, mu)` slots receive `(e^mu, z)`.
pub fn dual_params(p: &Params) -> Params {
    Params {
        m1: p.l1,
        m2: p.l2,
        l1: p.m1,
        l2: p.m2,
        kappa: p.kappa,
        z: p.mu.exp(),
        mu: p.z,
    }
}

/// Configurable thresholds behind the region predicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `Re(mu-slot) <= -kappa * r0` counts as "far to the left".
    pub r0: f64,
    /// Minimal distance from integers for the genericity rule.
    pub lattice_distance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { r0: 20.0, lattice_distance: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFlags {
    /// `0 < Im mu < 2 pi`.
    pub i_side_ok: bool,
    /// `0 < arg z < 2 pi` and `Re mu <= -kappa r0`, reading `(z, mu)` as the
    /// loop-side slots.
    pub j_side_ok: bool,
    /// `kappa`, `1/kappa` and `(m1 + j)/kappa` avoid the integers.
    pub generic_kappa_ok: bool,
}

fn dist_to_integer(w: C64) -> f64 {
    C64::new(w.re - w.re.round(), w.im).norm()
}

impl RegionFlags {
    pub fn of(p: &Params, th: &Thresholds) -> Self {
        let k = p.kappa();
        let i_side_ok = p.mu.im > 0.0 && p.mu.im < 2.0 * PI;
        let j_side_ok = p.z.norm() > 0.0
            && !(p.z.im == 0.0 && p.z.re > 0.0)
            && p.mu.re <= -k * th.r0;
        let span = (p.m2 + p.l2) as i64;
        let mut generic = dist_to_integer(C64::from(k)) >= th.lattice_distance
            && dist_to_integer(C64::from(1.0 / k)) >= th.lattice_distance;
        for j in -span..=span {
            generic &= dist_to_integer((p.m1 + j as f64) / k) >= th.lattice_distance;
        }
        RegionFlags { i_side_ok, j_side_ok, generic_kappa_ok: generic }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn l1_is_derived_from_balance() {
        let p = make_params(c(-0.6, 0.0), 1, 1, 1.0, c(-1.1, 0.3), c(-1.0, 1.5)).unwrap();
        assert_eq!(p.l1(), c(-0.6, 0.0));
        let p = make_params(c(2.0, 1.0), 2, 0, 1.0, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(p.l1(), c(4.0, 1.0));
    }

    #[test]
    fn degenerate_tuple_has_single_pair() {
        let p = make_params(c(0.0, 0.0), 0, 0, 1.0, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(p.l1(), c(0.0, 0.0));
        assert_eq!(admissible_pairs(&p), vec![AdmissiblePair { a: 0, b: 0 }]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_params(c(0.0, 0.0), 1, 1, 0.0, c(0.0, 0.0), c(0.0, 1.0)).is_err());
        assert!(make_params(c(0.0, 0.0), 1, 1, -2.0, c(0.0, 0.0), c(0.0, 1.0)).is_err());
        assert!(make_params(c(0.0, 0.0), -1, 1, 1.0, c(0.0, 0.0), c(0.0, 1.0)).is_err());
        assert!(make_params(c(0.0, 0.0), 1, -3, 1.0, c(0.0, 0.0), c(0.0, 1.0)).is_err());
    }

    #[test]
    fn pair_counts() {
        let p = make_params(c(1.0, 0.0), 2, 1, 1.3, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        let pairs = admissible_pairs(&p);
        assert_eq!(pairs.len(), 4);
        assert!(pairs.contains(&AdmissiblePair { a: 1, b: 0 }));
        let p = make_params(c(1.0, 0.0), 2, 2, 1.3, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(admissible_pairs(&p).len(), 9);
    }

    #[test]
    fn dual_swaps_the_tuple() {
        let p = make_params(c(-5.3, 0.7), 2, 1, 1.37, c(-30.0, 0.2), c(-0.8, 1.3)).unwrap();
        let d = dual_params(&p);
        assert_eq!((d.m1(), d.m2(), d.l1(), d.l2()), (c(-4.3, 0.7), 1, c(-5.3, 0.7), 2));
        assert_eq!(d.mu(), p.z());
        assert!((d.z() - p.mu().exp()).norm() < 1e-15);
        let dd = dual_params(&d);
        assert_eq!((dd.m1(), dd.m2(), dd.l1(), dd.l2()), (p.m1(), p.m2(), p.l1(), p.l2()));
    }

    #[test]
    fn self_dual_point() {
        let p = make_params(c(-0.6, 0.0), 1, 1, 1.0, c(-1.1, 0.3), c(-1.0, 1.5)).unwrap();
        let d = dual_params(&p);
        assert_eq!((d.m1(), d.m2(), d.l1(), d.l2()), (c(-0.6, 0.0), 1, c(-0.6, 0.0), 1));
    }

    #[test]
    fn region_flags() {
        let th = Thresholds::default();
        let p = make_params(c(-5.3, 0.7), 1, 1, 1.37, c(-30.0, 0.2), c(-0.8, 1.3)).unwrap();
        let f = p.flags(&th);
        assert!(f.i_side_ok && f.generic_kappa_ok);
        let d = dual_params(&p);
        assert!(d.flags(&th).j_side_ok);
        let p1 = p.with_kappa(1.0).unwrap();
        assert!(!p1.flags(&th).generic_kappa_ok);
        let p2 = p.with_mu(c(0.0, -0.5));
        assert!(!p2.flags(&th).i_side_ok);
    }
}
