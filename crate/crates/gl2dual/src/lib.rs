//! Numerical machinery for comparing l2-dimensional Barnes-type q-hypergeometric
//! integrals with m2-dimensional loop hypergeometric integrals, together with the
//! gl2 operator calculus (KZ, qKZ and dynamical operators) that links them.
//!
//! The crate is organized bottom-up:
//!
//! * [`params`] holds the parameter tuple and region predicates,
//! * [`special`] provides log-gamma, the Gauss series and branch tracking,
//! * [`integrand`] builds the integrands of both families,
//! * [`contour`] and [`quad`] construct paths and integrate over them,
//! * [`integrals`] assembles `I_ab`, `J_ab` and the Selberg-type integrals,
//! * [`duality`] holds the connection factors and the end-to-end identity check,
//! * [`glrep`] implements weight subspaces, R-matrices and the operator checks.

pub mod contour;
pub mod duality;
pub mod error;
pub mod glrep;
pub mod integrals;
pub mod integrand;
pub mod params;
pub mod quad;
pub mod report;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::{make_params, AdmissiblePair, Kappa, Params, RegionFlags, Thresholds};
pub use quad::{IntegralResult, QuadConfig};
