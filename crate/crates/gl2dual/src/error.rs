use num_complex::Complex64 as C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("gamma function pole at argument {0}")]
    GammaPole(C64),

    #[error("series diverges: |x| = {0} >= 1")]
    Divergent(f64),

    #[error("branch step too large: factor {factor} changed argument by {darg:.3} rad")]
    StepTooLarge { factor: usize, darg: f64 },

    #[error("factor {0} vanished on the path")]
    ZeroFactor(usize),

    #[error("point {found} does not match tracked state at {expected}")]
    BranchMismatch { expected: C64, found: C64 },

    #[error("anchor not in domain: {0}")]
    Anchor(String),

    #[error("pole families pinch: {0}")]
    Pinch(String),

    #[error("pole too close to the integration path: {0}")]
    PoleProximity(String),

    #[error("contour construction failed: {0}")]
    Contour(String),

    #[error("parameters outside the verification region: {0}")]
    Region(String),

    #[error("cap exceeded: {0}")]
    Cap(String),

    #[error("singular parameters: {0}")]
    Singular(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("[a={a}, b={b}] {source}")]
    Tagged {
        a: usize,
        b: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn tagged(self, a: usize, b: usize) -> Self {
        Error::Tagged { a, b, source: Box::new(self) }
    }
}
