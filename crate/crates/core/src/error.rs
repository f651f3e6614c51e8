use thiserror::Error;

use crate::geometry::Point2;
use crate::leaf::ConvergenceReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({}, {}) is outside the map domain: {reason}", .point.x, .point.y)]
    Domain { point: Point2, reason: String },

    #[error("non-finite value while computing {0}")]
    NonFinite(&'static str),

    #[error("unknown map '{0}' (expected one of: linear, perturbed, henon)")]
    UnknownMap(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("orbit left the domain at iterate {0}")]
    OrbitEscape(usize),

    #[error("derivative is singular at orbit step {0}")]
    SingularStep(usize),

    #[error("matrix is (nearly) conformal: 1 - E/F = {0:e}, contracted direction undefined")]
    Conformal(f64),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("index {index} out of range (valid: {lo}..={hi})")]
    Index { index: usize, lo: usize, hi: usize },

    #[error("finite-difference stencil left the admissible region: {0}")]
    StencilEscape(String),

    #[error("no sample point accepted into N^({0})")]
    EmptySample(usize),

    #[error("invalid epsilon schedule: {0}")]
    Schedule(String),

    #[error("p_k q_k gamma_(k+1) < 1/2 never holds from some index on within k <= {0}")]
    NoK0(usize),

    #[error("no epsilon on the dyadic ladder satisfies the constraints")]
    NoFeasibleEpsilon,

    #[error("leaves did not converge by k = {kmax} (last d_k = {last:e})")]
    NotConverged {
        kmax: usize,
        last: f64,
        report: Box<ConvergenceReport>,
    },

    #[error("fixed-point iteration did not converge (residual {0:e})")]
    NoFixedPoint(f64),

    #[error("fixed point is not hyperbolic: eigenvalue moduli {0} and {1}")]
    NotHyperbolic(f64, f64),

    #[error("spectral slack too small: {0}")]
    SpectralSlack(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the error stems from invalid user input rather than from
    /// the numerics or the filesystem.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::UnknownMap(_) | Error::BadParams(_) | Error::Schedule(_)
        )
    }
}
