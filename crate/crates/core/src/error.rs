use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Particles `i` and `j` (1-based) coincide.
    #[error("collision singularity: particles {i} and {j} coincide")]
    CollisionSingularity { i: usize, j: usize },

    /// A chart direction lies in a deeper collision stratum.
    #[error("direction meets the collision set; use the chart of the finer partition {finer}")]
    InternalCoincidence { finer: String },

    #[error("configuration outside the interior of the Hill region (E + U = {margin:e})")]
    OutsideHillInterior { margin: f64 },

    #[error("degenerate polar decomposition: internal norm {norm:e} below threshold")]
    DegeneratePolar { norm: f64 },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("ill-conditioned query: {0}")]
    Conditioning(String),

    #[error("step size underflow at tau = {tau} (h = {step:e})")]
    Stiffness { tau: f64, step: f64, state: Vec<f64> },

    #[error("too many steps ({0}) before reaching the end of the span")]
    MaxSteps(usize),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Stiffness { .. }
                | Error::MaxSteps(_)
                | Error::Conditioning(_)
                | Error::InsufficientSamples(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
