use thiserror::Error;

/// Errors raised by state construction, spectral routines and the entropy pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical or numerical parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input object is malformed (non-symmetric, wrong trace, bad dimensions, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The analytic spectrum generators are singular at zero acceleration.
    #[error("inertial limit: analytic spectra are undefined at lambda = 0, use the inertial closed forms")]
    InertialLimit,

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    /// A computed eigenvalue is below `-EPS_PSD`.
    #[error("PSD violation: eigenvalue {value:e} below tolerance")]
    PsdViolation { value: f64 },

    #[error("trace deficit {deficit:e} exceeds tolerance {tolerance:e}; increase the Fock cutoff or analytic term count")]
    TraceDeficit { deficit: f64, tolerance: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    /// The simplex search ran out of iterations; carries the best point found.
    #[error("fit did not converge after {iterations} iterations (best b = {b}, x = {x}, y = {y}, rss = {rss:e})")]
    FitNoConvergence { iterations: usize, b: f64, x: f64, y: f64, rss: f64 },
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Validation(_) => "validation",
            Error::InertialLimit => "inertial_limit",
            Error::NoConvergence { .. } => "no_convergence",
            Error::PsdViolation { .. } => "psd_violation",
            Error::TraceDeficit { .. } => "trace_deficit",
            Error::Fit(_) => "fit",
            Error::FitNoConvergence { .. } => "fit_no_convergence",
        }
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
