use alloc::string::String;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A special-function argument or order outside the supported range.
    #[error("{what} out of supported range: {detail}")]
    Range { what: &'static str, detail: String },

    /// A mathematical domain violation (e.g. non-positive argument).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid physical or numerical configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Qubit frequency outside the photonic band, no propagating resonance.
    #[error("qubit frequency {omega0} lies outside the band [-2J, 2J] with J = {hopping}")]
    OutOfBand { omega0: f64, hopping: f64 },

    /// Quantity that only exists for a non-zero force.
    #[error("{0} is undefined for zero force")]
    ZeroForce(&'static str),

    /// Degenerate semiclassical momentum (stationary packet at a band edge).
    #[error("degenerate quasi-momentum k = {0}: packet sits at a band edge")]
    DegenerateMomentum(f64),

    /// Chebyshev expansion order needed for the requested step exceeds the cap.
    #[error("Chebyshev order {needed} exceeds cap {cap} for step {dt}; reduce dt_out or raise max_order")]
    StepSize { needed: usize, cap: usize, dt: f64 },

    /// Conserved quantity or structural invariant violated during a run.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Truncated lattice too small: amplitude reached the outer sites.
    #[error("lattice too small: edge amplitude {amplitude:.3e} at t = {time} exceeds {limit:.1e}; increase N")]
    Sizing { time: f64, amplitude: f64, limit: f64 },

    /// Fitting routine could not produce a result.
    #[error("fit error: {0}")]
    Fit(String),

    /// Requested parameters outside the regime a routine supports.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
