use thiserror::Error;

/// Errors raised by the kernel, solver and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("total concentration {total} is not positive")]
    NonPositiveTotal { total: f64 },

    #[error("concentration of species {species} is negative ({value:e})")]
    NegativeConcentration { species: usize, value: f64 },

    #[error("degenerate composition: {0}")]
    DegenerateComposition(String),

    #[error("dimension mismatch: {0}")]
    BadDimension(String),

    #[error("driving forces violate Gibbs-Duhem: sum = {sum:e}, max |d_i| = {max:e}")]
    GibbsDuhem { sum: f64, max: f64 },

    #[error("fluxes do not sum to zero: sum = {sum:e}, max |J_i| = {max:e}")]
    FluxSum { sum: f64, max: f64 },

    #[error("singular flux-force system: {0}")]
    SingularSystem(String),

    #[error("eigen solver did not converge")]
    EigSolverFailure,

    #[error("Gibbs energy not strongly convex (min eigenvalue {min_eigenvalue:e})")]
    NotConvex { min_eigenvalue: f64 },

    #[error("negative concentration {value:e} in cell {cell}, species {species} at t = {time}")]
    PositivityViolation {
        cell: usize,
        species: usize,
        value: f64,
        time: f64,
    },

    #[error("step limit of {max_steps} reached at t = {time}")]
    MaxStepsExceeded { max_steps: usize, time: f64 },

    #[error("filtration flux is not monotone: phi'({at}) = {slope:e}")]
    NonMonotoneFlux { at: f64, slope: f64 },

    #[error("invalid reaction network: {0}")]
    InvalidReaction(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
