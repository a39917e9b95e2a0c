use thiserror::Error;

/// Errors surfaced by the numerical machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// Bracket expansion for a Fenchel-Legendre maximization ran past its cap
    /// without trapping an interior maximizer. Usually signals a model whose
    /// Hamiltonian is not convex (or not superlinear) in `p`.
    #[error("Legendre bracket expanded past {cap:e} without an interior maximizer (x = {x}, v = {v})")]
    NonConvex { x: f64, v: f64, cap: f64 },

    /// The requested energy level lies below the local critical level: the
    /// discriminant of the stationary equation H(z, p) = c is negative.
    #[error("energy level c = {c} is below the local critical level at z = {z} (discriminant {discriminant:e})")]
    BelowCritical { c: f64, z: f64, discriminant: f64 },

    /// Adaptive quadrature hit its recursion limit before reaching tolerance.
    #[error("adaptive quadrature hit depth limit {max_depth} before tolerance {tol:e} on [{a}, {b}]")]
    QuadratureFailure {
        a: f64,
        b: f64,
        tol: f64,
        max_depth: u32,
    },

    /// The concave objective in the energy-level optimization kept increasing
    /// past the bracket cap.
    #[error("c-bracket expansion exceeded {cap:e}; objective appears unbounded in c")]
    Unbounded { cap: f64 },

    /// An operation was invoked on a model family it does not apply to.
    #[error("operation requires a {expected} model, got {got}")]
    WrongModel {
        expected: &'static str,
        got: &'static str,
    },

    /// The target state cannot be reached on the grid: `v_max * t < |y - x|`.
    #[error("unreachable on this grid: v_max * t = {reach} < |y - x| = {distance}")]
    Unreachable { reach: f64, distance: f64 },

    /// Invalid configuration or preconditions.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
