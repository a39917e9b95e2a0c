//! Central numeric tolerances and default knobs. Stated once so that every
//! module and test pins against the same values.

/// Tolerance for identities that hold in exact (closed-form) arithmetic.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// Tolerance for results of numeric optimization.
pub const OPT_TOL: f64 = 1e-6;

/// Absolute tolerance for the adaptive Simpson quadrature behind `S^c`.
pub const QUAD_TOL: f64 = 1e-10;

/// Recursion limit for the adaptive Simpson quadrature.
pub const QUAD_MAX_DEPTH: u32 = 40;

/// Discriminants in `[-DISCRIMINANT_CLAMP, 0)` are clamped to zero; anything
/// more negative is a hard `BelowCritical` error.
pub const DISCRIMINANT_CLAMP: f64 = 1e-12;

/// Margin for the strict `c > c_H` check on potential queries.
pub const CRITICAL_MARGIN: f64 = 1e-12;

/// Grid resolution for the `inf` over `x` inside critical-value computations.
pub const CRITICAL_GRID_N: usize = 2048;

/// Absolute x-tolerance for golden-section searches.
pub const GOLDEN_XTOL: f64 = 1e-9;

/// Initial upper bracket offset (above `c_H`) for energy-level maximization.
pub const C_BRACKET_START: f64 = 1.0;

/// Cap on the bracket offset; expansion past this reports `Unbounded`.
pub const C_BRACKET_CAP: f64 = 1e6;

/// Lower bracket offset: the search starts at `c_H + C_LO_OFFSET * max(1, |c_H|)`.
pub const C_LO_OFFSET: f64 = 1e-9;

/// Initial half-width of the Fenchel-Legendre maximization bracket.
pub const LEGENDRE_RADIUS: f64 = 8.0;

/// Cap on the Legendre bracket half-width; expansion past this is `NonConvex`.
pub const LEGENDRE_BRACKET_CAP: f64 = 1e6;

/// Lookup-grid size for locating the sign switch of `S^c(x,a) - S^c(x,b)`.
pub const SIGN_LUT_POINTS: usize = 4096;

/// Half-width of the Hopf-Lax minimization window around the target point.
pub const HOPF_LAX_RADIUS: f64 = 20.0;

/// Grid size of the Hopf-Lax scan before golden-section refinement.
pub const HOPF_LAX_GRID: usize = 2001;

/// Relative tolerance declared for grid (dynamic-programming) oracles.
pub const GRID_REL_TOL: f64 = 0.05;

/// Sample count used when validating positivity of coefficients on a domain.
pub const VALIDATION_GRID_N: usize = 129;

/// The gap example flags its performance-loss constant above this threshold.
pub const K_WARN_THRESHOLD: f64 = 0.3;

/// Event cap per birth-death path; guards runaway rate models.
pub const MAX_EVENTS_PER_PATH: u64 = 10_000_000;
