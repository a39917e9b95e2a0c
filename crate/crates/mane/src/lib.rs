//! Numerical toolkit for Mañé potentials and min-max representations of
//! viscosity solutions of convex Hamilton-Jacobi equations, with
//! subsolution-driven importance sampling for rare-event exit probabilities.
//!
//! The library is organized around the objects of the underlying variational
//! theory:
//!
//! - [`model`] — Hamiltonian/Lagrangian model families (small-noise diffusions,
//!   birth-and-death processes, pure-birth networks, state-independent
//!   Hamiltonians) and their Mañé critical values `c_H`.
//! - [`potential`] — the Mañé potential `S^c(x, y)`, evaluated by integrating
//!   the closed-form stationary gradient `p^c` with adaptive quadrature.
//! - [`subsolution`] — the min-max optimization over boundary points and
//!   energy levels, the two subsolution families `U^c` and `U^{c,y,K}`, the
//!   importance-sampling controls they induce, and the Hopf-Lax-Oleinik
//!   formula for state-independent Hamiltonians.
//! - [`oracle`] — brute-force dynamic-programming solvers for the Mather
//!   action and the exit-problem value function, used to cross-check the
//!   min-max machinery through the duality between `S^c` and `M(t, y; x)`.
//! - [`sampler`] — Euler-Maruyama and event-driven Monte Carlo engines with
//!   Girsanov/exponential-tilt likelihood weights and reproducible parallel
//!   batching.
//! - [`runconfig`] / [`experiments`] — declarative run configuration and the
//!   benchmark experiments (double-well diffusion table, SIS birth-death
//!   table, drifted-Brownian min-max gap example).

// `!(x > 0.0)`-style guards are used on purpose: they reject NaN, which the
// suggested `x <= 0.0` would accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod defaults;
pub mod error;
pub mod experiments;
pub mod func;
pub mod model;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod runconfig;
pub mod sampler;
pub mod search;
pub mod subsolution;

pub use error::{Error, Result};
pub use model::{ProcessModel, WorkingDomain};
pub use potential::{mane_potential, PotentialQuery};
pub use subsolution::{minmax, MinMaxResult, Subsolution};

/// Sign convention used throughout for branch selection: ties resolve to `+1`.
#[inline]
pub fn branch_sign(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
