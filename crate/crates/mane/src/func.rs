//! Named coefficient functions used to specify models declaratively.
//!
//! Models are built from these closed forms rather than runtime-parsed
//! expressions, which keeps run-configuration files declarative and
//! bit-reproducible.

use serde::{Deserialize, Serialize};

/// Scalar potential `Φ` with a closed-form derivative. The diffusion drift is
/// `b(x) = -Φ'(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialFn {
    /// `Φ(x) = ½ (x² - 1)²`, the symmetric double well with minima at ±1.
    DoubleWell,
    /// `Φ(x) = slope · x`, i.e. constant drift `b = -slope`.
    Linear { slope: f64 },
    /// `Φ(x) = Σ coeffs[i] · x^i`.
    Poly { coeffs: Vec<f64> },
}

impl PotentialFn {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            PotentialFn::DoubleWell => {
                let w = x * x - 1.0;
                0.5 * w * w
            }
            PotentialFn::Linear { slope } => slope * x,
            PotentialFn::Poly { coeffs } => horner(coeffs, x),
        }
    }

    /// `Φ'(x)`. For the double well, `Φ'(x) = 2x(x² - 1)`.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            PotentialFn::DoubleWell => 2.0 * x * (x * x - 1.0),
            PotentialFn::Linear { slope } => *slope,
            PotentialFn::Poly { coeffs } => horner_derivative(coeffs, x),
        }
    }
}

/// Nonnegative scalar coefficient function, used for dispersions `σ` and
/// birth/death rates `λ`, `μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFn {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    /// SIS infection rate `ρ x (1 - x)`.
    Sis { rho: f64 },
    Poly { coeffs: Vec<f64> },
}

impl ScalarFn {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Constant { value } => *value,
            ScalarFn::Linear { intercept, slope } => intercept + slope * x,
            ScalarFn::Sis { rho } => rho * x * (1.0 - x),
            ScalarFn::Poly { coeffs } => horner(coeffs, x),
        }
    }
}

/// State-independent convex Hamiltonian `H(p)`.
///
/// Only families with a finite interior minimizer are provided; both roots of
/// `H(p) = c` then exist for every `c` above the critical value `inf_p H(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianFn {
    /// `H(p) = ½ p²`.
    Quadratic,
    /// `H(p) = drift · p + ½ p²`, the Hamiltonian of Brownian motion with
    /// constant drift.
    DriftedQuadratic { drift: f64 },
}

impl HamiltonianFn {
    pub fn value(&self, p: f64) -> f64 {
        match self {
            HamiltonianFn::Quadratic => 0.5 * p * p,
            HamiltonianFn::DriftedQuadratic { drift } => drift * p + 0.5 * p * p,
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
}
