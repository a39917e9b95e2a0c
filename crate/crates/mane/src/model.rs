//! Hamiltonian/Lagrangian model families and their Mañé critical values.
//!
//! Four families are supported, each with a closed-form Hamiltonian `H(x, p)`
//! convex in `p`:
//!
//! - small-noise diffusion `dX = b(X) dt + √ε σ(X) dB` with `b = -Φ'`:
//!   `H(x, p) = b(x) p + ½ (σ(x) p)²`
//! - birth-and-death process with rates `n λ(x)`, `n μ(x)`:
//!   `H(x, p) = λ(x)(e^p - 1) + μ(x)(e^{-p} - 1)`
//! - pure-birth network: `H(x, p) = Σ_j λ_j(x_j)(e^{p_j} - 1)`
//! - state-independent convex `H(p)`.

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::func::{HamiltonianFn, PotentialFn, ScalarFn};
use crate::search::{bisect_root, golden_min, grid_refine_min, legendre_max};

/// Small-noise diffusion with gradient drift `b(x) = -Φ'(x)` and dispersion
/// `σ(x) > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionModel {
    pub potential: PotentialFn,
    pub sigma: ScalarFn,
}

impl DiffusionModel {
    pub fn drift(&self, x: f64) -> f64 {
        -self.potential.derivative(x)
    }

    pub fn dphi(&self, x: f64) -> f64 {
        self.potential.derivative(x)
    }

    pub fn sigma(&self, x: f64) -> f64 {
        self.sigma.value(x)
    }
}

/// Birth-and-death process on the lattice `N/n` with bounded Lipschitz rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirthDeathModel {
    pub birth: ScalarFn,
    pub death: ScalarFn,
}

impl BirthDeathModel {
    pub fn birth(&self, x: f64) -> f64 {
        self.birth.value(x)
    }

    pub fn death(&self, x: f64) -> f64 {
        self.death.value(x)
    }
}

/// Pure-birth network; coordinate `j` jumps at rate `λ_j(x_j)`.
///
/// Supported only for critical-value and subsolution-witness computations,
/// not for potential evaluation or simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureBirthModel {
    pub rates: Vec<ScalarFn>,
}

impl PureBirthModel {
    /// `H(x, p) = Σ_j λ_j(x_j)(e^{p_j} - 1)` for vectors `x`, `p`.
    pub fn hamiltonian_vec(&self, x: &[f64], p: &[f64]) -> f64 {
        assert_eq!(x.len(), self.rates.len());
        assert_eq!(p.len(), self.rates.len());
        self.rates
            .iter()
            .zip(x.iter().zip(p.iter()))
            .map(|(rate, (&xj, &pj))| rate.value(xj) * (pj.exp() - 1.0))
            .sum()
    }
}

/// State-independent convex Hamiltonian `H(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateIndependentModel {
    pub hamiltonian: HamiltonianFn,
}

impl StateIndependentModel {
    pub fn h(&self, p: f64) -> f64 {
        self.hamiltonian.value(p)
    }

    /// Minimizer and minimum of `H`, located by bracket expansion plus golden
    /// section. The minimum is the Mañé critical value of the model.
    pub fn minimum(&self) -> (f64, f64) {
        let mut r = 1.0;
        while self.h(-r) <= self.h(-r + 1e-6 * r) || self.h(r) <= self.h(r - 1e-6 * r) {
            r *= 2.0;
            if r > 1e12 {
                break;
            }
        }
        golden_min(|p| self.h(p), -r, r, 1e-13)
    }

    /// The two roots of `H(p) = c` on either side of the minimizer.
    /// Requires `c` at or above the minimum (tiny deficits clamp to the
    /// minimizer).
    pub fn roots(&self, c: f64) -> Result<(f64, f64)> {
        let (p_hat, h_min) = self.minimum();
        let deficit = c - h_min;
        if deficit < -defaults::DISCRIMINANT_CLAMP {
            return Err(Error::BelowCritical {
                c,
                z: f64::NAN,
                discriminant: deficit,
            });
        }
        if deficit <= 0.0 {
            return Ok((p_hat, p_hat));
        }
        let mut hi = p_hat + 1.0;
        while self.h(hi) < c {
            hi = p_hat + 2.0 * (hi - p_hat);
        }
        let p_plus = bisect_root(|p| self.h(p) - c, p_hat, hi, 1e-14);
        let mut lo = p_hat - 1.0;
        while self.h(lo) < c {
            lo = p_hat - 2.0 * (p_hat - lo);
        }
        let p_minus = bisect_root(|p| self.h(p) - c, lo, p_hat, 1e-14);
        Ok((p_minus, p_plus))
    }
}

/// Tagged model family exposing `H(x, p)` and drift/rate data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessModel {
    Diffusion(DiffusionModel),
    BirthDeath(BirthDeathModel),
    PureBirth(PureBirthModel),
    StateIndependent(StateIndependentModel),
}

impl ProcessModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProcessModel::Diffusion(_) => "diffusion",
            ProcessModel::BirthDeath(_) => "birth_death",
            ProcessModel::PureBirth(_) => "pure_birth",
            ProcessModel::StateIndependent(_) => "state_independent",
        }
    }

    pub fn as_diffusion(&self) -> Result<&DiffusionModel> {
        match self {
            ProcessModel::Diffusion(m) => Ok(m),
            other => Err(Error::WrongModel {
                expected: "diffusion",
                got: other.kind_name(),
            }),
        }
    }

    pub fn as_birth_death(&self) -> Result<&BirthDeathModel> {
        match self {
            ProcessModel::BirthDeath(m) => Ok(m),
            other => Err(Error::WrongModel {
                expected: "birth_death",
                got: other.kind_name(),
            }),
        }
    }

    /// `H(x, p)` in closed form. State-independent models ignore `x`;
    /// pure-birth models are scalar only when one-dimensional.
    pub fn hamiltonian(&self, x: f64, p: f64) -> f64 {
        match self {
            ProcessModel::Diffusion(m) => {
                let sp = m.sigma(x) * p;
                m.drift(x) * p + 0.5 * sp * sp
            }
            ProcessModel::BirthDeath(m) => {
                m.birth(x) * (p.exp() - 1.0) + m.death(x) * ((-p).exp() - 1.0)
            }
            ProcessModel::PureBirth(m) => {
                assert_eq!(
                    m.rates.len(),
                    1,
                    "scalar hamiltonian on a multi-dimensional pure-birth model; use hamiltonian_vec"
                );
                m.rates[0].value(x) * (p.exp() - 1.0)
            }
            ProcessModel::StateIndependent(m) => m.h(p),
        }
    }

    /// Fenchel-Legendre transform `L(x, v) = sup_p { p v - H(x, p) }`.
    ///
    /// Diffusions use the closed form `|v - b(x)|² / (2 σ(x)²)`; other
    /// families maximize numerically over a bracket expanded from
    /// `[-search_radius, search_radius]`.
    pub fn lagrangian(&self, x: f64, v: f64, search_radius: f64) -> Result<f64> {
        match self {
            ProcessModel::Diffusion(m) => {
                let s = m.sigma(x);
                let d = v - m.drift(x);
                Ok(d * d / (2.0 * s * s))
            }
            ProcessModel::PureBirth(_) => Err(Error::WrongModel {
                expected: "diffusion, birth_death or state_independent",
                got: "pure_birth",
            }),
            _ => self.lagrangian_numeric(x, v, search_radius),
        }
    }

    /// Numeric Legendre transform, available for every scalar family as an
    /// independent route next to the diffusion closed form.
    pub fn lagrangian_numeric(&self, x: f64, v: f64, search_radius: f64) -> Result<f64> {
        let (_, val) = legendre_max(
            |p| p * v - self.hamiltonian(x, p),
            x,
            v,
            search_radius,
            defaults::LEGENDRE_BRACKET_CAP,
            defaults::GOLDEN_XTOL,
        )?;
        Ok(val)
    }

    /// Mañé critical value `c_H = sup_x inf_p H(x, p)`, with the infimum over
    /// `x` taken on a `grid_n`-point grid over `[a, b]` refined locally.
    ///
    /// Closed forms per family: `-inf_x b²/(2σ²)` (diffusion),
    /// `-inf_x (√μ - √λ)²` (birth-death), `-inf_x Σ_j λ_j` (pure birth),
    /// `inf_p H(p)` (state-independent).
    pub fn critical_value(&self, domain: &WorkingDomain, grid_n: usize) -> f64 {
        self.critical_value_on(domain.a, domain.b, grid_n)
    }

    pub(crate) fn critical_value_on(&self, a: f64, b: f64, grid_n: usize) -> f64 {
        let grid_n = grid_n.max(2);
        match self {
            ProcessModel::Diffusion(m) => {
                let f = |x: f64| {
                    let bx = m.drift(x);
                    let s = m.sigma(x);
                    bx * bx / (2.0 * s * s)
                };
                let (_, v) = grid_refine_min(f, a, b, grid_n, defaults::GOLDEN_XTOL);
                -v
            }
            ProcessModel::BirthDeath(m) => {
                let f = |x: f64| {
                    let d = m.death(x).max(0.0).sqrt() - m.birth(x).max(0.0).sqrt();
                    d * d
                };
                let (_, v) = grid_refine_min(f, a, b, grid_n, defaults::GOLDEN_XTOL);
                -v
            }
            ProcessModel::PureBirth(m) => {
                // inf_x Σ_j λ_j(x_j) separates per coordinate.
                let total: f64 = m
                    .rates
                    .iter()
                    .map(|r| grid_refine_min(|x| r.value(x), a, b, grid_n, defaults::GOLDEN_XTOL).1)
                    .sum();
                -total
            }
            ProcessModel::StateIndependent(m) => m.minimum().1,
        }
    }

    /// Checks positivity/boundedness of the model coefficients on the domain,
    /// and convexity in `p` for state-independent Hamiltonians.
    pub fn validate_on(&self, domain: &WorkingDomain) -> Result<()> {
        domain.validate()?;
        let n = defaults::VALIDATION_GRID_N;
        let step = (domain.b - domain.a) / (n - 1) as f64;
        match self {
            ProcessModel::Diffusion(m) => {
                for i in 0..n {
                    let x = domain.a + step * i as f64;
                    let s = m.sigma(x);
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::config(format!(
                            "sigma({x}) = {s} must be strictly positive on the working domain"
                        )));
                    }
                }
            }
            ProcessModel::BirthDeath(m) => {
                // open interval: skip the endpoints
                for i in 1..n - 1 {
                    let x = domain.a + step * i as f64;
                    let (l, mu) = (m.birth(x), m.death(x));
                    if !(l > 0.0) || !(mu > 0.0) || !l.is_finite() || !mu.is_finite() {
                        return Err(Error::config(format!(
                            "rates must be strictly positive on ({}, {}): lambda({x}) = {l}, mu({x}) = {mu}",
                            domain.a, domain.b
                        )));
                    }
                }
            }
            ProcessModel::PureBirth(m) => {
                if m.rates.is_empty() {
                    return Err(Error::config("pure-birth model needs at least one rate"));
                }
                for (j, r) in m.rates.iter().enumerate() {
                    for i in 0..n {
                        let x = domain.a + step * i as f64;
                        let v = r.value(x);
                        if v < 0.0 || !v.is_finite() {
                            return Err(Error::config(format!(
                                "pure-birth rate {j} is negative at x = {x}"
                            )));
                        }
                    }
                }
            }
            ProcessModel::StateIndependent(m) => {
                for i in 0..=40 {
                    let p1 = -5.0 + 0.25 * i as f64;
                    for j in 0..=40 {
                        let p2 = -5.0 + 0.25 * j as f64;
                        let mid = m.h(0.5 * (p1 + p2));
                        let chord = 0.5 * (m.h(p1) + m.h(p2));
                        if mid > chord + 1e-9 {
                            return Err(Error::config(format!(
                                "H is not convex between p = {p1} and p = {p2}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Open working interval with initial point, horizon and boundary cost.
///
/// Exit problems use `g ≡ 0` on the two-point boundary `{a, b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingDomain {
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    /// Horizon `T` used by orchestration when no explicit `T` is passed.
    pub horizon: f64,
    #[serde(default)]
    pub g_a: f64,
    #[serde(default)]
    pub g_b: f64,
}

impl WorkingDomain {
    pub fn new(a: f64, b: f64, x0: f64, horizon: f64) -> Result<Self> {
        let d = WorkingDomain {
            a,
            b,
            x0,
            horizon,
            g_a: 0.0,
            g_b: 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.x0 && self.x0 < self.b) {
            return Err(Error::config(format!(
                "need a < x0 < b, got a = {}, x0 = {}, b = {}",
                self.a, self.x0, self.b
            )));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config(format!("horizon T = {} must be positive", self.horizon)));
        }
        if !self.g_a.is_finite() || !self.g_b.is_finite() {
            return Err(Error::config("boundary costs must be finite"));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    /// Boundary cost at a boundary point; `y` must be `a` or `b`.
    pub fn boundary_cost(&self, y: f64) -> f64 {
        if y == self.a {
            self.g_a
        } else {
            debug_assert_eq!(y, self.b);
            self.g_b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn double_well() -> ProcessModel {
        ProcessModel::Diffusion(DiffusionModel {
            potential: PotentialFn::DoubleWell,
            sigma: ScalarFn::Constant { value: 1.0 },
        })
    }

    fn unit_bd() -> ProcessModel {
        ProcessModel::BirthDeath(BirthDeathModel {
            birth: ScalarFn::Constant { value: 1.0 },
            death: ScalarFn::Constant { value: 1.0 },
        })
    }

    fn sis() -> ProcessModel {
        ProcessModel::BirthDeath(BirthDeathModel {
            birth: ScalarFn::Sis { rho: 3.0 },
            death: ScalarFn::Linear {
                intercept: 0.0,
                slope: 1.0,
            },
        })
    }

    fn drifted() -> ProcessModel {
        ProcessModel::StateIndependent(StateIndependentModel {
            hamiltonian: HamiltonianFn::DriftedQuadratic { drift: 1.0 },
        })
    }

    #[test]
    fn hamiltonian_double_well_at_the_well() {
        // DΦ(1) = 0, so H(1, 2) = 0·2 + ½·4 = 2.
        assert!((double_well().hamiltonian(1.0, 2.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_unit_bd_vanishes_at_zero() {
        assert_eq!(unit_bd().hamiltonian(0.37, 0.0), 0.0);
    }

    #[test]
    fn hamiltonian_drifted_quadratic() {
        assert!((drifted().hamiltonian(123.0, 1.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn lagrangian_free_brownian() {
        // b = 0, σ = 1: L(x, v) = v²/2.
        let m = ProcessModel::Diffusion(DiffusionModel {
            potential: PotentialFn::Linear { slope: 0.0 },
            sigma: ScalarFn::Constant { value: 1.0 },
        });
        assert!((m.lagrangian(0.3, 2.0, 4.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lagrangian_quadratic_self_dual() {
        let m = ProcessModel::StateIndependent(StateIndependentModel {
            hamiltonian: HamiltonianFn::Quadratic,
        });
        assert!((m.lagrangian(0.0, 1.0, 4.0).unwrap() - 0.5).abs() < 1e-7);
    }

    #[test]
    fn lagrangian_unit_bd_at_zero_velocity() {
        // sup_p { 2 - e^p - e^{-p} } = 0, attained at p = 0.
        let l = unit_bd().lagrangian(0.0, 0.0, 4.0).unwrap();
        assert!(l.abs() < 1e-6, "L = {l}");
    }

    #[test]
    fn critical_value_double_well_is_zero() {
        // DΦ(±1) = 0 inside the domain.
        let d = WorkingDomain::new(-1.42, 1.42, 1.0, 0.25).unwrap();
        let c = double_well().critical_value(&d, 2048);
        assert!(c.abs() < 1e-10, "c_H = {c}");
    }

    #[test]
    fn critical_value_sis_is_zero() {
        // λ(2/3) = μ(2/3) = 2/3.
        let d = WorkingDomain::new(0.5, 5.0 / 6.0, 2.0 / 3.0, 0.5).unwrap();
        let c = sis().critical_value(&d, 2048);
        assert!(c.abs() < 1e-10, "c_H = {c}");
    }

    #[test]
    fn critical_value_drifted_quadratic() {
        let d = WorkingDomain::new(-1.2, 1.1, 0.0, 1.0).unwrap();
        let c = drifted().critical_value(&d, 64);
        assert!((c + 0.5).abs() < 1e-10, "c_H = {c}");
    }

    #[test]
    fn critical_lower_bound_holds_on_grid() {
        // inf_p H(x, p) <= c_H for sampled x.
        let d = WorkingDomain::new(0.5, 5.0 / 6.0, 2.0 / 3.0, 0.5).unwrap();
        let m = sis();
        let c_h = m.critical_value(&d, 2048);
        for i in 0..=32 {
            let x = d.a + (d.b - d.a) * i as f64 / 32.0;
            let (_, inf_p) = golden_min(|p| m.hamiltonian(x, p), -30.0, 30.0, 1e-12);
            assert!(inf_p <= c_h + 1e-9, "x = {x}: inf_p = {inf_p}, c_H = {c_h}");
        }
    }

    #[test]
    fn pure_birth_witness_is_a_subsolution() {
        // For c in (-λ*, 0) and α = log(1 + c/λ*), H(x, α·1) <= c.
        let m = PureBirthModel {
            rates: vec![
                ScalarFn::Linear {
                    intercept: 1.0,
                    slope: 0.5,
                },
                ScalarFn::Constant { value: 2.0 },
            ],
        };
        let model = ProcessModel::PureBirth(m.clone());
        let d = WorkingDomain::new(0.0, 4.0, 1.0, 1.0).unwrap();
        let lambda_star = -model.critical_value(&d, 512);
        assert!(lambda_star > 0.0);
        for frac in [0.1, 0.5, 0.9] {
            let c = -frac * lambda_star;
            let alpha = (1.0 + c / lambda_star).ln();
            for i in 0..=16 {
                for j in 0..=16 {
                    let x = [0.25 * i as f64, 0.25 * j as f64];
                    let h = m.hamiltonian_vec(&x, &[alpha, alpha]);
                    assert!(h <= c + 1e-9, "H = {h}, c = {c} at {x:?}");
                }
            }
        }
    }

    #[test]
    fn midpoint_convexity_in_p() {
        let d = WorkingDomain::new(0.5, 5.0 / 6.0, 2.0 / 3.0, 0.5).unwrap();
        for m in [double_well(), sis(), drifted()] {
            for i in 0..=8 {
                let x = d.a + (d.b - d.a) * i as f64 / 8.0;
                for p1 in [-3.0, -1.0, -0.2, 0.4, 2.0] {
                    for p2 in [-2.5, 0.0, 0.7, 3.0] {
                        let mid = m.hamiltonian(x, 0.5 * (p1 + p2));
                        let chord = 0.5 * (m.hamiltonian(x, p1) + m.hamiltonian(x, p2));
                        assert!(mid <= chord + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn legendre_closed_form_matches_numeric_for_diffusion() {
        let m = double_well();
        for x in [-1.2, -0.4, 0.9, 1.3] {
            for v in [-2.0, -0.5, 0.0, 1.5, 3.0] {
                let closed = m.lagrangian(x, v, 4.0).unwrap();
                let numeric = m.lagrangian_numeric(x, v, 4.0).unwrap();
                assert!(
                    (closed - numeric).abs() <= 1e-6,
                    "x={x} v={v}: {closed} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn domain_rejects_bad_order() {
        assert!(WorkingDomain::new(1.0, -1.0, 0.0, 1.0).is_err());
        assert!(WorkingDomain::new(-1.0, 1.0, 2.0, 1.0).is_err());
        assert!(WorkingDomain::new(-1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn validate_rejects_vanishing_rates() {
        // μ(x) = x hits zero at the left edge of (-0.5, 0.5).
        let m = ProcessModel::BirthDeath(BirthDeathModel {
            birth: ScalarFn::Constant { value: 1.0 },
            death: ScalarFn::Linear {
                intercept: 0.0,
                slope: 1.0,
            },
        });
        let d = WorkingDomain::new(-0.5, 0.5, 0.1, 1.0).unwrap();
        assert!(m.validate_on(&d).is_err());
    }
}
