//! The Mañé potential `S^c(x, y)`.
//!
//! For each model family the stationary equation `H(z, p(z)) = c` has two
//! closed-form root branches; the potential is the primitive of the branch
//! selected by `sign(z - x)`, so
//!
//! `S^c(x, y) = ∫_x^y p^c(z; sign(y - x)) dz`,
//!
//! evaluated by adaptive Simpson quadrature. The integration runs strictly
//! from `x` to `y`, so panels never straddle the anchor and the branch sign is
//! constant along the way.

use crate::branch_sign;
use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{ProcessModel, WorkingDomain};
use crate::quad::adaptive_simpson;

/// A validated Mañé-potential evaluation request.
#[derive(Clone, Debug)]
pub struct PotentialQuery<'a> {
    pub model: &'a ProcessModel,
    pub domain: &'a WorkingDomain,
    pub c: f64,
    pub x: f64,
    pub y: f64,
    pub quad_tol: f64,
    pub max_depth: u32,
}

impl<'a> PotentialQuery<'a> {
    /// Builds a query with default quadrature controls, checking that
    /// `c > c_H` strictly and that both endpoints lie in the closed interval.
    pub fn new(
        model: &'a ProcessModel,
        domain: &'a WorkingDomain,
        c: f64,
        x: f64,
        y: f64,
    ) -> Result<Self> {
        let q = PotentialQuery {
            model,
            domain,
            c,
            x,
            y,
            quad_tol: defaults::QUAD_TOL,
            max_depth: defaults::QUAD_MAX_DEPTH,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let c_h = self
            .model
            .critical_value(self.domain, defaults::CRITICAL_GRID_N);
        let margin = defaults::CRITICAL_MARGIN * c_h.abs().max(1.0);
        if !(self.c > c_h + margin) {
            return Err(Error::config(format!(
                "energy level c = {} must exceed the critical value c_H = {c_h}",
                self.c
            )));
        }
        for (name, v) in [("x", self.x), ("y", self.y)] {
            if !(self.domain.a <= v && v <= self.domain.b) {
                return Err(Error::config(format!(
                    "{name} = {v} is outside the closed interval [{}, {}]",
                    self.domain.a, self.domain.b
                )));
            }
        }
        if !(self.quad_tol > 0.0) || self.max_depth == 0 {
            return Err(Error::config("quadrature controls must be positive"));
        }
        Ok(())
    }

    pub fn evaluate(&self) -> Result<f64> {
        mane_potential_raw(self.model, self.c, self.x, self.y, self.quad_tol, self.max_depth)
    }
}

/// Evaluates `S^c(x, y)` for a validated query.
pub fn mane_potential(q: &PotentialQuery) -> Result<f64> {
    q.evaluate()
}

/// Gradient `p^c(z)` of `y ↦ S^c(anchor, y)` at `z`, with the root branch
/// picked by `sign(z - anchor)` (ties resolve to `+1`).
pub fn gradient_pc(model: &ProcessModel, anchor: f64, z: f64, c: f64) -> Result<f64> {
    pc_with_sign(model, z, c, branch_sign(z - anchor))
}

/// Root of `H(z, p) = c` on the branch selected by `sign` (`±1`).
///
/// Diffusion: `p = (1/σ)(Φ'/σ ± sqrt(Φ'²/σ² + 2c))`.
/// Birth-death: `p = log[(c+λ+μ)/(2λ) ± sqrt(((c+λ+μ)/(2λ))² - μ/λ)]`.
/// State-independent: located numerically on either side of the minimizer.
pub(crate) fn pc_with_sign(model: &ProcessModel, z: f64, c: f64, sign: f64) -> Result<f64> {
    match model {
        ProcessModel::Diffusion(m) => {
            let sig = m.sigma(z);
            let dphi = m.dphi(z);
            let ratio = dphi / sig;
            let disc = clamp_discriminant(ratio * ratio + 2.0 * c, c, z)?;
            Ok((ratio + sign * disc.sqrt()) / sig)
        }
        ProcessModel::BirthDeath(m) => {
            let lam = m.birth(z);
            let mu = m.death(z);
            let a = (c + lam + mu) / (2.0 * lam);
            let disc = clamp_discriminant(a * a - mu / lam, c, z)?;
            Ok((a + sign * disc.sqrt()).ln())
        }
        ProcessModel::StateIndependent(m) => {
            let (p_minus, p_plus) = m.roots(c)?;
            Ok(if sign >= 0.0 { p_plus } else { p_minus })
        }
        ProcessModel::PureBirth(_) => Err(Error::WrongModel {
            expected: "diffusion, birth_death or state_independent",
            got: "pure_birth",
        }),
    }
}

fn clamp_discriminant(disc: f64, c: f64, z: f64) -> Result<f64> {
    if disc >= 0.0 {
        Ok(disc)
    } else if disc >= -defaults::DISCRIMINANT_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::BelowCritical {
            c,
            z,
            discriminant: disc,
        })
    }
}

/// `S^c(x, y)` without the query-level validation; used on hot paths where
/// `c > c_H` has already been established.
pub(crate) fn mane_potential_raw(
    model: &ProcessModel,
    c: f64,
    x: f64,
    y: f64,
    quad_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let sign = branch_sign(y - x);
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    let integrand = |z: f64| pc_with_sign(model, z, c, sign);
    let val = adaptive_simpson(&integrand, lo, hi, quad_tol, max_depth)?;
    Ok(sign * val)
}

/// Convenience wrapper with the default quadrature controls.
pub(crate) fn potential_value(model: &ProcessModel, c: f64, x: f64, y: f64) -> Result<f64> {
    mane_potential_raw(model, c, x, y, defaults::QUAD_TOL, defaults::QUAD_MAX_DEPTH)
}

/// Samples `(z, p^c(z))` on `n` points from `x` to `y`; the profile the CLI
/// prints as CSV for plotting.
pub fn integrand_profile(
    model: &ProcessModel,
    x: f64,
    y: f64,
    c: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    let n = n.max(2);
    let sign = branch_sign(y - x);
    let step = (y - x) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let z = x + step * i as f64;
            pc_with_sign(model, z, c, sign).map(|p| (z, p))
        })
        .collect()
}
