//! Min-max optimization and the two subsolution families.
//!
//! The terminal-value/exit value function on a one-dimensional domain has the
//! min-max representation
//!
//! `V(0, x0) = inf_{y in {a,b}} sup_{c > c_H} { g(y) + S^c(x0, y) - c T }`,
//!
//! whose optimizers `(c*, y*)` drive two families of viscosity subsolutions:
//!
//! - `U^c(t, x)   = min_y { g(y) + S^c(x, y) } - c (T - t)`
//! - `U^{c,y,K}(t, x) = g(y) + S^c(x0, y) - S^c(x0, x) - c (T - t) - K`
//!
//! with `K = g(y) + S^c(x0, y) - min_x { g(x) + S^c(x0, x) }` restoring the
//! terminal-boundary admissibility of the second family. Both share the same
//! initial value `V(0, x0) - K`, and a saddle point of the min-max forces
//! `K = 0`.

use crate::branch_sign;
use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{ProcessModel, StateIndependentModel, WorkingDomain};
use crate::potential::{pc_with_sign, potential_value};
use crate::search::{golden_max, grid_refine_min};

/// Energy-level optimization result for one boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryOptimum {
    pub y: f64,
    pub c_opt: f64,
    pub objective: f64,
}

/// Output of the min-max (and max-min) optimization at `(0, x0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxResult {
    /// `V(0, x0) = inf_y sup_c { g(y) + S^c(x0, y) - c T }`.
    pub value: f64,
    pub c_star: f64,
    /// Optimal boundary point, one of `{a, b}`; ties break toward `b`.
    pub y_star: f64,
    pub per_boundary: [BoundaryOptimum; 2],
    /// `sup_c inf_y { g(y) + S^c(x0, y) - c T }`.
    pub maxmin_value: f64,
    /// `value - maxmin_value >= 0` up to numerical noise.
    pub gap: f64,
    /// Performance-loss constant of the anchored family.
    pub k: f64,
}

/// Maximizes the concave map `c ↦ g_y + S^c(x0, y) - c T` over `(c_H, ∞)`.
///
/// Golden section runs on `(c_H + δ, hi]` with `hi` doubled from `bracket_hi`
/// until the derivative estimate at `hi` turns negative; concavity then
/// guarantees the bracket contains the maximizer.
pub fn optimize_c(
    model: &ProcessModel,
    domain: &WorkingDomain,
    x0: f64,
    y: f64,
    horizon: f64,
    g_y: f64,
    bracket_hi: f64,
) -> Result<(f64, f64)> {
    if !(horizon > 0.0) {
        return Err(Error::config("optimize_c: horizon must be positive"));
    }
    let c_h = model.critical_value(domain, defaults::CRITICAL_GRID_N);
    let objective =
        |c: f64| -> Result<f64> { Ok(g_y + potential_value(model, c, x0, y)? - c * horizon) };
    maximize_over_c(objective, c_h, bracket_hi)
}

/// Shared bracket-expansion + golden-section driver for concave objectives of
/// the energy level.
fn maximize_over_c<F>(mut f: F, c_h: f64, bracket_hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let delta = defaults::C_LO_OFFSET * c_h.abs().max(1.0);
    let lo = c_h + delta;
    let mut hi = if bracket_hi > lo { bracket_hi } else { lo + defaults::C_BRACKET_START };
    loop {
        let eta = 1e-6 * (hi - c_h).max(1.0);
        if f(hi + eta)? < f(hi)? {
            break;
        }
        hi = c_h + 2.0 * (hi - c_h);
        if hi - c_h > defaults::C_BRACKET_CAP {
            return Err(Error::Unbounded {
                cap: defaults::C_BRACKET_CAP,
            });
        }
    }
    golden_max(f, lo, hi, defaults::GOLDEN_XTOL)
}

/// Runs the full min-max at `(0, x0)`: per-boundary energy optimization, the
/// two-point infimum, the max-min value, and the constant `K`.
pub fn minmax(model: &ProcessModel, domain: &WorkingDomain, horizon: f64) -> Result<MinMaxResult> {
    model.validate_on(domain)?;
    let c_h = model.critical_value(domain, defaults::CRITICAL_GRID_N);
    let opt_at = |y: f64, g_y: f64| -> Result<BoundaryOptimum> {
        let (c_opt, objective) = optimize_c(
            model,
            domain,
            domain.x0,
            y,
            horizon,
            g_y,
            c_h + defaults::C_BRACKET_START,
        )?;
        Ok(BoundaryOptimum { y, c_opt, objective })
    };
    let at_a = opt_at(domain.a, domain.g_a)?;
    let at_b = opt_at(domain.b, domain.g_b)?;

    // Ties break toward b.
    let best = if at_b.objective <= at_a.objective { at_b } else { at_a };

    // sup_c of the concave lower envelope min_y { g(y) + S^c(x0, y) - cT }.
    let inner = |c: f64| -> Result<f64> {
        let va = domain.g_a + potential_value(model, c, domain.x0, domain.a)?;
        let vb = domain.g_b + potential_value(model, c, domain.x0, domain.b)?;
        Ok(va.min(vb) - c * horizon)
    };
    let (_, maxmin_value) = maximize_over_c(inner, c_h, c_h + defaults::C_BRACKET_START)?;

    let s_to_a = domain.g_a + potential_value(model, best.c_opt, domain.x0, domain.a)?;
    let s_to_b = domain.g_b + potential_value(model, best.c_opt, domain.x0, domain.b)?;
    let k = domain.boundary_cost(best.y)
        + potential_value(model, best.c_opt, domain.x0, best.y)?
        - s_to_a.min(s_to_b);

    Ok(MinMaxResult {
        value: best.objective,
        c_star: best.c_opt,
        y_star: best.y,
        per_boundary: [at_a, at_b],
        maxmin_value,
        gap: best.objective - maxmin_value,
        k,
    })
}

/// Which subsolution family a [`Subsolution`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsolutionKind {
    Uc,
    UcyK,
}

#[derive(Clone, Debug, PartialEq)]
enum Variant {
    /// Boundary-infimum family; `sign_switch` is the point where
    /// `S^c(x, a) - S^c(x, b)` changes sign (monotone increasing in `x`).
    Uc { sign_switch: f64 },
    /// Anchored family with fixed `(y, K)`; `s_x0_y` caches `S^c(x0, y)`.
    UcyK { y: f64, k: f64, s_x0_y: f64 },
}

/// An evaluable subsolution together with the data its importance-sampling
/// controls need.
#[derive(Clone, Debug, PartialEq)]
pub struct Subsolution {
    model: ProcessModel,
    domain: WorkingDomain,
    horizon: f64,
    c: f64,
    variant: Variant,
}

impl Subsolution {
    /// Boundary-infimum family `U^c` at energy level `c`.
    pub fn uc(model: ProcessModel, domain: WorkingDomain, horizon: f64, c: f64) -> Result<Self> {
        let sign_switch = locate_sign_switch(&model, &domain, c)?;
        Ok(Subsolution {
            model,
            domain,
            horizon,
            c,
            variant: Variant::Uc { sign_switch },
        })
    }

    /// Anchored family `U^{c,y,K}`.
    pub fn ucyk(
        model: ProcessModel,
        domain: WorkingDomain,
        horizon: f64,
        c: f64,
        y: f64,
        k: f64,
    ) -> Result<Self> {
        let s_x0_y = potential_value(&model, c, domain.x0, y)?;
        Ok(Subsolution {
            model,
            domain,
            horizon,
            c,
            variant: Variant::UcyK { y, k, s_x0_y },
        })
    }

    /// Builds either family from a completed min-max optimization.
    pub fn from_minmax(
        kind: SubsolutionKind,
        model: ProcessModel,
        domain: WorkingDomain,
        horizon: f64,
        opt: &MinMaxResult,
    ) -> Result<Self> {
        match kind {
            SubsolutionKind::Uc => Self::uc(model, domain, horizon, opt.c_star),
            SubsolutionKind::UcyK => {
                Self::ucyk(model, domain, horizon, opt.c_star, opt.y_star, opt.k)
            }
        }
    }

    pub fn kind(&self) -> SubsolutionKind {
        match self.variant {
            Variant::Uc { .. } => SubsolutionKind::Uc,
            Variant::UcyK { .. } => SubsolutionKind::UcyK,
        }
    }

    pub fn model(&self) -> &ProcessModel {
        &self.model
    }

    pub fn domain(&self) -> &WorkingDomain {
        &self.domain
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn y(&self) -> Option<f64> {
        match self.variant {
            Variant::UcyK { y, .. } => Some(y),
            Variant::Uc { .. } => None,
        }
    }

    pub fn k(&self) -> Option<f64> {
        match self.variant {
            Variant::UcyK { k, .. } => Some(k),
            Variant::Uc { .. } => None,
        }
    }

    /// Branch sign at `x`: `sign(S^c(x,a) - S^c(x,b))` for `U^c`,
    /// `sign(x - x0)` for `U^{c,y,K}`; ties resolve to `+1`.
    fn control_sign(&self, x: f64) -> f64 {
        match &self.variant {
            Variant::Uc { sign_switch } => branch_sign(x - sign_switch),
            Variant::UcyK { .. } => branch_sign(x - self.domain.x0),
        }
    }

    /// Evaluates the subsolution at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let tail = self.c * (self.horizon - t);
        match &self.variant {
            Variant::Uc { .. } => {
                let va = self.domain.g_a + potential_value(&self.model, self.c, x, self.domain.a)?;
                let vb = self.domain.g_b + potential_value(&self.model, self.c, x, self.domain.b)?;
                Ok(va.min(vb) - tail)
            }
            Variant::UcyK { y, k, s_x0_y } => {
                let s_x0_x = potential_value(&self.model, self.c, self.domain.x0, x)?;
                Ok(self.domain.boundary_cost(*y) + s_x0_y - s_x0_x - tail - k)
            }
        }
    }

    /// Girsanov control `θ(t, x) = -σ(x) D U(t, x)` for diffusion models:
    /// `θ = Φ'/σ + sign · sqrt(Φ'²/σ² + 2c)`. Time-independent for both
    /// families; `t` is threaded for future schedules.
    pub fn control_theta(&self, t: f64, x: f64) -> Result<f64> {
        let m = self.model.as_diffusion()?;
        let _ = t;
        Ok(theta_diffusion_inner(m, self.c, x, self.control_sign(x)))
    }

    /// Exponentially tilted birth/death rates `(λ_q, μ_q)` with
    /// `λ_q = λ e^{p^c}`, `μ_q = μ e^{-p^c}`; the product `λ_q μ_q = λ μ` is
    /// preserved.
    pub fn tilted_rates(&self, x: f64) -> Result<(f64, f64)> {
        let m = self.model.as_birth_death()?;
        let p = pc_with_sign(&self.model, x, self.c, self.control_sign(x))?;
        Ok((m.birth(x) * p.exp(), m.death(x) * (-p).exp()))
    }
}

pub(crate) fn theta_diffusion_inner(
    m: &crate::model::DiffusionModel,
    c: f64,
    x: f64,
    sign: f64,
) -> f64 {
    let sig = m.sigma(x);
    let ratio = m.dphi(x) / sig;
    let disc = (ratio * ratio + 2.0 * c).max(0.0);
    ratio + sign * disc.sqrt()
}

/// Locates the root of `x ↦ S^c(x, a) - S^c(x, b)` on a lookup grid with
/// linear interpolation of the crossing. The difference is strictly
/// increasing (its derivative is `p_+ - p_-`), so a single switch exists.
fn locate_sign_switch(model: &ProcessModel, domain: &WorkingDomain, c: f64) -> Result<f64> {
    let n = defaults::SIGN_LUT_POINTS;
    let step = (domain.b - domain.a) / (n - 1) as f64;
    // One quadrature anchors the curve; the grid accumulates its derivative.
    let mut d = -potential_value(model, c, domain.a, domain.b)?;
    if d >= 0.0 {
        return Ok(domain.a);
    }
    let slope_at = |x: f64| -> Result<f64> {
        Ok(pc_with_sign(model, x, c, 1.0)? - pc_with_sign(model, x, c, -1.0)?)
    };
    let mut prev_slope = slope_at(domain.a)?;
    let mut prev_d = d;
    let mut prev_x = domain.a;
    for i in 1..n {
        let x = domain.a + step * i as f64;
        let slope = slope_at(x)?;
        d += 0.5 * (prev_slope + slope) * step;
        if d >= 0.0 {
            let t = if d > prev_d { -prev_d / (d - prev_d) } else { 0.0 };
            return Ok(prev_x + t * step);
        }
        prev_slope = slope;
        prev_d = d;
        prev_x = x;
    }
    Ok(domain.b)
}

/// Hopf-Lax-Oleinik value `V(t, y) = inf_x { g(x) + t L((y - x)/t) }` for a
/// state-independent Hamiltonian, minimized by a grid scan over
/// `[y - radius, y + radius]` with golden-section refinement.
pub fn hopf_lax<G>(
    model: &StateIndependentModel,
    g: G,
    t: f64,
    y: f64,
    x_grid: usize,
    radius: f64,
) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(t > 0.0) {
        return Err(Error::config("hopf_lax: t must be positive"));
    }
    if x_grid < 3 {
        return Err(Error::config("hopf_lax: x_grid must be at least 3"));
    }
    let wrapped = ProcessModel::StateIndependent(model.clone());
    let value = |x: f64| {
        let l = wrapped
            .lagrangian(x, (y - x) / t, defaults::LEGENDRE_RADIUS)
            .unwrap_or(f64::INFINITY);
        g(x) + t * l
    };
    let (_, v) = grid_refine_min(value, y - radius, y + radius, x_grid, defaults::GOLDEN_XTOL);
    Ok(v)
}
