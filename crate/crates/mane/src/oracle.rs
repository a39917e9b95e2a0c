//! Brute-force variational solvers on space-time grids.
//!
//! Desk-scale dynamic programming for the Mather action
//! `M(t, y; x) = inf { ∫_0^t L(ψ, ψ') ds : ψ(0) = x, ψ(t) = y }`
//! and for the exit-problem value function, used as independent oracles for
//! the Mañé-potential machinery through the duality
//!
//! `S^c(x,y) = inf_t { M(t,y;x) + ct }`,  `M(t,y;x) = sup_{c > c_H} { S^c(x,y) - ct }`.

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{ProcessModel, WorkingDomain};
use crate::potential::potential_value;
use crate::subsolution;

/// Space-time grid with a speed cap for transitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub nx: usize,
    pub t_hi: f64,
    pub nt: usize,
    pub v_max: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.nt < 2 || !(self.v_max > 0.0) || !(self.x_lo < self.x_hi) {
            return Err(Error::config(format!(
                "bad grid: nx = {}, nt = {}, v_max = {}, [{}, {}]",
                self.nx, self.nt, self.v_max, self.x_lo, self.x_hi
            )));
        }
        if !(self.t_hi > 0.0) {
            return Err(Error::config("grid t_hi must be positive"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_hi / self.nt as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_lo + self.dx() * i as f64
    }

    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_lo) / self.dx()).round() as i64;
        i.clamp(0, self.nx as i64 - 1) as usize
    }

    /// Index of the time layer for `t`, requiring `t` to sit on the grid.
    pub fn time_layer(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt()).round();
        if k < 1.0 || (t - k * self.dt()).abs() > 1e-9 * k.max(1.0) || k as usize > self.nt {
            return Err(Error::config(format!(
                "t = {t} is not a positive multiple of dt = {} within t_hi",
                self.dt()
            )));
        }
        Ok(k as usize)
    }

    /// Transition half-width in nodes: offsets `|d| <= stencil()` satisfy
    /// `|d| dx / dt <= v_max`.
    fn stencil(&self) -> usize {
        ((self.v_max * self.dt() / self.dx()).floor() as usize).min(self.nx - 1)
    }
}

/// Per-node, per-offset step costs `dt · L(x_i, d·dx/dt)`.
///
/// State-independent models share one row across nodes.
fn cost_table(model: &ProcessModel, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let w = grid.stencil();
    let dt = grid.dt();
    let dx = grid.dx();
    let row = |x: f64| -> Result<Vec<f64>> {
        (-(w as i64)..=w as i64)
            .map(|d| {
                let v = d as f64 * dx / dt;
                Ok(dt * model.lagrangian(x, v, defaults::LEGENDRE_RADIUS)?)
            })
            .collect()
    };
    if matches!(model, ProcessModel::StateIndependent(_)) {
        let shared = row(0.0)?;
        return Ok(vec![shared; grid.nx]);
    }
    (0..grid.nx).map(|i| row(grid.node(i))).collect()
}

/// Forward DP layers of the Mather action from the node nearest `x`.
/// `layers[k][j]` approximates `M((k+1)·dt, node_j; x)`.
fn mather_layers(
    model: &ProcessModel,
    grid: &GridSpec,
    x: f64,
    layers_wanted: usize,
) -> Result<Vec<Vec<f64>>> {
    grid.validate()?;
    let cost = cost_table(model, grid)?;
    let w = grid.stencil() as i64;
    let nx = grid.nx;
    let mut value = vec![f64::INFINITY; nx];
    value[grid.nearest(x)] = 0.0;
    let mut layers = Vec::with_capacity(layers_wanted);
    for _ in 0..layers_wanted {
        let mut next = vec![f64::INFINITY; nx];
        for i in 0..nx {
            let vi = value[i];
            if !vi.is_finite() {
                continue;
            }
            let ci = &cost[i];
            let lo = (i as i64 - w).max(0) as usize;
            let hi = (i as i64 + w).min(nx as i64 - 1) as usize;
            for j in lo..=hi {
                let cand = vi + ci[(j as i64 - i as i64 + w) as usize];
                if cand < next[j] {
                    next[j] = cand;
                }
            }
        }
        value = next;
        layers.push(value.clone());
    }
    Ok(layers)
}

/// Grid approximation of the Mather action `M(t, y; x)`.
///
/// `x`, `y` snap to the nearest nodes and `t` must be a grid multiple.
/// Unreachable targets (`v_max · t < |y - x|`) are reported as an error.
pub fn mather_action(
    model: &ProcessModel,
    grid: &GridSpec,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    grid.validate()?;
    let k = grid.time_layer(t)?;
    let xi = grid.node(grid.nearest(x));
    let yi = grid.node(grid.nearest(y));
    if grid.v_max * t < (yi - xi).abs() {
        return Err(Error::Unreachable {
            reach: grid.v_max * t,
            distance: (yi - xi).abs(),
        });
    }
    let layers = mather_layers(model, grid, x, k)?;
    let v = layers[k - 1][grid.nearest(y)];
    if !v.is_finite() {
        return Err(Error::Unreachable {
            reach: grid.v_max * t,
            distance: (yi - xi).abs(),
        });
    }
    Ok(v)
}

/// One duality residual pair.
#[derive(Clone, Copy, Debug)]
pub struct Residual {
    /// The `c` or `t` the residual was evaluated at.
    pub at: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|rhs|, 1e-12)`.
    pub rel: f64,
}

impl Residual {
    fn new(at: f64, lhs: f64, rhs: f64) -> Self {
        Residual {
            at,
            lhs,
            rhs,
            rel: (lhs - rhs).abs() / rhs.abs().max(1e-12),
        }
    }
}

/// Report of the two-sided duality verification.
#[derive(Clone, Debug)]
pub struct DualityReport {
    /// Per `c`: `S^c(x,y)` against `min over t_list of { M_grid(t) + ct }`.
    pub per_c: Vec<Residual>,
    /// Per `t`: `sup_c { S^c(x,y) - ct }` against `M_grid(t)`.
    pub per_t: Vec<Residual>,
    pub rel_tol: f64,
    pub pass: bool,
}

/// Verifies both duality directions on the grid oracle.
pub fn duality_check(
    model: &ProcessModel,
    x: f64,
    y: f64,
    t_list: &[f64],
    c_list: &[f64],
    grid: &GridSpec,
) -> Result<DualityReport> {
    grid.validate()?;
    let c_h = model.critical_value_on(grid.x_lo, grid.x_hi, defaults::CRITICAL_GRID_N);
    for &c in c_list {
        if c <= c_h {
            return Err(Error::config(format!("c = {c} must exceed c_H = {c_h}")));
        }
    }
    let mut t_layers = Vec::with_capacity(t_list.len());
    for &t in t_list {
        t_layers.push(grid.time_layer(t)?);
    }
    let max_layer = *t_layers.iter().max().unwrap_or(&0);
    let layers = mather_layers(model, grid, x, max_layer)?;
    let target = grid.nearest(y);
    let m_at = |layer: usize| layers[layer - 1][target];

    let per_c = c_list
        .iter()
        .map(|&c| -> Result<Residual> {
            let s = potential_value(model, c, x, y)?;
            let best = t_list
                .iter()
                .zip(&t_layers)
                .map(|(&t, &k)| m_at(k) + c * t)
                .fold(f64::INFINITY, f64::min);
            Ok(Residual::new(c, best, s))
        })
        .collect::<Result<Vec<_>>>()?;

    let grid_domain = WorkingDomain {
        a: grid.x_lo,
        b: grid.x_hi,
        x0: 0.5 * (grid.x_lo + grid.x_hi),
        horizon: grid.t_hi,
        g_a: 0.0,
        g_b: 0.0,
    };
    let per_t = t_list
        .iter()
        .zip(&t_layers)
        .map(|(&t, &k)| -> Result<Residual> {
            let (_, sup) = subsolution::optimize_c(
                model,
                &grid_domain,
                x,
                y,
                t,
                0.0,
                c_h + defaults::C_BRACKET_START,
            )?;
            Ok(Residual::new(t, sup, m_at(k)))
        })
        .collect::<Result<Vec<_>>>()?;

    let worst = per_c
        .iter()
        .chain(per_t.iter())
        .map(|r| r.rel)
        .fold(0.0, f64::max);
    Ok(DualityReport {
        per_c,
        per_t,
        rel_tol: defaults::GRID_REL_TOL,
        pass: worst <= defaults::GRID_REL_TOL,
    })
}

/// Boundary treatment of the backward value-function DP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpMode {
    /// Boundary absorbs at cost `g` at every time level (exit problem `W`).
    Exit,
    /// Boundary cost applies at the terminal time only (terminal problem `V`).
    Terminal,
}

/// Backward-DP table of the value function over `(t, x)`.
#[derive(Clone, Debug)]
pub struct ValueTable {
    pub grid: GridSpec,
    pub mode: DpMode,
    /// `values[k][j]` at time `k·dt`, node `j`; layer `nt` is terminal.
    pub values: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn at(&self, t: f64, x: f64) -> f64 {
        let k = ((t / self.grid.dt()).round() as i64).clamp(0, self.grid.nt as i64) as usize;
        self.values[k][self.grid.nearest(x)]
    }
}

/// Backward dynamic programming for the exit/terminal value function on the
/// domain `[a, b]`; the grid must cover the domain interval exactly.
pub fn grid_value_function(
    model: &ProcessModel,
    domain: &WorkingDomain,
    horizon: f64,
    grid: &GridSpec,
    mode: DpMode,
) -> Result<ValueTable> {
    grid.validate()?;
    if (grid.x_lo - domain.a).abs() > 1e-12 || (grid.x_hi - domain.b).abs() > 1e-12 {
        return Err(Error::config(
            "value-function grid must cover the domain interval exactly",
        ));
    }
    if (grid.t_hi - horizon).abs() > 1e-12 {
        return Err(Error::config("value-function grid must span [0, T]"));
    }
    let cost = cost_table(model, grid)?;
    let w = grid.stencil() as i64;
    let nx = grid.nx;
    let mut terminal = vec![f64::INFINITY; nx];
    terminal[0] = domain.g_a;
    terminal[nx - 1] = domain.g_b;
    let mut values = vec![terminal];
    for _ in 0..grid.nt {
        let ahead = values.last().unwrap();
        let mut layer = vec![f64::INFINITY; nx];
        for (j, slot) in layer.iter_mut().enumerate() {
            let cj = &cost[j];
            let lo = (j as i64 - w).max(0) as usize;
            let hi = (j as i64 + w).min(nx as i64 - 1) as usize;
            let mut best = f64::INFINITY;
            for i in lo..=hi {
                let va = ahead[i];
                if !va.is_finite() {
                    continue;
                }
                let cand = va + cj[(i as i64 - j as i64 + w) as usize];
                if cand < best {
                    best = cand;
                }
            }
            *slot = best;
        }
        if mode == DpMode::Exit {
            layer[0] = domain.g_a;
            layer[nx - 1] = domain.g_b;
        }
        values.push(layer);
    }
    values.reverse();
    Ok(ValueTable {
        grid: *grid,
        mode,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{HamiltonianFn, PotentialFn, ScalarFn};
    use crate::model::{DiffusionModel, StateIndependentModel};
    use crate::subsolution::minmax;

    fn double_well() -> ProcessModel {
        ProcessModel::Diffusion(DiffusionModel {
            potential: PotentialFn::DoubleWell,
            sigma: ScalarFn::Constant { value: 1.0 },
        })
    }

    fn quadratic() -> ProcessModel {
        ProcessModel::StateIndependent(StateIndependentModel {
            hamiltonian: HamiltonianFn::Quadratic,
        })
    }

    fn duality_grid() -> GridSpec {
        GridSpec {
            x_lo: 1.0,
            x_hi: 1.42,
            nx: 401,
            t_hi: 1.0,
            nt: 200,
            v_max: 8.0,
        }
    }

    #[test]
    fn stationary_start_is_free() {
        // The double well is at rest at x = 1, so staying put costs nothing.
        let g = GridSpec {
            x_lo: 0.5,
            x_hi: 1.5,
            nx: 101,
            t_hi: 1.0,
            nt: 20,
            v_max: 4.0,
        };
        let m = mather_action(&double_well(), &g, 1.0, 1.0, 0.5).unwrap();
        assert!(m.abs() < 1e-12, "M = {m}");
    }

    #[test]
    fn straight_line_is_optimal_for_state_independent() {
        let g = GridSpec {
            x_lo: 0.0,
            x_hi: 1.0,
            nx: 201,
            t_hi: 1.0,
            nt: 50,
            v_max: 4.0,
        };
        let m = mather_action(&quadratic(), &g, 0.0, 1.0, 1.0).unwrap();
        assert!((m - 0.5).abs() < 1e-6, "M = {m}");
    }

    #[test]
    fn unreachable_targets_error() {
        let g = GridSpec {
            x_lo: 0.0,
            x_hi: 1.0,
            nx: 101,
            t_hi: 1.0,
            nt: 10,
            v_max: 1.0,
        };
        assert!(matches!(
            mather_action(&quadratic(), &g, 0.0, 1.0, 0.5).unwrap_err(),
            Error::Unreachable { .. }
        ));
    }

    #[test]
    fn dp_refinement_is_monotone_for_state_independent() {
        // Nested grids embed every coarse path with identical cost when L is
        // state-independent, so refinement cannot increase the value.
        let coarse = GridSpec {
            x_lo: 0.0,
            x_hi: 1.0,
            nx: 101,
            t_hi: 1.0,
            nt: 25,
            v_max: 4.0,
        };
        let fine = GridSpec {
            nx: 201,
            nt: 50,
            ..coarse
        };
        let mc = mather_action(&quadratic(), &coarse, 0.0, 0.75, 1.0).unwrap();
        let mf = mather_action(&quadratic(), &fine, 0.0, 0.75, 1.0).unwrap();
        assert!(mf <= mc + 1e-9, "coarse {mc} fine {mf}");
    }

    #[test]
    fn duality_matches_on_the_double_well_instance() {
        // t = 1.0 is the stress case: the optimal energy level sits close to
        // the critical value c_H = 0 there.
        let report = duality_check(
            &double_well(),
            1.0,
            1.42,
            &[0.25, 0.5, 1.0],
            &[0.25, 0.5, 1.0],
            &duality_grid(),
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        for r in report.per_t.iter().chain(report.per_c.iter()) {
            assert!(r.rel <= 0.05, "{r:?}");
        }
    }

    #[test]
    fn duality_residual_shrinks_under_refinement() {
        let g = duality_grid();
        let fine = GridSpec {
            nx: 2 * (g.nx - 1) + 1,
            nt: 2 * g.nt,
            ..g
        };
        let coarse_rep =
            duality_check(&double_well(), 1.0, 1.42, &[0.25, 0.5], &[0.5], &g).unwrap();
        let fine_rep =
            duality_check(&double_well(), 1.0, 1.42, &[0.25, 0.5], &[0.5], &fine).unwrap();
        for (c, f) in coarse_rep.per_t.iter().zip(fine_rep.per_t.iter()) {
            assert!(
                f.rel <= 0.75 * c.rel,
                "t = {}: coarse {} fine {}",
                c.at,
                c.rel,
                f.rel
            );
        }
    }

    #[test]
    fn duality_closed_form_state_independent() {
        // For H = p²/2: S^c(0,1) = sqrt(2c) and min_t { M(t) + ct } with the
        // analytic M(t) = 1/(2t) equals sqrt(2c) at t = 1/sqrt(2c).
        let m = quadratic();
        for c in [0.3, 0.5, 1.1] {
            let s = potential_value(&m, c, 0.0, 1.0).unwrap();
            assert!((s - (2.0 * c).sqrt()).abs() < 1e-9);
            let (_, min_t) = crate::search::golden_min(
                |t| 1.0 / (2.0 * t) + c * t,
                1e-3,
                10.0,
                1e-12,
            );
            assert!((s - min_t).abs() < 1e-6, "c = {c}");
        }
    }

    #[test]
    fn boundary_nodes_cost_nothing_in_exit_mode() {
        let model = double_well();
        let domain = WorkingDomain::new(-1.42, 1.42, 1.0, 0.25).unwrap();
        let grid = GridSpec {
            x_lo: -1.42,
            x_hi: 1.42,
            nx: 201,
            t_hi: 0.25,
            nt: 25,
            v_max: 8.0,
        };
        let w = grid_value_function(&model, &domain, 0.25, &grid, DpMode::Exit).unwrap();
        for k in [0.0, 0.1, 0.2] {
            assert_eq!(w.at(k, -1.42), 0.0);
            assert_eq!(w.at(k, 1.42), 0.0);
        }
    }

    #[test]
    fn exit_value_matches_minmax_and_terminal_dp() {
        let model = double_well();
        let domain = WorkingDomain::new(-1.42, 1.42, 1.0, 0.25).unwrap();
        let grid = GridSpec {
            x_lo: -1.42,
            x_hi: 1.42,
            nx: 401,
            t_hi: 0.25,
            nt: 50,
            v_max: 8.0,
        };
        let w = grid_value_function(&model, &domain, 0.25, &grid, DpMode::Exit).unwrap();
        let v = grid_value_function(&model, &domain, 0.25, &grid, DpMode::Terminal).unwrap();
        let opt = minmax(&model, &domain, 0.25).unwrap();
        let w0 = w.at(0.0, 1.0);
        let rel = (w0 - opt.value).abs() / opt.value;
        assert!(rel <= 0.05, "W = {w0}, minmax = {}, rel = {rel}", opt.value);
        // c_H = 0 here, so the exit and terminal values coincide.
        let v0 = v.at(0.0, 1.0);
        assert!((w0 - v0).abs() / v0.abs().max(1e-12) <= 0.05, "W = {w0}, V = {v0}");
        // The exit option can only lower the cost.
        for k in 0..w.values.len() {
            for j in 0..grid.nx {
                let wv = w.values[k][j];
                let vv = v.values[k][j];
                if vv.is_finite() {
                    assert!(wv <= vv + 1e-9);
                }
            }
        }
    }
}
