//! Monte Carlo engines with likelihood-ratio weights.
//!
//! Diffusions are simulated by Euler-Maruyama under the sampling measure `Q`
//! obtained from the Girsanov drift shift `θ`; birth-death processes are
//! simulated event-driven under exponentially tilted rates. Weights stay in
//! log space along the whole path and are exponentiated only at aggregation.
//!
//! Every path draws from its own counter-derived random stream keyed by
//! `(seed, batch, path)`, so estimates are bit-reproducible and independent
//! of worker scheduling.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::defaults;
use crate::error::{Error, Result};
use crate::model::{ProcessModel, WorkingDomain};
use crate::subsolution::Subsolution;

/// Noise source abstraction; lets tests drive the integrators with rigged
/// increments.
pub trait Noise {
    fn standard_normal(&mut self) -> f64;
    fn standard_exp(&mut self) -> f64;
    fn uniform(&mut self) -> f64;
}

/// Adapter from any [`Rng`].
pub struct RngNoise<R: Rng>(pub R);

impl<R: Rng> Noise for RngNoise<R> {
    fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    fn standard_exp(&mut self) -> f64 {
        self.0.sample(Exp1)
    }

    fn uniform(&mut self) -> f64 {
        self.0.gen()
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one path, keyed by `(seed, batch, path)`.
pub fn path_rng(seed: u64, batch: u64, path: u64) -> ChaCha8Rng {
    let mut z = splitmix64(seed);
    z = splitmix64(z ^ batch.wrapping_mul(0xA076_1D64_78BD_642F));
    z = splitmix64(z ^ path.wrapping_mul(0xE703_7ED1_A0B4_28DB));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        z = splitmix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Scale parameter of the small-noise family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// Diffusion noise level `ε`.
    Epsilon(f64),
    /// Birth-death population size `n`.
    Population(u64),
}

/// One simulation run: model, domain, optional control, scale and budget.
#[derive(Clone, Debug)]
pub struct SimConfig<'a> {
    pub model: &'a ProcessModel,
    pub domain: &'a WorkingDomain,
    /// Absent means standard Monte Carlo (no change of measure).
    pub subsolution: Option<&'a Subsolution>,
    pub scale: Scale,
    pub horizon: f64,
    /// Euler-Maruyama step; unused by the event-driven engine.
    pub dt: Option<f64>,
    pub batches: usize,
    pub samples_per_batch: usize,
    pub seed: u64,
    /// `true` stops a path at its first boundary hit (exit problems);
    /// `false` runs to the horizon and marks whether `X(T)` is outside.
    pub stop_at_boundary: bool,
}

impl<'a> SimConfig<'a> {
    pub fn validate(&self) -> Result<()> {
        self.model.validate_on(self.domain)?;
        if self.batches < 2 {
            return Err(Error::config("need at least 2 batches"));
        }
        if self.samples_per_batch == 0 {
            return Err(Error::config("need at least 1 sample per batch"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config("horizon must be positive"));
        }
        match (self.model, self.scale) {
            (ProcessModel::Diffusion(_), Scale::Epsilon(eps)) => {
                if !(eps > 0.0) {
                    return Err(Error::config("epsilon must be positive"));
                }
                let dt = self
                    .dt
                    .ok_or_else(|| Error::config("diffusion runs need dt"))?;
                if !(dt > 0.0) {
                    return Err(Error::config("dt must be positive"));
                }
                let steps = (self.horizon / dt).round();
                if steps < 1.0 || (self.horizon / dt - steps).abs() > 1e-9 * steps {
                    return Err(Error::config(format!(
                        "dt = {dt} must divide the horizon T = {}",
                        self.horizon
                    )));
                }
            }
            (ProcessModel::BirthDeath(_), Scale::Population(n)) => {
                if n == 0 {
                    return Err(Error::config("population scale n must be at least 1"));
                }
            }
            (m, s) => {
                return Err(Error::config(format!(
                    "scale {s:?} does not match model family {}",
                    m.kind_name()
                )));
            }
        }
        if let Some(s) = self.subsolution {
            if s.model() != self.model {
                return Err(Error::config("subsolution was built for a different model"));
            }
            if s.domain() != self.domain {
                return Err(Error::config("subsolution was built for a different domain"));
            }
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.horizon / self.dt.unwrap()).round() as usize
    }
}

/// One simulated trajectory: exit flag, exit time, accumulated `log dP/dQ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathRecord {
    pub exited: bool,
    pub exit_time: f64,
    pub log_weight: f64,
}

/// Batched Monte Carlo estimate.
#[derive(Clone, Debug)]
pub struct Estimate {
    /// Grand mean, the average of the batch means.
    pub mean: f64,
    pub batch_means: Vec<f64>,
    /// Sample standard deviation of the batch means over the mean (0 when the
    /// mean is 0).
    pub rel_err: f64,
    pub total_samples: u64,
    pub n_exited: u64,
    /// Set when no path exited; the estimate carries no information.
    pub degenerate: bool,
    pub seed: u64,
    pub wall_time: Duration,
}

/// Euler-Maruyama path under `Q`, with per-step Girsanov log-weight
/// increments `-θ·ΔB/√ε - θ²·Δt/(2ε)` (this is `log dP/dQ` in the
/// `Q`-Brownian increments). Standard Monte Carlo is `θ ≡ 0`.
pub fn simulate_diffusion_path<N: Noise>(cfg: &SimConfig, noise: &mut N) -> Result<PathRecord> {
    simulate_diffusion_path_traced(cfg, noise, None)
}

pub fn simulate_diffusion_path_traced<N: Noise>(
    cfg: &SimConfig,
    noise: &mut N,
    mut trace: Option<&mut Vec<(f64, f64, f64)>>,
) -> Result<PathRecord> {
    let m = cfg.model.as_diffusion()?;
    let eps = match cfg.scale {
        Scale::Epsilon(e) => e,
        _ => return Err(Error::config("diffusion paths need an epsilon scale")),
    };
    let dt = cfg.dt.ok_or_else(|| Error::config("diffusion runs need dt"))?;
    let steps = cfg.steps();
    let sqrt_dt = dt.sqrt();
    let sqrt_eps = eps.sqrt();
    let (a, b) = (cfg.domain.a, cfg.domain.b);

    let mut x = cfg.domain.x0;
    let mut lw = 0.0;
    if let Some(tr) = trace.as_deref_mut() {
        tr.push((0.0, x, lw));
    }
    for k in 0..steps {
        let t = k as f64 * dt;
        let theta = match cfg.subsolution {
            Some(s) => s.control_theta(t, x)?,
            None => 0.0,
        };
        let sig = m.sigma(x);
        let db = sqrt_dt * noise.standard_normal();
        x += (m.drift(x) + sig * theta) * dt + sqrt_eps * sig * db;
        lw += log_weight_increment(theta, db, dt, eps);
        let t_next = (k + 1) as f64 * dt;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((t_next, x, lw));
        }
        if cfg.stop_at_boundary && !(a < x && x < b) {
            return Ok(PathRecord {
                exited: true,
                exit_time: t_next,
                log_weight: lw,
            });
        }
    }
    Ok(PathRecord {
        exited: !(a < x && x < b),
        exit_time: cfg.horizon,
        log_weight: lw,
    })
}

/// Girsanov log-weight increment for one Euler step.
#[inline]
pub fn log_weight_increment(theta: f64, db: f64, dt: f64, eps: f64) -> f64 {
    -theta * db / eps.sqrt() - theta * theta * dt / (2.0 * eps)
}

/// Event-driven birth-death path under the tilted rates.
///
/// Per sojourn of length `Δt` the log-weight gains `[n(λ_q+μ_q) - n(λ+μ)]Δt`;
/// per jump it gains `log(λ/λ_q)` (up) or `log(μ/μ_q)` (down). The final
/// partial sojourn contributes only its time integral.
pub fn simulate_bd_path<N: Noise>(cfg: &SimConfig, noise: &mut N) -> Result<PathRecord> {
    simulate_bd_path_traced(cfg, noise, None)
}

pub fn simulate_bd_path_traced<N: Noise>(
    cfg: &SimConfig,
    noise: &mut N,
    mut trace: Option<&mut Vec<(f64, f64, f64)>>,
) -> Result<PathRecord> {
    let m = cfg.model.as_birth_death()?;
    let n = match cfg.scale {
        Scale::Population(n) => n,
        _ => return Err(Error::config("birth-death paths need a population scale")),
    };
    let nf = n as f64;
    let (a, b) = (cfg.domain.a, cfg.domain.b);
    // Snap the start to the nearest lattice point k/n (error at most 1/(2n)).
    let mut k = (cfg.domain.x0 * nf).round() as i64;
    let mut t = 0.0;
    let mut lw = 0.0;
    if let Some(tr) = trace.as_deref_mut() {
        tr.push((t, k as f64 / nf, lw));
    }
    for _ in 0..defaults::MAX_EVENTS_PER_PATH {
        let x = k as f64 / nf;
        let (lam, mu) = (m.birth(x), m.death(x));
        let (lam_q, mu_q) = match cfg.subsolution {
            Some(s) => s.tilted_rates(x)?,
            None => (lam, mu),
        };
        let rate_q = nf * (lam_q + mu_q);
        let rate_p = nf * (lam + mu);
        if rate_q <= 0.0 {
            // Stalled interior state: the clock never advances again.
            lw += (rate_q - rate_p) * (cfg.horizon - t);
            break;
        }
        let sojourn = noise.standard_exp() / rate_q;
        if t + sojourn >= cfg.horizon {
            lw += (rate_q - rate_p) * (cfg.horizon - t);
            t = cfg.horizon;
            break;
        }
        t += sojourn;
        lw += (rate_q - rate_p) * sojourn;
        if noise.uniform() < lam_q / (lam_q + mu_q) {
            k += 1;
            lw += (lam / lam_q).ln();
        } else {
            k -= 1;
            lw += (mu / mu_q).ln();
        }
        let x = k as f64 / nf;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((t, x, lw));
        }
        // Without boundary stopping, outside states keep jumping as long as
        // their rates allow it.
        if cfg.stop_at_boundary && !(a < x && x < b) {
            return Ok(PathRecord {
                exited: true,
                exit_time: t,
                log_weight: lw,
            });
        }
    }
    let x = k as f64 / nf;
    Ok(PathRecord {
        exited: !(a < x && x < b),
        exit_time: t.min(cfg.horizon),
        log_weight: lw,
    })
}

fn simulate_path(cfg: &SimConfig, noise: &mut RngNoise<ChaCha8Rng>) -> Result<PathRecord> {
    match cfg.model {
        ProcessModel::Diffusion(_) => simulate_diffusion_path(cfg, noise),
        ProcessModel::BirthDeath(_) => simulate_bd_path(cfg, noise),
        other => Err(Error::WrongModel {
            expected: "diffusion or birth_death",
            got: other.kind_name(),
        }),
    }
}

/// Runs the batched estimator of `E[e^{log dP/dQ} 1{exit}]`.
///
/// Batches are embarrassingly parallel; the per-batch reduction runs in path
/// order and the cross-batch reduction in batch order, so the result is
/// identical for any worker count.
pub fn estimate(cfg: &SimConfig) -> Result<Estimate> {
    cfg.validate()?;
    let start = Instant::now();
    let per_batch: Vec<(f64, u64)> = (0..cfg.batches)
        .into_par_iter()
        .map(|batch| -> Result<(f64, u64)> {
            let mut sum = 0.0;
            let mut exits = 0u64;
            for path in 0..cfg.samples_per_batch {
                let mut noise =
                    RngNoise(path_rng(cfg.seed, batch as u64, path as u64));
                let rec = simulate_path(cfg, &mut noise)?;
                if rec.exited {
                    sum += rec.log_weight.exp();
                    exits += 1;
                }
            }
            Ok((sum / cfg.samples_per_batch as f64, exits))
        })
        .collect::<Result<Vec<_>>>()?;

    let batch_means: Vec<f64> = per_batch.iter().map(|(m, _)| *m).collect();
    let n_exited: u64 = per_batch.iter().map(|(_, e)| *e).sum();
    let mean = batch_means.iter().sum::<f64>() / batch_means.len() as f64;
    let rel_err = if mean > 0.0 {
        let var = batch_means
            .iter()
            .map(|m| (m - mean) * (m - mean))
            .sum::<f64>()
            / (batch_means.len() - 1) as f64;
        var.sqrt() / mean
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        batch_means,
        rel_err,
        total_samples: (cfg.batches * cfg.samples_per_batch) as u64,
        n_exited,
        degenerate: n_exited == 0,
        seed: cfg.seed,
        wall_time: start.elapsed(),
    })
}
