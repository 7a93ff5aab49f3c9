//! Global Picard iteration for the mild equation in the sharp frame,
//!
//! ```text
//! T f#(t) = f0 + int_0^t G#(f,f,f,f) dtau - int_0^t L#(f,f,f,f) dtau,
//! ```
//!
//! with the time integrals taken by the cumulative trapezoid rule on the
//! slab's time grid. On the ball `|||f||| <= 2R` the map is a contraction
//! with Lipschitz constant at most `48 K alpha^{-1/2} R^2 <= 1/2`; the
//! experiments here measure that constant and the resulting stability.

use log::{debug, info};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{envelope_check, MaxwellianParams, PhaseField, SlabGeometry, TimeSlab};
use crate::problem::{all_passed, Check, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub max_iters: usize,
    /// Stop once `|||f_{n+1} - f_n|||` falls below this.
    pub tol: f64,
    /// Relative slack on the contraction ratio `1/2`.
    pub slack: f64,
    /// Allowed positive envelope margin of the converged slab.
    pub envelope_tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            max_iters: 50,
            tol: 1e-13,
            slack: 0.1,
            envelope_tol: 1e-6,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if !(self.slack >= 0.0) {
            return Err(Error::param("slack", "must be non-negative"));
        }
        Ok(())
    }

    /// `1/2 (1 + slack)`.
    pub fn ratio_limit(&self) -> f64 {
        0.5 * (1.0 + self.slack)
    }
}

/// `int_0^{t_k} (G# - L#)(s, s, s, s)` for every slice.
fn collision_integral(problem: &Problem, s: &TimeSlab) -> Result<TimeSlab> {
    Ok(problem.op().rhs_slab(s)?.cumulative_integral())
}

/// One application of the Picard map. Slice 0 of the result is `f0` exactly.
pub fn picard_map(problem: &Problem, s: &TimeSlab, f0: &PhaseField) -> Result<TimeSlab> {
    if f0.grid() != problem.grid() {
        return Err(Error::GeometryMismatch);
    }
    let integral = collision_integral(problem, s)?;
    Ok(integral.map(|i| f0.add(i)))
}

/// Result of a Picard run, before any bound is asserted.
#[derive(Clone, Debug)]
pub struct PicardSolution {
    pub slab: TimeSlab,
    /// `|||f_{n+1} - f_n|||` for every map application.
    pub history: Vec<f64>,
    /// `|||f_{n+1}|||` for every map application.
    pub iterate_norms: Vec<f64>,
    /// Grid norm of the initial data.
    pub data_norm: f64,
}

impl PicardSolution {
    /// `history[n] / history[n-1]`, the per-iteration contraction.
    pub fn ratios(&self) -> Vec<f64> {
        self.history.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Geometric decay rate from a least-squares fit of `ln history[n]`
    /// against `n`, over the changes that sit above rounding noise. `None`
    /// when fewer than two such changes exist.
    pub fn fitted_ratio(&self) -> Option<f64> {
        let floor = 64.0 * f64::EPSILON * self.data_norm;
        let pts: Vec<(f64, f64)> = self
            .history
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > floor)
            .map(|(i, &d)| (i as f64, d.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some((sxy / sxx).exp())
    }

    /// The asserted properties of a converged run: ball invariance of every
    /// iterate, geometric decay at ratio at most `1/2 (1 + slack)`, and the
    /// envelope `|||f||| <= 2 ||f0||`.
    pub fn checks(&self, problem: &Problem, cfg: &PicardConfig) -> Vec<Check> {
        let c = problem.constants();
        let radius = self.data_norm;
        let growth = c.ball_growth(radius) * radius;
        let worst = self.iterate_norms.iter().fold(0.0, |a: f64, &b| a.max(b));
        let mut out = vec![Check::at_most("picard ball invariance", worst, growth)];
        if let Some(r) = self.fitted_ratio() {
            out.push(Check::at_most("picard fitted contraction ratio", r, cfg.ratio_limit()));
        }
        out.push(Check::at_most(
            "picard envelope margin",
            envelope_check(&self.slab, radius, problem.params()),
            cfg.envelope_tol,
        ));
        out
    }
}

/// Iterates the Picard map from `guess` until the change drops below `tol`.
pub fn picard_iterate(
    problem: &Problem,
    f0: &PhaseField,
    guess: TimeSlab,
    cfg: &PicardConfig,
) -> Result<PicardSolution> {
    cfg.validate()?;
    let data_norm = problem.admissible_norm(f0)?;
    let p = *problem.params();
    let mut s = guess;
    let mut history = Vec::new();
    let mut iterate_norms = Vec::new();
    for n in 1..=cfg.max_iters {
        let next = picard_map(problem, &s, f0)?;
        let delta = next.sub(&s).slab_norm(&p);
        history.push(delta);
        iterate_norms.push(next.slab_norm(&p));
        debug!("picard iteration {n}: change {delta:.3e}");
        s = next;
        if delta < cfg.tol {
            info!("picard converged in {n} iterations");
            return Ok(PicardSolution {
                slab: s,
                history,
                iterate_norms,
                data_norm,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        last_change: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Solves from the constant-in-time guess `f#(t) = f0` and asserts the
/// properties listed in [`PicardSolution::checks`].
pub fn picard_solve(problem: &Problem, f0: &PhaseField, cfg: &PicardConfig) -> Result<PicardSolution> {
    let guess = TimeSlab::constant(f0, problem.geometry());
    let sol = picard_iterate(problem, f0, guess, cfg)?;
    all_passed(&sol.checks(problem, cfg))?;
    Ok(sol)
}

/// `|||T s1 - T s2||| / |||s1 - s2|||` for two slabs in the ball `2 R_max`.
pub fn contraction_probe(problem: &Problem, s1: &TimeSlab, s2: &TimeSlab) -> Result<f64> {
    let p = *problem.params();
    let limit = 2.0 * problem.constants().r_max;
    for (name, s) in [("s1", s1), ("s2", s2)] {
        let n = s.slab_norm(&p);
        if n > limit {
            return Err(Error::param(
                name,
                format!("slab norm {n:.6e} lies outside the ball 2 R_max = {limit:.6e}"),
            ));
        }
    }
    let denom = s1.sub(s2).slab_norm(&p);
    if denom == 0.0 {
        return Err(Error::DegenerateProbe);
    }
    // the data term cancels; compare the collision integrals directly
    let i1 = collision_integral(problem, s1)?;
    let i2 = collision_integral(problem, s2)?;
    Ok(i1.sub(&i2).slab_norm(&p) / denom)
}

/// A slab with independent uniform nodal values in
/// `[-radius, radius] e^{-alpha|x|^2 - beta|v|^2}`, hence inside the ball of
/// that radius.
pub fn random_slab(geometry: &SlabGeometry, p: &MaxwellianParams, radius: f64, rng: &mut impl Rng) -> TimeSlab {
    let env = PhaseField::from_fn(geometry.grid, |x, v| radius * p.envelope(x, v));
    let fields = (0..=geometry.nt)
        .map(|_| {
            let mut f = env.clone();
            f.values_mut().iter_mut().for_each(|e| *e *= rng.gen_range(-1.0..=1.0));
            f
        })
        .collect();
    TimeSlab::new(geometry.dt, fields).expect("consistent geometry")
}

/// Per-slice record of a stability run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub t: f64,
    pub diff_norm: f64,
    /// `diff_norm / ||f0 - g0||`, to be compared with 2.
    pub ratio_vs_2: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityOutcome {
    pub records: Vec<StabilityRecord>,
    pub data_diff: f64,
    pub f: PicardSolution,
    pub g: PicardSolution,
}

impl StabilityOutcome {
    /// `sup_t ||f#(t) - g#(t)|| / ||f0 - g0||`; zero when both data coincide.
    pub fn ratio(&self) -> f64 {
        self.records.iter().map(|r| r.ratio_vs_2).fold(0.0, f64::max)
    }
}

/// Solves for both data and compares the trajectories slice by slice.
pub fn stability_experiment(
    problem: &Problem,
    f0: &PhaseField,
    g0: &PhaseField,
    cfg: &PicardConfig,
) -> Result<StabilityOutcome> {
    let f = picard_solve(problem, f0, cfg)?;
    let g = picard_solve(problem, g0, cfg)?;
    Ok(stability_from(problem, f, g))
}

/// Stability records from two already converged runs.
pub fn stability_from(problem: &Problem, f: PicardSolution, g: PicardSolution) -> StabilityOutcome {
    let p = *problem.params();
    let data_diff = f.slab.slice(0).sub(g.slab.slice(0)).maxwellian_norm(&p);
    let records = (0..=f.slab.nt())
        .map(|k| {
            let diff_norm = f.slab.slice(k).sub(g.slab.slice(k)).maxwellian_norm(&p);
            let ratio_vs_2 = if diff_norm == 0.0 { 0.0 } else { diff_norm / data_diff };
            StabilityRecord {
                t: f.slab.time(k),
                diff_norm,
                ratio_vs_2,
            }
        })
        .collect();
    StabilityOutcome {
        records,
        data_diff,
        f,
        g,
    }
}
