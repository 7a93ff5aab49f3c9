//! Monotone sub/supersolution iteration for non-negative data.
//!
//! Given a pair `l <= u`, the next pair solves two linear problems in which
//! the loss rate is frozen at the *other* iterate:
//!
//! ```text
//! d/dt l_n# + l_n# R#(u_{n-1}) = G#(l_{n-1}),    l_n#(0) = f0,
//! d/dt u_n# + u_n# R#(l_{n-1}) = G#(u_{n-1}),    u_n#(0) = f0.
//! ```
//!
//! Because gain and rate are both monotone in non-negative arguments, a
//! pair satisfying the beginning condition `0 <= l0 <= l1 <= u1 <= u0`
//! produces nested sequences squeezing the solution.
//!
//! Time is discretized by the integrating-factor trapezoid rule: with
//! `A` the cumulative trapezoid integral of the frozen rate,
//!
//! ```text
//! y_k = e^{-(A_k - A_{k-1})} (y_{k-1} + dt/2 G_{k-1}) + dt/2 G_k,
//! ```
//!
//! which is exactly `e^{-A_k} (f0 + int_0^{t_k} G e^A)` with the trapezoid
//! rule for the last integral. Every factor is non-negative, so the discrete
//! scheme inherits the monotonicity.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::bounds::BoundConstants;
use crate::error::{Error, Result};
use crate::phase::{PhaseField, TimeSlab};
use crate::problem::{Check, Problem};

/// `C = 2R (1 - sqrt(1 - |f0|/R))`, the smallest solution of
/// `|f0| + C^2 / (4R) = C`. Also asserts `|f0| + (1/2) K^{1/2} alpha^{-1/4} C^2 <= C`
/// (which holds for every `R <= R_max`) and `C <= 2 |f0|`.
pub fn ks_envelope_constant(f0_norm: f64, radius: f64, constants: &BoundConstants) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    if !(f0_norm >= 0.0) || f0_norm > radius {
        return Err(Error::param(
            "f0_norm",
            format!("data norm {f0_norm:.6e} must lie in [0, R = {radius:.6e}]"),
        ));
    }
    let x = f0_norm / radius;
    // rationalized form, free of cancellation for small |f0|
    let c = 2.0 * radius * x / (1.0 + (1.0 - x).sqrt());
    let identity = f0_norm + c * c / (4.0 * radius) - c;
    Check::at_most("ks envelope identity residual", identity.abs(), 1e-12 * radius.max(c)).into_result()?;
    let quad = 0.5 * constants.k_beta.sqrt() * constants.alpha.powf(-0.25);
    Check::at_most(
        "ks envelope fixed-point relation",
        f0_norm + quad * c * c,
        c * (1.0 + 1e-12),
    )
    .into_result()?;
    Check::at_most("ks envelope below twice the data", c, 2.0 * f0_norm * (1.0 + 1e-15)).into_result()?;
    Ok(c)
}

/// A nested pair `l <= u` after `n` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct KsIterates {
    pub l: TimeSlab,
    pub u: TimeSlab,
    pub n: usize,
}

impl KsIterates {
    /// `max (u - l)` over every node and slice.
    pub fn sup_gap(&self) -> f64 {
        max_excess(&self.u, &self.l)
    }

    /// Midpoint `(l + u) / 2`.
    pub fn midpoint(&self) -> TimeSlab {
        self.l.zip_with(&self.u, |a, b| a.zip_with(b, |x, y| 0.5 * (x + y)))
    }
}

/// `max (a - b)` over every node and slice (negative when `a < b` everywhere).
fn max_excess(a: &TimeSlab, b: &TimeSlab) -> f64 {
    a.slices()
        .iter()
        .zip(b.slices())
        .flat_map(|(x, y)| x.values().iter().zip(y.values()).map(|(p, q)| p - q))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn slab_min(a: &TimeSlab) -> f64 {
    a.slices().iter().map(PhaseField::min).fold(f64::INFINITY, f64::min)
}

/// Solves `y' + y r = g`, `y(0) = f0` on the slab's time grid with the
/// integrating-factor trapezoid rule.
fn integrating_factor(f0: &PhaseField, gain: &TimeSlab, rate: &TimeSlab) -> TimeSlab {
    let dt = gain.dt();
    let half = 0.5 * dt;
    let mut out = Vec::with_capacity(gain.nt() + 1);
    out.push(f0.clone());
    for k in 1..=gain.nt() {
        let prev = &out[k - 1];
        let vals = prev
            .values()
            .iter()
            .zip(gain.slice(k - 1).values())
            .zip(gain.slice(k).values())
            .zip(rate.slice(k - 1).values().iter().zip(rate.slice(k).values()))
            .map(|(((y, g0), g1), (r0, r1))| (-half * (r0 + r1)).exp() * (y + half * g0) + half * g1)
            .collect();
        out.push(PhaseField::from_values(*f0.grid(), vals).expect("finite iterate"));
    }
    TimeSlab::new(dt, out).expect("consistent geometry")
}

/// One monotone step from `prev`.
pub fn ks_step(problem: &Problem, prev: &KsIterates, f0: &PhaseField) -> Result<KsIterates> {
    let op = problem.op();
    let (gain_l, rate_l) = op.gain_rate(&prev.l, &prev.l, &prev.l, &prev.l)?;
    let (gain_u, rate_u) = op.gain_rate(&prev.u, &prev.u, &prev.u, &prev.u)?;
    Ok(KsIterates {
        l: integrating_factor(f0, &gain_l, &rate_u),
        u: integrating_factor(f0, &gain_u, &rate_l),
        n: prev.n + 1,
    })
}

/// Largest violation of `0 <= l0 <= l1 <= u1 <= u0 <= threshold e^{-alpha|x|^2 - beta|v|^2}`
/// over every node and slice; non-positive when the condition holds on the grid.
pub fn beginning_condition_check(
    problem: &Problem,
    it1: &KsIterates,
    l0: &TimeSlab,
    u0: &TimeSlab,
    threshold: f64,
) -> f64 {
    let ceiling = problem.envelope_slab(threshold);
    [
        -slab_min(l0),
        max_excess(l0, &it1.l),
        max_excess(&it1.l, &it1.u),
        max_excess(&it1.u, u0),
        max_excess(u0, &ceiling),
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KsConfig {
    pub max_iters: usize,
    /// Stop once `max (u_n - l_n)` falls below this.
    pub tol: f64,
    /// Allowed nodewise violation of nesting and of the beginning condition.
    pub nesting_slack: f64,
    /// Allowed negativity of the limit.
    pub negativity_slack: f64,
    /// Radius `R` in the envelope constant; `R_max` when absent.
    pub radius: Option<f64>,
}

impl Default for KsConfig {
    fn default() -> Self {
        KsConfig {
            max_iters: 30,
            tol: 1e-8,
            nesting_slack: 1e-10,
            negativity_slack: 1e-12,
            radius: None,
        }
    }
}

impl KsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return Err(Error::param("radius", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Per-iteration record of the monotone scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestingRecord {
    pub iter: usize,
    pub sup_gap: f64,
    pub min_l: f64,
    /// Largest of `l_{n-1} - l_n`, `u_n - u_{n-1}` and `l_n - u_n`.
    pub monotonicity_violation: f64,
}

#[derive(Clone, Debug)]
pub struct KsSolution {
    /// Midpoint of the final pair.
    pub slab: TimeSlab,
    pub last: KsIterates,
    pub records: Vec<NestingRecord>,
    pub data_norm: f64,
    pub radius: f64,
    /// Amplitude `C` of the initial supersolution.
    pub envelope_c: f64,
    /// Largest violation of the beginning condition (against the
    /// monotone-scheme threshold).
    pub beginning_violation: f64,
    /// Same, with the vacuum radius `R_max` as ceiling.
    pub beginning_violation_rmax: f64,
}

impl KsSolution {
    pub fn checks(&self, problem: &Problem, cfg: &KsConfig) -> Vec<Check> {
        let c = problem.constants();
        let worst_nesting = self
            .records
            .iter()
            .map(|r| r.monotonicity_violation)
            .fold(f64::NEG_INFINITY, f64::max);
        let p = problem.params();
        vec![
            Check::at_most("ks beginning condition", self.beginning_violation, cfg.nesting_slack),
            Check::at_most("ks nesting", worst_nesting, cfg.nesting_slack),
            Check::at_most("ks negativity", -slab_min(&self.slab), cfg.negativity_slack),
            Check::at_most("ks envelope", self.slab.slab_norm(p), 2.0 * self.radius),
            Check::at_most("ks gap absorption", c.absorption(self.envelope_c), 0.75),
        ]
    }
}

/// Runs the monotone scheme from `l0 = 0`, `u0 = C e^{-alpha|x|^2 - beta|v|^2}`.
pub fn ks_solve(problem: &Problem, f0: &PhaseField, cfg: &KsConfig) -> Result<KsSolution> {
    cfg.validate()?;
    if f0.min() < 0.0 {
        return Err(Error::param(
            "initial_data",
            "the monotone scheme needs non-negative data",
        ));
    }
    let data_norm = problem.admissible_norm(f0)?;
    let constants = problem.constants();
    let radius = cfg.radius.unwrap_or(constants.r_max);
    let c = ks_envelope_constant(data_norm, radius, constants)?;
    let l0 = TimeSlab::zeros(problem.geometry());
    let u0 = problem.envelope_slab(c);
    let start = KsIterates {
        l: l0.clone(),
        u: u0.clone(),
        n: 0,
    };
    let first = ks_step(problem, &start, f0)?;
    let beginning_violation = beginning_condition_check(problem, &first, &l0, &u0, constants.ks_threshold());
    let beginning_violation_rmax = beginning_condition_check(problem, &first, &l0, &u0, constants.r_max);
    if beginning_violation > cfg.nesting_slack {
        return Err(Error::BeginningCondition {
            violation: beginning_violation,
        });
    }

    let mut records = Vec::new();
    let mut prev = start;
    let mut cur = first;
    loop {
        let violation = max_excess(&prev.l, &cur.l)
            .max(max_excess(&cur.u, &prev.u))
            .max(max_excess(&cur.l, &cur.u));
        let rec = NestingRecord {
            iter: cur.n,
            sup_gap: cur.sup_gap(),
            min_l: slab_min(&cur.l),
            monotonicity_violation: violation,
        };
        debug!(
            "ks iteration {}: gap {:.3e}, nesting violation {:.3e}",
            rec.iter, rec.sup_gap, violation
        );
        records.push(rec);
        if rec.sup_gap < cfg.tol {
            info!("ks converged in {} iterations", cur.n);
            break;
        }
        if cur.n >= cfg.max_iters {
            return Err(Error::NonConvergence {
                iterations: cur.n,
                last_change: rec.sup_gap,
            });
        }
        let next = ks_step(problem, &cur, f0)?;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(KsSolution {
        slab: cur.midpoint(),
        last: cur,
        records,
        data_norm,
        radius,
        envelope_c: c,
        beginning_violation,
        beginning_violation_rmax,
    })
}
