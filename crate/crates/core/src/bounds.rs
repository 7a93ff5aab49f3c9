//! Explicit a-priori constants and numerical checks of the estimates they
//! come from.
//!
//! The collision estimates rest on two scalar integrals. A Gaussian
//! travelling along a straight line has a finite time integral
//!
//! ```text
//! int_0^inf e^{-alpha |x0 + tau u0|^2} dtau,
//! ```
//!
//! and the kernel weight is tamed by the velocity convolution
//!
//! ```text
//! S(v) = int |v - v1|^{d-3} e^{-beta |v1|^2} dv1.
//! ```
//!
//! Their combination with the manifold constant `c_d` gives
//! `K_beta = sqrt(pi) c_d sup_v S(v)`, and everything downstream (the
//! vacuum radius, the contraction budget, the monotone-scheme threshold) is
//! expressed in terms of `K_beta`.

use std::f64::consts::PI;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{check_dim, norm2, MaxwellianParams, TimeSlab};
use crate::resonance::manifold::{kernel_constant, unit_ball_volume};
use crate::resonance::CollisionOperator;

/// Integrand values below this are treated as zero when truncating.
const TAIL: f64 = 1e-16;
/// Absolute accuracy requested from the double-exponential rule, relative
/// to the scale of the integral.
const QUAD_TOL: f64 = 1e-13;

/// Outcome of [`traveling_maxwellian_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravelingCheck {
    pub numeric: f64,
    /// `(sqrt(pi)/2) alpha^{-1/2} |u0|^{-1}`, attained at `x0 = 0`.
    pub bound: f64,
    /// `sqrt(pi) alpha^{-1/2} |u0|^{-1}`, the bound valid for every `x0`.
    pub corrected_bound: f64,
    pub error_estimate: f64,
}

impl TravelingCheck {
    /// `numeric <= bound (1 + slack)`.
    pub fn holds(&self, slack: f64) -> bool {
        self.numeric <= self.bound * (1.0 + slack)
    }

    pub fn holds_corrected(&self, slack: f64) -> bool {
        self.numeric <= self.corrected_bound * (1.0 + slack)
    }
}

/// `int_0^inf e^{-alpha |x0 + tau u0|^2} dtau` by adaptive quadrature,
/// compared with the half-line Gaussian bound.
///
/// The bound `(sqrt(pi)/2) alpha^{-1/2}|u0|^{-1}` only holds when the
/// trajectory moves away from the origin (`x0 . u0 >= 0`); a trajectory that
/// passes through the peak of the Gaussian collects up to twice as much.
pub fn traveling_maxwellian_check(x0: &[f64], u0: &[f64], alpha: f64) -> Result<TravelingCheck> {
    if x0.len() != u0.len() {
        return Err(Error::param("x0", "must have the same length as u0"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    let speed2 = norm2(u0);
    if !(speed2 > 0.0) {
        return Err(Error::param("u0", "must be nonzero (the time integral diverges)"));
    }
    let speed = speed2.sqrt();
    // closest approach to the origin and the Gaussian width along the path
    let peak = -x0.iter().zip(u0).map(|(a, b)| a * b).sum::<f64>() / speed2;
    let width = 1.0 / (alpha.sqrt() * speed);
    let end = peak.max(0.0) + width * (-TAIL.ln()).sqrt();
    let integrand = |tau: f64| {
        let d2: f64 = x0.iter().zip(u0).map(|(x, u)| (x + tau * u).powi(2)).sum();
        (-alpha * d2).exp()
    };
    let tol = QUAD_TOL * width;
    let mut numeric = 0.0;
    let mut error_estimate = 0.0;
    let mut pieces = vec![0.0];
    if peak > 0.0 {
        pieces.push(peak);
    }
    pieces.push(end);
    for w in pieces.windows(2) {
        let out = quadrature::integrate(integrand, w[0], w[1], tol);
        numeric += out.integral;
        error_estimate += out.error_estimate;
    }
    let bound = 0.5 * PI.sqrt() / (alpha.sqrt() * speed);
    Ok(TravelingCheck {
        numeric,
        bound,
        corrected_bound: 2.0 * bound,
        error_estimate,
    })
}

/// Outcome of [`convolution_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub numeric: f64,
    /// `C_d (beta^{-d/2} + 1 / (d + q))`.
    pub bound: f64,
    pub error_estimate: f64,
}

impl ConvolutionCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.numeric <= self.bound * (1.0 + slack)
    }
}

/// `C_d = max(pi^{d/2}, d omega_d)`: the far piece `|v - v1| > 1` is bounded
/// by the Gaussian mass, the near piece by `int_{|w|<1} |w|^q dw`.
pub fn convolution_constant(dim: usize) -> f64 {
    let d = dim as f64;
    PI.powf(0.5 * d).max(d * unit_ball_volume(dim))
}

/// `int |v - v1|^q e^{-beta |v1|^2} dv1` in polar coordinates about `v`,
/// compared with the two-piece bound.
pub fn convolution_check(v: &[f64], q: f64, beta: f64) -> Result<ConvolutionCheck> {
    let dim = v.len();
    check_dim(dim)?;
    let d = dim as f64;
    if !(q > -d && q <= 0.0) {
        return Err(Error::param("q", format!("must lie in (-{dim}, 0], got {q}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let (numeric, error_estimate) = convolution_integral(v, q, beta);
    let bound = convolution_constant(dim) * (beta.powf(-0.5 * d) + 1.0 / (d + q));
    Ok(ConvolutionCheck {
        numeric,
        bound,
        error_estimate,
    })
}

fn convolution_integral(v: &[f64], q: f64, beta: f64) -> (f64, f64) {
    let dim = v.len();
    let speed = norm2(v).sqrt();
    let power = q + dim as f64 - 1.0;
    // mean of e^{-beta |v + r w|^2} over directions w, times the sphere area
    let shell = |r: f64| -> f64 {
        match dim {
            3 => {
                let y = 4.0 * beta * r * speed;
                let ratio = if y == 0.0 { 1.0 } else { -(-y).exp_m1() / y };
                4.0 * PI * (-beta * (speed - r).powi(2)).exp() * ratio
            }
            _ => {
                // periodic trapezoid: spectrally accurate for this analytic integrand
                let n = 64 + (8.0 * beta * r * speed).ceil() as usize;
                let h = 2.0 * PI / n as f64;
                let mut acc = 0.0;
                for i in 0..n {
                    let phi = h * i as f64;
                    let c = phi.cos();
                    acc += (-beta * (speed * speed + r * r + 2.0 * r * speed * c)).exp();
                }
                acc * h
            }
        }
    };
    let integrand = |r: f64| if r > 0.0 { r.powf(power) * shell(r) } else { 0.0 };
    let reach = (-TAIL.ln() / beta).sqrt();
    let scale = (PI / beta).powf(0.5 * dim as f64);
    let mut pieces = vec![0.0];
    if speed > 0.0 {
        pieces.push(speed);
    }
    pieces.push(speed + reach);
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pieces.windows(2) {
        let out = quadrature::integrate(integrand, w[0], w[1], QUAD_TOL * scale);
        total += out.integral;
        err += out.error_estimate;
    }
    (total, err)
}

/// Every explicit constant of the near-vacuum theory for one `(alpha, beta, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Manifold constant `c_d`.
    pub c_d: f64,
    /// `sup_v int |v - v1|^{d-3} e^{-beta|v1|^2} dv1`.
    pub s_beta: f64,
    /// `sqrt(pi) c_d s_beta`.
    pub k_beta: f64,
    /// `alpha^{1/4} / (4 sqrt(6) k_beta^{1/2})`.
    pub r_max: f64,
    /// Convolution-estimate constant `C_d`.
    pub c_conv: f64,
}

impl BoundConstants {
    pub fn params(&self) -> MaxwellianParams {
        MaxwellianParams {
            alpha: self.alpha,
            beta: self.beta,
            dim: self.dim,
        }
    }

    /// `K alpha^{-1/2}`, the factor every cubic estimate carries.
    pub fn cubic_factor(&self) -> f64 {
        self.k_beta / self.alpha.sqrt()
    }

    /// Lipschitz budget `48 K alpha^{-1/2} R^2` of the Picard map on the ball of radius `2R`.
    pub fn contraction_budget(&self, radius: f64) -> f64 {
        48.0 * self.cubic_factor() * radius * radius
    }

    /// `1 + 32 K alpha^{-1/2} R^2`: the Picard map sends the `2R` ball into the
    /// ball of radius `growth * R`.
    pub fn ball_growth(&self, radius: f64) -> f64 {
        1.0 + 32.0 * self.cubic_factor() * radius * radius
    }

    /// `alpha^{1/4} / (4 K^{1/2})`, the ceiling of the monotone-scheme envelope.
    pub fn ks_threshold(&self) -> f64 {
        self.alpha.powf(0.25) / (4.0 * self.k_beta.sqrt())
    }

    /// `12 K alpha^{-1/2} |u0|^2`, the gap-absorption factor of the monotone scheme.
    pub fn absorption(&self, u0_norm: f64) -> f64 {
        12.0 * self.cubic_factor() * u0_norm * u0_norm
    }
}

/// `r_max = alpha^{1/4} / (4 sqrt(6) K^{1/2})`.
pub fn vacuum_radius(alpha: f64, k_beta: f64) -> f64 {
    alpha.powf(0.25) / (4.0 * 6f64.sqrt() * k_beta.sqrt())
}

/// Assembles `K_beta` and the derived radii. The supremum over `v` is taken
/// numerically over a scan of `|v|` (the integral is radial in `v`).
pub fn compute_constants(p: &MaxwellianParams) -> Result<BoundConstants> {
    p.validate()?;
    let dim = p.dim;
    let q = dim as f64 - 3.0;
    let reach = 4.0 / p.beta.sqrt();
    let mut s_beta: f64 = 0.0;
    let mut arg = 0.0;
    let mut v = [0.0; 3];
    for i in 0..=32 {
        v[0] = reach * i as f64 / 32.0;
        let s = convolution_integral(&v[..dim], q, p.beta).0;
        if s > s_beta {
            s_beta = s;
            arg = v[0];
        }
    }
    let c_d = kernel_constant(dim)?;
    let k_beta = PI.sqrt() * c_d * s_beta;
    let out = BoundConstants {
        dim,
        alpha: p.alpha,
        beta: p.beta,
        c_d,
        s_beta,
        k_beta,
        r_max: vacuum_radius(p.alpha, k_beta),
        c_conv: convolution_constant(dim),
    };
    debug!(
        "constants d={} alpha={} beta={}: c_d={} S={} (at |v|={arg}) K={} R_max={}",
        dim, p.alpha, p.beta, c_d, s_beta, k_beta, out.r_max
    );
    Ok(out)
}

/// Both sides of the integrated gain and loss estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriCheck {
    pub gain_lhs: f64,
    pub gain_rhs: f64,
    pub loss_lhs: f64,
    pub loss_rhs: f64,
}

impl AprioriCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.gain_lhs <= self.gain_rhs * (1.0 + slack) && self.loss_lhs <= self.loss_rhs * (1.0 + slack)
    }
}

/// `|| int_0^t G#(f,g,h,k) ||` against `K alpha^{-1/2} |h||k|(|f|+|g|)` and
/// `|| int_0^t L#(f,g,h,k) ||` against `K alpha^{-1/2} |f||g|(|h|+|k|)`, with
/// each slab norm taken as the sup over the slices in `[0, t]`.
pub fn apriori_check(
    op: &CollisionOperator,
    f: &TimeSlab,
    g: &TimeSlab,
    h: &TimeSlab,
    k: &TimeSlab,
    kt: usize,
    constants: &BoundConstants,
) -> Result<AprioriCheck> {
    let p = constants.params();
    if op.params() != &p {
        return Err(Error::param(
            "constants",
            "computed for different Maxwellian parameters",
        ));
    }
    if kt > f.nt() {
        return Err(Error::param("kt", format!("time index {kt} beyond nt = {}", f.nt())));
    }
    let (gain, rate) = op.gain_rate(f, g, h, k)?;
    let loss = f.zip_with(&rate, |a, b| a.zip_with(b, |x, y| x * y));
    let gain_lhs = gain.cumulative_integral().slice(kt).maxwellian_norm(&p);
    let loss_lhs = loss.cumulative_integral().slice(kt).maxwellian_norm(&p);
    let upto = |s: &TimeSlab| s.slice_norms(&p)[..=kt].iter().fold(0.0, |a: f64, &b| a.max(b));
    let (nf, ng, nh, nk) = (upto(f), upto(g), upto(h), upto(k));
    let c = constants.cubic_factor();
    Ok(AprioriCheck {
        gain_lhs,
        gain_rhs: c * nh * nk * (nf + ng),
        loss_lhs,
        loss_rhs: c * nf * ng * (nh + nk),
    })
}
