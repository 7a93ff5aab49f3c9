//! Brute-force reference for the resonant integral: the energy delta is
//! replaced by a unit-mass Gaussian of width `eps` and the remaining
//! `v2` integral is summed on a fine Cartesian grid. Shares nothing with the
//! sphere reduction in [`super::manifold`], which it is used to check.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::phase::norm2;

/// Sampling controls for the mollified integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSpec {
    /// Box half-width beyond the sphere, in units of `sqrt(eps)`.
    pub margin_factor: f64,
    /// Grid points per radial mollifier width `eps / (4 R)`.
    pub points_per_width: f64,
    /// Largest relative change allowed when `eps` is halved.
    pub rel_tol: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            margin_factor: 5.0,
            points_per_width: 2.0,
            rel_tol: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOutcome {
    pub coarse: f64,
    pub fine: f64,
    /// Richardson extrapolation `(4 fine - coarse) / 3`; the mollification
    /// error is even in `eps`.
    pub extrapolated: f64,
}

impl OracleOutcome {
    pub fn value(&self) -> f64 {
        self.extrapolated
    }
}

/// `int delta_eps(Omega(v2)) F(v2, v + v1 - v2) dv2` on a tensor grid.
pub fn mollified_integral(
    f: &impl Fn(&[f64], &[f64]) -> f64,
    v: &[f64],
    v1: &[f64],
    eps: f64,
    spec: &OracleSpec,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    let d = v.len();
    let mut mid = [0.0; 3];
    let mut total = [0.0; 3];
    for a in 0..d {
        mid[a] = 0.5 * (v[a] + v1[a]);
        total[a] = v[a] + v1[a];
    }
    let radius = 0.5 * v.iter().zip(v1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let width = eps / (4.0 * radius.max(0.25));
    let h = width / spec.points_per_width;
    let half = radius + spec.margin_factor * eps.sqrt();
    let n = (half / h).ceil() as i64;
    let energy = norm2(v) + norm2(v1);
    let norm = 1.0 / ((2.0 * PI).sqrt() * eps);
    let cutoff = 12.0 * eps;

    let mut acc = 0.0;
    let mut idx = vec![-n; d];
    let mut v2 = [0.0; 3];
    let mut v3 = [0.0; 3];
    loop {
        for a in 0..d {
            v2[a] = mid[a] + h * idx[a] as f64;
            v3[a] = total[a] - v2[a];
        }
        let omega = norm2(&v2[..d]) + norm2(&v3[..d]) - energy;
        if omega.abs() < cutoff {
            acc += norm * (-0.5 * (omega / eps).powi(2)).exp() * f(&v2[..d], &v3[..d]);
        }
        // odometer over the d grid indices
        let mut a = d;
        loop {
            if a == 0 {
                return Ok(acc * h.powi(d as i32));
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] <= n {
                break;
            }
            idx[a] = -n;
        }
    }
}

/// Mollified integral at `eps` and `eps / 2`, extrapolated to `eps -> 0`.
/// Fails when halving `eps` moves the value by more than `spec.rel_tol`.
pub fn brute_force_oracle(
    f: impl Fn(&[f64], &[f64]) -> f64,
    v: &[f64],
    v1: &[f64],
    eps: f64,
    spec: &OracleSpec,
) -> Result<OracleOutcome> {
    let coarse = mollified_integral(&f, v, v1, eps, spec)?;
    let fine = mollified_integral(&f, v, v1, 0.5 * eps, spec)?;
    let scale = fine.abs().max(coarse.abs()).max(f64::MIN_POSITIVE);
    if (fine - coarse).abs() > spec.rel_tol * scale {
        return Err(Error::OracleNonConvergence { coarse, fine });
    }
    Ok(OracleOutcome {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::manifold::{kernel_constant, manifold_quadrature, undoubled_constant};
    use crate::resonance::sphere::SphereRule;

    #[test]
    fn unit_integrand_in_two_dimensions() {
        let out = brute_force_oracle(|_, _| 1.0, &[1.0, 0.0], &[-1.0, 0.0], 0.1, &OracleSpec::default()).unwrap();
        let c = kernel_constant(2).unwrap();
        assert!(((out.value() - c) / c).abs() < 0.01, "{out:?}");
        let doubled = undoubled_constant(2).unwrap();
        assert!((out.value() / doubled - 0.5).abs() < 0.01);
    }

    #[test]
    fn unit_integrand_in_three_dimensions() {
        let out = brute_force_oracle(|_, _| 1.0, &[1.0, 0.0, 0.0], &[0.0; 3], 0.1, &OracleSpec::default()).unwrap();
        let c = kernel_constant(3).unwrap();
        assert!(((out.value() - c) / c).abs() < 0.02, "{out:?}");
    }

    #[test]
    fn gaussian_integrand_agrees_with_sphere_reduction() {
        let f = |v2: &[f64], v3: &[f64]| (-norm2(v2) - norm2(v3)).exp();
        let (v, v1) = ([1.0, 0.0], [0.0, 1.0]);
        let out = brute_force_oracle(f, &v, &v1, 0.05, &OracleSpec::default()).unwrap();
        let q = manifold_quadrature(f, &v, &v1, &SphereRule::circle(32).unwrap());
        assert!(
            ((out.value() - q) / q).abs() < 0.01,
            "oracle {} vs sphere {q}",
            out.value()
        );
    }

    #[test]
    fn rejects_loose_tolerance_failures() {
        let spec = OracleSpec {
            rel_tol: 1e-9,
            ..OracleSpec::default()
        };
        let err = brute_force_oracle(|_, _| 1.0, &[1.0, 0.0, 0.0], &[0.0; 3], 0.4, &spec).unwrap_err();
        assert!(matches!(err, Error::OracleNonConvergence { .. }));
        assert!(mollified_integral(&|_: &[f64], _: &[f64]| 1.0, &[1.0, 0.0], &[0.0, 0.0], 0.0, &spec).is_err());
    }
}
