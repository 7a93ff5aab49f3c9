//! The resonant manifold `v + v1 = v2 + v3`, `|v|^2 + |v1|^2 = |v2|^2 + |v3|^2`
//! and the delta-reduced integral over it.
//!
//! Eliminating `v3 = v + v1 - v2` leaves the energy constraint
//! `Omega(v2) = 2 (|v2 - a|^2 - R^2)` with midpoint `a = (v + v1) / 2` and
//! radius `R = |v - v1| / 2`. In polar coordinates around `a`,
//! `delta(2 (r^2 - R^2)) = delta(r - R) / (4R)`, so
//!
//! ```text
//! int int delta(Sigma) delta(Omega) F(v2, v3) dv2 dv3
//!     = R^{d-2} / 4 * int_{S^{d-1}} F(a + R w, a - R w) dw,
//! ```
//!
//! and with `F = 1` the kernel integral is `c_d |v - v1|^{d-2}` with
//! `c_d = d omega_d / 2^d` (`pi / 2` in both d = 2 and d = 3).

use std::f64::consts::PI;

use super::sphere::SphereRule;
use crate::error::Result;
use crate::phase::{check_dim, norm2};

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        d => super::sphere::sphere_area(d) / d as f64,
    }
}

/// `c_d = d omega_d / 2^d`, the constant of the kernel integral as produced
/// by the delta reduction above (and confirmed by the mollified oracle).
pub fn kernel_constant(dim: usize) -> Result<f64> {
    check_dim(dim)?;
    Ok(dim as f64 * unit_ball_volume(dim) / 2f64.powi(dim as i32))
}

/// `d omega_d / 2^{d-1}`: the constant obtained when the factor 2 in
/// `Omega = 2 (|v2 - a|^2 - R^2)` is dropped. Kept only so the oracle can be
/// compared against both candidates.
pub fn undoubled_constant(dim: usize) -> Result<f64> {
    Ok(2.0 * kernel_constant(dim)?)
}

/// `I(v, v1) = int delta(Sigma) delta(Omega) dv2 dv3 = c_d |v - v1|^{d-2}`.
pub fn manifold_constant(v: &[f64], v1: &[f64], dim: usize) -> Result<f64> {
    let c = kernel_constant(dim)?;
    let dist = v.iter().zip(v1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(c * dist.powi(dim as i32 - 2))
}

/// A point of the resonant manifold parametrized by a direction `omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldPoint {
    pub mid: [f64; 3],
    pub radius: f64,
    pub v2: [f64; 3],
    pub v3: [f64; 3],
}

impl ManifoldPoint {
    pub fn new(v: &[f64], v1: &[f64], omega: &[f64]) -> Self {
        let mut mid = [0.0; 3];
        let mut diff = [0.0; 3];
        for a in 0..v.len() {
            mid[a] = 0.5 * (v[a] + v1[a]);
            diff[a] = v[a] - v1[a];
        }
        let radius = 0.5 * norm2(&diff).sqrt();
        let mut v2 = [0.0; 3];
        let mut v3 = [0.0; 3];
        for a in 0..v.len() {
            v2[a] = mid[a] + radius * omega[a];
            v3[a] = mid[a] - radius * omega[a];
        }
        ManifoldPoint { mid, radius, v2, v3 }
    }

    /// Sphere-reduction Jacobian `R^{d-2} / 4`.
    pub fn jacobian(&self, dim: usize) -> f64 {
        self.radius.powi(dim as i32 - 2) / 4.0
    }
}

/// Delta-reduced resonant integral of `F(v2, v3)` at fixed `(v, v1)`.
pub fn manifold_quadrature(f: impl Fn(&[f64], &[f64]) -> f64, v: &[f64], v1: &[f64], rule: &SphereRule) -> f64 {
    let d = rule.dim();
    let mut acc = 0.0;
    let mut jac = 0.0;
    for (omega, w) in rule.nodes().iter().zip(rule.weights()) {
        let p = ManifoldPoint::new(&v[..d], &v1[..d], &omega[..d]);
        jac = p.jacobian(d);
        if jac == 0.0 {
            return 0.0;
        }
        acc += w * f(&p.v2[..d], &p.v3[..d]);
    }
    jac * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants() {
        assert!((kernel_constant(2).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((kernel_constant(3).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((undoubled_constant(3).unwrap() - PI).abs() < 1e-15);
        assert!(kernel_constant(4).is_err());
        assert!((manifold_constant(&[0.3, -1.0], &[2.0, 5.0], 2).unwrap() - PI / 2.0).abs() < 1e-15);
        let c3 = manifold_constant(&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], 3).unwrap();
        assert!((c3 - PI / 2.0).abs() < 1e-15);
        assert_eq!(manifold_constant(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3).unwrap(), 0.0);
    }

    #[test]
    fn unit_function_matches_constant() {
        let r2 = SphereRule::circle(16).unwrap();
        let (v, v1) = ([0.4, -1.3], [1.1, 0.2]);
        let q = manifold_quadrature(|_, _| 1.0, &v, &v1, &r2);
        let c = manifold_constant(&v, &v1, 2).unwrap();
        assert!(((q - c) / c).abs() < 1e-12);

        let r3 = SphereRule::lebedev(26).unwrap();
        let (v, v1) = ([0.4, -1.3, 0.7], [1.1, 0.2, -0.5]);
        let q = manifold_quadrature(|_, _| 1.0, &v, &v1, &r3);
        let c = manifold_constant(&v, &v1, 3).unwrap();
        assert!(((q - c) / c).abs() < 1e-12);
    }

    #[test]
    fn momentum_sum_integrates_to_total_momentum() {
        let rule = SphereRule::lebedev(26).unwrap();
        let (v, v1) = ([0.4, -1.3, 0.7], [1.1, 0.2, -0.5]);
        let c = manifold_constant(&v, &v1, 3).unwrap();
        for a in 0..3 {
            let q = manifold_quadrature(|v2, v3| v2[a] + v3[a], &v, &v1, &rule);
            assert!((q - (v[a] + v1[a]) * c).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_point() {
        let r2 = SphereRule::circle(8).unwrap();
        let f = |v2: &[f64], v3: &[f64]| 3.0 + v2[0] + v3[1];
        let q2 = manifold_quadrature(f, &[0.0, 0.0], &[0.0, 0.0], &r2);
        assert!((q2 - 3.0 * PI / 2.0).abs() < 1e-14);
        let r3 = SphereRule::lebedev(14).unwrap();
        let q3 = manifold_quadrature(|_, _| 7.0, &[0.0; 3], &[0.0; 3], &r3);
        assert_eq!(q3, 0.0);
    }

    proptest! {
        #[test]
        fn resonance_identities_hold_at_nodes(
            v in prop::array::uniform3(-4.0f64..4.0),
            v1 in prop::array::uniform3(-4.0f64..4.0),
            node in 0usize..26,
        ) {
            let rule = SphereRule::lebedev(26).unwrap();
            let p = ManifoldPoint::new(&v, &v1, &rule.nodes()[node]);
            for a in 0..3 {
                prop_assert!((p.v2[a] + p.v3[a] - v[a] - v1[a]).abs() < 1e-12);
            }
            let omega = norm2(&p.v2) + norm2(&p.v3) - norm2(&v) - norm2(&v1);
            prop_assert!(omega.abs() < 1e-10);
        }
    }
}
