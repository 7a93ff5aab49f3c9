//! Quadrature rules on the unit sphere `S^{d-1}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and positive weights on `S^{d-1}`; the weights sum to the surface
/// area (`2 pi` or `4 pi`). Every rule built here is antipodally balanced:
/// `-omega_i` is a node carrying the same weight, recorded in `antipode`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    degree: usize,
}

impl SphereRule {
    /// `n`-point trapezoid rule on the circle (`n` even). Exact for
    /// trigonometric polynomials of degree below `n`.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 2 || n % 2 == 1 {
            return Err(Error::param(
                "sphere_order",
                format!("circle rule needs an even n >= 2, got {n}"),
            ));
        }
        let w = 2.0 * PI / n as f64;
        let nodes = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                [th.cos(), th.sin(), 0.0]
            })
            .collect();
        let antipode = (0..n).map(|i| (i + n / 2) % n).collect();
        Ok(SphereRule {
            dim: 2,
            nodes,
            weights: vec![w; n],
            antipode,
            degree: n - 1,
        })
    }

    /// Octahedrally symmetric Lebedev rules with 6, 14, 26 or 50 points
    /// (polynomial degree 3, 5, 7, 11).
    pub fn lebedev(points: usize) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push = |set: Vec<[f64; 3]>, w: f64| {
            for p in set {
                nodes.push(p);
                weights.push(4.0 * PI * w);
            }
        };
        let degree = match points {
            6 => {
                push(vertices(), 1.0 / 6.0);
                3
            }
            14 => {
                push(vertices(), 1.0 / 15.0);
                push(cube_corners(), 3.0 / 40.0);
                5
            }
            26 => {
                push(vertices(), 1.0 / 21.0);
                push(edge_midpoints(), 4.0 / 105.0);
                push(cube_corners(), 9.0 / 280.0);
                7
            }
            50 => {
                push(vertices(), 0.012_698_412_698_412_7);
                push(edge_midpoints(), 0.022_574_955_908_289_24);
                push(cube_corners(), 0.021_093_75);
                push(llm_orbit(0.301_511_344_577_763_6), 0.020_173_335_537_918_87);
                11
            }
            n => {
                return Err(Error::param(
                    "sphere_order",
                    format!("no Lebedev rule with {n} points (have 6, 14, 26, 50)"),
                ))
            }
        };
        Ok(Self::with_antipodes(3, nodes, weights, degree))
    }

    /// Gauss-Legendre in `cos(theta)` times a `2n`-point trapezoid in `phi`;
    /// degree `2n - 1`.
    pub fn gauss_product(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("sphere_order", "Gauss product rule needs n >= 2"));
        }
        let (zs, wz) = gauss_legendre(n);
        let m = 2 * n;
        let dphi = 2.0 * PI / m as f64;
        let mut nodes = Vec::with_capacity(n * m);
        let mut weights = Vec::with_capacity(n * m);
        for (z, w) in zs.iter().zip(&wz) {
            let s = (1.0 - z * z).sqrt();
            for j in 0..m {
                let phi = dphi * j as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), *z]);
                weights.push(w * dphi);
            }
        }
        Ok(Self::with_antipodes(3, nodes, weights, 2 * n - 1))
    }

    /// Default rule for a dimension: the `order`-point circle rule in d = 2,
    /// the Lebedev rule with `order` points in d = 3 (falling back to a
    /// Gauss product rule with `order` polar nodes).
    pub fn for_dim(dim: usize, order: usize) -> Result<Self> {
        match dim {
            2 => Self::circle(order),
            3 => Self::lebedev(order).or_else(|_| Self::gauss_product(order)),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    fn with_antipodes(dim: usize, nodes: Vec<[f64; 3]>, weights: Vec<f64>, degree: usize) -> Self {
        let antipode = nodes
            .iter()
            .map(|p| {
                nodes
                    .iter()
                    .position(|q| (0..3).all(|a| (p[a] + q[a]).abs() < 1e-12))
                    .expect("rule is not antipodally symmetric")
            })
            .collect();
        SphereRule {
            dim,
            nodes,
            weights,
            antipode,
            degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node `-omega_i`.
    pub fn antipode(&self, i: usize) -> usize {
        self.antipode[i]
    }

    /// Largest polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `sum_i w_i F(omega_i)`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| w * f(&n[..self.dim]))
            .sum()
    }
}

/// Surface area of `S^{d-1}`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        d => 2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d),
    }
}

// Gamma(d / 2) for integer d >= 1.
fn gamma_half_integer(d: usize) -> f64 {
    if d.is_multiple_of(2) {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < d as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

fn vertices() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for a in 0..3 {
        for s in [1.0, -1.0] {
            let mut p = [0.0; 3];
            p[a] = s;
            out.push(p);
        }
    }
    out
}

fn edge_midpoints() -> Vec<[f64; 3]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[a] = sa * r;
                p[b] = sb * r;
                out.push(p);
            }
        }
    }
    out
}

fn cube_corners() -> Vec<[f64; 3]> {
    let r = 1.0 / 3f64.sqrt();
    let mut out = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                out.push([sx * r, sy * r, sz * r]);
            }
        }
    }
    out
}

// The 24-point orbit of (l, l, m) with m = sqrt(1 - 2 l^2).
fn llm_orbit(l: f64) -> Vec<[f64; 3]> {
    let m = (1.0 - 2.0 * l * l).sqrt();
    let mut out = Vec::new();
    for big in 0..3 {
        for s0 in [1.0, -1.0] {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let mut p = [s0 * l, s1 * l, s2 * l];
                    p[big] = p[big].signum() * m;
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
