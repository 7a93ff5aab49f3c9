//! Phase-space discretization: Maxwellian weights, tensor grids, sampled
//! fields, time slabs and Gaussian-sum initial data.
//!
//! Every field stored by the solvers lives in the *sharp* frame
//! `f#(t, x, v) = f(t, x + t v, v)`, in which free transport is absent and
//! the mild formulation is a plain ODE in time at every phase-space node.
//! The physical frame is reconstructed on demand by
//! [`TimeSlab::pushforward`].
//!
//! Sampled values are laid out row-major over the axes
//! `(x_1, .., x_d, v_1, .., v_d)`: the flat index of node `(ix, iv)` is
//! `ix * nv^d + iv`, where `ix` and `iv` are themselves row-major over the
//! spatial and velocity axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional grid positions closer than this to an integer are snapped to it.
pub(crate) const SNAP: f64 = 1e-9;

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|c| c * c).sum()
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 3 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Rates of the Gaussian weight `e^{alpha |x|^2 + beta |v|^2}` defining the
/// near-vacuum sup-norm, together with the dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianParams {
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
}

impl MaxwellianParams {
    pub fn new(alpha: f64, beta: f64, dim: usize) -> Result<Self> {
        let p = MaxwellianParams { alpha, beta, dim };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", format!("must be positive, got {}", self.beta)));
        }
        check_dim(self.dim)
    }

    /// `e^{alpha |x|^2 + beta |v|^2}`.
    pub fn weight(&self, x: &[f64], v: &[f64]) -> f64 {
        (self.alpha * norm2(x) + self.beta * norm2(v)).exp()
    }

    /// `e^{-alpha |x|^2 - beta |v|^2}`.
    pub fn envelope(&self, x: &[f64], v: &[f64]) -> f64 {
        (-self.alpha * norm2(x) - self.beta * norm2(v)).exp()
    }
}

/// Uniform tensor grid on `[-x_extent, x_extent]^d x [-v_extent, v_extent]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub dim: usize,
    pub x_extent: f64,
    pub v_extent: f64,
    pub nx: usize,
    pub nv: usize,
}

impl PhaseGrid {
    pub fn new(dim: usize, x_extent: f64, v_extent: f64, nx: usize, nv: usize) -> Result<Self> {
        let g = PhaseGrid {
            dim,
            x_extent,
            v_extent,
            nx,
            nv,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if !(self.x_extent > 0.0 && self.x_extent.is_finite()) {
            return Err(Error::param("x_extent", "must be positive"));
        }
        if !(self.v_extent > 0.0 && self.v_extent.is_finite()) {
            return Err(Error::param("v_extent", "must be positive"));
        }
        if self.nx < 2 {
            return Err(Error::param("nx", "need at least 2 points per axis"));
        }
        if self.nv < 2 {
            return Err(Error::param("nv", "need at least 2 points per axis"));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.x_extent / (self.nx - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        2.0 * self.v_extent / (self.nv - 1) as f64
    }

    pub fn x_axis(&self) -> Vec<f64> {
        let h = self.hx();
        (0..self.nx).map(|i| -self.x_extent + h * i as f64).collect()
    }

    pub fn v_axis(&self) -> Vec<f64> {
        let h = self.hv();
        (0..self.nv).map(|i| -self.v_extent + h * i as f64).collect()
    }

    /// Number of spatial nodes, `nx^d`.
    pub fn x_count(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    /// Number of velocity nodes, `nv^d`.
    pub fn v_count(&self) -> usize {
        self.nv.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.x_count() * self.v_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iv: usize) -> usize {
        ix * self.v_count() + iv
    }

    fn decode(lin: usize, n: usize, dim: usize, lo: f64, h: f64) -> [f64; 3] {
        let mut p = [0.0; 3];
        let mut rem = lin;
        for a in (0..dim).rev() {
            p[a] = lo + h * (rem % n) as f64;
            rem /= n;
        }
        p
    }

    /// Coordinates of spatial node `ix`; entries past `dim` are zero.
    pub fn x_point(&self, ix: usize) -> [f64; 3] {
        Self::decode(ix, self.nx, self.dim, -self.x_extent, self.hx())
    }

    /// Coordinates of velocity node `iv`; entries past `dim` are zero.
    pub fn v_point(&self, iv: usize) -> [f64; 3] {
        Self::decode(iv, self.nv, self.dim, -self.v_extent, self.hv())
    }

    /// `(e^{-alpha L_x^2}, e^{-beta L_v^2})`: size of the Maxwellian envelope
    /// at the box faces, i.e. the mass discarded by the zero extension.
    pub fn truncation(&self, p: &MaxwellianParams) -> (f64, f64) {
        (
            (-p.alpha * self.x_extent * self.x_extent).exp(),
            (-p.beta * self.v_extent * self.v_extent).exp(),
        )
    }

    pub fn check_truncation(&self, p: &MaxwellianParams, tol: f64) -> Result<()> {
        let (ex, ev) = self.truncation(p);
        if ex >= tol {
            return Err(Error::param(
                "x_extent",
                format!("e^(-alpha L_x^2) = {ex:.3e} is not below the truncation tolerance {tol:.1e}"),
            ));
        }
        if ev >= tol {
            return Err(Error::param(
                "v_extent",
                format!("e^(-beta L_v^2) = {ev:.3e} is not below the truncation tolerance {tol:.1e}"),
            ));
        }
        Ok(())
    }

    /// Worst-case spatial shift `T * 2 L_v` produced by the shifted
    /// evaluations `x + t (v - v_i)` over `[0, T]`, relative to `L_x`.
    /// Values above one mean some shifted reads leave the box and see vacuum.
    pub fn shift_excursion(&self, horizon: f64) -> f64 {
        horizon * 2.0 * self.v_extent / self.x_extent
    }
}

/// Locate a fractional grid position on an axis with `n` nodes.
/// Returns the lower node and the fraction, or `None` outside `[0, n - 1]`.
pub(crate) fn locate(mut p: f64, n: usize) -> Option<(usize, f64)> {
    let r = p.round();
    if (p - r).abs() < SNAP {
        p = r;
    }
    if !(p >= 0.0 && p <= (n - 1) as f64) {
        return None;
    }
    let lo = (p.floor() as usize).min(n - 2);
    Some((lo, p - lo as f64))
}

/// A function of `(x, v)` sampled on a [`PhaseGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn zeros(grid: PhaseGrid) -> Self {
        PhaseField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param(
                "values",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite sample {bad}")));
        }
        Ok(PhaseField { grid, values })
    }

    /// Samples `f(x, v)` at every node.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&[f64], &[f64]) -> f64) -> Self {
        let d = grid.dim;
        let xs: Vec<_> = (0..grid.x_count()).map(|i| grid.x_point(i)).collect();
        let vs: Vec<_> = (0..grid.v_count()).map(|i| grid.v_point(i)).collect();
        let mut values = Vec::with_capacity(grid.len());
        for x in &xs {
            for v in &vs {
                values.push(f(&x[..d], &v[..d]));
            }
        }
        PhaseField { grid, values }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, ix: usize, iv: usize) -> f64 {
        self.values[self.grid.index(ix, iv)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        PhaseField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        PhaseField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    /// Largest absolute nodal value.
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Nodal values times the Maxwellian weight `e^{alpha|x|^2 + beta|v|^2}`.
    pub fn weighted(&self, p: &MaxwellianParams) -> Vec<f64> {
        let g = &self.grid;
        let d = g.dim;
        let wx: Vec<f64> = (0..g.x_count())
            .map(|i| (p.alpha * norm2(&g.x_point(i)[..d])).exp())
            .collect();
        let wv: Vec<f64> = (0..g.v_count())
            .map(|i| (p.beta * norm2(&g.v_point(i)[..d])).exp())
            .collect();
        let nv = g.v_count();
        self.values
            .iter()
            .enumerate()
            .map(|(k, &f)| f * wx[k / nv] * wv[k % nv])
            .collect()
    }

    /// Discrete `||f|| = max_nodes |f| e^{alpha|x|^2 + beta|v|^2}`; a lower
    /// bound of the continuum sup-norm.
    pub fn maxwellian_norm(&self, p: &MaxwellianParams) -> f64 {
        self.weighted(p).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear interpolation over the `2d`-dimensional cell containing
    /// `(x, v)`; zero outside the grid box.
    pub fn interpolate(&self, x: &[f64], v: &[f64]) -> f64 {
        self.interpolate_with(x, v, |ix, iv| self.values[self.grid.index(ix, iv)])
    }

    /// Maxwellian-weighted reconstruction: interpolates `f e^{alpha|x|^2 +
    /// beta|v|^2}` multilinearly and multiplies back by the envelope at the
    /// query point. Exact at nodes and on `c * envelope`, monotone in the
    /// nodal values, and its weighted sup over the whole box equals the
    /// nodal [`maxwellian_norm`](Self::maxwellian_norm).
    pub fn interpolate_weighted(&self, x: &[f64], v: &[f64], p: &MaxwellianParams) -> f64 {
        let g = &self.grid;
        let d = g.dim;
        let raw = self.interpolate_with(x, v, |ix, iv| {
            let xn = g.x_point(ix);
            let vn = g.v_point(iv);
            self.values[g.index(ix, iv)] * p.weight(&xn[..d], &vn[..d])
        });
        if raw == 0.0 {
            0.0
        } else {
            raw * p.envelope(x, v)
        }
    }

    fn interpolate_with(&self, x: &[f64], v: &[f64], node: impl Fn(usize, usize) -> f64) -> f64 {
        let g = &self.grid;
        let d = g.dim;
        debug_assert!(x.len() >= d && v.len() >= d);
        let mut x_cells = [(0usize, 0.0f64); 3];
        let mut v_cells = [(0usize, 0.0f64); 3];
        let (hx, hv) = (g.hx(), g.hv());
        for a in 0..d {
            match locate((x[a] + g.x_extent) / hx, g.nx) {
                Some(c) => x_cells[a] = c,
                None => return 0.0,
            }
            match locate((v[a] + g.v_extent) / hv, g.nv) {
                Some(c) => v_cells[a] = c,
                None => return 0.0,
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << (2 * d)) {
            let mut w = 1.0;
            let mut ix = 0;
            let mut iv = 0;
            for a in 0..d {
                let bx = (corner >> a) & 1;
                let bv = (corner >> (d + a)) & 1;
                let (lx, tx) = x_cells[a];
                let (lv, tv) = v_cells[a];
                w *= if bx == 1 { tx } else { 1.0 - tx };
                w *= if bv == 1 { tv } else { 1.0 - tv };
                ix = ix * g.nx + lx + bx;
                iv = iv * g.nv + lv + bv;
            }
            if w != 0.0 {
                acc += w * node(ix, iv);
            }
        }
        acc
    }
}

/// Time step and number of steps of a uniformly gridded trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabGeometry {
    pub grid: PhaseGrid,
    pub dt: f64,
    pub nt: usize,
}

impl SlabGeometry {
    pub fn new(grid: PhaseGrid, horizon: f64, nt: usize) -> Result<Self> {
        grid.validate()?;
        if nt == 0 {
            return Err(Error::param("nt", "need at least one time step"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        Ok(SlabGeometry {
            grid,
            dt: horizon / nt as f64,
            nt,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.nt as f64
    }
}

/// A trajectory `f#(t_k)` on `t_k = k dt`, `k = 0..=nt`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlab {
    dt: f64,
    fields: Vec<PhaseField>,
}

impl TimeSlab {
    pub fn new(dt: f64, fields: Vec<PhaseField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        let Some(first) = fields.first() else {
            return Err(Error::param("fields", "a slab needs at least one slice"));
        };
        if fields.iter().any(|f| f.grid != first.grid) {
            return Err(Error::GeometryMismatch);
        }
        Ok(TimeSlab { dt, fields })
    }

    pub fn constant(field: &PhaseField, geom: &SlabGeometry) -> Self {
        TimeSlab {
            dt: geom.dt,
            fields: vec![field.clone(); geom.nt + 1],
        }
    }

    pub fn zeros(geom: &SlabGeometry) -> Self {
        Self::constant(&PhaseField::zeros(geom.grid), geom)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.nt() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.fields[0].grid
    }

    pub fn geometry(&self) -> SlabGeometry {
        SlabGeometry {
            grid: *self.grid(),
            dt: self.dt,
            nt: self.nt(),
        }
    }

    pub fn slice(&self, k: usize) -> &PhaseField {
        &self.fields[k]
    }

    pub fn slices(&self) -> &[PhaseField] {
        &self.fields
    }

    pub fn into_slices(self) -> Vec<PhaseField> {
        self.fields
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.dt == other.dt && self.fields.len() == other.fields.len() && self.grid() == other.grid()
    }

    pub fn map(&self, f: impl Fn(&PhaseField) -> PhaseField) -> Self {
        TimeSlab {
            dt: self.dt,
            fields: self.fields.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&PhaseField, &PhaseField) -> PhaseField) -> Self {
        assert!(self.same_geometry(other), "slabs have different geometry");
        TimeSlab {
            dt: self.dt,
            fields: self.fields.iter().zip(&other.fields).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, PhaseField::sub)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|f| f.scale(c))
    }

    /// Per-slice discrete Maxwellian norms.
    pub fn slice_norms(&self, p: &MaxwellianParams) -> Vec<f64> {
        self.fields.iter().map(|f| f.maxwellian_norm(p)).collect()
    }

    /// `|||f||| = max_k ||f(t_k)||`.
    pub fn slab_norm(&self, p: &MaxwellianParams) -> f64 {
        self.slice_norms(p).into_iter().fold(0.0, f64::max)
    }

    /// Largest nodal absolute value over all slices.
    pub fn sup(&self) -> f64 {
        self.fields.iter().map(PhaseField::sup).fold(0.0, f64::max)
    }

    /// `||f(t_{k+1}) - f(t_k)||` for consecutive slices; the only
    /// time-continuity information a sampled trajectory carries.
    pub fn slice_increments(&self, p: &MaxwellianParams) -> Vec<f64> {
        self.fields
            .windows(2)
            .map(|w| w[1].sub(&w[0]).maxwellian_norm(p))
            .collect()
    }

    /// Cumulative trapezoid integral `int_0^{t_k} f(tau) dtau` for every `k`.
    pub fn cumulative_integral(&self) -> TimeSlab {
        let grid = *self.grid();
        let mut acc = PhaseField::zeros(grid);
        let mut out = Vec::with_capacity(self.fields.len());
        out.push(acc.clone());
        for w in self.fields.windows(2) {
            for ((a, l), r) in acc.values_mut().iter_mut().zip(w[0].values()).zip(w[1].values()) {
                *a += 0.5 * self.dt * (l + r);
            }
            out.push(acc.clone());
        }
        TimeSlab {
            dt: self.dt,
            fields: out,
        }
    }

    /// Physical-frame field `f(t_k, x, v) = f#(t_k, x - t_k v, v)` at the
    /// grid nodes, read off the sharp-frame slice by multilinear
    /// interpolation.
    pub fn pushforward(&self, k: usize) -> PhaseField {
        let src = &self.fields[k];
        if k == 0 {
            return src.clone();
        }
        let t = self.time(k);
        let d = self.grid().dim;
        PhaseField::from_fn(*self.grid(), |x, v| {
            let mut y = [0.0; 3];
            for a in 0..d {
                y[a] = x[a] - t * v[a];
            }
            src.interpolate(&y[..d], v)
        })
    }
}

/// `max over slices and nodes of (|f#| e^{alpha|x|^2 + beta|v|^2} - 2R)`;
/// non-positive exactly when `|f#| <= 2R e^{-alpha|x|^2 - beta|v|^2}` holds
/// at every node, i.e. when `|f(t,x,v)| <= 2R e^{-alpha|x - tv|^2 - beta|v|^2}`
/// holds along the grid characteristics.
pub fn envelope_check(slab: &TimeSlab, radius: f64, p: &MaxwellianParams) -> f64 {
    slab.slab_norm(p) - 2.0 * radius
}

/// Per-slice version of [`envelope_check`].
pub fn envelope_margins(slab: &TimeSlab, radius: f64, p: &MaxwellianParams) -> Vec<f64> {
    slab.slice_norms(p).into_iter().map(|n| n - 2.0 * radius).collect()
}

/// One Gaussian bump `a e^{-a_x |x - x_0|^2 - a_v |v - v_0|^2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub x_center: Vec<f64>,
    pub v_center: Vec<f64>,
    pub x_rate: f64,
    pub v_rate: f64,
}

impl GaussianTerm {
    pub fn centered(amplitude: f64, dim: usize, x_rate: f64, v_rate: f64) -> Self {
        GaussianTerm {
            amplitude,
            x_center: vec![0.0; dim],
            v_center: vec![0.0; dim],
            x_rate,
            v_rate,
        }
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        let dx: f64 = x.iter().zip(&self.x_center).map(|(a, b)| (a - b) * (a - b)).sum();
        let dv: f64 = v.iter().zip(&self.v_center).map(|(a, b)| (a - b) * (a - b)).sum();
        self.amplitude * (-self.x_rate * dx - self.v_rate * dv).exp()
    }

    /// Continuum `sup |term| e^{alpha|x|^2 + beta|v|^2}` in closed form.
    /// A rate equal to the weight rate is finite only for a centered bump.
    pub fn norm(&self, p: &MaxwellianParams) -> f64 {
        fn axis_log_sup(rate: f64, weight: f64, c2: f64) -> f64 {
            if c2 == 0.0 {
                0.0
            } else if rate > weight {
                rate * weight * c2 / (rate - weight)
            } else {
                f64::INFINITY
            }
        }
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let lx = axis_log_sup(self.x_rate, p.alpha, norm2(&self.x_center));
        let lv = axis_log_sup(self.v_rate, p.beta, norm2(&self.v_center));
        self.amplitude.abs() * (lx + lv).exp()
    }
}

/// Gaussian-sum initial data `f_0(x, v) = sum_i a_i e^{-a_i^x |x - x_i|^2 - a_i^v |v - v_i|^2}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub terms: Vec<GaussianTerm>,
}

impl InitialDataSpec {
    pub fn vacuum() -> Self {
        InitialDataSpec { terms: Vec::new() }
    }

    pub fn single(term: GaussianTerm) -> Self {
        InitialDataSpec { terms: vec![term] }
    }

    /// Closed-form value of `f_0(x, v)`.
    pub fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x, v)).sum()
    }

    pub fn sample(&self, grid: &PhaseGrid) -> PhaseField {
        PhaseField::from_fn(*grid, |x, v| self.eval(x, v))
    }

    /// Grid maximum of the weighted data; the norm used by admissibility gates.
    pub fn grid_norm(&self, grid: &PhaseGrid, p: &MaxwellianParams) -> f64 {
        self.sample(grid).maxwellian_norm(p)
    }

    /// Continuum upper bound on `||f_0||` (exact for a single term).
    pub fn norm_bound(&self, p: &MaxwellianParams) -> f64 {
        self.terms.iter().map(|t| t.norm(p)).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude >= 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        InitialDataSpec {
            terms: self
                .terms
                .iter()
                .map(|t| GaussianTerm {
                    amplitude: c * t.amplitude,
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// Every violated invariant, as human-readable messages.
    pub fn problems(&self, p: &MaxwellianParams) -> Vec<String> {
        let mut out = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            if t.x_center.len() != p.dim || t.v_center.len() != p.dim {
                out.push(format!(
                    "initial_data.terms[{i}]: centers must have {} components",
                    p.dim
                ));
            }
            if !t.amplitude.is_finite() {
                out.push(format!("initial_data.terms[{i}].amplitude: must be finite"));
            }
            if !(t.x_rate >= p.alpha) {
                out.push(format!(
                    "initial_data.terms[{i}].x_rate: {} is below alpha = {}",
                    t.x_rate, p.alpha
                ));
            }
            if !(t.v_rate >= p.beta) {
                out.push(format!(
                    "initial_data.terms[{i}].v_rate: {} is below beta = {}",
                    t.v_rate, p.beta
                ));
            }
            if out.is_empty() && !t.norm(p).is_finite() {
                out.push(format!(
                    "initial_data.terms[{i}]: an off-center bump needs rates strictly above (alpha, beta)"
                ));
            }
        }
        out
    }
}
