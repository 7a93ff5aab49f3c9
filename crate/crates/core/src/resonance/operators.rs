//! Sharp-frame gain, rate and loss operators.
//!
//! At time `t` every factor of the collision integral is read off a
//! sharp-frame slab at a shifted spatial point:
//!
//! ```text
//! G#(f,g,h,k)(t,x,v) = int dv1 R^{d-2}/4 sum_i w_i h(x + t(v-v2), v2) k(x + t(v-v3), v3)
//!                                                  * (f(x, v) + g(x + t(v-v1), v1))
//! R#(g,h,k)(t,x,v)   = int dv1 R^{d-2}/4 sum_i w_i g(x + t(v-v1), v1)
//!                                                  * (h(x + t(v-v2), v2) + k(x + t(v-v3), v3))
//! L#(f,g,h,k)        = f# R#(g,h,k)
//! ```
//!
//! with `v2, v3 = a +- R omega_i` on the resonant sphere and the outer `v1`
//! integral taken by the tensor trapezoid rule on the velocity nodes.
//!
//! Two evaluation paths exist. [`CollisionOperator::gain_eval`] and friends
//! evaluate one arbitrary point by direct reconstruction of every factor.
//! [`CollisionOperator::gain_rate_slice`] assembles whole fields: for a fixed
//! output velocity, all shifted reads at a common `(v1, omega)` differ only
//! by a uniform spatial offset, so they reduce to one velocity blend plus one
//! strided spatial blend over contiguous rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifold::ManifoldPoint;
use super::sphere::SphereRule;
use crate::error::{Error, Result};
use crate::phase::{locate, norm2, MaxwellianParams, PhaseField, PhaseGrid, TimeSlab, SNAP};

/// How off-grid values of a sampled field are reconstructed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reconstruction {
    /// Multilinear interpolation of `f e^{alpha|x|^2 + beta|v|^2}`, times the
    /// envelope at the query point.
    #[default]
    Maxwellian,
    /// Plain multilinear interpolation of `f`.
    Multilinear,
}

/// The collision operators on one phase grid.
#[derive(Clone, Debug)]
pub struct CollisionOperator {
    grid: PhaseGrid,
    params: MaxwellianParams,
    recon: Reconstruction,
    rule: SphereRule,
    // weight rates actually used for reconstruction (zero when multilinear)
    wa: f64,
    wb: f64,
    nx3: [usize; 3],
    pad: usize,
    x_axis: Vec<f64>,
    v_nodes: Vec<[f64; 3]>,
    v_quad: Vec<f64>,
    x_weight: Vec<f64>,
    v_weight: Vec<f64>,
    x_env: Vec<f64>,
    v_env: Vec<f64>,
}

impl CollisionOperator {
    pub fn new(grid: PhaseGrid, params: MaxwellianParams, rule: SphereRule, recon: Reconstruction) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        if grid.dim != params.dim || rule.dim() != grid.dim {
            return Err(Error::param(
                "dim",
                format!(
                    "grid ({}), parameters ({}) and sphere rule ({}) disagree",
                    grid.dim,
                    params.dim,
                    rule.dim()
                ),
            ));
        }
        let d = grid.dim;
        let (wa, wb) = match recon {
            Reconstruction::Maxwellian => (params.alpha, params.beta),
            Reconstruction::Multilinear => (0.0, 0.0),
        };
        let pad = 3 - d;
        let mut nx3 = [1; 3];
        for n in nx3.iter_mut().skip(pad) {
            *n = grid.nx;
        }
        let v_nodes: Vec<[f64; 3]> = (0..grid.v_count()).map(|i| grid.v_point(i)).collect();
        let hv = grid.hv();
        let trap: Vec<f64> = (0..grid.nv)
            .map(|i| if i == 0 || i == grid.nv - 1 { 0.5 * hv } else { hv })
            .collect();
        let v_quad = (0..grid.v_count())
            .map(|lin| {
                let mut w = 1.0;
                let mut rem = lin;
                for _ in 0..d {
                    w *= trap[rem % grid.nv];
                    rem /= grid.nv;
                }
                w
            })
            .collect();
        let x_sq: Vec<f64> = (0..grid.x_count()).map(|i| norm2(&grid.x_point(i)[..d])).collect();
        let v_sq: Vec<f64> = v_nodes.iter().map(|v| norm2(&v[..d])).collect();
        Ok(CollisionOperator {
            grid,
            params,
            recon,
            rule,
            wa,
            wb,
            nx3,
            pad,
            x_axis: grid.x_axis(),
            x_weight: x_sq.iter().map(|s| (wa * s).exp()).collect(),
            v_weight: v_sq.iter().map(|s| (wb * s).exp()).collect(),
            x_env: x_sq.iter().map(|s| (-wa * s).exp()).collect(),
            v_env: v_sq.iter().map(|s| (-wb * s).exp()).collect(),
            v_nodes,
            v_quad,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn params(&self) -> &MaxwellianParams {
        &self.params
    }

    pub fn rule(&self) -> &SphereRule {
        &self.rule
    }

    pub fn reconstruction(&self) -> Reconstruction {
        self.recon
    }

    /// Trapezoid weights of the outer `v1` integral, one per velocity node.
    pub fn velocity_weights(&self) -> &[f64] {
        &self.v_quad
    }

    /// Off-grid value of a sampled field under the configured reconstruction.
    pub fn reconstruct(&self, field: &PhaseField, x: &[f64], v: &[f64]) -> f64 {
        match self.recon {
            Reconstruction::Maxwellian => field.interpolate_weighted(x, v, &self.params),
            Reconstruction::Multilinear => field.interpolate(x, v),
        }
    }

    fn check_slabs(&self, slabs: &[&TimeSlab], kt: usize) -> Result<()> {
        let first = slabs[0];
        if first.grid() != &self.grid || slabs.iter().any(|s| !s.same_geometry(first)) {
            return Err(Error::GeometryMismatch);
        }
        if kt > first.nt() {
            return Err(Error::param(
                "kt",
                format!("time index {kt} beyond nt = {}", first.nt()),
            ));
        }
        Ok(())
    }

    // ----------------------------------------------------------------------
    // Pointwise evaluation
    // ----------------------------------------------------------------------

    /// Shared pointwise loop: returns `(G#(f,g,h,k), R#(g,h,k))` at `(x, v)`.
    fn point_eval(&self, fgh: [&PhaseField; 4], t: f64, x: &[f64], v: &[f64]) -> (f64, f64) {
        let [f, g, h, k] = fgh;
        let d = self.grid.dim;
        let fv = self.reconstruct(f, x, v);
        let mut gain = 0.0;
        let mut rate = 0.0;
        let mut y = [0.0; 3];
        for (v1, w1) in self.v_nodes.iter().zip(&self.v_quad) {
            let v1 = &v1[..d];
            let mut hk = 0.0;
            let mut h_plus_k = 0.0;
            let mut jac = 0.0;
            for (omega, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
                let p = ManifoldPoint::new(v, v1, &omega[..d]);
                jac = p.jacobian(d);
                if jac == 0.0 {
                    break;
                }
                for a in 0..d {
                    y[a] = x[a] + t * (v[a] - p.v2[a]);
                }
                let h2 = self.reconstruct(h, &y[..d], &p.v2[..d]);
                for a in 0..d {
                    y[a] = x[a] + t * (v[a] - p.v3[a]);
                }
                let k3 = self.reconstruct(k, &y[..d], &p.v3[..d]);
                hk += w * h2 * k3;
                h_plus_k += w * (h2 + k3);
            }
            if jac == 0.0 {
                continue;
            }
            for a in 0..d {
                y[a] = x[a] + t * (v[a] - v1[a]);
            }
            let g1 = self.reconstruct(g, &y[..d], v1);
            gain += w1 * jac * hk * (fv + g1);
            rate += w1 * jac * g1 * h_plus_k;
        }
        (gain, rate)
    }

    /// `G#(f,g,h,k)(t_kt, x, v)`.
    #[allow(clippy::too_many_arguments)]
    pub fn gain_eval(
        &self,
        f: &TimeSlab,
        g: &TimeSlab,
        h: &TimeSlab,
        k: &TimeSlab,
        kt: usize,
        x: &[f64],
        v: &[f64],
    ) -> Result<f64> {
        self.check_slabs(&[f, g, h, k], kt)?;
        let t = f.time(kt);
        let fields = [f.slice(kt), g.slice(kt), h.slice(kt), k.slice(kt)];
        Ok(self.point_eval(fields, t, x, v).0)
    }

    /// `R#(g,h,k)(t_kt, x, v)`.
    pub fn rate_eval(&self, g: &TimeSlab, h: &TimeSlab, k: &TimeSlab, kt: usize, x: &[f64], v: &[f64]) -> Result<f64> {
        self.check_slabs(&[g, h, k], kt)?;
        let t = g.time(kt);
        let fields = [g.slice(kt), g.slice(kt), h.slice(kt), k.slice(kt)];
        Ok(self.point_eval(fields, t, x, v).1)
    }

    /// `L#(f,g,h,k)(t_kt, x, v) = f#(t_kt, x, v) R#(g,h,k)(t_kt, x, v)`.
    #[allow(clippy::too_many_arguments)]
    pub fn loss_eval(
        &self,
        f: &TimeSlab,
        g: &TimeSlab,
        h: &TimeSlab,
        k: &TimeSlab,
        kt: usize,
        x: &[f64],
        v: &[f64],
    ) -> Result<f64> {
        self.check_slabs(&[f, g, h, k], kt)?;
        let fv = self.reconstruct(f.slice(kt), x, v);
        Ok(fv * self.rate_eval(g, h, k, kt, x, v)?)
    }

    // ----------------------------------------------------------------------
    // Field-wide assembly
    // ----------------------------------------------------------------------

    /// Nodal values times the reconstruction weight, velocity-major.
    fn to_weighted(&self, field: &PhaseField) -> Vec<f64> {
        let nxc = self.grid.x_count();
        let nvc = self.grid.v_count();
        let vals = field.values();
        let mut out = vec![0.0; nxc * nvc];
        for ix in 0..nxc {
            let wx = self.x_weight[ix];
            let row = &vals[ix * nvc..(ix + 1) * nvc];
            for (iv, &f) in row.iter().enumerate() {
                out[iv * nxc + ix] = f * wx * self.v_weight[iv];
            }
        }
        out
    }

    /// Whole-field `(G#(f,g,h,k), R#(g,h,k))` at time `t` from one slice of
    /// each input. Rows (output velocities) are evaluated in parallel with a
    /// fixed summation order, so results do not depend on scheduling.
    pub fn gain_rate_slice(
        &self,
        t: f64,
        f: &PhaseField,
        g: &PhaseField,
        h: &PhaseField,
        k: &PhaseField,
    ) -> (PhaseField, PhaseField) {
        // identical inputs (the usual G(f,f,f,f)) are converted once
        let inputs = [f, g, h, k];
        let mut store: Vec<Vec<f64>> = Vec::with_capacity(4);
        let mut slot = [0usize; 4];
        for i in 0..4 {
            match (0..i).find(|&p| std::ptr::eq(inputs[p], inputs[i])) {
                Some(p) => slot[i] = slot[p],
                None => {
                    store.push(self.to_weighted(inputs[i]));
                    slot[i] = store.len() - 1;
                }
            }
        }
        let [_, ig, ih, ik] = slot;
        let same_hk = ih == ik;

        let nvc = self.grid.v_count();
        let nxc = self.grid.x_count();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..nvc)
            .into_par_iter()
            .map(|j| self.row(t, j, &store[0], &store[ig], &store[ih], &store[ik], same_hk))
            .collect();
        let mut gain = vec![0.0; nxc * nvc];
        let mut rate = vec![0.0; nxc * nvc];
        for (j, (gr, rr)) in rows.iter().enumerate() {
            for ix in 0..nxc {
                gain[ix * nvc + j] = gr[ix];
                rate[ix * nvc + j] = rr[ix];
            }
        }
        (
            PhaseField::from_values(self.grid, gain).expect("finite gain"),
            PhaseField::from_values(self.grid, rate).expect("finite rate"),
        )
    }

    /// `(G#, R#)` for every slice of the four slabs.
    pub fn gain_rate(&self, f: &TimeSlab, g: &TimeSlab, h: &TimeSlab, k: &TimeSlab) -> Result<(TimeSlab, TimeSlab)> {
        self.check_slabs(&[f, g, h, k], 0)?;
        let mut gains = Vec::with_capacity(f.nt() + 1);
        let mut rates = Vec::with_capacity(f.nt() + 1);
        for kt in 0..=f.nt() {
            let (gn, rt) = self.gain_rate_slice(f.time(kt), f.slice(kt), g.slice(kt), h.slice(kt), k.slice(kt));
            gains.push(gn);
            rates.push(rt);
        }
        Ok((TimeSlab::new(f.dt(), gains)?, TimeSlab::new(f.dt(), rates)?))
    }

    /// Right-hand side `G# - L#` of the sharp-frame equation at slice `kt`.
    pub fn collision_rhs(
        &self,
        f: &TimeSlab,
        g: &TimeSlab,
        h: &TimeSlab,
        k: &TimeSlab,
        kt: usize,
    ) -> Result<PhaseField> {
        self.check_slabs(&[f, g, h, k], kt)?;
        let fk = f.slice(kt);
        let (gain, rate) = self.gain_rate_slice(f.time(kt), fk, g.slice(kt), h.slice(kt), k.slice(kt));
        Ok(rhs_from(fk, &gain, &rate))
    }

    /// `G#(f,f,f,f) - L#(f,f,f,f)` for every slice of `f`.
    pub fn rhs_slab(&self, f: &TimeSlab) -> Result<TimeSlab> {
        let (gain, rate) = self.gain_rate(f, f, f, f)?;
        let fields = (0..=f.nt())
            .map(|k| rhs_from(f.slice(k), gain.slice(k), rate.slice(k)))
            .collect();
        TimeSlab::new(f.dt(), fields)
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &self,
        t: f64,
        j: usize,
        wf: &[f64],
        wg: &[f64],
        wh: &[f64],
        wk: &[f64],
        same_hk: bool,
    ) -> (Vec<f64>, Vec<f64>) {
        let d = self.grid.dim;
        let nxc = self.grid.x_count();
        let nn = self.rule.len();
        let v = self.v_nodes[j];

        let f_row: Vec<f64> = wf[j * nxc..(j + 1) * nxc]
            .iter()
            .zip(&self.x_env)
            .map(|(r, e)| r * e * self.v_env[j])
            .collect();
        let mut gain = vec![0.0; nxc];
        let mut rate = vec![0.0; nxc];

        let mut scratch = Scratch::new(nxc);
        let mut h2 = vec![0.0; nn * nxc];
        let mut k3 = if same_hk { Vec::new() } else { vec![0.0; nn * nxc] };
        let mut h_ok = vec![false; nn];
        let mut k_ok = vec![false; nn];
        let mut g1 = vec![0.0; nxc];
        let mut s_hk = vec![0.0; nxc];
        let mut s_hpk = vec![0.0; nxc];

        let mut shift = [0.0; 3];
        let mut point = [0.0; 3];
        for (m, v1) in self.v_nodes.iter().enumerate() {
            let mp0 = ManifoldPoint::new(&v[..d], &v1[..d], &self.rule.nodes()[0][..d]);
            let jac = mp0.jacobian(d);
            if jac == 0.0 {
                continue;
            }
            let w1 = self.v_quad[m] * jac;

            for a in 0..d {
                shift[a] = t * (v[a] - v1[a]);
            }
            let g_ok = self.shifted_row(
                &wg[m * nxc..(m + 1) * nxc],
                &shift[..d],
                self.v_env[m],
                &mut g1,
                &mut scratch,
            );

            for (i, omega) in self.rule.nodes().iter().enumerate() {
                for a in 0..d {
                    point[a] = mp0.mid[a] + mp0.radius * omega[a];
                    shift[a] = t * (v[a] - point[a]);
                }
                h_ok[i] = self.offgrid_row(
                    wh,
                    &point[..d],
                    &shift[..d],
                    &mut h2[i * nxc..(i + 1) * nxc],
                    &mut scratch,
                );
            }
            if !same_hk {
                for (i, omega) in self.rule.nodes().iter().enumerate() {
                    for a in 0..d {
                        point[a] = mp0.mid[a] - mp0.radius * omega[a];
                        shift[a] = t * (v[a] - point[a]);
                    }
                    k_ok[i] = self.offgrid_row(
                        wk,
                        &point[..d],
                        &shift[..d],
                        &mut k3[i * nxc..(i + 1) * nxc],
                        &mut scratch,
                    );
                }
            }

            s_hk.iter_mut().for_each(|s| *s = 0.0);
            s_hpk.iter_mut().for_each(|s| *s = 0.0);
            let mut any_hk = false;
            let mut any_hpk = false;
            let weights = self.rule.weights();
            if same_hk {
                // k3 at node i is h2 at the antipode, and the weights are
                // antipodally symmetric: fold each pair once
                for (i, &w) in weights.iter().enumerate() {
                    if !h_ok[i] {
                        continue;
                    }
                    let hb = &h2[i * nxc..(i + 1) * nxc];
                    any_hpk = true;
                    for (s, a) in s_hpk.iter_mut().zip(hb) {
                        *s += 2.0 * w * a;
                    }
                    let a = self.rule.antipode(i);
                    if a > i && h_ok[a] {
                        any_hk = true;
                        let kb = &h2[a * nxc..(a + 1) * nxc];
                        for ((s, x), y) in s_hk.iter_mut().zip(hb).zip(kb) {
                            *s += 2.0 * w * x * y;
                        }
                    }
                }
            } else {
                for (i, &w) in weights.iter().enumerate() {
                    let hb = &h2[i * nxc..(i + 1) * nxc];
                    let kb = &k3[i * nxc..(i + 1) * nxc];
                    if h_ok[i] && k_ok[i] {
                        any_hk = true;
                        for ((s, a), b) in s_hk.iter_mut().zip(hb).zip(kb) {
                            *s += w * a * b;
                        }
                    }
                    if h_ok[i] {
                        any_hpk = true;
                        for (s, a) in s_hpk.iter_mut().zip(hb) {
                            *s += w * a;
                        }
                    }
                    if k_ok[i] {
                        any_hpk = true;
                        for (s, b) in s_hpk.iter_mut().zip(kb) {
                            *s += w * b;
                        }
                    }
                }
            }

            if any_hk {
                if g_ok {
                    for (((o, s), fv), gv) in gain.iter_mut().zip(&s_hk).zip(&f_row).zip(&g1) {
                        *o += w1 * s * (fv + gv);
                    }
                } else {
                    for ((o, s), fv) in gain.iter_mut().zip(&s_hk).zip(&f_row) {
                        *o += w1 * s * fv;
                    }
                }
            }
            if any_hpk && g_ok {
                for ((o, s), gv) in rate.iter_mut().zip(&s_hpk).zip(&g1) {
                    *o += w1 * gv * s;
                }
            }
        }
        (gain, rate)
    }

    /// Spatial stencils of a uniform shift, one per padded axis; `None` when
    /// every node leaves the box.
    fn stencils(&self, shift: &[f64]) -> Option<[AxisShift; 3]> {
        let hx = self.grid.hx();
        let mut st = [AxisShift::identity(); 3];
        for (a, s) in shift.iter().enumerate() {
            st[self.pad + a] = AxisShift::new(s / hx, self.grid.nx)?;
        }
        Some(st)
    }

    /// Values `f(x + shift, w)` for every spatial node `x`, where `w` is an
    /// arbitrary velocity. Returns `false` (and leaves `out` unspecified)
    /// when the whole row is vacuum.
    fn offgrid_row(&self, wslab: &[f64], w: &[f64], shift: &[f64], out: &mut [f64], scratch: &mut Scratch) -> bool {
        let d = self.grid.dim;
        let nxc = self.grid.x_count();
        let nv = self.grid.nv;
        let hv = self.grid.hv();
        let mut cells = [(0usize, 0.0f64); 3];
        for a in 0..d {
            match locate((w[a] + self.grid.v_extent) / hv, nv) {
                Some(c) => cells[a] = c,
                None => return false,
            }
        }
        let Some(st) = self.stencils(shift) else {
            return false;
        };
        // only the block of source nodes the shifted stencil reads is blended
        let mut src_lo = [0usize; 3];
        let mut src_hi = [0usize; 3];
        for p in 0..3 {
            src_lo[p] = (st[p].lo as isize + st[p].offset) as usize;
            src_hi[p] = (st[p].hi as isize + st[p].offset) as usize + usize::from(st[p].theta > 0.0);
        }
        let [_, n1, n2] = self.nx3;
        let mut vmix = std::mem::take(&mut scratch.vmix);
        let mut first = true;
        for corner in 0..(1usize << d) {
            let mut wt = 1.0;
            let mut iv = 0;
            for (a, &(lo, th)) in cells.iter().enumerate().take(d) {
                let b = (corner >> a) & 1;
                wt *= if b == 1 { th } else { 1.0 - th };
                iv = iv * nv + lo + b;
            }
            if wt == 0.0 {
                continue;
            }
            let row = &wslab[iv * nxc..(iv + 1) * nxc];
            for i0 in src_lo[0]..=src_hi[0] {
                for i1 in src_lo[1]..=src_hi[1] {
                    let base = (i0 * n1 + i1) * n2;
                    let dst = &mut vmix[base + src_lo[2]..=base + src_hi[2]];
                    let src = &row[base + src_lo[2]..=base + src_hi[2]];
                    if first {
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o = wt * s;
                        }
                    } else {
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o += wt * s;
                        }
                    }
                }
            }
            first = false;
        }
        if first {
            scratch.vmix = vmix;
            return false;
        }
        let venv = (-self.wb * norm2(w)).exp();
        self.apply_shift(&vmix, &st, shift, venv, out, scratch);
        scratch.vmix = vmix;
        true
    }

    /// Shifted read of a weighted row sitting exactly on a velocity node.
    fn shifted_row(&self, src: &[f64], shift: &[f64], venv: f64, out: &mut [f64], scratch: &mut Scratch) -> bool {
        match self.stencils(shift) {
            Some(st) => {
                self.apply_shift(src, &st, shift, venv, out, scratch);
                true
            }
            None => false,
        }
    }

    /// `out[x] = venv * env_x(x + shift) * I[src](x + shift)` for a row of
    /// weighted samples `src` at one velocity, zero where `x + shift` leaves
    /// the box. Only the source block selected by `st` is read.
    fn apply_shift(
        &self,
        src: &[f64],
        st: &[AxisShift; 3],
        shift: &[f64],
        venv: f64,
        out: &mut [f64],
        scratch: &mut Scratch,
    ) {
        let zero_shift = st.iter().all(|s| s.offset == 0 && s.theta == 0.0);
        if zero_shift {
            // nodal read: the spatial envelope is the tabulated one
            if self.wa == 0.0 {
                for (o, s) in out.iter_mut().zip(src) {
                    *o = venv * s;
                }
            } else {
                for ((o, s), e) in out.iter_mut().zip(src).zip(&self.x_env) {
                    *o = venv * s * e;
                }
            }
            return;
        }

        let [_, n1, n2] = self.nx3;
        out.iter_mut().for_each(|o| *o = 0.0);
        let (lo2, hi2) = (st[2].lo, st[2].hi);
        for corner in 0..8usize {
            let b = [(corner >> 2) & 1, (corner >> 1) & 1, corner & 1];
            let mut wt = 1.0;
            for p in 0..3 {
                wt *= if b[p] == 1 { st[p].theta } else { 1.0 - st[p].theta };
            }
            if wt == 0.0 {
                continue;
            }
            let src2 = (lo2 as isize + st[2].offset + b[2] as isize) as usize;
            let len2 = hi2 + 1 - lo2;
            for i0 in st[0].lo..=st[0].hi {
                let s0 = (i0 as isize + st[0].offset + b[0] as isize) as usize;
                for i1 in st[1].lo..=st[1].hi {
                    let s1 = (i1 as isize + st[1].offset + b[1] as isize) as usize;
                    let dst = (i0 * n1 + i1) * n2 + lo2;
                    let srs = (s0 * n1 + s1) * n2 + src2;
                    for (o, s) in out[dst..dst + len2].iter_mut().zip(&src[srs..srs + len2]) {
                        *o += wt * s;
                    }
                }
            }
        }

        if self.wa == 0.0 {
            if venv != 1.0 {
                out.iter_mut().for_each(|o| *o *= venv);
            }
            return;
        }
        // envelope e^{-alpha |x + shift|^2} factorizes over axes
        let env = &mut scratch.axis_env;
        for p in 0..3 {
            env[p].clear();
            if p < self.pad {
                env[p].push(1.0);
                continue;
            }
            let s = shift[p - self.pad];
            // e^{-a(x_i+s)^2} by the exact two-term recurrence on a uniform axis
            let h = self.grid.hx();
            let y0 = self.x_axis[0] + s;
            if self.wa * y0 * y0 < 600.0 && self.wa * h * (2.0 * y0.abs() + h) < 300.0 {
                let mut val = (-self.wa * y0 * y0).exp();
                let mut ratio = (-self.wa * h * (2.0 * y0 + h)).exp();
                let step = (-2.0 * self.wa * h * h).exp();
                for _ in 0..self.x_axis.len() {
                    env[p].push(val);
                    val *= ratio;
                    ratio *= step;
                }
            } else {
                env[p].extend(self.x_axis.iter().map(|x| (-self.wa * (x + s) * (x + s)).exp()));
            }
        }
        let e2 = &env[2][lo2..=hi2];
        for i0 in st[0].lo..=st[0].hi {
            for i1 in st[1].lo..=st[1].hi {
                let c = venv * env[0][i0] * env[1][i1];
                let base = (i0 * n1 + i1) * n2;
                for (o, e) in out[base + lo2..=base + hi2].iter_mut().zip(e2) {
                    *o *= c * e;
                }
            }
        }
    }
}

fn rhs_from(f: &PhaseField, gain: &PhaseField, rate: &PhaseField) -> PhaseField {
    let vals = f
        .values()
        .iter()
        .zip(gain.values())
        .zip(rate.values())
        .map(|((fv, gv), rv)| gv - fv * rv)
        .collect();
    PhaseField::from_values(*f.grid(), vals).expect("finite collision rhs")
}

struct Scratch {
    vmix: Vec<f64>,
    axis_env: [Vec<f64>; 3],
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            vmix: vec![0.0; n],
            axis_env: [Vec::new(), Vec::new(), Vec::new()],
        }
    }
}

/// Uniform shift by `sigma` grid cells along one axis: node `i` reads the
/// cell `i + offset` with fraction `theta`; valid for `lo <= i <= hi`.
#[derive(Clone, Copy, Debug)]
struct AxisShift {
    offset: isize,
    theta: f64,
    lo: usize,
    hi: usize,
}

impl AxisShift {
    fn identity() -> Self {
        AxisShift {
            offset: 0,
            theta: 0.0,
            lo: 0,
            hi: 0,
        }
    }

    fn new(mut sigma: f64, n: usize) -> Option<Self> {
        let r = sigma.round();
        if (sigma - r).abs() < SNAP {
            sigma = r;
        }
        let offset = sigma.floor() as isize;
        let theta = sigma - offset as f64;
        let n = n as isize;
        let lo = (-offset).max(0);
        let top = if theta > 0.0 { n - 2 - offset } else { n - 1 - offset };
        let hi = top.min(n - 1);
        if lo > hi {
            return None;
        }
        Some(AxisShift {
            offset,
            theta,
            lo: lo as usize,
            hi: hi as usize,
        })
    }
}
