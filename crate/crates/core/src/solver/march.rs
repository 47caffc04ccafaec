//! Level-by-level marching on the characteristic grid.
//!
//! With `dx == dt == h` the exact diamond identity
//! `u(x,t+h) = u(x+h,t) + u(x-h,t) - u(x,t-h) + 1/2 ∬_diamond F`
//! is discretized with the midpoint value `h^2 F(x,t)`. The time derivative is
//! carried as `w = eps u0_t + (P + Q)/2`, where `P` and `Q` integrate `F` along
//! the two backward characteristics. They are advanced by the trapezoid rule
//! with one Euler predictor and one corrector pass, which costs exactly two
//! evaluations of `F` per node.

use serde::Serialize;

use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::free::{eval_free, eval_free_ut};
use crate::grid::{CharacteristicGrid, DiscreteField};
use crate::norms::{slice_norm, NormKind};
use crate::params::Params;
use crate::solver::{Nonlinearity, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    U,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupEvent {
    pub time: f64,
    pub x: f64,
    pub quantity: Quantity,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelStats {
    pub t: f64,
    pub sup_u: f64,
    pub sup_w: f64,
}

/// Full copy of one level (nodes `0..grid.nx()`).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

/// Values along the ray `x = t + offset`, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RayTrace {
    pub offset: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
pub struct MarchOptions {
    /// keep a snapshot every this many levels (0 keeps none besides the last)
    pub store_every: usize,
    pub ray_offsets: Vec<f64>,
    /// record `[|u|_1, |w|_2, |u|_3, |w|_4]` on every level
    pub norm_trace: bool,
}


impl MarchOptions {
    pub fn full_history() -> Self {
        Self {
            store_every: 1,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: CharacteristicGrid,
    pub status: RunStatus,
    pub event: Option<BlowupEvent>,
    /// time of the last level computed
    pub time: f64,
    /// time of the last level whose values were all finite
    pub last_finite_time: f64,
    pub trace: Vec<LevelStats>,
    pub snapshots: Vec<Snapshot>,
    pub rays: Vec<RayTrace>,
    /// per level `[|u|_1, |w|_2, |u|_3, |w|_4]`, when requested
    pub norms: Vec<[f64; 4]>,
}

impl Trajectory {
    /// Blow-up time, if the run crossed the threshold.
    pub fn blowup_time(&self) -> Option<f64> {
        self.event.map(|e| e.time)
    }

    pub fn sup_u(&self) -> f64 {
        self.trace.iter().fold(0.0, |m, s| m.max(s.sup_u))
    }

    pub fn sup_w(&self) -> f64 {
        self.trace.iter().fold(0.0, |m, s| m.max(s.sup_w))
    }

    /// `u` and `w` as grid fields, when every level up to the horizon was stored.
    pub fn fields(&self) -> Option<(DiscreteField, DiscreteField)> {
        let g = self.grid;
        if self.snapshots.len() != g.nt + 1
            || self.snapshots.iter().enumerate().any(|(k, s)| s.n != k)
        {
            return None;
        }
        let mut u = DiscreteField::zeros(g);
        let mut w = DiscreteField::zeros(g);
        for s in &self.snapshots {
            u.level_mut(s.n).copy_from_slice(&s.u);
            w.level_mut(s.n).copy_from_slice(&s.w);
        }
        Some((u, w))
    }
}

/// Marching state. Arrays carry one padding node on each side so the
/// stencil never needs bounds checks.
#[derive(Debug, Clone)]
pub struct Marcher {
    data: InitialData,
    nl: Nonlinearity,
    eps: f64,
    h: f64,
    r: f64,
    nx_half: usize,
    n: usize,
    u_prev: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
    f: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    scratch: [Vec<f64>; 5],
}

impl Marcher {
    pub fn new(params: &Params, data: &InitialData, grid: &CharacteristicGrid) -> Result<Self> {
        let r = data.support_radius();
        if grid.half_width() + 1e-12 < grid.t_max() + r {
            return Err(Error::Grid(format!(
                "half-width {} < T_max + R = {}",
                grid.half_width(),
                grid.t_max() + r
            )));
        }
        let len = grid.nx() + 2;
        let mut m = Self {
            data: data.clone(),
            nl: Nonlinearity::new(params),
            eps: params.eps,
            h: grid.h,
            r,
            nx_half: grid.nx_half,
            n: 0,
            u_prev: vec![0.0; len],
            u: vec![0.0; len],
            w: vec![0.0; len],
            f: vec![0.0; len],
            p: vec![0.0; len],
            q: vec![0.0; len],
            scratch: std::array::from_fn(|_| vec![0.0; len]),
        };
        let (lo, hi) = m.active(0);
        for k in lo..=hi {
            let x = m.x_of(k);
            let j = m.data.jet(x);
            m.u[k] = m.eps * j.f;
            m.w[k] = m.eps * j.g;
            m.f[k] = m.nl.eval(m.u[k], m.w[k]);
        }
        Ok(m)
    }

    /// Padded index -> coordinate.
    #[inline]
    fn x_of(&self, k: usize) -> f64 {
        (k as f64 - 1.0 - self.nx_half as f64) * self.h
    }

    /// Padded index range covering the support cone at level `n`.
    fn active(&self, n: usize) -> (usize, usize) {
        let reach = ((n as f64 * self.h + self.r) / self.h + 1e-9).ceil() as usize + 1;
        let reach = reach.min(self.nx_half);
        let centre = self.nx_half + 1;
        (centre - reach, centre + reach)
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn half_width(&self) -> f64 {
        self.nx_half as f64 * self.h
    }

    pub fn u(&self) -> &[f64] {
        &self.u[1..self.u.len() - 1]
    }

    pub fn w(&self) -> &[f64] {
        &self.w[1..self.w.len() - 1]
    }

    /// Node coordinate for an index into [`Marcher::u`] / [`Marcher::w`].
    pub fn x(&self, i: usize) -> f64 {
        self.x_of(i + 1)
    }

    /// Widens the domain so the horizon can reach `t_max`.
    pub fn extend(&mut self, t_max: f64) {
        let need = ((t_max + self.r) / self.h - 1e-9).ceil() as usize + 2;
        if need <= self.nx_half {
            return;
        }
        let shift = need - self.nx_half;
        let len = 2 * need + 3;
        let grow = |v: &mut Vec<f64>| {
            let mut out = vec![0.0; len];
            out[shift..shift + v.len()].copy_from_slice(v);
            *v = out;
        };
        for v in [
            &mut self.u_prev,
            &mut self.u,
            &mut self.w,
            &mut self.f,
            &mut self.p,
            &mut self.q,
        ] {
            grow(v);
        }
        for s in self.scratch.iter_mut() {
            *s = vec![0.0; len];
        }
        self.nx_half = need;
    }

    /// Advances one level and returns `(sup|u|, sup|w|)` over the new level.
    pub fn step(&mut self) -> (f64, f64) {
        let h = self.h;
        let eps = self.eps;
        let t_new = (self.n + 1) as f64 * h;
        let (lo, hi) = self.active(self.n + 1);
        let x0 = -((self.nx_half + 1) as f64) * h;
        let first = self.n == 0;
        let nl = self.nl;
        let data = &self.data;
        let r = self.r;
        // window of the stencil: old arrays cover lo-1..=hi+1, new ones lo..=hi
        let width = hi - lo + 1;
        let u_old = &self.u[lo - 1..=hi + 1];
        let u_prev = &self.u_prev[lo..=hi];
        let f_old = &self.f[lo - 1..=hi + 1];
        let p_old = &self.p[lo..=hi + 1];
        let q_old = &self.q[lo - 1..=hi];
        let [u_new, w_new, f_new, p_new, q_new] = &mut self.scratch;
        let (u_new, w_new, f_new) = (
            &mut u_new[lo..=hi],
            &mut w_new[lo..=hi],
            &mut f_new[lo..=hi],
        );
        let (p_new, q_new) = (&mut p_new[lo..=hi], &mut q_new[lo..=hi]);
        let mut sup_u = 0.0f64;
        let mut sup_w = 0.0f64;
        let mut finite = true;
        for j in 0..width {
            let x = x0 + (lo + j) as f64 * h;
            let un = if first {
                // second-order Taylor start
                let jet = data.jet(x);
                eps * jet.f + h * eps * jet.g + 0.5 * h * h * (eps * jet.d2f + f_old[j + 1])
            } else {
                u_old[j + 2] + u_old[j] - u_prev[j] + h * h * f_old[j + 1]
            };
            let free_w = if (x + t_new).abs() < r || (x - t_new).abs() < r {
                eps * eval_free_ut(data, x, t_new)
            } else {
                0.0
            };
            let (pr, ql) = (p_old[j + 1], q_old[j]);
            let (fr, fl) = (f_old[j + 2], f_old[j]);
            let w_pred = free_w + 0.5 * (pr + h * fr + ql + h * fl);
            let f_pred = nl.eval(un, w_pred);
            let pn = pr + 0.5 * h * (fr + f_pred);
            let qn = ql + 0.5 * h * (fl + f_pred);
            let wn = free_w + 0.5 * (pn + qn);
            u_new[j] = un;
            w_new[j] = wn;
            p_new[j] = pn;
            q_new[j] = qn;
            f_new[j] = nl.eval(un, wn);
            finite &= un.is_finite() & wn.is_finite();
            sup_u = sup_u.max(un.abs());
            sup_w = sup_w.max(wn.abs());
        }
        std::mem::swap(&mut self.u_prev, &mut self.u);
        std::mem::swap(&mut self.u, &mut self.scratch[0]);
        std::mem::swap(&mut self.w, &mut self.scratch[1]);
        std::mem::swap(&mut self.f, &mut self.scratch[2]);
        std::mem::swap(&mut self.p, &mut self.scratch[3]);
        std::mem::swap(&mut self.q, &mut self.scratch[4]);
        self.n += 1;
        if finite {
            (sup_u, sup_w)
        } else {
            (f64::NAN, f64::NAN)
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            n: self.n,
            t: self.t(),
            u: self.u().to_vec(),
            w: self.w().to_vec(),
        }
    }

    /// First node where `|u|` or `|w|` reaches `threshold` on the current level.
    fn crossing(&self, threshold: f64) -> Option<BlowupEvent> {
        let mut best: Option<BlowupEvent> = None;
        for (quantity, vals) in [(Quantity::U, &self.u), (Quantity::W, &self.w)] {
            for (k, &v) in vals.iter().enumerate() {
                if v.abs() >= threshold && best.is_none_or(|b| v.abs() > b.value) {
                    best = Some(BlowupEvent {
                        time: self.t(),
                        x: self.x_of(k),
                        quantity,
                        value: v.abs(),
                    });
                }
            }
        }
        best
    }

    fn ray_sample(&self, offset: f64) -> Option<(f64, f64)> {
        let s = (self.t() + offset) / self.h + self.nx_half as f64;
        if s < 0.0 || s > (2 * self.nx_half) as f64 {
            return None;
        }
        let i = s.floor() as usize;
        let frac = s - i as f64;
        let j = (i + 1).min(2 * self.nx_half);
        let (u, w) = (self.u(), self.w());
        Some((
            u[i] * (1.0 - frac) + u[j] * frac,
            w[i] * (1.0 - frac) + w[j] * frac,
        ))
    }
}

/// [`march_with`] with default options (no stored history).
pub fn march(
    params: &Params,
    data: &InitialData,
    grid: &CharacteristicGrid,
    threshold: f64,
) -> Result<Trajectory> {
    march_with(params, data, grid, threshold, &MarchOptions::default())
}

/// Marches to `grid.t_max()` or until `sup|u|` or `sup|w|` reaches `threshold`.
///
/// Non-finite values before the threshold end the run with status
/// [`RunStatus::Diverged`].
pub fn march_with(
    params: &Params,
    data: &InitialData,
    grid: &CharacteristicGrid,
    threshold: f64,
    opts: &MarchOptions,
) -> Result<Trajectory> {
    let mut m = Marcher::new(params, data, grid)?;
    let mut traj = Trajectory {
        grid: *grid,
        status: RunStatus::Completed,
        event: None,
        time: 0.0,
        last_finite_time: 0.0,
        trace: Vec::new(),
        snapshots: Vec::new(),
        rays: opts
            .ray_offsets
            .iter()
            .map(|&offset| RayTrace {
                offset,
                ..RayTrace::default()
            })
            .collect(),
        norms: Vec::new(),
    };
    let r = data.support_radius();
    let record = |m: &Marcher, traj: &mut Trajectory, sup_u: f64, sup_w: f64| {
        traj.trace.push(LevelStats {
            t: m.t(),
            sup_u,
            sup_w,
        });
        if opts.store_every > 0 && m.level().is_multiple_of(opts.store_every) {
            traj.snapshots.push(m.snapshot());
        }
        if opts.norm_trace {
            let t = m.t();
            let x = |i: usize| m.x(i);
            traj.norms.push([
                slice_norm(NormKind::N1, m.u(), x, t, r),
                slice_norm(NormKind::N2, m.w(), x, t, r),
                slice_norm(NormKind::N3, m.u(), x, t, r),
                slice_norm(NormKind::N4, m.w(), x, t, r),
            ]);
        }
        for ray in traj.rays.iter_mut() {
            if let Some((u, w)) = m.ray_sample(ray.offset) {
                ray.t.push(m.t());
                ray.u.push(u);
                ray.w.push(w);
            }
        }
    };
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let (su, sw) = (sup(m.u()), sup(m.w()));
    record(&m, &mut traj, su, sw);
    if su >= threshold || sw >= threshold {
        traj.status = RunStatus::Blowup;
        traj.event = m.crossing(threshold);
        return Ok(traj);
    }
    while m.level() < grid.nt {
        let (su, sw) = m.step();
        traj.time = m.t();
        if !(su.is_finite() && sw.is_finite()) {
            traj.status = RunStatus::Diverged;
            return Ok(traj);
        }
        traj.last_finite_time = m.t();
        record(&m, &mut traj, su, sw);
        if su >= threshold || sw >= threshold {
            traj.status = RunStatus::Blowup;
            traj.event = m.crossing(threshold);
            if traj.snapshots.last().map(|s| s.n) != Some(m.level()) {
                traj.snapshots.push(m.snapshot());
            }
            return Ok(traj);
        }
    }
    Ok(traj)
}

/// First stored `(time, x)` where `|u|` or `|w|` reaches `threshold`.
///
/// Scans the trajectory's snapshots in time order; the level on which a run
/// crossed its own threshold is always stored.
pub fn detect_blowup(traj: &Trajectory, threshold: f64) -> Option<BlowupEvent> {
    let g = traj.grid;
    for s in &traj.snapshots {
        let mut best: Option<BlowupEvent> = None;
        for (quantity, vals) in [(Quantity::U, &s.u), (Quantity::W, &s.w)] {
            for (i, &v) in vals.iter().enumerate() {
                if v.abs() >= threshold && best.is_none_or(|b| v.abs() > b.value) {
                    best = Some(BlowupEvent {
                        time: s.t,
                        x: g.x(i),
                        quantity,
                        value: v.abs(),
                    });
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Free-solution reference `eps (u0, u0_t)` on a grid, for tests and diagnostics.
pub fn free_fields(
    data: &InitialData,
    eps: f64,
    grid: CharacteristicGrid,
) -> (DiscreteField, DiscreteField) {
    let u = DiscreteField::from_fn(grid, |x, t| eps * eval_free(data, x, t).u0);
    let w = DiscreteField::from_fn(grid, |x, t| eps * eval_free(data, x, t).ut0);
    (u, w)
}
