//! Successive approximations over the whole space-time grid.
//!
//! Direct mode iterates
//! `u_{j+1} = eps u0 + L(F(u_j, w_j))`, `w_{j+1} = eps u0_t + L'(F(u_j, w_j))`
//! from `(u_1, w_1) = eps (u0, u0_t)` and measures successive differences in
//! `|u|_1 + |u_x|_1 + |w|_2 + |w_x|_2`.
//!
//! Zero-mean mode iterates the corrections `U = u - eps u0`, `W = w - eps u0_t`
//! from `U_1 = W_1 = 0` and measures differences in
//! `|U|_3 + |U_x|_3 + |W|_4 + |W_x|_4`.
//!
//! The `x`-derivatives follow their own integral equations:
//! `u_x = eps u0_x + L̄'(F)` and `w_x = eps u0_tx + L'(F_u u_x + F_w w_x)`.

use serde::{Deserialize, Serialize};

use crate::data::InitialData;
use crate::duhamel::{apply_l, apply_lbarprime, apply_lprime};
use crate::error::{Error, Result};
use crate::free::eval_free;
use crate::grid::{CharacteristicGrid, DiscreteField};
use crate::norms::{weighted_norm, NormKind};
use crate::params::Params;
use crate::solver::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardMode {
    Direct,
    ZeroMeanShifted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardState {
    pub mode: PicardMode,
    /// index of the final iterate (the first iterate is 1)
    pub j: usize,
    /// `u_j` in direct mode, `U_j` in zero-mean mode
    pub u: DiscreteField,
    pub w: DiscreteField,
    pub ux: DiscreteField,
    pub wx: DiscreteField,
    /// successive-difference norm of iterate `k+2` against `k+1`
    pub diffs: Vec<f64>,
    pub converged: bool,
    eps_free: FreeFields,
}

#[derive(Debug, Clone, PartialEq)]
struct FreeFields {
    u: DiscreteField,
    ut: DiscreteField,
    ux: DiscreteField,
    utx: DiscreteField,
}

impl PicardState {
    /// The solution `(u, w)` in either mode.
    pub fn solution(&self) -> (DiscreteField, DiscreteField) {
        match self.mode {
            PicardMode::Direct => (self.u.clone(), self.w.clone()),
            PicardMode::ZeroMeanShifted => (
                self.u.zip_map(&self.eps_free.u, |a, b| a + b),
                self.w.zip_map(&self.eps_free.ut, |a, b| a + b),
            ),
        }
    }

    /// Ratios of consecutive successive differences.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.diffs
            .windows(2)
            .map(|d| if d[0] > 0.0 { d[1] / d[0] } else { 0.0 })
            .collect()
    }
}

fn free_fields(data: &InitialData, eps: f64, grid: CharacteristicGrid) -> FreeFields {
    let sample = |pick: fn(&crate::free::FreeSolutionEval) -> f64| {
        DiscreteField::from_fn(grid, |x, t| eps * pick(&eval_free(data, x, t)))
    };
    FreeFields {
        u: sample(|e| e.u0),
        ut: sample(|e| e.ut0),
        ux: sample(|e| e.ux0),
        utx: sample(|e| e.utx0),
    }
}

fn add(a: &DiscreteField, b: &DiscreteField) -> DiscreteField {
    a.zip_map(b, |x, y| x + y)
}

pub fn picard_solve(
    params: &Params,
    data: &InitialData,
    grid: &CharacteristicGrid,
    mode: PicardMode,
    j_max: usize,
    tol: f64,
) -> Result<PicardState> {
    let g = *grid;
    if g.half_width() + 1e-12 < g.t_max() + data.support_radius() {
        return Err(Error::Grid(format!(
            "half-width {} < T + R = {}",
            g.half_width(),
            g.t_max() + data.support_radius()
        )));
    }
    let nl = Nonlinearity::new(params);
    let free = free_fields(data, params.eps, g);
    let (norm_u, norm_w) = match mode {
        PicardMode::Direct => (NormKind::N1, NormKind::N2),
        PicardMode::ZeroMeanShifted => (NormKind::N3, NormKind::N4),
    };
    let (mut u, mut w, mut ux, mut wx) = match mode {
        PicardMode::Direct => (
            free.u.clone(),
            free.ut.clone(),
            free.ux.clone(),
            free.utx.clone(),
        ),
        PicardMode::ZeroMeanShifted => {
            let z = DiscreteField::zeros(g);
            (z.clone(), z.clone(), z.clone(), z)
        }
    };
    let mut diffs = Vec::new();
    let mut j = 1;
    let mut converged = false;
    while j < j_max.max(1) {
        // full solution and its x-derivatives for the source terms
        let (su, sw, sux, swx) = match mode {
            PicardMode::Direct => (u.clone(), w.clone(), ux.clone(), wx.clone()),
            PicardMode::ZeroMeanShifted => (
                add(&u, &free.u),
                add(&w, &free.ut),
                add(&ux, &free.ux),
                add(&wx, &free.utx),
            ),
        };
        let mut source = DiscreteField::zeros(g);
        let mut dsource = DiscreteField::zeros(g);
        for n in 0..=g.nt {
            for i in 0..g.nx() {
                let (uv, wv) = (su.get(i, n), sw.get(i, n));
                source.set(i, n, nl.eval(uv, wv));
                let (fu, fw) = nl.partials(uv, wv);
                dsource.set(i, n, fu * sux.get(i, n) + fw * swx.get(i, n));
            }
        }
        let mut nu = apply_l(&source);
        let mut nw = apply_lprime(&source);
        let mut nux = apply_lbarprime(&source);
        let mut nwx = apply_lprime(&dsource);
        if mode == PicardMode::Direct {
            nu = add(&nu, &free.u);
            nw = add(&nw, &free.ut);
            nux = add(&nux, &free.ux);
            nwx = add(&nwx, &free.utx);
        }
        j += 1;
        if !(nu.sup_abs().is_finite() && nw.sup_abs().is_finite() && nwx.sup_abs().is_finite()) {
            return Err(Error::NonFinite { time: g.t_max() });
        }
        let diff = weighted_norm(norm_u, &nu.zip_map(&u, |a, b| a - b))
            + weighted_norm(norm_u, &nux.zip_map(&ux, |a, b| a - b))
            + weighted_norm(norm_w, &nw.zip_map(&w, |a, b| a - b))
            + weighted_norm(norm_w, &nwx.zip_map(&wx, |a, b| a - b));
        if !diff.is_finite() {
            return Err(Error::NonFinite { time: g.t_max() });
        }
        diffs.push(diff);
        (u, w, ux, wx) = (nu, nw, nux, nwx);
        if diff < tol {
            converged = true;
            break;
        }
    }
    Ok(PicardState {
        mode,
        j,
        u,
        w,
        ux,
        wx,
        diffs,
        converged,
        eps_free: free,
    })
}
