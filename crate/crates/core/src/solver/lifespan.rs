//! Blow-up time of one run, resolved by repeating it at half the step.

use serde::Serialize;

use crate::certificate::compute_constants;
use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::grid::CharacteristicGrid;
use crate::lifespan::LifespanRecord;
use crate::params::Params;
use crate::solver::{Marcher, RunStatus};

/// Largest horizon a lifespan search will march to by default.
pub const DEFAULT_CAP: f64 = 2048.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LifespanOptions {
    /// largest horizon searched
    pub cap: f64,
    /// relative agreement required between the `h` and `h/2` blow-up times
    pub rel_tol: f64,
    /// also cap the search at four times the certified blow-up bound when
    /// the bound applies
    pub use_certificate: bool,
}

impl Default for LifespanOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            rel_tol: 0.05,
            use_certificate: true,
        }
    }
}

/// Result of a single marching run with a growing horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub t_blow: Option<f64>,
    /// first time the solution reached `threshold / 100`
    pub t_low: Option<f64>,
    pub sup_u: f64,
    pub sup_w: f64,
    pub t_end: f64,
}

/// Extra information behind a [`LifespanRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifespanDiagnostics {
    pub coarse: RunOutcome,
    pub fine: RunOutcome,
    pub cap: f64,
}

impl LifespanDiagnostics {
    /// Relative change of the fine blow-up time when the threshold is lowered
    /// a hundredfold.
    pub fn threshold_shift(&self) -> Option<f64> {
        match (self.fine.t_blow, self.fine.t_low) {
            (Some(t), Some(lo)) => Some((t - lo) / t),
            _ => None,
        }
    }
}

/// Marches with step `h`, doubling the horizon (starting at `8R`) until the
/// threshold is crossed, the values stop being finite, or `cap` is reached.
pub fn run_to_blowup(
    params: &Params,
    data: &InitialData,
    h: f64,
    threshold: f64,
    cap: f64,
) -> Result<RunOutcome> {
    if !(cap > 0.0) {
        return Err(Error::Precondition(format!(
            "cap must be positive, got {cap}"
        )));
    }
    let r = data.support_radius();
    let mut horizon = (8.0 * r).min(cap);
    let grid = CharacteristicGrid::new(h, horizon, r)?;
    let mut m = Marcher::new(params, data, &grid)?;
    let mut nt = grid.nt;
    let mut out = RunOutcome {
        status: RunStatus::Completed,
        t_blow: None,
        t_low: None,
        sup_u: 0.0,
        sup_w: 0.0,
        t_end: 0.0,
    };
    let low = threshold / 100.0;
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let (mut su, mut sw) = (sup(m.u()), sup(m.w()));
    loop {
        if !(su.is_finite() && sw.is_finite()) {
            out.status = RunStatus::Diverged;
            return Ok(out);
        }
        out.sup_u = out.sup_u.max(su);
        out.sup_w = out.sup_w.max(sw);
        out.t_end = m.t();
        if out.t_low.is_none() && (su >= low || sw >= low) {
            out.t_low = Some(m.t());
        }
        if su >= threshold || sw >= threshold {
            out.status = RunStatus::Blowup;
            out.t_blow = Some(m.t());
            return Ok(out);
        }
        if m.level() >= nt {
            if horizon >= cap {
                out.status = RunStatus::CapReached;
                return Ok(out);
            }
            horizon = (2.0 * horizon).min(cap);
            m.extend(horizon);
            nt = (horizon / h + 1e-9).ceil() as usize;
        }
        (su, sw) = m.step();
    }
}

fn search_cap(params: &Params, data: &InitialData, opts: &LifespanOptions) -> f64 {
    if opts.use_certificate && params.a > 0.0 && params.b > 0.0 {
        if let Ok(c) = compute_constants(params, data) {
            let bound = c.upper_bound();
            if bound.is_finite() {
                return opts.cap.min(4.0 * bound);
            }
        }
    }
    opts.cap
}

/// Blow-up time at step `h`, confirmed by a second run at `h/2`.
///
/// The record carries the refined time; it counts as resolved when both runs
/// blow up and their times agree within `opts.rel_tol`.
pub fn lifespan_estimate(
    params: &Params,
    data: &InitialData,
    h: f64,
    threshold: f64,
    opts: &LifespanOptions,
) -> Result<LifespanRecord> {
    lifespan_estimate_detailed(params, data, h, threshold, opts).map(|(r, _)| r)
}

pub fn lifespan_estimate_detailed(
    params: &Params,
    data: &InitialData,
    h: f64,
    threshold: f64,
    opts: &LifespanOptions,
) -> Result<(LifespanRecord, LifespanDiagnostics)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Grid(format!("h must be positive, got {h}")));
    }
    if !(threshold > 0.0) {
        return Err(Error::Precondition(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let cap = search_cap(params, data, opts);
    let coarse = run_to_blowup(params, data, h, threshold, cap)?;
    // the refined run only needs to go a little past the coarse blow-up time
    let fine_cap = match coarse.t_blow {
        Some(t) => cap.min(t * (1.0 + opts.rel_tol) + 4.0 * h),
        None => cap,
    };
    let fine = run_to_blowup(params, data, h / 2.0, threshold, fine_cap)?;
    let resolved = match (coarse.t_blow, fine.t_blow) {
        (Some(tc), Some(tf)) => (tc - tf).abs() <= opts.rel_tol * tf,
        _ => false,
    };
    let status = match fine.status {
        // the refined run stops early by construction; report the search outcome
        RunStatus::CapReached if coarse.status == RunStatus::Blowup => RunStatus::Blowup,
        s => s,
    };
    let record = LifespanRecord {
        eps: params.eps,
        h,
        threshold,
        t_blow: fine.t_blow.or(if status == RunStatus::Blowup {
            coarse.t_blow
        } else {
            None
        }),
        status,
        resolved,
        sup_u: fine.sup_u,
        sup_w: fine.sup_w,
    };
    Ok((record, LifespanDiagnostics { coarse, fine, cap }))
}
