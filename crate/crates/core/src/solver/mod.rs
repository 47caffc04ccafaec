//! Time marching of the coupled integral system
//! `u = eps u0 + L(F)`, `w = eps u0_t + L'(F)` with `F = A|w|^p + B|u|^q`,
//! a literal Picard iteration used as a cross-check, and blow-up detection.

mod lifespan;
mod march;
mod picard;

use serde::{Deserialize, Serialize};

use crate::params::{is_integer, Form, Params};

pub use lifespan::{
    lifespan_estimate, lifespan_estimate_detailed, run_to_blowup, LifespanDiagnostics,
    LifespanOptions, RunOutcome, DEFAULT_CAP,
};
pub use march::{
    detect_blowup, free_fields, march, march_with, BlowupEvent, LevelStats, MarchOptions, Marcher,
    Quantity, RayTrace, Snapshot, Trajectory,
};
pub use picard::{picard_solve, PicardMode, PicardState};

/// Default blow-up threshold on `sup |u|` and `sup |w|`.
pub const DEFAULT_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// reached the horizon without crossing the threshold
    Completed,
    /// crossed the threshold
    Blowup,
    /// produced NaN/Inf before the threshold
    Diverged,
    /// no blow-up before the lifespan search cap
    CapReached,
}

impl RunStatus {
    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Blowup => "blowup",
            RunStatus::Diverged => "diverged",
            RunStatus::CapReached => "cap_reached",
        }
    }
}

impl std::str::FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "completed" => Ok(RunStatus::Completed),
            "blowup" => Ok(RunStatus::Blowup),
            "diverged" => Ok(RunStatus::Diverged),
            "cap_reached" => Ok(RunStatus::CapReached),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Power {
    Int(i32),
    Real(f64),
}

impl Power {
    fn new(e: f64) -> Self {
        if is_integer(e) && e.abs() < 64.0 {
            Power::Int(e as i32)
        } else {
            Power::Real(e)
        }
    }

    #[inline]
    fn abs_pow(self, v: f64) -> f64 {
        match self {
            Power::Int(k) => int_pow(v.abs(), k),
            Power::Real(e) => v.abs().powf(e),
        }
    }

    #[inline]
    fn signed_pow(self, v: f64) -> f64 {
        match self {
            Power::Int(k) => int_pow(v, k),
            // validated params never reach this arm
            Power::Real(e) => v.signum() * v.abs().powf(e),
        }
    }
}

/// `v^k` with the small exponents unrolled; `powi` compiles to a libcall.
#[inline(always)]
fn int_pow(v: f64, k: i32) -> f64 {
    match k {
        2 => v * v,
        3 => v * v * v,
        4 => {
            let s = v * v;
            s * s
        }
        5 => {
            let s = v * v;
            s * s * v
        }
        _ => v.powi(k),
    }
}

/// The source term `F(u, w)` with exponents resolved once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    a: f64,
    b: f64,
    p: Power,
    q: Power,
    form: Form,
}

impl Nonlinearity {
    pub fn new(params: &Params) -> Self {
        Self {
            a: params.a,
            b: params.b,
            p: Power::new(params.p),
            q: Power::new(params.q),
            form: params.form,
        }
    }

    /// `(dF/du, dF/dw)`.
    #[inline]
    pub fn partials(&self, u: f64, w: f64) -> (f64, f64) {
        let d = |pow: Power, v: f64| -> f64 {
            match (pow, self.form) {
                (Power::Int(k), Form::Signed) => k as f64 * v.powi(k - 1),
                (Power::Int(k), Form::Absolute) => k as f64 * v.abs().powi(k - 1) * v.signum(),
                (Power::Real(e), _) => e * v.abs().powf(e - 1.0) * v.signum(),
            }
        };
        let du = if u == 0.0 { 0.0 } else { self.b * d(self.q, u) };
        let dw = if w == 0.0 { 0.0 } else { self.a * d(self.p, w) };
        (du, dw)
    }

    #[inline]
    pub fn eval(&self, u: f64, w: f64) -> f64 {
        match self.form {
            Form::Absolute => self.a * self.p.abs_pow(w) + self.b * self.q.abs_pow(u),
            Form::Signed => self.a * self.p.signed_pow(w) + self.b * self.q.signed_pow(u),
        }
    }
}

/// `A|w|^p + B|u|^q` (absolute form) or `A w^p + B u^q` (signed form).
pub fn nonlinearity(params: &Params, u: f64, w: f64) -> f64 {
    Nonlinearity::new(params).eval(u, w)
}
