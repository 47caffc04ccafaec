//! Closed-form blow-up certificates for data with `f >= 0`, `f' < 0` on
//! `(0, R)` and `g ≡ 0`, absolute-value nonlinearity.
//!
//! Two upper bounds on the lifespan are produced:
//!
//! * **ODE comparison.** Along the ray `x = t + R/2`, `w` dominates the
//!   solution of `z' = A|z|^p`, `z(R/4) = C5 eps`, which is
//!   `z(t) = {(C5 eps)^{-(p-1)} - (p-1) A (t - R/4)}^{-1/(p-1)}` and blows up at
//!   `C5^{-(p-1)} eps^{-(p-1)} / ((p-1) A) + R/4`.
//! * **Iteration.** In `D+ = {t - x >= R, x >= 0}` one has
//!   `u >= M_n (t+x-R)^{a_n} (t-x-R)^{b_n}` for all `n`, so `u` cannot stay
//!   finite wherever the exponent function `Z(x, t)` is positive. Taking
//!   `t = 2x >= 4R` gives a time of order `eps^{-p(q-1)/(q+1)}`.

use serde::{Deserialize, Serialize};

use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::params::{Form, Params};
use crate::quad::simpson;

/// Panels for the `C6` quadrature.
pub const C6_PANELS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    /// `-f'(R/2) / 4`
    pub c5: f64,
    /// `2^{-(p+2)} ∫_{-R}^0 |f'(-β)|^p dβ`
    pub c6: f64,
    /// `(q-1)^2 / 4`
    pub c7: f64,
    /// `exp(-log(B C7) / (q-1))`
    pub c8: f64,
    /// `Σ_{j>=0} (j+2) / q^{j+1}`
    pub sq: f64,
    /// blow-up time of the comparison ODE
    pub ode_t: f64,
    /// time by which `Z > 0` somewhere on `t = 2x`
    pub iter_t: f64,
}

impl CertificateBundle {
    /// The sharper of the two certified bounds.
    pub fn upper_bound(&self) -> f64 {
        self.ode_t.min(self.iter_t)
    }
}

/// `x (2 - x) / (1 - x)^2` with `x = 1/q`.
pub fn sq_closed_form(q: f64) -> f64 {
    let x = 1.0 / q;
    x * (2.0 - x) / ((1.0 - x) * (1.0 - x))
}

/// `Σ_{j<terms} (j+2) / q^{j+1}`.
pub fn sq_partial(q: f64, terms: usize) -> f64 {
    (0..terms)
        .map(|j| (j as f64 + 2.0) / q.powi(j as i32 + 1))
        .sum()
}

/// Checks the certificate data class on a dense sample of `[-R, R]`.
fn check_class(data: &InitialData) -> Result<()> {
    let r = data.support_radius();
    let n = 4096;
    for k in 0..=n {
        let x = -r + 2.0 * r * k as f64 / n as f64;
        let j = data.jet(x);
        if j.g != 0.0 {
            return Err(Error::DataClass(format!(
                "g(x) = {:e} != 0 at x = {x}",
                j.g
            )));
        }
        if j.f < 0.0 {
            return Err(Error::DataClass(format!("f(x) = {:e} < 0 at x = {x}", j.f)));
        }
        if x > 0.0 && x < r && j.df >= 0.0 {
            return Err(Error::DataClass(format!(
                "f'(x) = {:e} >= 0 at x = {x}",
                j.df
            )));
        }
    }
    if data.df(r / 2.0) >= 0.0 {
        return Err(Error::DataClass("f'(R/2) >= 0".into()));
    }
    Ok(())
}

pub fn compute_constants(params: &Params, data: &InitialData) -> Result<CertificateBundle> {
    if params.form != Form::Absolute {
        return Err(Error::DataClass(
            "certificates need the absolute-value nonlinearity".into(),
        ));
    }
    check_class(data)?;
    let (p, q, r) = (params.p, params.q, data.support_radius());
    let c5 = -0.25 * data.df(r / 2.0);
    let c6 = simpson(|beta| data.df(-beta).abs().powf(p), -r, 0.0, C6_PANELS) / 2f64.powf(p + 2.0);
    let c7 = (q - 1.0).powi(2) / 4.0;
    let c8 = (-(params.b * c7).ln() / (q - 1.0)).exp();
    let sq = sq_closed_form(q);
    let mut bundle = CertificateBundle {
        c5,
        c6,
        c7,
        c8,
        sq,
        ode_t: f64::INFINITY,
        iter_t: f64::INFINITY,
    };
    bundle.ode_t = ode_blowup_time(&bundle, params);
    bundle.iter_t = certified_blowup_time(&bundle, params);
    Ok(bundle)
}

/// The comparison function `z(t)` for `t >= R/4`.
pub fn z_lower_bound(bundle: &CertificateBundle, params: &Params, t: f64) -> Result<f64> {
    let start = params.r / 4.0;
    if t < start {
        return Err(Error::Domain(format!(
            "z is defined for t >= R/4 = {start}, got {t}"
        )));
    }
    let pm1 = params.p - 1.0;
    let bracket = (bundle.c5 * params.eps).powf(-pm1) - pm1 * params.a * (t - start);
    if bracket <= 0.0 {
        return Err(Error::PastBlowup {
            t,
            blowup: ode_blowup_time(bundle, params),
        });
    }
    Ok(bracket.powf(-1.0 / pm1))
}

/// `C5^{-(p-1)} eps^{-(p-1)} / ((p-1) A) + R/4`; infinite when `A = 0`.
pub fn ode_blowup_time(bundle: &CertificateBundle, params: &Params) -> f64 {
    let pm1 = params.p - 1.0;
    (bundle.c5 * params.eps).powf(-pm1) / (pm1 * params.a) + params.r / 4.0
}

/// `a_n = (q^n - 1)/(q - 1)`, `b_n = (q^{n-1} - 1)/(q - 1)`.
pub fn iteration_sequences(q: f64, n: u32) -> (f64, f64) {
    let a = (q.powi(n as i32) - 1.0) / (q - 1.0);
    let b = (q.powi(n as i32 - 1) - 1.0) / (q - 1.0);
    (a, b)
}

/// `a_{n+1} = q a_n + 1`, `b_{n+1} = q b_n + 1` from `(1, 0)`, in integers.
pub fn iteration_sequences_recurrence(q: u64, n: u32) -> (u64, u64) {
    let (mut a, mut b) = (1u64, 0u64);
    for _ in 1..n {
        a = q * a + 1;
        b = q * b + 1;
    }
    (a, b)
}

/// `log M_n` for `n = 1..=n_max` from
/// `log M_{n+1} = log(B C7) - 2(n+1) log q + q log M_n`.
pub fn log_m_sequence(q: f64, log_bc7: f64, log_m1: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max);
    let mut cur = log_m1;
    for n in 1..=n_max {
        out.push(cur);
        cur = log_bc7 - 2.0 * (n as f64 + 1.0) * q.ln() + q * cur;
    }
    out
}

/// The lower bound on `log M_{n+1}` used to define `Z`:
/// `-log(B C7)/(q-1) + q^n [log(B C7)/(q-1) - 2 S_q log q + log M_1]`.
pub fn log_m_lower_bound(q: f64, log_bc7: f64, log_m1: f64, n: usize) -> f64 {
    let sq = sq_closed_form(q);
    -log_bc7 / (q - 1.0) + q.powi(n as i32) * (log_bc7 / (q - 1.0) - 2.0 * sq * q.ln() + log_m1)
}

/// `Z(x, t)`, defined in the interior of `D+`. `Z > 0` certifies blow-up by `t`.
pub fn z_value(bundle: &CertificateBundle, params: &Params, x: f64, t: f64) -> Result<f64> {
    let r = params.r;
    let (ap, am) = (t + x - r, t - x - r);
    if x < 0.0 || ap <= 0.0 || am <= 0.0 {
        return Err(Error::Domain(format!(
            "({x}, {t}) is not in the interior of t - x >= R, x >= 0"
        )));
    }
    let q = params.q;
    Ok(
        (q * ap.ln() + am.ln()) / (q - 1.0) + (params.b * bundle.c7).ln() / (q - 1.0)
            - 2.0 * bundle.sq * q.ln()
            + (params.a * bundle.c6).ln()
            + params.p * params.eps.ln(),
    )
}

/// `max(4R, K^{1/(q+1)} eps^{-p(q-1)/(q+1)})` with
/// `K = 4 (4/5)^q q^{2(q-1) S_q} / (A^{q-1} B C6^{q-1} C7)`.
pub fn certified_blowup_time(bundle: &CertificateBundle, params: &Params) -> f64 {
    let (p, q) = (params.p, params.q);
    let log_k = 4f64.ln() + q * (0.8f64).ln() + 2.0 * (q - 1.0) * bundle.sq * q.ln()
        - (q - 1.0) * params.a.ln()
        - params.b.ln()
        - (q - 1.0) * bundle.c6.ln()
        - bundle.c7.ln();
    let t = (log_k / (q + 1.0) - p * (q - 1.0) / (q + 1.0) * params.eps.ln()).exp();
    if t.is_nan() {
        return f64::INFINITY;
    }
    t.max(4.0 * params.r)
}
