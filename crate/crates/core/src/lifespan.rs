//! Lifespan exponents: the theoretical predictions, the comparison with the
//! general quasilinear theory, ε-sweeps of the solver, and power-law fits.
//!
//! Lifespans behave like `T(eps) ~ C eps^{-gamma}`. For `A, B > 0`:
//!
//! * nonzero mean `∫g != 0`: `gamma = min{p - 1, (q - 1)/2}`;
//! * zero mean: `gamma = p(q - 1)/(q + 1)` when `(q + 1)/2 <= p <= q`,
//!   otherwise `gamma = min{p - 1, q(q - 1)/(q + 1)}`.
//!
//! The middle zero-mean branch is the combined effect: it is strictly smaller
//! than the naive minimum of the two single-term exponents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::params::{is_integer, Params};
use crate::solver::{lifespan_estimate, LifespanOptions, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanClass {
    NonzeroMean,
    ZeroMean,
}

impl std::str::FromStr for MeanClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "zero_mean" | "zeromean" => Ok(MeanClass::ZeroMean),
            "nonzero" | "nonzero_mean" | "nonzeromean" => Ok(MeanClass::NonzeroMean),
            other => Err(Error::Range(format!("unknown mean class `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `p < (q+1)/2`
    PBelowHalf,
    /// `(q+1)/2 <= p <= q`
    CombinedEffect,
    /// `p > q`
    PAboveQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Predicted,
    NaiveMin,
    GeneralTheory,
    /// the general-theory comparison before its citation was corrected
    GeneralTheorySuperseded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPrediction {
    pub gamma: f64,
    pub regime: Regime,
    pub mean_class: MeanClass,
    pub source: Source,
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && q > 1.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::Range(format!("need p, q > 1, got p = {p}, q = {q}")));
    }
    Ok(())
}

pub fn regime(p: f64, q: f64) -> Regime {
    if p < (q + 1.0) / 2.0 {
        Regime::PBelowHalf
    } else if p <= q {
        Regime::CombinedEffect
    } else {
        Regime::PAboveQ
    }
}

/// The lifespan exponent for `A, B > 0`.
pub fn predicted_exponent(p: f64, q: f64, mean: MeanClass) -> Result<ExponentPrediction> {
    check_exponents(p, q)?;
    let reg = regime(p, q);
    let gamma = match (mean, reg) {
        (MeanClass::NonzeroMean, _) => (p - 1.0).min((q - 1.0) / 2.0),
        (MeanClass::ZeroMean, Regime::CombinedEffect) => p * (q - 1.0) / (q + 1.0),
        (MeanClass::ZeroMean, _) => (p - 1.0).min(q * (q - 1.0) / (q + 1.0)),
    };
    Ok(ExponentPrediction {
        gamma,
        regime: reg,
        mean_class: mean,
        source: Source::Predicted,
    })
}

/// Minimum of the single-nonlinearity exponents (`B = 0` and `A = 0`).
pub fn naive_exponent(p: f64, q: f64, mean: MeanClass) -> Result<ExponentPrediction> {
    check_exponents(p, q)?;
    let single_q = match mean {
        MeanClass::NonzeroMean => (q - 1.0) / 2.0,
        MeanClass::ZeroMean => q * (q - 1.0) / (q + 1.0),
    };
    Ok(ExponentPrediction {
        gamma: (p - 1.0).min(single_q),
        regime: regime(p, q),
        mean_class: mean,
        source: Source::NaiveMin,
    })
}

/// General-theory lower-bound exponent for `u_t^p + u^q`, corrected version,
/// evaluated without the integrality check.
pub fn general_theory_formula(p: f64, q: f64, mean: MeanClass) -> f64 {
    let half = (q + 1.0) / 2.0;
    match mean {
        _ if p <= half => p - 1.0,
        MeanClass::NonzeroMean => (q - 1.0) / 2.0,
        MeanClass::ZeroMean if p < q => ((q - 1.0) / 2.0).max(p * (p - 1.0) / (p + 1.0)),
        MeanClass::ZeroMean => q * (q - 1.0) / (q + 1.0),
    }
}

/// The uncorrected comparison, kept for reference only.
pub fn general_theory_formula_superseded(p: f64, q: f64, mean: MeanClass) -> f64 {
    let half = (q + 1.0) / 2.0;
    match mean {
        _ if p <= half => p - 1.0,
        MeanClass::NonzeroMean if p <= q => (p - 1.0) / 2.0,
        MeanClass::NonzeroMean => (q - 1.0) / 2.0,
        MeanClass::ZeroMean if p <= q => p * (p - 1.0) / (p + 1.0),
        MeanClass::ZeroMean => q * (q - 1.0) / (q + 1.0),
    }
}

/// General theory applies to smooth nonlinearities, so `p, q` must be integers `>= 2`.
pub fn general_theory_exponent(p: f64, q: f64, mean: MeanClass) -> Result<ExponentPrediction> {
    general_theory_impl(p, q, mean, false)
}

pub fn general_theory_exponent_superseded(
    p: f64,
    q: f64,
    mean: MeanClass,
) -> Result<ExponentPrediction> {
    general_theory_impl(p, q, mean, true)
}

fn general_theory_impl(
    p: f64,
    q: f64,
    mean: MeanClass,
    superseded: bool,
) -> Result<ExponentPrediction> {
    if !(is_integer(p) && is_integer(q) && p >= 2.0 && q >= 2.0) {
        return Err(Error::Range(format!(
            "general theory needs integers p, q >= 2, got p = {p}, q = {q}"
        )));
    }
    let (gamma, source) = if superseded {
        (
            general_theory_formula_superseded(p, q, mean),
            Source::GeneralTheorySuperseded,
        )
    } else {
        (general_theory_formula(p, q, mean), Source::GeneralTheory)
    };
    Ok(ExponentPrediction {
        gamma,
        regime: regime(p, q),
        mean_class: mean,
        source,
    })
}

/// Strict region `(q+1)/2 < p < q` in which the zero-mean prediction beats
/// the corrected general theory.
pub fn combined_effect_region(p: f64, q: f64) -> bool {
    (q + 1.0) / 2.0 < p && p < q
}

/// Side-by-side exponents for one `(p, q, mean)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub predicted: ExponentPrediction,
    pub naive: ExponentPrediction,
    pub general: Option<ExponentPrediction>,
    pub general_superseded: Option<ExponentPrediction>,
    /// the predicted lifespan is longer than the general-theory lower bound
    pub improvement: bool,
}

pub fn compare(p: f64, q: f64, mean: MeanClass) -> Result<Comparison> {
    let predicted = predicted_exponent(p, q, mean)?;
    let naive = naive_exponent(p, q, mean)?;
    let general = general_theory_exponent(p, q, mean).ok();
    let general_superseded = general_theory_exponent_superseded(p, q, mean).ok();
    let improvement = general.is_some_and(|g| predicted.gamma > g.gamma + 1e-12);
    Ok(Comparison {
        predicted,
        naive,
        general,
        general_superseded,
        improvement,
    })
}

/// One measured lifespan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub eps: f64,
    pub h: f64,
    pub threshold: f64,
    /// blow-up time of the refined run
    pub t_blow: Option<f64>,
    pub status: RunStatus,
    /// coarse and refined blow-up times agree to the refinement tolerance
    pub resolved: bool,
    pub sup_u: f64,
    pub sup_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub stderr_slope: f64,
    pub n_points: usize,
}

/// Runs [`lifespan_estimate`] for each amplitude of a strictly decreasing
/// ladder. Runs are independent and execute in parallel; failures become
/// records with status `Diverged`.
pub fn sweep(
    template: &Params,
    data: &InitialData,
    eps_ladder: &[f64],
    h: f64,
    threshold: f64,
    opts: &LifespanOptions,
) -> Result<Vec<LifespanRecord>> {
    if eps_ladder.len() < 4 {
        return Err(Error::Precondition(format!(
            "eps ladder needs at least 4 entries, got {}",
            eps_ladder.len()
        )));
    }
    if eps_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition(
            "eps ladder must be strictly decreasing".into(),
        ));
    }
    let params: Vec<Params> = eps_ladder
        .iter()
        .map(|&e| template.with_eps(e))
        .collect::<Result<_>>()?;
    Ok(params
        .par_iter()
        .map(|p| {
            lifespan_estimate(p, data, h, threshold, opts).unwrap_or(LifespanRecord {
                eps: p.eps,
                h,
                threshold,
                t_blow: None,
                status: RunStatus::Diverged,
                resolved: false,
                sup_u: f64::NAN,
                sup_w: f64::NAN,
            })
        })
        .collect())
}

/// Ordinary least squares of `log T_blow` on `log eps` over the resolved
/// blow-up records. The slope estimates `-gamma`.
pub fn fit_power_law(records: &[LifespanRecord]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == RunStatus::Blowup && r.resolved)
        .filter_map(|r| r.t_blow.filter(|t| *t > 0.0).map(|t| (r.eps.ln(), t.ln())))
        .collect();
    fit_log_log(&pts)
}

/// OLS on already-logged points.
pub fn fit_log_log(pts: &[(f64, f64)]) -> Result<FitResult> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("all amplitudes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let stderr_slope = (ss_res / (nf - 2.0) / sxx).sqrt();
    Ok(FitResult {
        slope,
        intercept,
        r2,
        stderr_slope,
        n_points: n,
    })
}

/// Geometric ladder `eps_0, eps_0 r, ..., ` with `count` entries.
pub fn geometric_ladder(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(c: f64, gamma: f64, eps: &[f64]) -> Vec<LifespanRecord> {
        eps.iter()
            .map(|&e| LifespanRecord {
                eps: e,
                h: 1.0 / 128.0,
                threshold: 1e8,
                t_blow: Some(c * e.powf(-gamma)),
                status: RunStatus::Blowup,
                resolved: true,
                sup_u: 1e8,
                sup_w: 1e8,
            })
            .collect()
    }

    #[test]
    fn predicted_exponent_examples() {
        let e = predicted_exponent(2.0, 5.0, MeanClass::NonzeroMean).unwrap();
        assert_eq!(e.gamma, 1.0);
        let e = predicted_exponent(3.0, 4.0, MeanClass::ZeroMean).unwrap();
        assert!((e.gamma - 1.8).abs() < 1e-15);
        assert_eq!(e.regime, Regime::CombinedEffect);
        let e = predicted_exponent(5.0, 3.0, MeanClass::ZeroMean).unwrap();
        assert_eq!(e.gamma, 1.5);
        assert_eq!(e.regime, Regime::PAboveQ);
        let e = predicted_exponent(2.0, 3.0, MeanClass::ZeroMean).unwrap();
        assert_eq!(e.gamma, 1.0);
        assert!(predicted_exponent(1.0, 3.0, MeanClass::ZeroMean).is_err());
    }

    #[test]
    fn general_theory_examples() {
        let g = general_theory_exponent(4.0, 5.0, MeanClass::ZeroMean).unwrap();
        assert!((g.gamma - 2.4).abs() < 1e-15);
        let c = compare(4.0, 5.0, MeanClass::ZeroMean).unwrap();
        assert!((c.predicted.gamma - 8.0 / 3.0).abs() < 1e-15);
        assert!(c.improvement);
        let c = compare(2.0, 5.0, MeanClass::ZeroMean).unwrap();
        assert_eq!(c.general.unwrap().gamma, 1.0);
        assert_eq!(c.predicted.gamma, 1.0);
        assert!(!c.improvement);
        let c = compare(3.0, 4.0, MeanClass::ZeroMean).unwrap();
        assert!((c.general.unwrap().gamma - 1.5).abs() < 1e-15);
        assert!(c.improvement);
        assert!(general_theory_exponent(2.5, 4.0, MeanClass::ZeroMean).is_err());
    }

    #[test]
    fn superseded_version_differs_only_in_middle_band() {
        // nonzero mean, (q+1)/2 < p < q: (p-1)/2 originally vs (q-1)/2 corrected
        let old = general_theory_exponent_superseded(4.0, 5.0, MeanClass::NonzeroMean).unwrap();
        let new = general_theory_exponent(4.0, 5.0, MeanClass::NonzeroMean).unwrap();
        assert_eq!((old.gamma, new.gamma), (1.5, 2.0));
        assert_eq!(old.source, Source::GeneralTheorySuperseded);
        for (p, q) in [(2.0, 5.0), (5.0, 3.0)] {
            for m in [MeanClass::ZeroMean, MeanClass::NonzeroMean] {
                assert_eq!(
                    general_theory_formula(p, q, m),
                    general_theory_formula_superseded(p, q, m)
                );
            }
        }
    }

    #[test]
    fn combined_region_examples() {
        assert!(combined_effect_region(4.0, 5.0));
        assert!(combined_effect_region(3.0, 4.0));
        assert!(!combined_effect_region(2.0, 3.0));
        for m in 3..50 {
            assert!(combined_effect_region(m as f64, m as f64 + 1.0));
        }
    }

    #[test]
    fn fit_recovers_planted_exponents() {
        let eps = [0.4, 0.2, 0.1, 0.05];
        let f = fit_power_law(&synthetic(3.0, 1.8, &eps)).unwrap();
        assert!((f.slope + 1.8).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert_eq!(f.n_points, 4);
        let f = fit_power_law(&synthetic(7.0, 1.0, &eps)).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_three_resolved_points() {
        let mut recs = synthetic(3.0, 1.8, &[0.4, 0.2, 0.1, 0.05]);
        recs[0].resolved = false;
        recs[1].status = RunStatus::CapReached;
        assert!(matches!(fit_power_law(&recs), Err(Error::TooFewPoints(2))));
    }

    #[test]
    fn fit_stderr_on_noisy_data() {
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|k| {
                let x = -(k as f64) * 0.5;
                (x, 1.0 - 2.0 * x + if k % 2 == 0 { 0.01 } else { -0.01 })
            })
            .collect();
        let f = fit_log_log(&pts).unwrap();
        assert!((f.slope + 2.0).abs() < 0.02);
        assert!(f.stderr_slope > 0.0 && f.r2 < 1.0 && f.r2 > 0.99);
    }

    #[test]
    fn sweep_preconditions() {
        let p = Params::new(2.0, 3.0, 1.0, 1.0, 0.1, 1.0, crate::params::Form::Absolute).unwrap();
        let d = crate::data::make_data(crate::data::Family::BumpFZeroG, 1.0, 1.0).unwrap();
        let o = LifespanOptions::default();
        assert!(matches!(
            sweep(&p, &d, &[0.1], 0.1, 1e8, &o),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            sweep(&p, &d, &[0.1, 0.2, 0.05, 0.01], 0.1, 1e8, &o),
            Err(Error::Precondition(_))
        ));
    }
}
