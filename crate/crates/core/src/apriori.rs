//! Empirical checks of the weighted a-priori estimates for `L` and `L'`.
//!
//! Each inequality bounds a weighted norm of `L(G)` or `L'(G)` by norms of the
//! fields making up `G` times a power of `T + R`, with a constant independent
//! of `T`. A probe draws random fields that saturate the input weights,
//! evaluates `LHS / RHS` for every horizon of a ladder, and calls the
//! inequality bounded when the largest ratio is at most twice the ratio at the
//! smallest horizon.
//!
//! The thirty inequalities are grouped into nine lines:
//!
//! | line | inequalities |
//! |------|--------------|
//! | `direct:L:n1`, `direct:Lprime:n2`, `direct:Lprime:n1` | `|w|^p` against `|w|_2^p (T+R)` and `|u|^q` against `|u|_1^q (T+R)^2` |
//! | `linear:m0`, `linear:m1`, `linear:m2` | `|U0|^{k-m} |V|^m` for `L -> n3`, `L' -> n4`, `L' -> n3`, `k = p, q` |
//! | `zero:L:n3`, `zero:Lprime:n4`, `zero:Lprime:n3` | `|W|^p` against `|W|_4^p (T+R)^p` and `|U|^q` against `|U|_3^q (T+R)^{q+1}` |
//!
//! In the `linear` lines `U0` is supported in the two strips
//! `(t - R)_+ <= |x| <= t + R` where a zero-mean free wave lives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::duhamel::{apply_l, apply_lprime};
use crate::error::{Error, Result};
use crate::grid::{CharacteristicGrid, DiscreteField};
use crate::norms::{chi_d, weighted_norm, NormKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    /// estimates in the unshifted iteration space
    Direct,
    /// estimates with `m` factors of the unknown and the rest of the free wave
    Linear(u8),
    /// estimates in the zero-mean iteration space
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Operator {
    L,
    LPrime,
}

/// Which unknown carries the exponent: `p` goes with `w`/`W`, `q` with `u`/`U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Input {
    W,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Inequality {
    pub group: Group,
    pub op: Operator,
    pub norm: NormKind,
    pub input: Input,
}

impl Inequality {
    pub fn line_id(&self) -> String {
        let op = match self.op {
            Operator::L => "L",
            Operator::LPrime => "Lprime",
        };
        let norm = self.norm.label();
        match self.group {
            Group::Direct => format!("direct:{op}:{norm}"),
            Group::Linear(m) => format!("linear:m{m}"),
            Group::Zero => format!("zero:{op}:{norm}"),
        }
    }

    pub fn id(&self) -> String {
        let input = match self.input {
            Input::W => "w",
            Input::U => "u",
        };
        match self.group {
            Group::Linear(m) => {
                let op = match self.op {
                    Operator::L => "L",
                    Operator::LPrime => "Lprime",
                };
                let norm = self.norm.label();
                format!("linear:m{m}:{op}:{norm}:{input}")
            }
            _ => format!("{}:{input}", self.line_id()),
        }
    }
}

fn operator_norm_pairs(group: Group) -> [(Operator, NormKind); 3] {
    match group {
        Group::Direct => [
            (Operator::L, NormKind::N1),
            (Operator::LPrime, NormKind::N2),
            (Operator::LPrime, NormKind::N1),
        ],
        _ => [
            (Operator::L, NormKind::N3),
            (Operator::LPrime, NormKind::N4),
            (Operator::LPrime, NormKind::N3),
        ],
    }
}

/// All thirty inequalities, in line order.
pub fn all_inequalities() -> Vec<Inequality> {
    let groups = [
        Group::Direct,
        Group::Linear(0),
        Group::Linear(1),
        Group::Linear(2),
        Group::Zero,
    ];
    let mut out = Vec::new();
    for group in groups {
        for (op, norm) in operator_norm_pairs(group) {
            for input in [Input::W, Input::U] {
                out.push(Inequality {
                    group,
                    op,
                    norm,
                    input,
                });
            }
        }
    }
    out
}

/// The nine line ids, in order.
pub fn line_ids() -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for ineq in all_inequalities() {
        let id = ineq.line_id();
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    ids
}

/// Resolves a line id or an individual inequality id.
pub fn resolve(id: &str) -> Result<Vec<Inequality>> {
    let id = match id.trim() {
        "L:w→norm1" | "L:w->norm1" => "direct:L:n1:w",
        other => other,
    };
    let all = all_inequalities();
    if let Some(one) = all.iter().find(|i| i.id() == id) {
        return Ok(vec![*one]);
    }
    let line: Vec<Inequality> = all.into_iter().filter(|i| i.line_id() == id).collect();
    if line.is_empty() {
        Err(Error::UnknownInequality(id.to_string()))
    } else {
        Ok(line)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// time levels per horizon; the step is `T / levels`
    pub levels: usize,
    /// probe with identically zero fields
    pub zero_fields: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            p: 3.0,
            q: 4.0,
            r: 1.0,
            levels: 64,
            zero_fields: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityResult {
    pub id: String,
    /// largest ratio over the trials, per horizon
    pub ratios: Vec<f64>,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    pub id: String,
    pub t_values: Vec<f64>,
    /// per horizon, the largest ratio among the member inequalities
    pub ratios: Vec<f64>,
    pub bounded: bool,
    pub trials: usize,
    pub seed: u64,
    pub config: ProbeConfig,
    pub members: Vec<InequalityResult>,
}

/// Smooth random modulation in `[0, 1]` on scaled coordinates
/// `xi = x / (T + R)`, `tau = t / T`.
#[derive(Debug, Clone)]
struct Modulation {
    factors: Vec<(bool, f64, f64, f64)>,
}

impl Modulation {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let factors = (0..3)
            .map(|_| {
                let on_time = rng.gen_bool(0.5);
                let centre = if on_time {
                    rng.gen_range(0.0..1.0)
                } else {
                    rng.gen_range(-1.0..1.0)
                };
                (
                    on_time,
                    centre,
                    rng.gen_range(0.3..1.5),
                    rng.gen_range(0.0..0.5),
                )
            })
            .collect();
        Self { factors }
    }

    fn eval(&self, xi: f64, tau: f64) -> f64 {
        self.factors
            .iter()
            .map(|&(on_time, c, w, floor)| {
                let s = ((if on_time { tau } else { xi }) - c) / w;
                let bump = if s.abs() < 1.0 {
                    (1.0 - s * s).powi(2)
                } else {
                    0.0
                };
                floor + (1.0 - floor) * bump
            })
            .product()
    }
}

struct TrialFields {
    /// unknown paired with `p`
    w: DiscreteField,
    /// unknown paired with `q`
    u: DiscreteField,
    /// free-wave factor of the linear group
    u0: DiscreteField,
}

fn draw_fields(
    group: Group,
    grid: CharacteristicGrid,
    rng: &mut ChaCha8Rng,
    zero: bool,
) -> TrialFields {
    let r = grid.r;
    let t_max = grid.t_max();
    let scale = t_max + r;
    let mut field = |shape: &dyn Fn(f64, f64) -> f64| {
        let m = Modulation::draw(rng);
        DiscreteField::from_fn(grid, |x, t| {
            if zero {
                0.0
            } else {
                m.eval(x / scale, t / t_max) * shape(x, t)
            }
        })
    };
    // shapes that saturate the weight of the norm the field is measured in
    let inv_n2 = |x: f64, t: f64| 1.0 / (t - x.abs() + 2.0 * r);
    let inv_n3 = |x: f64, t: f64| t + x.abs() + r;
    let inv_n4 = |x: f64, t: f64| if chi_d(x, t, r) { 1.0 } else { t + x.abs() + r };
    // continuous, so it vanishes on the inner edge |x| = t - R of the strips
    let strips = |x: f64, t: f64| ((x.abs() - t + r) / r).clamp(0.0, 1.0);
    match group {
        Group::Direct => TrialFields {
            w: field(&inv_n2),
            u: field(&|_, _| 1.0),
            u0: DiscreteField::zeros(grid),
        },
        _ => TrialFields {
            w: field(&inv_n4),
            u: field(&inv_n3),
            u0: field(&strips),
        },
    }
}

fn ratio(ineq: &Inequality, cfg: &ProbeConfig, f: &TrialFields, t_max: f64) -> f64 {
    let scale = t_max + cfg.r;
    let (k, unknown, unknown_norm) = match ineq.input {
        Input::W => (
            cfg.p,
            &f.w,
            if ineq.group == Group::Direct {
                NormKind::N2
            } else {
                NormKind::N4
            },
        ),
        Input::U => (
            cfg.q,
            &f.u,
            if ineq.group == Group::Direct {
                NormKind::N1
            } else {
                NormKind::N3
            },
        ),
    };
    let (source, rhs) = match ineq.group {
        Group::Direct | Group::Zero => {
            let source = unknown.map(|v| v.abs().powf(k));
            let growth = match (ineq.group, ineq.input) {
                (Group::Direct, Input::W) => scale,
                (Group::Direct, Input::U) => scale * scale,
                (_, Input::W) => scale.powf(k),
                (_, Input::U) => scale.powf(k + 1.0),
            };
            (
                source,
                weighted_norm(unknown_norm, unknown).powf(k) * growth,
            )
        }
        Group::Linear(m) => {
            let m = m as f64;
            let source =
                f.u0.zip_map(unknown, |a, b| a.abs().powf(k - m) * b.abs().powf(m));
            let rhs = weighted_norm(NormKind::N1, &f.u0).powf(k - m)
                * weighted_norm(unknown_norm, unknown).powf(m)
                * scale.powf(m);
            (source, rhs)
        }
    };
    let image = match ineq.op {
        Operator::L => apply_l(&source),
        Operator::LPrime => apply_lprime(&source),
    };
    let lhs = weighted_norm(ineq.norm, &image);
    if rhs > 0.0 {
        lhs / rhs
    } else {
        0.0
    }
}

/// [`apriori_probe_with`] using the default configuration (`p = 3`, `q = 4`,
/// `R = 1`, 64 levels per horizon).
pub fn apriori_probe(
    id: &str,
    trials: usize,
    t_ladder: &[f64],
    seed: u64,
) -> Result<AprioriReport> {
    apriori_probe_with(id, trials, t_ladder, seed, &ProbeConfig::default())
}

pub fn apriori_probe_with(
    id: &str,
    trials: usize,
    t_ladder: &[f64],
    seed: u64,
    cfg: &ProbeConfig,
) -> Result<AprioriReport> {
    let members = resolve(id)?;
    if t_ladder.len() < 3 {
        return Err(Error::Precondition(format!(
            "T ladder needs at least 3 entries, got {}",
            t_ladder.len()
        )));
    }
    if t_ladder[0] <= 0.0 || t_ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "T ladder must be positive and increasing".into(),
        ));
    }
    if trials == 0 || cfg.levels < 2 {
        return Err(Error::Precondition(
            "need at least one trial and two levels".into(),
        ));
    }
    let mut results: Vec<InequalityResult> = members
        .iter()
        .map(|m| InequalityResult {
            id: m.id(),
            ratios: Vec::with_capacity(t_ladder.len()),
            bounded: true,
        })
        .collect();
    for &t_max in t_ladder {
        let grid = CharacteristicGrid::new(t_max / cfg.levels as f64, t_max, cfg.r)?;
        // one stream per trial; the same trial draws the same shapes at every horizon
        let per_trial: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                let mut cache: Vec<(Group, TrialFields)> = Vec::new();
                members
                    .iter()
                    .map(|ineq| {
                        if !cache.iter().any(|(g, _)| *g == ineq.group) {
                            let mut group_rng = rng.clone();
                            group_rng.set_word_pos(group_offset(ineq.group));
                            let f = draw_fields(ineq.group, grid, &mut group_rng, cfg.zero_fields);
                            cache.push((ineq.group, f));
                        }
                        let f = &cache.iter().find(|(g, _)| *g == ineq.group).unwrap().1;
                        ratio(ineq, cfg, f, t_max)
                    })
                    .collect()
            })
            .collect();
        for (k, res) in results.iter_mut().enumerate() {
            let worst = per_trial.iter().map(|r| r[k]).fold(0.0f64, f64::max);
            if !worst.is_finite() {
                return Err(Error::NonFinite { time: t_max });
            }
            res.ratios.push(worst);
        }
    }
    for res in results.iter_mut() {
        let first = res.ratios[0];
        let max = res.ratios.iter().cloned().fold(0.0f64, f64::max);
        res.bounded = max <= 2.0 * first;
    }
    let ratios = (0..t_ladder.len())
        .map(|i| results.iter().map(|r| r.ratios[i]).fold(0.0f64, f64::max))
        .collect();
    Ok(AprioriReport {
        id: id.to_string(),
        t_values: t_ladder.to_vec(),
        ratios,
        bounded: results.iter().all(|r| r.bounded),
        trials,
        seed,
        config: cfg.clone(),
        members: results,
    })
}

/// Separate positions in the trial stream, so each group draws its own fields.
fn group_offset(group: Group) -> u128 {
    let k = match group {
        Group::Direct => 0,
        Group::Linear(m) => 1 + m as u128,
        Group::Zero => 4,
    };
    k << 20
}
