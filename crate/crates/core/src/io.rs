//! Run configuration files, the lifespan CSV format, and JSON summaries.
//!
//! Configuration files are line oriented: `key = value`, `#` starts a
//! comment, blank lines are ignored. Recognized keys are `p`, `q`, `A`, `B`,
//! `eps`, `eps_ladder`, `R`, `family`, `amplitude`, `h`, `threshold`, `form`,
//! `mean_class`, `out_dir` and `seed`. Values may be quoted; numbers may be
//! written as fractions such as `1/128`.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::data::{make_data, Family, InitialData};
use crate::error::{Error, Result};
use crate::lifespan::{LifespanRecord, MeanClass};
use crate::params::{validate_params, Form, Params};
use crate::solver::{RunStatus, DEFAULT_THRESHOLD};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "eps,h,threshold,T_blow,status,resolved,sup_u,sup_w";

pub const DEFAULT_H: f64 = 1.0 / 128.0;

/// Settings as written in a file or on the command line; every field optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub eps: Option<f64>,
    pub eps_ladder: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub family: Option<Family>,
    pub amplitude: Option<f64>,
    pub h: Option<f64>,
    pub threshold: Option<f64>,
    pub form: Option<Form>,
    pub mean_class: Option<MeanClass>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigOverrides {
    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: ConfigOverrides) -> Self {
        Self {
            p: over.p.or(self.p),
            q: over.q.or(self.q),
            a: over.a.or(self.a),
            b: over.b.or(self.b),
            eps: over.eps.or(self.eps),
            eps_ladder: over.eps_ladder.or(self.eps_ladder),
            r: over.r.or(self.r),
            family: over.family.or(self.family),
            amplitude: over.amplitude.or(self.amplitude),
            h: over.h.or(self.h),
            threshold: over.threshold.or(self.threshold),
            form: over.form.or(self.form),
            mean_class: over.mean_class.or(self.mean_class),
            out_dir: over.out_dir.or(self.out_dir),
            seed: over.seed.or(self.seed),
        }
    }
}

/// Validated settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub eps_ladder: Option<Vec<f64>>,
    pub family: Family,
    pub amplitude: f64,
    pub h: f64,
    pub threshold: f64,
    pub mean_class: MeanClass,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    /// Fills defaults (`A = B = R = 1`, absolute form, `bumpf_zerog`, unit
    /// amplitude, `h = 1/128`, threshold `1e8`, seed 0) and validates.
    /// `p` and `q` are required.
    pub fn from_overrides(o: ConfigOverrides) -> Result<Self> {
        let p = o.p.ok_or_else(|| Error::Range("p is required".into()))?;
        let q = o.q.ok_or_else(|| Error::Range("q is required".into()))?;
        if let Some(ladder) = &o.eps_ladder {
            if ladder.is_empty() {
                return Err(Error::Range("eps_ladder is empty".into()));
            }
            if ladder.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::Range(
                    "eps_ladder must be strictly decreasing".into(),
                ));
            }
        }
        let eps = o
            .eps
            .or_else(|| o.eps_ladder.as_ref().map(|l| l[0]))
            .unwrap_or(0.1);
        let params = validate_params(Params {
            p,
            q,
            a: o.a.unwrap_or(1.0),
            b: o.b.unwrap_or(1.0),
            eps,
            r: o.r.unwrap_or(1.0),
            form: o.form.unwrap_or_default(),
        })?;
        if let Some(ladder) = &o.eps_ladder {
            for &e in ladder {
                params.with_eps(e)?;
            }
        }
        let h = o.h.unwrap_or(DEFAULT_H);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Range(format!("h = {h} must be positive")));
        }
        let threshold = o.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(threshold > 0.0) {
            return Err(Error::Range(format!(
                "threshold = {threshold} must be positive"
            )));
        }
        let family = o.family.unwrap_or(Family::BumpFZeroG);
        let amplitude = o.amplitude.unwrap_or(1.0);
        let mean_class = match (o.mean_class, family) {
            (Some(m), _) => m,
            (None, Family::Custom) => MeanClass::ZeroMean,
            (None, f) => make_data(f, params.r, amplitude)?.mean_class(),
        };
        Ok(Self {
            params,
            eps_ladder: o.eps_ladder,
            family,
            amplitude,
            h,
            threshold,
            mean_class,
            out_dir: o.out_dir,
            seed: o.seed.unwrap_or(0),
        })
    }

    /// The initial data named by `family` and `amplitude`.
    pub fn data(&self) -> Result<InitialData> {
        make_data(self.family, self.params.r, self.amplitude)
    }
}

/// Parses a number, accepting fractions `a/b`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once('/') {
        Some((a, b)) => Ok(parse(a)? / parse(b)?),
        None => parse(s),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_number)
        .collect()
}

/// Reads `key = value` lines; see the module docs.
pub fn parse_overrides(text: &str) -> Result<ConfigOverrides> {
    let mut o = ConfigOverrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line, msg };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let value = value.trim().trim_matches('"').trim_matches('\'').trim();
        let num = || parse_number(value).map_err(|m| err(format!("{key}: {m}")));
        match key {
            "p" => o.p = Some(num()?),
            "q" => o.q = Some(num()?),
            "A" => o.a = Some(num()?),
            "B" => o.b = Some(num()?),
            "eps" => o.eps = Some(num()?),
            "eps_ladder" => {
                o.eps_ladder = Some(parse_list(value).map_err(|m| err(format!("eps_ladder: {m}")))?)
            }
            "R" => o.r = Some(num()?),
            "family" => o.family = Some(value.parse().map_err(|e: Error| err(e.to_string()))?),
            "amplitude" => o.amplitude = Some(num()?),
            "h" => o.h = Some(num()?),
            "threshold" => o.threshold = Some(num()?),
            "form" => o.form = Some(value.parse().map_err(|e: Error| err(e.to_string()))?),
            "mean_class" => {
                o.mean_class = Some(value.parse().map_err(|e: Error| err(e.to_string()))?)
            }
            "out_dir" => o.out_dir = Some(PathBuf::from(value)),
            "seed" => o.seed = Some(value.parse().map_err(|e| err(format!("seed: {e}")))?),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(o)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::from_overrides(parse_overrides(text)?)
}

/// Renders records in the fixed CSV schema. Floats use the shortest decimal
/// that reads back to the same value.
pub fn records_to_csv(records: &[LifespanRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let t = r.t_blow.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.eps,
            r.h,
            r.threshold,
            t,
            r.status.label(),
            r.resolved,
            r.sup_u,
            r.sup_w
        );
    }
    out
}

pub fn read_records(text: &str) -> Result<Vec<LifespanRecord>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        Some((i, header)) => {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected header `{CSV_HEADER}`, got `{}`", header.trim()),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty input".into(),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let err = |msg: String| Error::Parse { line, msg };
            let cols: Vec<&str> = l.trim().split(',').collect();
            if cols.len() != 8 {
                return Err(err(format!("expected 8 columns, got {}", cols.len())));
            }
            let num = |k: usize| -> Result<f64> {
                cols[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| err(format!("column {}: {e}", k + 1)))
            };
            let t_blow = if cols[3].trim().is_empty() {
                None
            } else {
                Some(num(3)?)
            };
            let status: RunStatus = cols[4].parse().map_err(err)?;
            let resolved = cols[5]
                .trim()
                .parse::<bool>()
                .map_err(|e| err(format!("resolved: {e}")))?;
            Ok(LifespanRecord {
                eps: num(0)?,
                h: num(1)?,
                threshold: num(2)?,
                t_blow,
                status,
                resolved,
                sup_u: num(6)?,
                sup_w: num(7)?,
            })
        })
        .collect()
}

/// `log eps, log T` for the resolved blow-up records, ready for plotting.
pub fn plot_csv(records: &[LifespanRecord]) -> String {
    let mut out = String::from("log_eps,log_T\n");
    for r in records {
        if let (RunStatus::Blowup, true, Some(t)) = (r.status, r.resolved, r.t_blow) {
            let _ = writeln!(out, "{},{}", r.eps.ln(), t.ln());
        }
    }
    out
}

/// Pretty JSON with a leading `schema_version` field.
pub fn json_summary<T: Serialize>(value: &T) -> String {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    match serde_json::to_value(value) {
        Ok(serde_json::Value::Object(inner)) => map.extend(inner),
        Ok(other) => {
            map.insert("value".into(), other);
        }
        Err(e) => {
            map.insert("error".into(), e.to_string().into());
        }
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(map)).unwrap_or_default() + "\n"
}
