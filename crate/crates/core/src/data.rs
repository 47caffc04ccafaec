//! Compactly supported initial data families `(f, g)`.
//!
//! The reference profiles are polynomial bumps, so the support is exact:
//!
//! * `f(x) = a (1 - (x/R)^2)^3` is C^2 with `f' < 0` on `(0, R)`;
//! * `g(x) = a (1 - (x/R)^2)^2` is C^1 with positive mean;
//! * the dipole `g(x) = a x (1 - (x/R)^2)^2` is C^1, odd, and has zero mean.
//!
//! Custom data is given as samples on a uniform grid over `[-R, R]` and is
//! interpolated with natural cubic splines. Its support and smoothness are
//! checked numerically at construction.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifespan::MeanClass;
use crate::quad::{simpson, UniformSpline};

/// Panels used for the moment quadrature.
pub const MOMENT_PANELS: usize = 1 << 14;
/// Sample count for the sup norms in [`data_magnitude`].
pub const MAGNITUDE_SAMPLES: usize = 100_000;
/// `|moment| <= MOMENT_TOL * scale` counts as zero mean.
pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "bumpf_zerog")]
    BumpFZeroG,
    #[serde(rename = "zerof_bumpg")]
    ZeroFBumpG,
    #[serde(rename = "bumpf_dipoleg")]
    BumpFDipoleG,
    #[serde(rename = "custom")]
    Custom,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::BumpFZeroG,
        Family::ZeroFBumpG,
        Family::BumpFDipoleG,
        Family::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BumpFZeroG => "bumpf_zerog",
            Family::ZeroFBumpG => "zerof_bumpg",
            Family::BumpFDipoleG => "bumpf_dipoleg",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name().replace('_', "") == key)
            .ok_or_else(|| Error::UnknownFamily(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CustomTables {
    f: UniformSpline,
    g: UniformSpline,
}

/// Initial data `(f, g)` supported in `[-R, R]`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    family: Family,
    r: f64,
    amplitude: f64,
    custom: Option<Arc<CustomTables>>,
    moment: f64,
    magnitude: f64,
}

/// The five derivatives needed by the free solution, at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub g: f64,
    pub dg: f64,
}

/// Builds one of the polynomial families. `Custom` needs [`make_custom`].
pub fn make_data(family: Family, r: f64, amplitude: f64) -> Result<InitialData> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::Range(format!("R = {r} must be at least 1")));
    }
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::Range(format!(
            "amplitude = {amplitude} must be positive"
        )));
    }
    if family == Family::Custom {
        return Err(Error::UnknownFamily(
            "custom data must be built from tables".into(),
        ));
    }
    Ok(InitialData::finish(InitialData {
        family,
        r,
        amplitude,
        custom: None,
        moment: 0.0,
        magnitude: 0.0,
    }))
}

/// Builds custom data from `n >= 3` samples of `f` and `g` on the uniform grid
/// `x_i = -R + 2R i/(n-1)`.
pub fn make_custom(r: f64, f_samples: Vec<f64>, g_samples: Vec<f64>) -> Result<InitialData> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::Range(format!("R = {r} must be at least 1")));
    }
    if f_samples.len() != g_samples.len() || f_samples.len() < 5 {
        return Err(Error::InvalidData(
            "f and g need the same number (>= 5) of samples".into(),
        ));
    }
    let step = 2.0 * r / (f_samples.len() - 1) as f64;
    let f = UniformSpline::new(-r, step, f_samples)
        .ok_or_else(|| Error::InvalidData("non-finite f samples".into()))?;
    let g = UniformSpline::new(-r, step, g_samples)
        .ok_or_else(|| Error::InvalidData("non-finite g samples".into()))?;

    let scale = [&f, &g]
        .iter()
        .flat_map(|s| (0..=200).map(move |i| s.eval(-r + 2.0 * r * i as f64 / 200.0).0.abs()))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let tol = 1e-8 * scale;
    for end in [-r, r] {
        let (fv, fd, _) = f.eval(end);
        let (gv, _, _) = g.eval(end);
        if fv.abs() > tol || gv.abs() > tol {
            return Err(Error::InvalidData(format!(
                "f and g must vanish at x = {end} (f = {fv:e}, g = {gv:e})"
            )));
        }
        // natural end conditions give f'' = 0 there; f' must also match the zero extension
        if fd.abs() > 1e-4 * scale {
            return Err(Error::InvalidData(format!(
                "f is not C^1 at x = {end} (f' = {fd:e})"
            )));
        }
    }

    Ok(InitialData::finish(InitialData {
        family: Family::Custom,
        r,
        amplitude: 1.0,
        custom: Some(Arc::new(CustomTables { f, g })),
        moment: 0.0,
        magnitude: 0.0,
    }))
}

impl InitialData {
    fn finish(mut self) -> Self {
        self.moment = match self.family {
            Family::BumpFZeroG => 0.0,
            _ => simpson(|x| self.g(x), -self.r, self.r, MOMENT_PANELS),
        };
        self.magnitude = data_magnitude(&self);
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn support_radius(&self) -> f64 {
        self.r
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `∫ g dx`.
    pub fn moment(&self) -> f64 {
        self.moment
    }

    /// The data size `M` (see [`data_magnitude`]), cached at construction.
    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Zero mean when the moment is negligible against `a R`.
    pub fn mean_class(&self) -> MeanClass {
        let scale = (self.amplitude * self.r).max(self.magnitude).max(1.0);
        if self.moment.abs() <= MOMENT_TOL * scale {
            MeanClass::ZeroMean
        } else {
            MeanClass::NonzeroMean
        }
    }

    pub fn g_is_zero(&self) -> bool {
        self.family == Family::BumpFZeroG
    }

    pub fn jet(&self, x: f64) -> Jet {
        if x.abs() >= self.r {
            return Jet::default();
        }
        let a = self.amplitude;
        let r = self.r;
        let s = x / r;
        let w = 1.0 - s * s;
        let bump_f = |j: &mut Jet| {
            j.f = a * w * w * w;
            j.df = -6.0 * a * s * w * w / r;
            j.d2f = -6.0 * a * w * (1.0 - 5.0 * s * s) / (r * r);
        };
        let mut j = Jet::default();
        match self.family {
            Family::BumpFZeroG => bump_f(&mut j),
            Family::ZeroFBumpG => {
                j.g = a * w * w;
                j.dg = -4.0 * a * s * w / r;
            }
            Family::BumpFDipoleG => {
                bump_f(&mut j);
                j.g = a * x * w * w;
                j.dg = a * w * (1.0 - 5.0 * s * s);
            }
            Family::Custom => {
                let t = self.custom.as_ref().expect("custom tables");
                let (f, df, d2f) = t.f.eval(x);
                let (g, dg, _) = t.g.eval(x);
                j = Jet { f, df, d2f, g, dg };
            }
        }
        j
    }

    pub fn f(&self, x: f64) -> f64 {
        self.jet(x).f
    }

    pub fn df(&self, x: f64) -> f64 {
        self.jet(x).df
    }

    pub fn d2f(&self, x: f64) -> f64 {
        self.jet(x).d2f
    }

    pub fn g(&self, x: f64) -> f64 {
        self.jet(x).g
    }

    pub fn dg(&self, x: f64) -> f64 {
        self.jet(x).dg
    }

    /// `G(x) = ∫_{-R}^{x} g`. Closed form for the polynomial families.
    pub fn g_antiderivative(&self, x: f64) -> f64 {
        let r = self.r;
        if x <= -r {
            return 0.0;
        }
        let a = self.amplitude;
        let s = (x / r).min(1.0);
        match self.family {
            Family::BumpFZeroG => 0.0,
            Family::ZeroFBumpG => {
                a * r * (s - 2.0 * s.powi(3) / 3.0 + s.powi(5) / 5.0 + 8.0 / 15.0)
            }
            Family::BumpFDipoleG => -a * r * r * (1.0 - s * s).powi(3) / 6.0,
            Family::Custom => {
                let t = self.custom.as_ref().expect("custom tables");
                t.g.integral(x.min(r))
            }
        }
    }
}

/// `M = sum_{k<=2} |f^(k)|_inf + |g|_{L1} + |g|_inf + |g'|_inf`, by dense
/// sampling on `[-R, R]` and Simpson for `|g|`.
pub fn data_magnitude(data: &InitialData) -> f64 {
    let r = data.r;
    let n = MAGNITUDE_SAMPLES;
    let mut sup = [0.0f64; 5];
    for i in 0..=n {
        let x = -r + 2.0 * r * i as f64 / n as f64;
        let j = data.jet(x);
        for (s, v) in sup.iter_mut().zip([j.f, j.df, j.d2f, j.g, j.dg]) {
            *s = s.max(v.abs());
        }
    }
    let g_l1 = if data.g_is_zero() {
        0.0
    } else {
        simpson(|x| data.g(x).abs(), -r, r, MOMENT_PANELS)
    };
    sup.iter().sum::<f64>() + g_l1
}
