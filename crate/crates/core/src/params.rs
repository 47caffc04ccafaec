//! Problem parameters for `u_tt - u_xx = A|u_t|^p + B|u|^q` with data `(eps f, eps g)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign convention of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `A|w|^p + B|u|^q`
    #[default]
    Absolute,
    /// `A w^p + B u^q`, integer powers only.
    Signed,
}

impl std::str::FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "absolute" | "abs" => Ok(Form::Absolute),
            "signed" => Ok(Form::Signed),
            other => Err(Error::Range(format!("unknown form `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub q: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub form: Form,
}

impl Params {
    pub fn new(p: f64, q: f64, a: f64, b: f64, eps: f64, r: f64, form: Form) -> Result<Self> {
        validate_params(Params {
            p,
            q,
            a,
            b,
            eps,
            r,
            form,
        })
    }

    /// Copy with a different amplitude; the other fields are already validated.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        validate_params(Params { eps, ..*self })
    }
}

pub(crate) fn is_integer(x: f64) -> bool {
    x.is_finite() && x.fract() == 0.0
}

/// Checks every bound on the tuple and returns it unchanged when all hold.
pub fn validate_params(raw: Params) -> Result<Params> {
    let checks = [
        (raw.p > 1.0, format!("p = {} must exceed 1", raw.p)),
        (raw.q > 1.0, format!("q = {} must exceed 1", raw.q)),
        (raw.a >= 0.0, format!("A = {} must be nonnegative", raw.a)),
        (raw.b >= 0.0, format!("B = {} must be nonnegative", raw.b)),
        (raw.eps > 0.0, format!("eps = {} must be positive", raw.eps)),
        (raw.r >= 1.0, format!("R = {} must be at least 1", raw.r)),
    ];
    for (ok, msg) in checks {
        // NaN fails every comparison and lands here too.
        if !ok {
            return Err(Error::Range(msg));
        }
    }
    if !(raw.p.is_finite() && raw.q.is_finite() && raw.a.is_finite() && raw.b.is_finite())
        || !(raw.eps.is_finite() && raw.r.is_finite())
    {
        return Err(Error::Range("parameters must be finite".into()));
    }
    if raw.form == Form::Signed {
        for (name, v) in [("p", raw.p), ("q", raw.q)] {
            if !is_integer(v) || v < 2.0 {
                return Err(Error::Form(format!("{name} = {v}")));
            }
        }
    }
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Params {
        Params {
            p: 2.0,
            q: 3.0,
            a: 1.0,
            b: 1.0,
            eps: 0.1,
            r: 1.0,
            form: Form::Absolute,
        }
    }

    #[test]
    fn accepts_valid_tuple() {
        assert_eq!(validate_params(base()).unwrap(), base());
    }

    #[test]
    fn rejects_p_at_one() {
        let err = validate_params(Params { p: 1.0, ..base() }).unwrap_err();
        assert!(
            matches!(err, Error::Range(ref m) if m.starts_with("p =")),
            "{err}"
        );
    }

    #[test]
    fn rejects_small_support_radius() {
        let err = validate_params(Params { r: 0.5, ..base() }).unwrap_err();
        assert!(
            matches!(err, Error::Range(ref m) if m.starts_with("R =")),
            "{err}"
        );
    }

    #[test]
    fn rejects_nan() {
        assert!(validate_params(Params {
            eps: f64::NAN,
            ..base()
        })
        .is_err());
        assert!(validate_params(Params {
            q: f64::INFINITY,
            ..base()
        })
        .is_err());
    }

    #[test]
    fn signed_needs_integer_powers() {
        let err = validate_params(Params {
            p: 2.5,
            form: Form::Signed,
            ..base()
        })
        .unwrap_err();
        assert!(matches!(err, Error::Form(_)));
        assert!(validate_params(Params {
            p: 3.0,
            q: 4.0,
            form: Form::Signed,
            ..base()
        })
        .is_ok());
    }
}
