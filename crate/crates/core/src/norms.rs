//! Weighted sup norms used by the iteration spaces.
//!
//! | kind | weight |
//! |------|--------|
//! | `N1` | `1` |
//! | `N2` | `t - |x| + 2R` |
//! | `N3` | `(t + |x| + R)^{-1}` |
//! | `N4` | `χ_D + (1 - χ_D) (t + |x| + R)^{-1}` with `D = {t - |x| >= R}` |

use serde::{Deserialize, Serialize};

use crate::grid::DiscreteField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    N1,
    N2,
    N3,
    N4,
}

impl NormKind {
    pub const ALL: [NormKind; 4] = [NormKind::N1, NormKind::N2, NormKind::N3, NormKind::N4];

    #[inline]
    pub fn weight(self, x: f64, t: f64, r: f64) -> f64 {
        match self {
            NormKind::N1 => 1.0,
            NormKind::N2 => t - x.abs() + 2.0 * r,
            NormKind::N3 => 1.0 / (t + x.abs() + r),
            NormKind::N4 => {
                if chi_d(x, t, r) {
                    1.0
                } else {
                    1.0 / (t + x.abs() + r)
                }
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NormKind::N1 => "n1",
            NormKind::N2 => "n2",
            NormKind::N3 => "n3",
            NormKind::N4 => "n4",
        }
    }
}

/// Indicator of the interior region `t - |x| >= R`.
#[inline]
pub fn chi_d(x: f64, t: f64, r: f64) -> bool {
    t - x.abs() >= r
}

/// Grid sup of `|weight(x,t) v(x,t)|`.
pub fn weighted_norm(kind: NormKind, field: &DiscreteField) -> f64 {
    level_norms(kind, field).into_iter().fold(0.0, f64::max)
}

/// The weighted sup restricted to each time level.
pub fn level_norms(kind: NormKind, field: &DiscreteField) -> Vec<f64> {
    let g = field.grid;
    (0..=g.nt)
        .map(|n| {
            let t = g.t(n);
            field.level(n).iter().enumerate().fold(0.0f64, |m, (i, v)| {
                m.max((kind.weight(g.x(i), t, g.r) * v).abs())
            })
        })
        .collect()
}

/// Weighted sup of a single level given as a slice over the grid's nodes.
pub fn slice_norm(
    kind: NormKind,
    level: &[f64],
    x_of: impl Fn(usize) -> f64,
    t: f64,
    r: f64,
) -> f64 {
    level.iter().enumerate().fold(0.0f64, |m, (i, v)| {
        m.max((kind.weight(x_of(i), t, r) * v).abs())
    })
}
