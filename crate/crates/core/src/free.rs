//! d'Alembert solution of the free wave equation with data `(f, g)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::lifespan::MeanClass;

/// `u0` and its derivatives at one point. `utt0 == uxx0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FreeSolutionEval {
    pub u0: f64,
    pub ut0: f64,
    pub ux0: f64,
    pub utx0: f64,
    pub utt0: f64,
}

impl FreeSolutionEval {
    pub fn uxx0(&self) -> f64 {
        self.utt0
    }
}

pub fn eval_free(data: &InitialData, x: f64, t: f64) -> FreeSolutionEval {
    let plus = data.jet(x + t);
    let minus = data.jet(x - t);
    let mass = data.g_antiderivative(x + t) - data.g_antiderivative(x - t);
    FreeSolutionEval {
        u0: 0.5 * (plus.f + minus.f) + 0.5 * mass,
        ut0: 0.5 * (plus.df - minus.df + plus.g + minus.g),
        ux0: 0.5 * (plus.df + minus.df + plus.g - minus.g),
        utx0: 0.5 * (plus.d2f - minus.d2f + plus.dg + minus.dg),
        utt0: 0.5 * (plus.d2f + minus.d2f + plus.dg - minus.dg),
    }
}

/// Only `ut0`, for the solver's inner loop.
#[inline]
pub fn eval_free_ut(data: &InitialData, x: f64, t: f64) -> f64 {
    let r = data.support_radius();
    if (x + t).abs() >= r && (x - t).abs() >= r {
        return 0.0;
    }
    let plus = data.jet(x + t);
    let minus = data.jet(x - t);
    0.5 * (plus.df - minus.df + plus.g + minus.g)
}

/// Sup of `|u0|` over `samples` random points of `{t - |x| >= R, t <= 10 R}`.
///
/// For zero-mean data `u0` vanishes identically there.
pub fn huygens_check(data: &InitialData, samples: usize, seed: u64) -> Result<f64> {
    if data.mean_class() != MeanClass::ZeroMean {
        return Err(Error::Moment(data.moment()));
    }
    let r = data.support_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let t = rng.gen_range(r..=10.0 * r);
        let x = rng.gen_range(-(t - r)..=(t - r));
        worst = worst.max(eval_free(data, x, t).u0.abs());
    }
    Ok(worst)
}
