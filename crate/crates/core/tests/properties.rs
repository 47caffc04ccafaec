//! Property tests for the structural invariants of the solver and its parts.

use proptest::prelude::*;

use wavelab::certificate::{
    iteration_sequences, iteration_sequences_recurrence, log_m_lower_bound, log_m_sequence,
    sq_closed_form, sq_partial,
};
use wavelab::data::{make_data, Family};
use wavelab::duhamel::{apply_l, apply_lbarprime, apply_lprime};
use wavelab::free::eval_free;
use wavelab::grid::{CharacteristicGrid, DiscreteField};
use wavelab::lifespan::{
    combined_effect_region, fit_log_log, general_theory_formula, naive_exponent,
    predicted_exponent, MeanClass,
};
use wavelab::norms::{weighted_norm, NormKind};
use wavelab::params::{Form, Params};
use wavelab::solver::{free_fields, march_with, MarchOptions, RunStatus};

const FAMILIES: [Family; 3] = [Family::BumpFZeroG, Family::ZeroFBumpG, Family::BumpFDipoleG];
const NORMS: [NormKind; 4] = [NormKind::N1, NormKind::N2, NormKind::N3, NormKind::N4];

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(FAMILIES.to_vec())
}

fn mean() -> impl Strategy<Value = MeanClass> {
    prop::sample::select(vec![MeanClass::ZeroMean, MeanClass::NonzeroMean])
}

/// Smooth-ish random field built from a few oscillating modes.
fn field(grid: CharacteristicGrid, coef: &[f64]) -> DiscreteField {
    DiscreteField::from_fn(grid, |x, t| {
        coef.iter()
            .enumerate()
            .map(|(k, c)| c * ((k as f64 + 1.0) * x + 0.7 * k as f64 * t + c).sin())
            .sum()
    })
}

fn small_grid() -> CharacteristicGrid {
    CharacteristicGrid::new(0.125, 2.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_solution_parallelogram(fam in family(), x in -4.0..4.0f64, t in 0.2..3.0f64, h in 0.01..0.2f64) {
        let d = make_data(fam, 1.0, 1.0).unwrap();
        let u = |x: f64, t: f64| eval_free(&d, x, t).u0;
        let lhs = u(x, t + h) + u(x, t - h);
        let rhs = u(x + h, t) + u(x - h, t);
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs().max(rhs.abs())), "{lhs} {rhs}");
    }

    #[test]
    fn free_solution_support(fam in family(), t in 0.0..5.0f64, gap in 1e-6..3.0f64, side in prop::bool::ANY) {
        let d = make_data(fam, 1.0, 1.0).unwrap();
        let x = (t + 1.0 + gap) * if side { 1.0 } else { -1.0 };
        let e = eval_free(&d, x, t);
        prop_assert_eq!(e.u0, 0.0);
        prop_assert_eq!(e.ut0, 0.0);
    }

    #[test]
    fn free_solution_time_derivative(fam in family(), x in -2.5..2.5f64, t in 0.3..1.5f64) {
        let d = make_data(fam, 1.0, 1.0).unwrap();
        let err = |k: f64| {
            let u = |t: f64| eval_free(&d, x, t).u0;
            ((u(t + k) - u(t - k)) / (2.0 * k) - eval_free(&d, x, t).ut0).abs()
        };
        // data are only C2 / C1, so allow first order near kinks of the derivatives
        prop_assert!(err(1e-4) <= 1e-5, "{}", err(1e-4));
    }

    #[test]
    fn lbarprime_bounded_by_lprime_of_abs(coef in prop::collection::vec(-2.0..2.0f64, 1..5)) {
        let v = field(small_grid(), &coef);
        let bar = apply_lbarprime(&v);
        let prime = apply_lprime(&v.map(f64::abs));
        for (a, b) in bar.values().iter().zip(prime.values()) {
            prop_assert!(a.abs() <= b + 1e-14);
        }
    }

    #[test]
    fn operators_are_monotone(coef in prop::collection::vec(-2.0..2.0f64, 1..5), bump in prop::collection::vec(0.0..1.0f64, 1..4)) {
        let g = small_grid();
        let v1 = field(g, &coef);
        let extra = field(g, &bump).map(f64::abs);
        let v2 = v1.zip_map(&extra, |a, b| a + b);
        for (op, name) in [(apply_l as fn(&DiscreteField) -> DiscreteField, "L"), (apply_lprime, "L'")] {
            let (a, b) = (op(&v1), op(&v2));
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!(x <= &(y + 1e-13), "{name}: {x} > {y}");
            }
        }
    }

    #[test]
    fn norms_homogeneous_and_subadditive(a in prop::collection::vec(-2.0..2.0f64, 1..4), b in prop::collection::vec(-2.0..2.0f64, 1..4), c in -5.0..5.0f64) {
        let g = small_grid();
        let (v1, v2) = (field(g, &a), field(g, &b));
        for kind in NORMS {
            let n1 = weighted_norm(kind, &v1);
            let scaled = weighted_norm(kind, &v1.map(|v| c * v));
            prop_assert!((scaled - c.abs() * n1).abs() <= 1e-12 * (1.0 + n1));
            let sum = weighted_norm(kind, &v1.zip_map(&v2, |x, y| x + y));
            prop_assert!(sum <= n1 + weighted_norm(kind, &v2) + 1e-12);
        }
    }

    #[test]
    fn predicted_exponent_is_positive_and_bounded(p in 1.01..8.0f64, q in 1.01..8.0f64, m in mean()) {
        let predicted = predicted_exponent(p, q, m).unwrap().gamma;
        let naive = naive_exponent(p, q, m).unwrap().gamma;
        prop_assert!(predicted > 0.0 && predicted.is_finite());
        // the combined effect can only shorten the lifespan
        prop_assert!(predicted <= naive + 1e-12, "{predicted} {naive}");
    }

    #[test]
    fn dominance_in_combined_region(q in 2.0..10.0f64, s in 0.01..0.99f64) {
        let lo = (q + 1.0) / 2.0;
        let p = lo + s * (q - lo);
        prop_assert!(combined_effect_region(p, q));
        let predicted = predicted_exponent(p, q, MeanClass::ZeroMean).unwrap().gamma;
        let general = general_theory_formula(p, q, MeanClass::ZeroMean);
        prop_assert!(predicted > general, "{predicted} {general}");
    }

    #[test]
    fn fit_recovers_planted_power_law(gamma in 0.2..3.0f64, c in 0.1..50.0f64, n in 3usize..10) {
        let pts: Vec<(f64, f64)> = (0..n).map(|k| {
            let eps = 0.4 * 0.7f64.powi(k as i32);
            (eps.ln(), (c * eps.powf(-gamma)).ln())
        }).collect();
        let f = fit_log_log(&pts).unwrap();
        prop_assert!((f.slope + gamma).abs() <= 1e-10);
        prop_assert!((f.intercept - c.ln()).abs() <= 1e-9);
        prop_assert!((1.0 - f.r2).abs() <= 1e-12);
        prop_assert_eq!(f.n_points, n);
    }

    #[test]
    fn log_m_sequence_respects_lower_bound(q in 2.0..6.0f64, log_bc7 in -3.0..3.0f64, log_m1 in -8.0..2.0f64) {
        let seq = log_m_sequence(q, log_bc7, log_m1, 31);
        for (n, &actual) in seq.iter().enumerate().skip(1) {
            let bound = log_m_lower_bound(q, log_bc7, log_m1, n);
            prop_assert!(actual >= bound - 1e-9 * (1.0 + bound.abs()), "n = {n}: {actual} < {bound}");
        }
    }

    #[test]
    fn iteration_sequences_match_recurrence(q in 2u64..7, n in 1u32..12) {
        let (a, b) = iteration_sequences(q as f64, n);
        let (ra, rb) = iteration_sequences_recurrence(q, n);
        prop_assert_eq!(a, ra as f64);
        prop_assert_eq!(b, rb as f64);
    }

    #[test]
    fn sq_partial_sums_increase_to_the_limit(q in 2.0..10.0f64) {
        let mut prev = 0.0;
        for n in 1..60 {
            let s = sq_partial(q, n);
            prop_assert!(s >= prev);
            prev = s;
        }
        prop_assert!((sq_partial(q, 200) - sq_closed_form(q)).abs() <= 1e-12);
    }
}

fn params(p: f64, q: f64, eps: f64) -> Params {
    Params::new(p, q, 1.0, 1.0, eps, 1.0, Form::Absolute).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn march_invariants(fam in family(), eps in 0.05..0.5f64, p in 2.0..4.0f64, q in 2.0..5.0f64) {
        let d = make_data(fam, 1.0, 1.0).unwrap();
        let h = 1.0 / 32.0;
        let grid = CharacteristicGrid::new(h, 3.0, 1.0).unwrap();
        let par = params(p, q, eps);
        let traj = march_with(&par, &d, &grid, 1e8, &MarchOptions::full_history()).unwrap();
        prop_assume!(traj.status == RunStatus::Completed);
        let (u, w) = traj.fields().unwrap();
        // support
        prop_assert!(u.support_violation() <= 1e-12 && w.support_violation() <= 1e-12);
        // lower barrier: the source is nonnegative
        let (free_u, _) = free_fields(&d, eps, grid);
        for (a, b) in u.values().iter().zip(free_u.values()) {
            prop_assert!(*a >= b - 10.0 * h * h, "{a} < {b}");
        }
        // w against the centered time difference of u
        let mut worst = 0.0f64;
        for n in 1..grid.nt {
            for i in 0..grid.nx() {
                let dt = (u.get(i, n + 1) - u.get(i, n - 1)) / (2.0 * h);
                worst = worst.max((dt - w.get(i, n)).abs());
            }
        }
        prop_assert!(worst <= 20.0 * h * h * (1.0 + w.sup_abs()), "{worst}");
        // even data give an even solution
        if fam != Family::BumpFDipoleG {
            for n in 0..=grid.nt {
                let lvl = u.level(n);
                for i in 0..grid.nx() {
                    prop_assert!((lvl[i] - lvl[grid.nx() - 1 - i]).abs() <= 1e-12);
                }
            }
        }
    }
}
