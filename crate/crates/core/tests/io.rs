//! CSV and JSON round trips and run determinism.

use proptest::prelude::*;

use wavelab::data::{make_data, Family};
use wavelab::io::{json_summary, parse_config, read_records, records_to_csv, CSV_HEADER};
use wavelab::lifespan::{sweep, LifespanRecord};
use wavelab::solver::{LifespanOptions, RunStatus};

fn status() -> impl Strategy<Value = RunStatus> {
    prop::sample::select(vec![
        RunStatus::Completed,
        RunStatus::Blowup,
        RunStatus::Diverged,
        RunStatus::CapReached,
    ])
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::POSITIVE
            | prop::num::f64::NEGATIVE
            | prop::num::f64::ZERO
            | prop::num::f64::SUBNORMAL,
        0.0..1e3f64,
    ]
}

fn record() -> impl Strategy<Value = LifespanRecord> {
    (
        finite(),
        finite(),
        finite(),
        prop::option::of(finite()),
        status(),
        any::<bool>(),
        finite(),
        finite(),
    )
        .prop_map(
            |(eps, h, threshold, t_blow, status, resolved, sup_u, sup_w)| LifespanRecord {
                eps,
                h,
                threshold,
                t_blow,
                status,
                resolved,
                sup_u,
                sup_w,
            },
        )
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(records in prop::collection::vec(record(), 0..12)) {
        let text = records_to_csv(&records);
        let back = read_records(&text).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            prop_assert_eq!(a.eps.to_bits(), b.eps.to_bits());
            prop_assert_eq!(a.h.to_bits(), b.h.to_bits());
            prop_assert_eq!(a.threshold.to_bits(), b.threshold.to_bits());
            prop_assert_eq!(a.t_blow.map(f64::to_bits), b.t_blow.map(f64::to_bits));
            prop_assert_eq!(a.status, b.status);
            prop_assert_eq!(a.resolved, b.resolved);
            prop_assert_eq!(a.sup_u.to_bits(), b.sup_u.to_bits());
            prop_assert_eq!(a.sup_w.to_bits(), b.sup_w.to_bits());
        }
        prop_assert_eq!(records_to_csv(&back), text);
    }

    #[test]
    fn json_round_trip(records in prop::collection::vec(record(), 0..6)) {
        let text = json_summary(&serde_json::json!({ "records": records }));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&v["schema_version"], &serde_json::json!(1));
        let back: Vec<LifespanRecord> = serde_json::from_value(v["records"].clone()).unwrap();
        prop_assert_eq!(back, records);
    }
}

#[test]
fn header_is_fixed() {
    assert_eq!(
        CSV_HEADER,
        "eps,h,threshold,T_blow,status,resolved,sup_u,sup_w"
    );
    assert_eq!(records_to_csv(&[]), format!("{CSV_HEADER}\n"));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let text = "p = 2\nq = 3\nfamily = bumpf_zerog\neps_ladder = 0.8, 0.6, 0.45, 0.3\nh = 1/16\nseed = 11\n";
    let run = || {
        let cfg = parse_config(text).unwrap();
        let data = cfg.data().unwrap();
        let ladder = cfg.eps_ladder.clone().unwrap();
        let records = sweep(
            &cfg.params,
            &data,
            &ladder,
            cfg.h,
            cfg.threshold,
            &LifespanOptions::default(),
        )
        .unwrap();
        (records_to_csv(&records), json_summary(&records))
    };
    assert_eq!(run(), run());
}

#[test]
fn sweep_times_grow_down_the_ladder() {
    let data = make_data(Family::BumpFZeroG, 1.0, 1.0).unwrap();
    let cfg = parse_config("p = 2\nq = 3\neps = 0.8\n").unwrap();
    let records = sweep(
        &cfg.params,
        &data,
        &[0.8, 0.4, 0.2, 0.1],
        1.0 / 16.0,
        1e8,
        &LifespanOptions::default(),
    )
    .unwrap();
    let times: Vec<f64> = records.iter().map(|r| r.t_blow.unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]), "{times:?}");
}

#[test]
fn linear_problem_never_blows_up() {
    let data = make_data(Family::BumpFZeroG, 1.0, 1.0).unwrap();
    let cfg = parse_config("p = 2\nq = 3\nA = 0\nB = 0\n").unwrap();
    let opts = LifespanOptions {
        cap: 16.0,
        ..LifespanOptions::default()
    };
    let records = sweep(&cfg.params, &data, &[0.8, 0.4, 0.2, 0.1], 0.125, 1e8, &opts).unwrap();
    assert!(records
        .iter()
        .all(|r| r.status == RunStatus::CapReached && !r.resolved));
}
