use ramsey_duality_web::{fringe_json, report_json, sweep_json, MAX_SWEEP_POINTS};
use serde_json::Value;

fn parse(text: String) -> Value {
    serde_json::from_str(&text).unwrap()
}

#[test]
fn fringe_visibility_matches_report() {
    let theta = 0.4;
    let scan = parse(fringe_json("coherent:5", theta, 0.0, 721).unwrap());
    let report = parse(report_json("coherent:5", theta, 0.0).unwrap());
    let vis = scan["extracted_visibility"].as_f64().unwrap();
    assert!((vis - report["V"].as_f64().unwrap()).abs() < 1e-6);
    let p = scan["p_a"].as_array().unwrap();
    assert!(p.iter().all(|x| (0.0..=1.0).contains(&x.as_f64().unwrap())));
}

#[test]
fn bad_inputs_are_errors() {
    assert!(fringe_json("coherent:1", 1.0, 0.0, 2).is_err());
    assert!(report_json("coherent:-1", 1.0, 0.0).is_err());
    assert!(report_json("fock:2", f64::NAN, 0.0).is_err());
    assert!(sweep_json("symmetric", "5:0:1", 0.0).is_err());
}

#[test]
fn sweep_limit_is_inclusive() {
    let grid = format!("0:{}:0.01", (MAX_SWEEP_POINTS - 1) as f64 / 100.0);
    let rows = parse(sweep_json("symmetric", &grid, 0.0).unwrap());
    assert_eq!(rows.as_array().unwrap().len(), MAX_SWEEP_POINTS);
    let over = format!("0:{}:0.01", MAX_SWEEP_POINTS as f64 / 100.0);
    assert!(sweep_json("symmetric", &over, 0.0).is_err());
}
