//! Pinned CLI reports: the rendered output of a suite must match the
//! committed golden file byte for byte, and repeated runs must agree.

use quotfol::frontend::runner::{run_many, Report};
use quotfol::frontend::{parse_scenario, suites};

fn render(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        r.render_text(&mut out);
    }
    let passed: usize = reports.iter().map(|r| r.passed).sum();
    let failed: usize = reports.iter().map(|r| r.failed).sum();
    let errors: usize = reports.iter().map(|r| r.errors).sum();
    out.push_str(&format!("total: {passed} passed, {failed} failed, {errors} errors\n"));
    out
}

fn run_suite(name: &str) -> Vec<Report> {
    let s = suites::find(name).expect("bundled suite");
    let sc = parse_scenario(s.name, s.text).expect("parses");
    run_many(std::slice::from_ref(&sc), false)
}

fn check_text(name: &str, golden: &str) {
    let got = render(&run_suite(name));
    assert_eq!(got, golden, "suite {name} drifted from its golden report");
}

#[test]
fn linear_model_matches_golden() {
    check_text("linear_model", include_str!("golden/linear_model.txt"));
}

#[test]
fn plane_model_a_matches_golden() {
    check_text("plane_model_a", include_str!("golden/plane_model_a.txt"));
}

#[test]
fn cayley_image_matches_golden() {
    check_text("cayley_image", include_str!("golden/cayley_image.txt"));
}

#[test]
fn planar_solution_iv_matches_json_golden() {
    let reports = run_suite("planar_solution_iv");
    let got = format!("{}\n", serde_json::to_string_pretty(&reports).unwrap());
    assert_eq!(got, include_str!("golden/planar_solution_iv.json"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let scenarios: Vec<_> = ["nodal_model", "weighted_model_iv", "quotient_family"]
        .iter()
        .map(|n| {
            let s = suites::find(n).unwrap();
            parse_scenario(s.name, s.text).unwrap()
        })
        .collect();
    let first = render(&run_many(&scenarios, false));
    let second = render(&run_many(&scenarios, false));
    assert_eq!(first, second);
    let json1 = serde_json::to_string(&run_many(&scenarios, false)).unwrap();
    let json2 = serde_json::to_string(&run_many(&scenarios, false)).unwrap();
    assert_eq!(json1, json2);
}
