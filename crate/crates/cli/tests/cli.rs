use std::path::PathBuf;
use std::process::{Command, Output};

use projdyn::compat::{ScreenReport, ScreenVerdict};
use projdyn::curvclass::ClassificationReport;
use projdyn::screens::{trajectory_from_csv, ProjectionReport};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projdyn")).args(args).env_remove("PROJDYN_TOL").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn tmp(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("projdyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn dimension_queries() {
    let o = run(&["young-dim", "--rows", "2,2", "--dim", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "20\n");
    let o = run(&["pbb-dim", "--n", "2", "--b", "2"]);
    assert_eq!(stdout(&o), "6\n");
    let o = run(&["young-dim", "--tableau", &data("tableau_2_2.json"), "--dim", "3"]);
    assert_eq!(stdout(&o), "6\n");
}

#[test]
fn hamiltonian_test_on_oscillator_file() {
    let a = run(&["hamiltonian-test", "--input", &data("oscillator_T.json")]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let rep = ScreenReport::from_json(&stdout(&a)).unwrap();
    assert!(matches!(rep.verdict, ScreenVerdict::HyperplaneScreen { .. }));
    let b = run(&["hamiltonian-test", "--input", &data("oscillator_T.json")]);
    assert_eq!(a.stdout, b.stdout, "output must be byte-identical");
    // the builtin reproduces the same report
    let c = run(&["hamiltonian-test", "--system", "oscillator"]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn negative_verdicts_exit_with_one() {
    let o = run(&["hamiltonian-test", "--input", &data("angular_momentum.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"reason\": \"leading_term\""));

    let bad = tmp("generic_map.json");
    std::fs::write(
        &bad,
        r#"{"src": 4, "dst": 4, "matrix": [["1","0","0","0","0","1"],["0","1","0","0","2","0"],["0","0","1","3","0","0"],["0","0","1","1","0","0"],["0","2","0","0","1","0"],["1","0","0","0","0","2"]]}"#,
    )
    .unwrap();
    let o = run(&["classify", "--input", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[not_decomposable_preserving]"), "{}", stderr(&o));
}

#[test]
fn input_errors_exit_with_two_and_name_the_line() {
    let bad = tmp("broken.json");
    std::fs::write(&bad, "{\n  \"screen\": {\"kind\": \"flat\", \"dim\": 3},\n  \"t\": [\n}\n").unwrap();
    let o = run(&["hamiltonian-test", "--input", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let dup = tmp("dup.json");
    std::fs::write(&dup, "{\"dim\": 2, \"order\": 1,\n \"entries\": [\n {\"idx\": [0], \"val\": \"1\"},\n {\"idx\": [0], \"val\": \"2\"}]}\n").unwrap();
    let o = run(&["young-check", "--rows", "1", "--tensor", &dup]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let o = run(&["young-dim", "--rows", "1,2", "--dim", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["integrate", "--system", "kepler", "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn young_check_reports_membership() {
    let t = tmp("antisym.json");
    std::fs::write(&t, r#"{"dim": 3, "order": 2, "entries": [{"idx": [0, 1], "val": "1"}, {"idx": [1, 0], "val": "-1"}]}"#).unwrap();
    let o = run(&["young-check", "--rows", "1,1", "--tensor", &t]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"member\": true"));
    let o = run(&["young-check", "--rows", "2", "--tensor", &t]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"member\": false"));
}

#[test]
fn classification_reports_read_back() {
    let o = run(&["classify", "--input", &data("wedge_square_map.json")]);
    assert_eq!(o.status.code(), Some(0));
    let rep: ClassificationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.tag(), "wedge_square");

    let o = run(&["classify-curvature", "--input", &data("euclidean_R.json")]);
    let rep: ClassificationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.tag(), "metric_case");
    let o = run(&["classify-curvature", "--screen", "flat", "--dim", "4"]);
    let rep: ClassificationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.tag(), "flat_case");

    let o = run(&["screen-find", "--input", &data("euclidean_R.json")]);
    let rep = ScreenReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(rep.verdict.tag(), "quadric_screen");
    let o = run(&["screen-find", "--screen", "hyperboloid"]);
    assert_eq!(ScreenReport::from_json(&stdout(&o)).unwrap().verdict.tag(), "quadric_screen");
}

#[test]
fn integrate_project_and_verify() {
    let csv = tmp("kepler.csv");
    let o = run(&["integrate", "--scenario", &data("kepler_scenario.json"), "-o", &csv]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let traj = trajectory_from_csv(&text).unwrap();
    assert!(traj.len() > 10);
    // the builtin Kepler system has the same initial state
    let o = run(&["integrate", "--system", "kepler"]);
    assert_eq!(stdout(&o), text);

    let o = run(&["project", "--input", &csv, "--to", "sphere"]);
    assert_eq!(o.status.code(), Some(0));
    let on_sphere = trajectory_from_csv(&stdout(&o)).unwrap();
    for (q, _) in &on_sphere.states {
        assert!((q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    let o = run(&["verify-projection", "--input", &csv, "--system", "kepler", "--to", "sphere"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: ProjectionReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep.passed && rep.max_deviation < 1e-6);
    let o = run(&["verify-projection", "--system", "free", "--screen", "sphere", "--to", "flat", "--t1", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn tolerance_from_environment() {
    let a = run(&["integrate", "--system", "oscillator", "--t1", "1"]);
    let b = Command::new(env!("CARGO_BIN_EXE_projdyn"))
        .args(["integrate", "--system", "oscillator", "--t1", "1"])
        .env("PROJDYN_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    assert!(stdout(&b).lines().count() < stdout(&a).lines().count());
}

#[test]
fn help_documents_formats() {
    let o = run(&["--help"]);
    let h = stdout(&o);
    for needle in ["FILE FORMATS", "Scenario", "Trajectory", "PROJDYN_TOL", "hamiltonian-test"] {
        assert!(h.contains(needle), "missing {needle}");
    }
}
