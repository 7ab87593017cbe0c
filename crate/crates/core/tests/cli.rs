use std::path::Path;
use std::process::{Command, Output};

fn peel_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peel-lab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn constants_and_bad_kappa() {
    let o = peel_lab(&["constants", "--kappa", "9/128"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["alpha"].as_f64().unwrap() - 0.75).abs() < 1e-12);

    assert_eq!(code(&peel_lab(&["constants", "--kappa", "0.08"])), 2);
    assert_eq!(code(&peel_lab(&["constants", "--alpha", "0.5"])), 2);
    assert_eq!(code(&peel_lab(&["constants", "--kappa", "0.07", "--alpha", "0.7"])), 2);
    assert_eq!(code(&peel_lab(&["experiment", "--alpha", "0.7", "--experiment", "nope"])), 2);
}

#[test]
fn sample_map_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = peel_lab(&["sample-map", "--alpha", "0.75", "--seed", "7", "--radius", "4", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a.map"), run("b.map"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let t = planar_peeling::map::read_map(std::io::BufReader::new(std::fs::File::open(&a).unwrap())).unwrap();
    t.validate().unwrap();
    assert!(Path::new(&format!("{}.hull.json", a.display())).exists());
}

#[test]
fn budget_overrun_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.map");
    let o = peel_lab(&["sample-map", "--alpha", "0.7", "--radius", "30", "--budget-vertices", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn experiment_reports_are_deterministic() {
    let args = ["experiment", "--kappa", "9/128", "--experiment", "peeling-drift", "--steps", "200", "--trials", "8", "--seed", "3"];
    let a = peel_lab(&args);
    let b = peel_lab(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    let mut csv = args.to_vec();
    csv.extend(["--format", "csv"]);
    let c = peel_lab(&csv);
    assert_eq!(code(&c), 0);
    assert!(String::from_utf8(c.stdout).unwrap().starts_with("#schema=report/1"));
}
