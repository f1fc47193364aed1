use std::process::{Command, Output};

fn crlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crlab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn constants_from_preset() {
    let o = crlab(&["constants", "--preset", "right-isosceles-square", "--level", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c_inv = v["constants"]["c_inv"].as_f64().unwrap();
    assert!((c_inv - 72f64.sqrt()).abs() < 1e-12);
    assert!(v["reference_values"].is_object());
}

#[test]
fn constants_without_input_is_a_usage_error() {
    assert_eq!(code(&crlab(&["constants"])), 3);
}

#[test]
fn invalid_angle_is_an_input_error() {
    let o = crlab(&["constants", "--omega0-deg", "70"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unknown_subcommand_is_an_input_error() {
    assert_eq!(code(&crlab(&["frobnicate"])), 3);
    assert_eq!(code(&crlab(&["--help"])), 0);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = crlab(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("discrete-poincare") || text.contains("poincare/"));
}

#[test]
fn bisect_study_rounds_decide_the_outcome() {
    assert_eq!(code(&crlab(&["bisect-study", "--dim", "3", "--rounds", "7"])), 0);
    assert_eq!(code(&crlab(&["bisect-study", "--dim", "3", "--rounds", "6"])), 2);
    assert_eq!(code(&crlab(&["bisect-study", "--dim", "2", "--rounds", "3", "--triangles", "10"])), 0);
}

#[test]
fn afem_writes_csv_with_growing_unknowns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = crlab(&["afem", "--preset", "l-shape", "--method", "crfem", "--max-ndof", "600", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv_rows(&std::fs::read_to_string(out).unwrap());
    let header = rdr.remove(0);
    assert_eq!(header[1], "ndof");
    let ndof: Vec<usize> = rdr.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(ndof.len() > 3);
    assert!(ndof.windows(2).all(|w| w[1] > w[0]), "{ndof:?}");
}

#[test]
fn afem_several_thetas_into_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = crlab(&[
        "afem", "--method", "cfem", "--theta", "0.3,0.6", "--max-ndof", "200", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 2);
}

#[test]
fn afem_rejects_bad_theta() {
    assert_eq!(code(&crlab(&["afem", "--theta", "1.5", "--max-ndof", "100"])), 3);
}

// plain comma split; the runner writes numbers and fixed headers only
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}
