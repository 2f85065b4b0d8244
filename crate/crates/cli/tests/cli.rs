use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lorentzdyn::io::parse_json;
use lorentzdyn::model_spaces::CircleParam;
use lorentzdyn::reports::{AdsCircleReport, AsReport, KakReport, TorusFixedReport};
use lorentzdyn::Subspace;
use nalgebra::DMatrix;

fn lorentzdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentzdyn")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const JORDAN: &str = "[[1,1,0.5],[0,1,1],[0,0,1]]";
const ROTATION: &str = "[[0.6,-0.8],[0.8,0.6]]";

#[test]
fn kak_report_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", JORDAN);
    let out = lorentzdyn(&["kak", &a]);
    assert_eq!(out.status.code(), Some(0));
    let rep: KakReport = parse_json(&stdout(&out)).unwrap();
    assert!(rep.reconstruction_error < 1e-12);
    assert!(rep.d.windows(2).all(|w| w[0] <= w[1]));
    assert!(rep.lorentz.is_none());
}

#[test]
fn singular_matrix_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", "[[1,0],[0,0]]");
    let out = lorentzdyn(&["kak", &a]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn fundamental_powers_give_the_coordinate_plane() {
    let dir = tempfile::tempdir().unwrap();
    let seq =
        write(dir.path(), "s.json", &format!(r#"{{"d": 3, "powers": {{"matrix": {JORDAN}, "from": 1, "to": 40}}}}"#));
    let out = lorentzdyn(&["as", &seq, "--oracle", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let rep: AsReport = parse_json(&stdout(&out)).unwrap();
    assert_eq!(rep.generator_spec.as_deref(), Some("A^n, n = 1..40"));
    let plane = Subspace::from_spanning(&DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
    let line = Subspace::from_spanning(&DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]));
    assert!(rep.approx_stable.unwrap().subspace.distance(&plane) < 1e-6);
    assert!(rep.strongly_stable.unwrap().subspace.distance(&line) < 1e-6);
}

#[test]
fn rotations_are_equicontinuous() {
    let dir = tempfile::tempdir().unwrap();
    let seq =
        write(dir.path(), "s.json", &format!(r#"{{"d": 2, "powers": {{"matrix": {ROTATION}, "from": 1, "to": 30}}}}"#));
    let out = lorentzdyn(&["as", &seq]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("equicontinuous"));
}

#[test]
fn tolerance_overrides_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", JORDAN);
    assert_eq!(lorentzdyn(&["--tol", "converge=1e-4", "kak", &a]).status.code(), Some(0));
    assert_eq!(lorentzdyn(&["--tol", "bogus=1", "kak", &a]).status.code(), Some(2));
    assert_eq!(lorentzdyn(&["--tol", "converge=-1", "kak", &a]).status.code(), Some(2));
    assert_eq!(lorentzdyn(&["--tol", "converge", "kak", &a]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(lorentzdyn(&[]).status.code(), Some(2));
    assert_eq!(lorentzdyn(&["kak"]).status.code(), Some(2));
    assert_eq!(lorentzdyn(&["kak", "/nonexistent/matrix.json"]).status.code(), Some(2));
    assert_eq!(lorentzdyn(&["as", "x.json", "--oracle", "psychic"]).status.code(), Some(2));
}

#[test]
fn hopf_defaults_to_csv() {
    let out = lorentzdyn(&["model", "hopf", "--alpha", "0.5", "--lambda", "2", "--point", "1,0.1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,rep_11,rep_22,norm,image_x,image_y"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn output_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("circle.json");
    let out = lorentzdyn(&["model", "ads-circle", "--h", "0,-1;1,0", "--alpha", "0", "-o", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rep: AdsCircleReport = parse_json(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(rep.image, CircleParam::Infinity);
    assert_eq!(rep.mobius, CircleParam::Infinity);
}

#[test]
fn torus_reports() {
    let dir = tempfile::tempdir().unwrap();
    let gram = write(dir.path(), "g.json", "[[-1,0,0],[0,1,0],[0,0,1]]");
    let known = write(dir.path(), "a.json", "[[3,2,2],[2,1,2],[2,2,1]]");
    let out = lorentzdyn(&["model", "torus-fixed", "--gram", &gram, "--matrix", &known]);
    assert_eq!(out.status.code(), Some(0));
    let rep: TorusFixedReport = parse_json(&stdout(&out)).unwrap();
    assert_eq!(rep.fixed.rays.len(), 2);
    let [l1, l2] = rep.lyapunov.unwrap();
    assert!((l1 + l2).abs() < 1e-12 && l2 > 0.0);

    let out = lorentzdyn(&["--format", "csv", "model", "torus-isoms", "--gram", &gram, "--height", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("index,hyperbolic,a_11"));
    assert_eq!(text.lines().count(), 1 + 16);
}
