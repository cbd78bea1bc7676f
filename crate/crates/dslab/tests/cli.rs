use std::path::Path;
use std::process::{Command, Output};

fn dslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(args)
        .env_remove("DSLAB_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

fn error_record(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn measure_row() {
    let o = dslab(&["measure", "--q", "5", "--psi-const", "1/4"]);
    assert!(o.status.success());
    assert_eq!(last_line(&o), "5,2/5");
    assert!(stdout(&o).starts_with("# config: {\"command\":\"measure\""));
}

#[test]
fn series_row() {
    let o = dslab(&["series", "--family", "khintchine", "--c", "1/2", "--s", "0", "--Q", "3"]);
    assert!(o.status.success());
    assert_eq!(last_line(&o), "11/12,53/72");
}

#[test]
fn empty_range_is_exit_two() {
    let o = dslab(&["variance", "--psi-const", "1/2", "--X", "5", "--Y", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_record(&o);
    assert_eq!(e["error"]["kind"], "usage");
    assert!(o.stdout.is_empty());
}

#[test]
fn domain_error_is_exit_one() {
    let o = dslab(&["variance", "--psi-const", "3/4", "--X", "2", "--Y", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"]["kind"], "domain");
}

#[test]
fn unknown_flag_rejected() {
    let o = dslab(&["measure", "--q", "5", "--psi-const", "1/4", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"]["kind"], "usage");
    let o = dslab(&["measure", "--q", "5", "--psi-const", "0.25"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_everything() {
    let o = dslab(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for cmd in dslab::config::COMMANDS {
        assert!(text.contains(cmd), "missing {cmd} in help");
        let sub = dslab(&[cmd, "--help"]);
        assert!(sub.status.success(), "{cmd} --help failed");
    }
    let graph = stdout(&dslab(&["graph", "--help"]));
    for flag in ["--t", "--C", "--j", "--threshold", "--epsilon", "--squarefree", "--psi-file"] {
        assert!(graph.contains(flag), "graph help lacks {flag}");
    }
}

#[test]
fn replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["variance", "--psi-const", "1/3", "--X", "2", "--Y", "12"],
        vec!["orbit", "--alpha", "random", "--seed", "4", "--count", "3", "--family", "khintchine", "--c", "1/2", "--Q", "2000"],
        vec!["gcdsum", "--family", "khintchine", "--c", "1/2", "--s", "1", "--Q", "40"],
        vec!["montecarlo", "--psi-const", "1/10", "--X", "2", "--Y", "20", "--samples", "500", "--seed", "9"],
        vec!["collapse", "--family", "chain", "--q0", "2", "--m", "6", "--scale", "1/2", "--compare-primes"],
    ];
    for (n, args) in cases.iter().enumerate() {
        for fmt in ["csv", "json"] {
            let a = dir.path().join(format!("a{n}.{fmt}"));
            let b = dir.path().join(format!("b{n}.{fmt}"));
            let mut first: Vec<&str> = args.clone();
            first.extend(["--format", fmt, "--output", p(&a)]);
            assert!(dslab(&first).status.success(), "{first:?}");
            let o = dslab(&["--config", p(&a), "--output", p(&b)]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{args:?} {fmt}");
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    for args in [
        vec!["chung-erdos", "--psi-const", "1/4", "--X", "2", "--Y", "40"],
        vec!["montecarlo", "--psi-const", "1/8", "--X", "2", "--Y", "30", "--samples", "3000", "--seed", "1"],
        vec!["overlap", "--psi-const", "1/4", "--X", "2", "--Y", "15", "--squarefree"],
    ] {
        let mut one = args.clone();
        one.extend(["--threads", "1"]);
        let mut four = args.clone();
        four.extend(["--threads", "4"]);
        assert_eq!(dslab(&one).stdout, dslab(&four).stdout, "{args:?}");
    }
}

#[test]
fn precision_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(["gcdsum", "--psi-const", "1/2", "--Q", "5"])
        .env("DSLAB_PRECISION", "64")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"precision\":64"));
    let bad = Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(["gcdsum", "--psi-const", "1/2", "--Q", "5"])
        .env("DSLAB_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn psi_file_and_side_files() {
    let dir = tempfile::tempdir().unwrap();
    let psi = dir.path().join("psi.json");
    std::fs::write(&psi, r#"{"kind": "explicit", "support": [[2, "1/6"], [3, "1/6"], [6, "1/4"]], "family": null}"#)
        .unwrap();
    let ivs = dir.path().join("iv.csv");
    let o = dslab(&["measure", "--psi-file", p(&psi), "--q", "3", "--intervals", p(&ivs)]);
    assert!(o.status.success());
    assert_eq!(last_line(&o), "3,2/9");
    assert_eq!(
        std::fs::read_to_string(&ivs).unwrap(),
        "left_num,left_den,right_num,right_den\n5,18,7,18\n11,18,13,18\n"
    );
    let dump = dir.path().join("g.json");
    let o = dslab(&["graph", "--psi-file", p(&psi), "--squarefree", "--t", "1", "--C", "0", "--dump", p(&dump)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(g["t"], "1/1");
    assert_eq!(g["V"][0], serde_json::json!([2, "1/6"]));
    assert!(g["edges"].is_array());
}

#[test]
fn overlap_squarefree_rejection() {
    let o = dslab(&["overlap", "--psi-const", "1/4", "--q", "4", "--r", "2", "--squarefree"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dslab(&["overlap", "--psi-const", "1/4", "--q", "4", "--r", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().nth(2).unwrap(), "q,r,exact_overlap,bound,ratio");
}

#[test]
fn compress_audit_header() {
    let o = dslab(&[
        "compress", "--psi-const", "1/4", "--restrict", "list:2,3,5,6,10,15", "--squarefree", "--t", "1", "--C", "0",
        "--p", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("\np,i,j,lhs_num/den,rhs_num/den,equal\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("2,")).count(), 20);
}
