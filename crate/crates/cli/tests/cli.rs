use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qvf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvf"))
        .args(args)
        .env_remove("QVF_CHECKPOINT_DIR")
        .output()
        .expect("qvf runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn field_check_exit_codes() {
    let o = qvf(&["field-check", "--q", "2", "--q", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches(": pass").count(), 2);
    assert_eq!(qvf(&["field-check", "--q", "12"]).status.code(), Some(2));
}

#[test]
fn example_audit_and_perturbation() {
    let o = qvf(&["check-paper-example"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for p in ["(1,0,0)", "(0,1,0)", "(0,0,1)", "(1,6,2)"] {
        assert!(out.contains(&format!("zero {p}")), "{out}");
    }
    assert!(out.contains("zeros=4 singular=4 nonsingular=0"));
    let o = qvf(&["check-paper-example", "--perturb", "0 3 2 : 3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn count_zeros_reads_form_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sharp.txt");
    fs::write(&f, qvf_core::forms::sharp_f7_example().to_text()).unwrap();
    let o = qvf(&["count-zeros", "--form", path(&f), "--witnesses"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["total"], 4);
    assert_eq!(v["nonsingular"], 0);
    assert_eq!(v["witnesses"].as_array().unwrap().len(), 4);
    fs::write(&f, "q=7 n=2 d=5\n5 1 : 1\n").unwrap();
    assert_eq!(qvf(&["count-zeros", "--form", path(&f)]).status.code(), Some(2));
}

#[test]
fn lift_command() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("diag.txt");
    fs::write(&f, "n=3 d=5\n5 0 0 : 1\n0 5 0 : 1\n0 0 5 : 9\n").unwrap();
    let o = qvf(&["lift", "--p", "11", "--form", path(&f), "--point", "1,10,0", "--prec", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("verified 11^8 | F(x)"), "{out}");
    assert_eq!(out.matches("step ").count(), 3);
    let o = qvf(&["lift", "--p", "11", "--form", path(&f), "--point", "1,1,0", "--prec", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ternary_shards_resume_and_merge() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let whole = d.join("whole.db");
    let o = qvf(&["verify-ternary", "--q", "7", "--shape", "t1", "--jobs", "1", "--out", path(&whole)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["claim"], "lemma8/q=7");

    let mut parts = Vec::new();
    for i in 0..3 {
        let p = d.join(format!("part{i}.db"));
        let shard = format!("{i}/3");
        let o = qvf(&["verify-ternary", "--q", "7", "--shape", "t1", "--shard", &shard, "--out", path(&p)]);
        assert_ne!(o.status.code(), Some(2));
        parts.push(p);
    }
    let merged = d.join("merged.db");
    let mut args = vec!["merge", "--out", path(&merged)];
    args.extend(parts.iter().map(|p| path(p)));
    assert_eq!(qvf(&args).status.code(), Some(0));
    assert_eq!(fs::read(&merged).unwrap(), fs::read(&whole).unwrap());

    let ckpt = d.join("ckpt");
    let resumed = d.join("resumed.db");
    let run = || {
        qvf(&[
            "verify-ternary",
            "--q",
            "7",
            "--shape",
            "t1",
            "--shards",
            "4",
            "--resume",
            path(&ckpt),
            "--out",
            path(&resumed),
        ])
    };
    let first = run();
    assert_eq!(first.status.code(), Some(0));
    let bytes = fs::read(&resumed).unwrap();
    let second = run();
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&second.stderr).matches("resumed").count(), 4);
    assert_eq!(fs::read(&resumed).unwrap(), bytes);
    assert_eq!(bytes, fs::read(&whole).unwrap());

    let manifest = d.join("resumed.db.manifest.json");
    assert_eq!(qvf(&["verify-manifest", path(&manifest)]).status.code(), Some(0));
    fs::write(&resumed, "tampered").unwrap();
    assert_eq!(qvf(&["verify-manifest", path(&manifest)]).status.code(), Some(1));

    let other = d.join("q8.db");
    let o = qvf(&["verify-ternary", "--q", "8", "--shape", "t1", "--out", path(&other)]);
    assert_eq!(o.status.code(), Some(0));
    let bad = d.join("bad.db");
    assert_eq!(qvf(&["merge", "--out", path(&bad), path(&whole), path(&other)]).status.code(), Some(2));
}

#[test]
fn ternary_both_shapes_write_two_databases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q11.db");
    let o = qvf(&["verify-ternary", "--q", "11", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], "pass");
    for shape in ["t1", "t2"] {
        let db = fs::read_to_string(dir.path().join(format!("q11-{shape}.db"))).unwrap();
        for line in db.lines().filter(|l| l.starts_with("assignment=")) {
            assert!(line.contains(" zeros=3 "), "{line}");
        }
    }
}

#[test]
fn quaternary_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q13g3.json");
    let o = qvf(&["verify-quaternary", "--q", "13", "--shape", "g3", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["survivor_count"], 0);
    assert_eq!(r["verdict"], "pass");

    let o = qvf(&["verify-quaternary", "--q", "5", "--shape", "g1", "--max-survivors", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["survivor_count"], 1);
    assert_eq!(r["survivors"][0]["affine_confirmed"], true);
    assert!(r["survivors"][0]["form"].as_str().unwrap().starts_with("q=5"));

    assert_eq!(qvf(&["verify-quaternary", "--q", "4", "--shape", "g1"]).status.code(), Some(2));
    assert_eq!(qvf(&["verify-quaternary", "--q", "13", "--shape", "g5"]).status.code(), Some(2));
}

#[test]
fn quaternary_shard_reports_merge() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut parts = Vec::new();
    for i in 0..2 {
        let p = d.join(format!("part{i}.json"));
        let shard = format!("{i}/2");
        let o = qvf(&["verify-quaternary", "--q", "13", "--shape", "g3", "--shard", &shard, "--out", path(&p)]);
        assert_eq!(o.status.code(), Some(0));
        parts.push(p);
    }
    let merged = d.join("merged.json");
    let o = qvf(&["merge", "--out", path(&merged), path(&parts[0]), path(&parts[1])]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&merged).unwrap()).unwrap();
    assert_eq!(r["complete"], true);
    assert_eq!(r["shards"], "2/2");
    let o = qvf(&["merge", "--out", path(&merged), path(&parts[0]), path(&parts[0])]);
    assert_eq!(o.status.code(), Some(2));
}
