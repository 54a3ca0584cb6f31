use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn dialdep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialdep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dialdep(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn code(args: &[&str]) -> i32 {
    dialdep(args).status.code().unwrap()
}

#[test]
fn validate_prints_ok() {
    assert_eq!(ok(&["validate", &fixture("mini.cddt")]), "OK\n");
    assert_eq!(
        ok(&["validate", &fixture("mini.cddt"), &fixture("algorithm1.cddt")]),
        "OK\n"
    );
}

#[test]
fn data_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cddt");
    std::fs::write(&bad, "# dialog = d\n# utt = 0\n# speaker = A\n1\ta\t1\troot\t_\t_\n").unwrap();
    let out = dialdep(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.cddt") && msg.contains("`d`"), "{msg}");

    std::fs::write(&bad, "# dialog = d\n# utt = 0\n# speaker = A\n1\ta\t0\tnope\t_\t_\n").unwrap();
    let out = dialdep(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    assert_eq!(code(&["validate", "/nonexistent/file.cddt"]), 2);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["validate"]), 1);
    assert_eq!(code(&["eval", "--pred", &fixture("mini.cddt")]), 1);
    assert_eq!(code(&["--k", "0", "validate", &fixture("mini.cddt")]), 1);
    assert_eq!(
        code(&["filter", "--scores", &fixture("algorithm1.scores.s.jsonl"), "--iterations", "3"]),
        1
    );
    let a = fixture("algorithm1.cddt");
    assert_eq!(code(&["match", "--pred", &a, "--gold", &a, "--syn-label", "attr"]), 1);
    assert_eq!(code(&["match", "--pred", &a, "--gold", &a, "--syn-label", "nope"]), 1);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn self_evaluation_is_perfect() {
    let p = fixture("algorithm1.gold.cddt");
    let v = json(&["eval", "--pred", &p, "--gold", &p]);
    assert_eq!(v["inner"]["las"], 1.0);
    assert_eq!(v["inter"]["las"], 1.0);
    assert_eq!(v["overall"]["uas"], 1.0);
    assert!(v["by_label"].as_object().unwrap().is_empty());
    let v = json(&["eval", "--pred", &p, "--gold", &p, "--by-label"]);
    assert_eq!(v["by_label"]["cond"]["arcs"], 1);
}

#[test]
fn post_transform_improves_inter_las() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("post.cddt");
    let pred = fixture("algorithm1.cddt");
    let gold = fixture("algorithm1.gold.cddt");
    ok(&["transform", &pred, "--mode", "post", "--out", out.to_str().unwrap()]);
    let before = json(&["eval", "--pred", &pred, "--gold", &gold]);
    let after = json(&["eval", "--pred", out.to_str().unwrap(), "--gold", &gold]);
    let las = |v: &Value| v["inter"]["las"].as_f64().unwrap();
    assert!(las(&after) > las(&before), "{} -> {}", las(&before), las(&after));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(&gold).unwrap());
}

#[test]
fn pre_transform_keeps_link_heads() {
    let text = ok(&["transform", &fixture("algorithm1.cddt"), "--mode", "pre"]);
    assert!(text.contains("4\t可以\t0\troot\t0:1\telbr"), "{text}");
    assert!(text.contains("6\t去\t0\troot\t1:2\telbr"), "{text}");
}

#[test]
fn transform_log_lists_events() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    ok(&["transform", &fixture("algorithm1.cddt"), "--log", log.to_str().unwrap()]);
    let line: Value = serde_json::from_str(std::fs::read_to_string(&log).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(line["dialogue"], "fig1");
    assert_eq!(line["utterances"][0]["events"][0]["rule"], "greeting");
    assert_eq!(line["utterances"][0]["events"][0]["tail"], 4);
}

#[test]
fn outputs_are_deterministic_across_job_counts() {
    let a = fixture("algorithm1.cddt");
    let one = ok(&["--jobs", "1", "transform", &a]);
    let four = ok(&["--jobs", "4", "transform", &a]);
    assert_eq!(one, four);
    assert_eq!(ok(&["transform", &a]), one);
    let s1 = ok(&["--jobs", "1", "sweep", "--synthetic", "60"]);
    let s4 = ok(&["--jobs", "4", "sweep", "--synthetic", "60"]);
    assert_eq!(s1, s4);
}

#[test]
fn filter_and_merge_fixture_scores() {
    let dir = tempfile::tempdir().unwrap();
    let kept = dir.path().join("kept.cddt");
    let v = json(&[
        "filter",
        "--scores",
        &fixture("algorithm1.scores.s.jsonl"),
        "--pred",
        &fixture("algorithm1.cddt"),
        "--out",
        kept.to_str().unwrap(),
    ]);
    assert_eq!(v["total"], 3);
    assert_eq!(v["kept"], 2);
    assert_eq!(v["samples"][0]["view"], "parser-s");
    assert_eq!(ok(&["validate", kept.to_str().unwrap()]), "OK\n");
    assert!(std::fs::read_to_string(&kept).unwrap().contains("# dialog = fig1#2"));

    let v = json(&["--epsilon", "0.999", "filter", "--scores", &fixture("algorithm1.scores.s.jsonl")]);
    assert_eq!(v["kept"], 0);

    let v = json(&[
        "merge",
        "--scores-s",
        &fixture("algorithm1.scores.s.jsonl"),
        "--scores-t",
        &fixture("algorithm1.scores.t.jsonl"),
    ]);
    assert_eq!(v["kept"]["parser-s"], 2);
    assert_eq!(v["kept"]["parser-t"], 2);
    assert_eq!(v["merged"], 3);
    let views: Vec<&str> = v["samples"].as_array().unwrap().iter().map(|s| s["view"].as_str().unwrap()).collect();
    assert_eq!(views, ["parser-s", "parser-t", "parser-s"]);
}

#[test]
fn config_file_sets_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "epsilon = 0.999\n").unwrap();
    let scores = fixture("algorithm1.scores.s.jsonl");
    let c = cfg.to_str().unwrap();
    assert_eq!(json(&["--config", c, "filter", "--scores", &scores])["kept"], 0);
    assert_eq!(json(&["--config", c, "--epsilon", "0.5", "filter", "--scores", &scores])["kept"], 3);
    std::fs::write(&cfg, "epsilom = 1\n").unwrap();
    assert_eq!(code(&["--config", c, "validate", &fixture("mini.cddt")]), 1);
}

#[test]
fn sweep_is_monotone_and_seeded() {
    let v = json(&["sweep", "--synthetic", "80", "--steps", "20"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    for w in rows.windows(2) {
        assert!(w[1]["merged"].as_u64() <= w[0]["merged"].as_u64());
        assert!(w[1]["kept"][0].as_u64() <= w[0]["kept"][0].as_u64());
    }
    assert_eq!(ok(&["--seed", "7", "sweep", "--synthetic", "40"]), ok(&["--seed", "7", "sweep", "--synthetic", "40"]));
    assert_ne!(ok(&["--seed", "7", "sweep", "--synthetic", "40"]), ok(&["--seed", "8", "sweep", "--synthetic", "40"]));

    let v = json(&["sweep", "--scores-s", &fixture("algorithm1.scores.s.jsonl"), "--steps", "3"]);
    let kept: Vec<u64> = v["rows"].as_array().unwrap().iter().map(|r| r["kept"][0].as_u64().unwrap()).collect();
    assert_eq!(kept, [3, 3, 0]);
}

#[test]
fn stats_counts_both_layers() {
    let v = json(&["stats", &fixture("mini.cddt")]);
    assert_eq!(v["dialogues"], 2);
    assert_eq!(v["utterances"], 4);
    assert_eq!(v["tokens"], 11);
    assert_eq!(v["labels"]["root"], 4);
    assert_eq!(v["inter"], 2);
    assert_eq!(v["inner"], 11);
    assert_eq!(v["labels"].as_object().unwrap().len(), 40);
}

#[test]
fn segment_and_detect() {
    let lines = ok(&["segment", &fixture("algorithm1.cddt")]);
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["edus"], serde_json::json!([[1, 2], [3, 6]]));
    assert_eq!(lines.lines().count(), 3);

    let v = json(&["segment", &fixture("algorithm1.gold.cddt"), "--eval"]);
    assert!(v["overall"].as_f64().is_some());

    let sigs: Vec<Value> = ok(&["detect-signals", &fixture("algorithm1.cddt")])
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let names: Vec<&Value> = sigs.iter().map(|s| &s["signal"]).collect();
    assert_eq!(
        names,
        [
            &Value::from("greeting"),
            &Value::Null,
            &Value::from("attr"),
            &Value::Null,
            &Value::from("cond"),
            &Value::Null,
            &Value::from("cause")
        ]
    );
    let with_dist: Vec<Value> = ok(&[
        "detect-signals",
        &fixture("algorithm1.cddt"),
        "--distributions",
        &fixture("algorithm1.signals.jsonl"),
    ])
    .lines()
    .map(|l| serde_json::from_str(l).unwrap())
    .collect();
    assert_eq!(with_dist[3]["signal"], "temp");
}

#[test]
fn custom_lexicon() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("lex.tsv");
    std::fs::write(&lex, "想\tenbm\n").unwrap();
    let sigs = ok(&["detect-signals", &fixture("algorithm1.cddt"), "--lexicon", lex.to_str().unwrap()]);
    let second: Value = serde_json::from_str(sigs.lines().nth(1).unwrap()).unwrap();
    assert_eq!(second["signal"], "enbm");
    std::fs::write(&lex, "想\tnot-a-signal\n").unwrap();
    assert_eq!(code(&["detect-signals", &fixture("algorithm1.cddt"), "--lexicon", lex.to_str().unwrap()]), 2);
}

#[test]
fn matching_and_signal_matching() {
    let pred = fixture("algorithm1.cddt");
    let gold = fixture("algorithm1.gold.cddt");
    let v = json(&["match", "--pred", &pred, "--gold", &gold, "--syn-label", "adv", "--inter-label", "cause"]);
    assert_eq!(v["score"], 1.0);
    let v = json(&["match", "--pred", &pred, "--gold", &gold, "--syn-label", "adv"]);
    assert_eq!(v["top"][0]["label"], "cause");
    let v = json(&["match", "--pred", &pred, "--gold", &gold, "--syn-label", "adv", "--inter-label", "bckg"]);
    assert!(v["score"].is_null());

    let v = json(&["signal-match", &gold]);
    assert_eq!(v["cond"]["accuracy"], 1.0);
    assert_eq!(v["cause"]["accuracy"], 1.0);
    assert!(v["bckg"]["accuracy"].is_null());
}

#[test]
fn render_one_dialogue() {
    let text = ok(&["render", &fixture("mini.cddt"), "--dialogue", "m2"]);
    assert_eq!(text, "m2\n└─ 0:1 好的 (root)\n");
    assert_eq!(code(&["render", &fixture("mini.cddt"), "--dialogue", "zz"]), 2);
}
