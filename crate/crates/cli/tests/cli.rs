use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn segeval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segeval")).args(args).output().unwrap()
}

fn stdout_of(args: &[&str]) -> String {
    let out = segeval(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const HUMAN: &str = "segment_id\tsystem_id\tscore\n\
s1\tA\t0\ns1\tB\t-5\ns1\tC\t-1\n\
s2\tA\t-2\ns2\tB\t0\ns2\tC\t-25\n\
s3\tA\t-1\ns3\tB\t-6\ns3\tC\t-1\n";

#[test]
fn oracle_matches_golden_output() {
    let mqm = fixture("toy_mqm.tsv");
    let got = stdout_of(&["oracle", "--mqm", mqm.to_str().unwrap()]);
    let golden = std::fs::read_to_string(fixture("toy_oracle.golden.tsv")).unwrap();
    assert_eq!(got, golden);
}

#[test]
fn oracle_json_carries_the_same_numbers() {
    let mqm = fixture("toy_mqm.tsv");
    let got: serde_json::Value = serde_json::from_str(&stdout_of(&[
        "oracle",
        "--mqm",
        mqm.to_str().unwrap(),
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(got["statistics"], serde_json::json!(["acceq", "pdp"]));
    let first = &got["rows"][0];
    assert_eq!(first["category"], "accuracy/mistranslation");
    assert_eq!(first["count"], 5);
    assert_eq!(first["importance"], 17.0);
    assert_eq!(got["spearman"][1]["statistic"], "pdp");
}

#[test]
fn human_scores_rank_first_against_themselves() {
    let dir = tempfile::tempdir().unwrap();
    let human = write(dir.path(), "human.tsv", HUMAN);
    let sentinel = write(
        dir.path(),
        "sentinel.tsv",
        "segment_id\tsystem_id\tscore\ns1\tA\t3\ns1\tB\t3\ns1\tC\t3\ns2\tA\t1\ns2\tB\t1\ns2\tC\t1\ns3\tA\t9\ns3\tB\t9\ns3\tC\t9\n",
    );
    let out = stdout_of(&[
        "evaluate",
        "--human",
        &human,
        "--metric",
        &format!("sentinel={sentinel}"),
        "--metric",
        &format!("human={human}"),
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "metric\tsegwise\tsegwise_rank\tglobal\tglobal_rank\tacceq\tacceq_rank\tpdp\tpdp_rank"
    );
    assert_eq!(lines[1], "human\t1.000\t1\t1.000\t1\t1.000\t1\t1.000\t1");
    let sentinel_row: Vec<&str> = lines[2].split('\t').collect();
    assert_eq!(sentinel_row[0], "sentinel");
    assert_eq!(sentinel_row[1], "0.000");
    assert_eq!(&sentinel_row[7..], ["0.000", "2"]);
}

#[test]
fn evaluate_json_has_details() {
    let dir = tempfile::tempdir().unwrap();
    let human = write(dir.path(), "human.tsv", HUMAN);
    let out = stdout_of(&[
        "evaluate",
        "--human",
        &human,
        "--metric",
        &format!("h={human}"),
        "--stats",
        "acceq",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let score = &v["rows"][0]["scores"][0];
    assert_eq!(score["value"], 1.0);
    assert_eq!(score["detail"]["kind"], "acc_eq");
    assert_eq!(score["detail"]["pairs"], 9);
}

#[test]
fn zero_noise_rows_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let human = write(dir.path(), "human.tsv", HUMAN);
    let out = stdout_of(&[
        "noise",
        "--human",
        &human,
        "--kind",
        "segment",
        "--levels",
        "0",
        "--replicates",
        "4",
    ]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("statistic,kind,level,sdp,replicates,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1..], ["segment", "0", "0", "4", "0"], "{row}");
    }
}

#[test]
fn negative_outlier_levels_parse() {
    let dir = tempfile::tempdir().unwrap();
    let human = write(dir.path(), "human.tsv", HUMAN);
    let out = stdout_of(&[
        "noise",
        "--human",
        &human,
        "--kind",
        "outlier",
        "--levels",
        "-1000,-10",
        "--stats",
        "pdp",
        "--replicates",
        "3",
    ]);
    assert_eq!(out.lines().count(), 3);
    assert!(out.contains("pdp,outlier,-1000,"));
}

#[test]
fn synth_is_reproducible() {
    let args = ["synth", "--systems", "5", "--segments", "7", "--seed", "42"];
    let a = stdout_of(&args);
    assert_eq!(a, stdout_of(&args));
    assert_ne!(
        a,
        stdout_of(&["synth", "--systems", "5", "--segments", "7", "--seed", "43"])
    );
    assert!(a.starts_with("# synthetic"));
    assert_eq!(a.lines().count(), 2 + 35);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let human = write(dir.path(), "human.tsv", HUMAN);
    let missing = dir.path().join("missing.tsv");

    let out = segeval(&[
        "evaluate",
        "--human",
        missing.to_str().unwrap(),
        "--metric",
        &format!("h={human}"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.tsv"));

    let bad = write(dir.path(), "bad.tsv", "segment_id\tsystem_id\tscore\ns1\tA\toops\n");
    let out = segeval(&["evaluate", "--human", &human, "--metric", &format!("b={bad}")]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.tsv") && stderr.contains("line 2"), "{stderr}");

    assert_eq!(segeval(&["evaluate", "--nope"]).status.code(), Some(1));
    assert_eq!(
        segeval(&["noise", "--human", &human, "--kind", "gauss", "--levels", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        segeval(&["noise", "--human", &human, "--kind", "random", "--levels", "5,1"])
            .status
            .code(),
        Some(1)
    );

    // one system: no segment has a pair to correlate
    let lonely = write(
        dir.path(),
        "lonely.tsv",
        "segment_id\tsystem_id\tscore\ns1\tA\t0\ns2\tA\t-1\n",
    );
    let out = segeval(&[
        "evaluate",
        "--human",
        &lonely,
        "--metric",
        &format!("l={lonely}"),
        "--stats",
        "segwise",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let empty = write(dir.path(), "empty.tsv", "");
    let out = segeval(&["oracle", "--mqm", &empty]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("y.tsv");
    let out = segeval(&[
        "synth",
        "--systems",
        "2",
        "--segments",
        "2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(written, stdout_of(&["synth", "--systems", "2", "--segments", "2"]));
}
