use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use motifwalk::fixtures::toy_annotations;
use motifwalk::motifgraph::{dedupe_motifs, enumerate_certificates};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motifwalk")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Every command of the pipeline, writing into `dir`.
fn pipeline(dir: &Path) -> Vec<&'static str> {
    ok(dir, &["fixtures", "--out", "fx", "--samples", "40", "--seed", "3"]);
    ok(dir, &["build-graph", "--input", "fx/chains.smi", "--out", "graph.json", "--dot", "graph.dot"]);
    ok(dir, &["extract-walks", "--input", "fx/chains.smi", "--graph", "graph.json", "--out", "walks.json"]);
    ok(
        dir,
        &[
            "train",
            "--walks",
            "walks.json",
            "--graph",
            "graph.json",
            "--epochs",
            "5",
            "--seed",
            "4",
            "--out",
            "params.json",
            "--loss",
            "loss.csv",
        ],
    );
    ok(
        dir,
        &[
            "generate",
            "--params",
            "params.json",
            "--graph",
            "graph.json",
            "-n",
            "20",
            "--seed",
            "9",
            "--out",
            "gen.json",
        ],
    );
    ok(
        dir,
        &["rules", "--params", "params.json", "--graph", "graph.json", "--theta-min", "0.2", "--out", "rules.json"],
    );
    ok(dir, &["evaluate", "--generated", "gen.json", "--training", "fx/chains.smi", "--out", "eval.json"]);
    ok(
        dir,
        &[
            "predict",
            "--walks",
            "walks.json",
            "--graph",
            "graph.json",
            "--properties",
            "fx/chains.csv",
            "--out",
            "pred.json",
        ],
    );
    vec![
        "fx/toy.json",
        "fx/expert.json",
        "fx/chains.smi",
        "fx/chains.csv",
        "graph.json",
        "graph.dot",
        "walks.json",
        "params.json",
        "loss.csv",
        "gen.json",
        "rules.json",
        "eval.json",
        "pred.json",
    ]
}

#[test]
fn every_command_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let files = pipeline(a.path());
    pipeline(b.path());
    for f in files {
        let (x, y) = (fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        assert!(!x.is_empty(), "{f} is empty");
        assert!(x == y, "{f} differs between runs");
    }
    let gen: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("gen.json")).unwrap()).unwrap();
    assert!(gen.as_array().unwrap().iter().all(|r| r["valid"] == true));
    let eval: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("eval.json")).unwrap()).unwrap();
    assert_eq!(eval["total"], 20);
    assert!(eval["rs"].is_null());
}

#[test]
fn job_count_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["fixtures", "--out", "fx", "--samples", "20"]);
    ok(d, &["build-graph", "--input", "fx/chains.smi", "--out", "g.json"]);
    ok(d, &["extract-walks", "--input", "fx/chains.smi", "--graph", "g.json", "--out", "w.json"]);
    ok(d, &["train", "--walks", "w.json", "--graph", "g.json", "--epochs", "2", "--out", "p.json"]);
    for jobs in ["1", "3"] {
        ok(
            d,
            &[
                "--jobs",
                jobs,
                "generate",
                "--params",
                "p.json",
                "--graph",
                "g.json",
                "-n",
                "30",
                "--out",
                &format!("gen{jobs}.json"),
            ],
        );
    }
    assert_eq!(fs::read(d.join("gen1.json")).unwrap(), fs::read(d.join("gen3.json")).unwrap());
}

#[test]
fn build_graph_reports_the_exhaustive_edge_count() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixtures", "--out", "fx", "--samples", "5"]);
    let stdout = ok(dir.path(), &["build-graph", "--input", "fx/toy.json", "--out", "g.json"]);
    let segs: Vec<_> = toy_annotations().iter().map(|a| a.resolve().unwrap()).collect();
    let motifs = dedupe_motifs(&segs).motifs;
    let edges: usize = motifs.iter().flat_map(|u| motifs.iter().map(move |v| enumerate_certificates(u, v).len())).sum();
    assert!(stdout.starts_with(&format!("(|V|, |E|) = ({}, {edges})\n", motifs.len())), "{stdout}");
}

#[test]
fn expert_row_a_has_a_six_node_walk() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["fixtures", "--out", "fx", "--samples", "5"]);
    ok(d, &["build-graph", "--input", "fx/expert.json", "--out", "g.json"]);
    ok(d, &["extract-walks", "--input", "fx/expert.json", "--graph", "g.json", "--out", "w.json"]);
    let w: serde_json::Value = serde_json::from_slice(&fs::read(d.join("w.json")).unwrap()).unwrap();
    assert_eq!(w["walks"][0]["dag"]["nodes"].as_array().unwrap().len(), 6);
    assert!(w["failures"].as_array().unwrap().is_empty());
}

#[test]
fn missing_input_exits_with_io_code_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["build-graph", "--input", "absent.json", "--out", "g.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.json"), "[]").unwrap();
    assert_eq!(run(d, &["build-graph", "--input", "empty.json", "--out", "g.json"]).status.code(), Some(1));
    fs::write(d.join("bad.json"), r#"[{"molecule_id": "x", "smiles": "CCO", "bonds_to_break": [[1, 9]]}]"#).unwrap();
    assert_eq!(run(d, &["build-graph", "--input", "bad.json", "--out", "g.json"]).status.code(), Some(1));
    fs::write(d.join("broken.json"), "{").unwrap();
    assert_eq!(run(d, &["build-graph", "--input", "broken.json", "--out", "g.json"]).status.code(), Some(1));
    assert!(!d.join("g.json").exists());
}
