use std::process::{Command, Output};

fn knitvqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knitvqa"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn graph_then_exact_partition() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    stdout(&knitvqa(&[
        "gen-graph",
        "--n",
        "8",
        "--d",
        "3",
        "--seed",
        "2",
        "--output",
        graph.to_str().unwrap(),
    ]));
    assert_eq!(
        std::fs::read_to_string(&graph)
            .unwrap()
            .lines()
            .filter(|l| !l.trim().is_empty())
            .count(),
        12
    );
    let exact: serde_json::Value = serde_json::from_str(&stdout(&knitvqa(&[
        "partition",
        "--graph",
        graph.to_str().unwrap(),
        "-m",
        "4",
        "--exact",
    ])))
    .unwrap();
    let heur: serde_json::Value = serde_json::from_str(&stdout(&knitvqa(&[
        "partition",
        "--graph",
        graph.to_str().unwrap(),
        "-m",
        "4",
        "--seed",
        "0",
    ])))
    .unwrap();
    assert_eq!(exact["cut_weight"], heur["cut_weight"]);
}

#[test]
fn bench_output_is_reproducible() {
    let args = [
        "bench", "--study", "search", "--n", "6", "-m", "3", "--layers", "1", "--seeds", "0,1",
    ];
    let strip = |s: String| {
        s.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let a = strip(stdout(&knitvqa(&args)));
    assert_eq!(a.len(), 3);
    assert_eq!(a, strip(stdout(&knitvqa(&args))));
}

#[test]
fn bad_input_fails_cleanly() {
    let out = knitvqa(&[
        "partition",
        "--graph",
        "/nonexistent/graph.txt",
        "-m",
        "2",
        "--seed",
        "0",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = knitvqa(&["gen-graph", "--n", "5", "--d", "3", "--seed", "0"]);
    assert!(!out.status.success());
}
