mod common;

use common::{code, json, run, stderr, write, write_sparse, TINY4};
use evosplit_core::synthetic::{generate, SyntheticConfig};
use tempfile::TempDir;

fn tiny4_dir() -> TempDir {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "tiny4.txt", TINY4);
    dir
}

fn synthetic_dir(m: usize) -> TempDir {
    let dir = TempDir::new().unwrap();
    write_sparse(
        dir.path(),
        "syn.txt",
        &generate(&SyntheticConfig::imbalanced(m, 12, 10, 2024)),
    );
    dir
}

#[test]
fn analyze_tiny4() {
    let dir = tiny4_dir();
    let out = run(
        dir.path(),
        &["analyze", "--input", "tiny4.txt", "--format", "sparse-text"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["card"], 2.0);
    assert_eq!(v["div"], 4);
    assert_eq!(v["m"], 4);
    assert!(v.get("tcs_raw").is_some() && v.get("max_frequency2").is_some());
}

#[test]
fn analyze_reads_jsonl() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "d.jsonl",
        "{\"label_names\":[\"a\",\"b\"]}\n{\"labels\":{\"a\":1}}\n{\"labels\":{\"a\":1,\"b\":2},\"id\":\"x\"}\n",
    );
    let out = run(dir.path(), &["analyze", "--input", "d.jsonl"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["card"], 2.0);
}

#[test]
fn input_errors_exit_2() {
    let dir = tiny4_dir();
    let out = run(dir.path(), &["analyze", "--input", "missing.txt"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing.txt"));

    let out = run(dir.path(), &["analyze", "--input", "tiny4.txt", "--format", "jsonl"]);
    assert_eq!(code(&out), 2);

    write(dir.path(), "bad.txt", "0 1\n2:x\n");
    let out = run(dir.path(), &["analyze", "--input", "bad.txt"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn evaluate_tiny4_fixture() {
    let dir = tiny4_dir();
    write(dir.path(), "a.csv", "example_index,fold\n0,0\n1,1\n2,0\n3,1\n");
    let out = run(
        dir.path(),
        &["evaluate", "--input", "tiny4.txt", "--assignment", "a.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["ld"], 1.0);
    assert_eq!(v["lpd"], 0.5);
    assert_eq!(v["flz"], 0);
}

#[test]
fn assignment_mismatch_exits_5() {
    let dir = tiny4_dir();
    write(dir.path(), "nine.csv", "example_index,fold\n0,0\n1,9\n2,0\n3,1\n");
    let out = run(
        dir.path(),
        &[
            "evaluate",
            "--input",
            "tiny4.txt",
            "--assignment",
            "nine.csv",
            "--k",
            "2",
        ],
    );
    assert_eq!(code(&out), 5);

    write(dir.path(), "short.csv", "example_index,fold\n0,0\n1,1\n2,0\n");
    let out = run(
        dir.path(),
        &["evaluate", "--input", "tiny4.txt", "--assignment", "short.csv"],
    );
    assert_eq!(code(&out), 5);
}

#[test]
fn config_errors_exit_3() {
    let dir = tiny4_dir();
    let cases: &[&[&str]] = &[
        &[
            "split",
            "--input",
            "tiny4.txt",
            "--targets",
            "4,0",
            "--method",
            "random",
        ],
        &[
            "split",
            "--input",
            "tiny4.txt",
            "--k",
            "2",
            "--method",
            "is",
            "--runs",
            "2",
        ],
        &[
            "split",
            "--input",
            "tiny4.txt",
            "--k",
            "2",
            "--method",
            "ea-ld",
            "--out-front",
            "f.json",
        ],
        &[
            "split",
            "--input",
            "tiny4.txt",
            "--proportions",
            "0.5,0.6",
            "--method",
            "random",
        ],
        &[
            "split",
            "--input",
            "tiny4.txt",
            "--k",
            "3",
            "--targets",
            "2,2",
            "--method",
            "random",
        ],
        &["split", "--input", "tiny4.txt", "--method", "random"],
        &["split", "--input", "tiny4.txt", "--k", "2", "--method", "nope"],
        &["compare", "--input", "tiny4.txt", "--k", "2", "--method", "random"],
    ];
    for args in cases {
        let out = run(dir.path(), args);
        assert_eq!(code(&out), 3, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn oracle_size_limit_exits_4() {
    let dir = synthetic_dir(60);
    let out = run(
        dir.path(),
        &[
            "split", "--input", "syn.txt", "--k", "3", "--method", "random", "--oracle",
        ],
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn split_with_oracle_on_tiny4() {
    let dir = tiny4_dir();
    let out = run(
        dir.path(),
        &[
            "split",
            "--input",
            "tiny4.txt",
            "--k",
            "2",
            "--method",
            "ea-ld",
            "--oracle",
            "--out-assignment",
            "a.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["oracle"]["optimum_value"], v["ld_prime"]);
    assert_eq!(v["oracle"]["enumerated"], 6);
    assert_eq!(v["runs"], 5);
    assert_eq!(v["config"]["ea"]["pop_size"], 50);
    assert!(v["runtime_ms"].is_null());
}

#[test]
fn random_split_report_has_zero_ed() {
    let dir = synthetic_dir(100);
    let out = run(
        dir.path(),
        &[
            "split", "--input", "syn.txt", "--k", "7", "--method", "random", "--timing",
        ],
    );
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["ed"], 0.0);
    assert!(v["runs"].is_null() && v["generations"].is_null());
    assert!(v["runtime_ms"].is_u64());
}

#[test]
fn stratification_exits_zero_even_when_sizes_drift() {
    let dir = synthetic_dir(100);
    for method in ["is", "sois"] {
        let out = run(
            dir.path(),
            &[
                "split",
                "--input",
                "syn.txt",
                "--proportions",
                "0.7,0.2,0.1",
                "--method",
                method,
            ],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(json(&out)["ed"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn ea_split_is_reproducible() {
    let dir = synthetic_dir(150);
    let args = [
        "split",
        "--input",
        "syn.txt",
        "--method",
        "ea-ld",
        "--k",
        "10",
        "--seed",
        "7",
        "--runs",
        "5",
        "--out-assignment",
        "a.csv",
        "--out-report",
        "r.json",
    ];
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let (a1, r1) = (read("a.csv"), read("r.json"));
    assert_eq!(code(&run(dir.path(), &args)), 0);
    assert_eq!(a1, read("a.csv"));
    assert_eq!(r1, read("r.json"));
}

#[test]
fn emitted_reports_revalidate() {
    let dir = synthetic_dir(120);
    for method in ["random", "is", "sois", "ea-ld", "ea-lpd", "moea"] {
        let mut args = vec![
            "split",
            "--input",
            "syn.txt",
            "--k",
            "4",
            "--method",
            method,
            "--out-assignment",
            "a.csv",
        ];
        if method == "moea" {
            args.extend(["--out-front", "front.json", "--constrained"]);
        }
        let split = run(dir.path(), &args);
        assert_eq!(code(&split), 0, "{method}: {}", stderr(&split));
        let report = json(&split);
        let eval = run(
            dir.path(),
            &["evaluate", "--input", "syn.txt", "--assignment", "a.csv", "--k", "4"],
        );
        assert_eq!(code(&eval), 0);
        let again = json(&eval);
        for key in [
            "ld",
            "ld_prime",
            "lpd",
            "ed",
            "fz",
            "flz",
            "fold_sizes",
            "constrained_feasible",
        ] {
            assert_eq!(report[key], again[key], "{method} {key}");
        }
        assert!(std::fs::read_to_string(dir.path().join("a.csv"))
            .unwrap()
            .starts_with("example_index,fold\n"));
    }
    let front: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("front.json")).unwrap()).unwrap();
    assert!(front
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["ld_prime"].is_f64() && p["lpd"].is_f64()));
}

#[test]
fn compare_table_and_json() {
    let dir = synthetic_dir(200);
    let out = run(
        dir.path(),
        &[
            "compare",
            "--input",
            "syn.txt",
            "--k",
            "5",
            "--method",
            "random,ea-ld",
            "--out-report",
            "c.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("random") && lines[2].starts_with("ea-ld"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[1]["ld"].as_f64() < rows[0]["ld"].as_f64());
    assert_eq!(v["best"]["ld"], "ea-ld");
    assert!(rows.iter().all(|r| r["status"] == "ok"));
}

#[test]
fn compare_on_identical_examples_scores_zero() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.txt", "0\n0\n0\n0\n");
    let out = run(
        dir.path(),
        &[
            "compare",
            "--input",
            "a.txt",
            "--k",
            "2",
            "--method",
            "random,is,sois,ea-ld,ea-lpd,moea",
            "--out-report",
            "c.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["ld"] == 0.0));
}

#[test]
fn help_exits_zero() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
    assert_eq!(code(&run(dir.path(), &["split", "--help"])), 0);
}
