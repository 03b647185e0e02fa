#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evosplit_core::MultiLabelDataset;

pub const TINY4: &str = "0\n0 1\n1 2\n0 1 2\n";

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_evosplit"));
    cmd.env_remove("EVOSPLIT_THREADS");
    cmd
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

/// Writes `d` in the sparse-text format and returns the file path.
pub fn write_sparse(dir: &Path, name: &str, d: &MultiLabelDataset) -> PathBuf {
    let mut text = format!("#q {}\n", d.num_labels());
    for row in d.rows() {
        let tokens: Vec<String> = row
            .iter()
            .map(|&(l, c)| if c == 1 { l.to_string() } else { format!("{l}:{c}") })
            .collect();
        text.push_str(&tokens.join(" "));
        text.push('\n');
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}
