#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden(name: &str) -> PathBuf {
    fixtures().join("golden").join(name)
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_procurate"))
}

/// Input flags pointing at the shipped fixture.
pub fn fixture_args(out_dir: &Path) -> Vec<String> {
    let f = fixtures();
    let path = |name: &str| f.join(name).to_string_lossy().into_owned();
    vec![
        "--videos".into(),
        path("videos.jsonl"),
        "--recipes".into(),
        path("recipes.jsonl"),
        "--step-emb".into(),
        path("step_emb.sseb"),
        "--seg-emb".into(),
        path("seg_emb.sseb"),
        "--out-dir".into(),
        out_dir.to_string_lossy().into_owned(),
    ]
}

pub fn run(subcommand: &str, args: &[String]) -> Output {
    bin().arg(subcommand).args(args).output().expect("binary runs")
}

pub fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}
