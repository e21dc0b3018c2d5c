#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sitscov"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    bin().args(args).output().expect("spawn sitscov")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `synth` with the flags used for the checked-in golden dataset.
pub fn synth_golden(out: &Path) -> Output {
    run([
        "synth", "--out", out.to_str().unwrap(), "--name", "golden", "--regions", "9",
        "--width", "6", "--height", "5", "--steps", "8", "--min-steps", "2", "--seed", "2024",
        "--clean-prob", "0.15", "--clean-prob-max", "0.95", "--groups", "Africa,Asia,Europe",
    ])
}

pub fn synth(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["synth", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(args)
}
