#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_noisemask"));
    cmd.env_remove("NOISEMASK_THREADS");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn noisemask")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// One small bank per color, as (name, gen flags).
pub const GOLDEN: [(&str, &[&str]); 6] = [
    ("white", &["--color", "white", "--shape", "16x16", "--count", "2", "--seed", "11"]),
    ("red", &["--color", "red", "--shape", "16x16", "--count", "2", "--seed", "12"]),
    ("blue", &["--color", "blue", "--shape", "16x16", "--count", "2", "--seed", "13"]),
    ("green", &["--color", "green", "--shape", "16x16", "--count", "2", "--seed", "14"]),
    (
        "green3d",
        &["--color", "green3d", "--shape", "16x16x8", "--count", "2", "--sigma-policy", "variant5", "--seed", "15"],
    ),
    (
        "optim-blue",
        &["--color", "optim-blue", "--shape", "16x16", "--k", "5", "--transmittance", "0.2", "--seed", "16"],
    ),
];

pub const BANK_FILES: [&str; 2] = ["entries.npy", "bank.json"];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs `gen` for a golden spec into `out`; returns the printed digest.
pub fn gen_golden(flags: &[&str], out: &Path) -> String {
    let mut args = vec!["gen"];
    args.extend_from_slice(flags);
    args.extend_from_slice(&["--out", path_str(out)]);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    stdout(&o).trim().to_string()
}

/// Compares freshly generated banks with the checked-in copies. With
/// UPDATE_GOLDEN=1 the checked-in copies are rewritten instead.
pub fn check_golden(scratch: &Path) -> Result<(), String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, flags) in GOLDEN {
        let fresh = scratch.join(name);
        gen_golden(flags, &fresh);
        let golden = golden_dir().join(name);
        for file in BANK_FILES {
            let new = std::fs::read(fresh.join(file)).map_err(|e| e.to_string())?;
            if update {
                std::fs::create_dir_all(&golden).map_err(|e| e.to_string())?;
                std::fs::write(golden.join(file), &new).map_err(|e| e.to_string())?;
                continue;
            }
            let old = std::fs::read(golden.join(file))
                .map_err(|e| format!("{name}/{file}: {e}"))?;
            if old != new {
                return Err(format!("{name}/{file} differs from the golden copy"));
            }
        }
    }
    Ok(())
}
