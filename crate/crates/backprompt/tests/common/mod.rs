#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use backprompt::instances::game24_puzzles;
use backprompt_core::game24::{solve_brute_force, G24Instance, NumberRange};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_backprompt"))
}

pub fn run_cli(args: &[&str]) -> Output {
    bin().args(args).env_remove("OPENAI_API_KEY").output().expect("binary runs")
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// The first `count` puzzles with numbers up to 8, one per line.
pub fn game24_file(dir: &Path, count: usize) -> (PathBuf, Vec<[i64; 4]>) {
    let puzzles: Vec<[i64; 4]> = game24_puzzles(8, 0).into_iter().take(count).collect();
    assert_eq!(puzzles.len(), count, "not enough solvable puzzles");
    let text: String = puzzles.iter().map(|n| format!("{} {} {} {}\n", n[0], n[1], n[2], n[3])).collect();
    let path = dir.join("game24.txt");
    fs::write(&path, text).unwrap();
    (path, puzzles)
}

pub fn solution(n: &[i64; 4]) -> String {
    let inst = G24Instance::new(n, NumberRange { min: 1, max: 8 }).unwrap();
    solve_brute_force(&inst).expect("solvable").to_string()
}

/// An answer that is never 24: the sum when it differs from 24, otherwise prose.
pub fn wrong(n: &[i64; 4]) -> String {
    if n.iter().sum::<i64>() == 24 {
        "I am not sure this can be done.".into()
    } else {
        format!("Answer: {}+{}+{}+{}", n[0], n[1], n[2], n[3])
    }
}

pub fn write_json(path: &Path, map: &BTreeMap<String, Vec<String>>) {
    fs::write(path, serde_json::to_string_pretty(map).unwrap()).unwrap();
}
