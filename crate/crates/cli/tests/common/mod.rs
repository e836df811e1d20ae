#![allow(dead_code)]

use std::path::{Path, PathBuf};

use contingo_cli::input::{parse_inputs, ConfigOverrides, InputBundle, InputPaths};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn case_study_paths() -> InputPaths {
    InputPaths {
        project: fixture("case_study_project.json"),
        risks: fixture("case_study_risks.json"),
        scales: fixture("case_study_scales.json"),
        config: None,
    }
}

pub fn case_study() -> InputBundle {
    parse_inputs(&case_study_paths(), &ConfigOverrides::default()).expect("case-study fixture is valid")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["contingo"];
    full.extend_from_slice(args);
    let code = contingo_cli::run_cli(full, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// `simulate` on the case-study fixture, writing into `out`.
pub fn simulate_case_study(out: &Path, extra: &[&str]) -> Run {
    let p = fixture("case_study_project.json");
    let r = fixture("case_study_risks.json");
    let s = fixture("case_study_scales.json");
    let mut args = vec![
        "simulate",
        "--project",
        p.to_str().unwrap(),
        "--risks",
        r.to_str().unwrap(),
        "--scales",
        s.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

/// Data rows of a CSV output, without metadata comments and header.
pub fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
