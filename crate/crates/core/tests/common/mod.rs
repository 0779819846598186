#![allow(dead_code)]

use std::path::PathBuf;

use warpforge::cli::{glue_surgery_config, load_config, BubbleCmd, GlueCmd, SurgeryCmd, VerifyCmd};
use warpforge::construction::{assemble_bubble, build_surgery, glue_bubble, Bubble, SurgeryMetric, SURGERY_C};
use warpforge::WarpedMetric;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn bubble_from(name: &str) -> Bubble {
    let cmd: BubbleCmd = load_config(&fixture(name)).unwrap();
    assemble_bubble(&cmd.bubble_config()).unwrap()
}

pub fn shipped_bubble() -> Bubble {
    bubble_from("bubble.json")
}

pub fn shipped_surgery() -> SurgeryMetric {
    let cmd: SurgeryCmd = load_config(&fixture("surgery.json")).unwrap();
    build_surgery(&cmd.surgery_config()).unwrap()
}

pub fn shipped_glue() -> (Bubble, SurgeryMetric, WarpedMetric) {
    let cmd: GlueCmd = load_config(&fixture("glue.json")).unwrap();
    let b = assemble_bubble(&cmd.bubble).unwrap();
    let s = build_surgery(&glue_surgery_config(&cmd.surgery, &b)).unwrap();
    let g = glue_bubble(&s, &b, cmd.c.unwrap_or(SURGERY_C)).unwrap();
    (b, s, g)
}

pub fn broken_bubble() -> Bubble {
    let cmd: VerifyCmd = load_config(&fixture("broken.json")).unwrap();
    assemble_bubble(&cmd.bubble.expect("broken fixture is a bubble")).unwrap()
}

/// Every metric the fixtures describe, by name.
pub fn shipped_metrics() -> Vec<(&'static str, WarpedMetric)> {
    let (_, _, g) = shipped_glue();
    vec![
        ("bubble", shipped_bubble().metric),
        ("bubble_log", bubble_from("bubble_log.json").metric),
        ("broken", broken_bubble().metric),
        ("surgery", shipped_surgery().metric),
        ("glued", g),
    ]
}

/// Copies a fixture into `dir`, pointing every `out_*` path inside `dir`.
pub fn fixture_in(name: &str, dir: &std::path::Path) -> PathBuf {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (k, val) in v.as_object_mut().unwrap() {
        if k.starts_with("out_") {
            let file = PathBuf::from(val.as_str().unwrap());
            *val = dir.join(file.file_name().unwrap()).to_str().unwrap().into();
        }
    }
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

/// Runs one subcommand on a fixture copy; returns the exit code and the report.
pub fn run_fixture(cmd: &str, name: &str, dir: &std::path::Path) -> (i32, serde_json::Value) {
    let cfg = fixture_in(name, dir);
    let report = dir.join(format!("{cmd}_{name}"));
    let code = warpforge::cli::run(["warpforge", cmd, "-c", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    let v = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    (code, v)
}
