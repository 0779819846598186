//! Drives the command line in-process on the shipped surgery fixture.

fn main() {
    let dir = std::env::temp_dir().join("warpforge-example");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/surgery.json");
    let report = dir.join("surgery_report.json");
    let code = warpforge::cli::run(["warpforge", "surgery", "-c", cfg, "--report", report.to_str().unwrap()]);
    println!("exit code {code}");
}
