mod common;

use common::*;
use warpforge::cli::load_config;
use warpforge::verify::{export_grid, write_curvature_csv};
use warpforge::WarpedMetric;

#[test]
fn exported_metric_and_csv_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_fixture("export", "export.json", dir.path());
    assert_eq!(code, 0);
    let back: WarpedMetric = load_config(&dir.path().join("surgery_metric.json")).unwrap();
    let built = shipped_surgery().metric;
    assert_eq!(back, built);

    let csv_text = std::fs::read_to_string(dir.path().join("surgery_export.csv")).unwrap();
    let mut fresh = Vec::new();
    write_curvature_csv(&back, &export_grid(&back, 2001), &mut fresh).unwrap();
    assert_eq!(csv_text.as_bytes(), &fresh[..]);

    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    let mut n = 0;
    for row in rd.records() {
        let row = row.unwrap();
        let x: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        let b = built.blocks(x[0]).unwrap();
        assert_eq!(x[4].to_bits(), b.rr.to_bits());
        assert_eq!(x[5].to_bits(), b.sx.to_bits());
        assert_eq!(x[7].to_bits(), b.s2.to_bits());
        n += 1;
    }
    assert_eq!(n, 2001);
}

#[test]
fn exported_descriptor_verifies_like_the_original() {
    let dir = tempfile::tempdir().unwrap();
    run_fixture("export", "export.json", dir.path());
    let cfg = dir.path().join("verify.json");
    let metric = dir.path().join("surgery_metric.json");
    let report = dir.path().join("verify_report.json");
    let mut v = serde_json::json!({ "metric": metric, "grid": { "points_per_piece": 512 } });
    let run = |v: &serde_json::Value| {
        std::fs::write(&cfg, v.to_string()).unwrap();
        warpforge::cli::run(["warpforge", "verify", "-c", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()])
    };
    // the surgery only promises Ric > lambda_bound - C eps, and only from r_hat/2 out
    assert_eq!(run(&v), 2);
    v["bound"] = (-2.3).into();
    assert_eq!(run(&v), 2);
    v["range"] = serde_json::json!([5e-4, 2.0]);
    assert_eq!(run(&v), 0);
}
