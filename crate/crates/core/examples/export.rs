//! Writes a surgery metric as JSON plus a curvature CSV, then reads the JSON back.

use warpforge::construction::{build_surgery, SurgeryConfig};
use warpforge::verify::{export_grid, write_curvature_csv};
use warpforge::WarpedMetric;

fn main() {
    let s = build_surgery(&SurgeryConfig::new(0.0, 1.0, -0.1, 0.02, 0.01, 1e-3, 1e-3)).unwrap();
    let json = serde_json::to_string(&s.metric).unwrap();
    let back: WarpedMetric = serde_json::from_str(&json).unwrap();
    println!("{} bytes of JSON, identical after reading back: {}", json.len(), back == s.metric);
    let mut out = Vec::new();
    write_curvature_csv(&back, &export_grid(&back, 9), &mut out).unwrap();
    print!("{}", String::from_utf8(out).unwrap());
}
