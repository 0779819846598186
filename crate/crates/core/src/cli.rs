//! Command-line front end. Every numeric input comes from a JSON config file.
//!
//! Exit codes: 0 when the object was built and verified, 2 when verification
//! found a violation, 1 for configuration or runtime errors. The JSON report
//! is written in every case.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::construction::{
    assemble_bubble, blowdown_lipschitz, build_bubble, build_surgery, glue_bubble, glue_params, measured_c,
    bubble::smoothing_degradation, surgery_checks, Bubble, BubbleConfig, H3Choice, SurgeryConfig,
    SurgeryMetric, SURGERY_C,
};
use crate::curvature::WarpedMetric;
use crate::error::{Error, Result};
use crate::limits::{compose_distortion, gh_error, gh_error_limit, holder_exponent, schedule};
use crate::profiles::DEFAULT_RHO;
use crate::verify::scan::ScanRanges;
use crate::verify::{
    export_grid, scan_params, verify_ric_lower, verify_ric_lower_on, write_curvature_csv, GridConfig, ScanSpace,
};

#[derive(Parser, Debug)]
#[command(name = "warpforge", version, about = "Build and verify warped-product metrics with Ricci lower bounds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Debug)]
struct Io {
    /// JSON config file
    #[arg(short, long)]
    config: PathBuf,
    /// Report path; overrides `out_report` from the config
    #[arg(short, long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the bubble and verify Ric > 0
    Bubble(Io),
    /// Build the conical surgery and check its four contract items
    Surgery(Io),
    /// Glue a rescaled bubble into a surgery and verify the result
    Glue(Io),
    /// Verify a bubble, surgery, glued or exported metric without budget checks
    Verify(Io),
    /// Feasibility scan over bubble parameters
    Scan(Io),
    /// Parameter schedule, Hölder and GH bounds
    Limits(Io),
    /// Write a metric descriptor and sampled curvature
    Export(Io),
}

/// What a successful command found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    Violation,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::Violation => 2,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Verified
        } else {
            Outcome::Violation
        }
    }
}

fn default_points() -> usize {
    2001
}
fn default_samples() -> usize {
    1000
}
fn default_seed() -> u64 {
    7
}
fn default_m() -> f64 {
    1e-3
}
fn default_r1() -> f64 {
    2.0
}
fn default_r3() -> f64 {
    1e3
}
fn default_rho() -> f64 {
    DEFAULT_RHO
}
fn default_f0() -> f64 {
    1.0
}
fn default_target() -> String {
    "bubble".into()
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleCmd {
    pub epsilon: f64,
    pub alpha2: f64,
    pub delta2: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_r1")]
    pub r1: f64,
    #[serde(default = "default_r3")]
    pub r3: f64,
    #[serde(default)]
    pub h3: H3Choice,
    #[serde(default = "yes")]
    pub smooth: bool,
    #[serde(default)]
    pub grid: GridConfig,
    pub out_report: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    #[serde(default = "default_points")]
    pub csv_points: usize,
}

impl BubbleCmd {
    pub fn bubble_config(&self) -> BubbleConfig {
        BubbleConfig {
            epsilon: self.epsilon,
            alpha2: self.alpha2,
            delta2: self.delta2,
            m: self.m,
            r1: self.r1,
            r3: self.r3,
            h3: self.h3.clone(),
            smooth: self.smooth,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgeryCmd {
    pub kappa: f64,
    pub f0: f64,
    pub lambda_bound: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub r_hat: f64,
    pub delta_hat: f64,
    pub r_m: Option<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "yes")]
    pub smooth: bool,
    /// Constant in the degraded bound `lambda_bound - C eps`.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    pub out_report: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    #[serde(default = "default_points")]
    pub csv_points: usize,
}

impl SurgeryCmd {
    pub fn surgery_config(&self) -> SurgeryConfig {
        SurgeryConfig {
            kappa: self.kappa,
            f0: self.f0,
            lambda_bound: self.lambda_bound,
            epsilon: self.epsilon,
            alpha: self.alpha,
            r_hat: self.r_hat,
            delta_hat: self.delta_hat,
            r_m: self.r_m,
            rho: self.rho,
            smooth: self.smooth,
        }
    }
}

/// Surgery half of a glue config; `epsilon` and `alpha` default to the bubble's.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueSurgery {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_f0")]
    pub f0: f64,
    pub lambda_bound: f64,
    pub r_hat: f64,
    pub delta_hat: f64,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub r_m: Option<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "yes")]
    pub smooth: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueSpec {
    pub bubble: BubbleConfig,
    pub surgery: GlueSurgery,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueCmd {
    pub bubble: BubbleConfig,
    pub surgery: GlueSurgery,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    pub out_report: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    #[serde(default = "default_points")]
    pub csv_points: usize,
}

/// Exactly one source must be given.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCmd {
    pub bubble: Option<BubbleConfig>,
    pub surgery: Option<SurgeryConfig>,
    pub glue: Option<GlueSpec>,
    /// A metric descriptor written by `export`.
    pub metric: Option<PathBuf>,
    /// Defaults: 0 for bubbles and descriptors, the degraded bound otherwise.
    pub bound: Option<f64>,
    /// Restricts the check to `[lo, hi]`; the whole metric range by default.
    pub range: Option<[f64; 2]>,
    #[serde(default)]
    pub grid: GridConfig,
    pub out_report: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    #[serde(default = "default_points")]
    pub csv_points: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCmd {
    #[serde(default = "default_target")]
    pub target: String,
    pub base: BubbleConfig,
    pub ranges: ScanRanges,
    #[serde(default)]
    pub bound: f64,
    #[serde(default)]
    pub grid: GridConfig,
    pub out_report: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsCmd {
    pub j: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda_plus: f64,
    /// Defaults to the blow-down constant measured on `bubble`.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Defaults to the bubble with `epsilon = 0.05, alpha2 = delta2 = 0.01`.
    pub bubble: Option<BubbleConfig>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out_report: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportCmd {
    pub bubble: Option<BubbleConfig>,
    pub surgery: Option<SurgeryConfig>,
    pub glue: Option<GlueSpec>,
    #[serde(default = "default_points")]
    pub points: usize,
    pub out_metric: PathBuf,
    pub out_csv: PathBuf,
    pub out_report: Option<PathBuf>,
}

/// Reads a JSON config, rejecting unknown keys.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), v)?;
    Ok(())
}

fn write_csv(m: &WarpedMetric, path: &Path, n: usize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_curvature_csv(m, &export_grid(m, n), BufWriter::new(File::create(path)?))
}

/// Bubble config the defaults refer to.
fn default_bubble() -> BubbleConfig {
    BubbleConfig::new(0.05, 0.01, 0.01, 1e3)
}

/// The surgery a glue config describes; `epsilon` and `alpha` default to the bubble's.
pub fn glue_surgery_config(g: &GlueSurgery, b: &Bubble) -> SurgeryConfig {
    SurgeryConfig {
        kappa: g.kappa,
        f0: g.f0,
        lambda_bound: g.lambda_bound,
        epsilon: g.epsilon.unwrap_or(b.params.epsilon),
        alpha: g.alpha.unwrap_or(b.params.alpha),
        r_hat: g.r_hat,
        delta_hat: g.delta_hat,
        r_m: g.r_m,
        rho: g.rho,
        smooth: g.smooth,
    }
}

fn build_glue(bubble: &BubbleConfig, surgery: &GlueSurgery, c: f64) -> Result<(Bubble, SurgeryMetric, WarpedMetric)> {
    let b = build_bubble(bubble)?;
    let s = build_surgery(&glue_surgery_config(surgery, &b))?;
    let g = glue_bubble(&s, &b, c)?;
    Ok((b, s, g))
}

fn surgery_result(s: &SurgeryMetric, c: f64, grid: &GridConfig) -> Result<(bool, Value)> {
    let (checks, rep) = surgery_checks(s, c, grid)?;
    for chk in &checks {
        println!(
            "  item {}: {} [{}] value {:.6e} bound {:.6e}",
            chk.item,
            chk.name,
            if chk.holds { "ok" } else { "FAIL" },
            chk.value,
            chk.bound
        );
    }
    let pass = checks.iter().all(|c| c.holds);
    let v = json!({
        "params": s.params,
        "smallness": s.smallness,
        "smoothing": s.smoothing,
        "checks": checks,
        "C": c,
        "measured_C": measured_c(s, &rep),
        "verification": rep,
    });
    Ok((pass, v))
}

pub fn cmd_bubble(cfg: &BubbleCmd) -> Result<(Outcome, Value)> {
    let b = build_bubble(&cfg.bubble_config())?;
    let raw = verify_ric_lower(&b.raw, 0.0, &cfg.grid)?;
    let rep = verify_ric_lower(&b.metric, 0.0, &cfg.grid)?;
    let degradation = smoothing_degradation(&b.raw, &b.metric, &b.smoothing)?;
    println!("{}", raw.summary());
    println!("{}", rep.summary());
    println!("  smoothing degradation {degradation:.3e}");
    if let Some(p) = &cfg.out_csv {
        write_csv(&b.metric, p, cfg.csv_points)?;
    }
    let pass = raw.passed && rep.passed;
    Ok((
        Outcome::from_pass(pass),
        json!({
            "params": b.params,
            "budget": b.budget,
            "exterior_start": b.exterior_start,
            "smoothing": b.smoothing,
            "smoothing_degradation": degradation,
            "raw": raw,
            "verification": rep,
        }),
    ))
}

pub fn cmd_surgery(cfg: &SurgeryCmd) -> Result<(Outcome, Value)> {
    let s = build_surgery(&cfg.surgery_config())?;
    println!("surgery: r_m = {:e}, delta = {:e}, r2 = {:e}, r3s = {:e}", s.params.r_m, s.params.delta, s.params.r2, s.params.r3);
    let (pass, v) = surgery_result(&s, cfg.c.unwrap_or(SURGERY_C), &cfg.grid)?;
    if let Some(p) = &cfg.out_csv {
        write_csv(&s.metric, p, cfg.csv_points)?;
    }
    Ok((Outcome::from_pass(pass), v))
}

pub fn cmd_glue(cfg: &GlueCmd) -> Result<(Outcome, Value)> {
    let (_, _, g) = build_glue(&cfg.bubble, &cfg.surgery, cfg.c.unwrap_or(SURGERY_C))?;
    let gp = glue_params(&g).expect("glued metric carries its parameters").clone();
    println!(
        "glue: scale {:e}, delta_I {:e}, delta_II {:e}, collar mismatch {:.2e}",
        gp.scale, gp.delta_i, gp.delta_ii, gp.collar_mismatch
    );
    let rep = verify_ric_lower(&g, gp.lambda_target, &cfg.grid)?;
    println!("{}", rep.summary());
    if let Some(p) = &cfg.out_csv {
        write_csv(&g, p, cfg.csv_points)?;
    }
    Ok((Outcome::from_pass(rep.passed), json!({ "params": gp, "verification": rep })))
}

enum Source {
    Bubble(Box<Bubble>),
    Surgery(Box<SurgeryMetric>, f64),
    Glued(WarpedMetric),
    Metric(WarpedMetric),
}

impl Source {
    fn metric(&self) -> &WarpedMetric {
        match self {
            Source::Bubble(b) => &b.metric,
            Source::Surgery(s, _) => &s.metric,
            Source::Glued(m) | Source::Metric(m) => m,
        }
    }
}

fn source(
    bubble: &Option<BubbleConfig>,
    surgery: &Option<SurgeryConfig>,
    glue: &Option<GlueSpec>,
    metric: Option<&Path>,
) -> Result<Source> {
    let given = [bubble.is_some(), surgery.is_some(), glue.is_some(), metric.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(Error::Config("give exactly one of \"bubble\", \"surgery\", \"glue\" or \"metric\"".into()));
    }
    Ok(if let Some(b) = bubble {
        Source::Bubble(Box::new(assemble_bubble(b)?))
    } else if let Some(s) = surgery {
        Source::Surgery(Box::new(build_surgery(s)?), SURGERY_C)
    } else if let Some(g) = glue {
        Source::Glued(build_glue(&g.bubble, &g.surgery, g.c.unwrap_or(SURGERY_C))?.2)
    } else {
        Source::Metric(load_config(metric.expect("one source is set"))?)
    })
}

pub fn cmd_verify(cfg: &VerifyCmd) -> Result<(Outcome, Value)> {
    let src = source(&cfg.bubble, &cfg.surgery, &cfg.glue, cfg.metric.as_deref())?;
    let (pass, v) = match &src {
        Source::Surgery(s, c) if cfg.bound.is_none() && cfg.range.is_none() => surgery_result(s, *c, &cfg.grid)?,
        _ => {
            let m = src.metric();
            let bound = cfg.bound.unwrap_or(match &src {
                Source::Glued(g) => glue_params(g).map(|p| p.lambda_target).unwrap_or(0.0),
                Source::Surgery(s, c) => s.params.lambda_bound - c * s.params.epsilon,
                _ => 0.0,
            });
            let rep = match cfg.range {
                Some([lo, hi]) => verify_ric_lower_on(m, lo, hi, bound, &cfg.grid)?,
                None => verify_ric_lower(m, bound, &cfg.grid)?,
            };
            println!("{}", rep.summary());
            let mut v = json!({ "verification": rep });
            if let Source::Bubble(b) = &src {
                v["params"] = json!(b.params);
                v["budget"] = json!(b.budget);
            }
            (rep.passed, v)
        }
    };
    if let Some(p) = &cfg.out_csv {
        write_csv(src.metric(), p, cfg.csv_points)?;
    }
    Ok((Outcome::from_pass(pass), v))
}

pub fn cmd_scan(cfg: &ScanCmd) -> Result<(Outcome, Value)> {
    let space = ScanSpace { target: cfg.target.clone(), base: cfg.base.clone(), ranges: cfg.ranges.clone(), bound: cfg.bound };
    let table = scan_params(&space, &cfg.grid)?;
    for f in &table.frontier {
        println!(
            "  eps {:<6} delta2 {:<8} alpha2 passes up to {:<10} monotone {}",
            f.epsilon,
            f.delta2,
            f.alpha2_max.map(|a| a.to_string()).unwrap_or_else(|| "none".into()),
            f.monotone
        );
    }
    if let Some(p) = &cfg.out_csv {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        table.write_csv(BufWriter::new(File::create(p)?))?;
    }
    // failing grid points are data, not a violation of the command's contract
    Ok((Outcome::Verified, serde_json::to_value(&table)?))
}

pub fn cmd_limits(cfg: &LimitsCmd) -> Result<(Outcome, Value)> {
    let s = schedule(cfg.j, cfg.epsilon, cfg.delta, cfg.lambda_plus);
    println!("r_{j} = {}, delta_{j} = {:e}, eps_{j} = {}", s.r_j, s.delta_j, s.epsilon_j, j = s.j);
    println!("lambda_{} = {}", s.j, s.lambda_j);
    let (c, c_source) = match cfg.c {
        Some(c) => (c, "config".to_string()),
        None => {
            let bc = cfg.bubble.clone().unwrap_or_else(default_bubble);
            let b = assemble_bubble(&bc)?;
            (blowdown_lipschitz(&b, &b.lambda)?.global, format!("blow-down of bubble eps={} alpha2={}", bc.epsilon, bc.alpha2))
        }
    };
    let alpha = holder_exponent(cfg.delta, c)?;
    println!("C = {c} ({c_source}), alpha(delta) = {alpha}");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let j_max = cfg.j.max(30);
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for _ in 0..cfg.samples {
        let r = 10f64.powf(rng.gen_range(-12.0..0.0));
        let j = rng.gen_range(0..=j_max);
        match compose_distortion(r, j, cfg.delta, c) {
            Ok((p, b)) => worst_ratio = worst_ratio.max(p / b),
            Err(e) => failures.push(e.to_string()),
        }
        let i = rng.gen_range(0..=j_max);
        let n = rng.gen_range(0..=j_max);
        if let Err(e) = gh_error(i, i + n, cfg.delta, c) {
            failures.push(e.to_string());
        }
    }
    let gh0 = gh_error_limit(0, cfg.delta, c)?;
    let lambda_ok = s.lambda_j > cfg.lambda_plus - cfg.epsilon;
    if !lambda_ok {
        failures.push(format!("lambda_{} = {} not above lambda_plus - eps", s.j, s.lambda_j));
    }
    println!("distortion: worst product/bound {worst_ratio:.6}; GH error from stage 0 to the limit {gh0:e}");
    println!("{} samples, {} failures", cfg.samples, failures.len());
    Ok((
        Outcome::from_pass(failures.is_empty()),
        json!({
            "schedule": s,
            "C": c,
            "C_source": c_source,
            "holder_exponent": alpha,
            "samples": cfg.samples,
            "worst_distortion_ratio": worst_ratio,
            "gh_error_limit_0": gh0,
            "failures": failures,
        }),
    ))
}

pub fn cmd_export(cfg: &ExportCmd) -> Result<(Outcome, Value)> {
    let src = source(&cfg.bubble, &cfg.surgery, &cfg.glue, None)?;
    let m = src.metric();
    write_json(&cfg.out_metric, m)?;
    write_csv(m, &cfg.out_csv, cfg.points)?;
    println!("wrote {} and {} ({} radii)", cfg.out_metric.display(), cfg.out_csv.display(), cfg.points);
    Ok((Outcome::Verified, json!({ "metric_id": m.id, "out_metric": cfg.out_metric, "out_csv": cfg.out_csv, "points": cfg.points })))
}

fn run_cmd<T: DeserializeOwned>(
    name: &str,
    io: &Io,
    out_of: impl Fn(&T) -> Option<PathBuf>,
    cmd: impl Fn(&T) -> Result<(Outcome, Value)>,
) -> i32 {
    let cfg = load_config::<T>(&io.config);
    let out = io
        .report
        .clone()
        .or_else(|| cfg.as_ref().ok().and_then(&out_of))
        .unwrap_or_else(|| PathBuf::from(format!("{name}_report.json")));
    let res = cfg.and_then(|c| cmd(&c));
    let (code, report) = match res {
        Ok((o, v)) => (
            o.code(),
            json!({ "command": name, "status": if o == Outcome::Verified { "verified" } else { "violation" }, "result": v }),
        ),
        Err(e) => {
            eprintln!("error: {e}");
            (1, json!({ "command": name, "status": "error", "error": e.to_string() }))
        }
    };
    if let Err(e) = write_json(&out, &report) {
        eprintln!("error: cannot write report {}: {e}", out.display());
        return 1;
    }
    println!("report: {}", out.display());
    code
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match &cli.cmd {
        Cmd::Bubble(io) => run_cmd("bubble", io, |c: &BubbleCmd| c.out_report.clone(), cmd_bubble),
        Cmd::Surgery(io) => run_cmd("surgery", io, |c: &SurgeryCmd| c.out_report.clone(), cmd_surgery),
        Cmd::Glue(io) => run_cmd("glue", io, |c: &GlueCmd| c.out_report.clone(), cmd_glue),
        Cmd::Verify(io) => run_cmd("verify", io, |c: &VerifyCmd| c.out_report.clone(), cmd_verify),
        Cmd::Scan(io) => run_cmd("scan", io, |c: &ScanCmd| c.out_report.clone(), cmd_scan),
        Cmd::Limits(io) => run_cmd("limits", io, |c: &LimitsCmd| c.out_report.clone(), cmd_limits),
        Cmd::Export(io) => run_cmd("export", io, |c: &ExportCmd| c.out_report.clone(), cmd_export),
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
