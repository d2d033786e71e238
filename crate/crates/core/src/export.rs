//! CSV and JSON artefacts.
//!
//! Every table has a one-line header and a fixed column order. Files are
//! assembled in memory and moved into place with a rename, so a failed run
//! never leaves a half-written table behind.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{FrfEstimate, SweepResult};
use crate::config::SimConfig;
use crate::coupled::StepOutput;
use crate::empc::EmpcTrace;
use crate::wake::WakeState;

pub const WAKE_HEADER: [&str; 5] = ["generation_index", "point_index", "x_m", "y_m", "gamma_m2s"];
pub const PLATFORM_HEADER: [&str; 6] = ["t_s", "phi_rad", "phi_dot_rad_s", "x_m", "x_dot_m_s", "nacelle_x_m"];
pub const TIME_SERIES_HEADER: [&str; 9] =
    ["k", "t_s", "a0", "thrust_N", "power_t0_W", "power_t1_W", "nacelle_x_m", "phi_rad", "x_m"];
pub const EMPC_HEADER: [&str; 11] = [
    "k",
    "t_s",
    "a0_implemented",
    "power_t0_W",
    "power_t1_W",
    "cost_before",
    "cost_after",
    "nacelle_x_m",
    "phi_rad",
    "x_m",
    "wall_ms",
];
pub const FRF_HEADER: [&str; 4] = ["f_hz", "mag", "phase_rad", "channel"];
pub const SWEEP_HEADER: [&str; 4] = ["f_hz", "st", "mean_power_w", "converged_flag"];

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

fn table<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// One row per vortex point. Generation 0 is the newest pair; the upper
/// edge point of each pair has point index 0.
pub fn wake_table(wake: &WakeState) -> io::Result<Vec<u8>> {
    let gens = wake.generations();
    let rows = wake.points().enumerate().map(|(i, p)| {
        [
            (gens - 1 - i / 2).to_string(),
            (i % 2).to_string(),
            num(p.position.x),
            num(p.position.y),
            num(p.strength),
        ]
    });
    table(WAKE_HEADER, rows)
}

/// Platform state after every wake step, starting from `t0`.
pub fn platform_table(cfg: &SimConfig, t0: f64, outputs: &[StepOutput]) -> io::Result<Vec<u8>> {
    let dt = cfg.numerical.dt_wake;
    let rows = outputs.iter().enumerate().map(|(k, o)| {
        let p = o.platform;
        [
            num(t0 + (k + 1) as f64 * dt),
            num(p.phi),
            num(p.phi_dot),
            num(p.x),
            num(p.x_dot),
            num(o.nacelle_x),
        ]
    });
    table(PLATFORM_HEADER, rows)
}

/// Row `k` holds the control applied at `t0 + k dt` and the outputs of
/// that step.
pub fn time_series_table(cfg: &SimConfig, t0: f64, controls: &[f64], outputs: &[StepOutput]) -> io::Result<Vec<u8>> {
    let dt = cfg.numerical.dt_wake;
    let rows = controls.iter().zip(outputs).enumerate().map(|(k, (&a, o))| {
        [
            k.to_string(),
            num(t0 + k as f64 * dt),
            num(a),
            num(o.thrust_t0),
            num(o.power_t0),
            num(o.power_t1),
            num(o.nacelle_x),
            num(o.platform.phi),
            num(o.platform.x),
        ]
    });
    table(TIME_SERIES_HEADER, rows)
}

/// Closed-loop trace. Wall times are written only when `with_timing` is
/// set; otherwise the column holds 0 so that repeated runs are identical.
pub fn empc_table(cfg: &SimConfig, t0: f64, trace: &EmpcTrace, with_timing: bool) -> io::Result<Vec<u8>> {
    let dt = cfg.numerical.dt_wake;
    let rows = trace.records.iter().map(|r| {
        let o = &r.output;
        [
            r.step.to_string(),
            num(t0 + r.step as f64 * dt),
            num(r.control),
            num(o.power_t0),
            num(o.power_t1),
            num(r.cost_before),
            num(r.cost_after),
            num(o.nacelle_x),
            num(o.platform.phi),
            num(o.platform.x),
            if with_timing { format!("{:.3}", r.wall_ms) } else { "0".to_string() },
        ]
    });
    table(EMPC_HEADER, rows)
}

/// Valid bins of every estimate, channel by channel.
pub fn frf_table(estimates: &[FrfEstimate]) -> io::Result<Vec<u8>> {
    let rows = estimates.iter().flat_map(|e| {
        let channel = e.channel();
        e.valid_points()
            .map(move |(f, h)| [num(f), num(h.norm()), num(h.arg()), channel.clone()])
            .collect::<Vec<_>>()
    });
    table(FRF_HEADER, rows)
}

pub fn sweep_table(sweep: &SweepResult) -> io::Result<Vec<u8>> {
    let rows = (0..sweep.frequencies.len()).map(|i| {
        [
            num(sweep.frequencies[i]),
            num(sweep.strouhal[i]),
            num(sweep.mean_power[i]),
            u8::from(sweep.converged[i]).to_string(),
        ]
    });
    table(SWEEP_HEADER, rows)
}

pub fn json_bytes(value: &impl Serialize) -> io::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
    v.push(b'\n');
    Ok(v)
}

/// Git-style blob hash (`blob <len>\0<content>`) using SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub version: String,
    pub files: Vec<String>,
}
