//! Command-line front end.
//!
//! Each subcommand loads the configuration, runs one experiment and writes
//! its tables plus a `manifest.json` into the output directory. Nothing is
//! written until the experiment has finished.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, ChirpSpec, QuasiSteadyOptions};
use crate::config::{ConfigError, PlatformMode, SimConfig, REFERENCE_TEMPLATE};
use crate::coupled::CoupledModel;
use crate::empc::{self, EmpcConfig};
use crate::export::{self, RunManifest};
use crate::objective::{self, ControlSequence};
use crate::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("gradient check failed: max relative error {max:.3e} exceeds {tolerance:.1e}")]
    GradientCheck { max: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::GradientCheck { .. } => 2,
            _ => 1,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

#[derive(Debug, Parser)]
#[command(name = "floatwake", version, about = "Free-vortex wake and floating platform simulator with economic MPC")]
pub struct Cli {
    /// Parameter file; the built-in reference parameters are used when
    /// omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker cap. The pipeline is sequential, so this is accepted for
    /// compatibility and has no effect.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Seed for randomised instances (gradient checks).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Open-loop rollout under a scripted induction signal.
    Simulate(SimulateArgs),
    /// Chirp experiment and FRF estimates for every platform mode.
    Freqresp(FreqrespArgs),
    /// Stepped-sine quasi-steady power sweep.
    Sweep(SweepArgs),
    /// Receding-horizon economic MPC campaign.
    Empc(EmpcArgs),
    /// Reverse-mode gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Print the reference parameter file.
    ExportConfigTemplate,
}

/// Scripted induction signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlSpec {
    Constant(f64),
    Sine { mean: f64, amp: f64, freq: f64 },
    Chirp(ChirpSpec),
}

impl ControlSpec {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            ControlSpec::Constant(a) => a,
            ControlSpec::Sine { mean, amp, freq } => mean + amp * (2.0 * std::f64::consts::PI * freq * t).sin(),
            ControlSpec::Chirp(c) => c.value(t),
        }
    }
}

impl FromStr for ControlSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("control `{s}` needs the form kind:values"))?;
        let values: Vec<f64> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad number `{v}` in control `{s}`: {e}")))
            .collect::<Result<_, _>>()?;
        let want = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(format!("control `{kind}` takes {n} values, got {}", values.len()))
            }
        };
        match kind {
            "const" => {
                want(1)?;
                Ok(ControlSpec::Constant(values[0]))
            }
            "sine" => {
                want(3)?;
                Ok(ControlSpec::Sine { mean: values[0], amp: values[1], freq: values[2] })
            }
            "chirp" => {
                want(5)?;
                let c = ChirpSpec {
                    f_start: values[0],
                    f_end: values[1],
                    duration: values[2],
                    a_bar: values[3],
                    a_amp: values[4],
                };
                c.validate().map_err(|e| e.to_string())?;
                Ok(ControlSpec::Chirp(c))
            }
            other => Err(format!("unknown control kind `{other}` (const, sine, chirp)")),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// const:A | sine:MEAN,AMP,F_HZ | chirp:F0,F1,DURATION_S,MEAN,AMP
    #[arg(long, default_value = "const:0.3333333333333333")]
    pub control: ControlSpec,
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    /// Overrides the platform mode of the configuration.
    #[arg(long)]
    pub mode: Option<PlatformMode>,
}

#[derive(Debug, Args)]
pub struct FreqrespArgs {
    #[arg(long, default_value_t = 0.0025)]
    pub f_start: f64,
    #[arg(long, default_value_t = 0.1)]
    pub f_end: f64,
    #[arg(long, default_value_t = 30000.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.28)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.05)]
    pub amp: f64,
    /// Bins whose input magnitude is below this fraction of the peak are
    /// dropped.
    #[arg(long, default_value_t = analysis::DEFAULT_MAGNITUDE_FLOOR)]
    pub floor: f64,
    /// Wake steps at the chirp mean before the chirp starts; defaults to
    /// twice the wake length.
    #[arg(long)]
    pub spin_up: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.005)]
    pub fmin: f64,
    #[arg(long, default_value_t = 0.05)]
    pub fmax: f64,
    #[arg(long, default_value_t = 19)]
    pub points: usize,
    #[arg(long)]
    pub mode: Option<PlatformMode>,
    #[arg(long, default_value_t = 0.28)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.05)]
    pub amp: f64,
    #[command(flatten)]
    pub averaging: AveragingArgs,
}

#[derive(Debug, Args)]
pub struct AveragingArgs {
    /// Minimum averaging length in wake steps.
    #[arg(long)]
    pub min_average_steps: Option<usize>,
    /// Step budget per run after spin-up.
    #[arg(long)]
    pub max_steps: Option<usize>,
}

impl AveragingArgs {
    fn options(&self, model: &CoupledModel) -> QuasiSteadyOptions {
        let mut o = QuasiSteadyOptions::for_model(model);
        if let Some(v) = self.min_average_steps {
            o.min_average_steps = v;
        }
        if let Some(v) = self.max_steps {
            o.max_steps = v;
        }
        o
    }
}

#[derive(Debug, Args)]
pub struct EmpcArgs {
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
    /// Constant induction used to spin the wake up and as the first warm
    /// start.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub initial: f64,
    /// Spin-up length in wake steps; defaults to twice the wake length.
    #[arg(long)]
    pub spin_up: Option<usize>,
    /// Number of final steps averaged in the summary.
    #[arg(long, default_value_t = 100)]
    pub tail: usize,
    /// Constant inductions scanned for the static reference: START,END,STEP.
    #[arg(long, default_value = "0.20,0.40,0.01")]
    pub static_grid: String,
    /// Record per-step wall time in the trace (makes it run-dependent).
    #[arg(long)]
    pub wall_clock: bool,
    #[command(flatten)]
    pub averaging: AveragingArgs,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub fd_step: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
}

/// Files produced by a run, written together at the end.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: &str, bytes: std::io::Result<Vec<u8>>) -> Result<(), CliError> {
        let bytes = bytes.map_err(io_err(format!("formatting {name}")))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn commit(self, mut manifest: RunManifest) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(io_err(format!("creating {}", self.dir.display())))?;
        let mut written = Vec::new();
        manifest.files = self.files.iter().map(|(n, _)| n.clone()).collect();
        for (name, bytes) in &self.files {
            let p = self.dir.join(name);
            export::write_atomic(&p, bytes).map_err(io_err(format!("writing {}", p.display())))?;
            written.push(p);
        }
        manifest.finished_at = now();
        let p = self.dir.join("manifest.json");
        export::write_atomic(&p, &export::json_bytes(&manifest).map_err(io_err("formatting manifest"))?)
            .map_err(io_err(format!("writing {}", p.display())))?;
        written.push(p);
        Ok(written)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

struct Loaded {
    config: SimConfig,
    text: String,
}

fn load_config(path: Option<&Path>) -> Result<Loaded, CliError> {
    match path {
        None => Ok(Loaded { config: SimConfig::reference(), text: REFERENCE_TEMPLATE.to_string() }),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Ok(Loaded { config: SimConfig::from_toml_str(&text)?, text })
        }
    }
}

/// Runs the parsed command and returns the written files.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Command::ExportConfigTemplate = cli.command {
        print!("{REFERENCE_TEMPLATE}");
        return Ok(Vec::new());
    }
    if cli.threads == 0 {
        return Err(CliError::Argument("--threads must be at least 1".into()));
    }
    let started_at = now();
    let loaded = load_config(cli.config.as_deref())?;
    let mut outputs = Outputs::new(&cli.out);
    let name = match &cli.command {
        Command::Simulate(a) => {
            simulate(&loaded.config, a, &mut outputs)?;
            "simulate"
        }
        Command::Freqresp(a) => {
            freqresp(&loaded.config, a, &mut outputs)?;
            "freqresp"
        }
        Command::Sweep(a) => {
            sweep(&loaded.config, a, &mut outputs)?;
            "sweep"
        }
        Command::Empc(a) => {
            empc_campaign(&loaded.config, a, &mut outputs)?;
            "empc"
        }
        Command::Gradcheck(a) => {
            let max = gradcheck(&loaded.config, a, cli.seed, &mut outputs)?;
            let manifest = manifest("gradcheck", cli, &loaded, started_at);
            let written = outputs.commit(manifest)?;
            if !(max <= a.tolerance) {
                return Err(CliError::GradientCheck { max, tolerance: a.tolerance });
            }
            return Ok(written);
        }
        Command::ExportConfigTemplate => unreachable!(),
    };
    outputs.commit(manifest(name, cli, &loaded, started_at))
}

fn manifest(name: &str, cli: &Cli, loaded: &Loaded, started_at: String) -> RunManifest {
    RunManifest {
        subcommand: name.to_string(),
        config_path: cli.config.clone(),
        output_dir: cli.out.clone(),
        config_hash: export::content_hash(loaded.text.as_bytes()),
        started_at,
        finished_at: String::new(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        files: Vec::new(),
    }
}

fn simulate(cfg: &SimConfig, args: &SimulateArgs, out: &mut Outputs) -> Result<(), CliError> {
    if args.steps == 0 {
        return Err(CliError::Argument("--steps must be at least 1".into()));
    }
    let cfg = args.mode.map_or_else(|| cfg.clone(), |m| cfg.with_mode(m));
    let model = CoupledModel::new(cfg);
    let dt = model.config.numerical.dt_wake;
    let controls: Vec<f64> = (0..args.steps).map(|k| args.control.value(k as f64 * dt)).collect();
    let (last, outputs) = model.rollout(&model.cold_start(), &controls)?;
    out.add("time_series.csv", export::time_series_table(&model.config, 0.0, &controls, &outputs))?;
    out.add("platform.csv", export::platform_table(&model.config, 0.0, &outputs))?;
    out.add("wake.csv", export::wake_table(&last.wake))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FrfSummary {
    f_pitch_hz: f64,
    f_surge_hz: f64,
    chirp_samples: usize,
    spin_up_steps: usize,
    /// Largest induction-to-nacelle magnitude near each mode.
    nacelle_peak_surge: Option<(f64, f64)>,
    nacelle_peak_pitch: Option<(f64, f64)>,
    nacelle_min_between: Option<(f64, f64)>,
    thrust_mean_mag_surge_floating: Option<f64>,
    thrust_mean_mag_surge_fixed: Option<f64>,
    thrust_mean_mag_pitch_floating: Option<f64>,
    thrust_mean_mag_pitch_fixed: Option<f64>,
}

fn freqresp(cfg: &SimConfig, args: &FreqrespArgs, out: &mut Outputs) -> Result<(), CliError> {
    let spec = ChirpSpec {
        f_start: args.f_start,
        f_end: args.f_end,
        duration: args.duration,
        a_bar: args.mean,
        a_amp: args.amp,
    };
    spec.validate()?;
    let spin_up = args.spin_up.unwrap_or(2 * cfg.numerical.num_rings);
    let modes = [PlatformMode::Floating, PlatformMode::Pitch, PlatformMode::Surge, PlatformMode::Fixed];
    let mut records = Vec::new();
    let mut estimates = Vec::new();
    for mode in modes {
        let model = CoupledModel::new(cfg.with_mode(mode));
        let rec = analysis::run_chirp(&model, &spec, spin_up)?;
        for mut e in rec.frfs(args.floor)? {
            e.input = format!("{}:{}", mode.as_str(), e.input);
            estimates.push(e);
        }
        out.add(
            &format!("chirp_{}.csv", mode.as_str()),
            export::time_series_table(&model.config, 0.0, &rec.induction, &rec.outputs),
        )?;
        records.push(rec);
    }
    let floating = CoupledModel::new(cfg.with_mode(PlatformMode::Floating));
    let summary = frf_summary(&floating, &records[0], &records[3], args.floor, spin_up)?;
    out.add("frf.csv", export::frf_table(&estimates))?;
    out.add("frf_summary.json", export::json_bytes(&summary))?;
    Ok(())
}

fn frf_summary(
    floating: &CoupledModel,
    rec_float: &analysis::ChirpRecord,
    rec_fixed: &analysis::ChirpRecord,
    floor: f64,
    spin_up: usize,
) -> Result<FrfSummary, ModelError> {
    let (fp, fs) = (floating.platform.f_pitch, floating.platform.f_surge);
    let nac = analysis::estimate_frf(&rec_float.induction, &rec_float.nacelle_x(), rec_float.dt, floor, ("induction", "nacelle_x"))?;
    let thr_float = analysis::estimate_frf(&rec_float.induction, &rec_float.thrust(), rec_float.dt, floor, ("induction", "thrust"))?;
    let thr_fixed = analysis::estimate_frf(&rec_fixed.induction, &rec_fixed.thrust(), rec_fixed.dt, floor, ("induction", "thrust"))?;
    let band = |f: f64| (0.8 * f, 1.2 * f);
    let (s_lo, s_hi) = band(fs);
    let (p_lo, p_hi) = band(fp);
    Ok(FrfSummary {
        f_pitch_hz: fp,
        f_surge_hz: fs,
        chirp_samples: rec_float.induction.len(),
        spin_up_steps: spin_up,
        nacelle_peak_surge: nac.peak_in(s_lo, s_hi),
        nacelle_peak_pitch: nac.peak_in(p_lo, p_hi),
        nacelle_min_between: nac.minimum_in(0.015, 0.03),
        thrust_mean_mag_surge_floating: thr_float.mean_magnitude_in(s_lo, s_hi),
        thrust_mean_mag_surge_fixed: thr_fixed.mean_magnitude_in(s_lo, s_hi),
        thrust_mean_mag_pitch_floating: thr_float.mean_magnitude_in(p_lo, p_hi),
        thrust_mean_mag_pitch_fixed: thr_fixed.mean_magnitude_in(p_lo, p_hi),
    })
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    mode: PlatformMode,
    a_bar: f64,
    a_amp: f64,
    peak_frequency_hz: f64,
    peak_strouhal: f64,
    peak_mean_power_w: f64,
    static_power_at_mean_w: f64,
    unconverged_points: usize,
}

fn sweep(cfg: &SimConfig, args: &SweepArgs, out: &mut Outputs) -> Result<(), CliError> {
    if args.points == 0 || !(args.fmin > 0.0 && args.fmin <= args.fmax) {
        return Err(CliError::Argument("sweep needs 0 < fmin <= fmax and at least one point".into()));
    }
    let mode = args.mode.unwrap_or(cfg.mode);
    let model = CoupledModel::new(cfg.with_mode(mode));
    let opts = args.averaging.options(&model);
    let freqs = analysis::linspace(args.fmin, args.fmax, args.points);
    let result = analysis::stepped_sine_sweep(&model, &freqs, args.mean, args.amp, mode, &opts)?;
    let stat = analysis::static_power(&model, args.mean, &opts)?;
    let (f_peak, p_peak) = result.peak();
    let summary = SweepSummary {
        mode,
        a_bar: args.mean,
        a_amp: args.amp,
        peak_frequency_hz: f_peak,
        peak_strouhal: analysis::strouhal(f_peak, cfg.turbine.rotor_diameter, cfg.inflow_speed()),
        peak_mean_power_w: p_peak,
        static_power_at_mean_w: stat.mean_power,
        unconverged_points: result.converged.iter().filter(|c| !**c).count(),
    };
    out.add(&format!("sweep_{}.csv", mode.as_str()), export::sweep_table(&result))?;
    out.add(&format!("sweep_{}_summary.json", mode.as_str()), export::json_bytes(&summary))?;
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Argument(format!("static grid `{s}`: {e}")))?;
    match v[..] {
        [lo, hi, step] if step > 0.0 && lo <= hi => {
            let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| lo + step * i as f64).collect())
        }
        _ => Err(CliError::Argument(format!("static grid `{s}` must be START,END,STEP with STEP > 0"))),
    }
}

#[derive(Debug, Serialize)]
struct EmpcSummary {
    steps: usize,
    horizon: usize,
    iterations_per_step: usize,
    initial_induction: f64,
    spin_up_steps: usize,
    tail_steps: usize,
    tail_mean_power_t0_w: f64,
    tail_mean_power_t1_w: f64,
    tail_mean_total_power_w: f64,
    dominant_frequency_hz: f64,
    dominant_strouhal: f64,
    harmonics_hz: Vec<f64>,
    min_control: f64,
    max_control: f64,
    static_optimum_induction: f64,
    static_optimum_power_w: f64,
    gain_vs_static_optimum_pct: f64,
    static_power_at_initial_w: f64,
    gain_vs_static_at_initial_pct: f64,
    monotone_steps: usize,
    total_wall_s: f64,
}

fn empc_campaign(cfg: &SimConfig, args: &EmpcArgs, out: &mut Outputs) -> Result<(), CliError> {
    if args.tail == 0 || args.tail > args.steps {
        return Err(CliError::Argument(format!("--tail must be in 1..={}", args.steps)));
    }
    let model = CoupledModel::new(cfg.clone());
    model.config.weights.validate()?;
    let grid = parse_grid(&args.static_grid)?;
    let spin_up = args.spin_up.unwrap_or(2 * cfg.numerical.num_rings);
    let initial = model.spin_up(&model.cold_start(), args.initial, spin_up)?;
    let ecfg = EmpcConfig::new(&model, args.horizon, args.iters, args.steps);
    let warm = ControlSequence::constant(args.initial, args.horizon, args.initial);
    let started = std::time::Instant::now();
    let trace = empc::receding_horizon(&model, &initial, &warm, &ecfg, |r| {
        eprintln!(
            "empc step {:>4}: a0 = {:.4}, P = {:.3} MW, cost {:.3} -> {:.3}",
            r.step,
            r.control,
            r.output.total_power() / 1e6,
            r.cost_before,
            r.cost_after
        );
    })?;
    let total_wall_s = started.elapsed().as_secs_f64();

    let opts = args.averaging.options(&model);
    let scan = analysis::static_scan(&model, &grid, &opts)?;
    let (a_opt, p_opt) = scan.optimum();
    let p_init = analysis::static_power(&model, args.initial, &opts)?.mean_power;

    let tail = &trace.records[args.steps - args.tail..];
    let mean = |f: &dyn Fn(&empc::EmpcRecord) -> f64| tail.iter().map(f).sum::<f64>() / tail.len() as f64;
    let total = mean(&|r| r.output.total_power());
    let controls = trace.controls();
    let dom = analysis::dominant_frequency(&controls, cfg.numerical.dt_wake)?;
    let summary = EmpcSummary {
        steps: args.steps,
        horizon: args.horizon,
        iterations_per_step: args.iters,
        initial_induction: args.initial,
        spin_up_steps: spin_up,
        tail_steps: args.tail,
        tail_mean_power_t0_w: mean(&|r| r.output.power_t0),
        tail_mean_power_t1_w: mean(&|r| r.output.power_t1),
        tail_mean_total_power_w: total,
        dominant_frequency_hz: dom.f0,
        dominant_strouhal: analysis::strouhal(dom.f0, cfg.turbine.rotor_diameter, cfg.inflow_speed()),
        harmonics_hz: dom.harmonics,
        min_control: controls.iter().copied().fold(f64::INFINITY, f64::min),
        max_control: controls.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        static_optimum_induction: a_opt,
        static_optimum_power_w: p_opt,
        gain_vs_static_optimum_pct: 100.0 * (total / p_opt - 1.0),
        static_power_at_initial_w: p_init,
        gain_vs_static_at_initial_pct: 100.0 * (total / p_init - 1.0),
        monotone_steps: trace.records.iter().filter(|r| r.cost_after <= r.cost_before).count(),
        total_wall_s,
    };
    let t0 = initial.time(cfg);
    out.add("empc_trace.csv", export::empc_table(cfg, t0, &trace, args.wall_clock))?;
    let outputs: Vec<_> = trace.records.iter().map(|r| r.output).collect();
    out.add("empc_platform.csv", export::platform_table(cfg, t0, &outputs))?;
    out.add("empc_wake.csv", export::wake_table(&trace.final_state.wake))?;
    out.add("empc_summary.json", export::json_bytes(&summary))?;
    Ok(())
}

fn gradcheck(cfg: &SimConfig, args: &GradcheckArgs, seed: u64, out: &mut Outputs) -> Result<f64, CliError> {
    if args.horizon == 0 || args.trials == 0 || !(args.fd_step > 0.0) {
        return Err(CliError::Argument("gradcheck needs horizon, trials >= 1 and fd-step > 0".into()));
    }
    let model = CoupledModel::new(cfg.clone());
    let report = objective::gradient_check(&model, args.horizon, args.trials, seed, args.fd_step)?;
    eprintln!(
        "gradcheck: {} trials at horizon {}, max relative error {:.3e}",
        args.trials, args.horizon, report.max_relative_error
    );
    out.add("gradcheck.json", export::json_bytes(&report))?;
    Ok(report.max_relative_error)
}
