//! Frequency-domain experiments on the coupled model.
//!
//! Chirp excitation with FRF estimation from a single full-length
//! transform, stepped-sine quasi-steady power sweeps, and spectral peak
//! picking for closed-loop control signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::PlatformMode;
use crate::coupled::{CoupledModel, StepOutput};
use crate::ModelError;

/// Linear chirp around a mean induction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpSpec {
    pub f_start: f64,
    pub f_end: f64,
    pub duration: f64,
    pub a_bar: f64,
    pub a_amp: f64,
}

impl ChirpSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.f_start > 0.0 && self.f_start < self.f_end && self.duration > 0.0) {
            return Err(ModelError::InvalidInput(format!(
                "chirp needs 0 < f_start < f_end and duration > 0, got {} .. {} Hz over {} s",
                self.f_start, self.f_end, self.duration
            )));
        }
        Ok(())
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f_start + (self.f_end - self.f_start) * t / self.duration
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.f_start * t + 0.5 * (self.f_end - self.f_start) * t * t / self.duration
    }

    pub fn value(&self, t: f64) -> f64 {
        self.a_bar + self.a_amp * (2.0 * PI * self.phase(t)).sin()
    }

    /// Number of whole samples at `dt` that fit in the duration.
    pub fn samples(&self, dt: f64) -> usize {
        (self.duration / dt + 1e-9).floor() as usize
    }
}

pub fn chirp_signal(spec: &ChirpSpec, dt: f64, n_samples: usize) -> Result<Vec<f64>, ModelError> {
    spec.validate()?;
    if n_samples as f64 * dt > spec.duration * (1.0 + 1e-12) {
        return Err(ModelError::InvalidInput(format!(
            "{n_samples} samples at {dt} s exceed the chirp duration {} s",
            spec.duration
        )));
    }
    Ok((0..n_samples).map(|k| spec.value(k as f64 * dt)).collect())
}

/// Unnormalised DFT `X_k = sum_j x_j exp(-2 pi i j k / N)` with bins
/// `k / (N dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub fn dft(signal: &[f64], dt: f64) -> Result<Spectrum, ModelError> {
    let n = signal.len();
    if n < 2 {
        return Err(ModelError::InvalidInput(format!("DFT needs at least 2 samples, got {n}")));
    }
    let mut values: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut values);
    let frequencies = (0..n).map(|k| k as f64 / (n as f64 * dt)).collect();
    Ok(Spectrum { frequencies, values })
}

fn demean(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

/// One-sided ratio estimate `Y / U`. `valid[k]` is false where the input
/// spectrum is below the floor; the response there is NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FrfEstimate {
    pub frequencies: Vec<f64>,
    pub response: Vec<Complex64>,
    pub valid: Vec<bool>,
    pub input: String,
    pub output: String,
}

impl FrfEstimate {
    /// Label used in the FRF table, e.g. `induction->thrust`.
    pub fn channel(&self) -> String {
        format!("{}->{}", self.input, self.output)
    }

    pub fn valid_points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.frequencies
            .iter()
            .zip(&self.response)
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .map(|((&f, &h), _)| (f, h))
    }

    /// Largest valid magnitude in `[f_lo, f_hi]` and where it occurs.
    pub fn peak_in(&self, f_lo: f64, f_hi: f64) -> Option<(f64, f64)> {
        self.valid_points()
            .filter(|(f, _)| (f_lo..=f_hi).contains(f))
            .map(|(f, h)| (f, h.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn minimum_in(&self, f_lo: f64, f_hi: f64) -> Option<(f64, f64)> {
        self.valid_points()
            .filter(|(f, _)| (f_lo..=f_hi).contains(f))
            .map(|(f, h)| (f, h.norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Mean valid magnitude over `[f_lo, f_hi]`.
    pub fn mean_magnitude_in(&self, f_lo: f64, f_hi: f64) -> Option<f64> {
        let m: Vec<f64> = self
            .valid_points()
            .filter(|(f, _)| (f_lo..=f_hi).contains(f))
            .map(|(_, h)| h.norm())
            .collect();
        (!m.is_empty()).then(|| m.iter().sum::<f64>() / m.len() as f64)
    }
}

pub const DEFAULT_MAGNITUDE_FLOOR: f64 = 1e-3;

pub fn estimate_frf(
    input: &[f64],
    output: &[f64],
    dt: f64,
    magnitude_floor: f64,
    labels: (&str, &str),
) -> Result<FrfEstimate, ModelError> {
    if input.len() != output.len() {
        return Err(ModelError::InvalidInput(format!(
            "FRF input has {} samples, output {}",
            input.len(),
            output.len()
        )));
    }
    let u = dft(&demean(input), dt)?;
    let y = dft(&demean(output), dt)?;
    let half = input.len() / 2 + 1;
    let u_max = u.values[..half].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let threshold = magnitude_floor * u_max;
    let mut response = Vec::with_capacity(half);
    let mut valid = Vec::with_capacity(half);
    for k in 0..half {
        let ok = u_max > 0.0 && u.values[k].norm() >= threshold;
        valid.push(ok);
        response.push(if ok { y.values[k] / u.values[k] } else { Complex64::new(f64::NAN, f64::NAN) });
    }
    if !valid.iter().any(|&v| v) {
        return Err(ModelError::InvalidInput("FRF input spectrum is below the floor in every bin".into()));
    }
    Ok(FrfEstimate {
        frequencies: u.frequencies[..half].to_vec(),
        response,
        valid,
        input: labels.0.to_string(),
        output: labels.1.to_string(),
    })
}

/// Time histories of one chirp run, one entry per wake step.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpRecord {
    pub dt: f64,
    pub induction: Vec<f64>,
    pub outputs: Vec<StepOutput>,
}

impl ChirpRecord {
    pub fn thrust(&self) -> Vec<f64> {
        self.outputs.iter().map(|o| o.thrust_t0).collect()
    }

    pub fn nacelle_x(&self) -> Vec<f64> {
        self.outputs.iter().map(|o| o.nacelle_x).collect()
    }

    pub fn total_power(&self) -> Vec<f64> {
        self.outputs.iter().map(|o| o.total_power()).collect()
    }

    pub fn frfs(&self, floor: f64) -> Result<Vec<FrfEstimate>, ModelError> {
        let thrust = self.thrust();
        Ok(vec![
            estimate_frf(&self.induction, &thrust, self.dt, floor, ("induction", "thrust"))?,
            estimate_frf(&self.induction, &self.nacelle_x(), self.dt, floor, ("induction", "nacelle_x"))?,
            estimate_frf(&thrust, &self.nacelle_x(), self.dt, floor, ("thrust", "nacelle_x"))?,
        ])
    }
}

/// Spins the wake up at the chirp mean for `spin_up` steps, then drives
/// turbine 0 with the chirp sampled at the wake step.
pub fn run_chirp(model: &CoupledModel, spec: &ChirpSpec, spin_up: usize) -> Result<ChirpRecord, ModelError> {
    let dt = model.config.numerical.dt_wake;
    let induction = chirp_signal(spec, dt, spec.samples(dt))?;
    let state = model.spin_up(&model.cold_start(), spec.a_bar, spin_up)?;
    let (_, outputs) = model.rollout(&state, &induction)?;
    Ok(ChirpRecord { dt, induction, outputs })
}

pub fn strouhal(f: f64, diameter: f64, u_mag: f64) -> f64 {
    assert!(u_mag > 0.0, "free-stream speed must be positive");
    f * diameter / u_mag
}

/// Averaging rules for quasi-steady means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSteadyOptions {
    /// Steps discarded before averaging starts.
    pub spin_up_steps: usize,
    pub min_periods: usize,
    /// Minimum averaging length in steps, rounded up to whole periods.
    pub min_average_steps: usize,
    /// Relative change of the running period mean that counts as settled.
    pub tolerance: f64,
    /// Step budget after spin-up.
    pub max_steps: usize,
}

impl QuasiSteadyOptions {
    pub fn for_model(model: &CoupledModel) -> Self {
        QuasiSteadyOptions {
            spin_up_steps: 2 * model.config.numerical.num_rings,
            min_periods: 5,
            min_average_steps: 1500,
            tolerance: 1e-3,
            max_steps: 6000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSteadyMean {
    pub mean_power: f64,
    pub converged: bool,
    pub periods: usize,
    pub steps: usize,
}

/// Runs `control(t)` from a cold start and averages total power over whole
/// periods of length `period` seconds. Period `j` collects the steps whose
/// time since the end of spin-up lies in `[j T, (j+1) T)`. After every
/// completed period beyond the minimum, the running mean over all completed
/// periods is compared with the previous one; a relative change below the
/// tolerance ends the run.
pub fn quasi_steady_mean(
    model: &CoupledModel,
    control: impl Fn(f64) -> f64,
    period: f64,
    opts: &QuasiSteadyOptions,
) -> Result<QuasiSteadyMean, ModelError> {
    if !(period > 0.0) {
        return Err(ModelError::InvalidInput(format!("averaging period must be positive, got {period}")));
    }
    let dt = model.config.numerical.dt_wake;
    let mut state = model.cold_start();
    for k in 0..opts.spin_up_steps {
        model.step_in_place(&mut state, control(k as f64 * dt), None)?;
    }
    let t0 = opts.spin_up_steps as f64 * dt;

    let mut sum_done = 0.0;
    let mut steps_done = 0usize;
    let mut periods = 0usize;
    let mut sum_open = 0.0;
    let mut steps_open = 0usize;
    let mut last_mean: Option<f64> = None;
    for i in 0..opts.max_steps {
        let t = t0 + i as f64 * dt;
        let j = ((t - t0) / period).floor() as usize;
        if j > periods {
            sum_done += sum_open;
            steps_done += steps_open;
            periods += 1;
            sum_open = 0.0;
            steps_open = 0;
            let mean = sum_done / steps_done as f64;
            let settled = last_mean.is_some_and(|m| ((mean - m) / m).abs() < opts.tolerance);
            if periods >= opts.min_periods && steps_done >= opts.min_average_steps && settled {
                return Ok(QuasiSteadyMean { mean_power: mean, converged: true, periods, steps: steps_done });
            }
            last_mean = Some(mean);
        }
        let out = model.step_in_place(&mut state, control(t), None)?;
        sum_open += out.total_power();
        steps_open += 1;
    }
    if periods == 0 {
        return Err(ModelError::InvalidInput(format!(
            "step budget {} does not cover one period of {period} s",
            opts.max_steps
        )));
    }
    Ok(QuasiSteadyMean { mean_power: sum_done / steps_done as f64, converged: false, periods, steps: steps_done })
}

/// Nominal averaging block for constant controls, in steps.
const STATIC_BLOCK_STEPS: f64 = 20.0;

pub fn static_power(model: &CoupledModel, a: f64, opts: &QuasiSteadyOptions) -> Result<QuasiSteadyMean, ModelError> {
    quasi_steady_mean(model, |_| a, STATIC_BLOCK_STEPS * model.config.numerical.dt_wake, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticScan {
    pub inductions: Vec<f64>,
    pub results: Vec<QuasiSteadyMean>,
}

impl StaticScan {
    /// Induction and power of the best constant control.
    pub fn optimum(&self) -> (f64, f64) {
        self.inductions
            .iter()
            .zip(&self.results)
            .map(|(&a, r)| (a, r.mean_power))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty scan")
    }
}

pub fn static_scan(model: &CoupledModel, inductions: &[f64], opts: &QuasiSteadyOptions) -> Result<StaticScan, ModelError> {
    if inductions.is_empty() {
        return Err(ModelError::InvalidInput("static scan needs at least one induction".into()));
    }
    let results = inductions.iter().map(|&a| static_power(model, a, opts)).collect::<Result<_, _>>()?;
    Ok(StaticScan { inductions: inductions.to_vec(), results })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mode: PlatformMode,
    pub a_bar: f64,
    pub a_amp: f64,
    pub frequencies: Vec<f64>,
    pub strouhal: Vec<f64>,
    pub mean_power: Vec<f64>,
    pub converged: Vec<bool>,
}

impl SweepResult {
    /// Frequency and power of the largest mean.
    pub fn peak(&self) -> (f64, f64) {
        self.frequencies
            .iter()
            .zip(&self.mean_power)
            .map(|(&f, &p)| (f, p))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty sweep")
    }
}

pub fn stepped_sine_sweep(
    model: &CoupledModel,
    frequencies: &[f64],
    a_bar: f64,
    a_amp: f64,
    mode: PlatformMode,
    opts: &QuasiSteadyOptions,
) -> Result<SweepResult, ModelError> {
    if frequencies.is_empty() || frequencies.iter().any(|&f| !(f > 0.0)) {
        return Err(ModelError::InvalidInput("sweep frequencies must be positive and non-empty".into()));
    }
    let model = CoupledModel::new(model.config.with_mode(mode));
    let d = model.config.turbine.rotor_diameter;
    let u = model.config.inflow_speed();
    let mut result = SweepResult {
        mode,
        a_bar,
        a_amp,
        frequencies: frequencies.to_vec(),
        strouhal: frequencies.iter().map(|&f| strouhal(f, d, u)).collect(),
        mean_power: Vec::with_capacity(frequencies.len()),
        converged: Vec::with_capacity(frequencies.len()),
    };
    for &f in frequencies {
        let q = quasi_steady_mean(&model, |t| a_bar + a_amp * (2.0 * PI * f * t).sin(), 1.0 / f, opts)?;
        result.mean_power.push(q.mean_power);
        result.converged.push(q.converged);
    }
    Ok(result)
}

/// `count` points evenly spaced over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantFrequency {
    pub f0: f64,
    pub magnitude: f64,
    /// Frequencies of local maxima found within one bin of integer multiples
    /// of `f0`.
    pub harmonics: Vec<f64>,
}

/// Largest non-DC bin of the one-sided spectrum of the demeaned signal.
pub fn dominant_frequency(signal: &[f64], dt: f64) -> Result<DominantFrequency, ModelError> {
    let x = demean(signal);
    let spec = dft(&x, dt)?;
    let half = x.len() / 2 + 1;
    let mag: Vec<f64> = spec.values[..half].iter().map(|c| c.norm()).collect();
    let (k0, &m0) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| ModelError::InvalidInput("signal too short for a peak".into()))?;
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if m0 <= 1e-12 * scale.max(f64::MIN_POSITIVE) * x.len() as f64 || scale == 0.0 {
        return Err(ModelError::InvalidInput("signal is flat; no spectral peak".into()));
    }
    let is_local_max = |k: usize| k > 0 && k + 1 < half && mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1];
    let mut harmonics = Vec::new();
    let mut h = 2;
    while h * k0 + 1 < half {
        let c = h * k0;
        if let Some(k) = [c - 1, c, c + 1]
            .into_iter()
            .filter(|&k| is_local_max(k) && mag[k] > 1e-6 * m0)
            .max_by(|a, b| mag[*a].total_cmp(&mag[*b]))
        {
            harmonics.push(spec.frequencies[k]);
        }
        h += 1;
    }
    Ok(DominantFrequency { f0: spec.frequencies[k0], magnitude: m0, harmonics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::platform::DiscretePlatform;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn chirp_endpoints_and_bounds() {
        let c = ChirpSpec { f_start: 0.0025, f_end: 0.1, duration: 30000.0, a_bar: 0.28, a_amp: 0.05 };
        let s = chirp_signal(&c, 3.6, c.samples(3.6)).unwrap();
        assert_eq!(s.len(), 8333);
        assert_eq!(s[0], 0.28);
        assert_eq!(c.instantaneous_frequency(30000.0), 0.1);
        assert!(s.iter().all(|&a| (0.23 - 1e-15..=0.33 + 1e-15).contains(&a)));
        assert!(chirp_signal(&c, 3.6, 8334).is_err());
        let bad = ChirpSpec { f_start: 0.1, f_end: 0.01, ..c };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn dft_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let x: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = dft(&x, 1.0).unwrap().values;
            let slow = direct_dft(&x);
            let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..777).map(|_| rng.random_range(-2.0..2.0)).collect();
        let s = dft(&x, 0.5).unwrap();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = s.values.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert_relative_eq!(time, freq, max_relative = 1e-9);
    }

    #[test]
    fn constant_and_bin_sinusoid() {
        let s = dft(&[2.0; 64], 1.0).unwrap();
        assert_relative_eq!(s.values[0].re, 128.0, max_relative = 1e-12);
        assert!(s.values[1..].iter().all(|c| c.norm() < 1e-10));

        let x: Vec<f64> = (0..64).map(|j| (2.0 * PI * 5.0 * j as f64 / 64.0).cos()).collect();
        let s = dft(&x, 1.0).unwrap();
        for (k, c) in s.values.iter().enumerate() {
            if k == 5 || k == 59 {
                assert_relative_eq!(c.norm(), 32.0, max_relative = 1e-12);
            } else {
                assert!(c.norm() < 1e-10 * 32.0, "bin {k}");
            }
        }
        assert_relative_eq!(s.frequencies[5], 5.0 / 64.0);
    }

    #[test]
    fn identity_and_delay_frf() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 512;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = estimate_frf(&u, &u, 0.1, 1e-3, ("u", "u")).unwrap();
        for (_, v) in h.valid_points() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
        // circular delay so the shift theorem is exact
        let d = 3;
        let y: Vec<f64> = (0..n).map(|j| u[(j + n - d) % n]).collect();
        let h = estimate_frf(&u, &y, 0.1, 1e-3, ("u", "y")).unwrap();
        for (f, v) in h.valid_points() {
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-9);
            let expected = Complex64::from_polar(1.0, -2.0 * PI * f * d as f64 * 0.1);
            assert!((v - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn frf_errors() {
        assert!(estimate_frf(&[1.0; 8], &[0.0; 8], 1.0, 1e-3, ("u", "y")).is_err());
        assert!(estimate_frf(&[1.0, 2.0], &[0.0; 3], 1.0, 1e-3, ("u", "y")).is_err());
    }

    #[test]
    fn platform_frf_matches_transfer_function() {
        let cfg = SimConfig::reference();
        let p = DiscretePlatform::from_config(&cfg);
        let h = cfg.turbine.hub_height;
        let sub = cfg.numerical.substeps_per_wake_step;
        let dt = cfg.numerical.dt_wake;
        let spec = ChirpSpec { f_start: 0.0025, f_end: 0.1, duration: 30000.0, a_bar: 1.5e6, a_amp: 5e5 };
        let thrust = chirp_signal(&spec, dt, spec.samples(dt)).unwrap();
        let mut s = crate::platform::static_deflection(&cfg.platform, h, spec.a_bar);
        let mut nacelle = Vec::with_capacity(thrust.len());
        for &t in &thrust {
            for _ in 0..sub {
                s = p.step(&s, t);
            }
            nacelle.push(s.x - h * s.phi);
        }
        let est = estimate_frf(&thrust, &nacelle, dt, 1e-3, ("thrust", "nacelle_x")).unwrap();
        let mut checked = 0;
        for (f, v) in est.valid_points().filter(|(f, _)| (0.004..=0.09).contains(f)) {
            let exact = p.nacelle_transfer(h, sub, f).norm();
            assert!((v.norm() / exact - 1.0).abs() < 0.05, "{f} Hz: {} vs {exact}", v.norm());
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn strouhal_values() {
        assert_relative_eq!(strouhal(0.016, 178.3, 10.0), 0.28528, max_relative = 1e-4);
        assert_relative_eq!(strouhal(0.017, 178.3, 10.0), 0.30311, max_relative = 1e-4);
        assert_eq!(strouhal(0.0, 178.3, 10.0), 0.0);
    }

    #[test]
    fn dominant_tone_and_harmonic() {
        let dt = 3.6;
        let n = 1000;
        let one: Vec<f64> = (0..n).map(|k| (2.0 * PI * 0.02 * k as f64 * dt).sin()).collect();
        let d = dominant_frequency(&one, dt).unwrap();
        assert!((d.f0 - 0.02).abs() <= 1.0 / (n as f64 * dt));

        let two: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                (2.0 * PI * 0.017 * t).sin() + 0.5 * (2.0 * PI * 0.034 * t).sin()
            })
            .collect();
        let d = dominant_frequency(&two, dt).unwrap();
        let bin = 1.0 / (n as f64 * dt);
        assert!((d.f0 - 0.017).abs() <= bin);
        let strong: Vec<f64> = d
            .harmonics
            .iter()
            .copied()
            .filter(|&f| (f - 0.034).abs() <= 2.0 * bin)
            .collect();
        assert_eq!(strong.len(), 1, "{:?}", d.harmonics);
        assert!(dominant_frequency(&[0.3; 100], dt).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.005, 0.05, 19);
        assert_eq!(v.len(), 19);
        assert_eq!(v[0], 0.005);
        assert_relative_eq!(v[18], 0.05, max_relative = 1e-15);
        assert_relative_eq!(v[1] - v[0], 0.0025, max_relative = 1e-12);
    }

    #[test]
    fn zero_amplitude_sweep_is_static() {
        let model = CoupledModel::new(SimConfig::reference());
        let opts = QuasiSteadyOptions {
            spin_up_steps: 30,
            min_periods: 2,
            min_average_steps: 40,
            tolerance: 1e-3,
            max_steps: 120,
        };
        let f = 1.0 / (20.0 * 3.6);
        let sweep = stepped_sine_sweep(&model, &[f], 0.3, 0.0, PlatformMode::Floating, &opts).unwrap();
        let stat = static_power(&model, 0.3, &opts).unwrap();
        assert_eq!(sweep.mean_power[0], stat.mean_power);
    }
}
