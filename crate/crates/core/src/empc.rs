//! Receding-horizon economic MPC driven by Adam.
//!
//! Every controller step optimises the full horizon from the shifted
//! previous solution, implements its first sample on the plant model and
//! shifts again. Moment estimates are reset at each step because the
//! parameter vector is re-indexed by the shift.

use std::time::Instant;

use crate::coupled::{CoupledModel, CoupledState, StepOutput};
use crate::objective::{self, ControlSequence, ObjectiveWeights};
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(len: usize, hyper: AdamHyper) -> Self {
        assert!(hyper.alpha > 0.0 && hyper.epsilon > 0.0, "alpha and epsilon must be positive");
        assert!(
            (0.0..1.0).contains(&hyper.beta1) && (0.0..1.0).contains(&hyper.beta2),
            "decay rates must lie in [0, 1)"
        );
        AdamState {
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            t: 0,
            hyper,
        }
    }

    pub fn reset(&mut self) {
        self.first_moment.iter_mut().for_each(|m| *m = 0.0);
        self.second_moment.iter_mut().for_each(|v| *v = 0.0);
        self.t = 0;
    }
}

/// One bias-corrected Adam step followed by clamping to `bounds`.
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    bounds: (f64, f64),
) -> Result<(), ModelError> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(ModelError::InvalidInput(format!(
            "Adam length mismatch: {} parameters, {} gradients, {} moments",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(ModelError::InvalidInput(format!(
            "non-finite gradient at sample {i} in Adam iteration {}",
            state.t + 1
        )));
    }
    state.t += 1;
    let h = state.hyper;
    let t = state.t as i32;
    let c1 = 1.0 - h.beta1.powi(t);
    let c2 = 1.0 - h.beta2.powi(t);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        *m = h.beta1 * *m + (1.0 - h.beta1) * g;
        *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p = (*p - h.alpha * m_hat / (v_hat.sqrt() + h.epsilon)).clamp(bounds.0, bounds.1);
    }
    Ok(())
}

/// What goes into the horizon slot vacated by the shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WarmStartFill {
    #[default]
    RepeatLast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpcConfig {
    pub horizon: usize,
    pub iters_per_step: usize,
    pub total_steps: usize,
    pub weights: ObjectiveWeights,
    pub bounds: (f64, f64),
    pub warm_start_fill: WarmStartFill,
    pub adam: AdamHyper,
}

impl EmpcConfig {
    pub fn new(model: &CoupledModel, horizon: usize, iters_per_step: usize, total_steps: usize) -> Self {
        EmpcConfig {
            horizon,
            iters_per_step,
            total_steps,
            weights: model.config.weights,
            bounds: model.config.induction_bounds,
            warm_start_fill: WarmStartFill::RepeatLast,
            adam: AdamHyper::default(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.horizon == 0 {
            return Err(ModelError::InvalidInput("horizon must be at least 1".into()));
        }
        if !(self.bounds.0 <= self.bounds.1) {
            return Err(ModelError::InvalidInput(format!("empty control bounds {:?}", self.bounds)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonSolution {
    pub controls: ControlSequence,
    pub cost_before: f64,
    pub cost_after: f64,
    pub iterations: usize,
}

/// Runs `iters_per_step` Adam iterations from `warm` and returns the final
/// iterate.
pub fn optimize_horizon(
    model: &CoupledModel,
    initial: &CoupledState,
    warm: &ControlSequence,
    cfg: &EmpcConfig,
) -> Result<HorizonSolution, ModelError> {
    cfg.validate()?;
    if warm.len() != cfg.horizon {
        return Err(ModelError::InvalidInput(format!(
            "warm start has {} samples, horizon is {}",
            warm.len(),
            cfg.horizon
        )));
    }
    let mut controls = warm.clone();
    let mut adam = AdamState::new(cfg.horizon, cfg.adam);
    let mut cost_before = None;
    for _ in 0..cfg.iters_per_step {
        let rec = objective::gradient(model, initial, &controls, &cfg.weights)?;
        cost_before.get_or_insert(rec.cost);
        adam_update(&mut controls.values, &rec.gradient, &mut adam, cfg.bounds)?;
    }
    let cost_after = objective::horizon_cost(model, initial, &controls, &cfg.weights)?;
    Ok(HorizonSolution {
        controls,
        cost_before: cost_before.unwrap_or(cost_after),
        cost_after,
        iterations: cfg.iters_per_step,
    })
}

/// Shifts left by one and fills the vacated last sample.
pub fn shift_controls(solution: &ControlSequence, fill: WarmStartFill) -> ControlSequence {
    let v = &solution.values;
    let mut values: Vec<f64> = v.iter().skip(1).copied().collect();
    match fill {
        WarmStartFill::RepeatLast => values.push(*v.last().expect("non-empty horizon")),
    }
    ControlSequence {
        values,
        anchor: v[0],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpcRecord {
    pub step: usize,
    pub control: f64,
    pub output: StepOutput,
    pub cost_before: f64,
    pub cost_after: f64,
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpcTrace {
    pub records: Vec<EmpcRecord>,
    pub final_state: CoupledState,
}

impl EmpcTrace {
    pub fn controls(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.control).collect()
    }

    pub fn total_power(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.output.total_power()).collect()
    }
}

/// Closed-loop run of `cfg.total_steps` controller steps. `warm` seeds the
/// first optimisation and its anchor is the control applied before it.
pub fn receding_horizon(
    model: &CoupledModel,
    initial: &CoupledState,
    warm: &ControlSequence,
    cfg: &EmpcConfig,
    mut progress: impl FnMut(&EmpcRecord),
) -> Result<EmpcTrace, ModelError> {
    cfg.validate()?;
    let mut state = initial.clone();
    let mut warm = warm.clone();
    let mut records = Vec::with_capacity(cfg.total_steps);
    for k in 0..cfg.total_steps {
        let started = Instant::now();
        let sol = optimize_horizon(model, &state, &warm, cfg)?;
        let control = sol.controls.values[0];
        let output = model.step_in_place(&mut state, control, None)?;
        warm = shift_controls(&sol.controls, cfg.warm_start_fill);
        let record = EmpcRecord {
            step: k,
            control,
            output,
            cost_before: sol.cost_before,
            cost_after: sol.cost_after,
            iterations: sol.iterations,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        progress(&record);
        records.push(record);
    }
    Ok(EmpcTrace {
        records,
        final_state: state,
    })
}
