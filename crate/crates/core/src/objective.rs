//! Economic objective over a control horizon and its exact gradient.
//!
//! The stage cost is `Q [P0, P1]^T + R (a_k - a_{k-1})^2` with negative
//! output weights, so minimising the horizon sum maximises power. The
//! gradient is obtained by recording each coupled step on a tape and running
//! the hand-derived reverse rules backwards over it; this is the exact
//! derivative of the discrete rollout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coupled::{CoupledModel, CoupledState, StateAdjoint, StepOutput, StepTape};
use crate::ModelError;

/// Output and move weights. Output weights are configured per MW and held
/// per W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub q_per_mw: [f64; 2],
    /// Output weights in 1/W.
    pub q: [f64; 2],
    pub r: f64,
}

impl ObjectiveWeights {
    pub fn from_per_mw(q_per_mw: [f64; 2], r: f64) -> Self {
        ObjectiveWeights {
            q_per_mw,
            q: [q_per_mw[0] * 1e-6, q_per_mw[1] * 1e-6],
            r,
        }
    }

    /// Checks the invariants required of a controller objective: every
    /// output weight negative and the move weight positive.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.q.iter().all(|&q| q < 0.0) && self.r > 0.0 {
            Ok(())
        } else {
            Err(ModelError::InvalidInput(format!(
                "objective needs Q < 0 and R > 0, got Q = {:?} MW^-1, R = {}",
                self.q_per_mw, self.r
            )))
        }
    }
}

/// Induction trajectory of turbine 0 over a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSequence {
    pub values: Vec<f64>,
    /// Control applied just before the first sample; anchors the first move
    /// penalty.
    pub anchor: f64,
}

impl ControlSequence {
    pub fn constant(value: f64, len: usize, anchor: f64) -> Self {
        ControlSequence {
            values: vec![value; len],
            anchor,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientRecord {
    pub cost: f64,
    /// d cost / d a_k for every horizon sample.
    pub gradient: Vec<f64>,
}

pub fn stage_cost(output: &StepOutput, a_k: f64, a_prev: f64, weights: &ObjectiveWeights) -> f64 {
    let dm = a_k - a_prev;
    weights.q[0] * output.power_t0 + weights.q[1] * output.power_t1 + weights.r * dm * dm
}

fn sum_stage_costs(outputs: &[StepOutput], controls: &ControlSequence, weights: &ObjectiveWeights) -> f64 {
    let mut prev = controls.anchor;
    let mut cost = 0.0;
    for (out, &a) in outputs.iter().zip(&controls.values) {
        cost += stage_cost(out, a, prev, weights);
        prev = a;
    }
    cost
}

/// Plain sum of stage costs along the rollout; no terminal term.
pub fn horizon_cost(
    model: &CoupledModel,
    initial: &CoupledState,
    controls: &ControlSequence,
    weights: &ObjectiveWeights,
) -> Result<f64, ModelError> {
    let (_, outputs) = model.rollout(initial, &controls.values)?;
    Ok(sum_stage_costs(&outputs, controls, weights))
}

/// Cost and exact gradient with respect to every control sample.
pub fn gradient(
    model: &CoupledModel,
    initial: &CoupledState,
    controls: &ControlSequence,
    weights: &ObjectiveWeights,
) -> Result<GradientRecord, ModelError> {
    let n = controls.len();
    if n == 0 {
        return Err(ModelError::InvalidInput("empty control sequence".into()));
    }
    let mut state = initial.clone();
    let mut tapes = vec![StepTape::default(); n];
    let mut outputs = Vec::with_capacity(n);
    for (tape, &a) in tapes.iter_mut().zip(&controls.values) {
        outputs.push(model.step_in_place(&mut state, a, Some(tape))?);
    }
    let cost = sum_stage_costs(&outputs, controls, weights);

    let mut grad = vec![0.0; n];
    let mut adj = StateAdjoint::zeros(state.wake.len());
    for k in (0..n).rev() {
        let (prev, a_bar) = model.step_adjoint(&tapes[k], &adj, weights.q[0], weights.q[1])?;
        if !a_bar.is_finite() {
            return Err(ModelError::NonFinite {
                what: "gradient",
                step: k,
            });
        }
        grad[k] = a_bar;
        adj = prev;
    }

    let a = &controls.values;
    for k in 0..n {
        let prev = if k == 0 { controls.anchor } else { a[k - 1] };
        grad[k] += 2.0 * weights.r * (a[k] - prev);
        if k + 1 < n {
            grad[k] -= 2.0 * weights.r * (a[k + 1] - a[k]);
        }
    }
    Ok(GradientRecord { cost, gradient: grad })
}

/// Central differences of [`horizon_cost`], one pair of rollouts per sample.
pub fn finite_difference_gradient(
    model: &CoupledModel,
    initial: &CoupledState,
    controls: &ControlSequence,
    weights: &ObjectiveWeights,
    step: f64,
) -> Result<Vec<f64>, ModelError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut probe = controls.clone();
    let mut grad = Vec::with_capacity(controls.len());
    for k in 0..controls.len() {
        let base = controls.values[k];
        probe.values[k] = base + step;
        let up = horizon_cost(model, initial, &probe, weights)?;
        probe.values[k] = base - step;
        let down = horizon_cost(model, initial, &probe, weights)?;
        probe.values[k] = base;
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Relative discrepancy used by [`gradient_check`]:
/// `|exact - fd| / (|fd| + 1e-12)`.
pub fn relative_error(exact: f64, finite_difference: f64) -> f64 {
    (exact - finite_difference).abs() / (finite_difference.abs() + 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheckSample {
    pub index: usize,
    pub exact: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheckTrial {
    pub trial: usize,
    pub horizon: usize,
    pub spin_up_steps: usize,
    pub spin_up_induction: f64,
    pub anchor: f64,
    pub controls: Vec<f64>,
    pub cost: f64,
    pub samples: Vec<GradientCheckSample>,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheckReport {
    pub seed: u64,
    pub fd_step: f64,
    pub trials: Vec<GradientCheckTrial>,
    pub max_relative_error: f64,
}

/// Reverse-mode gradients against central differences on randomised
/// instances: random spin-up length and induction, random controls in the
/// usual operating range and a random anchor.
pub fn gradient_check(
    model: &CoupledModel,
    horizon: usize,
    trials: usize,
    seed: u64,
    fd_step: f64,
) -> Result<GradientCheckReport, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = model.config.weights;
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        let spin_up_steps = rng.random_range(5..=40);
        let spin_up_induction = rng.random_range(0.2..0.4);
        let initial = model.spin_up(&model.cold_start(), spin_up_induction, spin_up_steps)?;
        let controls = ControlSequence {
            values: (0..horizon).map(|_| rng.random_range(0.15..0.4)).collect(),
            anchor: rng.random_range(0.15..0.4),
        };
        let exact = gradient(model, &initial, &controls, &weights)?;
        let fd = finite_difference_gradient(model, &initial, &controls, &weights, fd_step)?;
        let samples: Vec<GradientCheckSample> = exact
            .gradient
            .iter()
            .zip(&fd)
            .enumerate()
            .map(|(index, (&e, &f))| GradientCheckSample {
                index,
                exact: e,
                finite_difference: f,
                relative_error: relative_error(e, f),
            })
            .collect();
        let max_relative_error = samples.iter().map(|s| s.relative_error).fold(0.0, f64::max);
        out.push(GradientCheckTrial {
            trial,
            horizon,
            spin_up_steps,
            spin_up_induction,
            anchor: controls.anchor,
            controls: controls.values,
            cost: exact.cost,
            samples,
            max_relative_error,
        });
    }
    let max_relative_error = out.iter().map(|t| t.max_relative_error).fold(0.0, f64::max);
    Ok(GradientCheckReport { seed, fd_step, trials: out, max_relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::platform::PlatformState;
    use crate::Vec2;
    use approx::assert_relative_eq;

    fn output(p0: f64, p1: f64) -> StepOutput {
        StepOutput {
            power_t0: p0,
            power_t1: p1,
            thrust_t0: 0.0,
            nacelle_x: 0.0,
            u_rotor_t1: Vec2::zeros(),
            platform: PlatformState::default(),
        }
    }

    fn zero_weights() -> ObjectiveWeights {
        ObjectiveWeights::from_per_mw([0.0, 0.0], 0.0)
    }

    #[test]
    fn stage_cost_values() {
        let w = ObjectiveWeights::from_per_mw([-1.0, -1.0], 4.7e-2);
        assert_eq!(stage_cost(&output(0.0, 0.0), 0.3, 0.3, &w), 0.0);
        assert_relative_eq!(stage_cost(&output(5e6, 5e6), 0.3, 0.3, &w), -10.0, max_relative = 1e-12);
        let with_move = stage_cost(&output(5e6, 5e6), 0.4, 0.3, &w);
        assert_relative_eq!(with_move - (-10.0), 4.7e-4, max_relative = 1e-9);
    }

    #[test]
    fn weight_validation() {
        assert!(ObjectiveWeights::from_per_mw([-1.0, -1.0], 4.7e-2).validate().is_ok());
        assert!(ObjectiveWeights::from_per_mw([-1.0, 0.0], 4.7e-2).validate().is_err());
        assert!(ObjectiveWeights::from_per_mw([-1.0, -1.0], 0.0).validate().is_err());
    }

    #[test]
    fn single_sample_horizon_is_one_stage() {
        let model = CoupledModel::new(SimConfig::reference());
        let s0 = model.spin_up(&model.cold_start(), 0.3, 15).unwrap();
        let w = model.config.weights;
        let c = ControlSequence { values: vec![0.27], anchor: 0.3 };
        let (_, out) = model.step(&s0, 0.27).unwrap();
        assert_eq!(horizon_cost(&model, &s0, &c, &w).unwrap(), stage_cost(&out, 0.27, 0.3, &w));
    }

    #[test]
    fn zero_controls_from_cold_start_only_count_the_virtual_turbine() {
        let model = CoupledModel::new(SimConfig::reference());
        let w = model.config.weights;
        let c = ControlSequence::constant(0.0, 7, 0.0);
        let free = crate::wake::virtual_rotor_power(1.0 / 3.0, Vec2::new(10.0, 0.0), Vec2::x(), &model.config.turbine)
            .unwrap();
        let cost = horizon_cost(&model, &model.cold_start(), &c, &w).unwrap();
        assert_relative_eq!(cost, 7.0 * w.q[1] * free, max_relative = 1e-12);
    }

    #[test]
    fn zero_weights_zero_gradient() {
        let model = CoupledModel::new(SimConfig::reference());
        let s0 = model.spin_up(&model.cold_start(), 0.3, 10).unwrap();
        let c = ControlSequence { values: vec![0.2, 0.3, 0.25], anchor: 0.3 };
        let g = gradient(&model, &s0, &c, &zero_weights()).unwrap();
        assert!(g.gradient.iter().all(|&x| x == 0.0));
        assert_eq!(g.cost, 0.0);
    }

    #[test]
    fn move_penalty_only_gradient() {
        let model = CoupledModel::new(SimConfig::reference());
        let s0 = model.spin_up(&model.cold_start(), 0.3, 10).unwrap();
        let w = ObjectiveWeights::from_per_mw([0.0, 0.0], 4.7e-2);
        let c = ControlSequence { values: vec![0.2, 0.31, 0.25, 0.4], anchor: 0.3 };
        let g = gradient(&model, &s0, &c, &w).unwrap();
        let last = 2.0 * w.r * (0.4 - 0.25);
        assert_eq!(g.gradient[3], last);
        let fd = finite_difference_gradient(&model, &s0, &c, &w, 1e-6).unwrap();
        for (a, b) in g.gradient.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences_short_horizon() {
        let model = CoupledModel::new(SimConfig::reference());
        let s0 = model.spin_up(&model.cold_start(), 0.3, 25).unwrap();
        let w = model.config.weights;
        let c = ControlSequence { values: vec![0.22, 0.31, 0.27, 0.35], anchor: 0.3 };
        let g = gradient(&model, &s0, &c, &w).unwrap();
        let fd = finite_difference_gradient(&model, &s0, &c, &w, 1e-6).unwrap();
        assert_eq!(g.cost, horizon_cost(&model, &s0, &c, &w).unwrap());
        for (a, b) in g.gradient.iter().zip(&fd) {
            assert!((a - b).abs() / (b.abs() + 1e-12) < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn doubling_output_weights_doubles_power_part() {
        let model = CoupledModel::new(SimConfig::reference());
        let s0 = model.spin_up(&model.cold_start(), 0.3, 10).unwrap();
        let c = ControlSequence { values: vec![0.25, 0.3, 0.28], anchor: 0.3 };
        let w1 = ObjectiveWeights::from_per_mw([-1.0, -0.5], 0.0);
        let w2 = ObjectiveWeights::from_per_mw([-2.0, -1.0], 0.0);
        let g1 = gradient(&model, &s0, &c, &w1).unwrap();
        let g2 = gradient(&model, &s0, &c, &w2).unwrap();
        assert_eq!(g2.cost, 2.0 * g1.cost);
        for (a, b) in g1.gradient.iter().zip(&g2.gradient) {
            assert_eq!(*b, 2.0 * a);
        }
    }
}
