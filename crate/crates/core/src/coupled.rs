//! Two-way, two-rate coupling of the wake and the platform.
//!
//! One wake step of `dt_wake` proceeds as:
//! 1. sample the rotor-average velocity at the current nacelle position,
//! 2. advance the platform `substeps_per_wake_step` times; each substep
//!    takes the thrust from that velocity minus the current nacelle velocity,
//! 3. report thrust and power of turbine 0 as substep averages,
//! 4. shed a vortex pair carrying the circulation shed over the substeps at
//!    the updated nacelle position and convect the wake,
//! 5. evaluate the virtual downstream turbine in the updated wake.

use crate::config::SimConfig;
use crate::platform::{DiscretePlatform, PlatformState};
use crate::wake::{self, WakeState};
use crate::{ModelError, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub wake: WakeState,
    pub platform: PlatformState,
    /// Induction of turbine 0 applied at the previous step.
    pub prev_control: f64,
    pub step: usize,
}

impl CoupledState {
    /// Empty wake, platform at rest.
    pub fn cold_start(cfg: &SimConfig) -> Self {
        CoupledState {
            wake: WakeState::new(cfg.numerical.num_rings, Vec2::x()),
            platform: PlatformState::default(),
            prev_control: 0.0,
            step: 0,
        }
    }

    pub fn time(&self, cfg: &SimConfig) -> f64 {
        self.step as f64 * cfg.numerical.dt_wake
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub power_t0: f64,
    pub power_t1: f64,
    pub thrust_t0: f64,
    /// Nacelle position after the platform substeps.
    pub nacelle_x: f64,
    pub u_rotor_t1: Vec2,
    /// Platform state after the step.
    pub platform: PlatformState,
}

impl StepOutput {
    pub fn total_power(&self) -> f64 {
        self.power_t0 + self.power_t1
    }
}

/// Forward intermediates of one coupled step, kept for the reverse pass.
#[derive(Debug, Clone, Default)]
pub(crate) struct StepTape {
    pub a: f64,
    pub start_positions: Vec<Vec2>,
    pub start_strengths: Vec<f64>,
    pub start_platform: PlatformState,
    pub rotor_points: Vec<Vec2>,
    /// Platform state entering each substep.
    pub sub_states: Vec<PlatformState>,
    /// Normal relative speed used in each substep.
    pub sub_un: Vec<f64>,
    pub end_platform: PlatformState,
    pub evicted: usize,
    pub released_positions: Vec<Vec2>,
    pub released_strengths: Vec<f64>,
    pub end_positions: Vec<Vec2>,
    pub downstream_speed: f64,
}

/// A configured coupled model: the validated configuration plus the
/// discretised platform.
#[derive(Debug, Clone)]
pub struct CoupledModel {
    pub config: SimConfig,
    pub platform: DiscretePlatform,
}

impl CoupledModel {
    pub fn new(config: SimConfig) -> Self {
        let platform = DiscretePlatform::from_config(&config);
        CoupledModel { config, platform }
    }

    pub fn cold_start(&self) -> CoupledState {
        CoupledState::cold_start(&self.config)
    }

    /// Fixed sample points of the virtual downstream turbine.
    pub fn downstream_rotor_points(&self, n: Vec2) -> Vec<Vec2> {
        wake::rotor_line(
            Vec2::new(self.config.layout.downstream_spacing, 0.0),
            n,
            self.config.turbine.rotor_diameter,
            self.config.layout.rotor_samples,
        )
    }

    pub fn step(&self, state: &CoupledState, a0: f64) -> Result<(CoupledState, StepOutput), ModelError> {
        let mut next = state.clone();
        let out = self.step_in_place(&mut next, a0, None)?;
        Ok((next, out))
    }

    pub(crate) fn step_in_place(
        &self,
        state: &mut CoupledState,
        a0: f64,
        mut tape: Option<&mut StepTape>,
    ) -> Result<StepOutput, ModelError> {
        let cfg = &self.config;
        let turbine = &cfg.turbine;
        let num = &cfg.numerical;
        let n = state.wake.rotor_normal();
        let h = turbine.hub_height;

        if let Some(t) = tape.as_deref_mut() {
            t.a = a0;
            t.start_positions = state.wake.positions().to_vec();
            t.start_strengths = state.wake.strengths().to_vec();
            t.start_platform = state.platform;
        }

        let (nacelle_x, nacelle_v) = state.platform.nacelle_kinematics(h);
        let rotor_points = wake::rotor_line(
            Vec2::new(nacelle_x, 0.0),
            n,
            turbine.rotor_diameter,
            cfg.layout.rotor_samples,
        );
        let u_r = wake::mean(&state.wake.total_velocity(&rotor_points, num.inflow, num.core_size));
        let ur_n = n.dot(&u_r);
        let ct = wake::thrust_coefficient(a0, turbine.ct1)?;
        let cp = wake::power_coefficient(a0)?;
        let q = wake::dynamic_pressure_area(turbine);

        // The wake is frozen over the substeps; thrust follows the rotor motion.
        let substeps = num.substeps_per_wake_step;
        let mut sub_states = Vec::with_capacity(substeps);
        let mut sub_un = Vec::with_capacity(substeps);
        let (mut thrust_sum, mut power_sum, mut un2_sum) = (0.0, 0.0, 0.0);
        for j in 0..substeps {
            let v = if j == 0 { nacelle_v } else { state.platform.nacelle_kinematics(h).1 };
            let un = ur_n - n.x * v;
            let thrust = ct * q * un * un;
            thrust_sum += thrust;
            power_sum += cp * q * un * un * un;
            un2_sum += un * un;
            sub_states.push(state.platform);
            sub_un.push(un);
            state.platform = self.platform.step(&state.platform, thrust);
        }
        let inv_sub = 1.0 / substeps as f64;
        let thrust = thrust_sum * inv_sub;
        let power_t0 = power_sum * inv_sub;
        let (new_nacelle_x, _) = state.platform.nacelle_kinematics(h);

        let dgamma = num.dt_wake * 0.5 * ct * un2_sum * inv_sub;
        let evicted = state
            .wake
            .release_circulation(Vec2::new(new_nacelle_x, 0.0), dgamma, turbine.rotor_radius());
        if let Some(t) = tape.as_deref_mut() {
            t.rotor_points = rotor_points;
            t.sub_states = sub_states;
            t.sub_un = sub_un;
            t.end_platform = state.platform;
            t.evicted = evicted;
            t.released_positions = state.wake.positions().to_vec();
            t.released_strengths = state.wake.strengths().to_vec();
        }
        state.wake.propagate(num.inflow, num.core_size, num.dt_wake);

        let downstream = self.downstream_rotor_points(n);
        let u_rotor_t1 = wake::mean(&state.wake.total_velocity(&downstream, num.inflow, num.core_size));
        let a1 = cfg.layout.virtual_turbine_induction;
        let power_t1 = wake::virtual_rotor_power(a1, u_rotor_t1, n, turbine)?;

        if let Some(t) = tape {
            t.end_positions = state.wake.positions().to_vec();
            t.downstream_speed = n.dot(&u_rotor_t1);
        }

        state.prev_control = a0;
        state.step += 1;
        Ok(StepOutput {
            power_t0,
            power_t1,
            thrust_t0: thrust,
            nacelle_x: new_nacelle_x,
            u_rotor_t1,
            platform: state.platform,
        })
    }

    /// Applies `controls` one per wake step.
    pub fn rollout(
        &self,
        initial: &CoupledState,
        controls: &[f64],
    ) -> Result<(CoupledState, Vec<StepOutput>), ModelError> {
        if controls.is_empty() {
            return Err(ModelError::InvalidInput("rollout needs at least one control".into()));
        }
        let mut state = initial.clone();
        let mut outputs = Vec::with_capacity(controls.len());
        for &a in controls {
            outputs.push(self.step_in_place(&mut state, a, None)?);
        }
        Ok((state, outputs))
    }

    /// Runs `steps` wake steps at constant induction, typically to spin the
    /// wake up from a cold start.
    pub fn spin_up(&self, initial: &CoupledState, a0: f64, steps: usize) -> Result<CoupledState, ModelError> {
        let mut state = initial.clone();
        for _ in 0..steps {
            self.step_in_place(&mut state, a0, None)?;
        }
        Ok(state)
    }
}

/// Adjoint of the coupled state: one entry per vortex point plus the
/// platform.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StateAdjoint {
    pub positions: Vec<Vec2>,
    pub strengths: Vec<f64>,
    pub platform: PlatformState,
}

impl StateAdjoint {
    pub fn zeros(points: usize) -> Self {
        StateAdjoint {
            positions: vec![Vec2::zeros(); points],
            strengths: vec![0.0; points],
            platform: PlatformState::default(),
        }
    }
}

fn add_platform(a: &mut PlatformState, b: &PlatformState) {
    a.phi += b.phi;
    a.phi_dot += b.phi_dot;
    a.x += b.x;
    a.x_dot += b.x_dot;
}

impl CoupledModel {
    /// Reverse rule of one coupled step.
    ///
    /// `next` is the adjoint of the state after the step, `w_p0` and `w_p1`
    /// the sensitivities of the cost to this step's two powers. Returns the
    /// adjoint of the state before the step and the derivative with respect
    /// to the applied induction.
    pub(crate) fn step_adjoint(
        &self,
        tape: &StepTape,
        next: &StateAdjoint,
        w_p0: f64,
        w_p1: f64,
    ) -> Result<(StateAdjoint, f64), ModelError> {
        let cfg = &self.config;
        let turbine = &cfg.turbine;
        let num = &cfg.numerical;
        let h = turbine.hub_height;
        let n = Vec2::x();
        let inv_s2 = 1.0 / (num.core_size * num.core_size);
        let q = wake::dynamic_pressure_area(turbine);
        let a = tape.a;

        let mut pos_bar = next.positions.clone();
        let mut str_bar = next.strengths.clone();
        let m = pos_bar.len();
        debug_assert_eq!(m, tape.end_positions.len());

        // virtual downstream turbine
        let a1 = cfg.layout.virtual_turbine_induction;
        let c1 = wake::power_coefficient(a1)? * q;
        let w = (1.0 - a1) * tape.downstream_speed;
        let speed_bar = w_p1 * c1 * 3.0 * w * w * (1.0 - a1);
        let downstream = self.downstream_rotor_points(n);
        let ub = n * (speed_bar / downstream.len() as f64);
        let u_bar = vec![ub; downstream.len()];
        let mut sink = vec![Vec2::zeros(); downstream.len()];
        wake::induced_field_vjp(
            &downstream,
            &u_bar,
            &tape.end_positions,
            &tape.released_strengths,
            inv_s2,
            &mut sink,
            &mut pos_bar,
            &mut str_bar,
        );

        // convection: end = released + dt (u_inf + self_induced(released))
        let vel_bar: Vec<Vec2> = pos_bar.iter().map(|p| p * num.dt_wake).collect();
        wake::self_induced_vjp(
            &tape.released_positions,
            &tape.released_strengths,
            inv_s2,
            &vel_bar,
            &mut pos_bar,
            &mut str_bar,
        );

        // release and eviction
        let ev = tape.evicted;
        let start_len = tape.start_positions.len();
        let mut out = StateAdjoint::zeros(start_len);
        for i in 0..m - 2 {
            out.positions[i + ev] = pos_bar[i];
            out.strengths[i + ev] = str_bar[i];
        }
        let release_x_bar = pos_bar[m - 2].x + pos_bar[m - 1].x;
        let dgamma_bar = str_bar[m - 2] - str_bar[m - 1];
        let ct = wake::thrust_coefficient(a, turbine.ct1)?;
        let dct = wake::thrust_coefficient_slope(a, turbine.ct1)?;
        let cp = wake::power_coefficient(a)?;
        let dcp = wake::power_coefficient_slope(a)?;
        let dt = num.dt_wake;
        let inv_sub = 1.0 / tape.sub_un.len() as f64;
        let (mut un2_mean, mut un3_mean) = (0.0, 0.0);
        for &un in &tape.sub_un {
            un2_mean += un * un * inv_sub;
            un3_mean += un * un * un * inv_sub;
        }
        let mut a_bar = dgamma_bar * dt * 0.5 * dct * un2_mean + w_p0 * dcp * q * un3_mean;

        // nacelle position after the substeps sets the release point
        let mut plat_bar = next.platform;
        let phi_end = tape.end_platform.phi;
        plat_bar.x += release_x_bar;
        plat_bar.phi -= h * phi_end.cos() * release_x_bar;

        // substeps in reverse; un_j = n . u_r - n.x V_j
        let mut ur_n_bar = 0.0;
        for (s_j, &un) in tape.sub_states.iter().zip(&tape.sub_un).rev() {
            let (prev, thrust_bar) = self.platform.step_adjoint(&plat_bar);
            plat_bar = prev;
            a_bar += thrust_bar * dct * q * un * un;
            let un_bar = thrust_bar * ct * q * 2.0 * un
                + w_p0 * inv_sub * cp * q * 3.0 * un * un
                + dgamma_bar * dt * 0.5 * ct * inv_sub * 2.0 * un;
            ur_n_bar += un_bar;
            // V = x' - h phi' cos(phi)
            let v_bar = -un_bar * n.x;
            let (sin_j, cos_j) = s_j.phi.sin_cos();
            plat_bar.phi += h * s_j.phi_dot * sin_j * v_bar;
            plat_bar.phi_dot -= h * cos_j * v_bar;
            plat_bar.x_dot += v_bar;
        }

        let ur_bar = n * ur_n_bar;
        let samples = tape.rotor_points.len();
        let u_bar = vec![ur_bar / samples as f64; samples];
        let mut eval_bar = vec![Vec2::zeros(); samples];
        wake::induced_field_vjp(
            &tape.rotor_points,
            &u_bar,
            &tape.start_positions,
            &tape.start_strengths,
            inv_s2,
            &mut eval_bar,
            &mut out.positions,
            &mut out.strengths,
        );
        let x_bar: f64 = eval_bar.iter().map(|e| e.x).sum();

        // X = x - h sin(phi) places the rotor sample line
        let s0 = tape.start_platform;
        let kin_bar = PlatformState {
            phi: -h * s0.phi.cos() * x_bar,
            phi_dot: 0.0,
            x: x_bar,
            x_dot: 0.0,
        };
        add_platform(&mut plat_bar, &kin_bar);
        out.platform = plat_bar;
        Ok((out, a_bar))
    }
}
