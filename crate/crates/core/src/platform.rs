//! Linear pitch/surge platform dynamics.
//!
//! Pitch and surge are independent mass-spring-damper systems driven by the
//! same rotor thrust. The pitch equation follows the convention
//! `I phi'' = -T h - k phi - c phi'`, so a downwind thrust drives `phi`
//! negative and tilts the nacelle downwind.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2};
use num_complex::Complex64;

use crate::config::{PlatformMode, PlatformParams};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlatformState {
    pub phi: f64,
    pub phi_dot: f64,
    pub x: f64,
    pub x_dot: f64,
}

impl PlatformState {
    pub fn pitch(&self) -> Vector2<f64> {
        Vector2::new(self.phi, self.phi_dot)
    }

    pub fn surge(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.x_dot)
    }

    pub fn from_parts(pitch: Vector2<f64>, surge: Vector2<f64>) -> Self {
        PlatformState {
            phi: pitch[0],
            phi_dot: pitch[1],
            x: surge[0],
            x_dot: surge[1],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.phi_dot.is_finite() && self.x.is_finite() && self.x_dot.is_finite()
    }

    /// Nacelle position and velocity along the wind axis at height `h`.
    pub fn nacelle_kinematics(&self, h: f64) -> (f64, f64) {
        let (s, c) = self.phi.sin_cos();
        (self.x - h * s, self.x_dot - h * self.phi_dot * c)
    }
}

/// Continuous-time state-space matrices of both degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousPlatform {
    pub a_pitch: Matrix2<f64>,
    pub b_pitch: Vector2<f64>,
    pub a_surge: Matrix2<f64>,
    pub b_surge: Vector2<f64>,
}

pub fn assemble_continuous(params: &PlatformParams, h: f64) -> ContinuousPlatform {
    let iyy = params.total_inertia();
    let m = params.total_mass();
    ContinuousPlatform {
        a_pitch: Matrix2::new(0.0, 1.0, -params.pitch_stiffness / iyy, -params.pitch_damping / iyy),
        b_pitch: Vector2::new(0.0, -h / iyy),
        a_surge: Matrix2::new(0.0, 1.0, -params.surge_stiffness / m, -params.surge_damping / m),
        b_surge: Vector2::new(0.0, 1.0 / m),
    }
}

/// Undamped natural frequencies (pitch, surge) in Hz.
pub fn natural_frequencies(params: &PlatformParams) -> (f64, f64) {
    (
        (params.pitch_stiffness / params.total_inertia()).sqrt() / (2.0 * PI),
        (params.surge_stiffness / params.total_mass()).sqrt() / (2.0 * PI),
    )
}

/// `(exp(lambda t) - 1) / lambda`, continuous through lambda = 0.
fn phi1(lambda: Complex64, t: f64) -> Complex64 {
    let z = lambda * t;
    if z.norm() < 1e-5 {
        t * (1.0 + z * (0.5 + z / 6.0))
    } else {
        (z.exp() - 1.0) / lambda
    }
}

/// Zero-order-hold discretisation of `x' = A x + B u` over `dt`.
///
/// Returns `(exp(A dt), int_0^dt exp(A s) ds B)`, i.e. the top blocks of the
/// exponential of the augmented matrix `[[A, B], [0, 0]] dt`. For a 2x2
/// `A` with mean eigenvalue `mu` and half-split `delta`, any matrix function
/// is `alpha I + beta (A - mu I)` with `alpha`, `beta` the even and odd
/// parts of the scalar function at `mu +- delta`; near repeated
/// eigenvalues the augmented exponential is evaluated numerically instead.
pub fn discretize_zoh(a: &Matrix2<f64>, b: &Vector2<f64>, dt: f64) -> (Matrix2<f64>, Vector2<f64>) {
    assert!(dt > 0.0, "time step must be positive");
    let mu = 0.5 * a.trace();
    let disc = mu * mu - a.determinant();
    if disc.abs() * dt * dt < 1e-8 {
        return augmented_exponential(a, b, dt);
    }
    let delta = Complex64::new(disc, 0.0).sqrt();
    let l1 = Complex64::new(mu, 0.0) + delta;
    let l2 = Complex64::new(mu, 0.0) - delta;
    let e1 = (l1 * dt).exp();
    let e2 = (l2 * dt).exp();
    let alpha_e = (0.5 * (e1 + e2)).re;
    let beta_e = ((e1 - e2) / (2.0 * delta)).re;
    let p1 = phi1(l1, dt);
    let p2 = phi1(l2, dt);
    let alpha_p = (0.5 * (p1 + p2)).re;
    let beta_p = ((p1 - p2) / (2.0 * delta)).re;
    let shifted = a - Matrix2::identity() * mu;
    let ad = Matrix2::identity() * alpha_e + shifted * beta_e;
    let integral = Matrix2::identity() * alpha_p + shifted * beta_p;
    (ad, integral * b)
}

fn augmented_exponential(a: &Matrix2<f64>, b: &Vector2<f64>, dt: f64) -> (Matrix2<f64>, Vector2<f64>) {
    let m = Matrix3::new(
        a[(0, 0)] * dt,
        a[(0, 1)] * dt,
        b[0] * dt,
        a[(1, 0)] * dt,
        a[(1, 1)] * dt,
        b[1] * dt,
        0.0,
        0.0,
        0.0,
    );
    let e = m.exp();
    (
        Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]),
        Vector2::new(e[(0, 2)], e[(1, 2)]),
    )
}

/// Spectral radius of a real 2x2 matrix.
pub fn spectral_radius(m: &Matrix2<f64>) -> f64 {
    let mu = 0.5 * m.trace();
    let disc = Complex64::new(mu * mu - m.determinant(), 0.0).sqrt();
    (Complex64::new(mu, 0.0) + disc).norm().max((Complex64::new(mu, 0.0) - disc).norm())
}

/// Discrete platform model at the floater time step. Inactive degrees of
/// freedom get `Ad = I`, `Bd = 0` so they stay where they start (at rest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePlatform {
    pub ad_pitch: Matrix2<f64>,
    pub bd_pitch: Vector2<f64>,
    pub ad_surge: Matrix2<f64>,
    pub bd_surge: Vector2<f64>,
    pub dt_floater: f64,
    pub f_pitch: f64,
    pub f_surge: f64,
    pub mode: PlatformMode,
}

impl DiscretePlatform {
    pub fn new(params: &PlatformParams, h: f64, dt_floater: f64, mode: PlatformMode) -> Self {
        let cont = assemble_continuous(params, h);
        let (mut ad_pitch, mut bd_pitch) = discretize_zoh(&cont.a_pitch, &cont.b_pitch, dt_floater);
        let (mut ad_surge, mut bd_surge) = discretize_zoh(&cont.a_surge, &cont.b_surge, dt_floater);
        if !mode.pitch_active() {
            ad_pitch = Matrix2::identity();
            bd_pitch = Vector2::zeros();
        }
        if !mode.surge_active() {
            ad_surge = Matrix2::identity();
            bd_surge = Vector2::zeros();
        }
        let (f_pitch, f_surge) = natural_frequencies(params);
        DiscretePlatform {
            ad_pitch,
            bd_pitch,
            ad_surge,
            bd_surge,
            dt_floater,
            f_pitch,
            f_surge,
            mode,
        }
    }

    pub fn from_config(cfg: &crate::SimConfig) -> Self {
        Self::new(&cfg.platform, cfg.turbine.hub_height, cfg.numerical.dt_floater, cfg.mode)
    }

    /// One floater step with thrust held constant.
    pub fn step(&self, state: &PlatformState, thrust: f64) -> PlatformState {
        PlatformState::from_parts(
            self.ad_pitch * state.pitch() + self.bd_pitch * thrust,
            self.ad_surge * state.surge() + self.bd_surge * thrust,
        )
    }

    /// Reverse rule of [`step`](Self::step): maps the adjoint of the new
    /// state to the adjoint of the old state and returns the thrust adjoint.
    pub fn step_adjoint(&self, adj_next: &PlatformState) -> (PlatformState, f64) {
        let lp = adj_next.pitch();
        let ls = adj_next.surge();
        let t_bar = self.bd_pitch.dot(&lp) + self.bd_surge.dot(&ls);
        (
            PlatformState::from_parts(self.ad_pitch.transpose() * lp, self.ad_surge.transpose() * ls),
            t_bar,
        )
    }

    pub fn is_moving(&self) -> bool {
        self.mode != PlatformMode::Fixed
    }

    /// Small-angle thrust-to-nacelle response of the sampled system that
    /// holds thrust for `substeps` floater steps and reads the nacelle
    /// position at the end of them.
    pub fn nacelle_transfer(&self, h: f64, substeps: usize, f: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * f * substeps as f64 * self.dt_floater);
        let block = |ad: &Matrix2<f64>, bd: &Vector2<f64>, c: [f64; 2]| {
            let mut a = Matrix2::identity();
            let mut b = Vector2::zeros();
            for _ in 0..substeps {
                b = ad * b + bd;
                a = ad * a;
            }
            // z (zI - A)^-1 B, projected on c
            let m = [
                [z - a[(0, 0)], Complex64::from(-a[(0, 1)])],
                [Complex64::from(-a[(1, 0)]), z - a[(1, 1)]],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let x0 = (m[1][1] * b[0] - m[0][1] * b[1]) / det;
            let x1 = (m[0][0] * b[1] - m[1][0] * b[0]) / det;
            z * (c[0] * x0 + c[1] * x1)
        };
        block(&self.ad_pitch, &self.bd_pitch, [-h, 0.0]) + block(&self.ad_surge, &self.bd_surge, [1.0, 0.0])
    }
}

/// Static equilibrium under a constant thrust.
pub fn static_deflection(params: &PlatformParams, h: f64, thrust: f64) -> PlatformState {
    PlatformState {
        phi: -thrust * h / params.pitch_stiffness,
        phi_dot: 0.0,
        x: thrust / params.surge_stiffness,
        x_dot: 0.0,
    }
}
