//! Two-dimensional free-vortex actuator-disc wake.
//!
//! The wake is a horizontal slice at hub height. Each wake step the rotor
//! sheds one pair of point vortices from its edges; existing points are
//! convected as Lagrangian markers by the free stream plus the velocity
//! induced by every other point. Induced velocities use the Biot-Savart law
//! with a Gaussian core.

use std::f64::consts::PI;

use crate::config::TurbineParams;
use crate::{ModelError, Vec2};

const INV_TWO_PI: f64 = 0.5 / PI;

/// Beyond this value of |r|^2/sigma^2 the core factor 1 - exp(-z) rounds to
/// exactly 1 in f64.
const CORE_CUTOFF: f64 = 40.0;

/// Below this value of |r|^2/sigma^2 the core-factor derivative is taken
/// from its Taylor series.
const SERIES_CUTOFF: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexPoint {
    pub position: Vec2,
    /// Circulation in m^2/s, positive counter-clockwise.
    pub strength: f64,
}

/// Core-regularised kernel g(s) = (1 - exp(-s/sigma^2)) / s with s = |r|^2.
#[inline]
pub(crate) fn core_factor(s: f64, inv_sigma2: f64) -> f64 {
    let z = s * inv_sigma2;
    if z > CORE_CUTOFF {
        1.0 / s
    } else if z == 0.0 {
        inv_sigma2
    } else {
        -(-z).exp_m1() / s
    }
}

/// g(s) together with dg/ds.
#[inline]
pub(crate) fn core_factor_and_slope(s: f64, inv_sigma2: f64) -> (f64, f64) {
    let z = s * inv_sigma2;
    if z > CORE_CUTOFF {
        let g = 1.0 / s;
        (g, -g * g)
    } else if z < SERIES_CUTOFF {
        let g = if z == 0.0 { inv_sigma2 } else { -(-z).exp_m1() / s };
        let h = -0.5 + z * (1.0 / 3.0 + z * (-1.0 / 8.0 + z * (1.0 / 30.0 - z / 144.0)));
        (g, h * inv_sigma2 * inv_sigma2)
    } else {
        let em1 = (-z).exp_m1();
        let g = -em1 / s;
        let h = (z * (em1 + 1.0) + em1) / (z * z);
        (g, h * inv_sigma2 * inv_sigma2)
    }
}

/// Velocity induced at `eval_point` by one vortex with Gaussian core `sigma`.
///
/// Exactly zero when the evaluation point coincides with the vortex.
pub fn induced_velocity(eval_point: Vec2, vortex: &VortexPoint, sigma: f64) -> Vec2 {
    let r = vortex.position - eval_point;
    let s = r.norm_squared();
    if s == 0.0 {
        return Vec2::zeros();
    }
    let f = vortex.strength * INV_TWO_PI * core_factor(s, 1.0 / (sigma * sigma));
    Vec2::new(-r.y * f, r.x * f)
}

/// Induced velocity at `x` from all sources, summed in storage order.
#[inline]
pub(crate) fn induced_field_at(x: Vec2, positions: &[Vec2], strengths: &[f64], inv_sigma2: f64) -> Vec2 {
    let mut ux = 0.0;
    let mut uy = 0.0;
    for (p, &gamma) in positions.iter().zip(strengths) {
        let rx = p.x - x.x;
        let ry = p.y - x.y;
        let s = rx * rx + ry * ry;
        if s == 0.0 {
            continue;
        }
        let f = gamma * core_factor(s, inv_sigma2);
        ux -= ry * f;
        uy += rx * f;
    }
    Vec2::new(ux * INV_TWO_PI, uy * INV_TWO_PI)
}

/// Reverse rule of [`induced_field_at`] summed over several evaluation
/// points: given adjoints `u_bar[i]` of the induced velocity at `eval[i]`,
/// accumulates adjoints of the evaluation points and of the sources.
pub(crate) fn induced_field_vjp(
    eval: &[Vec2],
    u_bar: &[Vec2],
    positions: &[Vec2],
    strengths: &[f64],
    inv_sigma2: f64,
    eval_bar: &mut [Vec2],
    pos_bar: &mut [Vec2],
    str_bar: &mut [f64],
) {
    for ((x, ub), xb) in eval.iter().zip(u_bar).zip(eval_bar.iter_mut()) {
        let ub = ub * INV_TWO_PI;
        for (j, (p, &gamma)) in positions.iter().zip(strengths).enumerate() {
            let r = p - x;
            let s = r.norm_squared();
            if s == 0.0 {
                continue;
            }
            let (g, dg) = core_factor_and_slope(s, inv_sigma2);
            // w(r) = g J r with J r = (-r_y, r_x)
            let jr = Vec2::new(-r.y, r.x);
            str_bar[j] += g * jr.dot(&ub);
            let rb = (Vec2::new(ub.y, -ub.x) * g + r * (2.0 * dg * jr.dot(&ub))) * gamma;
            pos_bar[j] += rb;
            *xb -= rb;
        }
    }
}

/// Velocity each point induces on all others, using the antisymmetry of the
/// kernel to evaluate every interaction once.
///
/// Points are grouped in consecutive pairs and each pair's two contributions
/// are added before being accumulated, so a wake that is a mirror image of
/// itself about the rotor axis stays one bit for bit. A trailing unpaired
/// point forms a group of its own.
pub(crate) fn self_induced(positions: &[Vec2], strengths: &[f64], inv_sigma2: f64) -> Vec<Vec2> {
    let n = positions.len();
    let mut vel = vec![Vec2::zeros(); n];
    let kernel = |from: usize, to: usize| {
        let r = positions[to] - positions[from];
        let s = r.norm_squared();
        if s == 0.0 {
            return Vec2::zeros();
        }
        let f = core_factor(s, inv_sigma2);
        Vec2::new(-r.y * f, r.x * f)
    };
    let groups: Vec<(usize, usize)> = (0..n).step_by(2).map(|j| (j, (j + 2).min(n))).collect();
    for (gi, &(j0, j1)) in groups.iter().enumerate() {
        // within the group
        if j1 - j0 == 2 {
            let jr = kernel(j0, j0 + 1);
            vel[j0] += jr * strengths[j0 + 1];
            vel[j0 + 1] -= jr * strengths[j0];
        }
        for &(k0, k1) in &groups[gi + 1..] {
            let mut on_k = [Vec2::zeros(); 2];
            for j in j0..j1 {
                let mut on_j = Vec2::zeros();
                for k in k0..k1 {
                    let jr = kernel(j, k);
                    on_j += jr * strengths[k];
                    on_k[k - k0] -= jr * strengths[j];
                }
                vel[j] += on_j;
            }
            for k in k0..k1 {
                vel[k] += on_k[k - k0];
            }
        }
    }
    for v in &mut vel {
        *v *= INV_TWO_PI;
    }
    vel
}

/// Reverse rule of [`self_induced`].
pub(crate) fn self_induced_vjp(
    positions: &[Vec2],
    strengths: &[f64],
    inv_sigma2: f64,
    u_bar: &[Vec2],
    pos_bar: &mut [Vec2],
    str_bar: &mut [f64],
) {
    let n = positions.len();
    for j in 0..n {
        let pj = positions[j];
        let gj = strengths[j];
        let ubj = u_bar[j] * INV_TWO_PI;
        for k in (j + 1)..n {
            let r = positions[k] - pj;
            let s = r.norm_squared();
            if s == 0.0 {
                continue;
            }
            let ubk = u_bar[k] * INV_TWO_PI;
            let (g, dg) = core_factor_and_slope(s, inv_sigma2);
            let jr = Vec2::new(-r.y, r.x);
            str_bar[k] += g * jr.dot(&ubj);
            str_bar[j] -= g * jr.dot(&ubk);
            let v = ubj * strengths[k] - ubk * gj;
            let rb = Vec2::new(v.y, -v.x) * g + r * (2.0 * dg * jr.dot(&v));
            pos_bar[k] += rb;
            pos_bar[j] -= rb;
        }
    }
}

/// Lagrangian vortex-point wake of one actuator disc.
///
/// Points are stored oldest generation first; each generation is a
/// `[edge + R t, edge - R t]` pair carrying `[+dGamma, -dGamma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WakeState {
    positions: Vec<Vec2>,
    strengths: Vec<f64>,
    max_generations: usize,
    release_origin: Vec2,
    rotor_normal: Vec2,
}

impl WakeState {
    /// Empty wake (cold start) for a rotor facing `rotor_normal`.
    pub fn new(max_generations: usize, rotor_normal: Vec2) -> Self {
        assert!(max_generations >= 1, "wake needs at least one generation");
        WakeState {
            positions: Vec::with_capacity(2 * max_generations + 2),
            strengths: Vec::with_capacity(2 * max_generations + 2),
            max_generations,
            release_origin: Vec2::zeros(),
            rotor_normal: rotor_normal.normalize(),
        }
    }

    /// Builds a wake from explicit points, oldest first. The point count must
    /// be even and each consecutive pair must carry opposite strengths.
    pub fn from_points(
        max_generations: usize,
        rotor_normal: Vec2,
        points: &[VortexPoint],
    ) -> Result<Self, ModelError> {
        if points.len() % 2 != 0 || points.len() > 2 * max_generations {
            return Err(ModelError::InvalidInput(format!(
                "wake needs an even number of points, at most {}; got {}",
                2 * max_generations,
                points.len()
            )));
        }
        for pair in points.chunks(2) {
            if pair[0].strength + pair[1].strength != 0.0 {
                return Err(ModelError::InvalidInput(
                    "each generation must carry opposite strengths".into(),
                ));
            }
        }
        let mut state = Self::new(max_generations, rotor_normal);
        state.positions = points.iter().map(|p| p.position).collect();
        state.strengths = points.iter().map(|p| p.strength).collect();
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn generations(&self) -> usize {
        self.positions.len() / 2
    }

    pub fn max_generations(&self) -> usize {
        self.max_generations
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn release_origin(&self) -> Vec2 {
        self.release_origin
    }

    pub fn rotor_normal(&self) -> Vec2 {
        self.rotor_normal
    }

    pub fn points(&self) -> impl Iterator<Item = VortexPoint> + '_ {
        self.positions
            .iter()
            .zip(&self.strengths)
            .map(|(&position, &strength)| VortexPoint { position, strength })
    }

    pub fn total_circulation(&self) -> f64 {
        self.strengths.iter().sum()
    }

    /// Free stream plus induced velocity at each evaluation point.
    pub fn total_velocity(&self, eval_points: &[Vec2], u_inf: Vec2, sigma: f64) -> Vec<Vec2> {
        let inv_s2 = 1.0 / (sigma * sigma);
        eval_points
            .iter()
            .map(|&x| u_inf + induced_field_at(x, &self.positions, &self.strengths, inv_s2))
            .collect()
    }

    /// Sheds a new pair from the rotor edges at `rotor_center` and evicts the
    /// oldest generation if the buffer overflows. Returns the number of
    /// evicted points.
    ///
    /// The shed circulation is `dt * ct'(a)/2 * (n . u_rel)^2`, oriented so
    /// that the pair induces a velocity opposing the rotor normal between
    /// its points.
    pub fn release_pair(
        &mut self,
        rotor_center: Vec2,
        a: f64,
        u_rel: Vec2,
        dt_wake: f64,
        params: &TurbineParams,
    ) -> Result<usize, ModelError> {
        let un = self.rotor_normal.dot(&u_rel);
        let dgamma = dt_wake * 0.5 * thrust_coefficient(a, params.ct1)? * un * un;
        Ok(self.release_circulation(rotor_center, dgamma, params.rotor_radius()))
    }

    /// Sheds `+dgamma` at the upper edge and `-dgamma` at the lower edge of
    /// a rotor of radius `radius`; returns the number of evicted points.
    pub fn release_circulation(&mut self, rotor_center: Vec2, dgamma: f64, radius: f64) -> usize {
        let t = rotor_tangent(self.rotor_normal);
        self.positions.push(rotor_center + t * radius);
        self.strengths.push(dgamma);
        self.positions.push(rotor_center - t * radius);
        self.strengths.push(-dgamma);
        self.release_origin = rotor_center;
        self.evict_overflow()
    }

    fn evict_overflow(&mut self) -> usize {
        let excess = self.len().saturating_sub(2 * self.max_generations);
        if excess > 0 {
            self.positions.drain(..excess);
            self.strengths.drain(..excess);
        }
        excess
    }

    /// Explicit-Euler convection of every point by the free stream plus the
    /// velocity induced by all other points.
    pub fn propagate(&mut self, u_inf: Vec2, sigma: f64, dt_wake: f64) {
        let vel = self_induced(&self.positions, &self.strengths, 1.0 / (sigma * sigma));
        for (p, v) in self.positions.iter_mut().zip(vel) {
            *p += (u_inf + v) * dt_wake;
        }
    }

    /// Mean total velocity over `rotor_samples` points along a rotor line of
    /// one diameter.
    pub fn rotor_average_velocity(
        &self,
        rotor_center: Vec2,
        n: Vec2,
        diameter: f64,
        u_inf: Vec2,
        sigma: f64,
        rotor_samples: usize,
    ) -> Vec2 {
        let pts = rotor_line(rotor_center, n, diameter, rotor_samples);
        mean(&self.total_velocity(&pts, u_inf, sigma))
    }
}

pub(crate) fn mean(v: &[Vec2]) -> Vec2 {
    let sum = v.iter().fold(Vec2::zeros(), |acc, x| acc + x);
    sum / v.len() as f64
}

/// Unit vector along the rotor line, normal rotated a quarter turn
/// counter-clockwise.
pub fn rotor_tangent(n: Vec2) -> Vec2 {
    Vec2::new(-n.y, n.x)
}

/// Uniform sample points across a rotor line, endpoints inset by half a
/// spacing so the edges where vortices are shed are never sampled.
pub fn rotor_line(center: Vec2, n: Vec2, diameter: f64, samples: usize) -> Vec<Vec2> {
    let t = rotor_tangent(n);
    let spacing = diameter / samples as f64;
    (0..samples)
        .map(|i| center + t * (-0.5 * diameter + (i as f64 + 0.5) * spacing))
        .collect()
}

fn check_induction(a: f64) -> Result<(), ModelError> {
    if (0.0..1.0).contains(&a) {
        Ok(())
    } else {
        Err(ModelError::InductionDomain(a))
    }
}

/// Induction at which the momentum and Glauert-corrected branches of the
/// local thrust coefficient meet.
pub fn transition_induction(ct1: f64) -> f64 {
    1.0 - 0.5 * ct1.sqrt()
}

/// Local (disc-velocity based) thrust coefficient with the empirical
/// high-induction correction.
pub fn thrust_coefficient(a: f64, ct1: f64) -> Result<f64, ModelError> {
    check_induction(a)?;
    let b = 1.0 - a;
    if a <= transition_induction(ct1) {
        Ok(4.0 * a / b)
    } else {
        Ok((ct1 - 4.0 * (ct1.sqrt() - 1.0) * b) / (b * b))
    }
}

/// d ct'/da on the active branch.
pub fn thrust_coefficient_slope(a: f64, ct1: f64) -> Result<f64, ModelError> {
    check_induction(a)?;
    let b = 1.0 - a;
    if a <= transition_induction(ct1) {
        Ok(4.0 / (b * b))
    } else {
        Ok(2.0 * ct1 / (b * b * b) - 4.0 * (ct1.sqrt() - 1.0) / (b * b))
    }
}

pub fn power_coefficient(a: f64) -> Result<f64, ModelError> {
    check_induction(a)?;
    Ok(4.0 * a / (1.0 - a))
}

pub fn power_coefficient_slope(a: f64) -> Result<f64, ModelError> {
    check_induction(a)?;
    let b = 1.0 - a;
    Ok(4.0 / (b * b))
}

/// Dynamic pressure factor 1/2 rho A_r.
pub fn dynamic_pressure_area(params: &TurbineParams) -> f64 {
    0.5 * params.air_density * params.rotor_area()
}

/// Rotor thrust along the normal, from the velocity relative to the rotor.
pub fn thrust(a: f64, u_rel: Vec2, n: Vec2, params: &TurbineParams) -> Result<f64, ModelError> {
    let un = n.dot(&u_rel);
    Ok(thrust_coefficient(a, params.ct1)? * dynamic_pressure_area(params) * un * un)
}

/// Rotor power from the velocity relative to the rotor.
pub fn power(a: f64, u_rel: Vec2, n: Vec2, params: &TurbineParams) -> Result<f64, ModelError> {
    let un = n.dot(&u_rel);
    Ok(power_coefficient(a)? * dynamic_pressure_area(params) * un * un * un)
}

/// Power of a turbine that is not represented in the wake: the sampled
/// velocity is reduced by its own induction first.
pub fn virtual_rotor_power(a: f64, u_r: Vec2, n: Vec2, params: &TurbineParams) -> Result<f64, ModelError> {
    power(a, u_r * (1.0 - a), n, params)
}
