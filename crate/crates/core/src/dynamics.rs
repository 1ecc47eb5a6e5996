//! The mean dynamic `x_i' = sum_j x_j rho_ji - x_i sum_j rho_ij` and a
//! fixed-step RK4 integrator for it.

use crate::error::{Error, Result};
use crate::game::{PopulationGame, SocialState};
use crate::protocol::{evaluate_rates, RevisionProtocol};

pub const DEFAULT_DT: f64 = 0.01;

/// Velocity of the mean dynamic at `state`, one vector per population.
pub fn mean_dynamic_rhs(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    state: &SocialState,
) -> Result<Vec<Vec<f64>>> {
    let rates = evaluate_rates(protocol, &game.payoffs(state), state)?;
    Ok(state
        .parts
        .iter()
        .zip(&rates)
        .map(|(x, rho)| {
            let n = x.len();
            (0..n)
                .map(|i| {
                    let mut v = 0.0;
                    for j in 0..n {
                        if j != i {
                            v += x[j] * rho.get(j, i) - x[i] * rho.get(i, j);
                        }
                    }
                    v
                })
                .collect()
        })
        .collect())
}

/// A negative coordinate that was clamped to zero after an RK4 step.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampEvent {
    pub step: usize,
    pub population: usize,
    pub strategy: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SocialState>,
    pub dt: f64,
    pub clamp_events: Vec<ClampEvent>,
}

impl Trajectory {
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &SocialState {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }

    /// Linear interpolation between grid points, flattened across populations.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let last = self.times.len() - 1;
        if t <= 0.0 || last == 0 {
            return self.states[0].flat();
        }
        let pos = t / self.dt;
        let k = (pos.floor() as usize).min(last);
        if k >= last {
            return self.states[last].flat();
        }
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let (a, b) = (self.states[k].flat(), self.states[k + 1].flat());
        a.iter().zip(&b).map(|(u, v)| u + w * (v - u)).collect()
    }

    /// Largest `|sum_i x_i^p - m^p|` along the trajectory.
    pub fn max_mass_drift(&self, masses: &[f64]) -> f64 {
        self.states
            .iter()
            .flat_map(|s| {
                s.parts
                    .iter()
                    .zip(masses)
                    .map(|(x, m)| (x.iter().sum::<f64>() - m).abs())
            })
            .fold(0.0, f64::max)
    }
}

fn axpy(x: &SocialState, h: f64, k: &[Vec<f64>]) -> SocialState {
    SocialState::new(
        x.parts
            .iter()
            .zip(k)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + h * v).collect())
            .collect(),
    )
}

fn rk4_step(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    x: &SocialState,
    dt: f64,
) -> Result<SocialState> {
    let k1 = mean_dynamic_rhs(game, protocol, x)?;
    let k2 = mean_dynamic_rhs(game, protocol, &axpy(x, dt / 2.0, &k1))?;
    let k3 = mean_dynamic_rhs(game, protocol, &axpy(x, dt / 2.0, &k2))?;
    let k4 = mean_dynamic_rhs(game, protocol, &axpy(x, dt, &k3))?;
    Ok(SocialState::new(
        x.parts
            .iter()
            .enumerate()
            .map(|(p, xp)| {
                xp.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v + dt / 6.0 * (k1[p][i] + 2.0 * k2[p][i] + 2.0 * k3[p][i] + k4[p][i])
                    })
                    .collect()
            })
            .collect(),
    ))
}

/// Removes mass drift and clamps negative coordinates, logging each clamp.
fn project(
    game: &PopulationGame,
    x: &mut SocialState,
    step: usize,
    time: f64,
    events: &mut Vec<ClampEvent>,
) -> Result<()> {
    for (p, part) in x.parts.iter_mut().enumerate() {
        let m = game.masses()[p];
        if part.iter().any(|v| !v.is_finite() || v.abs() > 10.0 * m) {
            return Err(Error::IntegrationDiverged { step, time });
        }
        let drift = (part.iter().sum::<f64>() - m) / part.len() as f64;
        part.iter_mut().for_each(|v| *v -= drift);
        let mut clamped = false;
        for (i, v) in part.iter_mut().enumerate() {
            if *v < 0.0 {
                events.push(ClampEvent {
                    step,
                    population: p,
                    strategy: i,
                    value: *v,
                });
                *v = 0.0;
                clamped = true;
            }
        }
        if clamped {
            let total: f64 = part.iter().sum();
            part.iter_mut().for_each(|v| *v *= m / total);
        }
    }
    Ok(())
}

/// Fixed-step RK4 from `x0` over `[0, horizon]`.
///
/// `horizon / dt` must be an integer (to 1e-9 relative); the trajectory then
/// holds `horizon / dt + 1` states at times `k * dt`.
pub fn integrate_mean_dynamic(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    x0: &SocialState,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(horizon > 0.0 && dt > 0.0 && dt <= horizon) {
        return Err(Error::Precondition(format!(
            "need 0 < dt <= T, got dt = {dt}, T = {horizon}"
        )));
    }
    let ratio = horizon / dt;
    let steps = ratio.round() as usize;
    if (ratio - steps as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Precondition(format!(
            "T = {horizon} is not a multiple of dt = {dt}"
        )));
    }
    game.check_state_within(x0, 1e-9, 0.0)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut events = Vec::new();
    let mut x = x0.clone();
    times.push(0.0);
    states.push(x.clone());
    for step in 1..=steps {
        let t = step as f64 * dt;
        x = rk4_step(game, protocol, &x, dt)?;
        project(game, &mut x, step, t, &mut events)?;
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory {
        times,
        states,
        dt,
        clamp_events: events,
    })
}

#[derive(Debug, Clone)]
pub struct RestPoint {
    pub state: SocialState,
    /// `max |x'|` at `state`.
    pub residual: f64,
    pub converged: bool,
}

/// Integrates from `x0` until `||x'||_inf <= tol` or `max_time` elapses.
pub fn find_rest_point(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    x0: &SocialState,
    tol: f64,
    max_time: f64,
) -> Result<RestPoint> {
    let dt = DEFAULT_DT;
    let mut x = x0.clone();
    let mut events = Vec::new();
    let steps = (max_time / dt).ceil() as usize;
    let residual = |x: &SocialState| -> Result<f64> {
        Ok(mean_dynamic_rhs(game, protocol, x)?
            .iter()
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs())))
    };
    let mut r = residual(&x)?;
    for step in 1..=steps {
        if r <= tol {
            break;
        }
        x = rk4_step(game, protocol, &x, dt)?;
        project(game, &mut x, step, step as f64 * dt, &mut events)?;
        r = residual(&x)?;
    }
    Ok(RestPoint {
        converged: r <= tol,
        residual: r,
        state: x,
    })
}
