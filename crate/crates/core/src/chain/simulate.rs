//! Gillespie realizations of the jump process and the deviation from the
//! mean dynamic.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::StateGrid;
use super::{apply_jump, transitions_from, FiniteChain, Jump};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::game::PopulationGame;
use crate::par::{map_slice, ExecMode};
use crate::protocol::RevisionProtocol;
use crate::table::{Provenance, StationaryTable};

/// Name of the generator behind every seed.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// Anything that can list the outgoing jumps of a lattice state.
pub trait JumpSource: Sync {
    fn strategy_counts(&self) -> &[usize];
    fn sizes(&self) -> &[u64];
    fn transitions(&self, counts: &[u32], out: &mut Vec<(f64, Jump)>) -> Result<()>;
}

/// Rates computed from the game and protocol at each visited state, without a grid.
pub struct OnTheFly<'a> {
    pub game: &'a PopulationGame,
    pub protocol: &'a RevisionProtocol,
    pub sizes: Vec<u64>,
}

impl JumpSource for OnTheFly<'_> {
    fn strategy_counts(&self) -> &[usize] {
        self.game.strategy_counts()
    }

    fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    fn transitions(&self, counts: &[u32], out: &mut Vec<(f64, Jump)>) -> Result<()> {
        transitions_from(self.game, self.protocol, counts, &self.sizes, |q, j| {
            out.push((q, j))
        })
    }
}

impl JumpSource for FiniteChain {
    fn strategy_counts(&self) -> &[usize] {
        self.grid().strategy_counts()
    }

    fn sizes(&self) -> &[u64] {
        self.grid().sizes()
    }

    fn transitions(&self, counts: &[u32], out: &mut Vec<(f64, Jump)>) -> Result<()> {
        let s = self
            .grid()
            .index_of(counts)
            .ok_or_else(|| Error::InvalidState(format!("{counts:?} is not on the grid")))?;
        out.extend(self.row(s).map(|(_, q, j)| (q, j)));
        Ok(())
    }
}

/// Piecewise-constant sample path: `states[k]` holds on `[times[k], times[k+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    states: Vec<u32>,
    width: usize,
    strategy_counts: Vec<usize>,
    sizes: Vec<u64>,
    pub horizon: f64,
    pub seed: u64,
}

impl Path {
    /// A path that never jumps.
    pub fn constant(
        counts: Vec<u32>,
        strategy_counts: Vec<usize>,
        sizes: Vec<u64>,
        horizon: f64,
    ) -> Self {
        Self {
            times: vec![0.0],
            width: counts.len(),
            states: counts,
            strategy_counts,
            sizes,
            horizon,
            seed: 0,
        }
    }

    pub fn num_events(&self) -> usize {
        self.times.len() - 1
    }

    pub fn state(&self, k: usize) -> &[u32] {
        &self.states[k * self.width..(k + 1) * self.width]
    }

    pub fn final_state(&self) -> &[u32] {
        self.state(self.times.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[u32])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks(self.width))
    }

    /// State in force at time `t`.
    pub fn state_at(&self, t: f64) -> &[u32] {
        let k = self.times.partition_point(|&s| s <= t).max(1) - 1;
        self.state(k)
    }

    fn fractions(&self, k: usize) -> Vec<f64> {
        let mut scale = Vec::with_capacity(self.width);
        for (&n, &size) in self.strategy_counts.iter().zip(&self.sizes) {
            scale.extend(std::iter::repeat_n(size as f64, n));
        }
        self.state(k)
            .iter()
            .zip(&scale)
            .map(|(&c, s)| c as f64 / s)
            .collect()
    }

    /// Time-weighted occupancy of `[burn_in, horizon]`.
    pub fn occupancy(&self, grid: &Arc<StateGrid>, burn_in: f64) -> Result<StationaryTable> {
        if !(burn_in >= 0.0 && burn_in < self.horizon) {
            return Err(Error::Precondition(format!(
                "burn-in {burn_in} must lie in [0, {})",
                self.horizon
            )));
        }
        let mut weights = vec![0.0; grid.len()];
        for k in 0..self.times.len() {
            let start = self.times[k].max(burn_in);
            let end = self.times.get(k + 1).copied().unwrap_or(self.horizon);
            if end > start {
                let s = grid.index_of(self.state(k)).ok_or_else(|| {
                    Error::GridMismatch(format!("{:?} is not on the grid", self.state(k)))
                })?;
                weights[s] += end - start;
            }
        }
        Ok(
            StationaryTable::from_weights(grid.clone(), weights, Provenance::Empirical)?
                .with_meta("rng", RNG_NAME)
                .with_meta("seed", self.seed.to_string())
                .with_meta("burn_in", format!("{burn_in}")),
        )
    }
}

/// One Gillespie path from `x0` (concatenated counts) up to `horizon`.
pub fn simulate_path(source: &dyn JumpSource, x0: &[u32], horizon: f64, seed: u64) -> Result<Path> {
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(Error::Precondition(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let strategy_counts = source.strategy_counts().to_vec();
    let width: usize = strategy_counts.iter().sum();
    if x0.len() != width {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} counts, expected {width}",
            x0.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = x0.to_vec();
    let mut times = vec![0.0];
    let mut states = counts.clone();
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        out.clear();
        source.transitions(&counts, &mut out)?;
        let total: f64 = out.iter().map(|(q, _)| q).sum();
        if total <= 0.0 {
            break;
        }
        let u: f64 = 1.0 - rng.random::<f64>();
        t += -u.ln() / total;
        if t > horizon {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = out[out.len() - 1].1;
        for &(q, j) in &out {
            acc += q;
            if target < acc {
                chosen = j;
                break;
            }
        }
        apply_jump(&mut counts, &strategy_counts, chosen);
        times.push(t);
        states.extend_from_slice(&counts);
    }
    Ok(Path {
        times,
        states,
        width,
        strategy_counts,
        sizes: source.sizes().to_vec(),
        horizon,
        seed,
    })
}

/// Independent paths, one per seed, in seed order.
pub fn simulate_ensemble(
    source: &dyn JumpSource,
    x0: &[u32],
    horizon: f64,
    seeds: &[u64],
    mode: ExecMode,
) -> Result<Vec<Path>> {
    map_slice(seeds, mode, |&seed| {
        simulate_path(source, x0, horizon, seed)
    })
    .into_iter()
    .collect()
}

/// `sup_{t <= T} ||X_t - x_t||_inf` with `X` piecewise constant and `x`
/// linearly interpolated between trajectory points.
///
/// On each interval between consecutive merged event/grid times the
/// difference is affine, so checking both one-sided limits at every merged
/// time gives the exact supremum.
pub fn deviation_vs_ode(path: &Path, trajectory: &Trajectory) -> Result<f64> {
    let horizon = trajectory.horizon();
    if (path.horizon - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::Precondition(format!(
            "path horizon {} differs from trajectory horizon {horizon}",
            path.horizon
        )));
    }
    if trajectory.states[0].flat().len() != path.width {
        return Err(Error::DimensionMismatch(format!(
            "path has {} coordinates, trajectory has {}",
            path.width,
            trajectory.states[0].flat().len()
        )));
    }
    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    let mut worst = 0.0_f64;
    let mut k = 0;
    let mut current = path.fractions(0);
    for (s, &t) in trajectory.times.iter().enumerate() {
        // jumps strictly before this grid time
        while k + 1 < path.times.len() && path.times[k + 1] < t {
            k += 1;
            let tau = path.times[k];
            let ode = trajectory.interpolate(tau);
            worst = worst.max(sup(&current, &ode));
            current = path.fractions(k);
            worst = worst.max(sup(&current, &ode));
        }
        let ode = trajectory.states[s].flat();
        worst = worst.max(sup(&current, &ode));
        if k + 1 < path.times.len() && path.times[k + 1] == t {
            k += 1;
            current = path.fractions(k);
            worst = worst.max(sup(&current, &ode));
        }
    }
    Ok(worst)
}
