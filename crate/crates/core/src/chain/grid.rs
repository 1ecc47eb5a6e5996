//! Enumeration of the lattice `X^N` and its dense index.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::{PopulationGame, SocialState};

/// Default ceiling on the number of grid states.
pub const DEFAULT_GRID_LIMIT: usize = 2_000_000;

/// `C(total + n - 1, n - 1)`, saturating at `u128::MAX`.
pub fn composition_count(n: usize, total: u64) -> u128 {
    let k = (n as u128).saturating_sub(1);
    let top = total as u128 + k;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (top - k + i) / i stays integral at every step
        acc = match acc.checked_mul(top - k + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// All compositions of `total` into `n` nonnegative parts, lexicographically ascending.
pub fn compositions(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, left: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=left {
            prefix.push(first);
            fill(prefix, left - first, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    fill(&mut Vec::with_capacity(n), total, n, &mut out);
    out
}

/// Product lattice over populations; population `p` holds `totals[p] = N^p m^p` agents.
#[derive(Debug, Clone)]
pub struct StateGrid {
    strategy_counts: Vec<usize>,
    sizes: Vec<u64>,
    totals: Vec<u32>,
    width: usize,
    states: Vec<u32>,
    index: HashMap<Box<[u32]>, usize>,
}

impl PartialEq for StateGrid {
    fn eq(&self, other: &Self) -> bool {
        self.strategy_counts == other.strategy_counts
            && self.sizes == other.sizes
            && self.totals == other.totals
    }
}

impl StateGrid {
    /// Grid for `game` with population sizes `sizes` (one `N^p` per population).
    pub fn for_game(game: &PopulationGame, sizes: &[u64], limit: usize) -> Result<Self> {
        if sizes.len() != game.num_populations() {
            return Err(Error::DimensionMismatch(format!(
                "{} population sizes for {} populations",
                sizes.len(),
                game.num_populations()
            )));
        }
        let mut totals = Vec::with_capacity(sizes.len());
        for (p, (&n, &m)) in sizes.iter().zip(game.masses()).enumerate() {
            if n == 0 {
                return Err(Error::Precondition(format!(
                    "population {} has N = 0",
                    p + 1
                )));
            }
            let agents = n as f64 * m;
            if (agents - agents.round()).abs() > 1e-9 {
                return Err(Error::Precondition(format!(
                    "population {}: N * m = {agents} is not an integer",
                    p + 1
                )));
            }
            totals.push(agents.round() as u32);
        }
        Self::build(
            game.strategy_counts().to_vec(),
            sizes.to_vec(),
            totals,
            limit,
        )
    }

    pub(crate) fn build(
        strategy_counts: Vec<usize>,
        sizes: Vec<u64>,
        totals: Vec<u32>,
        limit: usize,
    ) -> Result<Self> {
        let size = strategy_counts
            .iter()
            .zip(&totals)
            .map(|(&n, &k)| composition_count(n, k as u64))
            .try_fold(1u128, |acc, c| acc.checked_mul(c))
            .unwrap_or(u128::MAX);
        if size > limit as u128 {
            return Err(Error::GridTooLarge { size, limit });
        }
        let per_pop: Vec<Vec<Vec<u32>>> = strategy_counts
            .iter()
            .zip(&totals)
            .map(|(&n, &k)| compositions(n, k))
            .collect();
        let width: usize = strategy_counts.iter().sum();
        let count = size as usize;
        let mut states = Vec::with_capacity(count * width);
        let mut idx = vec![0usize; per_pop.len()];
        'outer: loop {
            for (p, &i) in idx.iter().enumerate() {
                states.extend_from_slice(&per_pop[p][i]);
            }
            let mut p = per_pop.len();
            loop {
                if p == 0 {
                    break 'outer;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < per_pop[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
        let index = states
            .chunks(width)
            .enumerate()
            .map(|(i, s)| (s.to_vec().into_boxed_slice(), i))
            .collect();
        Ok(Self {
            strategy_counts,
            sizes,
            totals,
            width,
            states,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn totals(&self) -> &[u32] {
        &self.totals
    }

    /// Concatenated counts of state `i`.
    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i * self.width..(i + 1) * self.width]
    }

    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.states.chunks(self.width)
    }

    /// `x_i^p = k_i^p / N^p`.
    pub fn social_state(&self, i: usize) -> SocialState {
        counts_to_state(self.state(i), &self.strategy_counts, &self.sizes)
    }

    /// Checks that two tables can be compared state by state.
    pub fn ensure_same(&self, other: &StateGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "strategies {:?}/{:?}, totals {:?}/{:?}",
                self.strategy_counts, other.strategy_counts, self.totals, other.totals
            )))
        }
    }
}

pub(crate) fn counts_to_state(
    counts: &[u32],
    strategy_counts: &[usize],
    sizes: &[u64],
) -> SocialState {
    let mut parts = Vec::with_capacity(strategy_counts.len());
    let mut at = 0;
    for (&n, &size) in strategy_counts.iter().zip(sizes) {
        parts.push(
            counts[at..at + n]
                .iter()
                .map(|&k| k as f64 / size as f64)
                .collect(),
        );
        at += n;
    }
    SocialState::new(parts)
}

/// Single-population grid of `n` strategies and `population` agents of unit mass.
pub fn enumerate_states(n: usize, population: u32) -> Result<StateGrid> {
    enumerate_states_with_limit(n, population, DEFAULT_GRID_LIMIT)
}

pub fn enumerate_states_with_limit(n: usize, population: u32, limit: usize) -> Result<StateGrid> {
    if n < 2 || population < 1 {
        return Err(Error::Precondition(format!(
            "need n >= 2 and N >= 1, got n = {n}, N = {population}"
        )));
    }
    StateGrid::build(vec![n], vec![population as u64], vec![population], limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grids() {
        assert_eq!(enumerate_states(3, 2).unwrap().len(), 6);
        let line = enumerate_states(2, 5).unwrap();
        assert_eq!(line.len(), 6);
        let listed: Vec<Vec<u32>> = line.iter().map(<[u32]>::to_vec).collect();
        assert_eq!(
            listed,
            vec![
                vec![0, 5],
                vec![1, 4],
                vec![2, 3],
                vec![3, 2],
                vec![4, 1],
                vec![5, 0]
            ]
        );
    }

    #[test]
    fn four_strategies_ten_agents() {
        // C(13, 3)
        let oracle = (11..=13).product::<u128>() / 6;
        assert_eq!(oracle, 286);
        assert_eq!(composition_count(4, 10), oracle);
        assert_eq!(enumerate_states(4, 10).unwrap().len(), 286);
    }

    #[test]
    fn index_is_bijective() {
        let g = enumerate_states(4, 6).unwrap();
        for (i, s) in g.iter().enumerate() {
            assert_eq!(g.index_of(s), Some(i));
            assert_eq!(s.iter().sum::<u32>(), 6);
        }
        let mut sorted: Vec<Vec<u32>> = g.iter().map(<[u32]>::to_vec).collect();
        sorted.dedup();
        assert_eq!(sorted.len(), g.len());
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn too_large() {
        let err = enumerate_states_with_limit(3, 100, 1000).unwrap_err();
        assert_eq!(
            err,
            Error::GridTooLarge {
                size: 5151,
                limit: 1000
            }
        );
    }

    #[test]
    fn product_grid() {
        let g = StateGrid::build(vec![2, 3], vec![2, 2], vec![2, 2], 1000).unwrap();
        assert_eq!(g.len(), 3 * 6);
        assert_eq!(g.state(0), &[0, 2, 0, 0, 2]);
    }
}
