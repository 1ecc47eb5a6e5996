//! The finite-N Markov jump process on `X^N`.
//!
//! An agent of population `p` playing `i` switches to `j` at rate
//! `rho_ij(F(x), x)`, so the state moves by `(e_j - e_i) / N^p` at rate
//! `N^p x_i^p rho_ij = k_i^p rho_ij`. Self-switches (`i = j`) are not jumps.

pub mod balance;
pub mod grid;
pub mod simulate;
pub mod solve;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::PopulationGame;
use crate::par::{map_indexed, ExecMode};
use crate::protocol::{evaluate_rates, RevisionProtocol};

pub use balance::{check_detailed_balance, BalanceReport};
pub use grid::{enumerate_states, StateGrid, DEFAULT_GRID_LIMIT};
pub use simulate::{
    deviation_vs_ode, simulate_ensemble, simulate_path, JumpSource, OnTheFly, Path,
};
pub use solve::{communicating_classes, exact_stationary, SolverOptions};

/// Which strategy switch an off-diagonal generator entry represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Jump {
    pub population: u16,
    pub from: u16,
    pub to: u16,
}

/// Sparse generator `Q` in CSR form with the diagonal stored separately.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    grid: Arc<StateGrid>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    rates: Vec<f64>,
    jumps: Vec<Jump>,
    diagonal: Vec<f64>,
}

type Row = Vec<(usize, f64, Jump)>;

/// Outgoing transitions of the state with concatenated counts `counts`.
pub(crate) fn transitions_from(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    counts: &[u32],
    sizes: &[u64],
    mut emit: impl FnMut(f64, Jump),
) -> Result<()> {
    let state = grid::counts_to_state(counts, game.strategy_counts(), sizes);
    let rates = evaluate_rates(protocol, &game.payoffs(&state), &state)?;
    let mut at = 0;
    for (p, rho) in rates.iter().enumerate() {
        let n = rho.dim();
        for i in 0..n {
            let k = counts[at + i];
            if k == 0 {
                continue;
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = k as f64 * rho.get(i, j);
                if q > 0.0 {
                    emit(
                        q,
                        Jump {
                            population: p as u16,
                            from: i as u16,
                            to: j as u16,
                        },
                    );
                }
            }
        }
        at += n;
    }
    Ok(())
}

/// Destination counts after applying `jump`.
pub(crate) fn apply_jump(counts: &mut [u32], strategy_counts: &[usize], jump: Jump) {
    let offset: usize = strategy_counts[..jump.population as usize].iter().sum();
    counts[offset + jump.from as usize] -= 1;
    counts[offset + jump.to as usize] += 1;
}

/// Generator of the process for `game` and `protocol` with population sizes `sizes`.
pub fn build_generator(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    sizes: &[u64],
) -> Result<FiniteChain> {
    build_generator_with(game, protocol, sizes, DEFAULT_GRID_LIMIT, ExecMode::Auto)
}

pub fn build_generator_with(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    sizes: &[u64],
    limit: usize,
    mode: ExecMode,
) -> Result<FiniteChain> {
    let grid = Arc::new(StateGrid::for_game(game, sizes, limit)?);
    let rows: Vec<Result<Row>> = map_indexed(grid.len(), mode, |s| {
        let counts = grid.state(s);
        let mut scratch = counts.to_vec();
        let mut row = Vec::new();
        let mut missing = None;
        transitions_from(game, protocol, counts, grid.sizes(), |q, jump| {
            scratch.copy_from_slice(counts);
            apply_jump(&mut scratch, grid.strategy_counts(), jump);
            match grid.index_of(&scratch) {
                Some(t) => row.push((t, q, jump)),
                None => missing = Some(scratch.clone()),
            }
        })?;
        if let Some(m) = missing {
            return Err(Error::InvalidState(format!("jump left the grid at {m:?}")));
        }
        Ok(row)
    });
    let mut row_ptr = Vec::with_capacity(grid.len() + 1);
    let mut cols = Vec::new();
    let mut rates = Vec::new();
    let mut jumps = Vec::new();
    let mut diagonal = Vec::with_capacity(grid.len());
    row_ptr.push(0);
    for row in rows {
        let row = row?;
        let mut exit = 0.0;
        for (t, q, jump) in row {
            cols.push(t);
            rates.push(q);
            jumps.push(jump);
            exit += q;
        }
        diagonal.push(-exit);
        row_ptr.push(cols.len());
    }
    Ok(FiniteChain {
        grid,
        row_ptr,
        cols,
        rates,
        jumps,
        diagonal,
    })
}

impl FiniteChain {
    pub fn grid(&self) -> &Arc<StateGrid> {
        &self.grid
    }

    pub fn num_states(&self) -> usize {
        self.grid.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.cols.len()
    }

    /// Off-diagonal entries `(target, rate, jump)` of row `s`.
    pub fn row(&self, s: usize) -> impl Iterator<Item = (usize, f64, Jump)> + '_ {
        let span = self.row_ptr[s]..self.row_ptr[s + 1];
        span.map(move |e| (self.cols[e], self.rates[e], self.jumps[e]))
    }

    pub fn diagonal(&self, s: usize) -> f64 {
        self.diagonal[s]
    }

    /// `q_{s,t}` for `s != t`, zero if absent.
    pub fn rate(&self, s: usize, t: usize) -> f64 {
        self.row(s)
            .find(|&(c, _, _)| c == t)
            .map_or(0.0, |(_, q, _)| q)
    }

    /// `max |Q_xy|` over all entries.
    pub fn max_abs_entry(&self) -> f64 {
        self.diagonal
            .iter()
            .map(|d| d.abs())
            .chain(self.rates.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diagonal.iter().map(|d| -d).fold(0.0, f64::max)
    }

    /// Largest `|sum_y Q_xy|` over rows.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.num_states())
            .map(|s| (self.row(s).map(|(_, q, _)| q).sum::<f64>() + self.diagonal[s]).abs())
            .fold(0.0, f64::max)
    }

    /// `mu Q` for a row vector `mu`.
    pub fn left_multiply(&self, mu: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = mu.iter().zip(&self.diagonal).map(|(m, d)| m * d).collect();
        for (s, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (t, q, _) in self.row(s) {
                out[t] += m * q;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::make_linear_game;

    fn rps() -> PopulationGame {
        make_linear_game(
            &[
                vec![0.0, -1.0, 1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 1.0, 0.0],
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_rate() {
        let g = make_linear_game(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let c = build_generator(&g, &RevisionProtocol::constant(1.0), &[2]).unwrap();
        let from = c.grid().index_of(&[1, 1]).unwrap();
        let to = c.grid().index_of(&[0, 2]).unwrap();
        assert_eq!(c.rate(from, to), 1.0);
    }

    #[test]
    fn vertex_exit_rate() {
        let c = build_generator(&rps(), &RevisionProtocol::constant(1.0), &[2]).unwrap();
        let s = c.grid().index_of(&[2, 0, 0]).unwrap();
        assert_eq!(c.diagonal(s), -4.0);
    }

    #[test]
    fn conservative_rows() {
        let c = build_generator(&rps(), &RevisionProtocol::sum_exponential(1.0), &[5]).unwrap();
        assert!(c.row_sum_defect() <= 1e-12);
        for s in 0..c.num_states() {
            for (_, q, _) in c.row(s) {
                assert!(q >= 0.0);
            }
        }
    }

    #[test]
    fn entries_follow_rate_formula() {
        let g = rps();
        let p = RevisionProtocol::sum_exponential(0.8);
        let n = 6u64;
        let c = build_generator(&g, &p, &[n]).unwrap();
        for s in 0..c.num_states() {
            let x = c.grid().social_state(s);
            let rho = evaluate_rates(&p, &g.payoffs(&x), &x).unwrap();
            for (_, q, jump) in c.row(s) {
                let (i, j) = (jump.from as usize, jump.to as usize);
                let expected = n as f64 * x.parts[0][i] * rho[0].get(i, j);
                assert!((q - expected).abs() <= 1e-12 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = rps();
        let p = RevisionProtocol::sum_exponential(1.0);
        let a = build_generator_with(&g, &p, &[8], DEFAULT_GRID_LIMIT, ExecMode::Auto).unwrap();
        let b =
            build_generator_with(&g, &p, &[8], DEFAULT_GRID_LIMIT, ExecMode::Sequential).unwrap();
        assert_eq!(a.rates, b.rates);
        assert_eq!(a.cols, b.cols);
        assert_eq!(a.diagonal, b.diagonal);
    }

    #[test]
    fn negative_rate_aborts() {
        let g = make_linear_game(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let bad = RevisionProtocol::custom(
            "neg",
            true,
            Arc::new(|_, _, x: &[f64]| {
                crate::rates::Square::from_fn(x.len(), |i, j| if i == j { 0.0 } else { x[0] - 0.5 })
            }),
        );
        assert!(matches!(
            build_generator(&g, &bad, &[4]),
            Err(Error::ProtocolViolation(_))
        ));
    }
}
