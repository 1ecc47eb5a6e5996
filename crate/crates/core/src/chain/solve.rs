//! Exact stationary distribution of a [`FiniteChain`].

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::FiniteChain;
use crate::error::{Error, Result};
use crate::table::{Provenance, StationaryTable};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Dense LU at or below this many states, uniformized power iteration above.
    pub dense_limit: usize,
    /// Target `||mu Q||_inf / ||Q||_max`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_limit: 2_000,
            tolerance: 1e-12,
            max_iterations: 20_000_000,
        }
    }
}

/// Strongly connected components of the transition graph, each sorted,
/// ordered by smallest member.
pub fn communicating_classes(chain: &FiniteChain) -> Vec<Vec<usize>> {
    let n = chain.num_states();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, chain.num_transitions());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for s in 0..n {
        for (t, _, _) in chain.row(s) {
            graph.add_edge(nodes[s], nodes[t], ());
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|i| i.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

pub fn exact_stationary(chain: &FiniteChain) -> Result<StationaryTable> {
    exact_stationary_with(chain, SolverOptions::default())
}

pub fn exact_stationary_with(chain: &FiniteChain, opts: SolverOptions) -> Result<StationaryTable> {
    let classes = communicating_classes(chain);
    if classes.len() > 1 {
        let summary = classes
            .iter()
            .take(5)
            .map(|c| format!("{} states from {:?}", c.len(), chain.grid().state(c[0])))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::Reducible { classes, summary });
    }
    let (mu, method, iterations) = if chain.num_states() <= opts.dense_limit {
        (dense_solve(chain)?, "dense-lu", 0)
    } else {
        let (mu, it) = power_iteration(chain, opts)?;
        (mu, "uniformized-power-iteration", it)
    };
    let residual = residual(chain, &mu);
    let table = StationaryTable::from_weights(chain.grid().clone(), mu, Provenance::Exact)?
        .with_meta("solver", method)
        .with_meta("residual", format!("{residual:.3e}"));
    Ok(if iterations > 0 {
        table.with_meta("iterations", iterations.to_string())
    } else {
        table
    })
}

/// `||mu Q||_inf / ||Q||_max`.
pub fn residual(chain: &FiniteChain, mu: &[f64]) -> f64 {
    let scale = chain.max_abs_entry().max(f64::MIN_POSITIVE);
    chain
        .left_multiply(mu)
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
        / scale
}

/// Solves `Q^T mu = 0` with the last equation replaced by `sum mu = 1`.
fn dense_solve(chain: &FiniteChain) -> Result<Vec<f64>> {
    let n = chain.num_states();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        a[(s, s)] = chain.diagonal(s);
        for (t, q, _) in chain.row(s) {
            a[(t, s)] += q;
        }
    }
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::NotConverged("singular balance system".into()))?;
    Ok(x.iter().map(|v| v.max(0.0)).collect())
}

/// `mu <- mu (I + Q / L)` with `L` slightly above the largest exit rate.
fn power_iteration(chain: &FiniteChain, opts: SolverOptions) -> Result<(Vec<f64>, usize)> {
    let n = chain.num_states();
    let lambda = chain.max_exit_rate() * 1.05;
    if lambda <= 0.0 {
        return Ok((vec![1.0 / n as f64; n], 0));
    }
    let mut mu = vec![1.0 / n as f64; n];
    for it in 1..=opts.max_iterations {
        let flow = chain.left_multiply(&mu);
        for (m, f) in mu.iter_mut().zip(&flow) {
            *m += f / lambda;
        }
        if it % 32 == 0 {
            let total: f64 = mu.iter().sum();
            mu.iter_mut().for_each(|m| *m /= total);
            if residual(chain, &mu) <= opts.tolerance {
                return Ok((mu, it));
            }
        }
    }
    Err(Error::NotConverged(format!(
        "power iteration residual {:.3e} after {} iterations",
        residual(chain, &mu),
        opts.max_iterations
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::build_generator;
    use crate::game::make_linear_game;
    use crate::protocol::RevisionProtocol;
    use crate::rates::Square;

    fn two_strategy() -> crate::game::PopulationGame {
        make_linear_game(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap()
    }

    fn rps() -> crate::game::PopulationGame {
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
    fn three_state_birth_death() {
        // balance: mu_0 * 2 = mu_1 * 1, mu_1 * 1 = mu_2 * 2
        let c = build_generator(&two_strategy(), &RevisionProtocol::constant(1.0), &[2]).unwrap();
        let t = exact_stationary(&c).unwrap();
        let p = |k: u32| t.probability_of(&[k, 2 - k]).unwrap();
        assert!((p(0) - 0.25).abs() < 1e-15);
        assert!((p(1) - 0.5).abs() < 1e-15);
        assert!((p(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uniform_switching_is_multinomial() {
        let c = build_generator(&rps(), &RevisionProtocol::constant(1.0), &[2]).unwrap();
        let t = exact_stationary(&c).unwrap();
        for (i, s) in c.grid().iter().enumerate() {
            let expected = if s.contains(&2) { 1.0 / 9.0 } else { 2.0 / 9.0 };
            assert!((t.probabilities()[i] - expected).abs() < 1e-14);
        }
        assert!((t.total() - 1.0).abs() <= 1e-15);
        assert!(residual(&c, t.probabilities()) <= 1e-12);
    }

    #[test]
    fn lu_and_power_iteration_agree() {
        let c = build_generator(&rps(), &RevisionProtocol::sum_exponential(1.0), &[10]).unwrap();
        let dense = exact_stationary(&c).unwrap();
        let iter = exact_stationary_with(
            &c,
            SolverOptions {
                dense_limit: 0,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        assert_eq!(iter.meta("solver"), Some("uniformized-power-iteration"));
        let gap: f64 = dense
            .probabilities()
            .iter()
            .zip(iter.probabilities())
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(gap < 1e-9, "{gap}");
        assert!(residual(&c, iter.probabilities()) <= 1e-12);
    }

    #[test]
    fn reducible_chain_is_rejected() {
        // strategy 2 never leaves: two closed classes
        let t = Square::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let c = build_generator(&two_strategy(), &RevisionProtocol::table(vec![t]), &[3]).unwrap();
        match exact_stationary(&c) {
            Err(Error::Reducible { classes, .. }) => assert_eq!(classes.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fully_supported_protocols_are_irreducible() {
        for p in [
            RevisionProtocol::constant(0.5),
            RevisionProtocol::sum_exponential(2.0),
            RevisionProtocol::sum_exponential(-1.0),
        ] {
            let c = build_generator(&rps(), &p, &[6]).unwrap();
            assert_eq!(communicating_classes(&c).len(), 1);
        }
    }
}
