//! Detailed-balance measurement.

use super::FiniteChain;
use crate::error::{Error, Result};
use crate::table::{Provenance, StationaryTable};

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    /// `max |mu_x q_xy - mu_y q_yx|` divided by the largest edge flow `mu_x q_xy`.
    pub max_imbalance: f64,
    /// Grid indices of the worst edge, if the chain has any.
    pub worst_edge: Option<(usize, usize)>,
}

pub fn check_detailed_balance(
    chain: &FiniteChain,
    stationary: &StationaryTable,
) -> Result<BalanceReport> {
    if stationary.provenance() != Provenance::Exact {
        return Err(Error::Precondition(format!(
            "detailed balance needs an exact table, got {}",
            stationary.provenance()
        )));
    }
    chain.grid().ensure_same(stationary.grid())?;
    let mu = stationary.probabilities();
    let mut max_flow = 0.0_f64;
    let mut worst = 0.0_f64;
    let mut worst_edge = None;
    for x in 0..chain.num_states() {
        for (y, q, _) in chain.row(x) {
            let forward = mu[x] * q;
            max_flow = max_flow.max(forward);
            if y < x {
                continue;
            }
            let gap = (forward - mu[y] * chain.rate(y, x)).abs();
            if gap > worst || worst_edge.is_none() {
                worst = worst.max(gap);
                worst_edge = Some((x, y));
            }
        }
    }
    Ok(BalanceReport {
        max_imbalance: if max_flow > 0.0 {
            worst / max_flow
        } else {
            0.0
        },
        worst_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_generator, exact_stationary};
    use crate::game::make_linear_game;
    use crate::protocol::RevisionProtocol;

    #[test]
    fn birth_death_is_reversible() {
        let g = make_linear_game(&[vec![2.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let c = build_generator(&g, &RevisionProtocol::sum_exponential(1.5), &[15]).unwrap();
        let t = exact_stationary(&c).unwrap();
        assert!(check_detailed_balance(&c, &t).unwrap().max_imbalance <= 1e-12);
    }

    #[test]
    fn uniform_three_strategy_is_reversible() {
        let g = make_linear_game(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]], 1.0).unwrap();
        let c = build_generator(&g, &RevisionProtocol::constant(1.0), &[2]).unwrap();
        let t = exact_stationary(&c).unwrap();
        assert!(check_detailed_balance(&c, &t).unwrap().max_imbalance <= 1e-12);
    }

    #[test]
    fn needs_exact_table() {
        let g = make_linear_game(&[vec![0.0; 2], vec![0.0; 2]], 1.0).unwrap();
        let c = build_generator(&g, &RevisionProtocol::constant(1.0), &[2]).unwrap();
        let t =
            StationaryTable::from_weights(c.grid().clone(), vec![1.0; 3], Provenance::Empirical)
                .unwrap();
        assert!(check_detailed_balance(&c, &t).is_err());
    }
}
