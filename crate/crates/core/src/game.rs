//! Population games, social states, and payoff evaluation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rates::Square;

/// Tolerance on `sum_i x_i^p = m^p` for continuous states.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Payoffs to each strategy of one population.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffVector(pub Vec<f64>);

impl PayoffVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub type PayoffFn = Arc<dyn Fn(&SocialState) -> Vec<PayoffVector> + Send + Sync>;

#[derive(Clone)]
pub enum Payoff {
    /// `F(x) = A x` over the concatenated social state.
    Linear(Square<f64>),
    /// State-independent payoff per strategy, concatenated across populations.
    Constant(Vec<f64>),
    Custom(PayoffFn),
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Linear(a) => f.debug_tuple("Linear").field(a).finish(),
            Payoff::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Payoff::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PopulationGame {
    masses: Vec<f64>,
    strategy_counts: Vec<usize>,
    payoff: Payoff,
}

impl PopulationGame {
    pub fn new(masses: Vec<f64>, strategy_counts: Vec<usize>, payoff: Payoff) -> Result<Self> {
        if masses.is_empty() || masses.len() != strategy_counts.len() {
            return Err(Error::InvalidGame(format!(
                "{} masses for {} populations",
                masses.len(),
                strategy_counts.len()
            )));
        }
        if let Some(p) = strategy_counts.iter().position(|&n| n < 2) {
            return Err(Error::InvalidGame(format!(
                "population {} has {} strategies, need at least 2",
                p + 1,
                strategy_counts[p]
            )));
        }
        if let Some(p) = masses.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidGame(format!(
                "population {} has non-positive mass {}",
                p + 1,
                masses[p]
            )));
        }
        let total: usize = strategy_counts.iter().sum();
        match &payoff {
            Payoff::Linear(a) => {
                if a.dim() != total {
                    return Err(Error::InvalidGame(format!(
                        "payoff matrix is {0}x{0}, expected {1}x{1}",
                        a.dim(),
                        total
                    )));
                }
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidGame(
                        "payoff matrix has non-finite entries".into(),
                    ));
                }
            }
            Payoff::Constant(v) => {
                if v.len() != total {
                    return Err(Error::InvalidGame(format!(
                        "payoff vector has {} entries, expected {}",
                        v.len(),
                        total
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidGame(
                        "payoff vector has non-finite entries".into(),
                    ));
                }
            }
            Payoff::Custom(_) => {}
        }
        Ok(Self {
            masses,
            strategy_counts,
            payoff,
        })
    }

    pub fn num_populations(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn total_strategies(&self) -> usize {
        self.strategy_counts.iter().sum()
    }

    pub fn payoff_kind(&self) -> &Payoff {
        &self.payoff
    }

    /// Offset of population `p` in the concatenated strategy index.
    pub fn offset(&self, p: usize) -> usize {
        self.strategy_counts[..p].iter().sum()
    }

    /// Evaluates `F(x)`, one payoff vector per population.
    pub fn payoffs(&self, state: &SocialState) -> Vec<PayoffVector> {
        match &self.payoff {
            Payoff::Linear(a) => {
                let x: Vec<f64> = state.parts.iter().flatten().copied().collect();
                let mut out = Vec::with_capacity(self.num_populations());
                let mut row = 0;
                for &n in &self.strategy_counts {
                    let block = (row..row + n)
                        .map(|i| a.row(i).iter().zip(&x).map(|(aij, xj)| aij * xj).sum())
                        .collect();
                    out.push(PayoffVector(block));
                    row += n;
                }
                out
            }
            Payoff::Constant(v) => {
                let mut out = Vec::with_capacity(self.num_populations());
                let mut at = 0;
                for &n in &self.strategy_counts {
                    out.push(PayoffVector(v[at..at + n].to_vec()));
                    at += n;
                }
                out
            }
            Payoff::Custom(f) => f(state),
        }
    }

    /// Uniform state `x_i^p = m^p / n^p`.
    pub fn barycenter(&self) -> SocialState {
        SocialState {
            parts: self
                .strategy_counts
                .iter()
                .zip(&self.masses)
                .map(|(&n, &m)| vec![m / n as f64; n])
                .collect(),
        }
    }

    /// Checks a continuous state against this game's populations and masses.
    pub fn check_state(&self, state: &SocialState) -> Result<()> {
        self.check_state_within(state, MASS_TOLERANCE, 0.0)
    }

    pub(crate) fn check_state_within(
        &self,
        state: &SocialState,
        mass_tol: f64,
        neg_tol: f64,
    ) -> Result<()> {
        if state.parts.len() != self.num_populations() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} populations, game has {}",
                state.parts.len(),
                self.num_populations()
            )));
        }
        for (p, part) in state.parts.iter().enumerate() {
            if part.len() != self.strategy_counts[p] {
                return Err(Error::DimensionMismatch(format!(
                    "population {} state has {} entries, expected {}",
                    p + 1,
                    part.len(),
                    self.strategy_counts[p]
                )));
            }
            if let Some(v) = part.iter().find(|v| !(v.is_finite() && **v >= -neg_tol)) {
                return Err(Error::InvalidState(format!(
                    "population {} has entry {v}",
                    p + 1
                )));
            }
            let total: f64 = part.iter().sum();
            if (total - self.masses[p]).abs() > mass_tol {
                return Err(Error::InvalidState(format!(
                    "population {} sums to {total}, mass is {}",
                    p + 1,
                    self.masses[p]
                )));
            }
        }
        Ok(())
    }
}

/// `F(x) = A x` for a single population of the given mass.
pub fn make_linear_game(payoff_matrix: &[Vec<f64>], mass: f64) -> Result<PopulationGame> {
    let a = Square::from_rows(payoff_matrix).ok_or_else(|| {
        Error::InvalidGame(format!(
            "payoff matrix must be square, got {} rows with lengths {:?}",
            payoff_matrix.len(),
            payoff_matrix.iter().map(Vec::len).collect::<Vec<_>>()
        ))
    })?;
    let n = a.dim();
    PopulationGame::new(vec![mass], vec![n], Payoff::Linear(a))
}

/// Per-population strategy distribution, in units of mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialState {
    pub parts: Vec<Vec<f64>>,
}

impl SocialState {
    pub fn single(x: Vec<f64>) -> Self {
        Self { parts: vec![x] }
    }

    pub fn new(parts: Vec<Vec<f64>>) -> Self {
        Self { parts }
    }

    pub fn population(&self, p: usize) -> &[f64] {
        &self.parts[p]
    }

    pub fn flat(&self) -> Vec<f64> {
        self.parts.iter().flatten().copied().collect()
    }

    /// Splits a concatenated vector according to `strategy_counts`.
    pub fn from_flat(flat: &[f64], strategy_counts: &[usize]) -> Self {
        let mut parts = Vec::with_capacity(strategy_counts.len());
        let mut at = 0;
        for &n in strategy_counts {
            parts.push(flat[at..at + n].to_vec());
            at += n;
        }
        Self { parts }
    }

    /// `max |x - y|` over all coordinates.
    pub fn sup_distance(&self, other: &SocialState) -> f64 {
        self.parts
            .iter()
            .flatten()
            .zip(other.parts.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A state on the grid `X^N`: integer counts with `sum_i k_i^p = N^p m^p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeState {
    pub counts: Vec<Vec<u64>>,
    pub sizes: Vec<u64>,
}

impl LatticeState {
    /// `x_i^p = k_i^p / N^p`.
    pub fn to_continuous(&self) -> SocialState {
        SocialState {
            parts: self
                .counts
                .iter()
                .zip(&self.sizes)
                .map(|(k, &n)| k.iter().map(|&c| c as f64 / n as f64).collect())
                .collect(),
        }
    }

    /// Nearest lattice point; errors when `x` is not on the grid of resolution `sizes`.
    pub fn from_continuous(state: &SocialState, sizes: &[u64]) -> Result<Self> {
        if state.parts.len() != sizes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} populations but {} sizes",
                state.parts.len(),
                sizes.len()
            )));
        }
        let mut counts = Vec::with_capacity(sizes.len());
        for (part, &n) in state.parts.iter().zip(sizes) {
            let mut row = Vec::with_capacity(part.len());
            for &x in part {
                let scaled = x * n as f64;
                let k = scaled.round();
                if (scaled - k).abs() > 1e-6 || k < 0.0 {
                    return Err(Error::InvalidState(format!(
                        "{x} is not a multiple of 1/{n}"
                    )));
                }
                row.push(k as u64);
            }
            counts.push(row);
        }
        Ok(Self {
            counts,
            sizes: sizes.to_vec(),
        })
    }
}

/// Lattice state nearest to `x` with exact per-population totals (largest remainder).
pub fn round_to_lattice(state: &SocialState, totals: &[u64], sizes: &[u64]) -> LatticeState {
    let mut counts = Vec::with_capacity(totals.len());
    for ((part, &total), &n) in state.parts.iter().zip(totals).zip(sizes) {
        let scaled: Vec<f64> = part.iter().map(|x| (x * n as f64).max(0.0)).collect();
        let mut row: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
        let assigned: u64 = row.iter().sum();
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = scaled[a] - scaled[a].floor();
            let rb = scaled[b] - scaled[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        if assigned <= total {
            for &i in order.iter().cycle().take((total - assigned) as usize) {
                row[i] += 1;
            }
        } else {
            let mut excess = assigned - total;
            for &i in order.iter().rev().cycle() {
                if excess == 0 {
                    break;
                }
                if row[i] > 0 {
                    row[i] -= 1;
                    excess -= 1;
                }
            }
        }
        counts.push(row);
    }
    LatticeState {
        counts,
        sizes: sizes.to_vec(),
    }
}
