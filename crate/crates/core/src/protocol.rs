//! Revision protocols and the symmetry / full-support checks.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::grid::{composition_count, compositions};
use crate::error::{Error, Result};
use crate::game::{PayoffVector, PopulationGame, SocialState};
use crate::rates::{RateMatrix, Square};

/// Threshold on `max |rho_ij - rho_ji|` below which a protocol counts as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;

/// Largest lattice that validation sweeps exhaustively.
pub const EXHAUSTIVE_SAMPLE_LIMIT: u128 = 1_000_000;

/// Number of random lattice states drawn when the lattice is too large.
pub const RANDOM_SAMPLE_COUNT: usize = 1_000;

/// Rate callback: `(population, payoff vector, population state) -> rates`.
pub type CustomRateFn = Arc<dyn Fn(usize, &PayoffVector, &[f64]) -> RateMatrix + Send + Sync>;

#[derive(Clone)]
pub enum ProtocolKind {
    /// `rho_ij = c`.
    Constant(f64),
    /// `rho_ij = exp(eta (pi_i + pi_j))`.
    SumExponential { eta: f64 },
    /// Fixed matrix per population.
    Table(Vec<RateMatrix>),
    Custom {
        name: String,
        declared_symmetric: bool,
        rate: CustomRateFn,
    },
}

impl ProtocolKind {
    pub fn tag(&self) -> &str {
        match self {
            ProtocolKind::Constant(_) => "constant",
            ProtocolKind::SumExponential { .. } => "sum_exponential",
            ProtocolKind::Table(_) => "table",
            ProtocolKind::Custom { .. } => "custom",
        }
    }
}

impl fmt::Debug for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            ProtocolKind::SumExponential { eta } => {
                f.debug_struct("SumExponential").field("eta", eta).finish()
            }
            ProtocolKind::Table(t) => f.debug_tuple("Table").field(t).finish(),
            ProtocolKind::Custom {
                name,
                declared_symmetric,
                ..
            } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("declared_symmetric", declared_symmetric)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RevisionProtocol {
    kind: ProtocolKind,
    support_floor: f64,
    rate_caps: Option<Vec<RateMatrix>>,
}

impl RevisionProtocol {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: ProtocolKind::Constant(c),
            support_floor: c.max(0.0),
            rate_caps: None,
        }
    }

    pub fn sum_exponential(eta: f64) -> Self {
        Self {
            kind: ProtocolKind::SumExponential { eta },
            support_floor: 0.0,
            rate_caps: None,
        }
    }

    /// One table per population; the floor defaults to the smallest off-diagonal entry.
    pub fn table(tables: Vec<RateMatrix>) -> Self {
        let floor = tables
            .iter()
            .map(Square::min_off_diagonal)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        Self {
            kind: ProtocolKind::Table(tables),
            support_floor: if floor.is_finite() { floor } else { 0.0 },
            rate_caps: None,
        }
    }

    pub fn custom(name: impl Into<String>, declared_symmetric: bool, rate: CustomRateFn) -> Self {
        Self {
            kind: ProtocolKind::Custom {
                name: name.into(),
                declared_symmetric,
                rate,
            },
            support_floor: 0.0,
            rate_caps: None,
        }
    }

    pub fn with_support_floor(mut self, floor: f64) -> Self {
        self.support_floor = floor;
        self
    }

    pub fn with_rate_caps(mut self, caps: Vec<RateMatrix>) -> Self {
        self.rate_caps = Some(caps);
        self
    }

    /// Caps `R_ij` set to 1.1 times the largest `rho_ij` seen on `samples`.
    pub fn with_default_caps(self, game: &PopulationGame, samples: &[SocialState]) -> Result<Self> {
        let mut caps: Vec<RateMatrix> = game
            .strategy_counts()
            .iter()
            .map(|&n| Square::filled(n, 0.0))
            .collect();
        for state in samples {
            let rates = evaluate_rates(&self, &game.payoffs(state), state)?;
            for (cap, r) in caps.iter_mut().zip(&rates) {
                *cap = Square::from_fn(cap.dim(), |i, j| cap.get(i, j).max(*r.get(i, j)));
            }
        }
        let caps = caps
            .into_iter()
            .map(|c| c.map(|&v| if v > 0.0 { 1.1 * v } else { 1.0 }))
            .collect();
        Ok(self.with_rate_caps(caps))
    }

    pub fn kind(&self) -> &ProtocolKind {
        &self.kind
    }

    pub fn support_floor(&self) -> f64 {
        self.support_floor
    }

    pub fn rate_caps(&self) -> Option<&[RateMatrix]> {
        self.rate_caps.as_deref()
    }

    /// True when rates depend on neither payoffs nor state.
    pub fn is_state_independent(&self) -> bool {
        matches!(
            self.kind,
            ProtocolKind::Constant(_) | ProtocolKind::Table(_)
        )
    }

    /// `rho^p(pi^p, x^p)` for a single population.
    pub fn rates_for(
        &self,
        population: usize,
        payoff: &PayoffVector,
        x: &[f64],
    ) -> Result<RateMatrix> {
        let n = x.len();
        if payoff.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "population {}: payoff has {} entries, state has {}",
                population + 1,
                payoff.len(),
                n
            )));
        }
        let rates = match &self.kind {
            ProtocolKind::Constant(c) => Square::filled(n, *c),
            ProtocolKind::SumExponential { eta } => {
                let pi = payoff.as_slice();
                Square::from_fn(n, |i, j| (eta * (pi[i] + pi[j])).exp())
            }
            ProtocolKind::Table(tables) => {
                let table = tables.get(population).or_else(|| {
                    if tables.len() == 1 {
                        tables.first()
                    } else {
                        None
                    }
                });
                let table = table.ok_or_else(|| {
                    Error::DimensionMismatch(format!(
                        "no rate table for population {}",
                        population + 1
                    ))
                })?;
                if table.dim() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "population {}: rate table is {}x{}, population has {} strategies",
                        population + 1,
                        table.dim(),
                        table.dim(),
                        n
                    )));
                }
                table.clone()
            }
            ProtocolKind::Custom { rate, .. } => rate(population, payoff, x),
        };
        if rates.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "population {}: protocol returned a {}x{} matrix for {} strategies",
                population + 1,
                rates.dim(),
                rates.dim(),
                n
            )));
        }
        if let Some(bad) = rates.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::ProtocolViolation(format!(
                "population {}: rate {bad} is negative or non-finite",
                population + 1
            )));
        }
        Ok(rates)
    }
}

/// Evaluates every population's rate matrix at `state` given payoffs `F(state)`.
pub fn evaluate_rates(
    protocol: &RevisionProtocol,
    payoffs: &[PayoffVector],
    state: &SocialState,
) -> Result<Vec<RateMatrix>> {
    if payoffs.len() != state.parts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} payoff vectors for {} populations",
            payoffs.len(),
            state.parts.len()
        )));
    }
    payoffs
        .iter()
        .zip(&state.parts)
        .enumerate()
        .map(|(p, (pi, x))| protocol.rates_for(p, pi, x))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub fully_supported: bool,
    pub max_asymmetry: f64,
    pub min_rate: f64,
    pub support_floor: f64,
    pub samples: usize,
    /// Whether `samples` covered the whole lattice.
    pub exhaustive: bool,
}

/// Sample states for hypothesis checks: the full lattice of resolution
/// `resolution` when it has at most [`EXHAUSTIVE_SAMPLE_LIMIT`] points,
/// otherwise [`RANDOM_SAMPLE_COUNT`] seeded uniform lattice points.
pub fn sample_states(
    game: &PopulationGame,
    resolution: u64,
    seed: u64,
) -> (Vec<SocialState>, bool) {
    let per_pop: Vec<u64> = game
        .masses()
        .iter()
        .map(|m| (m * resolution as f64).round() as u64)
        .collect();
    let size = game
        .strategy_counts()
        .iter()
        .zip(&per_pop)
        .map(|(&n, &k)| composition_count(n, k))
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX);
    let scale = |k: &[u32], p: usize| -> Vec<f64> {
        k.iter()
            .map(|&c| c as f64 * game.masses()[p] / per_pop[p] as f64)
            .collect()
    };
    if size <= EXHAUSTIVE_SAMPLE_LIMIT {
        let lists: Vec<Vec<Vec<u32>>> = game
            .strategy_counts()
            .iter()
            .zip(&per_pop)
            .map(|(&n, &k)| compositions(n, k as u32))
            .collect();
        let mut out = Vec::with_capacity(size as usize);
        let mut idx = vec![0usize; lists.len()];
        loop {
            out.push(SocialState::new(
                idx.iter()
                    .enumerate()
                    .map(|(p, &i)| scale(&lists[p][i], p))
                    .collect(),
            ));
            let mut p = lists.len();
            loop {
                if p == 0 {
                    return (out, true);
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < lists[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..RANDOM_SAMPLE_COUNT)
        .map(|_| {
            SocialState::new(
                game.strategy_counts()
                    .iter()
                    .zip(&per_pop)
                    .enumerate()
                    .map(|(p, (&n, &k))| scale(&random_composition(&mut rng, n, k as u32), p))
                    .collect(),
            )
        })
        .collect();
    (states, false)
}

fn random_composition(rng: &mut impl Rng, n: usize, total: u32) -> Vec<u32> {
    // stars and bars: n-1 distinct bar positions among total+n-1 slots
    let slots = total + n as u32 - 1;
    let mut bars: Vec<u32> = rand::seq::index::sample(rng, slots as usize, n - 1)
        .into_iter()
        .map(|b| b as u32)
        .collect();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(n);
    let mut prev: i64 = -1;
    for &b in &bars {
        out.push((b as i64 - prev - 1) as u32);
        prev = b as i64;
    }
    out.push((slots as i64 - prev - 1) as u32);
    out
}

/// Symmetry and full-support statistics over `samples`.
pub fn validate_hypotheses(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    samples: &[SocialState],
    exhaustive: bool,
) -> Result<ValidationReport> {
    let mut max_asymmetry = 0.0_f64;
    let mut min_rate = f64::INFINITY;
    for state in samples {
        for rates in evaluate_rates(protocol, &game.payoffs(state), state)? {
            max_asymmetry = max_asymmetry.max(rates.max_asymmetry());
            min_rate = min_rate.min(rates.min_off_diagonal());
        }
    }
    if let Some(caps) = protocol.rate_caps() {
        for cap in caps {
            max_asymmetry = max_asymmetry.max(cap.max_asymmetry());
        }
    }
    let floor = protocol.support_floor();
    Ok(ValidationReport {
        symmetric: max_asymmetry <= SYMMETRY_TOLERANCE,
        fully_supported: floor > 0.0 && min_rate >= floor,
        max_asymmetry,
        min_rate,
        support_floor: floor,
        samples: samples.len(),
        exhaustive,
    })
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
    fn constant_rates() {
        let p = RevisionProtocol::constant(1.0);
        let r = p
            .rates_for(0, &PayoffVector(vec![3.0, -2.0, 0.5]), &[0.2, 0.3, 0.5])
            .unwrap();
        assert!(r.iter().all(|&v| v == 1.0));
        assert_eq!(r.dim(), 3);
    }

    #[test]
    fn sum_exponential_degenerate_temperature() {
        let p = RevisionProtocol::sum_exponential(0.0);
        let r = p
            .rates_for(0, &PayoffVector(vec![5.0, -1.0, 2.0]), &[0.2, 0.3, 0.5])
            .unwrap();
        assert!(r.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn sum_exponential_pairs() {
        let p = RevisionProtocol::sum_exponential(1.0);
        let r = p
            .rates_for(0, &PayoffVector(vec![1.0, 0.0, -1.0]), &[0.2, 0.3, 0.5])
            .unwrap();
        let e = std::f64::consts::E;
        assert_eq!(*r.get(0, 1), e);
        assert_eq!(*r.get(1, 0), e);
        assert_eq!(*r.get(0, 2), 1.0);
        assert_eq!(*r.get(2, 0), 1.0);
        assert!((r.get(1, 2) - 1.0 / e).abs() < 1e-16);
        assert_eq!(r.get(1, 2), r.get(2, 1));
    }

    #[test]
    fn dimension_mismatch_and_violation() {
        let p = RevisionProtocol::constant(1.0);
        assert!(matches!(
            p.rates_for(0, &PayoffVector(vec![0.0, 0.0]), &[0.5, 0.25, 0.25]),
            Err(Error::DimensionMismatch(_))
        ));
        let bad = RevisionProtocol::custom(
            "negative",
            true,
            Arc::new(|_, _, x: &[f64]| Square::filled(x.len(), -1.0)),
        );
        assert!(matches!(
            bad.rates_for(0, &PayoffVector(vec![0.0, 0.0]), &[0.5, 0.5]),
            Err(Error::ProtocolViolation(_))
        ));
        let nan = RevisionProtocol::custom(
            "nan",
            true,
            Arc::new(|_, _, x: &[f64]| Square::filled(x.len(), f64::NAN)),
        );
        assert!(nan
            .rates_for(0, &PayoffVector(vec![0.0, 0.0]), &[0.5, 0.5])
            .is_err());
    }

    #[test]
    fn validate_constant() {
        let g = rps();
        let p = RevisionProtocol::constant(1.0).with_support_floor(1.0);
        let (s, ex) = sample_states(&g, 10, 0);
        assert!(ex);
        assert_eq!(s.len(), 66);
        let r = validate_hypotheses(&g, &p, &s, ex).unwrap();
        assert!(r.symmetric && r.fully_supported);
        assert_eq!(r.max_asymmetry, 0.0);
        assert_eq!(r.min_rate, 1.0);
    }

    #[test]
    fn validate_asymmetric_table() {
        let g = make_linear_game(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let t = Square::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let p = RevisionProtocol::table(vec![t]);
        let (s, ex) = sample_states(&g, 4, 0);
        let r = validate_hypotheses(&g, &p, &s, ex).unwrap();
        assert!(!r.symmetric);
        assert_eq!(r.max_asymmetry, 1.0);
    }

    #[test]
    fn sum_exponential_rps_fully_supported() {
        // pi_i + pi_j over i != j reduces to x_a - x_b, bottoming out at -1 on a vertex.
        let g = rps();
        let floor = (-2.0_f64).exp();
        let p = RevisionProtocol::sum_exponential(1.0).with_support_floor(floor);
        let (s, ex) = sample_states(&g, 30, 0);
        let r = validate_hypotheses(&g, &p, &s, ex).unwrap();
        assert!(r.fully_supported && r.symmetric);
        let oracle = s
            .iter()
            .map(|x| {
                let f = g.payoffs(x);
                let pi = &f[0].0;
                let mut low = f64::INFINITY;
                for i in 0..3 {
                    for j in 0..3 {
                        if i != j {
                            low = low.min(pi[i] + pi[j]);
                        }
                    }
                }
                low
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(oracle, -1.0);
        assert!((r.min_rate - (-1.0_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn random_samples_when_lattice_is_huge() {
        let g = make_linear_game(&vec![vec![0.0; 8]; 8], 1.0).unwrap();
        let (s, ex) = sample_states(&g, 200, 7);
        assert!(!ex);
        assert_eq!(s.len(), RANDOM_SAMPLE_COUNT);
        for x in &s {
            g.check_state(x).unwrap();
        }
        let (again, _) = sample_states(&g, 200, 7);
        assert_eq!(s, again);
    }

    #[test]
    fn default_caps_are_symmetric_for_symmetric_protocols() {
        let g = rps();
        let (s, _) = sample_states(&g, 6, 0);
        let p = RevisionProtocol::sum_exponential(0.7)
            .with_default_caps(&g, &s)
            .unwrap();
        let caps = p.rate_caps().unwrap();
        assert_eq!(caps[0].max_asymmetry(), 0.0);
        // cap exceeds every sampled rate
        for x in &s {
            let r = evaluate_rates(&p, &g.payoffs(x), x).unwrap();
            for (a, b) in r[0].iter().zip(caps[0].iter()) {
                assert!(a < b);
            }
        }
    }
}
