//! Replacing an n-strategy population by coupled populations with fewer
//! strategies.
//!
//! Every derived rate is a fixed linear combination of base rates, so the
//! derived protocol is stored symbolically ([`LinearForm`]) and evaluated on
//! demand, in `f64` or exactly.
//!
//! * `3 -> 2`: population `i` plays `i` against the complement `not i`.
//! * `n -> n-1` (`n > 3`): block `i` keeps `{i}, ..., {i+n-3}` as singletons
//!   and lumps `{i+n-2, i+n-1}` (mod n) into one aggregate strategy `a_i`.
//!   Rates between groups are sums over members.
//! * Iterating down to `m` keeps, after the first stage, only the sub-block
//!   led by each block's first strategy, so there is one derived population
//!   per base strategy.

pub mod algebra;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use crate::dynamics::find_rest_point;
use crate::error::{Error, Result};
use crate::game::{Payoff, PayoffVector, PopulationGame, SocialState};
use crate::protocol::{
    evaluate_rates, sample_states, ProtocolKind, RevisionProtocol, SYMMETRY_TOLERANCE,
};
use crate::rates::{exact, to_f64, RateMatrix, Square};

pub use algebra::{
    base_forms, invert_reduce_blocks, invert_symmetrize_blocks, lump, reduce_blocks,
    reduction_groups, symmetrize_blocks, LinearForm,
};

/// Tolerance of the rest point used to fill in unobserved coordinates.
pub const FILL_TOLERANCE: f64 = 1e-10;
const FILL_MAX_TIME: f64 = 1e3;

/// Payoff assigned to derived strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FStar {
    /// Singletons keep their base payoff, aggregates get 0.
    #[default]
    Zero,
    /// Aggregates get the mass-weighted mean payoff of their members.
    Weighted,
}

impl fmt::Display for FStar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FStar::Zero => "zero",
            FStar::Weighted => "weighted",
        })
    }
}

/// One derived population: each strategy is a group of base strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedPopulation {
    pub groups: Vec<Vec<usize>>,
    pub rates: Square<LinearForm>,
}

impl DerivedPopulation {
    fn identity(n: usize) -> Self {
        Self {
            groups: (0..n).map(|u| vec![u]).collect(),
            rates: base_forms(n),
        }
    }

    pub fn arity(&self) -> usize {
        self.groups.len()
    }

    /// `"3"` for a singleton, `"not 1"` for a complement of a singleton in a
    /// two-strategy population, `"a{4,5}"` otherwise.
    pub fn labels(&self, base_arity: usize) -> Vec<String> {
        self.groups
            .iter()
            .map(|g| {
                if g.len() == 1 {
                    return (g[0] + 1).to_string();
                }
                if self.arity() == 2 && g.len() == base_arity - 1 {
                    if let Some(other) = self.groups.iter().find(|h| h.len() == 1) {
                        return format!("not {}", other[0] + 1);
                    }
                }
                let members: Vec<String> = g.iter().map(|u| (u + 1).to_string()).collect();
                format!("a{{{}}}", members.join(","))
            })
            .collect()
    }

    fn reduce(&self, block: usize) -> Self {
        let local = reduction_groups(self.arity(), block);
        Self {
            groups: local
                .iter()
                .map(|g| {
                    g.iter()
                        .flat_map(|&a| self.groups[a].iter().copied())
                        .collect()
                })
                .collect(),
            rates: lump(&self.rates, &local),
        }
    }

    fn symmetrize(&self) -> Vec<Self> {
        let blocks = symmetrize_blocks(&self.rates).expect("arity checked by caller");
        blocks
            .into_iter()
            .enumerate()
            .map(|(i, rates)| {
                let rest = (0..3)
                    .filter(|&j| j != i)
                    .flat_map(|j| self.groups[j].iter().copied())
                    .collect();
                Self {
                    groups: vec![self.groups[i].clone(), rest],
                    rates,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    /// `3 -> 2`.
    Symmetrize,
    /// `n -> n-1`.
    Reduce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub kind: StageKind,
    pub from_arity: usize,
    pub to_arity: usize,
    /// Populations kept after this stage.
    pub populations: Vec<DerivedPopulation>,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            StageKind::Symmetrize => "symmetrize",
            StageKind::Reduce => "reduce",
        };
        write!(f, "{}->{} {}", self.from_arity, self.to_arity, kind)
    }
}

/// A base population replaced by derived populations.
#[derive(Debug, Clone)]
pub struct TransformedGame {
    base: PopulationGame,
    protocol: RevisionProtocol,
    population: usize,
    derived: Vec<DerivedPopulation>,
    lineage: Vec<Stage>,
    fstar: FStar,
    fill: SocialState,
    fill_residual: f64,
}

/// Largest asymmetry and smallest off-diagonal rate of population `p`.
fn population_hypotheses(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
) -> Result<Vec<(f64, f64)>> {
    let mut out = vec![(0.0_f64, f64::INFINITY); game.num_populations()];
    let mut record = |p: usize, r: &RateMatrix| {
        out[p].0 = out[p].0.max(r.max_asymmetry());
        out[p].1 = out[p].1.min(r.min_off_diagonal());
    };
    if let ProtocolKind::Table(_) = protocol.kind() {
        let state = game.barycenter();
        for (p, r) in evaluate_rates(protocol, &game.payoffs(&state), &state)?
            .iter()
            .enumerate()
        {
            record(p, r);
        }
    } else {
        let (samples, _) = sample_states(game, 12, 0);
        for state in &samples {
            for (p, r) in evaluate_rates(protocol, &game.payoffs(state), state)?
                .iter()
                .enumerate()
            {
                record(p, r);
            }
        }
    }
    if let Some(caps) = protocol.rate_caps() {
        for (p, cap) in caps.iter().enumerate().take(out.len()) {
            out[p].0 = out[p].0.max(cap.max_asymmetry());
        }
    }
    Ok(out)
}

fn require_symmetric(game: &PopulationGame, protocol: &RevisionProtocol, p: usize) -> Result<()> {
    let (asym, _) = population_hypotheses(game, protocol)?[p];
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::Asymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

fn single_population(game: &PopulationGame) -> Result<()> {
    if game.num_populations() != 1 {
        return Err(Error::Precondition(format!(
            "expected a single-population game, got {} populations (use decompose)",
            game.num_populations()
        )));
    }
    Ok(())
}

/// Three-strategy game to three two-strategy populations.
pub fn symmetrize_3to2(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
) -> Result<TransformedGame> {
    single_population(game)?;
    if game.strategy_counts()[0] != 3 {
        return Err(Error::WrongArity(format!(
            "symmetrize_3to2 needs 3 strategies, got {}",
            game.strategy_counts()[0]
        )));
    }
    transform_population(game, protocol, 0, 2)
}

/// One `n -> n-1` stage, all `n` blocks.
pub fn reduce_once(game: &PopulationGame, protocol: &RevisionProtocol) -> Result<TransformedGame> {
    single_population(game)?;
    let n = game.strategy_counts()[0];
    if n <= 3 {
        return Err(Error::WrongArity(format!(
            "reduce_once needs more than 3 strategies, got {n} (use symmetrize_3to2)"
        )));
    }
    transform_population(game, protocol, 0, n - 1)
}

/// Iterated reduction to `m` strategies per derived population.
pub fn reduce_to(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    m: usize,
) -> Result<TransformedGame> {
    single_population(game)?;
    transform_population(game, protocol, 0, m)
}

/// Reduces population `p` to arity `m`.
pub fn transform_population(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
    p: usize,
    m: usize,
) -> Result<TransformedGame> {
    let n = *game
        .strategy_counts()
        .get(p)
        .ok_or_else(|| Error::Precondition(format!("population {} does not exist", p + 1)))?;
    if m < 2 || m >= n {
        return Err(Error::WrongArity(format!(
            "target arity {m} must satisfy 2 <= m < {n}"
        )));
    }
    require_symmetric(game, protocol, p)?;
    let mut current = vec![DerivedPopulation::identity(n)];
    let mut lineage = Vec::new();
    let mut k = n;
    while k > m {
        let first = lineage.is_empty();
        let (kind, next): (StageKind, Vec<DerivedPopulation>) = if k > 3 {
            let blocks = if first { k } else { 1 };
            (
                StageKind::Reduce,
                current
                    .iter()
                    .flat_map(|d| (0..blocks).map(move |b| d.reduce(b)))
                    .collect(),
            )
        } else {
            (
                StageKind::Symmetrize,
                current
                    .iter()
                    .flat_map(|d| {
                        let mut s = d.symmetrize();
                        if !first {
                            s.truncate(1);
                        }
                        s
                    })
                    .collect(),
            )
        };
        lineage.push(Stage {
            kind,
            from_arity: k,
            to_arity: k - 1,
            populations: next.clone(),
        });
        current = next;
        k -= 1;
    }
    TransformedGame::new(game, protocol, p, current, lineage)
}

/// Full two-strategy decomposition, one [`TransformedGame`] per population.
/// Two-strategy populations pass through unchanged.
pub fn decompose(
    game: &PopulationGame,
    protocol: &RevisionProtocol,
) -> Result<Vec<TransformedGame>> {
    let hyp = population_hypotheses(game, protocol)?;
    let floor = protocol.support_floor();
    let mut problems = Vec::new();
    for (p, &(asym, min_rate)) in hyp.iter().enumerate() {
        if asym > SYMMETRY_TOLERANCE {
            problems.push(format!(
                "population {}: {}",
                p + 1,
                Error::Asymmetric {
                    max_asymmetry: asym
                }
            ));
        }
        if !(min_rate > 0.0 && min_rate >= floor) {
            problems.push(format!(
                "population {}: {}",
                p + 1,
                Error::NotFullySupported { min_rate, floor }
            ));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Aggregate(problems));
    }
    (0..game.num_populations())
        .map(|p| match game.strategy_counts()[p] {
            2 => TransformedGame::new(
                game,
                protocol,
                p,
                vec![DerivedPopulation::identity(2)],
                Vec::new(),
            ),
            _ => transform_population(game, protocol, p, 2),
        })
        .collect()
}

/// Base rates recovered from a `3 -> 2` transform at base state `state`.
pub fn invert_3to2(transformed: &TransformedGame, state: &SocialState) -> Result<RateMatrix> {
    let shape_ok = transformed.lineage.len() == 1
        && transformed.lineage[0].kind == StageKind::Symmetrize
        && transformed.derived.len() == 3;
    if !shape_ok {
        return Err(Error::DimensionMismatch(format!(
            "expected a single 3->2 stage with 3 blocks of 2, got lineage [{}]",
            transformed.lineage_summary()
        )));
    }
    let blocks = transformed.derived_rates_exact(state)?;
    Ok(invert_symmetrize_blocks(&blocks)?.map(to_f64))
}

/// Base rates recovered from a single `n -> n-1` stage at base state `state`.
pub fn invert_reduce_once(
    transformed: &TransformedGame,
    state: &SocialState,
) -> Result<RateMatrix> {
    let shape_ok =
        transformed.lineage.len() == 1 && transformed.lineage[0].kind == StageKind::Reduce;
    if !shape_ok {
        return Err(Error::DimensionMismatch(format!(
            "expected a single reduce stage, got lineage [{}]",
            transformed.lineage_summary()
        )));
    }
    let blocks = transformed.derived_rates_exact(state)?;
    Ok(invert_reduce_blocks(&blocks)?.map(to_f64))
}

impl TransformedGame {
    fn new(
        game: &PopulationGame,
        protocol: &RevisionProtocol,
        population: usize,
        derived: Vec<DerivedPopulation>,
        lineage: Vec<Stage>,
    ) -> Result<Self> {
        let rest = find_rest_point(
            game,
            protocol,
            &game.barycenter(),
            FILL_TOLERANCE,
            FILL_MAX_TIME,
        )?;
        Ok(Self {
            base: game.clone(),
            protocol: protocol.clone(),
            population,
            derived,
            lineage,
            fstar: FStar::Zero,
            fill: rest.state,
            fill_residual: rest.residual,
        })
    }

    pub fn with_fstar(mut self, fstar: FStar) -> Self {
        self.fstar = fstar;
        self
    }

    pub fn base(&self) -> &PopulationGame {
        &self.base
    }

    pub fn base_protocol(&self) -> &RevisionProtocol {
        &self.protocol
    }

    pub fn base_population(&self) -> usize {
        self.population
    }

    pub fn base_arity(&self) -> usize {
        self.base.strategy_counts()[self.population]
    }

    pub fn populations(&self) -> &[DerivedPopulation] {
        &self.derived
    }

    pub fn num_populations(&self) -> usize {
        self.derived.len()
    }

    pub fn lineage(&self) -> &[Stage] {
        &self.lineage
    }

    pub fn lineage_summary(&self) -> String {
        self.lineage
            .iter()
            .map(Stage::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn fstar(&self) -> FStar {
        self.fstar
    }

    /// Rest point of the base mean dynamic used for fill-in.
    pub fn fill_state(&self) -> &SocialState {
        &self.fill
    }

    pub fn fill_residual(&self) -> f64 {
        self.fill_residual
    }

    pub fn mass(&self) -> f64 {
        self.base.masses()[self.population]
    }

    fn base_rates(&self, state: &SocialState) -> Result<RateMatrix> {
        self.base.check_state_within(state, 1e-9, 1e-12)?;
        let p = self.population;
        let payoff = &self.base.payoffs(state)[p];
        self.protocol.rates_for(p, payoff, &state.parts[p])
    }

    /// Derived rate blocks at base state `state`, evaluated exactly.
    pub fn derived_rates_exact(&self, state: &SocialState) -> Result<Vec<Square<BigRational>>> {
        let rho = self.base_rates(state)?.map(|&v| exact(v));
        Ok(self
            .derived
            .iter()
            .map(|d| d.rates.map(|f| f.eval_exact(&rho)))
            .collect())
    }

    /// Derived rate blocks at base state `state`.
    pub fn derived_rates(&self, state: &SocialState) -> Result<Vec<RateMatrix>> {
        Ok(self
            .derived_rates_exact(state)?
            .iter()
            .map(|b| b.map(to_f64))
            .collect())
    }

    /// All derived rates in one block-diagonal matrix.
    pub fn block_matrix(&self, state: &SocialState) -> Result<RateMatrix> {
        let blocks = self.derived_rates(state)?;
        let total: usize = blocks.iter().map(Square::dim).sum();
        let mut out = Square::filled(total, 0.0);
        let mut at = 0;
        for b in &blocks {
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    out.set(at + i, at + j, *b.get(i, j));
                }
            }
            at += b.dim();
        }
        Ok(out)
    }

    /// Derived state: each derived strategy carries the mass of its members.
    pub fn embed(&self, state: &SocialState) -> SocialState {
        let x = &state.parts[self.population];
        SocialState::new(
            self.derived
                .iter()
                .map(|d| {
                    d.groups
                        .iter()
                        .map(|g| g.iter().map(|&u| x[u]).sum())
                        .collect()
                })
                .collect(),
        )
    }

    /// `F*` at base state `state`.
    pub fn derived_payoffs(&self, state: &SocialState) -> Vec<PayoffVector> {
        derived_payoffs(
            &self.base,
            self.population,
            &self.derived,
            self.fstar,
            state,
        )
    }

    /// Base state whose derived population `d` is at `y`: each derived
    /// strategy's mass is split among its members in proportion to the rest
    /// point, and the other populations sit at the rest point.
    pub fn fill_in(&self, d: usize, y: &[f64]) -> SocialState {
        fill_in(&self.fill, self.population, &self.derived[d].groups, y)
    }

    /// Derived population `d` as a standalone game and protocol.
    ///
    /// State-independent base protocols give a rate table; otherwise the
    /// rates are recomputed from the filled-in base state at every call.
    pub fn population_game(&self, d: usize) -> Result<(PopulationGame, RevisionProtocol)> {
        let dp = self
            .derived
            .get(d)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "derived population {} does not exist ({} available)",
                    d + 1,
                    self.derived.len()
                ))
            })?
            .clone();
        let k = dp.arity();
        let shared = Arc::new((
            self.base.clone(),
            self.protocol.clone(),
            self.fill.clone(),
            self.population,
            dp,
            self.fstar,
        ));
        let payoff_ctx = shared.clone();
        let payoff = Payoff::Custom(Arc::new(move |y: &SocialState| {
            let (base, _, fill, p, dp, fstar) = &*payoff_ctx;
            let x = fill_in(fill, *p, &dp.groups, &y.parts[0]);
            derived_payoffs(base, *p, std::slice::from_ref(dp), *fstar, &x)
        }));
        let game = PopulationGame::new(vec![self.mass()], vec![k], payoff)?;
        let protocol = if self.protocol.is_state_independent() {
            let table = self.derived_rates(&self.fill)?.swap_remove(d);
            RevisionProtocol::table(vec![table])
        } else {
            let name = format!("derived-{}", self.protocol.kind().tag());
            RevisionProtocol::custom(
                name,
                false,
                Arc::new(move |_, _, y: &[f64]| {
                    let (base, protocol, fill, p, dp, _) = &*shared;
                    let x = fill_in(fill, *p, &dp.groups, y);
                    let payoff = &base.payoffs(&x)[*p];
                    match protocol.rates_for(*p, payoff, &x.parts[*p]) {
                        Ok(rho) => {
                            let rho = rho.map(|&v| exact(v));
                            dp.rates.map(|f| to_f64(&f.eval_exact(&rho)))
                        }
                        Err(_) => Square::filled(y.len(), f64::NAN),
                    }
                }),
            )
        };
        Ok((game, protocol))
    }
}

fn fill_in(fill: &SocialState, p: usize, groups: &[Vec<usize>], y: &[f64]) -> SocialState {
    let mut state = fill.clone();
    let rest = &fill.parts[p];
    let x = &mut state.parts[p];
    for (g, &mass) in groups.iter().zip(y) {
        let weight: f64 = g.iter().map(|&u| rest[u]).sum();
        for &u in g {
            x[u] = if weight > 0.0 {
                mass * rest[u] / weight
            } else {
                mass / g.len() as f64
            };
        }
    }
    state
}

fn derived_payoffs(
    base: &PopulationGame,
    p: usize,
    derived: &[DerivedPopulation],
    fstar: FStar,
    state: &SocialState,
) -> Vec<PayoffVector> {
    let f = &base.payoffs(state)[p];
    let x = &state.parts[p];
    derived
        .iter()
        .map(|d| {
            PayoffVector(
                d.groups
                    .iter()
                    .map(|g| match (g.len(), fstar) {
                        (1, _) => f.0[g[0]],
                        (_, FStar::Zero) => 0.0,
                        (_, FStar::Weighted) => {
                            let mass: f64 = g.iter().map(|&u| x[u]).sum();
                            if mass > 0.0 {
                                g.iter().map(|&u| x[u] * f.0[u]).sum::<f64>() / mass
                            } else {
                                g.iter().map(|&u| f.0[u]).sum::<f64>() / g.len() as f64
                            }
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}
