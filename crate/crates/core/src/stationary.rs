//! Product-form stationary predictions from two-strategy birth–death chains.

use std::fmt;
use std::sync::Arc;

use crate::chain::grid::StateGrid;
use crate::chain::DEFAULT_GRID_LIMIT;
use crate::error::{Error, Result};
use crate::game::SocialState;
use crate::par::{map_indexed, pairwise_sum, ExecMode};
use crate::table::{Provenance, StationaryTable};
use crate::transform::TransformedGame;

/// Reading of the birth–death product formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Factor `(N-j+1)/j`, inflow rate at `(j-1)/N` over outflow rate at `j/N`.
    #[default]
    Standard,
    /// Factor `(N-j-1)/j` and the swapped orientation, taken literally.
    Paper,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Standard => "standard",
            Variant::Paper => "paper",
        })
    }
}

/// Per-agent switching rate as a function of the share of strategy `i`.
pub type RateCurve = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A two-strategy population `(i, not i)` with `total` agents of weight `1/size`.
#[derive(Clone)]
pub struct BirthDeathSpec {
    pub population: usize,
    pub size: u64,
    pub total: u32,
    /// `rho*_{not i, i}`.
    pub up: RateCurve,
    /// `rho*_{i, not i}`.
    pub down: RateCurve,
    pub factor: Variant,
    pub orientation: Variant,
}

impl fmt::Debug for BirthDeathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BirthDeathSpec")
            .field("population", &self.population)
            .field("size", &self.size)
            .field("total", &self.total)
            .field("factor", &self.factor)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl BirthDeathSpec {
    pub fn new(
        population: usize,
        size: u64,
        mass: f64,
        up: RateCurve,
        down: RateCurve,
    ) -> Result<Self> {
        let total = size as f64 * mass;
        if size == 0 || (total - total.round()).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "N = {size} with mass {mass} does not give a whole number of agents"
            )));
        }
        Ok(Self {
            population,
            size,
            total: total.round() as u32,
            up,
            down,
            factor: Variant::Standard,
            orientation: Variant::Standard,
        })
    }

    /// Constant per-agent rates.
    pub fn constant(size: u64, up: f64, down: f64) -> Result<Self> {
        Self::new(
            0,
            size,
            1.0,
            Arc::new(move |_| Ok(up)),
            Arc::new(move |_| Ok(down)),
        )
    }

    /// Derived population `d` of `transformed`, which must have two strategies.
    pub fn from_transformed(transformed: &TransformedGame, d: usize, size: u64) -> Result<Self> {
        let (game, protocol) = transformed.population_game(d)?;
        if game.strategy_counts()[0] != 2 {
            return Err(Error::WrongArity(format!(
                "derived population {} has {} strategies, birth–death needs 2",
                d + 1,
                game.strategy_counts()[0]
            )));
        }
        let mass = game.masses()[0];
        let shared = Arc::new((game, protocol));
        let rate = |from: usize, to: usize| -> RateCurve {
            let shared = shared.clone();
            Arc::new(move |x: f64| {
                let (game, protocol) = &*shared;
                let y = SocialState::single(vec![x, mass - x]);
                let r = protocol.rates_for(0, &game.payoffs(&y)[0], &y.parts[0])?;
                Ok(*r.get(from, to))
            })
        };
        Self::new(d, size, mass, rate(1, 0), rate(0, 1))
    }

    pub fn with_variants(mut self, factor: Variant, orientation: Variant) -> Self {
        self.factor = factor;
        self.orientation = orientation;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathWeights {
    /// `mu_k / mu_0` for `k = 0..=total`.
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// Some weight is exactly zero.
    pub degenerate: bool,
}

impl BirthDeathWeights {
    /// Weights scaled to sum to one.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::EmptySupport(
                "all birth–death weights are zero".into(),
            ));
        }
        let scaled: Vec<f64> = self.log_weights.iter().map(|l| (l - max).exp()).collect();
        let total = pairwise_sum(&scaled);
        Ok(scaled.into_iter().map(|w| w / total).collect())
    }
}

fn positive_rate(curve: &RateCurve, x: f64) -> Result<f64> {
    let r = curve(x)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::NotFullySupported {
            min_rate: r,
            floor: 0.0,
        });
    }
    Ok(r)
}

/// `mu_k / mu_0` over `k = 0..=total`, with `mu_0 = 1`.
pub fn birth_death_weights(spec: &BirthDeathSpec) -> Result<BirthDeathWeights> {
    let n = spec.size as f64;
    let k_max = spec.total;
    let kf = k_max as f64;
    let mut log_weights = Vec::with_capacity(k_max as usize + 1);
    let mut weights = Vec::with_capacity(k_max as usize + 1);
    log_weights.push(0.0);
    weights.push(1.0);
    for j in 1..=k_max {
        let jf = j as f64;
        let (num, den) = match spec.orientation {
            Variant::Standard => (
                positive_rate(&spec.up, (jf - 1.0) / n)?,
                positive_rate(&spec.down, jf / n)?,
            ),
            Variant::Paper => (
                positive_rate(&spec.down, (jf - 1.0) / n)?,
                positive_rate(&spec.up, jf / n)?,
            ),
        };
        let prev = weights[j as usize - 1];
        match spec.factor {
            Variant::Standard => {
                let l = log_weights[j as usize - 1] + (kf - jf + 1.0).ln() - jf.ln() + num.ln()
                    - den.ln();
                log_weights.push(l);
                weights.push(l.exp());
            }
            Variant::Paper => {
                let w = prev * ((kf - jf - 1.0) / jf) * (num / den);
                if w < 0.0 {
                    return Err(Error::Precondition(format!(
                        "literal factor (N-j-1)/j is negative at j = {j}, N = {k_max}"
                    )));
                }
                let w = w.abs();
                weights.push(w);
                log_weights.push(w.ln());
            }
        }
    }
    let degenerate = weights.contains(&0.0);
    Ok(BirthDeathWeights {
        weights,
        log_weights,
        degenerate,
    })
}

/// Normalized birth–death marginals of every derived population, keyed by
/// the global base strategy each one tracks.
pub fn transformed_marginals(
    transformed: &[TransformedGame],
    sizes: &[u64],
    factor: Variant,
    orientation: Variant,
) -> Result<Vec<(usize, BirthDeathWeights)>> {
    let mut out = Vec::new();
    for t in transformed {
        let p = t.base_population();
        let offset = t.base().offset(p);
        let size = *sizes.get(p).ok_or_else(|| {
            Error::DimensionMismatch(format!("no size given for population {}", p + 1))
        })?;
        for (d, dp) in t.populations().iter().enumerate() {
            if dp.groups[0].len() != 1 {
                return Err(Error::Precondition(format!(
                    "derived population {} does not lead with a single base strategy",
                    d + 1
                )));
            }
            let spec =
                BirthDeathSpec::from_transformed(t, d, size)?.with_variants(factor, orientation);
            out.push((offset + dp.groups[0][0], birth_death_weights(&spec)?));
        }
    }
    Ok(out)
}

/// `prod_i marginal_i(k_i)` on `grid`, renormalized over the grid, i.e.
/// conditioned on every population's counts summing to its total.
///
/// `factors` pairs a global strategy index with weights over `0..=total`.
/// Strategies without a factor contribute 1.
pub fn product_form_joint(
    grid: Arc<StateGrid>,
    factors: &[(usize, Vec<f64>)],
    mode: ExecMode,
) -> Result<StationaryTable> {
    let owners = owners(&grid);
    for (idx, w) in factors {
        let p = *owners.get(*idx).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "strategy index {} out of range ({} strategies)",
                idx + 1,
                grid.width()
            ))
        })?;
        let expected = grid.totals()[p] as usize + 1;
        if w.len() != expected {
            return Err(Error::GridMismatch(format!(
                "marginal for strategy {} has {} points, population {} needs {expected}",
                idx + 1,
                w.len(),
                p + 1
            )));
        }
    }
    let weights = map_indexed(grid.len(), mode, |s| {
        let counts = grid.state(s);
        factors
            .iter()
            .map(|(idx, w)| w[counts[*idx] as usize])
            .product::<f64>()
    });
    StationaryTable::from_weights(grid, weights, Provenance::PredictedProductForm).map_err(|e| {
        match e {
            Error::EmptySupport(_) => {
                Error::EmptySupport("no grid state has positive product weight".into())
            }
            other => other,
        }
    })
}

/// Prediction on the base grid from a full decomposition.
pub fn predict(
    transformed: &[TransformedGame],
    sizes: &[u64],
    factor: Variant,
    orientation: Variant,
    mode: ExecMode,
) -> Result<StationaryTable> {
    let base = transformed
        .first()
        .ok_or_else(|| Error::Precondition("nothing to predict from".into()))?
        .base();
    let grid = Arc::new(StateGrid::for_game(base, sizes, DEFAULT_GRID_LIMIT)?);
    let marginals = transformed_marginals(transformed, sizes, factor, orientation)?;
    let mut degenerate = false;
    let mut factors = Vec::with_capacity(marginals.len());
    for (idx, w) in marginals {
        degenerate |= w.degenerate;
        factors.push((idx, w.normalized()?));
    }
    Ok(product_form_joint(grid, &factors, mode)?
        .with_meta("variant_factor", factor.to_string())
        .with_meta("variant_orientation", orientation.to_string())
        .with_meta("degenerate", degenerate.to_string()))
}

/// Outer product of the marginals over the full box, last axis fastest.
pub fn product_unconditioned(marginals: &[Vec<f64>]) -> Vec<f64> {
    marginals.iter().fold(vec![1.0], |acc, m| {
        acc.iter()
            .flat_map(|a| m.iter().map(move |b| a * b))
            .collect()
    })
}

/// Marginal along `axis` of a box-shaped joint from [`product_unconditioned`].
pub fn box_marginal(joint: &[f64], dims: &[usize], axis: usize) -> Vec<f64> {
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; dims[axis]];
    for (i, v) in joint.iter().enumerate() {
        out[(i / inner) % dims[axis]] += v;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub tv: f64,
    /// Natural log; `+inf` when `p > 0 = q` somewhere.
    pub kl: f64,
    pub max_abs: f64,
}

pub fn compare(p: &StationaryTable, q: &StationaryTable) -> Result<Comparison> {
    p.grid().ensure_same(q.grid())?;
    let (a, b) = (p.probabilities(), q.probabilities());
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let mut kl_terms = Vec::with_capacity(a.len());
    let mut infinite = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y > 0.0 {
                kl_terms.push(x * (x / y).ln());
            } else {
                infinite = true;
            }
        }
    }
    Ok(Comparison {
        tv: 0.5 * pairwise_sum(&diffs),
        kl: if infinite {
            f64::INFINITY
        } else {
            pairwise_sum(&kl_terms)
        },
        max_abs: diffs.iter().copied().fold(0.0, f64::max),
    })
}

fn owners(grid: &StateGrid) -> Vec<usize> {
    grid.strategy_counts()
        .iter()
        .enumerate()
        .flat_map(|(p, &n)| std::iter::repeat_n(p, n))
        .collect()
}

/// Distribution of the count of global strategy `index` under `table`.
pub fn marginal(table: &StationaryTable, index: usize) -> Result<Vec<f64>> {
    let grid = table.grid();
    let p = *owners(grid).get(index).ok_or_else(|| {
        Error::Precondition(format!(
            "strategy index {} out of range ({} strategies)",
            index + 1,
            grid.width()
        ))
    })?;
    let mut out = vec![0.0; grid.totals()[p] as usize + 1];
    for (counts, &mu) in grid.iter().zip(table.probabilities()) {
        out[counts[index] as usize] += mu;
    }
    Ok(out)
}

/// [`marginal`] of an exact table.
pub fn marginal_from_exact(exact: &StationaryTable, index: usize) -> Result<Vec<f64>> {
    if exact.provenance() != Provenance::Exact {
        return Err(Error::Precondition(format!(
            "expected an exact table, got {}",
            exact.provenance()
        )));
    }
    marginal(exact, index)
}
