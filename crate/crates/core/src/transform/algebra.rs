//! Rate formulas of the transformations, generic over [`RateValue`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rates::{exact, to_f64, RateValue, Square};

/// `sum_{(i,j)} c_ij rho_ij` over the entries of one base rate matrix.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LinearForm {
    terms: BTreeMap<(u16, u16), BigRational>,
}

impl LinearForm {
    /// The base entry `rho_ij`.
    pub fn var(i: usize, j: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((i as u16, j as u16), BigRational::one());
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, i: usize, j: usize) -> BigRational {
        self.terms
            .get(&(i as u16, j as u16))
            .cloned()
            .unwrap_or_else(<BigRational as Zero>::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), &BigRational)> {
        self.terms
            .iter()
            .map(|(&(i, j), c)| ((i as usize, j as usize), c))
    }

    pub fn eval_exact(&self, rho: &Square<BigRational>) -> BigRational {
        self.terms
            .iter()
            .fold(<BigRational as Zero>::zero(), |acc, (&(i, j), c)| {
                acc + c * rho.get(i as usize, j as usize)
            })
    }

    /// Exact evaluation rounded once.
    pub fn eval(&self, rho: &Square<f64>) -> f64 {
        to_f64(&self.eval_exact(&rho.map(|&v| exact(v))))
    }

    fn combine(&self, other: &Self, sign: i32) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let entry = terms.entry(*k).or_insert_with(<BigRational as Zero>::zero);
            if sign > 0 {
                *entry += c;
            } else {
                *entry -= c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self { terms }
    }
}

impl RateValue for LinearForm {
    fn zero() -> Self {
        Self::default()
    }
    fn plus(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }
    fn minus(&self, other: &Self) -> Self {
        self.combine(other, -1)
    }
    fn halved(&self) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c / &two)).collect(),
        }
    }
}

impl std::fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| format!("{c}*r{}{}", i + 1, j + 1))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Symbolic base matrix `[rho_ij]`.
pub fn base_forms(n: usize) -> Square<LinearForm> {
    Square::from_fn(n, LinearForm::var)
}

fn sum<T: RateValue>(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(T::zero(), |acc, v| acc.plus(&v))
}

fn twice<T: RateValue>(v: &T) -> T {
    v.plus(v)
}

/// Three 2x2 blocks, ordered `(i, not i)`:
/// `[[rho_ii, sum_{j!=i} rho_ij], [1/2 sum_{j!=i} rho_ji, rho*_{not i, not i}]]`.
pub fn symmetrize_blocks<T: RateValue>(rho: &Square<T>) -> Result<Vec<Square<T>>> {
    if rho.dim() != 3 {
        return Err(Error::WrongArity(format!(
            "the 3-to-2 construction needs 3 strategies, got {}",
            rho.dim()
        )));
    }
    Ok((0..3)
        .map(|i| {
            let others = [(i + 1) % 3, (i + 2) % 3];
            let down = sum(others.iter().map(|&j| rho.get(i, j).clone()));
            let up = sum(others.iter().map(|&j| rho.get(j, i).clone())).halved();
            let mut rest = T::zero();
            for &j in &others {
                for &k in &others {
                    rest = rest.plus(rho.get(j, k));
                }
            }
            let rest = rest.halved();
            let mut block = Square::filled(2, T::zero());
            block.set(0, 0, rho.get(i, i).clone());
            block.set(0, 1, down);
            block.set(1, 0, up);
            block.set(1, 1, rest);
            block
        })
        .collect())
}

/// `rho_ij = (rho*_{i,not i} + rho*_{j,not j} - 2 rho*_{not k,k}) / 2`, `rho_ii = rho*_ii`.
pub fn invert_symmetrize_blocks<T: RateValue>(blocks: &[Square<T>]) -> Result<Square<T>> {
    if blocks.len() != 3 || blocks.iter().any(|b| b.dim() != 2) {
        return Err(Error::DimensionMismatch(format!(
            "expected 3 blocks of 2 strategies, got {:?}",
            blocks.iter().map(Square::dim).collect::<Vec<_>>()
        )));
    }
    let down = |i: usize| blocks[i].get(0, 1);
    let up = |i: usize| blocks[i].get(1, 0);
    Ok(Square::from_fn(3, |i, j| {
        if i == j {
            blocks[i].get(0, 0).clone()
        } else {
            let k = 3 - i - j;
            down(i).plus(down(j)).minus(&twice(up(k))).halved()
        }
    }))
}

/// `rho*_{A,B} = sum_{u in A, v in B} rho_uv` for the given groups.
pub fn lump<T: RateValue>(rho: &Square<T>, groups: &[Vec<usize>]) -> Square<T> {
    Square::from_fn(groups.len(), |a, b| {
        let mut acc = T::zero();
        for &u in &groups[a] {
            for &v in &groups[b] {
                acc = acc.plus(rho.get(u, v));
            }
        }
        acc
    })
}

/// Group layout of block `i` of the n to n-1 reduction, in local indices:
/// singletons `{i}, ..., {i+n-3}` then the aggregate `{i+n-2, i+n-1}` (mod n).
pub fn reduction_groups(n: usize, i: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = (0..n - 2).map(|s| vec![(i + s) % n]).collect();
    groups.push(vec![(i + n - 2) % n, (i + n - 1) % n]);
    groups
}

/// All `n` blocks of the n to n-1 reduction.
pub fn reduce_blocks<T: RateValue>(rho: &Square<T>) -> Result<Vec<Square<T>>> {
    let n = rho.dim();
    if n <= 3 {
        return Err(Error::WrongArity(format!(
            "the n to n-1 reduction needs more than 3 strategies, got {n}"
        )));
    }
    Ok((0..n).map(|i| lump(rho, &reduction_groups(n, i))).collect())
}

/// Recovers `rho` from the blocks of [`reduce_blocks`].
///
/// Entries between two singletons of some block are read directly. For
/// `n = 4` the pairs at cyclic distance 2 never share a block as singletons
/// and are recovered as `rho*_{u,a} - rho_uw` with `a = {v, w}`.
pub fn invert_reduce_blocks<T: RateValue>(blocks: &[Square<T>]) -> Result<Square<T>> {
    let n = blocks.len();
    if n <= 3 || blocks.iter().any(|b| b.dim() != n - 1) {
        return Err(Error::DimensionMismatch(format!(
            "expected n > 3 blocks of n - 1 strategies, got {:?}",
            blocks.iter().map(Square::dim).collect::<Vec<_>>()
        )));
    }
    let singleton = |b: usize, u: usize| (u + n - b) % n < n - 2;
    let local = |b: usize, u: usize| (u + n - b) % n;
    let direct = |u: usize, v: usize| -> Option<T> {
        (0..n)
            .find(|&b| singleton(b, u) && singleton(b, v))
            .map(|b| blocks[b].get(local(b, u), local(b, v)).clone())
    };
    let mut out = Square::filled(n, T::zero());
    for u in 0..n {
        for v in 0..n {
            let value = match direct(u, v) {
                Some(x) => x,
                None => {
                    let agg = n - 2;
                    let (b, w) = (0..n)
                        .filter(|&b| singleton(b, u) && !singleton(b, v))
                        .find_map(|b| {
                            let w = if (b + n - 2) % n == v {
                                (b + n - 1) % n
                            } else {
                                (b + n - 2) % n
                            };
                            direct(u, w).map(|x| (b, x))
                        })
                        .ok_or_else(|| {
                            Error::Precondition(format!(
                                "rate {}->{} is not recoverable from the blocks",
                                u + 1,
                                v + 1
                            ))
                        })?;
                    blocks[b].get(local(b, u), agg).minus(&w)
                }
            };
            out.set(u, v, value);
        }
    }
    Ok(out)
}
