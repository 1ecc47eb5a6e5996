//! Square rate matrices over a small algebra of values.
//!
//! The transformation formulas only ever add, subtract, and halve rates, so
//! they are written once against [`RateValue`] and evaluated over `f64`
//! (fast path), [`BigRational`] (exact path), or symbolic linear forms.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub trait RateValue: Clone {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn halved(&self) -> Self;
}

impl RateValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn halved(&self) -> Self {
        self * 0.5
    }
}

impl RateValue for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn halved(&self) -> Self {
        self / BigInt::from(2)
    }
}

/// Exact rational image of a finite `f64`.
pub fn exact(value: f64) -> BigRational {
    BigRational::from_float(value).expect("finite rate")
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Dense row-major square matrix.
#[derive(Clone, PartialEq)]
pub struct Square<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone> Square<T> {
    pub fn filled(dim: usize, value: T) -> Self {
        Self {
            dim,
            data: vec![value; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from rows; `None` if the rows are not square.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(Self {
            dim,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Square<U> {
        Square {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl Square<f64> {
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `max_{i != j} |a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Smallest off-diagonal entry, `+inf` for a 1x1 matrix.
    pub fn min_off_diagonal(&self) -> f64 {
        let mut low = f64::INFINITY;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    low = low.min(*self.get(i, j));
                }
            }
        }
        low
    }
}

impl<T: fmt::Debug> fmt::Debug for Square<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for chunk in self.data.chunks(self.dim.max(1)) {
            list.entry(&chunk);
        }
        list.finish()
    }
}

/// Rate matrix for one population.
pub type RateMatrix = Square<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_non_square() {
        assert!(Square::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_none());
        assert!(Square::from_rows(&[vec![1.0, 2.0, 3.0], vec![3.0, 4.0, 5.0]]).is_none());
        let m = Square::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(*m.get(1, 0), 3.0);
    }

    #[test]
    fn asymmetry_and_floor() {
        let m = Square::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(m.max_asymmetry(), 1.0);
        assert_eq!(m.min_off_diagonal(), 2.0);
    }

    #[test]
    fn exact_halving_round_trips() {
        let x = 0.1_f64;
        let h = exact(x).halved();
        assert_eq!(to_f64(&h.plus(&h)), x);
    }
}
