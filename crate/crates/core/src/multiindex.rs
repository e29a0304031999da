//! Multi-indices `β ∈ ℕ^d`: order, factorial, monomials, the componentwise
//! partial order and multinomial-style binomial coefficients.
//!
//! Index sets `{β : |β| ≤ m}` are always enumerated in graded-lexicographic
//! order: by total order first, then lexicographically descending within a
//! degree, so for `d = 2, m = 2` the sequence is
//! `(0,0) (1,0) (0,1) (2,0) (1,1) (0,2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponent vector indexing moments, monomials and partial derivatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter(
                "multi-index must have dimension at least 1".into(),
            ));
        }
        Ok(Self(entries))
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self(vec![0; dim])
    }

    /// Unit index `e_j` in dimension `dim`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|β| = β_1 + ... + β_d`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `β! = β_1! ⋯ β_d!`, with overflow reported rather than wrapped.
    pub fn factorial(&self) -> Result<u64> {
        self.0.iter().try_fold(1u64, |acc, &b| {
            acc.checked_mul(factorial_u64(b)?)
                .ok_or(Error::Overflow("multi-index factorial"))
        })
    }

    /// `x^β` with `0^0 = 1`.
    pub fn monomial(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.monomial_unchecked(x))
    }

    pub(crate) fn monomial_unchecked(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&b, &xi)| xi.powi(b as i32))
            .product()
    }

    /// Componentwise partial order `α ≤ β`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    /// `binom(β, α) = Π_j C(β_j, α_j)`; requires `α ≤ β`.
    pub fn binomial(&self, alpha: &Self) -> Result<u64> {
        if !alpha.leq(self)? {
            return Err(Error::NotLeq {
                alpha: alpha.clone(),
                beta: self.clone(),
            });
        }
        self.0.iter().zip(&alpha.0).try_fold(1u64, |acc, (&b, &a)| {
            acc.checked_mul(binomial_u64(b, a)?)
                .ok_or(Error::Overflow("multi-index binomial"))
        })
    }

    /// `β − α`; requires `α ≤ β`.
    pub fn checked_sub(&self, alpha: &Self) -> Result<Self> {
        if !alpha.leq(self)? {
            return Err(Error::NotLeq {
                alpha: alpha.clone(),
                beta: self.clone(),
            });
        }
        Ok(Self(self.0.iter().zip(&alpha.0).map(|(b, a)| b - a).collect()))
    }

    /// All `α ≤ β`, in graded-lexicographic order.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        enumerate_upto(self.dim(), self.order())
            .into_iter()
            .filter(|a| a.0.iter().zip(&self.0).all(|(x, y)| x <= y))
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        assert!(!v.is_empty(), "dimension must be at least 1");
        Self(v.to_vec())
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        assert!(N >= 1, "dimension must be at least 1");
        Self(v.to_vec())
    }
}

/// Every `β ∈ ℕ^d` with `|β| ≤ m`, graded-lexicographic. There are `C(d+m, d)`.
pub fn enumerate_upto(dim: usize, max_order: u32) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut out = Vec::new();
    for k in 0..=max_order {
        let mut buf = vec![0u32; dim];
        compositions(k, 0, &mut buf, &mut out);
    }
    out
}

/// Compositions of `remaining` into `buf[pos..]`, first entry largest first.
fn compositions(remaining: u32, pos: usize, buf: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.clone()));
        return;
    }
    for v in (0..=remaining).rev() {
        buf[pos] = v;
        compositions(remaining - v, pos + 1, buf, out);
    }
}

pub(crate) fn factorial_u64(n: u32) -> Result<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| {
        acc.checked_mul(k).ok_or(Error::Overflow("factorial"))
    })
}

fn binomial_u64(n: u32, k: u32) -> Result<u64> {
    let k = k.min(n - k) as u64;
    let n = n as u64;
    // C(n, i+1) = C(n, i) * (n - i) / (i + 1) stays integral at every step.
    (0..k).try_fold(1u64, |acc, i| {
        acc.checked_mul(n - i)
            .map(|v| v / (i + 1))
            .ok_or(Error::Overflow("binomial"))
    })
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
