//! Sparse cubical tensors with exact rational entries.
//!
//! Index convention: for a dynamics tensor of order `k` the leading `k - 1`
//! modes are the hyperedge heads and the LAST mode is the tail, so
//! `(A x^{k-1})_i = sum A[i1..i_{k-1}, i] x_{i1} ... x_{i_{k-1}}`.
//! Indices are 0-based in this API; the JSON system format is 1-based.
//!
//! Kronecker indices use mixed radix `n` with the first tensor index as the
//! most significant digit. [`SparseTensor::unfold`] and [`kron_power`] share
//! that encoding so `unfold(T) * x^[k-1] == T x^{k-1}`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::SparseMatrix;
use crate::poly::{Monomial, Polynomial, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("dimension mismatch: tensor has dim {tensor}, operand has {other}")]
    DimensionMismatch { tensor: usize, other: usize },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("index {index:?} invalid for order {order}, dim {dim}")]
    BadIndex { index: Vec<usize>, order: usize, dim: usize },
    #[error("slot {slot} out of range for order {order}")]
    SlotOutOfRange { slot: usize, order: usize },
    #[error("tensor order and dimension must be positive")]
    Degenerate,
}

/// Order-`k`, dimension-`n` tensor stored as index tuple -> nonzero weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseTensor {
    order: usize,
    dim: usize,
    entries: BTreeMap<Vec<usize>, Rational>,
}

impl SparseTensor {
    pub fn new(order: usize, dim: usize) -> Result<Self, TensorError> {
        if order == 0 || dim == 0 {
            return Err(TensorError::Degenerate);
        }
        Ok(SparseTensor { order, dim, entries: BTreeMap::new() })
    }

    pub fn from_entries<I>(order: usize, dim: usize, entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Rational)>,
    {
        let mut t = Self::new(order, dim)?;
        for (idx, w) in entries {
            t.add_entry(&idx, w)?;
        }
        Ok(t)
    }

    /// Identity matrix as an order-2 tensor.
    pub fn identity(dim: usize) -> Self {
        let mut t = SparseTensor { order: 2, dim, entries: BTreeMap::new() };
        for i in 0..dim {
            t.entries.insert(vec![i, i], Rational::one());
        }
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.entries.iter()
    }

    pub fn get(&self, idx: &[usize]) -> Rational {
        self.entries.get(idx).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `w` to the entry at `idx`; entries that cancel are removed.
    pub fn add_entry(&mut self, idx: &[usize], w: Rational) -> Result<(), TensorError> {
        if idx.len() != self.order || idx.iter().any(|&i| i >= self.dim) {
            return Err(TensorError::BadIndex { index: idx.to_vec(), order: self.order, dim: self.dim });
        }
        if w.is_zero() {
            return Ok(());
        }
        let e = self.entries.entry(idx.to_vec()).or_insert_with(Rational::zero);
        *e += w;
        if e.is_zero() {
            self.entries.remove(idx);
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> SparseTensor {
        let mut t = SparseTensor { order: self.order, dim: self.dim, entries: BTreeMap::new() };
        if c.is_zero() {
            return t;
        }
        for (k, v) in &self.entries {
            t.entries.insert(k.clone(), v * c);
        }
        t
    }

    pub fn add(&self, other: &SparseTensor) -> Result<SparseTensor, TensorError> {
        self.check_dim(other.dim)?;
        if self.order != other.order {
            return Err(TensorError::OrderMismatch { left: self.order, right: other.order });
        }
        let mut t = self.clone();
        for (k, v) in &other.entries {
            t.add_entry(k, v.clone())?;
        }
        Ok(t)
    }

    fn check_dim(&self, other: usize) -> Result<(), TensorError> {
        if self.dim != other {
            return Err(TensorError::DimensionMismatch { tensor: self.dim, other });
        }
        Ok(())
    }

    /// `(T x^{k-1})_i`: every mode except the last contracted with `x`.
    pub fn contract_vector_power(&self, x: &[Rational]) -> Result<Vec<Rational>, TensorError> {
        self.check_dim(x.len())?;
        let mut out = vec![Rational::zero(); self.dim];
        for (idx, w) in &self.entries {
            let (heads, tail) = idx.split_at(self.order - 1);
            let mut t = w.clone();
            for &h in heads {
                t *= &x[h];
            }
            out[tail[0]] += t;
        }
        Ok(out)
    }

    /// `T x^k`: all modes contracted.
    pub fn contract_full(&self, x: &[Rational]) -> Result<Rational, TensorError> {
        self.check_dim(x.len())?;
        let mut acc = Rational::zero();
        for (idx, w) in &self.entries {
            let mut t = w.clone();
            for &i in idx {
                t *= &x[i];
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Average over the distinct permutations of each index tuple.
    pub fn symmetrize(&self) -> SparseTensor {
        // Group entries by their sorted index multiset.
        let mut classes: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (idx, w) in &self.entries {
            let mut key = idx.clone();
            key.sort_unstable();
            *classes.entry(key).or_insert_with(Rational::zero) += w;
        }
        let mut out = SparseTensor { order: self.order, dim: self.dim, entries: BTreeMap::new() };
        for (key, total) in classes {
            if total.is_zero() {
                continue;
            }
            let perms = distinct_permutations(&key);
            let avg = total / Rational::from_integer(perms.len().into());
            for p in perms {
                out.entries.insert(p, avg.clone());
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetrize() == *self
    }

    /// `(X o Y)[i.., j..] = sum_t X[i.., t] Y[j.., t]` for tensors of equal
    /// order.
    pub fn circ_contract(&self, other: &SparseTensor) -> Result<SparseTensor, TensorError> {
        if self.order != other.order {
            return Err(TensorError::OrderMismatch { left: self.order, right: other.order });
        }
        self.contract_last_modes(other)
    }

    /// Last-mode contraction for arbitrary orders: result order is
    /// `order(X) + order(Y) - 2`, with X's free indices first.
    pub fn contract_last_modes(&self, other: &SparseTensor) -> Result<SparseTensor, TensorError> {
        self.check_dim(other.dim)?;
        let order = self.order + other.order - 2;
        if order == 0 {
            return Err(TensorError::Degenerate);
        }
        let mut by_tail: BTreeMap<usize, Vec<(&[usize], &Rational)>> = BTreeMap::new();
        for (idx, w) in &other.entries {
            let (rest, tail) = idx.split_at(other.order - 1);
            by_tail.entry(tail[0]).or_default().push((rest, w));
        }
        let mut out = SparseTensor { order, dim: self.dim, entries: BTreeMap::new() };
        for (idx, w) in &self.entries {
            let (rest, tail) = idx.split_at(self.order - 1);
            if let Some(ys) = by_tail.get(&tail[0]) {
                for (yrest, yw) in ys {
                    let mut key = rest.to_vec();
                    key.extend_from_slice(yrest);
                    out.add_entry(&key, w * *yw)?;
                }
            }
        }
        Ok(out)
    }

    /// Contracts slot `slot` (0-based) of `self` against the tail (last mode)
    /// of `a`; the heads of `a` are spliced into that position. Result order
    /// is `order(self) + order(a) - 2`.
    pub fn slot_contract(&self, a: &SparseTensor, slot: usize) -> Result<SparseTensor, TensorError> {
        if slot >= self.order {
            return Err(TensorError::SlotOutOfRange { slot, order: self.order });
        }
        self.check_dim(a.dim)?;
        let order = self.order + a.order - 2;
        let mut by_tail: BTreeMap<usize, Vec<(&[usize], &Rational)>> = BTreeMap::new();
        for (idx, w) in &a.entries {
            let (heads, tail) = idx.split_at(a.order - 1);
            by_tail.entry(tail[0]).or_default().push((heads, w));
        }
        if order == 0 {
            // Both order 1: a scalar; represent nothing (no valid tensor).
            return Err(TensorError::Degenerate);
        }
        let mut out = SparseTensor { order, dim: self.dim, entries: BTreeMap::new() };
        for (idx, w) in &self.entries {
            if let Some(list) = by_tail.get(&idx[slot]) {
                for (heads, aw) in list {
                    let mut key = Vec::with_capacity(order);
                    key.extend_from_slice(&idx[..slot]);
                    key.extend_from_slice(heads);
                    key.extend_from_slice(&idx[slot + 1..]);
                    out.add_entry(&key, w * *aw)?;
                }
            }
        }
        Ok(out)
    }

    /// Mode unfolding: `n x n^{k-1}` matrix whose row is the tail index and
    /// whose column encodes the head tuple.
    pub fn unfold(&self) -> SparseMatrix {
        let cols = self.dim.pow((self.order - 1) as u32);
        let mut m = SparseMatrix::new(self.dim, cols);
        for (idx, w) in &self.entries {
            let (heads, tail) = idx.split_at(self.order - 1);
            m.add(tail[0], kron_index(heads, self.dim), w.clone());
        }
        m
    }

    /// Flattens all modes: a `1 x n^k` row, used for output tensors.
    pub fn unfold_row(&self) -> SparseMatrix {
        let cols = self.dim.pow(self.order as u32);
        let mut m = SparseMatrix::new(1, cols);
        for (idx, w) in &self.entries {
            m.add(0, kron_index(idx, self.dim), w.clone());
        }
        m
    }

    /// The homogeneous form `T x^k` as a polynomial in `nvars >= dim`
    /// variables, state variable `i` at position `i`.
    pub fn scalar_form(&self, nvars: usize) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        for (idx, w) in &self.entries {
            p.add_term(index_monomial(idx, nvars), w.clone());
        }
        p
    }

    /// The vector field `T x^{k-1}` as `dim` polynomials.
    pub fn vector_form(&self, nvars: usize) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(nvars); self.dim];
        for (idx, w) in &self.entries {
            let (heads, tail) = idx.split_at(self.order - 1);
            out[tail[0]].add_term(index_monomial(heads, nvars), w.clone());
        }
        out
    }
}

/// Monomial `x_{i1} ... x_{ik}` for an index tuple.
pub fn index_monomial(idx: &[usize], nvars: usize) -> Monomial {
    let mut exps = vec![0u16; nvars];
    for &i in idx {
        exps[i] += 1;
    }
    Monomial::from_exponents(&exps)
}

/// Mixed-radix position of `idx`, first index most significant.
pub fn kron_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Inverse of [`kron_index`] for tuples of length `len`.
pub fn kron_digits(mut pos: usize, dim: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in (0..len).rev() {
        out[slot] = pos % dim;
        pos /= dim;
    }
    out
}

/// `x^[k]`, the `k`-fold Kronecker power, with `x^[0] = (1)`.
pub fn kron_power(x: &[Rational], k: usize) -> Vec<Rational> {
    let mut acc = vec![Rational::one()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(acc.len() * x.len());
        for a in &acc {
            for b in x {
                next.push(a * b);
            }
        }
        acc = next;
    }
    acc
}

/// Distinct permutations of a sorted multiset, in lexicographic order.
pub fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // Standard next-permutation walk.
    loop {
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}
