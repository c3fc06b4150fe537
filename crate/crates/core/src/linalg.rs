//! Exact rational linear algebra: fraction-free elimination, rank, kernels,
//! and a small sparse matrix used for unfoldings and Kronecker factors.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::Rational;

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    /// Rows scaled to integers (each by the lcm of its denominators).
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect()
            })
            .collect()
    }

    /// Fraction-free (Bareiss) row echelon form over the integers. Returns the
    /// nonzero echelon rows and their pivot columns.
    pub fn integer_echelon(&self) -> (Vec<Vec<BigInt>>, Vec<usize>) {
        let mut m = self.integer_rows();
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m.len() {
                break;
            }
            let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            for i in r + 1..m.len() {
                for j in c + 1..self.cols {
                    let num = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                    let (q, rem) = num.div_rem(&prev);
                    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                    m[i][j] = q;
                }
                m[i][c] = BigInt::zero();
            }
            prev = m[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.integer_echelon().1.len()
    }

    /// Basis of the right kernel, one primitive integer vector per free
    /// column, in increasing free-column order.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (ech, pivots) = self.integer_echelon();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut x = vec![Rational::zero(); self.cols];
            x[free] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate().rev() {
                let mut acc = Rational::zero();
                for j in pc + 1..self.cols {
                    if !ech[i][j].is_zero() && !x[j].is_zero() {
                        acc += Rational::from_integer(ech[i][j].clone()) * &x[j];
                    }
                }
                x[pc] = -acc / Rational::from_integer(ech[i][pc].clone());
            }
            basis.push(primitive_vector(&x));
        }
        basis
    }
}

/// Scales a rational vector to coprime integers, first nonzero entry positive.
pub fn primitive_vector(v: &[Rational]) -> Vec<Rational> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter().map(|x| Rational::from_integer(x / &g * &sign)).collect()
}

/// Sparse rational matrix keyed by `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn add(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "entry out of range");
        if v.is_zero() {
            return;
        }
        let e = self.entries.entry((r, c)).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            self.entries.remove(&(r, c));
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rational::zero(); self.rows];
        for ((r, c), w) in &self.entries {
            if !v[*c].is_zero() {
                out[*r] += w * &v[*c];
            }
        }
        out
    }

    /// Row-wise view `row -> [(col, value)]`.
    pub fn row_map(&self) -> BTreeMap<usize, Vec<(usize, Rational)>> {
        let mut out: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
        for ((r, c), w) in &self.entries {
            out.entry(*r).or_default().push((*c, w.clone()));
        }
        out
    }

    pub fn to_dense(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.rows, self.cols);
        for ((r, c), w) in &self.entries {
            m.set(*r, *c, w.clone());
        }
        m
    }
}
