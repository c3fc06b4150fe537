//! Local observability: Kronecker-form observability matrices and exact
//! rank tests.
//!
//! A scalar polynomial in the state is carried as a *Kronecker row*: one
//! sparse row per degree `d`, against the basis `x^[d]`, with coefficients
//! that may depend on input symbols `u_l` and their formal derivatives
//! `u_l^(p)`. Along trajectories `d/dt x^[d] = Σ_m Ā_{d,m} x^[d+m−2]` with
//!
//! ```text
//! Ā_{d,m} = Σ_{j=1..d} I ⊗ .. ⊗ unfold(A_m) ⊗ .. ⊗ I   (unfold in slot j)
//! ```
//!
//! acting on row vectors. Repeated application yields the Lie derivatives
//! whose state gradients form the observability matrices:
//!
//! * `O`  — no inputs: rows `C Ā^r`.
//! * `O₁` — input fields, no direct term: factors `Ã = Ā(A) + Σ_l u_l Ā(B_l)`
//!   with the Leibniz rule moving derivatives onto the input symbols.
//! * `O₂` — direct term, no input fields: row `r` is
//!   `(C + D u) Ā^r + Σ_{p≥1} binom(r, p) D Ā^{r−p} u^(p)`.
//!
//! The mixed case (input fields and direct terms) falls back to the direct
//! Jacobian of iterated extended Lie derivatives, which also serves as the
//! oracle for the three factored forms.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{QMatrix, SparseMatrix};
use crate::poly::{common_monomial_factor, Monomial, Polynomial, Rational, VarSpace};
use crate::system::HypergraphSystem;
use crate::tensor::{kron_digits, kron_index, SparseTensor};

/// `Σ_j I ⊗ .. ⊗ unfold(A_m) ⊗ .. ⊗ I` for every tensor `A_m` in `tensors`,
/// as `(m, n^d × n^{d+m−2} matrix)` pairs acting on row vectors over
/// `x^[d]`. Tensors of equal order are summed.
pub fn bar_a_factor(tensors: &[SparseTensor], n: usize, d: usize) -> Vec<(usize, SparseMatrix)> {
    let mut by_order: BTreeMap<usize, SparseMatrix> = BTreeMap::new();
    if d == 0 {
        return Vec::new();
    }
    let rows = n.pow(d as u32);
    for t in tensors {
        let m = t.order();
        let cols = n.pow((d + m - 2) as u32);
        let mat = by_order.entry(m).or_insert_with(|| SparseMatrix::new(rows, cols));
        // Group tensor entries by tail.
        let mut by_tail: BTreeMap<usize, Vec<(&[usize], &Rational)>> = BTreeMap::new();
        for (idx, w) in t.entries() {
            by_tail.entry(idx[m - 1]).or_default().push((&idx[..m - 1], w));
        }
        for row in 0..rows {
            let digits = kron_digits(row, n, d);
            for slot in 0..d {
                let Some(heads) = by_tail.get(&digits[slot]) else { continue };
                for (p, w) in heads {
                    let mut out = Vec::with_capacity(d + m - 2);
                    out.extend_from_slice(&digits[..slot]);
                    out.extend_from_slice(p);
                    out.extend_from_slice(&digits[slot + 1..]);
                    mat.add(row, kron_index(&out, n), (*w).clone());
                }
            }
        }
    }
    by_order.into_iter().filter(|(_, m)| m.nnz() > 0).collect()
}

/// Binomial coefficients of `(a + b)^{n−1}`, i.e. `binom(n−1, p−1)` for
/// `p = 1..=n`.
pub fn pascal_row(n: usize) -> Vec<BigInt> {
    if n == 0 {
        return Vec::new();
    }
    let mut row = vec![BigInt::one()];
    for _ in 1..n {
        let mut next = vec![BigInt::one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row
}

/// Variable layout: states first, then per input `l` the jets
/// `u_l, u_l^(1), .., u_l^(J−1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpace {
    pub n: usize,
    pub inputs: usize,
    pub jet: usize,
}

impl JetSpace {
    pub fn nvars(&self) -> usize {
        self.n + self.inputs * self.jet
    }

    pub fn u(&self, l: usize, p: usize) -> usize {
        debug_assert!(p < self.jet);
        self.n + l * self.jet + p
    }

    pub fn var_space(&self, labels: &[String]) -> VarSpace {
        let mut names: Vec<String> = labels.to_vec();
        for l in 0..self.inputs {
            for p in 0..self.jet {
                names.push(if p == 0 { format!("u{}", l + 1) } else { format!("u{}_d{}", l + 1, p) });
            }
        }
        VarSpace::new(names)
    }

    /// `Σ_l Σ_p u_l^(p+1) ∂c/∂u_l^(p)`.
    pub fn jet_derivative(&self, c: &Polynomial) -> Polynomial {
        let nv = self.nvars();
        let mut out = Polynomial::zero(nv);
        for l in 0..self.inputs {
            for p in 0..self.jet.saturating_sub(1) {
                let d = c.derivative(self.u(l, p));
                if !d.is_zero() {
                    out = &out + &(&d * &Polynomial::var(nv, self.u(l, p + 1)));
                }
            }
        }
        out
    }

    /// Extended Lie operator: `Σ f_i ∂/∂x_i + Σ u^(p+1) ∂/∂u^(p)`.
    pub fn extended_lie(&self, v: &Polynomial, f: &[Polynomial]) -> Polynomial {
        &crate::poly::lie_derivative(v, f) + &self.jet_derivative(v)
    }
}

/// Rectangular grid of polynomials in a [`JetSpace`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    pub space: JetSpace,
    pub rows: Vec<Vec<Polynomial>>,
}

impl PolyMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.space.n
    }

    pub fn eval(&self, point: &[Rational]) -> QMatrix {
        QMatrix::from_rows(self.rows.iter().map(|r| r.iter().map(|p| p.eval(point)).collect()).collect())
    }
}

type KronRow = BTreeMap<(usize, usize), Polynomial>;

/// `(m, row → [(column, weight)])` pairs of one degree's factor matrices.
type FactorRows = Vec<(usize, BTreeMap<usize, Vec<(usize, Rational)>>)>;

/// Weighted tensor groups `(coefficient, tensors)` making up a factor.
struct FactorSet {
    n: usize,
    groups: Vec<(Polynomial, Vec<SparseTensor>)>,
    cache: HashMap<(usize, usize), FactorRows>,
}

impl FactorSet {
    fn new(n: usize, groups: Vec<(Polynomial, Vec<SparseTensor>)>) -> Self {
        FactorSet { n, groups, cache: HashMap::new() }
    }

    /// `row · Ã` summed over groups.
    fn apply(&mut self, row: &KronRow, nvars: usize) -> KronRow {
        let mut out: KronRow = BTreeMap::new();
        for g in 0..self.groups.len() {
            let degrees: Vec<usize> = row.keys().map(|(d, _)| *d).collect();
            for d in degrees {
                if !self.cache.contains_key(&(g, d)) {
                    let f = bar_a_factor(&self.groups[g].1, self.n, d)
                        .into_iter()
                        .map(|(m, mat)| (m, mat.row_map()))
                        .collect();
                    self.cache.insert((g, d), f);
                }
            }
            let gc = &self.groups[g].0;
            for ((d, col), c) in row {
                let weighted = c * gc;
                if weighted.is_zero() {
                    continue;
                }
                for (m, rows) in &self.cache[&(g, *d)] {
                    let Some(entries) = rows.get(col) else { continue };
                    for (col2, w) in entries {
                        let key = (d + m - 2, *col2);
                        let e = out.entry(key).or_insert_with(|| Polynomial::zero(nvars));
                        *e = &*e + &weighted.scale(w);
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

fn add_rows(a: &mut KronRow, b: &KronRow, scale: &Rational) {
    for (k, c) in b {
        let e = a.entry(*k).or_insert_with(|| Polynomial::zero(c.nvars()));
        *e = &*e + &c.scale(scale);
    }
    a.retain(|_, c| !c.is_zero());
}

fn tensors_row(tensors: &[SparseTensor], n: usize, coef: &Polynomial) -> KronRow {
    let mut row: KronRow = BTreeMap::new();
    for t in tensors {
        for (idx, w) in t.entries() {
            let key = (t.order(), kron_index(idx, n));
            let e = row.entry(key).or_insert_with(|| Polynomial::zero(coef.nvars()));
            *e = &*e + &coef.scale(w);
        }
    }
    row.retain(|_, c| !c.is_zero());
    row
}

fn row_polynomial(row: &KronRow, n: usize, nvars: usize) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for ((d, col), c) in row {
        let mut e = vec![0u16; nvars];
        for i in kron_digits(*col, n, *d) {
            e[i] += 1;
        }
        p = &p + &c.mul_monomial(&Monomial::from_exponents(&e), &Rational::one());
    }
    p
}

fn gradient_row(p: &Polynomial, n: usize) -> Vec<Polynomial> {
    (0..n).map(|i| p.derivative(i)).collect()
}

/// Which matrix a system gets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    O,
    O1,
    O2,
    /// Input fields and direct terms together: direct Jacobian only.
    DirectJacobian,
}

impl MatrixKind {
    pub fn for_system(sys: &HypergraphSystem) -> MatrixKind {
        match (sys.has_input_fields(), sys.has_direct()) {
            (false, false) => MatrixKind::O,
            (true, false) => MatrixKind::O1,
            (false, true) => MatrixKind::O2,
            (true, true) => MatrixKind::DirectJacobian,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::O => "O",
            MatrixKind::O1 => "O1",
            MatrixKind::O2 => "O2",
            MatrixKind::DirectJacobian => "direct-jacobian",
        }
    }
}

fn jet_space(sys: &HypergraphSystem, levels: usize) -> JetSpace {
    let inputs = if sys.has_input_fields() || sys.has_direct() { sys.num_inputs() } else { 0 };
    JetSpace { n: sys.n(), inputs, jet: levels }
}

/// Default number of Lie levels: `n` (orders `0..n−1`).
pub fn default_levels(sys: &HypergraphSystem) -> usize {
    sys.n()
}

/// `O`: gradients of `C Ā^r x^[·]` for `r = 0..levels−1`, rows ordered by Lie
/// order then output. `None` if the system has inputs or direct terms.
pub fn matrix_o(sys: &HypergraphSystem, levels: usize) -> Option<PolyMatrix> {
    if sys.has_input_fields() || sys.has_direct() {
        return None;
    }
    let space = jet_space(sys, levels);
    let n = sys.n();
    let nv = space.nvars();
    let one = Polynomial::one(nv);
    let mut factors = FactorSet::new(n, vec![(one.clone(), sys.dynamics().to_vec())]);
    let mut current: Vec<KronRow> = sys.outputs().iter().map(|cs| tensors_row(cs, n, &one)).collect();
    let mut rows = Vec::new();
    for r in 0..levels {
        if r > 0 {
            current = current.iter().map(|row| factors.apply(row, nv)).collect();
        }
        for row in &current {
            rows.push(gradient_row(&row_polynomial(row, n, nv), n));
        }
    }
    Some(PolyMatrix { space, rows })
}

/// `O₁`: inputs act through `Ã = Ā(A) + Σ u_l Ā(B_l)`; each step is
/// `row ↦ jet-derivative(row) + row · Ã`. `None` unless the system has input
/// fields and no direct terms.
pub fn matrix_o1(sys: &HypergraphSystem, levels: usize) -> Option<PolyMatrix> {
    if sys.has_direct() {
        return None;
    }
    let space = jet_space(sys, levels);
    let n = sys.n();
    let nv = space.nvars();
    let one = Polynomial::one(nv);
    let mut groups = vec![(one.clone(), sys.dynamics().to_vec())];
    for (l, bs) in sys.inputs().iter().enumerate() {
        if space.inputs > 0 {
            groups.push((Polynomial::var(nv, space.u(l, 0)), bs.clone()));
        }
    }
    let mut factors = FactorSet::new(n, groups);
    let mut current: Vec<KronRow> = sys.outputs().iter().map(|cs| tensors_row(cs, n, &one)).collect();
    let mut rows = Vec::new();
    for r in 0..levels {
        if r > 0 {
            current = current
                .iter()
                .map(|row| {
                    let mut next = factors.apply(row, nv);
                    let jet: KronRow = row.iter().map(|(k, c)| (*k, space.jet_derivative(c))).collect();
                    add_rows(&mut next, &jet, &Rational::one());
                    next
                })
                .collect();
        }
        for row in &current {
            rows.push(gradient_row(&row_polynomial(row, n, nv), n));
        }
    }
    Some(PolyMatrix { space, rows })
}

/// `O₂`: row `r` of output `i` is
/// `(C + D u) Ā^r + Σ_{p=1..r} binom(r, p) (D u^(p)) Ā^{r−p}`, with the
/// binomials read from [`pascal_row`]. `None` if input fields are present.
pub fn matrix_o2(sys: &HypergraphSystem, levels: usize) -> Option<PolyMatrix> {
    if sys.has_input_fields() {
        return None;
    }
    let space = jet_space(sys, levels);
    let n = sys.n();
    let nv = space.nvars();
    let one = Polynomial::one(nv);
    let mut factors = FactorSet::new(n, vec![(one.clone(), sys.dynamics().to_vec())]);
    let q = sys.num_outputs();
    // base[i][p]: the p-th derivative of the weight row (C + D u).
    let base: Vec<Vec<KronRow>> = (0..q)
        .map(|i| {
            (0..levels)
                .map(|p| {
                    let mut row = if p == 0 { tensors_row(&sys.outputs()[i], n, &one) } else { BTreeMap::new() };
                    for d in sys.direct().iter().filter(|d| d.output == i) {
                        let u = Polynomial::var(nv, space.u(d.input, p));
                        add_rows(&mut row, &tensors_row(&d.tensors, n, &u), &Rational::one());
                    }
                    row
                })
                .collect()
        })
        .collect();
    // powers[i][p][k] = base[i][p] · Ā^k
    let mut rows = Vec::new();
    let mut powers: Vec<Vec<Vec<KronRow>>> = base.iter().map(|b| b.iter().map(|r| vec![r.clone()]).collect()).collect();
    for r in 0..levels {
        let coeffs = pascal_row(r + 1);
        for output_powers in powers.iter_mut() {
            let mut total: KronRow = BTreeMap::new();
            for p in 0..=r {
                while output_powers[p].len() <= r - p {
                    let last = output_powers[p].last().unwrap().clone();
                    output_powers[p].push(factors.apply(&last, nv));
                }
                add_rows(&mut total, &output_powers[p][r - p], &Rational::from_integer(coeffs[p].clone()));
            }
            rows.push(gradient_row(&row_polynomial(&total, n, nv), n));
        }
    }
    Some(PolyMatrix { space, rows })
}

/// Oracle: state gradients of `L^r h_i` under the extended Lie operator, with
/// `h_i = p_{i,0} + Σ_l p_{i,l} u_l` and `f = g_0 + Σ_j g_j u_j`.
pub fn direct_jacobian(sys: &HypergraphSystem, levels: usize) -> PolyMatrix {
    let space = jet_space(sys, levels);
    let n = sys.n();
    let nv = space.nvars();
    let mut f = sys.drift_in(nv);
    if space.inputs > 0 {
        for (j, g) in sys.input_fields_in(nv).into_iter().enumerate() {
            let u = Polynomial::var(nv, space.u(j, 0));
            for (fi, gi) in f.iter_mut().zip(g) {
                *fi = &*fi + &(&gi * &u);
            }
        }
    }
    let mut current: Vec<Polynomial> = sys
        .output_polys_in(nv)
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let mut h = h;
            for l in 0..space.inputs {
                let p = sys.direct_poly_in(i, l, nv);
                if !p.is_zero() {
                    h = &h + &(&p * &Polynomial::var(nv, space.u(l, 0)));
                }
            }
            h
        })
        .collect();
    let mut rows = Vec::new();
    for r in 0..levels {
        if r > 0 {
            current = current.iter().map(|h| space.extended_lie(h, &f)).collect();
        }
        for h in &current {
            rows.push(gradient_row(h, n));
        }
    }
    PolyMatrix { space, rows }
}

/// The factored matrix for the system's shape (or the oracle in the mixed
/// case).
pub fn observability_matrix(sys: &HypergraphSystem, levels: usize) -> (MatrixKind, PolyMatrix) {
    let kind = MatrixKind::for_system(sys);
    let m = match kind {
        MatrixKind::O => matrix_o(sys, levels),
        MatrixKind::O1 => matrix_o1(sys, levels),
        MatrixKind::O2 => matrix_o2(sys, levels),
        MatrixKind::DirectJacobian => None,
    };
    (kind, m.unwrap_or_else(|| direct_jacobian(sys, levels)))
}

/// Outcome of a rank evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    pub points: Vec<Vec<Rational>>,
    pub seed: Option<u64>,
    /// The observed rank equals `min(rows, cols)`, so it is the generic rank.
    pub certified: bool,
    /// Rank equals the state dimension.
    pub full: bool,
}

/// Exact rank at one point (values for every variable of the jet space).
pub fn rank_at_point(m: &PolyMatrix, point: &[Rational]) -> RankReport {
    let rank = if m.rows.is_empty() { 0 } else { m.eval(point).rank() };
    let bound = m.num_rows().min(m.num_cols());
    RankReport { rank, points: vec![point.to_vec()], seed: None, certified: rank == bound, full: rank == m.num_cols() }
}

/// Seeded random rational point: numerators in `{−10..10} \ {0}`,
/// denominators in `1..=7`.
pub fn random_point(rng: &mut ChaCha8Rng, nvars: usize) -> Vec<Rational> {
    (0..nvars)
        .map(|_| {
            let mut num = 0i64;
            while num == 0 {
                num = rng.gen_range(-10i64..=10);
            }
            Rational::new(num.into(), rng.gen_range(1i64..=7).into())
        })
        .collect()
}

/// Maximum rank over `points.max(3)` seeded random points: a lower bound on
/// the generic rank, exact when it reaches `min(rows, cols)`.
pub fn generic_rank(m: &PolyMatrix, seed: u64, points: usize) -> RankReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    let mut pts = Vec::new();
    for _ in 0..points.max(3) {
        let p = random_point(&mut rng, m.space.nvars());
        let r = if m.rows.is_empty() { 0 } else { m.eval(&p).rank() };
        best = best.max(r);
        pts.push(p);
    }
    let bound = m.num_rows().min(m.num_cols());
    RankReport { rank: best, points: pts, seed: Some(seed), certified: best == bound, full: best == m.num_cols() }
}

fn det(m: &[Vec<Polynomial>]) -> Polynomial {
    let k = m.len();
    let nv = m[0][0].nvars();
    match k {
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Polynomial::zero(nv);
            for c in 0..k {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Polynomial>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = &m[0][c] * &det(&minor);
                acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Nonzero maximal (`n × n`) minors, for `n ≤ 3` and at most `max_minors`
/// row subsets.
pub fn maximal_minors(m: &PolyMatrix, max_minors: usize) -> Option<Vec<Polynomial>> {
    let n = m.num_cols();
    if n == 0 || n > 3 || m.num_rows() < n {
        return None;
    }
    let combos = combinations(m.num_rows(), n);
    if combos.len() > max_minors {
        return None;
    }
    Some(
        combos
            .into_iter()
            .map(|rows| det(&rows.iter().map(|&r| m.rows[r].clone()).collect::<Vec<_>>()))
            .filter(|p| !p.is_zero())
            .collect(),
    )
}

/// Settings for [`analyze_local`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalConfig {
    pub seed: u64,
    pub points: usize,
    /// Lie levels beyond `n` (more rows can only raise the rank).
    pub extra_levels: usize,
    /// Optional evaluation point for the states (inputs then default to 1).
    pub at: Option<Vec<Rational>>,
    /// Verify the factored matrix against the direct Jacobian.
    pub check_oracle: bool,
}

impl Default for LocalConfig {
    fn default() -> Self {
        LocalConfig { seed: 0, points: 3, extra_levels: 0, at: None, check_oracle: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalAnalysis {
    pub kind: MatrixKind,
    pub matrix: PolyMatrix,
    pub generic: RankReport,
    pub at_point: Option<RankReport>,
    /// Common monomial factor of the nonzero maximal minors (rendered).
    pub vanishing_factor: Option<String>,
    /// `Some(true)` when the factored matrix equals the direct Jacobian.
    pub oracle_agrees: Option<bool>,
    pub notes: Vec<String>,
}

pub fn analyze_local(sys: &HypergraphSystem, cfg: &LocalConfig) -> LocalAnalysis {
    let levels = default_levels(sys) + cfg.extra_levels;
    let (kind, matrix) = observability_matrix(sys, levels);
    let mut notes = Vec::new();
    if kind == MatrixKind::DirectJacobian {
        notes.push("input fields and direct terms together: using the direct Jacobian".to_string());
    }
    let oracle_agrees = (cfg.check_oracle && kind != MatrixKind::DirectJacobian)
        .then(|| direct_jacobian(sys, levels) == matrix);
    let generic = generic_rank(&matrix, cfg.seed, cfg.points);
    let at_point = cfg.at.as_ref().map(|x| {
        let mut p = x.clone();
        p.resize(matrix.space.nvars(), Rational::one());
        rank_at_point(&matrix, &p)
    });
    let space = matrix.space.var_space(sys.labels());
    let vanishing_factor = maximal_minors(&matrix, 256).and_then(|minors| {
        if minors.is_empty() {
            return None;
        }
        let f = common_monomial_factor(&minors)?;
        (!f.is_one()).then(|| Polynomial::monomial(f, Rational::one()).render(&space))
    });
    LocalAnalysis { kind, matrix, generic, at_point, vanishing_factor, oracle_agrees, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use crate::tensor::kron_power;

    fn t(order: usize, n: usize, e: &[(&[usize], i64)]) -> SparseTensor {
        SparseTensor::from_entries(order, n, e.iter().map(|(i, w)| (i.to_vec(), rat(*w)))).unwrap()
    }

    #[test]
    fn pascal_rows() {
        assert_eq!(pascal_row(3), vec![BigInt::from(1), BigInt::from(2), BigInt::from(1)]);
        assert_eq!(pascal_row(1), vec![BigInt::from(1)]);
        assert!(pascal_row(0).is_empty());
    }

    #[test]
    fn linear_factor_is_unfolding() {
        let a = t(2, 2, &[(&[0, 1], 3), (&[1, 0], -2)]);
        let f = bar_a_factor(std::slice::from_ref(&a), 2, 1);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].1, a.unfold());
        assert!(bar_a_factor(&[], 2, 1).is_empty());
    }

    #[test]
    fn factor_differentiates_kron_power() {
        // d/dt x^[2] = Ā_{2,3} x^[3] for f = A_3 x^2.
        let n = 2;
        let a = t(3, n, &[(&[0, 1, 0], 1), (&[1, 1, 1], -2), (&[0, 0, 1], 5)]);
        let x = vec![rat(2), rat(-3)];
        let f = a.contract_vector_power(&x).unwrap();
        let (_, m) = &bar_a_factor(&[a], n, 2)[0];
        let rhs = m.mul_vec(&kron_power(&x, 3));
        // Product rule on x ⊗ x.
        let lhs: Vec<Rational> =
            (0..4).map(|k| &f[k / 2] * &x[k % 2] + &x[k / 2] * &f[k % 2]).collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn linear_pair_gives_classical_matrix() {
        let mut s = HypergraphSystem::new(2).unwrap();
        s.add_dynamics(t(2, 2, &[(&[1, 0], 1), (&[0, 1], -1)])).unwrap();
        s.add_output(vec![t(1, 2, &[(&[0], 1)])]).unwrap();
        let o = matrix_o(&s, 2).unwrap();
        // f = (x2, -x1): C = (1, 0), CA = (0, 1).
        assert_eq!(o.eval(&[rat(0), rat(0)]), QMatrix::from_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]]));
        assert_eq!(direct_jacobian(&s, 2), o);
    }

    #[test]
    fn bilinear_scalar_o1() {
        // x' = x u, y = x: rows d/dx of x, x u, x u^2 + x u'.
        let mut s = HypergraphSystem::new(1).unwrap();
        s.add_input(vec![t(2, 1, &[(&[0, 0], 1)])]).unwrap();
        s.add_output(vec![t(1, 1, &[(&[0], 1)])]).unwrap();
        let o1 = matrix_o1(&s, 3).unwrap();
        let sp = &o1.space;
        let nv = sp.nvars();
        let u = Polynomial::var(nv, sp.u(0, 0));
        let du = Polynomial::var(nv, sp.u(0, 1));
        assert_eq!(o1.rows[0][0], Polynomial::one(nv));
        assert_eq!(o1.rows[1][0], u);
        assert_eq!(o1.rows[2][0], &(&u * &u) + &du);
        assert_eq!(direct_jacobian(&s, 3), o1);
    }

    #[test]
    fn o2_scalar_square() {
        // x' = x^2, y = x + x u.
        let mut s = HypergraphSystem::new(1).unwrap();
        s.add_dynamics(t(3, 1, &[(&[0, 0, 0], 1)])).unwrap();
        s.add_output(vec![t(1, 1, &[(&[0], 1)])]).unwrap();
        s.add_direct(0, 0, vec![t(1, 1, &[(&[0], 1)])]).unwrap();
        assert_eq!(MatrixKind::for_system(&s), MatrixKind::O2);
        let o2 = matrix_o2(&s, 4).unwrap();
        assert_eq!(direct_jacobian(&s, 4), o2);
    }

    #[test]
    fn zero_matrix_rank() {
        let s = {
            let mut s = HypergraphSystem::new(2).unwrap();
            s.add_output(vec![SparseTensor::new(1, 2).unwrap()]).unwrap();
            s
        };
        let o = matrix_o(&s, 2).unwrap();
        assert_eq!(generic_rank(&o, 1, 3).rank, 0);
    }
}
