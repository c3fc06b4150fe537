//! Exact multivariate polynomials over the rationals.
//!
//! A [`Polynomial`] lives in a fixed number of variables. Names are not stored
//! on the polynomial itself; a [`VarSpace`] supplies them for rendering and for
//! substitution by name. The layouts used throughout the crate are
//! `x1..xn` for states and `xi1..xin, eta1..etan[, t]` for the paired
//! indistinguishability ring with an optional auxiliary variable.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;
use thiserror::Error;

/// Exact rational scalar used everywhere in the algebra path.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable count mismatch: expected {expected}, got {got}")]
    VarCount { expected: usize, got: usize },
}

/// Exponent vector of fixed length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(SmallVec<[u16; 12]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self | other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(self.0.iter()).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Square root when every exponent is even.
    pub fn sqrt(&self) -> Option<Monomial> {
        if self.0.iter().all(|e| e % 2 == 0) {
            Some(Monomial(self.0.iter().map(|e| e / 2).collect()))
        } else {
            None
        }
    }
}

/// Term order on monomials of a common length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[derive(Default)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic, `x1 > x2 > ...`.
    #[default]
    GrevLex,
    /// Pure lexicographic, `x1 > x2 > ...`.
    Lex,
    /// The first `block` variables are eliminated: compare them by grevlex
    /// first, then the remaining variables by grevlex.
    Elimination(usize),
}


fn grevlex_cmp(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o.reverse(),
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match *self {
            MonomialOrder::Lex => a.0.cmp(&b.0),
            MonomialOrder::GrevLex => grevlex_cmp(&a.0, &b.0),
            MonomialOrder::Elimination(block) => {
                let k = block.min(a.0.len());
                match grevlex_cmp(&a.0[..k], &b.0[..k]) {
                    Ordering::Equal => grevlex_cmp(&a.0[k..], &b.0[k..]),
                    o => o,
                }
            }
        }
    }
}

/// Ordered list of variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSpace {
    names: Vec<String>,
}

impl VarSpace {
    pub fn new(names: Vec<String>) -> Self {
        VarSpace { names }
    }

    /// `x1..xn`.
    pub fn states(n: usize) -> Self {
        VarSpace::new((1..=n).map(|i| format!("x{i}")).collect())
    }

    /// `xi1..xin, eta1..etan`.
    pub fn paired(n: usize) -> Self {
        let mut names: Vec<String> = (1..=n).map(|i| format!("xi{i}")).collect();
        names.extend((1..=n).map(|i| format!("eta{i}")));
        VarSpace::new(names)
    }

    /// `xi1..xin`, the ring after the second copy has been substituted away.
    pub fn xi(n: usize) -> Self {
        VarSpace::new((1..=n).map(|i| format!("xi{i}")).collect())
    }

    /// Appends the auxiliary variable `t` used for radical membership.
    pub fn with_aux(&self) -> Self {
        let mut names = self.names.clone();
        names.push("t".to_string());
        VarSpace::new(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Sparse polynomial with exact rational coefficients; zero coefficients are
/// never stored.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), Rational::one());
        p
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.nvars))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Indices of variables that occur with positive exponent.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[var] -= 1;
            out.add_term(dm, c * rat(e as i64));
        }
        out
    }

    pub fn gradient(&self, vars: usize) -> Vec<Polynomial> {
        (0..vars).map(|i| self.derivative(i)).collect()
    }

    /// Exact evaluation; `point` must cover every variable.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "evaluation point has wrong length");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    t *= x.powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Replaces the variables with `Some(value)`; others are kept. The
    /// variable count is unchanged.
    pub fn substitute(&self, assignment: &[Option<Rational>]) -> Polynomial {
        assert_eq!(assignment.len(), self.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = m.clone();
            for (i, a) in assignment.iter().enumerate() {
                if let Some(v) = a {
                    let e = rest.0[i];
                    if e > 0 {
                        coef *= num_traits::pow(v.clone(), e as usize);
                        rest.0[i] = 0;
                    }
                }
            }
            out.add_term(rest, coef);
        }
        out
    }

    /// Substitution by variable name.
    pub fn substitute_named(
        &self,
        space: &VarSpace,
        assignment: &[(&str, Rational)],
    ) -> Result<Polynomial, PolyError> {
        if space.len() != self.nvars {
            return Err(PolyError::VarCount { expected: self.nvars, got: space.len() });
        }
        let mut full = vec![None; self.nvars];
        for (name, v) in assignment {
            let i = space
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable((*name).to_string()))?;
            full[i] = Some(v.clone());
        }
        Ok(self.substitute(&full))
    }

    /// Moves variable `i` to position `map[i]` in a ring with `new_nvars`
    /// variables.
    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> Polynomial {
        assert_eq!(map.len(), self.nvars);
        let mut out = Polynomial::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one(new_nvars);
            for (i, &e) in m.exponents().iter().enumerate() {
                nm.0[map[i]] += e;
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Embeds into a larger ring keeping variable positions.
    pub fn extend_vars(&self, new_nvars: usize) -> Polynomial {
        let map: Vec<usize> = (0..self.nvars).collect();
        self.remap(new_nvars, &map)
    }

    /// Drops trailing variables, which must not occur.
    pub fn truncate_vars(&self, new_nvars: usize) -> Polynomial {
        let mut out = Polynomial::zero(new_nvars);
        for (m, c) in &self.terms {
            debug_assert!(m.0[new_nvars..].iter().all(|&e| e == 0));
            out.add_term(Monomial::from_exponents(&m.0[..new_nvars]), c.clone());
        }
        out
    }

    /// Leading term under `order`.
    pub fn leading(&self, order: MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    /// Terms sorted in descending `order`.
    pub fn sorted_terms(&self, order: MonomialOrder) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| order.cmp(b.0, a.0));
        v
    }

    /// Scales to integer coefficients with unit content and a positive
    /// leading coefficient under `order`.
    pub fn primitive(&self, order: MonomialOrder) -> Polynomial {
        let Some((_, lc)) = self.leading(order) else {
            return self.clone();
        };
        let mut den_lcm = BigInt::one();
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            den_lcm = den_lcm.lcm(c.denom());
            num_gcd = num_gcd.gcd(c.numer());
        }
        let mut factor = Rational::new(den_lcm, num_gcd);
        if lc.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self, order: MonomialOrder) -> Polynomial {
        match self.leading(order) {
            None => self.clone(),
            Some((_, lc)) => self.scale(&lc.recip()),
        }
    }

    /// Renders with terms in descending `order`, e.g. `-3/2*xi1^2*eta2 + 1`.
    pub fn render_with(&self, space: &VarSpace, order: MonomialOrder) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.sorted_terms(order).into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (i, &e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(space.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", space.name(i), e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    pub fn render(&self, space: &VarSpace) -> String {
        self.render_with(space, MonomialOrder::GrevLex)
    }

    fn check_same_ring(&self, other: &Polynomial) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different rings");
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = VarSpace::new((1..=self.nvars).map(|i| format!("v{i}")).collect());
        f.write_str(&self.render(&names))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_ring(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_ring(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_ring(rhs);
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// `L_f v = sum_i (dv/dx_i) f_i`. Variables with index `>= f.len()` are
/// treated as constants.
pub fn lie_derivative(v: &Polynomial, f: &[Polynomial]) -> Polynomial {
    let mut out = Polynomial::zero(v.nvars());
    for (i, fi) in f.iter().enumerate() {
        if fi.is_zero() {
            continue;
        }
        let d = v.derivative(i);
        if d.is_zero() {
            continue;
        }
        out = out + &d * fi;
    }
    out
}

/// Copies of `p` (in `n` state variables) into the paired ring
/// `xi1..xin, eta1..etan` plus `extra` trailing variables.
pub fn rename_to_pair(p: &Polynomial, extra: usize) -> (Polynomial, Polynomial) {
    let n = p.nvars();
    let total = 2 * n + extra;
    let xi_map: Vec<usize> = (0..n).collect();
    let eta_map: Vec<usize> = (n..2 * n).collect();
    (p.remap(total, &xi_map), p.remap(total, &eta_map))
}

/// `p(xi) - p(eta)` in the paired ring.
pub fn pair_difference(p: &Polynomial) -> Polynomial {
    let (a, b) = rename_to_pair(p, 0);
    a - b
}

/// Greatest common monomial divisor of all terms of all polynomials.
pub fn common_monomial_factor(polys: &[Polynomial]) -> Option<Monomial> {
    let mut acc: Option<Monomial> = None;
    for p in polys {
        for m in p.terms.keys() {
            acc = Some(match acc {
                None => m.clone(),
                Some(a) => a.gcd(m),
            });
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn arithmetic_basics() {
        let a = &x(2, 0) + &x(2, 1);
        let sq = &a * &a;
        assert_eq!(sq.num_terms(), 3);
        assert_eq!(sq.total_degree(), Some(2));
        let diff = &sq - &sq;
        assert!(diff.is_zero());
    }

    #[test]
    fn lie_derivative_of_constant_is_zero() {
        let v = Polynomial::constant(3, rat(5));
        let f = vec![x(3, 1), x(3, 2), x(3, 0)];
        assert!(lie_derivative(&v, &f).is_zero());
    }

    #[test]
    fn lie_derivative_population_output() {
        // x2' = x2 - x2*x3
        let n = 3;
        let f = vec![
            &x(n, 0) - &(&x(n, 0) * &x(n, 1)).scale(&rat(4)),
            &x(n, 1) - &(&x(n, 1) * &x(n, 2)),
            &(&x(n, 2) - &(&x(n, 1) * &x(n, 2))) - &(&(&x(n, 0) * &x(n, 1)) * &x(n, 2)),
        ];
        let l = lie_derivative(&x(n, 1), &f);
        assert_eq!(l, &x(n, 1) - &(&x(n, 1) * &x(n, 2)));
    }

    #[test]
    fn substitution_by_name() {
        let space = VarSpace::paired(3);
        let p = &Polynomial::var(6, 1) - &Polynomial::var(6, 4);
        let q = p
            .substitute_named(&space, &[("eta1", rat(1)), ("eta2", rat(1)), ("eta3", rat(1))])
            .unwrap();
        assert_eq!(q, &Polynomial::var(6, 1) - &Polynomial::one(6));
        assert!(q.substitute_named(&space, &[]).unwrap() == q);
        assert_eq!(
            p.substitute_named(&space, &[("zeta", rat(1))]),
            Err(PolyError::UnknownVariable("zeta".into()))
        );
    }

    #[test]
    fn diagonal_vanishing() {
        // xi1*xi2*(xi3+1) - eta1*eta2*(eta3+1) vanishes on xi = eta
        let n = 3;
        let p = &(&x(n, 0) * &x(n, 1)) * &(&x(n, 2) + &Polynomial::one(n));
        let d = pair_difference(&p);
        let pt = vec![ratio(3, 2), rat(-2), rat(7)];
        let mut full = pt.clone();
        full.extend(pt);
        assert!(d.eval(&full).is_zero());
    }

    #[test]
    fn rendering_is_canonical() {
        let space = VarSpace::states(2);
        let p = &(&x(2, 0) * &x(2, 0)).scale(&ratio(-3, 2)) + &Polynomial::one(2);
        assert_eq!(p.render(&space), "-3/2*x1^2 + 1");
    }

    #[test]
    fn grevlex_orders_by_degree_then_reverse() {
        let o = MonomialOrder::GrevLex;
        let a = Monomial::from_exponents(&[1, 0, 1]);
        let b = Monomial::from_exponents(&[0, 2, 0]);
        // x1*x3 < x2^2 in grevlex
        assert_eq!(o.cmp(&a, &b), Ordering::Less);
        assert_eq!(MonomialOrder::Lex.cmp(&a, &b), Ordering::Greater);
    }
}
