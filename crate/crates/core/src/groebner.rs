//! Buchberger's algorithm over the rationals, with the ideal-level tests the
//! observability analyses consume: membership, equality, and radical
//! membership via the Rabinowitsch trick.
//!
//! Internally polynomials are kept as integer-coefficient term vectors sorted
//! by a precomputed order key; every reduction step is fraction-free and the
//! content is removed afterwards to keep coefficients small.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use thiserror::Error;

use crate::poly::{Monomial, MonomialOrder, Polynomial, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroebnerError {
    #[error("Gröbner budget exceeded: {what} reached the cap of {cap}")]
    BudgetExceeded { what: &'static str, cap: usize },
    #[error("polynomials live in different rings ({0} vs {1} variables)")]
    RingMismatch(usize, usize),
}

/// Safety valve for basis computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of S-pair reductions.
    pub max_pairs: usize,
    /// Maximum number of (unreduced) basis elements.
    pub max_basis: usize,
    /// Maximum number of term operations spent reducing S-polynomials.
    pub max_term_ops: usize,
    /// Maximum bit length of any integer coefficient met while reducing.
    pub max_coefficient_bits: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_pairs: 50_000, max_basis: 5_000, max_term_ops: 50_000_000, max_coefficient_bits: 8_192 }
    }
}

/// Remaining reduction work during one basis computation.
struct Work {
    ops: usize,
    max_ops: usize,
    max_bits: u64,
}

impl Work {
    fn new(budget: &Budget) -> Self {
        Work { ops: 0, max_ops: budget.max_term_ops, max_bits: budget.max_coefficient_bits }
    }

    fn unlimited() -> Self {
        Work { ops: 0, max_ops: usize::MAX, max_bits: u64::MAX }
    }

    /// Records one reduction step producing `p`, failing once either cap is
    /// passed.
    fn step(&mut self, p: &IPoly) -> Result<(), GroebnerError> {
        self.ops = self.ops.saturating_add(p.terms.len().max(1));
        if self.ops > self.max_ops {
            return Err(GroebnerError::BudgetExceeded { what: "term operations", cap: self.max_ops });
        }
        if self.max_bits != u64::MAX {
            if let Some(t) = p.terms.first() {
                if t.coef.bits() > self.max_bits {
                    return Err(GroebnerError::BudgetExceeded {
                        what: "coefficient bits",
                        cap: self.max_bits as usize,
                    });
                }
            }
        }
        Ok(())
    }
}

type Key = SmallVec<[i32; 16]>;

/// Sort key whose lexicographic comparison agrees with `order`.
fn order_key(m: &Monomial, order: MonomialOrder) -> Key {
    fn grevlex(out: &mut Key, e: &[u16]) {
        out.push(e.iter().map(|&x| x as i32).sum());
        out.extend(e.iter().rev().map(|&x| -(x as i32)));
    }
    let e = m.exponents();
    let mut k = Key::new();
    match order {
        MonomialOrder::Lex => k.extend(e.iter().map(|&x| x as i32)),
        MonomialOrder::GrevLex => grevlex(&mut k, e),
        MonomialOrder::Elimination(block) => {
            let b = block.min(e.len());
            grevlex(&mut k, &e[..b]);
            grevlex(&mut k, &e[b..]);
        }
    }
    k
}

#[derive(Clone, Debug)]
struct Term {
    key: Key,
    mono: Monomial,
    coef: BigInt,
}

/// Integer polynomial with terms in strictly descending order.
#[derive(Clone, Debug)]
struct IPoly {
    terms: Vec<Term>,
}

impl IPoly {
    fn from_poly(p: &Polynomial, order: MonomialOrder) -> IPoly {
        let prim = p.primitive(order);
        let mut terms: Vec<Term> = prim
            .terms()
            .map(|(m, c)| Term { key: order_key(m, order), mono: m.clone(), coef: c.numer().clone() })
            .collect();
        terms.sort_by(|a, b| b.key.cmp(&a.key));
        IPoly { terms }
    }

    fn to_poly(&self, nvars: usize) -> Polynomial {
        Polynomial::from_terms(
            nvars,
            self.terms.iter().map(|t| (t.mono.clone(), Rational::from_integer(t.coef.clone()))),
        )
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lead(&self) -> &Term {
        &self.terms[0]
    }

    /// Divides by the content and makes the leading coefficient positive.
    fn normalize(&mut self) {
        if self.terms.is_empty() {
            return;
        }
        let mut g = BigInt::zero();
        for t in &self.terms {
            g = g.gcd(&t.coef);
            if g.is_one() {
                break;
            }
        }
        if self.terms[0].coef.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for t in &mut self.terms {
                t.coef = &t.coef / &g;
            }
        }
    }

    /// `a * self - b * mono * g`, assuming the leading terms cancel.
    fn combine(&self, a: &BigInt, b: &BigInt, mono: &Monomial, g: &IPoly, order: MonomialOrder) -> IPoly {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let shifted: Vec<Term> = g
            .terms
            .iter()
            .map(|t| {
                let m = t.mono.mul(mono);
                Term { key: order_key(&m, order), mono: m, coef: -(b * &t.coef) }
            })
            .collect();
        let (mut i, mut j) = (0, 0);
        let lhs = &self.terms;
        while i < lhs.len() || j < shifted.len() {
            let ord = if i == lhs.len() {
                std::cmp::Ordering::Less
            } else if j == shifted.len() {
                std::cmp::Ordering::Greater
            } else {
                lhs[i].key.cmp(&shifted[j].key)
            };
            match ord {
                std::cmp::Ordering::Greater => {
                    out.push(Term { key: lhs[i].key.clone(), mono: lhs[i].mono.clone(), coef: a * &lhs[i].coef });
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(shifted[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a * &lhs[i].coef + &shifted[j].coef;
                    if !c.is_zero() {
                        out.push(Term { key: lhs[i].key.clone(), mono: lhs[i].mono.clone(), coef: c });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        IPoly { terms: out }
    }
}

/// Full reduction of `f` by `basis`; the result is primitive.
fn reduce_internal(f: &IPoly, basis: &[IPoly], order: MonomialOrder) -> IPoly {
    reduce_bounded(f, basis, order, &mut Work::unlimited()).expect("unlimited work cannot run out")
}

fn reduce_bounded(f: &IPoly, basis: &[IPoly], order: MonomialOrder, work: &mut Work) -> Result<IPoly, GroebnerError> {
    let mut p = f.clone();
    let mut rem: Vec<Term> = Vec::new();
    let mut steps = 0usize;
    while !p.is_zero() {
        let lt = p.lead().clone();
        let divisor = basis.iter().find(|g| !g.is_zero() && g.lead().mono.divides(&lt.mono));
        match divisor {
            Some(g) => {
                let gl = g.lead();
                let gcd = lt.coef.gcd(&gl.coef);
                let a = &gl.coef / &gcd;
                let b = &lt.coef / &gcd;
                let q = gl.mono.quotient_of(&lt.mono);
                p = p.combine(&a, &b, &q, g, order);
                work.step(&p)?;
                if !a.is_one() {
                    for t in &mut rem {
                        t.coef = &t.coef * &a;
                    }
                }
                // Keep coefficients bounded on long reductions: the common
                // content of the remainder and the working polynomial can be
                // divided out without changing the result up to a unit.
                steps += 1;
                if steps.is_multiple_of(8) {
                    remove_joint_content(&mut p, &mut rem);
                }
            }
            None => {
                rem.push(lt);
                p.terms.remove(0);
            }
        }
    }
    let mut r = IPoly { terms: rem };
    r.normalize();
    Ok(r)
}

/// Divides `p` and `rem` by the gcd of all their coefficients.
fn remove_joint_content(p: &mut IPoly, rem: &mut [Term]) {
    let mut g = BigInt::zero();
    for t in rem.iter().chain(p.terms.iter()) {
        g = g.gcd(&t.coef);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() {
        return;
    }
    for t in rem.iter_mut().chain(p.terms.iter_mut()) {
        t.coef = &t.coef / &g;
    }
}

fn s_poly_internal(f: &IPoly, g: &IPoly, order: MonomialOrder) -> IPoly {
    let (fl, gl) = (f.lead(), g.lead());
    let l = fl.mono.lcm(&gl.mono);
    let mf = fl.mono.quotient_of(&l);
    let mg = gl.mono.quotient_of(&l);
    let gcd = fl.coef.gcd(&gl.coef);
    let a = &gl.coef / &gcd;
    let b = &fl.coef / &gcd;
    // a*mf*f - b*mg*g
    let shifted_f = IPoly {
        terms: f
            .terms
            .iter()
            .map(|t| {
                let m = t.mono.mul(&mf);
                Term { key: order_key(&m, order), mono: m, coef: t.coef.clone() }
            })
            .collect(),
    };
    shifted_f.combine(&a, &b, &mg, g, order)
}

fn check_ring(polys: &[Polynomial]) -> Result<usize, GroebnerError> {
    let n = polys.first().map_or(0, |p| p.nvars());
    for p in polys {
        if p.nvars() != n {
            return Err(GroebnerError::RingMismatch(n, p.nvars()));
        }
    }
    Ok(n)
}

/// Remainder of `f` on division by `g` (full reduction, normalized to be
/// primitive with positive leading coefficient; zero iff the exact remainder
/// is zero).
pub fn reduce(f: &Polynomial, g: &[Polynomial], order: MonomialOrder) -> Polynomial {
    let basis: Vec<IPoly> = g.iter().map(|p| IPoly::from_poly(p, order)).collect();
    reduce_internal(&IPoly::from_poly(f, order), &basis, order).to_poly(f.nvars())
}

/// Exact remainder of `f` on division by `g`, with the true scale: the
/// returned `r` satisfies `f - r ∈ ⟨g⟩`.
pub fn reduce_exact(f: &Polynomial, g: &[Polynomial], order: MonomialOrder) -> Polynomial {
    let divisors: Vec<Polynomial> = g.iter().filter(|p| !p.is_zero()).map(|p| p.monic(order)).collect();
    let mut p = f.clone();
    let mut rem = Polynomial::zero(f.nvars());
    while let Some((m, c)) = p.leading(order).map(|(m, c)| (m.clone(), c.clone())) {
        match divisors.iter().find(|d| d.leading(order).unwrap().0.divides(&m)) {
            Some(d) => {
                let q = d.leading(order).unwrap().0.quotient_of(&m);
                p = &p - &d.mul_monomial(&q, &c);
            }
            None => {
                rem.add_term(m.clone(), c.clone());
                p.add_term(m, -c);
            }
        }
    }
    rem
}

/// The S-polynomial of `f` and `g` (up to a nonzero scalar).
pub fn s_polynomial(f: &Polynomial, g: &Polynomial, order: MonomialOrder) -> Polynomial {
    if f.is_zero() || g.is_zero() {
        return Polynomial::zero(f.nvars());
    }
    s_poly_internal(&IPoly::from_poly(f, order), &IPoly::from_poly(g, order), order).to_poly(f.nvars())
}

/// Buchberger's criterion: every S-polynomial reduces to zero.
pub fn is_groebner_basis(basis: &[Polynomial], order: MonomialOrder) -> bool {
    let ip: Vec<IPoly> = basis.iter().filter(|p| !p.is_zero()).map(|p| IPoly::from_poly(p, order)).collect();
    for i in 0..ip.len() {
        for j in i + 1..ip.len() {
            let s = s_poly_internal(&ip[i], &ip[j], order);
            if !reduce_internal(&s, &ip, order).is_zero() {
                return false;
            }
        }
    }
    true
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    key: Key,
    seq: usize,
}

/// Reduced Gröbner basis of `⟨gens⟩`: monic, interreduced, and sorted by
/// ascending leading monomial. `⟨0⟩` gives the empty basis and any ideal
/// containing a nonzero constant gives `{1}`.
pub fn buchberger(gens: &[Polynomial], order: MonomialOrder, budget: Budget) -> Result<Vec<Polynomial>, GroebnerError> {
    let nvars = check_ring(gens)?;
    let mut basis: Vec<IPoly> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut pending: HashSet<(usize, usize)> = HashSet::new();
    let mut seq = 0usize;
    let mut processed = 0usize;
    let mut work = Work::new(&budget);

    // Seed with inter-reduced generators so trivial inputs stay cheap.
    let mut seeds: Vec<IPoly> = gens.iter().filter(|p| !p.is_zero()).map(|p| IPoly::from_poly(p, order)).collect();
    seeds.sort_by(|a, b| a.lead().key.cmp(&b.lead().key));
    for s in seeds {
        let r = reduce_internal(&s, &basis, order);
        if r.is_zero() {
            continue;
        }
        if r.lead().mono.is_one() {
            return Ok(vec![Polynomial::one(nvars)]);
        }
        add_to_basis(r, &mut basis, &mut pairs, &mut pending, &mut seq, order);
    }

    while !pairs.is_empty() {
        // Normal strategy: smallest lcm first, FIFO among equals.
        let (best, _) = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.key.cmp(&b.key).then(a.seq.cmp(&b.seq)))
            .unwrap();
        let pair = pairs.swap_remove(best);
        pending.remove(&(pair.i, pair.j));

        // Chain criterion: some k with lm_k | lcm and both (i,k), (j,k)
        // already handled.
        let chain = (0..basis.len()).any(|k| {
            k != pair.i
                && k != pair.j
                && basis[k].lead().mono.divides(&pair.lcm)
                && !pending.contains(&ordered(pair.i, k))
                && !pending.contains(&ordered(pair.j, k))
        });
        if chain {
            continue;
        }

        processed += 1;
        if processed > budget.max_pairs {
            return Err(GroebnerError::BudgetExceeded { what: "S-pair reductions", cap: budget.max_pairs });
        }
        let s = s_poly_internal(&basis[pair.i], &basis[pair.j], order);
        let r = reduce_bounded(&s, &basis, order, &mut work)?;
        if r.is_zero() {
            continue;
        }
        if r.lead().mono.is_one() {
            return Ok(vec![Polynomial::one(nvars)]);
        }
        if basis.len() >= budget.max_basis {
            return Err(GroebnerError::BudgetExceeded { what: "basis size", cap: budget.max_basis });
        }
        add_to_basis(r, &mut basis, &mut pairs, &mut pending, &mut seq, order);
    }

    Ok(reduce_basis(basis, nvars, order))
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn add_to_basis(
    h: IPoly,
    basis: &mut Vec<IPoly>,
    pairs: &mut Vec<Pair>,
    pending: &mut HashSet<(usize, usize)>,
    seq: &mut usize,
    order: MonomialOrder,
) {
    let k = basis.len();
    for (i, g) in basis.iter().enumerate() {
        // First criterion: coprime leading monomials need no S-polynomial.
        if g.lead().mono.is_coprime(&h.lead().mono) {
            continue;
        }
        let lcm = g.lead().mono.lcm(&h.lead().mono);
        let key = order_key(&lcm, order);
        pairs.push(Pair { i, j: k, lcm, key, seq: *seq });
        pending.insert((i, k));
        *seq += 1;
    }
    basis.push(h);
}

fn reduce_basis(basis: Vec<IPoly>, nvars: usize, order: MonomialOrder) -> Vec<Polynomial> {
    // Minimalize: drop elements whose leading monomial is divisible by an
    // earlier-kept or other element's leading monomial.
    let mut keep: Vec<IPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i && h.lead().mono.divides(&g.lead().mono) && (h.lead().mono != g.lead().mono || j < i)
        });
        if !redundant {
            keep.push(g.clone());
        }
    }
    // Interreduce each element against the others.
    let mut out = Vec::with_capacity(keep.len());
    for i in 0..keep.len() {
        let others: Vec<IPoly> = keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
        let lead = IPoly { terms: vec![keep[i].lead().clone()] };
        let tail = IPoly { terms: keep[i].terms[1..].to_vec() };
        // Leading term stays; only the tail is reduced.
        let lt = lead.lead().clone();
        let r = reduce_tail(&lt, &tail, &others, order);
        out.push(r.to_poly(nvars).monic(order));
    }
    sort_canonical(&mut out, order);
    out
}

/// Reduces `lt + tail` where `lt` is irreducible by `others`, leaving `lt`
/// intact (up to integer scaling).
fn reduce_tail(lt: &Term, tail: &IPoly, others: &[IPoly], order: MonomialOrder) -> IPoly {
    let mut whole = IPoly { terms: Vec::with_capacity(tail.terms.len() + 1) };
    whole.terms.push(lt.clone());
    whole.terms.extend(tail.terms.iter().cloned());
    // The leading term is not divisible by any other leading monomial, so full
    // reduction only touches the tail.
    reduce_internal(&whole, others, order)
}

/// Sorts by ascending leading monomial under `order`.
pub fn sort_canonical(polys: &mut [Polynomial], order: MonomialOrder) {
    polys.sort_by(|a, b| match (a.leading(order), b.leading(order)) {
        (Some((ma, _)), Some((mb, _))) => order.cmp(ma, mb),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
}

/// An ideal with its cached reduced Gröbner basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealHandle {
    nvars: usize,
    order: MonomialOrder,
    generators: Vec<Polynomial>,
    basis: Vec<Polynomial>,
}

impl IdealHandle {
    pub fn new(nvars: usize, generators: Vec<Polynomial>, order: MonomialOrder, budget: Budget) -> Result<Self, GroebnerError> {
        for g in &generators {
            if g.nvars() != nvars {
                return Err(GroebnerError::RingMismatch(nvars, g.nvars()));
            }
        }
        let basis = buchberger(&generators, order, budget)?;
        Ok(IdealHandle { nvars, order, generators, basis })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn is_unit(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].is_constant() && !self.basis[0].is_zero()
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains(&self, f: &Polynomial) -> bool {
        ideal_membership(f, self)
    }
}

/// `f ∈ I` iff its remainder against the Gröbner basis vanishes.
pub fn ideal_membership(f: &Polynomial, ideal: &IdealHandle) -> bool {
    if f.is_zero() {
        return true;
    }
    if ideal.is_unit() {
        return true;
    }
    reduce(f, &ideal.basis, ideal.order).is_zero()
}

/// Mutual generator containment.
pub fn ideal_equal(a: &IdealHandle, b: &IdealHandle) -> bool {
    a.generators.iter().all(|g| ideal_membership(g, b)) && b.generators.iter().all(|g| ideal_membership(g, a))
}

/// `f ∈ √I` over the algebraic closure, decided as `1 ∈ I + ⟨1 − t f⟩` with a
/// fresh trailing variable `t`.
pub fn radical_membership(f: &Polynomial, ideal: &IdealHandle, budget: Budget) -> Result<bool, GroebnerError> {
    if ideal_membership(f, ideal) {
        return Ok(true);
    }
    let n = ideal.nvars;
    let ext = n + 1;
    let t = Polynomial::var(ext, n);
    let mut gens: Vec<Polynomial> = ideal.basis.iter().map(|g| g.extend_vars(ext)).collect();
    gens.push(&Polynomial::one(ext) - &(&t * &f.extend_vars(ext)));
    let basis = buchberger(&gens, MonomialOrder::GrevLex, budget)?;
    Ok(basis.len() == 1 && basis[0].is_constant())
}

/// `√I : L = R[ξ]`, which for `L = ⟨ξ_i − σ_i⟩` holds iff every generator of
/// `L` lies in `√I`.
pub fn quotient_is_unit_ideal(ideal: &IdealHandle, l: &IdealHandle, budget: Budget) -> Result<bool, GroebnerError> {
    for g in l.generators() {
        if !radical_membership(g, ideal, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn v(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    fn c(n: usize, k: i64) -> Polynomial {
        Polynomial::constant(n, rat(k))
    }

    fn ideal(n: usize, g: Vec<Polynomial>) -> IdealHandle {
        IdealHandle::new(n, g, MonomialOrder::GrevLex, Budget::default()).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let x = v(1, 0);
        assert!(reduce(&(&x * &x), std::slice::from_ref(&x), MonomialOrder::GrevLex).is_zero());
        let (x, y) = (v(2, 0), v(2, 1));
        let f = &(&(&x * &x) * &y) + &y;
        let g = &(&x * &y) - &c(2, 1);
        let r = reduce_exact(&f, &[g], MonomialOrder::GrevLex);
        assert_eq!(r, &x + &y);
    }

    #[test]
    fn already_a_basis() {
        let (x, y) = (v(2, 0), v(2, 1));
        let b = buchberger(&[&x - &c(2, 1), &y - &c(2, 2)], MonomialOrder::GrevLex, Budget::default()).unwrap();
        assert_eq!(b, vec![&y - &c(2, 2), &x - &c(2, 1)]);
    }

    #[test]
    fn closure_of_small_ideal() {
        let (x, y) = (v(2, 0), v(2, 1));
        let gens = vec![&x * &x, &x * &y, &(&y * &y) - &x];
        let b = buchberger(&gens, MonomialOrder::GrevLex, Budget::default()).unwrap();
        assert!(is_groebner_basis(&b, MonomialOrder::GrevLex));
        let i = ideal(2, gens.clone());
        for g in &gens {
            assert!(i.contains(g));
        }
        // y^3 = y*(y^2 - x) + xy
        assert!(i.contains(&(&(&y * &y) * &y)));
        let lex = buchberger(&gens, MonomialOrder::Lex, Budget::default()).unwrap();
        assert!(is_groebner_basis(&lex, MonomialOrder::Lex));
    }

    #[test]
    fn unit_and_zero_ideals() {
        let x = v(2, 0);
        let b = buchberger(&[x.clone(), &x - &c(2, 1)], MonomialOrder::GrevLex, Budget::default()).unwrap();
        assert_eq!(b, vec![Polynomial::one(2)]);
        assert!(buchberger(&[Polynomial::zero(2)], MonomialOrder::GrevLex, Budget::default()).unwrap().is_empty());
    }

    #[test]
    fn membership_and_equality() {
        let x = v(2, 0);
        let i = ideal(2, vec![x.clone()]);
        assert!(!i.contains(&Polynomial::one(2)));
        assert!(i.contains(&x));
        let j = ideal(2, vec![x.clone(), &x * &x]);
        assert!(ideal_equal(&i, &j));
        assert!(ideal_equal(&i, &i));
    }

    #[test]
    fn radical_examples() {
        let x = v(1, 0);
        let i = ideal(1, vec![&x * &x]);
        assert!(radical_membership(&x, &i, Budget::default()).unwrap());
        let (x, y) = (v(2, 0), v(2, 1));
        let i = ideal(2, vec![&x * &x, &y * &y]);
        assert!(radical_membership(&(&x + &y), &i, Budget::default()).unwrap());
        let (a, b, cc) = (v(3, 0), v(3, 1), v(3, 2));
        let cone = ideal(3, vec![&(&(&a * &a) + &(&b * &b)) + &(&cc * &cc)]);
        assert!(!radical_membership(&a, &cone, Budget::default()).unwrap());
    }

    #[test]
    fn quotient_test_on_binomial_ideal() {
        let n = 3;
        let (a, b, cc) = (v(n, 0), v(n, 1), v(n, 2));
        let l = ideal(n, vec![&a - &c(n, 1), &b - &c(n, 1), &cc - &c(n, 1)]);
        assert!(quotient_is_unit_ideal(&l, &l, Budget::default()).unwrap());
        let j = ideal(n, vec![&cc - &c(n, 1), &(&a * &b) - &c(n, 1)]);
        assert!(!quotient_is_unit_ideal(&j, &l, Budget::default()).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let (x, y) = (v(2, 0), v(2, 1));
        let gens = vec![&(&x * &x) - &y, &(&x * &y) - &c(2, 1)];
        let tiny = Budget { max_pairs: 0, ..Budget::default() };
        assert!(matches!(
            buchberger(&gens, MonomialOrder::GrevLex, tiny),
            Err(GroebnerError::BudgetExceeded { .. })
        ));
    }
}
