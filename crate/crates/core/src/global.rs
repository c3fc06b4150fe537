//! Global observability at an initial state via the Lie-derivative ideal
//! chain.
//!
//! In the paired ring `ξ1..ξn, η1..ηn` level `r` of the chain holds the
//! differences `L_{τ1}..L_{τr} υ(ξ) − L_{τ1}..L_{τr} υ(η)` over all words `τ`
//! of length `r` in the vector fields `{g_0, .., g_m}` and all output
//! components `υ`. The ideals `J_r` generated by levels `0..=r` increase; at
//! the first `N` with `J_N = J_{N+1}` the chain is declared stable and
//! `J = J_N`. Substituting `η := σ` gives `𝒥`, and the system is globally
//! observable at `σ` iff the real variety of `𝒥` is `{σ}`.
//!
//! Only tests that are sound over the reals declare `Observable`; a
//! counterexample declares `Unobservable`; everything else is `Inconclusive`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::groebner::{ideal_equal, quotient_is_unit_ideal, Budget, GroebnerError, IdealHandle};
use crate::linalg::QMatrix;
use crate::poly::{lie_derivative, pair_difference, Monomial, MonomialOrder, Polynomial, Rational, VarSpace};
use crate::simulate::{max_output_gap, simulate_outputs, zero_input, SimError};
use crate::system::HypergraphSystem;
use crate::tensor::{SparseTensor, TensorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlobalError {
    #[error("the system has no outputs")]
    NoOutputs,
    #[error("sigma has {got} components, expected {expected}")]
    SigmaDimension { expected: usize, got: usize },
    #[error("level {level} needs {words} Lie words, above the cap of {cap}")]
    WordBudget { level: usize, words: usize, cap: usize },
    #[error("contraction-path count {paths} at level {level} exceeds the cap of {cap}")]
    PathBudget { level: usize, paths: usize, cap: usize },
    #[error("tensor-path generators need a system with dynamics and outputs only")]
    HasInputs,
    #[error("tensor input must be symmetric")]
    Asymmetric,
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Three-valued outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Observable,
    Unobservable,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Observable => "Observable",
            Status::Unobservable => "Unobservable",
            Status::Inconclusive => "Inconclusive",
        }
    }
}

/// Which test produced the verdict.
pub mod criterion {
    /// `𝒥` and `ℓ` are equal as ideals.
    pub const IDEAL_EQUALITY: &str = "ideal-equality";
    /// After sum-of-squares augmentation every `ξ_i − σ_i` lies in `√𝒥`.
    pub const RADICAL_MEMBERSHIP: &str = "radical-membership";
    /// A point other than `σ` zeroes every generator of `𝒥`.
    pub const COUNTEREXAMPLE: &str = "counterexample";
    pub const NONE: &str = "none";
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub criterion: &'static str,
    /// A state `η* ≠ σ` indistinguishable from `σ`.
    pub witness: Option<Vec<Rational>>,
    /// Largest simulated output deviation between `σ` and the witness.
    pub max_output_gap: Option<f64>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(status: Status, criterion: &'static str) -> Self {
        Verdict { status, criterion, witness: None, max_output_gap: None, notes: Vec::new() }
    }
}

/// Candidate search knobs for [`find_counterexample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub seed: u64,
    /// Maximum number of candidate points evaluated.
    pub max_candidates: usize,
    /// Number of seeded random points appended at the end.
    pub random_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { seed: 0, max_candidates: 100_000, random_points: 64 }
    }
}

/// Settings for the whole global analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobalConfig {
    /// Highest chain level built; `None` means `max(n·q, 6)`.
    pub r_cap: Option<usize>,
    /// Require two consecutive equal steps before declaring stabilization.
    pub two_step: bool,
    pub budget: Budget,
    /// Cap on Lie words per level.
    pub word_cap: usize,
    pub search: SearchConfig,
    /// Simulate `σ` against a found witness to report the output gap.
    pub simulate_witness: bool,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            r_cap: None,
            two_step: false,
            budget: Budget::default(),
            word_cap: 4096,
            search: SearchConfig::default(),
            simulate_witness: true,
        }
    }
}

impl GlobalConfig {
    pub fn effective_r_cap(&self, sys: &HypergraphSystem) -> usize {
        self.r_cap.unwrap_or_else(|| (sys.n() * sys.num_outputs()).max(6)).max(1)
    }
}

/// Level-by-level Lie derivative enumeration.
#[derive(Clone, Debug)]
pub struct LieEnumerator {
    n: usize,
    fields: Vec<Vec<Polynomial>>,
    word_cap: usize,
    /// State-space polynomials of the most recent level, one per word and
    /// output component (zeros kept so word counts stay exact).
    current: Vec<Polynomial>,
    level: usize,
    words: usize,
}

impl LieEnumerator {
    pub fn new(sys: &HypergraphSystem, word_cap: usize) -> Result<Self, GlobalError> {
        if sys.num_outputs() == 0 {
            return Err(GlobalError::NoOutputs);
        }
        let mut fields = sys.vector_fields();
        // Input fields that vanish identically add nothing.
        let drift = fields.remove(0);
        let mut kept = vec![drift];
        kept.extend(fields.into_iter().filter(|g| g.iter().any(|p| !p.is_zero())));
        let current: Vec<Polynomial> = sys.output_families().into_iter().flatten().collect();
        let words = current.len();
        Ok(LieEnumerator { n: sys.n(), fields: kept, word_cap, current, level: 0, words })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Number of words times output components at the current level.
    pub fn word_count(&self) -> usize {
        self.words
    }

    /// State-space polynomials of the current level.
    pub fn state_polys(&self) -> &[Polynomial] {
        &self.current
    }

    /// Distinct nonzero difference generators of the current level.
    pub fn generators(&self) -> Vec<Polynomial> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for p in &self.current {
            if p.is_constant() {
                continue;
            }
            let key = p.primitive(MonomialOrder::GrevLex);
            if seen.insert(key.render(&VarSpace::states(self.n))) {
                out.push(pair_difference(p));
            }
        }
        out
    }

    /// Advances to the next level.
    pub fn advance(&mut self) -> Result<(), GlobalError> {
        let words = self.words * self.fields.len();
        if words > self.word_cap {
            return Err(GlobalError::WordBudget { level: self.level + 1, words, cap: self.word_cap });
        }
        let mut next = Vec::with_capacity(words);
        for g in &self.fields {
            for p in &self.current {
                next.push(lie_derivative(p, g));
            }
        }
        self.current = next;
        self.words = words;
        self.level += 1;
        Ok(())
    }
}

/// Difference generators for levels `0..=r_max`.
pub fn enumerate_lie_generators(
    sys: &HypergraphSystem,
    r_max: usize,
    word_cap: usize,
) -> Result<Vec<Vec<Polynomial>>, GlobalError> {
    let mut e = LieEnumerator::new(sys, word_cap)?;
    let mut out = vec![e.generators()];
    for _ in 0..r_max {
        e.advance()?;
        out.push(e.generators());
    }
    Ok(out)
}

/// `J_0 ⊆ J_1 ⊆ ...` with per-level generators and bases.
#[derive(Clone, Debug)]
pub struct IdealChain {
    n: usize,
    levels: Vec<Vec<Polynomial>>,
    ideals: Vec<IdealHandle>,
    stabilization: Option<usize>,
    notes: Vec<String>,
}

impl IdealChain {
    pub fn n(&self) -> usize {
        self.n
    }

    /// New generators introduced at each level.
    pub fn levels(&self) -> &[Vec<Polynomial>] {
        &self.levels
    }

    /// `J_r` for every computed level.
    pub fn ideals(&self) -> &[IdealHandle] {
        &self.ideals
    }

    /// The stabilization index `N`, if reached.
    pub fn stabilization(&self) -> Option<usize> {
        self.stabilization
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Deepest level that belongs to `J`: `N` when stable, otherwise the last
    /// ideal computed (a subideal of the true `J`).
    pub fn top(&self) -> usize {
        self.stabilization.unwrap_or(self.ideals.len().saturating_sub(1))
    }

    /// `J` (or the deepest computed `J_r` if the chain did not stabilize).
    pub fn ideal(&self) -> &IdealHandle {
        &self.ideals[self.top()]
    }

    /// All generators of [`IdealChain::ideal`].
    pub fn generators(&self) -> Vec<Polynomial> {
        self.levels[..=self.top()].iter().flatten().cloned().collect()
    }

    pub fn space(&self) -> VarSpace {
        VarSpace::paired(self.n)
    }
}

fn paired_ideal(n: usize, gens: Vec<Polynomial>, budget: Budget) -> Result<IdealHandle, GroebnerError> {
    IdealHandle::new(2 * n, gens, MonomialOrder::GrevLex, budget)
}

/// Builds levels until the new level lies in the previous ideal or `r_cap`
/// is reached. Resource exhaustion ends the chain without a stabilization
/// index and records a note.
pub fn build_chain(sys: &HypergraphSystem, cfg: &GlobalConfig) -> Result<IdealChain, GlobalError> {
    let n = sys.n();
    let r_cap = cfg.effective_r_cap(sys);
    let mut lie = LieEnumerator::new(sys, cfg.word_cap)?;
    let level0 = lie.generators();
    let j0 = paired_ideal(n, level0.clone(), cfg.budget)?;
    let mut chain = IdealChain { n, levels: vec![level0], ideals: vec![j0], stabilization: None, notes: Vec::new() };

    let mut r = 0;
    while r < r_cap {
        if let Err(e) = lie.advance() {
            chain.notes.push(format!("chain stopped at level {r}: {e}"));
            return Ok(chain);
        }
        let new = lie.generators();
        let prev = chain.ideals[r].clone();
        let stable_here = new.iter().all(|g| prev.contains(g));
        let mut gens = prev.generators().to_vec();
        gens.extend(new.iter().cloned());
        let next = match paired_ideal(n, gens, cfg.budget) {
            Ok(i) => i,
            Err(e) => {
                chain.notes.push(format!("chain stopped at level {}: {e}", r + 1));
                return Ok(chain);
            }
        };
        chain.levels.push(new);
        chain.ideals.push(next);
        if stable_here {
            if !cfg.two_step {
                chain.stabilization = Some(r);
                return Ok(chain);
            }
            // Conservative mode: the following level must also add nothing.
            let mut probe = lie.clone();
            match probe.advance() {
                Ok(()) => {
                    let extra = probe.generators();
                    if extra.iter().all(|g| prev.contains(g)) {
                        // Record the probed level too: it belongs to the
                        // same ideal and documents the second equality.
                        let mut gens = chain.ideals[r + 1].generators().to_vec();
                        gens.extend(extra.iter().cloned());
                        if let Ok(i) = paired_ideal(n, gens, cfg.budget) {
                            chain.levels.push(extra);
                            chain.ideals.push(i);
                        }
                        chain.stabilization = Some(r);
                        return Ok(chain);
                    }
                    chain.notes.push(format!("level {} equal but level {} grows; continuing", r + 1, r + 2));
                }
                Err(e) => {
                    chain.notes.push(format!("two-step check at level {}: {e}", r + 2));
                    return Ok(chain);
                }
            }
        }
        r += 1;
    }
    chain.notes.push(format!("no stabilization up to r_cap = {r_cap}"));
    Ok(chain)
}

/// `𝒥 = J|_{η=σ}` in the `ξ` ring and `ℓ = ⟨ξ_i − σ_i⟩`.
pub fn substitute_initial(
    chain: &IdealChain,
    sigma: &[Rational],
    budget: Budget,
) -> Result<(IdealHandle, IdealHandle), GlobalError> {
    let n = chain.n;
    if sigma.len() != n {
        return Err(GlobalError::SigmaDimension { expected: n, got: sigma.len() });
    }
    let mut assign: Vec<Option<Rational>> = vec![None; n];
    assign.extend(sigma.iter().cloned().map(Some));
    let gens: Vec<Polynomial> = chain
        .generators()
        .iter()
        .map(|g| g.substitute(&assign).truncate_vars(n))
        .filter(|g| !g.is_zero())
        .collect();
    let j = IdealHandle::new(n, gens, MonomialOrder::GrevLex, budget)?;
    Ok((j, ell(sigma, budget)?))
}

/// `ℓ = ⟨ξ_1 − σ_1, .., ξ_n − σ_n⟩`.
pub fn ell(sigma: &[Rational], budget: Budget) -> Result<IdealHandle, GroebnerError> {
    let n = sigma.len();
    let gens = (0..n).map(|i| &Polynomial::var(n, i) - &Polynomial::constant(n, sigma[i].clone())).collect();
    IdealHandle::new(n, gens, MonomialOrder::GrevLex, budget)
}

/// Sum-of-squares consequences of one polynomial: polynomials that must
/// vanish at every REAL zero of `p`. Empty when no pattern applies.
pub fn sos_consequences(p: &Polynomial) -> Vec<Polynomial> {
    if p.is_zero() {
        return Vec::new();
    }
    let n = p.nvars();
    let sign_ok = |pos: bool| p.terms().all(|(_, c)| c.is_positive() == pos);
    for pos in [true, false] {
        if sign_ok(pos) && p.terms().all(|(m, _)| m.sqrt().is_some()) {
            // Σ c m² with all c of one sign: each m vanishes.
            return p
                .terms()
                .map(|(m, _)| {
                    let r = m.sqrt().unwrap();
                    if r.is_one() {
                        Polynomial::one(n)
                    } else {
                        Polynomial::monomial(r, Rational::one())
                    }
                })
                .collect();
        }
    }
    if p.total_degree().is_some_and(|d| d <= 2) {
        if let Some(forms) = quadratic_sos(p).or_else(|| quadratic_sos(&-p)) {
            return forms;
        }
    }
    Vec::new()
}

/// Writes a quadratic `p = zᵀ G z` over `z = (used vars.., 1)` and runs an
/// exact LDLᵀ; when `G` is positive semidefinite, returns the linear forms
/// `l_k` with `p = Σ d_k l_k²`, `d_k > 0`.
fn quadratic_sos(p: &Polynomial) -> Option<Vec<Polynomial>> {
    let n = p.nvars();
    let vars: Vec<usize> = p.variables().into_iter().collect();
    let s = vars.len() + 1;
    let pos = |v: usize| vars.iter().position(|&w| w == v).unwrap();
    let half = Rational::new(1.into(), 2.into());
    let mut g = vec![vec![Rational::zero(); s]; s];
    for (m, c) in p.terms() {
        let nz: Vec<(usize, u16)> = m.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
        match nz.as_slice() {
            [] => g[s - 1][s - 1] += c,
            [(i, 2)] => g[pos(*i)][pos(*i)] += c,
            [(i, 1)] => {
                let a = pos(*i);
                g[a][s - 1] += c * &half;
                g[s - 1][a] += c * &half;
            }
            [(i, 1), (j, 1)] => {
                let (a, b) = (pos(*i), pos(*j));
                g[a][b] += c * &half;
                g[b][a] += c * &half;
            }
            _ => return None,
        }
    }
    let mut forms = Vec::new();
    for k in 0..s {
        let d = g[k][k].clone();
        if d.is_zero() {
            if (k + 1..s).any(|j| !g[k][j].is_zero()) {
                return None;
            }
            continue;
        }
        if d.is_negative() {
            return None;
        }
        let mut form = Polynomial::zero(n);
        for j in k..s {
            let coef = &g[k][j] / &d;
            let mono = if j == s - 1 { Monomial::one(n) } else { Monomial::var(n, vars[j]) };
            form.add_term(mono, coef);
        }
        forms.push(form);
        for i in k + 1..s {
            for j in k + 1..s {
                let delta = &g[i][k] * &g[k][j] / &d;
                g[i][j] -= delta;
            }
        }
    }
    Some(forms)
}

/// Augments `I` with sum-of-squares consequences of its generators and
/// Gröbner basis elements until nothing new appears. The REAL variety is
/// unchanged at every step.
pub fn sos_real_augment(ideal: &IdealHandle, budget: Budget) -> Result<IdealHandle, GroebnerError> {
    let mut current = ideal.clone();
    let rounds = 2 * ideal.nvars() + 4;
    for _ in 0..rounds {
        let mut pool: Vec<Polynomial> = current.generators().to_vec();
        pool.extend(current.basis().iter().cloned());
        let mut added = Vec::new();
        for p in &pool {
            for q in sos_consequences(p) {
                if !current.contains(&q) && !added.contains(&q) {
                    added.push(q);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        let mut gens = current.generators().to_vec();
        gens.extend(added);
        current = IdealHandle::new(ideal.nvars(), gens, ideal.order(), budget)?;
    }
    Ok(current)
}

/// Settings for [`decide_global`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecideConfig {
    pub budget: Budget,
    pub search: SearchConfig,
    /// Whether `𝒥` comes from a stabilized chain. A witness for a truncated
    /// chain only zeroes a subideal, so it cannot refute observability.
    pub chain_stable: bool,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig { budget: Budget::default(), search: SearchConfig::default(), chain_stable: true }
    }
}

/// Applies, in order: ideal equality with `ℓ`; radical containment
/// `ℓ ⊆ √𝒥` after SOS augmentation; counterexample search.
pub fn decide_global(j: &IdealHandle, l: &IdealHandle, sigma: &[Rational], cfg: &DecideConfig) -> Verdict {
    if ideal_equal(j, l) {
        return Verdict::new(Status::Observable, criterion::IDEAL_EQUALITY);
    }
    let mut notes = Vec::new();
    match sos_real_augment(j, cfg.budget).and_then(|aug| quotient_is_unit_ideal(&aug, l, cfg.budget)) {
        Ok(true) => return Verdict::new(Status::Observable, criterion::RADICAL_MEMBERSHIP),
        Ok(false) => {}
        Err(e) => notes.push(format!("radical test aborted: {e}")),
    }
    let gens: Vec<Polynomial> = if j.basis().is_empty() { j.generators().to_vec() } else { j.basis().to_vec() };
    if let Some(w) = find_counterexample(&gens, sigma, &cfg.search) {
        if cfg.chain_stable {
            let mut v = Verdict::new(Status::Unobservable, criterion::COUNTEREXAMPLE);
            v.witness = Some(w);
            v.notes = notes;
            return v;
        }
        notes.push(format!(
            "point {} zeroes the truncated chain only; not a proof of unobservability",
            render_point(&w)
        ));
    }
    let mut v = Verdict::new(Status::Inconclusive, criterion::NONE);
    v.notes = notes;
    v
}

pub fn render_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn small_rationals(max_abs: i64, max_den: i64) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for den in 1..=max_den {
        for num in -max_abs * den..=max_abs * den {
            let r = Rational::new(num.into(), den.into());
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

/// Searches rational points other than `σ` that zero every generator.
/// A returned point is checked exactly; `None` is not evidence of
/// observability.
pub fn find_counterexample(gens: &[Polynomial], sigma: &[Rational], cfg: &SearchConfig) -> Option<Vec<Rational>> {
    let n = sigma.len();
    let mut budget = cfg.max_candidates;
    let mut tried: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut test = |pt: Vec<Rational>, budget: &mut usize| -> Option<Vec<Rational>> {
        if *budget == 0 || pt.as_slice() == sigma || !tried.insert(pt.clone()) {
            return None;
        }
        *budget -= 1;
        if gens.iter().all(|g| g.eval(&pt).is_zero()) {
            return Some(pt);
        }
        // Repair: solve a failing generator for a variable it contains
        // linearly, then re-test.
        repair(gens, pt, sigma)
    };
    macro_rules! try_point {
        ($p:expr) => {
            if let Some(w) = test($p, &mut budget) {
                return Some(w);
            }
            if budget == 0 {
                return None;
            }
        };
    }

    let steps: Vec<Rational> = [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2), (3, 1), (-3, 1), (1, 3), (-1, 3)]
        .iter()
        .map(|&(a, b)| Rational::new(a.into(), b.into()))
        .collect();

    // Affine family from the linear generators: σ + span(kernel).
    let linear: Vec<&Polynomial> = gens.iter().filter(|g| g.total_degree().is_some_and(|d| d <= 1)).collect();
    if !linear.is_empty() {
        let rows: Vec<Vec<Rational>> = linear
            .iter()
            .map(|g| (0..n).map(|i| g.coefficient(&Monomial::var(n, i))).collect())
            .collect();
        let kernel = QMatrix::from_rows(rows).nullspace();
        for v in &kernel {
            for t in &steps {
                try_point!(sigma.iter().zip(v).map(|(s, x)| s + t * x).collect());
            }
        }
        for a in 0..kernel.len() {
            for b in a + 1..kernel.len() {
                for (ta, tb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let (ta, tb) = (Rational::from_integer(ta.into()), Rational::from_integer(tb.into()));
                    try_point!(sigma
                        .iter()
                        .enumerate()
                        .map(|(i, s)| s + &ta * &kernel[a][i] + &tb * &kernel[b][i])
                        .collect());
                }
            }
        }
    } else if gens.iter().all(|g| g.is_zero()) && n > 0 {
        let mut p = sigma.to_vec();
        p[0] += Rational::one();
        try_point!(p);
    }

    // Coordinate perturbations.
    for i in 0..n {
        for d in &steps {
            let mut p = sigma.to_vec();
            p[i] += d;
            try_point!(p);
        }
    }
    // Scalings.
    for t in &steps {
        try_point!(sigma.iter().map(|s| s * t).collect());
    }
    // Sign flips of coordinate subsets.
    if n <= 16 {
        for mask in 1u32..(1u32 << n) {
            try_point!(sigma
                .iter()
                .enumerate()
                .map(|(i, s)| if mask & (1 << i) != 0 { -s.clone() } else { s.clone() })
                .collect());
        }
    }
    // Binomial families ξ_i = tσ_i, ξ_j = σ_j / t.
    for i in 0..n {
        for j in 0..n {
            if i == j || sigma[j].is_zero() {
                continue;
            }
            for t in &steps {
                let mut p = sigma.to_vec();
                p[i] = &sigma[i] * t;
                p[j] = &sigma[j] / t;
                try_point!(p);
            }
        }
    }
    // Integer grid, then the rational grid with denominators up to 4.
    for values in [small_rationals(2, 1), small_rationals(2, 4)] {
        let k = values.len();
        let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
        let mut idx = vec![0usize; n];
        for _ in 0..total.min(budget.saturating_add(1)) {
            try_point!(idx.iter().map(|&a| values[a].clone()).collect());
            for slot in (0..n).rev() {
                idx[slot] += 1;
                if idx[slot] < k {
                    break;
                }
                idx[slot] = 0;
            }
        }
    }
    // Seeded random points.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_points {
        let p = (0..n)
            .map(|_| Rational::new(rng.gen_range(-10i64..=10).into(), rng.gen_range(1i64..=7).into()))
            .collect();
        try_point!(p);
    }
    None
}

/// Solves the first nonvanishing generator for a not-yet-fixed variable it
/// contains with degree one, backtracking over the choice of variable, until
/// every generator vanishes at a point other than `σ`.
fn repair(gens: &[Polynomial], pt: Vec<Rational>, sigma: &[Rational]) -> Option<Vec<Rational>> {
    let mut fixed = vec![false; pt.len()];
    let mut visits = 0usize;
    repair_rec(gens, pt, sigma, &mut fixed, &mut visits)
}

fn repair_rec(
    gens: &[Polynomial],
    pt: Vec<Rational>,
    sigma: &[Rational],
    fixed: &mut [bool],
    visits: &mut usize,
) -> Option<Vec<Rational>> {
    *visits += 1;
    if *visits > 256 {
        return None;
    }
    let Some(g) = gens.iter().find(|g| !g.eval(&pt).is_zero()) else {
        return (pt.as_slice() != sigma).then_some(pt);
    };
    let n = pt.len();
    for k in 0..n {
        if fixed[k] || g.terms().any(|(m, _)| m.exponents()[k] > 1) || g.terms().all(|(m, _)| m.exponents()[k] == 0) {
            continue;
        }
        // g = x_k q + r
        let mut q = Polynomial::zero(n);
        let mut r = Polynomial::zero(n);
        for (m, c) in g.terms() {
            if m.exponents()[k] == 1 {
                let mut e = m.exponents().to_vec();
                e[k] = 0;
                q.add_term(Monomial::from_exponents(&e), c.clone());
            } else {
                r.add_term(m.clone(), c.clone());
            }
        }
        let qv = q.eval(&pt);
        if qv.is_zero() {
            continue;
        }
        let mut next = pt.clone();
        next[k] = -r.eval(&pt) / qv;
        fixed[k] = true;
        let found = repair_rec(gens, next, sigma, fixed, visits);
        fixed[k] = false;
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Everything produced by [`analyze_global`].
#[derive(Clone, Debug)]
pub struct GlobalAnalysis {
    pub chain: IdealChain,
    /// `𝒥`, the chain ideal with `η := σ`.
    pub j_sigma: IdealHandle,
    pub ell: IdealHandle,
    pub verdict: Verdict,
}

/// Chain, substitution, and verdict at `σ`, with optional simulation of the
/// witness.
pub fn analyze_global(sys: &HypergraphSystem, sigma: &[Rational], cfg: &GlobalConfig) -> Result<GlobalAnalysis, GlobalError> {
    if sigma.len() != sys.n() {
        return Err(GlobalError::SigmaDimension { expected: sys.n(), got: sigma.len() });
    }
    let chain = build_chain(sys, cfg)?;
    let (j_sigma, ell, verdict) = verdict_at(sys, &chain, sigma, cfg)?;
    Ok(GlobalAnalysis { chain, j_sigma, ell, verdict })
}

/// Verdict at one `σ` for an already built chain: returns `(𝒥, ℓ, verdict)`.
/// Lets several initial states share one chain.
pub fn verdict_at(
    sys: &HypergraphSystem,
    chain: &IdealChain,
    sigma: &[Rational],
    cfg: &GlobalConfig,
) -> Result<(IdealHandle, IdealHandle, Verdict), GlobalError> {
    if sigma.len() != sys.n() {
        return Err(GlobalError::SigmaDimension { expected: sys.n(), got: sigma.len() });
    }
    let (j_sigma, l) = substitute_initial(chain, sigma, cfg.budget)?;
    let dcfg = DecideConfig { budget: cfg.budget, search: cfg.search, chain_stable: chain.stabilization.is_some() };
    let mut verdict = decide_global(&j_sigma, &l, sigma, &dcfg);
    if chain.stabilization.is_none() {
        verdict.notes.extend(chain.notes.iter().cloned());
    }
    if cfg.simulate_witness {
        if let Some(w) = &verdict.witness {
            match witness_gap(sys, sigma, w) {
                Ok((gap, horizon)) => {
                    verdict.max_output_gap = Some(gap);
                    if horizon < 1.0 {
                        verdict.notes.push(format!("witness simulated on [0, {horizon:.3}] (finite-time escape)"));
                    }
                }
                Err(e) => verdict.notes.push(format!("witness simulation: {e}")),
            }
        }
    }
    Ok((j_sigma, l, verdict))
}

/// Max output deviation between `σ` and `witness` (RK4, step `1e-3`, zero
/// input) over `[0, horizon]`. The horizon starts at 1 and is halved below
/// any finite-time escape; the horizon actually used is returned.
pub fn witness_gap(sys: &HypergraphSystem, sigma: &[Rational], witness: &[Rational]) -> Result<(f64, f64), SimError> {
    let to_f = |v: &[Rational]| -> Vec<f64> { v.iter().map(rat_to_f64).collect() };
    let step = 1e-3;
    let mut horizon = 1.0;
    loop {
        let run = simulate_outputs(sys, &to_f(sigma), &zero_input, horizon, step)
            .and_then(|a| simulate_outputs(sys, &to_f(witness), &zero_input, horizon, step).map(|b| (a, b)));
        match run {
            Ok((a, b)) => return Ok((max_output_gap(&a, &b), horizon)),
            Err(SimError::Blowup { time }) if time / 2.0 >= 10.0 * step => {
                horizon = ((time / 2.0) / step).floor() * step;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Generators from the recursion `E_0 = C`, `E_k = sym(E_{k−1}) ∘ A` for a
/// single symmetric dynamics tensor `A` and output tensor `C`: returns
/// `E_k ξ^deg − E_k η^deg` for `k = 0..=depth`, without scalar prefactors.
/// Each equals the `k`-th Lie difference up to a nonzero rational factor.
pub fn contraction_generators(a: &SparseTensor, c: &SparseTensor, depth: usize) -> Result<Vec<Polynomial>, GlobalError> {
    if !a.is_symmetric() || !c.is_symmetric() {
        return Err(GlobalError::Asymmetric);
    }
    let n = a.dim();
    let mut e = c.clone();
    let mut out = vec![pair_difference(&e.scalar_form(n))];
    for _ in 0..depth {
        e = e.symmetrize().contract_last_modes(a)?;
        out.push(pair_difference(&e.scalar_form(n)));
    }
    Ok(out)
}

/// Level-`r` Lie derivative of every output built from slot-contraction
/// paths `C_(s1) A_{k1} .. A_{kr}`. Returns, per output, the state-space
/// polynomial (sum over all paths) and the number of paths.
pub fn path_sum_level(sys: &HypergraphSystem, r: usize, path_cap: usize) -> Result<Vec<(Polynomial, usize)>, GlobalError> {
    if sys.has_input_fields() || sys.has_direct() {
        return Err(GlobalError::HasInputs);
    }
    if sys.num_outputs() == 0 {
        return Err(GlobalError::NoOutputs);
    }
    let n = sys.n();
    let mut out = Vec::new();
    for cs in sys.outputs() {
        // Paths ending in tensors of equal order are summed as they go: slot
        // contraction is linear in its first argument.
        let mut frontier: Vec<(SparseTensor, usize)> = cs.iter().map(|c| (c.clone(), 1)).collect();
        for level in 1..=r {
            let mut next: Vec<(SparseTensor, usize)> = Vec::new();
            for (t, paths) in &frontier {
                for s in 0..t.order() {
                    for a in sys.dynamics() {
                        let piece = t.slot_contract(a, s)?;
                        let np = paths.saturating_mul(1);
                        match next.iter_mut().find(|(u, _)| u.order() == piece.order()) {
                            Some((u, p)) => {
                                *u = u.add(&piece)?;
                                *p = p.saturating_add(np);
                            }
                            None => next.push((piece, np)),
                        }
                    }
                }
            }
            let total: usize = next.iter().map(|(_, p)| *p).sum();
            if total > path_cap {
                return Err(GlobalError::PathBudget { level, paths: total, cap: path_cap });
            }
            frontier = next;
        }
        let poly = frontier.iter().fold(Polynomial::zero(n), |acc, (t, _)| &acc + &t.scalar_form(n));
        let paths = frontier.iter().map(|(_, p)| *p).sum();
        out.push((poly, paths));
    }
    Ok(out)
}

/// Difference generators of level `r` via contraction paths.
pub fn path_sum_generators(sys: &HypergraphSystem, r: usize, path_cap: usize) -> Result<Vec<Polynomial>, GlobalError> {
    Ok(path_sum_level(sys, r, path_cap)?
        .into_iter()
        .map(|(p, _)| pair_difference(&p))
        .filter(|g| !g.is_zero())
        .collect())
}
