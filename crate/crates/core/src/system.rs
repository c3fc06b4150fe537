//! The input-affine hypergraph system and its lowering to polynomials.
//!
//! ```text
//! x' = sum_k A_k x^{k-1} + sum_j sum_k B_{k,j} x^{k-1} u_j
//! y_i = sum_k C_{i,k} x^k + sum_l sum_k D_{i,k,l} x^k u_l
//! ```
//!
//! Lowered, this is `x' = g_0(x) + sum_j g_j(x) u_j` and
//! `y_i = p_{i,0}(x) + sum_l p_{i,l}(x) u_l`.

use num_traits::Zero;
use thiserror::Error;

use crate::poly::{Polynomial, Rational};
use crate::tensor::SparseTensor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("state dimension must be positive")]
    ZeroDimension,
    #[error("{what}: tensor dimension {got} does not match n = {n}")]
    DimensionMismatch { what: String, n: usize, got: usize },
    #[error("{what}: order {order} is not allowed (expected {expected})")]
    BadOrder { what: String, order: usize, expected: &'static str },
    #[error("{0} labels given for {1} states")]
    LabelCount(usize, usize),
    #[error("direct term refers to output {output} but only {outputs} outputs exist")]
    UnknownOutput { output: usize, outputs: usize },
}

/// Direct-transmission tensors `D_{i,k,l}` for one (output, input) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectTerm {
    /// 0-based output index `i`.
    pub output: usize,
    /// 0-based input index `l`.
    pub input: usize,
    pub tensors: Vec<SparseTensor>,
}

/// The full model: dynamics, inputs, outputs, and direct transmission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergraphSystem {
    n: usize,
    labels: Vec<String>,
    dynamics: Vec<SparseTensor>,
    inputs: Vec<Vec<SparseTensor>>,
    outputs: Vec<Vec<SparseTensor>>,
    direct: Vec<DirectTerm>,
}

impl HypergraphSystem {
    /// A system with `n` states and nothing else; labels default to
    /// `x1..xn`.
    pub fn new(n: usize) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::ZeroDimension);
        }
        Ok(HypergraphSystem {
            n,
            labels: (1..=n).map(|i| format!("x{i}")).collect(),
            dynamics: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            direct: Vec::new(),
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, SystemError> {
        if labels.len() != self.n {
            return Err(SystemError::LabelCount(labels.len(), self.n));
        }
        self.labels = labels;
        Ok(self)
    }

    fn check(&self, t: &SparseTensor, what: String, min_order: usize) -> Result<(), SystemError> {
        if t.dim() != self.n {
            return Err(SystemError::DimensionMismatch { what, n: self.n, got: t.dim() });
        }
        if t.order() < min_order {
            let expected = if min_order == 2 { ">= 2" } else { ">= 1" };
            return Err(SystemError::BadOrder { what, order: t.order(), expected });
        }
        Ok(())
    }

    /// Adds a dynamics tensor `A_k` (order `k >= 2`).
    pub fn add_dynamics(&mut self, t: SparseTensor) -> Result<(), SystemError> {
        self.check(&t, format!("dynamics[{}]", self.dynamics.len()), 2)?;
        self.dynamics.push(t);
        Ok(())
    }

    /// Appends a new input `u_j` driven through the given `B_{k,j}`.
    pub fn add_input(&mut self, tensors: Vec<SparseTensor>) -> Result<usize, SystemError> {
        let j = self.inputs.len();
        for (k, t) in tensors.iter().enumerate() {
            self.check(t, format!("inputs[{j}][{k}]"), 2)?;
        }
        self.inputs.push(tensors);
        Ok(j)
    }

    /// Appends a new output `y_i = sum_k C_{i,k} x^k`.
    pub fn add_output(&mut self, tensors: Vec<SparseTensor>) -> Result<usize, SystemError> {
        let i = self.outputs.len();
        for (k, t) in tensors.iter().enumerate() {
            self.check(t, format!("outputs[{i}][{k}]"), 1)?;
        }
        self.outputs.push(tensors);
        Ok(i)
    }

    /// Adds direct transmission from input `input` to output `output`.
    /// Inputs referenced here but never given `B` tensors still count as
    /// inputs.
    pub fn add_direct(&mut self, output: usize, input: usize, tensors: Vec<SparseTensor>) -> Result<(), SystemError> {
        if output >= self.outputs.len() {
            return Err(SystemError::UnknownOutput { output, outputs: self.outputs.len() });
        }
        for (k, t) in tensors.iter().enumerate() {
            self.check(t, format!("direct[{}][{k}]", self.direct.len()), 1)?;
        }
        self.direct.push(DirectTerm { output, input, tensors });
        Ok(())
    }

    /// Removes every output and direct-transmission term.
    pub fn clear_outputs(&mut self) {
        self.outputs.clear();
        self.direct.clear();
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dynamics(&self) -> &[SparseTensor] {
        &self.dynamics
    }

    pub fn inputs(&self) -> &[Vec<SparseTensor>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Vec<SparseTensor>] {
        &self.outputs
    }

    pub fn direct(&self) -> &[DirectTerm] {
        &self.direct
    }

    /// Number of inputs `m`, including inputs only seen by direct terms.
    pub fn num_inputs(&self) -> usize {
        let from_direct = self.direct.iter().map(|d| d.input + 1).max().unwrap_or(0);
        self.inputs.len().max(from_direct)
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Maximum hyperedge cardinality `c` over all tensors.
    pub fn max_cardinality(&self) -> usize {
        let all = self
            .dynamics
            .iter()
            .chain(self.inputs.iter().flatten())
            .chain(self.outputs.iter().flatten())
            .chain(self.direct.iter().flat_map(|d| d.tensors.iter()));
        all.map(|t| t.order()).max().unwrap_or(0)
    }

    pub fn has_input_fields(&self) -> bool {
        self.inputs.iter().flatten().any(|t| !t.is_zero())
    }

    pub fn has_direct(&self) -> bool {
        self.direct.iter().flat_map(|d| d.tensors.iter()).any(|t| !t.is_zero())
    }

    /// Drift `g_0` in `nvars >= n` variables.
    pub fn drift_in(&self, nvars: usize) -> Vec<Polynomial> {
        sum_fields(self.n, nvars, &self.dynamics)
    }

    /// Drift `g_0` over the state variables.
    pub fn drift(&self) -> Vec<Polynomial> {
        self.drift_in(self.n)
    }

    /// Input vector fields `g_1..g_m`.
    pub fn input_fields_in(&self, nvars: usize) -> Vec<Vec<Polynomial>> {
        (0..self.num_inputs())
            .map(|j| match self.inputs.get(j) {
                Some(ts) => sum_fields(self.n, nvars, ts),
                None => vec![Polynomial::zero(nvars); self.n],
            })
            .collect()
    }

    /// The family `{g_0, g_1, ..., g_m}`.
    pub fn vector_fields(&self) -> Vec<Vec<Polynomial>> {
        let mut out = vec![self.drift()];
        out.extend(self.input_fields_in(self.n));
        out
    }

    /// `f(x, u)` with inputs bound to constants.
    pub fn lower_dynamics_at(&self, u: &[Rational]) -> Vec<Polynomial> {
        let mut f = self.drift();
        for (j, g) in self.input_fields_in(self.n).into_iter().enumerate() {
            let uj = u.get(j).cloned().unwrap_or_else(Rational::zero);
            if uj.is_zero() {
                continue;
            }
            for (fi, gi) in f.iter_mut().zip(g) {
                *fi = &*fi + &gi.scale(&uj);
            }
        }
        f
    }

    /// `p_{i,0}` for every output, in `nvars >= n` variables.
    pub fn output_polys_in(&self, nvars: usize) -> Vec<Polynomial> {
        self.outputs.iter().map(|ts| sum_forms(nvars, ts)).collect()
    }

    pub fn output_polys(&self) -> Vec<Polynomial> {
        self.output_polys_in(self.n)
    }

    /// `p_{i,l}` for output `i` and input `l` (zero when absent).
    pub fn direct_poly_in(&self, output: usize, input: usize, nvars: usize) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        for d in self.direct.iter().filter(|d| d.output == output && d.input == input) {
            p = &p + &sum_forms(nvars, &d.tensors);
        }
        p
    }

    /// Per output, the nonzero members of `{p_{i,0}, p_{i,1}, ..., p_{i,m}}`.
    pub fn output_families(&self) -> Vec<Vec<Polynomial>> {
        let base = self.output_polys();
        base.into_iter()
            .enumerate()
            .map(|(i, p0)| {
                let mut fam = vec![p0];
                for l in 0..self.num_inputs() {
                    fam.push(self.direct_poly_in(i, l, self.n));
                }
                fam.into_iter().filter(|p| !p.is_zero()).collect()
            })
            .collect()
    }
}

fn sum_fields(n: usize, nvars: usize, tensors: &[SparseTensor]) -> Vec<Polynomial> {
    let mut f = vec![Polynomial::zero(nvars); n];
    for t in tensors {
        for (fi, gi) in f.iter_mut().zip(t.vector_form(nvars)) {
            *fi = &*fi + &gi;
        }
    }
    f
}

fn sum_forms(nvars: usize, tensors: &[SparseTensor]) -> Polynomial {
    tensors.iter().fold(Polynomial::zero(nvars), |acc, t| &acc + &t.scalar_form(nvars))
}
