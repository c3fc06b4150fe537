//! JSON system files: exact ingestion with field-path diagnostics and
//! lossless write-back.
//!
//! ```json
//! {
//!   "n": 3,
//!   "labels": ["prey", "predator", "resource"],
//!   "normalize_weights": false,
//!   "dynamics": [{"order": 2, "entries": [{"idx": [1, 1], "w": "1"}]}],
//!   "inputs": [[{"order": 2, "entries": [{"idx": [1, 1], "w": "1"}]}]],
//!   "outputs": [[{"order": 1, "entries": [{"idx": [2], "w": "1"}]}]],
//!   "direct": [{"output": 1, "input": 1, "tensors": []}],
//!   "sigma": ["1", "1", "1"],
//!   "design": {"d_max": 2, "p": 1}
//! }
//! ```
//!
//! Indices and output/input numbers are 1-based. Weights are exact
//! rationals written as `"p/q"` strings (JSON integers are accepted too).
//! Duplicate index tuples are summed. With `normalize_weights` the weights of
//! order-`k` dynamics/input tensors are divided by `(k−1)!` and those of
//! output/direct tensors by `k!`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Rational;
use crate::system::{HypergraphSystem, SystemError};
use crate::tensor::SparseTensor;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid system file at `{path}` (line {line}, column {column}): {message}")]
    Schema { path: String, line: usize, column: usize, message: String },
    #[error("invalid system file at `{path}`: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    System(#[from] SystemError),
}

impl IoError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Field { path: path.into(), message: message.into() }
    }
}

/// A weight as it appears in the file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightRepr {
    Text(String),
    Int(i64),
}

impl fmt::Display for WeightRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRepr::Text(s) => write!(f, "{s}"),
            WeightRepr::Int(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryRepr {
    pub idx: Vec<usize>,
    pub w: WeightRepr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorRepr {
    pub order: usize,
    #[serde(default)]
    pub entries: Vec<EntryRepr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectRepr {
    pub output: usize,
    pub input: usize,
    #[serde(default)]
    pub tensors: Vec<TensorRepr>,
}

/// Optional design settings carried by a system file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_relax: Option<usize>,
}

/// The raw document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub normalize_weights: bool,
    #[serde(default)]
    pub dynamics: Vec<TensorRepr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<Vec<TensorRepr>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<Vec<TensorRepr>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub direct: Vec<DirectRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<WeightRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignRepr>,
}

/// A validated system plus the optional per-file settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedSystem {
    pub system: HypergraphSystem,
    pub sigma: Option<Vec<Rational>>,
    pub design: Option<DesignRepr>,
}

/// Parses an exact rational from `"p/q"`, `"p"`, or a JSON integer.
pub fn parse_rational(w: &WeightRepr) -> Result<Rational, String> {
    match w {
        WeightRepr::Int(i) => Ok(Rational::from_integer(BigInt::from(*i))),
        WeightRepr::Text(s) => {
            let t = s.trim();
            let (num, den) = match t.split_once('/') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (t, "1"),
            };
            let num = BigInt::from_str(num).map_err(|_| format!("`{s}` is not an exact rational"))?;
            let den = BigInt::from_str(den).map_err(|_| format!("`{s}` is not an exact rational"))?;
            if den.is_zero() {
                return Err(format!("`{s}` has a zero denominator"));
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Canonical text for a rational: `"p/q"` or `"p"`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn factorial(k: usize) -> Rational {
    (1..=k).fold(Rational::one(), |acc, i| acc * Rational::from_integer(BigInt::from(i)))
}

fn build_tensor(t: &TensorRepr, n: usize, path: &str, divisor: &Rational) -> Result<SparseTensor, IoError> {
    if t.order == 0 {
        return Err(IoError::field(format!("{path}.order"), "order must be positive"));
    }
    let mut out = SparseTensor::new(t.order, n).map_err(|e| IoError::field(path, e.to_string()))?;
    for (e, entry) in t.entries.iter().enumerate() {
        let epath = format!("{path}.entries[{e}]");
        if entry.idx.len() != t.order {
            return Err(IoError::field(
                format!("{epath}.idx"),
                format!("has {} indices but the tensor order is {}", entry.idx.len(), t.order),
            ));
        }
        let mut idx = Vec::with_capacity(t.order);
        for (p, &i) in entry.idx.iter().enumerate() {
            if i == 0 || i > n {
                return Err(IoError::field(format!("{epath}.idx[{p}]"), format!("index {i} outside 1..={n}")));
            }
            idx.push(i - 1);
        }
        let w = parse_rational(&entry.w).map_err(|m| IoError::field(format!("{epath}.w"), m))?;
        out.add_entry(&idx, w / divisor).map_err(|e| IoError::field(&epath, e.to_string()))?;
    }
    Ok(out)
}

impl SystemFile {
    /// Parses JSON text, reporting the failing field path on schema errors.
    pub fn from_json(text: &str) -> Result<SystemFile, IoError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            IoError::Schema { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files always serialize")
    }

    /// Validates and builds the model.
    pub fn to_system(&self) -> Result<ParsedSystem, IoError> {
        let n = self.n;
        if n == 0 {
            return Err(IoError::field("n", "state dimension must be positive"));
        }
        let mut sys = HypergraphSystem::new(n)?;
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(IoError::field("labels", format!("{} labels given for n = {n}", labels.len())));
            }
            sys = sys.with_labels(labels.clone())?;
        }
        let dyn_div = |k: usize| if self.normalize_weights { factorial(k.saturating_sub(1)) } else { Rational::one() };
        let out_div = |k: usize| if self.normalize_weights { factorial(k) } else { Rational::one() };

        for (a, t) in self.dynamics.iter().enumerate() {
            let path = format!("dynamics[{a}]");
            if t.order < 2 {
                return Err(IoError::field(format!("{path}.order"), "dynamics tensors need order >= 2"));
            }
            sys.add_dynamics(build_tensor(t, n, &path, &dyn_div(t.order))?)?;
        }
        for (j, ts) in self.inputs.iter().enumerate() {
            let mut built = Vec::new();
            for (k, t) in ts.iter().enumerate() {
                let path = format!("inputs[{j}][{k}]");
                if t.order < 2 {
                    return Err(IoError::field(format!("{path}.order"), "input tensors need order >= 2"));
                }
                built.push(build_tensor(t, n, &path, &dyn_div(t.order))?);
            }
            sys.add_input(built)?;
        }
        for (i, ts) in self.outputs.iter().enumerate() {
            let mut built = Vec::new();
            for (k, t) in ts.iter().enumerate() {
                built.push(build_tensor(t, n, &format!("outputs[{i}][{k}]"), &out_div(t.order))?);
            }
            sys.add_output(built)?;
        }
        for (d, dr) in self.direct.iter().enumerate() {
            let path = format!("direct[{d}]");
            if dr.output == 0 || dr.output > self.outputs.len() {
                return Err(IoError::field(
                    format!("{path}.output"),
                    format!("output {} outside 1..={}", dr.output, self.outputs.len()),
                ));
            }
            if dr.input == 0 {
                return Err(IoError::field(format!("{path}.input"), "inputs are numbered from 1"));
            }
            let mut built = Vec::new();
            for (k, t) in dr.tensors.iter().enumerate() {
                built.push(build_tensor(t, n, &format!("{path}.tensors[{k}]"), &out_div(t.order))?);
            }
            sys.add_direct(dr.output - 1, dr.input - 1, built)?;
        }
        let sigma = match &self.sigma {
            None => None,
            Some(v) => {
                if v.len() != n {
                    return Err(IoError::field("sigma", format!("has {} components, expected {n}", v.len())));
                }
                let mut out = Vec::with_capacity(n);
                for (i, w) in v.iter().enumerate() {
                    out.push(parse_rational(w).map_err(|m| IoError::field(format!("sigma[{i}]"), m))?);
                }
                Some(out)
            }
        };
        if let Some(d) = &self.design {
            if d.d_max == Some(0) {
                return Err(IoError::field("design.d_max", "must be at least 1"));
            }
            if d.p == Some(0) {
                return Err(IoError::field("design.p", "must be at least 1"));
            }
        }
        Ok(ParsedSystem { system: sys, sigma, design: self.design.clone() })
    }

    /// Serializable form of a model (weights written literally,
    /// `normalize_weights = false`).
    pub fn from_system(sys: &HypergraphSystem, sigma: Option<&[Rational]>, design: Option<DesignRepr>) -> SystemFile {
        let default_labels: Vec<String> = (1..=sys.n()).map(|i| format!("x{i}")).collect();
        SystemFile {
            n: sys.n(),
            labels: (sys.labels() != default_labels.as_slice()).then(|| sys.labels().to_vec()),
            normalize_weights: false,
            dynamics: sys.dynamics().iter().map(tensor_repr).collect(),
            inputs: sys.inputs().iter().map(|ts| ts.iter().map(tensor_repr).collect()).collect(),
            outputs: sys.outputs().iter().map(|ts| ts.iter().map(tensor_repr).collect()).collect(),
            direct: sys
                .direct()
                .iter()
                .map(|d| DirectRepr {
                    output: d.output + 1,
                    input: d.input + 1,
                    tensors: d.tensors.iter().map(tensor_repr).collect(),
                })
                .collect(),
            sigma: sigma.map(|s| s.iter().map(|r| WeightRepr::Text(format_rational(r))).collect()),
            design,
        }
    }
}

/// File form of one tensor, entries in index order.
pub fn tensor_repr(t: &SparseTensor) -> TensorRepr {
    TensorRepr {
        order: t.order(),
        entries: t
            .entries()
            .map(|(idx, w)| EntryRepr {
                idx: idx.iter().map(|i| i + 1).collect(),
                w: WeightRepr::Text(format_rational(w)),
            })
            .collect(),
    }
}

/// Parses JSON text straight to a validated system.
pub fn parse_system_str(text: &str) -> Result<ParsedSystem, IoError> {
    SystemFile::from_json(text)?.to_system()
}

/// Reads and validates a system file.
pub fn parse_system(path: &Path) -> Result<ParsedSystem, IoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    parse_system_str(&text)
}
