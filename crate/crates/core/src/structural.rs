//! Weight-free observability: observational closure and diameter of the
//! output hypergraph, and automorphism triviality.
//!
//! The structural hypergraph keeps only supports. Every nonzero entry
//! `(a_1, .., a_{k−1}, a_k)` of a dynamics or input tensor is a dynamic edge
//! with heads `{a_1..a_{k−1}}` and tail `a_k`; every nonzero entry of an
//! output or direct-transmission tensor of output `i` is an output edge of
//! `i` whose heads are all of its indices.
//!
//! The certificate (finite diameter and trivial automorphism group) is a
//! sufficient condition meant for generic weights; it does not decide
//! observability for specific weights.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::system::HypergraphSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructuralError {
    #[error("{n} nodes is too large for exact automorphism search (cap {cap})")]
    TooLarge { n: usize, cap: usize },
}

/// A dynamic hyperedge `heads → tail` (0-based nodes).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedHyperedge {
    pub heads: BTreeSet<usize>,
    pub tail: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralHypergraph {
    n: usize,
    dynamic: BTreeSet<DirectedHyperedge>,
    /// Per output, the head sets of its edges.
    outputs: Vec<BTreeSet<BTreeSet<usize>>>,
}

impl StructuralHypergraph {
    pub fn new(n: usize) -> Self {
        StructuralHypergraph { n, dynamic: BTreeSet::new(), outputs: Vec::new() }
    }

    pub fn from_system(sys: &HypergraphSystem) -> Self {
        let mut h = StructuralHypergraph::new(sys.n());
        for t in sys.dynamics().iter().chain(sys.inputs().iter().flatten()) {
            for (idx, _) in t.entries() {
                let (heads, tail) = idx.split_at(idx.len() - 1);
                h.add_dynamic(heads.iter().copied().collect(), tail[0]);
            }
        }
        for (i, ts) in sys.outputs().iter().enumerate() {
            h.ensure_output(i);
            for t in ts {
                for (idx, _) in t.entries() {
                    h.add_output_edge(i, idx.iter().copied().collect());
                }
            }
        }
        for d in sys.direct() {
            h.ensure_output(d.output);
            for t in &d.tensors {
                for (idx, _) in t.entries() {
                    h.add_output_edge(d.output, idx.iter().copied().collect());
                }
            }
        }
        h
    }

    fn ensure_output(&mut self, i: usize) {
        while self.outputs.len() <= i {
            self.outputs.push(BTreeSet::new());
        }
    }

    pub fn add_dynamic(&mut self, heads: BTreeSet<usize>, tail: usize) {
        assert!(tail < self.n && heads.iter().all(|&h| h < self.n), "node out of range");
        self.dynamic.insert(DirectedHyperedge { heads, tail });
    }

    pub fn add_output_edge(&mut self, output: usize, heads: BTreeSet<usize>) {
        assert!(heads.iter().all(|&h| h < self.n), "node out of range");
        self.ensure_output(output);
        self.outputs[output].insert(heads);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dynamic_edges(&self) -> &BTreeSet<DirectedHyperedge> {
        &self.dynamic
    }

    pub fn output_edges(&self) -> &[BTreeSet<BTreeSet<usize>>] {
        &self.outputs
    }
}

/// `R^0 ⊆ R^1 ⊆ ...` up to and including the first repeated set.
pub fn observational_closure(h: &StructuralHypergraph) -> Vec<BTreeSet<usize>> {
    let r0: BTreeSet<usize> = h.outputs.iter().flatten().flatten().copied().collect();
    let mut layers = vec![r0];
    loop {
        let cur = layers.last().unwrap();
        let mut next = cur.clone();
        for e in &h.dynamic {
            if cur.contains(&e.tail) {
                next.extend(e.heads.iter().copied());
            }
        }
        if next == *cur {
            return layers;
        }
        layers.push(next);
    }
}

/// Diameter `T` (if every node is reached) and backward distances `d(j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diameter {
    pub diameter: Option<usize>,
    pub distances: Vec<Option<usize>>,
    /// `L_t = R^t \ R^{t−1}`.
    pub layers: Vec<BTreeSet<usize>>,
}

pub fn observational_diameter(h: &StructuralHypergraph) -> Diameter {
    let closure = observational_closure(h);
    let mut distances = vec![None; h.n];
    let mut layers = Vec::new();
    let mut prev = BTreeSet::new();
    for (t, r) in closure.iter().enumerate() {
        let fresh: BTreeSet<usize> = r.difference(&prev).copied().collect();
        for &j in &fresh {
            distances[j] = Some(t);
        }
        layers.push(fresh);
        prev = r.clone();
    }
    let diameter = if distances.iter().all(|d| d.is_some()) { distances.iter().map(|d| d.unwrap()).max() } else { None };
    Diameter { diameter, distances, layers }
}

/// Search settings for [`automorphisms`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AutomorphismConfig {
    pub max_nodes: usize,
    /// Allow permutations that exchange the edge sets of different outputs.
    pub permute_outputs: bool,
}

impl Default for AutomorphismConfig {
    fn default() -> Self {
        AutomorphismConfig { max_nodes: 10, permute_outputs: false }
    }
}

fn map_set(s: &BTreeSet<usize>, p: &[usize]) -> BTreeSet<usize> {
    s.iter().map(|&v| p[v]).collect()
}

/// Per-node invariant preserved by every automorphism.
fn signature(h: &StructuralHypergraph, v: usize, permute_outputs: bool) -> Vec<usize> {
    let mut sig = vec![
        h.dynamic.iter().filter(|e| e.tail == v).count(),
        h.dynamic.iter().filter(|e| e.heads.contains(&v)).count(),
    ];
    let mut per_output: Vec<usize> = h.outputs.iter().map(|o| o.iter().filter(|s| s.contains(&v)).count()).collect();
    if permute_outputs {
        per_output.sort_unstable();
    }
    sig.extend(per_output);
    sig
}

fn preserves(h: &StructuralHypergraph, p: &[usize], permute_outputs: bool) -> bool {
    for e in &h.dynamic {
        let img = DirectedHyperedge { heads: map_set(&e.heads, p), tail: p[e.tail] };
        if !h.dynamic.contains(&img) {
            return false;
        }
    }
    if permute_outputs {
        let mut want: Vec<&BTreeSet<BTreeSet<usize>>> = h.outputs.iter().collect();
        want.sort();
        let imgs: Vec<BTreeSet<BTreeSet<usize>>> =
            h.outputs.iter().map(|o| o.iter().map(|s| map_set(s, p)).collect()).collect();
        let mut got: Vec<&BTreeSet<BTreeSet<usize>>> = imgs.iter().collect();
        got.sort();
        want == got
    } else {
        h.outputs.iter().all(|o| o.iter().all(|s| o.contains(&map_set(s, p))))
    }
}

/// All node permutations (as images `p[v]`) preserving the dynamic edges and
/// the output edges; the identity comes first.
pub fn automorphisms(h: &StructuralHypergraph, cfg: &AutomorphismConfig) -> Result<Vec<Vec<usize>>, StructuralError> {
    let n = h.n;
    if n > cfg.max_nodes {
        return Err(StructuralError::TooLarge { n, cap: cfg.max_nodes });
    }
    let sigs: Vec<Vec<usize>> = (0..n).map(|v| signature(h, v, cfg.permute_outputs)).collect();
    // Edges checked as soon as all their nodes are assigned.
    let mut dyn_by_max: BTreeMap<usize, Vec<&DirectedHyperedge>> = BTreeMap::new();
    for e in &h.dynamic {
        let m = e.heads.iter().copied().chain([e.tail]).max().unwrap();
        dyn_by_max.entry(m).or_default().push(e);
    }
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(h, cfg, &sigs, &dyn_by_max, 0, &mut perm, &mut used, &mut out);
    out.sort_by_key(|p| p.iter().enumerate().any(|(i, &v)| i != v));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn search(
    h: &StructuralHypergraph,
    cfg: &AutomorphismConfig,
    sigs: &[Vec<usize>],
    dyn_by_max: &BTreeMap<usize, Vec<&DirectedHyperedge>>,
    v: usize,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let n = h.n;
    if v == n {
        if preserves(h, perm, cfg.permute_outputs) {
            out.push(perm.clone());
        }
        return;
    }
    for w in 0..n {
        if used[w] || sigs[w] != sigs[v] {
            continue;
        }
        perm[v] = w;
        used[w] = true;
        let ok = dyn_by_max.get(&v).is_none_or(|edges| {
            edges.iter().all(|e| {
                let img = DirectedHyperedge { heads: map_set(&e.heads, perm), tail: perm[e.tail] };
                h.dynamic.contains(&img)
            })
        });
        if ok {
            search(h, cfg, sigs, dyn_by_max, v + 1, perm, used, out);
        }
        used[w] = false;
        perm[v] = usize::MAX;
    }
}

/// Why a structure was not certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotCertifiedReason {
    /// Some nodes are never reached from the outputs.
    Reachability { unreached: Vec<usize> },
    /// A nontrivial automorphism exists.
    Symmetry { automorphism: Vec<usize> },
    /// The automorphism search was skipped.
    TooLarge { n: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructuralVerdict {
    StructurallyObservable,
    NotCertified(Vec<NotCertifiedReason>),
}

/// Closure, diameter, automorphisms, and the combined verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralAnalysis {
    pub closure: Vec<BTreeSet<usize>>,
    pub diameter: Diameter,
    /// `None` when the search was skipped for size.
    pub automorphisms: Option<Vec<Vec<usize>>>,
    pub verdict: StructuralVerdict,
}

/// Certifies when the diameter is finite and the automorphism group is
/// trivial; otherwise lists every violated condition.
pub fn structural_observability_test(h: &StructuralHypergraph, cfg: &AutomorphismConfig) -> StructuralAnalysis {
    let closure = observational_closure(h);
    let diameter = observational_diameter(h);
    let mut reasons = Vec::new();
    if diameter.diameter.is_none() {
        let unreached = (0..h.n).filter(|&j| diameter.distances[j].is_none()).collect();
        reasons.push(NotCertifiedReason::Reachability { unreached });
    }
    let automorphisms = match automorphisms(h, cfg) {
        Ok(a) => {
            if let Some(p) = a.iter().find(|p| p.iter().enumerate().any(|(i, &v)| i != v)) {
                reasons.push(NotCertifiedReason::Symmetry { automorphism: p.clone() });
            }
            Some(a)
        }
        Err(StructuralError::TooLarge { n, cap }) => {
            reasons.push(NotCertifiedReason::TooLarge { n, cap });
            None
        }
    };
    let verdict =
        if reasons.is_empty() { StructuralVerdict::StructurallyObservable } else { StructuralVerdict::NotCertified(reasons) };
    StructuralAnalysis { closure, diameter, automorphisms, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    /// x3' = a x1 x2, y = x3 (optionally y2 = x1).
    fn product(extra_output: bool) -> StructuralHypergraph {
        let mut h = StructuralHypergraph::new(3);
        h.add_dynamic(set(&[0, 1]), 2);
        h.add_output_edge(0, set(&[2]));
        if extra_output {
            h.add_output_edge(1, set(&[0]));
        }
        h
    }

    #[test]
    fn closure_of_product_example() {
        let c = observational_closure(&product(false));
        assert_eq!(c[0], set(&[2]));
        assert_eq!(c[1], set(&[0, 1, 2]));
        let d = observational_diameter(&product(false));
        assert_eq!(d.diameter, Some(1));
        assert_eq!(d.layers[1], set(&[0, 1]));
        let c2 = observational_closure(&product(true));
        assert_eq!(c2[0], set(&[0, 2]));
    }

    #[test]
    fn symmetric_product_not_certified() {
        let a = structural_observability_test(&product(false), &AutomorphismConfig::default());
        assert_eq!(
            a.verdict,
            StructuralVerdict::NotCertified(vec![NotCertifiedReason::Symmetry { automorphism: vec![1, 0, 2] }])
        );
        let b = structural_observability_test(&product(true), &AutomorphismConfig::default());
        assert_eq!(b.verdict, StructuralVerdict::StructurallyObservable);
        assert_eq!(b.automorphisms.unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn empty_graph_has_full_symmetric_group() {
        let h = StructuralHypergraph::new(3);
        let a = automorphisms(&h, &AutomorphismConfig::default()).unwrap();
        assert_eq!(a.len(), 6);
        assert!(observational_closure(&h).iter().all(|r| r.is_empty()));
    }

    #[test]
    fn pairwise_chain_distances() {
        let mut h = StructuralHypergraph::new(3);
        h.add_dynamic(set(&[0]), 1);
        h.add_dynamic(set(&[1]), 2);
        h.add_output_edge(0, set(&[2]));
        let d = observational_diameter(&h);
        assert_eq!(d.diameter, Some(2));
        assert_eq!(d.distances, vec![Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn isolated_node_is_unreached() {
        let mut h = StructuralHypergraph::new(4);
        h.add_dynamic(set(&[0, 1]), 2);
        h.add_output_edge(0, set(&[2]));
        let a = structural_observability_test(&h, &AutomorphismConfig::default());
        assert_eq!(a.diameter.diameter, None);
        match a.verdict {
            StructuralVerdict::NotCertified(r) => {
                assert!(r.contains(&NotCertifiedReason::Reachability { unreached: vec![3] }))
            }
            _ => panic!("expected NotCertified"),
        }
    }

    #[test]
    fn size_cap_reported() {
        let h = StructuralHypergraph::new(11);
        assert!(matches!(
            automorphisms(&h, &AutomorphismConfig::default()),
            Err(StructuralError::TooLarge { n: 11, cap: 10 })
        ));
    }

    #[test]
    fn output_permutation_flag() {
        // Two outputs watching one node each: swapping needs the flag.
        let mut h = StructuralHypergraph::new(2);
        h.add_output_edge(0, set(&[0]));
        h.add_output_edge(1, set(&[1]));
        assert_eq!(automorphisms(&h, &AutomorphismConfig::default()).unwrap().len(), 1);
        let cfg = AutomorphismConfig { permute_outputs: true, ..AutomorphismConfig::default() };
        assert_eq!(automorphisms(&h, &cfg).unwrap().len(), 2);
    }
}
