//! Report documents (`hyperobs.report/1`) and their text rendering.
//!
//! Reports are `serde_json` values whose object keys are sorted, so the same
//! inputs and seeds always produce byte-identical output. Wall-clock timing
//! appears only when requested.

use serde_json::{json, Map, Value};

use hyperobs::global::{IdealChain, Verdict};
use hyperobs::groebner::IdealHandle;
use hyperobs::io::format_rational;
use hyperobs::local::{LocalAnalysis, RankReport};
use hyperobs::poly::{Polynomial, Rational, VarSpace};
use hyperobs::structural::{NotCertifiedReason, StructuralAnalysis, StructuralVerdict};
use hyperobs::system::HypergraphSystem;

pub const SCHEMA: &str = "hyperobs.report/1";

pub fn header(command: &str, file: &str, sys: &HypergraphSystem) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("file".into(), json!(file));
    m.insert(
        "system".into(),
        json!({
            "n": sys.n(),
            "labels": sys.labels(),
            "dynamics_orders": sys.dynamics().iter().map(|t| t.order()).collect::<Vec<_>>(),
            "inputs": sys.num_inputs(),
            "outputs": sys.num_outputs(),
            "direct_terms": sys.direct().len(),
            "max_cardinality": sys.max_cardinality(),
        }),
    );
    m
}

pub fn point(p: &[Rational]) -> Value {
    Value::Array(p.iter().map(|r| json!(format_rational(r))).collect())
}

pub fn polys(ps: &[Polynomial], space: &VarSpace) -> Value {
    Value::Array(ps.iter().map(|p| json!(p.render(space))).collect())
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

pub fn verdict(v: &Verdict) -> Value {
    json!({
        "status": v.status.as_str(),
        "criterion": v.criterion,
        "witness": v.witness.as_ref().map(|w| point(w)),
        "max_output_gap": v.max_output_gap,
        "notes": v.notes,
    })
}

pub fn ideal_basis(i: &IdealHandle, space: &VarSpace) -> Value {
    polys(i.basis(), space)
}

/// Chain summary: `N`, generator counts, and canonical generator strings.
pub fn chain(c: &IdealChain, with_bases: bool) -> Value {
    let space = c.space();
    let levels: Vec<Value> = c
        .levels()
        .iter()
        .enumerate()
        .map(|(r, gens)| {
            let mut m = Map::new();
            m.insert("r".into(), json!(r));
            m.insert("new_generators".into(), polys(gens, &space));
            if with_bases {
                m.insert("basis".into(), ideal_basis(&c.ideals()[r], &space));
                if r > 0 {
                    let same = hyperobs::groebner::ideal_equal(&c.ideals()[r - 1], &c.ideals()[r]);
                    m.insert("equals_previous".into(), json!(same));
                }
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "stabilization": c.stabilization(),
        "levels_computed": c.levels().len(),
        "generator_count": c.generators().len(),
        "generators": polys(&c.generators(), &space),
        "basis": ideal_basis(c.ideal(), &space),
        "levels": levels,
        "notes": c.notes(),
    })
}

pub fn structural(a: &StructuralAnalysis) -> Value {
    let sets = |v: &[std::collections::BTreeSet<usize>]| -> Value {
        Value::Array(v.iter().map(|s| json!(s.iter().map(|i| i + 1).collect::<Vec<_>>())).collect())
    };
    let (status, reasons) = match &a.verdict {
        StructuralVerdict::StructurallyObservable => ("StructurallyObservable", Vec::new()),
        StructuralVerdict::NotCertified(rs) => (
            "NotCertified",
            rs.iter()
                .map(|r| match r {
                    NotCertifiedReason::Reachability { unreached } => {
                        json!({"kind": "reachability", "unreached": one_based(unreached)})
                    }
                    NotCertifiedReason::Symmetry { automorphism } => {
                        json!({"kind": "symmetry", "automorphism": one_based(automorphism)})
                    }
                    NotCertifiedReason::TooLarge { n, cap } => json!({"kind": "too-large", "n": n, "cap": cap}),
                })
                .collect(),
        ),
    };
    json!({
        "status": status,
        "reasons": reasons,
        "diameter": a.diameter.diameter,
        "distances": a.diameter.distances,
        "layers": sets(&a.diameter.layers),
        "closure": sets(&a.closure),
        "automorphisms": a.automorphisms.as_ref().map(|all| all.iter().map(|p| one_based(p)).collect::<Vec<_>>()),
    })
}

fn rank(r: &RankReport) -> Value {
    json!({
        "rank": r.rank,
        "certified": r.certified,
        "full": r.full,
        "seed": r.seed,
        "points": r.points.iter().map(|p| point(p)).collect::<Vec<_>>(),
    })
}

pub fn local(a: &LocalAnalysis, labels: &[String]) -> Value {
    let space = a.matrix.space.var_space(labels);
    json!({
        "matrix_kind": a.kind.as_str(),
        "rows": a.matrix.num_rows(),
        "cols": a.matrix.num_cols(),
        "variables": space.names(),
        "matrix": a.matrix.rows.iter().map(|r| polys(r, &space)).collect::<Vec<_>>(),
        "generic": rank(&a.generic),
        "at_point": a.at_point.as_ref().map(rank),
        "vanishing_factor": a.vanishing_factor,
        "oracle_agrees": a.oracle_agrees,
        "notes": a.notes,
    })
}

/// Indented `key: value` rendering of a report.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render_into(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render_into(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_into(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        render_into(x, indent + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
