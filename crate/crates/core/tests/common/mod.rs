//! Shared fixtures and seeded generators for the integration tests.
#![allow(dead_code)]

use hyperobs::io::{parse_system_str, ParsedSystem};
use hyperobs::poly::{lie_derivative, ratio, Polynomial, Rational};
use hyperobs::system::HypergraphSystem;
use hyperobs::tensor::SparseTensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Loads `systems/<name>` from the workspace root.
pub fn load(name: &str) -> ParsedSystem {
    let path = format!("{}/../../systems/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_system_str(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Nonzero weight `a/b` with `a ∈ {−3..3} \ {0}`, `b ∈ {1, 2}`.
pub fn weight(rng: &mut ChaCha8Rng) -> Rational {
    let mut a = 0;
    while a == 0 {
        a = rng.gen_range(-3i64..=3);
    }
    ratio(a, rng.gen_range(1i64..=2))
}

/// Tensor with `1..=max_entries` random entries.
pub fn random_tensor(rng: &mut ChaCha8Rng, order: usize, n: usize, max_entries: usize) -> SparseTensor {
    let k = rng.gen_range(1..=max_entries);
    let entries: Vec<(Vec<usize>, Rational)> =
        (0..k).map(|_| ((0..order).map(|_| rng.gen_range(0..n)).collect(), weight(rng))).collect();
    SparseTensor::from_entries(order, n, entries).unwrap()
}

/// Shape of a random system.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub n: usize,
    pub c: usize,
    pub outputs: usize,
    pub inputs: usize,
    pub input_fields: bool,
    pub direct: bool,
}

/// Random system: one dynamics tensor per order `2..=c` (each present with
/// probability 3/4, at least one), outputs of random orders `1..=c`.
pub fn random_system(rng: &mut ChaCha8Rng, s: Shape) -> HypergraphSystem {
    let mut sys = HypergraphSystem::new(s.n).unwrap();
    let mut any = false;
    for order in 2..=s.c {
        if rng.gen_bool(0.75) || (!any && order == s.c) {
            sys.add_dynamics(random_tensor(rng, order, s.n, 3)).unwrap();
            any = true;
        }
    }
    for _ in 0..s.outputs {
        let order = rng.gen_range(1..=s.c);
        sys.add_output(vec![random_tensor(rng, order, s.n, 2)]).unwrap();
    }
    for l in 0..s.inputs {
        if s.input_fields {
            let order = rng.gen_range(2..=s.c.max(2));
            sys.add_input(vec![random_tensor(rng, order, s.n, 2)]).unwrap();
        }
        if s.direct {
            let order = rng.gen_range(1..=s.c);
            sys.add_direct(l % s.outputs, l, vec![random_tensor(rng, order, s.n, 2)]).unwrap();
        }
    }
    sys
}

/// `L_f^r h_i` for every output, by repeated differentiation.
pub fn direct_lie(sys: &HypergraphSystem, r: usize) -> Vec<Polynomial> {
    let f = sys.drift();
    sys.output_polys()
        .into_iter()
        .map(|mut h| {
            for _ in 0..r {
                h = lie_derivative(&h, &f);
            }
            h
        })
        .collect()
}

/// Linear pair `ẋ = A x`, `y = C x` as a hypergraph system (`A` given by
/// rows: `f_i = Σ_j a[i][j] x_j`).
pub fn linear_system(a: &[Vec<i64>], c: &[i64]) -> HypergraphSystem {
    let n = c.len();
    let mut sys = HypergraphSystem::new(n).unwrap();
    let mut entries = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w != 0 {
                entries.push((vec![j, i], ratio(w, 1)));
            }
        }
    }
    sys.add_dynamics(SparseTensor::from_entries(2, n, entries).unwrap()).unwrap();
    let ce: Vec<(Vec<usize>, Rational)> =
        c.iter().enumerate().filter(|(_, &w)| w != 0).map(|(j, &w)| (vec![j], ratio(w, 1))).collect();
    sys.add_output(vec![SparseTensor::from_entries(1, n, ce).unwrap()]).unwrap();
    sys
}

/// Random linear pair; when `unobservable`, the last state feeds neither the
/// other states nor the output, so it cannot be observed.
pub fn random_linear(rng: &mut ChaCha8Rng, n: usize, unobservable: bool) -> (Vec<Vec<i64>>, Vec<i64>) {
    let mut a: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2i64..=2)).collect()).collect();
    let mut c: Vec<i64> = (0..n).map(|_| rng.gen_range(-2i64..=2)).collect();
    if unobservable {
        for row in a.iter_mut().take(n - 1) {
            row[n - 1] = 0;
        }
        c[n - 1] = 0;
    }
    (a, c)
}
