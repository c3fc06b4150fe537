//! Output design on fixture and hand-built systems.

mod common;

use common::load;
use hyperobs::design::{design_outputs, DesignConfig, DesignError};
use hyperobs::global::{build_chain, GlobalConfig, Status};
use hyperobs::groebner::{ideal_equal, Budget, IdealHandle};
use hyperobs::poly::{lie_derivative, rat, MonomialOrder, Polynomial, VarSpace};
use hyperobs::system::HypergraphSystem;
use hyperobs::tensor::SparseTensor;

fn render(ps: &[Polynomial], n: usize) -> Vec<String> {
    ps.iter().map(|p| p.render(&VarSpace::states(n))).collect()
}

#[test]
fn augments_product_system_with_first_state() {
    let p = load("pairwise_product.json");
    let sigma = vec![rat(1), rat(1), rat(1)];
    let cfg = DesignConfig { d_max: 1, p: 2, r_relax: 1, ..DesignConfig::default() };
    let res = design_outputs(&p.system, &sigma, &cfg, &GlobalConfig::default()).unwrap();
    assert!(res.success);
    assert_eq!(render(&res.outputs, 3), vec!["x1"]);
    assert_eq!(res.verdict.unwrap().status, Status::Observable);

    // Paired ideal ⟨ξ3 − η3, ξ1 − η1, ξ1ξ2 − η1η2⟩.
    let chain = build_chain(&res.system, &GlobalConfig::default()).unwrap();
    let v = |i| Polynomial::var(6, i);
    let expected = IdealHandle::new(
        6,
        vec![&v(2) - &v(5), &v(0) - &v(3), &(&v(0) * &v(1)) - &(&v(3) * &v(4))],
        MonomialOrder::GrevLex,
        Budget::default(),
    )
    .unwrap();
    assert!(ideal_equal(chain.ideal(), &expected));
}

#[test]
fn higher_order_step_finds_second_order_output() {
    // x1' = x2, x2' = 0: only x2-functions have L_f y ≡ 0, and they cannot
    // see x1; y = x1 has L_f y = x2 ≢ 0 but L_f² y ≡ 0.
    let mut s = HypergraphSystem::new(2).unwrap();
    s.add_dynamics(SparseTensor::from_entries(2, 2, [(vec![1, 0], rat(1))]).unwrap()).unwrap();
    let cfg = DesignConfig { d_max: 1, p: 1, r_relax: 2, ..DesignConfig::default() };
    let res = design_outputs(&s, &[rat(0), rat(0)], &cfg, &GlobalConfig::default()).unwrap();
    assert!(res.success, "{:?}", res.trace);
    assert_eq!(res.orders, vec![2]);
    let y = &res.outputs[0];
    let f = s.drift();
    assert!(!lie_derivative(y, &f).is_zero());
    assert!(lie_derivative(&lie_derivative(y, &f), &f).is_zero());
    // The first-order attempt was tried and failed.
    assert!(res.trace.iter().any(|t| t.order == 1 && t.tested.iter().any(|(_, st)| *st != Status::Observable)));
}

#[test]
fn failure_is_reported_not_silent() {
    let s = {
        let mut s = HypergraphSystem::new(2).unwrap();
        s.add_dynamics(SparseTensor::from_entries(2, 2, [(vec![1, 0], rat(1))]).unwrap()).unwrap();
        s
    };
    let cfg = DesignConfig { d_max: 1, p: 1, r_relax: 1, ..DesignConfig::default() };
    let res = design_outputs(&s, &[rat(0), rat(0)], &cfg, &GlobalConfig::default()).unwrap();
    assert!(!res.success);
    assert!(res.verdict.is_some_and(|v| v.status != Status::Observable));
}

#[test]
fn every_candidate_vanishes_at_its_order() {
    let p = load("design_target.json");
    let cfg = DesignConfig { d_max: 2, p: 3, r_relax: 2, ..DesignConfig::default() };
    let res = design_outputs(&p.system, &[rat(1), rat(2), rat(0)], &cfg, &GlobalConfig::default()).unwrap();
    let f = p.system.drift();
    for (y, &r) in res.outputs.iter().zip(&res.orders) {
        let mut d = y.clone();
        for _ in 0..r {
            d = lie_derivative(&d, &f);
        }
        assert!(d.is_zero());
    }
}

#[test]
fn sensor_budget_counts_existing_outputs() {
    let p = load("pairwise_product.json");
    let cfg = DesignConfig { d_max: 1, p: 1, ..DesignConfig::default() };
    let err = design_outputs(&p.system, &[rat(1), rat(1), rat(1)], &cfg, &GlobalConfig::default()).unwrap_err();
    assert!(matches!(err, DesignError::NoSensorsLeft { p: 1, existing: 1 }));
}
