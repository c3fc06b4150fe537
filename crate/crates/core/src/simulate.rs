//! Fixed-step RK4 simulation of output trajectories in `f64`.
//!
//! Used only to corroborate algebraic verdicts: trajectories started from `σ`
//! and from an indistinguishability witness should agree to integration
//! tolerance, while nearby states of an observable system should separate.

use thiserror::Error;

use crate::poly::Polynomial;
use crate::system::HypergraphSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("state became non-finite at t = {time}")]
    Blowup { time: f64 },
    #[error("initial state has {got} components, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("step must be positive and horizon nonnegative")]
    BadGrid,
}

/// Sampled outputs `y(t_k)` for `t_k = k * step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `outputs[k][i]` is output `i` at `times[k]`.
    pub outputs: Vec<Vec<f64>>,
    pub final_state: Vec<f64>,
}

struct Lowered {
    drift: Vec<Polynomial>,
    fields: Vec<Vec<Polynomial>>,
    outputs: Vec<Polynomial>,
    direct: Vec<Vec<Polynomial>>,
}

impl Lowered {
    fn new(sys: &HypergraphSystem) -> Self {
        let n = sys.n();
        let m = sys.num_inputs();
        Lowered {
            drift: sys.drift(),
            fields: sys.input_fields_in(n),
            outputs: sys.output_polys(),
            direct: (0..sys.num_outputs()).map(|i| (0..m).map(|l| sys.direct_poly_in(i, l, n)).collect()).collect(),
        }
    }

    fn rhs(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.drift.iter().map(|p| p.eval_f64(x)).collect();
        for (j, g) in self.fields.iter().enumerate() {
            let uj = u.get(j).copied().unwrap_or(0.0);
            if uj == 0.0 {
                continue;
            }
            for (o, gi) in out.iter_mut().zip(g) {
                *o += gi.eval_f64(x) * uj;
            }
        }
        out
    }

    fn output(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.outputs
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let mut y = h.eval_f64(x);
                for (l, p) in self.direct[i].iter().enumerate() {
                    let ul = u.get(l).copied().unwrap_or(0.0);
                    if ul != 0.0 && !p.is_zero() {
                        y += p.eval_f64(x) * ul;
                    }
                }
                y
            })
            .collect()
    }
}

/// Integrates from `x0` with input signal `input(t)` over `[0, horizon]`.
pub fn simulate_outputs(
    sys: &HypergraphSystem,
    x0: &[f64],
    input: &dyn Fn(f64) -> Vec<f64>,
    horizon: f64,
    step: f64,
) -> Result<Trajectory, SimError> {
    if x0.len() != sys.n() {
        return Err(SimError::Dimension { expected: sys.n(), got: x0.len() });
    }
    if step.is_nan() || step <= 0.0 || horizon.is_nan() || horizon < 0.0 {
        return Err(SimError::BadGrid);
    }
    let low = Lowered::new(sys);
    let steps = (horizon / step).round() as usize;
    let mut x = x0.to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    times.push(0.0);
    outputs.push(low.output(&x, &input(0.0)));
    for k in 0..steps {
        let t = k as f64 * step;
        let u0 = input(t);
        let uh = input(t + step / 2.0);
        let u1 = input(t + step);
        let k1 = low.rhs(&x, &u0);
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + step / 2.0 * b).collect();
        let k2 = low.rhs(&x2, &uh);
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + step / 2.0 * b).collect();
        let k3 = low.rhs(&x3, &uh);
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + step * b).collect();
        let k4 = low.rhs(&x4, &u1);
        for i in 0..x.len() {
            x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let tn = (k + 1) as f64 * step;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Blowup { time: tn });
        }
        times.push(tn);
        outputs.push(low.output(&x, &u1));
    }
    Ok(Trajectory { times, outputs, final_state: x })
}

/// Largest absolute difference between two output trajectories on their
/// common samples.
pub fn max_output_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.outputs
        .iter()
        .zip(&b.outputs)
        .flat_map(|(ya, yb)| ya.iter().zip(yb).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Input signal that is identically zero.
pub fn zero_input(_t: f64) -> Vec<f64> {
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use crate::tensor::SparseTensor;

    fn scalar_decay() -> HypergraphSystem {
        let mut s = HypergraphSystem::new(1).unwrap();
        s.add_dynamics(SparseTensor::from_entries(2, 1, [(vec![0, 0], rat(-1))]).unwrap()).unwrap();
        s.add_output(vec![SparseTensor::from_entries(1, 1, [(vec![0], rat(1))]).unwrap()]).unwrap();
        s
    }

    #[test]
    fn rk4_matches_exponential() {
        let tr = simulate_outputs(&scalar_decay(), &[1.0], &zero_input, 1.0, 1e-3).unwrap();
        assert!((tr.final_state[0] - (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(tr.times.len(), 1001);
    }

    #[test]
    fn zero_state_stays_zero() {
        let tr = simulate_outputs(&scalar_decay(), &[0.0], &zero_input, 1.0, 1e-2).unwrap();
        assert!(tr.outputs.iter().all(|y| y[0] == 0.0));
    }

    #[test]
    fn blowup_is_reported() {
        // x' = x^2 escapes at t = 1 from x0 = 1.
        let mut s = HypergraphSystem::new(1).unwrap();
        s.add_dynamics(SparseTensor::from_entries(3, 1, [(vec![0, 0, 0], rat(1))]).unwrap()).unwrap();
        let r = simulate_outputs(&s, &[1.0], &zero_input, 5.0, 1e-2);
        assert!(matches!(r, Err(SimError::Blowup { .. })));
    }

    #[test]
    fn dimension_checked() {
        assert!(matches!(
            simulate_outputs(&scalar_decay(), &[1.0, 2.0], &zero_input, 1.0, 0.1),
            Err(SimError::Dimension { .. })
        ));
    }
}
