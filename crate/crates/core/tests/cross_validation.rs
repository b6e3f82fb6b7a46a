//! Monte Carlo frame potentials against exact moment-operator traces.
//!
//! For circuits whose moment operator is `M`, `E|tr(U†V)|^{2t} = ‖M‖_F²`.

use faer::Mat;
use rqc_core::haar_mc::{frame_potential, Model};
use rqc_core::moment_op::{dense_materialize_real, MatrixFreeOperator, Product};

const SAMPLES: usize = 10_000;
const SIGMAS: f64 = 3.0;

fn frobenius_sq(m: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s
}

fn exact(n: usize, t: usize, steps: usize) -> f64 {
    let m = MatrixFreeOperator::local_moment(n, t, 2).unwrap();
    let walk = Product::power(&m, steps).unwrap();
    frobenius_sq(&dense_materialize_real(&walk, 4096).unwrap())
}

#[track_caller]
fn check(n: usize, t: usize, steps: usize, seed: u64) {
    let want = exact(n, t, steps);
    let r = frame_potential(&Model::Lr, n, 2, steps, t, SAMPLES, seed).unwrap();
    assert!(
        (r.estimate - want).abs() <= SIGMAS * r.std_error,
        "(n={n}, t={t}, steps={steps}): {} ± {} vs {want}",
        r.estimate,
        r.std_error
    );
}

#[test]
fn single_gate_on_two_qubits() {
    for t in 1..=3 {
        // M = P, a projector of rank t!
        assert!((exact(2, t, 1) - (1..=t).product::<usize>() as f64).abs() < 1e-9);
        check(2, t, 1, 3);
    }
}

#[test]
fn short_walks_on_three_qubits() {
    check(3, 1, 1, 5);
    check(3, 1, 2, 6);
    check(3, 2, 1, 7);
}
