use rqc_core::moment_op::{LinearOperator, MatrixFreeOperator, OperatorKind, Product, DEFAULT_DENSE_GUARD};
use rqc_core::permgroup::ground_space_basis;
use rqc_core::spectra::{
    dense_second_eigenvalue, detectability_norm, ground_deflation, hamiltonian_gap, rho_haar_min_eig,
    second_eigenvalue, second_eigenvalue_of, top_deflated_eigenpair, Method, SolverOptions,
};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn two_site_exact_values() {
    for t in 1..=3 {
        for d in [2, 3] {
            if (d * d) as u128 * (d * d) as u128 > 1 << 26 {
                continue;
            }
            let m = MatrixFreeOperator::local_moment(2, t, d).unwrap();
            let r = second_eigenvalue(&m, &opts()).unwrap();
            assert!(r.value.abs() < 1e-10, "t={t} d={d}: {}", r.value);
            let gap = hamiltonian_gap(2, t, d, &opts()).unwrap();
            assert!((gap.value - 1.0).abs() < 1e-10);
        }
    }
    let par = MatrixFreeOperator::parallel_moment(2, 1, 2).unwrap();
    let r = second_eigenvalue(&par, &opts()).unwrap();
    assert!((r.value - 0.5).abs() < 1e-10);
}

#[test]
fn matrix_free_matches_dense() {
    for (n, t, d) in [(2, 1, 2), (3, 1, 2), (2, 2, 2), (4, 1, 2), (3, 1, 3)] {
        let m = MatrixFreeOperator::local_moment(n, t, d).unwrap();
        let rank = ground_space_basis(n, t, d as u64).unwrap().rank;
        let dense = dense_second_eigenvalue(&m, rank, DEFAULT_DENSE_GUARD).unwrap();
        for method in [Method::Power, Method::Lanczos] {
            let r = second_eigenvalue(&m, &opts().with_method(method)).unwrap();
            assert!((r.value - dense).abs() < 1e-8, "({n},{t},{d}) {method:?}: {} vs {dense}", r.value);
        }
        let gap = hamiltonian_gap(n, t, d, &opts()).unwrap();
        assert!((gap.value - (n - 1) as f64 * (1.0 - dense)).abs() < 1e-8);
    }
    let par = MatrixFreeOperator::parallel_moment(4, 1, 2).unwrap();
    let dense = dense_second_eigenvalue(&par, 1, DEFAULT_DENSE_GUARD).unwrap();
    let r = second_eigenvalue(&par, &opts()).unwrap();
    assert!((r.value - dense).abs() < 1e-8);
}

#[test]
fn eigenvector_is_orthogonal_to_ground_space() {
    let m = MatrixFreeOperator::local_moment(3, 2, 2).unwrap();
    let deflation = ground_deflation(m.shape()).unwrap();
    assert_eq!(deflation.len(), 2);
    for (i, a) in deflation.iter().enumerate() {
        for (j, b) in deflation.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((a.inner(b).norm() - expected).abs() < 1e-12);
        }
    }
    let pair = top_deflated_eigenpair(&m, &deflation, &opts()).unwrap();
    for b in &deflation {
        assert!(b.inner(&pair.vector).norm() <= 1e-12);
    }
    assert!(pair.residual <= 1e-8);
}

#[test]
fn squared_operator_has_squared_gap() {
    let m = MatrixFreeOperator::local_moment(3, 2, 2).unwrap();
    let single = second_eigenvalue(&m, &opts()).unwrap().value;
    let squared = Product::power(&m, 2).unwrap();
    let double = second_eigenvalue_of(&squared, &opts()).unwrap().value;
    assert!((double - single * single).abs() < 1e-6);
}

#[test]
fn twirled_maximally_entangled_state() {
    let r = rho_haar_min_eig(2, 1).unwrap();
    assert!((r.value - 0.25).abs() < 1e-10);
    let r = rho_haar_min_eig(2, 2).unwrap();
    assert!((r.value - 1.0 / 12.0).abs() < 1e-10);
    assert!(r.value >= 2f64.powi(-4));
    assert!(rho_haar_min_eig(2, 7).is_err());
    assert!(rho_haar_min_eig(1, 1).is_err());
}

#[test]
fn detectability_norm_small_chains() {
    let r = detectability_norm(2, 2, 2, &opts()).unwrap();
    assert!(r.value.abs() < 1e-8);
    assert!(detectability_norm(3, 1, 2, &opts()).is_err());
    // at t = 1 each pair projector fixes a single product state, so P_odd = P_c
    let r = detectability_norm(4, 1, 2, &opts()).unwrap();
    assert!(r.value.abs() < 1e-8);
    let r = detectability_norm(4, 2, 2, &opts()).unwrap();
    assert!(r.value > 0.0 && r.value < 1.0, "{}", r.value);
}

#[test]
fn rejects_non_moment_operators() {
    let h = MatrixFreeOperator::hamiltonian(3, 1, 2).unwrap();
    assert!(second_eigenvalue(&h, &opts()).is_err());
    let m = h.with_kind(OperatorKind::LocalMoment).unwrap();
    assert!(second_eigenvalue(&m, &opts().with_tol(0.0)).is_err());
    let few = SolverOptions { max_iter: 2, ..opts() };
    let big = MatrixFreeOperator::local_moment(4, 2, 2).unwrap();
    assert!(matches!(
        second_eigenvalue(&big, &few),
        Err(rqc_core::Error::Convergence { .. })
    ));
}

#[test]
fn methods_agree_on_parallel_walk() {
    let par = MatrixFreeOperator::parallel_moment(4, 2, 2).unwrap();
    let a = second_eigenvalue(&par, &opts().with_method(Method::Power)).unwrap();
    let b = second_eigenvalue(&par, &opts().with_method(Method::Lanczos)).unwrap();
    assert!((a.value - b.value).abs() < 1e-8);
    assert!(a.value < 1.0 && a.value > 0.5);
}
