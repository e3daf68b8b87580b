use qkls_core::fourier::{apply_fourier, make_schedule, FourierConstants};
use qkls_core::hamiltonian::{build_ising, calibrate_kappa, EigenSystem};
use qkls_core::krylov::{assemble, solve, ElementSource, DEFAULT_EXACT_SVD_THRESHOLD};
use qkls_core::lcu::{apply_lcu_circuit, apply_lcu_direct, error_metric, plan_lcu};
use qkls_core::overlap::Shots;
use qkls_core::statevector::{exact_solution_with, prepare_b, Propagator};
use qkls_core::{PauliSum32, Propagator32, StateVector32};

fn ising(n: usize, kappa: f64) -> (qkls_core::PauliSum64, EigenSystem<f64>) {
    let cal = calibrate_kappa::<f64>(n, 0.1, kappa).unwrap();
    let h = build_ising(n, 0.1, cal.eta, cal.zeta).unwrap();
    let eig = EigenSystem::of(&h).unwrap();
    (h, eig)
}

#[test]
fn exact_pipeline_reaches_target_accuracy() {
    let (h, eig) = ising(6, 27.6);
    let b = prepare_b(6).unwrap();
    let x = exact_solution_with(&eig, &b).unwrap();
    let prop = Propagator::with_eigensystem(&h, eig).unwrap();
    let mut errors = Vec::new();
    for m in [1, 2, 4, 8] {
        let sys = assemble(&prop, &b, m, 0.05, ElementSource::Exact).unwrap();
        let sol = solve(&sys, DEFAULT_EXACT_SVD_THRESHOLD).unwrap();
        let out = apply_lcu_direct(&prop, &b, sol.c.as_slice(), 0.05).unwrap();
        errors.push(error_metric(&out.state, &x).unwrap());
        if m <= 4 {
            let circuit = apply_lcu_circuit(&prop, &b, &plan_lcu(sol.c.as_slice()).unwrap(), 0.05).unwrap();
            assert!(error_metric(&circuit.state, &out.state).unwrap() < 1e-10);
        }
    }
    assert!(errors[3] < 1e-3, "{errors:?}");
    assert!(errors[3] <= errors[0]);
}

#[test]
fn finite_difference_pipeline_tracks_exact_one() {
    let (h, eig) = ising(4, 10.0);
    let b = prepare_b(4).unwrap();
    let x = exact_solution_with(&eig, &b).unwrap();
    let prop = Propagator::with_eigensystem(&h, eig).unwrap();
    let source = ElementSource::FiniteDifference { t_fd: 1e-5, shots: Shots::Exact };
    let sys = assemble(&prop, &b, 4, 0.1, source).unwrap();
    let sol = solve(&sys, sys.default_svd_threshold()).unwrap();
    let out = apply_lcu_direct(&prop, &b, sol.c.as_slice(), 0.1).unwrap();
    assert!(error_metric(&out.state, &x).unwrap() < 1e-3);
}

#[test]
fn single_precision_instantiation() {
    let cal = calibrate_kappa::<f32>(3, 1.0, 5.0).unwrap();
    let h: PauliSum32 = build_ising(3, 1.0, cal.eta, cal.zeta).unwrap();
    let prop: Propagator32 = Propagator::exact(&h).unwrap();
    let b: StateVector32 = prepare_b(3).unwrap();
    let x = qkls_core::statevector::exact_solution(&h, &b).unwrap();
    // Three distinct eigenvalues carry weight, so M = 4 spans the solution.
    let sys = assemble(&prop, &b, 4, 1.0f32, ElementSource::Exact).unwrap();
    let sol = solve(&sys, 1e-5).unwrap();
    assert_eq!(sol.truncated_rank, 3);
    let out = apply_lcu_direct(&prop, &b, sol.c.as_slice(), 1.0).unwrap();
    assert!(error_metric(&out.state, &x).unwrap() < 1e-5);
}

#[test]
fn fourier_error_decreases_with_refinement() {
    let (_, eig) = ising(6, 27.6);
    let b = prepare_b(6).unwrap();
    let x = exact_solution_with(&eig, &b).unwrap();
    let mut last = f64::INFINITY;
    for eps in [0.5, 0.1, 0.01] {
        let sched = make_schedule(27.6, eps, FourierConstants::default()).unwrap();
        let (state, terms) = apply_fourier(&eig, &b, &sched).unwrap();
        assert_eq!(terms, sched.term_count());
        let err = error_metric(&state, &x).unwrap();
        assert!(err < last, "eps={eps}: {err} !< {last}");
        last = err;
    }
}

#[test]
fn fourier_preserves_eigenvector_input() {
    let h = qkls_core::PauliSum64::new(1, [(0.6, "X".parse().unwrap())]).unwrap();
    let eig = EigenSystem::of(&h).unwrap();
    let b = prepare_b(1).unwrap();
    let sched = make_schedule(5.0, 0.1, FourierConstants::default()).unwrap();
    let raw = qkls_core::fourier::apply_fourier_unnormalized(&eig, &b, &sched).unwrap();
    let expected = qkls_core::fourier::invert_scalar(0.6, &sched).re / 2f64.sqrt();
    assert!((raw[0].re - expected).abs() < 1e-10 && (raw[1].re - expected).abs() < 1e-10);
    let (state, _) = apply_fourier(&eig, &b, &sched).unwrap();
    assert!(error_metric(&state, &b).unwrap() < 1e-14);
}

#[test]
fn truncated_schedule_is_a_poor_baseline() {
    let (_, eig) = ising(6, 27.6);
    let b = prepare_b(6).unwrap();
    let x = exact_solution_with(&eig, &b).unwrap();
    let sched = make_schedule(27.6, 0.1, FourierConstants::default()).unwrap().resampled(2, 1).unwrap();
    let (state, terms) = apply_fourier(&eig, &b, &sched).unwrap();
    assert_eq!(terms, 6);
    assert!(error_metric(&state, &x).unwrap() > 1e-6);
}
