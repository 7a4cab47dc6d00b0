use super::*;
use crate::tf_core::{TFIndex, Window};
use rand::Rng;

fn random_instance(n: usize, s: usize, seed: u64) -> SparseCoeffs {
    let mut rng = trial_rng(seed, 0, Role::Support);
    let support = SupportSet::random(n, s, &mut rng).unwrap();
    let values = (0..s)
        .map(|_| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.random::<f64>()))
        .collect();
    SparseCoeffs::new(support, values).unwrap()
}

#[test]
fn zero_measurement_gives_zero() {
    let op = GaborOperator::new(Window::alltop(7).unwrap());
    let r = basis_pursuit(&op, &[C64::default(); 7], &BPConfig::for_dimension(7)).unwrap();
    assert_eq!(r.l1_value, 0.0);
    assert!(r.coefficients.iter().all(|v| *v == C64::default()));
    assert!(r.converged);
}

#[test]
fn config_validation() {
    let mut c = BPConfig::for_dimension(16);
    assert!(c.validate(16).is_ok());
    c.primal_step = 1.0;
    assert!(c.validate(16).is_err());
    let op = GaborOperator::new(Window::steinhaus(16, 0).unwrap());
    assert!(basis_pursuit(&op, &[C64::new(1.0, 0.0); 16], &c).is_err());
    assert!(basis_pursuit(&op, &[C64::new(1.0, 0.0); 15], &BPConfig::for_dimension(16)).is_err());
}

#[test]
fn alltop_one_sparse_recovery() {
    let op = GaborOperator::new(Window::alltop(13).unwrap());
    let truth = SparseCoeffs::new(
        SupportSet::new(vec![TFIndex::new(5, 9, 13)], 13).unwrap(),
        vec![C64::new(1.0, 0.0)],
    )
    .unwrap();
    let y = op.synthesize_sparse(&truth).unwrap();
    let r = basis_pursuit(&op, &y, &BPConfig::for_dimension(13)).unwrap();
    assert!(relative_error(&truth, &r.coefficients).unwrap() <= 1e-5);
    assert!(verify_recovery(&truth, &r, 1e-5).unwrap());
}

#[test]
fn certified_instances_are_recovered() {
    let n = 8;
    let op = GaborOperator::new(Window::steinhaus(n, 31).unwrap());
    let mut checked = 0;
    for seed in 0..20 {
        let truth = random_instance(n, 2, seed);
        let cert = dual_certificate(&op, truth.support(), &truth.signs()).unwrap();
        if !cert.certifies_uniqueness {
            continue;
        }
        checked += 1;
        let y = op.synthesize_sparse(&truth).unwrap();
        let config = BPConfig::for_dimension(n);
        let r = basis_pursuit(&op, &y, &config).unwrap();
        assert!(verify_recovery(&truth, &r, config.recovery_tol).unwrap(), "seed {seed}");
        assert!(r.l1_value <= truth.l1_norm() * (1.0 + 1e-4));
        assert_eq!(identified_support(&truth, &r, 1e-5).columns().len(), 2);
    }
    assert!(checked >= 5);
}

#[test]
fn unpolished_iteration_converges_too() {
    let n = 16;
    let op = GaborOperator::new(Window::steinhaus(n, 2).unwrap());
    let truth = random_instance(n, 2, 4);
    let cert = dual_certificate(&op, truth.support(), &truth.signs()).unwrap();
    assert!(cert.certifies_uniqueness);
    let y = op.synthesize_sparse(&truth).unwrap();
    let config = BPConfig {
        polish_every: 0,
        ..BPConfig::for_dimension(n)
    };
    let r = basis_pursuit(&op, &y, &config).unwrap();
    assert!(r.converged, "{} iterations, residual {}", r.iterations, r.residual);
    assert!(!r.certified);
    assert!(r.residual <= config.convergence_tol);
    assert!(relative_error(&truth, &r.coefficients).unwrap() <= 1e-5);
    assert!(r.l1_value <= truth.l1_norm() * (1.0 + 1e-4));
}

#[test]
fn certified_minimiser_is_reached_from_any_start() {
    let n = 16;
    let op = GaborOperator::new(Window::steinhaus(n, 12).unwrap());
    let truth = (0..50)
        .map(|seed| random_instance(n, 3, seed))
        .find(|t| {
            dual_certificate(&op, t.support(), &t.signs())
                .unwrap()
                .certifies_uniqueness
        })
        .expect("some draw is certified");
    let y = op.synthesize_sparse(&truth).unwrap();
    let config = BPConfig::for_dimension(n);
    for i in 0..5 {
        let r = basis_pursuit_from(&op, &y, &config, Start::random(n, 99, i, 0.5)).unwrap();
        assert!(verify_recovery(&truth, &r, config.recovery_tol).unwrap(), "start {i}");
    }
}

#[test]
fn scale_covariance() {
    let n = 16;
    let op = GaborOperator::new(Window::steinhaus(n, 5).unwrap());
    let truth = random_instance(n, 2, 1);
    let y = op.synthesize_sparse(&truth).unwrap();
    let config = BPConfig::for_dimension(n);
    let base = basis_pursuit(&op, &y, &config).unwrap();
    for c in [C64::new(0.01, 0.0), C64::new(-3.0, 4.0), C64::new(0.0, 250.0)] {
        let scaled: Vec<C64> = y.iter().map(|v| v * c).collect();
        let r = basis_pursuit(&op, &scaled, &config).unwrap();
        let expected = SparseCoeffs::from_dense(&base.coefficients, n, 0.0).unwrap().scale(c);
        assert!(relative_error(&expected, &r.coefficients).unwrap() <= config.recovery_tol, "c = {c}");
    }
}

#[test]
fn verify_recovery_thresholds() {
    let n = 4;
    let truth = random_instance(n, 2, 0);
    let exact = BPResult {
        coefficients: truth.to_dense(),
        residual: 0.0,
        l1_value: truth.l1_norm(),
        iterations: 0,
        converged: true,
        certified: false,
    };
    assert!(verify_recovery(&truth, &exact, 1e-5).unwrap());
    let mut perturbed = exact.clone();
    let c = truth.support().columns()[0];
    perturbed.coefficients[c] += C64::new(2e-5 * truth.norm2(), 0.0);
    assert!(!verify_recovery(&truth, &perturbed, 1e-5).unwrap());
    let zero = SparseCoeffs::zero(n);
    assert!(!verify_recovery(&zero, &exact, 1e-5).unwrap());
}
