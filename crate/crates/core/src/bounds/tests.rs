use super::*;
use crate::rng::{trial_rng, Role};
use rand::Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn conditioning_constants() {
    assert!((conditioning_constant() - 1.075).abs() < 1e-3);
    assert!((conditioning_log_constant() - 0.0724).abs() < 5e-4);
}

#[test]
fn conditioning_bound_at_reference_point() {
    let table = stirling_table(60);
    let r = conditioning_failure_bound(1024, 4, 0.5, &table).unwrap();
    // independent evaluation in the log domain
    let e = std::f64::consts::E;
    let alt = ((e * e).ln() - (4.0 * (e - 1.0)).ln() + 4f64.ln() - 0.25 * 1024.0 / (4.0 * e * 4.0)).exp();
    assert!(rel(r.value, alt) < 1e-12);
    assert!((r.value - 0.0119).abs() < 1e-4);
    assert!(r.feasible);
    assert!(r.term("markov_min").unwrap() > 0.0);
    assert_eq!(r.term("markov_order").unwrap() % 2.0, 0.0);
    let vacuous = conditioning_failure_bound(64, 16, 0.5, &table).unwrap();
    assert!(!vacuous.feasible && vacuous.value > 1.0 && vacuous.presented() == 1.0);
}

#[test]
fn markov_minimum_is_attained_over_orders() {
    let table = stirling_table(40);
    let r = conditioning_failure_bound(4096, 4, 0.5, &table).unwrap();
    let brute = (1..=20)
        .map(|m| 0.5f64.powi(-2 * m as i32) * moment_bound(4096, 4, 2 * m, &table).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(rel(r.term("markov_min").unwrap(), brute) < 1e-10);
}

#[test]
fn conditioning_condition_is_consistent_with_bound() {
    // the condition holds for some ε < 1 exactly when the closed form is below one
    let table = stirling_table(10);
    for (n, s) in [(1024usize, 4usize), (1024, 12), (256, 4), (64, 2)] {
        let feasible = conditioning_failure_bound(n, s, 0.5, &table).unwrap().feasible;
        let some_eps = conditioning_condition(n, s, 0.5, 1.0 - 1e-9).unwrap();
        assert_eq!(feasible, some_eps, "n={n} S={s}");
    }
    assert!(conditioning_condition(1024, 4, 0.5, 0.0).is_err());
}

#[test]
fn coherence_guarantee_thresholds() {
    assert!(coherence_guarantee(1, 1.0 / 5f64.sqrt()).unwrap());
    assert!(!coherence_guarantee(2, 1.0 / 5f64.sqrt()).unwrap());
    assert!(coherence_guarantee(2, 1.0 / 13f64.sqrt()).unwrap());
    assert!(!coherence_guarantee(3, 1.0 / 13f64.sqrt()).unwrap());
    assert!(coherence_guarantee(0, 1.0).unwrap());
    assert!(coherence_guarantee(1, 0.0).is_err());
    assert!(coherence_guarantee(1, 1.5).is_err());
}

#[test]
fn random_window_sparsity_threshold() {
    let v = coherence_sparsity_threshold(1024, 1.0).unwrap();
    assert!((v - 2.484_602_286_953_765).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for t in [0.1, 1.0, 10.0, 100.0, 1e6] {
        let v = coherence_sparsity_threshold(1024, t).unwrap();
        assert!(v < prev);
        prev = v;
    }
    assert!((coherence_sparsity_threshold(1024, 1e15).unwrap() - 0.5).abs() < 1e-6);
    assert!(coherence_sparsity_threshold(1023, 1.0).is_err());
    assert!(coherence_sparsity_threshold(1024, 0.0).is_err());
}

#[test]
fn random_phase_bound_terms() {
    let r = random_phase_failure_bound(10, 2, 12.0).unwrap();
    assert!((r.term("coherence_term").unwrap() - 0.4).abs() < 1e-15);

    let (n, s, sigma) = (65536usize, 8usize, 9.0);
    let r = random_phase_failure_bound(n, s, sigma).unwrap();
    // second evaluation, terms summed in reverse order through logarithms
    let (nf, sf) = (n as f64, s as f64);
    let e = std::f64::consts::E;
    let t3 = (4f64.ln() - (sigma / 4.0 - 2.0) * nf.ln()).exp();
    let t2 = (conditioning_constant().ln() + sf.ln() - nf / (16.0 * e * sf)).exp();
    let t1 = (2f64.ln() + (nf * nf - sf).ln() - nf / (8.0 * sigma * sf * nf.ln())).exp();
    assert!(rel(r.value, t3 + t2 + t1) < 1e-12);
    let sum: f64 = r.terms.iter().map(|t| t.value).sum();
    assert!(rel(r.value, sum) < 1e-15);

    // the support term 2(n²−S)·exp(−n/(8σS ln n)) grows until n/ln n outpaces n²,
    // so over 2^10..2^20 the sum rises to a peak at 2^14 and falls afterwards
    let values: Vec<f64> = (10..=20)
        .map(|p| random_phase_failure_bound(1 << p, 8, 9.0).unwrap().value)
        .collect();
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(peak + 10, 14);
    assert!(values[..=peak].windows(2).all(|w| w[0] < w[1]));
    assert!(values[peak..].windows(2).all(|w| w[0] > w[1]));
    assert!(rel(values[0], 1_622_704.498_992_064) < 1e-10);
    assert!(rel(values[10], 0.125) < 1e-12);
    assert!(values[8] < 1.0 && values[7] > 1.0);
    assert!(random_phase_failure_bound(64, 4, 8.0).is_err());
    assert!(random_phase_failure_bound(63, 4, 9.0).is_err());
}

#[test]
fn rounded_l_and_products() {
    assert_eq!(rounded_l(1), vec![1]);
    assert_eq!(rounded_l(4), vec![4, 2, 1, 1]);
    // 5/2 = 2.5 rounds up
    assert_eq!(rounded_l(5), vec![5, 3, 2, 1, 1]);
    for m in 1..=200usize {
        let lo = (2 * m).div_ceil(3);
        let hi = 4 * m / 3;
        for (i, lt) in rounded_l(m).into_iter().enumerate() {
            let t = i + 1;
            assert!(lt >= 1);
            assert!((lo..=hi).contains(&(t * lt)), "m={m} t={t} L={lt}");
        }
    }
}

#[test]
fn certificate_sum_stays_below_reference() {
    let mut worst: f64 = 0.0;
    for m in 1..=200 {
        worst = worst.max(certificate_sum(0.47, m, &rounded_l(m)));
    }
    assert!(worst <= 0.957, "{worst}");
}

#[test]
fn certificate_conditions_cases() {
    let single = BoundParams {
        m: Some(1),
        l: vec![1],
        beta: Some(0.5),
        kappa: Some(0.01),
        ..BoundParams::new(64, 1)
    };
    let r = certificate_conditions(&single).unwrap();
    assert!((r.value - 0.5).abs() < 1e-15 && r.feasible);

    let m = 30;
    let l = rounded_l(m);
    let a = certificate_sum(0.47, m, &l);
    for s in [1usize, 4, 50] {
        let p = BoundParams {
            m: Some(m),
            l: l.clone(),
            beta: Some(0.47),
            kappa: Some(equality_kappa(a, s)),
            ..BoundParams::new(1024, s)
        };
        assert!(certificate_conditions(&p).unwrap().feasible);
        let too_big = BoundParams {
            kappa: Some(equality_kappa(a, s) * 1.01),
            ..p
        };
        assert!(!certificate_conditions(&too_big).unwrap().feasible);
    }
    let missing = BoundParams::new(64, 2);
    assert!(matches!(certificate_conditions(&missing), Err(Error::InvalidInput(_))));
}

#[test]
fn deterministic_bound_report() {
    let table = stirling_table(table_order_for(20));
    let m = 10;
    let l = rounded_l(m);
    let a = certificate_sum(0.47, m, &l);
    let p = BoundParams {
        m: Some(m),
        l,
        beta: Some(0.47),
        kappa: Some(equality_kappa(a, 4)),
        ..BoundParams::new(4096, 4)
    };
    let r = deterministic_failure_bound(&p, &table).unwrap();
    assert!(r.feasible);
    // direct evaluation with G from the public evaluator
    let z = 4096.0 / 4.0;
    let kappa = p.kappa.unwrap();
    let frob = 4.0 / (kappa * kappa) * g2m(z, m, &table).unwrap();
    let off: f64 = p
        .l
        .iter()
        .enumerate()
        .map(|(i, &lt)| g2m(z, (i + 1) * lt, &table).unwrap())
        .sum::<f64>()
        * 4096f64.powi(2)
        * 0.47f64.powi(-2 * m as i32);
    assert!(rel(r.value, frob + off) < 1e-10);

    let infeasible = BoundParams {
        beta: Some(0.9),
        ..p.clone()
    };
    let r = deterministic_failure_bound(&infeasible, &table).unwrap();
    assert!(!r.feasible && r.value == 1.0);

    let small = stirling_table(10);
    assert!(matches!(deterministic_failure_bound(&p, &small), Err(Error::Domain(_))));
}

#[test]
fn minimised_deterministic_bound_decreases_with_n() {
    let m_max = 100;
    let table = stirling_table(table_order_for(m_max));
    let mut prev = f64::INFINITY;
    for p in 8..=14 {
        let r = minimize_deterministic_failure_bound(1 << p, 4, 0.47, m_max, &table).unwrap();
        assert!(r.feasible);
        assert!(r.value <= prev, "n = 2^{p}: {} > {prev}", r.value);
        prev = r.value;
    }
}

#[test]
fn recovery_constants_reference_values() {
    let (c1, c2, c3) = recovery_constants();
    assert!((c1 - 273.5).abs() <= 0.5, "{c1}");
    assert!((c2 - 64.1).abs() <= 0.5, "{c2}");
    assert!((c3 - 8.35).abs() <= 0.1, "{c3}");
}

#[test]
fn coherence_tail_reduction() {
    for (n, sigma) in [(64usize, 9.0), (1024, 12.0), (4096, 10.0)] {
        let nf = n as f64;
        let alpha = (sigma * nf.ln()).sqrt();
        let v = coherence_tail_bound(n, alpha, 0.5).unwrap();
        let reduced = 4.0 * nf * (nf - 1.0) * nf.powf(-sigma / 4.0);
        assert!(rel(v, reduced) < 1e-12);
    }
    let v = coherence_tail_bound(1024, 8.0, 0.5).unwrap();
    let alt = (2f64.ln() - 0.5f64.ln() + 1024f64.ln() + 1023f64.ln() - 0.5 * 64.0 / 2.0).exp();
    assert!(rel(v, alt) < 1e-12);
    assert!(coherence_tail_bound(2048, 8.0, 0.5).unwrap() > v);
    assert!(coherence_tail_bound(1024, 8.0, 1.0).is_err());
}

#[test]
fn bernstein_values_and_simulation() {
    assert!((bernstein_tail(0.0, 0.3).unwrap() - 1.0 / 0.7).abs() < 1e-15);
    let v = bernstein_tail(2.0, 0.5).unwrap();
    assert!((v - 2.0 * (-2f64).exp()).abs() < 1e-15 && (v - 0.2707).abs() < 1e-4);
    assert!(bernstein_tail(-1.0, 0.5).is_err());

    let mut rng = trial_rng(2024, 0, Role::Coefficients);
    let len = 12;
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 0.1).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let draws = 100_000;
    let hits = (0..draws)
        .filter(|_| {
            let s: crate::C64 = a
                .iter()
                .map(|&aj| crate::C64::from_polar(aj, std::f64::consts::TAU * rng.random::<f64>()))
                .sum();
            s.norm() >= 2.0
        })
        .count();
    assert!((hits as f64 / draws as f64) <= v);
}

#[test]
fn params_validation() {
    let mut p = BoundParams::new(10, 2);
    assert!(p.validate().is_ok());
    p.delta = Some(1.0);
    assert!(p.validate().is_err());
    p.delta = None;
    p.sigma = Some(8.0);
    assert!(p.validate().is_err());
    p.sigma = None;
    p.l = vec![1, 0];
    assert!(p.validate().is_err());
}
