use latspec_core::bessel::{beta_estimate, bessel_j, bessel_j_sequence, check_uniform_bound, propagator_kernel_f64, propagator_sup};
use latspec_core::{Dimension, LatticeSite};
use statrs::function::gamma::gamma;

fn series_j(m: i64, t: f64) -> f64 {
    let mut term = (t / 2.0).powi(m as i32) / gamma(m as f64 + 1.0);
    let mut sum = term;
    for k in 1..80 {
        term *= -(t * t / 4.0) / (k as f64 * (k as f64 + m as f64));
        sum += term;
    }
    sum
}

#[test]
fn agrees_with_power_series_for_small_argument() {
    for m in 0..12 {
        for &t in &[0.1, 0.7, 2.5, 6.0] {
            let a = bessel_j::<f64>(m, t);
            let b = series_j(m, t);
            assert!((a - b).abs() < 1e-13, "m={m} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn reflection_and_recurrence() {
    for &t in &[0.3, 5.0, 40.0, 250.0] {
        let seq = bessel_j_sequence::<f64>(60, t);
        for m in 1..59 {
            let r = seq[m - 1] + seq[m + 1] - 2.0 * m as f64 / t * seq[m];
            assert!(r.abs() < 1e-12, "t={t} m={m} residual {r}");
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(bessel_j::<f64>(-(m as i64), t), sign * bessel_j::<f64>(m as i64, t));
        }
    }
}

#[test]
fn landau_bound_holds_on_a_grid() {
    for m in 0..50 {
        for k in 1..200 {
            let t = 0.5 * k as f64;
            assert!(bessel_j::<f64>(m, t).abs() <= 0.7858 * t.powf(-1.0 / 3.0) + 1e-14, "m={m} t={t}");
        }
    }
}

#[test]
fn f32_agrees_with_f64() {
    for m in 0..20 {
        let a = bessel_j::<f32>(m, 13.5) as f64;
        let b = bessel_j::<f64>(m, 13.5);
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn propagator_is_unitary_in_one_dimension() {
    let t = 7.0;
    let total: f64 = (-60..=60).map(|n| propagator_kernel_f64(&LatticeSite::new(vec![n]), t).norm_sqr()).sum();
    assert!((total - 1.0).abs() < 1e-13);
}

#[test]
fn propagator_sup_decays_like_t_to_minus_d_over_three() {
    for d in 1..=2 {
        let dim = Dimension::new(d).unwrap();
        for &t in &[5.0, 20.0, 60.0] {
            let s = propagator_sup(dim, (t as i64 + 20) * d as i64, t);
            assert!(s <= 0.7858f64.powi(d as i32) * t.powf(-(d as f64) / 3.0) + 1e-14, "d={d} t={t} sup={s}");
        }
        let early = propagator_sup(dim, 40, 2.0);
        let late = propagator_sup(dim, 140, 100.0);
        assert!(late < early);
    }
}

#[test]
fn uniform_bound_constant_is_moderate() {
    let r = check_uniform_bound(0.5, (1, 60), (1.0, 120.0), (30, 120)).unwrap();
    assert!(r.c_emp.is_finite() && r.c_emp > 0.3 && r.c_emp < 1.5, "{}", r.c_emp);
    assert!(r.transition_points > 0);
    assert!(check_uniform_bound(0.5, (10, 1), (1.0, 2.0), (5, 5)).is_err());
}

#[test]
fn beta_integrals_are_bounded_in_three_dimensions() {
    let r = beta_estimate(Dimension::new(3).unwrap(), 40, 200.0).unwrap();
    assert_eq!(r.per_m.len(), 41);
    assert!(r.sup < 1.0);
    assert!(r.per_m.iter().all(|&x| x >= 0.0));
}
