use latspec_core::determinant::Determinant;
use latspec_core::hardy::{boundary_trace, interior_fourier, jensen_check, outer_reconstruct, singular_angles, trace_residuals, BlaschkeData, BoundaryOptions};
use latspec_core::resolvent::GreenOptions;
use latspec_core::zeros::ZeroFinder;
use latspec_core::{Dimension, LatticeSite, Potential};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dim3() -> Dimension {
    Dimension::new(3).unwrap()
}

fn blaschke(det: &Determinant) -> BlaschkeData<f64> {
    let s = ZeroFinder::new(det).find_zeros(0.999, 1e-10).unwrap();
    BlaschkeData::from_zeros(&s.zeros, 4).unwrap()
}

#[test]
fn blaschke_product_vanishes_at_its_zeros() {
    let zs = vec![(c(0.5, 0.2), 1), (c(-0.3, -0.6), 2)];
    let b = BlaschkeData::new(zs.clone(), 4).unwrap();
    assert_eq!(b.count(), 3);
    for (z, _) in &zs {
        assert!(b.eval(*z).unwrap().norm() < 1e-14);
    }
    for z in [c(0.1, 0.1), c(0.0, -0.9), c(0.7, 0.0)] {
        assert!(b.eval(z).unwrap().norm() < 1.0);
    }
    assert!(b.eval(c(1.0, 0.0)).is_err());
    // log B(z) = B0 - sum B_n z^n near the origin
    let z = c(0.002, -0.004);
    let series = b.b0 - (1..=4).map(|n| b.bn[n - 1] * z.powi(n as i32)).sum::<Complex64>();
    assert!((b.eval(z).unwrap().ln().re - series.re).abs() < 1e-9);
    for n in 1..=4 {
        assert!(b.bn[n - 1].norm() <= b.bn_bound(n) + 1e-15);
    }
    let defect = (1.0 - zs[0].0.norm()) + 2.0 * (1.0 - zs[1].0.norm());
    assert!((b.defect() - defect).abs() < 1e-15);
}

#[test]
fn interior_fourier_coefficients_are_taylor_coefficients() {
    let v = Potential::from_entries(dim3(), [(LatticeSite::origin(dim3()), c(0.8, 0.4)), (LatticeSite::unit(dim3(), 0), c(-0.5, 0.0))]).unwrap();
    let det = Determinant::new(&v, GreenOptions::default());
    assert!(blaschke(&det).is_empty());
    let tc = det.taylor_coeffs(0.02, 4, 64).unwrap();
    for r in [0.3, 0.6] {
        let f = interior_fourier(&det, r, 4, 256).unwrap();
        for n in 1..=4 {
            let expect = -tc.c[n - 1] * r.powi(n as i32);
            assert!((f[n - 1] - expect).norm() < 1e-9, "r={r} n={n}: {} vs {expect}", f[n - 1]);
        }
    }
}

#[test]
fn jensen_formula_with_a_zero() {
    let v = Potential::single_site(dim3(), c(3.0, 0.5));
    let det = Determinant::new(&v, GreenOptions::default());
    let b = blaschke(&det);
    assert_eq!(b.count(), 1);
    for r in [0.5, 0.8] {
        let j = jensen_check(&det, &b, r).unwrap();
        assert!(j.residual < 1e-10, "r={r}: {}", j.residual);
    }
}

#[test]
fn real_potential_boundary_modulus_is_even() {
    let v = Potential::from_entries(dim3(), [(LatticeSite::origin(dim3()), c(1.0, 0.0)), (LatticeSite::new(vec![1, 1, 0]), c(-0.6, 0.0))]).unwrap();
    let det = Determinant::new(&v, GreenOptions::default());
    let bt = boundary_trace(&det, BoundaryOptions::default()).unwrap();
    let n = bt.n_grid;
    for k in 1..n / 2 {
        assert!((bt.log_mod[k] - bt.log_mod[n - k]).abs() < 1e-10, "k={k}");
    }
    for f in &bt.fourier {
        assert!(f.im.abs() < 1e-10);
    }
}

#[test]
fn singular_angles_in_three_dimensions() {
    let a = singular_angles(3);
    for t in [(1.0f64 / 3.0).acos(), (-1.0f64 / 3.0).acos()] {
        assert!(a.iter().any(|&s| (s - t).abs() < 1e-14));
        assert!(a.iter().any(|&s| (s + t).abs() < 1e-14));
    }
}

#[test]
fn trace_identities_hold_for_a_complex_potential() {
    let d = dim3();
    let v = Potential::from_entries(d, [(LatticeSite::origin(d), c(2.5, 1.5)), (LatticeSite::new(vec![0, 2, 0]), c(-1.0, 0.5))]).unwrap();
    let det = Determinant::new(&v, GreenOptions::default());
    let b = blaschke(&det);
    let r0 = b.r0().unwrap_or(1.0);
    let tc = det.taylor_coeffs((0.5 * r0).min(0.015), 4, 64).unwrap();
    let bt = boundary_trace(&det, BoundaryOptions::default()).unwrap();
    let tr = trace_residuals(&v, &b, &bt, &tc, 1e-6).unwrap();
    assert!(tr.rho0.abs() < 1e-8, "rho0 {}", tr.rho0);
    for (n, r) in tr.rho.iter().enumerate() {
        assert!(r.norm() < 1e-8, "rho_{} = {r}", n + 1);
    }
    assert!(tr.second_residual.norm() < 1e-8);
}

#[test]
fn outer_reconstruction_improves_with_grid() {
    let v = Potential::single_site(dim3(), c(2.8, -1.0));
    let det = Determinant::new(&v, GreenOptions::default());
    let b = blaschke(&det);
    let probes = [c(0.4, 0.3), c(-0.7, 0.1), c(0.0, -0.85)];
    let coarse = boundary_trace(&det, BoundaryOptions { n_grid: 256, ..Default::default() }).unwrap();
    let fine = boundary_trace(&det, BoundaryOptions { n_grid: 1024, ..Default::default() }).unwrap();
    let e1 = outer_reconstruct(&det, &coarse, &b, &probes).unwrap().max_error;
    let e2 = outer_reconstruct(&det, &fine, &b, &probes).unwrap().max_error;
    assert!(e1 < 1e-8, "{e1}");
    assert!(e2 <= e1.max(1e-12), "{e2} vs {e1}");
    assert!(outer_reconstruct(&det, &coarse, &b, &[c(0.95, 0.0)]).is_err());
}

#[test]
fn boundary_grid_must_be_a_power_of_two() {
    let det = Determinant::new(&Potential::single_site(dim3(), c(1.0, 0.0)), GreenOptions::default());
    assert!(boundary_trace(&det, BoundaryOptions { n_grid: 300, ..Default::default() }).is_err());
    assert!(boundary_trace(&det, BoundaryOptions { n_grid: 128, ..Default::default() }).is_err());
}
