use latspec_core::lattice::{brute_force_moments, norm_two_thirds, quasi_norm, trace_moments};
use latspec_core::{Dimension, LatticeSite, Potential};
use num_complex::Complex64;
use proptest::prelude::*;

fn potential(d: usize, entries: &[(Vec<i64>, f64, f64)]) -> Potential {
    let d = Dimension::new(d).unwrap();
    Potential::from_entries(d, entries.iter().map(|(s, re, im)| (LatticeSite::new(s.clone()), Complex64::new(*re, *im)))).unwrap()
}

fn entries(d: usize) -> impl Strategy<Value = Vec<(Vec<i64>, f64, f64)>> {
    prop::collection::btree_map(prop::collection::vec(-1i64..=1, d), (-2.0f64..2.0, -2.0f64..2.0), 1..4)
        .prop_map(|m| m.into_iter().map(|(s, (re, im))| (s, re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moments_match_brute_force(es in entries(2)) {
        let v = potential(2, &es);
        let m = trace_moments(&v).as_array();
        let b = brute_force_moments(&v, 4, 6).unwrap();
        for k in 0..4 {
            prop_assert!((m[k] - b[k]).norm() <= 1e-9 * (1.0 + m[k].norm()), "k={} {} vs {}", k + 1, m[k], b[k]);
        }
    }

    #[test]
    fn moments_are_translation_and_permutation_invariant(es in entries(3), shift in prop::collection::vec(-5i64..5, 3)) {
        let v = potential(3, &es);
        let m = trace_moments(&v).as_array();
        let t = trace_moments(&v.translated(&LatticeSite::new(shift))).as_array();
        let p = trace_moments(&v.permuted(&[2, 0, 1])).as_array();
        for k in 0..4 {
            prop_assert!((m[k] - t[k]).norm() <= 1e-12 * (1.0 + m[k].norm()));
            prop_assert!((m[k] - p[k]).norm() <= 1e-12 * (1.0 + m[k].norm()));
        }
    }

    #[test]
    fn quasi_norm_scales_linearly(es in entries(1), c in 0.1f64..10.0) {
        let v = potential(1, &es);
        let a = norm_two_thirds(&v);
        let b = norm_two_thirds(&v.scaled(Complex64::new(0.0, c)));
        prop_assert!((b - c * a).abs() <= 1e-12 * (1.0 + b));
    }
}

#[test]
fn first_moments_of_a_single_site() {
    let v = potential(3, &[(vec![0, 0, 0], 2.0, 1.0)]);
    let m = trace_moments(&v);
    let val = Complex64::new(2.0, 1.0);
    assert!((m.d1 - val).norm() < 1e-14);
    assert!((m.d2 - val * val).norm() < 1e-14);
    // Delta has zero diagonal, so Tr(H^3 - H0^3) picks up 3 d-hops back and forth per V
    let b = brute_force_moments(&v, 4, 5).unwrap();
    assert!((m.d3 - b[2]).norm() < 1e-12);
    assert!((m.d4 - b[3]).norm() < 1e-12);
}

#[test]
fn brute_force_refuses_a_small_box() {
    let v = potential(1, &[(vec![3], 1.0, 0.0)]);
    assert!(brute_force_moments(&v, 4, 5).is_err());
}

#[test]
fn quasi_norm_of_two_equal_sites() {
    let v = potential(2, &[(vec![0, 0], 1.0, 0.0), (vec![1, 0], 0.0, 1.0)]);
    assert!((norm_two_thirds(&v) - 2f64.powf(1.5)).abs() < 1e-12);
    assert!((quasi_norm(&v, 1.0).unwrap() - 2.0).abs() < 1e-12);
    assert!(quasi_norm(&v, 0.0).is_err());
}

#[test]
fn potential_json_roundtrip() {
    let v = potential(2, &[(vec![0, 1], 1.5, -0.5), (vec![-2, 0], 0.25, 0.0)]);
    let back = Potential::from_json_str(&v.to_json_string()).unwrap();
    assert_eq!(v, back);
    assert!(Potential::from_json_str(r#"{"d": 2, "entries": [{"site": [0], "re": 1.0}]}"#).is_err());
}
