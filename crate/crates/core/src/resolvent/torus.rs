//! Trapezoidal torus quadrature with one coordinate integrated exactly.
//!
//! `G(n, lambda) = E_{k'}[ prod_{j >= 1} cos(n_j k_j) g_{n_0}(lambda - sum_{j >= 1} cos k_j) ]`
//! over `k' in [0, pi]^{d-1}` with the normalized measure `dk/pi` per axis.

use num_complex::Complex64;

use super::kernel::zeta_and_scale;

/// Fine and coarse (every other node) trapezoid sums for each site.
///
/// `orders[s]` holds the canonical orders of site `s`; entry 0 is the
/// exactly integrated axis. `n_quad` is the number of full-period nodes per
/// axis and must be a multiple of 4.
pub(crate) fn torus_pass(orders: &[Vec<usize>], lambda: Complex64, d: usize, n_quad: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    debug_assert!(n_quad % 4 == 0);
    let half = n_quad / 2;
    let dims = d - 1;
    let ns = orders.len();
    let max_exact = orders.iter().map(|o| o[0]).max().unwrap_or(0);
    let max_trap = orders.iter().flat_map(|o| o[1..].iter().copied()).max().unwrap_or(0);

    // cos(m * pi * i / half) via the 2*half periodic table
    let period = 2 * half;
    let cos_tab: Vec<f64> = (0..period).map(|j| (std::f64::consts::PI * j as f64 / half as f64).cos()).collect();
    let cos_m = |m: usize, i: usize| cos_tab[(m * i) % period];
    let wf = |i: usize| if i == 0 || i == half { 0.5 / half as f64 } else { 1.0 / half as f64 };
    let wc = |i: usize| if i == 0 || i == half { 1.0 / half as f64 } else { 2.0 / half as f64 };

    let mut fine = vec![Complex64::new(0.0, 0.0); ns];
    let mut coarse = vec![Complex64::new(0.0, 0.0); ns];
    let mut idx = vec![0usize; dims];
    let mut powers = vec![Complex64::new(0.0, 0.0); max_exact + 1];
    let mut trig = vec![vec![0.0; max_trap + 1]; dims];
    loop {
        let mut w = lambda;
        let mut wfine = 1.0;
        let mut wcoarse = 1.0;
        let mut all_even = true;
        for (j, &i) in idx.iter().enumerate() {
            w -= cos_tab[i % period];
            wfine *= wf(i);
            if i % 2 == 0 {
                wcoarse *= wc(i);
            } else {
                all_even = false;
            }
            for (m, t) in trig[j].iter_mut().enumerate() {
                *t = cos_m(m, i);
            }
        }
        let (zeta, scale) = zeta_and_scale(w, w - 1.0, w + 1.0, None);
        powers[0] = scale;
        for m in 1..=max_exact {
            powers[m] = powers[m - 1] * zeta;
        }
        for (s, ord) in orders.iter().enumerate() {
            let mut f = powers[ord[0]];
            for j in 0..dims {
                f *= trig[j][ord[j + 1]];
            }
            fine[s] += f * wfine;
            if all_even {
                coarse[s] += f * wcoarse;
            }
        }
        // odometer over the (half + 1)^dims grid
        let mut j = 0;
        loop {
            if j == dims {
                return (fine, coarse);
            }
            idx[j] += 1;
            if idx[j] <= half {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}
