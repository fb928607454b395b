//! Nested double-exponential quadrature for the reduced Green integral.
//!
//! Each of the `d - 1` remaining axes is integrated over `[0, pi]` with a
//! tanh-sinh rule, split where `cos k = Re w - c` for the critical values
//! `c` of the remaining sum. The integrand's square-root singularities then
//! sit at subinterval endpoints, which is what makes the rule usable on the
//! cut itself (`lambda = lambda_0 +- i0`) and arbitrarily close to it.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::zeta_and_scale;
use crate::conformal::Side;
use crate::numerics::quadrature::TanhSinh;

struct Ctx<'a> {
    orders: &'a [Vec<usize>],
    side: Option<Side>,
    dims: usize,
    rule: &'a TanhSinh,
    max_exact: usize,
}

/// Subinterval endpoint; `crit` is the critical value `c` when the endpoint
/// is a breakpoint `cos k = Re w - c`.
#[derive(Clone, Copy)]
struct End {
    k: f64,
    crit: Option<f64>,
}

fn split(w: Complex64, m: usize) -> Vec<End> {
    let mut ends = vec![End { k: 0.0, crit: None }, End { k: PI, crit: None }];
    let mut c = -(m as f64);
    while c <= m as f64 + 0.5 {
        let x = w.re - c;
        if x > -1.0 && x < 1.0 {
            ends.push(End { k: x.acos(), crit: Some(c) });
        }
        c += 2.0;
    }
    ends.sort_by(|a, b| a.k.partial_cmp(&b.k).unwrap());
    ends.dedup_by(|a, b| (a.k - b.k).abs() <= 1e-15);
    ends
}

/// Integrates levels `level..dims`; accumulates `weight * partial[s] * inner`
/// into `fine`, and the `2h`-rule sum into `coarse` at the outermost level.
fn level(
    ctx: &Ctx,
    lvl: usize,
    w: Complex64,
    weight: f64,
    partial: &[f64],
    fine: &mut [Complex64],
    mut coarse: Option<&mut [Complex64]>,
    scratch: &mut [Vec<f64>],
    pow: &mut [Complex64],
) {
    let m = ctx.dims - lvl;
    let ends = split(w, m);
    let innermost = lvl + 1 == ctx.dims;
    let (this_scratch, rest) = scratch.split_first_mut().unwrap();
    for win in ends.windows(2) {
        let (a, b) = (win[0], win[1]);
        let len = b.k - a.k;
        if len <= 0.0 {
            continue;
        }
        for node in &ctx.rule.nodes {
            let (dl, dr) = (len * node.u, len * node.v);
            let near_left = node.u <= 0.5;
            let k = if near_left { a.k + dl } else { b.k - dr };
            let ck = k.cos();
            let wn = weight * node.w * len / PI;
            for (s, ord) in ctx.orders.iter().enumerate() {
                this_scratch[s] = partial[s] * trig(ord[lvl + 1], k);
            }
            if innermost {
                let wnext = w - ck;
                // w' - c from the nearest endpoint without cancellation
                let (end, delta, sign) = if near_left { (a, dl, 1.0) } else { (b, dr, -1.0) };
                let (wm1, wp1) = match end.crit {
                    Some(c) => {
                        let diff = sign * 2.0 * (0.5 * (k + end.k)).sin() * (0.5 * delta).sin();
                        let rel = Complex64::new(diff, w.im);
                        if c > 0.0 {
                            (rel, rel + 2.0)
                        } else {
                            (rel - 2.0, rel)
                        }
                    }
                    None => (wnext - 1.0, wnext + 1.0),
                };
                let (zeta, scale) = zeta_and_scale(wnext, wm1, wp1, ctx.side);
                if !(scale.re.is_finite() && scale.im.is_finite()) {
                    // node underflowed onto the singular point; its weight is nil
                    continue;
                }
                pow[0] = scale;
                for j in 1..=ctx.max_exact {
                    pow[j] = pow[j - 1] * zeta;
                }
                for (s, ord) in ctx.orders.iter().enumerate() {
                    let v = pow[ord[0]] * this_scratch[s];
                    fine[s] += v * wn;
                    if node.coarse {
                        if let Some(c) = coarse.as_deref_mut() {
                            c[s] += v * (2.0 * wn);
                        }
                    }
                }
            } else if node.coarse && coarse.is_some() {
                // evaluate once, feed both rules
                let ns = fine.len();
                let mut tmp = vec![Complex64::new(0.0, 0.0); ns];
                let part = this_scratch.clone();
                level(ctx, lvl + 1, w - ck, 1.0, &part, &mut tmp, None, rest, pow);
                let c = coarse.as_deref_mut().unwrap();
                for s in 0..ns {
                    fine[s] += tmp[s] * wn;
                    c[s] += tmp[s] * (2.0 * wn);
                }
            } else {
                let part = this_scratch.clone();
                level(ctx, lvl + 1, w - ck, wn, &part, fine, None, rest, pow);
            }
        }
    }
}

#[inline]
fn trig(m: usize, k: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => k.cos(),
        _ => (m as f64 * k).cos(),
    }
}

/// Fine (`h`) and coarse (`2h` at the outermost axis) values of the reduced
/// integral for every site; `side` selects the boundary value when `lambda`
/// is real and inside the band.
pub(crate) fn nested_pass(
    orders: &[Vec<usize>],
    lambda: Complex64,
    side: Option<Side>,
    d: usize,
    rule: &TanhSinh,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let ns = orders.len();
    let max_exact = orders.iter().map(|o| o[0]).max().unwrap_or(0);
    let mut pow = vec![Complex64::new(0.0, 0.0); max_exact + 1];
    if d == 1 {
        let (zeta, scale) = zeta_and_scale(lambda, lambda - 1.0, lambda + 1.0, side);
        let v: Vec<Complex64> = orders.iter().map(|o| scale * zeta.powu(o[0] as u32)).collect();
        return (v.clone(), v);
    }
    let ctx = Ctx { orders, side, dims: d - 1, rule, max_exact };
    let mut fine = vec![Complex64::new(0.0, 0.0); ns];
    let mut coarse = vec![Complex64::new(0.0, 0.0); ns];
    let mut scratch = vec![vec![0.0; ns]; d - 1];
    let ones = vec![1.0; ns];
    level(&ctx, 0, lambda, 1.0, &ones, &mut fine, Some(&mut coarse), &mut scratch, &mut pow);
    (fine, coarse)
}
