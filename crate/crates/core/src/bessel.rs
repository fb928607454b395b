//! Integer-order Bessel functions `J_m(t)`, the free propagator kernel
//! `e^{it Delta}(n)`, and empirical checks of the uniform Bessel estimates.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Dimension, LatticeSite};
use crate::numerics::quadrature::gauss_kronrod_vec;
use crate::scalar::{pairwise_sum, Real};

/// Evaluation branch used by [`bessel_j_eval`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BesselMethod {
    Series,
    Recurrence,
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BesselEval<T: Real> {
    pub m: i64,
    pub t: T,
    pub value: T,
    pub method: BesselMethod,
}

/// `J_m(t)` for integer `m` and real `t`.
pub fn bessel_j<T: Real>(m: i64, t: T) -> T {
    bessel_j_eval(m, t).value
}

/// `J_m(t)` together with the branch that produced it.
pub fn bessel_j_eval<T: Real>(m: i64, t: T) -> BesselEval<T> {
    let order = m.unsigned_abs();
    // J_{-m} = (-1)^m J_m and J_m(-t) = (-1)^m J_m(t)
    let mut flip = m < 0 && order % 2 == 1;
    if t < T::zero() && order % 2 == 1 {
        flip = !flip;
    }
    let x = t.abs();
    let (v, method) = j_nonneg(order, x);
    BesselEval { m, t, value: if flip { -v } else { v }, method }
}

fn j_nonneg<T: Real>(m: u64, t: T) -> (T, BesselMethod) {
    if t.is_zero() {
        let v = if m == 0 { T::one() } else { T::zero() };
        return (v, BesselMethod::Series);
    }
    let mf = T::from_u64(m).unwrap();
    if t * t < T::lit(2.0) * (mf + T::one()) {
        return (series(m, t), BesselMethod::Series);
    }
    if t >= T::lit(50.0).max(mf * mf) {
        return (hankel(m, t), BesselMethod::Asymptotic);
    }
    let seq = miller(m as usize, t);
    (seq[m as usize], BesselMethod::Recurrence)
}

fn series<T: Real>(m: u64, t: T) -> T {
    let half = t * T::lit(0.5);
    let mut pre = T::one();
    for k in 1..=m {
        pre *= half / T::from_u64(k).unwrap();
    }
    let q = -half * half;
    let mut term = pre;
    let mut sum = pre;
    let eps = T::epsilon() * T::lit(0.25);
    for k in 1..200u64 {
        term *= q / (T::from_u64(k).unwrap() * T::from_u64(m + k).unwrap());
        sum += term;
        if term.abs() <= eps * sum.abs() {
            break;
        }
    }
    sum
}

fn hankel<T: Real>(m: u64, t: T) -> T {
    let mu = T::lit(4.0) * T::from_u64(m).unwrap().powi(2);
    let eight_t = T::lit(8.0) * t;
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut prev = T::infinity();
    let eps = T::epsilon() * T::lit(0.25);
    for k in 1..200u64 {
        let odd = T::from_u64(2 * k - 1).unwrap();
        term *= (mu - odd * odd) / (T::from_u64(k).unwrap() * eight_t);
        let a = term.abs();
        if a > prev {
            break;
        }
        prev = a;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if a <= eps {
            break;
        }
    }
    let s = T::FRAC_1_SQRT_2();
    let (cphi, sphi) = match m % 4 {
        0 => (s, s),
        1 => (-s, s),
        2 => (-s, -s),
        _ => (s, -s),
    };
    let (st, ct) = t.sin_cos();
    let cos_chi = ct * cphi + st * sphi;
    let sin_chi = st * cphi - ct * sphi;
    (T::lit(2.0) / (T::PI() * t)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Miller backward recurrence for `J_0(t), ..., J_{m_max}(t)`, `t > 0`,
/// normalized by `J_0 + 2 sum_k J_{2k} = 1`.
fn miller<T: Real>(m_max: usize, t: T) -> Vec<T> {
    let tf = t.to_f64().unwrap();
    let top = (m_max as f64).max(tf).ceil() + 20.0 * tf.cbrt() + 50.0;
    let mut n = top as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let big = T::max_value().sqrt().sqrt();
    let mut out = vec![T::zero(); m_max + 1];
    let two_over_t = T::lit(2.0) / t;
    let mut jp1 = T::zero();
    let mut j = T::min_positive_value().sqrt();
    let mut sum = T::zero();
    let mut k = n;
    loop {
        if k <= m_max {
            out[k] = j;
        }
        if k % 2 == 0 {
            sum += if k == 0 { j } else { j + j };
        }
        if k == 0 {
            break;
        }
        let jm1 = two_over_t * T::from_usize(k).unwrap() * j - jp1;
        jp1 = j;
        j = jm1;
        k -= 1;
        if j.abs() > big {
            let inv = T::one() / big;
            j *= inv;
            jp1 *= inv;
            sum *= inv;
            for v in out.iter_mut().skip(k + 1) {
                *v *= inv;
            }
        }
    }
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// `J_0(t), ..., J_{m_max}(t)` from a single backward sweep.
pub fn bessel_j_sequence<T: Real>(m_max: usize, t: T) -> Vec<T> {
    let x = t.abs();
    if x.is_zero() {
        let mut v = vec![T::zero(); m_max + 1];
        v[0] = T::one();
        return v;
    }
    let mut seq = miller(m_max, x);
    if t < T::zero() {
        for (k, v) in seq.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    seq
}

/// Free propagator kernel `e^{it Delta}(n) = i^{|n|} prod_j J_{|n_j|}(t)`.
pub fn propagator_kernel<T: Real>(n: &LatticeSite, t: T) -> Complex<T> {
    let mut prod = T::one();
    for &c in n.coords() {
        prod *= bessel_j(c.abs(), t);
        if prod.is_zero() {
            break;
        }
    }
    let phase = match n.l1().rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    phase * prod
}

/// Grid description for [`check_uniform_bound`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub eps: f64,
    pub m_range: (i64, i64),
    pub t_range: (f64, f64),
    pub n_m: usize,
    pub n_t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub m: i64,
    pub t: f64,
    pub value: f64,
    pub ratio: f64,
}

/// Comparison of an asymptotic regime formula with computed values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeDiagnostic {
    pub points: usize,
    /// Largest `|J - J_pred|` divided by the local envelope of the formula.
    pub max_scaled_error: f64,
    pub worst: Option<GridPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformBoundReport {
    pub grid_spec: GridSpec,
    /// `max |J_m(t)| t^{1/4} (t^{1/3} + |m - t|)^{1/4}` over transition points.
    pub c_emp: f64,
    pub worst_point: GridPoint,
    pub transition_points: usize,
    pub excluded_t_below_one: usize,
    pub exponential_regime: RegimeDiagnostic,
    pub oscillatory_regime: RegimeDiagnostic,
}

/// Leading-order prediction for `xi = m/t > 1`.
pub fn debye_exponential(m: i64, t: f64) -> f64 {
    let xi = m as f64 / t;
    let s = (xi * xi - 1.0).sqrt();
    let expo = -t * (xi * (xi + s).ln() - s);
    expo.exp() / (2.0 * std::f64::consts::PI * t * s).sqrt()
}

/// Leading-order prediction for `xi = m/t < 1`, with its envelope.
pub fn debye_oscillatory(m: i64, t: f64) -> (f64, f64) {
    let xi = m as f64 / t;
    let s = (1.0 - xi * xi).sqrt();
    let env = (2.0 / (std::f64::consts::PI * t * s)).sqrt();
    let phase = t * s - m as f64 * xi.acos() - std::f64::consts::FRAC_PI_4;
    (env * phase.cos(), env)
}

/// Empirical constant of the transition-regime bound
/// `|J_m(t)| <= C t^{-1/4} (t^{1/3} + |m - t|)^{-1/4}` on `|m - t| < eps t`,
/// plus accuracy diagnostics of the two leading-order regime formulas.
pub fn check_uniform_bound(
    eps: f64,
    m_range: (i64, i64),
    t_range: (f64, f64),
    grid: (usize, usize),
) -> Result<UniformBoundReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let (n_m, n_t) = grid;
    if n_m == 0 || n_t == 0 || m_range.0 > m_range.1 || !(t_range.0 <= t_range.1) {
        return Err(Error::Domain("empty Bessel grid".into()));
    }
    let mut ms: Vec<i64> = (0..n_m)
        .map(|i| {
            if n_m == 1 {
                m_range.0
            } else {
                let f = i as f64 / (n_m - 1) as f64;
                (m_range.0 as f64 + f * (m_range.1 - m_range.0) as f64).round() as i64
            }
        })
        .collect();
    ms.dedup();
    let ts: Vec<f64> = (0..n_t)
        .map(|j| if n_t == 1 { t_range.0 } else { t_range.0 + (t_range.1 - t_range.0) * j as f64 / (n_t - 1) as f64 })
        .collect();
    let excluded = ts.iter().filter(|&&t| t < 1.0).count() * ms.len();

    #[derive(Default, Clone, Copy)]
    struct Acc {
        c: Option<GridPoint>,
        trans: usize,
        exp: (usize, Option<GridPoint>),
        osc: (usize, Option<GridPoint>),
    }
    fn better(a: Option<GridPoint>, b: Option<GridPoint>) -> Option<GridPoint> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.ratio > x.ratio { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }

    let per_t: Vec<Acc> = ts
        .par_iter()
        .map(|&t| {
            let mut acc = Acc::default();
            if t < 1.0 {
                return acc;
            }
            let m_hi = ms.iter().map(|m| m.unsigned_abs()).max().unwrap_or(0) as usize;
            let seq = bessel_j_sequence(m_hi, t);
            for &m in &ms {
                let am = m.unsigned_abs() as usize;
                let v = if m < 0 && am % 2 == 1 { -seq[am] } else { seq[am] };
                let mf = m as f64;
                let xi = mf / t;
                if (mf - t).abs() < eps * t {
                    let ratio = v.abs() * t.powf(0.25) * (t.cbrt() + (mf - t).abs()).powf(0.25);
                    acc.trans += 1;
                    acc.c = better(acc.c, Some(GridPoint { m, t, value: v, ratio }));
                } else if xi > 1.0 + eps {
                    let pred = debye_exponential(m, t);
                    let err = if pred > 0.0 { (v - pred).abs() / pred } else { 0.0 };
                    acc.exp.0 += 1;
                    acc.exp.1 = better(acc.exp.1, Some(GridPoint { m, t, value: v, ratio: err }));
                } else if xi >= 0.0 && xi < 1.0 - eps {
                    let (pred, env) = debye_oscillatory(m, t);
                    let err = (v - pred).abs() / env;
                    acc.osc.0 += 1;
                    acc.osc.1 = better(acc.osc.1, Some(GridPoint { m, t, value: v, ratio: err }));
                }
            }
            acc
        })
        .collect();

    let mut total = Acc::default();
    for a in per_t {
        total.c = better(total.c, a.c);
        total.trans += a.trans;
        total.exp = (total.exp.0 + a.exp.0, better(total.exp.1, a.exp.1));
        total.osc = (total.osc.0 + a.osc.0, better(total.osc.1, a.osc.1));
    }
    let worst = total
        .c
        .ok_or_else(|| Error::Domain("grid contains no transition-regime point with t >= 1".into()))?;
    let diag = |(n, w): (usize, Option<GridPoint>)| RegimeDiagnostic {
        points: n,
        max_scaled_error: w.map_or(0.0, |p| p.ratio),
        worst: w,
    };
    Ok(UniformBoundReport {
        grid_spec: GridSpec { eps, m_range, t_range, n_m, n_t },
        c_emp: worst.ratio,
        worst_point: worst,
        transition_points: total.trans,
        excluded_t_below_one: excluded,
        exponential_regime: diag(total.exp),
        oscillatory_regime: diag(total.osc),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaReport {
    pub d: usize,
    pub t_max: f64,
    /// `int_1^T |J_m(t)|^d dt` for `m = 0..=m_max`.
    pub per_m: Vec<f64>,
    pub quad_error: f64,
    /// `I_m(T) - I_m(T/2)` maximized over `m` (monotone-tail Cauchy check).
    pub cauchy_increment: f64,
    pub sup: f64,
    pub argmax_m: usize,
    /// `(2/pi)^{d/2} (2/(d-2)) T^{-(d-2)/2}` bounds `int_T^inf |J_m|^d`.
    pub tail_bound: f64,
    pub converged: bool,
}

/// Estimates `beta = sup_m int_1^inf |J_m(t)|^d dt` from the integrals up to
/// `T` for `m = 0..=m_max` and the analytic tail bound.
pub fn beta_estimate(d: Dimension, m_max: usize, t_max: f64) -> Result<BetaReport> {
    d.require_transient()?;
    if !(t_max >= 10.0) {
        return Err(Error::Domain(format!("T must be at least 10, got {t_max}")));
    }
    let p = d.get() as i32;
    let dim = m_max + 1;
    let integrate = |a: f64, b: f64| {
        // pieces of roughly one half-period, integrated in parallel
        let n_pieces = ((b - a) / 2.0).ceil().max(1.0) as usize;
        let step = (b - a) / n_pieces as f64;
        let parts: Vec<_> = (0..n_pieces)
            .into_par_iter()
            .map(|i| {
                let lo = a + step * i as f64;
                let hi = if i + 1 == n_pieces { b } else { lo + step };
                gauss_kronrod_vec(
                    |t, out| {
                        let seq = bessel_j_sequence(m_max, t);
                        for (o, j) in out.iter_mut().zip(seq) {
                            *o = j.abs().powi(p);
                        }
                    },
                    dim,
                    lo,
                    hi,
                    1,
                    1e-12,
                    1e-10,
                    64,
                )
            })
            .collect();
        let mut vals = vec![0.0; dim];
        let mut err = 0.0f64;
        let mut ok = true;
        for k in 0..dim {
            let col: Vec<f64> = parts.iter().map(|r| r.values[k]).collect();
            vals[k] = pairwise_sum(&col);
            let e: Vec<f64> = parts.iter().map(|r| r.errors[k]).collect();
            err = err.max(pairwise_sum(&e));
        }
        for r in &parts {
            ok &= r.converged;
        }
        (vals, err, ok)
    };
    let (half, e1, ok1) = integrate(1.0, 0.5 * t_max);
    let (rest, e2, ok2) = integrate(0.5 * t_max, t_max);
    let per_m: Vec<f64> = half.iter().zip(&rest).map(|(a, b)| a + b).collect();
    let cauchy = rest.iter().fold(0.0f64, |m, v| m.max(*v));
    let (argmax_m, sup) = per_m
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let df = d.get() as f64;
    let tail = (2.0 / std::f64::consts::PI).powf(df / 2.0) * (2.0 / (df - 2.0)) * t_max.powf(-(df - 2.0) / 2.0);
    Ok(BetaReport {
        d: d.get(),
        t_max,
        per_m,
        quad_error: e1 + e2,
        cauchy_increment: cauchy,
        sup,
        argmax_m,
        tail_bound: tail,
        converged: ok1 && ok2,
    })
}

/// `max_{|n|_1 <= radius} |e^{it Delta}(n)|` over the cube of sites in `d`
/// dimensions (by symmetry only sorted nonnegative coordinates are visited).
pub fn propagator_sup(d: Dimension, radius: i64, t: f64) -> f64 {
    let seq = bessel_j_sequence(radius as usize, t);
    let mut best = 0.0f64;
    let mut coords = vec![0i64; d.get()];
    fn walk(i: usize, left: i64, maxc: i64, coords: &mut Vec<i64>, seq: &[f64], best: &mut f64) {
        if i == coords.len() {
            let v: f64 = coords.iter().map(|&c| seq[c as usize].abs()).product();
            *best = best.max(v);
            return;
        }
        for c in 0..=left.min(maxc) {
            coords[i] = c;
            walk(i + 1, left - c, c, coords, seq, best);
        }
    }
    walk(0, radius, radius, &mut coords, &seq, &mut best);
    best
}

/// Convenience `f64` propagator kernel.
pub fn propagator_kernel_f64(n: &LatticeSite, t: f64) -> Complex64 {
    propagator_kernel(n, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integral_oracle(m: i64, t: f64) -> f64 {
        // trapezoid on the periodic integrand cos(m th - t sin th)
        let n = 2 * (m.unsigned_abs() as usize + t.abs() as usize) + 64;
        let s: f64 = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (m as f64 * th - t * th.sin()).cos()
            })
            .sum();
        s / n as f64
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0, 0.0f64), 1.0);
        assert_eq!(bessel_j(5, 0.0f64), 0.0);
    }

    #[test]
    fn reference_values() {
        let cases: [(i64, f64, f64); 10] = [
            (0, 1.0, 0.7651976865579666),
            (1, 2.0, 0.5767248077568736),
            (5, 10.0, -0.2340615281867936),
            (100, 100.0, 0.09636667329586157),
            (0, 1000.0, 0.024786686152420172),
            (200, 400.0, -0.01958998386955565),
            (3, 0.5, 0.002563729994587244),
            (1000, 900.0, 5.084110085041682e-16),
            (10, 10000.0, 0.007114312383354275),
            (50, 30.0, 2.0581656631563847e-08),
        ];
        for (m, t, want) in cases {
            let got = bessel_j(m, t);
            assert!((got - want).abs() <= 1e-12 * want.abs(), "J_{m}({t}) = {got}, want {want}");
        }
    }

    #[test]
    fn matches_integral_representation() {
        for &(m, t) in &[(0, 3.3), (7, 12.5), (-4, 40.0), (30, 25.0), (2, 180.0), (60, 75.0)] {
            let a = bessel_j(m, t);
            let b = integral_oracle(m, t);
            assert!((a - b).abs() < 1e-13, "m={m} t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn reflection_identities() {
        for &(m, t) in &[(3, 2.0), (4, 7.5), (11, 60.0)] {
            let s = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(bessel_j(-m, t), s * bessel_j(m, t));
            assert_eq!(bessel_j(m, -t), s * bessel_j(m, t));
        }
    }

    #[test]
    fn sequence_agrees_with_pointwise() {
        let seq = bessel_j_sequence(40, 17.3f64);
        for m in [0usize, 1, 16, 17, 18, 40] {
            assert!((seq[m] - bessel_j(m as i64, 17.3)).abs() < 1e-14);
        }
        let neg = bessel_j_sequence(3, -2.0f64);
        assert!((neg[1] + bessel_j(1, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn propagator_small_cases() {
        let d = Dimension::new(3).unwrap();
        assert_eq!(propagator_kernel(&LatticeSite::origin(d), 0.0f64), Complex64::new(1.0, 0.0));
        assert_eq!(propagator_kernel(&LatticeSite::new(vec![1, 0, 0]), 0.0f64).norm(), 0.0);
        let k = propagator_kernel(&LatticeSite::new(vec![-1, 0, 0]), 2.0f64);
        let j = bessel_j(1, 2.0f64) * bessel_j(0, 2.0f64).powi(2);
        assert!((k - Complex64::new(0.0, j)).norm() < 1e-15);
    }

    #[test]
    fn f32_path_is_usable() {
        let v = bessel_j(1, 2.0f32);
        assert!((v - 0.576_724_8).abs() < 1e-6);
    }

    #[test]
    fn debye_predictions_are_sane() {
        let exact = bessel_j(300, 200.0);
        let pred = debye_exponential(300, 200.0);
        assert!((exact / pred - 1.0).abs() < 0.01);
        let (p, env) = debye_oscillatory(50, 400.0);
        assert!((bessel_j(50, 400.0) - p).abs() < 0.01 * env);
    }

    #[test]
    fn bound_rejects_bad_input() {
        assert!(check_uniform_bound(0.0, (1, 10), (1.0, 10.0), (5, 5)).is_err());
        assert!(check_uniform_bound(0.5, (1, 10), (1.0, 10.0), (0, 5)).is_err());
        assert!(beta_estimate(Dimension::new(2).unwrap(), 10, 100.0).is_err());
    }
}
