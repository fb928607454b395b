//! Blaschke products, boundary log-modulus of `D`, Jensen identities, trace
//! formula residuals and outer-function reconstruction.

use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::conformal::SpectralPoint;
use crate::determinant::{Determinant, TaylorCoeffs};
use crate::error::{Error, Result};
use crate::json::{self, Cplx};
use crate::numerics::quadrature::PanelRule;
use crate::scalar::{pairwise_sum, Real};
use crate::zeros::ZeroRecord;
use crate::Potential;

/// Zeros of `D` in the disc with the Taylor data of `log B` at `z = 0`:
/// `log B(z) = B0 - sum_n B_n z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeData<T: Real> {
    pub zeros: Vec<Complex<T>>,
    pub multiplicities: Vec<usize>,
    pub b0: T,
    /// `B_1 .. B_nmax`.
    pub bn: Vec<Complex<T>>,
}

impl<T: Real> BlaschkeData<T> {
    pub fn new(zeros: Vec<(Complex<T>, usize)>, n_max: usize) -> Result<Self> {
        for (z, m) in &zeros {
            let r = z.norm();
            if !(r > T::zero() && r < T::one()) || *m == 0 {
                return Err(Error::Domain(format!("Blaschke zero must satisfy 0 < |z| < 1 with multiplicity >= 1, got |z| = {r}")));
            }
        }
        let (zs, ms): (Vec<_>, Vec<_>) = zeros.into_iter().unzip();
        let logs: Vec<T> = zs.iter().zip(&ms).map(|(z, &m)| z.norm().ln() * T::from_int(m as i64)).collect();
        let b0 = pairwise_sum(&logs);
        let bn = (1..=n_max)
            .map(|n| {
                let terms: Vec<Complex<T>> = zs
                    .iter()
                    .zip(&ms)
                    .map(|(z, &m)| (z.powi(-(n as i32)) - z.conj().powi(n as i32)) * T::from_int(m as i64))
                    .collect();
                pairwise_sum(&terms) / T::from_int(n as i64)
            })
            .collect();
        Ok(Self { zeros: zs, multiplicities: ms, b0, bn })
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn count(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// `min |z_j|`.
    pub fn r0(&self) -> Option<T> {
        self.zeros.iter().map(|z| z.norm()).reduce(T::min)
    }

    /// `sum_j (1 - |z_j|)` with multiplicity.
    pub fn defect(&self) -> T {
        let xs: Vec<T> = self.zeros.iter().zip(&self.multiplicities).map(|(z, &m)| (T::one() - z.norm()) * T::from_int(m as i64)).collect();
        pairwise_sum(&xs)
    }

    /// The bound `(2 / r0^n) sum_j (1 - |z_j|)` on `|B_n|`.
    pub fn bn_bound(&self, n: usize) -> T {
        match self.r0() {
            Some(r0) => T::lit(2.0) * self.defect() / r0.powi(n as i32),
            None => T::zero(),
        }
    }

    /// `prod_j (|z_j| / z_j) (z_j - z) / (1 - conj(z_j) z)`.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        if !(z.norm() < T::one()) {
            return Err(Error::Domain(format!("Blaschke product evaluated outside the open disc, |z| = {}", z.norm())));
        }
        let mut acc = Complex::new(T::one(), T::zero());
        for (zj, &m) in self.zeros.iter().zip(&self.multiplicities) {
            let f = (*zj - z) / (Complex::new(T::one(), T::zero()) - zj.conj() * z) * (Complex::new(zj.norm(), T::zero()) / *zj);
            acc = acc * f.powi(m as i32);
        }
        Ok(acc)
    }
}

impl BlaschkeData<f64> {
    pub fn from_zeros(zeros: &[ZeroRecord], n_max: usize) -> Result<Self> {
        Self::new(zeros.iter().map(|z| (z.z, z.multiplicity)).collect(), n_max)
    }
}

impl Serialize for BlaschkeData<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            zeros: Vec<Cplx>,
            multiplicities: Vec<usize>,
            b0: f64,
            bn: Vec<Cplx>,
        }
        Out {
            zeros: self.zeros.iter().map(|&z| z.into()).collect(),
            multiplicities: self.multiplicities.clone(),
            b0: self.b0,
            bn: self.bn.iter().map(|&z| z.into()).collect(),
        }
        .serialize(s)
    }
}

/// See [`BlaschkeData::eval`].
pub fn blaschke_eval<T: Real>(data: &BlaschkeData<T>, z: Complex<T>) -> Result<Complex<T>> {
    data.eval(z)
}

/// Result of the Jensen identity at an interior radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JensenResult {
    /// Radius actually used (shifted by `1e-6` if a zero sits on the circle).
    pub r: f64,
    /// `(1/2 pi) int log|D(r e^{it})| dt`.
    pub boundary_mean: f64,
    /// `sum_{|z_j| < r} log(r / |z_j|)`.
    pub zero_sum: f64,
    pub residual: f64,
    pub n_points: usize,
}

/// Jensen's formula on `|z| = r`; the trapezoid grid is doubled from 256
/// points until two successive means agree to `1e-12`.
pub fn jensen_check(det: &Determinant, zeros: &BlaschkeData<f64>, r: f64) -> Result<JensenResult> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("Jensen radius must lie in (0, 1), got {r}")));
    }
    let mut r = r;
    if zeros.zeros.iter().any(|z| (z.norm() - r).abs() < 1e-9) {
        r += 1e-6;
    }
    let zero_sum: f64 = pairwise_sum(
        &zeros
            .zeros
            .iter()
            .zip(&zeros.multiplicities)
            .filter(|(z, _)| z.norm() < r)
            .map(|(z, &m)| m as f64 * (r / z.norm()).ln())
            .collect::<Vec<_>>(),
    );
    let sample = |n: usize, offset: usize, stride: usize| -> Result<Vec<f64>> {
        let zs: Vec<Complex64> = (offset..n).step_by(stride).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect();
        Ok(det.eval_many(&zs)?.into_iter().map(|s| s.value.norm().ln()).collect())
    };
    let mut n = 256;
    let mut vals = sample(n, 0, 1)?;
    let mut mean = pairwise_sum(&vals) / n as f64;
    loop {
        let odd = sample(2 * n, 1, 2)?;
        let mut merged = Vec::with_capacity(2 * n);
        for (a, b) in vals.iter().zip(&odd) {
            merged.push(*a);
            merged.push(*b);
        }
        vals = merged;
        n *= 2;
        let next = pairwise_sum(&vals) / n as f64;
        let done = (next - mean).abs() <= 1e-12 || n >= 8192;
        mean = next;
        if done {
            break;
        }
    }
    Ok(JensenResult { r, boundary_mean: mean, zero_sum, residual: (mean - zero_sum).abs(), n_points: n })
}

/// `(1/pi) int e^{-int} log|D(r e^{it})| dt` for `n = 1 .. n_max` by the
/// trapezoid rule on `n_points` angles; equals `-c_n r^n` for `r < r0`.
pub fn interior_fourier(det: &Determinant, r: f64, n_max: usize, n_points: usize) -> Result<Vec<Complex64>> {
    let zs: Vec<Complex64> = (0..n_points).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n_points as f64)).collect();
    let logs: Vec<f64> = det.eval_many(&zs)?.into_iter().map(|s| s.value.norm().ln()).collect();
    Ok((1..=n_max)
        .map(|n| {
            let terms: Vec<Complex64> = logs
                .iter()
                .enumerate()
                .map(|(k, &l)| Complex64::from_polar(l, -2.0 * PI * ((n * k) % n_points) as f64 / n_points as f64))
                .collect();
            pairwise_sum(&terms) * (2.0 / n_points as f64)
        })
        .collect())
}

/// Options for [`boundary_trace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryOptions {
    /// Size of the equispaced output grid; a power of two `>= 256`.
    pub n_grid: usize,
    /// Number of Fourier moments `(1/pi) int e^{-int} log|D| dt`.
    pub n_fourier: usize,
    /// Step of the tanh-sinh pieces next to singular angles.
    pub h: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self { n_grid: 256, n_fourier: 4, h: 1.0 / 8.0 }
    }
}

/// Boundary log-modulus `log|D(e^{it})|` and its circle integrals.
///
/// `log_mod` lives on the equispaced grid `t_k = -pi + 2 pi k / n_grid`. The
/// integrals `I0` and `fourier` use a composite rule whose panels end at the
/// angles where `d cos t` is a critical value `d - 2k` of the symbol (there
/// `log|D|` has algebraic singularities and the plain trapezoid rule only
/// converges algebraically); `i0_trapezoid` is kept for comparison.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryTrace {
    pub d: usize,
    pub n_grid: usize,
    pub t_grid: Vec<f64>,
    pub log_mod: Vec<f64>,
    /// Grid indices whose value was filled from neighbours.
    pub flagged: Vec<usize>,
    /// Flagged quadrature nodes.
    pub flagged_nodes: usize,
    pub low_confidence: bool,
    #[serde(rename = "I0")]
    pub i0: f64,
    pub i0_err: f64,
    pub i0_trapezoid: f64,
    #[serde(with = "json::complex_vec")]
    pub fourier: Vec<Complex64>,
    pub fourier_err: Vec<f64>,
    pub n_nodes: usize,
    #[serde(skip)]
    rule: PanelRule,
    #[serde(skip)]
    node_log_mod: Vec<f64>,
}

/// Singular angles in `[-pi, pi]`: `+-acos((d - 2k) / d)`, `k = 0..d`.
pub fn singular_angles(d: usize) -> Vec<f64> {
    let mut ts = vec![-PI, PI];
    for k in 0..=d {
        let t = ((d as f64 - 2.0 * k as f64) / d as f64).clamp(-1.0, 1.0).acos();
        ts.push(t);
        ts.push(-t);
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    ts
}

fn fill(values: &mut [f64], bad: &[bool]) {
    let n = values.len();
    if bad.iter().all(|&b| b) {
        return;
    }
    let good: Vec<f64> = values.to_vec();
    for i in 0..n {
        if !bad[i] {
            continue;
        }
        let mut acc = Vec::new();
        for dir in [1isize, -1] {
            let mut k = i as isize;
            for _ in 0..n {
                k = (k + dir).rem_euclid(n as isize);
                if !bad[k as usize] {
                    acc.push(good[k as usize]);
                    break;
                }
            }
        }
        values[i] = acc.iter().sum::<f64>() / acc.len() as f64;
    }
}

/// Samples `log|D(e^{it})|` from boundary values of the resolvent.
pub fn boundary_trace(det: &Determinant, opts: BoundaryOptions) -> Result<BoundaryTrace> {
    let n = opts.n_grid;
    if n < 256 || !n.is_power_of_two() {
        return Err(Error::Precondition(format!("n_grid must be a power of two >= 256, got {n}")));
    }
    let d = det.potential().dim();
    d.require_transient()?;
    let t_grid: Vec<f64> = (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect();
    let rule = PanelRule::new(&singular_angles(d.get()), 16.0 * PI / n as f64, opts.h);
    let sample = |ts: &[f64]| -> Result<(Vec<f64>, Vec<bool>)> {
        let out: Vec<Result<(f64, bool)>> = ts
            .par_iter()
            .map(|&t| {
                let s = det.eval_boundary(t)?;
                let l = s.value.norm().ln();
                Ok((l, s.flagged > 0 || !l.is_finite()))
            })
            .collect();
        let out: Vec<(f64, bool)> = out.into_iter().collect::<Result<_>>()?;
        Ok(out.into_iter().unzip())
    };
    let (mut log_mod, bad) = sample(&t_grid)?;
    fill(&mut log_mod, &bad);
    let flagged: Vec<usize> = bad.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    let (mut node_log_mod, node_bad) = sample(&rule.nodes)?;
    fill(&mut node_log_mod, &node_bad);
    let flagged_nodes = node_bad.iter().filter(|&&b| b).count();
    let frac = (flagged.len() + flagged_nodes) as f64 / (n + rule.len()) as f64;

    let (i0f, i0c) = rule.apply(&node_log_mod);
    let mut fourier = Vec::with_capacity(opts.n_fourier);
    let mut fourier_err = Vec::with_capacity(opts.n_fourier);
    for k in 1..=opts.n_fourier {
        let vals: Vec<Complex64> = rule.nodes.iter().zip(&node_log_mod).map(|(&t, &l)| Complex64::from_polar(l, -(k as f64) * t)).collect();
        let (f, c) = rule.apply(&vals);
        fourier.push(f / PI);
        fourier_err.push((f - c).norm() / PI);
    }
    Ok(BoundaryTrace {
        d: d.get(),
        n_grid: n,
        t_grid,
        i0_trapezoid: pairwise_sum(&log_mod) / n as f64,
        log_mod,
        flagged,
        flagged_nodes,
        low_confidence: frac > 0.05,
        i0: i0f / (2.0 * PI),
        i0_err: (i0f - i0c).abs() / (2.0 * PI),
        fourier,
        fourier_err,
        n_nodes: rule.len(),
        rule,
        node_log_mod,
    })
}

impl BoundaryTrace {
    /// `(1/2 pi) int f(t) log|D(e^{it})| dt` on the composite rule.
    pub fn integrate<F: Fn(f64) -> Complex64 + Sync>(&self, f: F) -> (Complex64, f64) {
        let vals: Vec<Complex64> = self.rule.nodes.iter().zip(&self.node_log_mod).map(|(&t, &l)| f(t) * l).collect();
        let (fine, coarse) = self.rule.apply(&vals);
        (fine / (2.0 * PI), (fine - coarse).norm() / (2.0 * PI))
    }

    /// `K_D(z) = (1/2 pi) int (e^{it} + z) / (e^{it} - z) log|D(e^{it})| dt`.
    pub fn outer_log(&self, z: Complex64) -> Complex64 {
        self.integrate(|t| {
            let e = Complex64::from_polar(1.0, t);
            (e + z) / (e - z)
        })
        .0
    }
}

/// The two real forms of the first trace identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealFormIdentities {
    pub sum_im_lambda: f64,
    pub tr_im_v: f64,
    /// `(d / 2 pi) int sin t log|D| dt`.
    pub sin_moment: f64,
    /// `sum Im lambda_j - (Tr Im V - sin_moment)`.
    pub sin_residual: f64,
    pub sum_re_sqrt: f64,
    pub tr_re_v: f64,
    /// `(d / 2 pi) int cos t log|D| dt`.
    pub cos_moment: f64,
    /// `sum Re sqrt(lambda_j^2 - d^2) - (Tr Re V + cos_moment)`.
    pub cos_residual: f64,
}

/// Residuals of the trace identities under the hypothesis `sigma = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceResiduals {
    #[serde(rename = "I0")]
    pub i0: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    /// `I0 + B0`, an estimate of `sigma(T) / 2 pi`.
    pub rho0: f64,
    /// `(-c_n + B_n) - (1/pi) int e^{-int} log|D| dt`, `n = 1..`.
    #[serde(with = "json::complex_vec")]
    pub rho: Vec<Complex64>,
    #[serde(with = "json::complex_vec")]
    pub bn: Vec<Complex64>,
    #[serde(with = "json::complex_vec")]
    pub cn: Vec<Complex64>,
    #[serde(with = "json::complex_vec")]
    pub fourier: Vec<Complex64>,
    /// `sum (1/z_j - conj z_j) - (2/d) Tr V - (1/pi) int e^{-it} log|D| dt`.
    #[serde(with = "json::complex")]
    pub first_residual: Complex64,
    /// `2 B_2 - (4/d^2) Tr V^2 - (1/pi) int e^{-2it} log|D| dt`, the second
    /// identity with half the coefficient on the boundary moment.
    #[serde(with = "json::complex")]
    pub second_residual_halved: Complex64,
    /// `2 B_2 - (4/d^2) Tr V^2 - (2/pi) int e^{-2it} log|D| dt`, the form that
    /// follows from the `n = 2` identity.
    #[serde(with = "json::complex")]
    pub second_residual: Complex64,
    pub real_form: RealFormIdentities,
    /// `|rho_1| / max(rho0, tol)`; a nonnegative `sigma` forces this below 2.
    pub cross_ratio: f64,
    pub cross_bound: f64,
    pub tol: f64,
    pub low_confidence: bool,
    pub notes: Vec<String>,
}

/// Evaluates the trace identities with `D_n` read as the Taylor coefficient
/// `c_n` of `log D = -sum c_n z^n`.
pub fn trace_residuals(v: &Potential, zeros: &BlaschkeData<f64>, bt: &BoundaryTrace, coeffs: &TaylorCoeffs, tol: f64) -> Result<TraceResiduals> {
    let d = v.dim().get() as f64;
    let n = coeffs.c.len().min(bt.fourier.len()).min(zeros.bn.len());
    if n < 2 {
        return Err(Error::Precondition("trace residuals need at least two moments".into()));
    }
    let rho0 = bt.i0 + zeros.b0;
    let rho: Vec<Complex64> = (0..n).map(|k| (-coeffs.c[k] + zeros.bn[k]) - bt.fourier[k]).collect();
    let tr = v.trace();
    let tr2 = v.trace_sq();
    let first_residual = zeros.bn[0] - tr * (2.0 / d) - bt.fourier[0];
    let second_base = zeros.bn[1] * 2.0 - tr2 * (4.0 / (d * d));
    let second_residual_halved = second_base - bt.fourier[1];
    let second_residual = second_base - bt.fourier[1] * 2.0;

    let lambdas: Vec<Complex64> = zeros
        .zeros
        .iter()
        .zip(&zeros.multiplicities)
        .map(|(&z, &m)| crate::conformal::lambda_of_z(z, v.dim()).map(|l| (l, m)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flat_map(|(l, m)| std::iter::repeat(l).take(m))
        .collect();
    let roots: Vec<Complex64> = zeros
        .zeros
        .iter()
        .zip(&zeros.multiplicities)
        .flat_map(|(&z, &m)| std::iter::repeat(z).take(m))
        .map(|z| SpectralPoint::from_z(z, v.dim()).map(|p| p.sqrt_branch()))
        .collect::<Result<_>>()?;
    let sum_im_lambda = pairwise_sum(&lambdas.iter().map(|l| l.im).collect::<Vec<_>>());
    let sum_re_sqrt = pairwise_sum(&roots.iter().map(|s| s.re).collect::<Vec<_>>());
    // int cos t log|D| dt = pi Re F_1, int sin t log|D| dt = -pi Im F_1
    let sin_moment = -d / 2.0 * bt.fourier[0].im;
    let cos_moment = d / 2.0 * bt.fourier[0].re;
    let real_form = RealFormIdentities {
        sum_im_lambda,
        tr_im_v: tr.im,
        sin_moment,
        sin_residual: sum_im_lambda - (tr.im - sin_moment),
        sum_re_sqrt,
        tr_re_v: tr.re,
        cos_moment,
        cos_residual: sum_re_sqrt - (tr.re + cos_moment),
    };
    let cross_ratio = rho[0].norm() / rho0.max(tol);
    let mut notes = vec![
        "D_n is read as the Taylor coefficient c_n of log D(z) = -sum c_n z^n".to_string(),
        "residuals assume sigma = 0, so dmu = log|D(e^{it})| dt; rho_n estimates the sigma-moments".to_string(),
    ];
    if bt.low_confidence {
        notes.push("boundary trace is low-confidence (more than 5% flagged samples)".to_string());
    }
    Ok(TraceResiduals {
        i0: bt.i0,
        b0: zeros.b0,
        rho0,
        rho,
        bn: zeros.bn[..n].to_vec(),
        cn: coeffs.c[..n].to_vec(),
        fourier: bt.fourier[..n].to_vec(),
        first_residual,
        second_residual_halved,
        second_residual,
        real_form,
        cross_ratio,
        cross_bound: 2.0,
        tol,
        low_confidence: bt.low_confidence,
        notes,
    })
}

/// Outcome of the inner-outer reconstruction test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterReport {
    #[serde(with = "json::complex_vec")]
    pub probes: Vec<Complex64>,
    /// `|D(z) - B(z) e^{K_D(z)}| / |D(z)|` per probe.
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// Compares `D` with `B e^{K_D}` at interior probes; the mismatch vanishes
/// exactly when the singular inner factor is trivial.
pub fn outer_reconstruct(det: &Determinant, bt: &BoundaryTrace, zeros: &BlaschkeData<f64>, probes: &[Complex64]) -> Result<OuterReport> {
    if let Some(z) = probes.iter().find(|z| z.norm() > 0.9) {
        return Err(Error::Precondition(format!("outer reconstruction probes need |z| <= 0.9, got |z| = {}", z.norm())));
    }
    let samples = det.eval_many(probes)?;
    let errors: Vec<f64> = probes
        .par_iter()
        .zip(samples.par_iter())
        .map(|(&z, s)| -> Result<f64> {
            let rebuilt = zeros.eval(z)? * bt.outer_log(z).exp();
            Ok((s.value - rebuilt).norm() / s.value.norm())
        })
        .collect::<Result<_>>()?;
    let max_error = errors.iter().fold(0.0f64, |m, &e| m.max(e));
    Ok(OuterReport { probes: probes.to_vec(), errors, max_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Dimension;
    use crate::resolvent::GreenOptions;

    #[test]
    fn blaschke_basics() {
        let e = BlaschkeData::<f64>::new(vec![], 4).unwrap();
        assert_eq!(e.eval(Complex64::new(0.3, 0.4)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(e.b0, 0.0);
        let z1 = Complex64::new(0.3, -0.5);
        let b = BlaschkeData::new(vec![(z1, 1), (Complex64::new(-0.7, 0.1), 2)], 4).unwrap();
        assert!(b.eval(z1).unwrap().norm() < 1e-15);
        assert!(b.b0 < 0.0);
        let near = Complex64::from_polar(1.0 - 1e-6, 2.1);
        assert!((b.eval(near).unwrap().norm() - 1.0).abs() < 1e-4);
        // log B(z) = B0 - B1 z - B2 z^2 - ...
        let z = Complex64::new(1e-3, 2e-3);
        let series = b.b0 - b.bn[0] * z - b.bn[1] * z * z - b.bn[2] * z.powi(3) - b.bn[3] * z.powi(4);
        let direct = b.eval(z).unwrap().ln();
        assert!((series - direct).norm() < 1e-12, "{}", (series - direct).norm());
        for n in 1..=4 {
            assert!(b.bn[n - 1].norm() <= b.bn_bound(n));
        }
    }

    #[test]
    fn blaschke_in_single_precision() {
        let b = BlaschkeData::<f32>::new(vec![(Complex::new(0.5f32, 0.0), 1)], 2).unwrap();
        assert!(b.eval(Complex::new(0.5f32, 0.0)).unwrap().norm() < 1e-6);
        assert!((b.b0 - 0.5f32.ln()).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BlaschkeData::new(vec![(Complex64::new(1.2, 0.0), 1)], 2).is_err());
        let b = BlaschkeData::<f64>::new(vec![], 2).unwrap();
        assert!(b.eval(Complex64::new(1.0, 0.0)).is_err());
        let v = Potential::zero(Dimension::new(3).unwrap());
        let det = Determinant::new(&v, GreenOptions::default());
        assert!(boundary_trace(&det, BoundaryOptions { n_grid: 300, ..Default::default() }).is_err());
        assert!(boundary_trace(&det, BoundaryOptions { n_grid: 128, ..Default::default() }).is_err());
    }

    #[test]
    fn empty_potential_trace_is_trivial() {
        let v = Potential::zero(Dimension::new(3).unwrap());
        let det = Determinant::new(&v, GreenOptions::default());
        let bt = boundary_trace(&det, BoundaryOptions::default()).unwrap();
        assert!(bt.log_mod.iter().all(|&l| l == 0.0));
        assert_eq!(bt.i0, 0.0);
        let b = BlaschkeData::new(vec![], 4).unwrap();
        let j = jensen_check(&det, &b, 0.8).unwrap();
        assert_eq!(j.residual, 0.0);
        let o = outer_reconstruct(&det, &bt, &b, &[Complex64::new(0.2, 0.3)]).unwrap();
        assert_eq!(o.max_error, 0.0);
    }

    #[test]
    fn singular_angles_for_three_dimensions() {
        let ts = singular_angles(3);
        assert_eq!(ts.len(), 7);
        assert!((ts[4] - (1.0f64 / 3.0).acos()).abs() < 1e-15);
    }
}
