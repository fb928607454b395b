//! Free resolvent kernel `R_0(lambda)(n) = ((H_0 - lambda)^{-1})(n, 0)` on
//! `Z^d`.
//!
//! Three evaluators share one reduction: the integral over one torus
//! coordinate is done in closed form (see [`kernel::g1`]), leaving a
//! `(d-1)`-dimensional integral that is computed either by a folded
//! trapezoid rule (`torus`, off the cut) or by nested tanh-sinh quadrature
//! (`nested`, near or on the cut). The time-domain representation (`time`)
//! is independent of both and serves as a cross-check.

pub mod kernel;
mod nested;
mod time;
mod torus;

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::conformal::{dist_to_cut, on_cut, Side};
use crate::error::{Error, Result};
use crate::json;
use crate::lattice::{Dimension, LatticeSite};
use crate::numerics::quadrature::TanhSinh;

pub use kernel::g1;

/// Default minimum distance to the cut accepted by the torus rule.
pub const DELTA_MIN: f64 = 1e-3;
/// Largest full-period torus grid per axis.
pub const TORUS_CAP: usize = 512;
/// Default tanh-sinh step of the nested evaluator.
pub const NESTED_H: f64 = 1.0 / 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenMethod {
    Torus,
    Time,
    Nested,
}

/// A resolvent kernel value with its error estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenValue {
    pub n: LatticeSite,
    #[serde(with = "json::complex")]
    pub lambda: Complex64,
    /// Set for boundary values `lambda_0 +- i0`.
    pub side: Option<Side>,
    #[serde(with = "json::complex")]
    pub value: Complex64,
    pub err_estimate: f64,
    pub method: GreenMethod,
    /// Full-period nodes per axis for the torus rule.
    pub n_quad: Option<usize>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Where the kernel is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectralArg {
    Interior(Complex64),
    Boundary { lambda0: f64, side: Side },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenPolicy {
    /// Torus rule when it converges within the cap, nested otherwise.
    Auto,
    Torus,
    Nested,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenOptions {
    pub policy: GreenPolicy,
    /// Fixed torus size (full-period nodes per axis); `None` chooses it from
    /// the distance to the cut and doubles until converged.
    pub n_quad: Option<usize>,
    pub torus_cap: usize,
    /// Relative tolerance of the torus doubling test.
    pub torus_tol: f64,
    pub delta_min: f64,
    pub nested_h: f64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        Self {
            policy: GreenPolicy::Auto,
            n_quad: None,
            torus_cap: TORUS_CAP,
            torus_tol: 1e-12,
            delta_min: DELTA_MIN,
            nested_h: NESTED_H,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    value: Complex64,
    err: f64,
    method: GreenMethod,
    n_quad: Option<usize>,
    converged: bool,
}

type Key = (Vec<i64>, u64, u64, u8);

/// Canonical orders of a site: absolute values sorted decreasingly; entry 0
/// is integrated exactly.
fn orders_of(site: &LatticeSite) -> Vec<usize> {
    site.canonical().coords().iter().map(|&c| c as usize).collect()
}

/// Batched, memoized resolvent kernel evaluator.
///
/// Values depend only on `(canonical site, lambda, side)` and the options:
/// every site carries its own convergence decision, so results do not
/// depend on which other sites shared a batch or on thread interleaving.
pub struct GreenEvaluator {
    d: Dimension,
    opts: GreenOptions,
    rule: TanhSinh,
    cache: RwLock<HashMap<Key, Entry>>,
}

impl GreenEvaluator {
    pub fn new(d: Dimension, opts: GreenOptions) -> Self {
        Self { d, opts, rule: TanhSinh::new(opts.nested_h), cache: RwLock::new(HashMap::new()) }
    }

    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn options(&self) -> &GreenOptions {
        &self.opts
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn value(&self, site: &LatticeSite, at: SpectralArg) -> Result<GreenValue> {
        Ok(self.values(std::slice::from_ref(site), at)?.remove(0))
    }

    /// Kernel values at several sites for one spectral argument.
    pub fn values(&self, sites: &[LatticeSite], at: SpectralArg) -> Result<Vec<GreenValue>> {
        for s in sites {
            if s.dim() != self.d.get() {
                return Err(Error::Dimension { got: s.dim(), reason: format!("site {s} in dimension {}", self.d) });
            }
        }
        let mut warnings = Vec::new();
        // normalize to Im lambda <= 0 (interior) or side = plus (boundary);
        // the other half follows from conjugation symmetry
        let (norm_lambda, side, conj) = match at {
            SpectralArg::Interior(l) => {
                if on_cut(l, self.d) {
                    return Err(Error::BranchCut { re: l.re, im: l.im, d: self.d.get() });
                }
                if l.im > 0.0 {
                    (l.conj(), None, true)
                } else {
                    (Complex64::new(l.re, 0.0 * l.im.abs() - l.im.abs()), None, false)
                }
            }
            SpectralArg::Boundary { lambda0, side } => {
                self.d.require_transient()?;
                let dd = self.d.get() as f64;
                if !(lambda0.abs() <= dd) {
                    return Err(Error::Domain(format!("boundary point {lambda0} outside [-{dd}, {dd}]")));
                }
                if lambda0.abs() == dd {
                    warnings.push("band edge: boundary value is real; quadrature converges more slowly".to_string());
                }
                (Complex64::new(lambda0, 0.0), Some(Side::Plus), side == Side::Minus)
            }
        };
        let lam_key = |l: Complex64| (l.re.to_bits(), if l.im == 0.0 { 0.0f64.to_bits() } else { l.im.to_bits() });
        let (kr, ki) = lam_key(norm_lambda);
        let side_code = if side.is_some() { 1u8 } else { 0u8 };
        let keys: Vec<Key> = sites
            .iter()
            .map(|s| (s.canonical().coords().to_vec(), kr, ki, side_code))
            .collect();

        let mut missing: Vec<Vec<i64>> = {
            let cache = self.cache.read().unwrap();
            keys.iter().filter(|k| !cache.contains_key(*k)).map(|k| k.0.clone()).collect()
        };
        missing.sort();
        missing.dedup();
        if !missing.is_empty() {
            let sites_m: Vec<LatticeSite> = missing.iter().cloned().map(LatticeSite::new).collect();
            let entries = self.compute(&sites_m, norm_lambda, side)?;
            let mut cache = self.cache.write().unwrap();
            for (c, e) in missing.into_iter().zip(entries) {
                cache.insert((c, kr, ki, side_code), e);
            }
        }
        let cache = self.cache.read().unwrap();
        Ok(sites
            .iter()
            .zip(&keys)
            .map(|(s, k)| {
                let e = cache[k];
                let (lambda, side) = match at {
                    SpectralArg::Interior(l) => (l, None),
                    SpectralArg::Boundary { lambda0, side } => (Complex64::new(lambda0, 0.0), Some(side)),
                };
                let mut w = warnings.clone();
                if !e.converged {
                    w.push(format!("{:?} quadrature did not reach its tolerance", e.method).to_lowercase());
                }
                GreenValue {
                    n: s.clone(),
                    lambda,
                    side,
                    value: if conj { e.value.conj() } else { e.value },
                    err_estimate: e.err,
                    method: e.method,
                    n_quad: e.n_quad,
                    converged: e.converged,
                    warnings: w,
                }
            })
            .collect())
    }

    fn compute(&self, sites: &[LatticeSite], lambda: Complex64, side: Option<Side>) -> Result<Vec<Entry>> {
        let orders: Vec<Vec<usize>> = sites.iter().map(orders_of).collect();
        if side.is_some() {
            return Ok(self.nested(&orders, lambda, side));
        }
        let dist = dist_to_cut(lambda, self.d);
        match self.opts.policy {
            GreenPolicy::Nested => Ok(self.nested(&orders, lambda, None)),
            GreenPolicy::Torus => {
                if dist < self.opts.delta_min {
                    return Err(Error::Precondition(format!(
                        "dist(lambda, [-d, d]) = {dist:.3e} < {:.1e}; use the boundary/nested evaluator",
                        self.opts.delta_min
                    )));
                }
                self.torus(&orders, lambda, dist)
            }
            GreenPolicy::Auto => {
                if dist < self.opts.delta_min || self.opts.n_quad.is_none() && self.auto_start(dist) > self.opts.torus_cap {
                    return Ok(self.nested(&orders, lambda, None));
                }
                let mut out = self.torus(&orders, lambda, dist)?;
                let retry: Vec<usize> = (0..out.len()).filter(|&i| !out[i].converged).collect();
                if !retry.is_empty() {
                    let sub: Vec<Vec<usize>> = retry.iter().map(|&i| orders[i].clone()).collect();
                    let nested = self.nested(&sub, lambda, None);
                    for (i, e) in retry.into_iter().zip(nested) {
                        out[i] = e;
                    }
                }
                Ok(out)
            }
        }
    }

    fn auto_start(&self, dist: f64) -> usize {
        let n = (4.0 / dist).ceil().clamp(16.0, 1e9) as usize;
        n.div_ceil(4) * 4
    }

    fn torus(&self, orders: &[Vec<usize>], lambda: Complex64, dist: f64) -> Result<Vec<Entry>> {
        let d = self.d.get();
        if let Some(nq) = self.opts.n_quad {
            if nq < 8 {
                return Err(Error::Domain(format!("n_quad must be at least 8, got {nq}")));
            }
            let nq = nq.div_ceil(4) * 4;
            let (f, c) = torus::torus_pass(orders, lambda, d, nq);
            return Ok(f
                .iter()
                .zip(&c)
                .map(|(&v, &cv)| {
                    let err = (v - cv).norm();
                    Entry { value: v, err, method: GreenMethod::Torus, n_quad: Some(nq), converged: err <= self.tol_for(v) }
                })
                .collect());
        }
        let cap = self.opts.torus_cap.max(8).div_ceil(4) * 4;
        let mut n = self.auto_start(dist).min(cap);
        let mut done: Vec<Option<Entry>> = vec![None; orders.len()];
        loop {
            let pending: Vec<usize> = (0..orders.len()).filter(|&i| done[i].is_none()).collect();
            if pending.is_empty() {
                break;
            }
            let sub: Vec<Vec<usize>> = pending.iter().map(|&i| orders[i].clone()).collect();
            let (f, c) = torus::torus_pass(&sub, lambda, d, n);
            let last = 2 * n > cap;
            for (j, &i) in pending.iter().enumerate() {
                let err = (f[j] - c[j]).norm();
                let ok = err <= self.tol_for(f[j]);
                if ok || last {
                    done[i] = Some(Entry { value: f[j], err, method: GreenMethod::Torus, n_quad: Some(n), converged: ok });
                }
            }
            if last {
                break;
            }
            n *= 2;
        }
        Ok(done.into_iter().map(Option::unwrap).collect())
    }

    fn tol_for(&self, v: Complex64) -> f64 {
        self.opts.torus_tol * v.norm().max(1e-300)
    }

    fn nested(&self, orders: &[Vec<usize>], lambda: Complex64, side: Option<Side>) -> Vec<Entry> {
        let (f, c) = nested::nested_pass(orders, lambda, side, self.d.get(), &self.rule);
        f.iter()
            .zip(&c)
            .map(|(&v, &cv)| {
                let err = (v - cv).norm().max(1e-15 * v.norm());
                Entry {
                    value: v,
                    err,
                    method: GreenMethod::Nested,
                    n_quad: None,
                    converged: err <= 1e-6 * v.norm().max(1.0),
                }
            })
            .collect()
    }
}

fn single(site: &LatticeSite, d: Dimension, opts: GreenOptions, at: SpectralArg) -> Result<GreenValue> {
    GreenEvaluator::new(d, opts).value(site, at)
}

/// Torus-quadrature evaluation; refuses within `DELTA_MIN` of the cut.
pub fn green_torus(n: &LatticeSite, lambda: Complex64, d: Dimension, n_quad: Option<usize>) -> Result<GreenValue> {
    let opts = GreenOptions { policy: GreenPolicy::Torus, n_quad, ..Default::default() };
    single(n, d, opts, SpectralArg::Interior(lambda))
}

/// Nested-quadrature evaluation off the cut (any distance).
pub fn green_nested(n: &LatticeSite, lambda: Complex64, d: Dimension) -> Result<GreenValue> {
    let opts = GreenOptions { policy: GreenPolicy::Nested, ..Default::default() };
    single(n, d, opts, SpectralArg::Interior(lambda))
}

/// Automatic evaluation off the cut.
pub fn green(n: &LatticeSite, lambda: Complex64, d: Dimension) -> Result<GreenValue> {
    single(n, d, GreenOptions::default(), SpectralArg::Interior(lambda))
}

/// Boundary value `R_0(lambda_0 +- i0)(n)` for `d >= 3`.
pub fn green_boundary(n: &LatticeSite, lambda0: f64, side: Side, d: Dimension) -> Result<GreenValue> {
    single(n, d, GreenOptions::default(), SpectralArg::Boundary { lambda0, side })
}

/// Time-domain evaluation `-i int_0^T e^{-it lambda} e^{it Delta}(n) dt`.
///
/// `t_max` defaults to the time where `e^{T Im lambda} = tol`. For
/// `Im lambda > 0` the value is obtained from `conj(lambda)` by symmetry.
pub fn green_time(n: &LatticeSite, lambda: Complex64, d: Dimension, t_max: Option<f64>, tol: f64) -> Result<GreenValue> {
    if n.dim() != d.get() {
        return Err(Error::Dimension { got: n.dim(), reason: format!("site {n} in dimension {d}") });
    }
    if lambda.im.abs() < 1e-6 {
        return Err(Error::Domain(format!("|Im lambda| = {:.2e} < 1e-6: time integral tail is uncontrolled", lambda.im.abs())));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let conj = lambda.im > 0.0;
    let l = if conj { lambda.conj() } else { lambda };
    let t = t_max.unwrap_or_else(|| (tol * l.im.abs()).ln() / l.im);
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time horizon must be positive, got {t}")));
    }
    let (v, qerr, tail, ok) = time::time_integral(&n.canonical(), l, t, tol);
    let err = qerr + tail;
    let mut warnings = Vec::new();
    if !ok {
        warnings.push("time quadrature did not reach its tolerance".to_string());
    }
    Ok(GreenValue {
        n: n.clone(),
        lambda,
        side: None,
        value: if conj { v.conj() } else { v },
        err_estimate: err,
        method: GreenMethod::Time,
        n_quad: None,
        converged: ok && err <= 10.0 * tol,
        warnings,
    })
}
