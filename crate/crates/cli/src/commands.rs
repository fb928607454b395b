use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use latspec_core::bessel::{beta_estimate, bessel_j, check_uniform_bound};
use latspec_core::bounds::check_bounds;
use latspec_core::conformal::{dist_to_cut, on_cut};
use latspec_core::determinant::{moment_relation_check, Determinant, TaylorCoeffs};
use latspec_core::hardy::{boundary_trace, jensen_check, outer_reconstruct, trace_residuals, BoundaryOptions, BoundaryTrace};
use latspec_core::json::parse_complex;
use latspec_core::resolvent::{green_boundary, green_nested, green_time, green_torus, GreenOptions, GreenValue, DELTA_MIN};
use latspec_core::zeros::{ZeroFinder, ZeroSearch};
use latspec_core::{BlaschkeData, Dimension, Error, LatticeSite, Potential, Side};

use crate::args::*;

/// Failure of a run, mapped to an exit code by the caller.
#[derive(Debug)]
pub enum Fail {
    Validation(String),
    Numerical(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged(_) | Error::Branch { .. } | Error::Truncation(_) => Fail::Numerical(e.to_string()),
            _ => Fail::Validation(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Fail>;

/// Report body plus numerical-quality flags.
pub struct RunOutput {
    pub report: Value,
    pub flags: Vec<String>,
    /// Set for table-producing commands.
    pub csv: Option<String>,
}

fn invalid<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Fail::Validation(msg.into()))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn load_potential(path: Option<&Path>) -> Outcome<Potential> {
    match path {
        Some(p) => Ok(Potential::from_json_file(p)?),
        None => invalid("--potential is required"),
    }
}

fn parse_list(s: &str, what: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Fail::Validation(format!("cannot parse {what} entry {x:?}"))))
        .collect()
}

fn check_tol(tol: f64) -> Outcome<f64> {
    if tol > 0.0 && tol < 1.0 {
        Ok(tol)
    } else {
        invalid(format!("tol must lie in (0, 1), got {tol}"))
    }
}

fn check_r_outer(r: f64) -> Outcome<f64> {
    if r > 0.01 && r <= 0.999 {
        Ok(r)
    } else {
        invalid(format!("r-outer must lie in (0.01, 0.999], got {r}"))
    }
}

fn check_n_grid(n: usize) -> Outcome<usize> {
    if n >= 256 && n.is_power_of_two() {
        Ok(n)
    } else {
        invalid(format!("n-grid must be a power of two >= 256, got {n}"))
    }
}

fn search_flags(s: &ZeroSearch, flags: &mut Vec<String>) {
    flags.extend(s.warnings.iter().cloned());
    if !s.unresolved.is_empty() {
        flags.push(format!("{} unresolved cell(s) at the subdivision depth cap", s.unresolved.len()));
    }
    for z in s.zeros.iter().filter(|z| !z.verified) {
        flags.push(format!("zero at {}{:+}i not verified", z.z.re, z.z.im));
    }
}

pub fn green(a: &GreenArgs) -> Outcome<RunOutput> {
    let d = Dimension::new(a.d.ok_or_else(|| Fail::Validation("--d is required".into()))?)?;
    let lambda = parse_complex(a.lambda.as_deref().ok_or_else(|| Fail::Validation("--lambda is required".into()))?)?;
    let site = match &a.site {
        Some(s) => LatticeSite::parse(s)?,
        None => LatticeSite::origin(d),
    };
    if site.dim() != d.get() {
        return invalid(format!("site has {} coordinates, expected {}", site.dim(), d.get()));
    }
    let method = a.method.unwrap_or(MethodArg::Auto);
    if let Some(nq) = a.n_quad {
        if nq < 8 || nq % 4 != 0 {
            return invalid(format!("n-quad must be a multiple of 4 and >= 8, got {nq}"));
        }
    }
    let tol = check_tol(a.tol.unwrap_or(1e-12))?;
    let value: GreenValue = if let Some(side) = a.side {
        if lambda.im != 0.0 {
            return invalid("--side requires a real lambda on the cut");
        }
        d.require_transient()?;
        if lambda.re.abs() > d.get() as f64 {
            return invalid(format!("boundary value needs lambda in [-{0}, {0}]", d.get()));
        }
        let side = if side == SideArg::Plus { Side::Plus } else { Side::Minus };
        green_boundary(&site, lambda.re, side, d)?
    } else {
        if on_cut(lambda, d) {
            return invalid(format!("lambda = {lambda} lies on the cut [-{0}, {0}]; pass --side for a boundary value", d.get()));
        }
        match method {
            MethodArg::Torus => {
                if dist_to_cut(lambda, d) < DELTA_MIN {
                    return invalid(format!("torus rule needs dist(lambda, cut) >= {DELTA_MIN}"));
                }
                green_torus(&site, lambda, d, a.n_quad)?
            }
            MethodArg::Nested => green_nested(&site, lambda, d)?,
            MethodArg::Time => {
                if lambda.im.abs() < 1e-6 {
                    return invalid("time integral needs |Im lambda| >= 1e-6");
                }
                if let Some(t) = a.t_max {
                    if !(t > 0.0) {
                        return invalid("t-max must be positive");
                    }
                }
                green_time(&site, lambda, d, a.t_max, tol)?
            }
            MethodArg::Auto => {
                let opts = GreenOptions { n_quad: a.n_quad, ..Default::default() };
                latspec_core::resolvent::GreenEvaluator::new(d, opts).value(&site, latspec_core::resolvent::SpectralArg::Interior(lambda))?
            }
        }
    };
    let mut flags = Vec::new();
    if !value.converged {
        flags.push(format!("Green value not converged (err {:.3e})", value.err_estimate));
    }
    Ok(RunOutput { report: to_value(&value), flags, csv: None })
}

pub fn det_eval(a: &DetArgs) -> Outcome<RunOutput> {
    let z = parse_complex(a.z.as_deref().ok_or_else(|| Fail::Validation("--z is required".into()))?)?;
    if z.norm() > 1.0 + 1e-12 {
        return invalid(format!("z must lie in the closed unit disc, |z| = {}", z.norm()));
    }
    let v = load_potential(a.potential.as_deref())?;
    if (z.norm() - 1.0).abs() <= 1e-12 && v.len() > 0 {
        v.dim().require_transient()?;
    }
    let det = Determinant::new(&v, GreenOptions::default());
    let s = det.eval(z)?;
    let mut flags = Vec::new();
    if s.flagged > 0 {
        flags.push(format!("{} Green value(s) not converged", s.flagged));
    }
    Ok(RunOutput { report: to_value(&s), flags, csv: None })
}

pub fn taylor_check(a: &TaylorArgs) -> Outcome<RunOutput> {
    let radii = parse_list(a.radii.as_deref().unwrap_or("0.03,0.015"), "radii")?;
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return invalid("radii must lie in (0, 1)");
    }
    let n_max = a.n_max.unwrap_or(4);
    let m = a.m_samples.unwrap_or(64);
    if n_max == 0 || m < 8 * n_max {
        return invalid(format!("need n-max >= 1 and m-samples >= 8 n-max, got {n_max} and {m}"));
    }
    let v = load_potential(a.potential.as_deref())?;
    let det = Determinant::new(&v, GreenOptions::default());
    let coeffs: Vec<TaylorCoeffs> = radii.iter().map(|&r| det.taylor_coeffs(r, n_max, m)).collect::<Result<_, _>>()?;
    let mut agreement = 0.0f64;
    for c in &coeffs[1..] {
        for (x, y) in c.c.iter().zip(&coeffs[0].c) {
            agreement = agreement.max((x - y).norm());
        }
    }
    let best = coeffs
        .iter()
        .min_by(|x, y| x.r.partial_cmp(&y.r).unwrap())
        .expect("at least one radius");
    let relation = moment_relation_check(&v, best);
    let mut flags = Vec::new();
    if relation.winner.is_none() && relation.residual_b.iter().chain(&relation.residual_a).any(|&r| r > relation.threshold) {
        flags.push("no moment relation identified".to_string());
    }
    Ok(RunOutput {
        report: json!({ "coeffs": to_value(&coeffs), "radius_agreement": agreement, "relation": to_value(&relation) }),
        flags,
        csv: None,
    })
}

fn locate(det: &Determinant, r_outer: f64, tol: f64) -> Outcome<ZeroSearch> {
    Ok(ZeroFinder::new(det).find_zeros(r_outer, tol)?)
}

pub fn eigs(a: &EigsArgs) -> Outcome<RunOutput> {
    let r_outer = check_r_outer(a.r_outer.unwrap_or(0.999))?;
    let tol = check_tol(a.tol.unwrap_or(1e-10))?;
    let v = load_potential(a.potential.as_deref())?;
    let det = Determinant::new(&v, GreenOptions::default());
    let s = locate(&det, r_outer, tol)?;
    let mut flags = Vec::new();
    search_flags(&s, &mut flags);
    Ok(RunOutput { report: to_value(&s), flags, csv: None })
}

/// Zeros, Blaschke data and boundary trace for one potential.
struct Pipeline {
    search: ZeroSearch,
    blaschke: BlaschkeData,
    trace: BoundaryTrace,
}

fn pipeline(det: &Determinant, r_outer: f64, tol: f64, n_grid: usize) -> Outcome<Pipeline> {
    det.potential().dim().require_transient()?;
    let search = locate(det, r_outer, tol)?;
    let blaschke = BlaschkeData::from_zeros(&search.zeros, 4)?;
    let trace = boundary_trace(det, BoundaryOptions { n_grid, ..Default::default() })?;
    Ok(Pipeline { search, blaschke, trace })
}

pub fn trace_check(a: &TraceArgs) -> Outcome<RunOutput> {
    let n_grid = check_n_grid(a.n_grid.unwrap_or(256))?;
    let radii = parse_list(a.r_list.as_deref().unwrap_or("0.5,0.8,0.95"), "r-list")?;
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return invalid("Jensen radii must lie in (0, 1)");
    }
    let r_outer = check_r_outer(a.r_outer.unwrap_or(0.999))?;
    let tol = check_tol(a.tol.unwrap_or(1e-10))?;
    let n_probes = a.n_probes.unwrap_or(8);
    let seed = a.seed.unwrap_or(0);
    let v = load_potential(a.potential.as_deref())?;
    v.dim().require_transient()?;

    let det = Determinant::new(&v, GreenOptions::default());
    let p = pipeline(&det, r_outer, tol, n_grid)?;
    let r0 = p.blaschke.r0().unwrap_or(1.0);
    let r_taylor = 0.015f64.min(0.5 * r0);
    let coeffs = det.taylor_coeffs(r_taylor, 4, 64)?;
    let residuals = trace_residuals(&v, &p.blaschke, &p.trace, &coeffs, 1e-6)?;
    let jensen = radii.iter().map(|&r| jensen_check(&det, &p.blaschke, r)).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes: Vec<Complex64> = (0..n_probes)
        .map(|_| {
            let r = 0.9 * rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
        })
        .collect();
    let outer = outer_reconstruct(&det, &p.trace, &p.blaschke, &probes)?;

    let mut flags = Vec::new();
    search_flags(&p.search, &mut flags);
    if residuals.rho0 < -1e-6 {
        flags.push(format!("rho0 = {:.3e} is below -1e-6", residuals.rho0));
    }
    if p.trace.low_confidence {
        flags.push("boundary trace is low-confidence".to_string());
    }
    Ok(RunOutput {
        report: json!({
            "I0": residuals.i0,
            "B0": residuals.b0,
            "rho0": residuals.rho0,
            "rho": residuals.rho.iter().map(|&r| json!({ "re": r.re, "im": r.im })).collect::<Vec<_>>(),
            "t52": to_value(&residuals.real_form),
            "jensen": to_value(&jensen),
            "outer_error": outer.max_error,
            "outer": to_value(&outer),
            "residuals": to_value(&residuals),
            "taylor": to_value(&coeffs),
            "zeros": to_value(&p.search),
            "blaschke": to_value(&p.blaschke),
            "boundary": to_value(&p.trace),
            "seed": seed,
        }),
        flags,
        csv: None,
    })
}

pub fn bounds_report(a: &BoundsArgs) -> Outcome<RunOutput> {
    let n_grid = check_n_grid(a.n_grid.unwrap_or(256))?;
    let r_outer = check_r_outer(a.r_outer.unwrap_or(0.999))?;
    let tol = check_tol(a.tol.unwrap_or(1e-10))?;
    let v = load_potential(a.potential.as_deref())?;
    v.dim().require_transient()?;
    let det = Determinant::new(&v, GreenOptions::default());
    let p = pipeline(&det, r_outer, tol, n_grid)?;
    let report = check_bounds(&v, &p.blaschke, &p.trace)?;
    let mut flags = Vec::new();
    search_flags(&p.search, &mut flags);
    if !report.all_exact_pass {
        flags.push("an exact inequality failed".to_string());
    }
    if report.rho0 < -1e-6 {
        flags.push(format!("rho0 = {:.3e} is below -1e-6", report.rho0));
    }
    Ok(RunOutput { report: to_value(&report), flags, csv: None })
}

#[derive(Serialize)]
struct IdentityCheck {
    reflection_max: f64,
    recurrence_max: f64,
    unitarity_error: f64,
    points: usize,
}

fn bessel_identities() -> IdentityCheck {
    let ms: Vec<i64> = (-20..=20).map(|k| k * 50).collect();
    let ts: Vec<f64> = (0..40).map(|k| 0.5 * (2000.0f64).powf(k as f64 / 39.0)).collect();
    let (mut refl, mut rec) = (0.0f64, 0.0f64);
    for &m in &ms {
        for &t in &ts {
            let j = bessel_j::<f64>(m, t);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            refl = refl.max((bessel_j::<f64>(-m, t) - sign * j).abs());
            rec = rec.max((bessel_j::<f64>(m - 1, t) + bessel_j::<f64>(m + 1, t) - 2.0 * m as f64 / t * j).abs());
        }
    }
    let s: f64 = (-60..=60).map(|n| bessel_j::<f64>(n, 3.7).powi(2)).sum();
    IdentityCheck { reflection_max: refl, recurrence_max: rec, unitarity_error: (s - 1.0).abs(), points: ms.len() * ts.len() }
}

pub fn bessel_check(a: &BesselArgs) -> Outcome<RunOutput> {
    let eps = a.eps.unwrap_or(0.5);
    let m_range = (a.m_min.unwrap_or(1), a.m_max.unwrap_or(200));
    let t_range = (a.t_min.unwrap_or(1.0), a.t_max.unwrap_or(400.0));
    let grid = (a.n_m.unwrap_or(100), a.n_t.unwrap_or(400));
    let d = Dimension::new(a.d.unwrap_or(3))?;
    let beta_m = a.beta_m_max.unwrap_or(200);
    let beta_t = a.beta_t.unwrap_or(1000.0);
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if m_range.0 > m_range.1 || !(t_range.0 <= t_range.1) || grid.0 == 0 || grid.1 == 0 {
        return invalid("empty Bessel grid");
    }
    d.require_transient()?;
    if !(beta_t >= 10.0) {
        return invalid(format!("beta-t must be >= 10, got {beta_t}"));
    }
    let uniform = check_uniform_bound(eps, m_range, t_range, grid)?;
    let beta = beta_estimate(d, beta_m, beta_t)?;
    let ids = bessel_identities();
    let mut flags = Vec::new();
    if !beta.converged {
        flags.push("beta integrals not converged".to_string());
    }
    if ids.reflection_max > 1e-10 || ids.recurrence_max > 1e-10 {
        flags.push("Bessel identity residual above 1e-10".to_string());
    }
    Ok(RunOutput {
        report: json!({
            "C_emp": uniform.c_emp,
            "beta_sup": beta.sup,
            "worst_points": [to_value(&uniform.worst_point), uniform.exponential_regime.worst.map(|w| to_value(&w)), uniform.oscillatory_regime.worst.map(|w| to_value(&w))],
            "grid_spec": to_value(&uniform.grid_spec),
            "uniform": to_value(&uniform),
            "beta": to_value(&beta),
            "identities": to_value(&ids),
        }),
        flags,
        csv: None,
    })
}

pub fn sweep(a: &SweepArgs) -> Outcome<RunOutput> {
    let t_min = a.t_min.unwrap_or(0.1);
    let t_max = a.t_max.unwrap_or(1.0);
    let steps = a.steps.unwrap_or(10);
    if !(t_min > 0.0 && t_min <= t_max) || steps == 0 {
        return invalid("sweep needs 0 < t-min <= t-max and steps >= 1");
    }
    let r_outer = check_r_outer(a.r_outer.unwrap_or(0.999))?;
    let tol = check_tol(a.tol.unwrap_or(1e-10))?;
    let n_grid = a.n_grid.map(check_n_grid).transpose()?;
    let shape = load_potential(a.potential.as_deref())?;
    if n_grid.is_some() {
        shape.dim().require_transient()?;
    }
    let mut flags = Vec::new();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "coupling", "n_zeros", "r0", "lambda1_re", "lambda1_im", "sum_im_lambda", "minus_b0", "defect", "defect_pass", "norm_two_thirds", "i0",
        "rho0", "c_emp_log",
    ])
    .expect("csv header");
    for k in 0..steps {
        let t = if steps == 1 { t_min } else { t_min + (t_max - t_min) * k as f64 / (steps - 1) as f64 };
        let v = shape.scaled(Complex64::new(t, 0.0));
        let det = Determinant::new(&v, GreenOptions::default());
        let s = locate(&det, r_outer, tol)?;
        search_flags(&s, &mut flags);
        let b = BlaschkeData::from_zeros(&s.zeros, 1)?;
        let norm = latspec_core::lattice::norm_two_thirds(&v);
        let lambdas: Vec<Complex64> = s.zeros.iter().map(|z| z.lambda).collect();
        let first = lambdas.first().copied();
        let sum_im: f64 = s.zeros.iter().map(|z| z.lambda.im * z.multiplicity as f64).sum::<f64>() + 0.0;
        let (i0, rho0, c_emp) = match n_grid {
            Some(n) => {
                let bt = boundary_trace(&det, BoundaryOptions { n_grid: n, ..Default::default() })?;
                let rho0 = bt.i0 + b.b0;
                (Some(bt.i0), Some(rho0), (norm > 0.0).then(|| bt.i0 / norm))
            }
            None => (None, None, None),
        };
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
        w.write_record([
            format!("{t:.17e}"),
            s.total_count.to_string(),
            opt(b.r0()),
            opt(first.map(|l| l.re)),
            opt(first.map(|l| l.im)),
            format!("{sum_im:.17e}"),
            format!("{:.17e}", 0.0 - b.b0),
            format!("{:.17e}", b.defect()),
            (b.defect() <= -b.b0).to_string(),
            format!("{norm:.17e}"),
            opt(i0),
            opt(rho0),
            opt(c_emp),
        ])
        .expect("csv row");
    }
    let csv = String::from_utf8(w.into_inner().expect("csv buffer")).expect("csv is utf-8");
    Ok(RunOutput { report: Value::Null, flags, csv: Some(csv) })
}
