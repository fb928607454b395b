//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use latspec_core::bessel::{beta_estimate, bessel_j, check_uniform_bound, propagator_kernel_f64};
use latspec_core::conformal::lambda_of_z;
use latspec_core::determinant::{moment_relation_check, Determinant};
use latspec_core::hardy::{boundary_trace, jensen_check, trace_residuals, BoundaryOptions};
use latspec_core::lattice::{brute_force_moments, trace_moments};
use latspec_core::resolvent::{green_boundary, green_time, green_torus, GreenOptions};
use latspec_core::zeros::{coupling_threshold, ZeroFinder};
use latspec_core::{BlaschkeData, Dimension, LatticeSite, Potential, Side};

type Check = Result<String, String>;

fn d3() -> Dimension {
    Dimension::new(3).unwrap()
}

fn random_site(rng: &mut ChaCha8Rng, radius: i64) -> LatticeSite {
    LatticeSite::new((0..3).map(|_| rng.gen_range(-radius..=radius)).collect())
}

fn random_potential(rng: &mut ChaCha8Rng, sites: usize, radius: i64, scale: f64) -> Potential {
    let mut entries = Vec::new();
    while entries.len() < sites {
        let s = random_site(rng, radius);
        if entries.iter().any(|(t, _)| *t == s) {
            continue;
        }
        let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        entries.push((s, v * (scale / v.norm().max(1.0))));
    }
    Potential::from_entries(d3(), entries).unwrap()
}

fn within(elapsed: Duration, limit: f64, what: &str) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit {
        Ok(())
    } else {
        Err(format!("{what} took {:.1} s (limit {limit} s)", elapsed.as_secs_f64()))
    }
}

fn moment_agreement() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let k = rng.gen_range(1..=6);
        let v = random_potential(&mut rng, k, 1, 0.5);
        let m = trace_moments(&v).as_array();
        let bf = brute_force_moments(&v, 4, 5).map_err(|e| e.to_string())?;
        for n in 0..4 {
            let rel = (m[n] - bf[n]).norm() / m[n].norm().max(1e-300);
            if m[n].norm() > 0.0 {
                worst = worst.max(rel);
            } else {
                worst = worst.max(bf[n].norm());
            }
        }
    }
    within(start.elapsed(), 30.0, "moment check")?;
    if worst <= 1e-10 {
        Ok(format!("max relative deviation {worst:.2e} in {:.1} s", start.elapsed().as_secs_f64()))
    } else {
        Err(format!("max relative deviation {worst:.2e}"))
    }
}

fn dual_green() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let im = rng.gen_range(0.5..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let lambda = Complex64::new(rng.gen_range(-5.0..5.0), im);
        let n = random_site(&mut rng, 2);
        let a = green_torus(&n, lambda, d3(), None).map_err(|e| e.to_string())?;
        let b = green_time(&n, lambda, d3(), None, 1e-12).map_err(|e| e.to_string())?;
        worst = worst.max((a.value - b.value).norm());
    }
    within(start.elapsed(), 10.0, "dual oracle")?;
    if worst <= 1e-8 {
        Ok(format!("max |torus - time| = {worst:.2e} in {:.1} s", start.elapsed().as_secs_f64()))
    } else {
        Err(format!("max |torus - time| = {worst:.2e}"))
    }
}

fn watson_edge() -> Check {
    use statrs::function::gamma::gamma;
    let start = Instant::now();
    // Watson's simple-cubic integral in closed form
    let w = 6f64.sqrt() / (32.0 * PI.powi(3)) * gamma(1.0 / 24.0) * gamma(5.0 / 24.0) * gamma(7.0 / 24.0) * gamma(11.0 / 24.0);
    let closed = -w / 3.0;
    let g = green_boundary(&LatticeSite::origin(d3()), 3.0, Side::Plus, d3()).map_err(|e| e.to_string())?;
    within(start.elapsed(), 5.0, "band-edge value")?;
    let e_ref = (g.value.re + 0.5054620197).abs();
    let e_closed = (g.value.re - closed).abs();
    if e_ref <= 1e-5 && e_closed <= 1e-5 && g.value.im.abs() <= 1e-10 && (closed + 0.5054620197).abs() < 1e-9 {
        Ok(format!("G = {:.10}, closed form {closed:.10}, deviation {e_closed:.1e}", g.value.re))
    } else {
        Err(format!("G = {}, closed form {closed}", g.value))
    }
}

fn rank_one() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let v = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let z = Complex64::from_polar(rng.gen_range(0.05..0.9), rng.gen_range(-PI..PI));
        let site = random_site(&mut rng, 3);
        let pot = Potential::from_entries(d3(), vec![(site, v)]).unwrap();
        let det = Determinant::new(&pot, GreenOptions::default()).eval(z).map_err(|e| e.to_string())?;
        let lambda = lambda_of_z(z, d3()).map_err(|e| e.to_string())?;
        let g = latspec_core::resolvent::green(&LatticeSite::origin(d3()), lambda, d3()).map_err(|e| e.to_string())?;
        let scalar = Complex64::new(1.0, 0.0) + v * g.value;
        worst = worst.max((det.value - scalar).norm() / scalar.norm());
    }
    if worst <= 1e-12 {
        Ok(format!("max relative deviation {worst:.2e} over 50 points"))
    } else {
        Err(format!("max relative deviation {worst:.2e}"))
    }
}

fn taylor_moments() -> Check {
    let v = Potential::single_site(d3(), Complex64::new(0.3, 0.0));
    let det = Determinant::new(&v, GreenOptions::default());
    let a = det.taylor_coeffs(0.03, 4, 64).map_err(|e| e.to_string())?;
    let b = det.taylor_coeffs(0.015, 4, 64).map_err(|e| e.to_string())?;
    let agree = a.c.iter().zip(&b.c).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let c1 = (b.c[0] - Complex64::new(0.2, 0.0)).norm();
    let rel = moment_relation_check(&v, &b);
    let (win, lose) = match rel.winner.as_deref() {
        Some("A") => (&rel.residual_a, &rel.residual_b),
        Some("B") => (&rel.residual_b, &rel.residual_a),
        _ => return Err(format!("no unique relation: A {:?}, B {:?}", rel.residual_a, rel.residual_b)),
    };
    let win_max = win[1..].iter().cloned().fold(0.0, f64::max);
    let lose_max = lose[1..].iter().cloned().fold(0.0, f64::max);
    if agree <= 1e-6 && c1 <= 1e-8 && win_max <= 1e-6 && lose_max >= 1e-2 {
        Ok(format!(
            "radii agree to {agree:.1e}, |c1 - 0.2| = {c1:.1e}, winner {} (residual {win_max:.1e}, other {lose_max:.2})",
            rel.winner.as_deref().unwrap()
        ))
    } else {
        Err(format!("agreement {agree:.1e}, c1 error {c1:.1e}, winner residual {win_max:.1e}, other {lose_max:.1e}"))
    }
}

fn scalar_root(v: f64) -> Result<f64, String> {
    let o = LatticeSite::origin(d3());
    let f = |l: f64| -> Result<f64, String> { Ok(1.0 + v * green_torus(&o, Complex64::new(l, 0.0), d3(), None).map_err(|e| e.to_string())?.value.re) };
    let (mut a, mut b) = (3.01, 20.0);
    let fa = f(a)?;
    if fa * f(b)? > 0.0 {
        return Err("scalar oracle not bracketed".into());
    }
    while b - a > 1e-14 * b {
        let m = 0.5 * (a + b);
        if fa * f(m)? <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn eigen_oracle() -> Check {
    let zeros_of = |v: f64| -> Result<Vec<Complex64>, String> {
        let pot = Potential::single_site(d3(), Complex64::new(v, 0.0));
        let det = Determinant::new(&pot, GreenOptions::default());
        let s = ZeroFinder::new(&det).find_zeros(0.999, 1e-10).map_err(|e| e.to_string())?;
        Ok(s.zeros.iter().map(|z| z.lambda).collect())
    };
    let lambdas = zeros_of(3.0)?;
    if lambdas.len() != 1 {
        return Err(format!("expected one zero, found {}", lambdas.len()));
    }
    let root = scalar_root(3.0)?;
    let dev = (lambdas[0] - root).norm();
    let vs = coupling_threshold(d3(), 1).map_err(|e| e.to_string())?;
    let below = zeros_of(0.95 * vs)?.len();
    let above = zeros_of(1.05 * vs)?.len();
    if dev <= 1e-10 && (1.968..=1.989).contains(&vs) && below == 0 && above == 1 {
        Ok(format!("lambda_1 = {:.12} vs oracle {root:.12} ({dev:.1e}); v* = {vs:.6}; zeros at 0.95/1.05 v*: {below}/{above}", lambdas[0].re))
    } else {
        Err(format!("deviation {dev:.1e}, v* = {vs}, zeros at 0.95/1.05 v*: {below}/{above}"))
    }
}

fn jensen_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random = random_potential(&mut rng, 3, 1, 3.0);
    let mut pots = vec![("empty", Potential::zero(d3())), ("single", Potential::single_site(d3(), Complex64::new(3.0, 0.0)))];
    // scale up until every zero sits inside |z| < 0.9
    let mut random_ok = false;
    for _ in 0..10 {
        let det = Determinant::new(&random, GreenOptions::default());
        let s = ZeroFinder::new(&det).find_zeros(0.999, 1e-10).map_err(|e| e.to_string())?;
        if s.zeros.iter().all(|z| z.z.norm() < 0.9) {
            random_ok = true;
            break;
        }
        random = random.scaled(Complex64::new(1.25, 0.0));
    }
    if !random_ok {
        return Err("could not place the random potential's zeros inside |z| < 0.9".into());
    }
    pots.push(("random", random));
    let mut worst = 0.0f64;
    for (_, pot) in &pots {
        let det = Determinant::new(pot, GreenOptions::default());
        let s = ZeroFinder::new(&det).find_zeros(0.999, 1e-10).map_err(|e| e.to_string())?;
        let b = BlaschkeData::from_zeros(&s.zeros, 4).map_err(|e| e.to_string())?;
        for r in [0.5, 0.8, 0.95] {
            worst = worst.max(jensen_check(&det, &b, r).map_err(|e| e.to_string())?.residual);
        }
    }
    if worst <= 1e-6 {
        Ok(format!("max Jensen residual {worst:.2e} over 3 potentials x 3 radii"))
    } else {
        Err(format!("max Jensen residual {worst:.2e}"))
    }
}

fn trace_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let runs = vec![
        (Potential::single_site(d3(), Complex64::new(3.0, 0.0)), 1024),
        (Potential::single_site(d3(), Complex64::new(3.0, 0.0)), 256),
        (Potential::single_site(d3(), Complex64::new(0.5, 2.0)), 256),
        (random_potential(&mut rng, 3, 1, 3.0), 256),
    ];
    let mut min_rho0 = f64::INFINITY;
    let mut sin_res = f64::NAN;
    let mut exact_ok = true;
    for (i, (pot, n_grid)) in runs.iter().enumerate() {
        let det = Determinant::new(pot, GreenOptions::default());
        let s = ZeroFinder::new(&det).find_zeros(0.999, 1e-10).map_err(|e| e.to_string())?;
        let b = BlaschkeData::from_zeros(&s.zeros, 4).map_err(|e| e.to_string())?;
        let bt = boundary_trace(&det, BoundaryOptions { n_grid: *n_grid, ..Default::default() }).map_err(|e| e.to_string())?;
        let r = 0.015f64.min(0.5 * b.r0().unwrap_or(1.0));
        let tc = det.taylor_coeffs(r, 4, 64).map_err(|e| e.to_string())?;
        let tr = trace_residuals(pot, &b, &bt, &tc, 1e-6).map_err(|e| e.to_string())?;
        min_rho0 = min_rho0.min(tr.rho0);
        if i == 0 {
            sin_res = tr.real_form.sin_residual.abs();
        }
        exact_ok &= b.defect() <= -b.b0;
        for n in 1..=4 {
            exact_ok &= b.bn[n - 1].norm() <= b.bn_bound(n);
        }
    }
    if min_rho0 >= -1e-6 && sin_res <= 1e-3 && exact_ok {
        Ok(format!("min rho0 = {min_rho0:.2e}; sin residual at n_grid 1024 = {sin_res:.2e}; exact inequalities hold"))
    } else {
        Err(format!("min rho0 = {min_rho0:.2e}, sin residual {sin_res:.2e}, exact inequalities {exact_ok}"))
    }
}

fn bessel_suite() -> Check {
    let mut refl = 0.0f64;
    let mut rec = 0.0f64;
    for mi in -40..=40 {
        let m = mi * 25;
        for k in 0..60 {
            let t = 0.5 * 2000f64.powf(k as f64 / 59.0);
            let j = bessel_j::<f64>(m, t);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            refl = refl.max((bessel_j::<f64>(-m, t) - sign * j).abs());
            rec = rec.max((bessel_j::<f64>(m - 1, t) + bessel_j::<f64>(m + 1, t) - 2.0 * m as f64 / t * j).abs());
        }
    }
    let unit: f64 = (-60..=60).map(|n| propagator_kernel_f64(&LatticeSite::new(vec![n]), 3.7).norm_sqr()).sum();
    let unit_err = (unit - 1.0).abs();
    let beta = beta_estimate(d3(), 200, 1000.0).map_err(|e| e.to_string())?;
    let uniform = check_uniform_bound(0.5, (1, 200), (1.0, 400.0), (100, 400)).map_err(|e| e.to_string())?;
    let ok = refl <= 1e-10 && rec <= 1e-10 && unit_err <= 1e-12 && beta.converged && beta.sup.is_finite() && beta.tail_bound <= 0.033 && uniform.c_emp.is_finite();
    let msg = format!(
        "reflection {refl:.1e}, recurrence {rec:.1e}, unitarity {unit_err:.1e}, beta sup {:.4} at m = {}, tail {:.4}, C_emp {:.4}",
        beta.sup, beta.argmax_m, beta.tail_bound, uniform.c_emp
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn strip_timestamp(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("timestamp");
    }
    v
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("latspec-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let pot = dir.join("v.json");
    std::fs::write(&pot, r#"{"d": 3, "entries": [{"site": [0,0,0], "re": 2.5, "im": 0.5}, {"site": [1,0,0], "re": -1.0, "im": 0.3}]}"#)
        .map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for threads in [1, 8] {
        let out = dir.join(format!("trace-{threads}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_latspec"))
            .args(["--threads", &threads.to_string(), "trace-check", "--potential"])
            .arg(&pot)
            .args(["--n-grid", "256", "--r-list", "0.5,0.8", "--n-probes", "4", "--seed", "11", "-o"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("trace-check with {threads} thread(s) exited with {status}"));
        }
        let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        reports.push(strip_timestamp(serde_json::from_str(&text).map_err(|e| e.to_string())?));
    }
    let _ = std::fs::remove_dir_all(&dir);
    if reports[0] == reports[1] {
        Ok("reports with 1 and 8 threads are identical apart from the timestamp".into())
    } else {
        Err("reports differ between 1 and 8 threads".into())
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("moment agreement", moment_agreement),
        ("dual Green oracle", dual_green),
        ("Watson band-edge value", watson_edge),
        ("rank-1 determinant identity", rank_one),
        ("Taylor-moment resolution", taylor_moments),
        ("eigenvalue oracle", eigen_oracle),
        ("Jensen identity", jensen_suite),
        ("trace-formula residual suite", trace_suite),
        ("Bessel suite", bessel_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{:.1} s]", i + 1, start.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{:.1} s]", i + 1, start.elapsed().as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
