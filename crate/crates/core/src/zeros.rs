//! Zeros of `D` in the unit disc by the argument principle, with Newton
//! refinement. Zeros are the eigenvalues `lambda_j = lambda(z_j)` of `H`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::{lambda_of_z, Side};
use crate::determinant::Determinant;
use crate::error::{Error, Result};
use crate::json;
use crate::lattice::{Dimension, LatticeSite};
use crate::resolvent::{green_boundary, GreenOptions};
use crate::scalar::pairwise_sum;
use crate::Potential;

/// Inner radius of the searched annulus (`D(0) = 1`, so no zeros nearby).
pub const R_INNER: f64 = 1e-3;
/// Maximal subdivision depth before a cell is reported unresolved.
pub const MAX_DEPTH: usize = 24;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Annular sector `{r_lo <= |z| <= r_hi, th_lo <= arg z <= th_hi}`; a span of
/// `2 pi` or more is the full annulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Region {
    pub r_lo: f64,
    pub r_hi: f64,
    pub th_lo: f64,
    pub th_hi: f64,
}

impl Region {
    pub fn annulus(r_lo: f64, r_hi: f64) -> Self {
        Self { r_lo, r_hi, th_lo: 0.0, th_hi: TAU }
    }

    pub fn is_full(&self) -> bool {
        self.th_hi - self.th_lo >= TAU - 1e-15
    }

    /// Linear size used for guards and Newton steps.
    pub fn size(&self) -> f64 {
        let arc = self.r_hi * (self.th_hi - self.th_lo).min(TAU);
        (self.r_hi - self.r_lo).max(arc.min(2.0 * self.r_hi))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if r < self.r_lo || r > self.r_hi {
            return false;
        }
        if self.is_full() {
            return true;
        }
        let mut a = z.arg();
        while a < self.th_lo {
            a += TAU;
        }
        while a > self.th_lo + TAU {
            a -= TAU;
        }
        a <= self.th_hi
    }
}

/// A located zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroRecord {
    #[serde(with = "json::complex")]
    pub z: Complex64,
    pub multiplicity: usize,
    #[serde(with = "json::complex")]
    pub lambda: Complex64,
    /// `|D(z)|` after refinement.
    pub residual: f64,
    /// `|D'| / |D''|`, a size estimate of the Newton basin.
    pub newton_radius: f64,
    /// Re-verified by a winding count on a small disc around `z`.
    pub verified: bool,
}

/// Outcome of a winding-number count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCount {
    pub count: usize,
    pub raw_winding: f64,
    pub samples: usize,
    pub min_abs_d: f64,
    /// Number of deterministic boundary perturbations that were needed.
    pub jitters: usize,
    pub region: Region,
}

#[derive(Clone, Copy, Debug)]
enum Segment {
    Arc { r: f64, th0: f64, th1: f64 },
    Radial { th: f64, r0: f64, r1: f64 },
    Circle { c: Complex64, rho: f64 },
}

impl Segment {
    fn at(&self, s: f64) -> Complex64 {
        match *self {
            Segment::Arc { r, th0, th1 } => Complex64::from_polar(r, th0 + (th1 - th0) * s),
            Segment::Radial { th, r0, r1 } => Complex64::from_polar(r0 + (r1 - r0) * s, th),
            Segment::Circle { c, rho } => c + Complex64::from_polar(rho, TAU * s),
        }
    }

    fn initial_samples(&self) -> usize {
        match *self {
            Segment::Arc { r: _, th0, th1 } => ((64.0 * (th1 - th0).abs() / TAU).ceil() as usize).max(8),
            Segment::Radial { r0, r1, .. } => ((64.0 * (r1 - r0).abs()).ceil() as usize).max(8),
            Segment::Circle { .. } => 64,
        }
    }
}

fn sector_segments(reg: &Region) -> Vec<Segment> {
    if reg.is_full() {
        vec![
            Segment::Arc { r: reg.r_hi, th0: reg.th_lo, th1: reg.th_lo + TAU },
            Segment::Arc { r: reg.r_lo, th0: reg.th_lo + TAU, th1: reg.th_lo },
        ]
    } else {
        vec![
            Segment::Arc { r: reg.r_hi, th0: reg.th_lo, th1: reg.th_hi },
            Segment::Radial { th: reg.th_hi, r0: reg.r_hi, r1: reg.r_lo },
            Segment::Arc { r: reg.r_lo, th0: reg.th_hi, th1: reg.th_lo },
            Segment::Radial { th: reg.th_lo, r0: reg.r_lo, r1: reg.r_hi },
        ]
    }
}

/// Result of integrating `d log D` around a closed contour.
struct ContourData {
    winding: f64,
    /// `(1/2 pi i) oint z^k d log D` for `k = 1, 2`.
    p1: Complex64,
    p2: Complex64,
    samples: usize,
    min_abs: f64,
}

#[derive(Debug)]
enum ContourFailure {
    /// A zero lies too close to the contour.
    NearZero,
    Hard(Error),
}

impl From<Error> for ContourFailure {
    fn from(e: Error) -> Self {
        ContourFailure::Hard(e)
    }
}

/// Zero finder bound to one determinant.
pub struct ZeroFinder<'a> {
    det: &'a Determinant,
}

impl<'a> ZeroFinder<'a> {
    pub fn new(det: &'a Determinant) -> Self {
        Self { det }
    }

    fn contour(&self, segs: &[Segment], scale: f64) -> std::result::Result<ContourData, ContourFailure> {
        let guard = (1e-3f64).min(0.05 * scale);
        let mut total_log = Vec::new();
        let mut m1 = Vec::new();
        let mut m2 = Vec::new();
        let mut samples = 0usize;
        let mut min_abs = f64::INFINITY;
        for seg in segs {
            let n0 = seg.initial_samples();
            let mut ss: Vec<f64> = (0..=n0).map(|k| k as f64 / n0 as f64).collect();
            let pts: Vec<Complex64> = ss.iter().map(|&s| seg.at(s)).collect();
            let mut vals: Vec<Complex64> = self.det.eval_many(&pts)?.into_iter().map(|x| x.value).collect();
            for _round in 0..40 {
                let mut refine = Vec::new();
                for k in 0..ss.len() - 1 {
                    let q = vals[k + 1] / vals[k];
                    let step = q.ln();
                    if !step.re.is_finite() || step.im.abs() > PI / 6.0 || step.re.abs() > 0.5 {
                        if ss[k + 1] - ss[k] > 1e-12 {
                            refine.push(k);
                        }
                    }
                }
                if refine.is_empty() {
                    break;
                }
                let mids: Vec<f64> = refine.iter().map(|&k| 0.5 * (ss[k] + ss[k + 1])).collect();
                let mid_pts: Vec<Complex64> = mids.iter().map(|&s| seg.at(s)).collect();
                let mid_vals: Vec<Complex64> = self.det.eval_many(&mid_pts)?.into_iter().map(|x| x.value).collect();
                let mut s2 = Vec::with_capacity(ss.len() + mids.len());
                let mut v2 = Vec::with_capacity(ss.len() + mids.len());
                let mut r = 0;
                for k in 0..ss.len() {
                    s2.push(ss[k]);
                    v2.push(vals[k]);
                    if r < refine.len() && refine[r] == k {
                        s2.push(mids[r]);
                        v2.push(mid_vals[r]);
                        r += 1;
                    }
                }
                ss = s2;
                vals = v2;
            }
            for k in 0..ss.len() - 1 {
                let (za, zb) = (seg.at(ss[k]), seg.at(ss[k + 1]));
                let step = (vals[k + 1] / vals[k]).ln();
                if !step.re.is_finite() || step.im.abs() > PI / 2.0 {
                    return Err(ContourFailure::NearZero);
                }
                // distance-to-zero estimate |D / D'|
                let deriv = (vals[k + 1] - vals[k]) / (zb - za);
                let dist = vals[k].norm() / deriv.norm().max(1e-300);
                if dist < guard {
                    return Err(ContourFailure::NearZero);
                }
                let zm = 0.5 * (za + zb);
                total_log.push(step);
                m1.push(zm * step);
                m2.push(zm * zm * step);
            }
            samples += ss.len();
            min_abs = vals.iter().map(|v| v.norm()).fold(min_abs, f64::min);
        }
        let two_pi_i = Complex64::new(0.0, TAU);
        let w = pairwise_sum(&total_log) / two_pi_i;
        Ok(ContourData {
            winding: w.re,
            p1: pairwise_sum(&m1) / two_pi_i,
            p2: pairwise_sum(&m2) / two_pi_i,
            samples,
            min_abs,
        })
    }

    fn count_once(&self, reg: &Region) -> std::result::Result<(usize, ContourData), ContourFailure> {
        let data = self.contour(&sector_segments(reg), reg.size())?;
        let n = data.winding.round();
        if (data.winding - n).abs() > 0.05 || n < 0.0 {
            return Err(ContourFailure::NearZero);
        }
        Ok((n as usize, data))
    }

    /// Number of zeros in `region` counted with multiplicity. When a zero
    /// sits too close to the boundary the region is shrunk or expanded by a
    /// deterministic golden-ratio jitter and recounted.
    pub fn count_zeros(&self, region: Region) -> Result<ZeroCount> {
        for attempt in 0..8 {
            let reg = if attempt == 0 { region } else { jitter(&region, attempt) };
            match self.count_once(&reg) {
                Ok((count, data)) => {
                    return Ok(ZeroCount {
                        count,
                        raw_winding: data.winding,
                        samples: data.samples,
                        min_abs_d: data.min_abs,
                        jitters: attempt,
                        region: reg,
                    })
                }
                Err(ContourFailure::Hard(e)) => return Err(e),
                Err(ContourFailure::NearZero) => continue,
            }
        }
        Err(Error::NotConverged(format!("winding count on {region:?} failed after 8 jitters")))
    }

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.det.eval(z)?.value)
    }

    /// Newton iteration `z <- z - m D / D'` with central differences.
    fn newton(&self, z0: Complex64, m: usize, h: f64, tol: f64, cell: &Region) -> Result<Option<(Complex64, f64)>> {
        let mut z = z0;
        let mut dz_last = f64::INFINITY;
        for _ in 0..60 {
            if !(z.norm() < 1.0 && z.norm() > 0.0) {
                return Ok(None);
            }
            let f = self.eval(z)?;
            if f.norm() == 0.0 {
                return Ok(Some((z, 0.0)));
            }
            let fp = self.eval(z + h)?;
            let fm = self.eval(z - h)?;
            let deriv = (fp - fm) / (2.0 * h);
            let step = m as f64 * f / deriv;
            z -= step;
            let sn = step.norm();
            if sn <= 1e-15 * z.norm().max(1e-3) || (sn >= dz_last && sn < 1e-12) {
                break;
            }
            dz_last = sn;
        }
        if !grow(cell, 0.1).contains(z) {
            return Ok(None);
        }
        let res = self.eval(z)?.norm();
        let _ = tol;
        Ok(Some((z, res)))
    }

    fn record(&self, z: Complex64, m: usize, residual: f64, h: f64) -> Result<ZeroRecord> {
        let d = self.det.potential().dim();
        let f0 = self.eval(z)?;
        let fp = self.eval(z + h)?;
        let fm = self.eval(z - h)?;
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        let newton_radius = if d2.norm() > 0.0 { d1.norm() / d2.norm() } else { f64::INFINITY };
        Ok(ZeroRecord { z, multiplicity: m, lambda: lambda_of_z(z, d)?, residual, newton_radius, verified: false })
    }
}

fn grow(reg: &Region, frac: f64) -> Region {
    let dr = frac * (reg.r_hi - reg.r_lo);
    let dth = frac * (reg.th_hi - reg.th_lo);
    if reg.is_full() {
        Region { r_lo: reg.r_lo - dr, r_hi: reg.r_hi + dr, ..*reg }
    } else {
        Region { r_lo: reg.r_lo - dr, r_hi: reg.r_hi + dr, th_lo: reg.th_lo - dth, th_hi: reg.th_hi + dth }
    }
}

fn jitter(reg: &Region, attempt: usize) -> Region {
    // golden-ratio sequence in (-1/2, 1/2)
    let f = ((attempt as f64 * GOLDEN).fract() - 0.5) * 0.02;
    let dr = f * (reg.r_hi - reg.r_lo);
    let dth = f * (reg.th_hi - reg.th_lo).min(TAU);
    Region {
        r_lo: (reg.r_lo + dr).max(1e-6),
        r_hi: (reg.r_hi - dr).min(1.0 - 1e-9),
        th_lo: reg.th_lo + dth,
        th_hi: if reg.is_full() { reg.th_lo + dth + TAU } else { reg.th_hi - dth },
    }
}

/// Splits a cell in four at (jittered) midpoints; the full annulus is
/// split into four angular sectors at an offset angle.
fn split(reg: &Region, attempt: usize) -> Vec<Region> {
    let f = if attempt == 0 { 0.5 } else { 0.5 + 0.3 * ((attempt as f64 * GOLDEN).fract() - 0.5) };
    if reg.is_full() {
        let th0 = reg.th_lo + 0.3 + 0.2 * f;
        return (0..4).map(|k| Region { r_lo: reg.r_lo, r_hi: reg.r_hi, th_lo: th0 + k as f64 * PI / 2.0, th_hi: th0 + (k + 1) as f64 * PI / 2.0 }).collect();
    }
    let rm = reg.r_lo + f * (reg.r_hi - reg.r_lo);
    let tm = reg.th_lo + f * (reg.th_hi - reg.th_lo);
    vec![
        Region { r_lo: reg.r_lo, r_hi: rm, th_lo: reg.th_lo, th_hi: tm },
        Region { r_lo: reg.r_lo, r_hi: rm, th_lo: tm, th_hi: reg.th_hi },
        Region { r_lo: rm, r_hi: reg.r_hi, th_lo: reg.th_lo, th_hi: tm },
        Region { r_lo: rm, r_hi: reg.r_hi, th_lo: tm, th_hi: reg.th_hi },
    ]
}

/// Output of [`find_zeros`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSearch {
    pub zeros: Vec<ZeroRecord>,
    /// Cells where the subdivision hit the depth cap.
    pub unresolved: Vec<Region>,
    pub total_count: usize,
    pub region: Region,
    pub warnings: Vec<String>,
}

impl ZeroSearch {
    pub fn r0(&self) -> Option<f64> {
        self.zeros.first().map(|z| z.z.norm())
    }
}

impl<'a> ZeroFinder<'a> {
    /// Locates all zeros in `{1e-3 <= |z| <= r_outer}`.
    pub fn find_zeros(&self, r_outer: f64, tol: f64) -> Result<ZeroSearch> {
        if !(r_outer > R_INNER && r_outer <= 1.0 - 1e-3 + 1e-15) {
            return Err(Error::Precondition(format!("r_outer must lie in ({R_INNER}, 1 - 1e-3], got {r_outer}")));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        let root = Region::annulus(R_INNER, r_outer);
        let mut warnings = Vec::new();
        let mut zeros = Vec::new();
        let mut unresolved = Vec::new();
        if self.det.support_size() == 0 {
            return Ok(ZeroSearch { zeros, unresolved, total_count: 0, region: root, warnings });
        }
        let top = self.count_zeros(root)?;
        if top.jitters > 0 {
            warnings.push(format!("outer region jittered {} time(s)", top.jitters));
        }
        self.process(top.region, top.count, 0, tol, &mut zeros, &mut unresolved, &mut warnings)?;
        zeros.sort_by(|a: &ZeroRecord, b| a.z.norm().partial_cmp(&b.z.norm()).unwrap().then(a.z.arg().partial_cmp(&b.z.arg()).unwrap()));
        // re-verification on small discs
        let verified: Vec<Result<bool>> = zeros
            .par_iter()
            .enumerate()
            .map(|(i, zr)| {
                let mut rho = 1e-2f64.min(0.5 * (1.0 - zr.z.norm())).min(0.5 * (zr.z.norm() - R_INNER));
                for (j, other) in zeros.iter().enumerate() {
                    if i != j {
                        rho = rho.min(0.4 * (other.z - zr.z).norm());
                    }
                }
                let seg = [Segment::Circle { c: zr.z, rho }];
                match self.contour(&seg, rho) {
                    Ok(data) => Ok((data.winding - zr.multiplicity as f64).abs() < 0.05 && zr.residual <= tol),
                    Err(ContourFailure::NearZero) => Ok(false),
                    Err(ContourFailure::Hard(e)) => Err(e),
                }
            })
            .collect();
        for (z, v) in zeros.iter_mut().zip(verified) {
            z.verified = v?;
            if !z.verified {
                warnings.push(format!("zero at {} failed re-verification", z.z));
            }
        }
        let found: usize = zeros.iter().map(|z| z.multiplicity).sum();
        if found != top.count {
            warnings.push(format!("winding count {} but {} zeros located", top.count, found));
        }
        Ok(ZeroSearch { zeros, unresolved, total_count: top.count, region: top.region, warnings })
    }

    #[allow(clippy::too_many_arguments)]
    fn process(
        &self,
        cell: Region,
        count: usize,
        depth: usize,
        tol: f64,
        zeros: &mut Vec<ZeroRecord>,
        unresolved: &mut Vec<Region>,
        warnings: &mut Vec<String>,
    ) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if depth > MAX_DEPTH {
            unresolved.push(cell);
            return Ok(());
        }
        if !cell.is_full() {
            if let Ok((_, data)) = self.count_once(&cell) {
                let m = count as f64;
                let mean = data.p1 / m;
                let spread = (data.p2 / m - mean * mean).norm().sqrt();
                let h = 1e-6 * cell.size();
                let single = count == 1 || spread < 1e-3 * cell.size();
                if single && cell.size() < 0.5 {
                    let mult = count;
                    if let Some((z, res)) = self.newton(mean, mult, h, tol, &cell)? {
                        let clash = zeros.iter().any(|o: &ZeroRecord| (o.z - z).norm() < 1e-8);
                        if !clash {
                            zeros.push(self.record(z, mult, res, h)?);
                            return Ok(());
                        }
                    }
                }
            }
        }
        for attempt in 0..6 {
            let children = split(&cell, attempt);
            let counts: Vec<Result<ZeroCount>> = children
                .par_iter()
                .map(|c| match self.count_once(c) {
                    Ok((n, data)) => Ok(ZeroCount { count: n, raw_winding: data.winding, samples: data.samples, min_abs_d: data.min_abs, jitters: 0, region: *c }),
                    Err(ContourFailure::NearZero) => Err(Error::NotConverged("near".into())),
                    Err(ContourFailure::Hard(e)) => Err(e),
                })
                .collect();
            if counts.iter().any(|c| matches!(c, Err(Error::NotConverged(_)))) {
                continue;
            }
            let counts: Vec<ZeroCount> = counts.into_iter().collect::<Result<_>>()?;
            let sum: usize = counts.iter().map(|c| c.count).sum();
            if sum != count {
                warnings.push(format!("winding additivity failed at depth {depth}: {sum} != {count}"));
                continue;
            }
            for c in counts {
                self.process(c.region, c.count, depth + 1, tol, zeros, unresolved, warnings)?;
            }
            return Ok(());
        }
        unresolved.push(cell);
        Ok(())
    }
}

/// Zero count in an annular sector.
pub fn count_zeros(v: &Potential, region: Region, opts: GreenOptions) -> Result<ZeroCount> {
    let det = Determinant::new(v, opts);
    if det.support_size() == 0 {
        return Ok(ZeroCount { count: 0, raw_winding: 0.0, samples: 0, min_abs_d: 1.0, jitters: 0, region });
    }
    ZeroFinder::new(&det).count_zeros(region)
}

/// All zeros of `D` in `{1e-3 <= |z| <= r_outer}`, sorted by `|z|`.
pub fn find_zeros(v: &Potential, r_outer: f64, tol: f64, opts: GreenOptions) -> Result<ZeroSearch> {
    let det = Determinant::new(v, opts);
    ZeroFinder::new(&det).find_zeros(r_outer, tol)
}

/// Borderline single-site coupling `v* = 1 / |R_0(+-d)(0)|` at which an
/// eigenvalue detaches from the band edge `+-d`.
pub fn coupling_threshold(d: Dimension, sign: i32) -> Result<f64> {
    d.require_transient()?;
    let edge = if sign >= 0 { d.get() as f64 } else { -(d.get() as f64) };
    let g = green_boundary(&LatticeSite::origin(d), edge, Side::Plus, d)?;
    Ok(1.0 / g.value.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d3() -> Dimension {
        Dimension::new(3).unwrap()
    }

    #[test]
    fn empty_potential_has_no_zeros() {
        let v = Potential::zero(d3());
        assert_eq!(count_zeros(&v, Region::annulus(0.05, 0.98), GreenOptions::default()).unwrap().count, 0);
        assert!(find_zeros(&v, 0.99, 1e-10, GreenOptions::default()).unwrap().zeros.is_empty());
    }

    #[test]
    fn rank_one_counts() {
        let strong = Potential::single_site(d3(), Complex64::new(3.0, 0.0));
        assert_eq!(count_zeros(&strong, Region::annulus(0.05, 0.98), GreenOptions::default()).unwrap().count, 1);
        let weak = Potential::single_site(d3(), Complex64::new(1.0, 0.0));
        assert_eq!(count_zeros(&weak, Region::annulus(0.05, 0.98), GreenOptions::default()).unwrap().count, 0);
    }

    #[test]
    fn region_membership() {
        let r = Region { r_lo: 0.2, r_hi: 0.5, th_lo: -0.5, th_hi: 0.5 };
        assert!(r.contains(Complex64::new(0.3, 0.0)));
        assert!(!r.contains(Complex64::new(-0.3, 0.0)));
        assert!(Region::annulus(0.1, 0.2).contains(Complex64::new(0.0, -0.15)));
    }

    #[test]
    fn threshold_rejects_low_dimension() {
        assert!(coupling_threshold(Dimension::new(2).unwrap(), 1).is_err());
    }
}
