//! Lattice sites, finitely supported potentials, quasi-norms and the exact
//! trace moments `d_n = Tr(H^n - H_0^n)`.
//!
//! The free operator is the averaging Laplacian
//! `(H_0 f)(n) = 1/2 * sum_j (f(n + e_j) + f(n - e_j))`, whose spectrum is
//! `[-d, d]`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lattice dimension `d >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension { got: 0, reason: "dimension must be positive".into() });
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Rejects `d < 3`, where the time integrals of the free propagator
    /// diverge and boundary values of the resolvent blow up at the band edge.
    pub fn require_transient(self) -> Result<()> {
        if self.0 < 3 {
            Err(Error::Dimension {
                got: self.0,
                reason: "requires d >= 3 (integrability of |J_m(t)|^d)".into(),
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn as_real<T: Real>(self) -> T {
        T::from_usize(self.0).unwrap()
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeSite(Vec<i64>);

impl LatticeSite {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn origin(d: Dimension) -> Self {
        Self(vec![0; d.get()])
    }

    /// The unit vector `e_j` (0-based axis).
    pub fn unit(d: Dimension, axis: usize) -> Self {
        let mut c = vec![0; d.get()];
        c[axis] = 1;
        Self(c)
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n| = sum |n_j|`.
    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &LatticeSite) -> LatticeSite {
        LatticeSite(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeSite) -> LatticeSite {
        LatticeSite(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LatticeSite {
        LatticeSite(self.0.iter().map(|c| -c).collect())
    }

    /// Representative of the orbit under signed coordinate permutations:
    /// absolute values sorted in decreasing order.
    ///
    /// The free resolvent and propagator kernels are constant on these orbits.
    pub fn canonical(&self) -> LatticeSite {
        let mut c: Vec<i64> = self.0.iter().map(|x| x.abs()).collect();
        c.sort_unstable_by(|a, b| b.cmp(a));
        LatticeSite(c)
    }

    /// Parse a comma-separated list of integers, e.g. `"1,0,-2"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("site {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(LatticeSite)
    }
}

impl fmt::Display for LatticeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Finitely supported complex potential on `Z^d`.
///
/// Entries are kept in a `BTreeMap`, so support enumeration is lexicographic
/// in the coordinates and identical across runs. Zero amplitudes are never
/// stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<T: Real> {
    d: Dimension,
    entries: BTreeMap<LatticeSite, Complex<T>>,
}

impl<T: Real> Potential<T> {
    pub fn zero(d: Dimension) -> Self {
        Self { d, entries: BTreeMap::new() }
    }

    /// A single-site potential `{0 -> v}`.
    pub fn single_site(d: Dimension, v: Complex<T>) -> Self {
        let mut p = Self::zero(d);
        p.entries.insert(LatticeSite::origin(d), v);
        p.entries.retain(|_, v| !v.is_zero());
        p
    }

    /// Builds a potential from `(site, value)` pairs, rejecting duplicate
    /// sites and coordinate vectors of the wrong length.
    pub fn from_entries<I>(d: Dimension, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticeSite, Complex<T>)>,
    {
        let mut map = BTreeMap::new();
        for (site, v) in entries {
            if site.dim() != d.get() {
                return Err(Error::Parse(format!(
                    "site {site} has {} coordinates, expected {}",
                    site.dim(),
                    d
                )));
            }
            if map.insert(site.clone(), v).is_some() {
                return Err(Error::Parse(format!("duplicate site {site}")));
            }
        }
        map.retain(|_, v: &mut Complex<T>| !v.is_zero());
        Ok(Self { d, entries: map })
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, site: &LatticeSite) -> Complex<T> {
        self.entries.get(site).copied().unwrap_or_else(Complex::zero)
    }

    /// Support sites and amplitudes in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticeSite, &Complex<T>)> {
        self.entries.iter()
    }

    pub fn sites(&self) -> Vec<LatticeSite> {
        self.entries.keys().cloned().collect()
    }

    pub fn values(&self) -> Vec<Complex<T>> {
        self.entries.values().copied().collect()
    }

    /// Largest `|n_j|` over the support (0 for the empty potential).
    pub fn support_radius(&self) -> i64 {
        self.entries.keys().map(LatticeSite::linf).max().unwrap_or(0)
    }

    pub fn is_real(&self) -> bool {
        self.entries.values().all(|v| v.im.is_zero())
    }

    /// `Im V >= 0` entrywise.
    pub fn is_dissipative(&self) -> bool {
        self.entries.values().all(|v| v.im >= T::zero())
    }

    /// Real and nonnegative entrywise.
    pub fn is_nonnegative(&self) -> bool {
        self.entries.values().all(|v| v.im.is_zero() && v.re >= T::zero())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(s, v)| (s.clone(), *v * c))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Self { d: self.d, entries }
    }

    pub fn translated(&self, shift: &LatticeSite) -> Self {
        let entries = self.entries.iter().map(|(s, v)| (s.add(shift), *v)).collect();
        Self { d: self.d, entries }
    }

    /// Relabels coordinates: new coordinate `j` is old coordinate `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(s, v)| (LatticeSite(perm.iter().map(|&p| s.0[p]).collect()), *v))
            .collect();
        Self { d: self.d, entries }
    }

    /// `sum_n V_n`.
    pub fn trace(&self) -> Complex<T> {
        self.entries.values().fold(Complex::zero(), |acc, v| acc + v)
    }

    /// `sum_n V_n^2`.
    pub fn trace_sq(&self) -> Complex<T> {
        self.entries.values().fold(Complex::zero(), |acc, v| acc + v * v)
    }

    /// Factors `V = V1 V2` with `V1 = |V|^{-1/3} V` and `V2 = |V|^{1/3}`,
    /// returned per support site in support order.
    pub fn factorize(&self) -> Vec<(LatticeSite, Complex<T>, T)> {
        let third = T::one() / T::lit(3.0);
        self.entries
            .iter()
            .map(|(s, v)| {
                let a = v.norm();
                let v2 = a.powf(third);
                (s.clone(), *v / v2, v2)
            })
            .collect()
    }
}

/// `(sum_n |V_n|^q)^{1/q}`; for `q = 2/3` this is the size functional that
/// controls every eigenvalue bound.
pub fn quasi_norm<T: Real>(v: &Potential<T>, q: T) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::Domain(format!("quasi-norm exponent must be positive, got {q}")));
    }
    if v.is_empty() {
        return Ok(T::zero());
    }
    let s = v.iter().fold(T::zero(), |acc, (_, x)| acc + x.norm().powf(q));
    Ok(s.powf(T::one() / q))
}

/// `||V||_{2/3}`.
pub fn norm_two_thirds<T: Real>(v: &Potential<T>) -> T {
    quasi_norm(v, T::lit(2.0) / T::lit(3.0)).expect("2/3 is positive")
}

/// The first four trace moments `d_n = Tr(H^n - H_0^n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSet<T> {
    pub d1: Complex<T>,
    pub d2: Complex<T>,
    pub d3: Complex<T>,
    pub d4: Complex<T>,
}

impl<T: Real> MomentSet<T> {
    pub fn as_array(&self) -> [Complex<T>; 4] {
        [self.d1, self.d2, self.d3, self.d4]
    }
}

impl Serialize for MomentSet<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use crate::json::Cplx;
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MomentSet", 4)?;
        st.serialize_field("d1", &Cplx::from(self.d1))?;
        st.serialize_field("d2", &Cplx::from(self.d2))?;
        st.serialize_field("d3", &Cplx::from(self.d3))?;
        st.serialize_field("d4", &Cplx::from(self.d4))?;
        st.end()
    }
}

/// Closed-form trace moments for the hopping amplitude 1/2:
///
/// * `d1 = Tr V`, `d2 = Tr V^2`, `d3 = Tr V^3 + (3d/2) Tr V`,
/// * `d4 = Tr V^4 + 2d Tr V^2 + (1/2) sum_n V_n sum_j (V_{n+e_j} + V_{n-e_j})`.
pub fn trace_moments<T: Real>(v: &Potential<T>) -> MomentSet<T> {
    let d = v.dim();
    let dd: T = d.as_real();
    let mut s1 = Complex::<T>::zero();
    let mut s2 = Complex::<T>::zero();
    let mut s3 = Complex::<T>::zero();
    let mut s4 = Complex::<T>::zero();
    let mut neighbour = Complex::<T>::zero();
    for (site, &x) in v.iter() {
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        let mut around = Complex::<T>::zero();
        for axis in 0..d.get() {
            let e = LatticeSite::unit(d, axis);
            around += v.get(&site.add(&e)) + v.get(&site.sub(&e));
        }
        neighbour += x * around;
    }
    let half = T::lit(0.5);
    MomentSet {
        d1: s1,
        d2: s2,
        d3: s3 + s1 * (T::lit(1.5) * dd),
        d4: s4 + s2 * (T::lit(2.0) * dd) + neighbour * half,
    }
}

/// Dense cube `[-R, R]^d` with mixed-radix indexing.
struct BoxIndex {
    d: usize,
    radius: i64,
    side: usize,
    len: usize,
}

impl BoxIndex {
    fn new(d: usize, radius: i64) -> Self {
        let side = (2 * radius + 1) as usize;
        Self { d, radius, side, len: side.pow(d as u32) }
    }

    fn index(&self, coords: &[i64]) -> usize {
        coords.iter().fold(0usize, |acc, &c| acc * self.side + (c + self.radius) as usize)
    }

    fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.d];
        for slot in c.iter_mut().rev() {
            *slot = (idx % self.side) as i64 - self.radius;
            idx /= self.side;
        }
        c
    }
}

/// Brute-force oracle: `Tr(H^n - H_0^n)` for `n = 1..=n_max` from dense box
/// matrices on `[-box_radius, box_radius]^d`.
///
/// Both operators have finite range, so once the box contains every closed
/// walk of length `n_max` through the support the result is exact up to
/// rounding. The differences `P_k = H^k - H_0^k` are propagated directly,
/// `P_{k+1} = P_k H + H_0^k V`, so no large traces are subtracted.
pub fn brute_force_moments<T: Real>(
    v: &Potential<T>,
    n_max: usize,
    box_radius: i64,
) -> Result<Vec<Complex<T>>> {
    let need = v.support_radius() + n_max as i64;
    if box_radius < need {
        return Err(Error::Truncation(format!(
            "box radius {box_radius} < support radius + n_max = {need}; the trace would be truncated"
        )));
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let d = v.dim().get();
    let bx = BoxIndex::new(d, box_radius);
    let n = bx.len;
    let half = T::lit(0.5);

    // Row-wise nonzeros of H_0 (the only structure the products exploit).
    let mut h0_rows: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
    for i in 0..n {
        let c = bx.coords(i);
        let mut row = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [-1i64, 1] {
                let mut nb = c.clone();
                nb[axis] += step;
                if nb[axis].abs() <= box_radius {
                    row.push((bx.index(&nb), half));
                }
            }
        }
        h0_rows.push(row);
    }
    let mut pot = vec![Complex::<T>::zero(); n];
    for (site, &x) in v.iter() {
        pot[bx.index(site.coords())] = x;
    }

    // free = H_0^k and diff = H^k - H_0^k as dense matrices.
    let zero = Complex::<T>::zero();
    let mut free = vec![zero; n * n];
    for i in 0..n {
        free[i * n + i] = Complex::new(T::one(), T::zero());
    }
    let mut diff = vec![zero; n * n];
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut next_diff = vec![zero; n * n];
        let mut next_free = vec![zero; n * n];
        for i in 0..n {
            let row = i * n;
            for k in 0..n {
                let a = diff[row + k];
                if !a.is_zero() {
                    // diff * (H_0 + V)
                    for &(j, h) in &h0_rows[k] {
                        next_diff[row + j] += a * h;
                    }
                    next_diff[row + k] += a * pot[k];
                }
                let f = free[row + k];
                if !f.is_zero() {
                    for &(j, h) in &h0_rows[k] {
                        next_free[row + j] += f * h;
                    }
                    // H_0^k V
                    next_diff[row + k] += f * pot[k];
                }
            }
        }
        diff = next_diff;
        free = next_free;
        let tr = (0..n).fold(zero, |acc, i| acc + diff[i * n + i]);
        out.push(tr);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    site: Vec<i64>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PotentialRecord {
    d: usize,
    entries: Vec<EntryRecord>,
}

impl Potential<f64> {
    /// Parses `{"d": 3, "entries": [{"site": [0,0,0], "re": 2.0, "im": 0.5}, ...]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let rec: PotentialRecord = serde_json::from_str(s)?;
        let d = Dimension::new(rec.d)?;
        Potential::from_entries(
            d,
            rec.entries
                .into_iter()
                .map(|e| (LatticeSite::new(e.site), Complex::new(e.re, e.im))),
        )
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn to_json_string(&self) -> String {
        let rec = PotentialRecord {
            d: self.d.get(),
            entries: self
                .iter()
                .map(|(s, v)| EntryRecord { site: s.coords().to_vec(), re: v.re, im: v.im })
                .collect(),
        };
        serde_json::to_string_pretty(&rec).expect("potential serializes")
    }
}
