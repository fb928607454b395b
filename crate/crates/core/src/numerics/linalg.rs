//! Dense complex LU factorization, determinants and `log det(I + M)`.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// LU factorization `P A = L U` with partial pivoting, stored in place.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn factor(mut a: CMatrix) -> Result<Self> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a.get(i, k).norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            if pmax == 0.0 {
                // exactly singular: leave the zero pivot, det = 0
                continue;
            }
            let pivot = a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / pivot;
                a.set(i, k, f);
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let v = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        if a.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite matrix entry in LU".into()));
        }
        Ok(Self { lu: a, perm, swaps })
    }

    pub fn det(&self) -> Complex64 {
        let mut d = Complex64::new(if self.swaps % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        for i in 0..self.lu.n {
            d *= self.lu.get(i, i);
        }
        d
    }

    /// `sum_i log(u_ii)` plus `i pi` per row swap: one (arbitrary) branch of
    /// `log det`.
    pub fn log_det(&self) -> Complex64 {
        let mut s = Complex64::new(0.0, std::f64::consts::PI * (self.swaps % 2) as f64);
        for i in 0..self.lu.n {
            s += self.lu.get(i, i).ln();
        }
        s
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu.get(i, j);
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu.get(i, j);
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }

    /// Maximum absolute row sum of `A^{-1}`.
    pub fn inverse_norm_inf(&self) -> f64 {
        let n = self.lu.n;
        let mut rows = vec![0.0; n];
        for j in 0..n {
            let mut e = vec![Complex64::zero(); n];
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                rows[i] += col[i].norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// `det(I + M)`.
pub fn det_identity_plus(m: &CMatrix) -> Result<Complex64> {
    let mut a = m.clone();
    for i in 0..a.n {
        a.data[i * a.n + i] += 1.0;
    }
    Ok(Lu::factor(a)?.det())
}

/// Below this value of `||M||_inf` the logarithm is taken from the trace
/// series instead of the LU factors.
pub const SERIES_THRESHOLD: f64 = 0.5;

/// `log det(I + M)` on the branch that is continuous in `M` from `M = 0`
/// when `||M||_inf < 1/2` (trace series `sum (-1)^{k+1} Tr M^k / k`, which
/// keeps full relative accuracy for small `M`); otherwise `None`.
pub fn log_det_series(m: &CMatrix) -> Option<Complex64> {
    let q = m.norm_inf();
    if q >= SERIES_THRESHOLD {
        return None;
    }
    if m.n == 1 {
        return Some(ln_1p(m.data[0]));
    }
    let mut acc = Complex64::zero();
    let mut power = m.clone();
    let mut qk = q;
    let mut k = 1usize;
    loop {
        let term = power.trace() / k as f64;
        acc += if k % 2 == 1 { term } else { -term };
        // |Tr M^k| <= n q^k bounds the remainder
        if m.n as f64 * qk / (k as f64 * (1.0 - q)) < 1e-18 * acc.norm().max(1e-300) || k > 200 {
            break;
        }
        power = power.mul(m);
        qk *= q;
        k += 1;
    }
    Some(acc)
}

/// `log(1 + x)` without cancellation for small complex `x`.
pub fn ln_1p(x: Complex64) -> Complex64 {
    let w = Complex64::new(1.0, 0.0) + x;
    if w.norm() == 0.0 {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    if x.norm() > 0.5 {
        return w.ln();
    }
    // log1p trick: log(w) * x / (w - 1) corrects for the rounding of w
    let d = w - 1.0;
    if d.is_zero() {
        return x;
    }
    w.ln() * (x / d)
}
