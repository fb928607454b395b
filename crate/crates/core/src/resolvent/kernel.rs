//! One-dimensional resolvent kernel
//! `g_m(w) = (1/2pi) int e^{-imk} / (cos k - w) dk = -zeta^{|m|} / r`
//! with `r^2 = w^2 - 1`, `zeta = w - r`, `|zeta| < 1`.

use num_complex::Complex64;

use crate::conformal::Side;

/// The root `r` of `r^2 = (w - 1)(w + 1)` selecting `|w - r| < 1`.
///
/// `wm1 = w - 1` and `wp1 = w + 1` are passed separately so callers can
/// supply them without cancellation near `w = +-1`. For real `w` inside
/// `(-1, 1)` the boundary side decides the branch: `w + i0` gives
/// `r = +i sqrt(1 - w^2)`, `w - i0` gives `r = -i sqrt(1 - w^2)`.
#[inline]
pub(crate) fn root(w: Complex64, wm1: Complex64, wp1: Complex64, side: Option<Side>) -> Complex64 {
    if w.im == 0.0 {
        let p = wm1.re * wp1.re;
        if p < 0.0 {
            let s = (-p).sqrt();
            return match side {
                Some(Side::Minus) => Complex64::new(0.0, -s),
                _ => Complex64::new(0.0, s),
            };
        }
        let s = p.sqrt();
        return Complex64::new(if w.re >= 0.0 { s } else { -s }, 0.0);
    }
    let r = (wm1 * wp1).sqrt();
    // |w - r| <= |w + r|  <=>  Re(w conj r) >= 0
    if (w * r.conj()).re >= 0.0 {
        r
    } else {
        -r
    }
}

/// Evaluates `(zeta, -1/r)`, from which `g_m = (-1/r) zeta^{|m|}`.
#[inline]
pub(crate) fn zeta_and_scale(w: Complex64, wm1: Complex64, wp1: Complex64, side: Option<Side>) -> (Complex64, Complex64) {
    let r = root(w, wm1, wp1, side);
    let zeta = (w + r).inv();
    (zeta, -r.inv())
}

/// `g_m(w)` for a single order, `w` off `[-1, 1]` or on it with a side.
pub fn g1(m: i64, w: Complex64, side: Option<Side>) -> Complex64 {
    let (zeta, scale) = zeta_and_scale(w, w - 1.0, w + 1.0, side);
    scale * zeta.powu(m.unsigned_abs() as u32)
}
