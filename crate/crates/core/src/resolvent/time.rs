//! Time-domain representation `R_0(lambda) = -i int_0^inf e^{-it lambda} e^{it Delta} dt`
//! for `Im lambda < 0`.

use num_complex::Complex64;

use crate::bessel::propagator_kernel;
use crate::lattice::LatticeSite;
use crate::numerics::quadrature::gauss_kronrod_vec;

/// Returns `(value, quadrature error, tail bound)` for `Im lambda < 0`.
pub(crate) fn time_integral(n: &LatticeSite, lambda: Complex64, t_max: f64, tol: f64) -> (Complex64, f64, f64, bool) {
    debug_assert!(lambda.im < 0.0);
    let pieces = t_max.ceil().max(1.0) as usize;
    let res = gauss_kronrod_vec(
        |t, out| {
            let v = Complex64::new(0.0, -1.0) * (Complex64::new(0.0, -t) * lambda).exp() * propagator_kernel(n, t);
            out[0] = v.re;
            out[1] = v.im;
        },
        2,
        0.0,
        t_max,
        pieces,
        0.1 * tol,
        0.0,
        20 * pieces + 200,
    );
    let tail = (t_max * lambda.im).exp() / lambda.im.abs();
    (Complex64::new(res.values[0], res.values[1]), res.errors[0].hypot(res.errors[1]), tail, res.converged)
}
