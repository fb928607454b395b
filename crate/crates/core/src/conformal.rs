//! The Joukowski map `lambda = (d/2)(z + 1/z)` between the unit disc and
//! the cut plane `C \ [-d, d]`, with the square-root branch
//! `sqrt(lambda^2 - d^2) = (d/2)(1/z - z)`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Dimension;
use crate::scalar::Real;

/// Relative width of the band around `[-d, d]` treated as on the cut.
pub const CUT_TOLERANCE: f64 = 1e-14;

/// Side of the cut from which a boundary value is taken:
/// `Plus` is `lambda_0 + i0`, `Minus` is `lambda_0 - i0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// A disc point together with its image in the cut plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint<T: Real> {
    pub z: Complex<T>,
    pub lambda: Complex<T>,
    pub d: Dimension,
}

impl<T: Real> SpectralPoint<T> {
    pub fn from_z(z: Complex<T>, d: Dimension) -> Result<Self> {
        Ok(Self { z, lambda: lambda_of_z(z, d)?, d })
    }

    pub fn from_lambda(lambda: Complex<T>, d: Dimension) -> Result<Self> {
        Ok(Self { z: z_of_lambda(lambda, d)?, lambda, d })
    }

    pub fn sqrt_branch(&self) -> Complex<T> {
        let half_d = self.d.as_real::<T>() * T::lit(0.5);
        (self.z.inv() - self.z) * half_d
    }
}

/// `(d/2)(z + 1/z)` for `0 < |z| < 1`.
pub fn lambda_of_z<T: Real>(z: Complex<T>, d: Dimension) -> Result<Complex<T>> {
    if z.is_zero() {
        return Err(Error::Pole);
    }
    if !(z.norm() < T::one()) {
        return Err(Error::Domain(format!("|z| = {} is not inside the unit disc", z.norm())));
    }
    let half_d = d.as_real::<T>() * T::lit(0.5);
    Ok((z + z.inv()) * half_d)
}

/// Whether `lambda` lies within `1e-14 * d` of the segment `[-d, d]`.
pub fn on_cut<T: Real>(lambda: Complex<T>, d: Dimension) -> bool {
    let dd = d.as_real::<T>();
    let tol = T::lit(CUT_TOLERANCE) * dd;
    lambda.im.abs() <= tol && lambda.re.abs() <= dd + tol
}

/// Distance from `lambda` to `[-d, d]`.
pub fn dist_to_cut<T: Real>(lambda: Complex<T>, d: Dimension) -> T {
    let dd = d.as_real::<T>();
    let excess = (lambda.re.abs() - dd).max(T::zero());
    excess.hypot(lambda.im)
}

/// Inverse map, the root of `lambda = (d/2)(z + 1/z)` with `|z| < 1`.
pub fn z_of_lambda<T: Real>(lambda: Complex<T>, d: Dimension) -> Result<Complex<T>> {
    if on_cut(lambda, d) {
        return Err(branch_cut_error(lambda, d));
    }
    let dd = d.as_real::<T>();
    let s = (lambda * lambda - dd * dd).sqrt();
    let w1 = (lambda + s) / dd;
    let w2 = (lambda - s) / dd;
    // w1 * w2 = 1; the larger root is 1/z
    let w = if w1.norm_sqr() >= w2.norm_sqr() { w1 } else { w2 };
    Ok(Complex::<T>::one() / w)
}

/// `sqrt(lambda^2 - d^2)` on the branch `(d/2)(1/z - z)`: positive for
/// `lambda > d`, negative for `lambda < -d`, asymptotic to `lambda`.
pub fn sqrt_branch<T: Real>(lambda: Complex<T>, d: Dimension) -> Result<Complex<T>> {
    let z = z_of_lambda(lambda, d)?;
    let half_d = d.as_real::<T>() * T::lit(0.5);
    Ok((z.inv() - z) * half_d)
}

/// Boundary correspondence for `z = e^{it}`: `lambda_0 = d cos t`, reached
/// from below the cut on the upper semicircle and from above on the lower
/// one.
pub fn boundary_point<T: Real>(t: T, d: Dimension) -> (T, Side) {
    let lambda0 = d.as_real::<T>() * t.cos();
    let side = if t.sin() > T::zero() { Side::Minus } else { Side::Plus };
    (lambda0, side)
}

fn branch_cut_error<T: Real>(lambda: Complex<T>, d: Dimension) -> Error {
    Error::BranchCut {
        re: lambda.re.to_f64().unwrap_or(f64::NAN),
        im: lambda.im.to_f64().unwrap_or(f64::NAN),
        d: d.get(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn forward_examples() {
        let l = lambda_of_z(Complex64::new(0.5, 0.0), dim(3)).unwrap();
        assert!((l - 3.75).norm() < 1e-15);
        let l = lambda_of_z(Complex64::new(0.0, 0.5), dim(4)).unwrap();
        assert!((l - Complex64::new(0.0, -3.0)).norm() < 1e-15);
        let z = Complex64::new(1e-6, 2e-6);
        let l = lambda_of_z(z, dim(3)).unwrap();
        assert!((z * l - 1.5).norm() < 1e-10);
    }

    #[test]
    fn forward_errors() {
        assert_eq!(lambda_of_z(Complex64::new(0.0, 0.0), dim(3)), Err(Error::Pole));
        assert!(matches!(lambda_of_z(Complex64::new(1.0, 0.0), dim(3)), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_examples() {
        let z = z_of_lambda(Complex64::new(3.75, 0.0), dim(3)).unwrap();
        assert!((z - 0.5).norm() < 1e-15);
        let z = z_of_lambda(Complex64::new(-3.75, 0.0), dim(3)).unwrap();
        assert!((z + 0.5).norm() < 1e-15);
        let l = Complex64::new(0.0, 5.0);
        let z = z_of_lambda(l, dim(3)).unwrap();
        assert!(z.norm() < 1.0);
        assert!((lambda_of_z(z, dim(3)).unwrap() - l).norm() < 1e-13 * l.norm());
        assert!(matches!(z_of_lambda(Complex64::new(1.0, 0.0), dim(3)), Err(Error::BranchCut { .. })));
        assert!(matches!(z_of_lambda(Complex64::new(3.0, 1e-15), dim(3)), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn sqrt_branch_signs() {
        let s = sqrt_branch(Complex64::new(3.75, 0.0), dim(3)).unwrap();
        assert!((s - 2.25).norm() < 1e-14);
        let s = sqrt_branch(Complex64::new(-3.75, 0.0), dim(3)).unwrap();
        assert!((s + 2.25).norm() < 1e-14);
        let big = Complex64::new(1e7, 3e6);
        let s = sqrt_branch(big, dim(3)).unwrap();
        assert!((s / big - 1.0).norm() < 1e-12);
    }

    #[test]
    fn upper_half_plane_maps_to_lower_disc() {
        let z = z_of_lambda(Complex64::new(0.3, 0.1), dim(3)).unwrap();
        assert!(z.im < 0.0);
        assert_eq!(boundary_point(1.0f64, dim(3)).1, Side::Minus);
        assert_eq!(boundary_point(-1.0f64, dim(3)).1, Side::Plus);
    }

    #[test]
    fn works_in_f32() {
        let z = z_of_lambda(Complex::new(3.75f32, 0.0), dim(3)).unwrap();
        assert!((z.re - 0.5).abs() < 1e-6);
    }
}
