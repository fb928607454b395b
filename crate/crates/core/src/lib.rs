//! Spectral toolkit for discrete Schrödinger operators `H = Delta + V` on
//! `Z^d` with finitely supported complex potentials.
//!
//! The lattice, conformal, Bessel and Blaschke layers are generic over the
//! scalar type ([`Real`], implemented for `f32` and `f64`). The resolvent,
//! determinant, zero-finding, trace and bounds pipeline runs in `f64`.
//! Concrete `f64` aliases are exported at the crate root.

pub mod bessel;
pub mod bounds;
pub mod conformal;
pub mod determinant;
pub mod error;
pub mod hardy;
pub mod json;
pub mod lattice;
pub mod numerics;
pub mod resolvent;
pub mod scalar;
pub mod zeros;

pub use error::{Error, Result};
pub use scalar::{pairwise_sum, Real};

pub type Potential = lattice::Potential<f64>;
pub type Potential32 = lattice::Potential<f32>;
pub type MomentSet = lattice::MomentSet<f64>;
pub type SpectralPoint = conformal::SpectralPoint<f64>;
pub type BesselEval = bessel::BesselEval<f64>;
pub type BlaschkeData = hardy::BlaschkeData<f64>;

pub use conformal::Side;
pub use lattice::{Dimension, LatticeSite};
