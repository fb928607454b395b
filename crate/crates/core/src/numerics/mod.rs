//! Quadrature rules and small dense complex linear algebra.

pub mod linalg;
pub mod quadrature;
