//! JSON encoding of complex numbers as `{"re": x, "im": y}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Serializable complex number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<Cplx> for Complex64 {
    fn from(c: Cplx) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// `#[serde(with = "crate::json::complex")]` for `Complex64` fields.
pub mod complex {
    use super::Cplx;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Cplx::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Cplx::deserialize(d).map(Into::into)
    }
}

/// `#[serde(with = "crate::json::complex_vec")]` for `Vec<Complex64>` fields.
pub mod complex_vec {
    use super::Cplx;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        zs.iter().map(|&z| Cplx::from(z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<Cplx>::deserialize(d).map(|v| v.into_iter().map(Into::into).collect())
    }
}

/// Parses `"re,im"` or a bare real `"re"`.
pub fn parse_complex(s: &str) -> crate::Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|e| crate::Error::Parse(format!("complex {s:?}: {e}")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(crate::Error::Parse(format!("complex {s:?}: expected \"re,im\""))),
    }
}
