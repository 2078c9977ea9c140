//! Point representations for the spaces the laboratory works with.
//!
//! Three closed representations cover every system in the zoo: a torus
//! coordinate in `[0, 1)`, a word over a finite alphabet of at most 256
//! symbols, and a tuple combining one point per component of a product.
//! Every space holds points of a single representation; operations that
//! receive a point of the wrong kind return an error rather than guessing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    /// Coordinate on the unit circle, always in `[0, 1)`.
    Torus(f64),
    /// Word over an alphabet of size <= 256, one symbol per byte.
    Word(Vec<u8>),
    /// One coordinate per component of a product system.
    Product(Vec<Point>),
}

impl Point {
    pub fn kind(&self) -> &'static str {
        match self {
            Point::Torus(_) => "torus",
            Point::Word(_) => "word",
            Point::Product(_) => "product",
        }
    }

    /// Arity of a product point; 1 for the scalar representations.
    pub fn arity(&self) -> usize {
        match self {
            Point::Product(parts) => parts.len(),
            _ => 1,
        }
    }

    pub fn as_torus(&self) -> Result<f64> {
        match self {
            Point::Torus(x) => Ok(*x),
            other => Err(Error::RepresentationMismatch {
                expected: "torus",
                found: other.kind(),
            }),
        }
    }

    pub fn as_word(&self) -> Result<&[u8]> {
        match self {
            Point::Word(w) => Ok(w),
            other => Err(Error::RepresentationMismatch {
                expected: "word",
                found: other.kind(),
            }),
        }
    }

    pub fn as_product(&self) -> Result<&[Point]> {
        match self {
            Point::Product(parts) => Ok(parts),
            other => Err(Error::RepresentationMismatch {
                expected: "product",
                found: other.kind(),
            }),
        }
    }
}

/// Wraps a coordinate back into `[0, 1)`. Values within one turn of the
/// interval are handled exactly; anything else is reduced by `fract`.
pub fn wrap_unit(x: f64) -> f64 {
    let mut y = x;
    if y >= 1.0 {
        y -= 1.0;
    }
    if y < 0.0 {
        y += 1.0;
    }
    if !(0.0..1.0).contains(&y) {
        y = y.fract();
        if y < 0.0 {
            y += 1.0;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_unit_interval() {
        assert_eq!(wrap_unit(0.25), 0.25);
        assert_eq!(wrap_unit(1.25), 0.25);
        assert_eq!(wrap_unit(-0.25), 0.75);
        assert_eq!(wrap_unit(0.0), 0.0);
        // 1.0 wraps to exactly 0.
        assert_eq!(wrap_unit(1.0), 0.0);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let p = Point::Word(vec![0, 1]);
        assert!(p.as_torus().is_err());
        assert!(p.as_word().is_ok());
    }
}
