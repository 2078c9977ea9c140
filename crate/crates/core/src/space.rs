//! Finite weighted point sets standing in for a measure space.
//!
//! A `SampledSpace` is the desk-scale substitute for `(X, mu)`: a list of
//! points with strictly positive weights that sum to one. Spaces come from
//! three sources recorded in `Provenance`: explicit construction, random
//! sampling of a system, or exact enumeration of a finite system's atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// Hand-built space, e.g. in tests or loaded from a file.
    Explicit,
    /// Random draw of `n` points from the system named by `system`.
    Sampled { system: String, n: usize, seed: u64 },
    /// All atoms of a finite exact system, with exact weights.
    Enumerated { system: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledSpace {
    points: Vec<Point>,
    weights: Vec<f64>,
    provenance: Provenance,
}

impl SampledSpace {
    /// Builds a space and validates its invariants: non-empty, one point
    /// representation throughout, positive weights summing to one.
    pub fn new(points: Vec<Point>, weights: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        if points.len() != weights.len() {
            return Err(Error::MatrixSizeMismatch {
                n: points.len(),
                expected: weights.len(),
            });
        }
        let first = points[0].kind();
        for (index, p) in points.iter().enumerate() {
            if p.kind() != first {
                return Err(Error::MixedRepresentation {
                    first,
                    other: p.kind(),
                    index,
                });
            }
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum {
                sum,
                tol: WEIGHT_SUM_TOL,
            });
        }
        Ok(SampledSpace {
            points,
            weights,
            provenance,
        })
    }

    /// Equal-weight space over the given points.
    pub fn uniform(points: Vec<Point>, provenance: Provenance) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let w = 1.0 / n as f64;
        let mut weights = vec![w; n];
        // 1/n times n is not exactly 1 for every n; absorb the residue into
        // the last weight so the sum is exact.
        let sum: f64 = weights.iter().sum();
        weights[n - 1] += 1.0 - sum;
        SampledSpace::new(points, weights, provenance)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn kind(&self) -> &'static str {
        self.points[0].kind()
    }
}

/// Sum of `weights` over ascending indices of `members`. Every mass
/// comparison in the crate goes through this one summation order so that
/// strict budget checks agree bit for bit across callers.
pub fn mass_of(weights: &[f64], members: impl IntoIterator<Item = usize>) -> f64 {
    let mut idx: Vec<usize> = members.into_iter().collect();
    idx.sort_unstable();
    idx.iter().map(|&i| weights[i]).sum()
}
