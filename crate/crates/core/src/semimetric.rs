//! Bounded measurable semimetrics and the checks that keep them honest.
//!
//! Every semimetric carries a declared bound `B` with `rho <= B` pointwise.
//! The closed set of kinds:
//!
//! * `arc`: circle distance on torus points, bound 1/2;
//! * `cut`: 0/1 indicator that two points fall in different cells of a
//!   labeling, bound 1;
//! * `hamming-word`: fraction of positions where two equal-length words
//!   differ, bound 1;
//! * `weighted-sum`: `sum C_m rho_m` evaluated coordinatewise on product
//!   points, bound `sum C_m B_m`;
//! * `averaged`: orbit average `(1/n) sum rho(T^k x, T^k y)`, same bound as
//!   the base;
//! * `shifted`: `rho(T^j x, T^j y)`, same bound as the base.
//!
//! `check_semimetric` evaluates all pairs and reports symmetry,
//! nonnegativity, and triangle violations beyond a tolerance; constructors
//! are expected to keep that report empty for every sample.

use serde::{Deserialize, Serialize};

use crate::dynamics::Transformation;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::space::SampledSpace;

/// Default tolerance for the semimetric axiom scan.
pub const AXIOM_TOL: f64 = 1e-12;

/// Assigns each point to a cell of a finite partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Labeling {
    /// Partition of the circle into `[0, b_0), [b_0, b_1), ..., [b_last, 1)`.
    /// Breaks must be strictly increasing and lie in `(0, 1)`.
    TorusIntervals { breaks: Vec<f64> },
    /// Cell is the first `len` symbols of a word, `1 <= len <= 8`.
    WordPrefix { len: usize },
}

impl Labeling {
    pub fn validate(&self) -> Result<()> {
        match self {
            Labeling::TorusIntervals { breaks } => {
                let mut prev = 0.0;
                for &b in breaks {
                    if !(b > prev && b < 1.0) {
                        return Err(Error::PartialLabeling {
                            reason: format!("breaks must be strictly increasing in (0, 1), got {b} after {prev}"),
                        });
                    }
                    prev = b;
                }
                Ok(())
            }
            Labeling::WordPrefix { len } => {
                if *len == 0 || *len > 8 {
                    return Err(Error::PartialLabeling {
                        reason: format!("prefix length {len} outside 1..=8"),
                    });
                }
                Ok(())
            }
        }
    }

    /// Cell id of `p`, total on the representation the labeling targets.
    pub fn label(&self, p: &Point) -> Result<u64> {
        match self {
            Labeling::TorusIntervals { breaks } => {
                let x = p.as_torus()?;
                let mut cell = 0u64;
                for &b in breaks {
                    if x >= b {
                        cell += 1;
                    } else {
                        break;
                    }
                }
                Ok(cell)
            }
            Labeling::WordPrefix { len } => {
                let w = p.as_word()?;
                if w.len() < *len {
                    return Err(Error::PartialLabeling {
                        reason: format!("word of length {} has no prefix of length {len}", w.len()),
                    });
                }
                let mut id = 0u64;
                for &s in &w[..*len] {
                    id = (id << 8) | s as u64;
                }
                Ok(id)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Semimetric {
    Arc,
    Cut(Labeling),
    HammingWord,
    WeightedSum(Vec<(f64, Semimetric)>),
    Averaged {
        base: Box<Semimetric>,
        map: Transformation,
        depth: usize,
    },
    Shifted {
        base: Box<Semimetric>,
        map: Transformation,
        offset: usize,
    },
}

/// Cut semimetric of a labeling: 0 when both points share a cell, else 1.
pub fn cut_semimetric(labeling: Labeling) -> Result<Semimetric> {
    labeling.validate()?;
    Ok(Semimetric::Cut(labeling))
}

/// `sum_m weights[m] * components[m]`, evaluated coordinatewise on product
/// points. Weights must be finite and strictly positive.
pub fn weighted_sum_semimetric(components: Vec<(f64, Semimetric)>) -> Result<Semimetric> {
    if components.is_empty() {
        return Err(Error::ArityMismatch {
            components: 0,
            arity: 0,
        });
    }
    for (w, _) in &components {
        if !(w.is_finite() && *w > 0.0) {
            return Err(Error::NonPositiveWeight {
                index: 0,
                value: *w,
            });
        }
    }
    Ok(Semimetric::WeightedSum(components))
}

impl Semimetric {
    pub fn kind(&self) -> &'static str {
        match self {
            Semimetric::Arc => "arc",
            Semimetric::Cut(_) => "cut",
            Semimetric::HammingWord => "hamming-word",
            Semimetric::WeightedSum(_) => "weighted-sum",
            Semimetric::Averaged { .. } => "averaged",
            Semimetric::Shifted { .. } => "shifted",
        }
    }

    /// Declared upper bound `B` with `rho <= B` pointwise.
    pub fn bound(&self) -> f64 {
        match self {
            Semimetric::Arc => 0.5,
            Semimetric::Cut(_) => 1.0,
            Semimetric::HammingWord => 1.0,
            Semimetric::WeightedSum(parts) => parts.iter().map(|(w, m)| w * m.bound()).sum(),
            Semimetric::Averaged { base, .. } => base.bound(),
            Semimetric::Shifted { base, .. } => base.bound(),
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        match self {
            Semimetric::Arc => {
                let a = x.as_torus()?;
                let b = y.as_torus()?;
                let d = (a - b).abs();
                Ok(d.min(1.0 - d))
            }
            Semimetric::Cut(labeling) => {
                let lx = labeling.label(x)?;
                let ly = labeling.label(y)?;
                Ok(if lx == ly { 0.0 } else { 1.0 })
            }
            Semimetric::HammingWord => {
                let a = x.as_word()?;
                let b = y.as_word()?;
                if a.len() != b.len() {
                    return Err(Error::PartialLabeling {
                        reason: format!("hamming-word needs equal lengths, got {} and {}", a.len(), b.len()),
                    });
                }
                if a.is_empty() {
                    return Ok(0.0);
                }
                let diff = a.iter().zip(b).filter(|(p, q)| p != q).count();
                Ok(diff as f64 / a.len() as f64)
            }
            Semimetric::WeightedSum(parts) => {
                // A product point must match the component count; a scalar
                // point is allowed only for a single-component sum.
                let coords: Vec<&Point> = match x {
                    Point::Product(xs) => xs.iter().collect(),
                    other => vec![other],
                };
                let coords_y: Vec<&Point> = match y {
                    Point::Product(ys) => ys.iter().collect(),
                    other => vec![other],
                };
                if coords.len() != parts.len() || coords_y.len() != parts.len() {
                    return Err(Error::ArityMismatch {
                        components: parts.len(),
                        arity: coords.len().min(coords_y.len()),
                    });
                }
                let mut total = 0.0;
                for (m, (w, rho)) in parts.iter().enumerate() {
                    total += w * rho.eval(coords[m], coords_y[m])?;
                }
                Ok(total)
            }
            Semimetric::Averaged { base, map, depth } => {
                if *depth == 0 {
                    return Err(Error::InvalidSystem(
                        "averaged semimetric needs depth >= 1".into(),
                    ));
                }
                let mut a = x.clone();
                let mut b = y.clone();
                let mut sum = 0.0;
                for k in 0..*depth {
                    if k > 0 {
                        a = map.apply(&a)?;
                        b = map.apply(&b)?;
                    }
                    sum += base.eval(&a, &b)?;
                }
                Ok(sum / *depth as f64)
            }
            Semimetric::Shifted { base, map, offset } => {
                let mut a = x.clone();
                let mut b = y.clone();
                for _ in 0..*offset {
                    a = map.apply(&a)?;
                    b = map.apply(&b)?;
                }
                base.eval(&a, &b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ViolationKind {
    Negative,
    NonzeroDiagonal,
    Asymmetry,
    Triangle,
    AboveBound,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Indices involved; two for pair checks, three for triangle checks.
    pub indices: Vec<usize>,
    pub amount: f64,
}

/// Scans a full distance table for semimetric axiom violations beyond
/// `tol`: negative entries, nonzero diagonal, asymmetry, and triangle
/// failures `d(i,k) > d(i,j) + d(j,k) + tol`.
pub fn scan_table(n: usize, d: &dyn Fn(usize, usize) -> f64, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..n {
        let dii = d(i, i);
        if dii.abs() > tol {
            out.push(Violation {
                kind: ViolationKind::NonzeroDiagonal,
                indices: vec![i],
                amount: dii,
            });
        }
        for j in 0..n {
            let dij = d(i, j);
            if dij < -tol {
                out.push(Violation {
                    kind: ViolationKind::Negative,
                    indices: vec![i, j],
                    amount: dij,
                });
            }
            if j > i {
                let dji = d(j, i);
                if (dij - dji).abs() > tol {
                    out.push(Violation {
                        kind: ViolationKind::Asymmetry,
                        indices: vec![i, j],
                        amount: (dij - dji).abs(),
                    });
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let dij = d(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = d(i, k) - (dij + d(j, k));
                if excess > tol {
                    out.push(Violation {
                        kind: ViolationKind::Triangle,
                        indices: vec![i, j, k],
                        amount: excess,
                    });
                }
            }
        }
    }
    out
}

/// Evaluates `rho` on all ordered pairs of `space` and reports axiom
/// violations beyond `tol`, including entries above the declared bound.
pub fn check_semimetric(
    space: &SampledSpace,
    rho: &Semimetric,
    tol: f64,
) -> Result<Vec<Violation>> {
    let n = space.len();
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            table[i * n + j] = rho.eval(space.point(i), space.point(j))?;
        }
    }
    let mut report = scan_table(n, &|i, j| table[i * n + j], tol);
    let bound = rho.bound();
    for i in 0..n {
        for j in 0..n {
            let v = table[i * n + j];
            if v > bound + tol {
                report.push(Violation {
                    kind: ViolationKind::AboveBound,
                    indices: vec![i, j],
                    amount: v - bound,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Provenance;

    fn halves() -> Labeling {
        Labeling::TorusIntervals { breaks: vec![0.5] }
    }

    #[test]
    fn arc_distance_on_quarter_points() {
        let rho = Semimetric::Arc;
        let p = |x| Point::Torus(x);
        assert_eq!(rho.eval(&p(0.0), &p(0.25)).unwrap(), 0.25);
        assert_eq!(rho.eval(&p(0.0), &p(0.5)).unwrap(), 0.5);
        assert!((rho.eval(&p(0.1), &p(0.9)).unwrap() - 0.2).abs() < 1e-15);
        assert!(rho.bound() >= rho.eval(&p(0.0), &p(0.5)).unwrap());
    }

    #[test]
    fn cut_takes_values_zero_and_one_only() {
        let rho = cut_semimetric(halves()).unwrap();
        let xs = [0.0, 0.1, 0.49, 0.5, 0.51, 0.99];
        for &a in &xs {
            for &b in &xs {
                let v = rho.eval(&Point::Torus(a), &Point::Torus(b)).unwrap();
                assert!(v == 0.0 || v == 1.0);
                let same = (a < 0.5) == (b < 0.5);
                assert_eq!(v == 0.0, same, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn word_prefix_cut_compares_prefixes() {
        let rho = cut_semimetric(Labeling::WordPrefix { len: 1 }).unwrap();
        let w = |s: &[u8]| Point::Word(s.to_vec());
        assert_eq!(rho.eval(&w(&[0, 1, 1]), &w(&[0, 0, 0])).unwrap(), 0.0);
        assert_eq!(rho.eval(&w(&[1, 1, 1]), &w(&[0, 1, 1])).unwrap(), 1.0);
    }

    #[test]
    fn weighted_sum_on_points_differing_in_second_coordinate() {
        let rho = weighted_sum_semimetric(vec![
            (0.5, cut_semimetric(halves()).unwrap()),
            (0.25, cut_semimetric(Labeling::WordPrefix { len: 1 }).unwrap()),
        ])
        .unwrap();
        let x = Point::Product(vec![Point::Torus(0.1), Point::Word(vec![0, 0])]);
        let y = Point::Product(vec![Point::Torus(0.2), Point::Word(vec![1, 0])]);
        assert_eq!(rho.eval(&x, &y).unwrap(), 0.25);
        assert_eq!(rho.bound(), 0.75);
    }

    #[test]
    fn weighted_sum_rejects_arity_mismatch() {
        let rho = weighted_sum_semimetric(vec![
            (0.5, Semimetric::Arc),
            (0.25, Semimetric::Arc),
        ])
        .unwrap();
        let x = Point::Product(vec![Point::Torus(0.1)]);
        let y = Point::Product(vec![Point::Torus(0.2)]);
        assert!(matches!(rho.eval(&x, &y), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn hamming_counts_differing_positions() {
        let rho = Semimetric::HammingWord;
        let a = Point::Word(vec![0, 1, 0, 1]);
        let b = Point::Word(vec![0, 0, 0, 0]);
        assert_eq!(rho.eval(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn scan_flags_a_planted_triangle_violation() {
        // d(0,2) = 5 exceeds d(0,1) + d(1,2) = 2.
        let entries = [[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]];
        let report = scan_table(3, &|i, j| entries[i][j], AXIOM_TOL);
        assert!(report
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::Triangle)));
    }

    #[test]
    fn constructed_semimetrics_pass_the_axiom_scan() {
        let space = SampledSpace::uniform(
            (0..9).map(|i| Point::Torus(i as f64 / 9.0)).collect(),
            Provenance::Explicit,
        )
        .unwrap();
        for rho in [
            Semimetric::Arc,
            cut_semimetric(halves()).unwrap(),
            cut_semimetric(Labeling::TorusIntervals {
                breaks: vec![0.25, 0.5, 0.75],
            })
            .unwrap(),
        ] {
            let report = check_semimetric(&space, &rho, AXIOM_TOL).unwrap();
            assert!(report.is_empty(), "{:?}: {:?}", rho.kind(), report);
        }
    }
}
