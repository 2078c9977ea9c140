//! Entropy growth profiles over (n, epsilon) grids, the coarse
//! domination relation between profiles, a desk-scale instability
//! screen, and the product composition bound.
//!
//! A `ProfileGrid` stores `H` in bits at every grid cell together with
//! the provenance needed to reproduce it. Rows follow the epsilon grid
//! (strictly decreasing), columns follow the n grid (strictly
//! increasing). With the exact estimator each column is nondecreasing as
//! epsilon shrinks; the greedy estimator only promises an upper bound,
//! so comparisons and bound checks that assert inequalities insist on
//! exact grids.

use serde::{Deserialize, Serialize};

use crate::cover::{entropy_curve, validate_eps_grid, Estimator};
use crate::dynamics::{averaged_matrix_stream, System, SystemSpec};
use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::semimetric::Semimetric;

pub const DEFAULT_C_MAX: f64 = 16.0;
pub const DEFAULT_RATIO_CAP: f64 = 2.0;

/// Carried on every stability report. The flag is a screen, not a
/// verdict: the property it hunts is asymptotic in both n and epsilon,
/// and a finite grid can only suggest it, never decide it.
pub const STABILITY_CAVEAT: &str = "heuristic proxy: instability is an asymptotic \
statement over all epsilon; a finite grid can only suggest it, never decide it";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProvenance {
    /// Canonical JSON of the system spec.
    pub system: String,
    /// Canonical JSON of the base semimetric.
    pub semimetric: String,
    /// Number of sampled or enumerated points.
    pub sample_n: usize,
    pub seed: u64,
    pub enumerated: bool,
    pub oracle_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    /// Strictly increasing positive depths.
    pub n_grid: Vec<usize>,
    /// Strictly decreasing positive budgets.
    pub eps_grid: Vec<f64>,
    /// `values[e][i]` is H in bits at `(n_grid[i], eps_grid[e])`.
    pub values: Vec<Vec<f64>>,
    /// Matching cell counts, `values = log2(ks)` cellwise.
    pub ks: Vec<Vec<usize>>,
    pub estimator: Estimator,
    pub provenance: GridProvenance,
}

fn validate_n_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 {
        return Err(Error::InvalidSystem(
            "n grid must be nonempty positive integers".into(),
        ));
    }
    for w in n_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidSystem(format!(
                "n grid must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

impl ProfileGrid {
    /// Structural invariants: grid shapes, finite nonnegative values,
    /// and for exact grids the epsilon monotonicity of each column.
    pub fn validate(&self) -> Result<()> {
        validate_n_grid(&self.n_grid)?;
        validate_eps_grid(&self.eps_grid)?;
        if self.eps_grid.is_empty() {
            return Err(Error::InvalidSystem("empty epsilon grid".into()));
        }
        if self.values.len() != self.eps_grid.len() || self.ks.len() != self.eps_grid.len() {
            return Err(Error::InvalidSystem("row count mismatch".into()));
        }
        for (row, krow) in self.values.iter().zip(&self.ks) {
            if row.len() != self.n_grid.len() || krow.len() != self.n_grid.len() {
                return Err(Error::InvalidSystem("column count mismatch".into()));
            }
            for (&v, &k) in row.iter().zip(krow) {
                if !v.is_finite() || v < 0.0 || k == 0 {
                    return Err(Error::InvalidSystem(format!("bad cell h = {v}, k = {k}")));
                }
            }
        }
        if self.estimator == Estimator::Exact {
            for e in 1..self.values.len() {
                for i in 0..self.n_grid.len() {
                    if self.values[e][i] < self.values[e - 1][i] {
                        return Err(Error::InvalidSystem(format!(
                            "exact column {} decreases as epsilon shrinks",
                            self.n_grid[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, eps_row: usize, n_col: usize) -> f64 {
        self.values[eps_row][n_col]
    }

    /// Index of an epsilon row by exact bit equality.
    pub fn eps_row(&self, epsilon: f64) -> Result<usize> {
        self.eps_grid
            .iter()
            .position(|&e| e == epsilon)
            .ok_or(Error::MissingEpsilonRow(epsilon))
    }

    /// One line per cell, n-major, epsilon within each n block in grid
    /// order. Header: `n,epsilon,H_bits,k,estimator,N,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,epsilon,H_bits,k,estimator,N,seed\n");
        for (i, &n) in self.n_grid.iter().enumerate() {
            for (e, &eps) in self.eps_grid.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    n,
                    eps,
                    self.values[e][i],
                    self.ks[e][i],
                    self.estimator,
                    self.provenance.sample_n,
                    self.provenance.seed
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ProfileGrid> {
        let grid: ProfileGrid =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        grid.validate()?;
        Ok(grid)
    }
}

/// Assembles a grid from precomputed averaged matrices, one per n.
pub fn profile_from_matrices(
    mats: &[DistanceMatrix],
    weights: &[f64],
    n_grid: &[usize],
    eps_grid: &[f64],
    estimator: Estimator,
    oracle_limit: usize,
    provenance: GridProvenance,
) -> Result<ProfileGrid> {
    validate_n_grid(n_grid)?;
    validate_eps_grid(eps_grid)?;
    if eps_grid.is_empty() {
        return Err(Error::InvalidSystem("empty epsilon grid".into()));
    }
    if mats.len() != n_grid.len() {
        return Err(Error::InvalidSystem(format!(
            "{} matrices for {} grid depths",
            mats.len(),
            n_grid.len()
        )));
    }
    let mut values = vec![vec![0.0; n_grid.len()]; eps_grid.len()];
    let mut ks = vec![vec![0usize; n_grid.len()]; eps_grid.len()];
    for (i, m) in mats.iter().enumerate() {
        let curve = entropy_curve(m, weights, eps_grid, estimator, oracle_limit)?;
        for (e, v) in curve.iter().enumerate() {
            values[e][i] = v.h_bits;
            ks[e][i] = v.k;
        }
    }
    let grid = ProfileGrid {
        n_grid: n_grid.to_vec(),
        eps_grid: eps_grid.to_vec(),
        values,
        ks,
        estimator,
        provenance,
    };
    grid.validate()?;
    Ok(grid)
}

/// Builds the system, streams the averaged matrices along the n grid,
/// and evaluates entropy at every cell. Deterministic given inputs.
#[allow(clippy::too_many_arguments)]
pub fn compute_profile(
    spec: &SystemSpec,
    rho: &Semimetric,
    n_grid: &[usize],
    eps_grid: &[f64],
    sample_n: usize,
    seed: u64,
    enumerate: bool,
    estimator: Estimator,
    oracle_limit: usize,
) -> Result<ProfileGrid> {
    validate_n_grid(n_grid)?;
    let depth = *n_grid.last().expect("validated nonempty");
    let system = System::build(spec, sample_n, seed, enumerate, depth)?;
    let mats = averaged_matrix_stream(&system.space, &system.orbit, rho, n_grid)?;
    let provenance = GridProvenance {
        system: spec.canonical_name(),
        semimetric: serde_json::to_string(rho).map_err(|e| Error::Parse(e.to_string()))?,
        sample_n: system.space.len(),
        seed,
        enumerated: enumerate,
        oracle_limit,
    };
    profile_from_matrices(
        &mats,
        system.space.weights(),
        n_grid,
        eps_grid,
        estimator,
        oracle_limit,
        provenance,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPair {
    /// Budget on the left grid.
    pub eps: f64,
    /// Chosen budget on the right grid, the largest that works.
    pub delta: f64,
    /// Smallest constant making the domination hold at that delta.
    pub c: f64,
}

/// Witness (or refusal) for coarse domination of one profile by
/// another: for every left epsilon there are a right delta and a
/// constant `C <= c_max` with `left(n, eps) <= C * right(n, delta)` at
/// every grid n. Cells that are zero on both sides pass; a positive
/// left cell over a zero right cell rules the delta out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonWitness {
    pub ok: bool,
    pub c_max: f64,
    /// One entry per left epsilon row, in grid order, until a failure.
    pub pairs: Vec<ComparisonPair>,
    /// First left epsilon with no admissible (delta, C), if any.
    pub failed_eps: Option<f64>,
}

/// Smallest admissible constant for one (left row, right row) pairing,
/// or infinity when a positive cell faces a zero cell.
fn row_constant(left: &[f64], right: &[f64]) -> f64 {
    let mut c = 0.0f64;
    for (&l, &r) in left.iter().zip(right) {
        if l == 0.0 {
            continue;
        }
        if r == 0.0 {
            return f64::INFINITY;
        }
        c = c.max(l / r);
    }
    c
}

pub fn preceq_check(
    left: &ProfileGrid,
    right: &ProfileGrid,
    c_max: f64,
) -> Result<ComparisonWitness> {
    left.validate()?;
    right.validate()?;
    if left.n_grid != right.n_grid {
        return Err(Error::GridMismatch {
            left: left.n_grid.clone(),
            right: right.n_grid.clone(),
        });
    }
    let mut pairs = Vec::with_capacity(left.eps_grid.len());
    for (e, &eps) in left.eps_grid.iter().enumerate() {
        // Largest delta first: the weakest requirement wins ties.
        let mut found = None;
        for (d, &delta) in right.eps_grid.iter().enumerate() {
            let c = row_constant(&left.values[e], &right.values[d]);
            if c <= c_max {
                found = Some(ComparisonPair { eps, delta, c });
                break;
            }
        }
        match found {
            Some(pair) => pairs.push(pair),
            None => {
                return Ok(ComparisonWitness {
                    ok: false,
                    c_max,
                    pairs,
                    failed_eps: Some(eps),
                })
            }
        }
    }
    Ok(ComparisonWitness {
        ok: true,
        c_max,
        pairs,
        failed_eps: None,
    })
}

/// Domination in both directions under the same constant cap.
pub fn equivalent(left: &ProfileGrid, right: &ProfileGrid, c_max: f64) -> Result<bool> {
    Ok(preceq_check(left, right, c_max)?.ok && preceq_check(right, left, c_max)?.ok)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandPair {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    /// max over n of fine / max(coarse, 1).
    pub band: f64,
    /// The last few per-n ratios increase strictly.
    pub tail_increasing: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub flagged: bool,
    pub message: &'static str,
    pub ratio_cap: f64,
    pub pairs: Vec<BandPair>,
    pub caveat: &'static str,
}

/// Screens a grid for epsilon-sensitive growth: for every ordered pair
/// of budgets, the fine row is compared against the coarse row floored
/// at one bit; a pair flags when the worst ratio exceeds `ratio_cap`
/// and the per-n ratios still increase strictly along the tail of the n
/// grid (the last three columns, or all of them on shorter grids).
pub fn stability_diagnostic(grid: &ProfileGrid, ratio_cap: f64) -> Result<StabilityReport> {
    grid.validate()?;
    if grid.eps_grid.len() < 2 {
        return Err(Error::InvalidSystem(
            "stability diagnostic needs at least two epsilon rows".into(),
        ));
    }
    let cols = grid.n_grid.len();
    let mut pairs = Vec::new();
    let mut any = false;
    for a in 0..grid.eps_grid.len() {
        for b in a + 1..grid.eps_grid.len() {
            let ratios: Vec<f64> = (0..cols)
                .map(|i| grid.values[b][i] / grid.values[a][i].max(1.0))
                .collect();
            let band = ratios.iter().cloned().fold(0.0f64, f64::max);
            let tail_len = cols.min(3);
            let tail = &ratios[cols - tail_len..];
            let tail_increasing = tail_len >= 2 && tail.windows(2).all(|w| w[1] > w[0]);
            let flagged = band > ratio_cap && tail_increasing;
            any |= flagged;
            pairs.push(BandPair {
                eps_coarse: grid.eps_grid[a],
                eps_fine: grid.eps_grid[b],
                band,
                tail_increasing,
                flagged,
            });
        }
    }
    Ok(StabilityReport {
        flagged: any,
        message: if any {
            "unstable at desk scale"
        } else {
            "no instability detected"
        },
        ratio_cap,
        pairs,
        caveat: STABILITY_CAVEAT,
    })
}

/// Number of visible coordinates at budget `eps` under halving
/// coordinate weights, and the per-coordinate budget used on the right
/// side of the product bound.
pub fn product_fine_epsilon(epsilon: f64) -> Result<(usize, f64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ProductBoundRange(epsilon));
    }
    let r = (-epsilon.log2()).ceil().max(1.0) as usize;
    Ok((r, epsilon / (2.0 * r as f64)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductBoundReport {
    pub epsilon: f64,
    /// Visible coordinate count at this budget.
    pub r: usize,
    /// Component budget `epsilon / (2 r)`.
    pub fine_epsilon: f64,
    /// Per-n: (n, product side, component sum side).
    pub rows: Vec<(usize, f64, f64)>,
    /// All margins (sum minus product) nonnegative.
    pub pass: bool,
}

/// Checks that the product profile at `epsilon` is dominated by the sum
/// of the first `min(r, M)` component profiles at `epsilon / (2 r)`.
/// Component weights are assumed to halve per coordinate; grids must be
/// exact and share the n grid, the product row and the component rows
/// must already be present.
pub fn product_bound_check(
    components: &[ProfileGrid],
    product: &ProfileGrid,
    epsilon: f64,
) -> Result<ProductBoundReport> {
    let (r, fine) = product_fine_epsilon(epsilon)?;
    product.validate()?;
    if product.estimator != Estimator::Exact {
        return Err(Error::HypothesisViolated {
            name: "exact estimator",
            location: "product grid".into(),
            detail: "bound checks need exact entropies".into(),
        });
    }
    if components.is_empty() {
        return Err(Error::InvalidSystem("no component grids".into()));
    }
    let used = components.len().min(r);
    for (m, comp) in components.iter().take(used).enumerate() {
        comp.validate()?;
        if comp.estimator != Estimator::Exact {
            return Err(Error::HypothesisViolated {
                name: "exact estimator",
                location: format!("component grid {}", m + 1),
                detail: "bound checks need exact entropies".into(),
            });
        }
        if comp.n_grid != product.n_grid {
            return Err(Error::GridMismatch {
                left: product.n_grid.clone(),
                right: comp.n_grid.clone(),
            });
        }
    }
    let prod_row = product.eps_row(epsilon)?;
    let comp_rows: Vec<usize> = components
        .iter()
        .take(used)
        .map(|c| c.eps_row(fine))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(product.n_grid.len());
    let mut pass = true;
    for (i, &n) in product.n_grid.iter().enumerate() {
        let lhs = product.values[prod_row][i];
        let mut rhs = 0.0;
        for (m, &row) in comp_rows.iter().enumerate() {
            rhs += components[m].values[row][i];
        }
        pass &= lhs <= rhs;
        rows.push((n, lhs, rhs));
    }
    Ok(ProductBoundReport {
        epsilon,
        r,
        fine_epsilon: fine,
        rows,
        pass,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorBoundReport {
    pub pass: bool,
    pub witness: ComparisonWitness,
}

/// A coordinate factor's profile must be dominated by the whole
/// system's profile.
pub fn factor_bound_check(
    factor: &ProfileGrid,
    system: &ProfileGrid,
    c_max: f64,
) -> Result<FactorBoundReport> {
    let witness = preceq_check(factor, system, c_max)?;
    Ok(FactorBoundReport {
        pass: witness.ok,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain_provenance() -> GridProvenance {
        GridProvenance {
            system: "test".into(),
            semimetric: "test".into(),
            sample_n: 0,
            seed: 0,
            enumerated: true,
            oracle_limit: 15,
        }
    }

    fn grid_from(values: Vec<Vec<f64>>, n_grid: Vec<usize>, eps_grid: Vec<f64>) -> ProfileGrid {
        let ks = values
            .iter()
            .map(|row| row.iter().map(|&v| (2.0f64.powf(v)).round() as usize).collect())
            .collect();
        ProfileGrid {
            n_grid,
            eps_grid,
            values,
            ks,
            estimator: Estimator::Exact,
            provenance: plain_provenance(),
        }
    }

    #[test]
    fn self_comparison_uses_same_row_and_unit_constant() {
        let g = grid_from(
            vec![vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]],
            vec![2, 4, 8],
            vec![0.5, 0.25],
        );
        let w = preceq_check(&g, &g, 1.0).unwrap();
        assert!(w.ok);
        assert_eq!(w.pairs[0].delta, 0.5);
        assert_eq!(w.pairs[0].c, 1.0);
        // The fine left row over the coarse right row needs C = 2, so
        // the scan settles on the matching fine delta.
        assert_eq!(w.pairs[1].delta, 0.25);
        assert_eq!(w.pairs[1].c, 1.0);
        assert!(equivalent(&g, &g, 1.0).unwrap());
    }

    #[test]
    fn log_grid_precedes_linear_grid_but_not_back() {
        let n_grid: Vec<usize> = (1..=10).map(|i| 1 << i).collect();
        let logs: Vec<f64> = n_grid.iter().map(|&n| (n as f64).log2().ceil()).collect();
        let lins: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
        let left = grid_from(vec![logs], n_grid.clone(), vec![0.5]);
        let right = grid_from(vec![lins], n_grid, vec![0.5]);
        assert!(preceq_check(&left, &right, 8.0).unwrap().ok);
        let back = preceq_check(&right, &left, 8.0).unwrap();
        // n = 1024 needs C = 1024 / 10, far above the cap.
        assert!(!back.ok);
        assert_eq!(back.failed_eps, Some(0.5));
    }

    #[test]
    fn doubling_is_an_equivalence() {
        let g = grid_from(
            vec![vec![1.0, 2.0, 3.0]],
            vec![2, 4, 8],
            vec![0.5],
        );
        let mut doubled = g.clone();
        for row in &mut doubled.values {
            for v in row.iter_mut() {
                *v *= 2.0;
            }
        }
        assert!(equivalent(&g, &doubled, 2.0).unwrap());
        assert!(!preceq_check(&doubled, &g, 1.5).unwrap().ok);
    }

    #[test]
    fn zero_rows_pass_against_zero_rows_only() {
        let zero = grid_from(vec![vec![0.0, 0.0]], vec![1, 2], vec![0.5]);
        let pos = grid_from(vec![vec![1.0, 1.0]], vec![1, 2], vec![0.5]);
        assert!(preceq_check(&zero, &zero, 1.0).unwrap().ok);
        assert!(preceq_check(&zero, &pos, 1.0).unwrap().ok);
        assert!(!preceq_check(&pos, &zero, 1.0).unwrap().ok);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = grid_from(vec![vec![1.0]], vec![2], vec![0.5]);
        let b = grid_from(vec![vec![1.0]], vec![4], vec![0.5]);
        assert!(matches!(
            preceq_check(&a, &b, 16.0),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn constant_grid_reports_no_instability() {
        let g = grid_from(
            vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0, 1.0]],
            vec![2, 4, 8, 16],
            vec![0.5, 0.25],
        );
        let report = stability_diagnostic(&g, 2.0).unwrap();
        assert!(!report.flagged);
        assert_eq!(report.message, "no instability detected");
        assert_eq!(report.caveat, STABILITY_CAVEAT);
    }

    #[test]
    fn linear_vs_flat_rows_flag() {
        let g = grid_from(
            vec![
                vec![1.0, 1.0, 1.0, 1.0],
                vec![2.0, 4.0, 8.0, 16.0],
            ],
            vec![2, 4, 8, 16],
            vec![0.5, 0.25],
        );
        let report = stability_diagnostic(&g, 2.0).unwrap();
        assert!(report.flagged);
        assert_eq!(report.message, "unstable at desk scale");
        assert!(report.pairs[0].band >= 16.0);
    }

    #[test]
    fn high_band_without_tail_growth_does_not_flag() {
        // The fine row jumps early then flattens: the ratio tail is not
        // strictly increasing, so the screen stays quiet.
        let g = grid_from(
            vec![
                vec![1.0, 1.0, 1.0, 1.0],
                vec![8.0, 8.0, 8.0, 8.0],
            ],
            vec![2, 4, 8, 16],
            vec![0.5, 0.25],
        );
        let report = stability_diagnostic(&g, 2.0).unwrap();
        assert!(!report.flagged);
        assert!(report.pairs[0].band >= 8.0);
    }

    #[test]
    fn csv_layout_and_json_roundtrip() {
        let g = grid_from(
            vec![vec![0.0, 1.0], vec![1.0, 2.0]],
            vec![2, 4],
            vec![0.5, 0.25],
        );
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,epsilon,H_bits,k,estimator,N,seed");
        assert_eq!(lines[1], "2,0.5,0,1,exact,0,0");
        assert_eq!(lines[2], "2,0.25,1,2,exact,0,0");
        assert_eq!(lines[3], "4,0.5,1,2,exact,0,0");
        assert_eq!(lines[4], "4,0.25,2,4,exact,0,0");
        let json = g.to_json().unwrap();
        let back = ProfileGrid::from_json(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn product_bound_epsilon_ranges() {
        assert!(matches!(
            product_fine_epsilon(1.0),
            Err(Error::ProductBoundRange(_))
        ));
        assert!(matches!(
            product_fine_epsilon(0.0),
            Err(Error::ProductBoundRange(_))
        ));
        let (r, fine) = product_fine_epsilon(0.25).unwrap();
        assert_eq!(r, 2);
        assert_eq!(fine, 0.0625);
        let (r, fine) = product_fine_epsilon(0.5).unwrap();
        assert_eq!(r, 1);
        assert_eq!(fine, 0.25);
    }

    #[test]
    fn product_bound_on_synthetic_grids() {
        // Product row at eps = 0.5 (r = 1): bound is the first
        // component's row at 0.25 alone.
        let comp1 = grid_from(vec![vec![2.0, 3.0]], vec![1, 2], vec![0.25]);
        let comp2 = grid_from(vec![vec![9.0, 9.0]], vec![1, 2], vec![0.25]);
        let product = grid_from(vec![vec![1.5, 3.0]], vec![1, 2], vec![0.5]);
        let report =
            product_bound_check(&[comp1.clone(), comp2.clone()], &product, 0.5).unwrap();
        assert_eq!(report.r, 1);
        assert!(report.pass);
        let fat = grid_from(vec![vec![2.5, 3.5]], vec![1, 2], vec![0.5]);
        let report = product_bound_check(&[comp1, comp2], &fat, 0.5).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn missing_rows_are_reported() {
        let comp = grid_from(vec![vec![1.0]], vec![1], vec![0.5]);
        let product = grid_from(vec![vec![1.0]], vec![1], vec![0.5]);
        // r = 1 at eps 0.5 needs a component row at 0.25.
        assert!(matches!(
            product_bound_check(&[comp], &product, 0.5),
            Err(Error::MissingEpsilonRow(_))
        ));
    }

    #[test]
    fn factor_bound_is_a_preceq_wrapper() {
        let factor = grid_from(vec![vec![1.0, 1.0]], vec![1, 2], vec![0.5]);
        let system = grid_from(vec![vec![1.0, 2.0]], vec![1, 2], vec![0.5]);
        let report = factor_bound_check(&factor, &system, 16.0).unwrap();
        assert!(report.pass);
        assert_eq!(report.witness.pairs.len(), 1);
    }
}
