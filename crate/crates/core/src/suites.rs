//! Randomized and fixed verifier batteries, shared between the CLI
//! `verify` command and the acceptance tests. Every instance produces a
//! record with a content digest, a margin where one is meaningful, and
//! explicit skip or boundary flags, so a violation can be replayed from
//! the report alone.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cover::DEFAULT_ORACLE_LIMIT;
use crate::dynamics::{System, SystemSpec};
use crate::error::Result;
use crate::point::Point;
use crate::profile::{compute_profile, product_bound_check, product_fine_epsilon};
use crate::rng::stream_rng;
use crate::semimetric::{cut_semimetric, weighted_sum_semimetric, Labeling, Semimetric};
use crate::space::{Provenance, SampledSpace};
use crate::subadd::{check_multiple_cap, check_floor, subadditive_hull, verify_averaging_bounds, verify_block_averages, SeqTriple};
use crate::cover::Estimator;

/// Margins this far below zero count as violations; entropy values are
/// logs of small integers, so real failures are macroscopic.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub check: String,
    /// Short content digest of the instance description.
    pub instance: String,
    /// Human-readable instance description.
    pub detail: String,
    /// rhs - lhs of the proved inequality; negative means violated.
    pub margin: Option<f64>,
    pub skipped: bool,
    /// A truncation horizon fed this instance's extrema.
    pub boundary_flag: bool,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    pub skipped: usize,
    pub records: Vec<SuiteRecord>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

fn digest(detail: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(detail.as_bytes());
    let out = hasher.finalize();
    out[..4].iter().map(|b| format!("{b:02x}")).collect()
}

fn record(
    check: &str,
    detail: String,
    margin: Option<f64>,
    skipped: bool,
    boundary_flag: bool,
) -> SuiteRecord {
    let violated = !skipped && margin.is_some_and(|m| m < -MARGIN_TOL);
    SuiteRecord {
        check: check.to_string(),
        instance: digest(&detail),
        detail,
        margin,
        skipped,
        boundary_flag,
        violated,
    }
}

fn finish(name: &str, records: Vec<SuiteRecord>) -> SuiteReport {
    SuiteReport {
        name: name.to_string(),
        instances: records.len(),
        violations: records.iter().filter(|r| r.violated).count(),
        skipped: records.iter().filter(|r| r.skipped).count(),
        records,
    }
}

/// Strictly increasing cut positions away from the edges.
fn random_breaks(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    loop {
        let mut breaks: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05..0.95)).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if breaks.windows(2).all(|w| w[1] - w[0] > 1e-6) {
            return breaks;
        }
    }
}

fn random_rho(rng: &mut impl Rng) -> Result<(Semimetric, String)> {
    if rng.gen_bool(0.4) {
        Ok((Semimetric::Arc, "arc".to_string()))
    } else {
        let cuts = rng.gen_range(1..=3usize);
        let breaks = random_breaks(rng, cuts);
        let name = format!("cut{cuts}");
        Ok((cut_semimetric(Labeling::TorusIntervals { breaks })?, name))
    }
}

/// Random small tuples of bounded semimetrics on uniform torus samples;
/// checks both halves of the averaging-vs-components inequality at
/// budgets 0.2, 0.1, and 0.05.
pub fn averaging_suite(tuples: usize, seed: u64, oracle_limit: usize) -> Result<SuiteReport> {
    let mut rng = stream_rng(seed, 0x1);
    let mut records = Vec::new();
    for t in 0..tuples {
        let n_points = rng.gen_range(6..=12usize);
        let points: Vec<Point> = (0..n_points).map(|_| Point::Torus(rng.gen::<f64>())).collect();
        let space = SampledSpace::uniform(points, Provenance::Explicit)?;
        let k_count = rng.gen_range(1..=4usize);
        let mut rhos = Vec::with_capacity(k_count);
        let mut names = Vec::with_capacity(k_count);
        for _ in 0..k_count {
            let (rho, name) = random_rho(&mut rng)?;
            rhos.push(rho);
            names.push(name);
        }
        for &eps in &[0.2, 0.1, 0.05] {
            let report = verify_averaging_bounds(&space, &rhos, eps, oracle_limit)?;
            let base = format!(
                "averaging t={t} n={n_points} k={k_count} rhos={} eps={eps}",
                names.join("+")
            );
            records.push(record(
                "averaging part1",
                format!("{base} part1"),
                report.part1.map(|q| q.margin()),
                report.part1_skipped,
                false,
            ));
            records.push(record(
                "averaging part2",
                format!("{base} part2"),
                Some(report.part2.margin()),
                false,
                false,
            ));
        }
    }
    Ok(finish("averaging", records))
}

/// Fixed battery of small enumerated systems for the averaging
/// inequalities: cyclic rotations with 5 and 7 cells and the cyclic
/// two-symbol shift on words of length 4, each under two bounded
/// semimetrics, over every admissible (k, n) pair with kn <= 12.
pub fn block_average_suite(oracle_limit: usize) -> Result<SuiteReport> {
    let systems: Vec<(SystemSpec, &str, Vec<(Semimetric, &str)>)> = vec![
        (
            SystemSpec::CyclicRotation { q: 5, step: 1 },
            "rot5",
            vec![
                (Semimetric::Arc, "arc"),
                (
                    cut_semimetric(Labeling::TorusIntervals { breaks: vec![0.5] })?,
                    "cut_half",
                ),
            ],
        ),
        (
            SystemSpec::CyclicRotation { q: 7, step: 2 },
            "rot7",
            vec![
                (Semimetric::Arc, "arc"),
                (
                    cut_semimetric(Labeling::TorusIntervals { breaks: vec![0.5] })?,
                    "cut_half",
                ),
            ],
        ),
        (
            SystemSpec::BernoulliShift {
                alphabet: 2,
                probs: vec![0.5, 0.5],
                word_len: 4,
                cyclic: true,
            },
            "cyc_bern4",
            vec![
                (
                    cut_semimetric(Labeling::WordPrefix { len: 1 })?,
                    "cut_first",
                ),
                (Semimetric::HammingWord, "hamming"),
            ],
        ),
    ];
    let mut records = Vec::new();
    for (spec, sys_name, rhos) in &systems {
        let atoms = spec.atom_count()? as usize;
        let system = System::build(spec, atoms, 0, true, 12)?;
        for (rho, rho_name) in rhos {
            for k in 1..=3usize {
                for &n in &[2, 3, 4, 6usize] {
                    if k > n || k * n > 12 {
                        continue;
                    }
                    for &eps in &[0.1, 0.05] {
                        let rep = verify_block_averages(&system, rho, k, n, eps, oracle_limit)?;
                        let base =
                            format!("block_average {sys_name} {rho_name} k={k} n={n} eps={eps}");
                        records.push(record(
                            "block_average part1",
                            format!("{base} part1"),
                            rep.part1.map(|q| q.margin()),
                            rep.part1_skipped,
                            false,
                        ));
                        records.push(record(
                            "block_average part2",
                            format!("{base} part2"),
                            // Claimed direction: Psi(n, eps) >= Psi(k, coarse).
                            Some(rep.part2.margin()),
                            false,
                            false,
                        ));
                    }
                }
            }
        }
    }
    Ok(finish("block_average", records))
}

/// Concave nondecreasing mixture; subhomogeneity gives the
/// growth-vs-budget hypothesis for free.
fn random_psi(rng: &mut impl Rng, n_max: usize) -> Vec<f64> {
    let atoms = rng.gen_range(2..=4usize);
    let mut coeffs = Vec::new();
    for _ in 0..atoms {
        let kind = rng.gen_range(0..5u8);
        let a: f64 = rng.gen_range(0.0..2.0);
        let c: f64 = rng.gen_range(2.0..10.0);
        coeffs.push((kind, a, c));
    }
    (1..=n_max)
        .map(|n| {
            let x = n as f64;
            coeffs
                .iter()
                .map(|&(kind, a, c)| {
                    a * match kind {
                        0 => x.sqrt(),
                        1 => (1.0 + x).log2(),
                        2 => x.powf(0.8),
                        3 => x.min(c),
                        _ => 1.0,
                    }
                })
                .sum()
        })
        .collect()
}

/// Random valid sequence triples: psi concave nondecreasing, phi a
/// damped copy clipped so the multiplicative hypothesis holds exactly
/// in floats, eta a damped lower envelope of phi.
pub fn random_triple(rng: &mut impl Rng, n_max: usize) -> Result<SeqTriple> {
    let psi = random_psi(rng, n_max);
    let mut phi: Vec<f64> = psi
        .iter()
        .map(|&p| p * rng.gen_range(0.5..1.0))
        .collect();
    for n in 1..=n_max {
        for k in 1..=n_max / n {
            let cap = k as f64 * psi[n - 1];
            if phi[k * n - 1] > cap {
                phi[k * n - 1] = cap;
            }
        }
    }
    let mut phi_hat = phi.clone();
    for i in (0..n_max.saturating_sub(1)).rev() {
        phi_hat[i] = phi_hat[i].min(phi_hat[i + 1]);
    }
    let eta: Vec<f64> = phi_hat
        .iter()
        .map(|&v| v * rng.gen_range(0.0..1.0))
        .collect();
    SeqTriple::new(eta, phi, psi)
}

/// Random triples through the hull pipeline; checks monotonicity,
/// subadditivity, and the sandwich on the horizon-safe range.
pub fn hull_suite(triples: usize, seed: u64, n_max: usize) -> Result<SuiteReport> {
    let mut rng = stream_rng(seed, 0x2);
    let mut records = Vec::new();
    for t in 0..triples {
        let triple = random_triple(&mut rng, n_max)?;
        check_multiple_cap(&triple.phi, &triple.psi)?;
        check_floor(&triple.phi, &triple.eta)?;
        let hull = subadditive_hull(&triple)?;
        let theta = &hull.theta;
        let mut mono_margin = f64::INFINITY;
        for i in 0..n_max - 1 {
            mono_margin = mono_margin.min(theta[i + 1] - theta[i]);
        }
        let mut sub_margin = f64::INFINITY;
        for a in 1..=n_max {
            for b in a..=n_max {
                if a + b > n_max {
                    break;
                }
                let slack = theta[a - 1] + theta[b - 1] - theta[a + b - 1];
                let scale = 1.0 + theta[a - 1].abs() + theta[b - 1].abs();
                sub_margin = sub_margin.min(slack / scale);
            }
        }
        let safe = n_max / 2;
        let mut sandwich_margin = f64::INFINITY;
        for n in 1..=safe {
            sandwich_margin = sandwich_margin.min(theta[n - 1] - triple.eta[n - 1]);
            sandwich_margin =
                sandwich_margin.min(2.0 * triple.psi[n - 1] - theta[n - 1]);
        }
        let boundary = hull.horizon[..safe].iter().any(|&b| b);
        let detail = format!("hull t={t} n_max={n_max}");
        records.push(record("hull monotone", format!("{detail} monotone"), Some(mono_margin), false, boundary));
        records.push(record("hull subadditive", format!("{detail} subadd"), Some(sub_margin), false, boundary));
        records.push(record("hull sandwich", format!("{detail} sandwich"), Some(sandwich_margin), false, boundary));
    }
    Ok(finish("hull", records))
}

/// Enumerated two-coordinate products with halving weights; checks the
/// coordinate composition bound with the exact oracle on both sides.
pub fn product_bound_suite(oracle_limit: usize) -> Result<SuiteReport> {
    struct Instance {
        name: &'static str,
        comp_specs: Vec<SystemSpec>,
        comp_rhos: Vec<Semimetric>,
        n_grid: Vec<usize>,
        eps: Vec<f64>,
    }
    let instances = vec![
        Instance {
            name: "rot4 x bern3",
            comp_specs: vec![
                SystemSpec::CyclicRotation { q: 4, step: 1 },
                SystemSpec::BernoulliShift {
                    alphabet: 2,
                    probs: vec![0.5, 0.5],
                    word_len: 3,
                    cyclic: true,
                },
            ],
            comp_rhos: vec![
                Semimetric::Arc,
                cut_semimetric(Labeling::WordPrefix { len: 1 })?,
            ],
            n_grid: vec![1, 2, 3, 4],
            eps: vec![0.5, 0.25],
        },
        Instance {
            name: "rot3 x rot5",
            comp_specs: vec![
                SystemSpec::CyclicRotation { q: 3, step: 1 },
                SystemSpec::CyclicRotation { q: 5, step: 2 },
            ],
            comp_rhos: vec![Semimetric::Arc, Semimetric::Arc],
            n_grid: vec![1, 2, 3, 4],
            eps: vec![0.5, 0.25],
        },
    ];
    let mut records = Vec::new();
    for inst in &instances {
        let product_spec = SystemSpec::Product {
            components: inst.comp_specs.clone(),
        };
        let weighted: Vec<(f64, Semimetric)> = inst
            .comp_rhos
            .iter()
            .enumerate()
            .map(|(m, rho)| (0.5f64.powi(m as i32 + 1), rho.clone()))
            .collect();
        let product_rho = weighted_sum_semimetric(weighted)?;

        let mut fine_grid: Vec<f64> = inst
            .eps
            .iter()
            .map(|&e| product_fine_epsilon(e).map(|(_, f)| f))
            .collect::<Result<_>>()?;
        fine_grid.sort_by(|a, b| b.partial_cmp(a).unwrap());
        fine_grid.dedup();

        let atoms = product_spec.atom_count()? as usize;
        let product_grid = compute_profile(
            &product_spec,
            &product_rho,
            &inst.n_grid,
            &inst.eps,
            atoms,
            0,
            true,
            Estimator::Exact,
            oracle_limit,
        )?;
        let comp_grids: Vec<_> = inst
            .comp_specs
            .iter()
            .zip(&inst.comp_rhos)
            .map(|(spec, rho)| {
                let n = spec.atom_count()? as usize;
                compute_profile(
                    spec,
                    rho,
                    &inst.n_grid,
                    &fine_grid,
                    n,
                    0,
                    true,
                    Estimator::Exact,
                    oracle_limit,
                )
            })
            .collect::<Result<_>>()?;
        for &eps in &inst.eps {
            let report = product_bound_check(&comp_grids, &product_grid, eps)?;
            let margin = report
                .rows
                .iter()
                .map(|&(_, lhs, rhs)| rhs - lhs)
                .fold(f64::INFINITY, f64::min);
            records.push(record(
                "product_bound",
                format!("product {} eps={eps}", inst.name),
                Some(margin),
                false,
                false,
            ));
        }
    }
    Ok(finish("product_bound", records))
}

/// The whole battery with default sizes, as run by the CLI.
pub fn full_battery(seed: u64, oracle_limit: usize) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        averaging_suite(100, seed, oracle_limit)?,
        block_average_suite(oracle_limit)?,
        hull_suite(500, seed, 64)?,
        product_bound_suite(oracle_limit)?,
    ])
}

/// Default oracle width for batteries run from tests.
pub fn default_limit() -> usize {
    DEFAULT_ORACLE_LIMIT
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_are_stable_and_short() {
        assert_eq!(digest("abc").len(), 8);
        assert_eq!(digest("abc"), digest("abc"));
        assert_ne!(digest("abc"), digest("abd"));
    }

    #[test]
    fn random_triples_satisfy_both_hypotheses() {
        let mut rng = stream_rng(7, 0x2);
        for _ in 0..50 {
            let t = random_triple(&mut rng, 48).unwrap();
            check_multiple_cap(&t.phi, &t.psi).unwrap();
            check_floor(&t.phi, &t.eta).unwrap();
        }
    }

    #[test]
    fn small_hull_suite_is_clean() {
        let report = hull_suite(25, 11, 32).unwrap();
        assert_eq!(report.violations, 0, "{:?}", report.records.iter().filter(|r| r.violated).collect::<Vec<_>>());
        assert_eq!(report.instances, 75);
    }

    #[test]
    fn small_averaging_suite_is_clean() {
        let report = averaging_suite(10, 3, default_limit()).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.skipped < report.instances);
    }
}
