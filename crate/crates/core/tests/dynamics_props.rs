//! Structural properties of realized systems: measure preservation on
//! exact atoms, the orbit-average decomposition, the half-average lower
//! bound, orbit table consistency, and semimetric axioms on every kind
//! of sampled space.

use scalent_core::{
    averaged_semimetric, check_semimetric, cut_semimetric, eval_matrix, shifted_semimetric,
    weighted_sum_semimetric, DistanceMatrix, Labeling, Semimetric, System, SystemSpec,
};

const ENTRY_TOL: f64 = 1e-10;

fn exact_systems() -> Vec<(SystemSpec, Semimetric)> {
    let rot5 = SystemSpec::CyclicRotation { q: 5, step: 2 };
    let bern3 = SystemSpec::BernoulliShift {
        alphabet: 2,
        probs: vec![0.5, 0.5],
        word_len: 3,
        cyclic: true,
    };
    let product = SystemSpec::Product {
        components: vec![rot5.clone(), bern3.clone()],
    };
    let halves = cut_semimetric(Labeling::TorusIntervals { breaks: vec![0.5] }).unwrap();
    let first_symbol = cut_semimetric(Labeling::WordPrefix { len: 1 }).unwrap();
    let mixed = weighted_sum_semimetric(vec![
        (0.5, halves.clone()),
        (0.25, first_symbol.clone()),
    ])
    .unwrap();
    vec![
        (rot5, halves),
        (bern3, first_symbol),
        (product, mixed),
    ]
}

fn build(spec: &SystemSpec, depth: usize) -> System {
    let n = atom_count(spec);
    System::build(spec, n, 0, true, depth).unwrap()
}

fn atom_count(spec: &SystemSpec) -> usize {
    match spec {
        SystemSpec::CyclicRotation { q, .. } => *q as usize,
        SystemSpec::BernoulliShift {
            alphabet, word_len, ..
        } => alphabet.pow(*word_len as u32),
        SystemSpec::Product { components } => components.iter().map(atom_count).product(),
        _ => panic!("not enumerable"),
    }
}

#[test]
fn exact_map_permutes_atoms_and_preserves_cell_masses() {
    for (spec, _) in exact_systems() {
        let system = build(&spec, 1);
        let map = spec.transformation().expect("exact system has a map");
        let points = system.space.points();
        let weights = system.space.weights();
        // The image of the atom set is the atom set, weights riding along.
        let mut hit = vec![false; points.len()];
        for (i, p) in points.iter().enumerate() {
            let image = map.apply(p).unwrap();
            let j = points
                .iter()
                .position(|q| *q == image)
                .unwrap_or_else(|| panic!("image of atom {i} is not an atom"));
            assert!(!hit[j], "two atoms map to the same atom");
            hit[j] = true;
            assert_eq!(weights[i], weights[j], "weight changed along the map");
        }
        // Preimage mass of every labeled cell is the cell's own mass.
        let labelings = match &spec {
            SystemSpec::CyclicRotation { .. } => {
                vec![Labeling::TorusIntervals { breaks: vec![0.25, 0.5] }]
            }
            SystemSpec::BernoulliShift { .. } => vec![Labeling::WordPrefix { len: 1 }],
            _ => vec![],
        };
        for labeling in labelings {
            let mut direct = std::collections::BTreeMap::new();
            let mut preimage = std::collections::BTreeMap::new();
            for (i, p) in points.iter().enumerate() {
                *direct.entry(labeling.label(p).unwrap()).or_insert(0.0) += weights[i];
                let cell = labeling.label(&map.apply(p).unwrap()).unwrap();
                *preimage.entry(cell).or_insert(0.0) += weights[i];
            }
            assert_eq!(direct.len(), preimage.len());
            for (cell, mass) in &direct {
                let pulled = preimage[cell];
                assert!(
                    (mass - pulled).abs() < 1e-15,
                    "cell {cell}: mass {mass} vs preimage {pulled}"
                );
            }
        }
    }
}

#[test]
fn average_over_kn_decomposes_into_shifted_block_averages() {
    for (spec, rho) in exact_systems() {
        let system = build(&spec, 9);
        let map = spec.transformation().unwrap();
        for k in 1usize..=3 {
            for n in 1usize..=3 {
                let whole = eval_matrix(
                    &system.space,
                    &averaged_semimetric(rho.clone(), map.clone(), k * n),
                )
                .unwrap();
                let block = averaged_semimetric(rho.clone(), map.clone(), n);
                let mut sum: Option<Vec<f64>> = None;
                for i in 0..k {
                    let part = eval_matrix(
                        &system.space,
                        &shifted_semimetric(block.clone(), map.clone(), i * n),
                    )
                    .unwrap();
                    let tri = part.triangle();
                    sum = Some(match sum {
                        None => tri.to_vec(),
                        Some(mut acc) => {
                            for (a, b) in acc.iter_mut().zip(tri) {
                                *a += b;
                            }
                            acc
                        }
                    });
                }
                let mean = sum.unwrap();
                for (idx, (&w, &s)) in whole.triangle().iter().zip(&mean).enumerate() {
                    assert!(
                        (w - s / k as f64).abs() < ENTRY_TOL,
                        "k={k} n={n} entry {idx}: {w} vs {}",
                        s / k as f64
                    );
                }
            }
        }
    }
}

#[test]
fn longer_averages_dominate_half_the_truncated_average() {
    for (spec, rho) in exact_systems() {
        let system = build(&spec, 8);
        let map = spec.transformation().unwrap();
        // n = k*m + r with r <= n/2 in each case.
        for (n, m, k) in [(3usize, 2usize, 1usize), (5, 2, 2), (7, 2, 3), (8, 3, 2)] {
            assert!(n - k * m <= n / 2);
            let full = eval_matrix(
                &system.space,
                &averaged_semimetric(rho.clone(), map.clone(), n),
            )
            .unwrap();
            let truncated = eval_matrix(
                &system.space,
                &averaged_semimetric(rho.clone(), map.clone(), k * m),
            )
            .unwrap();
            for (f, t) in full.triangle().iter().zip(truncated.triangle()) {
                assert!(
                    *f >= 0.5 * t - ENTRY_TOL,
                    "n={n} km={}: {f} < half of {t}",
                    k * m
                );
            }
        }
    }
}

#[test]
fn orbit_columns_advance_by_one_application() {
    for (spec, _) in exact_systems() {
        let system = build(&spec, 6);
        let map = spec.transformation().unwrap();
        for k in 0..system.orbit.depth() - 1 {
            let this = system.orbit.column(k);
            let next = system.orbit.column(k + 1);
            for (p, q) in this.iter().zip(next) {
                assert_eq!(map.apply(p).unwrap(), *q, "column {k} advance mismatch");
            }
        }
    }
}

#[test]
fn sampled_spaces_satisfy_semimetric_axioms() {
    let cases: Vec<(SystemSpec, Semimetric)> = {
        let mut v = exact_systems();
        v.push((
            SystemSpec::TorusRotation {
                alpha: (5f64.sqrt() - 1.0) / 2.0,
            },
            Semimetric::Arc,
        ));
        v.push((
            SystemSpec::BernoulliShift {
                alphabet: 3,
                probs: vec![0.5, 0.25, 0.25],
                word_len: 6,
                cyclic: false,
            },
            Semimetric::HammingWord,
        ));
        v
    };
    for (spec, rho) in cases {
        for seed in [1u64, 2] {
            let system = System::build(&spec, 40, seed, false, 4).unwrap();
            let map_based = spec.transformation();
            let violations = check_semimetric(&system.space, &rho, 1e-12).unwrap();
            assert!(violations.is_empty(), "{spec:?} seed {seed}: {violations:?}");
            if let Some(map) = map_based {
                let averaged = averaged_semimetric(rho.clone(), map, 3);
                let violations = check_semimetric(&system.space, &averaged, 1e-12).unwrap();
                assert!(violations.is_empty(), "averaged {spec:?}: {violations:?}");
            }
        }
    }
}

#[test]
fn streamed_matrices_match_direct_averaged_evaluation() {
    for (spec, rho) in exact_systems() {
        let system = build(&spec, 5);
        let map = spec.transformation().unwrap();
        let streamed = scalent_core::averaged_matrix_stream(
            &system.space,
            &system.orbit,
            &rho,
            &[1, 2, 5],
        )
        .unwrap();
        for (&n, got) in [1usize, 2, 5].iter().zip(&streamed) {
            let direct: DistanceMatrix = eval_matrix(
                &system.space,
                &averaged_semimetric(rho.clone(), map.clone(), n),
            )
            .unwrap();
            assert_eq!(got.len(), direct.len());
            for (a, b) in got.triangle().iter().zip(direct.triangle()) {
                assert!((a - b).abs() < ENTRY_TOL, "n={n}: {a} vs {b}");
            }
        }
    }
}
