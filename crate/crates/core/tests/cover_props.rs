//! Randomized cover properties: the exact oracle against exhaustive
//! search, greedy dominance, accuracy monotonicity, and the scaling
//! covariance of entropy under power-of-two rescaling.

use proptest::prelude::*;

use scalent_core::cover::{
    confirm_minimal, exact_entropy_limited, greedy_entropy, is_valid_cover,
};
use scalent_core::DistanceMatrix;

fn arc(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

fn torus_instance(points: &[f64]) -> DistanceMatrix {
    DistanceMatrix::from_fn(points.len(), 0.5, |i, j| arc(points[i], points[j]))
}

fn normalized(raw: &[f64]) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let tail: f64 = w.iter().take(w.len() - 1).sum();
    let last = w.len() - 1;
    w[last] = 1.0 - tail;
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_oracle_agrees_with_exhaustive_search(
        points in prop::collection::vec(0.0f64..1.0, 3..=7),
        raw in prop::collection::vec(0.1f64..1.0, 7),
        eps in 0.05f64..0.9,
    ) {
        let n = points.len();
        let matrix = torus_instance(&points);
        let weights = normalized(&raw[..n]);
        let value = exact_entropy_limited(&matrix, &weights, eps, 15).unwrap();
        prop_assert!(is_valid_cover(&value.cover, &matrix, &weights, eps));
        prop_assert!(confirm_minimal(&matrix, &weights, eps, value.k));
    }

    #[test]
    fn greedy_covers_are_valid_and_never_beat_exact(
        points in prop::collection::vec(0.0f64..1.0, 3..=9),
        eps in 0.05f64..0.9,
    ) {
        let n = points.len();
        let matrix = torus_instance(&points);
        let weights = vec![1.0 / n as f64; n];
        let exact = exact_entropy_limited(&matrix, &weights, eps, 15).unwrap();
        let greedy = greedy_entropy(&matrix, &weights, eps).unwrap();
        prop_assert!(is_valid_cover(&greedy.cover, &matrix, &weights, eps));
        prop_assert!(greedy.k >= exact.k, "greedy {} < exact {}", greedy.k, exact.k);
    }

    #[test]
    fn exact_entropy_is_monotone_in_accuracy(
        points in prop::collection::vec(0.0f64..1.0, 3..=8),
        lo in 0.02f64..0.4,
        factor in 1.01f64..8.0,
    ) {
        let n = points.len();
        let matrix = torus_instance(&points);
        let weights = vec![1.0 / n as f64; n];
        let hi = lo * factor;
        let fine = exact_entropy_limited(&matrix, &weights, lo, 15).unwrap();
        let coarse = exact_entropy_limited(&matrix, &weights, hi, 15).unwrap();
        prop_assert!(
            fine.h_bits >= coarse.h_bits,
            "H({lo}) = {} < H({hi}) = {}",
            fine.h_bits,
            coarse.h_bits
        );
    }

    // Rescaling distances by c and the accuracy by the same factor leaves
    // the cover problem unchanged, except that the mass budget stays at
    // eps on the scaled instance and moves to eps/c on the original. The
    // two budgets agree whenever no subset mass falls between them, so
    // the accuracy is planted inside a multiplicative gap of the subset
    // masses; power-of-two factors keep the diameter tests float-exact.
    #[test]
    fn entropy_is_scaling_covariant_when_budgets_agree(
        points in prop::collection::vec(0.0f64..1.0, 3..=7),
        raw in prop::collection::vec(0.1f64..1.0, 7),
        p_mag in 1i32..=2,
        p_neg in any::<bool>(),
        pick in 0usize..64,
    ) {
        let f = 2.0f64.powi(p_mag);
        let c = if p_neg { 1.0 / f } else { f };
        let n = points.len();
        let matrix = torus_instance(&points);
        let weights = normalized(&raw[..n]);
        let mut masses: Vec<f64> = (0u32..1 << n)
            .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| weights[i]).sum())
            .collect();
        masses.sort_by(f64::total_cmp);
        masses.dedup();
        // Budget windows [lo, f*lo) that dodge every subset mass, with
        // slack against summation-order rounding inside the oracle. The
        // gap from zero to the smallest weight always qualifies.
        let lows: Vec<f64> = masses
            .windows(2)
            .filter(|w| w[1] > f * w[0] + 1e-9)
            .map(|w| (w[0] + w[1] / f) / 2.0)
            .collect();
        prop_assert!(!lows.is_empty());
        let lo = lows[pick % lows.len()];
        let eps = if c > 1.0 { lo } else { f * lo };
        let scaled = exact_entropy_limited(&matrix.scale(c), &weights, c * eps, 15).unwrap();
        let base = exact_entropy_limited(&matrix, &weights, eps, 15).unwrap();
        prop_assert_eq!(scaled.k, base.k, "scaled k != base k at c = {}", c);
    }
}

#[test]
fn entropy_curve_is_monotone_on_a_fixed_instance() {
    let points: Vec<f64> = (0..10).map(|i| (i as f64 * 0.37).fract()).collect();
    let matrix = torus_instance(&points);
    let weights = vec![0.1; 10];
    let curve = scalent_core::entropy_curve(
        &matrix,
        &weights,
        &[0.6, 0.4, 0.25, 0.15, 0.08, 0.04],
        scalent_core::Estimator::Exact,
        15,
    )
    .unwrap();
    for pair in curve.windows(2) {
        assert!(pair[0].h_bits <= pair[1].h_bits);
    }
}
