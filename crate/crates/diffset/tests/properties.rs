//! Property tests for the numerical invariants.

use proptest::prelude::*;

use diffset::{
    binary_entropy, cantelli_confidence, conditional_entropy_once, estimate, score_extension,
    Correction, Dataset, EntropyEstimate, EstimatorConfig, JointDistribution, VariableId,
};

fn prob() -> impl Strategy<Value = f64> {
    (0u32..=1_000_000).prop_map(|n| n as f64 / 1_000_000.0)
}

proptest! {
    #[test]
    fn binary_entropy_is_symmetric_and_bounded(x in prob()) {
        let h = binary_entropy(x);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - x)).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_is_concave_at_midpoints(a in prob(), b in prob()) {
        let mid = binary_entropy((a + b) / 2.0);
        let avg = (binary_entropy(a) + binary_entropy(b)) / 2.0;
        prop_assert!(mid >= avg - 1e-12);
    }

    #[test]
    fn cantelli_is_monotone_and_below_one(a in 0.0f64..100.0, b in 0.0f64..100.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let f_lo = cantelli_confidence(lo);
        let f_hi = cantelli_confidence(hi);
        prop_assert!(f_lo <= f_hi);
        prop_assert!((0.0..1.0).contains(&f_lo) && f_hi < 1.0);
    }

    /// The extension score is invariant under a common shift of both h
    /// estimates and a common positive rescaling of both deviations.
    #[test]
    fn extension_score_is_scale_and_shift_free(
        h_prev in 0.0f64..1.0,
        h_cand in 0.0f64..1.0,
        s_prev in 0.01f64..0.5,
        s_cand in 0.01f64..0.5,
        shift in -0.5f64..0.5,
        scale in 0.1f64..10.0,
    ) {
        let make = |h: f64, s: f64| EntropyEstimate {
            h_est: h,
            sigma_est: s,
            n_sub_used: 2,
            subset: vec![],
        };
        let base = score_extension(&make(h_prev, s_prev), &make(h_cand, s_cand));
        let moved = score_extension(
            &make(h_prev + shift, s_prev * scale),
            &make(h_cand + shift, s_cand * scale),
        );
        prop_assert!((base - moved * scale).abs() < 1e-6 * base.abs().max(1.0));
    }
}

/// Random explicit distribution over up to 4 variables of arity up to 3.
fn random_distribution(seed: u64, n_vars: usize, arity: usize) -> JointDistribution {
    let mut state = seed.max(1);
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state.wrapping_mul(0x2545_f491_4f6c_dd1d)
    };
    let mut patterns = vec![vec![]];
    for v in 0..n_vars {
        let _ = v;
        let mut grown = Vec::new();
        for p in &patterns {
            for value in 0..arity as u32 {
                let mut q = p.clone();
                q.push(value);
                grown.push(q);
            }
        }
        patterns = grown;
    }
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    for pattern in &patterns {
        for class in 0..2u8 {
            let w = (next() >> 11) as f64 + 1.0;
            weights.push(w);
            entries.push((pattern.clone(), class, 0.0));
        }
    }
    let total: f64 = weights.iter().sum();
    for (entry, w) in entries.iter_mut().zip(&weights) {
        entry.2 = w / total;
    }
    let names = (0..n_vars).map(|i| format!("v{i}")).collect();
    JointDistribution::new(names, vec![arity; n_vars], entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Conditioning on more variables never increases the exact entropy.
    #[test]
    fn exact_entropy_is_monotone_on_chains(seed in 1u64..10_000, n_vars in 2usize..=4) {
        let j = random_distribution(seed, n_vars, 2);
        let chain: Vec<VariableId> = (0..n_vars).map(VariableId::new).collect();
        let mut previous = j.conditional_entropy(&[]).unwrap();
        for end in 1..=n_vars {
            let h = j.conditional_entropy(&chain[..end]).unwrap();
            prop_assert!(h <= previous + 1e-12);
            previous = h;
        }
    }

    /// Full-sample plug-in entropy equals the exact entropy of the sample's
    /// empirical distribution, for every subset.
    #[test]
    fn plug_in_matches_empirical_distribution(seed in 1u64..10_000) {
        let j = random_distribution(seed, 3, 2);
        let sample = j.sample(24, seed).unwrap();
        let empirical = JointDistribution::empirical(&sample);
        for mask in 0u32..8 {
            let vars: Vec<VariableId> =
                (0..3).filter(|i| mask & (1 << i) != 0).map(VariableId::new).collect();
            let plug_in = conditional_entropy_once(&sample.project(&vars).unwrap(), Correction::None);
            let exact = empirical.conditional_entropy(&vars).unwrap();
            prop_assert!((plug_in - exact).abs() < 1e-12, "mask {mask}: {plug_in} vs {exact}");
        }
    }

    /// Estimates are pure functions of (sample, vars, seed).
    #[test]
    fn estimate_is_reproducible(seed in 1u64..10_000) {
        let j = random_distribution(seed, 2, 3);
        let sample = j.sample(16, seed).unwrap();
        let cfg = EstimatorConfig { n_sub: 10, correction: Correction::MillerMadow, seed };
        let vars = [VariableId::new(0)];
        prop_assert_eq!(estimate(&sample, &vars, &cfg).unwrap(), estimate(&sample, &vars, &cfg).unwrap());
    }

    /// Corrected plug-in entropies stay within [0, 1 + 1/(2 ln 2)]: the raw
    /// binary entropy is at most 1 and the per-cell corrections, weighted by
    /// cell shares, cannot exceed 1/(2 ln 2) in total.
    #[test]
    fn corrected_entropy_is_bounded(seed in 1u64..10_000, mask in 0u32..8) {
        let j = random_distribution(seed, 3, 2);
        let sample = j.sample(12, seed).unwrap();
        let vars: Vec<VariableId> =
            (0..3).filter(|i| mask & (1 << i) != 0).map(VariableId::new).collect();
        let h = conditional_entropy_once(&sample.project(&vars).unwrap(), Correction::MillerMadow);
        let cap = 1.0 + 1.0 / (2.0 * std::f64::consts::LN_2);
        prop_assert!((0.0..=cap).contains(&h), "corrected entropy {h} out of [0, {cap}]");
    }
}

#[test]
fn dataset_file_round_trip_preserves_content() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sample.csv");
    let original = JointDistribution::case_study().sample(50, 99).unwrap();
    original.write(&path, b',').unwrap();
    let reloaded = Dataset::load(&path, "class", b',').unwrap();

    assert_eq!(reloaded.m(), original.m());
    assert_eq!(reloaded.class_labels(), original.class_labels());
    assert_eq!(reloaded.variable_names(), original.variable_names());
    // Codes are reassigned in first-appearance order; the underlying labels
    // must match row for row.
    for v in original.variables() {
        for row in 0..original.m() {
            assert_eq!(
                original.category_label(v, original.column(v)[row]),
                reloaded.category_label(v, reloaded.column(v)[row]),
            );
        }
    }
}

#[test]
fn projection_preserves_rows_and_classes() {
    let d = JointDistribution::case_study().sample(30, 5).unwrap();
    let view = d.project(&[VariableId::new(2), VariableId::new(0)]).unwrap();
    assert_eq!(view.m(), d.m());
    assert_eq!(view.class_labels(), d.class_labels());
    // Canonical order: sorted by index regardless of argument order.
    assert_eq!(view.variables(), &[VariableId::new(0), VariableId::new(2)]);
}
