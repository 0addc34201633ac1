//! Exhaustive subset evaluation: the brute-force search the greedy procedure
//! approximates, kept as a differential-testing baseline and for exact
//! answers at small variable counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VariableId};
use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::estimator::{conditional_entropy_once, Correction};

/// Enumeration is capped at 2^20 subsets.
pub const MAX_ORACLE_VARIABLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationSource {
    ExactDistribution,
    EmpiricalSample,
}

/// Conditional entropy of one variable subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetEvaluation {
    pub subset: Vec<VariableId>,
    pub entropy: f64,
    pub source: EvaluationSource,
}

fn subsets(n: usize) -> Result<Vec<Vec<VariableId>>> {
    if n > MAX_ORACLE_VARIABLES {
        return Err(Error::TooManyVariables {
            count: n,
            guard: MAX_ORACLE_VARIABLES,
        });
    }
    Ok((0u64..(1u64 << n))
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(VariableId::new)
                .collect()
        })
        .collect())
}

fn rank(mut evaluations: Vec<SubsetEvaluation>) -> Vec<SubsetEvaluation> {
    evaluations.sort_by(|a, b| {
        a.entropy
            .total_cmp(&b.entropy)
            .then(a.subset.len().cmp(&b.subset.len()))
            .then_with(|| a.subset.cmp(&b.subset))
    });
    evaluations
}

/// Evaluates the exact conditional entropy of every subset of the roster
/// (the empty set included), ranked ascending by entropy, ties broken by
/// cardinality then lexicographic order.
pub fn exhaustive_exact(j: &JointDistribution) -> Result<Vec<SubsetEvaluation>> {
    let evaluations = subsets(j.n_variables())?
        .into_par_iter()
        .map(|subset| {
            let entropy = j.conditional_entropy(&subset)?;
            Ok(SubsetEvaluation {
                subset,
                entropy,
                source: EvaluationSource::ExactDistribution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank(evaluations))
}

/// Same enumeration over a sample, using the uncorrected full-sample plug-in
/// entropy, an exact function of the data with no resampling noise.
pub fn exhaustive_empirical(sample: &Dataset) -> Result<Vec<SubsetEvaluation>> {
    let evaluations = subsets(sample.n_variables())?
        .into_par_iter()
        .map(|subset| {
            let view = sample.project(&subset)?;
            Ok(SubsetEvaluation {
                subset,
                entropy: conditional_entropy_once(&view, Correction::None),
                source: EvaluationSource::EmpiricalSample,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank(evaluations))
}

/// The minimal-cardinality subsets among those whose entropy lies within
/// `tolerance` of the minimum. Input must be ranked (as returned by the
/// exhaustive evaluations).
pub fn minimal_minimizers(evaluations: &[SubsetEvaluation], tolerance: f64) -> Vec<&SubsetEvaluation> {
    let Some(first) = evaluations.first() else {
        return Vec::new();
    };
    let near: Vec<&SubsetEvaluation> = evaluations
        .iter()
        .take_while(|e| e.entropy - first.entropy <= tolerance)
        .collect();
    let min_card = near.iter().map(|e| e.subset.len()).min().unwrap();
    near.into_iter().filter(|e| e.subset.len() == min_card).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize) -> VariableId {
        VariableId::new(i)
    }

    #[test]
    fn case_study_minimum_is_the_true_pair() {
        let ranked = exhaustive_exact(&JointDistribution::case_study()).unwrap();
        assert_eq!(ranked.len(), 32);
        assert!((ranked[0].entropy - 0.4635846793516261).abs() < 1e-12);

        // Every superset of {x1, x2} attains the same entropy (the remaining
        // variables are irrelevant), so the minimum is an 8-way near-tie and
        // the pair is its unique smallest member.
        for eval in &ranked {
            if eval.subset.contains(&var(0)) && eval.subset.contains(&var(1)) {
                assert!((eval.entropy - ranked[0].entropy).abs() < 1e-12);
            }
        }
        let minimal = minimal_minimizers(&ranked, 1e-12);
        assert_eq!(minimal.len(), 1);
        assert_eq!(minimal[0].subset, vec![var(0), var(1)]);
    }

    #[test]
    fn case_study_pair_is_strictly_best_two_subset() {
        let j = JointDistribution::case_study();
        let best = j.conditional_entropy(&[var(0), var(1)]).unwrap();
        for a in 0..5 {
            for b in (a + 1)..5 {
                if (a, b) == (0, 1) {
                    continue;
                }
                let h = j.conditional_entropy(&[var(a), var(b)]).unwrap();
                assert!(h > best + 1e-6, "subset ({a},{b}) ties the true pair");
            }
        }
    }

    #[test]
    fn singleton_ordering_matches_theory() {
        let j = JointDistribution::case_study();
        let h1 = j.conditional_entropy(&[var(0)]).unwrap();
        let h2 = j.conditional_entropy(&[var(1)]).unwrap();
        for i in 2..5 {
            let h_irrelevant = j.conditional_entropy(&[var(i)]).unwrap();
            assert!(h1 < h2 && h2 < h_irrelevant);
        }
    }

    #[test]
    fn deterministic_class_reaches_zero() {
        // Class equals the single variable.
        let j = JointDistribution::new(
            vec!["a".into()],
            vec![2],
            vec![(vec![0], 0u8, 0.5), (vec![1], 1u8, 0.5)],
        )
        .unwrap();
        let ranked = exhaustive_exact(&j).unwrap();
        assert_eq!(ranked[0].subset, vec![var(0)]);
        assert_eq!(ranked[0].entropy, 0.0);
    }

    #[test]
    fn empirical_full_roster_no_worse_than_empty() {
        let sample = JointDistribution::case_study().sample(50, 31).unwrap();
        let ranked = exhaustive_empirical(&sample).unwrap();
        let all = ranked
            .iter()
            .find(|e| e.subset.len() == 5)
            .unwrap()
            .entropy;
        let empty = ranked.iter().find(|e| e.subset.is_empty()).unwrap().entropy;
        assert!(all <= empty + 1e-12);
    }

    /// In the infinite-sample limit (exact entropies), greedy forward
    /// selection recovers the oracle's minimal optimal subset in order.
    #[test]
    fn greedy_on_exact_entropies_matches_the_oracle() {
        let j = JointDistribution::case_study();
        let mut chosen: Vec<VariableId> = Vec::new();
        for _ in 0..2 {
            let best = j
                .variables()
                .filter(|v| !chosen.contains(v))
                .min_by(|&a, &b| {
                    let mut with_a = chosen.clone();
                    with_a.push(a);
                    let mut with_b = chosen.clone();
                    with_b.push(b);
                    let h_a = j.conditional_entropy(&with_a).unwrap();
                    let h_b = j.conditional_entropy(&with_b).unwrap();
                    h_a.total_cmp(&h_b)
                })
                .unwrap();
            chosen.push(best);
        }
        assert_eq!(chosen, vec![var(0), var(1)]);
        let ranked = exhaustive_exact(&j).unwrap();
        let minimal = minimal_minimizers(&ranked, 1e-12);
        assert_eq!(minimal[0].subset, chosen);
    }

    #[test]
    fn guard_rejects_wide_rosters() {
        let names: Vec<String> = (0..21).map(|i| format!("v{i}")).collect();
        let columns = vec![vec![0u32, 0]; 21];
        let arities = vec![1usize; 21];
        let d = Dataset::from_codes(names, columns, arities, vec![0, 1]).unwrap();
        assert!(matches!(
            exhaustive_empirical(&d),
            Err(Error::TooManyVariables { count: 21, guard: 20 })
        ));
    }
}
