//! Greedy forward selection scored by confidence-bound intersections.
//!
//! Each iteration estimates the conditional entropy of the accumulated
//! subset extended by every remaining variable, scores the candidates by the
//! k at which the previous subset's lower entropy bound meets the
//! candidate's upper bound, and keeps the maximizer while it clears the
//! configured thresholds.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetFingerprint, VariableId};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EntropyEstimate, EstimatorConfig};
use crate::rng::derive_seed;

/// Sentinel magnitude for scores whose denominator is zero.
///
/// A candidate with a strictly lower point estimate and zero spread is
/// maximally confident under the one-sided bound, so it outranks every
/// finite score; the sign preserves argmax semantics for the opposite case.
pub const SCORE_CAP: f64 = 1e9;

// Largest double below 1: the confidence of a one-sided bound never reaches
// certainty, even where the exact ratio would round to 1.
const MAX_CONFIDENCE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Confidence that the true entropy lies on the bounded side of `k`
/// standard deviations: `k^2 / (1 + k^2)` for positive k, 0 otherwise.
pub fn cantelli_confidence(k: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    ((k * k) / (1.0 + k * k)).min(MAX_CONFIDENCE)
}

/// First-iteration score: the k at which the candidate's upper bound reaches
/// 1 bit, i.e. `(1 - h_est) / sigma_est`.
pub fn score_first(est: &EntropyEstimate) -> f64 {
    ratio_score(1.0 - est.h_est, est.sigma_est)
}

/// Extension score: the k at which the previous subset's lower bound meets
/// the candidate's upper bound, i.e.
/// `(prev.h_est - cand.h_est) / (prev.sigma_est + cand.sigma_est)`.
pub fn score_extension(prev: &EntropyEstimate, cand: &EntropyEstimate) -> f64 {
    ratio_score(prev.h_est - cand.h_est, prev.sigma_est + cand.sigma_est)
}

fn ratio_score(numerator: f64, denominator: f64) -> f64 {
    if denominator > 0.0 {
        numerator / denominator
    } else if numerator > 0.0 {
        SCORE_CAP
    } else if numerator < 0.0 {
        -SCORE_CAP
    } else {
        0.0
    }
}

/// Thresholds and estimator settings for [`select`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Smallest acceptable k; iteration stops when the best k falls to or
    /// below it.
    pub k_min: f64,
    /// Smallest acceptable confidence in [0, 1); 0 disables the check.
    pub f_min: f64,
    pub max_iterations: Option<usize>,
    pub estimator: EstimatorConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            k_min: 0.01,
            f_min: 0.0,
            max_iterations: None,
            estimator: EstimatorConfig::default(),
        }
    }
}

/// One candidate's estimate and scores at a given iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub variable: VariableId,
    /// Estimate for the accumulated subset extended by `variable`.
    pub estimate: EntropyEstimate,
    pub k: f64,
    pub f: f64,
}

/// A recorded iteration: the winning candidate and the full scoreboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    /// 1-based iteration number.
    pub iteration: usize,
    pub chosen: VariableId,
    pub chosen_estimate: EntropyEstimate,
    pub k_star: f64,
    pub f_star: f64,
    pub candidates: Vec<CandidateScore>,
    /// Guaranteed entropy reduction at confidence `f_star`:
    /// `k_star * sigma_chosen` at iteration 1, afterwards
    /// `k_star * (sigma_prev + sigma_chosen)`.
    pub entropy_reduction_lower_bound: f64,
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ExhaustedVariables,
    BelowFMin,
    NoPositiveK,
    MaxIterations,
}

/// Complete record of a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub steps: Vec<SelectionStep>,
    pub termination: Termination,
    pub config: SelectionConfig,
    pub variables: Vec<String>,
    pub dataset: DatasetFingerprint,
}

impl SelectionTrace {
    /// The selected differential set, in selection order.
    pub fn chosen(&self) -> Vec<VariableId> {
        self.steps.iter().map(|s| s.chosen).collect()
    }
}

fn validate(cfg: &SelectionConfig) -> Result<()> {
    if !(cfg.k_min >= 0.0 && cfg.k_min.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "k_min must be a finite non-negative number, got {}",
            cfg.k_min
        )));
    }
    if !(0.0..1.0).contains(&cfg.f_min) {
        return Err(Error::InvalidConfig(format!(
            "f_min must lie in [0, 1), got {}",
            cfg.f_min
        )));
    }
    Ok(())
}

/// Runs the iterative selection procedure on a sample.
///
/// Candidate estimates are seeded from `(estimator seed, iteration,
/// variable index)`, so each candidate's estimate is unaffected by the
/// presence of other variables and any single evaluation can be replayed.
/// Ties on k go to the lowest variable index.
pub fn select(sample: &Dataset, cfg: &SelectionConfig) -> Result<SelectionTrace> {
    validate(cfg)?;
    let n_vars = sample.n_variables();
    let mut in_subset = vec![false; n_vars];
    let mut chosen: Vec<VariableId> = Vec::new();
    let mut prev_estimate: Option<EntropyEstimate> = None;
    let mut steps: Vec<SelectionStep> = Vec::new();

    let termination = loop {
        let iteration = steps.len() + 1;
        let remaining: Vec<VariableId> = sample.variables().filter(|v| !in_subset[v.index()]).collect();
        if remaining.is_empty() {
            break Termination::ExhaustedVariables;
        }
        if cfg.max_iterations.is_some_and(|cap| iteration > cap) {
            break Termination::MaxIterations;
        }

        let mut candidates = Vec::with_capacity(remaining.len());
        for v in remaining {
            let mut subset = chosen.clone();
            subset.push(v);
            let est_cfg = EstimatorConfig {
                seed: derive_seed(&[cfg.estimator.seed, iteration as u64, v.index() as u64]),
                ..cfg.estimator.clone()
            };
            let est = estimate(sample, &subset, &est_cfg)?;
            let k = match &prev_estimate {
                None => score_first(&est),
                Some(prev) => score_extension(prev, &est),
            };
            candidates.push(CandidateScore {
                variable: v,
                f: cantelli_confidence(k),
                k,
                estimate: est,
            });
        }

        // Strict comparison keeps the earliest (lowest-index) maximizer.
        let best = candidates
            .iter()
            .enumerate()
            .fold(0, |best, (i, c)| if c.k > candidates[best].k { i } else { best });
        let k_star = candidates[best].k;
        if k_star <= cfg.k_min {
            break Termination::NoPositiveK;
        }
        let f_star = cantelli_confidence(k_star);
        if f_star < cfg.f_min {
            break Termination::BelowFMin;
        }

        let chosen_estimate = candidates[best].estimate.clone();
        let sigma_prev = prev_estimate.as_ref().map_or(0.0, |p| p.sigma_est);
        let bound = k_star * (sigma_prev + chosen_estimate.sigma_est);
        let variable = candidates[best].variable;
        in_subset[variable.index()] = true;
        chosen.push(variable);
        steps.push(SelectionStep {
            iteration,
            chosen: variable,
            chosen_estimate: chosen_estimate.clone(),
            k_star,
            f_star,
            candidates,
            entropy_reduction_lower_bound: bound,
        });
        prev_estimate = Some(chosen_estimate);
    };

    Ok(SelectionTrace {
        steps,
        termination,
        config: cfg.clone(),
        variables: sample.variable_names().to_vec(),
        dataset: sample.fingerprint(),
    })
}
