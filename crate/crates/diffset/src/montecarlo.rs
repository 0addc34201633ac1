//! Replicated-experiment harness: sample many datasets per size, run
//! selection on each, aggregate selection frequencies, stop rates and
//! chosen-step moments.
//!
//! Replicates are independent work units; they run in parallel and their
//! outcomes are collected in replicate order before a sequential reduction,
//! so reports are bit-identical regardless of thread count.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::rng::{derive_seed, GENERATOR_ID};
use crate::selection::{select, SelectionConfig};

/// Full specification of a replicated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub distribution: JointDistribution,
    pub sample_sizes: Vec<usize>,
    /// Replicates per sample size.
    pub replicates: usize,
    pub selection: SelectionConfig,
    pub master_seed: u64,
}

impl ExperimentPlan {
    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if let Some(&m) = self.sample_sizes.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidConfig(format!(
                "sample size {m} is below the minimum of 2"
            )));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::InvalidConfig("at least one sample size is required".into()));
        }
        Ok(())
    }
}

/// Progress notification: replicates completed so far for one sample size.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub sample_size: usize,
    pub completed: usize,
    pub total: usize,
}

/// Moments of the chosen step at one iteration, over the replicates that
/// recorded a step there. `None` where undefined (no replicates recorded, or
/// a single one for the deviations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMoments {
    pub recorded: u32,
    pub h_mean: Option<f64>,
    pub h_sd: Option<f64>,
    pub k_mean: Option<f64>,
    pub k_sd: Option<f64>,
}

/// Aggregates for one sample size.
///
/// Raw counts are kept alongside the derived percentages so the bookkeeping
/// stays auditable: a replicate that stopped with fewer than n variables
/// contributes to no variable's count at iteration n, hence per-iteration
/// selection counts plus replicates already stopped always total the
/// replicate count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub sample_size: usize,
    pub replicates: usize,
    /// `chosen_counts[iteration - 1][variable]`: replicates choosing that
    /// variable at that iteration.
    pub chosen_counts: Vec<Vec<u32>>,
    /// `stopped_at_counts[n]`: replicates whose selection ended with exactly
    /// n variables, n in 0..=iterations. "Stopping at iteration n" means the
    /// run's final differential set has n members.
    pub stopped_at_counts: Vec<u32>,
    /// Headline percentages over all replicates.
    pub selection_frequency: Vec<Vec<f64>>,
    /// Percentages over the replicates that recorded a step at the iteration.
    pub selection_frequency_conditional: Vec<Vec<f64>>,
    /// `stop_rate[n - 1]`: cumulative percentage of replicates stopped at or
    /// before iteration n, i.e. whose final set has at most n variables.
    pub stop_rate: Vec<f64>,
    pub moments: Vec<IterationMoments>,
}

/// Aggregated outcome of an [`ExperimentPlan`].
///
/// Compare reports through their serialized form or [`compare_reports`];
/// `wall_time` is runtime information and stays out of both.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub generator: String,
    pub plan: ExperimentPlan,
    pub variables: Vec<String>,
    /// Iterations tabulated per size (the roster size).
    pub iterations: usize,
    pub per_size: Vec<SizeReport>,
    /// Wall time of the run; excluded from serialized output so machine
    /// formats stay bit-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

struct ReplicateOutcome {
    /// (variable index, h_est, k_star) per recorded step.
    steps: Vec<(u32, f64, f64)>,
}

/// Runs the plan: for every (size, replicate), derive the data and estimator
/// seeds, sample a dataset, run selection and aggregate. Identical plans
/// yield identical reports.
pub fn run_experiment(
    plan: &ExperimentPlan,
    progress: impl Fn(Progress) + Sync,
) -> Result<SimulationReport> {
    plan.validate()?;
    let started = Instant::now();
    let n_vars = plan.distribution.n_variables();
    let iterations = n_vars;
    let mut per_size = Vec::with_capacity(plan.sample_sizes.len());

    for &sample_size in &plan.sample_sizes {
        let completed = std::sync::atomic::AtomicUsize::new(0);
        let outcomes: Vec<ReplicateOutcome> = (0..plan.replicates)
            .into_par_iter()
            .map(|replicate| {
                let outcome = run_replicate(plan, sample_size, replicate).map_err(|source| {
                    Error::ReplicateFailed {
                        sample_size,
                        replicate,
                        source: Box::new(source),
                    }
                })?;
                let done = completed.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(Progress {
                    sample_size,
                    completed: done,
                    total: plan.replicates,
                });
                Ok(outcome)
            })
            .collect::<Result<Vec<_>>>()?;
        per_size.push(aggregate(sample_size, plan.replicates, n_vars, iterations, &outcomes));
    }

    Ok(SimulationReport {
        generator: GENERATOR_ID.to_string(),
        plan: plan.clone(),
        variables: plan.distribution.variable_names().to_vec(),
        iterations,
        per_size,
        wall_time: started.elapsed(),
    })
}

fn run_replicate(
    plan: &ExperimentPlan,
    sample_size: usize,
    replicate: usize,
) -> Result<ReplicateOutcome> {
    let data_seed = derive_seed(&[plan.master_seed, sample_size as u64, replicate as u64, 0]);
    let estimator_seed = derive_seed(&[plan.master_seed, sample_size as u64, replicate as u64, 1]);
    let dataset = plan.distribution.sample(sample_size, data_seed)?;
    let cfg = SelectionConfig {
        estimator: EstimatorConfig {
            seed: estimator_seed,
            ..plan.selection.estimator.clone()
        },
        ..plan.selection.clone()
    };
    let trace = select(&dataset, &cfg)?;
    Ok(ReplicateOutcome {
        steps: trace
            .steps
            .iter()
            .map(|s| (s.chosen.index() as u32, s.chosen_estimate.h_est, s.k_star))
            .collect(),
    })
}

fn aggregate(
    sample_size: usize,
    replicates: usize,
    n_vars: usize,
    iterations: usize,
    outcomes: &[ReplicateOutcome],
) -> SizeReport {
    let mut chosen_counts = vec![vec![0u32; n_vars]; iterations];
    let mut stopped_at_counts = vec![0u32; iterations + 1];
    let mut h_values: Vec<Vec<f64>> = vec![Vec::new(); iterations];
    let mut k_values: Vec<Vec<f64>> = vec![Vec::new(); iterations];

    for outcome in outcomes {
        for (i, &(variable, h, k)) in outcome.steps.iter().enumerate() {
            chosen_counts[i][variable as usize] += 1;
            h_values[i].push(h);
            k_values[i].push(k);
        }
        debug_assert!(outcome.steps.len() <= iterations);
        stopped_at_counts[outcome.steps.len()] += 1;
    }

    let total = replicates as f64;
    let selection_frequency: Vec<Vec<f64>> = chosen_counts
        .iter()
        .map(|row| row.iter().map(|&c| 100.0 * c as f64 / total).collect())
        .collect();
    let selection_frequency_conditional: Vec<Vec<f64>> = chosen_counts
        .iter()
        .map(|row| {
            let recorded: u32 = row.iter().sum();
            row.iter()
                .map(|&c| {
                    if recorded == 0 {
                        0.0
                    } else {
                        100.0 * c as f64 / recorded as f64
                    }
                })
                .collect()
        })
        .collect();
    let mut stop_rate = Vec::with_capacity(iterations);
    let mut stopped = stopped_at_counts[0];
    for &count in &stopped_at_counts[1..] {
        stopped += count;
        stop_rate.push(100.0 * stopped as f64 / total);
    }
    let moments = h_values
        .iter()
        .zip(&k_values)
        .map(|(hs, ks)| {
            let (h_mean, h_sd) = mean_sd(hs);
            let (k_mean, k_sd) = mean_sd(ks);
            IterationMoments {
                recorded: hs.len() as u32,
                h_mean,
                h_sd,
                k_mean,
                k_sd,
            }
        })
        .collect();

    SizeReport {
        sample_size,
        replicates,
        chosen_counts,
        stopped_at_counts,
        selection_frequency,
        selection_frequency_conditional,
        stop_rate,
        moments,
    }
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(variance.sqrt()))
}

impl SimulationReport {
    /// Verifies the closure of the bookkeeping: per (size, iteration) the
    /// all-replicates selection frequencies plus the share of replicates
    /// already stopped (final set smaller than the iteration) total 100%
    /// within 0.01, and stop rates never decrease.
    pub fn check_bookkeeping(&self) -> Result<()> {
        for size in &self.per_size {
            let total = size.replicates as f64;
            let mut previous = 0.0;
            for iter in 0..self.iterations {
                // Final set smaller than the iteration number.
                let already_stopped: u32 = size.stopped_at_counts[..=iter].iter().sum();
                let freq_sum: f64 = size.selection_frequency[iter].iter().sum();
                let closure = freq_sum + 100.0 * already_stopped as f64 / total;
                if (closure - 100.0).abs() > 0.01 {
                    return Err(Error::InvalidConfig(format!(
                        "bookkeeping violated at m={}, iteration {}: frequencies plus stops total {closure}",
                        size.sample_size,
                        iter + 1
                    )));
                }
                if size.stop_rate[iter] + 1e-12 < previous {
                    return Err(Error::InvalidConfig(format!(
                        "stop rate decreased at m={}, iteration {}",
                        size.sample_size,
                        iter + 1
                    )));
                }
                previous = size.stop_rate[iter];
            }
        }
        Ok(())
    }

    /// Selection-frequency table (headline, all-replicates base):
    /// one row per (iteration, variable), one column per sample size.
    pub fn frequency_table(&self, delimiter: char) -> String {
        let mut out = String::new();
        out.push_str("iteration");
        out.push(delimiter);
        out.push_str("variable");
        for size in &self.per_size {
            out.push(delimiter);
            out.push_str(&format!("m{}", size.sample_size));
        }
        out.push('\n');
        for iter in 0..self.iterations {
            for (v, name) in self.variables.iter().enumerate() {
                out.push_str(&format!("{}", iter + 1));
                out.push(delimiter);
                out.push_str(name);
                for size in &self.per_size {
                    out.push(delimiter);
                    out.push_str(&format!("{}", size.selection_frequency[iter][v]));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Cumulative stop-rate table: one row per iteration, one column per
    /// sample size.
    pub fn stop_table(&self, delimiter: char) -> String {
        let mut out = String::new();
        out.push_str("iteration");
        for size in &self.per_size {
            out.push(delimiter);
            out.push_str(&format!("m{}", size.sample_size));
        }
        out.push('\n');
        for iter in 0..self.iterations {
            out.push_str(&format!("{}", iter + 1));
            for size in &self.per_size {
                out.push(delimiter);
                out.push_str(&format!("{}", size.stop_rate[iter]));
            }
            out.push('\n');
        }
        out
    }

    /// Chosen-step moment table: one row per (iteration, sample size) with
    /// mean and standard deviation of the recorded h and k.
    pub fn moments_table(&self, delimiter: char) -> String {
        let mut out = String::new();
        for field in ["iteration", "m", "recorded", "h_mean", "h_sd", "k_mean", "k_sd"] {
            if !out.is_empty() {
                out.push(delimiter);
            }
            out.push_str(field);
        }
        out.push('\n');
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        for iter in 0..self.iterations {
            for size in &self.per_size {
                let m = &size.moments[iter];
                out.push_str(&format!(
                    "{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}\n",
                    iter + 1,
                    size.sample_size,
                    m.recorded,
                    fmt(m.h_mean),
                    fmt(m.h_sd),
                    fmt(m.k_mean),
                    fmt(m.k_sd),
                    d = delimiter
                ));
            }
        }
        out
    }
}

/// Per-cell absolute differences between two reports of identical shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDivergence {
    /// `frequency[size][iteration][variable]` absolute percentage-point gap.
    pub frequency: Vec<Vec<Vec<f64>>>,
    /// `stop_rate[size][iteration]` absolute percentage-point gap.
    pub stop_rate: Vec<Vec<f64>>,
    pub max_frequency: f64,
    pub max_stop_rate: f64,
    /// Largest gap between defined h means, if any cell has both defined.
    pub max_h_mean: Option<f64>,
    pub max_k_mean: Option<f64>,
}

/// Compares two reports cell by cell. Errors unless the shapes (sizes,
/// iteration count, variable count) agree.
pub fn compare_reports(a: &SimulationReport, b: &SimulationReport) -> Result<ReportDivergence> {
    if a.variables.len() != b.variables.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} variables",
            a.variables.len(),
            b.variables.len()
        )));
    }
    if a.iterations != b.iterations {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} iterations",
            a.iterations, b.iterations
        )));
    }
    let sizes_a: Vec<usize> = a.per_size.iter().map(|s| s.sample_size).collect();
    let sizes_b: Vec<usize> = b.per_size.iter().map(|s| s.sample_size).collect();
    if sizes_a != sizes_b {
        return Err(Error::ShapeMismatch(format!(
            "sample sizes {sizes_a:?} vs {sizes_b:?}"
        )));
    }

    let mut frequency = Vec::new();
    let mut stop_rate = Vec::new();
    let mut max_frequency = 0.0f64;
    let mut max_stop = 0.0f64;
    let mut max_h: Option<f64> = None;
    let mut max_k: Option<f64> = None;
    for (sa, sb) in a.per_size.iter().zip(&b.per_size) {
        let mut freq_size = Vec::new();
        let mut stop_size = Vec::new();
        for iter in 0..a.iterations {
            let row: Vec<f64> = sa.selection_frequency[iter]
                .iter()
                .zip(&sb.selection_frequency[iter])
                .map(|(x, y)| (x - y).abs())
                .collect();
            for &d in &row {
                max_frequency = max_frequency.max(d);
            }
            freq_size.push(row);
            let d = (sa.stop_rate[iter] - sb.stop_rate[iter]).abs();
            max_stop = max_stop.max(d);
            stop_size.push(d);

            let (ma, mb) = (&sa.moments[iter], &sb.moments[iter]);
            if let (Some(x), Some(y)) = (ma.h_mean, mb.h_mean) {
                let d = (x - y).abs();
                max_h = Some(max_h.map_or(d, |m| m.max(d)));
            }
            if let (Some(x), Some(y)) = (ma.k_mean, mb.k_mean) {
                let d = (x - y).abs();
                max_k = Some(max_k.map_or(d, |m| m.max(d)));
            }
        }
        frequency.push(freq_size);
        stop_rate.push(stop_size);
    }
    Ok(ReportDivergence {
        frequency,
        stop_rate,
        max_frequency,
        max_stop_rate: max_stop,
        max_h_mean: max_h,
        max_k_mean: max_k,
    })
}
