//! Conditional entropy and its standard deviation from a finite sample:
//! repeated half-size subsampling with per-cell binary entropies, optionally
//! Miller-Madow corrected.
//!
//! Each of `n_sub` subsamples draws `floor(m / 2)` distinct rows, groups them
//! by the realized pattern of the variable subset and accumulates the
//! weighted per-cell class entropy. The mean across subsamples is the
//! estimate, the (n_sub - 1)-denominator standard deviation its spread.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetView, VariableId};
use crate::error::{Error, Result};
use crate::rng::{subsample_indices, subsample_rng};

const LN_2: f64 = std::f64::consts::LN_2;

/// Bias handling for per-cell entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// Raw plug-in entropy of the cell's class frequency.
    None,
    /// Plug-in entropy plus (K - 1) / (2 N ln 2) bits, K the number of
    /// classes observed in the cell.
    #[default]
    MillerMadow,
}

/// Parameters of the subsampling estimator.
///
/// The subsample size is fixed at half the sample (`floor(m / 2)`), so only
/// the number of subsamples, the correction and the seed are configurable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Number of random subsamples; at least 2 so a deviation exists.
    pub n_sub: usize,
    pub correction: Correction,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            n_sub: 100,
            correction: Correction::MillerMadow,
            seed: 0,
        }
    }
}

/// Result of the subsampling estimator for one variable subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Mean conditional entropy across subsamples, in bits.
    pub h_est: f64,
    /// Sample standard deviation across subsamples, in bits.
    pub sigma_est: f64,
    pub n_sub_used: usize,
    pub subset: Vec<VariableId>,
}

/// Binary class entropy of a cell from its class counts, Miller-Madow
/// corrected: `h(c0 / N) + (K - 1) / (2 N ln 2)` bits with K the number of
/// nonzero counts. Pure cells (K = 1) receive no correction; mixed cells may
/// exceed 1 bit, deliberately unclamped.
///
/// Panics if both counts are zero.
pub fn binary_entropy_mm(count_c0: u64, count_c1: u64) -> f64 {
    let n = count_c0 + count_c1;
    assert!(n > 0, "a cell must contain at least one observation");
    let k = (count_c0 > 0) as u64 + (count_c1 > 0) as u64;
    let q = count_c0 as f64 / n as f64;
    plugin_binary_entropy(q) + (k - 1) as f64 / (2.0 * n as f64 * LN_2)
}

fn plugin_binary_entropy(q: f64) -> f64 {
    if q == 0.0 || q == 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

fn cell_term(count_c0: u64, count_c1: u64, total: f64, correction: Correction) -> f64 {
    let n_j = count_c0 + count_c1;
    let h = match correction {
        Correction::MillerMadow => binary_entropy_mm(count_c0, count_c1),
        Correction::None => plugin_binary_entropy(count_c0 as f64 / n_j as f64),
    };
    (n_j as f64 / total) * h
}

/// Plug-in conditional entropy of one sample view: rows grouped by pattern,
/// cells weighted by their share of the sample. Cells are summed in sorted
/// pattern order so the value is platform-independent.
pub fn conditional_entropy_once(view: &DatasetView<'_>, correction: Correction) -> f64 {
    let total = view.m() as f64;
    view.cell_counts()
        .values()
        .map(|&(c0, c1)| cell_term(c0, c1, total, correction))
        .sum()
}

/// The subsampling estimator: mean and standard deviation of the plug-in
/// conditional entropy over `cfg.n_sub` half-size subsamples drawn without
/// replacement.
///
/// Deterministic given `(sample, vars, cfg.seed)`; subsample `i` uses its own
/// generator stream, so results do not depend on evaluation order and a run
/// with a larger `n_sub` extends a smaller one.
pub fn estimate(
    sample: &Dataset,
    vars: &[VariableId],
    cfg: &EstimatorConfig,
) -> Result<EntropyEstimate> {
    let m = sample.m();
    if m < 2 {
        return Err(Error::TooFewRows { m });
    }
    if cfg.n_sub < 2 {
        return Err(Error::InvalidConfig(format!(
            "n_sub must be at least 2, got {}",
            cfg.n_sub
        )));
    }
    let view = sample.project(vars)?;
    let n = m / 2;
    let (row_cell, n_cells) = view.cell_index();
    let classes = sample.class_labels();

    let mut h_sub = Vec::with_capacity(cfg.n_sub);
    let mut count_c0 = vec![0u64; n_cells];
    let mut count_c1 = vec![0u64; n_cells];
    for s in 0..cfg.n_sub {
        let mut rng = subsample_rng(cfg.seed, s as u64);
        let rows = subsample_indices(&mut rng, m, n);
        count_c0.fill(0);
        count_c1.fill(0);
        for &row in &rows {
            let cell = row_cell[row] as usize;
            if classes[row] == 0 {
                count_c0[cell] += 1;
            } else {
                count_c1[cell] += 1;
            }
        }
        let total = n as f64;
        let mut h = 0.0;
        for cell in 0..n_cells {
            if count_c0[cell] + count_c1[cell] > 0 {
                h += cell_term(count_c0[cell], count_c1[cell], total, cfg.correction);
            }
        }
        h_sub.push(h);
    }

    let n_sub = cfg.n_sub as f64;
    let mean = h_sub.iter().sum::<f64>() / n_sub;
    let variance = h_sub
        .iter()
        .map(|h| {
            let d = h - mean;
            d * d
        })
        .sum::<f64>()
        / (n_sub - 1.0);
    Ok(EntropyEstimate {
        h_est: mean,
        sigma_est: variance.sqrt(),
        n_sub_used: cfg.n_sub,
        subset: view.variables().to_vec(),
    })
}
