//! Explicit joint probability tables over (discrete variables, binary class):
//! exact conditional entropies, cell statistics, inverse-CDF sampling of
//! synthetic datasets, and the built-in case-study distribution.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VariableId};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Tolerance on total probability mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Shannon entropy of a binary variable with probability `x`, in bits.
///
/// Uses the convention `0 * log2(0) = 0`, so `h(0) = h(1) = 0`.
///
/// Panics if `x` is outside `[0, 1]`.
pub fn binary_entropy(x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "binary_entropy argument {x} outside [0, 1]"
    );
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// One realized pattern of a variable subset: its probability mass and the
/// conditional probability of class 0 given the pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub pattern: Vec<u32>,
    /// Probability (or empirical weight) of the pattern; positive for stored cells.
    pub p: f64,
    /// Prob(class = 0 | pattern), in [0, 1].
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TableEntry {
    pattern: Vec<u32>,
    class: u8,
    p: f64,
}

/// An explicit probability table over full variable patterns and the class.
///
/// Entries are kept sorted by (pattern, class); that order fixes the
/// inverse-CDF layout used by [`JointDistribution::sample`], making sampling
/// bit-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    variable_names: Vec<String>,
    arities: Vec<usize>,
    entries: Vec<TableEntry>,
}

impl JointDistribution {
    /// Validates and normal-orders a probability table.
    ///
    /// Probabilities must be non-negative, respect the arities, contain no
    /// duplicate (pattern, class) keys, and sum to 1 within [`MASS_TOLERANCE`].
    pub fn new(
        variable_names: Vec<String>,
        arities: Vec<usize>,
        entries: impl IntoIterator<Item = (Vec<u32>, u8, f64)>,
    ) -> Result<Self> {
        if variable_names.len() != arities.len() {
            return Err(Error::InvalidConfig(
                "variable names and arities must have equal length".into(),
            ));
        }
        let mut seen_names = HashMap::new();
        for name in &variable_names {
            if seen_names.insert(name.clone(), ()).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate variable name {name:?}")));
            }
        }
        let mut entries: Vec<TableEntry> = entries
            .into_iter()
            .map(|(pattern, class, p)| TableEntry { pattern, class, p })
            .collect();
        for entry in &entries {
            if entry.pattern.len() != arities.len()
                || entry
                    .pattern
                    .iter()
                    .zip(&arities)
                    .any(|(&v, &k)| v as usize >= k)
            {
                return Err(Error::ArityViolation {
                    pattern: entry.pattern.clone(),
                    arities: arities.clone(),
                });
            }
            if entry.class > 1 {
                return Err(Error::InvalidConfig(format!(
                    "class value {} is not 0 or 1",
                    entry.class
                )));
            }
            if entry.p.is_nan() || entry.p < 0.0 {
                return Err(Error::NegativeProbability {
                    pattern: entry.pattern.clone(),
                    class: entry.class,
                    value: entry.p,
                });
            }
        }
        entries.sort_by(|a, b| a.pattern.cmp(&b.pattern).then(a.class.cmp(&b.class)));
        if let Some(w) = entries
            .windows(2)
            .find(|w| w[0].pattern == w[1].pattern && w[0].class == w[1].class)
        {
            return Err(Error::DuplicateEntry {
                pattern: w[0].pattern.clone(),
                class: w[0].class,
            });
        }
        let total: f64 = entries.iter().map(|e| e.p).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized {
                total,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(JointDistribution {
            variable_names,
            arities,
            entries,
        })
    }

    /// The built-in five-variable case study, addressable as
    /// `paper-case-study` on the command line.
    ///
    /// The class depends on x1 and x2 through an 8-cell table with exact
    /// rational masses (numerators over 96); x3, x4, x5 are fair independent
    /// bits, so each full-pattern mass is the cell value divided by 8,
    /// i.e. a numerator over 768.
    pub fn case_study() -> Self {
        // (x1, x2, class) -> numerator / 96
        const CELLS: [((u32, u32, u8), u64); 8] = [
            ((0, 0, 0), 23),
            ((0, 0, 1), 1),
            ((0, 1, 0), 9),
            ((0, 1, 1), 15),
            ((1, 0, 0), 4),
            ((1, 0, 1), 20),
            ((1, 1, 0), 0),
            ((1, 1, 1), 24),
        ];
        let mut entries = Vec::with_capacity(64);
        for &((x1, x2, class), numerator) in &CELLS {
            for x3 in 0..2u32 {
                for x4 in 0..2u32 {
                    for x5 in 0..2u32 {
                        entries.push((
                            vec![x1, x2, x3, x4, x5],
                            class,
                            numerator as f64 / 768.0,
                        ));
                    }
                }
            }
        }
        let names = (1..=5).map(|i| format!("x{i}")).collect();
        JointDistribution::new(names, vec![2; 5], entries)
            .expect("built-in table is normalized by construction")
    }

    /// The empirical distribution of a dataset: each observed full pattern
    /// and class gets mass `count / m`.
    pub fn empirical(data: &Dataset) -> Self {
        let all: Vec<VariableId> = data.variables().collect();
        let view = data.project(&all).expect("full roster is always valid");
        let m = data.m() as f64;
        let mut entries = Vec::new();
        for (pattern, (c0, c1)) in view.cell_counts() {
            if c0 > 0 {
                entries.push((pattern.clone(), 0u8, c0 as f64 / m));
            }
            if c1 > 0 {
                entries.push((pattern, 1u8, c1 as f64 / m));
            }
        }
        let arities = all.iter().map(|&v| data.category_count(v)).collect();
        JointDistribution::new(data.variable_names().to_vec(), arities, entries)
            .expect("empirical masses are normalized by construction")
    }

    /// Reads a table from a delimited file: one row per (pattern, class)
    /// entry, pattern columns holding non-negative integer codes, the class
    /// column holding 0/1 and a final probability column named `p` holding
    /// decimals or `a/b` rationals. Arities are inferred from the codes.
    pub fn load(path: impl AsRef<Path>, class_column: &str, delimiter: u8) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_path(path)
            .map_err(|e| crate::dataset::wrap_csv(path, e))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| crate::dataset::wrap_csv(path, e))?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let mut seen = HashMap::new();
        for name in &headers {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::DuplicateColumn {
                    path: path.into(),
                    name: name.clone(),
                });
            }
        }
        let class_idx = headers
            .iter()
            .position(|h| h == class_column)
            .ok_or_else(|| Error::MissingClassColumn {
                path: path.into(),
                name: class_column.to_string(),
            })?;
        let prob_idx = headers
            .iter()
            .position(|h| h == "p")
            .ok_or_else(|| Error::MissingClassColumn {
                path: path.into(),
                name: "p".to_string(),
            })?;
        if prob_idx == class_idx {
            return Err(Error::InvalidConfig(
                "class column and probability column must differ".into(),
            ));
        }
        let variable_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != class_idx && i != prob_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let var_cols: Vec<usize> = (0..headers.len())
            .filter(|&i| i != class_idx && i != prob_idx)
            .collect();

        let mut entries: Vec<(Vec<u32>, u8, f64)> = Vec::new();
        for (row_number, record) in reader.records().enumerate() {
            let record = record.map_err(|e| crate::dataset::wrap_csv(path, e))?;
            let row = row_number + 1;
            let field = |col: usize| -> Result<&str> {
                let value = record.get(col).unwrap_or("");
                if value.is_empty() {
                    return Err(Error::EmptyField {
                        path: path.into(),
                        row,
                        column: headers[col].clone(),
                    });
                }
                Ok(value)
            };
            let mut pattern = Vec::with_capacity(var_cols.len());
            for &col in &var_cols {
                let value = field(col)?;
                let code: u32 = value.parse().map_err(|_| Error::InvalidField {
                    path: path.into(),
                    row,
                    column: headers[col].clone(),
                    value: value.to_string(),
                    message: "expected a non-negative integer code".into(),
                })?;
                pattern.push(code);
            }
            let class = match field(class_idx)? {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(Error::InvalidClassValue {
                        path: path.into(),
                        row,
                        column: headers[class_idx].clone(),
                        value: other.to_string(),
                    })
                }
            };
            let raw = field(prob_idx)?;
            let p = parse_probability(raw).ok_or_else(|| Error::InvalidField {
                path: path.into(),
                row,
                column: headers[prob_idx].clone(),
                value: raw.to_string(),
                message: "expected a decimal or a/b rational".into(),
            })?;
            entries.push((pattern, class, p));
        }
        let mut arities = vec![0usize; var_cols.len()];
        for (pattern, _, _) in &entries {
            for (slot, &code) in pattern.iter().enumerate() {
                arities[slot] = arities[slot].max(code as usize + 1);
            }
        }
        JointDistribution::new(variable_names, arities, entries)
    }

    pub fn n_variables(&self) -> usize {
        self.variable_names.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = VariableId> {
        (0..self.n_variables()).map(VariableId::new)
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn variable_named(&self, name: &str) -> Option<VariableId> {
        self.variable_names
            .iter()
            .position(|n| n == name)
            .map(VariableId::new)
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    /// Stored mass of a (full pattern, class) key; absent keys carry 0.
    pub fn prob(&self, pattern: &[u32], class: u8) -> f64 {
        self.entries
            .binary_search_by(|e| {
                e.pattern
                    .as_slice()
                    .cmp(pattern)
                    .then(e.class.cmp(&class))
            })
            .map(|i| self.entries[i].p)
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    /// Marginal probability of class 0.
    pub fn class_prob0(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.class == 0)
            .map(|e| e.p)
            .sum()
    }

    /// Marginalizes onto `vars`: every realized pattern with its mass and
    /// conditional class-0 probability, in sorted pattern order.
    pub fn cell_stats(&self, vars: &[VariableId]) -> Result<Vec<CellStats>> {
        let vars = self.check_vars(vars)?;
        let mut cells: BTreeMap<Vec<u32>, (f64, f64)> = BTreeMap::new();
        for entry in &self.entries {
            let key: Vec<u32> = vars.iter().map(|v| entry.pattern[v.index()]).collect();
            let cell = cells.entry(key).or_insert((0.0, 0.0));
            cell.0 += entry.p;
            if entry.class == 0 {
                cell.1 += entry.p;
            }
        }
        Ok(cells
            .into_iter()
            .filter(|&(_, (p, _))| p > 0.0)
            .map(|(pattern, (p, p0))| CellStats {
                pattern,
                p,
                q: p0 / p,
            })
            .collect())
    }

    /// Exact conditional entropy of the class given `vars`, in bits:
    /// the cell-mass-weighted binary entropy of the conditional class
    /// probability, summed over realized patterns.
    pub fn conditional_entropy(&self, vars: &[VariableId]) -> Result<f64> {
        Ok(self
            .cell_stats(vars)?
            .iter()
            .map(|cell| cell.p * binary_entropy(cell.q.clamp(0.0, 1.0)))
            .sum())
    }

    /// Draws `m` i.i.d. observations by inverse CDF over the sorted table.
    ///
    /// Identical `(self, m, seed)` produce a bit-identical dataset.
    pub fn sample(&self, m: usize, seed: u64) -> Result<Dataset> {
        if m < 2 {
            return Err(Error::TooFewRows { m });
        }
        let positive: Vec<&TableEntry> = self.entries.iter().filter(|e| e.p > 0.0).collect();
        let mut cumulative = Vec::with_capacity(positive.len());
        let mut acc = 0.0;
        for entry in &positive {
            acc += entry.p;
            cumulative.push(acc);
        }
        let mut rng = rng_from_seed(seed);
        let mut columns: Vec<Vec<u32>> = vec![Vec::with_capacity(m); self.n_variables()];
        let mut class_labels = Vec::with_capacity(m);
        for _ in 0..m {
            let u: f64 = rng.random();
            let mut idx = cumulative.partition_point(|&c| c <= u);
            if idx == positive.len() {
                // u landed beyond the accumulated mass (float dust below 1).
                idx = positive.len() - 1;
            }
            let entry = positive[idx];
            for (v, column) in columns.iter_mut().enumerate() {
                column.push(entry.pattern[v]);
            }
            class_labels.push(entry.class);
        }
        Dataset::from_codes(
            self.variable_names.clone(),
            columns,
            self.arities.clone(),
            class_labels,
        )
    }

    fn check_vars(&self, vars: &[VariableId]) -> Result<Vec<VariableId>> {
        let mut vars = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        for v in &vars {
            if v.index() >= self.n_variables() {
                return Err(Error::VariableOutOfRange {
                    index: v.index(),
                    count: self.n_variables(),
                });
            }
        }
        Ok(vars)
    }
}

fn parse_probability(raw: &str) -> Option<f64> {
    if let Some((num, den)) = raw.split_once('/') {
        let num: u64 = num.trim().parse().ok()?;
        let den: u64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(num as f64 / den as f64);
    }
    let p: f64 = raw.parse().ok()?;
    p.is_finite().then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize) -> VariableId {
        VariableId::new(i)
    }

    #[test]
    fn binary_entropy_known_points() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(3.0 / 8.0) - 0.954434002924965).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "outside [0, 1]")]
    fn binary_entropy_rejects_out_of_range() {
        binary_entropy(1.5);
    }

    #[test]
    fn case_study_table_entries() {
        let j = JointDistribution::case_study();
        assert_eq!(j.n_variables(), 5);
        // (x1=1, x2=1, c=0) has zero mass for every x3 x4 x5.
        for x3 in 0..2 {
            for x4 in 0..2 {
                for x5 in 0..2 {
                    assert_eq!(j.prob(&[1, 1, x3, x4, x5], 0), 0.0);
                }
            }
        }
        assert_eq!(j.prob(&[0, 0, 0, 0, 0], 0), 23.0 / 768.0);
        assert!((j.total_mass() - 1.0).abs() <= MASS_TOLERANCE);
        assert!((j.class_prob0() - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn case_study_exact_entropies() {
        let j = JointDistribution::case_study();
        let h1 = j.conditional_entropy(&[var(0)]).unwrap();
        let h2 = j.conditional_entropy(&[var(1)]).unwrap();
        let h12 = j.conditional_entropy(&[var(0), var(1)]).unwrap();
        let h_empty = j.conditional_entropy(&[]).unwrap();
        assert!((h1 - 0.6660563421790616).abs() < 1e-12);
        assert!((h2 - 0.8424558342068216).abs() < 1e-12);
        assert!((h12 - 0.4635846793516261).abs() < 1e-12);
        assert!((h_empty - 0.954434002924965).abs() < 1e-12);
        for i in 2..5 {
            let h = j.conditional_entropy(&[var(i)]).unwrap();
            assert!((h - h_empty).abs() < 1e-12, "x{} should be irrelevant", i + 1);
        }
    }

    #[test]
    fn cell_stats_for_pair_match_hand_values() {
        let j = JointDistribution::case_study();
        let cells = j.cell_stats(&[var(0), var(1)]).unwrap();
        assert_eq!(cells.len(), 4);
        let expected_q = [23.0 / 24.0, 3.0 / 8.0, 1.0 / 6.0, 0.0];
        for (cell, q) in cells.iter().zip(expected_q) {
            assert!((cell.p - 0.25).abs() < 1e-15);
            assert!((cell.q - q).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let j = JointDistribution::case_study();
        let a = j.sample(10, 42).unwrap();
        let b = j.sample(10, 42).unwrap();
        assert_eq!(a, b);
        let c = j.sample(10, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_rejects_tiny_m() {
        let j = JointDistribution::case_study();
        assert!(matches!(j.sample(1, 0), Err(Error::TooFewRows { m: 1 })));
    }

    #[test]
    fn point_mass_distribution_samples_identical_rows() {
        let j = JointDistribution::new(
            vec!["a".into()],
            vec![2],
            vec![(vec![1], 1u8, 1.0)],
        )
        .unwrap();
        let d = j.sample(5, 7).unwrap();
        assert_eq!(d.column(var(0)), &[1, 1, 1, 1, 1]);
        assert_eq!(d.class_labels(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn law_of_large_numbers_against_table_masses() {
        let j = JointDistribution::case_study();
        let m = 100_000;
        let d = j.sample(m, 2024).unwrap();
        let mut hits_zero_cell = 0usize;
        let mut hits_target = 0usize;
        for row in 0..m {
            let x1 = d.column(var(0))[row];
            let x2 = d.column(var(1))[row];
            let c = d.class_labels()[row];
            if x1 == 1 && x2 == 1 && c == 0 {
                hits_zero_cell += 1;
            }
            let full: Vec<u32> = (0..5).map(|v| d.column(var(v))[row]).collect();
            if full == [0, 0, 0, 0, 0] && c == 0 {
                hits_target += 1;
            }
        }
        assert_eq!(hits_zero_cell, 0);
        let p = 23.0 / 768.0;
        let freq = hits_target as f64 / m as f64;
        let se = (p * (1.0 - p) / m as f64).sqrt();
        assert!(
            (freq - p).abs() <= 3.0 * se,
            "frequency {freq} departs from {p} by more than 3 standard errors"
        );
    }

    #[test]
    fn unnormalized_table_is_rejected_with_total() {
        let err = JointDistribution::new(
            vec!["a".into()],
            vec![2],
            vec![(vec![0], 0u8, 0.4), (vec![1], 1u8, 0.4)],
        );
        match err {
            Err(Error::NotNormalized { total, .. }) => assert!((total - 0.8).abs() < 1e-15),
            other => panic!("expected NotNormalized, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_entry_is_rejected() {
        let err = JointDistribution::new(
            vec!["a".into()],
            vec![2],
            vec![(vec![0], 0u8, 0.5), (vec![0], 0u8, 0.5)],
        );
        assert!(matches!(err, Err(Error::DuplicateEntry { .. })));
    }

    #[test]
    fn probability_parsing() {
        assert_eq!(parse_probability("1/4"), Some(0.25));
        assert_eq!(parse_probability("23/96"), Some(23.0 / 96.0));
        assert_eq!(parse_probability("0.125"), Some(0.125));
        assert_eq!(parse_probability("x"), None);
        assert_eq!(parse_probability("1/0"), None);
    }
}
