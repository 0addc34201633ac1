//! Observed samples: a binary class plus discrete variables, with delimited
//! file ingestion and validated construction.
//!
//! Category values are stored as dense 0-based codes per column; the original
//! string labels are kept in a side map so files round-trip. A `Dataset` is
//! immutable after construction and safe to share across threads.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Handle for one variable of a dataset or distribution roster.
///
/// The display name lives in the owning roster; the id itself is just the
/// 0-based column index, cheap to copy and to key sets with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(usize);

impl VariableId {
    pub fn new(index: usize) -> Self {
        VariableId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// Identity of a dataset for trace/report echoes: shape plus a content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub m: usize,
    pub n_variables: usize,
    pub content_hash: String,
}

/// m observations of a binary class together with discrete variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    variable_names: Vec<String>,
    /// Column-major category codes; `columns[v][row] < category size of v`.
    columns: Vec<Vec<u32>>,
    /// Per variable: code -> original label, in first-appearance order.
    category_labels: Vec<Vec<String>>,
    class_labels: Vec<u8>,
    class_name: String,
}

impl Dataset {
    /// Builds a dataset from pre-coded columns.
    ///
    /// `category_counts[v]` gives the number of categories of variable `v`;
    /// codes must lie in `[0, category_counts[v])`. Labels default to the
    /// decimal rendering of each code.
    pub fn from_codes(
        variable_names: Vec<String>,
        columns: Vec<Vec<u32>>,
        category_counts: Vec<usize>,
        class_labels: Vec<u8>,
    ) -> Result<Self> {
        let m = class_labels.len();
        if m < 2 {
            return Err(Error::TooFewRows { m });
        }
        if variable_names.len() != columns.len() || variable_names.len() != category_counts.len() {
            return Err(Error::InvalidConfig(
                "variable names, columns and category counts must have equal length".into(),
            ));
        }
        let mut seen = HashMap::new();
        for name in &variable_names {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate variable name {name:?}")));
            }
        }
        if let Some(label) = class_labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidConfig(format!(
                "class label {label} is not 0 or 1"
            )));
        }
        for (v, column) in columns.iter().enumerate() {
            if column.len() != m {
                return Err(Error::InvalidConfig(format!(
                    "column {} has {} rows, class has {}",
                    variable_names[v],
                    column.len(),
                    m
                )));
            }
            if let Some(&code) = column.iter().find(|&&c| c as usize >= category_counts[v]) {
                return Err(Error::InvalidConfig(format!(
                    "code {} out of range for variable {} ({} categories)",
                    code, variable_names[v], category_counts[v]
                )));
            }
        }
        let category_labels = category_counts
            .iter()
            .map(|&k| (0..k).map(|c| c.to_string()).collect())
            .collect();
        Ok(Dataset {
            variable_names,
            columns,
            category_labels,
            class_labels,
            class_name: "class".into(),
        })
    }

    /// Reads a delimited file with a header row; the named column is the
    /// class, every other column becomes a variable in file order.
    pub fn load(path: impl AsRef<Path>, class_column: &str, delimiter: u8) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_path(path)
            .map_err(|e| wrap_csv(path, e))?;

        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| wrap_csv(path, e))?
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

        let variable_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != class_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let n_vars = variable_names.len();

        let mut columns: Vec<Vec<u32>> = vec![Vec::new(); n_vars];
        let mut category_labels: Vec<Vec<String>> = vec![Vec::new(); n_vars];
        let mut code_maps: Vec<HashMap<String, u32>> = vec![HashMap::new(); n_vars];
        let mut class_labels: Vec<u8> = Vec::new();

        for (row_number, record) in reader.records().enumerate() {
            let record = record.map_err(|e| wrap_csv(path, e))?;
            // 1-based data row for messages, header excluded.
            let row = row_number + 1;
            let mut var_slot = 0usize;
            for (col, field) in record.iter().enumerate() {
                let column_name = headers[col].clone();
                if field.is_empty() {
                    return Err(Error::EmptyField {
                        path: path.into(),
                        row,
                        column: column_name,
                    });
                }
                if col == class_idx {
                    let label = match field {
                        "0" => 0u8,
                        "1" => 1u8,
                        other => {
                            return Err(Error::InvalidClassValue {
                                path: path.into(),
                                row,
                                column: column_name,
                                value: other.to_string(),
                            })
                        }
                    };
                    class_labels.push(label);
                } else {
                    let map = &mut code_maps[var_slot];
                    let next = map.len() as u32;
                    let code = *map.entry(field.to_string()).or_insert_with(|| {
                        category_labels[var_slot].push(field.to_string());
                        next
                    });
                    columns[var_slot].push(code);
                    var_slot += 1;
                }
            }
        }

        let m = class_labels.len();
        if m < 2 {
            return Err(Error::TooFewRows { m });
        }
        Ok(Dataset {
            variable_names,
            columns,
            category_labels,
            class_labels,
            class_name: class_column.to_string(),
        })
    }

    /// Writes the dataset back out: variables in roster order, class last,
    /// original category labels restored.
    pub fn write(&self, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_path(path)
            .map_err(|e| wrap_csv(path, e))?;
        let mut header: Vec<&str> = self.variable_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.class_name);
        writer.write_record(&header).map_err(|e| wrap_csv(path, e))?;
        for row in 0..self.m() {
            let mut record: Vec<&str> = Vec::with_capacity(header.len());
            for v in 0..self.n_variables() {
                record.push(&self.category_labels[v][self.columns[v][row] as usize]);
            }
            record.push(if self.class_labels[row] == 0 { "0" } else { "1" });
            writer.write_record(&record).map_err(|e| wrap_csv(path, e))?;
        }
        writer.flush().map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.class_labels.len()
    }

    pub fn n_variables(&self) -> usize {
        self.variable_names.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = VariableId> {
        (0..self.n_variables()).map(VariableId)
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn variable_name(&self, id: VariableId) -> &str {
        &self.variable_names[id.0]
    }

    pub fn variable_named(&self, name: &str) -> Option<VariableId> {
        self.variable_names.iter().position(|n| n == name).map(VariableId)
    }

    pub fn class_labels(&self) -> &[u8] {
        &self.class_labels
    }

    pub fn column(&self, id: VariableId) -> &[u32] {
        &self.columns[id.0]
    }

    pub fn category_count(&self, id: VariableId) -> usize {
        self.category_labels[id.0].len()
    }

    pub fn category_label(&self, id: VariableId, code: u32) -> &str {
        &self.category_labels[id.0][code as usize]
    }

    /// Logical view onto the selected variables plus the class.
    ///
    /// The id list is canonicalized (sorted, deduplicated) so views over the
    /// same variable set are identical regardless of argument order.
    pub fn project(&self, vars: &[VariableId]) -> Result<DatasetView<'_>> {
        let mut vars: Vec<VariableId> = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        for v in &vars {
            if v.0 >= self.n_variables() {
                return Err(Error::VariableOutOfRange {
                    index: v.0,
                    count: self.n_variables(),
                });
            }
        }
        Ok(DatasetView { data: self, vars })
    }

    /// Shape plus FNV-1a content hash over labels and class values.
    pub fn fingerprint(&self) -> DatasetFingerprint {
        let mut hash = Fnv1a::new();
        hash.write_usize(self.m());
        hash.write_usize(self.n_variables());
        for name in &self.variable_names {
            hash.write_str(name);
        }
        for v in 0..self.n_variables() {
            for &code in &self.columns[v] {
                hash.write_str(&self.category_labels[v][code as usize]);
            }
        }
        hash.write_bytes(&self.class_labels);
        DatasetFingerprint {
            m: self.m(),
            n_variables: self.n_variables(),
            content_hash: format!("{:016x}", hash.finish()),
        }
    }
}

/// Copy-free projection of a [`Dataset`] onto a variable subset plus class.
#[derive(Debug, Clone)]
pub struct DatasetView<'a> {
    data: &'a Dataset,
    vars: Vec<VariableId>,
}

impl<'a> DatasetView<'a> {
    pub fn m(&self) -> usize {
        self.data.m()
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    pub fn class_labels(&self) -> &[u8] {
        self.data.class_labels()
    }

    /// The realized pattern of the projected variables at `row`.
    pub fn pattern(&self, row: usize) -> Vec<u32> {
        self.vars.iter().map(|v| self.data.columns[v.0][row]).collect()
    }

    /// Per-pattern class counts `(count of class 0, count of class 1)` over
    /// all rows, keyed and ordered by pattern.
    pub fn cell_counts(&self) -> BTreeMap<Vec<u32>, (u64, u64)> {
        let mut cells: BTreeMap<Vec<u32>, (u64, u64)> = BTreeMap::new();
        for row in 0..self.m() {
            let entry = cells.entry(self.pattern(row)).or_insert((0, 0));
            if self.data.class_labels[row] == 0 {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
        cells
    }

    /// Dense cell index: for each row the id of its pattern cell, with ids
    /// assigned in sorted pattern order. Lets hot loops count cells into
    /// flat arrays while keeping a canonical cell iteration order.
    pub(crate) fn cell_index(&self) -> (Vec<u32>, usize) {
        let m = self.m();
        let patterns: Vec<Vec<u32>> = (0..m).map(|row| self.pattern(row)).collect();
        let mut ids: BTreeMap<&[u32], u32> = BTreeMap::new();
        for p in &patterns {
            let next = ids.len() as u32;
            ids.entry(p.as_slice()).or_insert(next);
        }
        // BTreeMap insertion order is arrival order for values; renumber in
        // key (sorted pattern) order.
        let mut remap = vec![0u32; ids.len()];
        for (rank, (_, &old)) in ids.iter().enumerate() {
            remap[old as usize] = rank as u32;
        }
        let row_cell = patterns
            .iter()
            .map(|p| remap[ids[p.as_slice()] as usize])
            .collect();
        (row_cell, ids.len())
    }
}

pub(crate) fn wrap_csv(path: &Path, source: csv::Error) -> Error {
    if source.is_io_error() {
        if let csv::ErrorKind::Io(io) = source.into_kind() {
            return Error::Io {
                path: path.into(),
                source: io,
            };
        }
        unreachable!("is_io_error guaranteed an io kind");
    }
    Error::Delimited {
        path: path.into(),
        source,
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn write_str(&mut self, s: &str) {
        self.write_usize(s.len());
        self.write_bytes(s.as_bytes());
    }

    fn write_usize(&mut self, n: usize) {
        self.write_bytes(&(n as u64).to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::from_codes(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1, 0, 1], vec![0, 0, 1, 2]],
            vec![2, 3],
            vec![0, 1, 0, 1],
        )
        .unwrap()
    }

    #[test]
    fn rejects_single_row() {
        let err = Dataset::from_codes(vec!["a".into()], vec![vec![0]], vec![1], vec![0]);
        assert!(matches!(err, Err(Error::TooFewRows { m: 1 })));
    }

    #[test]
    fn project_empty_and_identity() {
        let d = toy();
        let empty = d.project(&[]).unwrap();
        assert!(empty.variables().is_empty());
        assert_eq!(empty.pattern(2), Vec::<u32>::new());

        let all: Vec<VariableId> = d.variables().collect();
        let full = d.project(&all).unwrap();
        assert_eq!(full.pattern(3), vec![1, 2]);
        assert_eq!(full.class_labels(), d.class_labels());
    }

    #[test]
    fn project_unknown_variable() {
        let d = toy();
        assert!(matches!(
            d.project(&[VariableId::new(9)]),
            Err(Error::VariableOutOfRange { index: 9, .. })
        ));
    }

    #[test]
    fn projection_counts_match_direct_group_by() {
        let d = toy();
        let view = d.project(&[VariableId::new(0), VariableId::new(1)]).unwrap();
        let cells = view.cell_counts();
        // Brute-force group-by on the source columns.
        let mut expected: BTreeMap<Vec<u32>, (u64, u64)> = BTreeMap::new();
        for row in 0..d.m() {
            let key = vec![d.column(VariableId::new(0))[row], d.column(VariableId::new(1))[row]];
            let e = expected.entry(key).or_insert((0, 0));
            if d.class_labels()[row] == 0 {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        assert_eq!(cells, expected);
    }

    #[test]
    fn cell_index_is_sorted_by_pattern() {
        let d = toy();
        let view = d.project(&[VariableId::new(1)]).unwrap();
        let (row_cell, n_cells) = view.cell_index();
        assert_eq!(n_cells, 3);
        // Patterns 0,0,1,2 -> cells 0,0,1,2 in sorted order.
        assert_eq!(row_cell, vec![0, 0, 1, 2]);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let d = toy();
        let f1 = d.fingerprint();
        assert_eq!(f1.m, 4);
        assert_eq!(f1.n_variables, 2);
        assert_eq!(f1, d.fingerprint());

        let other = Dataset::from_codes(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1, 0, 1], vec![0, 0, 1, 2]],
            vec![2, 3],
            vec![1, 1, 0, 1],
        )
        .unwrap();
        assert_ne!(f1.content_hash, other.fingerprint().content_hash);
    }
}
