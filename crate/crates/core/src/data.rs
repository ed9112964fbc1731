//! Datasets, detection results, and their CSV representations.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::samplers::SampleIndex;
use crate::scalar::Real;

/// A numeric dataset: `n_rows x n_cols` values stored row-major, with named
/// columns and an optional per-row ground-truth outlier label.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    id: String,
    column_names: Vec<String>,
    values: Vec<T>,
    n_rows: usize,
    n_cols: usize,
    ground_truth: Option<Vec<bool>>,
}

impl<T: Real> Dataset<T> {
    /// Builds a dataset from row-major values, checking every invariant:
    /// at least one row and column, a rectangular value buffer, all values
    /// finite, and a ground-truth vector (if any) of matching length.
    pub fn new(
        id: impl Into<String>,
        column_names: Vec<String>,
        values: Vec<T>,
        ground_truth: Option<Vec<bool>>,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        if n_cols == 0 {
            return Err(Error::Dimension("dataset needs at least one column".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(n_cols) {
            return Err(Error::Dimension(format!(
                "value buffer of length {} is not a non-empty multiple of {n_cols} columns",
                values.len()
            )));
        }
        let n_rows = values.len() / n_cols;
        if let Some((pos, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols,
                column_names[pos % n_cols]
            )));
        }
        if let Some(gt) = &ground_truth {
            if gt.len() != n_rows {
                return Err(Error::Dimension(format!(
                    "ground truth has {} labels for {n_rows} rows",
                    gt.len()
                )));
            }
        }
        Ok(Dataset {
            id: id.into(),
            column_names,
            values,
            n_rows,
            n_cols,
            ground_truth,
        })
    }

    /// Convenience constructor from a list of equal-length rows, naming the
    /// columns `x1..xV`.
    pub fn from_rows(id: impl Into<String>, rows: &[Vec<T>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("rows have differing lengths".into()));
        }
        let names = (1..=n_cols).map(|j| format!("x{j}")).collect();
        let values = rows.iter().flatten().copied().collect();
        Dataset::new(id, names, values, None)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.n_cols + j]
    }

    /// Copies column `j` out of the row-major buffer.
    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n_rows).map(|i| self.value(i, j)).collect()
    }

    pub fn ground_truth(&self) -> Option<&[bool]> {
        self.ground_truth.as_deref()
    }

    /// Attaches (or replaces) ground-truth labels.
    pub fn with_ground_truth(mut self, gt: Vec<bool>) -> Result<Self> {
        if gt.len() != self.n_rows {
            return Err(Error::Dimension(format!(
                "ground truth has {} labels for {} rows",
                gt.len(),
                self.n_rows
            )));
        }
        self.ground_truth = Some(gt);
        Ok(self)
    }

    /// The sub-dataset containing only the sampled rows (and their
    /// ground-truth labels), in index order.
    pub fn restrict(&self, sample: &SampleIndex) -> Result<Self> {
        if sample.parent_n() != self.n_rows {
            return Err(Error::Dimension(format!(
                "sample drawn from {} rows applied to dataset of {} rows",
                sample.parent_n(),
                self.n_rows
            )));
        }
        let mut values = Vec::with_capacity(sample.len() * self.n_cols);
        for &i in sample.indices() {
            values.extend_from_slice(self.row(i));
        }
        let ground_truth = self
            .ground_truth
            .as_ref()
            .map(|gt| sample.indices().iter().map(|&i| gt[i]).collect());
        Dataset::new(
            self.id.clone(),
            self.column_names.clone(),
            values,
            ground_truth,
        )
    }

    /// Loads a dataset from CSV text: a header row naming the columns, then
    /// one numeric row per record. Lines starting with `#` are skipped. If
    /// `gt_column` is given, that column is parsed as 0/1 ground truth
    /// instead of data; its absence is an error.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        id: impl Into<String>,
        gt_column: Option<&str>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let gt_idx = match gt_column {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::Config(format!("ground-truth column {name:?} not found in header"))
            })?),
            None => None,
        };
        let column_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != gt_idx)
            .map(|(_, h)| h.clone())
            .collect();
        if column_names.is_empty() {
            return Err(Error::Dimension("dataset needs at least one column".into()));
        }

        let mut values = Vec::new();
        let mut gt = Vec::new();
        for (rec_no, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::Parse {
                    row: rec_no + 1,
                    column: String::new(),
                    reason: format!(
                        "expected {} fields, found {}",
                        headers.len(),
                        record.len()
                    ),
                });
            }
            for (j, field) in record.iter().enumerate() {
                if Some(j) == gt_idx {
                    match field {
                        "0" => gt.push(false),
                        "1" => gt.push(true),
                        other => {
                            return Err(Error::Parse {
                                row: rec_no + 1,
                                column: headers[j].clone(),
                                reason: format!("ground truth must be 0 or 1, got {other:?}"),
                            })
                        }
                    }
                    continue;
                }
                let parsed: f64 = field.parse().map_err(|_| Error::Parse {
                    row: rec_no + 1,
                    column: headers[j].clone(),
                    reason: format!("expected a number, got {field:?}"),
                })?;
                if !parsed.is_finite() {
                    return Err(Error::Parse {
                        row: rec_no + 1,
                        column: headers[j].clone(),
                        reason: format!("non-finite value {field:?}"),
                    });
                }
                values.push(T::of(parsed));
            }
        }
        if values.is_empty() {
            return Err(Error::Dimension("dataset needs at least one row".into()));
        }
        Dataset::new(id, column_names, values, gt_idx.map(|_| gt))
    }

    /// Loads a dataset from a CSV file; the dataset id is the file stem.
    pub fn load_csv(path: &Path, gt_column: Option<&str>) -> Result<Self> {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string());
        let file = std::fs::File::open(path)?;
        Dataset::from_csv_reader(std::io::BufReader::new(file), id, gt_column)
    }

    /// Writes the dataset as CSV. Ground truth, if present, becomes a
    /// trailing `is_outlier` 0/1 column. Values print in shortest
    /// round-trippable form, so load-after-save is bit-exact.
    pub fn write_csv_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = self.column_names.join(",");
        if self.ground_truth.is_some() {
            header.push_str(",is_outlier");
        }
        writeln!(w, "{header}")?;
        for i in 0..self.n_rows {
            let mut line = self
                .row(i)
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",");
            if let Some(gt) = &self.ground_truth {
                line.push_str(if gt[i] { ",1" } else { ",0" });
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }
}

/// Per-cell flags for column-wise detectors: `n_rows x n_cols` booleans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellFlags {
    flags: Vec<bool>,
    n_rows: usize,
    n_cols: usize,
}

impl CellFlags {
    pub fn new(flags: Vec<bool>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if flags.len() != n_rows * n_cols || n_cols == 0 {
            return Err(Error::Dimension(format!(
                "cell flag buffer of length {} does not match {n_rows} x {n_cols}",
                flags.len()
            )));
        }
        Ok(CellFlags {
            flags,
            n_rows,
            n_cols,
        })
    }

    /// Assembles cell flags from per-column flag vectors.
    pub fn from_columns(columns: &[Vec<bool>], n_rows: usize) -> Result<Self> {
        let n_cols = columns.len();
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::Dimension(
                "per-column flag vectors have differing lengths".into(),
            ));
        }
        let mut flags = vec![false; n_rows * n_cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, &f) in col.iter().enumerate() {
                flags[i * n_cols + j] = f;
            }
        }
        CellFlags::new(flags, n_rows, n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.flags[i * self.n_cols..(i + 1) * self.n_cols]
    }
}

/// How per-cell flags collapse into one flag per record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationRule {
    /// A record is an outlier if any of its cells is flagged.
    Any,
    /// A record is an outlier if more than half of its cells are flagged.
    Majority,
}

impl std::fmt::Display for AggregationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AggregationRule::Any => "any",
            AggregationRule::Majority => "majority",
        })
    }
}

impl std::str::FromStr for AggregationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(AggregationRule::Any),
            "majority" => Ok(AggregationRule::Majority),
            other => Err(Error::Config(format!(
                "unknown aggregation rule {other:?} (expected \"any\" or \"majority\")"
            ))),
        }
    }
}

/// Collapses cell flags to record flags under the given rule. `Majority`
/// requires strictly more than half the cells flagged.
pub fn aggregate_cells(cells: &CellFlags, rule: AggregationRule) -> Vec<bool> {
    (0..cells.n_rows())
        .map(|i| {
            let row = cells.row(i);
            match rule {
                AggregationRule::Any => row.iter().any(|&f| f),
                AggregationRule::Majority => {
                    2 * row.iter().filter(|&&f| f).count() > row.len()
                }
            }
        })
        .collect()
}

/// What a detection run covered: the whole dataset or one sample of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Whole,
    Sample(SampleIndex),
}

/// The outcome of running one detector once.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    method: String,
    params: BTreeMap<String, String>,
    record_flags: Vec<bool>,
    cell_flags: Option<CellFlags>,
    dataset_id: String,
    scope: Scope,
    seed: u64,
    warnings: Vec<String>,
}

impl DetectionResult {
    /// Assembles a result, checking that flag shapes agree with each other
    /// and with the scope.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        method: impl Into<String>,
        params: BTreeMap<String, String>,
        record_flags: Vec<bool>,
        cell_flags: Option<CellFlags>,
        dataset_id: impl Into<String>,
        scope: Scope,
        seed: u64,
        warnings: Vec<String>,
    ) -> Result<Self> {
        if let Some(cells) = &cell_flags {
            if cells.n_rows() != record_flags.len() {
                return Err(Error::Dimension(format!(
                    "cell flags cover {} rows but there are {} record flags",
                    cells.n_rows(),
                    record_flags.len()
                )));
            }
        }
        if let Scope::Sample(sample) = &scope {
            if sample.len() != record_flags.len() {
                return Err(Error::Dimension(format!(
                    "scope selects {} rows but there are {} record flags",
                    sample.len(),
                    record_flags.len()
                )));
            }
        }
        Ok(DetectionResult {
            method: method.into(),
            params,
            record_flags,
            cell_flags,
            dataset_id: dataset_id.into(),
            scope,
            seed,
            warnings,
        })
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn params(&self) -> &BTreeMap<String, String> {
        &self.params
    }

    /// One flag per covered record, in scope order.
    pub fn record_flags(&self) -> &[bool] {
        &self.record_flags
    }

    pub fn cell_flags(&self) -> Option<&CellFlags> {
        self.cell_flags.as_ref()
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Row indices (into the parent dataset) that the flags refer to.
    pub fn covered_indices(&self) -> Vec<usize> {
        match &self.scope {
            Scope::Whole => (0..self.record_flags.len()).collect(),
            Scope::Sample(s) => s.indices().to_vec(),
        }
    }

    /// Indices of flagged records, in parent-dataset coordinates.
    pub fn flagged_indices(&self) -> Vec<usize> {
        self.covered_indices()
            .into_iter()
            .zip(&self.record_flags)
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }

    /// Serializes the result as CSV: provenance in `#` comments, then one
    /// `record_index,flag` row per covered record (original row numbers).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# method: {}", self.method)?;
        writeln!(w, "# dataset: {}", self.dataset_id)?;
        match &self.scope {
            Scope::Whole => writeln!(w, "# scope: whole")?,
            Scope::Sample(s) => writeln!(
                w,
                "# scope: sample; scheme={}; parent_n={}; sample_seed={}",
                s.scheme(),
                s.parent_n(),
                s.seed()
            )?,
        }
        writeln!(w, "# seed: {}", self.seed)?;
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(w, "# params: {params}")?;
        for warning in &self.warnings {
            writeln!(w, "# warning: {warning}")?;
        }
        writeln!(w, "record_index,flag")?;
        for (i, &f) in self.covered_indices().iter().zip(&self.record_flags) {
            writeln!(w, "{i},{}", u8::from(f))?;
        }
        Ok(())
    }
}
