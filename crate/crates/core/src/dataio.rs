//! Loading, cleaning, encoding, scaling and stratified sampling of attack
//! dataset CSVs.
//!
//! The flow is `load_csv` → [`RawTable::clean`] → [`CleanTable::encode`]
//! → [`fit_minmax`] / [`apply_minmax`], optionally followed by
//! [`stratified_subsample`]. Every stage returns a new value; nothing is
//! mutated in place.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    /// Position in the source file header (after dropped columns are removed).
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingFill {
    ConstantZero,
    ColumnMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfinityFill {
    ColumnMean,
    ConstantZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningPolicy {
    pub missing_fill: MissingFill,
    pub infinity_fill: InfinityFill,
}

impl CleaningPolicy {
    /// Missing cells become 0 (UNSW-NB15 convention).
    pub const UNSW: CleaningPolicy = CleaningPolicy {
        missing_fill: MissingFill::ConstantZero,
        infinity_fill: InfinityFill::ColumnMean,
    };
    /// Non-finite cells become the column mean (CICDDoS2019 convention).
    pub const CICDDOS: CleaningPolicy = CleaningPolicy {
        missing_fill: MissingFill::ColumnMean,
        infinity_fill: InfinityFill::ColumnMean,
    };
}

impl Default for CleaningPolicy {
    fn default() -> Self {
        CleaningPolicy::UNSW
    }
}

/// Column values as parsed. Numeric missing cells are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValues {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub meta: ColumnMeta,
    pub values: RawValues,
}

/// A parsed CSV before cleaning.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    features: Vec<RawColumn>,
    label: ColumnMeta,
    label_values: Vec<String>,
}

/// A table with every numeric cell finite; categoricals still textual.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanTable {
    features: Vec<RawColumn>,
    label: ColumnMeta,
    label_values: Vec<String>,
}

/// Category list of one column; the code of a category is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub column: String,
    pub categories: Vec<String>,
}

impl CategoryMap {
    fn from_values(column: &str, values: &[String]) -> Self {
        let set: BTreeSet<&str> = values.iter().map(String::as_str).collect();
        CategoryMap {
            column: column.to_owned(),
            categories: set.into_iter().map(str::to_owned).collect(),
        }
    }

    pub fn code(&self, value: &str) -> Option<usize> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(value))
            .ok()
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }
}

/// Encodings for every categorical column, the label column last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct LabelMapping {
    pub columns: Vec<CategoryMap>,
}

impl LabelMapping {
    pub fn get(&self, column: &str) -> Option<&CategoryMap> {
        self.columns.iter().find(|c| c.column == column)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub column: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct ScalerParams {
    pub columns: Vec<ColumnRange>,
}

/// Immutable numeric feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    features: Vec<ColumnMeta>,
    label: ColumnMeta,
    values: Vec<f64>,
    labels: Vec<usize>,
    label_names: Vec<String>,
}

impl DataTable {
    /// Builds a table, checking shape, label range and finiteness.
    pub fn new(
        features: Vec<ColumnMeta>,
        label: ColumnMeta,
        values: Vec<f64>,
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = features.len();
        if values.len() != labels.len() * n_features {
            return Err(Error::LengthMismatch(format!(
                "{} values for {} rows x {} features",
                values.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(&code) = labels.iter().find(|&&c| c >= label_names.len()) {
            return Err(Error::CodeOutOfRange {
                code,
                n_classes: label_names.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::LayoutMismatch("non-finite value in table".into()));
        }
        let mut names = BTreeSet::new();
        for c in features.iter().chain(std::iter::once(&label)) {
            if !names.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
        }
        if label.kind != ColumnKind::Label || features.iter().any(|c| c.kind == ColumnKind::Label) {
            return Err(Error::LayoutMismatch(
                "exactly one column must be the label".into(),
            ));
        }
        Ok(DataTable {
            features,
            label,
            values,
            labels,
            label_names,
        })
    }

    /// Convenience constructor for in-memory data: numeric features named as
    /// given, label column `label`.
    pub fn from_rows(
        feature_names: &[&str],
        rows: &[Vec<f64>],
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let features = feature_names
            .iter()
            .enumerate()
            .map(|(i, n)| ColumnMeta {
                name: (*n).to_owned(),
                kind: ColumnKind::Numeric,
                index: i,
            })
            .collect();
        let label = ColumnMeta {
            name: "label".into(),
            kind: ColumnKind::Label,
            index: feature_names.len(),
        };
        if rows.iter().any(|r| r.len() != feature_names.len()) {
            return Err(Error::LengthMismatch("row width differs from header".into()));
        }
        let values = rows.iter().flatten().copied().collect();
        DataTable::new(features, label, values, labels, label_names)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn features(&self) -> &[ColumnMeta] {
        &self.features
    }

    pub fn label_column(&self) -> &ColumnMeta {
        &self.label
    }

    /// All columns, features and label, in source header order.
    pub fn columns(&self) -> Vec<&ColumnMeta> {
        let mut cols: Vec<&ColumnMeta> = self.features.iter().chain([&self.label]).collect();
        cols.sort_by_key(|c| c.index);
        cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_features();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features() + feature]
    }

    pub fn column_values(&self, feature: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.value(r, feature)).collect()
    }

    /// Row counts per class code.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices` (repeats allowed), keeping the class set unchanged.
    pub fn select_rows(&self, indices: &[usize]) -> DataTable {
        let w = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * w);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        DataTable {
            features: self.features.clone(),
            label: self.label.clone(),
            values,
            labels,
            label_names: self.label_names.clone(),
        }
    }

    /// Keeps only the given feature positions, in the order given.
    pub fn select_features(&self, keep: &[usize]) -> DataTable {
        let w = self.n_features();
        let mut values = Vec::with_capacity(self.n_rows() * keep.len());
        for r in 0..self.n_rows() {
            let row = &self.values[r * w..(r + 1) * w];
            values.extend(keep.iter().map(|&j| row[j]));
        }
        DataTable {
            features: keep.iter().map(|&j| self.features[j].clone()).collect(),
            label: self.label.clone(),
            values,
            labels: self.labels.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// Drops classes that have no rows and renumbers the remaining codes,
    /// preserving their relative order.
    pub fn compact_classes(&self) -> DataTable {
        let counts = self.class_counts();
        let mut remap = vec![usize::MAX; self.n_classes()];
        let mut names = Vec::new();
        for (code, &n) in counts.iter().enumerate() {
            if n > 0 {
                remap[code] = names.len();
                names.push(self.label_names[code].clone());
            }
        }
        DataTable {
            features: self.features.clone(),
            label: self.label.clone(),
            values: self.values.clone(),
            labels: self.labels.iter().map(|&l| remap[l]).collect(),
            label_names: names,
        }
    }

    /// Writes the table as CSV in source header order; labels are written as
    /// class names.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let cols = self.columns();
        wtr.write_record(cols.iter().map(|c| c.name.as_str()))
            .map_err(csv_write_err)?;
        // position of each header column in `features`, None for the label
        let slots: Vec<Option<usize>> = cols
            .iter()
            .map(|c| self.features.iter().position(|f| f.name == c.name))
            .collect();
        let mut record = Vec::with_capacity(cols.len());
        for r in 0..self.n_rows() {
            record.clear();
            let row = self.row(r);
            for slot in &slots {
                record.push(match slot {
                    Some(j) => format!("{}", row[*j]),
                    None => self.label_names[self.labels[r]].clone(),
                });
            }
            wtr.write_record(&record).map_err(csv_write_err)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn csv_write_err(e: csv::Error) -> Error {
    Error::io(
        "<csv output>",
        std::io::Error::other(e.to_string()),
    )
}

/// Cell text that counts as a missing value.
fn is_missing_token(s: &str) -> bool {
    s.is_empty() || s.eq_ignore_ascii_case("nan")
}

/// Parses a numeric cell; missing cells become NaN, `None` means the cell is
/// not a number.
fn parse_cell(s: &str) -> Option<f64> {
    if is_missing_token(s) {
        return Some(f64::NAN);
    }
    s.parse::<f64>().ok()
}

/// Appends `.1`, `.2`, ... to repeated header names.
fn dedupe_headers(raw: Vec<String>) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut taken: BTreeSet<String> = raw.iter().cloned().collect();
    let mut out = Vec::with_capacity(raw.len());
    for name in raw {
        let n = seen.entry(name.clone()).or_insert(0);
        if *n == 0 {
            out.push(name);
        } else {
            let mut k = *n;
            let mut candidate = format!("{name}.{k}");
            while taken.contains(&candidate) {
                k += 1;
                candidate = format!("{name}.{k}");
            }
            taken.insert(candidate.clone());
            out.push(candidate);
        }
        *n += 1;
    }
    out
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Csv {
                path: path.to_owned(),
                line: 1,
                message: format!("{other:?}"),
            },
        })
}

fn read_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Csv {
        path: path.to_owned(),
        line,
        message: e.to_string(),
    }
}

/// Loads a CSV with a header row. Columns whose every non-missing cell
/// parses as a number are numeric, the rest categorical; the label column
/// is always categorical.
pub fn load_csv(path: &Path, label_column: &str, drop_columns: &[String]) -> Result<RawTable> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    let mut rdr = open_reader(path)?;
    let headers = dedupe_headers(
        rdr.headers()
            .map_err(|e| read_err(path, e))?
            .iter()
            .map(str::to_owned)
            .collect(),
    );
    let width = headers.len();
    let label_pos = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_owned()))?;
    for d in drop_columns {
        if !headers.contains(d) {
            return Err(Error::MissingColumn(d.clone()));
        }
    }
    let keep: Vec<usize> = (0..width)
        .filter(|&i| i != label_pos && !drop_columns.contains(&headers[i]))
        .collect();

    // pass 1: shape check and kind inference
    let mut numeric = vec![true; width];
    let mut n_rows = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(read_err(path, e)),
        }
        if record.len() != width {
            return Err(Error::RaggedRow {
                path: path.to_owned(),
                line: record.position().map(|p| p.line()).unwrap_or(0),
                expected: width,
                found: record.len(),
            });
        }
        for &j in &keep {
            if numeric[j] && parse_cell(&record[j]).is_none() {
                numeric[j] = false;
            }
        }
        n_rows += 1;
    }

    // pass 2: typed columns
    let mut builders: Vec<RawValues> = keep
        .iter()
        .map(|&j| {
            if numeric[j] {
                RawValues::Numeric(Vec::with_capacity(n_rows))
            } else {
                RawValues::Categorical(Vec::with_capacity(n_rows))
            }
        })
        .collect();
    let mut label_values = Vec::with_capacity(n_rows);
    let mut rdr = open_reader(path)?;
    while rdr
        .read_record(&mut record)
        .map_err(|e| read_err(path, e))?
    {
        for (b, &j) in builders.iter_mut().zip(&keep) {
            match b {
                RawValues::Numeric(v) => v.push(parse_cell(&record[j]).unwrap_or(f64::NAN)),
                RawValues::Categorical(v) => v.push(record[j].to_owned()),
            }
        }
        label_values.push(record[label_pos].to_owned());
    }

    // indices count positions among the retained columns
    let retained: Vec<usize> = (0..width)
        .filter(|&i| !drop_columns.contains(&headers[i]))
        .collect();
    let new_index = |orig: usize| retained.iter().position(|&r| r == orig).unwrap();
    let features = keep
        .iter()
        .zip(builders)
        .map(|(&j, values)| RawColumn {
            meta: ColumnMeta {
                name: headers[j].clone(),
                kind: match values {
                    RawValues::Numeric(_) => ColumnKind::Numeric,
                    RawValues::Categorical(_) => ColumnKind::Categorical,
                },
                index: new_index(j),
            },
            values,
        })
        .collect();
    Ok(RawTable {
        features,
        label: ColumnMeta {
            name: headers[label_pos].clone(),
            kind: ColumnKind::Label,
            index: new_index(label_pos),
        },
        label_values,
    })
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.label_values.len()
    }

    pub fn features(&self) -> &[RawColumn] {
        &self.features
    }

    pub fn label_values(&self) -> &[String] {
        &self.label_values
    }

    pub fn label_column(&self) -> &ColumnMeta {
        &self.label
    }

    /// Replaces missing and infinite numeric cells per `policy`. Column means
    /// are taken over finite cells only.
    pub fn clean(self, policy: CleaningPolicy) -> Result<CleanTable> {
        let mut features = Vec::with_capacity(self.features.len());
        for col in self.features {
            let values = match col.values {
                RawValues::Numeric(v) => {
                    RawValues::Numeric(clean_column(&col.meta.name, v, policy)?)
                }
                cat => cat,
            };
            features.push(RawColumn {
                meta: col.meta,
                values,
            });
        }
        Ok(CleanTable {
            features,
            label: self.label,
            label_values: self.label_values,
        })
    }
}

fn clean_column(name: &str, mut v: Vec<f64>, policy: CleaningPolicy) -> Result<Vec<f64>> {
    let needs_mean = v.iter().any(|x| {
        (x.is_nan() && policy.missing_fill == MissingFill::ColumnMean)
            || (x.is_infinite() && policy.infinity_fill == InfinityFill::ColumnMean)
    });
    let mean = if needs_mean {
        let (sum, n) = v
            .iter()
            .filter(|x| x.is_finite())
            .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        if n == 0 {
            return Err(Error::NoFiniteValues(name.to_owned()));
        }
        sum / n as f64
    } else {
        0.0
    };
    for x in v.iter_mut() {
        if x.is_nan() {
            *x = match policy.missing_fill {
                MissingFill::ConstantZero => 0.0,
                MissingFill::ColumnMean => mean,
            };
        } else if x.is_infinite() {
            *x = match policy.infinity_fill {
                InfinityFill::ConstantZero => 0.0,
                InfinityFill::ColumnMean => mean,
            };
        }
    }
    Ok(v)
}

impl CleanTable {
    pub fn n_rows(&self) -> usize {
        self.label_values.len()
    }

    /// Replaces categorical columns and the label by lexicographic codes.
    pub fn encode(self) -> (DataTable, LabelMapping) {
        let n_rows = self.n_rows();
        let n_features = self.features.len();
        let mut mapping = LabelMapping::default();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n_features);
        let mut metas = Vec::with_capacity(n_features);
        for col in self.features {
            match col.values {
                RawValues::Numeric(v) => columns.push(v),
                RawValues::Categorical(v) => {
                    let map = CategoryMap::from_values(&col.meta.name, &v);
                    columns.push(v.iter().map(|s| map.code(s).unwrap() as f64).collect());
                    mapping.columns.push(map);
                }
            }
            metas.push(col.meta);
        }
        let label_map = CategoryMap::from_values(&self.label.name, &self.label_values);
        let labels = self
            .label_values
            .iter()
            .map(|s| label_map.code(s).unwrap())
            .collect();
        let label_names = label_map.categories.clone();
        mapping.columns.push(label_map);

        let mut values = Vec::with_capacity(n_rows * n_features);
        for r in 0..n_rows {
            values.extend(columns.iter().map(|c| c[r]));
        }
        let table = DataTable {
            features: metas,
            label: self.label,
            values,
            labels,
            label_names,
        };
        (table, mapping)
    }
}

/// Loads an already-prepared CSV (all features numeric and finite).
pub fn load_prepared(path: &Path, label_column: &str) -> Result<DataTable> {
    let raw = load_csv(path, label_column, &[])?;
    if let Some(c) = raw
        .features
        .iter()
        .find(|c| matches!(c.values, RawValues::Categorical(_)))
    {
        return Err(Error::LayoutMismatch(format!(
            "prepared table has non-numeric column `{}`",
            c.meta.name
        )));
    }
    let (table, _) = raw.clean(CleaningPolicy::UNSW)?.encode();
    Ok(table)
}

/// Per-column min and max over the rows of `table`.
pub fn fit_minmax(table: &DataTable) -> ScalerParams {
    let columns = table
        .features()
        .iter()
        .enumerate()
        .map(|(j, meta)| {
            let (min, max) = (0..table.n_rows())
                .map(|r| table.value(r, j))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
            let (min, max) = if table.n_rows() == 0 { (0.0, 0.0) } else { (min, max) };
            ColumnRange {
                column: meta.name.clone(),
                min,
                max,
            }
        })
        .collect();
    ScalerParams { columns }
}

/// Maps each feature to `(x - min) / (max - min)` clamped to [0, 1];
/// zero-range columns map to 0.
pub fn apply_minmax(table: &DataTable, params: &ScalerParams) -> Result<DataTable> {
    if params.columns.len() != table.n_features()
        || params
            .columns
            .iter()
            .zip(table.features())
            .any(|(p, f)| p.column != f.name)
    {
        return Err(Error::LayoutMismatch(
            "scaler columns do not match table features".into(),
        ));
    }
    let w = table.n_features();
    let values = table
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| scale_value(x, &params.columns[i % w]))
        .collect();
    Ok(DataTable {
        values,
        ..table.clone()
    })
}

pub(crate) fn scale_value(x: f64, range: &ColumnRange) -> f64 {
    let span = range.max - range.min;
    if span <= 0.0 {
        0.0
    } else {
        ((x - range.min) / span).clamp(0.0, 1.0)
    }
}

/// Draws exactly `counts[class]` rows of each listed class, uniformly without
/// replacement. Unlisted classes and classes with a zero count are dropped
/// and the remaining class codes renumbered. Rows keep their source order.
pub fn stratified_subsample(
    table: &DataTable,
    counts: &BTreeMap<String, usize>,
    seed: u64,
) -> Result<DataTable> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); table.n_classes()];
    for (i, &l) in table.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut chosen = Vec::new();
    for (class, &want) in counts {
        if want == 0 {
            continue;
        }
        let pool = table
            .label_names()
            .iter()
            .position(|n| n == class)
            .map(|c| &by_class[c][..])
            .unwrap_or(&[]);
        if want > pool.len() {
            return Err(Error::InsufficientClassRows {
                class: class.clone(),
                requested: want,
                available: pool.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive_tag(seed, class));
        chosen.extend(pool.choose_multiple(&mut rng, want).copied());
    }
    chosen.sort_unstable();
    let mut sub = table.select_rows(&chosen);
    // classes not requested still carry a name; drop them
    sub = sub.compact_classes();
    Ok(sub)
}

/// One train/test split of a k-fold partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split. Each class's rows are shuffled and dealt
/// round-robin across folds, continuing the rotation from class to class so
/// fold sizes stay balanced.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut fold_of = vec![0usize; labels.len()];
    let mut offset = 0usize;
    for (&class, rows) in by_class.iter_mut() {
        if rows.len() < k {
            return Err(Error::TooFewForFolds {
                class,
                rows: rows.len(),
                k,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, class as u64));
        rows.shuffle(&mut rng);
        for (pos, &row) in rows.iter().enumerate() {
            fold_of[row] = (offset + pos) % k;
        }
        offset += rows.len();
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}
