//! CSV ingestion, schema inference and preprocessing.
//!
//! Preprocessing rules: identifier, constant and duplicate columns are dropped,
//! missing numeric cells become `0.0`, missing categorical cells become their own
//! category, categorical columns are label-encoded and the churn label is
//! normalized to `{0, 1}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Category assigned to missing categorical cells.
pub const MISSING_CATEGORY: &str = "__missing__";

const POSITIVE_TOKENS: [&str; 4] = ["yes", "true", "1", "churn"];
const NEGATIVE_TOKENS: [&str; 3] = ["no", "false", "0"];

/// Ingestion settings for one dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestOptions {
    pub label_column: String,
    #[serde(default)]
    pub id_columns: Vec<String>,
    /// Extra label tokens (case-insensitive) that mean churn.
    #[serde(default)]
    pub positive_labels: Vec<String>,
}

impl IngestOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        IngestOptions {
            label_column: label_column.into(),
            ..Default::default()
        }
    }
}

/// A CSV file as text cells; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub cells: Vec<Vec<Option<String>>>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub label_index: usize,
}

impl RawTable {
    pub fn column(&self, j: usize) -> impl Iterator<Item = Option<&str>> + Clone + '_ {
        self.cells.iter().map(move |r| r[j].as_deref())
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }
}

pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    id_columns: &[String],
) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column, id_columns)
}

/// Reads RFC-4180 CSV with a header row.
pub fn read_csv<R: Read>(reader: R, label_column: &str, id_columns: &[String]) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    let mut column_names: Vec<String> = Vec::with_capacity(header.len());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for raw in header.iter() {
        let base = raw.trim().trim_start_matches('\u{feff}').to_string();
        let n = seen.entry(base.clone()).or_insert(0);
        let name = if *n == 0 {
            base.clone()
        } else {
            format!("{base}.{n}")
        };
        *n += 1;
        column_names.push(name);
    }
    let n_cols = column_names.len();

    let label_index = column_names
        .iter()
        .position(|c| c == label_column)
        .ok_or_else(|| {
            Error::Config(format!("label column '{label_column}' not found in header"))
        })?;
    for id in id_columns {
        if !column_names.iter().any(|c| c == id) {
            return Err(Error::Config(format!(
                "id column '{id}' not found in header"
            )));
        }
    }

    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record
            .position()
            .map_or(cells.len() + 2, |p| p.line() as usize);
        if record.len() != n_cols {
            return Err(Error::Parse {
                row: line,
                message: format!("expected {n_cols} cells, found {}", record.len()),
            });
        }
        cells.push(
            record
                .iter()
                .map(|c| {
                    let t = c.trim();
                    (!t.is_empty()).then(|| t.to_string())
                })
                .collect::<Vec<_>>(),
        );
    }

    Ok(RawTable {
        n_rows: cells.len(),
        n_cols,
        column_names,
        cells,
        label_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Identifier,
    Constant,
    DuplicateOf(usize),
    Label,
}

impl ColumnKind {
    pub fn is_feature(self) -> bool {
        matches!(self, ColumnKind::Numeric | ColumnKind::Categorical)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub distinct_count: usize,
    pub missing_count: usize,
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_numeric_column<'a>(mut cells: impl Iterator<Item = Option<&'a str>>) -> bool {
    cells.all(|c| c.is_none_or(|s| parse_number(s).is_some()))
}

fn is_boolean_token(s: &str) -> bool {
    matches!(
        s.to_ascii_lowercase().as_str(),
        "yes" | "no" | "true" | "false"
    )
}

/// Label encoder for one categorical column: `(category, code)` in code order.
pub type Encoder = Vec<(String, u32)>;

fn build_encoder<'a>(cells: impl Iterator<Item = Option<&'a str>> + Clone) -> Encoder {
    let present: Vec<&str> = cells.clone().flatten().collect();
    let boolean = !present.is_empty() && present.iter().all(|s| is_boolean_token(s));
    let mut enc: Encoder = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();

    if boolean {
        // yes/true -> 1 and no/false -> 0, whatever the first-appearance order
        for s in &present {
            let code = match s.to_ascii_lowercase().as_str() {
                "yes" | "true" => 1,
                _ => 0,
            };
            if !index.contains_key(*s) {
                index.insert(s.to_string(), code);
                enc.push((s.to_string(), code));
            }
        }
        if cells.clone().any(|c| c.is_none()) {
            enc.push((MISSING_CATEGORY.to_string(), 2));
        }
        enc.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        return enc;
    }

    for c in cells {
        let key = c.unwrap_or(MISSING_CATEGORY);
        if !index.contains_key(key) {
            let code = index.len() as u32;
            index.insert(key.to_string(), code);
            enc.push((key.to_string(), code));
        }
    }
    enc
}

fn encode_with<'a>(cells: impl Iterator<Item = Option<&'a str>>, enc: &Encoder) -> Vec<f64> {
    let lookup: HashMap<&str, u32> = enc.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    cells
        .map(|c| f64::from(lookup[c.unwrap_or(MISSING_CATEGORY)]))
        .collect()
}

fn encode_numeric<'a>(cells: impl Iterator<Item = Option<&'a str>>) -> Vec<f64> {
    cells
        .map(|c| c.and_then(parse_number).unwrap_or(0.0))
        .collect()
}

/// Values a retained column contributes to the feature matrix.
fn encoded_column(table: &RawTable, j: usize, numeric: bool) -> (Vec<f64>, Option<Encoder>) {
    if numeric {
        (encode_numeric(table.column(j)), None)
    } else {
        let enc = build_encoder(table.column(j));
        (encode_with(table.column(j), &enc), Some(enc))
    }
}

pub fn infer_schema(table: &RawTable, id_columns: &[String]) -> Vec<ColumnSchema> {
    let ids: HashSet<&str> = id_columns.iter().map(String::as_str).collect();
    let mut schema = Vec::with_capacity(table.n_cols);
    // encoded bit patterns of retained columns, for duplicate detection
    let mut retained: Vec<(usize, Vec<u64>)> = Vec::new();

    for j in 0..table.n_cols {
        let name = table.column_names[j].clone();
        let missing_count = table.column(j).filter(|c| c.is_none()).count();
        let numeric = is_numeric_column(table.column(j));
        let distinct_count = if numeric {
            table
                .column(j)
                .flatten()
                .filter_map(parse_number)
                .map(|v| if v == 0.0 { 0u64 } else { v.to_bits() })
                .collect::<HashSet<_>>()
                .len()
        } else {
            table.column(j).flatten().collect::<HashSet<_>>().len()
        };

        let kind = if j == table.label_index {
            ColumnKind::Label
        } else if ids.contains(name.as_str())
            || (!numeric
                && table.n_rows > 1
                && missing_count == 0
                && distinct_count == table.n_rows)
        {
            ColumnKind::Identifier
        } else if distinct_count <= 1 {
            ColumnKind::Constant
        } else {
            let (values, _) = encoded_column(table, j, numeric);
            let bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
            match retained.iter().find(|(_, b)| *b == bits) {
                Some(&(first, _)) => ColumnKind::DuplicateOf(first),
                None => {
                    retained.push((j, bits));
                    if numeric {
                        ColumnKind::Numeric
                    } else {
                        ColumnKind::Categorical
                    }
                }
            }
        };

        schema.push(ColumnSchema {
            name,
            kind,
            distinct_count,
            missing_count,
        });
    }
    schema
}

/// Preprocessed, fully numeric dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Matrix,
    pub feature_names: Vec<String>,
    pub labels: Vec<u8>,
    /// Per categorical feature name, its label encoder.
    pub encoders: BTreeMap<String, Encoder>,
}

impl Dataset {
    pub fn new(features: Matrix, feature_names: Vec<String>, labels: Vec<u8>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Dimension {
                expected: features.rows(),
                got: labels.len(),
            });
        }
        features.check_cols(feature_names.len())?;
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Schema("labels must be 0 or 1".into()));
        }
        Ok(Dataset {
            features,
            feature_names,
            labels,
            encoders: BTreeMap::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            feature_names: self.feature_names.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            encoders: self.encoders.clone(),
        }
    }
}

fn normalize_label(raw: &str, positive: &[String]) -> Option<u8> {
    let t = raw.trim().trim_end_matches('.').to_ascii_lowercase();
    if positive.iter().any(|p| p.trim().eq_ignore_ascii_case(&t))
        || POSITIVE_TOKENS.contains(&t.as_str())
    {
        return Some(1);
    }
    if NEGATIVE_TOKENS.contains(&t.as_str()) {
        return Some(0);
    }
    match parse_number(&t) {
        Some(v) if v == 1.0 => Some(1),
        Some(v) if v == 0.0 => Some(0),
        _ => None,
    }
}

pub fn preprocess(
    table: &RawTable,
    schema: &[ColumnSchema],
    options: &IngestOptions,
) -> Result<Dataset> {
    if table.n_rows == 0 {
        return Err(Error::Schema("table has no rows".into()));
    }
    let label_index = table.index_of(&options.label_column).ok_or_else(|| {
        Error::Config(format!("label column '{}' not found", options.label_column))
    })?;

    let mut labels = Vec::with_capacity(table.n_rows);
    for (i, cell) in table.column(label_index).enumerate() {
        let raw =
            cell.ok_or_else(|| Error::Schema(format!("missing label at data row {}", i + 1)))?;
        let v = normalize_label(raw, &options.positive_labels).ok_or_else(|| {
            Error::Schema(format!(
                "unrecognized label value '{raw}' at data row {}",
                i + 1
            ))
        })?;
        labels.push(v);
    }

    let mut columns = Vec::new();
    let mut names = Vec::new();
    let mut encoders = BTreeMap::new();
    for (j, col) in schema.iter().enumerate() {
        if !col.kind.is_feature() || j == label_index {
            continue;
        }
        let (values, enc) = encoded_column(table, j, col.kind == ColumnKind::Numeric);
        if let Some(enc) = enc {
            encoders.insert(col.name.clone(), enc);
        }
        names.push(col.name.clone());
        columns.push(values);
    }
    if columns.is_empty() {
        return Err(Error::Schema(
            "no feature columns remain after preprocessing".into(),
        ));
    }

    let features = Matrix::from_columns(&columns)?;
    Ok(Dataset {
        features,
        feature_names: names,
        labels,
        encoders,
    })
}

/// Loads, infers and preprocesses in one step.
pub fn ingest(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<(Dataset, Vec<ColumnSchema>)> {
    let table = load_csv(path, &options.label_column, &options.id_columns)?;
    let schema = infer_schema(&table, &options.id_columns);
    let dataset = preprocess(&table, &schema, options)?;
    Ok((dataset, schema))
}

/// `(churn_fraction, nonchurn_fraction)` counted from the labels.
pub fn class_balance(dataset: &Dataset) -> (f64, f64) {
    let n = dataset.labels.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let churn = dataset.labels.iter().filter(|&&l| l == 1).count();
    (churn as f64 / n as f64, (n - churn) as f64 / n as f64)
}

/// Stratified subsample of `n` rows, class proportions preserved up to rounding.
pub fn stratified_subsample(dataset: &Dataset, n: usize, seed: u64) -> Dataset {
    if n >= dataset.n_rows() {
        return dataset.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..dataset.n_rows())
        .filter(|&i| dataset.labels[i] == 1)
        .collect();
    let mut neg: Vec<usize> = (0..dataset.n_rows())
        .filter(|&i| dataset.labels[i] == 0)
        .collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let take_pos = ((pos.len() as f64) * n as f64 / dataset.n_rows() as f64).round() as usize;
    let take_pos = take_pos.min(pos.len()).min(n);
    let take_neg = (n - take_pos).min(neg.len());
    let mut rows: Vec<usize> = pos[..take_pos]
        .iter()
        .chain(&neg[..take_neg])
        .copied()
        .collect();
    rows.sort_unstable();
    dataset.subset(&rows)
}

/// Writes features plus the label column (0/1) as CSV.
pub fn write_dataset_csv(
    dataset: &Dataset,
    label_column: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = dataset.feature_names.iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header)?;
    for (i, row) in dataset.features.iter_rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(dataset.labels[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub label_column: String,
    pub n_rows: usize,
    pub churn_fraction: f64,
    pub schema: Vec<ColumnSchema>,
    pub feature_names: Vec<String>,
    pub encoders: BTreeMap<String, Encoder>,
}

/// Writes schema decisions and encoder maps as JSON.
pub fn write_sidecar(
    dataset: &Dataset,
    schema: &[ColumnSchema],
    label_column: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let sidecar = Sidecar {
        label_column: label_column.to_string(),
        n_rows: dataset.n_rows(),
        churn_fraction: class_balance(dataset).0,
        schema: schema.to_vec(),
        feature_names: dataset.feature_names.clone(),
        encoders: dataset.encoders.clone(),
    };
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(csv: &str, label: &str) -> RawTable {
        read_csv(csv.as_bytes(), label, &[]).unwrap()
    }

    #[test]
    fn header_only_file_has_zero_rows() {
        let t = table("a,b,churn\n", "churn");
        assert_eq!(t.n_rows, 0);
        assert_eq!(t.n_cols, 3);
        let schema = infer_schema(&t, &[]);
        assert!(matches!(
            preprocess(&t, &schema, &IngestOptions::new("churn")),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn short_row_reports_its_line() {
        let err = read_csv("a,b,c\n1,2,3\n1,2\n".as_bytes(), "c", &[]).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let err = read_csv("a,b\n1,2\n".as_bytes(), "churn", &[]).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn kinds_are_inferred() {
        let t = table(
            "id,plan,x,x_copy,k,y,churn\n\
             a1,yes,1.5,1.5,7,1,no\n\
             a2,no,2,2,7,2,yes\n\
             a3,yes,,,7,3,no\n",
            "churn",
        );
        let s = infer_schema(&t, &[]);
        assert_eq!(s[0].kind, ColumnKind::Identifier);
        assert_eq!(s[1].kind, ColumnKind::Categorical);
        assert_eq!(s[1].distinct_count, 2);
        assert_eq!(s[2].kind, ColumnKind::Numeric);
        assert_eq!(s[2].missing_count, 1);
        assert_eq!(s[3].kind, ColumnKind::DuplicateOf(2));
        assert_eq!(s[4].kind, ColumnKind::Constant);
        assert_eq!(s[5].kind, ColumnKind::Numeric);
        assert_eq!(s[6].kind, ColumnKind::Label);
    }

    #[test]
    fn configured_numeric_id_is_dropped() {
        let t = read_csv(
            "phone,x,churn\n1,5,no\n2,6,yes\n".as_bytes(),
            "churn",
            &["phone".into()],
        )
        .unwrap();
        let s = infer_schema(&t, &["phone".into()]);
        assert_eq!(s[0].kind, ColumnKind::Identifier);
        let d = preprocess(&t, &s, &IngestOptions::new("churn")).unwrap();
        assert_eq!(d.feature_names, vec!["x"]);
    }

    #[test]
    fn preprocessing_fills_and_encodes() {
        let t = table(
            "plan,color,x,churn\n\
             yes,red,,no\n\
             no,,2,yes\n\
             yes,blue,3,True\n\
             no,red,4,false\n",
            "churn",
        );
        let s = infer_schema(&t, &[]);
        let d = preprocess(&t, &s, &IngestOptions::new("churn")).unwrap();
        assert_eq!(d.feature_names, vec!["plan", "color", "x"]);
        assert_eq!(d.features.column(0), vec![1.0, 0.0, 1.0, 0.0]);
        // first-appearance codes, missing is its own category
        assert_eq!(d.features.column(1), vec![0.0, 1.0, 2.0, 0.0]);
        assert_eq!(d.encoders["color"][1], (MISSING_CATEGORY.to_string(), 1));
        assert_eq!(d.features.column(2), vec![0.0, 2.0, 3.0, 4.0]);
        assert_eq!(d.labels, vec![0, 1, 1, 0]);
    }

    #[test]
    fn non_binary_label_is_schema_error() {
        let t = table("x,churn\n1,yes\n2,no\n3,maybe\n", "churn");
        let s = infer_schema(&t, &[]);
        assert!(matches!(
            preprocess(&t, &s, &IngestOptions::new("churn")),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn positive_labels_extend_the_map() {
        let t = table("x,status\n1,left\n2,no\n", "status");
        let s = infer_schema(&t, &[]);
        let mut o = IngestOptions::new("status");
        assert!(preprocess(&t, &s, &o).is_err());
        o.positive_labels = vec!["LEFT".into()];
        assert_eq!(preprocess(&t, &s, &o).unwrap().labels, vec![1, 0]);
    }

    #[test]
    fn all_identifier_table_has_no_features() {
        let t = table("name,churn\nann,yes\nbob,no\n", "churn");
        let s = infer_schema(&t, &[]);
        assert!(matches!(
            preprocess(&t, &s, &IngestOptions::new("churn")),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn class_balance_counts_labels() {
        let m = Matrix::zeros(4, 1);
        let d = Dataset::new(m.clone(), vec!["x".into()], vec![1, 0, 0, 0]).unwrap();
        assert_eq!(class_balance(&d), (0.25, 0.75));
        let d = Dataset::new(m, vec!["x".into()], vec![1, 1, 1, 1]).unwrap();
        assert_eq!(class_balance(&d), (1.0, 0.0));
    }

    #[test]
    fn subsample_keeps_proportions() {
        let n = 1000;
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 4 == 0)).collect();
        let d = Dataset::new(Matrix::zeros(n, 1), vec!["x".into()], labels).unwrap();
        let s = stratified_subsample(&d, 100, 9);
        assert_eq!(s.n_rows(), 100);
        assert_eq!(s.labels.iter().filter(|&&l| l == 1).count(), 25);
    }
}
