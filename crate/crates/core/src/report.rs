//! Writing experiment artifacts and replaying statistics from CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::{qq_svg, write_qq_csv};
use crate::error::{Error, Result};
use crate::experiment::{block_label, CellRow, ExperimentReport};
use crate::stats::{friedman, heatmap_svg, holm_vs_best, write_heatmap_csv, FriedmanResult, HolmResult, ResultMatrix};
use crate::tuning::write_tuning_csv;

pub const RESULTS_HEADER: [&str; 8] =
    ["dataset", "dt_method", "classifier", "best_params", "auc", "precision", "recall", "f_measure"];

pub fn write_results_csv(rows: &[CellRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.dataset.clone(),
            r.dt_method.clone(),
            r.classifier.to_string(),
            r.best_params.clone(),
            m.auc.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f_measure.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("results", e))?;
    Ok(())
}

pub fn write_folds_csv(rows: &[CellRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "dt_method", "classifier", "fold", "auc", "precision", "recall", "f_measure"])?;
    for r in rows {
        for (f, m) in r.fold_metrics.iter().enumerate() {
            w.write_record([
                r.dataset.clone(),
                r.dt_method.clone(),
                r.classifier.to_string(),
                f.to_string(),
                m.auc.to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f_measure.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("fold results", e))?;
    Ok(())
}

pub fn write_matrix_csv(m: &ResultMatrix, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["block".to_string()];
    header.extend(m.treatment_labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in m.block_labels.iter().zip(&m.values) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("matrix", e))?;
    Ok(())
}

/// Pivots a long `results.csv` into the F-measure matrix. Blocks and
/// treatments keep their order of first appearance.
pub fn matrix_from_results<R: std::io::Read>(reader: R) -> Result<ResultMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            row: 1,
            message: format!("results file has no '{name}' column"),
        })
    };
    let (cd, ct, cc, cf) = (col("dataset")?, col("dt_method")?, col("classifier")?, col("f_measure")?);
    let mut treatments: Vec<String> = Vec::new();
    let mut blocks: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let f: f64 = rec[cf].parse().map_err(|_| Error::Parse {
            row: i + 2,
            message: format!("f_measure '{}' is not a number", &rec[cf]),
        })?;
        let classifier = rec[cc].parse()?;
        let b = block_label(classifier, &rec[cd]);
        let bi = blocks.iter().position(|x| *x == b).unwrap_or_else(|| {
            blocks.push(b);
            blocks.len() - 1
        });
        let t = rec[ct].to_string();
        let ti = treatments.iter().position(|x| *x == t).unwrap_or_else(|| {
            treatments.push(t);
            treatments.len() - 1
        });
        cells.push((bi, ti, f));
    }
    let mut values = vec![vec![f64::NAN; treatments.len()]; blocks.len()];
    for (b, t, v) in cells {
        values[b][t] = v;
    }
    ResultMatrix::new(values, blocks, treatments)
}

/// Friedman and Holm on a score matrix file: either a wide matrix (block
/// column then treatments) or a long `results.csv`.
pub fn stats_from_csv(path: impl AsRef<Path>, alphas: &[f64]) -> Result<(FriedmanResult, HolmResult)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text.lines().next().unwrap_or_default();
    let long = first.split(',').take(3).eq(["dataset", "dt_method", "classifier"]);
    let m = if long {
        matrix_from_results(text.as_bytes())?
    } else {
        ResultMatrix::from_csv(text.as_bytes())?
    };
    let alpha = alphas.first().copied().unwrap_or(0.05);
    let f = friedman(&m, alpha);
    let h = holm_vs_best(&f, if alphas.is_empty() { &[0.05] } else { alphas })?;
    Ok((f, h))
}

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

struct Out {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Out {
    fn write(&mut self, rel: impl AsRef<Path>, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut buf = Vec::new();
        f(&mut buf)?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, rel: &str, v: &impl serde::Serialize) -> Result<()> {
        self.write(rel, |b| {
            serde_json::to_writer_pretty(&mut *b, v)?;
            b.push(b'\n');
            Ok(())
        })
    }
}

/// Refuses a non-empty existing directory unless `force`.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some();
        if non_empty && !force {
            return Err(Error::Config(format!(
                "output directory {} already exists; pass --force to overwrite",
                dir.display()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes every artifact of a run and returns the files written.
pub fn emit_report(report: &ExperimentReport, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    prepare_output_dir(dir, force)?;
    let mut out = Out {
        dir: dir.to_path_buf(),
        written: Vec::new(),
    };
    out.write("results.csv", |b| write_results_csv(&report.rows, b))?;
    out.write("folds.csv", |b| write_folds_csv(&report.rows, b))?;
    if let Some(m) = &report.matrix {
        out.write("fmeasure_matrix.csv", |b| write_matrix_csv(m, b))?;
    }
    if let Some(f) = &report.friedman {
        out.json("friedman.json", f)?;
        out.write("heatmap.csv", |b| write_heatmap_csv(f, b))?;
        out.write("heatmap.svg", |b| {
            b.extend_from_slice(heatmap_svg(f).as_bytes());
            Ok(())
        })?;
    }
    if let Some(h) = &report.holm {
        out.json("holm.json", h)?;
    }
    for q in &report.qq {
        let s = &q.series;
        let stem = format!("qq/{}_{}_{}", file_stem(&q.dataset), s.transform.key(), file_stem(&s.feature_name));
        out.write(format!("{stem}.csv"), |b| write_qq_csv(s, b))?;
        out.write(format!("{stem}.svg"), |b| {
            b.extend_from_slice(qq_svg(s).as_bytes());
            Ok(())
        })?;
    }
    for t in &report.tuning {
        let name = format!("tuning/{}_{}_{}.csv", file_stem(&t.dataset), t.transform.key(), t.classifier.key());
        out.write(name, |b| write_tuning_csv(&t.result, b))?;
    }
    out.json("report.json", report)?;
    Ok(out.written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_have_only_a_header() {
        let mut b = Vec::new();
        write_results_csv(&[], &mut b).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), RESULTS_HEADER.join(",") + "\n");
    }

    #[test]
    fn existing_directory_needs_force() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x"), "1").unwrap();
        assert!(matches!(prepare_output_dir(dir.path(), false), Err(Error::Config(_))));
        assert!(prepare_output_dir(dir.path(), true).is_ok());
        assert!(prepare_output_dir(&dir.path().join("fresh"), false).is_ok());
    }

    #[test]
    fn long_results_pivot() {
        let csv = "dataset,dt_method,classifier,best_params,auc,precision,recall,f_measure\n\
                   d,RAW,LR,,0.5,0,0,0.1\nd,WOE,LR,,0.5,0,0,0.3\nd,LOG,LR,,0.5,0,0,0.2\n\
                   d,RAW,GB,,0.5,0,0,0.4\nd,WOE,GB,,0.5,0,0,0.6\nd,LOG,GB,,0.5,0,0,0.5\n";
        let m = matrix_from_results(csv.as_bytes()).unwrap();
        assert_eq!(m.block_labels, vec!["LR/d", "GB/d"]);
        assert_eq!(m.treatment_labels, vec!["RAW", "WOE", "LOG"]);
        assert_eq!(m.values[1], vec![0.4, 0.6, 0.5]);
        let missing = "dataset,dt_method,classifier,best_params,auc,precision,recall,f_measure\n\
                       d,RAW,LR,,0.5,0,0,0.1\nd,WOE,LR,,0.5,0,0,0.3\nd,LOG,LR,,0.5,0,0,0.2\nd,RAW,GB,,0.5,0,0,0.4\n";
        assert!(matrix_from_results(missing.as_bytes()).is_err());
    }
}
