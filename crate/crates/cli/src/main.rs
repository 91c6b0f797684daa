use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use churnlab_core::diagnostics::{qq_series, qq_svg, skewness, write_qq_csv, DEFAULT_QQ_TRANSFORMS};
use churnlab_core::evaluation::{row_keys, stratified_folds_keyed};
use churnlab_core::experiment::check_seed_collisions;
use churnlab_core::feature_select::{score_features, select_top_k, write_scores_csv};
use churnlab_core::ingest::{self, infer_schema, load_csv, preprocess, stratified_subsample, write_dataset_csv, write_sidecar};
use churnlab_core::report::{emit_report, prepare_output_dir, stats_from_csv};
use churnlab_core::seed::CellKey;
use churnlab_core::stats::{heatmap_svg, write_heatmap_csv};
use churnlab_core::transforms::{self, FitScope, TransformConfig, TransformKind};
use churnlab_core::tuning::{default_grid, grid_search, write_tuning_csv, SelectionMetric};
use churnlab_core::{
    run_experiment, ClassifierKind, CvOptions, Dataset, Error, ExperimentConfig, ExperimentReport, IngestOptions, RunOptions,
};

#[derive(Parser)]
#[command(name = "churnlab", version, about = "Churn prediction experiments over data transformations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "CHURNLAB_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Overwrite a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    /// Stratified row subsample applied to every dataset.
    #[arg(long, global = true)]
    subsample: Option<usize>,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Input CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "churn")]
    label: String,
    /// Identifier column to drop; repeatable.
    #[arg(long = "id")]
    ids: Vec<String>,
    /// Extra label value meaning churn; repeatable.
    #[arg(long = "positive")]
    positive: Vec<String>,
}

impl DataArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            label_column: self.label.clone(),
            id_columns: self.ids.clone(),
            positive_labels: self.positive.clone(),
        }
    }
}

#[derive(Args, Clone)]
struct TransformArgs {
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = 10)]
    woe_bins: usize,
    #[arg(long, default_value_t = 0.5)]
    woe_smoothing: f64,
    /// Fit transforms on the whole dataset instead of each training fold.
    #[arg(long)]
    global_fit: bool,
}

impl TransformArgs {
    fn config(&self) -> TransformConfig {
        TransformConfig {
            lambda: self.lambda,
            bins_b: self.bins,
            woe_bins: self.woe_bins,
            woe_smoothing: self.woe_smoothing,
            fit_scope: if self.global_fit { FitScope::Global } else { FitScope::TrainFold },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Preprocess a raw CSV into a numeric dataset plus schema sidecar.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Fit one transform on a dataset and write the transformed table.
    Transform {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: TransformKind,
        #[command(flatten)]
        params: TransformArgs,
    },
    /// Score features with the ANOVA F statistic and mark the top k.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: Option<TransformKind>,
        #[arg(long, default_value_t = 15)]
        top_k: usize,
        #[command(flatten)]
        params: TransformArgs,
    },
    /// Grid-search one classifier under one transform.
    Tune {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: TransformKind,
        #[arg(long)]
        classifier: ClassifierKind,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long, default_value = "f_measure")]
        metric: SelectionMetric,
        #[command(flatten)]
        params: TransformArgs,
    },
    /// Run the experiment described by --config and write its report.
    Run,
    /// Friedman and Holm tests on a score matrix or results.csv.
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Significance level; repeatable.
        #[arg(long = "alpha")]
        alphas: Vec<f64>,
    },
    /// Q-Q series and skewness of selected features.
    Qq {
        #[command(flatten)]
        data: DataArgs,
        /// Transform to plot; repeatable. Defaults to RAW, WOE and Z_SCORE.
        #[arg(long = "method")]
        methods: Vec<TransformKind>,
        /// Feature to plot; repeatable. Defaults to the first three.
        #[arg(long = "feature")]
        features: Vec<String>,
        #[command(flatten)]
        params: TransformArgs,
    },
    /// Re-emit the artifacts of a saved report.json.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn output_dir(global: &Global) -> Result<&Path, Error> {
    global
        .output
        .as_deref()
        .ok_or_else(|| Error::Config("--output is required for this command".into()))
}

fn load_dataset(data: &DataArgs, global: &Global) -> Result<(Dataset, Vec<ingest::ColumnSchema>), Error> {
    let table = load_csv(&data.input, &data.label, &data.ids)?;
    let schema = infer_schema(&table, &data.ids);
    let mut ds = preprocess(&table, &schema, &data.options())?;
    if let Some(n) = global.subsample {
        ds = stratified_subsample(&ds, n, global.seed.unwrap_or(0));
    }
    Ok((ds, schema))
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>) -> Result<Vec<u8>, Error> {
    let mut b = Vec::new();
    f(&mut b)?;
    Ok(b)
}

fn execute(cli: Cli) -> Result<(), Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Ingest { data } => {
            let (ds, schema) = load_dataset(data, g)?;
            let out = output_dir(g)?;
            prepare_output_dir(out, g.force)?;
            write_dataset_csv(&ds, &data.label, out.join("dataset.csv"))?;
            write_sidecar(&ds, &schema, &data.label, out.join("schema.json"))?;
            let (churn, stay) = ingest::class_balance(&ds);
            println!("{} rows, {} features, churn {:.4}, non-churn {:.4}", ds.n_rows(), ds.n_features(), churn, stay);
        }
        Command::Transform { data, method, params } => {
            let (ds, _) = load_dataset(data, g)?;
            let fitted = transforms::fit(*method, &ds.features, &ds.labels, &params.config())?;
            let x = fitted.apply(&ds.features)?;
            let out = output_dir(g)?;
            prepare_output_dir(out, g.force)?;
            let transformed = Dataset {
                features: x,
                ..ds
            };
            write_dataset_csv(&transformed, &data.label, out.join("transformed.csv"))?;
            write_file(&out.join("transform.json"), fitted.to_json()?.as_bytes())?;
        }
        Command::Select {
            data,
            method,
            top_k,
            params,
        } => {
            let (ds, _) = load_dataset(data, g)?;
            let x = match method {
                Some(m) => transforms::fit(*m, &ds.features, &ds.labels, &params.config())?.apply(&ds.features)?,
                None => ds.features.clone(),
            };
            let scores = score_features(&x, &ds.labels)?;
            let selected = select_top_k(&scores, (*top_k).min(x.cols()))?;
            let bytes = buffer(|b| write_scores_csv(&scores, &ds.feature_names, &selected, b))?;
            match &g.output {
                Some(out) => {
                    prepare_output_dir(out, g.force)?;
                    write_file(&out.join("feature_scores.csv"), &bytes)?;
                }
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
        }
        Command::Tune {
            data,
            method,
            classifier,
            folds,
            top_k,
            metric,
            params,
        } => {
            let (ds, _) = load_dataset(data, g)?;
            let seed = g.seed.unwrap_or(0);
            let plan = stratified_folds_keyed(&ds.labels, &row_keys(&ds), *folds, seed)?;
            let name = data.input.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
            let key = CellKey {
                master_seed: seed,
                dataset: name,
                transform: method.key(),
                classifier: classifier.key(),
                fold: 0,
                grid_point: 0,
            };
            let cv = CvOptions {
                top_k: *top_k,
                select_raw: false,
            };
            let grid = default_grid(*classifier);
            let result = grid_search(*classifier, &grid, &ds, *method, &params.config(), &cv, &plan, *metric, &key)?;
            if let Some(out) = &g.output {
                prepare_output_dir(out, g.force)?;
                write_file(&out.join("tuning.csv"), &buffer(|b| write_tuning_csv(&result, b))?)?;
            }
            print_json(&serde_json::json!({
                "best_params": result.best_params,
                "best_score": result.best_score,
                "selection_metric": result.selection_metric,
                "metrics": result.best().result.mean,
            }))?;
        }
        Command::Run => {
            let path = g.config.as_ref().ok_or_else(|| Error::Config("run needs --config".into()))?;
            let (mut config, bytes) = ExperimentConfig::load(path)?;
            if let Some(s) = g.seed {
                config.master_seed = s;
            }
            if let Some(n) = g.subsample {
                config.datasets.iter_mut().for_each(|d| d.subsample = Some(n));
            }
            let out = g
                .output
                .clone()
                .or_else(|| config.output_dir.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --output or set output_dir".into()))?;
            // fail before the long run rather than after it
            prepare_output_dir(&out, g.force)?;
            let n = check_seed_collisions(&config)?;
            eprintln!("{n} distinct cell seeds");
            let report = run_experiment(&config, &bytes, &RunOptions { workers: g.workers })?;
            emit_report(&report, &out, true)?;
            for notice in &report.notices {
                eprintln!("notice: {notice}");
            }
            println!("{} cells, {} failed; report in {}", report.rows.len(), report.failures.len(), out.display());
            if let Some(f) = &report.friedman {
                println!("Friedman statistic {:.6}, p = {:.6}", f.statistic, f.p_value);
            }
        }
        Command::Stats { input, alphas } => {
            let alphas = if alphas.is_empty() { vec![0.05, 0.10] } else { alphas.clone() };
            let (f, h) = stats_from_csv(input, &alphas)?;
            if let Some(out) = &g.output {
                prepare_output_dir(out, g.force)?;
                write_file(&out.join("friedman.json"), serde_json::to_string_pretty(&f)?.as_bytes())?;
                write_file(&out.join("holm.json"), serde_json::to_string_pretty(&h)?.as_bytes())?;
                write_file(&out.join("heatmap.csv"), &buffer(|b| write_heatmap_csv(&f, b))?)?;
                write_file(&out.join("heatmap.svg"), heatmap_svg(&f).as_bytes())?;
            }
            print_json(&serde_json::json!({ "friedman": f, "holm": h }))?;
        }
        Command::Qq {
            data,
            methods,
            features,
            params,
        } => {
            let (ds, _) = load_dataset(data, g)?;
            let methods = if methods.is_empty() { DEFAULT_QQ_TRANSFORMS.to_vec() } else { methods.clone() };
            let cols: Vec<usize> = if features.is_empty() {
                (0..ds.n_features().min(3)).collect()
            } else {
                features
                    .iter()
                    .map(|f| {
                        ds.feature_names
                            .iter()
                            .position(|n| n == f)
                            .ok_or_else(|| Error::Config(format!("no feature named '{f}'")))
                    })
                    .collect::<Result<_, _>>()?
            };
            let out = output_dir(g)?;
            prepare_output_dir(out, g.force)?;
            let mut skews = Vec::new();
            for m in methods {
                let x = transforms::fit(m, &ds.features, &ds.labels, &params.config())?.apply(&ds.features)?;
                for &j in &cols {
                    let col = x.column(j);
                    let s = qq_series(&ds.feature_names[j], m, &col)?;
                    let stem = format!("{}_{}", m.key(), ds.feature_names[j]);
                    write_file(&out.join(format!("{stem}.csv")), &buffer(|b| write_qq_csv(&s, b))?)?;
                    write_file(&out.join(format!("{stem}.svg")), qq_svg(&s).as_bytes())?;
                    skews.push(serde_json::json!({
                        "transform": m, "feature": ds.feature_names[j], "skewness": skewness(&col).ok()
                    }));
                }
            }
            print_json(&skews)?;
        }
        Command::Report { input } => {
            let text = fs::read_to_string(input).map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
            let report: ExperimentReport = serde_json::from_str(&text)?;
            let out = output_dir(g)?;
            let files = emit_report(&report, out, g.force)?;
            println!("{} files written to {}", files.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_config() {
                1
            } else if e.is_data() {
                2
            } else {
                3
            };
            ExitCode::from(code)
        }
    }
}
