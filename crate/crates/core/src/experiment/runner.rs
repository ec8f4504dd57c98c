use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, RatioSpec, Recipe};
use crate::balancing::{BalancingStrategy, RATIO_SLACK};
use crate::error::{Error, Result};
use crate::group::{build_partition, GroupSchema, LabeledDataset};
use crate::metrics::{per_group_accuracy, worst_class_from_groups, worst_group_accuracy};
use crate::model::{interpolation_epoch, predict, train, Architecture, TrainOutcome};
use crate::rng::{stream, streams};
use crate::spectral::{mean_std, FeatureBank, SpectralReport, SpectralTrial};
use crate::synthetic::{generate, SyntheticSpec};

/// Where and how a recipe runs.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    /// Worker threads for independent cells; `None` uses rayon's default.
    pub jobs: Option<usize>,
    /// Written on the single metadata line of every output file.
    pub generated_at_unix: u64,
}

impl RunContext {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            jobs: None,
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = Some(jobs);
        self
    }
}

/// Train, test and validation splits drawn from independent streams of `data_seed`.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub spec: SyntheticSpec,
    pub schema: GroupSchema,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub validation: Option<LabeledDataset>,
}

impl Datasets {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        let d = config.dataset.as_ref().ok_or_else(|| {
            Error::Config(format!("recipe `{}` requires `dataset`", config.recipe))
        })?;
        let spec = d.resolve()?;
        let seed = d.data_seed;
        let train = generate(&spec, &mut stream(seed, streams::TRAIN_DATA))?;
        let test = generate(
            &spec.with_size(d.test_size),
            &mut stream(seed, streams::TEST_DATA),
        )?;
        let validation = if d.validation_size > 0 {
            Some(generate(
                &spec.with_size(d.validation_size),
                &mut stream(seed, streams::VALIDATION_DATA),
            )?)
        } else {
            None
        };
        Ok(Self {
            schema: spec.schema,
            spec,
            train,
            test,
            validation,
        })
    }

    pub fn class_imbalance_ratio(&self) -> Result<f64> {
        build_partition(&self.train, self.schema)?.class_imbalance_ratio()
    }
}

/// One (label, strategy, width, seed) training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub label: String,
    pub strategy: BalancingStrategy,
    pub ratio: Option<f64>,
    pub width: usize,
    pub seed: u64,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationScore {
    pub wga: f64,
    pub worst_class_acc: f64,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub outcome: TrainOutcome,
    pub validation: Option<ValidationScore>,
}

impl CellResult {
    pub fn peak_minus_final(&self) -> f64 {
        self.outcome.trace.peak_wga().0 - self.outcome.trace.final_wga()
    }
}

/// One line of `summary.csv`; `stat` is `seed<k>`, `mean` or `std`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub label: String,
    pub strategy: String,
    pub ratio: Option<f64>,
    pub width: usize,
    pub param_count: usize,
    pub stat: String,
    pub final_wga: f64,
    pub peak_wga: f64,
    pub peak_epoch: f64,
    pub final_avg_acc: f64,
    pub final_worst_class_acc: f64,
    pub final_train_acc: f64,
    /// Mean over the seeds that interpolated; absent when none did.
    pub interpolation_epoch: Option<f64>,
    pub interpolated_seeds: usize,
    pub val_wga: Option<f64>,
    pub val_worst_class_acc: Option<f64>,
    pub note: String,
}

const SUMMARY_HEADER: &str =
    "label,strategy,ratio,width,param_count,stat,final_wga,peak_wga,peak_epoch,\
final_avg_acc,final_worst_class_acc,final_train_acc,interpolation_epoch,interpolated_seeds,val_wga,\
val_worst_class_acc,note";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:?}"))
}

impl SummaryRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{},{},{}",
            self.label,
            self.strategy,
            opt(self.ratio),
            self.width,
            self.param_count,
            self.stat,
            self.final_wga,
            self.peak_wga,
            self.peak_epoch,
            self.final_avg_acc,
            self.final_worst_class_acc,
            self.final_train_acc,
            opt(self.interpolation_epoch),
            self.interpolated_seeds,
            opt(self.val_wga),
            opt(self.val_worst_class_acc),
            self.note
        )
    }
}

/// Everything a recipe produced, kept in memory for programmatic use.
#[derive(Debug, Clone)]
pub struct RecipeOutput {
    pub recipe: Recipe,
    pub dir: PathBuf,
    pub data: Option<Datasets>,
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
    pub report: Value,
}

impl RecipeOutput {
    /// Results for `label`, in seed order.
    pub fn cells_for<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a CellResult> + 'a {
        self.cells.iter().filter(move |c| c.cell.label == label)
    }

    pub fn mean_row(&self, label: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.label == label && r.stat == "mean")
    }
}

/// Runs the recipe named in `config`.
pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<RecipeOutput> {
    config.validate()?;
    match config.recipe {
        Recipe::Collapse => run_collapse(config, ctx),
        Recipe::MixtureAblation => run_mixture_ablation(config, ctx),
        Recipe::ScalingSweep => run_scaling_sweep(config, ctx),
        Recipe::SpectralReport => run_spectral_report(config, ctx),
    }
}

/// Writes the training split of the configured dataset as `class,spurious,x_0,...`.
pub fn emit_dataset(config: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    let data = Datasets::from_config(config)?;
    if let Some(parent) = path.as_ref().parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    data.train.write_csv(path, "x")
}

/// One run per (strategy, seed) and a peak-vs-final WGA summary per strategy.
///
/// The report also holds the spectral analysis of the best class-balanced strategy
/// (highest mean final WGA), using the training-set features of each seed's model.
pub fn run_collapse(config: &ExperimentConfig, ctx: &RunContext) -> Result<RecipeOutput> {
    config.validate()?;
    let data = Datasets::from_config(config)?;
    let mut cells = Vec::new();
    for &strategy in &config.strategies {
        for &seed in &config.seeds {
            cells.push(Cell {
                label: strategy.to_string(),
                strategy,
                ratio: mixture_ratio(strategy),
                width: config.width,
                seed,
                note: String::new(),
            });
        }
    }
    let results = execute(&cells, &data, config, ctx)?;
    let summary = summarize(&results);

    let gaps: Vec<Value> = labels(&results)
        .iter()
        .map(|l| {
            let per_seed: Vec<f64> = results
                .iter()
                .filter(|c| &c.cell.label == l)
                .map(CellResult::peak_minus_final)
                .collect();
            json!({"label": l, "peak_minus_final": per_seed})
        })
        .collect();

    let best = best_balanced(&summary);
    let spectral = match &best {
        Some(label) => {
            let trials = results
                .iter()
                .filter(|c| &c.cell.label == label)
                .map(|c| spectral_trial(c, &data, config.spectral.k))
                .collect::<Result<Vec<_>>>()?;
            json!({"strategy": label, "report": SpectralReport::from_trials(config.spectral.k, trials)})
        }
        None => Value::Null,
    };
    let extra =
        json!({"peak_minus_final": gaps, "best_balanced_strategy": best, "spectral": spectral});
    finish(config, ctx, Some(data), results, summary, extra)
}

/// Mixture balancing over a list of class-imbalance ratios.
///
/// Ratio 1 coincides with subsetting and the original ratio with upsampling; those
/// rows are annotated. The report names the ratio maximizing mean validation WGA and
/// the one maximizing mean validation worst-class accuracy.
pub fn run_mixture_ablation(config: &ExperimentConfig, ctx: &RunContext) -> Result<RecipeOutput> {
    config.validate()?;
    let data = Datasets::from_config(config)?;
    let original = data.class_imbalance_ratio()?;
    let mut cells = Vec::new();
    for spec in &config.mixture_ratios {
        let r = spec.resolve(original);
        if r < 1.0 || r > original + RATIO_SLACK {
            return Err(Error::Config(format!(
                "mixture ratio {r} outside [1, {original}] for this training set"
            )));
        }
        let label = match spec {
            RatioSpec::Named(_) => "ratio-original".to_string(),
            RatioSpec::Value(v) => format!("ratio-{v}"),
        };
        let note = if r == 1.0 {
            "equivalent to subsetting"
        } else if (r - original).abs() <= RATIO_SLACK {
            "equivalent to upsampling"
        } else {
            ""
        };
        for &seed in &config.seeds {
            cells.push(Cell {
                label: label.clone(),
                strategy: BalancingStrategy::Mixture(r),
                ratio: Some(r),
                width: config.width,
                seed,
                note: note.to_string(),
            });
        }
    }
    let results = execute(&cells, &data, config, ctx)?;
    let summary = summarize(&results);
    let selection = json!({
        "by_validation_wga": select(&summary, |r| r.val_wga),
        "by_validation_worst_class_acc": select(&summary, |r| r.val_worst_class_acc),
    });
    let extra = json!({"original_ratio": original, "selection": selection});
    finish(config, ctx, Some(data), results, summary, extra)
}

/// Every (width, strategy, seed) combination; width 0 is the linear model.
pub fn run_scaling_sweep(config: &ExperimentConfig, ctx: &RunContext) -> Result<RecipeOutput> {
    config.validate()?;
    let data = Datasets::from_config(config)?;
    let mut cells = Vec::new();
    for &width in &config.widths {
        for &strategy in &config.strategies {
            for &seed in &config.seeds {
                cells.push(Cell {
                    label: format!("width-{width}-{strategy}"),
                    strategy,
                    ratio: mixture_ratio(strategy),
                    width,
                    seed,
                    note: if width == 0 {
                        "linear".into()
                    } else {
                        String::new()
                    },
                });
            }
        }
    }
    let results = execute(&cells, &data, config, ctx)?;
    let summary = summarize(&results);
    finish(config, ctx, Some(data), results, summary, json!({}))
}

/// Group and class spectra, `ρ(y)` and its correspondence with accuracy disparity.
///
/// With `spectral.features_csv` each file is one trial. Otherwise one model per seed
/// is trained under `spectral.strategy` and its training-set features are analyzed.
pub fn run_spectral_report(config: &ExperimentConfig, ctx: &RunContext) -> Result<RecipeOutput> {
    config.validate()?;
    let k = config.spectral.k;
    let (data, results, trials) = if config.spectral.features_csv.is_empty() {
        let data = Datasets::from_config(config)?;
        let strategy = config.spectral.strategy;
        let cells: Vec<Cell> = config
            .seeds
            .iter()
            .map(|&seed| Cell {
                label: strategy.to_string(),
                strategy,
                ratio: mixture_ratio(strategy),
                width: config.width,
                seed,
                note: String::new(),
            })
            .collect();
        let results = execute(&cells, &data, config, ctx)?;
        let trials = results
            .iter()
            .map(|c| spectral_trial(c, &data, config.spectral.k))
            .collect::<Result<Vec<_>>>()?;
        (Some(data), results, trials)
    } else {
        let trials = config
            .spectral
            .features_csv
            .iter()
            .map(|path| {
                let bank = FeatureBank::from_csv(path, None)?;
                let label = path.file_stem().map_or_else(
                    || path.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                );
                SpectralTrial::analyze(label, &bank, k, None)
            })
            .collect::<Result<Vec<_>>>()?;
        (None, Vec::new(), trials)
    };
    let report = SpectralReport::from_trials(k, trials);
    let dir = recipe_dir(config, ctx);
    fs::create_dir_all(&dir)?;
    write_spectral_tables(&dir, config, ctx, &report)?;
    let summary = summarize(&results);
    let extra = json!({"spectral": report});
    finish(config, ctx, data, results, summary, extra)
}

fn mixture_ratio(strategy: BalancingStrategy) -> Option<f64> {
    match strategy {
        BalancingStrategy::Mixture(r) => Some(r),
        _ => None,
    }
}

fn recipe_dir(config: &ExperimentConfig, ctx: &RunContext) -> PathBuf {
    ctx.out_dir.join(config.recipe.name())
}

/// Trains all cells, in parallel when allowed, returning results in cell order.
fn execute(
    cells: &[Cell],
    data: &Datasets,
    config: &ExperimentConfig,
    ctx: &RunContext,
) -> Result<Vec<CellResult>> {
    let run_one = |cell: &Cell| -> Result<CellResult> {
        let outcome = train(
            &data.train,
            &data.test,
            data.schema,
            cell.strategy,
            Architecture::from_width(cell.width),
            &config.train,
            cell.seed,
        )?;
        let validation = match &data.validation {
            Some(v) => Some(score(&outcome, v, data.schema)?),
            None => None,
        };
        Ok(CellResult {
            cell: cell.clone(),
            outcome,
            validation,
        })
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = ctx.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<CellResult>> = pool.install(|| cells.par_iter().map(run_one).collect());
    results.into_iter().collect()
}

fn score(
    outcome: &TrainOutcome,
    data: &LabeledDataset,
    schema: GroupSchema,
) -> Result<ValidationScore> {
    let partition = build_partition(data, schema)?;
    let preds = predict(&outcome.params, data.features())?;
    let acc = per_group_accuracy(&preds, data.class_labels(), &partition)?;
    Ok(ValidationScore {
        wga: worst_group_accuracy(&acc)?.0,
        worst_class_acc: worst_class_from_groups(&acc, &partition)?.0,
    })
}

/// Penultimate features of the cell's model on the training set, analyzed against
/// the model's final test group accuracies.
pub fn spectral_trial(cell: &CellResult, data: &Datasets, k: usize) -> Result<SpectralTrial> {
    let z = cell.outcome.params.features(data.train.features())?;
    let bank = FeatureBank::new(data.train.with_features(z)?, data.schema)?;
    let acc = cell.outcome.trace.last().map(|r| &r.test_groups);
    SpectralTrial::analyze(format!("seed{}", cell.cell.seed), &bank, k, acc)
}

fn labels(results: &[CellResult]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in results {
        if !out.contains(&r.cell.label) {
            out.push(r.cell.label.clone());
        }
    }
    out
}

type Metric = fn(&SummaryRow) -> Option<f64>;

/// Per-seed rows followed by mean and std rows for each label, in first-seen order.
pub fn summarize(results: &[CellResult]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for label in labels(results) {
        let group: Vec<&CellResult> = results.iter().filter(|c| c.cell.label == label).collect();
        let first = group[0];
        let base = |stat: String| SummaryRow {
            label: label.clone(),
            strategy: first.cell.strategy.to_string(),
            ratio: first.cell.ratio,
            width: first.cell.width,
            param_count: first.outcome.params.param_count(),
            stat,
            final_wga: 0.0,
            peak_wga: 0.0,
            peak_epoch: 0.0,
            final_avg_acc: 0.0,
            final_worst_class_acc: 0.0,
            final_train_acc: 0.0,
            interpolation_epoch: None,
            interpolated_seeds: 0,
            val_wga: None,
            val_worst_class_acc: None,
            note: first.cell.note.clone(),
        };
        let seed_rows: Vec<SummaryRow> = group
            .iter()
            .map(|c| {
                let trace = &c.outcome.trace;
                let last = trace.last().expect("at least one epoch");
                let (peak, peak_epoch) = trace.peak_wga();
                let interp = interpolation_epoch(&trace.train_accuracies());
                SummaryRow {
                    final_wga: last.wga,
                    peak_wga: peak,
                    peak_epoch: peak_epoch as f64,
                    final_avg_acc: last.avg_acc,
                    final_worst_class_acc: last.worst_class_acc,
                    final_train_acc: last.train_acc,
                    interpolation_epoch: interp.map(|e| e as f64),
                    interpolated_seeds: usize::from(interp.is_some()),
                    val_wga: c.validation.map(|v| v.wga),
                    val_worst_class_acc: c.validation.map(|v| v.worst_class_acc),
                    ..base(format!("seed{}", c.cell.seed))
                }
            })
            .collect();

        let fields: [Metric; 9] = [
            |r| Some(r.final_wga),
            |r| Some(r.peak_wga),
            |r| Some(r.peak_epoch),
            |r| Some(r.final_avg_acc),
            |r| Some(r.final_worst_class_acc),
            |r| Some(r.final_train_acc),
            |r| r.interpolation_epoch,
            |r| r.val_wga,
            |r| r.val_worst_class_acc,
        ];
        let stats = fields.map(|f| {
            let vals: Vec<f64> = seed_rows.iter().filter_map(f).collect();
            mean_std(&vals)
        });
        let interpolated = seed_rows
            .iter()
            .filter(|r| r.interpolation_epoch.is_some())
            .count();
        rows.extend(seed_rows);
        for (name, pick) in [("mean", 0usize), ("std", 1)] {
            let get = |i: usize| stats[i].map(|(m, s)| if pick == 0 { m } else { s });
            rows.push(SummaryRow {
                final_wga: get(0).unwrap_or(f64::NAN),
                peak_wga: get(1).unwrap_or(f64::NAN),
                peak_epoch: get(2).unwrap_or(f64::NAN),
                final_avg_acc: get(3).unwrap_or(f64::NAN),
                final_worst_class_acc: get(4).unwrap_or(f64::NAN),
                final_train_acc: get(5).unwrap_or(f64::NAN),
                interpolation_epoch: get(6),
                interpolated_seeds: interpolated,
                val_wga: get(7),
                val_worst_class_acc: get(8),
                ..base(name.to_string())
            });
        }
    }
    rows
}

/// Label of the non-`none` strategy with the highest mean final WGA.
fn best_balanced(summary: &[SummaryRow]) -> Option<String> {
    summary
        .iter()
        .filter(|r| r.stat == "mean" && r.strategy != "none")
        .fold(None, |best: Option<&SummaryRow>, r| match best {
            Some(b) if b.final_wga >= r.final_wga => Some(b),
            _ => Some(r),
        })
        .map(|r| r.label.clone())
}

/// Label with the largest mean of `metric`; ties go to the earlier label.
fn select(summary: &[SummaryRow], metric: impl Fn(&SummaryRow) -> Option<f64>) -> Option<String> {
    summary
        .iter()
        .filter(|r| r.stat == "mean")
        .filter_map(|r| metric(r).map(|v| (r, v)))
        .fold(
            None,
            |best: Option<(&SummaryRow, f64)>, (r, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((r, v)),
            },
        )
        .map(|(r, _)| r.label.clone())
}

/// `# generated_at_unix: <t>` followed by the resolved config, one `# ` line each.
fn header_block(config: &ExperimentConfig, ctx: &RunContext) -> String {
    let mut out = format!(
        "# generated_at_unix: {}\n# config:\n",
        ctx.generated_at_unix
    );
    for line in config.to_json().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn finish(
    config: &ExperimentConfig,
    ctx: &RunContext,
    data: Option<Datasets>,
    cells: Vec<CellResult>,
    summary: Vec<SummaryRow>,
    extra: Value,
) -> Result<RecipeOutput> {
    let dir = recipe_dir(config, ctx);
    fs::create_dir_all(&dir)?;
    let header = header_block(config, ctx);

    for c in &cells {
        let cell_dir = dir.join(&c.cell.label).join(format!("seed{}", c.cell.seed));
        fs::create_dir_all(&cell_dir)?;
        let mut f = std::io::BufWriter::new(fs::File::create(cell_dir.join("trace.csv"))?);
        f.write_all(header.as_bytes())?;
        writeln!(
            f,
            "# cell: label={} strategy={} width={} seed={}",
            c.cell.label, c.cell.strategy, c.cell.width, c.cell.seed
        )?;
        c.outcome.trace.write_csv(&mut f)?;
        f.flush()?;
    }

    if !summary.is_empty() {
        let mut f = std::io::BufWriter::new(fs::File::create(dir.join("summary.csv"))?);
        f.write_all(header.as_bytes())?;
        writeln!(f, "{SUMMARY_HEADER}")?;
        for row in &summary {
            writeln!(f, "{}", row.csv_line())?;
        }
        f.flush()?;
    }

    let dataset = match &data {
        Some(d) => {
            let partition = build_partition(&d.train, d.schema)?;
            json!({
                "spec": d.spec,
                "train_group_sizes": partition.group_sizes(),
                "train_class_sizes": partition.class_sizes(),
                "class_imbalance_ratio": partition.class_imbalance_ratio()?,
                "test_size": d.test.len(),
                "validation_size": d.validation.as_ref().map_or(0, LabeledDataset::len),
            })
        }
        None => Value::Null,
    };
    let mut report = json!({
        "recipe": config.recipe.name(),
        "generated_at_unix": ctx.generated_at_unix,
        "config": config,
        "dataset": dataset,
        "summary": summary,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut report, extra) {
        map.extend(more);
    }
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;

    Ok(RecipeOutput {
        recipe: config.recipe,
        dir,
        data,
        cells,
        summary,
        report,
    })
}

fn write_spectral_tables(
    dir: &Path,
    config: &ExperimentConfig,
    ctx: &RunContext,
    report: &SpectralReport,
) -> Result<()> {
    let header = header_block(config, ctx);
    let mut f = std::io::BufWriter::new(fs::File::create(dir.join("eigenvalues.csv"))?);
    f.write_all(header.as_bytes())?;
    writeln!(f, "trial,kind,id,class,size,minority,rank,eigenvalue")?;
    for t in &report.trials {
        for g in &t.groups {
            for (i, v) in g.top_k.iter().flatten().enumerate() {
                writeln!(
                    f,
                    "{},group,{},{},{},{},{},{v:?}",
                    t.label,
                    g.group,
                    g.class,
                    g.size,
                    g.minority,
                    i + 1
                )?;
            }
        }
        for c in &t.classes {
            for (i, v) in c.top_k.iter().flatten().enumerate() {
                writeln!(
                    f,
                    "{},class,{},{},{},,{},{v:?}",
                    t.label,
                    c.class,
                    c.class,
                    c.size,
                    i + 1
                )?;
            }
        }
    }
    f.flush()?;

    let mut f = std::io::BufWriter::new(fs::File::create(dir.join("rho.csv"))?);
    f.write_all(header.as_bytes())?;
    writeln!(f, "trial,class,rho,disparity")?;
    for t in &report.trials {
        for (y, rho) in t.rho.iter().enumerate() {
            let d = t.disparity.as_ref().and_then(|d| d[y]);
            writeln!(f, "{},{y},{},{}", t.label, opt(*rho), opt(d))?;
        }
    }
    for s in &report.rho_summary {
        writeln!(f, "mean,{},{},", s.class, opt(s.mean))?;
        writeln!(f, "std,{},{},", s.class, opt(s.std))?;
    }
    f.flush()?;
    Ok(())
}
