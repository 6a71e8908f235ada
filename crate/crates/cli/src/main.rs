use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use parksense::pipeline::{train_model, Pipeline, PipelineConfig, RunSummary, Stage};
use parksense::Exec;

/// Parking sentiment from crowdsourced POI reviews.
#[derive(Parser, Debug)]
#[command(name = "parksense", version)]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config `out` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate the corpus, write corpus_report.json.
    Ingest,
    /// Extract parking sentences.
    Filter(StageArgs),
    /// Grid-search a trainable classifier and write the fitted model.
    Train(StageArgs),
    /// Label every extracted sentence.
    Classify(StageArgs),
    /// POI and region sentiment, category rankings and Wilcoxon tests.
    Aggregate(StageArgs),
    /// Pairwise category Wilcoxon tests (runs aggregation).
    Compare(StageArgs),
    /// Global Moran's I and LISA clusters.
    Spatial(StageArgs),
    /// Correlations, cohort comparison and the GAM models.
    Regress(StageArgs),
    /// Salience-valence term tables.
    Lsva(StageArgs),
    /// Correlation sensitivity to the minimum-review threshold.
    Sweep(StageArgs),
    /// Every stage in order.
    Run(StageArgs),
}

#[derive(Args, Debug, Default)]
struct StageArgs {
    /// Rerun stages even when their inputs are unchanged.
    #[arg(long)]
    force: bool,
    /// Classifier kind: logistic, sgd, forest, lexicon or external.
    #[arg(long)]
    kind: Option<String>,
    /// Hyperparameter grid file.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Cross-validation folds.
    #[arg(long)]
    k: Option<usize>,
    /// Spatial weights: knn:<k> or adjacency:<file>.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Minimum reviews for a region to be included.
    #[arg(long)]
    min_reviews: Option<usize>,
    #[arg(long)]
    vif_threshold: Option<f64>,
    /// B-spline basis size per tensor margin.
    #[arg(long)]
    knots: Option<usize>,
    /// LSVA subset (all, urban, rural, category:<name>); repeatable.
    #[arg(long)]
    subset: Vec<String>,
    #[arg(long)]
    min_count: Option<usize>,
    /// Stopword file, one word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// pooled or poi-mean.
    #[arg(long)]
    region_agg: Option<String>,
}

impl StageArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        let cl = &mut c.classify;
        set(&mut cl.kind, &self.kind);
        if self.grid.is_some() {
            cl.grid = self.grid.clone();
        }
        set(&mut cl.folds, &self.k);
        set(&mut c.spatial.weights, &self.weights);
        set(&mut c.spatial.permutations, &self.permutations);
        set(&mut c.spatial.alpha, &self.alpha);
        set(&mut c.aggregate.min_reviews, &self.min_reviews);
        set(&mut c.aggregate.region_agg, &self.region_agg);
        set(&mut c.regress.vif_threshold, &self.vif_threshold);
        set(&mut c.regress.knots, &self.knots);
        if !self.subset.is_empty() {
            c.lsva.subsets = self.subset.clone();
        }
        set(&mut c.lsva.min_count, &self.min_count);
        if self.stopwords.is_some() {
            c.lsva.stopwords = self.stopwords.clone();
        }
    }
}

fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
    if let Some(v) = v {
        *slot = v.clone();
    }
}

fn load_config(cli: &Cli, args: Option<&StageArgs>) -> Result<(PipelineConfig, PathBuf)> {
    let Some(path) = &cli.config else {
        bail!("--config is required");
    };
    let mut c = PipelineConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(a) = args {
        a.apply(&mut c);
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    c.validate()?;
    let out = cli
        .out
        .clone()
        .or_else(|| c.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((c, out))
}

fn report(s: &RunSummary) {
    for t in &s.timings {
        let state = if t.cached { "cached" } else { "done" };
        println!("{:<10} {:<7} {:>8.2}s", t.stage.name(), state, t.wall_seconds);
    }
}

fn run_stage(p: &Pipeline, stage: Stage, a: &StageArgs) -> Result<()> {
    report(&p.run_stages(&[stage], a.force)?);
    Ok(())
}

fn show(path: &Path) {
    println!("wrote {}", path.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let default = StageArgs::default();
    let args = match &cli.command {
        Command::Ingest => &default,
        Command::Filter(a)
        | Command::Train(a)
        | Command::Classify(a)
        | Command::Aggregate(a)
        | Command::Compare(a)
        | Command::Spatial(a)
        | Command::Regress(a)
        | Command::Lsva(a)
        | Command::Sweep(a)
        | Command::Run(a) => a,
    };
    let (config, out) = load_config(&cli, Some(args))?;

    if let Command::Train(_) = cli.command {
        let kind = config.model_kind()?;
        if !kind.is_trainable() {
            bail!("the {kind} kind has nothing to train");
        }
        let c = &config.classify;
        let (Some(labeled), Some(grid)) = (&c.labeled, &c.grid) else {
            bail!("classify.labeled and classify.grid are required");
        };
        let tfidf = parksense::classify::TfidfConfig {
            min_df: c.min_df,
            ngram_range: (1, c.ngram_max),
        };
        let t = train_model(kind, labeled, grid, c.folds, &tfidf, config.seed, exec)?;
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        t.write(&out)?;
        println!("best {} mean CV accuracy {:.4}", t.best, t.cv.best_point().mean_accuracy);
        if let Some(m) = &t.test_metrics {
            println!("test accuracy {:.4}", m.accuracy);
        }
        return Ok(());
    }

    let p = Pipeline::new(config, out, exec)?;
    match &cli.command {
        Command::Ingest => {
            let path = p.path("corpus_report.json");
            parksense::pipeline::write_json(&path, &p.report)?;
            println!(
                "{} reviews, {} POIs, {} CBGs with covariates",
                p.corpus.reviews.len(),
                p.corpus.pois.len(),
                p.corpus.covariates.rows.len()
            );
            show(&path);
        }
        Command::Filter(a) => run_stage(&p, Stage::Filter, a)?,
        Command::Classify(a) => run_stage(&p, Stage::Classify, a)?,
        Command::Aggregate(a) => run_stage(&p, Stage::Aggregate, a)?,
        Command::Compare(a) => {
            run_stage(&p, Stage::Aggregate, a)?;
            show(&p.path("wilcoxon.csv"));
            show(&p.path("wilcoxon_pairs.csv"));
        }
        Command::Spatial(a) => run_stage(&p, Stage::Spatial, a)?,
        Command::Regress(a) => run_stage(&p, Stage::Regress, a)?,
        Command::Lsva(a) => run_stage(&p, Stage::Lsva, a)?,
        Command::Sweep(a) => {
            report(&p.run_stages(&[Stage::Classify], a.force)?);
            show(&p.sweep()?);
        }
        Command::Run(a) => report(&p.run(a.force)?),
        Command::Train(_) => unreachable!(),
    }
    Ok(())
}
