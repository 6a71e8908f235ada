//! End-to-end orchestration: filter, classify, aggregate, spatial, regress
//! and lsva stages over one output directory, with a content-hash manifest
//! that lets unchanged stages be skipped on rerun.

mod config;
mod output;
mod stages;
mod sweep;

pub use config::{
    AggregateConfig, ClassifyConfig, InputConfig, LsvaConfig, PipelineConfig, RegressConfig, SpatialConfig,
    SweepConfig, WeightsSpec,
};
pub use output::{sha256_bytes, sha256_file, write_csv, write_json};
pub use stages::{lsva_file_name, train_model, write_lsva_csv, MentionRecord, ModelOutcome, TrainOutcome, LABELS, MENTIONS};
pub use sweep::{sensitivity_sweep, SweepRegion, SweepRow};

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusReport};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Filter,
    Classify,
    Aggregate,
    Spatial,
    Regress,
    Lsva,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Filter,
        Stage::Classify,
        Stage::Aggregate,
        Stage::Spatial,
        Stage::Regress,
        Stage::Lsva,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Filter => "filter",
            Stage::Classify => "classify",
            Stage::Aggregate => "aggregate",
            Stage::Spatial => "spatial",
            Stage::Regress => "regress",
            Stage::Lsva => "lsva",
        }
    }

    /// Stages whose outputs this one reads.
    pub fn dependencies(self) -> &'static [Stage] {
        match self {
            Stage::Filter => &[],
            Stage::Classify => &[Stage::Filter],
            Stage::Aggregate | Stage::Spatial | Stage::Regress => &[Stage::Filter, Stage::Classify],
            Stage::Lsva => &[Stage::Filter, Stage::Classify],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub input_hash: String,
    pub output_hash: String,
    pub outputs: Vec<OutputFile>,
}

/// Deterministic run record; wall times live in `timings.json`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn load(path: &Path) -> Result<Manifest> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&body)?)
    }

    pub fn get(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    fn upsert(&mut self, rec: StageRecord) {
        self.stages.retain(|s| s.stage != rec.stage);
        self.stages.push(rec);
        self.stages.sort_by_key(|s| s.stage);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub wall_seconds: f64,
    pub cached: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub timings: Vec<StageTiming>,
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub corpus: Corpus,
    pub report: CorpusReport,
    pub out: PathBuf,
    pub exec: Exec,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, out: PathBuf, exec: Exec) -> Result<Pipeline> {
        config.validate()?;
        let i = &config.input;
        let (corpus, report) = Corpus::load(&i.reviews, &i.pois, &i.regions, &i.covariates)?;
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Pipeline {
            config,
            corpus,
            report,
            out,
            exec,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn input_hash(&self, stage: Stage) -> Result<String> {
        match stage {
            Stage::Filter => self.filter_inputs(),
            Stage::Classify => self.classify_inputs(),
            Stage::Aggregate => self.aggregate_inputs(),
            Stage::Spatial => self.spatial_inputs(),
            Stage::Regress => self.regress_inputs(),
            Stage::Lsva => self.lsva_inputs(),
        }
    }

    fn execute(&self, stage: Stage) -> Result<Vec<String>> {
        match stage {
            Stage::Filter => self.run_filter(),
            Stage::Classify => self.run_classify(),
            Stage::Aggregate => self.run_aggregate(),
            Stage::Spatial => self.run_spatial(),
            Stage::Regress => self.run_regress(),
            Stage::Lsva => self.run_lsva(),
        }
    }

    fn record(&self, stage: Stage, input_hash: String, files: Vec<String>) -> Result<StageRecord> {
        let mut outputs = files
            .into_iter()
            .map(|f| {
                let sha256 = sha256_file(&self.path(&f))?;
                Ok(OutputFile { path: f, sha256 })
            })
            .collect::<Result<Vec<_>>>()?;
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let joined: String = outputs.iter().map(|o| format!("{}\0{}\n", o.path, o.sha256)).collect();
        Ok(StageRecord {
            stage,
            input_hash,
            output_hash: sha256_bytes(joined.as_bytes()),
            outputs,
        })
    }

    fn cache_valid(&self, rec: &StageRecord, input_hash: &str) -> bool {
        rec.input_hash == input_hash
            && rec
                .outputs
                .iter()
                .all(|o| sha256_file(&self.path(&o.path)).is_ok_and(|h| h == o.sha256))
    }

    /// Runs `targets` and everything they depend on, in stage order,
    /// reusing cached outputs whose inputs are unchanged unless `force`.
    pub fn run_stages(&self, targets: &[Stage], force: bool) -> Result<RunSummary> {
        let mut wanted: Vec<Stage> = targets
            .iter()
            .flat_map(|t| t.dependencies().iter().copied().chain([*t]))
            .collect();
        wanted.sort();
        wanted.dedup();
        let manifest_path = self.path(Manifest::FILE);
        let previous = Manifest::load(&manifest_path).ok().filter(|m| m.seed == self.config.seed);
        let mut manifest = previous.clone().unwrap_or(Manifest {
            seed: self.config.seed,
            stages: vec![],
        });
        let mut timings = Vec::new();
        for stage in wanted {
            let start = Instant::now();
            let wrap = |e: Error| Error::Stage {
                stage: stage.name().into(),
                source: Box::new(e),
            };
            let input_hash = self.input_hash(stage).map_err(wrap)?;
            let cached = !force
                && previous
                    .as_ref()
                    .and_then(|m| m.get(stage))
                    .is_some_and(|r| self.cache_valid(r, &input_hash));
            if cached {
                log::info!("{}: inputs unchanged, reusing outputs", stage.name());
            } else {
                log::info!("{}: running", stage.name());
                let files = self.execute(stage).map_err(wrap)?;
                manifest.upsert(self.record(stage, input_hash, files).map_err(wrap)?);
                output::write_json(&manifest_path, &manifest)?;
            }
            timings.push(StageTiming {
                stage,
                wall_seconds: start.elapsed().as_secs_f64(),
                cached,
            });
        }
        output::write_json(&manifest_path, &manifest)?;
        output::write_json(&self.path("timings.json"), &timings)?;
        Ok(RunSummary { manifest, timings })
    }

    pub fn run(&self, force: bool) -> Result<RunSummary> {
        self.run_stages(&Stage::ALL, force)
    }
}
