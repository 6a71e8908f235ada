use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::ModelKind;
use crate::error::{Error, Result};
use crate::lsva::Subset;
use crate::regress::Direction;
use crate::sentiment::{RegionAgg, RegionLevel, WilcoxonMethod};

/// Full pipeline configuration, read from TOML. Unknown keys are rejected.
/// Relative paths resolve against the config file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub input: InputConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub aggregate: AggregateConfig,
    #[serde(default)]
    pub spatial: SpatialConfig,
    #[serde(default)]
    pub regress: RegressConfig,
    #[serde(default)]
    pub lsva: LsvaConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_seed() -> u64 {
    42
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub reviews: PathBuf,
    pub pois: PathBuf,
    pub regions: PathBuf,
    pub covariates: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    /// logistic, sgd, forest, lexicon or external.
    pub kind: String,
    /// Hyperparameter grid (TOML) for the trainable kinds.
    pub grid: Option<PathBuf>,
    /// Labeled examples (text,label,split) for the trainable kinds.
    pub labeled: Option<PathBuf>,
    /// Term valences for the lexicon kind.
    pub lexicon: Option<PathBuf>,
    /// JSON-Lines labels for the external kind.
    pub sidecar: Option<PathBuf>,
    pub folds: usize,
    pub min_df: usize,
    pub ngram_max: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            kind: "logistic".into(),
            grid: None,
            labeled: None,
            lexicon: None,
            sidecar: None,
            folds: 10,
            min_df: 2,
            ngram_max: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregateConfig {
    /// Minimum scored sentences for a CBG or CBSA to be analysed.
    pub min_reviews: usize,
    /// Minimum scored sentences for a POI.
    pub min_poi_sentences: usize,
    /// pooled or poi-mean.
    pub region_agg: String,
    pub exclude_neutral: bool,
    /// auto, exact or normal.
    pub wilcoxon: String,
    pub top_k: usize,
    pub rank_min_cbgs: usize,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        AggregateConfig {
            min_reviews: 10,
            min_poi_sentences: 10,
            region_agg: "pooled".into(),
            exclude_neutral: false,
            wilcoxon: "auto".into(),
            top_k: 10,
            rank_min_cbgs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpatialConfig {
    /// cbg or cbsa.
    pub level: String,
    /// `knn:<k>` or `adjacency:<edge-list file>`.
    pub weights: String,
    pub permutations: usize,
    pub alpha: f64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig {
            level: "cbsa".into(),
            weights: "knn:8".into(),
            permutations: 999,
            alpha: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegressConfig {
    /// Candidate covariates; defaults to the in-model variables present.
    pub variables: Option<Vec<String>>,
    pub vif_threshold: f64,
    pub knots: usize,
    pub min_cbgs_within: usize,
    pub max_sweeps: usize,
    /// backward, forward or both.
    pub direction: String,
}

impl Default for RegressConfig {
    fn default() -> Self {
        RegressConfig {
            variables: None,
            vif_threshold: crate::regress::DEFAULT_VIF_THRESHOLD,
            knots: 8,
            min_cbgs_within: 10,
            max_sweeps: 30,
            direction: "backward".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LsvaConfig {
    pub min_count: usize,
    /// Scale `min_count` by each subset's share of the sentences.
    pub scale_min_count: bool,
    /// Defaults to the bundled list.
    pub stopwords: Option<PathBuf>,
    pub subsets: Vec<String>,
}

impl Default for LsvaConfig {
    fn default() -> Self {
        LsvaConfig {
            min_count: crate::lsva::DEFAULT_MIN_COUNT,
            scale_min_count: true,
            stopwords: None,
            subsets: vec!["all".into(), "urban".into(), "rural".into()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub max_threshold: usize,
    /// cbg or cbsa.
    pub level: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_threshold: 50,
            level: "cbg".into(),
        }
    }
}

/// Spatial weights choice parsed from `knn:<k>` / `adjacency:<file>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightsSpec {
    Knn(usize),
    Adjacency(PathBuf),
}

impl WeightsSpec {
    pub fn parse(s: &str) -> Result<WeightsSpec> {
        if let Some(k) = s.strip_prefix("knn:") {
            let k = k
                .parse()
                .map_err(|_| Error::Config(format!("weights `{s}`: k must be a positive integer")))?;
            if k == 0 {
                return Err(Error::Config("weights: k must be at least 1".into()));
            }
            return Ok(WeightsSpec::Knn(k));
        }
        if let Some(p) = s.strip_prefix("adjacency:") {
            return Ok(WeightsSpec::Adjacency(PathBuf::from(p)));
        }
        Err(Error::Config(format!("weights `{s}`: expected knn:<k> or adjacency:<file>")))
    }
}

fn cfg<T, E: std::fmt::Display>(field: &str, r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| Error::Config(format!("{field}: {e}")))
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads, validates and resolves relative paths against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = PipelineConfig::parse(&text)?;
        c.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(c)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input.reviews);
        fix(&mut self.input.pois);
        fix(&mut self.input.regions);
        fix(&mut self.input.covariates);
        for p in [
            &mut self.classify.grid,
            &mut self.classify.labeled,
            &mut self.classify.lexicon,
            &mut self.classify.sidecar,
            &mut self.lsva.stopwords,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(rest) = self.spatial.weights.strip_prefix("adjacency:") {
            let p = Path::new(rest);
            if p.is_relative() {
                self.spatial.weights = format!("adjacency:{}", base.join(p).display());
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.model_kind()?;
        match kind {
            ModelKind::Lexicon if self.classify.lexicon.is_none() => {
                return Err(Error::Config("classify.lexicon is required for the lexicon kind".into()))
            }
            ModelKind::External if self.classify.sidecar.is_none() => {
                return Err(Error::Config("classify.sidecar is required for the external kind".into()))
            }
            k if k.is_trainable() && (self.classify.labeled.is_none() || self.classify.grid.is_none()) => {
                return Err(Error::Config(format!(
                    "classify.labeled and classify.grid are required for the {k} kind"
                )))
            }
            _ => {}
        }
        if self.classify.folds < 2 {
            return Err(Error::Config("classify.folds must be at least 2".into()));
        }
        if self.classify.ngram_max < 1 {
            return Err(Error::Config("classify.ngram_max must be at least 1".into()));
        }
        self.region_agg()?;
        self.wilcoxon()?;
        self.spatial_level()?;
        self.weights()?;
        if self.spatial.alpha.is_nan() || self.spatial.alpha <= 0.0 || self.spatial.alpha >= 1.0 {
            return Err(Error::Config("spatial.alpha must be in (0, 1)".into()));
        }
        if self.regress.knots < 4 {
            return Err(Error::Config("regress.knots must be at least 4".into()));
        }
        if self.regress.vif_threshold.is_nan() || self.regress.vif_threshold < 1.0 {
            return Err(Error::Config("regress.vif_threshold must be at least 1".into()));
        }
        self.direction()?;
        self.subsets()?;
        if self.lsva.min_count == 0 {
            return Err(Error::Config("lsva.min_count must be at least 1".into()));
        }
        self.sweep_level()?;
        Ok(())
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        cfg("classify.kind", self.classify.kind.parse())
    }

    pub fn region_agg(&self) -> Result<RegionAgg> {
        cfg("aggregate.region_agg", self.aggregate.region_agg.parse())
    }

    pub fn wilcoxon(&self) -> Result<WilcoxonMethod> {
        match self.aggregate.wilcoxon.as_str() {
            "auto" => Ok(WilcoxonMethod::Auto),
            "exact" => Ok(WilcoxonMethod::Exact),
            "normal" => Ok(WilcoxonMethod::Normal),
            other => Err(Error::Config(format!("aggregate.wilcoxon: unknown method `{other}`"))),
        }
    }

    pub fn spatial_level(&self) -> Result<RegionLevel> {
        cfg("spatial.level", self.spatial.level.parse())
    }

    pub fn sweep_level(&self) -> Result<RegionLevel> {
        cfg("sweep.level", self.sweep.level.parse())
    }

    pub fn weights(&self) -> Result<WeightsSpec> {
        WeightsSpec::parse(&self.spatial.weights)
    }

    pub fn direction(&self) -> Result<Direction> {
        cfg("regress.direction", self.regress.direction.parse())
    }

    pub fn subsets(&self) -> Result<Vec<Subset>> {
        self.lsva
            .subsets
            .iter()
            .map(|s| cfg("lsva.subsets", s.parse()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
[input]
reviews = "r.jsonl"
pois = "p.csv"
regions = "g.csv"
covariates = "c.csv"

[classify]
kind = "lexicon"
lexicon = "lex.csv"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::parse(MIN).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.aggregate.min_reviews, 10);
        assert_eq!(c.spatial.permutations, 999);
        assert_eq!(c.regress.knots, 8);
        assert_eq!(c.weights().unwrap(), WeightsSpec::Knn(8));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = PipelineConfig::parse(&format!("{MIN}\n[spatial]\npermutation = 9\n")).unwrap_err();
        assert!(err.to_string().contains("permutation"), "{err}");
    }

    #[test]
    fn bad_values_rejected() {
        assert!(PipelineConfig::parse(&format!("{MIN}\n[spatial]\nweights = \"ring:3\"\n")).is_err());
        assert!(PipelineConfig::parse(&MIN.replace("lexicon = \"lex.csv\"", "")).is_err());
        assert!(PipelineConfig::parse(&format!("{MIN}\n[lsva]\nsubsets = [\"suburb\"]\n")).is_err());
    }
}
