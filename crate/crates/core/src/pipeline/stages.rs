//! The six pipeline stages. Each reads the corpus and upstream stage files
//! from the output directory and writes its own files there.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::{write_csv, write_json, write_json_exact, write_jsonl, InputHasher};
use super::sweep::{sensitivity_sweep, SweepRegion};
use super::{Pipeline, WeightsSpec};
use crate::classify::{
    cross_validate, load_labeled, ExternalLabels, Grid, Lexicon, MetricsReport, ModelKind, Params, SentenceRef, Split,
    TextClassifier, TfidfConfig,
};
use crate::corpus::{in_model_variables, PoiCategory};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::format::{opt_sig9, sig9};
use crate::lsva::{compute_lsva, scaled_min_count, LsvaSentence, Stopwords, Subset};
use crate::regress::{
    between_cbsa_correlations, build_cbg_table, build_design, cbsa_rows, cohort_difference, fit_gam, modal_categories,
    stepwise_aic, vif_filter, within_cbsa_correlations, CbgTable, DesignOptions, GamFit, StepwiseResult, VifReport,
};
use crate::sentiment::{
    aggregate_poi, aggregate_region, pairwise_category_tests, rank_regions, LabeledSentence, RegionAggregation,
    RegionLevel, RegionSentiment, ScoreOptions,
};
use crate::spatial::{build_adjacency_weights, build_knn_weights, lisa, load_edge_list, morans_i};
use crate::textfilter::extract_parking_sentences;

pub const MENTIONS: &str = "mentions.jsonl";
pub const LABELS: &str = "labels.jsonl";

/// One extracted parking sentence, as written by the filter stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub sentence_uid: String,
    pub review_id: String,
    pub poi_id: String,
    pub sentence_index: usize,
    pub trigger: String,
    pub trigger_pos: String,
    pub text: String,
}

pub(crate) fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    body.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}

fn b(x: bool) -> String {
    x.to_string()
}

impl Pipeline {
    fn score_options(&self) -> ScoreOptions {
        ScoreOptions {
            exclude_neutral: self.config.aggregate.exclude_neutral,
        }
    }

    fn corpus_hash(&self, h: &mut InputHasher) -> Result<()> {
        let i = &self.config.input;
        h.file("reviews", &i.reviews)?
            .file("pois", &i.pois)?
            .file("regions", &i.regions)?
            .file("covariates", &i.covariates)?;
        Ok(())
    }

    fn upstream(&self, h: &mut InputHasher, name: &str) -> Result<()> {
        h.file(name, &self.path(name))?;
        Ok(())
    }

    pub(crate) fn labels(&self) -> Result<Vec<LabeledSentence>> {
        read_jsonl(&self.path(LABELS))
    }

    // ---- filter ----

    pub(crate) fn filter_inputs(&self) -> Result<String> {
        let mut h = InputHasher::new("filter");
        self.corpus_hash(&mut h)?;
        Ok(h.finish())
    }

    pub(crate) fn run_filter(&self) -> Result<Vec<String>> {
        let poi_of: HashMap<&str, &str> = self
            .corpus
            .reviews
            .iter()
            .map(|r| (r.review_id.as_str(), r.poi_id.as_str()))
            .collect();
        let rows: Vec<MentionRecord> = extract_parking_sentences(&self.corpus.reviews, self.exec)
            .into_iter()
            .map(|m| MentionRecord {
                sentence_uid: m.sentence.uid(),
                poi_id: poi_of[m.sentence.review_id.as_str()].to_string(),
                review_id: m.sentence.review_id,
                sentence_index: m.sentence.index,
                trigger: m.trigger.as_str().to_string(),
                trigger_pos: m.trigger_pos.as_str().to_string(),
                text: m.sentence.text,
            })
            .collect();
        write_jsonl(&self.path(MENTIONS), &rows)?;
        write_json(&self.path("corpus_report.json"), &self.report)?;
        Ok(vec![MENTIONS.into(), "corpus_report.json".into()])
    }

    // ---- classify ----

    pub(crate) fn classify_inputs(&self) -> Result<String> {
        let c = &self.config.classify;
        let mut h = InputHasher::new("classify");
        self.upstream(&mut h, MENTIONS)?;
        h.json("config", c)?.json("seed", &self.config.seed)?;
        for (label, p) in [("grid", &c.grid), ("labeled", &c.labeled), ("lexicon", &c.lexicon), ("sidecar", &c.sidecar)] {
            if let Some(p) = p {
                h.file(label, p)?;
            }
        }
        Ok(h.finish())
    }

    pub(crate) fn run_classify(&self) -> Result<Vec<String>> {
        let c = &self.config.classify;
        let kind = self.config.model_kind()?;
        let mut outputs = Vec::new();
        let classifier = match kind {
            ModelKind::Lexicon => {
                TextClassifier::rule_based(crate::classify::ClassifierModel::Lexicon(Lexicon::load(
                    c.lexicon.as_deref().expect("validated"),
                )?))
            }
            ModelKind::External => TextClassifier::rule_based(crate::classify::ClassifierModel::External(
                ExternalLabels::load(c.sidecar.as_deref().expect("validated"))?,
            )),
            _ => {
                let trained = train_model(
                    kind,
                    c.labeled.as_deref().expect("validated"),
                    c.grid.as_deref().expect("validated"),
                    c.folds,
                    &self.tfidf_config(),
                    self.config.seed,
                    self.exec,
                )?;
                trained.write(&self.out)?;
                outputs.extend(TrainOutcome::FILES.iter().map(|s| s.to_string()));
                trained.classifier
            }
        };
        if kind == ModelKind::Lexicon {
            if let Some(p) = &c.labeled {
                let test: Vec<_> = load_labeled(p)?.into_iter().filter(|e| e.split == Split::Test).collect();
                if !test.is_empty() {
                    write_json(&self.path("test_metrics.json"), &classifier.evaluate(&test, self.exec)?)?;
                    outputs.push("test_metrics.json".into());
                }
            }
        }
        let mentions: Vec<MentionRecord> = read_jsonl(&self.path(MENTIONS))?;
        let refs: Vec<SentenceRef> = mentions
            .iter()
            .map(|m| SentenceRef {
                uid: &m.sentence_uid,
                text: &m.text,
            })
            .collect();
        let labels = classifier.predict(&refs, self.exec)?;
        let rows: Vec<LabeledSentence> = mentions
            .iter()
            .zip(labels)
            .map(|(m, label)| LabeledSentence {
                sentence_uid: m.sentence_uid.clone(),
                poi_id: m.poi_id.clone(),
                label,
            })
            .collect();
        write_jsonl(&self.path(LABELS), &rows)?;
        outputs.push(LABELS.into());
        Ok(outputs)
    }

    pub fn tfidf_config(&self) -> TfidfConfig {
        TfidfConfig {
            min_df: self.config.classify.min_df,
            ngram_range: (1, self.config.classify.ngram_max),
        }
    }

    // ---- aggregate ----

    pub(crate) fn aggregate_inputs(&self) -> Result<String> {
        let mut h = InputHasher::new("aggregate");
        self.upstream(&mut h, LABELS)?;
        self.corpus_hash(&mut h)?;
        h.json("config", &self.config.aggregate)?;
        Ok(h.finish())
    }

    pub(crate) fn run_aggregate(&self) -> Result<Vec<String>> {
        let a = &self.config.aggregate;
        let labeled = self.labels()?;
        let opts = self.score_options();
        let pois = aggregate_poi(&labeled, &self.corpus, a.min_poi_sentences, opts);
        let mut rows = Vec::new();
        for (p, inc) in pois.included.iter().map(|p| (p, true)).chain(pois.excluded.iter().map(|p| (p, false))) {
            rows.push(vec![
                p.poi_id.clone(),
                p.category.to_string(),
                p.n_parking_sentences.to_string(),
                sig9(p.weighted_sentiment),
                b(inc),
            ]);
        }
        rows.sort();
        write_csv(
            &self.path("poi_sentiment.csv"),
            &["poi_id", "category", "n_parking_sentences", "weighted_sentiment", "included"],
            &rows,
        )?;
        let agg = self.config.region_agg()?;
        for (level, file) in [(RegionLevel::Cbg, "cbg_sentiment.csv"), (RegionLevel::Cbsa, "cbsa_sentiment.csv")] {
            let r = aggregate_region(&labeled, &self.corpus, level, a.min_reviews, agg, opts);
            write_region_csv(&self.path(file), &r)?;
        }

        let tests = pairwise_category_tests(&pois.included, self.config.wilcoxon()?);
        let cats: Vec<PoiCategory> = PoiCategory::ALL
            .into_iter()
            .filter(|c| pois.included.iter().any(|p| p.category == *c))
            .collect();
        let lookup: BTreeMap<(PoiCategory, PoiCategory), f64> = tests
            .iter()
            .flat_map(|(x, y, r)| [((*x, *y), r.p_value), ((*y, *x), r.p_value)])
            .collect();
        let mut header = vec!["category".to_string()];
        header.extend(cats.iter().map(|c| c.to_string()));
        let matrix: Vec<Vec<String>> = cats
            .iter()
            .map(|&r| {
                let mut row = vec![r.to_string()];
                row.extend(cats.iter().map(|&c| opt_sig9(lookup.get(&(r, c)).copied())));
                row
            })
            .collect();
        let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&self.path("wilcoxon.csv"), &header_ref, &matrix)?;
        let pairs: Vec<Vec<String>> = tests
            .iter()
            .map(|(x, y, r)| {
                vec![
                    x.to_string(),
                    y.to_string(),
                    r.n_a.to_string(),
                    r.n_b.to_string(),
                    sig9(r.u),
                    sig9(r.p_value),
                    format!("{:?}", r.method).to_lowercase(),
                ]
            })
            .collect();
        write_csv(
            &self.path("wilcoxon_pairs.csv"),
            &["category_a", "category_b", "n_a", "n_b", "u", "p_value", "method"],
            &pairs,
        )?;

        let cbsa = aggregate_region(&labeled, &self.corpus, RegionLevel::Cbsa, a.min_reviews, agg, opts);
        let ranking = rank_regions(&cbsa.regions, a.top_k, a.rank_min_cbgs);
        let mut rank_rows = Vec::new();
        for (side, list) in [("top", &ranking.top), ("bottom", &ranking.bottom)] {
            for (i, r) in list.iter().enumerate() {
                rank_rows.push(vec![
                    side.to_string(),
                    (i + 1).to_string(),
                    r.region_id.clone(),
                    sig9(r.mean_sentiment),
                    r.n_reviews.to_string(),
                    r.n_cbgs.to_string(),
                ]);
            }
        }
        write_csv(
            &self.path("rankings.csv"),
            &["side", "rank", "cbsa_id", "mean_sentiment", "n_reviews", "n_cbgs"],
            &rank_rows,
        )?;
        Ok([
            "poi_sentiment.csv",
            "cbg_sentiment.csv",
            "cbsa_sentiment.csv",
            "wilcoxon.csv",
            "wilcoxon_pairs.csv",
            "rankings.csv",
        ]
        .map(String::from)
        .to_vec())
    }

    // ---- spatial ----

    pub(crate) fn spatial_inputs(&self) -> Result<String> {
        let mut h = InputHasher::new("spatial");
        self.upstream(&mut h, LABELS)?;
        self.corpus_hash(&mut h)?;
        h.json("aggregate", &self.config.aggregate)?
            .json("config", &self.config.spatial)?
            .json("seed", &self.config.seed)?;
        if let WeightsSpec::Adjacency(p) = self.config.weights()? {
            h.file("adjacency", &p)?;
        }
        Ok(h.finish())
    }

    pub(crate) fn run_spatial(&self) -> Result<Vec<String>> {
        let s = &self.config.spatial;
        let level = self.config.spatial_level()?;
        let labeled = self.labels()?;
        let regions = aggregate_region(
            &labeled,
            &self.corpus,
            level,
            self.config.aggregate.min_reviews,
            self.config.region_agg()?,
            self.score_options(),
        );
        let centroids = match level {
            RegionLevel::Cbg => self.corpus.cbg_centroids(),
            RegionLevel::Cbsa => self.corpus.cbsa_centroids(),
        };
        let ids: Vec<String> = regions.regions.iter().map(|r| r.region_id.clone()).collect();
        let values: Vec<f64> = regions.regions.iter().map(|r| r.mean_sentiment).collect();
        let w = match self.config.weights()? {
            WeightsSpec::Knn(k) => {
                let pts: Vec<(f64, f64)> = ids.iter().map(|id| centroids[id]).collect();
                build_knn_weights(&ids, &pts, k)?
            }
            WeightsSpec::Adjacency(p) => build_adjacency_weights(&ids, &load_edge_list(&p)?)?,
        };
        let seed = self.config.seed;
        let moran = morans_i(&values, &w, s.permutations, seed, self.exec)?;
        let local = lisa(&values, &w, s.permutations, s.alpha, seed, self.exec)?;
        let rows: Vec<Vec<String>> = local
            .iter()
            .map(|l| {
                vec![
                    l.region_id.clone(),
                    sig9(l.value),
                    sig9(l.z),
                    sig9(l.lag),
                    sig9(l.local_i),
                    opt_sig9(l.p_value),
                    l.quadrant.to_string(),
                    l.cluster.to_string(),
                ]
            })
            .collect();
        write_csv(
            &self.path("lisa.csv"),
            &["region_id", "value", "z", "lag", "local_i", "p_value", "quadrant", "cluster"],
            &rows,
        )?;
        #[derive(Serialize)]
        struct Summary<'a> {
            level: RegionLevel,
            weights: &'a str,
            alpha: f64,
            #[serde(flatten)]
            moran: &'a crate::spatial::MoranResult,
        }
        write_json(
            &self.path("moran.json"),
            &Summary {
                level,
                weights: &s.weights,
                alpha: s.alpha,
                moran: &moran,
            },
        )?;
        Ok(vec!["lisa.csv".into(), "moran.json".into()])
    }

    // ---- regress ----

    pub(crate) fn regress_inputs(&self) -> Result<String> {
        let mut h = InputHasher::new("regress");
        self.upstream(&mut h, LABELS)?;
        self.corpus_hash(&mut h)?;
        h.json("aggregate", &self.config.aggregate)?
            .json("config", &self.config.regress)?
            .json("sweep", &self.config.sweep)?;
        Ok(h.finish())
    }

    /// Candidate covariates: the configured list, or every in-model
    /// variable the covariate table carries.
    pub fn candidate_variables(&self) -> Result<Vec<String>> {
        let present = &self.corpus.covariates.variables;
        match &self.config.regress.variables {
            Some(v) => {
                for name in v {
                    if !present.contains(name) {
                        return Err(Error::Config(format!("regress.variables: `{name}` is not in the covariate table")));
                    }
                }
                Ok(v.clone())
            }
            None => Ok(in_model_variables()
                .filter(|v| present.iter().any(|p| p == v))
                .map(String::from)
                .collect()),
        }
    }

    fn region_table(&self, labeled: &[LabeledSentence], min_reviews: usize, vars: &[&str], modal: bool) -> Result<CbgTable> {
        let r = aggregate_region(
            labeled,
            &self.corpus,
            RegionLevel::Cbg,
            min_reviews,
            self.config.region_agg()?,
            self.score_options(),
        );
        let m = modal.then(|| modal_categories(labeled, &self.corpus, self.score_options()));
        build_cbg_table(&self.corpus, &r.regions, vars, m.as_ref())
    }

    pub(crate) fn run_regress(&self) -> Result<Vec<String>> {
        let rc = &self.config.regress;
        let labeled = self.labels()?;
        let vars_owned = self.candidate_variables()?;
        let vars: Vec<&str> = vars_owned.iter().map(String::as_str).collect();
        let min_reviews = self.config.aggregate.min_reviews;
        let table = self.region_table(&labeled, min_reviews, &vars, true)?;

        let within = within_cbsa_correlations(&table, &vars, rc.min_cbgs_within)?;
        write_csv(
            &self.path("correlations_within.csv"),
            &["cbsa_id", "factor", "r", "p_value", "n"],
            &within
                .per_cbsa
                .iter()
                .map(|g| vec![g.cbsa_id.clone(), g.factor.clone(), sig9(g.r), sig9(g.p), g.n.to_string()])
                .collect::<Vec<_>>(),
        )?;
        write_csv(
            &self.path("correlations_within_summary.csv"),
            &["factor", "n_cbsas", "mean_r", "median_r", "pooled_r", "frac_p_below_0.001", "skipped_cbsas"],
            &within
                .summary
                .iter()
                .map(|s| {
                    vec![
                        s.factor.clone(),
                        s.n_cbsas.to_string(),
                        opt_sig9(s.mean_r),
                        opt_sig9(s.median_r),
                        opt_sig9(s.pooled_r),
                        opt_sig9(s.frac_significant),
                        within.skipped_cbsas.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;

        let mut between = Vec::new();
        let all_cbgs = self.region_table(&labeled, 0, &vars, false)?;
        let segments: Vec<(String, Vec<LabeledSentence>)> = std::iter::once(("all".to_string(), labeled.clone()))
            .chain(PoiCategory::NAMED.iter().map(|&c| (c.to_string(), self.of_category(&labeled, c))))
            .collect();
        for (name, subset) in &segments {
            let cbsa = aggregate_region(
                subset,
                &self.corpus,
                RegionLevel::Cbsa,
                min_reviews,
                self.config.region_agg()?,
                self.score_options(),
            );
            let sentiment: BTreeMap<String, f64> =
                cbsa.regions.iter().map(|r| (r.region_id.clone(), r.mean_sentiment)).collect();
            let rows = cbsa_rows(&all_cbgs, &sentiment);
            between.extend(between_cbsa_correlations(&rows, &all_cbgs.variables, &vars, name)?);
        }
        write_csv(
            &self.path("correlations_between.csv"),
            &["segment", "factor", "r", "p_value", "n_cbsas"],
            &between
                .iter()
                .map(|c| vec![c.segment.clone(), c.factor.clone(), opt_sig9(c.r), opt_sig9(c.p), c.n.to_string()])
                .collect::<Vec<_>>(),
        )?;

        let reviewed: BTreeSet<String> = all_cbgs.rows.iter().map(|r| r.cbg_id.clone()).collect();
        let cohort_rows = match cohort_difference(&self.corpus.covariates, &reviewed) {
            Ok(rows) => rows
                .iter()
                .map(|c| {
                    vec![
                        c.variable.clone(),
                        sig9(c.mean_with),
                        sig9(c.mean_without),
                        opt_sig9(c.relative_difference),
                        sig9(c.absolute_difference),
                        b(c.relative_difference.is_none()),
                        sig9(c.p_value),
                    ]
                })
                .collect(),
            Err(e) => {
                log::warn!("cohort comparison skipped: {e}");
                Vec::new()
            }
        };
        write_csv(
            &self.path("cohort.csv"),
            &["variable", "mean_with", "mean_without", "relative_difference", "absolute_difference", "absolute_only", "p_value"],
            &cohort_rows,
        )?;

        let mut specs: Vec<(String, Option<PoiCategory>)> = vec![("All".into(), None)];
        specs.extend(PoiCategory::NAMED.iter().map(|&c| (c.to_string(), Some(c))));
        let fits: Vec<ModelOutcome> = self.exec.map(&specs, |(name, cat)| {
            let subset = match cat {
                None => labeled.clone(),
                Some(c) => self.of_category(&labeled, *c),
            };
            match self.region_table(&subset, min_reviews, &vars, cat.is_none()) {
                Ok(t) => fit_model(name, &t, &vars, rc, cat.is_none(), self.config.direction().expect("validated")),
                Err(e) => ModelOutcome::skipped(name, 0, e.to_string()),
            }
        });
        write_table1(&self.path("table1.csv"), &fits, &vars)?;
        write_json(&self.path("gam_fits.json"), &fits)?;

        self.write_sweep(&labeled, &vars)?;
        Ok([
            "correlations_within.csv",
            "correlations_within_summary.csv",
            "correlations_between.csv",
            "cohort.csv",
            "table1.csv",
            "gam_fits.json",
            "sweep.csv",
        ]
        .map(String::from)
        .to_vec())
    }

    fn of_category(&self, labeled: &[LabeledSentence], c: PoiCategory) -> Vec<LabeledSentence> {
        labeled
            .iter()
            .filter(|s| self.corpus.poi(&s.poi_id).is_some_and(|p| p.category == c))
            .cloned()
            .collect()
    }

    /// Rewrites `sweep.csv` from the current labels without refitting the
    /// regression models. Needs the classify stage's output.
    pub fn sweep(&self) -> Result<std::path::PathBuf> {
        let labeled = self.labels()?;
        let vars_owned = self.candidate_variables()?;
        let vars: Vec<&str> = vars_owned.iter().map(String::as_str).collect();
        self.write_sweep(&labeled, &vars)?;
        Ok(self.path("sweep.csv"))
    }

    /// Threshold sweep table: one row per threshold, one r column per factor.
    pub fn write_sweep(&self, labeled: &[LabeledSentence], vars: &[&str]) -> Result<()> {
        let level = self.config.sweep_level()?;
        let agg = aggregate_region(labeled, &self.corpus, level, 0, self.config.region_agg()?, self.score_options());
        let all = self.region_table(labeled, 0, vars, false)?;
        let regions: Vec<SweepRegion> = match level {
            RegionLevel::Cbg => all
                .rows
                .iter()
                .map(|r| SweepRegion {
                    region_id: r.cbg_id.clone(),
                    n_reviews: r.n_reviews,
                    sentiment: r.sentiment,
                    factors: r.covariates.clone(),
                })
                .collect(),
            RegionLevel::Cbsa => {
                let sentiment: BTreeMap<String, f64> =
                    agg.regions.iter().map(|r| (r.region_id.clone(), r.mean_sentiment)).collect();
                cbsa_rows(&all, &sentiment)
                    .into_iter()
                    .map(|row| SweepRegion {
                        n_reviews: agg.get(&row.cbsa_id).map_or(0, |r| r.n_reviews),
                        region_id: row.cbsa_id,
                        sentiment: row.sentiment,
                        factors: row.factors,
                    })
                    .collect()
            }
        };
        let rows = sensitivity_sweep(&regions, vars.len(), self.config.sweep.max_threshold);
        let mut header = vec!["threshold", "n_regions"];
        header.extend(vars.iter().copied());
        write_csv(
            &self.path("sweep.csv"),
            &header,
            &rows
                .iter()
                .map(|r| {
                    let mut v = vec![r.threshold.to_string(), r.n_regions.to_string()];
                    v.extend(r.r.iter().map(|x| opt_sig9(*x)));
                    v
                })
                .collect::<Vec<_>>(),
        )
    }

    // ---- lsva ----

    pub(crate) fn lsva_inputs(&self) -> Result<String> {
        let mut h = InputHasher::new("lsva");
        self.upstream(&mut h, LABELS)?;
        self.upstream(&mut h, MENTIONS)?;
        self.corpus_hash(&mut h)?;
        h.json("config", &self.config.lsva)?;
        if let Some(p) = &self.config.lsva.stopwords {
            h.file("stopwords", p)?;
        }
        Ok(h.finish())
    }

    pub(crate) fn lsva_sentences(&self) -> Result<Vec<LsvaSentence>> {
        let mentions: Vec<MentionRecord> = read_jsonl(&self.path(MENTIONS))?;
        let text: HashMap<&str, &str> = mentions.iter().map(|m| (m.sentence_uid.as_str(), m.text.as_str())).collect();
        self.labels()?
            .into_iter()
            .map(|l| {
                let t = text
                    .get(l.sentence_uid.as_str())
                    .ok_or_else(|| Error::Validation(format!("label for unknown sentence `{}`", l.sentence_uid)))?;
                Ok(LsvaSentence {
                    text: t.to_string(),
                    label: l.label,
                    category: self.corpus.poi(&l.poi_id).map(|p| p.category),
                    is_urban: self.corpus.region_of(&l.poi_id).map(|a| a.is_urban),
                })
            })
            .collect()
    }

    pub(crate) fn run_lsva(&self) -> Result<Vec<String>> {
        let c = &self.config.lsva;
        let sentences = self.lsva_sentences()?;
        let stop = match &c.stopwords {
            Some(p) => Stopwords::load(p)?,
            None => Stopwords::bundled(),
        };
        let mut outputs = Vec::new();
        for subset in self.config.subsets()? {
            let n = sentences.iter().filter(|s| subset.contains(s)).count();
            let min = if c.scale_min_count {
                scaled_min_count(c.min_count, n, sentences.len())
            } else {
                c.min_count
            };
            let table = compute_lsva(&sentences, subset, min, &stop, self.exec)?;
            let file = lsva_file_name(subset);
            write_lsva_csv(&self.path(&file), &table)?;
            outputs.push(file);
        }
        Ok(outputs)
    }
}

pub fn lsva_file_name(subset: Subset) -> String {
    format!("lsva_{}.csv", subset.to_string().replace(':', "_"))
}

pub fn write_lsva_csv(path: &Path, table: &[crate::lsva::LsvaEntry]) -> Result<()> {
    write_csv(
        path,
        &["term", "N_total", "N_positive", "N_negative", "salience", "valence"],
        &table
            .iter()
            .map(|e| {
                vec![
                    e.term.clone(),
                    e.n_total.to_string(),
                    e.n_positive.to_string(),
                    e.n_negative.to_string(),
                    sig9(e.salience),
                    sig9(e.valence),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

fn write_region_csv(path: &Path, r: &RegionAggregation) -> Result<()> {
    let row = |x: &RegionSentiment, inc: bool| {
        vec![
            x.region_id.clone(),
            x.n_reviews.to_string(),
            x.n_pois.to_string(),
            x.n_cbgs.to_string(),
            sig9(x.mean_sentiment),
            sig9(x.min_score),
            sig9(x.max_score),
            b(inc),
        ]
    };
    let mut rows: Vec<Vec<String>> = r
        .regions
        .iter()
        .map(|x| row(x, true))
        .chain(r.excluded.iter().map(|x| row(x, false)))
        .collect();
    rows.sort();
    write_csv(
        path,
        &["region_id", "n_reviews", "n_pois", "n_cbgs", "mean_sentiment", "min_score", "max_score", "included"],
        &rows,
    )
}

/// Result of the grid search and final fit for a trainable kind.
pub struct TrainOutcome {
    pub classifier: TextClassifier,
    pub cv: crate::classify::CvReport,
    pub best: Params,
    pub test_metrics: Option<MetricsReport>,
}

impl TrainOutcome {
    pub const FILES: [&'static str; 3] = ["model.json", "cv_report.csv", "training.json"];

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json_exact(&dir.join("model.json"), &self.classifier)?;
        let k = self.cv.folds.k;
        let mut header: Vec<String> = vec!["params".into(), "mean_accuracy".into()];
        header.extend((0..k).map(|f| format!("fold_{}", f + 1)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = self
            .cv
            .points
            .iter()
            .map(|p| {
                let mut r = vec![p.params.to_string(), sig9(p.mean_accuracy)];
                r.extend(p.fold_accuracy.iter().map(|a| sig9(*a)));
                r
            })
            .collect();
        write_csv(&dir.join("cv_report.csv"), &header, &rows)?;
        #[derive(Serialize)]
        struct Training<'a> {
            kind: ModelKind,
            folds: usize,
            relaxed_classes: &'a [crate::classify::AttitudeLabel],
            best_params: String,
            best_mean_accuracy: f64,
            test_metrics: &'a Option<MetricsReport>,
        }
        write_json(
            &dir.join("training.json"),
            &Training {
                kind: self.cv.kind,
                folds: k,
                relaxed_classes: &self.cv.folds.relaxed,
                best_params: self.best.to_string(),
                best_mean_accuracy: self.cv.best_point().mean_accuracy,
                test_metrics: &self.test_metrics,
            },
        )
    }
}

/// Grid search on the train split, refit of the winner on the whole train
/// split, and evaluation on the test split when present.
pub fn train_model(
    kind: ModelKind,
    labeled: &Path,
    grid: &Path,
    folds: usize,
    tfidf: &TfidfConfig,
    seed: u64,
    exec: Exec,
) -> Result<TrainOutcome> {
    let examples = load_labeled(labeled)?;
    let (train, test): (Vec<_>, Vec<_>) = examples.into_iter().partition(|e| e.split == Split::Train);
    let texts: Vec<&str> = train.iter().map(|e| e.text.as_str()).collect();
    let labels: Vec<_> = train.iter().map(|e| e.label).collect();
    let points = Grid::load(grid)?.points();
    let cv = cross_validate(kind, &points, &texts, &labels, folds, tfidf, seed, exec)?;
    let best = cv.best_point().params.clone();
    let classifier = TextClassifier::fit(kind, &texts, &labels, tfidf, &best, seed)?;
    let test_metrics = if test.is_empty() {
        None
    } else {
        Some(classifier.evaluate(&test, exec)?)
    };
    Ok(TrainOutcome {
        classifier,
        cv,
        best,
        test_metrics,
    })
}

/// One regression model: VIF screen, stepwise selection, then the GAM.
#[derive(Clone, Debug, Serialize)]
pub struct ModelOutcome {
    pub model: String,
    pub n_rows: usize,
    pub status: String,
    pub constant_dropped: Vec<String>,
    pub vif: Option<VifReport>,
    pub stepwise: Option<StepwiseResult>,
    pub fit: Option<GamFit>,
}

impl ModelOutcome {
    fn skipped(name: &str, n_rows: usize, reason: String) -> ModelOutcome {
        ModelOutcome {
            model: name.to_string(),
            n_rows,
            status: format!("skipped: {reason}"),
            constant_dropped: vec![],
            vif: None,
            stepwise: None,
            fit: None,
        }
    }
}

fn fit_model(
    name: &str,
    table: &CbgTable,
    vars: &[&str],
    rc: &super::RegressConfig,
    category_controls: bool,
    direction: crate::regress::Direction,
) -> ModelOutcome {
    let n = table.len();
    let mut out = ModelOutcome::skipped(name, n, String::new());
    let run = |out: &mut ModelOutcome| -> Result<()> {
        let mut usable = Vec::new();
        let mut cols = Vec::new();
        for &v in vars {
            let c = table.column(v)?;
            if c.iter().all(|x| *x == c[0]) {
                out.constant_dropped.push(v.to_string());
            } else {
                usable.push(v.to_string());
                cols.push(c);
            }
        }
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        if n < usable.len() + 3 {
            return Err(Error::InvalidInput(format!("{n} CBGs is too few for {} candidate variables", usable.len())));
        }
        let vif = vif_filter(&refs, &usable, rc.vif_threshold)?;
        let kept: Vec<&[f64]> = vif
            .kept
            .iter()
            .map(|k| refs[usable.iter().position(|u| u == k).expect("kept is a subset")])
            .collect();
        let step = stepwise_aic(&table.response(), &kept, &vif.kept, direction)?;
        out.vif = Some(vif);
        let selected: Vec<&str> = step.selected.iter().map(String::as_str).collect();
        let design = build_design(
            table,
            &selected,
            DesignOptions {
                knots: rc.knots,
                spatial: true,
                group: true,
                category_controls,
            },
        )?;
        out.stepwise = Some(step);
        if design.n() <= design.n_linear() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} CBGs leaves no residual degrees of freedom for {} linear terms",
                design.n(),
                design.n_linear()
            )));
        }
        out.fit = Some(fit_gam(&design, rc.max_sweeps)?);
        Ok(())
    };
    match run(&mut out) {
        Ok(()) => {
            let converged = out.fit.as_ref().is_some_and(|f| f.converged);
            out.status = if converged { "ok".into() } else { "ok (smoothing search hit the sweep cap)".into() };
        }
        Err(e) => out.status = format!("skipped: {e}"),
    }
    out
}

fn write_table1(path: &Path, fits: &[ModelOutcome], vars: &[&str]) -> Result<()> {
    let mut terms: Vec<String> = vec!["(Intercept)".into()];
    terms.extend(vars.iter().map(|v| v.to_string()));
    for f in fits.iter().filter_map(|m| m.fit.as_ref()) {
        for c in &f.coefficients {
            if !terms.contains(&c.name) {
                terms.push(c.name.clone());
            }
        }
    }
    let mut header = vec!["term".to_string()];
    for m in fits {
        header.push(m.model.clone());
        header.push(format!("{} sig", m.model));
    }
    let mut rows: Vec<Vec<String>> = terms
        .iter()
        .map(|t| {
            let mut row = vec![t.clone()];
            for m in fits {
                match m.fit.as_ref().and_then(|f| f.coefficients.iter().find(|c| &c.name == t)) {
                    Some(c) => {
                        row.push(sig9(c.estimate));
                        row.push(c.stars.to_string());
                    }
                    None => row.extend([String::new(), String::new()]),
                }
            }
            row
        })
        .collect();
    for smooth in ["ti(lat,lng)", "s(CBSA)"] {
        let mut row = vec![format!("{smooth} edf")];
        for m in fits {
            let edf = m.fit.as_ref().and_then(|f| f.smooths.iter().find(|s| s.name == smooth)).map(|s| s.edf);
            row.push(opt_sig9(edf));
            row.push(String::new());
        }
        rows.push(row);
    }
    let mut r2 = vec!["R2 (adjusted)".to_string()];
    let mut n = vec!["N".to_string()];
    let mut status = vec!["status".to_string()];
    for m in fits {
        r2.push(opt_sig9(m.fit.as_ref().map(|f| f.adj_r_squared)));
        r2.push(String::new());
        n.push(m.n_rows.to_string());
        n.push(String::new());
        status.push(m.status.clone());
        status.push(String::new());
    }
    rows.extend([r2, n, status]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &header, &rows)
}
