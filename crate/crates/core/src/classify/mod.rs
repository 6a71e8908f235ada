//! Four-class attitude classification of parking sentences.
//!
//! Text is vectorized with [`TfidfModel`]; the trainable kinds are
//! one-vs-rest logistic regression, hinge-loss SGD and a CART forest. The
//! lexicon kind sums term valences and the external kind reads labels that
//! were produced elsewhere (e.g. by a transformer) from a sidecar file.

mod agreement;
mod cv;
mod external;
mod forest;
mod grid;
mod lexicon;
mod logistic;
mod metrics;
mod sgd;
mod tfidf;

pub use agreement::{krippendorff_alpha, AgreementReport};
pub use cv::{cross_validate, stratified_folds, CvPoint, CvReport, Folds};
pub use external::{read_sidecar, write_sidecar, ExternalLabels, SidecarRecord};
pub use forest::{Forest, ForestParams, Tree};
pub use grid::{Grid, ParamValue, Params};
pub use lexicon::Lexicon;
pub use logistic::{LogisticParams, Solver};
pub use metrics::{evaluate_labels, ClassMetrics, MetricsReport};
pub use sgd::{Penalty, SgdParams};
pub use tfidf::{analyze, SparseVec, TfidfConfig, TfidfModel};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttitudeLabel {
    Positive,
    Neutral,
    Negative,
    Unrelated,
}

impl AttitudeLabel {
    pub const ALL: [AttitudeLabel; 4] = [
        AttitudeLabel::Positive,
        AttitudeLabel::Neutral,
        AttitudeLabel::Negative,
        AttitudeLabel::Unrelated,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> AttitudeLabel {
        AttitudeLabel::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttitudeLabel::Positive => "positive",
            AttitudeLabel::Neutral => "neutral",
            AttitudeLabel::Negative => "negative",
            AttitudeLabel::Unrelated => "unrelated",
        }
    }
}

impl fmt::Display for AttitudeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttitudeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "positive" => Ok(AttitudeLabel::Positive),
            "neutral" => Ok(AttitudeLabel::Neutral),
            "negative" => Ok(AttitudeLabel::Negative),
            "unrelated" => Ok(AttitudeLabel::Unrelated),
            other => Err(Error::InvalidInput(format!("unknown attitude label `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub text: String,
    pub label: AttitudeLabel,
    pub split: Split,
}

/// Reads `text,label,split` rows.
pub fn load_labeled(path: &Path) -> Result<Vec<LabeledExample>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, 0, format!("{other:?}")),
    })?;
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<LabeledExample>().enumerate() {
        let line = i + 2;
        let ex = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if ex.text.trim().is_empty() {
            return Err(Error::parse(path, line, "empty text"));
        }
        out.push(ex);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logistic,
    Sgd,
    Forest,
    Lexicon,
    External,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Sgd => "sgd",
            ModelKind::Forest => "forest",
            ModelKind::Lexicon => "lexicon",
            ModelKind::External => "external",
        }
    }

    pub fn is_trainable(self) -> bool {
        matches!(self, ModelKind::Logistic | ModelKind::Sgd | ModelKind::Forest)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            "sgd" => Ok(ModelKind::Sgd),
            "forest" | "rf" => Ok(ModelKind::Forest),
            "lexicon" => Ok(ModelKind::Lexicon),
            "external" => Ok(ModelKind::External),
            other => Err(Error::InvalidInput(format!("unknown model kind `{other}`"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One-vs-rest linear scorer: `weights[c]` has `dim` feature weights, and
/// `intercepts[c]` the bias of class `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

impl LinearModel {
    pub fn decision(&self, x: &SparseVec) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.intercepts[c] + x.iter().map(|&(j, v)| self.weights[c][j] * v).sum::<f64>();
        }
        out
    }

    pub fn predict_one(&self, x: &SparseVec) -> AttitudeLabel {
        AttitudeLabel::from_index(argmax(&self.decision(x)))
    }
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierModel {
    Logistic(LinearModel),
    Sgd(LinearModel),
    Forest(Forest),
    Lexicon(Lexicon),
    External(ExternalLabels),
}

impl ClassifierModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            ClassifierModel::Logistic(_) => ModelKind::Logistic,
            ClassifierModel::Sgd(_) => ModelKind::Sgd,
            ClassifierModel::Forest(_) => ModelKind::Forest,
            ClassifierModel::Lexicon(_) => ModelKind::Lexicon,
            ClassifierModel::External(_) => ModelKind::External,
        }
    }

    /// Prediction from a feature vector; only meaningful for trained kinds.
    pub fn predict_features(&self, x: &SparseVec) -> Option<AttitudeLabel> {
        match self {
            ClassifierModel::Logistic(m) | ClassifierModel::Sgd(m) => Some(m.predict_one(x)),
            ClassifierModel::Forest(f) => Some(f.predict_one(x)),
            _ => None,
        }
    }
}

fn check_classes(labels: &[AttitudeLabel]) -> Result<()> {
    for c in AttitudeLabel::ALL {
        if !labels.contains(&c) {
            return Err(Error::MissingClass(c.to_string()));
        }
    }
    Ok(())
}

/// Fits a trainable kind on aligned feature rows and labels.
pub fn train_classifier(
    kind: ModelKind,
    features: &[SparseVec],
    dim: usize,
    labels: &[AttitudeLabel],
    params: &Params,
    seed: u64,
) -> Result<ClassifierModel> {
    if features.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    check_classes(labels)?;
    match kind {
        ModelKind::Logistic => {
            let p = LogisticParams::from_params(params)?;
            Ok(ClassifierModel::Logistic(logistic::train(features, dim, labels, &p)))
        }
        ModelKind::Sgd => {
            let p = SgdParams::from_params(params)?;
            Ok(ClassifierModel::Sgd(sgd::train(features, dim, labels, &p, seed)))
        }
        ModelKind::Forest => {
            let p = ForestParams::from_params(params)?;
            Ok(ClassifierModel::Forest(forest::train(features, dim, labels, &p, seed)))
        }
        ModelKind::Lexicon | ModelKind::External => Err(Error::InvalidInput(format!(
            "the {kind} kind is not trained; load it from its lexicon or sidecar file"
        ))),
    }
}

/// A sentence to label: its stable id and text.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceRef<'a> {
    pub uid: &'a str,
    pub text: &'a str,
}

/// Vectorizer plus classifier, applied to raw sentence text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextClassifier {
    pub tfidf: Option<TfidfModel>,
    pub model: ClassifierModel,
}

impl TextClassifier {
    /// Fits TF-IDF on `texts`, then the classifier on the transformed rows.
    pub fn fit(
        kind: ModelKind,
        texts: &[&str],
        labels: &[AttitudeLabel],
        tfidf: &TfidfConfig,
        params: &Params,
        seed: u64,
    ) -> Result<TextClassifier> {
        let vec = TfidfModel::fit(texts, tfidf)?;
        let x: Vec<SparseVec> = texts.iter().map(|t| vec.transform(t)).collect();
        let model = train_classifier(kind, &x, vec.dim(), labels, params, seed)?;
        Ok(TextClassifier {
            tfidf: Some(vec),
            model,
        })
    }

    pub fn rule_based(model: ClassifierModel) -> TextClassifier {
        TextClassifier { tfidf: None, model }
    }

    /// One label per sentence, in input order.
    pub fn predict(&self, sentences: &[SentenceRef<'_>], exec: Exec) -> Result<Vec<AttitudeLabel>> {
        match (&self.model, &self.tfidf) {
            (ClassifierModel::Lexicon(lex), _) => Ok(exec.map(sentences, |s| lex.classify(s.text))),
            (ClassifierModel::External(ext), _) => ext.lookup(sentences.iter().map(|s| s.uid)),
            (model, Some(vec)) => Ok(exec.map(sentences, |s| {
                model
                    .predict_features(&vec.transform(s.text))
                    .expect("trained kind")
            })),
            (model, None) => Err(Error::InvalidInput(format!(
                "{} model has no vectorizer",
                model.kind()
            ))),
        }
    }

    pub fn predict_texts(&self, texts: &[&str], exec: Exec) -> Result<Vec<AttitudeLabel>> {
        let uids: Vec<String> = (0..texts.len()).map(|i| i.to_string()).collect();
        let refs: Vec<SentenceRef<'_>> = texts
            .iter()
            .zip(&uids)
            .map(|(t, u)| SentenceRef { uid: u, text: t })
            .collect();
        self.predict(&refs, exec)
    }

    pub fn evaluate(&self, examples: &[LabeledExample], exec: Exec) -> Result<MetricsReport> {
        let texts: Vec<&str> = examples.iter().map(|e| e.text.as_str()).collect();
        let predicted = self.predict_texts(&texts, exec)?;
        let truth: Vec<AttitudeLabel> = examples.iter().map(|e| e.label).collect();
        evaluate_labels(&truth, &predicted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_parse_and_order() {
        for l in AttitudeLabel::ALL {
            assert_eq!(l.as_str().parse::<AttitudeLabel>().unwrap(), l);
            assert_eq!(AttitudeLabel::from_index(l.index()), l);
        }
        assert!("mixed".parse::<AttitudeLabel>().is_err());
    }

    #[test]
    fn missing_class_is_named() {
        let x = vec![vec![(0, 1.0)], vec![(0, -1.0)]];
        let y = vec![AttitudeLabel::Positive, AttitudeLabel::Negative];
        let err = train_classifier(ModelKind::Logistic, &x, 1, &y, &Params::new(), 0).unwrap_err();
        assert!(matches!(err, Error::MissingClass(ref c) if c == "neutral"));
    }

    #[test]
    fn argmax_prefers_first_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 0.0]), 1);
    }
}
