//! Input tables: reviews (JSON-Lines), POIs, region assignments and CBG
//! covariates (CSV), plus the joined in-memory corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub poi_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PoiCategory {
    Restaurant,
    RetailTrade,
    Recreation,
    PersonalService,
    Apartment,
    Hotel,
    Other,
}

impl PoiCategory {
    pub const ALL: [PoiCategory; 7] = [
        PoiCategory::Restaurant,
        PoiCategory::RetailTrade,
        PoiCategory::Recreation,
        PoiCategory::PersonalService,
        PoiCategory::Apartment,
        PoiCategory::Hotel,
        PoiCategory::Other,
    ];

    /// The six named POI types that get their own models and tables.
    pub const NAMED: [PoiCategory; 6] = [
        PoiCategory::Restaurant,
        PoiCategory::RetailTrade,
        PoiCategory::Recreation,
        PoiCategory::PersonalService,
        PoiCategory::Apartment,
        PoiCategory::Hotel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PoiCategory::Restaurant => "Restaurant",
            PoiCategory::RetailTrade => "RetailTrade",
            PoiCategory::Recreation => "Recreation",
            PoiCategory::PersonalService => "PersonalService",
            PoiCategory::Apartment => "Apartment",
            PoiCategory::Hotel => "Hotel",
            PoiCategory::Other => "Other",
        }
    }

    /// Case-, space- and underscore-insensitive match; `None` for anything
    /// outside the closed enumeration.
    pub fn parse(raw: &str) -> Option<PoiCategory> {
        let key: String = raw
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        Some(match key.as_str() {
            "restaurant" => PoiCategory::Restaurant,
            "retailtrade" | "retail" => PoiCategory::RetailTrade,
            "recreation" => PoiCategory::Recreation,
            "personalservice" => PoiCategory::PersonalService,
            "apartment" => PoiCategory::Apartment,
            "hotel" => PoiCategory::Hotel,
            "other" => PoiCategory::Other,
            _ => return None,
        })
    }
}

impl fmt::Display for PoiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poi {
    pub poi_id: String,
    pub name: String,
    pub category: PoiCategory,
    pub lat: f64,
    pub lng: f64,
    pub avg_score: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct PoiTable {
    pub pois: Vec<Poi>,
    /// Records whose category string fell back to `Other`.
    pub unknown_category_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionAssignment {
    pub poi_id: String,
    pub cbg_id: String,
    pub cbsa_id: String,
    pub is_urban: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RegionTable {
    pub assignments: Vec<RegionAssignment>,
    by_poi: HashMap<String, usize>,
}

impl RegionTable {
    pub fn new(assignments: Vec<RegionAssignment>) -> Result<Self> {
        let mut by_poi = HashMap::with_capacity(assignments.len());
        let mut cbsa_of: HashMap<&str, &str> = HashMap::new();
        for (i, a) in assignments.iter().enumerate() {
            if by_poi.insert(a.poi_id.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "poi `{}` has more than one region assignment",
                    a.poi_id
                )));
            }
            match cbsa_of.get(a.cbg_id.as_str()) {
                Some(prev) if *prev != a.cbsa_id => {
                    return Err(Error::Validation(format!(
                        "cbg `{}` maps to two cbsas (`{}` and `{}`)",
                        a.cbg_id, prev, a.cbsa_id
                    )))
                }
                _ => {
                    cbsa_of.insert(&a.cbg_id, &a.cbsa_id);
                }
            }
        }
        Ok(RegionTable {
            assignments,
            by_poi,
        })
    }

    pub fn get(&self, poi_id: &str) -> Option<&RegionAssignment> {
        self.by_poi.get(poi_id).map(|&i| &self.assignments[i])
    }

    /// POIs with no assignment; they stay usable for POI-level analyses only.
    pub fn unassigned<'a>(&self, pois: &'a [Poi]) -> Vec<&'a str> {
        pois.iter()
            .filter(|p| !self.by_poi.contains_key(&p.poi_id))
            .map(|p| p.poi_id.as_str())
            .collect()
    }

    pub fn cbsa_of_cbg(&self) -> BTreeMap<&str, &str> {
        self.assignments
            .iter()
            .map(|a| (a.cbg_id.as_str(), a.cbsa_id.as_str()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovariateRow {
    pub cbg_id: String,
    /// Aligned with `CovariateTable::variables`.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RejectedRow {
    pub line: usize,
    pub cbg_id: String,
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CovariateTable {
    pub variables: Vec<String>,
    pub rows: Vec<CovariateRow>,
    pub rejected: Vec<RejectedRow>,
    /// Per-variable mean and sample standard deviation over all accepted rows.
    pub stats: Vec<ColumnStats>,
}

impl CovariateTable {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn row(&self, cbg_id: &str) -> Option<&CovariateRow> {
        self.rows.iter().find(|r| r.cbg_id == cbg_id)
    }

    pub fn index(&self) -> HashMap<&str, &CovariateRow> {
        self.rows.iter().map(|r| (r.cbg_id.as_str(), r)).collect()
    }

    /// Mean and sample standard deviation per variable over the given CBGs
    /// (the analysis subset used for standardization).
    pub fn stats_over(&self, cbg_ids: &[&str]) -> Vec<ColumnStats> {
        let idx = self.index();
        let rows: Vec<&CovariateRow> = cbg_ids.iter().filter_map(|id| idx.get(id).copied()).collect();
        column_stats(&self.variables, &rows)
    }

    /// Known covariates present in this table's header.
    pub fn recognized_variables(&self) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| KNOWN_VARIABLES.iter().any(|k| k.name == v.as_str()))
            .map(String::as_str)
            .collect()
    }
}

fn column_stats(variables: &[String], rows: &[&CovariateRow]) -> Vec<ColumnStats> {
    (0..variables.len())
        .map(|j| {
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r.values[j]).sum::<f64>() / n;
            let ss: f64 = rows.iter().map(|r| (r.values[j] - mean).powi(2)).sum();
            let std = if rows.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
            ColumnStats { mean, std }
        })
        .collect()
}

/// A CBG-level socio-spatial variable. `in_model` is false for variables
/// screened out for collinearity or weak explanatory power.
#[derive(Clone, Copy, Debug)]
pub struct KnownVariable {
    pub name: &'static str,
    pub group: &'static str,
    pub in_model: bool,
}

const fn var(name: &'static str, group: &'static str, in_model: bool) -> KnownVariable {
    KnownVariable {
        name,
        group,
        in_model,
    }
}

pub const KNOWN_VARIABLES: [KnownVariable; 26] = [
    var("Population Density", "Socioeconomics", true),
    var("Employment Density", "Socioeconomics", true),
    var("Poverty", "Socioeconomics", true),
    var("Rural Population", "Socioeconomics", true),
    var("Urban Population", "Socioeconomics", false),
    var("Median Income", "Socioeconomics", false),
    var("Highly-Educated", "Socioeconomics", true),
    var("Democrat", "Socioeconomics", false),
    var("Zero Car", "Socioeconomics", true),
    var("One Car", "Socioeconomics", false),
    var(">=2 Cars", "Socioeconomics", false),
    var("Male", "Demographics", true),
    var("Age 18-44", "Demographics", true),
    var("Age 45-64", "Demographics", true),
    var("Age over 65", "Demographics", true),
    var("White", "Demographics", false),
    var("Asian", "Demographics", true),
    var("African American", "Demographics", true),
    var("Hispanic", "Demographics", true),
    var("Others", "Demographics", true),
    var("POI Density", "Land development", false),
    var("Road Density", "Land development", true),
    var("Parking POI Density", "Land development", true),
    var("Walkability", "Land development", true),
    var("Transit Frequency", "Land development", true),
    var("Avg. POI Score", "Land development", true),
];

pub fn in_model_variables() -> impl Iterator<Item = &'static str> {
    KNOWN_VARIABLES.iter().filter(|v| v.in_model).map(|v| v.name)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReview {
    review_id: String,
    poi_id: String,
    text: String,
    #[serde(default)]
    rating: Option<i64>,
    #[serde(default)]
    timestamp: Option<String>,
}

pub fn load_reviews(path: &Path) -> Result<Vec<Review>> {
    let reader = BufReader::new(open(path)?);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let raw: RawReview =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if raw.text.trim().is_empty() {
            return Err(Error::Validation(format!(
                "{}:{lineno}: review `{}` has empty text",
                path.display(),
                raw.review_id
            )));
        }
        let rating = match raw.rating {
            None => None,
            Some(r @ 1..=5) => Some(r as u8),
            Some(r) => {
                return Err(Error::Validation(format!(
                    "{}:{lineno}: rating {r} outside 1..=5",
                    path.display()
                )))
            }
        };
        if !seen.insert(raw.review_id.clone()) {
            return Err(Error::Validation(format!(
                "{}:{lineno}: duplicate review_id `{}`",
                path.display(),
                raw.review_id
            )));
        }
        out.push(Review {
            review_id: raw.review_id,
            poi_id: raw.poi_id,
            text: raw.text,
            rating,
            timestamp: raw.timestamp,
        });
    }
    Ok(out)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn header_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::parse(path, 1, format!("missing column `{name}`")))
}

fn parse_f64(s: &str, what: &str, path: &Path, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(path, line, format!("{what}: `{s}` is not a finite number")))
}

pub fn load_pois(path: &Path) -> Result<PoiTable> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let c_id = header_index(&headers, "poi_id", path)?;
    let c_name = header_index(&headers, "name", path)?;
    let c_cat = header_index(&headers, "category", path)?;
    let c_lat = header_index(&headers, "lat", path)?;
    let c_lng = header_index(&headers, "lng", path)?;
    let c_score = headers.iter().position(|h| h == "avg_score");

    let mut table = PoiTable::default();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let poi_id = rec[c_id].to_string();
        let lat = parse_f64(&rec[c_lat], "lat", path, line)?;
        let lng = parse_f64(&rec[c_lng], "lng", path, line)?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lng) {
            return Err(Error::Validation(format!(
                "{}:{line}: poi `{poi_id}` coordinates ({lat}, {lng}) out of range",
                path.display()
            )));
        }
        let category = PoiCategory::parse(&rec[c_cat]).unwrap_or_else(|| {
            table.unknown_category_count += 1;
            PoiCategory::Other
        });
        let avg_score = match c_score.map(|c| &rec[c]) {
            None | Some("") => None,
            Some(s) => {
                let v = parse_f64(s, "avg_score", path, line)?;
                if !(1.0..=5.0).contains(&v) {
                    return Err(Error::Validation(format!(
                        "{}:{line}: avg_score {v} outside [1, 5]",
                        path.display()
                    )));
                }
                Some(v)
            }
        };
        if !seen.insert(poi_id.clone()) {
            return Err(Error::Validation(format!(
                "{}:{line}: duplicate poi_id `{poi_id}`",
                path.display()
            )));
        }
        table.pois.push(Poi {
            poi_id,
            name: rec[c_name].to_string(),
            category,
            lat,
            lng,
            avg_score,
        });
    }
    if table.unknown_category_count > 0 {
        log::warn!(
            "{}: {} POI(s) with unrecognized category mapped to Other",
            path.display(),
            table.unknown_category_count
        );
    }
    Ok(table)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "urban" => Some(true),
        "false" | "0" | "no" | "rural" => Some(false),
        _ => None,
    }
}

pub fn load_region_assignments(path: &Path) -> Result<RegionTable> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let c_poi = header_index(&headers, "poi_id", path)?;
    let c_cbg = header_index(&headers, "cbg_id", path)?;
    let c_cbsa = header_index(&headers, "cbsa_id", path)?;
    let c_urban = header_index(&headers, "is_urban", path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let is_urban = parse_bool(&rec[c_urban])
            .ok_or_else(|| Error::parse(path, line, format!("is_urban: `{}`", &rec[c_urban])))?;
        rows.push(RegionAssignment {
            poi_id: rec[c_poi].to_string(),
            cbg_id: rec[c_cbg].to_string(),
            cbsa_id: rec[c_cbsa].to_string(),
            is_urban,
        });
    }
    RegionTable::new(rows)
}

pub fn load_covariates(path: &Path) -> Result<CovariateTable> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("cbg_id") {
        return Err(Error::parse(path, 1, "first column must be `cbg_id`"));
    }
    let variables: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if variables.is_empty() {
        return Err(Error::parse(path, 1, "no variable columns"));
    }
    let mut table = CovariateTable {
        variables,
        ..Default::default()
    };
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let cbg_id = rec[0].to_string();
        let mut values = Vec::with_capacity(table.variables.len());
        let mut missing = Vec::new();
        for (j, name) in table.variables.iter().enumerate() {
            match rec.get(j + 1).unwrap_or("") {
                "" | "NA" | "NaN" => missing.push(name.clone()),
                s => values.push(parse_f64(s, name, path, line)?),
            }
        }
        if !missing.is_empty() {
            table.rejected.push(RejectedRow {
                line,
                cbg_id,
                missing,
            });
            continue;
        }
        if !seen.insert(cbg_id.clone()) {
            return Err(Error::Validation(format!(
                "{}:{line}: duplicate cbg_id `{cbg_id}`",
                path.display()
            )));
        }
        table.rows.push(CovariateRow { cbg_id, values });
    }
    if !table.rejected.is_empty() {
        log::warn!(
            "{}: rejected {} covariate row(s) with missing values",
            path.display(),
            table.rejected.len()
        );
    }
    let rows: Vec<&CovariateRow> = table.rows.iter().collect();
    table.stats = column_stats(&table.variables, &rows);
    Ok(table)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorpusReport {
    pub input_reviews: usize,
    pub retained_reviews: usize,
    pub orphan_reviews: usize,
    pub orphan_review_ids: Vec<String>,
    pub pois_without_reviews: Vec<String>,
    pub unassigned_pois: Vec<String>,
    pub cbgs_without_covariates: Vec<String>,
    pub unknown_category_count: usize,
    pub rejected_covariate_rows: usize,
}

pub fn validate_corpus(
    reviews: &[Review],
    pois: &PoiTable,
    regions: &RegionTable,
    covariates: &CovariateTable,
) -> CorpusReport {
    let poi_ids: HashSet<&str> = pois.pois.iter().map(|p| p.poi_id.as_str()).collect();
    let orphan_review_ids: Vec<String> = reviews
        .iter()
        .filter(|r| !poi_ids.contains(r.poi_id.as_str()))
        .map(|r| r.review_id.clone())
        .collect();
    let reviewed: HashSet<&str> = reviews.iter().map(|r| r.poi_id.as_str()).collect();
    let pois_without_reviews = pois
        .pois
        .iter()
        .filter(|p| !reviewed.contains(p.poi_id.as_str()))
        .map(|p| p.poi_id.clone())
        .collect();
    let with_cov: HashSet<&str> = covariates.rows.iter().map(|r| r.cbg_id.as_str()).collect();
    let cbgs: BTreeSet<&str> = regions.assignments.iter().map(|a| a.cbg_id.as_str()).collect();
    let cbgs_without_covariates = cbgs
        .into_iter()
        .filter(|c| !with_cov.contains(c))
        .map(str::to_string)
        .collect();
    CorpusReport {
        input_reviews: reviews.len(),
        retained_reviews: reviews.len() - orphan_review_ids.len(),
        orphan_reviews: orphan_review_ids.len(),
        orphan_review_ids,
        pois_without_reviews,
        unassigned_pois: regions
            .unassigned(&pois.pois)
            .into_iter()
            .map(str::to_string)
            .collect(),
        cbgs_without_covariates,
        unknown_category_count: pois.unknown_category_count,
        rejected_covariate_rows: covariates.rejected.len(),
    }
}

/// The validated, joined corpus. Immutable once assembled.
#[derive(Clone, Debug)]
pub struct Corpus {
    /// Reviews whose POI is known; orphans are dropped and reported.
    pub reviews: Vec<Review>,
    pub pois: Vec<Poi>,
    pub regions: RegionTable,
    pub covariates: CovariateTable,
    poi_index: HashMap<String, usize>,
}

impl Corpus {
    pub fn assemble(
        reviews: Vec<Review>,
        pois: PoiTable,
        regions: RegionTable,
        covariates: CovariateTable,
    ) -> (Corpus, CorpusReport) {
        let report = validate_corpus(&reviews, &pois, &regions, &covariates);
        let poi_index: HashMap<String, usize> = pois
            .pois
            .iter()
            .enumerate()
            .map(|(i, p)| (p.poi_id.clone(), i))
            .collect();
        let reviews = reviews
            .into_iter()
            .filter(|r| poi_index.contains_key(&r.poi_id))
            .collect();
        (
            Corpus {
                reviews,
                pois: pois.pois,
                regions,
                covariates,
                poi_index,
            },
            report,
        )
    }

    pub fn load(
        reviews: &Path,
        pois: &Path,
        regions: &Path,
        covariates: &Path,
    ) -> Result<(Corpus, CorpusReport)> {
        let reviews = load_reviews(reviews)?;
        let pois = load_pois(pois)?;
        let regions = load_region_assignments(regions)?;
        let covariates = load_covariates(covariates)?;
        Ok(Corpus::assemble(reviews, pois, regions, covariates))
    }

    pub fn poi(&self, poi_id: &str) -> Option<&Poi> {
        self.poi_index.get(poi_id).map(|&i| &self.pois[i])
    }

    /// POI → CBG → CBSA chain, when fully resolvable.
    pub fn region_of(&self, poi_id: &str) -> Option<&RegionAssignment> {
        self.poi(poi_id)?;
        self.regions.get(poi_id)
    }

    /// Mean POI coordinates per CBG, used as region centroids.
    pub fn cbg_centroids(&self) -> BTreeMap<String, (f64, f64)> {
        let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for a in &self.regions.assignments {
            if let Some(p) = self.poi(&a.poi_id) {
                let e = acc.entry(a.cbg_id.clone()).or_insert((0.0, 0.0, 0));
                e.0 += p.lat;
                e.1 += p.lng;
                e.2 += 1;
            }
        }
        acc.into_iter()
            .map(|(k, (la, ln, n))| (k, (la / n as f64, ln / n as f64)))
            .collect()
    }

    /// Mean POI coordinates per CBSA.
    pub fn cbsa_centroids(&self) -> BTreeMap<String, (f64, f64)> {
        let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for a in &self.regions.assignments {
            if let Some(p) = self.poi(&a.poi_id) {
                let e = acc.entry(a.cbsa_id.clone()).or_insert((0.0, 0.0, 0));
                e.0 += p.lat;
                e.1 += p.lng;
                e.2 += 1;
            }
        }
        acc.into_iter()
            .map(|(k, (la, ln, n))| (k, (la / n as f64, ln / n as f64)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn reviews_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write(
            &dir,
            "r.jsonl",
            concat!(
                r#"{"review_id":"a","poi_id":"p","text":"Great food.","rating":5}"#,
                "\n",
                r#"{"review_id":"b","poi_id":"p","text":"Parking is poor."}"#,
                "\n",
                r#"{"review_id":"c","poi_id":"q","text":"ok","timestamp":"2021-01-01T00:00:00Z"}"#,
                "\n"
            ),
        );
        let rs = load_reviews(&ok).unwrap();
        assert_eq!(rs.len(), 3);
        assert_eq!(rs[0].rating, Some(5));
        assert_eq!(rs[2].timestamp.as_deref(), Some("2021-01-01T00:00:00Z"));

        let empty = write(
            &dir,
            "e.jsonl",
            concat!(
                r#"{"review_id":"a","poi_id":"p","text":"fine"}"#,
                "\n",
                r#"{"review_id":"b","poi_id":"p","text":"   "}"#,
                "\n"
            ),
        );
        let err = load_reviews(&empty).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");

        let dup = write(
            &dir,
            "d.jsonl",
            concat!(
                r#"{"review_id":"a","poi_id":"p","text":"x"}"#,
                "\n",
                r#"{"review_id":"a","poi_id":"p","text":"y"}"#,
                "\n"
            ),
        );
        assert!(matches!(load_reviews(&dup), Err(Error::Validation(_))));

        let bad = write(&dir, "b.jsonl", "{not json}\n");
        assert!(matches!(load_reviews(&bad), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn poi_categories_and_ranges() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "p.csv",
            "poi_id,name,category,lat,lng,avg_score\n\
             a,A,Restaurant,40.0,-74.0,4.5\n\
             b,B,Museum,40.0,-74.0,\n\
             c,\"C, Inc\",Retail Trade,41.0,-73.0,3.0\n",
        );
        let t = load_pois(&p).unwrap();
        assert_eq!(t.pois[0].category, PoiCategory::Restaurant);
        assert_eq!(t.pois[1].category, PoiCategory::Other);
        assert_eq!(t.pois[1].avg_score, None);
        assert_eq!(t.pois[2].category, PoiCategory::RetailTrade);
        assert_eq!(t.pois[2].name, "C, Inc");
        assert_eq!(t.unknown_category_count, 1);

        let bad = write(
            &dir,
            "bad.csv",
            "poi_id,name,category,lat,lng\na,A,Hotel,91,0\n",
        );
        assert!(matches!(load_pois(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn region_assignment_rules() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write(
            &dir,
            "r.csv",
            "poi_id,cbg_id,cbsa_id,is_urban\np1,A,X,true\np2,A,X,false\n",
        );
        let t = load_region_assignments(&ok).unwrap();
        let a = t.get("p1").unwrap();
        assert_eq!((a.cbg_id.as_str(), a.cbsa_id.as_str()), ("A", "X"));
        let pois = vec![
            Poi {
                poi_id: "p1".into(),
                name: String::new(),
                category: PoiCategory::Hotel,
                lat: 0.0,
                lng: 0.0,
                avg_score: None,
            },
            Poi {
                poi_id: "p9".into(),
                name: String::new(),
                category: PoiCategory::Hotel,
                lat: 0.0,
                lng: 0.0,
                avg_score: None,
            },
        ];
        assert_eq!(t.unassigned(&pois), vec!["p9"]);

        let conflict = write(
            &dir,
            "c.csv",
            "poi_id,cbg_id,cbsa_id,is_urban\np1,A,X,true\np2,A,Y,true\n",
        );
        assert!(matches!(
            load_region_assignments(&conflict),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn covariate_means_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.csv",
            "cbg_id,a,b,c\nG1,1,2,3\nG2,3,4,5\nG3,1,,2\n",
        );
        let t = load_covariates(&p).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rejected.len(), 1);
        assert_eq!(t.rejected[0].missing, vec!["b".to_string()]);
        let means: Vec<f64> = t.stats.iter().map(|s| s.mean).collect();
        assert_eq!(means, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn report_counts_orphans() {
        let reviews = vec![
            Review {
                review_id: "r1".into(),
                poi_id: "p1".into(),
                text: "x".into(),
                rating: None,
                timestamp: None,
            },
            Review {
                review_id: "r2".into(),
                poi_id: "ghost".into(),
                text: "x".into(),
                rating: None,
                timestamp: None,
            },
        ];
        let pois = PoiTable {
            pois: vec![
                Poi {
                    poi_id: "p1".into(),
                    name: String::new(),
                    category: PoiCategory::Hotel,
                    lat: 0.0,
                    lng: 0.0,
                    avg_score: None,
                },
                Poi {
                    poi_id: "p2".into(),
                    name: String::new(),
                    category: PoiCategory::Hotel,
                    lat: 0.0,
                    lng: 0.0,
                    avg_score: None,
                },
            ],
            unknown_category_count: 0,
        };
        let regions = RegionTable::new(vec![
            RegionAssignment {
                poi_id: "p1".into(),
                cbg_id: "A".into(),
                cbsa_id: "X".into(),
                is_urban: true,
            },
            RegionAssignment {
                poi_id: "p2".into(),
                cbg_id: "B".into(),
                cbsa_id: "X".into(),
                is_urban: true,
            },
        ])
        .unwrap();
        let cov = CovariateTable {
            variables: vec!["v".into()],
            rows: vec![CovariateRow {
                cbg_id: "A".into(),
                values: vec![1.0],
            }],
            ..Default::default()
        };
        let (corpus, rep) = Corpus::assemble(reviews, pois, regions, cov);
        assert_eq!(rep.orphan_reviews, 1);
        assert_eq!(rep.retained_reviews + rep.orphan_reviews, rep.input_reviews);
        assert_eq!(rep.pois_without_reviews, vec!["p2".to_string()]);
        assert_eq!(rep.cbgs_without_covariates, vec!["B".to_string()]);
        assert_eq!(corpus.reviews.len(), 1);
        assert_eq!(corpus.region_of("p1").unwrap().cbsa_id, "X");
    }
}
