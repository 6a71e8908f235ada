use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AttitudeLabel;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarRecord {
    pub sentence_uid: String,
    pub label: AttitudeLabel,
}

/// Labels produced outside this crate, keyed by sentence uid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExternalLabels {
    pub labels: BTreeMap<String, AttitudeLabel>,
}

impl ExternalLabels {
    pub fn load(path: &Path) -> Result<ExternalLabels> {
        Ok(ExternalLabels {
            labels: read_sidecar(path)?
                .into_iter()
                .map(|r| (r.sentence_uid, r.label))
                .collect(),
        })
    }

    /// Labels for `uids` in order; every missing uid is listed in the error.
    pub fn lookup<'a>(&self, uids: impl IntoIterator<Item = &'a str>) -> Result<Vec<AttitudeLabel>> {
        let mut out = Vec::new();
        let mut missing = BTreeSet::new();
        for uid in uids {
            match self.labels.get(uid) {
                Some(&l) => out.push(l),
                None => {
                    missing.insert(uid.to_string());
                }
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(Error::MissingSidecarIds(missing.into_iter().collect()))
        }
    }
}

pub fn read_sidecar(path: &Path) -> Result<Vec<SidecarRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SidecarRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_sidecar(path: &Path, records: &[SidecarRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
