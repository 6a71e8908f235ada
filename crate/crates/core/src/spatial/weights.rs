use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance in kilometres between two (lat, lng) points.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la1, lo1) = (a.0.to_radians(), a.1.to_radians());
    let (la2, lo2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Row-standardized spatial weights. Row `i` lists the neighbors of region
/// `i` (sorted by index) with weights summing to 1; regions without any
/// neighbor are islands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatialWeights {
    pub ids: Vec<String>,
    pub neighbors: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
}

impl SpatialWeights {
    /// Row-standardizes the given neighbor lists.
    pub fn from_neighbors(ids: Vec<String>, mut neighbors: Vec<Vec<usize>>) -> SpatialWeights {
        for row in &mut neighbors {
            row.sort_unstable();
            row.dedup();
        }
        let weights = neighbors
            .iter()
            .map(|row| vec![1.0 / row.len() as f64; row.len()])
            .collect();
        SpatialWeights {
            ids,
            neighbors,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn islands(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.neighbors[i].is_empty()).collect()
    }

    /// Sum of all weights.
    pub fn s0(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    /// Spatial lag `sum_j w_ij x_j` for every region.
    pub fn lag(&self, x: &[f64]) -> Vec<f64> {
        self.neighbors
            .iter()
            .zip(&self.weights)
            .map(|(nb, w)| nb.iter().zip(w).map(|(&j, &wj)| wj * x[j]).sum())
            .collect()
    }

    /// Keeps only `keep` regions (by id), dropping links to removed ones and
    /// re-standardizing rows.
    pub fn subset(&self, keep: &[String]) -> Result<SpatialWeights> {
        let pos: HashMap<&str, usize> = self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut new_pos = HashMap::new();
        for (k, id) in keep.iter().enumerate() {
            let old = *pos
                .get(id.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("region `{id}` has no weights")))?;
            new_pos.insert(old, k);
        }
        let neighbors = keep
            .iter()
            .map(|id| {
                self.neighbors[pos[id.as_str()]]
                    .iter()
                    .filter_map(|j| new_pos.get(j).copied())
                    .collect()
            })
            .collect();
        Ok(SpatialWeights::from_neighbors(keep.to_vec(), neighbors))
    }
}

/// k nearest neighbors by great-circle distance between centroids; equal
/// distances are resolved by region id.
pub fn build_knn_weights(ids: &[String], centroids: &[(f64, f64)], k: usize) -> Result<SpatialWeights> {
    let n = ids.len();
    if centroids.len() != n {
        return Err(Error::InvalidInput("ids and centroids differ in length".into()));
    }
    if k == 0 || n <= k {
        return Err(Error::InvalidInput(format!(
            "k-nearest-neighbor weights need 1 <= k < n (k = {k}, n = {n})"
        )));
    }
    if centroids.iter().any(|c| !c.0.is_finite() || !c.1.is_finite()) {
        return Err(Error::InvalidInput("non-finite centroid".into()));
    }
    let neighbors = (0..n)
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (haversine_km(centroids[i], centroids[j]), j))
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| ids[a.1].cmp(&ids[b.1])));
            cand.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect();
    Ok(SpatialWeights::from_neighbors(ids.to_vec(), neighbors))
}

/// Contiguity weights from an undirected edge list; edges are symmetrized
/// and self-loops ignored.
pub fn build_adjacency_weights(ids: &[String], edges: &[(String, String)]) -> Result<SpatialWeights> {
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut sets = vec![BTreeSet::new(); ids.len()];
    for (a, b) in edges {
        let ia = *pos
            .get(a.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("edge names unknown region `{a}`")))?;
        let ib = *pos
            .get(b.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("edge names unknown region `{b}`")))?;
        if ia != ib {
            sets[ia].insert(ib);
            sets[ib].insert(ia);
        }
    }
    Ok(SpatialWeights::from_neighbors(
        ids.to_vec(),
        sets.into_iter().map(|s| s.into_iter().collect()).collect(),
    ))
}

#[derive(Deserialize)]
struct EdgeRow {
    region_a: String,
    region_b: String,
}

/// Reads a `region_a,region_b` CSV edge list.
pub fn load_edge_list(path: &Path) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, 0, format!("{other:?}")),
    })?;
    rdr.deserialize::<EdgeRow>()
        .enumerate()
        .map(|(i, r)| {
            r.map(|r| (r.region_a, r.region_b))
                .map_err(|e| Error::parse(path, i + 2, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i}")).collect()
    }

    #[test]
    fn collinear_points() {
        let pts = [(0.0, 0.0), (0.0, 1.0), (0.0, 2.5)];
        let w = build_knn_weights(&ids(3), &pts, 1).unwrap();
        assert_eq!(w.neighbors, vec![vec![1], vec![0], vec![1]]);
        let w = build_knn_weights(&ids(3), &pts, 2).unwrap();
        assert!(w.weights.iter().flatten().all(|&x| x == 0.5));
        assert!(build_knn_weights(&ids(3), &pts, 3).is_err());
    }

    #[test]
    fn adjacency_is_symmetrized() {
        let w = build_adjacency_weights(&ids(3), &[("r0".into(), "r1".into())]).unwrap();
        assert_eq!(w.weights[0], vec![1.0]);
        assert_eq!(w.weights[1], vec![1.0]);
        assert_eq!(w.islands(), vec![2]);
        assert!(build_adjacency_weights(&ids(2), &[("r0".into(), "zz".into())]).is_err());
    }

    #[test]
    fn haversine_quarter_meridian() {
        let d = haversine_km((0.0, 0.0), (90.0, 0.0));
        assert!((d - std::f64::consts::FRAC_PI_2 * EARTH_RADIUS_KM).abs() < 1e-9);
    }
}
