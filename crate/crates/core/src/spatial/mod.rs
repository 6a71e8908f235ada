//! Spatial weights over regions, global Moran's I and local Moran (LISA)
//! cluster maps, both with seeded permutation inference.

mod weights;

pub use weights::{build_adjacency_weights, build_knn_weights, haversine_km, load_edge_list, SpatialWeights};

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoranResult {
    pub i: f64,
    pub expected_i: f64,
    /// Two-sided pseudo p-value; `None` without permutations.
    pub p_value: Option<f64>,
    pub n_permutations: usize,
    pub n: usize,
    pub islands: usize,
}

fn deviations(values: &[f64], w: &SpatialWeights) -> Result<(Vec<f64>, f64)> {
    if values.len() != w.n() {
        return Err(Error::InvalidInput(format!(
            "{} values for {} regions",
            values.len(),
            w.n()
        )));
    }
    if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("need at least two finite values".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let m2: f64 = z.iter().map(|x| x * x).sum();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if m2 <= (f64::EPSILON * scale).powi(2) * values.len() as f64 {
        return Err(Error::ZeroVariance);
    }
    Ok((z, m2))
}

fn moran_stat(z: &[f64], m2: f64, w: &SpatialWeights, s0: f64) -> f64 {
    let lag = w.lag(z);
    let cross: f64 = z.iter().zip(&lag).map(|(a, b)| a * b).sum();
    z.len() as f64 / s0 * cross / m2
}

/// Global Moran's I. The permutation p-value counts shuffles whose
/// statistic is at least as far from `E[I] = -1/(n-1)` as the observed one;
/// permutation `p` draws from its own stream of the seeded generator.
pub fn morans_i(values: &[f64], w: &SpatialWeights, n_permutations: usize, seed: u64, exec: Exec) -> Result<MoranResult> {
    let (z, m2) = deviations(values, w)?;
    let s0 = w.s0();
    if s0 == 0.0 {
        return Err(Error::InvalidInput("weights have no links".into()));
    }
    let n = z.len();
    let observed = moran_stat(&z, m2, w, s0);
    let expected = -1.0 / (n as f64 - 1.0);
    let p_value = if n_permutations == 0 {
        None
    } else {
        let dev = (observed - expected).abs();
        let hits = exec.map_range(n_permutations, |p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut zp = z.clone();
            zp.shuffle(&mut rng);
            ((moran_stat(&zp, m2, w, s0) - expected).abs() >= dev - 1e-12) as usize
        });
        Some((hits.iter().sum::<usize>() + 1) as f64 / (n_permutations + 1) as f64)
    };
    Ok(MoranResult {
        i: observed,
        expected_i: expected,
        p_value,
        n_permutations,
        n,
        islands: w.islands().len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Cluster {
    HH,
    LL,
    HL,
    LH,
    NotSignificant,
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cluster::HH => "HH",
            Cluster::LL => "LL",
            Cluster::HL => "HL",
            Cluster::LH => "LH",
            Cluster::NotSignificant => "NS",
        })
    }
}

/// Moran scatterplot quadrant from the signs of a value and its lag.
pub fn quadrant(z: f64, lag: f64) -> Cluster {
    match (z > 0.0, lag > 0.0) {
        (true, true) => Cluster::HH,
        (false, false) => Cluster::LL,
        (true, false) => Cluster::HL,
        (false, true) => Cluster::LH,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LisaResult {
    pub region_id: String,
    pub value: f64,
    pub z: f64,
    pub lag: f64,
    pub local_i: f64,
    /// Folded pseudo p-value; `None` for islands or without permutations.
    pub p_value: Option<f64>,
    pub quadrant: Cluster,
    pub cluster: Cluster,
}

/// Local Moran's I with conditional permutation: region `i` keeps its value
/// while its neighbors are drawn without replacement from the other regions.
/// Each region uses its own stream of the seeded generator.
pub fn lisa(
    values: &[f64],
    w: &SpatialWeights,
    n_permutations: usize,
    alpha: f64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<LisaResult>> {
    let (z, m2) = deviations(values, w)?;
    let n = z.len();
    let m2n = m2 / n as f64;
    let lag = w.lag(&z);
    Ok(exec.map_range(n, |i| {
        let local_i = z[i] * lag[i] / m2n;
        let k = w.neighbors[i].len();
        let p_value = if k == 0 || n_permutations == 0 {
            None
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| z[j]).collect();
            let mut larger = 0usize;
            for _ in 0..n_permutations {
                let (drawn, _) = others.partial_shuffle(&mut rng, k);
                let lag_p: f64 = drawn.iter().zip(&w.weights[i]).map(|(v, wt)| v * wt).sum();
                if z[i] * lag_p / m2n >= local_i {
                    larger += 1;
                }
            }
            if n_permutations - larger < larger {
                larger = n_permutations - larger;
            }
            Some((larger + 1) as f64 / (n_permutations + 1) as f64)
        };
        let quad = quadrant(z[i], lag[i]);
        let cluster = match p_value {
            Some(p) if p < alpha => quad,
            _ => Cluster::NotSignificant,
        };
        LisaResult {
            region_id: w.ids[i].clone(),
            value: values[i],
            z: z[i],
            lag: lag[i],
            local_i,
            p_value,
            quadrant: quad,
            cluster,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rook(rows: usize, cols: usize) -> SpatialWeights {
        let id = |r: usize, c: usize| r * cols + c;
        let mut nb = vec![Vec::new(); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                if r > 0 {
                    nb[id(r, c)].push(id(r - 1, c));
                }
                if r + 1 < rows {
                    nb[id(r, c)].push(id(r + 1, c));
                }
                if c > 0 {
                    nb[id(r, c)].push(id(r, c - 1));
                }
                if c + 1 < cols {
                    nb[id(r, c)].push(id(r, c + 1));
                }
            }
        }
        SpatialWeights::from_neighbors((0..rows * cols).map(|i| i.to_string()).collect(), nb)
    }

    #[test]
    fn checkerboard_is_minus_one() {
        let w = rook(4, 4);
        let v: Vec<f64> = (0..16).map(|i| if (i / 4 + i % 4) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = morans_i(&v, &w, 99, 1, Exec::Sequential).unwrap();
        assert!((r.i + 1.0).abs() < 1e-12);
        assert!(matches!(morans_i(&[2.0; 16], &w, 9, 1, Exec::Sequential), Err(Error::ZeroVariance)));
    }

    #[test]
    fn hot_spot_quadrants() {
        let w = rook(3, 3);
        let mut v = vec![0.0; 9];
        v[4] = 10.0;
        let out = lisa(&v, &w, 99, 0.05, 3, Exec::Sequential).unwrap();
        assert_eq!(out[4].quadrant, Cluster::HL);
        for edge in [1, 3, 5, 7] {
            assert_eq!(out[edge].quadrant, Cluster::LH);
        }
        for corner in [0, 2, 6, 8] {
            assert_eq!(out[corner].quadrant, Cluster::LL);
        }
    }
}
