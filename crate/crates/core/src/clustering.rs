//! OPTICS density ordering and reachability-threshold cluster extraction.

use std::collections::BTreeSet;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, DocumentVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// 1 - cosine similarity.
    CosineDistance,
    Euclidean,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OpticsParams {
    pub min_pts: usize,
    pub max_eps: f64,
    pub metric: Metric,
}

impl Default for OpticsParams {
    fn default() -> Self {
        OpticsParams {
            min_pts: 5,
            max_eps: f64::INFINITY,
            metric: Metric::CosineDistance,
        }
    }
}

impl OpticsParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_pts < 2 {
            return Err(Error::Domain("min_pts must be >= 2".into()));
        }
        if !(self.max_eps > 0.0) {
            return Err(Error::Domain("max_eps must be > 0".into()));
        }
        Ok(())
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        match self.metric {
            Metric::CosineDistance => Ok(1.0 - cosine(a, b)?),
            Metric::Euclidean => Ok(a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReachabilityPoint {
    pub doc_id: String,
    pub order_index: usize,
    pub reachability: Option<f64>,
    pub core_distance: Option<f64>,
}

/// Standard OPTICS ordering. Points are visited in sorted-doc-id order;
/// seed-queue ties break by doc_id, so the ordering is fully deterministic.
/// Core distance is the distance to the min_pts-th closest point, the point
/// itself included.
pub fn optics_order(
    vectors: &[DocumentVector],
    params: &OpticsParams,
) -> Result<Vec<ReachabilityPoint>> {
    params.validate()?;
    let n = vectors.len();
    if n < params.min_pts {
        return Err(Error::Domain(format!(
            "{n} points but min_pts is {}",
            params.min_pts
        )));
    }
    for v in vectors {
        if matches!(params.metric, Metric::CosineDistance) && v.is_degenerate() {
            return Err(Error::Domain(format!(
                "degenerate (zero) vector for document {}",
                v.doc_id
            )));
        }
    }
    // process in sorted-id order
    let mut order_by_id: Vec<usize> = (0..n).collect();
    order_by_id.sort_by(|&a, &b| vectors[a].doc_id.cmp(&vectors[b].doc_id));

    let dist = |a: usize, b: usize| -> Result<f64> {
        params.distance(&vectors[a].vector, &vectors[b].vector)
    };

    // neighbors within max_eps and core distance
    let core_distance = |p: usize| -> Result<Option<f64>> {
        let mut ds: Vec<f64> = Vec::with_capacity(n);
        for q in 0..n {
            let d = dist(p, q)?;
            if d <= params.max_eps {
                ds.push(d);
            }
        }
        if ds.len() < params.min_pts {
            return Ok(None);
        }
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Some(ds[params.min_pts - 1]))
    };

    // rank of each point's doc_id in sorted order, for deterministic ties
    let mut id_rank = vec![0usize; n];
    for (rank, &idx) in order_by_id.iter().enumerate() {
        id_rank[idx] = rank;
    }
    let rank_to_idx = order_by_id.clone();

    let mut processed = vec![false; n];
    let mut reach: Vec<Option<f64>> = vec![None; n];
    let mut core: Vec<Option<f64>> = vec![None; n];
    let mut output: Vec<usize> = Vec::with_capacity(n);

    for &start in &order_by_id {
        if processed[start] {
            continue;
        }
        processed[start] = true;
        core[start] = core_distance(start)?;
        output.push(start);
        // seeds keyed by (reachability, doc_id rank)
        let mut seeds: BTreeSet<(OrderedFloat<f64>, usize)> = BTreeSet::new();
        let mut seed_key: Vec<Option<(OrderedFloat<f64>, usize)>> = vec![None; n];

        let update = |center: usize,
                      core: &[Option<f64>],
                      seeds: &mut BTreeSet<(OrderedFloat<f64>, usize)>,
                      seed_key: &mut Vec<Option<(OrderedFloat<f64>, usize)>>,
                      reach: &mut Vec<Option<f64>>,
                      processed: &[bool]|
         -> Result<()> {
            let cd = match core[center] {
                Some(cd) => cd,
                None => return Ok(()),
            };
            for q in 0..n {
                if processed[q] {
                    continue;
                }
                let d = dist(center, q)?;
                if d > params.max_eps {
                    continue;
                }
                let new_reach = cd.max(d);
                let better = match reach[q] {
                    None => true,
                    Some(r) => new_reach < r,
                };
                if better {
                    if let Some(k) = seed_key[q].take() {
                        seeds.remove(&k);
                    }
                    reach[q] = Some(new_reach);
                    let key = (OrderedFloat(new_reach), id_rank[q]);
                    seeds.insert(key);
                    seed_key[q] = Some(key);
                }
            }
            Ok(())
        };

        update(start, &core, &mut seeds, &mut seed_key, &mut reach, &processed)?;
        while let Some(&key) = seeds.iter().next() {
            seeds.remove(&key);
            let p = rank_to_idx[key.1];
            seed_key[p] = None;
            if processed[p] {
                continue;
            }
            processed[p] = true;
            core[p] = core_distance(p)?;
            output.push(p);
            update(p, &core, &mut seeds, &mut seed_key, &mut reach, &processed)?;
        }
    }

    Ok(output
        .iter()
        .enumerate()
        .map(|(order_index, &p)| ReachabilityPoint {
            doc_id: vectors[p].doc_id.clone(),
            order_index,
            reachability: reach[p],
            core_distance: core[p],
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: usize,
    pub member_ids: Vec<String>,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterResult {
    pub clusters: Vec<Cluster>,
    pub noise: Vec<String>,
    pub ordering: Vec<ReachabilityPoint>,
    /// Set when no cut level reached the requested cluster count.
    pub under_target: bool,
    pub cut_level: f64,
}

fn clusters_at_cut(
    ordering: &[ReachabilityPoint],
    cut: f64,
    min_pts: usize,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut noise: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let close = |run: &mut Vec<usize>, clusters: &mut Vec<Vec<usize>>, noise: &mut Vec<usize>| {
        if run.len() >= min_pts {
            clusters.push(std::mem::take(run));
        } else {
            noise.append(run);
        }
    };
    for (i, pt) in ordering.iter().enumerate() {
        let r = pt.reachability.unwrap_or(f64::INFINITY);
        if r > cut {
            close(&mut current, &mut clusters, &mut noise);
            // a point unreachable at this cut starts a new run only if dense
            match pt.core_distance {
                Some(cd) if cd <= cut => current.push(i),
                _ => noise.push(i),
            }
        } else {
            current.push(i);
        }
    }
    close(&mut current, &mut clusters, &mut noise);
    (clusters, noise)
}

/// Reachability-threshold extraction. Candidate cut levels are drawn from the
/// reachability distribution; the loosest cut reaching `target_min_clusters`
/// wins (fewest noise points). If no cut reaches the target the best
/// achievable cut is returned with `under_target` set.
pub fn extract_clusters(
    ordering: &[ReachabilityPoint],
    vectors: &[DocumentVector],
    target_min_clusters: usize,
    params: &OpticsParams,
) -> Result<ClusterResult> {
    params.validate()?;
    if ordering.is_empty() {
        return Err(Error::Domain("empty ordering".into()));
    }
    let by_id: std::collections::BTreeMap<&str, &DocumentVector> =
        vectors.iter().map(|v| (v.doc_id.as_str(), v)).collect();
    for pt in ordering {
        if !by_id.contains_key(pt.doc_id.as_str()) {
            return Err(Error::Domain(format!("ordering references unknown doc {}", pt.doc_id)));
        }
    }

    let mut candidates: Vec<f64> = ordering
        .iter()
        .flat_map(|p| p.reachability.into_iter().chain(p.core_distance))
        .filter(|v| v.is_finite())
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    if let Some(&max) = candidates.last() {
        candidates.push(max * (1.0 + 1e-9) + 1e-12); // loosest: everything dense joins
    }
    if candidates.is_empty() {
        candidates.push(f64::INFINITY);
    }

    // loosest-first so the first cut reaching the target keeps noise minimal
    let mut best: Option<(f64, Vec<Vec<usize>>, Vec<usize>)> = None;
    let mut chosen: Option<(f64, Vec<Vec<usize>>, Vec<usize>)> = None;
    for &cut in candidates.iter().rev() {
        let (clusters, noise) = clusters_at_cut(ordering, cut, params.min_pts);
        if clusters.len() >= target_min_clusters {
            chosen = Some((cut, clusters, noise));
            break;
        }
        let better = match &best {
            None => true,
            Some((_, b, _)) => clusters.len() > b.len(),
        };
        if better {
            best = Some((cut, clusters, noise));
        }
    }
    let (under_target, (cut, cluster_runs, noise_idx)) = match chosen {
        Some(c) => (false, c),
        None => (true, best.expect("at least one candidate cut")),
    };

    let clusters = cluster_runs
        .into_iter()
        .enumerate()
        .map(|(cluster_id, run)| {
            let member_ids: Vec<String> =
                run.iter().map(|&i| ordering[i].doc_id.clone()).collect();
            let dim = by_id[member_ids[0].as_str()].vector.len();
            let mut centroid = vec![0.0; dim];
            for id in &member_ids {
                for (c, v) in centroid.iter_mut().zip(&by_id[id.as_str()].vector) {
                    *c += v;
                }
            }
            for c in centroid.iter_mut() {
                *c /= member_ids.len() as f64;
            }
            Cluster {
                cluster_id,
                member_ids,
                centroid,
            }
        })
        .collect();

    Ok(ClusterResult {
        clusters,
        noise: noise_idx.iter().map(|&i| ordering[i].doc_id.clone()).collect(),
        ordering: ordering.to_vec(),
        under_target,
        cut_level: cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(id: &str, v: Vec<f64>) -> DocumentVector {
        DocumentVector {
            doc_id: id.into(),
            vector: v,
            token_count: 1,
        }
    }

    #[test]
    fn identical_points_have_zero_core_distance() {
        let vectors: Vec<DocumentVector> =
            (0..5).map(|i| dv(&format!("d{i}"), vec![1.0, 1.0])).collect();
        let params = OpticsParams::default();
        let ordering = optics_order(&vectors, &params).unwrap();
        for pt in &ordering {
            assert_eq!(pt.core_distance, Some(0.0));
        }
        assert!(ordering[0].reachability.is_none());
        for pt in &ordering[1..] {
            assert_eq!(pt.reachability, Some(0.0));
        }
    }

    #[test]
    fn too_few_points_is_domain_error() {
        let vectors = vec![dv("a", vec![1.0, 0.0])];
        assert!(optics_order(&vectors, &OpticsParams::default()).is_err());
    }

    #[test]
    fn outlier_beyond_eps_has_no_core_distance() {
        let mut vectors: Vec<DocumentVector> = (0..8)
            .map(|i| dv(&format!("d{i}"), vec![10.0, 0.01 * i as f64]))
            .collect();
        vectors.push(dv("outlier", vec![0.0, 10.0]));
        let params = OpticsParams {
            min_pts: 5,
            max_eps: 0.5,
            metric: Metric::Euclidean,
        };
        let ordering = optics_order(&vectors, &params).unwrap();
        let out = ordering.iter().find(|p| p.doc_id == "outlier").unwrap();
        assert!(out.core_distance.is_none());
    }

    fn blob(center: (f64, f64), k: usize, tag: &str) -> Vec<DocumentVector> {
        (0..k)
            .map(|i| {
                let t = i as f64 * 0.001;
                dv(&format!("{tag}{i:02}"), vec![center.0 + t, center.1 + t * 0.5])
            })
            .collect()
    }

    #[test]
    fn three_blobs_recovered() {
        let mut vectors = blob((10.0, 0.0), 10, "a");
        vectors.extend(blob((0.0, 10.0), 10, "b"));
        vectors.extend(blob((-10.0, -10.0), 10, "c"));
        let params = OpticsParams {
            min_pts: 5,
            max_eps: f64::INFINITY,
            metric: Metric::Euclidean,
        };
        let ordering = optics_order(&vectors, &params).unwrap();
        let result = extract_clusters(&ordering, &vectors, 3, &params).unwrap();
        assert!(!result.under_target);
        assert_eq!(result.clusters.len(), 3);
        assert!(result.noise.is_empty());
        for cluster in &result.clusters {
            let tag = &cluster.member_ids[0][..1];
            assert!(cluster.member_ids.iter().all(|m| m.starts_with(tag)));
            assert_eq!(cluster.member_ids.len(), 10);
        }
    }

    #[test]
    fn target_one_is_single_cluster_at_loosest_cut() {
        let mut vectors = blob((10.0, 0.0), 10, "a");
        vectors.extend(blob((0.0, 10.0), 10, "b"));
        let params = OpticsParams {
            min_pts: 5,
            max_eps: f64::INFINITY,
            metric: Metric::Euclidean,
        };
        let ordering = optics_order(&vectors, &params).unwrap();
        let result = extract_clusters(&ordering, &vectors, 1, &params).unwrap();
        assert_eq!(result.clusters.len(), 1);
        assert!(result.noise.is_empty());
    }

    #[test]
    fn partition_invariant_holds() {
        let mut vectors = blob((5.0, 1.0), 7, "a");
        vectors.extend(blob((-3.0, 2.0), 6, "b"));
        vectors.push(dv("lone", vec![100.0, 100.0]));
        let params = OpticsParams {
            min_pts: 5,
            max_eps: f64::INFINITY,
            metric: Metric::Euclidean,
        };
        let ordering = optics_order(&vectors, &params).unwrap();
        let result = extract_clusters(&ordering, &vectors, 12, &params).unwrap();
        let mut all: Vec<&str> = result
            .clusters
            .iter()
            .flat_map(|c| c.member_ids.iter().map(|s| s.as_str()))
            .chain(result.noise.iter().map(|s| s.as_str()))
            .collect();
        all.sort();
        let mut expected: Vec<&str> = vectors.iter().map(|v| v.doc_id.as_str()).collect();
        expected.sort();
        assert_eq!(all, expected);
        for c in &result.clusters {
            assert!(c.member_ids.len() >= params.min_pts);
        }
    }

    #[test]
    fn ordering_is_deterministic() {
        let mut vectors = blob((1.0, 2.0), 12, "a");
        vectors.extend(blob((4.0, -1.0), 9, "b"));
        let params = OpticsParams {
            min_pts: 4,
            max_eps: f64::INFINITY,
            metric: Metric::Euclidean,
        };
        let o1 = optics_order(&vectors, &params).unwrap();
        let o2 = optics_order(&vectors, &params).unwrap();
        let ids1: Vec<&str> = o1.iter().map(|p| p.doc_id.as_str()).collect();
        let ids2: Vec<&str> = o2.iter().map(|p| p.doc_id.as_str()).collect();
        assert_eq!(ids1, ids2);
        for (a, b) in o1.iter().zip(&o2) {
            assert_eq!(a.reachability, b.reachability);
        }
    }
}
