//! Cluster labeling by centroid-to-SRF similarity, SRF frequency shares,
//! co-occurrence counts, and the cross-platform comparison report.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterResult;
use crate::corpus::Corpus;
use crate::embedding::{cosine, EmbeddingStore, vocab_key};
use crate::error::{Error, Result};
use crate::lexicon::{self, taxonomy_index, Lexicon, ACCESSORY, OTHER_IMPORTANT_SRFS};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SrfVector {
    pub srf: String,
    pub vector: Vec<f64>,
    pub term_count: usize,
}

/// Mean of the retrofitted vectors of each SRF's lexicon terms. Categories
/// with no in-vocabulary term are skipped.
pub fn srf_vectors(lex: &Lexicon, store: &EmbeddingStore) -> Vec<SrfVector> {
    let mut out = Vec::new();
    for (cat, terms) in &lex.categories {
        let keys: Vec<String> = terms.keys().filter_map(|t| vocab_key(t, store)).collect();
        if keys.is_empty() {
            continue;
        }
        let mut vector = vec![0.0; store.dimension];
        for k in &keys {
            for (s, v) in vector.iter_mut().zip(store.get(k).expect("key in store")) {
                *s += v;
            }
        }
        for s in vector.iter_mut() {
            *s /= keys.len() as f64;
        }
        if vector.iter().all(|v| v.abs() < 1e-12) {
            continue;
        }
        out.push(SrfVector {
            srf: cat.clone(),
            vector,
            term_count: keys.len(),
        });
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledCluster {
    pub cluster_id: usize,
    /// Sorted descending by similarity; the first entry is the primary label.
    pub labels: Vec<(String, f64)>,
    pub doc_count: usize,
    #[serde(default)]
    pub member_ids: Vec<String>,
}

impl LabeledCluster {
    pub fn primary(&self) -> &str {
        &self.labels[0].0
    }
}

/// Primary label = argmax cosine(centroid, SRF vector); every SRF within
/// `margin` of the max is attached as an additional label. Below `floor`
/// the cluster falls into the mixed "other important SRFs" bucket. Ties
/// break by taxonomy order.
pub fn label_clusters(
    result: &ClusterResult,
    srfs: &[SrfVector],
    margin: f64,
    floor: f64,
) -> Result<Vec<LabeledCluster>> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Domain(format!("margin {margin} outside [0, 1)")));
    }
    if !(-1.0..1.0).contains(&floor) {
        return Err(Error::Domain(format!("floor {floor} outside (-1, 1)")));
    }
    let mut out = Vec::with_capacity(result.clusters.len());
    for cluster in &result.clusters {
        let mut sims: Vec<(String, f64)> = Vec::with_capacity(srfs.len());
        for s in srfs {
            sims.push((s.srf.clone(), cosine(&cluster.centroid, &s.vector)?));
        }
        sims.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap().then_with(|| {
                let ia = taxonomy_index(&a.0).unwrap_or(usize::MAX);
                let ib = taxonomy_index(&b.0).unwrap_or(usize::MAX);
                ia.cmp(&ib).then_with(|| a.0.cmp(&b.0))
            })
        });
        let labels = match sims.first() {
            Some((_, max)) if *max >= floor => {
                let cutoff = max - margin;
                sims.into_iter().filter(|(_, s)| *s >= cutoff).collect()
            }
            Some((_, max)) => vec![(OTHER_IMPORTANT_SRFS.to_string(), *max)],
            None => vec![(OTHER_IMPORTANT_SRFS.to_string(), f64::NEG_INFINITY)],
        };
        out.push(LabeledCluster {
            cluster_id: cluster.cluster_id,
            labels,
            doc_count: cluster.member_ids.len(),
            member_ids: cluster.member_ids.clone(),
        });
    }
    Ok(out)
}

/// Accessory keyword list from the mixed "accessory" category: means or
/// substances that assisted suicide rather than risk factors proper.
pub const ACCESSORY_KEYWORDS: [&str; 7] = [
    "plastic bag",
    "bridge",
    "caustic substance",
    "car exhaust",
    "mechanical threat",
    "car trunk",
    "refrigerator",
];

/// Lexical accessory override: a cluster whose matched lexicon terms are
/// dominated (> 50% of all matches) by accessory keywords is relabeled
/// "accessory".
pub fn accessory_override(
    labeled: &mut [LabeledCluster],
    docs: &Corpus,
    lex: &Lexicon,
    accessory_terms: &[&str],
) {
    let acc = Lexicon::from_categories("acc", vec![("accessory", accessory_terms.to_vec())]);
    let by_id: BTreeMap<&str, &str> = docs
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d.text.as_str()))
        .collect();
    for cluster in labeled.iter_mut() {
        let mut acc_hits = 0usize;
        let mut total_hits = 0usize;
        for id in &cluster.member_ids {
            if let Some(text) = by_id.get(id.as_str()) {
                acc_hits += lexicon::match_terms(text, &acc)
                    .values()
                    .map(|v| v.len())
                    .sum::<usize>();
                total_hits += lexicon::match_terms(text, lex)
                    .values()
                    .map(|v| v.len())
                    .sum::<usize>();
            }
        }
        if acc_hits > 0 && acc_hits * 2 > (total_hits + acc_hits) {
            let sim = cluster.labels[0].1;
            cluster.labels.insert(0, (ACCESSORY.to_string(), sim));
        }
    }
}

/// Share of clustered documents whose cluster's primary label is each SRF,
/// in percent. Sums to 100 within floating-point error.
pub fn srf_frequency(labeled: &[LabeledCluster]) -> Result<BTreeMap<String, f64>> {
    let total: usize = labeled.iter().map(|c| c.doc_count).sum();
    if labeled.is_empty() || total == 0 {
        return Err(Error::NothingToRank);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for c in labeled {
        *counts.entry(c.primary().to_string()).or_default() += c.doc_count;
    }
    Ok(counts
        .into_iter()
        .map(|(k, v)| (k, 100.0 * v as f64 / total as f64))
        .collect())
}

/// Document-level co-mention counts of SRF tuples at the given arity, plus
/// cluster-level co-label counts from multi-label clusters. Sorted by count
/// descending, then tuple.
pub fn srf_cooccurrence(
    labeled: &[LabeledCluster],
    docs: &Corpus,
    lex: &Lexicon,
    arity: usize,
) -> Result<Vec<(Vec<String>, usize)>> {
    if !(2..=5).contains(&arity) {
        return Err(Error::Domain(format!("arity {arity} outside 2..=5")));
    }
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for doc in &docs.documents {
        let hits = lexicon::match_terms(&doc.text, lex);
        let cats: BTreeSet<&String> = hits.keys().collect();
        if cats.len() < arity {
            continue;
        }
        for combo in cats.iter().combinations(arity) {
            let key: Vec<String> = combo.iter().map(|c| (**c).clone()).collect();
            *counts.entry(key).or_default() += 1;
        }
    }
    for cluster in labeled {
        let cats: BTreeSet<&str> = cluster.labels.iter().map(|(s, _)| s.as_str()).collect();
        if cats.len() < arity {
            continue;
        }
        for combo in cats.iter().combinations(arity) {
            let key: Vec<String> = combo.iter().map(|c| c.to_string()).collect();
            *counts.entry(key).or_default() += 1;
        }
    }
    let mut out: Vec<(Vec<String>, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlatformSummary {
    pub name: String,
    pub shares: BTreeMap<String, f64>,
    pub identified_srfs: Vec<String>,
    pub identified_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub platform_a: PlatformSummary,
    pub platform_b: PlatformSummary,
    pub common: Vec<String>,
    pub only_a: Vec<String>,
    pub only_b: Vec<String>,
}

fn summarize(name: &str, labeled: &[LabeledCluster]) -> Result<PlatformSummary> {
    let shares = srf_frequency(labeled)?;
    let identified: BTreeSet<String> =
        labeled.iter().map(|c| c.primary().to_string()).collect();
    let identified_srfs: Vec<String> = identified.into_iter().collect();
    Ok(PlatformSummary {
        name: name.to_string(),
        identified_count: identified_srfs.len(),
        identified_srfs,
        shares,
    })
}

/// Common SRFs are the intersection of primary-label sets; exclusives are
/// the set differences.
pub fn compare_platforms(
    a: (&str, &[LabeledCluster]),
    b: (&str, &[LabeledCluster]),
) -> Result<ComparisonReport> {
    let sa = summarize(a.0, a.1)?;
    let sb = summarize(b.0, b.1)?;
    let set_a: BTreeSet<&String> = sa.identified_srfs.iter().collect();
    let set_b: BTreeSet<&String> = sb.identified_srfs.iter().collect();
    let common = set_a.intersection(&set_b).map(|s| (*s).clone()).collect();
    let only_a = set_a.difference(&set_b).map(|s| (*s).clone()).collect();
    let only_b = set_b.difference(&set_a).map(|s| (*s).clone()).collect();
    Ok(ComparisonReport {
        platform_a: sa,
        platform_b: sb,
        common,
        only_a,
        only_b,
    })
}

impl ComparisonReport {
    /// Plain-text rendering of the report.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for p in [&self.platform_a, &self.platform_b] {
            s.push_str(&format!(
                "{}: {} SRFs identified out of {}\n",
                p.name,
                p.identified_count,
                lexicon::SRF_TAXONOMY.len()
            ));
            let mut shares: Vec<(&String, &f64)> = p.shares.iter().collect();
            shares.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap().then_with(|| a.0.cmp(b.0)));
            for (srf, pct) in shares {
                s.push_str(&format!("  {srf:<32} {pct:6.1}%\n"));
            }
        }
        s.push_str(&format!("common: {}\n", self.common.join(", ")));
        s.push_str(&format!(
            "only {}: {}\n",
            self.platform_a.name,
            self.only_a.join(", ")
        ));
        s.push_str(&format!(
            "only {}: {}\n",
            self.platform_b.name,
            self.only_b.join(", ")
        ));
        s
    }
}
