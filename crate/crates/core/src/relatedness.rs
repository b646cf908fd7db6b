//! Cross-community semantic relatedness: per common user, the fraction of
//! cross-community post pairs whose cosine clears the similarity threshold,
//! averaged over common users.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, DocumentVector};
use crate::error::{Error, Result};

/// (user, community) -> that user's post vectors in the community.
#[derive(Debug, Clone, Default)]
pub struct UserPostIndex {
    map: BTreeMap<(String, String), Vec<DocumentVector>>,
}

impl UserPostIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, user: &str, community: &str, vector: DocumentVector) {
        self.map
            .entry((user.to_string(), community.to_string()))
            .or_default()
            .push(vector);
    }

    pub fn posts(&self, user: &str, community: &str) -> Option<&Vec<DocumentVector>> {
        self.map.get(&(user.to_string(), community.to_string()))
    }

    /// Users with posts in the community, sorted.
    pub fn users_in(&self, community: &str) -> Vec<&str> {
        self.map
            .keys()
            .filter(|(_, c)| c == community)
            .map(|(u, _)| u.as_str())
            .collect()
    }

    pub fn communities(&self) -> Vec<String> {
        let mut cs: Vec<String> = self.map.keys().map(|(_, c)| c.clone()).collect();
        cs.sort();
        cs.dedup();
        cs
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Kahan compensated summation; keeps accumulation reproducible and tight.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// SR between two communities: for each common user, count cross pairs with
/// cosine strictly above `sim_threshold`, divide by the user's post count on
/// both sides, then average over common users. Returns (sr, n_common_users).
pub fn semantic_relatedness(
    s1: &str,
    s2: &str,
    index: &UserPostIndex,
    sim_threshold: f64,
) -> Result<(f64, usize)> {
    if !(sim_threshold > -1.0 && sim_threshold < 1.0) {
        return Err(Error::Domain(format!(
            "sim_threshold {sim_threshold} outside (-1, 1)"
        )));
    }
    let users1 = index.users_in(s1);
    let common: Vec<&str> = users1
        .into_iter()
        .filter(|u| index.posts(u, s2).is_some())
        .collect();
    if common.is_empty() {
        return Err(Error::NoCommonUsers(s1.to_string(), s2.to_string()));
    }
    let mut total = KahanSum::default();
    for u in &common {
        let p1 = index.posts(u, s1).expect("user in s1");
        let p2 = index.posts(u, s2).expect("user in s2");
        let mut hits = 0usize;
        for a in p1 {
            for b in p2 {
                let sim = cosine(&a.vector, &b.vector)?;
                if sim > sim_threshold {
                    hits += 1;
                }
            }
        }
        total.add(hits as f64 / (p1.len() + p2.len()) as f64);
    }
    Ok((total.sum / common.len() as f64, common.len()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SrMatrix {
    pub communities: Vec<String>,
    /// None where the pair shares no users.
    pub values: Vec<Vec<Option<f64>>>,
    pub n_common_users: Vec<Vec<usize>>,
    pub sim_threshold: f64,
}

impl SrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.communities.iter().position(|c| c == a)?;
        let j = self.communities.iter().position(|c| c == b)?;
        self.values[i][j]
    }
}

/// All unordered pairs computed once; diagonal fixed at 1.0 by convention.
pub fn build_sr_matrix(
    index: &UserPostIndex,
    communities: &[String],
    sim_threshold: f64,
) -> Result<SrMatrix> {
    let n = communities.len();
    let mut values = vec![vec![None; n]; n];
    let mut users = vec![vec![0usize; n]; n];
    for i in 0..n {
        values[i][i] = Some(1.0);
        for j in i + 1..n {
            match semantic_relatedness(&communities[i], &communities[j], index, sim_threshold) {
                Ok((sr, nu)) => {
                    values[i][j] = Some(sr);
                    values[j][i] = Some(sr);
                    users[i][j] = nu;
                    users[j][i] = nu;
                }
                Err(Error::NoCommonUsers(_, _)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SrMatrix {
        communities: communities.to_vec(),
        values,
        n_common_users: users,
        sim_threshold,
    })
}

/// Communities whose SR to the anchor clears the threshold, anchor excluded,
/// sorted descending by SR (ties by name).
pub fn select_communities(
    matrix: &SrMatrix,
    anchor: &str,
    threshold: f64,
) -> Result<Vec<(String, f64)>> {
    let ai = matrix
        .communities
        .iter()
        .position(|c| c == anchor)
        .ok_or_else(|| Error::Domain(format!("anchor community '{anchor}' not in matrix")))?;
    let mut out: Vec<(String, f64)> = matrix
        .communities
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != ai)
        .filter_map(|(j, c)| matrix.values[ai][j].map(|sr| (c.clone(), sr)))
        .filter(|(_, sr)| *sr >= threshold)
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}
