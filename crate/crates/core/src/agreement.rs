//! Krippendorff's alpha over annotation sets plus the pairwise-then-groupwise
//! annotator selection protocol.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    User,
    Post,
}

/// The five severity labels in rank order (used by the ordinal metric).
pub const SEVERITY_LABELS: [&str; 5] =
    ["Supportive", "Indicator", "Ideation", "Behavior", "Attempt"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub items: Vec<String>,
    pub annotators: Vec<String>,
    /// (item, annotator) -> label; missing entries are simply absent.
    pub labels: BTreeMap<(String, String), String>,
    pub level: Level,
    pub categories: Vec<String>,
}

impl AnnotationSet {
    pub fn label(&self, item: &str, annotator: &str) -> Option<&String> {
        self.labels.get(&(item.to_string(), annotator.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.annotators.len() < 2 {
            return Err(Error::Domain("need at least 2 annotators".into()));
        }
        for ((item, annotator), label) in &self.labels {
            if !self.categories.contains(label) {
                return Err(Error::Domain(format!(
                    "label '{label}' on ({item}, {annotator}) not in category set"
                )));
            }
        }
        let pairable = self.items.iter().any(|item| {
            self.annotators
                .iter()
                .filter(|a| self.label(item, a).is_some())
                .count()
                >= 2
        });
        if !pairable {
            return Err(Error::Domain("no item carries two labels".into()));
        }
        Ok(())
    }
}

/// Load annotations from CSV with header `item_id,annotator,label,level`.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<AnnotationSet> {
    let display = path.as_ref().display().to_string();
    let mut reader = csv::Reader::from_path(path.as_ref())
        .map_err(|e| Error::format(&display, 0, e.to_string()))?;
    let mut items: Vec<String> = Vec::new();
    let mut annotators: Vec<String> = Vec::new();
    let mut labels = BTreeMap::new();
    let mut categories: BTreeSet<String> = BTreeSet::new();
    let mut level = Level::Post;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(&display, i + 2, e.to_string()))?;
        if record.len() < 4 {
            return Err(Error::format(&display, i + 2, "expected 4 columns"));
        }
        let (item, annotator, label, lvl) = (&record[0], &record[1], &record[2], &record[3]);
        level = match lvl.to_ascii_lowercase().as_str() {
            "user" => Level::User,
            "post" => Level::Post,
            other => {
                return Err(Error::format(&display, i + 2, format!("unknown level '{other}'")))
            }
        };
        if !items.iter().any(|x| x == item) {
            items.push(item.to_string());
        }
        if !annotators.iter().any(|x| x == annotator) {
            annotators.push(annotator.to_string());
        }
        categories.insert(label.to_string());
        labels.insert((item.to_string(), annotator.to_string()), label.to_string());
    }
    let mut categories: Vec<String> = categories.into_iter().collect();
    // prefer the canonical severity order when the file uses those labels
    if categories.iter().all(|c| SEVERITY_LABELS.contains(&c.as_str())) {
        categories = SEVERITY_LABELS
            .iter()
            .filter(|l| categories.iter().any(|c| c == *l))
            .map(|l| l.to_string())
            .collect();
    }
    let set = AnnotationSet {
        items,
        annotators,
        labels,
        level,
        categories,
    };
    set.validate()?;
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    Nominal,
    /// Squared rank distance over the category order.
    Ordinal,
}

/// Nominal (or ordinal) Krippendorff alpha via the coincidence-matrix
/// formulation. Items with fewer than two labels among the chosen annotators
/// are excluded; missing labels are handled natively.
pub fn krippendorff_alpha(
    set: &AnnotationSet,
    annotators: &[String],
    metric: DistanceMetric,
) -> Result<f64> {
    if annotators.len() < 2 {
        return Err(Error::Domain("alpha needs at least 2 annotators".into()));
    }
    let cats = &set.categories;
    let k = cats.len();
    let cat_index: BTreeMap<&str, usize> =
        cats.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let delta2 = |c: usize, d: usize| -> f64 {
        match metric {
            DistanceMetric::Nominal => {
                if c == d {
                    0.0
                } else {
                    1.0
                }
            }
            DistanceMetric::Ordinal => {
                let diff = c as f64 - d as f64;
                diff * diff
            }
        }
    };

    // coincidence matrix
    let mut o = vec![vec![0.0_f64; k]; k];
    let mut n_total = 0.0_f64;
    for item in &set.items {
        let values: Vec<usize> = annotators
            .iter()
            .filter_map(|a| set.label(item, a))
            .map(|l| cat_index[l.as_str()])
            .collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m as f64 - 1.0);
        for (i, &c) in values.iter().enumerate() {
            for (j, &d) in values.iter().enumerate() {
                if i != j {
                    o[c][d] += w;
                }
            }
        }
        n_total += m as f64;
    }
    if n_total < 2.0 {
        return Err(Error::UndefinedAlpha("no pairable item".into()));
    }
    let n_c: Vec<f64> = (0..k).map(|c| o[c].iter().sum()).collect();

    let mut d_o = 0.0;
    let mut d_e = 0.0;
    for c in 0..k {
        for d in 0..k {
            if c == d {
                continue;
            }
            d_o += o[c][d] * delta2(c, d);
            d_e += n_c[c] * n_c[d] * delta2(c, d);
        }
    }
    d_o /= n_total;
    d_e /= n_total * (n_total - 1.0);
    if d_e == 0.0 {
        if d_o == 0.0 {
            return Ok(1.0);
        }
        return Err(Error::UndefinedAlpha("zero expected disagreement".into()));
    }
    Ok(1.0 - d_o / d_e)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementOutcome {
    pub pairwise: BTreeMap<String, f64>,
    pub selected_annotator: String,
    /// group size -> alpha; None when no unanimous subset exists.
    pub groupwise: BTreeMap<usize, Option<f64>>,
    pub accepted: bool,
    /// Next annotator to try when not accepted.
    pub next_best: Option<String>,
}

fn pair_key(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}|{b}")
    } else {
        format!("{b}|{a}")
    }
}

/// Alpha for every unordered annotator pair; each annotator scored by mean
/// pairwise alpha, argmax selected (ties by name order). Undefined pairs are
/// excluded from means with a warning.
pub fn pairwise_selection(set: &AnnotationSet) -> Result<(String, BTreeMap<String, f64>)> {
    if set.annotators.len() < 2 {
        return Err(Error::Domain("need at least 2 annotators".into()));
    }
    let mut pairwise = BTreeMap::new();
    let mut scores: BTreeMap<&String, Vec<f64>> = BTreeMap::new();
    for pair in set.annotators.iter().combinations(2) {
        let (a, b) = (pair[0], pair[1]);
        match krippendorff_alpha(
            set,
            &[a.clone(), b.clone()],
            DistanceMetric::Nominal,
        ) {
            Ok(alpha) => {
                pairwise.insert(pair_key(a, b), alpha);
                scores.entry(a).or_default().push(alpha);
                scores.entry(b).or_default().push(alpha);
            }
            Err(Error::UndefinedAlpha(msg)) => {
                log::warn!("pair ({a}, {b}) alpha undefined: {msg}");
            }
            Err(e) => return Err(e),
        }
    }
    let mut ranked = rank_annotators(&set.annotators, &scores);
    if ranked.is_empty() {
        return Err(Error::UndefinedAlpha("no defined pairwise alpha".into()));
    }
    let selected = ranked.remove(0);
    Ok((selected, pairwise))
}

fn rank_annotators(
    order: &[String],
    scores: &BTreeMap<&String, Vec<f64>>,
) -> Vec<String> {
    let mut means: Vec<(String, f64)> = order
        .iter()
        .filter_map(|a| {
            scores.get(a).map(|v| {
                (a.clone(), v.iter().sum::<f64>() / v.len() as f64)
            })
        })
        .collect();
    // stable sort keeps the original name order on exact ties
    means.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    means.into_iter().map(|(a, _)| a).collect()
}

/// For each group size g in {2, 3} (the group counts the selected annotator,
/// so g-1 others are needed): restrict to items where some (g-1)-subset of
/// the other annotators agrees unanimously, and compare the selected
/// annotator's label against that agreed label. Accepted when every defined
/// group alpha clears the threshold.
pub fn groupwise_validation(
    set: &AnnotationSet,
    selected: &str,
    threshold: f64,
) -> Result<AgreementOutcome> {
    if !set.annotators.iter().any(|a| a == selected) {
        return Err(Error::Domain(format!("annotator '{selected}' not in set")));
    }
    let others: Vec<&String> = set.annotators.iter().filter(|a| *a != selected).collect();
    let mut groupwise: BTreeMap<usize, Option<f64>> = BTreeMap::new();
    for g in [2usize, 3] {
        let subset_size = g - 1;
        if others.len() < subset_size {
            groupwise.insert(g, None);
            continue;
        }
        // pseudo two-annotator set: selected vs the unanimous group label
        let mut pseudo = AnnotationSet {
            items: Vec::new(),
            annotators: vec!["selected".into(), "group".into()],
            labels: BTreeMap::new(),
            level: set.level,
            categories: set.categories.clone(),
        };
        for item in &set.items {
            let sel_label = match set.label(item, selected) {
                Some(l) => l.clone(),
                None => continue,
            };
            let agreed = others
                .iter()
                .combinations(subset_size)
                .find_map(|subset| {
                    let labels: Vec<&String> = subset
                        .iter()
                        .filter_map(|a| set.label(item, a))
                        .collect();
                    if labels.len() == subset_size && labels.iter().all(|l| *l == labels[0]) {
                        Some(labels[0].clone())
                    } else {
                        None
                    }
                });
            if let Some(agreed) = agreed {
                pseudo.items.push(item.clone());
                pseudo
                    .labels
                    .insert((item.clone(), "selected".into()), sel_label);
                pseudo.labels.insert((item.clone(), "group".into()), agreed);
            }
        }
        let alpha = match krippendorff_alpha(
            &pseudo,
            &pseudo.annotators.clone(),
            DistanceMetric::Nominal,
        ) {
            Ok(a) => Some(a),
            Err(Error::UndefinedAlpha(msg)) => {
                log::warn!("group size {g}: alpha undefined ({msg})");
                None
            }
            Err(Error::Domain(msg)) => {
                log::warn!("group size {g}: {msg}");
                None
            }
            Err(e) => return Err(e),
        };
        groupwise.insert(g, alpha);
    }
    let defined: Vec<f64> = groupwise.values().filter_map(|a| *a).collect();
    let accepted = !defined.is_empty() && defined.iter().all(|a| *a >= threshold);

    let next_best = if accepted {
        None
    } else {
        // next annotator by mean pairwise alpha, after the selected one
        let (_, pairwise) = pairwise_selection(set)?;
        let mut scores: BTreeMap<&String, Vec<f64>> = BTreeMap::new();
        for (key, alpha) in &pairwise {
            let (a, b) = key.split_once('|').expect("pair key");
            for name in [a, b] {
                if let Some(ann) = set.annotators.iter().find(|x| x.as_str() == name) {
                    scores.entry(ann).or_default().push(*alpha);
                }
            }
        }
        rank_annotators(&set.annotators, &scores)
            .into_iter()
            .find(|a| a != selected)
    };

    Ok(AgreementOutcome {
        pairwise: BTreeMap::new(),
        selected_annotator: selected.to_string(),
        groupwise,
        accepted,
        next_best,
    })
}

/// Full protocol: pairwise selection followed by groupwise validation.
pub fn run_protocol(set: &AnnotationSet, threshold: f64) -> Result<AgreementOutcome> {
    set.validate()?;
    let (selected, pairwise) = pairwise_selection(set)?;
    let mut outcome = groupwise_validation(set, &selected, threshold)?;
    outcome.pairwise = pairwise;
    Ok(outcome)
}
