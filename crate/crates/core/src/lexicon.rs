//! Semantic lexicons (SRF taxonomy, severity categories, exclusions) and
//! seed expansion over a concept graph via random walk with restart.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, PhraseSet};

/// The 12 Jashinsky et al. risk factors plus two mixed catch-all categories,
/// in fixed order. This order breaks labeling ties.
pub const SRF_TAXONOMY: [&str; 14] = [
    "depressive feelings",
    "depression symptoms",
    "drug abuse",
    "prior suicide attempts",
    "suicide around individual",
    "suicide ideation",
    "self-harm",
    "bullying behavior",
    "gun ownership",
    "psychological disorder",
    "family violence and discord",
    "impulsivity",
    "other important SRFs",
    "accessory",
];

pub const OTHER_IMPORTANT_SRFS: &str = "other important SRFs";
pub const ACCESSORY: &str = "accessory";

pub fn taxonomy_index(name: &str) -> Option<usize> {
    SRF_TAXONOMY.iter().position(|s| s.eq_ignore_ascii_case(name))
}

/// A category of weighted terms. Seeds carry weight 1; walk-derived terms
/// carry their normalized visit frequency in (0, 1].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Lexicon {
    pub name: String,
    /// category -> term -> weight
    pub categories: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LexiconLine {
    category: String,
    term: String,
    #[serde(default)]
    weight: Option<f64>,
}

impl Lexicon {
    pub fn new(name: impl Into<String>) -> Self {
        Lexicon {
            name: name.into(),
            categories: BTreeMap::new(),
        }
    }

    /// Build from (category, [terms]) pairs with weight 1.
    pub fn from_categories<I, T>(name: &str, cats: I) -> Self
    where
        I: IntoIterator<Item = (T, Vec<T>)>,
        T: Into<String>,
    {
        let mut lex = Lexicon::new(name);
        for (cat, terms) in cats {
            let cat = cat.into();
            for t in terms {
                lex.add_term(&cat, &t.into(), 1.0);
            }
        }
        lex
    }

    /// Terms are lowercased and whitespace-normalized; re-adding keeps the
    /// larger weight so seeds never lose their weight-1 status.
    pub fn add_term(&mut self, category: &str, term: &str, weight: f64) {
        let norm = text::normalize_phrase(term);
        if norm.is_empty() {
            self.categories.entry(category.to_string()).or_default();
            return;
        }
        let entry = self
            .categories
            .entry(category.to_string())
            .or_default()
            .entry(norm)
            .or_insert(weight);
        if weight > *entry {
            *entry = weight;
        }
    }

    pub fn terms(&self, category: &str) -> impl Iterator<Item = (&str, f64)> {
        self.categories
            .get(category)
            .into_iter()
            .flat_map(|m| m.iter().map(|(t, w)| (t.as_str(), *w)))
    }

    pub fn all_terms(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.categories
            .iter()
            .flat_map(|(c, m)| m.iter().map(move |(t, w)| (c.as_str(), t.as_str(), *w)))
    }

    pub fn term_count(&self) -> usize {
        self.categories.values().map(|m| m.len()).sum()
    }

    /// Phrase set over every term, payload = (category, term).
    pub fn phrase_set(&self) -> PhraseSet<(String, String)> {
        let mut set = PhraseSet::new();
        for (cat, term, _w) in self.all_terms() {
            set.insert(term, (cat.to_string(), term.to_string()));
        }
        set
    }
}

/// Load a lexicon from line-delimited JSON with keys `category`, `term`,
/// optional `weight`. Terms are lowercased and deduplicated; an empty term
/// registers the category with a warning.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = std::io::BufReader::new(file);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".to_string());
    let mut lex = Lexicon::new(name);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LexiconLine = serde_json::from_str(&line)
            .map_err(|e| Error::format(&display, lineno + 1, e.to_string()))?;
        if let Some(w) = rec.weight {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::format(
                    &display,
                    lineno + 1,
                    format!("weight {w} outside (0, 1]"),
                ));
            }
        }
        if text::normalize_phrase(&rec.term).is_empty() {
            log::warn!("{display}:{}: empty term, category '{}' retained", lineno + 1, rec.category);
        }
        lex.add_term(&rec.category, &rec.term, rec.weight.unwrap_or(1.0));
    }
    Ok(lex)
}

pub fn write_lexicon(lex: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    let display = path.as_ref().display().to_string();
    let mut out = String::new();
    for (cat, term, weight) in lex.all_terms() {
        let line = serde_json::to_string(&LexiconLine {
            category: cat.to_string(),
            term: term.to_string(),
            weight: Some(weight),
        })
        .expect("lexicon line serializes");
        out.push_str(&line);
        out.push('\n');
    }
    std::fs::write(path.as_ref(), out).map_err(|e| Error::io(&display, e))
}

/// Match lexicon terms in a text. Longest-phrase-first greedy; each token
/// span is consumed by at most one match. Returns category -> matched terms.
pub fn match_terms(text_input: &str, lex: &Lexicon) -> BTreeMap<String, Vec<String>> {
    let tokens = text::tokenize(text_input);
    let set = lex.phrase_set();
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (_start, _len, (cat, term)) in set.scan(&tokens) {
        out.entry(cat).or_default().push(term);
    }
    out
}

// ---------------------------------------------------------------------------
// Concept graph + guided random walk expansion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeType {
    IsA,
    ChildOf,
    AssociatedWith,
}

impl EdgeType {
    fn parse(s: &str) -> Option<EdgeType> {
        match s.trim().to_ascii_lowercase().as_str() {
            "is-a" | "isa" => Some(EdgeType::IsA),
            "child-of" | "childof" => Some(EdgeType::ChildOf),
            "associated-with" | "associatedwith" => Some(EdgeType::AssociatedWith),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConceptGraph {
    /// node id -> index
    ids: BTreeMap<String, usize>,
    /// normalized surface label per node
    labels: Vec<String>,
    /// adjacency: node -> (dst, edge type)
    adj: Vec<Vec<(usize, EdgeType)>>,
}

impl ConceptGraph {
    pub fn new() -> Self {
        ConceptGraph {
            ids: BTreeMap::new(),
            labels: Vec::new(),
            adj: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    fn intern(&mut self, id: &str, label: &str) -> Result<usize> {
        let norm = text::normalize_phrase(label);
        if norm.is_empty() {
            return Err(Error::Domain(format!("node {id} has an empty label")));
        }
        if let Some(&idx) = self.ids.get(id) {
            return Ok(idx);
        }
        let idx = self.labels.len();
        self.ids.insert(id.to_string(), idx);
        self.labels.push(norm);
        self.adj.push(Vec::new());
        Ok(idx)
    }

    pub fn add_edge(
        &mut self,
        src_id: &str,
        dst_id: &str,
        edge_type: EdgeType,
        src_label: &str,
        dst_label: &str,
    ) -> Result<()> {
        if src_id == dst_id {
            return Err(Error::Domain(format!("self-loop on node {src_id}")));
        }
        let s = self.intern(src_id, src_label)?;
        let d = self.intern(dst_id, dst_label)?;
        self.adj[s].push((d, edge_type));
        Ok(())
    }

    /// Nodes whose normalized label equals the normalized term.
    pub fn resolve_label(&self, term: &str) -> Vec<usize> {
        let norm = text::normalize_phrase(term);
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == norm)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }
}

impl Default for ConceptGraph {
    fn default() -> Self {
        Self::new()
    }
}

/// Load a concept graph from tab-separated
/// `src_id  dst_id  edge_type  src_label  dst_label` rows.
pub fn load_concept_graph(path: impl AsRef<Path>) -> Result<ConceptGraph> {
    let display = path.as_ref().display().to_string();
    let content = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&display, e))?;
    let mut graph = ConceptGraph::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::format(
                &display,
                lineno + 1,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let etype = EdgeType::parse(fields[2]).ok_or_else(|| {
            Error::format(&display, lineno + 1, format!("unknown edge type '{}'", fields[2]))
        })?;
        graph
            .add_edge(fields[0], fields[1], etype, fields[3], fields[4])
            .map_err(|e| Error::format(&display, lineno + 1, e.to_string()))?;
    }
    Ok(graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkBackend {
    /// Exact stationary distribution by power iteration; fully deterministic.
    Exact,
    /// Monte Carlo walk with a seeded RNG.
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkConfig {
    pub restart_prob: f64,
    pub steps: usize,
    pub min_visit_weight: f64,
    pub backend: WalkBackend,
    pub rng_seed: u64,
    /// Edge-type traversal weights; hierarchy hops count full, associations half.
    pub is_a_weight: f64,
    pub child_of_weight: f64,
    pub associated_with_weight: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            restart_prob: 0.15,
            steps: 10_000,
            min_visit_weight: 0.05,
            backend: WalkBackend::Exact,
            rng_seed: 0,
            is_a_weight: 1.0,
            child_of_weight: 1.0,
            associated_with_weight: 0.5,
        }
    }
}

impl WalkConfig {
    fn edge_weight(&self, t: EdgeType) -> f64 {
        match t {
            EdgeType::IsA => self.is_a_weight,
            EdgeType::ChildOf => self.child_of_weight,
            EdgeType::AssociatedWith => self.associated_with_weight,
        }
    }
}

/// Expand each category over the concept graph by random walk with restart
/// from the category's resolved seed nodes. Labels of nodes whose normalized
/// visit frequency reaches `min_visit_weight` join the category; seeds stay
/// at weight 1.
pub fn expand_by_guided_walk(
    lex: &Lexicon,
    graph: &ConceptGraph,
    cfg: &WalkConfig,
) -> Result<Lexicon> {
    if graph.node_count() == 0 {
        return Err(Error::Config("concept graph is empty".into()));
    }
    if !(cfg.restart_prob > 0.0 && cfg.restart_prob < 1.0) {
        return Err(Error::Config(format!(
            "restart_prob {} outside (0, 1)",
            cfg.restart_prob
        )));
    }
    if cfg.steps < 1 {
        return Err(Error::Config("steps must be >= 1".into()));
    }

    let mut expanded = lex.clone();
    for (cat, terms) in &lex.categories {
        let mut seeds: BTreeSet<usize> = BTreeSet::new();
        for term in terms.keys() {
            let resolved = graph.resolve_label(term);
            if resolved.is_empty() {
                log::warn!("seed '{term}' in category '{cat}' resolves to no graph node");
            }
            seeds.extend(resolved);
        }
        if seeds.is_empty() {
            continue;
        }
        let seeds: Vec<usize> = seeds.into_iter().collect();
        let freq = match cfg.backend {
            WalkBackend::Exact => rwr_power_iteration(graph, &seeds, cfg),
            WalkBackend::Sampled => rwr_sampled(graph, &seeds, cfg),
        };
        let max = freq.iter().cloned().fold(0.0_f64, f64::max);
        if max <= 0.0 {
            continue;
        }
        for (idx, f) in freq.iter().enumerate() {
            let norm = f / max;
            if norm >= cfg.min_visit_weight {
                expanded.add_term(cat, graph.label(idx), norm.min(1.0));
            }
        }
        // seed terms always retained at weight 1
        for term in terms.keys() {
            expanded.add_term(cat, term, 1.0);
        }
    }
    Ok(expanded)
}

fn transition_weights(graph: &ConceptGraph, cfg: &WalkConfig, node: usize) -> Vec<(usize, f64)> {
    graph.adj[node]
        .iter()
        .map(|&(dst, t)| (dst, cfg.edge_weight(t)))
        .filter(|&(_, w)| w > 0.0)
        .collect()
}

fn rwr_power_iteration(graph: &ConceptGraph, seeds: &[usize], cfg: &WalkConfig) -> Vec<f64> {
    let n = graph.node_count();
    let r = cfg.restart_prob;
    let mut restart = vec![0.0; n];
    for &s in seeds {
        restart[s] = 1.0 / seeds.len() as f64;
    }
    let mut p = restart.clone();
    for _ in 0..cfg.steps.min(10_000) {
        let mut next = vec![0.0; n];
        for (u, pu) in p.iter().enumerate() {
            if *pu == 0.0 {
                continue;
            }
            let out = transition_weights(graph, cfg, u);
            let total: f64 = out.iter().map(|&(_, w)| w).sum();
            if total > 0.0 {
                for (dst, w) in out {
                    next[dst] += (1.0 - r) * pu * w / total;
                }
            } else {
                // dangling node: all mass teleports back to the seeds
                for (i, rv) in restart.iter().enumerate() {
                    next[i] += (1.0 - r) * pu * rv;
                }
            }
        }
        for (i, rv) in restart.iter().enumerate() {
            next[i] += r * rv;
        }
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if delta < 1e-14 {
            break;
        }
    }
    p
}

fn rwr_sampled(graph: &ConceptGraph, seeds: &[usize], cfg: &WalkConfig) -> Vec<f64> {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut visits = vec![0.0_f64; n];
    let mut current = seeds[rng.gen_range(0..seeds.len())];
    for _ in 0..cfg.steps {
        visits[current] += 1.0;
        if rng.gen::<f64>() < cfg.restart_prob {
            current = seeds[rng.gen_range(0..seeds.len())];
            continue;
        }
        let out = transition_weights(graph, cfg, current);
        let total: f64 = out.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            current = seeds[rng.gen_range(0..seeds.len())];
            continue;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = out[out.len() - 1].0;
        for (dst, w) in out {
            if pick < w {
                chosen = dst;
                break;
            }
            pick -= w;
        }
        current = chosen;
    }
    visits
}

/// The five C-SSRS-derived severity category names (lowercased).
pub const SEVERITY_CATEGORIES: [&str; 5] =
    ["supportive", "indicator", "ideation", "behavior", "attempt"];

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_graph() -> ConceptGraph {
        // OCD -> Disturbance-in-Thinking -> Intrusive-Thoughts (child-of chain)
        let mut g = ConceptGraph::new();
        g.add_edge(
            "1376001",
            "26628009",
            EdgeType::ChildOf,
            "obsessive-compulsive disorder",
            "disturbance in thinking",
        )
        .unwrap();
        g.add_edge(
            "26628009",
            "225445003",
            EdgeType::ChildOf,
            "disturbance in thinking",
            "intrusive thoughts",
        )
        .unwrap();
        g
    }

    #[test]
    fn load_dedups_terms() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.jsonl");
        std::fs::write(
            &path,
            concat!(
                "{\"category\":\"self harm\",\"term\":\"cuts\"}\n",
                "{\"category\":\"self harm\",\"term\":\"Cuts\"}\n",
                "{\"category\":\"self harm\",\"term\":\"hurt\"}\n",
                "{\"category\":\"self harm\",\"term\":\"pills\"}\n",
                "{\"category\":\"self harm\",\"term\":\"overdose\"}\n",
                "{\"category\":\"self harm\",\"term\":\"tear\"}\n",
                "{\"category\":\"self harm\",\"term\":\"knife\"}\n",
            ),
        )
        .unwrap();
        let lex = load_lexicon(&path).unwrap();
        assert_eq!(lex.categories["self harm"].len(), 6);
    }

    #[test]
    fn load_keeps_five_depressive_terms() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.jsonl");
        let mut body = String::new();
        for t in ["thoughts", "emotions", "ranting", "hopeless", "ocd"] {
            body.push_str(&format!("{{\"category\":\"depressive feelings\",\"term\":\"{t}\"}}\n"));
        }
        std::fs::write(&path, body).unwrap();
        let lex = load_lexicon(&path).unwrap();
        assert_eq!(lex.categories["depressive feelings"].len(), 5);
    }

    #[test]
    fn walk_reaches_chain_descendants() {
        let lex = Lexicon::from_categories(
            "srf",
            vec![("suicide ideation", vec!["obsessive-compulsive disorder"])],
        );
        let cfg = WalkConfig {
            min_visit_weight: 0.01,
            ..WalkConfig::default()
        };
        let out = expand_by_guided_walk(&lex, &chain_graph(), &cfg).unwrap();
        assert!(out.categories["suicide ideation"].contains_key("intrusive thoughts"));
        // seed retained at weight 1
        assert_eq!(
            out.categories["suicide ideation"]["obsessive compulsive disorder"],
            1.0
        );
    }

    #[test]
    fn unresolved_seeds_leave_lexicon_unchanged() {
        let lex = Lexicon::from_categories("srf", vec![("x", vec!["nonexistent concept"])]);
        let out = expand_by_guided_walk(&lex, &chain_graph(), &WalkConfig::default()).unwrap();
        assert_eq!(out.categories["x"].len(), lex.categories["x"].len());
    }

    #[test]
    fn empty_graph_is_config_error() {
        let lex = Lexicon::from_categories("srf", vec![("x", vec!["a"])]);
        let err = expand_by_guided_walk(&lex, &ConceptGraph::new(), &WalkConfig::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn match_terms_longest_first() {
        let lex = Lexicon::from_categories(
            "srf",
            vec![
                ("psychological disorder", vec!["borderline personality disorder", "personality disorder"]),
            ],
        );
        let hits = match_terms("she has borderline personality disorder", &lex);
        assert_eq!(
            hits["psychological disorder"],
            vec!["borderline personality disorder"]
        );
    }

    #[test]
    fn match_terms_empty_text() {
        let lex = Lexicon::from_categories("srf", vec![("a", vec!["x"])]);
        assert!(match_terms("", &lex).is_empty());
    }

    #[test]
    fn taxonomy_has_14_entries() {
        assert_eq!(SRF_TAXONOMY.len(), 14);
        assert_eq!(taxonomy_index("gun ownership"), Some(8));
    }
}
