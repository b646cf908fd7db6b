//! Word-vector loading, lexicon-graph retrofitting, and document vectors
//! by mean pooling.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::text::{self, PhraseSet};

pub const SUPPORTED_DIMENSIONS: [usize; 4] = [50, 100, 200, 300];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingStore {
    pub dimension: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Self {
        EmbeddingStore {
            dimension,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::Domain(format!(
                "vector for '{token}' has dimension {}, store is {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite component in '{token}'")));
        }
        self.vectors.insert(token.to_lowercase(), vector);
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&Vec<f64>> {
        self.vectors.get(token)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Load whitespace-delimited `token v1 ... vd` rows; an optional
/// `<count> <dim>` header line is accepted. Dimension is inferred from the
/// first data row.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let display = path.as_ref().display().to_string();
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(&display, e))?;
    let reader = std::io::BufReader::new(file);
    let mut store: Option<EmbeddingStore> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        // header: exactly two integer fields on the first line
        if store.is_none()
            && fields.len() == 2
            && fields.iter().all(|f| f.parse::<usize>().is_ok())
        {
            continue;
        }
        if fields.len() < 2 {
            return Err(Error::format(&display, lineno + 1, "row with no vector values"));
        }
        let token = fields[0];
        let mut vector = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            let v: f64 = f.parse().map_err(|_| {
                Error::format(&display, lineno + 1, format!("unparseable value '{f}'"))
            })?;
            if !v.is_finite() {
                return Err(Error::format(&display, lineno + 1, format!("non-finite value '{f}'")));
            }
            vector.push(v);
        }
        let store = store.get_or_insert_with(|| EmbeddingStore::new(vector.len()));
        if vector.len() != store.dimension {
            return Err(Error::format(
                &display,
                lineno + 1,
                format!("row dimension {} != store dimension {}", vector.len(), store.dimension),
            ));
        }
        let key = token.to_lowercase();
        if store.vectors.contains_key(&key) {
            log::warn!("{display}:{}: duplicate token '{token}', last occurrence wins", lineno + 1);
        }
        store.vectors.insert(key, vector);
    }
    store.ok_or_else(|| Error::format(&display, 0, "no vector rows"))
}

pub fn write_embeddings(store: &EmbeddingStore, path: impl AsRef<Path>) -> Result<()> {
    let display = path.as_ref().display().to_string();
    let file = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(&display, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{} {}", store.len(), store.dimension).map_err(|e| Error::io(&display, e))?;
    for (token, vec) in &store.vectors {
        write!(w, "{token}").map_err(|e| Error::io(&display, e))?;
        for v in vec {
            write!(w, " {v}").map_err(|e| Error::io(&display, e))?;
        }
        writeln!(w).map_err(|e| Error::io(&display, e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMode {
    InverseDegree,
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrofitConfig {
    /// Anchor strength toward the original vector.
    pub alpha: f64,
    pub iterations: usize,
    pub beta_mode: BetaMode,
    /// Also connect every within-category term pair directly.
    pub term_term_edges: bool,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            alpha: 1.0,
            iterations: 10,
            beta_mode: BetaMode::InverseDegree,
            term_term_edges: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrofitOutcome {
    pub store: EmbeddingStore,
    /// Per-category anchor vectors after retrofitting.
    pub anchors: BTreeMap<String, Vec<f64>>,
    /// Quadratic objective after initialization and after each iteration.
    pub objective_trace: Vec<f64>,
}

/// Map a lexicon term to its vocabulary key: single words directly,
/// multi-word terms to their underscore-joined entry when present.
pub fn vocab_key(term: &str, store: &EmbeddingStore) -> Option<String> {
    let joined = term.split_whitespace().collect::<Vec<_>>().join("_");
    if store.vectors.contains_key(&joined) {
        Some(joined)
    } else {
        None
    }
}

struct LexGraph {
    /// node tokens: store vocabulary keys plus one synthetic anchor per category
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    adj: Vec<Vec<usize>>,
    /// initial vector per node (original embedding, or seed mean for anchors)
    init: Vec<Vec<f64>>,
    /// anchor node index per category
    anchors: BTreeMap<String, usize>,
}

fn anchor_key(category: &str) -> String {
    format!("__anchor__:{category}")
}

fn build_lex_graph(store: &EmbeddingStore, lex: &Lexicon, cfg: &RetrofitConfig) -> LexGraph {
    let mut g = LexGraph {
        nodes: Vec::new(),
        index: BTreeMap::new(),
        adj: Vec::new(),
        init: Vec::new(),
        anchors: BTreeMap::new(),
    };
    let node_of = |g: &mut LexGraph, key: &str, init: Vec<f64>| -> usize {
        if let Some(&i) = g.index.get(key) {
            return i;
        }
        let i = g.nodes.len();
        g.nodes.push(key.to_string());
        g.index.insert(key.to_string(), i);
        g.adj.push(Vec::new());
        g.init.push(init);
        i
    };
    for (cat, terms) in &lex.categories {
        let keys: Vec<String> = terms
            .keys()
            .filter_map(|t| vocab_key(t, store))
            .collect();
        if keys.is_empty() {
            continue;
        }
        // anchor initialized to the seed-term mean
        let mut mean = vec![0.0; store.dimension];
        for k in &keys {
            for (m, v) in mean.iter_mut().zip(&store.vectors[k]) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= keys.len() as f64;
        }
        let a = node_of(&mut g, &anchor_key(cat), mean);
        g.anchors.insert(cat.clone(), a);
        let mut term_nodes = Vec::with_capacity(keys.len());
        for k in &keys {
            let t = node_of(&mut g, k, store.vectors[k].clone());
            term_nodes.push(t);
            if !g.adj[a].contains(&t) {
                g.adj[a].push(t);
                g.adj[t].push(a);
            }
        }
        if cfg.term_term_edges {
            for i in 0..term_nodes.len() {
                for j in i + 1..term_nodes.len() {
                    let (x, y) = (term_nodes[i], term_nodes[j]);
                    if !g.adj[x].contains(&y) {
                        g.adj[x].push(y);
                        g.adj[y].push(x);
                    }
                }
            }
        }
    }
    g
}

/// Symmetric edge weight; symmetry keeps the Jacobi iteration a descent
/// step on the quadratic objective.
fn edge_weight(cfg: &RetrofitConfig, deg_i: usize, deg_j: usize) -> f64 {
    match cfg.beta_mode {
        BetaMode::InverseDegree => 0.5 * (1.0 / deg_i as f64 + 1.0 / deg_j as f64),
        BetaMode::Uniform => 1.0,
    }
}

fn objective(g: &LexGraph, q: &[Vec<f64>], cfg: &RetrofitConfig) -> f64 {
    let mut obj = 0.0;
    for (i, qi) in q.iter().enumerate() {
        let d2: f64 = qi
            .iter()
            .zip(&g.init[i])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        obj += cfg.alpha * d2;
        for &j in &g.adj[i] {
            let w = edge_weight(cfg, g.adj[i].len(), g.adj[j].len());
            let e2: f64 = qi
                .iter()
                .zip(&q[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            obj += 0.5 * w * e2; // each undirected edge visited from both ends
        }
    }
    obj
}

/// Retrofit embeddings toward the lexicon graph with the iterative
/// closed-form update q_i <- (alpha q̂_i + sum_j beta_ij q_j) / (alpha + sum_j beta_ij).
/// Updates are Jacobi-style from the previous iterate. Tokens with no
/// lexicon edges pass through unchanged.
pub fn retrofit(store: &EmbeddingStore, lex: &Lexicon, cfg: &RetrofitConfig) -> RetrofitOutcome {
    let g = build_lex_graph(store, lex, cfg);
    let mut q: Vec<Vec<f64>> = g.init.clone();
    let mut trace = vec![objective(&g, &q, cfg)];
    for _ in 0..cfg.iterations {
        let mut next = q.clone();
        for i in 0..g.nodes.len() {
            if g.adj[i].is_empty() {
                continue;
            }
            let weights: Vec<f64> = g.adj[i]
                .iter()
                .map(|&j| edge_weight(cfg, g.adj[i].len(), g.adj[j].len()))
                .collect();
            let denom = cfg.alpha + weights.iter().sum::<f64>();
            for (d, slot) in next[i].iter_mut().enumerate() {
                let mut num = cfg.alpha * g.init[i][d];
                for (&j, w) in g.adj[i].iter().zip(&weights) {
                    num += w * q[j][d];
                }
                *slot = num / denom;
            }
        }
        q = next;
        trace.push(objective(&g, &q, cfg));
    }

    let mut out = store.clone();
    let mut anchors = BTreeMap::new();
    for (key, &i) in &g.index {
        if key.starts_with("__anchor__:") {
            continue;
        }
        out.vectors.insert(key.clone(), q[i].clone());
    }
    for (cat, &i) in &g.anchors {
        anchors.insert(cat.clone(), q[i].clone());
    }
    RetrofitOutcome {
        store: out,
        anchors,
        objective_trace: trace,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentVector {
    pub doc_id: String,
    pub vector: Vec<f64>,
    pub token_count: usize,
}

impl DocumentVector {
    /// Exact-cancellation vectors are excluded from clustering.
    pub fn is_degenerate(&self) -> bool {
        norm(&self.vector) < 1e-12
    }
}

/// Mean-pool a document: tokenize, drop stopwords and OOV tokens, greedily
/// merge multi-word lexicon phrases onto their underscore-joined vocabulary
/// entries when present.
pub fn embed_document(
    doc: &Document,
    store: &EmbeddingStore,
    stopwords: &Lexicon,
    phrases: Option<&Lexicon>,
) -> Result<DocumentVector> {
    let tokens = text::tokenize(&doc.text);
    // phrase merge: multi-word lexicon terms whose underscore-joined entry is in vocabulary
    let mut phrase_set: PhraseSet<String> = PhraseSet::new();
    if let Some(lex) = phrases {
        for (_c, term, _w) in lex.all_terms() {
            if term.contains(' ') {
                if let Some(key) = vocab_key(term, store) {
                    phrase_set.insert(term, key);
                }
            }
        }
    }
    let stop = stopwords.phrase_set();
    let mut keys: Vec<String> = Vec::new();
    let mut consumed = vec![false; tokens.len()];
    for (start, len, key) in phrase_set.scan(&tokens) {
        keys.push(key);
        for c in consumed.iter_mut().skip(start).take(len) {
            *c = true;
        }
    }
    for (i, tok) in tokens.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        if stop.matches_any(std::slice::from_ref(tok)) {
            continue;
        }
        if store.vectors.contains_key(tok) {
            keys.push(tok.clone());
        }
    }
    if keys.is_empty() {
        return Err(Error::Unembeddable {
            doc_id: doc.id.clone(),
        });
    }
    keys.sort(); // permutation invariance and deterministic summation
    let mut vector = vec![0.0; store.dimension];
    for k in &keys {
        for (s, v) in vector.iter_mut().zip(&store.vectors[*&k]) {
            *s += v;
        }
    }
    for s in vector.iter_mut() {
        *s /= keys.len() as f64;
    }
    Ok(DocumentVector {
        doc_id: doc.id.clone(),
        vector,
        token_count: keys.len(),
    })
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard cosine similarity; zero vectors are a domain error.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!(
            "cosine on mismatched dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("cosine of zero vector".into()));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}
