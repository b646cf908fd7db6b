//! Flat key = value pipeline configuration with flag overrides (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use srf_core::clustering::Metric;
use srf_core::lexicon::{WalkBackend, WalkConfig};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    // inputs
    pub social_corpus: PathBuf,
    pub clinical_corpus: PathBuf,
    pub srf_lexicon: PathBuf,
    pub exclusion_lexicon: PathBuf,
    pub severity_lexicon: PathBuf,
    pub stopword_lexicon: Option<PathBuf>,
    pub concept_graph: Option<PathBuf>,
    pub vectors: PathBuf,
    pub annotations: Option<PathBuf>,
    pub out: PathBuf,
    // thresholds
    pub sim_threshold: f64,
    pub community_threshold: f64,
    pub label_margin: f64,
    pub label_floor: f64,
    pub agreement_threshold: f64,
    pub clamp_sr: bool,
    pub anchor_community: String,
    // clustering
    pub min_pts: usize,
    pub max_eps: f64,
    pub metric: Metric,
    pub target_min_clusters: usize,
    // retrofitting
    pub retrofit_alpha: f64,
    pub retrofit_iterations: usize,
    // lexicon expansion
    pub walk_restart: f64,
    pub walk_steps: usize,
    pub walk_min_visit_weight: f64,
    pub walk_backend: WalkBackend,
    // reproducibility
    pub seed: u64,
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            social_corpus: PathBuf::new(),
            clinical_corpus: PathBuf::new(),
            srf_lexicon: PathBuf::new(),
            exclusion_lexicon: PathBuf::new(),
            severity_lexicon: PathBuf::new(),
            stopword_lexicon: None,
            concept_graph: None,
            vectors: PathBuf::new(),
            annotations: None,
            out: PathBuf::from("out"),
            sim_threshold: 0.9,
            community_threshold: 0.40,
            label_margin: 0.05,
            label_floor: 0.0,
            agreement_threshold: 0.6,
            clamp_sr: false,
            anchor_community: "suicidewatch".into(),
            min_pts: 5,
            max_eps: f64::INFINITY,
            metric: Metric::CosineDistance,
            target_min_clusters: 12,
            retrofit_alpha: 1.0,
            retrofit_iterations: 10,
            walk_restart: 0.15,
            walk_steps: 10_000,
            walk_min_visit_weight: 0.05,
            walk_backend: WalkBackend::Exact,
            seed: 0,
            threads: 1,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::validation(format!("{key}: expected a boolean, got '{v}'"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::validation(format!("{key}: cannot parse '{v}'")))
}

impl PipelineConfig {
    /// Apply one key = value setting. Unknown keys are rejected so typos
    /// cannot silently fall back to defaults.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "social_corpus" => self.social_corpus = v.into(),
            "clinical_corpus" => self.clinical_corpus = v.into(),
            "srf_lexicon" => self.srf_lexicon = v.into(),
            "exclusion_lexicon" => self.exclusion_lexicon = v.into(),
            "severity_lexicon" => self.severity_lexicon = v.into(),
            "stopword_lexicon" => self.stopword_lexicon = Some(v.into()),
            "concept_graph" => self.concept_graph = Some(v.into()),
            "vectors" => self.vectors = v.into(),
            "annotations" => self.annotations = Some(v.into()),
            "out" => self.out = v.into(),
            "sim_threshold" => self.sim_threshold = parse_num(key, v)?,
            "community_threshold" => self.community_threshold = parse_num(key, v)?,
            "label_margin" => self.label_margin = parse_num(key, v)?,
            "label_floor" => self.label_floor = parse_num(key, v)?,
            "agreement_threshold" => self.agreement_threshold = parse_num(key, v)?,
            "clamp_sr" => self.clamp_sr = parse_bool(key, v)?,
            "anchor_community" => self.anchor_community = v.to_string(),
            "min_pts" => self.min_pts = parse_num(key, v)?,
            "max_eps" => {
                self.max_eps = if v == "inf" || v == "infinite" {
                    f64::INFINITY
                } else {
                    parse_num(key, v)?
                }
            }
            "metric" => {
                self.metric = match v {
                    "cosine-distance" => Metric::CosineDistance,
                    "euclidean" => Metric::Euclidean,
                    _ => {
                        return Err(CliError::validation(format!(
                            "metric: expected 'cosine-distance' or 'euclidean', got '{v}'"
                        )))
                    }
                }
            }
            "target_min_clusters" => self.target_min_clusters = parse_num(key, v)?,
            "retrofit_alpha" => self.retrofit_alpha = parse_num(key, v)?,
            "retrofit_iterations" => self.retrofit_iterations = parse_num(key, v)?,
            "walk_restart" => self.walk_restart = parse_num(key, v)?,
            "walk_steps" => self.walk_steps = parse_num(key, v)?,
            "walk_min_visit_weight" => self.walk_min_visit_weight = parse_num(key, v)?,
            "walk_backend" => {
                self.walk_backend = match v {
                    "exact" => WalkBackend::Exact,
                    "sampled" => WalkBackend::Sampled,
                    _ => {
                        return Err(CliError::validation(format!(
                            "walk_backend: expected 'exact' or 'sampled', got '{v}'"
                        )))
                    }
                }
            }
            "seed" => self.seed = parse_num(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            _ => return Err(CliError::validation(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let content = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = PipelineConfig::default();
        for (lineno, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    /// Reject invalid threshold domains before any stage runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let checks: [(&str, bool); 8] = [
            ("sim_threshold must be in (-1, 1)", self.sim_threshold > -1.0 && self.sim_threshold < 1.0),
            ("community_threshold must be >= 0", self.community_threshold >= 0.0),
            ("label_margin must be in [0, 1)", (0.0..1.0).contains(&self.label_margin)),
            ("label_floor must be in (-1, 1)", self.label_floor > -1.0 && self.label_floor < 1.0),
            ("agreement_threshold must be in (0, 1]", self.agreement_threshold > 0.0 && self.agreement_threshold <= 1.0),
            ("min_pts must be >= 2", self.min_pts >= 2),
            ("max_eps must be > 0", self.max_eps > 0.0),
            ("walk_restart must be in (0, 1)", self.walk_restart > 0.0 && self.walk_restart < 1.0),
        ];
        for (msg, ok) in checks {
            if !ok {
                return Err(CliError::validation(msg));
            }
        }
        if self.retrofit_alpha <= 0.0 {
            return Err(CliError::validation("retrofit_alpha must be > 0"));
        }
        if self.threads == 0 {
            return Err(CliError::validation("threads must be >= 1"));
        }
        Ok(())
    }

    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            restart_prob: self.walk_restart,
            steps: self.walk_steps,
            min_visit_weight: self.walk_min_visit_weight,
            backend: self.walk_backend,
            rng_seed: self.seed,
            ..WalkConfig::default()
        }
    }

    /// Snapshot for the manifest. The output directory is deliberately
    /// excluded: the same run in two different directories must produce
    /// identical manifests.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let p = |b: &PathBuf| b.display().to_string();
        m.insert("social_corpus".into(), p(&self.social_corpus));
        m.insert("clinical_corpus".into(), p(&self.clinical_corpus));
        m.insert("srf_lexicon".into(), p(&self.srf_lexicon));
        m.insert("exclusion_lexicon".into(), p(&self.exclusion_lexicon));
        m.insert("severity_lexicon".into(), p(&self.severity_lexicon));
        if let Some(s) = &self.stopword_lexicon {
            m.insert("stopword_lexicon".into(), p(s));
        }
        if let Some(g) = &self.concept_graph {
            m.insert("concept_graph".into(), p(g));
        }
        m.insert("vectors".into(), p(&self.vectors));
        if let Some(a) = &self.annotations {
            m.insert("annotations".into(), p(a));
        }
        m.insert("sim_threshold".into(), self.sim_threshold.to_string());
        m.insert("community_threshold".into(), self.community_threshold.to_string());
        m.insert("label_margin".into(), self.label_margin.to_string());
        m.insert("label_floor".into(), self.label_floor.to_string());
        m.insert("agreement_threshold".into(), self.agreement_threshold.to_string());
        m.insert("clamp_sr".into(), self.clamp_sr.to_string());
        m.insert("anchor_community".into(), self.anchor_community.clone());
        m.insert("min_pts".into(), self.min_pts.to_string());
        m.insert("max_eps".into(), self.max_eps.to_string());
        m.insert(
            "metric".into(),
            match self.metric {
                Metric::CosineDistance => "cosine-distance".into(),
                Metric::Euclidean => "euclidean".into(),
            },
        );
        m.insert("target_min_clusters".into(), self.target_min_clusters.to_string());
        m.insert("retrofit_alpha".into(), self.retrofit_alpha.to_string());
        m.insert("retrofit_iterations".into(), self.retrofit_iterations.to_string());
        m.insert("walk_restart".into(), self.walk_restart.to_string());
        m.insert("walk_steps".into(), self.walk_steps.to_string());
        m.insert("walk_min_visit_weight".into(), self.walk_min_visit_weight.to_string());
        m.insert(
            "walk_backend".into(),
            match self.walk_backend {
                WalkBackend::Exact => "exact".into(),
                WalkBackend::Sampled => "sampled".into(),
            },
        );
        m.insert("seed".into(), self.seed.to_string());
        m.insert("threads".into(), self.threads.to_string());
        m
    }
}
