//! Pipeline stages. Each stage reads its declared inputs (original files or
//! upstream artifacts), writes its artifacts under `<out>/<stage>/`, and
//! records checksums in the run manifest. Stages never mutate upstream
//! artifacts and are restartable from any completed prior artifact.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use srf_core::clustering::{extract_clusters, optics_order, ClusterResult};
use srf_core::corpus::{
    apply_exclusion_filter, apply_negation_conjunction_filter, apply_severity_filter, ingest,
    Corpus, FilterReport, Source,
};
use srf_core::embedding::{
    embed_document, load_embeddings, retrofit, write_embeddings, DocumentVector,
    RetrofitConfig,
};
use srf_core::labeling::{
    accessory_override, compare_platforms, label_clusters, srf_cooccurrence, srf_frequency,
    srf_vectors, LabeledCluster, ACCESSORY_KEYWORDS,
};
use srf_core::lexicon::{expand_by_guided_walk, load_concept_graph, load_lexicon, write_lexicon, Lexicon};
use srf_core::relatedness::{build_sr_matrix, select_communities, SrMatrix, UserPostIndex};

use crate::config::PipelineConfig;
use crate::manifest::RunManifest;
use crate::CliError;

pub const STAGE_ORDER: [&str; 11] = [
    "ingest", "filter", "lexicon-expand", "retrofit", "embed", "relate", "select", "cluster",
    "label", "compare", "agree",
];

fn stage_dir(cfg: &PipelineConfig, stage: &str) -> Result<PathBuf, CliError> {
    let dir = cfg.out.join(stage);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, body + "\n")
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))
}

fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body)
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))
}

/// Read an upstream artifact; a missing file names the stage that produces it.
fn read_artifact<T: DeserializeOwned>(
    cfg: &PipelineConfig,
    relative: &str,
    producer: &str,
) -> Result<T, CliError> {
    let path = cfg.out.join(relative);
    let content = std::fs::read_to_string(&path).map_err(|_| {
        CliError::validation(format!(
            "missing artifact {}: run the `{producer}` stage first",
            path.display()
        ))
    })?;
    serde_json::from_str(&content)
        .map_err(|e| CliError::runtime(format!("parsing {}: {e}", path.display())))
}

fn load_stopwords(cfg: &PipelineConfig) -> Result<Lexicon, CliError> {
    match &cfg.stopword_lexicon {
        Some(path) => Ok(load_lexicon(path)?),
        None => Ok(Lexicon::new("stopwords")),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------

pub fn run_ingest(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "ingest")?;
    let mut outputs = Vec::new();
    for (name, path, source) in [
        ("social", &cfg.social_corpus, Source::Social),
        ("clinical", &cfg.clinical_corpus, Source::Clinical),
    ] {
        let (corpus, rejects) = ingest(path, source)?;
        let corpus_path = dir.join(format!("{name}.json"));
        write_json(&corpus_path, &corpus)?;
        let rejects_path = dir.join(format!("{name}_rejects.jsonl"));
        let mut body = String::new();
        for r in &rejects {
            body.push_str(&serde_json::to_string(r).expect("reject serializes"));
            body.push('\n');
        }
        write_text(&rejects_path, &body)?;
        log::info!("ingest {name}: {} documents, {} rejected", corpus.len(), rejects.len());
        outputs.push((format!("ingest/{name}.json"), corpus_path));
        outputs.push((format!("ingest/{name}_rejects.jsonl"), rejects_path));
    }
    let inputs = [
        ("social_corpus", cfg.social_corpus.as_path()),
        ("clinical_corpus", cfg.clinical_corpus.as_path()),
    ];
    let outs: Vec<(&str, &Path)> =
        outputs.iter().map(|(k, p)| (k.as_str(), p.as_path())).collect();
    manifest.record("ingest", &inputs, &outs)
}

pub fn run_filter(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "filter")?;
    let exclusions = load_lexicon(&cfg.exclusion_lexicon)?;
    let severity = load_lexicon(&cfg.severity_lexicon)?;
    let cues = srf_core::corpus::default_cue_lexicon();
    let mut reports: std::collections::BTreeMap<String, FilterReport> = Default::default();
    let mut outputs = Vec::new();
    for name in ["social", "clinical"] {
        let corpus: Corpus = read_artifact(cfg, &format!("ingest/{name}.json"), "ingest")?;
        let input_len = corpus.len();
        let (corpus, mut report) = apply_exclusion_filter(&corpus, &exclusions);
        let (corpus, neg) = apply_negation_conjunction_filter(&corpus, &cues);
        report.merge(&neg);
        // the severity/supportive screen models community self-selection and
        // only applies to the social corpus; clinical notes are all in scope
        let corpus = if name == "social" {
            let (corpus, sev) = apply_severity_filter(&corpus, &severity)?;
            report.merge(&sev);
            corpus
        } else {
            corpus
        };
        debug_assert_eq!(corpus.len() + report.dropped_total(), input_len);
        let path = dir.join(format!("{name}.json"));
        write_json(&path, &corpus)?;
        log::info!("filter {name}: kept {}, dropped {}", corpus.len(), report.dropped_total());
        reports.insert(name.to_string(), report);
        outputs.push((format!("filter/{name}.json"), path));
    }
    let report_path = dir.join("report.json");
    write_json(&report_path, &reports)?;
    outputs.push(("filter/report.json".to_string(), report_path));
    let inputs = [
        ("ingest/social.json", cfg.out.join("ingest/social.json")),
        ("ingest/clinical.json", cfg.out.join("ingest/clinical.json")),
        ("exclusion_lexicon", cfg.exclusion_lexicon.clone()),
        ("severity_lexicon", cfg.severity_lexicon.clone()),
    ];
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    let outs: Vec<(&str, &Path)> =
        outputs.iter().map(|(k, p)| (k.as_str(), p.as_path())).collect();
    manifest.record("filter", &ins, &outs)
}

pub fn run_lexicon_expand(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "lexicon-expand")?;
    let lex = load_lexicon(&cfg.srf_lexicon)?;
    let expanded = match &cfg.concept_graph {
        Some(graph_path) => {
            let graph = load_concept_graph(graph_path)?;
            let out = expand_by_guided_walk(&lex, &graph, &cfg.walk_config())?;
            log::info!(
                "lexicon-expand: {} -> {} terms",
                lex.term_count(),
                out.term_count()
            );
            out
        }
        None => {
            log::info!("lexicon-expand: no concept graph configured, passing lexicon through");
            lex
        }
    };
    let path = dir.join("lexicon.jsonl");
    write_lexicon(&expanded, &path)?;
    let mut inputs = vec![("srf_lexicon", cfg.srf_lexicon.clone())];
    if let Some(g) = &cfg.concept_graph {
        inputs.push(("concept_graph", g.clone()));
    }
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    manifest.record("lexicon-expand", &ins, &[("lexicon-expand/lexicon.jsonl", &path)])
}

pub fn run_retrofit(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "retrofit")?;
    let lex_path = cfg.out.join("lexicon-expand/lexicon.jsonl");
    if !lex_path.exists() {
        return Err(CliError::validation(format!(
            "missing artifact {}: run the `lexicon-expand` stage first",
            lex_path.display()
        )));
    }
    let lex = load_lexicon(&lex_path)?;
    let store = load_embeddings(&cfg.vectors)?;
    let rc = RetrofitConfig {
        alpha: cfg.retrofit_alpha,
        iterations: cfg.retrofit_iterations,
        ..RetrofitConfig::default()
    };
    let outcome = retrofit(&store, &lex, &rc);
    let vectors_path = dir.join("vectors.txt");
    write_embeddings(&outcome.store, &vectors_path)?;
    let anchors_path = dir.join("anchors.json");
    write_json(&anchors_path, &outcome.anchors)?;
    let objective_path = dir.join("objective.json");
    write_json(&objective_path, &outcome.objective_trace)?;
    log::info!(
        "retrofit: objective {} -> {}",
        outcome.objective_trace.first().copied().unwrap_or(f64::NAN),
        outcome.objective_trace.last().copied().unwrap_or(f64::NAN)
    );
    manifest.record(
        "retrofit",
        &[
            ("vectors", cfg.vectors.as_path()),
            ("lexicon-expand/lexicon.jsonl", lex_path.as_path()),
        ],
        &[
            ("retrofit/vectors.txt", &vectors_path),
            ("retrofit/anchors.json", &anchors_path),
            ("retrofit/objective.json", &objective_path),
        ],
    )
}

pub fn run_embed(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "embed")?;
    let vectors_path = cfg.out.join("retrofit/vectors.txt");
    if !vectors_path.exists() {
        return Err(CliError::validation(format!(
            "missing artifact {}: run the `retrofit` stage first",
            vectors_path.display()
        )));
    }
    let store = load_embeddings(&vectors_path)?;
    let lex = load_lexicon(cfg.out.join("lexicon-expand/lexicon.jsonl"))?;
    let stopwords = load_stopwords(cfg)?;
    let mut skipped: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    let mut outputs = Vec::new();
    for name in ["social", "clinical"] {
        let corpus: Corpus = read_artifact(cfg, &format!("filter/{name}.json"), "filter")?;
        let mut vectors = Vec::with_capacity(corpus.len());
        let mut missed = Vec::new();
        for doc in &corpus.documents {
            match embed_document(doc, &store, &stopwords, Some(&lex)) {
                Ok(v) if !v.is_degenerate() => vectors.push(v),
                Ok(v) => missed.push(v.doc_id),
                Err(srf_core::Error::Unembeddable { doc_id }) => missed.push(doc_id),
                Err(e) => return Err(e.into()),
            }
        }
        log::info!("embed {name}: {} embedded, {} skipped", vectors.len(), missed.len());
        let path = dir.join(format!("{name}.json"));
        write_json(&path, &vectors)?;
        skipped.insert(name.to_string(), missed);
        outputs.push((format!("embed/{name}.json"), path));
    }
    let skipped_path = dir.join("skipped.json");
    write_json(&skipped_path, &skipped)?;
    outputs.push(("embed/skipped.json".to_string(), skipped_path));
    let inputs = [
        ("filter/social.json", cfg.out.join("filter/social.json")),
        ("filter/clinical.json", cfg.out.join("filter/clinical.json")),
        ("retrofit/vectors.txt", vectors_path.clone()),
    ];
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    let outs: Vec<(&str, &Path)> =
        outputs.iter().map(|(k, p)| (k.as_str(), p.as_path())).collect();
    manifest.record("embed", &ins, &outs)
}

fn social_index(cfg: &PipelineConfig) -> Result<(UserPostIndex, Vec<String>), CliError> {
    let corpus: Corpus = read_artifact(cfg, "filter/social.json", "filter")?;
    let vectors: Vec<DocumentVector> = read_artifact(cfg, "embed/social.json", "embed")?;
    let by_id: std::collections::BTreeMap<&str, &srf_core::corpus::Document> =
        corpus.documents.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut index = UserPostIndex::new();
    let mut communities: std::collections::BTreeSet<String> = Default::default();
    for v in vectors {
        let doc = by_id.get(v.doc_id.as_str()).ok_or_else(|| {
            CliError::runtime(format!("embedded doc {} missing from filtered corpus", v.doc_id))
        })?;
        communities.insert(doc.community.clone());
        index.insert(&doc.author, &doc.community, v);
    }
    Ok((index, communities.into_iter().collect()))
}

pub fn run_relate(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "relate")?;
    let (index, communities) = social_index(cfg)?;
    let mut matrix = build_sr_matrix(&index, &communities, cfg.sim_threshold)?;
    if cfg.clamp_sr {
        for row in matrix.values.iter_mut() {
            for v in row.iter_mut().flatten() {
                *v = v.min(1.0);
            }
        }
    }
    let json_path = dir.join("sr_matrix.json");
    write_json(&json_path, &matrix)?;
    let mut csv = String::from("community");
    for c in &matrix.communities {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    for (i, c) in matrix.communities.iter().enumerate() {
        csv.push_str(c);
        for j in 0..matrix.communities.len() {
            csv.push(',');
            csv.push_str(&fmt_opt(matrix.values[i][j]));
        }
        csv.push('\n');
    }
    let csv_path = dir.join("sr_matrix.csv");
    write_text(&csv_path, &csv)?;
    let inputs = [
        ("filter/social.json", cfg.out.join("filter/social.json")),
        ("embed/social.json", cfg.out.join("embed/social.json")),
    ];
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    manifest.record(
        "relate",
        &ins,
        &[
            ("relate/sr_matrix.json", &json_path),
            ("relate/sr_matrix.csv", &csv_path),
        ],
    )
}

pub fn run_select(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "select")?;
    let matrix: SrMatrix = read_artifact(cfg, "relate/sr_matrix.json", "relate")?;
    let selected = select_communities(&matrix, &cfg.anchor_community, cfg.community_threshold)?;
    log::info!(
        "select: {} communities at SR >= {} with anchor '{}'",
        selected.len(),
        cfg.community_threshold,
        cfg.anchor_community
    );
    let path = dir.join("selected.json");
    write_json(&path, &selected)?;
    manifest.record(
        "select",
        &[("relate/sr_matrix.json", cfg.out.join("relate/sr_matrix.json").as_path())],
        &[("select/selected.json", &path)],
    )
}

fn ordering_csv(result: &ClusterResult) -> String {
    let mut csv = String::from("order_index,doc_id,reachability,core_distance\n");
    for p in &result.ordering {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.order_index,
            p.doc_id,
            fmt_opt(p.reachability),
            fmt_opt(p.core_distance)
        ));
    }
    csv
}

pub fn run_cluster(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "cluster")?;
    let selected: Vec<(String, f64)> = read_artifact(cfg, "select/selected.json", "select")?;
    let social_corpus: Corpus = read_artifact(cfg, "filter/social.json", "filter")?;
    let mut in_scope: std::collections::BTreeSet<&str> =
        selected.iter().map(|(c, _)| c.as_str()).collect();
    in_scope.insert(cfg.anchor_community.as_str());
    let community_of: std::collections::BTreeMap<&str, &str> = social_corpus
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d.community.as_str()))
        .collect();

    let params = srf_core::clustering::OpticsParams {
        min_pts: cfg.min_pts,
        max_eps: cfg.max_eps,
        metric: cfg.metric,
    };
    let mut outputs = Vec::new();
    let mut results: Vec<(String, ClusterResult)> = Vec::new();
    for name in ["social", "clinical"] {
        let mut vectors: Vec<DocumentVector> =
            read_artifact(cfg, &format!("embed/{name}.json"), "embed")?;
        if name == "social" {
            vectors.retain(|v| {
                community_of
                    .get(v.doc_id.as_str())
                    .map_or(false, |c| in_scope.contains(c))
            });
        }
        // pre-flight so a bad corpus size produces no partial output
        if vectors.len() < cfg.min_pts {
            return Err(CliError::validation(format!(
                "cluster {name}: {} documents but min_pts = {}",
                vectors.len(),
                cfg.min_pts
            )));
        }
        let ordering = optics_order(&vectors, &params)?;
        let result = extract_clusters(&ordering, &vectors, cfg.target_min_clusters, &params)?;
        log::info!(
            "cluster {name}: {} clusters, {} noise, cut {}{}",
            result.clusters.len(),
            result.noise.len(),
            result.cut_level,
            if result.under_target { " (under target)" } else { "" }
        );
        results.push((name.to_string(), result));
    }
    // all computation succeeded; now write artifacts
    for (name, result) in &results {
        let clusters_path = dir.join(format!("{name}_clusters.json"));
        write_json(&clusters_path, result)?;
        let ordering_path = dir.join(format!("{name}_ordering.csv"));
        write_text(&ordering_path, &ordering_csv(result))?;
        outputs.push((format!("cluster/{name}_clusters.json"), clusters_path));
        outputs.push((format!("cluster/{name}_ordering.csv"), ordering_path));
    }
    let inputs = [
        ("embed/social.json", cfg.out.join("embed/social.json")),
        ("embed/clinical.json", cfg.out.join("embed/clinical.json")),
        ("select/selected.json", cfg.out.join("select/selected.json")),
    ];
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    let outs: Vec<(&str, &Path)> =
        outputs.iter().map(|(k, p)| (k.as_str(), p.as_path())).collect();
    manifest.record("cluster", &ins, &outs)
}

pub fn run_label(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "label")?;
    let vectors_path = cfg.out.join("retrofit/vectors.txt");
    if !vectors_path.exists() {
        return Err(CliError::validation(format!(
            "missing artifact {}: run the `retrofit` stage first",
            vectors_path.display()
        )));
    }
    let store = load_embeddings(&vectors_path)?;
    let lex = load_lexicon(cfg.out.join("lexicon-expand/lexicon.jsonl"))?;
    let srfs = srf_vectors(&lex, &store);
    if srfs.is_empty() {
        return Err(CliError::validation(
            "no lexicon category has any in-vocabulary term; cannot label clusters",
        ));
    }
    let mut outputs = Vec::new();
    for name in ["social", "clinical"] {
        let result: ClusterResult =
            read_artifact(cfg, &format!("cluster/{name}_clusters.json"), "cluster")?;
        let corpus: Corpus = read_artifact(cfg, &format!("filter/{name}.json"), "filter")?;
        let mut labeled = label_clusters(&result, &srfs, cfg.label_margin, cfg.label_floor)?;
        accessory_override(&mut labeled, &corpus, &lex, &ACCESSORY_KEYWORDS);
        let freq = srf_frequency(&labeled)?;
        let labels_path = dir.join(format!("{name}_labels.json"));
        write_json(&labels_path, &labeled)?;
        let freq_path = dir.join(format!("{name}_frequency.json"));
        write_json(&freq_path, &freq)?;
        outputs.push((format!("label/{name}_labels.json"), labels_path));
        outputs.push((format!("label/{name}_frequency.json"), freq_path));
    }
    let inputs = [
        ("cluster/social_clusters.json", cfg.out.join("cluster/social_clusters.json")),
        ("cluster/clinical_clusters.json", cfg.out.join("cluster/clinical_clusters.json")),
        ("retrofit/vectors.txt", vectors_path.clone()),
        ("lexicon-expand/lexicon.jsonl", cfg.out.join("lexicon-expand/lexicon.jsonl")),
    ];
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    let outs: Vec<(&str, &Path)> =
        outputs.iter().map(|(k, p)| (k.as_str(), p.as_path())).collect();
    manifest.record("label", &ins, &outs)
}

pub fn run_compare(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let dir = stage_dir(cfg, "compare")?;
    let social: Vec<LabeledCluster> = read_artifact(cfg, "label/social_labels.json", "label")?;
    let clinical: Vec<LabeledCluster> = read_artifact(cfg, "label/clinical_labels.json", "label")?;
    let report = compare_platforms(("social", &social), ("clinical", &clinical))?;
    let json_path = dir.join("report.json");
    write_json(&json_path, &report)?;
    let text_path = dir.join("report.txt");
    write_text(&text_path, &report.render_text())?;

    let corpus: Corpus = read_artifact(cfg, "filter/social.json", "filter")?;
    let lex = load_lexicon(cfg.out.join("lexicon-expand/lexicon.jsonl"))?;
    let pairs = srf_cooccurrence(&social, &corpus, &lex, 2)?;
    let mut csv = String::from("srf_a,srf_b,count\n");
    for (combo, count) in &pairs {
        csv.push_str(&format!("{},{},{count}\n", combo[0], combo[1]));
    }
    let csv_path = dir.join("cooccurrence.csv");
    write_text(&csv_path, &csv)?;
    println!("{}", report.render_text());
    let inputs = [
        ("label/social_labels.json", cfg.out.join("label/social_labels.json")),
        ("label/clinical_labels.json", cfg.out.join("label/clinical_labels.json")),
    ];
    let ins: Vec<(&str, &Path)> = inputs.iter().map(|(k, p)| (*k, p.as_path())).collect();
    manifest.record(
        "compare",
        &ins,
        &[
            ("compare/report.json", &json_path),
            ("compare/report.txt", &text_path),
            ("compare/cooccurrence.csv", &csv_path),
        ],
    )
}

pub fn run_agree(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let Some(annotations) = &cfg.annotations else {
        return Err(CliError::validation(
            "agree: no `annotations` path configured",
        ));
    };
    let dir = stage_dir(cfg, "agree")?;
    let set = srf_core::agreement::load_annotations(annotations)?;
    let outcome = srf_core::agreement::run_protocol(&set, cfg.agreement_threshold)?;
    log::info!(
        "agree: selected '{}', accepted: {}",
        outcome.selected_annotator,
        outcome.accepted
    );
    let path = dir.join("outcome.json");
    write_json(&path, &outcome)?;
    manifest.record(
        "agree",
        &[("annotations", annotations.as_path())],
        &[("agree/outcome.json", &path)],
    )
}

pub fn run_stage(
    stage: &str,
    cfg: &PipelineConfig,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    let started = std::time::Instant::now();
    let result = match stage {
        "ingest" => run_ingest(cfg, manifest),
        "filter" => run_filter(cfg, manifest),
        "lexicon-expand" => run_lexicon_expand(cfg, manifest),
        "retrofit" => run_retrofit(cfg, manifest),
        "embed" => run_embed(cfg, manifest),
        "relate" => run_relate(cfg, manifest),
        "select" => run_select(cfg, manifest),
        "cluster" => run_cluster(cfg, manifest),
        "label" => run_label(cfg, manifest),
        "compare" => run_compare(cfg, manifest),
        "agree" => run_agree(cfg, manifest),
        _ => Err(CliError::validation(format!("unknown stage '{stage}'"))),
    };
    if result.is_ok() {
        crate::manifest::record_timing(&cfg.out, stage, started.elapsed().as_secs_f64());
    }
    result
}

pub fn run_all(cfg: &PipelineConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    for stage in STAGE_ORDER {
        if stage == "agree" && cfg.annotations.is_none() {
            log::info!("run-all: no annotations configured, skipping `agree`");
            continue;
        }
        run_stage(stage, cfg, manifest)?;
        manifest.save(&cfg.out)?;
    }
    Ok(())
}
