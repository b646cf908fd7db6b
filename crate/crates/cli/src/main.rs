//! `srf` — staged pipeline for extracting, clustering, and comparing
//! suicide-risk-factor mentions across a social-media corpus and a
//! clinical-notes corpus.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::PipelineConfig;
use manifest::RunManifest;

/// Errors with the pipeline's exit-code contract: 1 for configuration and
/// validation problems (rejected before any work), 2 for runtime failures.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 1 }
    }
    pub fn runtime(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 2 }
    }
}

impl From<srf_core::Error> for CliError {
    fn from(e: srf_core::Error) -> Self {
        match e {
            srf_core::Error::Config(_) | srf_core::Error::Domain(_) => {
                CliError::validation(e.to_string())
            }
            other => CliError::runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "srf", version, about = "Suicide-risk-factor extraction pipeline")]
struct Cli {
    /// Flat key = value configuration file; flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for staged artifacts and the run manifest.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,

    // input path overrides, named after their config keys
    #[arg(long, global = true)]
    social_corpus: Option<String>,
    #[arg(long, global = true)]
    clinical_corpus: Option<String>,
    #[arg(long, global = true)]
    srf_lexicon: Option<String>,
    #[arg(long, global = true)]
    exclusion_lexicon: Option<String>,
    #[arg(long, global = true)]
    severity_lexicon: Option<String>,
    #[arg(long, global = true)]
    stopword_lexicon: Option<String>,
    #[arg(long, global = true)]
    concept_graph: Option<String>,
    #[arg(long, global = true)]
    vectors: Option<String>,
    #[arg(long, global = true)]
    annotations: Option<String>,

    // threshold and parameter overrides, named after their config keys
    #[arg(long, global = true)]
    sim_threshold: Option<String>,
    #[arg(long, global = true)]
    community_threshold: Option<String>,
    #[arg(long, global = true)]
    label_margin: Option<String>,
    #[arg(long, global = true)]
    label_floor: Option<String>,
    #[arg(long, global = true)]
    agreement_threshold: Option<String>,
    /// Clamp semantic-relatedness scores at 1.0 (the raw measure can exceed it).
    #[arg(long, global = true)]
    clamp_sr: bool,
    #[arg(long, global = true)]
    anchor_community: Option<String>,
    #[arg(long, global = true)]
    min_pts: Option<String>,
    #[arg(long, global = true)]
    max_eps: Option<String>,
    #[arg(long, global = true)]
    metric: Option<String>,
    #[arg(long, global = true)]
    target_min_clusters: Option<String>,
    #[arg(long, global = true)]
    retrofit_alpha: Option<String>,
    #[arg(long, global = true)]
    retrofit_iterations: Option<String>,
    #[arg(long, global = true)]
    walk_restart: Option<String>,
    #[arg(long, global = true)]
    walk_steps: Option<String>,
    #[arg(long, global = true)]
    walk_min_visit_weight: Option<String>,
    #[arg(long, global = true)]
    walk_backend: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate both corpora, writing accepted documents and rejects.
    Ingest,
    /// Apply exclusion, negation/conjunction, and severity filters.
    Filter,
    /// Expand the risk-factor lexicon over a concept graph by guided random walk.
    LexiconExpand,
    /// Retrofit the pre-trained word vectors toward the expanded lexicon.
    Retrofit,
    /// Mean-pool document vectors from the retrofitted embeddings.
    Embed,
    /// Compute the cross-community semantic-relatedness matrix.
    Relate,
    /// Select communities related to the anchor above the SR threshold.
    Select,
    /// OPTICS-order and extract clusters for both corpora.
    Cluster,
    /// Label clusters by nearest risk-factor centroid and compute shares.
    Label,
    /// Compare platform summaries and emit the final report.
    Compare,
    /// Run the two-tier annotator-agreement protocol on an annotation file.
    Agree,
    /// Execute every stage in order.
    RunAll,
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Filter => "filter",
            Command::LexiconExpand => "lexicon-expand",
            Command::Retrofit => "retrofit",
            Command::Embed => "embed",
            Command::Relate => "relate",
            Command::Select => "select",
            Command::Cluster => "cluster",
            Command::Label => "label",
            Command::Compare => "compare",
            Command::Agree => "agree",
            Command::RunAll => "run-all",
        }
    }
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let overrides: [(&str, &Option<String>); 26] = [
        ("out", &cli.out),
        ("seed", &cli.seed),
        ("threads", &cli.threads),
        ("social_corpus", &cli.social_corpus),
        ("clinical_corpus", &cli.clinical_corpus),
        ("srf_lexicon", &cli.srf_lexicon),
        ("exclusion_lexicon", &cli.exclusion_lexicon),
        ("severity_lexicon", &cli.severity_lexicon),
        ("stopword_lexicon", &cli.stopword_lexicon),
        ("concept_graph", &cli.concept_graph),
        ("vectors", &cli.vectors),
        ("annotations", &cli.annotations),
        ("sim_threshold", &cli.sim_threshold),
        ("community_threshold", &cli.community_threshold),
        ("label_margin", &cli.label_margin),
        ("label_floor", &cli.label_floor),
        ("agreement_threshold", &cli.agreement_threshold),
        ("anchor_community", &cli.anchor_community),
        ("min_pts", &cli.min_pts),
        ("max_eps", &cli.max_eps),
        ("metric", &cli.metric),
        ("target_min_clusters", &cli.target_min_clusters),
        ("retrofit_alpha", &cli.retrofit_alpha),
        ("retrofit_iterations", &cli.retrofit_iterations),
        ("walk_restart", &cli.walk_restart),
        ("walk_steps", &cli.walk_steps),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(v) = &cli.walk_min_visit_weight {
        cfg.set("walk_min_visit_weight", v)?;
    }
    if let Some(v) = &cli.walk_backend {
        cfg.set("walk_backend", v)?;
    }
    if cli.clamp_sr {
        cfg.set("clamp_sr", "true")?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(cli)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::validation(format!("output dir {}: {e}", cfg.out.display())))?;
    let mut manifest = RunManifest::load_or_new(&cfg.out, cfg.snapshot());
    match cli.command {
        Command::RunAll => stages::run_all(&cfg, &mut manifest)?,
        ref c => stages::run_stage(c.stage(), &cfg, &mut manifest)?,
    }
    manifest.save(&cfg.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
