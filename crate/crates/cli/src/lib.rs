//! `grace`: the staged pipeline behind one command-line tool.
//!
//! Stages communicate only through files in the run directory:
//!
//! ```text
//! ingest            dataset/, ingest_summary.json (+ synth_truth.json, llm_scores.csv,
//!                   mock_provider.json with --synthetic)
//! label             labeled/ (dataset copy with explanation_labels.csv)
//! llm-score         llm_scores.csv, llm_cache.jsonl
//! cluster           weak_labels.csv, clusters.json
//! train-uncertainty cv_report_<KIND>.json, uncertainty_<KIND>.json
//! train-grace       split.json, model_<VARIANT>.json
//! evaluate          report.csv, report.txt, aleatoric.csv
//! explain           explanations.txt
//! route             routed.jsonl
//! ```
//!
//! Exit codes: 0 success, 2 validation failure, 3 missing artifact,
//! 4 provider unavailable, 1 anything else.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use grace_core::net::ModelVariant;
use grace_core::uncertainty::ClassifierKind;

use config::{RunConfig, SchemaChoice};
use error::Result;

#[derive(Debug, Parser)]
#[command(name = "grace", version, about = "Socially appropriate robot action scoring with GRACE")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory for every artifact.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Dataset directory (defaults to `<out-dir>/dataset`).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub schema: Option<SchemaArg>,
    /// Offline provider fixture (JSON).
    #[arg(long, global = true)]
    pub mock: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemaArg {
    Header,
    Mannersdb,
    MannersdbPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Scores shifted by explanations; the default for score correction.
    ExplanationBenefit,
    /// Low- and high-noise scenes without explanation effects.
    TwoRegime,
    /// One category is decided by the order of two action scores.
    ScoreDriven,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::ExplanationBenefit => "explanation-benefit",
            Preset::TwoRegime => "two-regime",
            Preset::ScoreDriven => "score-driven",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dataset, or generate a synthetic one with --synthetic.
    Ingest {
        #[arg(long)]
        synthetic: bool,
        #[arg(long, value_enum, default_value = "explanation-benefit")]
        preset: Preset,
        #[arg(long, default_value_t = 400)]
        scenes: usize,
        #[arg(long, default_value_t = 5)]
        annotators: usize,
    },
    /// Label free-text explanations into the seven categories.
    Label {
        /// Labeling prompts (TOML).
        #[arg(long)]
        labeling: Option<PathBuf>,
    },
    /// Query expected appropriateness scores for every scene and action.
    LlmScore {
        /// Scene description template (TOML).
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Cluster per-scene score variances into certain/uncertain weak labels.
    Cluster,
    /// Nested cross-validation and final fit of a certainty classifier.
    TrainUncertainty {
        #[arg(long, value_parser = commands::classifier_kind)]
        classifier: Option<ClassifierKind>,
    },
    /// Train the score networks on a scene-grouped split.
    TrainGrace {
        #[arg(long, value_delimiter = ',', value_parser = commands::model_variant)]
        variants: Option<Vec<ModelVariant>>,
    },
    /// Score the trained networks and the LLM on the test split.
    Evaluate {
        #[arg(long, value_delimiter = ',', value_parser = commands::model_variant)]
        variants: Option<Vec<ModelVariant>>,
    },
    /// Generate ranked explanations for human score vectors.
    Explain {
        /// GRACE model (defaults to `<out-dir>/model_GRACE.json`).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Scores separated by spaces or commas; repeat for several rows.
        #[arg(long, required = true)]
        scores: Vec<String>,
        #[arg(long)]
        top_r: Option<usize>,
    },
    /// Route every annotation through classifier, LLM and GRACE.
    Route {
        #[arg(long, value_parser = commands::classifier_kind)]
        classifier: Option<ClassifierKind>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Label { .. } => "label",
            Command::LlmScore { .. } => "llm-score",
            Command::Cluster => "cluster",
            Command::TrainUncertainty { .. } => "train-uncertainty",
            Command::TrainGrace { .. } => "train-grace",
            Command::Evaluate { .. } => "evaluate",
            Command::Explain { .. } => "explain",
            Command::Route { .. } => "route",
        }
    }
}

/// Config file first, then global flags, then command flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.data {
        cfg.data.dir = Some(d.clone());
    }
    if let Some(s) = cli.schema {
        cfg.data.schema = match s {
            SchemaArg::Header => SchemaChoice::Header,
            SchemaArg::Mannersdb => SchemaChoice::Mannersdb,
            SchemaArg::MannersdbPlus => SchemaChoice::MannersdbPlus,
        };
    }
    if let Some(m) = &cli.mock {
        cfg.llm.mock_fixture = Some(m.clone());
    }
    match &cli.command {
        Command::Label { labeling: Some(p) } => cfg.llm.labeling = Some(p.clone()),
        Command::LlmScore { template: Some(p) } => cfg.llm.template = Some(p.clone()),
        Command::TrainUncertainty { classifier: Some(k) }
        | Command::Route {
            classifier: Some(k),
            ..
        } => cfg.uncertainty.classifier = *k,
        Command::TrainGrace { variants: Some(v) } | Command::Evaluate { variants: Some(v) } => {
            cfg.grace.variants = v.clone()
        }
        Command::Explain { top_r: Some(r), .. } => cfg.grace.top_r = *r,
        _ => {}
    }
    Ok(cfg.resolve())
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    let default_model = || cfg.artifact(&artifacts::model_file(ModelVariant::Grace.as_str()));
    match &cli.command {
        Command::Ingest {
            synthetic,
            preset,
            scenes,
            annotators,
        } => commands::ingest(&cfg, synthetic.then_some((*preset, *scenes, *annotators)))?,
        Command::Label { .. } => commands::label(&cfg)?,
        Command::LlmScore { .. } => commands::llm_score(&cfg)?,
        Command::Cluster => commands::cluster(&cfg)?,
        Command::TrainUncertainty { .. } => commands::train_uncertainty(&cfg)?,
        Command::TrainGrace { .. } => commands::train_grace(&cfg)?,
        Command::Evaluate { .. } => commands::evaluate(&cfg)?,
        Command::Explain { model, scores, .. } => {
            let model = model.clone().unwrap_or_else(default_model);
            commands::explain(&cfg, &model, scores, cfg.grace.top_r)?
        }
        Command::Route { model, .. } => {
            let model = model.clone().unwrap_or_else(default_model);
            commands::route(&cfg, &model)?
        }
    }
    cfg.persist(cli.command.name())?;
    Ok(())
}
