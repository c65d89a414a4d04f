//! Command-line driver for the LENIE pipeline.
//!
//! `lenie <stage> --config run.json` runs one stage; `lenie all` runs them in
//! order. Stages communicate only through files in the output directory, so
//! any stage can be rerun on its own and completed work is skipped.

pub mod artifacts;
pub mod config;
pub mod pipeline;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lenie_core::eval::FeatureSource;
use lenie_core::kg::write_kg;
use lenie_core::synth::{generate, SynthParams};
use serde_json::json;

pub use config::{validate_config, ConfigError, RunConfig};
pub use pipeline::{Pipeline, RunSummary, Stage};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{artifact} is missing or was produced by a different config; run `lenie {stage}` first")]
    MissingStage { stage: &'static str, artifact: PathBuf },
    #[error(transparent)]
    Core(#[from] lenie_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failures} generation request(s) failed; rerun `lenie augment` to retry them")]
    PartialAugmentation { failures: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::PartialAugmentation { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lenie", version, about = "LLM-augmented node importance estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate the knowledge graph, printing its counts.
    Ingest(StageArgs),
    /// Sample triplet sentences for every node.
    Sample(StageArgs),
    /// Generate augmented descriptions from the sampled contexts.
    Augment(StageArgs),
    /// Encode each arm's node texts into feature matrices.
    Embed(StageArgs),
    /// Fit each model on all labeled nodes and write checkpoints.
    Train(StageArgs),
    /// Cross-validate each model with the learning-rate search.
    Evaluate(StageArgs),
    /// Collect the evaluation reports into a summary table.
    Report(StageArgs),
    /// Run every stage in order.
    All(StageArgs),
    /// Write a synthetic knowledge graph with a planted importance signal.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Restrict the run to one ablation arm.
    #[arg(long, value_parser = parse_arm)]
    pub arm: Option<FeatureSource>,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub relations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_arm(s: &str) -> Result<FeatureSource, String> {
    FeatureSource::parse(s).ok_or_else(|| {
        let names: Vec<_> = FeatureSource::ALL.iter().map(|a| a.as_str()).collect();
        format!("unknown arm `{s}`, expected one of {}", names.join(", "))
    })
}

/// Writes the synthetic graph plus a `manifest.json` recording its parameters.
pub fn write_synthetic(params: &SynthParams, out: &std::path::Path) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: out.to_path_buf(),
        source,
    };
    fs::create_dir_all(out).map_err(io)?;
    let kg = generate(params)?;
    write_kg(
        &kg,
        out.join("entities.tsv"),
        out.join("relations.tsv"),
        out.join("triplets.tsv"),
    )?;
    let manifest = json!({
        "generator": "planted relation-0 degree",
        "label": "raw_score = exp(beta * d0) - 1, d0 = relation-0 triplets touching the node",
        "params": params,
        "summary": kg.summary(),
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(out.join("manifest.json"), text).map_err(io)?;
    Ok(())
}

/// Executes a parsed command.
pub fn execute(command: Command) -> Result<Option<RunSummary>, CliError> {
    let (args, stage) = match command {
        Command::Synth(a) => {
            let params = SynthParams::new(a.nodes, a.relations, a.seed);
            write_synthetic(&params, &a.out)?;
            return Ok(None);
        }
        Command::Ingest(a) => (a, Some(Stage::Ingest)),
        Command::Sample(a) => (a, Some(Stage::Sample)),
        Command::Augment(a) => (a, Some(Stage::Augment)),
        Command::Embed(a) => (a, Some(Stage::Embed)),
        Command::Train(a) => (a, Some(Stage::Train)),
        Command::Evaluate(a) => (a, Some(Stage::Evaluate)),
        Command::Report(a) => (a, Some(Stage::Report)),
        Command::All(a) => (a, None),
    };
    let cfg = validate_config(&args.config)?;
    let mut pipeline = Pipeline::new(cfg, args.seed, args.arm);
    let result = pipeline.run(stage);
    if let Err(e) = &result {
        log::error!("{e}");
    }
    result.map(|_| Some(pipeline.summary))
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            if let Some(s) = summary {
                println!("{}", serde_json::to_string(&s).expect("summary serializes"));
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
