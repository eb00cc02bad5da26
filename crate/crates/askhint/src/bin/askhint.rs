//! Command-line entry point: pool generation, compression, inference,
//! evaluation, ablations, transfer runs and the granularity study.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 backend failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use askhint::commands;
use askhint::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "askhint",
    about = "Guided-question prompting and evaluation for video anomaly detection with frozen VLMs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Run-config JSON file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's prompt mode (askhint | abstract | full_pool |
    /// class_label:<Target>).
    #[arg(long)]
    mode: Option<String>,
    /// Override the config's prompt set (path or preset name).
    #[arg(long)]
    prompt_set: Option<String>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's frame budget.
    #[arg(long)]
    max_frames: Option<usize>,
    /// Override the config's cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, askhint::Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(mode) = &self.mode {
            config.mode = mode.clone();
        }
        if let Some(set) = &self.prompt_set {
            config.prompt_set = Some(set.clone());
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(max_frames) = self.max_frames {
            config.max_frames = max_frames;
        }
        if let Some(cache_dir) = &self.cache_dir {
            config.cache_dir = Some(cache_dir.clone());
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the class-wise guiding-question pool via the meta-prompt.
    GeneratePool {
        /// File with one anomaly class name per line.
        #[arg(long)]
        classes: PathBuf,
        /// Output pool file (a JSON mirror is written alongside).
        #[arg(long)]
        out: PathBuf,
        /// Parse an existing model transcript instead of calling a backend.
        #[arg(long)]
        from_text: Option<PathBuf>,
        /// Minimum questions per class in the meta-prompt.
        #[arg(long, default_value_t = 3)]
        min_questions: usize,
        /// Maximum questions per class in the meta-prompt.
        #[arg(long, default_value_t = 5)]
        max_questions: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compress a pool into a compact grouped set (vlm or embedding mode).
    Compress {
        /// Pool file or preset name.
        #[arg(long)]
        pool: String,
        /// Output compact-set file (heatmap/dendrogram artifacts land
        /// alongside).
        #[arg(long)]
        out: PathBuf,
        /// Compression mode override: vlm | embedding.
        #[arg(long)]
        compression_mode: Option<String>,
        /// Number of clusters (embedding mode).
        #[arg(short = 'k', long)]
        k: Option<usize>,
        /// Exact total question budget for the compact set.
        #[arg(long)]
        budget: Option<usize>,
        /// Parse a recorded compression transcript (vlm mode, offline).
        #[arg(long)]
        from_text: Option<PathBuf>,
        /// Manifest for the oracle backend's ground truth, if used.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run inference over a manifest and write verdicts JSONL.
    Infer {
        #[arg(long)]
        manifest: PathBuf,
        /// Root directory frame paths are relative to (default: manifest
        /// directory).
        #[arg(long)]
        frames_root: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score a verdicts file against a manifest.
    Evaluate {
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Output report JSON (a .txt table is written alongside).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Question-count ablation (summarized vs random selection).
    Ablate {
        /// Pool file or preset name.
        #[arg(long)]
        pool: String,
        /// Comma-separated question budgets.
        #[arg(long, default_value = "3,6,9,12")]
        counts: String,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        frames_root: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Prompt transfer: cross-dataset or cross-class.
    Transfer {
        #[command(subcommand)]
        kind: TransferCommand,
    },
    /// Per-class prompt-granularity study (abstract / class-label /
    /// fine-grained).
    Granularity {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        frames_root: Option<PathBuf>,
        /// Pool file or preset name.
        #[arg(long)]
        pool: String,
        /// Output JSON (a .csv table is written alongside).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print the run-config fingerprint and exit.
    Fingerprint {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum TransferCommand {
    /// Evaluate a target dataset with a source dataset's compact set.
    Dataset {
        /// Prompt-source dataset name (labels the report).
        #[arg(long)]
        source: String,
        /// Source compact set: path or preset name.
        #[arg(long)]
        source_set: String,
        /// Evaluation-target dataset name (labels the report).
        #[arg(long)]
        target: String,
        #[arg(long)]
        target_manifest: PathBuf,
        #[arg(long)]
        frames_root: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compress only seen classes' questions, evaluate on the full manifest.
    Class {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        frames_root: Option<PathBuf>,
        /// Pool file or preset name.
        #[arg(long)]
        pool: String,
        /// Comma-separated seen classes, or `ucf` for the documented preset.
        #[arg(long)]
        seen: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn run() -> Result<(), askhint::Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::GeneratePool {
            classes,
            out,
            from_text,
            min_questions,
            max_questions,
            config,
        } => {
            let config = config.load()?;
            commands::cmd_generate_pool(
                &classes,
                &config,
                &out,
                from_text.as_deref(),
                min_questions,
                max_questions,
            )
        }
        Command::Compress {
            pool,
            out,
            compression_mode,
            k,
            budget,
            from_text,
            manifest,
            config,
        } => {
            let config = config.load()?;
            commands::cmd_compress(
                &pool,
                &config,
                &out,
                compression_mode.as_deref(),
                k,
                budget,
                from_text.as_deref(),
                manifest.as_deref(),
            )
        }
        Command::Infer { manifest, frames_root, out, config } => {
            let config = config.load()?;
            commands::cmd_infer(&manifest, frames_root.as_deref(), &config, &out)
        }
        Command::Evaluate { verdicts, manifest, out, config } => {
            let config = config.load()?;
            commands::cmd_evaluate(&verdicts, &manifest, &config, &out)
        }
        Command::Ablate { pool, counts, manifest, frames_root, out_dir, config } => {
            let config = config.load()?;
            let counts = parse_counts(&counts)?;
            commands::cmd_ablate(
                &pool,
                &counts,
                &manifest,
                frames_root.as_deref(),
                &config,
                &out_dir,
            )
        }
        Command::Transfer { kind } => match kind {
            TransferCommand::Dataset {
                source,
                source_set,
                target,
                target_manifest,
                frames_root,
                out,
                config,
            } => {
                let config = config.load()?;
                commands::cmd_transfer_dataset(
                    &source,
                    &source_set,
                    &target,
                    &target_manifest,
                    frames_root.as_deref(),
                    &config,
                    &out,
                )
            }
            TransferCommand::Class { manifest, frames_root, pool, seen, out, config } => {
                let config = config.load()?;
                let seen = commands::parse_seen_classes(&seen);
                commands::cmd_transfer_class(
                    &manifest,
                    frames_root.as_deref(),
                    &pool,
                    &seen,
                    &config,
                    &out,
                )
            }
        },
        Command::Granularity { manifest, frames_root, pool, out, config } => {
            let config = config.load()?;
            commands::cmd_granularity(&manifest, frames_root.as_deref(), &pool, &config, &out)
        }
        Command::Fingerprint { config } => {
            let config = config.load()?;
            commands::print_fingerprint(&config)
        }
    }
}

fn parse_counts(spec: &str) -> Result<Vec<usize>, askhint::Error> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| askhint::Error::Config(format!("bad count {s:?}")))
        })
        .collect()
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
