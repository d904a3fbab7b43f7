use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use simeval::cli::{self, CliError, LemmatizerKind, NormalizationSettings, RunConfig, ThresholdMode};
use simeval::normalize::TokenPattern;
use simeval::{Method, PairFormat};

#[derive(Parser)]
#[command(name = "simeval", version, about = "Score text pairs and evaluate similarity methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one score per pair to <out>/scores.tsv.
    Score(RunArgs),
    /// Write the metrics table, ROC points and run manifest.
    Eval(RunArgs),
    /// Write the most confident misclassifications to <out>/errors.txt.
    Errors {
        #[command(flatten)]
        run: RunArgs,
        /// Maximum number of rows.
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Pair dataset.
    #[arg(long, required_unless_present = "manifest")]
    dataset: Option<PathBuf>,
    /// qqp-tsv or generic-csv.
    #[arg(long, default_value = "qqp-tsv")]
    format: PairFormat,
    /// string-match, embedding-angular, embedding-cosine or external-scores.
    #[arg(long, default_value = "string-match")]
    method: Method,
    /// Embedding file (`id<TAB>v1,...,vn`).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Score file (`pair_id<TAB>score`).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Token-to-lemma table (`token<TAB>lemma`); selects the table lemmatizer.
    #[arg(long)]
    lemma_table: Option<PathBuf>,
    /// identity or rules (ignored when --lemma-table is given).
    #[arg(long, default_value = "rules")]
    lemmatizer: LemmatizerKind,
    /// Keep letter case when normalizing.
    #[arg(long)]
    no_lowercase: bool,
    /// Split on whitespace only, keeping punctuation attached to tokens.
    #[arg(long)]
    raw_tokens: bool,
    /// `youden` or a fixed value in [0, 1].
    #[arg(long, default_value = "youden")]
    threshold: ThresholdMode,
    /// Tune the threshold on this fraction of pairs and evaluate on the rest.
    #[arg(long)]
    split: Option<f64>,
    /// Seed for --split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for pair scoring (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Replay the configuration recorded in a manifest; --out and --threads
    /// still apply.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.manifest {
            let mut config = cli::replay_config(path)?;
            if let Some(out) = self.out {
                config.out = out;
            }
            config.threads = self.threads;
            return Ok(config);
        }
        let lemmatizer = if self.lemma_table.is_some() {
            LemmatizerKind::Table
        } else {
            self.lemmatizer
        };
        Ok(RunConfig {
            dataset: self.dataset.expect("required by clap"),
            format: self.format,
            method: self.method,
            embeddings: self.embeddings,
            scores: self.scores,
            normalization: NormalizationSettings {
                lowercase: !self.no_lowercase,
                lemmatizer,
                lemma_table: self.lemma_table,
                token_pattern: if self.raw_tokens {
                    TokenPattern::Whitespace
                } else {
                    TokenPattern::Words
                },
            },
            threshold: self.threshold,
            split: self.split,
            seed: self.seed,
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            threads: self.threads,
        })
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Score(args) => {
            let path = cli::cmd_score(&args.into_config()?)?;
            println!("wrote {}", path.display());
        }
        Command::Eval(args) => {
            let config = args.into_config()?;
            let out = cli::cmd_eval(&config)?;
            print!("{}", cli::metrics_table(config.method, &out.report));
            for f in out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Errors { run, limit } => {
            let path = cli::cmd_errors(&run.into_config()?, limit)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors are input errors (1); 2 is reserved for undefined evaluations
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
