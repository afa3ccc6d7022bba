use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use procurate::config::PipelineConfig;
use procurate::pipeline::{self, Stage};
use procurate::sieve::RecallDenominator;
use procurate::swap::RetrievalPool;

#[derive(Parser)]
#[command(name = "procurate", version, about = "Sieve-and-swap curation of cooking video transcripts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter source videos and pair them with recipes by title words
    SieveTitles(Overrides),
    /// Score title pairs by transcript overlap and split train/validation
    SieveContent(Overrides),
    /// Swap merged transcript segments for recipe steps
    Swap(Overrides),
    /// Write dataset statistics and word-frequency deltas
    Stats(Overrides),
    /// Run every stage in order
    Pipeline(Overrides),
    /// Check an existing dataset against the curated-video invariants
    Validate(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    videos: Option<PathBuf>,
    #[arg(long)]
    recipes: Option<PathBuf>,
    #[arg(long)]
    step_emb: Option<PathBuf>,
    #[arg(long)]
    seg_emb: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    function_words: Option<PathBuf>,
    #[arg(long)]
    generic_words: Option<PathBuf>,
    #[arg(long)]
    max_duration: Option<f64>,
    #[arg(long)]
    min_per_category: Option<usize>,
    #[arg(long)]
    iou: Option<f64>,
    #[arg(long)]
    recall: Option<f64>,
    #[arg(long)]
    val_iou: Option<f64>,
    #[arg(long)]
    sim: Option<f64>,
    #[arg(long)]
    merge_max_dur: Option<f64>,
    #[arg(long)]
    merge_max_gap: Option<f64>,
    #[arg(long, value_enum)]
    pool: Option<PoolArg>,
    #[arg(long, value_enum)]
    recall_denominator: Option<DenominatorArg>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    #[arg(long)]
    lenient: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PoolArg {
    Global,
    Paired,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DenominatorArg {
    Recipe,
    Transcript,
}

impl Overrides {
    fn resolve(self) -> procurate::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $field:ident) => {
                if let Some(v) = $flag {
                    cfg.$field = v;
                }
            };
            ($flag:expr => Some $field:ident) => {
                if let Some(v) = $flag {
                    cfg.$field = Some(v);
                }
            };
        }
        set!(self.videos => Some videos);
        set!(self.recipes => Some recipes);
        set!(self.step_emb => Some step_emb);
        set!(self.seg_emb => Some seg_emb);
        set!(self.out_dir => Some out_dir);
        set!(self.function_words => Some function_words);
        set!(self.generic_words => Some generic_words);
        set!(self.workers => Some workers);
        set!(self.max_duration => max_duration_s);
        set!(self.min_per_category => min_per_category);
        set!(self.iou => lambda_iou);
        set!(self.recall => lambda_recall);
        set!(self.val_iou => lambda_val);
        set!(self.sim => lambda_sim);
        set!(self.merge_max_dur => merge_max_dur_s);
        set!(self.merge_max_gap => merge_max_gap_s);
        set!(self.pool.map(|p| match p {
            PoolArg::Global => RetrievalPool::Global,
            PoolArg::Paired => RetrievalPool::Paired,
        }) => retrieval_pool);
        set!(self.recall_denominator.map(|d| match d {
            DenominatorArg::Recipe => RecallDenominator::Recipe,
            DenominatorArg::Transcript => RecallDenominator::Transcript,
        }) => recall_denominator);
        if self.strict {
            cfg.strict_ingest = true;
        }
        if self.lenient {
            cfg.strict_ingest = false;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PROCURATE_LOG", "warn")).init();
    let cli = Cli::parse();
    let (stage, overrides) = match cli.command {
        Command::SieveTitles(o) => (Stage::SieveTitles, o),
        Command::SieveContent(o) => (Stage::SieveContent, o),
        Command::Swap(o) => (Stage::Swap, o),
        Command::Stats(o) => (Stage::Stats, o),
        Command::Pipeline(o) => (Stage::Pipeline, o),
        Command::Validate(o) => (Stage::Validate, o),
    };
    let outcome = overrides
        .resolve()
        .map_err(|error| pipeline::StageError { stage, error })
        .and_then(|cfg| pipeline::run(stage, &cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("procurate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
