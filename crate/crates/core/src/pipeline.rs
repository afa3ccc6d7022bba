//! Pipeline stages. Each stage reads its inputs from disk and writes its
//! outputs into the configured output directory, so running the stages one
//! after another is the same as running `pipeline`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::corpus::{filter_source, parse_recipes, parse_videos, IngestMode, Recipe, StepRef, VideoRecord};
use crate::embedindex::{ids_path_for, load_embeddings, EmbeddingMatrix};
use crate::error::{CurateError, Result};
use crate::report::{compute_stats, compute_word_deltas, write_sentence_counts, write_word_deltas};
use crate::sieve::{pair_by_title, score_pairs, sieve_content, split_train_val, PairScore, SplitTag};
use crate::swap::{
    check_dataset, emit_dataset, merge_segments, read_dataset, segment_id, segment_vectors, swap_video,
    CuratedVideo, RetrievalPool, StepPool,
};
use crate::textnorm::Stoplist;

pub const TITLE_PAIRS: &str = "title_pairs.jsonl";
pub const PAIRS: &str = "pairs.jsonl";
pub const SPLIT: &str = "split.jsonl";
pub const SEGMENT_TEXTS: &str = "segment_texts.jsonl";
pub const STEP_TEXTS: &str = "step_texts.jsonl";
pub const DATASET: &str = "dataset.jsonl";
pub const MANIFEST: &str = "manifest.json";
pub const REPORT: &str = "report.json";
pub const WORD_DELTAS: &str = "word_deltas.csv";
pub const SENTENCE_COUNTS: &str = "sentence_content_counts.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    SieveTitles,
    SieveContent,
    Swap,
    Stats,
    Validate,
    Pipeline,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::SieveTitles => "sieve-titles",
            Stage::SieveContent => "sieve-content",
            Stage::Swap => "swap",
            Stage::Stats => "stats",
            Stage::Validate => "validate",
            Stage::Pipeline => "pipeline",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: CurateError,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitlePair {
    pub video_id: String,
    pub recipe_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub video_id: String,
    pub split: SplitTag,
}

/// Input line for the embedding sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
}

/// Runs one stage, inside a pool of `config.workers` threads when set.
pub fn run(stage: Stage, config: &PipelineConfig) -> Result<(), StageError> {
    config.validate().map_err(|error| StageError { stage, error })?;
    match config.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| StageError {
                    stage,
                    error: CurateError::Invalid(format!("thread pool: {e}")),
                })?;
            pool.install(|| dispatch(stage, config))
        }
        None => dispatch(stage, config),
    }
}

fn dispatch(stage: Stage, config: &PipelineConfig) -> Result<(), StageError> {
    let tag = |stage| move |error| StageError { stage, error };
    match stage {
        Stage::SieveTitles => sieve_titles_stage(config).map_err(tag(stage)),
        Stage::SieveContent => sieve_content_stage(config).map_err(tag(stage)),
        Stage::Swap => swap_stage(config).map_err(tag(stage)),
        Stage::Stats => stats_stage(config).map_err(tag(stage)),
        Stage::Validate => validate_stage(config).map_err(tag(stage)),
        Stage::Pipeline => {
            for s in [Stage::SieveTitles, Stage::SieveContent, Stage::Swap, Stage::Stats] {
                dispatch(s, config)?;
            }
            Ok(())
        }
    }
}

pub fn load_videos(path: &Path, mode: IngestMode) -> Result<Vec<VideoRecord>> {
    let mut reader = parse_videos(path, mode)?;
    let videos = reader.by_ref().collect::<Result<Vec<_>>>()?;
    let stats = reader.stats();
    log::info!(
        "{}: {} videos, {} rejected lines, {} dropped segments",
        path.display(),
        stats.records,
        stats.rejected_lines,
        stats.dropped_segments
    );
    Ok(videos)
}

pub fn load_recipes(path: &Path, mode: IngestMode) -> Result<Vec<Recipe>> {
    let mut reader = parse_recipes(path, mode)?;
    let recipes = reader.by_ref().collect::<Result<Vec<_>>>()?;
    let stats = reader.stats();
    log::info!(
        "{}: {} recipes, {} rejected lines, {} dropped steps",
        path.display(),
        stats.records,
        stats.rejected_lines,
        stats.dropped_steps
    );
    Ok(recipes)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| CurateError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| CurateError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CurateError::io(path, e))?;
    }
    w.flush().map_err(|e| CurateError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| CurateError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CurateError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CurateError::Malformed {
            line: i + 1,
            message: format!("{}: {e}", path.display()),
        })?);
    }
    Ok(out)
}

fn write_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CurateError::io(path, e.into()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CurateError::io(path, e))
}

fn out_dir(config: &PipelineConfig) -> Result<PathBuf> {
    let dir = config.require("out_dir")?.to_path_buf();
    fs::create_dir_all(&dir).map_err(|e| CurateError::io(&dir, e))?;
    Ok(dir)
}

/// Reads an intermediate file, naming the stage that produces it when absent.
fn intermediate(dir: &Path, name: &str, producer: Stage) -> Result<PathBuf> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(CurateError::Invalid(format!(
            "{} not found; run `{producer}` first",
            path.display()
        )));
    }
    Ok(path)
}

fn stoplist(config: &PipelineConfig) -> Result<Stoplist> {
    Stoplist::load(config.function_words.as_deref(), config.generic_words.as_deref())
}

fn source_videos(config: &PipelineConfig) -> Result<Vec<VideoRecord>> {
    let videos = load_videos(config.require_file("videos")?, config.ingest_mode())?;
    Ok(filter_source(videos, config.source_filter()))
}

/// Filters the source videos and pairs them with recipes by title words.
pub fn sieve_titles_stage(config: &PipelineConfig) -> Result<()> {
    let videos = source_videos(config)?;
    let recipes = load_recipes(config.require_file("recipes")?, config.ingest_mode())?;
    let dir = out_dir(config)?;
    let pairing = pair_by_title(&videos, &recipes, &stoplist(config)?);
    log::info!(
        "title sieve: {} pairs, {} videos, {} recipes",
        pairing.pairs.len(),
        pairing.videos.len(),
        pairing.recipes.len()
    );
    write_jsonl(
        &dir.join(TITLE_PAIRS),
        pairing.pairs.into_iter().map(|(video_id, recipe_id)| TitlePair { video_id, recipe_id }),
    )
}

/// Scores title pairs by transcript overlap, keeps the strong ones, splits
/// the surviving videos and writes the texts the embedder needs.
pub fn sieve_content_stage(config: &PipelineConfig) -> Result<()> {
    let videos = source_videos(config)?;
    let recipes = load_recipes(config.require_file("recipes")?, config.ingest_mode())?;
    let dir = out_dir(config)?;
    let title_pairs: Vec<TitlePair> = read_jsonl(&intermediate(&dir, TITLE_PAIRS, Stage::SieveTitles)?)?;
    let pairs: Vec<(String, String)> = title_pairs.into_iter().map(|p| (p.video_id, p.recipe_id)).collect();
    let scores = score_pairs(&pairs, &videos, &recipes, &stoplist(config)?, config.recall_denominator);
    let sieve = sieve_content(scores, config.content_thresholds());
    let split = split_train_val(&sieve.kept, config.lambda_val);
    log::info!(
        "content sieve: {} pairs kept, {} videos, {} recipes",
        sieve.kept.len(),
        sieve.videos.len(),
        sieve.recipes.len()
    );
    write_jsonl(&dir.join(PAIRS), &sieve.kept)?;
    write_jsonl(
        &dir.join(SPLIT),
        split.iter().map(|(video_id, &split)| SplitRecord {
            video_id: video_id.clone(),
            split,
        }),
    )?;

    let merge = config.merge_params();
    let mut segment_texts = Vec::new();
    for video in videos.iter().filter(|v| sieve.videos.contains(&v.video_id)) {
        for (i, seg) in merge_segments(&video.segments, merge).into_iter().enumerate() {
            segment_texts.push(TextRecord {
                id: segment_id(&video.video_id, i),
                text: seg.text,
            });
        }
    }
    segment_texts.sort_by(|a, b| a.id.cmp(&b.id));
    write_jsonl(&dir.join(SEGMENT_TEXTS), segment_texts)?;

    let mut step_texts = Vec::new();
    for recipe in recipes.iter().filter(|r| sieve.recipes.contains(&r.recipe_id)) {
        for (i, step) in recipe.steps.iter().enumerate() {
            step_texts.push(TextRecord {
                id: StepRef::new(recipe.recipe_id.clone(), i).to_string(),
                text: step.clone(),
            });
        }
    }
    step_texts.sort_by(|a, b| a.id.cmp(&b.id));
    write_jsonl(&dir.join(STEP_TEXTS), step_texts)
}

fn load_matrix(config: &PipelineConfig, field: &str) -> Result<EmbeddingMatrix> {
    let path = config.require_file(field)?;
    load_embeddings(path, &ids_path_for(path))
}

/// Swaps the merged segments of every sieved video for recipe steps.
pub fn swap_stage(config: &PipelineConfig) -> Result<()> {
    let videos = source_videos(config)?;
    let recipes = load_recipes(config.require_file("recipes")?, config.ingest_mode())?;
    let dir = out_dir(config)?;
    let kept: Vec<PairScore> = read_jsonl(&intermediate(&dir, PAIRS, Stage::SieveContent)?)?;
    let split: Vec<SplitRecord> = read_jsonl(&intermediate(&dir, SPLIT, Stage::SieveContent)?)?;
    let step_matrix = load_matrix(config, "step_emb")?;
    let seg_matrix = load_matrix(config, "seg_emb")?;

    let mut paired: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for p in &kept {
        paired.entry(p.video_id.as_str()).or_default().insert(p.recipe_id.clone());
    }
    let sieved: BTreeSet<&str> = kept.iter().map(|p| p.recipe_id.as_str()).collect();
    let sieved_recipes: Vec<Recipe> = recipes
        .into_iter()
        .filter(|r| sieved.contains(r.recipe_id.as_str()))
        .collect();
    let pool = StepPool::new(&step_matrix, &sieved_recipes)?;
    let by_id: HashMap<&str, &VideoRecord> = videos.iter().map(|v| (v.video_id.as_str(), v)).collect();
    let params = config.swap_params();

    let outcomes: Vec<Result<CuratedVideo>> = split
        .par_iter()
        .map(|rec| {
            let video = by_id
                .get(rec.video_id.as_str())
                .ok_or_else(|| CurateError::UnknownIds(vec![rec.video_id.clone()]))?;
            let merged = merge_segments(&video.segments, params.merge).len();
            let vectors = segment_vectors(&seg_matrix, &video.video_id, merged)?;
            let only = match config.retrieval_pool {
                RetrievalPool::Global => None,
                RetrievalPool::Paired => paired.get(video.video_id.as_str()),
            };
            swap_video(video, rec.split, &vectors, &pool, only, params)
        })
        .collect();
    let mut curated = Vec::with_capacity(outcomes.len());
    let mut failed = 0;
    for (rec, outcome) in split.iter().zip(outcomes) {
        match outcome {
            Ok(video) => curated.push(video),
            Err(e) => {
                log::warn!("swap: video `{}` failed: {e}", rec.video_id);
                failed += 1;
            }
        }
    }
    let manifest = emit_dataset(curated, failed, config.echo(), &dir.join(DATASET), &dir.join(MANIFEST))?;
    log::info!(
        "swap: {} videos, {} failed, {} -> {} segments",
        manifest.videos,
        manifest.failed_videos,
        manifest.segments_before,
        manifest.segments_after
    );
    Ok(())
}

/// Writes dataset statistics and raw-versus-curated word counts.
pub fn stats_stage(config: &PipelineConfig) -> Result<()> {
    let raw = load_videos(config.require_file("videos")?, config.ingest_mode())?;
    let recipes = load_recipes(config.require_file("recipes")?, config.ingest_mode())?;
    let dir = out_dir(config)?;
    let dataset = read_dataset(&intermediate(&dir, DATASET, Stage::Swap)?)?;
    let sources: HashMap<String, VideoRecord> = raw.iter().map(|v| (v.video_id.clone(), v.clone())).collect();
    let recipe_map: HashMap<String, Recipe> = recipes.into_iter().map(|r| (r.recipe_id.clone(), r)).collect();
    let report = compute_stats(&dataset, &sources, Some(&recipe_map))?;
    write_pretty(&dir.join(REPORT), &report)?;
    let deltas = compute_word_deltas(&raw, &dataset, &stoplist(config)?);
    write_word_deltas(&deltas, &dir.join(WORD_DELTAS))?;
    write_sentence_counts(&deltas, &dir.join(SENTENCE_COUNTS))
}

/// Checks an existing dataset against every curated-video invariant.
pub fn validate_stage(config: &PipelineConfig) -> Result<()> {
    let dir = config.require("out_dir")?;
    let dataset = read_dataset(&intermediate(dir, DATASET, Stage::Swap)?)?;
    let recipes: Option<HashMap<String, Recipe>> = match &config.recipes {
        Some(path) => Some(
            load_recipes(path, config.ingest_mode())?
                .into_iter()
                .map(|r| (r.recipe_id.clone(), r))
                .collect(),
        ),
        None => None,
    };
    let sources: Option<HashMap<String, VideoRecord>> = match &config.videos {
        Some(path) => Some(
            load_videos(path, config.ingest_mode())?
                .into_iter()
                .map(|v| (v.video_id.clone(), v))
                .collect(),
        ),
        None => None,
    };
    let problems = check_dataset(
        &dataset,
        config.lambda_sim,
        recipes.as_ref(),
        sources.as_ref(),
        config.merge_params(),
    );
    if problems.is_empty() {
        log::info!("validate: {} videos ok", dataset.len());
        Ok(())
    } else {
        Err(CurateError::Violations(problems))
    }
}
