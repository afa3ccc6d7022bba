//! Source-corpus data model: videos with timestamped ASR segments, text-only
//! recipes, and the streaming JSONL readers that ingest them.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CurateError, Result};

/// Slack allowed between a segment's end and the video duration (ASR drift).
pub const SEGMENT_END_SLACK_S: f64 = 1.0;

/// One timestamped ASR transcript segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsrSegment {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl AsrSegment {
    pub fn new(text: impl Into<String>, start_s: f64, end_s: f64) -> Self {
        AsrSegment {
            text: text.into(),
            start_s,
            end_s,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    fn check(&self, duration_s: f64) -> std::result::Result<(), String> {
        if !(self.start_s.is_finite() && self.end_s.is_finite()) {
            return Err("non-finite timestamp".into());
        }
        if self.start_s < 0.0 {
            return Err(format!("negative start_s {}", self.start_s));
        }
        if self.start_s >= self.end_s {
            return Err(format!(
                "start_s {} is not before end_s {}",
                self.start_s, self.end_s
            ));
        }
        if self.end_s > duration_s + SEGMENT_END_SLACK_S {
            return Err(format!(
                "end_s {} exceeds duration {}",
                self.end_s, duration_s
            ));
        }
        if self.text.trim().is_empty() {
            return Err("empty segment text".into());
        }
        Ok(())
    }
}

/// Orders segments by start, then end.
pub fn segment_order(a: &AsrSegment, b: &AsrSegment) -> Ordering {
    a.start_s
        .total_cmp(&b.start_s)
        .then(a.end_s.total_cmp(&b.end_s))
}

/// A source video: title, duration, category and its transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub title: String,
    pub duration_s: f64,
    pub category: String,
    pub segments: Vec<AsrSegment>,
}

/// A text-only recipe with ordered instruction steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub recipe_id: String,
    pub title: String,
    pub steps: Vec<String>,
}

/// Addresses one step of one recipe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepRef {
    pub recipe_id: String,
    pub step_index: usize,
}

impl StepRef {
    pub fn new(recipe_id: impl Into<String>, step_index: usize) -> Self {
        StepRef {
            recipe_id: recipe_id.into(),
            step_index,
        }
    }

    /// Resolves the step text, if the recipe holds that many steps.
    pub fn resolve<'r>(&self, recipe: &'r Recipe) -> Option<&'r str> {
        if recipe.recipe_id != self.recipe_id {
            return None;
        }
        recipe.steps.get(self.step_index).map(String::as_str)
    }
}

/// Embedding-file id form: `<recipe_id>#<step_index>`.
impl fmt::Display for StepRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.recipe_id, self.step_index)
    }
}

impl FromStr for StepRef {
    type Err = CurateError;

    fn from_str(s: &str) -> Result<Self> {
        let (recipe_id, index) = s
            .rsplit_once('#')
            .ok_or_else(|| CurateError::Invalid(format!("step id `{s}` lacks `#<index>`")))?;
        let step_index = index
            .parse()
            .map_err(|_| CurateError::Invalid(format!("step id `{s}` has a bad index")))?;
        Ok(StepRef::new(recipe_id, step_index))
    }
}

/// Strict ingestion aborts on the first bad line; lenient skips and counts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    #[default]
    Strict,
    Lenient,
}

/// Counters kept while streaming a corpus file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub lines: usize,
    pub records: usize,
    pub rejected_lines: usize,
    pub dropped_segments: usize,
    pub dropped_steps: usize,
}

#[derive(Deserialize)]
struct RawVideo {
    video_id: String,
    title: String,
    duration_s: f64,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    segments: Vec<AsrSegment>,
}

#[derive(Deserialize)]
struct RawRecipe {
    recipe_id: String,
    title: String,
    steps: Vec<String>,
}

enum LineOutcome<T> {
    Record(T),
    /// Line parsed but the record is unusable; always skipped and counted.
    Rejected,
}

/// Shared line-streaming machinery for both corpus readers.
struct JsonlLines<R> {
    inner: std::io::Lines<R>,
    line: usize,
    mode: IngestMode,
    seen: HashSet<String>,
    stats: IngestStats,
    finished: bool,
}

impl<R: BufRead> JsonlLines<R> {
    fn new(reader: R, mode: IngestMode) -> Self {
        JsonlLines {
            inner: reader.lines(),
            line: 0,
            mode,
            seen: HashSet::new(),
            stats: IngestStats::default(),
            finished: false,
        }
    }

    fn next_with<T>(
        &mut self,
        mut parse: impl FnMut(&str, IngestMode, &mut IngestStats) -> std::result::Result<LineOutcome<T>, String>,
        id_of: impl Fn(&T) -> &str,
    ) -> Option<Result<T>> {
        while !self.finished {
            let text = match self.inner.next()? {
                Ok(text) => text,
                Err(e) => {
                    self.finished = true;
                    return Some(Err(CurateError::Malformed {
                        line: self.line + 1,
                        message: e.to_string(),
                    }));
                }
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            self.stats.lines += 1;
            match parse(&text, self.mode, &mut self.stats) {
                Ok(LineOutcome::Record(record)) => {
                    let id = id_of(&record);
                    if !self.seen.insert(id.to_owned()) {
                        self.finished = true;
                        return Some(Err(CurateError::DuplicateId {
                            line: self.line,
                            id: id.to_owned(),
                        }));
                    }
                    self.stats.records += 1;
                    return Some(Ok(record));
                }
                Ok(LineOutcome::Rejected) => {
                    self.stats.rejected_lines += 1;
                }
                Err(message) => match self.mode {
                    IngestMode::Strict => {
                        self.finished = true;
                        return Some(Err(CurateError::Malformed {
                            line: self.line,
                            message,
                        }));
                    }
                    IngestMode::Lenient => {
                        log::debug!("skipping line {}: {}", self.line, message);
                        self.stats.rejected_lines += 1;
                    }
                },
            }
        }
        None
    }
}

fn parse_video_line(
    text: &str,
    mode: IngestMode,
    stats: &mut IngestStats,
) -> std::result::Result<LineOutcome<VideoRecord>, String> {
    let raw: RawVideo = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if raw.video_id.is_empty() {
        return Err("empty video_id".into());
    }
    if !(raw.duration_s.is_finite() && raw.duration_s > 0.0) {
        return Err(format!("video `{}`: bad duration_s {}", raw.video_id, raw.duration_s));
    }
    let category = match raw.category {
        Some(c) if !c.trim().is_empty() => c,
        _ => return Err(format!("video `{}`: missing category", raw.video_id)),
    };
    let mut segments = Vec::with_capacity(raw.segments.len());
    for (i, seg) in raw.segments.into_iter().enumerate() {
        match seg.check(raw.duration_s) {
            Ok(()) => segments.push(seg),
            Err(why) => match mode {
                IngestMode::Strict => {
                    return Err(format!("video `{}` segment {}: {}", raw.video_id, i, why))
                }
                IngestMode::Lenient => stats.dropped_segments += 1,
            },
        }
    }
    segments.sort_by(segment_order);
    Ok(LineOutcome::Record(VideoRecord {
        video_id: raw.video_id,
        title: raw.title,
        duration_s: raw.duration_s,
        category,
        segments,
    }))
}

fn parse_recipe_line(
    text: &str,
    _mode: IngestMode,
    stats: &mut IngestStats,
) -> std::result::Result<LineOutcome<Recipe>, String> {
    let raw: RawRecipe = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if raw.recipe_id.is_empty() {
        return Err("empty recipe_id".into());
    }
    let before = raw.steps.len();
    let steps: Vec<String> = raw
        .steps
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .collect();
    stats.dropped_steps += before - steps.len();
    if steps.is_empty() {
        return Ok(LineOutcome::Rejected);
    }
    Ok(LineOutcome::Record(Recipe {
        recipe_id: raw.recipe_id,
        title: raw.title,
        steps,
    }))
}

/// Streams [`VideoRecord`]s from a `videos.jsonl` source.
pub struct VideoReader<R> {
    lines: JsonlLines<R>,
}

impl<R: BufRead> VideoReader<R> {
    pub fn new(reader: R, mode: IngestMode) -> Self {
        VideoReader {
            lines: JsonlLines::new(reader, mode),
        }
    }

    pub fn stats(&self) -> IngestStats {
        self.lines.stats
    }
}

impl<R: BufRead> Iterator for VideoReader<R> {
    type Item = Result<VideoRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        self.lines
            .next_with(parse_video_line, |v: &VideoRecord| &v.video_id)
    }
}

/// Streams [`Recipe`]s from a `recipes.jsonl` source.
pub struct RecipeReader<R> {
    lines: JsonlLines<R>,
}

impl<R: BufRead> RecipeReader<R> {
    pub fn new(reader: R, mode: IngestMode) -> Self {
        RecipeReader {
            lines: JsonlLines::new(reader, mode),
        }
    }

    pub fn stats(&self) -> IngestStats {
        self.lines.stats
    }
}

impl<R: BufRead> Iterator for RecipeReader<R> {
    type Item = Result<Recipe>;

    fn next(&mut self) -> Option<Self::Item> {
        self.lines
            .next_with(parse_recipe_line, |r: &Recipe| &r.recipe_id)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CurateError::io(path, e))
}

/// Opens `path` for lazy video ingestion.
pub fn parse_videos(path: &Path, mode: IngestMode) -> Result<VideoReader<BufReader<File>>> {
    Ok(VideoReader::new(open(path)?, mode))
}

/// Opens `path` for lazy recipe ingestion.
pub fn parse_recipes(path: &Path, mode: IngestMode) -> Result<RecipeReader<BufReader<File>>> {
    Ok(RecipeReader::new(open(path)?, mode))
}

/// Source filtering thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceFilter {
    pub max_duration_s: f64,
    pub min_per_category: usize,
}

impl Default for SourceFilter {
    fn default() -> Self {
        SourceFilter {
            max_duration_s: 600.0,
            min_per_category: 5,
        }
    }
}

/// Keeps videos no longer than the duration cap whose category still holds at
/// least `min_per_category` videos once the duration cap is applied.
/// Output preserves input order.
pub fn filter_source(videos: Vec<VideoRecord>, filter: SourceFilter) -> Vec<VideoRecord> {
    let short: Vec<VideoRecord> = videos
        .into_iter()
        .filter(|v| v.duration_s <= filter.max_duration_s)
        .collect();
    let mut per_category: HashMap<&str, usize> = HashMap::new();
    for v in &short {
        *per_category.entry(v.category.as_str()).or_default() += 1;
    }
    let keep: Vec<bool> = short
        .iter()
        .map(|v| per_category[v.category.as_str()] >= filter.min_per_category)
        .collect();
    short
        .into_iter()
        .zip(keep)
        .filter_map(|(v, k)| k.then_some(v))
        .collect()
}
