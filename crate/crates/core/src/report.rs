//! Dataset statistics and raw-versus-curated content-word comparisons.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Recipe, VideoRecord};
use crate::error::{CurateError, Result};
use crate::swap::CuratedVideo;
use crate::textnorm::{content_lemmas, tokenize, ContentSelector};

pub const TOP_RECIPE_TITLES: usize = 50;
pub const SEGMENT_DURATION_BIN_S: f64 = 1.0;
pub const VIDEO_DURATION_BIN_S: f64 = 10.0;

/// Fixed-width histogram starting at zero; bin `k` covers `[k*w, (k+1)*w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
    pub mean: f64,
}

impl Histogram {
    pub fn from_values(bin_width: f64, values: impl IntoIterator<Item = f64>) -> Self {
        let mut counts: Vec<u64> = Vec::new();
        let mut total = 0u64;
        let mut sum = 0.0;
        for v in values {
            let bin = (v.max(0.0) / bin_width).floor() as usize;
            if counts.len() <= bin {
                counts.resize(bin + 1, 0);
            }
            counts[bin] += 1;
            total += 1;
            sum += v;
        }
        let mean = if total == 0 { 0.0 } else { sum / total as f64 };
        Histogram {
            bin_width,
            counts,
            total,
            mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitleCount {
    pub title: String,
    pub count: u64,
}

/// Values measured on the full-size curated corpus, kept for comparison.
/// They are never expected from small inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub segments_before: u64,
    pub segments_after: u64,
    pub train_videos: u64,
    pub validation_videos: u64,
    pub distinct_recipes: u64,
    pub mean_steps_per_video: f64,
    pub mean_segment_duration_s: f64,
    pub mean_video_duration_s: f64,
}

pub const FULL_CORPUS_REFERENCE: ReferenceValues = ReferenceValues {
    segments_before: 2_750_000,
    segments_after: 510_000,
    train_videos: 48_000,
    validation_videos: 3_000,
    distinct_recipes: 4_109,
    mean_steps_per_video: 10.6,
    mean_segment_duration_s: 11.83,
    mean_video_duration_s: 310.5,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub video_count: u64,
    pub segment_count_before: u64,
    pub segment_count_after: u64,
    pub reduction_ratio: f64,
    pub steps_per_video: Histogram,
    pub segment_duration_s: Histogram,
    pub video_duration_s: Histogram,
    pub words_per_step: Histogram,
    pub unique_recipes_used: u64,
    pub top_recipe_titles: Vec<TitleCount>,
    pub full_corpus_reference: ReferenceValues,
}

/// Summarises a curated dataset against its source videos.
///
/// `recipes`, when given, keys the top-recipe table by title; otherwise by
/// recipe id.
pub fn compute_stats(
    dataset: &[CuratedVideo],
    sources: &HashMap<String, VideoRecord>,
    recipes: Option<&HashMap<String, Recipe>>,
) -> Result<DatasetReport> {
    let unknown: Vec<String> = dataset
        .iter()
        .filter(|v| !sources.contains_key(&v.video_id))
        .map(|v| v.video_id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(CurateError::UnknownIds(unknown));
    }
    let before: u64 = dataset
        .iter()
        .map(|v| sources[&v.video_id].segments.len() as u64)
        .sum();
    let after: u64 = dataset.iter().map(|v| v.segments.len() as u64).sum();
    let segments = || dataset.iter().flat_map(|v| &v.segments);

    let mut by_title: BTreeMap<String, u64> = BTreeMap::new();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    for seg in segments() {
        used.insert(&seg.step.recipe_id);
        let key = recipes
            .and_then(|r| r.get(&seg.step.recipe_id))
            .map_or_else(|| seg.step.recipe_id.clone(), |r| r.title.clone());
        *by_title.entry(key).or_default() += 1;
    }
    let mut top: Vec<TitleCount> = by_title
        .into_iter()
        .map(|(title, count)| TitleCount { title, count })
        .collect();
    top.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.title.cmp(&b.title)));
    top.truncate(TOP_RECIPE_TITLES);

    Ok(DatasetReport {
        video_count: dataset.len() as u64,
        segment_count_before: before,
        segment_count_after: after,
        reduction_ratio: if before == 0 { 0.0 } else { after as f64 / before as f64 },
        steps_per_video: Histogram::from_values(1.0, dataset.iter().map(|v| v.segments.len() as f64)),
        segment_duration_s: Histogram::from_values(
            SEGMENT_DURATION_BIN_S,
            segments().map(|s| s.end_s - s.start_s),
        ),
        video_duration_s: Histogram::from_values(
            VIDEO_DURATION_BIN_S,
            dataset.iter().map(|v| sources[&v.video_id].duration_s),
        ),
        words_per_step: Histogram::from_values(1.0, segments().map(|s| tokenize(&s.text).len() as f64)),
        unique_recipes_used: used.len() as u64,
        top_recipe_titles: top,
        full_corpus_reference: FULL_CORPUS_REFERENCE,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordDelta {
    pub lemma: String,
    pub count_raw: u64,
    pub count_curated: u64,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordDeltaReport {
    /// Sorted by |delta| descending, then lemma.
    pub deltas: Vec<WordDelta>,
    /// Content words per raw ASR segment.
    pub raw_sentence_counts: Vec<u64>,
    /// Content words per curated step.
    pub curated_sentence_counts: Vec<u64>,
}

/// Compares content-word frequencies of raw transcripts with curated steps.
pub fn compute_word_deltas<'a, S: ContentSelector + ?Sized>(
    raw: impl IntoIterator<Item = &'a VideoRecord>,
    curated: &[CuratedVideo],
    selector: &S,
) -> WordDeltaReport {
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut report = WordDeltaReport::default();
    for video in raw {
        for seg in &video.segments {
            let lemmas = content_lemmas(&seg.text, selector);
            report.raw_sentence_counts.push(lemmas.len() as u64);
            for l in lemmas {
                counts.entry(l).or_default().0 += 1;
            }
        }
    }
    for seg in curated.iter().flat_map(|v| &v.segments) {
        let lemmas = content_lemmas(&seg.text, selector);
        report.curated_sentence_counts.push(lemmas.len() as u64);
        for l in lemmas {
            counts.entry(l).or_default().1 += 1;
        }
    }
    report.deltas = counts
        .into_iter()
        .map(|(lemma, (raw, cur))| WordDelta {
            lemma,
            count_raw: raw,
            count_curated: cur,
            delta: cur as i64 - raw as i64,
        })
        .collect();
    report
        .deltas
        .sort_by(|a, b| b.delta.abs().cmp(&a.delta.abs()).then_with(|| a.lemma.cmp(&b.lemma)));
    report
}

fn csv_err(path: &Path, e: csv::Error) -> CurateError {
    CurateError::io(path, e.into())
}

/// Writes `lemma,count_raw,count_curated,delta`.
pub fn write_word_deltas(report: &WordDeltaReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in &report.deltas {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CurateError::io(path, e))
}

/// Writes `corpus,content_words`, one row per sentence.
pub fn write_sentence_counts(report: &WordDeltaReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["corpus", "content_words"]).map_err(|e| csv_err(path, e))?;
    let rows = report
        .raw_sentence_counts
        .iter()
        .map(|c| ("raw", c))
        .chain(report.curated_sentence_counts.iter().map(|c| ("curated", c)));
    for (corpus, count) in rows {
        w.write_record([corpus, &count.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CurateError::io(path, e))
}
