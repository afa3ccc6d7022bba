//! Merges short ASR segments, swaps each one for its nearest recipe step,
//! drops weak matches, collapses repeated steps and writes the curated
//! dataset.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{AsrSegment, Recipe, StepRef, VideoRecord};
use crate::embedindex::EmbeddingMatrix;
use crate::error::{CurateError, Result};
use crate::sieve::SplitTag;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeParams {
    pub max_dur_s: f64,
    pub max_gap_s: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        MergeParams {
            max_dur_s: 8.0,
            max_gap_s: 4.0,
        }
    }
}

/// A run of consecutive ASR segments treated as one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedSegment {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
    /// Indices into the original segment list.
    pub sources: Vec<usize>,
}

impl MergedSegment {
    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn to_asr(&self) -> AsrSegment {
        AsrSegment::new(self.text.clone(), self.start_s, self.end_s)
    }
}

/// One applied merge, recorded for auditing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    pub next_index: usize,
    pub current_duration: f64,
    pub next_duration: f64,
    pub gap: f64,
}

/// Gap between two segments, floored at zero for overlaps.
pub fn segment_gap(current_end: f64, next_start: f64) -> f64 {
    (next_start - current_end).max(0.0)
}

/// Greedy left-to-right merge. The current run absorbs the next segment when
/// both are shorter than `max_dur_s` and the gap is below `max_gap_s`.
pub fn merge_segments(segments: &[AsrSegment], params: MergeParams) -> Vec<MergedSegment> {
    merge_segments_traced(segments, params).0
}

pub fn merge_segments_traced(
    segments: &[AsrSegment],
    params: MergeParams,
) -> (Vec<MergedSegment>, Vec<MergeStep>) {
    let mut out: Vec<MergedSegment> = Vec::new();
    let mut trace = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        if let Some(current) = out.last_mut() {
            let step = MergeStep {
                next_index: i,
                current_duration: current.duration(),
                next_duration: seg.duration(),
                gap: segment_gap(current.end_s, seg.start_s),
            };
            if step.current_duration < params.max_dur_s
                && step.next_duration < params.max_dur_s
                && step.gap < params.max_gap_s
            {
                current.text.push(' ');
                current.text.push_str(&seg.text);
                current.end_s = current.end_s.max(seg.end_s);
                current.sources.push(i);
                trace.push(step);
                continue;
            }
        }
        out.push(MergedSegment {
            text: seg.text.clone(),
            start_s: seg.start_s,
            end_s: seg.end_s,
            sources: vec![i],
        });
    }
    (out, trace)
}

/// A transcript segment replaced by a recipe step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SegmentWire", from = "SegmentWire")]
pub struct SwapSegment {
    pub step: StepRef,
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
    pub similarity: f64,
    /// Original ASR segment indices; not serialized.
    pub source_segment_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SegmentWire {
    recipe_id: String,
    step_index: usize,
    text: String,
    start_s: f64,
    end_s: f64,
    similarity: f64,
}

impl From<SwapSegment> for SegmentWire {
    fn from(s: SwapSegment) -> Self {
        SegmentWire {
            recipe_id: s.step.recipe_id,
            step_index: s.step.step_index,
            text: s.text,
            start_s: s.start_s,
            end_s: s.end_s,
            similarity: s.similarity,
        }
    }
}

impl From<SegmentWire> for SwapSegment {
    fn from(w: SegmentWire) -> Self {
        SwapSegment {
            step: StepRef::new(w.recipe_id, w.step_index),
            text: w.text,
            start_s: w.start_s,
            end_s: w.end_s,
            similarity: w.similarity,
            source_segment_indices: Vec::new(),
        }
    }
}

/// A curated video: original title and timestamps, recipe-step text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratedVideo {
    pub video_id: String,
    pub title: String,
    pub split: SplitTag,
    pub segments: Vec<SwapSegment>,
    /// Raw ASR segment count of the source video.
    #[serde(skip)]
    pub source_segment_count: usize,
    /// Segment count after merging.
    #[serde(skip)]
    pub merged_segment_count: usize,
}

/// Which recipe steps a video may retrieve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetrievalPool {
    /// Every step of every sieved recipe.
    #[default]
    Global,
    /// Only steps of the recipes paired with the video.
    Paired,
}

/// Step embeddings resolved against the sieved recipes.
pub struct StepPool<'a> {
    matrix: &'a EmbeddingMatrix,
    refs: Vec<Option<StepRef>>,
    recipes: HashMap<&'a str, &'a Recipe>,
}

impl<'a> StepPool<'a> {
    /// Keeps the rows whose id names a step of one of `recipes`; every step
    /// of those recipes must have a row.
    pub fn new(matrix: &'a EmbeddingMatrix, recipes: &'a [Recipe]) -> Result<Self> {
        let by_id: HashMap<&str, &Recipe> =
            recipes.iter().map(|r| (r.recipe_id.as_str(), r)).collect();
        let mut refs = Vec::with_capacity(matrix.len());
        let mut covered: BTreeSet<StepRef> = BTreeSet::new();
        for id in matrix.ids() {
            let step = id
                .parse::<StepRef>()
                .ok()
                .filter(|s| by_id.get(s.recipe_id.as_str()).is_some_and(|r| s.step_index < r.steps.len()));
            if let Some(s) = &step {
                covered.insert(s.clone());
            }
            refs.push(step);
        }
        let mut missing = Vec::new();
        for r in recipes {
            for i in 0..r.steps.len() {
                let s = StepRef::new(r.recipe_id.clone(), i);
                if !covered.contains(&s) {
                    missing.push(s.to_string());
                }
            }
        }
        if !missing.is_empty() {
            missing.truncate(20);
            return Err(CurateError::Invalid(format!(
                "step embeddings missing for: {}",
                missing.join(", ")
            )));
        }
        Ok(StepPool {
            matrix,
            refs,
            recipes: by_id,
        })
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        self.matrix
    }

    pub fn step_text(&self, step: &StepRef) -> Option<&str> {
        step.resolve(self.recipes.get(step.recipe_id.as_str())?)
    }

    /// Nearest allowed step to `vector`.
    pub fn nearest(
        &self,
        vector: &[f32],
        only: Option<&BTreeSet<String>>,
    ) -> Result<Option<(StepRef, f64)>> {
        let hits = self.matrix.query_where(vector, 1, |row| match &self.refs[row] {
            Some(step) => only.is_none_or(|ids| ids.contains(&step.recipe_id)),
            None => false,
        })?;
        Ok(hits.into_iter().next().map(|hit| {
            let row = self.matrix.position(&hit.id).expect("hit id is indexed");
            (self.refs[row].clone().expect("hit row is allowed"), hit.similarity)
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapParams {
    pub merge: MergeParams,
    pub sim_threshold: f64,
}

impl Default for SwapParams {
    fn default() -> Self {
        SwapParams {
            merge: MergeParams::default(),
            sim_threshold: 0.75,
        }
    }
}

/// Segment-embedding id form: `<video_id>#<merged_index>`.
pub fn segment_id(video_id: &str, merged_index: usize) -> String {
    format!("{video_id}#{merged_index}")
}

/// Looks up one vector per merged segment of `video_id`.
pub fn segment_vectors<'m>(
    matrix: &'m EmbeddingMatrix,
    video_id: &str,
    merged_count: usize,
) -> Result<Vec<&'m [f32]>> {
    let mut out = Vec::with_capacity(merged_count);
    for i in 0..merged_count {
        match matrix.get(&segment_id(video_id, i)) {
            Some(v) => out.push(v),
            None => break,
        }
    }
    let mut available = out.len();
    if available == merged_count {
        while matrix.get(&segment_id(video_id, available)).is_some() {
            available += 1;
        }
    }
    if available != merged_count {
        return Err(CurateError::SegmentCountMismatch {
            video_id: video_id.to_owned(),
            expected: merged_count,
            actual: available,
        });
    }
    Ok(out)
}

/// Joins consecutive segments that retrieved the same step.
pub fn collapse_repeats(segments: Vec<SwapSegment>) -> Vec<SwapSegment> {
    let mut out: Vec<SwapSegment> = Vec::with_capacity(segments.len());
    for seg in segments {
        match out.last_mut() {
            Some(last) if last.step == seg.step => {
                last.start_s = last.start_s.min(seg.start_s);
                last.end_s = last.end_s.max(seg.end_s);
                last.similarity = last.similarity.max(seg.similarity);
                last.source_segment_indices.extend(seg.source_segment_indices);
            }
            _ => out.push(seg),
        }
    }
    out
}

/// Swaps the merged segments of one video for recipe steps.
///
/// `seg_vectors` must hold one embedding per merged segment, in order.
pub fn swap_video(
    video: &VideoRecord,
    split: SplitTag,
    seg_vectors: &[&[f32]],
    pool: &StepPool<'_>,
    only_recipes: Option<&BTreeSet<String>>,
    params: SwapParams,
) -> Result<CuratedVideo> {
    let merged = merge_segments(&video.segments, params.merge);
    if merged.len() != seg_vectors.len() {
        return Err(CurateError::SegmentCountMismatch {
            video_id: video.video_id.clone(),
            expected: merged.len(),
            actual: seg_vectors.len(),
        });
    }
    let mut kept = Vec::new();
    for (seg, vector) in merged.iter().zip(seg_vectors) {
        let Some((step, similarity)) = pool.nearest(vector, only_recipes)? else {
            continue;
        };
        if similarity < params.sim_threshold {
            continue;
        }
        let text = pool
            .step_text(&step)
            .expect("pool steps resolve")
            .to_owned();
        kept.push(SwapSegment {
            step,
            text,
            start_s: seg.start_s,
            end_s: seg.end_s,
            similarity,
            source_segment_indices: seg.sources.clone(),
        });
    }
    Ok(CuratedVideo {
        video_id: video.video_id.clone(),
        title: video.title.clone(),
        split,
        segments: collapse_repeats(kept),
        source_segment_count: video.segments.len(),
        merged_segment_count: merged.len(),
    })
}

/// Counts written next to the dataset, plus the effective configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub videos: usize,
    pub train_videos: usize,
    pub validation_videos: usize,
    pub empty_videos: usize,
    pub failed_videos: usize,
    pub segments_before: usize,
    pub segments_merged: usize,
    pub segments_after: usize,
    pub config: C,
}

impl<C> Manifest<C> {
    pub fn tally(curated: &[CuratedVideo], failed_videos: usize, config: C) -> Self {
        let count = |tag| curated.iter().filter(|v| v.split == tag).count();
        Manifest {
            videos: curated.len(),
            train_videos: count(SplitTag::Train),
            validation_videos: count(SplitTag::Validation),
            empty_videos: curated.iter().filter(|v| v.segments.is_empty()).count(),
            failed_videos,
            segments_before: curated.iter().map(|v| v.source_segment_count).sum(),
            segments_merged: curated.iter().map(|v| v.merged_segment_count).sum(),
            segments_after: curated.iter().map(|v| v.segments.len()).sum(),
            config,
        }
    }
}

/// Writes `dataset.jsonl` (videos sorted by id) and `manifest.json`.
pub fn emit_dataset<C: Serialize>(
    mut curated: Vec<CuratedVideo>,
    failed_videos: usize,
    config: C,
    dataset_path: &Path,
    manifest_path: &Path,
) -> Result<Manifest<C>> {
    curated.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    let file = File::create(dataset_path).map_err(|e| CurateError::io(dataset_path, e))?;
    let mut w = BufWriter::new(file);
    for video in &curated {
        serde_json::to_writer(&mut w, video).map_err(|e| CurateError::io(dataset_path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CurateError::io(dataset_path, e))?;
    }
    w.flush().map_err(|e| CurateError::io(dataset_path, e))?;

    let manifest = Manifest::tally(&curated, failed_videos, config);
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CurateError::io(manifest_path, e.into()))?;
    text.push('\n');
    std::fs::write(manifest_path, text).map_err(|e| CurateError::io(manifest_path, e))?;
    Ok(manifest)
}

/// Reads a `dataset.jsonl` file.
pub fn read_dataset(path: &Path) -> Result<Vec<CuratedVideo>> {
    let file = File::open(path).map_err(|e| CurateError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CurateError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let video: CuratedVideo = serde_json::from_str(&line).map_err(|e| CurateError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(video);
    }
    Ok(out)
}

/// Checks curated videos against the dataset invariants. Recipes and source
/// videos, when given, enable the provenance checks.
pub fn check_dataset(
    curated: &[CuratedVideo],
    sim_threshold: f64,
    recipes: Option<&HashMap<String, Recipe>>,
    sources: Option<&HashMap<String, VideoRecord>>,
    merge: MergeParams,
) -> Vec<String> {
    let mut problems = Vec::new();
    for pair in curated.windows(2) {
        if pair[0].video_id >= pair[1].video_id {
            problems.push(format!(
                "videos not strictly sorted: `{}` before `{}`",
                pair[0].video_id, pair[1].video_id
            ));
        }
    }
    for video in curated {
        let vid = &video.video_id;
        for (i, seg) in video.segments.iter().enumerate() {
            if !(seg.similarity >= sim_threshold && seg.similarity <= 1.0) {
                problems.push(format!("{vid} segment {i}: similarity {} below threshold", seg.similarity));
            }
            if !(seg.start_s < seg.end_s) {
                problems.push(format!("{vid} segment {i}: start_s {} not before end_s {}", seg.start_s, seg.end_s));
            }
            if let Some(recipes) = recipes {
                let verbatim = recipes.get(&seg.step.recipe_id).and_then(|r| seg.step.resolve(r));
                if verbatim != Some(seg.text.as_str()) {
                    problems.push(format!("{vid} segment {i}: text does not match step {}", seg.step));
                }
            }
        }
        for (i, pair) in video.segments.windows(2).enumerate() {
            if pair[0].start_s > pair[1].start_s {
                problems.push(format!("{vid} segments {i},{}: not sorted by start", i + 1));
            }
            if pair[0].step == pair[1].step {
                problems.push(format!("{vid} segments {i},{}: repeat step {}", i + 1, pair[0].step));
            }
        }
        if let Some(sources) = sources {
            let Some(source) = sources.get(vid) else {
                problems.push(format!("{vid}: not in the source corpus"));
                continue;
            };
            if video.segments.len() > source.segments.len() {
                problems.push(format!(
                    "{vid}: {} curated segments exceed {} source segments",
                    video.segments.len(),
                    source.segments.len()
                ));
            }
            let merged = merge_segments(&source.segments, merge);
            let starts: Vec<f64> = merged.iter().map(|m| m.start_s).collect();
            let ends: Vec<f64> = merged.iter().map(|m| m.end_s).collect();
            for (i, seg) in video.segments.iter().enumerate() {
                if !starts.contains(&seg.start_s) || !ends.contains(&seg.end_s) {
                    problems.push(format!("{vid} segment {i}: timestamps not taken from source segments"));
                }
            }
        }
    }
    problems
}
