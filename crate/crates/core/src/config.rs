use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{IngestMode, SourceFilter};
use crate::error::{CurateError, Result};
use crate::sieve::{ContentThresholds, RecallDenominator};
use crate::swap::{MergeParams, RetrievalPool, SwapParams};

/// Every knob of the curation pipeline. Loaded from JSON; CLI flags override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub videos: Option<PathBuf>,
    pub recipes: Option<PathBuf>,
    pub step_emb: Option<PathBuf>,
    pub seg_emb: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub function_words: Option<PathBuf>,
    pub generic_words: Option<PathBuf>,
    pub max_duration_s: f64,
    pub min_per_category: usize,
    pub lambda_iou: f64,
    pub lambda_recall: f64,
    pub lambda_val: f64,
    pub lambda_sim: f64,
    pub merge_max_dur_s: f64,
    pub merge_max_gap_s: f64,
    pub retrieval_pool: RetrievalPool,
    pub recall_denominator: RecallDenominator,
    pub strict_ingest: bool,
    pub workers: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            videos: None,
            recipes: None,
            step_emb: None,
            seg_emb: None,
            out_dir: None,
            function_words: None,
            generic_words: None,
            max_duration_s: 600.0,
            min_per_category: 5,
            lambda_iou: 0.1,
            lambda_recall: 0.3,
            lambda_val: 0.2,
            lambda_sim: 0.75,
            merge_max_dur_s: 8.0,
            merge_max_gap_s: 4.0,
            retrieval_pool: RetrievalPool::Global,
            recall_denominator: RecallDenominator::Recipe,
            strict_ingest: true,
            workers: None,
        }
    }
}

/// The parameters that shape the output, echoed into `manifest.json`.
/// Paths and worker count are left out: they never change the bytes written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub max_duration_s: f64,
    pub min_per_category: usize,
    pub lambda_iou: f64,
    pub lambda_recall: f64,
    pub lambda_val: f64,
    pub lambda_sim: f64,
    pub merge_max_dur_s: f64,
    pub merge_max_gap_s: f64,
    pub retrieval_pool: RetrievalPool,
    pub recall_denominator: RecallDenominator,
    pub strict_ingest: bool,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CurateError::config("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CurateError::config("config", format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("lambda_iou", self.lambda_iou),
            ("lambda_recall", self.lambda_recall),
            ("lambda_val", self.lambda_val),
            ("lambda_sim", self.lambda_sim),
        ];
        for (field, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(CurateError::config(field, format!("{value} is outside [0, 1]")));
            }
        }
        let positive = [
            ("max_duration_s", self.max_duration_s),
            ("merge_max_dur_s", self.merge_max_dur_s),
            ("merge_max_gap_s", self.merge_max_gap_s),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CurateError::config(field, format!("{value} must be positive")));
            }
        }
        if self.lambda_val < self.lambda_iou {
            return Err(CurateError::config(
                "lambda_val",
                format!("{} is below lambda_iou {}", self.lambda_val, self.lambda_iou),
            ));
        }
        if self.workers == Some(0) {
            return Err(CurateError::config("workers", "must be at least 1"));
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            max_duration_s: self.max_duration_s,
            min_per_category: self.min_per_category,
            lambda_iou: self.lambda_iou,
            lambda_recall: self.lambda_recall,
            lambda_val: self.lambda_val,
            lambda_sim: self.lambda_sim,
            merge_max_dur_s: self.merge_max_dur_s,
            merge_max_gap_s: self.merge_max_gap_s,
            retrieval_pool: self.retrieval_pool,
            recall_denominator: self.recall_denominator,
            strict_ingest: self.strict_ingest,
        }
    }

    pub fn ingest_mode(&self) -> IngestMode {
        if self.strict_ingest {
            IngestMode::Strict
        } else {
            IngestMode::Lenient
        }
    }

    pub fn source_filter(&self) -> SourceFilter {
        SourceFilter {
            max_duration_s: self.max_duration_s,
            min_per_category: self.min_per_category,
        }
    }

    pub fn content_thresholds(&self) -> ContentThresholds {
        ContentThresholds {
            iou: self.lambda_iou,
            recall: self.lambda_recall,
        }
    }

    pub fn merge_params(&self) -> MergeParams {
        MergeParams {
            max_dur_s: self.merge_max_dur_s,
            max_gap_s: self.merge_max_gap_s,
        }
    }

    pub fn swap_params(&self) -> SwapParams {
        SwapParams {
            merge: self.merge_params(),
            sim_threshold: self.lambda_sim,
        }
    }

    /// Returns the configured path, or a config error naming the field.
    pub fn require(&self, field: &str) -> Result<&Path> {
        let path = match field {
            "videos" => &self.videos,
            "recipes" => &self.recipes,
            "step_emb" => &self.step_emb,
            "seg_emb" => &self.seg_emb,
            "out_dir" => &self.out_dir,
            _ => &None,
        };
        path.as_deref()
            .ok_or_else(|| CurateError::config(field, "not set"))
    }

    /// Like [`require`](Self::require), and the file must exist.
    pub fn require_file(&self, field: &str) -> Result<&Path> {
        let path = self.require(field)?;
        if !path.is_file() {
            return Err(CurateError::config(
                field,
                format!("file not found: {}", path.display()),
            ));
        }
        Ok(path)
    }
}
