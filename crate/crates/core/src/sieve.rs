//! Title-overlap pairing of videos with recipes, followed by transcript/step
//! content scoring, threshold sieving and the train/validation split.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Recipe, VideoRecord};
use crate::textnorm::{content_words, ContentSelector, TokenSet};

/// Token overlap scores of one video/recipe pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub video_id: String,
    pub recipe_id: String,
    pub token_iou: f64,
    pub token_recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
}

impl SplitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
        }
    }
}

/// Which token set divides the overlap in `token_recall`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecallDenominator {
    /// Share of the recipe's content words that are spoken.
    #[default]
    Recipe,
    /// Share of the spoken content words found in the recipe.
    Transcript,
}

/// Content-word set of a whole transcript.
pub fn transcript_tokens<S: ContentSelector + ?Sized>(video: &VideoRecord, selector: &S) -> TokenSet {
    let text: Vec<&str> = video.segments.iter().map(|s| s.text.as_str()).collect();
    content_words(&text.join(" "), selector)
}

/// Content-word set of all steps of a recipe.
pub fn recipe_tokens<S: ContentSelector + ?Sized>(recipe: &Recipe, selector: &S) -> TokenSet {
    content_words(&recipe.steps.join(" "), selector)
}

/// Inverted index from title lemma to recipes carrying it.
pub struct TitleIndex {
    recipe_ids: Vec<String>,
    postings: HashMap<String, Vec<usize>>,
}

impl TitleIndex {
    pub fn new<S: ContentSelector + ?Sized>(recipes: &[Recipe], selector: &S) -> Self {
        let mut postings: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in recipes.iter().enumerate() {
            for lemma in content_words(&r.title, selector).into_inner() {
                postings.entry(lemma).or_default().push(i);
            }
        }
        TitleIndex {
            recipe_ids: recipes.iter().map(|r| r.recipe_id.clone()).collect(),
            postings,
        }
    }

    /// Ids of recipes whose title shares at least one content word, sorted.
    pub fn matches(&self, title_words: &TokenSet) -> Vec<&str> {
        let hits: BTreeSet<usize> = title_words
            .iter()
            .filter_map(|w| self.postings.get(w))
            .flatten()
            .copied()
            .collect();
        let mut ids: Vec<&str> = hits.into_iter().map(|i| self.recipe_ids[i].as_str()).collect();
        ids.sort_unstable();
        ids
    }
}

/// Result of title sieving.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TitlePairing {
    /// `(video_id, recipe_id)` pairs sorted by video then recipe.
    pub pairs: Vec<(String, String)>,
    pub videos: BTreeSet<String>,
    pub recipes: BTreeSet<String>,
}

/// Pairs every video with every recipe whose title shares a content word.
pub fn pair_by_title<S: ContentSelector + ?Sized>(
    videos: &[VideoRecord],
    recipes: &[Recipe],
    selector: &S,
) -> TitlePairing {
    let index = TitleIndex::new(recipes, selector);
    let mut out = TitlePairing::default();
    for video in videos {
        let title = content_words(&video.title, selector);
        for rid in index.matches(&title) {
            out.pairs.push((video.video_id.clone(), rid.to_owned()));
            out.recipes.insert(rid.to_owned());
        }
    }
    out.pairs.sort();
    out.pairs.dedup();
    out.videos = out.pairs.iter().map(|(v, _)| v.clone()).collect();
    out
}

/// Token-IoU and token-recall of two content-word sets.
pub fn score_sets(
    video_id: &str,
    recipe_id: &str,
    transcript: &TokenSet,
    recipe: &TokenSet,
    denominator: RecallDenominator,
) -> PairScore {
    let inter = transcript.intersection_len(recipe);
    let union = transcript.len() + recipe.len() - inter;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let recall_den = match denominator {
        RecallDenominator::Recipe => recipe.len(),
        RecallDenominator::Transcript => transcript.len(),
    };
    PairScore {
        video_id: video_id.to_owned(),
        recipe_id: recipe_id.to_owned(),
        token_iou: ratio(inter, union),
        token_recall: ratio(inter, recall_den),
    }
}

pub fn score_pair<S: ContentSelector + ?Sized>(
    video: &VideoRecord,
    recipe: &Recipe,
    selector: &S,
    denominator: RecallDenominator,
) -> PairScore {
    score_sets(
        &video.video_id,
        &recipe.recipe_id,
        &transcript_tokens(video, selector),
        &recipe_tokens(recipe, selector),
        denominator,
    )
}

/// Scores many pairs, computing each document's token set once.
/// Output is sorted by `(video_id, recipe_id)` whatever the thread count.
pub fn score_pairs<S: ContentSelector + ?Sized>(
    pairs: &[(String, String)],
    videos: &[VideoRecord],
    recipes: &[Recipe],
    selector: &S,
    denominator: RecallDenominator,
) -> Vec<PairScore> {
    let wanted_videos: BTreeSet<&str> = pairs.iter().map(|(v, _)| v.as_str()).collect();
    let wanted_recipes: BTreeSet<&str> = pairs.iter().map(|(_, r)| r.as_str()).collect();
    let video_sets: HashMap<&str, TokenSet> = videos
        .par_iter()
        .filter(|v| wanted_videos.contains(v.video_id.as_str()))
        .map(|v| (v.video_id.as_str(), transcript_tokens(v, selector)))
        .collect();
    let recipe_sets: HashMap<&str, TokenSet> = recipes
        .par_iter()
        .filter(|r| wanted_recipes.contains(r.recipe_id.as_str()))
        .map(|r| (r.recipe_id.as_str(), recipe_tokens(r, selector)))
        .collect();
    let mut scores: Vec<PairScore> = pairs
        .par_iter()
        .filter_map(|(v, r)| {
            let a = video_sets.get(v.as_str())?;
            let b = recipe_sets.get(r.as_str())?;
            Some(score_sets(v, r, a, b, denominator))
        })
        .collect();
    scores.sort_by(|x, y| (&x.video_id, &x.recipe_id).cmp(&(&y.video_id, &y.recipe_id)));
    scores
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentThresholds {
    pub iou: f64,
    pub recall: f64,
}

impl Default for ContentThresholds {
    fn default() -> Self {
        ContentThresholds {
            iou: 0.1,
            recall: 0.3,
        }
    }
}

impl ContentThresholds {
    pub fn keeps(&self, score: &PairScore) -> bool {
        score.token_iou >= self.iou && score.token_recall >= self.recall
    }
}

/// Result of content sieving.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContentSieve {
    pub kept: Vec<PairScore>,
    pub videos: BTreeSet<String>,
    pub recipes: BTreeSet<String>,
}

/// Keeps pairs meeting both the IoU and the recall threshold.
pub fn sieve_content(
    scores: impl IntoIterator<Item = PairScore>,
    thresholds: ContentThresholds,
) -> ContentSieve {
    let mut out = ContentSieve::default();
    for score in scores {
        if thresholds.keeps(&score) {
            out.videos.insert(score.video_id.clone());
            out.recipes.insert(score.recipe_id.clone());
            out.kept.push(score);
        }
    }
    out
}

/// Assigns each video to validation when its best kept token-IoU reaches
/// `val_iou`, and to train otherwise.
pub fn split_train_val(kept: &[PairScore], val_iou: f64) -> BTreeMap<String, SplitTag> {
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    for s in kept {
        let entry = best.entry(s.video_id.clone()).or_insert(f64::NEG_INFINITY);
        *entry = entry.max(s.token_iou);
    }
    best.into_iter()
        .map(|(id, iou)| {
            let tag = if iou >= val_iou {
                SplitTag::Validation
            } else {
                SplitTag::Train
            };
            (id, tag)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AsrSegment;
    use crate::textnorm::Stoplist;

    fn set(words: &[&str]) -> TokenSet {
        words.iter().copied().collect()
    }

    fn score(v: &str, iou: f64, recall: f64) -> PairScore {
        PairScore {
            video_id: v.into(),
            recipe_id: "r".into(),
            token_iou: iou,
            token_recall: recall,
        }
    }

    fn video(id: &str, title: &str, speech: &[&str]) -> VideoRecord {
        VideoRecord {
            video_id: id.into(),
            title: title.into(),
            duration_s: 100.0,
            category: "c".into(),
            segments: speech
                .iter()
                .enumerate()
                .map(|(i, t)| AsrSegment::new(*t, i as f64, i as f64 + 1.0))
                .collect(),
        }
    }

    fn recipe(id: &str, title: &str, steps: &[&str]) -> Recipe {
        Recipe {
            recipe_id: id.into(),
            title: title.into(),
            steps: steps.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn title_pairing() {
        let stop = Stoplist::default();
        let videos = [
            video("v1", "How to Make a Bean Salad", &[]),
            video("v2", "Chocolate Cake", &[]),
            video("v3", "My morning vlog", &[]),
        ];
        let recipes = [
            recipe("r1", "Summer Bean Salad", &["x"]),
            recipe("r2", "Easy Chocolate Cake", &["x"]),
            recipe("r3", "Baked Ziti", &["x"]),
        ];
        let p = pair_by_title(&videos, &recipes, &stop);
        assert_eq!(
            p.pairs,
            [("v1".to_string(), "r1".to_string()), ("v2".into(), "r2".into())]
        );
        assert!(!p.videos.contains("v3"));
        assert!(!p.recipes.contains("r3"));
    }

    #[test]
    fn set_scores() {
        let a = set(&["add", "salt", "stir", "pan"]);
        let b = set(&["add", "salt", "stir", "serve", "plate"]);
        let s = score_sets("v", "r", &a, &b, RecallDenominator::Recipe);
        assert_eq!((s.token_iou, s.token_recall), (0.5, 0.6));
        let t = score_sets("v", "r", &a, &b, RecallDenominator::Transcript);
        assert_eq!(t.token_recall, 0.75);

        let same = score_sets("v", "r", &a, &a, RecallDenominator::Recipe);
        assert_eq!((same.token_iou, same.token_recall), (1.0, 1.0));
        let apart = score_sets("v", "r", &a, &set(&["cake"]), RecallDenominator::Recipe);
        assert_eq!((apart.token_iou, apart.token_recall), (0.0, 0.0));
        let empty = score_sets("v", "r", &TokenSet::new(), &TokenSet::new(), RecallDenominator::Recipe);
        assert_eq!((empty.token_iou, empty.token_recall), (0.0, 0.0));
    }

    #[test]
    fn score_pair_uses_whole_documents() {
        let stop = Stoplist::default();
        let v = video("v", "t", &["add the salt", "and stir the pan"]);
        let r = recipe("r", "t", &["Add salt.", "Stir, then serve on a plate."]);
        let s = score_pair(&v, &r, &stop, RecallDenominator::Recipe);
        assert_eq!((s.token_iou, s.token_recall), (0.5, 0.6));
    }

    #[test]
    fn threshold_examples() {
        let th = ContentThresholds::default();
        assert!(th.keeps(&score("v", 0.15, 0.35)));
        assert!(!th.keeps(&score("v", 0.15, 0.20)));
        assert!(!th.keeps(&score("v", 0.09, 0.90)));
        assert!(th.keeps(&score("v", 0.1, 0.3)));
    }

    #[test]
    fn split_boundaries() {
        let kept = [
            score("a", 0.25, 0.5),
            score("b", 0.15, 0.5),
            score("c", 0.2, 0.5),
            score("d", 0.12, 0.5),
            score("d", 0.21, 0.5),
        ];
        let split = split_train_val(&kept, 0.2);
        assert_eq!(split["a"], SplitTag::Validation);
        assert_eq!(split["b"], SplitTag::Train);
        assert_eq!(split["c"], SplitTag::Validation);
        assert_eq!(split["d"], SplitTag::Validation);
        assert_eq!(split.len(), 4);
    }

    #[test]
    fn split_tags_serialize_lowercase() {
        assert_eq!(serde_json::to_string(&SplitTag::Validation).unwrap(), "\"validation\"");
    }
}
