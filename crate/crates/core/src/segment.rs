//! Rule-based EDU segmentation.
//!
//! An utterance is cut after every configured punctuation token, and, when a
//! dependency analysis is available, immediately before the far endpoint of
//! any long arc whose label marks an implicit clause boundary.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::label::DependencyLabel;
use crate::treebank::{DependencyInstance, Utterance};

/// A contiguous, 1-based, inclusive token span forming one EDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EduSpan {
    pub utterance: usize,
    pub start: usize,
    pub end: usize,
}

impl EduSpan {
    pub fn new(utterance: usize, start: usize, end: usize) -> Self {
        EduSpan { utterance, start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, token: usize) -> bool {
        self.start <= token && token <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmenterConfig {
    /// Token forms after which an EDU ends.
    pub punctuation: BTreeSet<String>,
    /// Arc labels treated as implicit EDU boundaries.
    pub implicit_labels: BTreeSet<DependencyLabel>,
    /// Minimum distance between head and dependent for an implicit boundary.
    pub implicit_min_span: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            punctuation: ["，", "。", "？", "！", "；"].into_iter().map(String::from).collect(),
            implicit_labels: [DependencyLabel::Sasubj, DependencyLabel::Dfsubj].into(),
            implicit_min_span: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentError {
    #[error("dependency analysis has {deps} positions but the utterance has {tokens} tokens")]
    LengthMismatch { tokens: usize, deps: usize },
    #[error("segmenter punctuation set is empty")]
    EmptyPunctuation,
    #[error("segmentations cover different utterances: {0}")]
    MismatchedCorpora(String),
}

/// Token positions `b` such that an EDU boundary falls between `b` and `b + 1`.
pub fn boundaries(
    forms: &[&str],
    deps: Option<&DependencyInstance>,
    cfg: &SegmenterConfig,
) -> Result<BTreeSet<usize>, SegmentError> {
    if cfg.punctuation.is_empty() {
        return Err(SegmentError::EmptyPunctuation);
    }
    let n = forms.len();
    let mut cuts: BTreeSet<usize> = forms
        .iter()
        .enumerate()
        .filter(|(_, f)| cfg.punctuation.contains(**f))
        .map(|(i, _)| i + 1)
        .filter(|&b| b < n)
        .collect();

    if let Some(deps) = deps {
        if deps.len() != n {
            return Err(SegmentError::LengthMismatch { tokens: n, deps: deps.len() });
        }
        for dep in 1..=n {
            let head = deps.head(dep);
            if head == 0 || head > n || !cfg.implicit_labels.contains(&deps.label(dep)) {
                continue;
            }
            if dep.abs_diff(head) >= cfg.implicit_min_span.max(1) {
                cuts.insert(dep.max(head) - 1);
            }
        }
    }
    Ok(cuts)
}

fn spans_from_cuts(utterance: usize, n: usize, cuts: &BTreeSet<usize>) -> Vec<EduSpan> {
    if n == 0 {
        return Vec::new();
    }
    let mut spans = Vec::with_capacity(cuts.len() + 1);
    let mut start = 1;
    for &b in cuts {
        spans.push(EduSpan::new(utterance, start, b));
        start = b + 1;
    }
    spans.push(EduSpan::new(utterance, start, n));
    spans
}

/// Segments utterance number `index` into EDUs.
pub fn segment(
    u: &Utterance,
    index: usize,
    deps: Option<&DependencyInstance>,
    cfg: &SegmenterConfig,
) -> Result<Vec<EduSpan>, SegmentError> {
    segment_forms(&u.forms(), index, deps, cfg)
}

pub fn segment_forms(
    forms: &[&str],
    index: usize,
    deps: Option<&DependencyInstance>,
    cfg: &SegmenterConfig,
) -> Result<Vec<EduSpan>, SegmentError> {
    let cuts = boundaries(forms, deps, cfg)?;
    Ok(spans_from_cuts(index, forms.len(), &cuts))
}

/// Returns the first token that is uncovered or doubly covered, if any.
pub fn partition_gap(spans: &[EduSpan], n: usize) -> Option<usize> {
    let mut next = 1;
    for s in spans {
        if s.start > next {
            return Some(next);
        }
        if s.start < next || s.end < s.start {
            return Some(s.start.max(1));
        }
        if s.end > n {
            return Some(n + 1);
        }
        next = s.end + 1;
    }
    if next != n + 1 {
        Some(next)
    } else {
        None
    }
}

/// Index of the span containing `token`.
pub fn span_of(spans: &[EduSpan], token: usize) -> Option<usize> {
    spans.iter().position(|s| s.contains(token))
}

/// Reads EDUs off an annotated tree: every token attached to the dummy root
/// or by an inter-EDU label starts its own unit, which extends over its
/// syntactic descendants. Non-contiguous units are widened and merged so the
/// result still partitions the utterance.
pub fn gold_edus(u: &Utterance, index: usize) -> Vec<EduSpan> {
    let n = u.len();
    let edu_root = |mut i: usize| {
        for _ in 0..n {
            let t = &u.tokens[i - 1];
            if t.head == 0 || t.head > n || !t.label.is_syntactic() {
                break;
            }
            i = t.head;
        }
        i
    };
    let mut extent: Vec<(usize, usize)> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n + 1];
    for i in 1..=n {
        let r = edu_root(i);
        match root_slot[r] {
            Some(k) => {
                let e = &mut extent[k];
                e.0 = e.0.min(i);
                e.1 = e.1.max(i);
            }
            None => {
                root_slot[r] = Some(extent.len());
                extent.push((i, i));
            }
        }
    }
    extent.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (s, e) in extent {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
        .into_iter()
        .map(|(s, e)| EduSpan::new(index, s, e))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentationScores {
    pub overall: Option<f64>,
    /// Utterances whose gold segmentation has more than one EDU.
    pub multi_edu: Option<f64>,
    /// Utterances whose gold segmentation is a single EDU.
    pub single_edu: Option<f64>,
}

#[derive(Default, Clone, Copy)]
struct MatchCounts {
    matched: usize,
    predicted: usize,
    gold: usize,
}

impl MatchCounts {
    fn f1(self) -> Option<f64> {
        if self.gold == 0 && self.predicted == 0 {
            return None;
        }
        if self.matched == 0 {
            return Some(0.0);
        }
        let p = self.matched as f64 / self.predicted as f64;
        let r = self.matched as f64 / self.gold as f64;
        Some(2.0 * p * r / (p + r))
    }
}

/// Exact-match span F1, overall and split by gold EDU count per utterance.
/// `pred[i]` and `gold[i]` must segment the same utterance.
pub fn segmentation_f1(pred: &[Vec<EduSpan>], gold: &[Vec<EduSpan>]) -> Result<SegmentationScores, SegmentError> {
    if pred.len() != gold.len() {
        return Err(SegmentError::MismatchedCorpora(format!(
            "{} predicted utterances vs {} gold",
            pred.len(),
            gold.len()
        )));
    }
    let mut overall = MatchCounts::default();
    let mut multi = MatchCounts::default();
    let mut single = MatchCounts::default();
    for (k, (p, g)) in pred.iter().zip(gold).enumerate() {
        let p_len = p.last().map_or(0, |s| s.end);
        let g_len = g.last().map_or(0, |s| s.end);
        if p_len != g_len {
            return Err(SegmentError::MismatchedCorpora(format!(
                "utterance {k}: predicted spans cover {p_len} tokens, gold {g_len}"
            )));
        }
        let gold_set: BTreeSet<(usize, usize)> = g.iter().map(|s| (s.start, s.end)).collect();
        let matched = p.iter().filter(|s| gold_set.contains(&(s.start, s.end))).count();
        let bucket = if g.len() > 1 { &mut multi } else { &mut single };
        for c in [&mut overall, bucket] {
            c.matched += matched;
            c.predicted += p.len();
            c.gold += g.len();
        }
    }
    Ok(SegmentationScores {
        overall: overall.f1(),
        multi_edu: multi.f1(),
        single_edu: single.f1(),
    })
}
