//! Confidence-based selection of pseudo-labelled utterances.
//!
//! An utterance's confidence is the mean, over its tokens, of the highest
//! arc probability (and separately of the highest label probability). A
//! sample is kept when both confidences strictly exceed the threshold.
//! Samples from two parsers can be merged, keeping the more confident
//! analysis of every utterance both produced.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::io::{IoError, ScoreRecord};
use crate::treebank::{Confidence, DependencyInstance, Dialogue};

/// Default confidence threshold.
pub const DEFAULT_EPSILON: f64 = 0.98;

/// Which parser produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum View {
    /// Parser trained on the syntactic treebank.
    #[serde(rename = "parser-s")]
    ParserS,
    /// Parser trained on the transformed treebank.
    #[serde(rename = "parser-t")]
    ParserT,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleKey {
    pub dialogue: String,
    pub utterance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoSample {
    #[serde(flatten)]
    pub key: SampleKey,
    pub view: View,
    pub confidence: Confidence,
    #[serde(skip)]
    pub instance: Option<DependencyInstance>,
}

/// Scalar used to compare duplicate samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Magnitude {
    #[default]
    Min,
    Mean,
}

impl Magnitude {
    pub fn of(self, c: Confidence) -> f64 {
        match self {
            Magnitude::Min => c.arc.min(c.label),
            Magnitude::Mean => 0.5 * (c.arc + c.label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("row {row} of the {matrix} matrix is not a probability distribution (sum {sum})")]
    RowNotStochastic { matrix: &'static str, row: usize, sum: f64 },
    #[error("malformed score record: {0}")]
    Shape(String),
    #[error("no prediction for dialogue `{dialogue}` utterance {utterance}")]
    UnknownSample { dialogue: String, utterance: usize },
    #[error("dialogue `{dialogue}` utterance {utterance}: scores cover {scored} tokens, prediction has {predicted}")]
    LengthMismatch {
        dialogue: String,
        utterance: usize,
        scored: usize,
        predicted: usize,
    },
}

fn mean_row_max(rows: &[Vec<f64>]) -> f64 {
    let total: f64 = rows
        .iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    total / rows.len() as f64
}

/// Arc and label confidence of one scored utterance.
pub fn confidence(rec: &ScoreRecord) -> Result<Confidence, SelectionError> {
    rec.check(0).map_err(|e| match e {
        IoError::RowNotStochastic { matrix, row, sum, .. } => SelectionError::RowNotStochastic { matrix, row, sum },
        other => SelectionError::Shape(other.to_string()),
    })?;
    Ok(Confidence {
        arc: mean_row_max(&rec.arcs),
        label: mean_row_max(&rec.labels),
    })
}

/// Scores every record; order follows the input.
pub fn score_samples(records: &[ScoreRecord], view: View) -> Result<Vec<PseudoSample>, SelectionError> {
    crate::par::try_map(records, |rec| {
        Ok(PseudoSample {
            key: SampleKey {
                dialogue: rec.dialogue.clone(),
                utterance: rec.utterance,
            },
            view,
            confidence: confidence(rec)?,
            instance: None,
        })
    })
}

/// Attaches each sample's predicted analysis from `pred`, checking that the
/// scored length matches the prediction.
pub fn attach_predictions(
    samples: &mut [PseudoSample],
    records: &[ScoreRecord],
    pred: &[Dialogue],
) -> Result<(), SelectionError> {
    let by_id: HashMap<&str, &Dialogue> = pred.iter().map(|d| (d.id.as_str(), d)).collect();
    for (s, rec) in samples.iter_mut().zip(records) {
        let unknown = || SelectionError::UnknownSample {
            dialogue: s.key.dialogue.clone(),
            utterance: s.key.utterance,
        };
        let utt = by_id
            .get(s.key.dialogue.as_str())
            .and_then(|d| d.utterances.get(s.key.utterance))
            .ok_or_else(unknown)?;
        if utt.len() != rec.len() {
            return Err(SelectionError::LengthMismatch {
                dialogue: s.key.dialogue.clone(),
                utterance: s.key.utterance,
                scored: rec.len(),
                predicted: utt.len(),
            });
        }
        let mut inst = utt.instance();
        inst.confidence = Some(s.confidence);
        s.instance = Some(inst);
    }
    Ok(())
}

/// Keeps samples whose arc and label confidences both exceed `epsilon`.
pub fn filter(samples: &[PseudoSample], epsilon: f64) -> Vec<PseudoSample> {
    samples
        .iter()
        .filter(|s| s.confidence.arc > epsilon && s.confidence.label > epsilon)
        .cloned()
        .collect()
}

fn prefer(candidate: &PseudoSample, incumbent: &PseudoSample, magnitude: Magnitude) -> bool {
    let c = magnitude.of(candidate.confidence);
    let i = magnitude.of(incumbent.confidence);
    c > i || (c == i && candidate.view == View::ParserT && incumbent.view == View::ParserS)
}

/// Union of two views, keyed by utterance. Where both views hold the same
/// utterance the more confident sample survives; exact ties go to the
/// transformed-treebank parser, then to the earlier sample. Output is
/// sorted by key.
pub fn merge_multiview(a: &[PseudoSample], b: &[PseudoSample], magnitude: Magnitude) -> Vec<PseudoSample> {
    let mut merged: BTreeMap<SampleKey, PseudoSample> = BTreeMap::new();
    for s in a.iter().chain(b) {
        match merged.entry(s.key.clone()) {
            Entry::Vacant(e) => {
                e.insert(s.clone());
            }
            Entry::Occupied(mut e) => {
                if prefer(s, e.get(), magnitude) {
                    e.insert(s.clone());
                }
            }
        }
    }
    merged.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// Kept count per input view.
    pub kept: Vec<usize>,
    /// Size of the merged selection.
    pub merged: usize,
}

/// Kept-data size per threshold, for each view and for their merge.
pub fn threshold_sweep(views: &[Vec<PseudoSample>], epsilons: &[f64], magnitude: Magnitude) -> Vec<SweepRow> {
    crate::par::map(epsilons, |&epsilon| {
        let kept: Vec<Vec<PseudoSample>> = views.iter().map(|v| filter(v, epsilon)).collect();
        let merged = kept
            .iter()
            .fold(Vec::new(), |acc, v| merge_multiview(&acc, v, magnitude))
            .len();
        SweepRow {
            epsilon,
            kept: kept.iter().map(Vec::len).collect(),
            merged,
        }
    })
}

/// Evenly spaced thresholds from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Builds a corpus of single-utterance dialogues from samples carrying
/// predictions. Dialogue ids are `<dialogue>#<utterance>`.
pub fn samples_to_corpus(samples: &[PseudoSample], pred: &[Dialogue]) -> Result<Vec<Dialogue>, SelectionError> {
    let by_id: HashMap<&str, &Dialogue> = pred.iter().map(|d| (d.id.as_str(), d)).collect();
    samples
        .iter()
        .map(|s| {
            let utt = by_id
                .get(s.key.dialogue.as_str())
                .and_then(|d| d.utterances.get(s.key.utterance))
                .ok_or_else(|| SelectionError::UnknownSample {
                    dialogue: s.key.dialogue.clone(),
                    utterance: s.key.utterance,
                })?;
            let utt = match &s.instance {
                Some(inst) => utt.with_instance(inst),
                None => utt.clone(),
            };
            Ok(Dialogue::new(
                format!("{}#{}", s.key.dialogue, s.key.utterance),
                vec![utt],
                Vec::new(),
            ))
        })
        .collect()
}
