//! Dialogue-level dependency treebanks: data model, file formats, EDU
//! segmentation, signal-driven tree transformation, pseudo-label selection
//! and evaluation.
//!
//! A dialogue is stored in two layers. Each utterance carries its own
//! dependency tree (1-based tokens, head 0 for the root), and every utterance
//! after the first is attached to an earlier one by a single
//! [`InterUtteranceLink`] ending at its root. [`to_global_tree`] flattens both
//! layers into one tree over the whole dialogue.

pub mod evaluation;
pub mod io;
pub mod label;
pub mod par;
pub mod segment;
pub mod selection;
pub mod signal;
pub mod synth;
pub mod transform;
pub mod treebank;

pub use evaluation::{attachment_scores, matching_ranking, matching_score, signal_matching, AttachmentScores, EvalError};
pub use io::{read_dialogues, read_scores, write_dialogues, write_scores, IoError, ScoreRecord, SignalDistributionRecord};
pub use label::{DependencyLabel, Family};
pub use segment::{gold_edus, segment, EduSpan, SegmenterConfig};
pub use selection::{confidence, filter, merge_multiview, threshold_sweep, Magnitude, PseudoSample, View};
pub use signal::{group_mean, Signal, SignalDistribution, SignalLexicon, SignalSource};
pub use transform::{posttran, pretran, transform_corpus, Mode, TransformConfig, TransformError};
pub use treebank::{
    count_labels, to_global_tree, validate_dialogue, Confidence, DependencyInstance, Dialogue, InterUtteranceLink,
    Token, TokenRef, Utterance,
};
