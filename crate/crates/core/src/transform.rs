//! Signal-based dependency transformation.
//!
//! Given an utterance's dependency analysis, its EDU segmentation and a
//! per-token signal sequence, syntactic arcs that cross EDU boundaries (or
//! long arcs carrying a transforming label) are relabelled with the signal
//! of their dependent. Two special cases also move arcs:
//!
//! * **reversal**: when the signal is one of the reversal signals (`cond`,
//!   `attr` by default), the token's first dependent in another EDU (its
//!   *tail*) takes over the token's head and the token attaches to the tail;
//! * **greeting**: when the utterance root sits in a greeting EDU, the root
//!   moves to the tail and the greeting attaches to it as `elbr`.
//!
//! All conditions are evaluated against the input analysis. Arc moves are
//! applied first, in position order; a move that would touch a position an
//! earlier move already rewrote is skipped and logged as a conflict. Each
//! move is a local rotation of a tree edge, so the output is always a tree.
//! Tokens still attached to the dummy root keep the `root` label; their
//! discourse relation is expressed by the inter-utterance link instead.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::label::DependencyLabel;
use crate::segment::{partition_gap, segment, span_of, EduSpan, SegmentError, SegmenterConfig};
use crate::signal::{Signal, SignalError, SignalSource, UtteranceSignals, FALLBACK_SIGNAL};
use crate::treebank::{
    ensure_valid, Dialogue, DependencyInstance, InterUtteranceLink, TokenRef, TreeDefect,
    TreebankError,
};

/// Label given to inter-utterance links whose upper EDU carries no signal.
pub const LINK_FALLBACK_LABEL: DependencyLabel = DependencyLabel::StmRsp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    /// Transforming labels: syntactic labels convertible to inter-EDU ones.
    pub labels: BTreeSet<DependencyLabel>,
    /// Minimum head–dependent distance for the transforming-label clause.
    pub min_span: usize,
    /// Signals whose arcs are reversed.
    pub reversal: BTreeSet<DependencyLabel>,
    /// After a reversal, give the tail the reversed token's signal as well.
    pub relabel_tail: bool,
}

impl Default for TransformConfig {
    fn default() -> Self {
        use DependencyLabel::*;
        TransformConfig {
            labels: [Root, Sasubj, Dfsubj].into(),
            min_span: 2,
            reversal: [Cond, Attr].into(),
            relabel_tail: true,
        }
    }
}

impl TransformConfig {
    pub fn check(&self) -> Result<(), TransformError> {
        if let Some(l) = self.labels.iter().find(|l| !l.is_syntactic()) {
            return Err(TransformError::Config(format!("transforming label {l} is not syntactic")));
        }
        if let Some(l) = self.reversal.iter().find(|l| !l.is_inter_edu()) {
            return Err(TransformError::Config(format!("reversal signal {l} is not an inter-EDU label")));
        }
        if self.min_span == 0 {
            return Err(TransformError::Config("minimum span must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("invalid transform configuration: {0}")]
    Config(String),
    #[error("signal sequence has {found} entries, utterance has {expected} tokens")]
    LengthMismatch { expected: usize, found: usize },
    #[error("EDU spans do not partition the utterance (token {token})")]
    BadSegmentation { token: usize },
    #[error("input is not a tree: {defects:?}")]
    InvalidInput { defects: Vec<TreeDefect> },
    #[error("transformation produced a non-tree: {defects:?}")]
    BrokenTree {
        defects: Vec<TreeDefect>,
        events: Vec<TransformEvent>,
    },
    #[error("utterance {utterance} has no root")]
    MissingRoot { utterance: usize },
    #[error("dialogue `{dialogue}`, utterance {utterance}: {source}")]
    InUtterance {
        dialogue: String,
        utterance: usize,
        source: Box<TransformError>,
    },
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Treebank(#[from] TreebankError),
}

/// What happened at one position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// Label replaced by the position's signal.
    Relabel { from: DependencyLabel, to: DependencyLabel },
    /// Condition held on a dummy-root attachment; label stays `root`.
    RootKept,
    /// Arc reversed with the tail.
    Reverse { tail: usize, label: DependencyLabel },
    /// Greeting root demoted below the tail.
    Greeting { tail: usize },
    /// A reversal or greeting move found no tail; only the relabel applied.
    NoTail,
    /// A move was skipped because `with` was already rewritten.
    Conflict { with: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformEvent {
    pub position: usize,
    #[serde(flatten)]
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub instance: DependencyInstance,
    pub events: Vec<TransformEvent>,
}

/// Smallest-index token in an EDU other than `i`'s whose head is `i`.
pub fn find_tail(inst: &DependencyInstance, edus: &[EduSpan], i: usize) -> Option<usize> {
    let own = span_of(edus, i);
    (1..=inst.len()).find(|&t| {
        t != i && inst.head(t) == i && span_of(edus, t).is_some_and(|k| Some(k) != own)
    })
}

/// Whether the relabel condition holds at `i`: the token carries a
/// syntactic label and either attaches outside its EDU (the dummy root
/// counts as outside) or carries a transforming label over at least
/// `min_span` tokens.
pub fn relabel_condition(inst: &DependencyInstance, edus: &[EduSpan], i: usize, cfg: &TransformConfig) -> bool {
    let label = inst.label(i);
    if !label.is_syntactic() {
        return false;
    }
    let head = inst.head(i);
    let crosses = head == 0 || span_of(edus, head) != span_of(edus, i);
    let long_transforming = cfg.labels.contains(&label) && head != 0 && i.abs_diff(head) >= cfg.min_span;
    crosses || long_transforming
}

#[derive(Clone, Copy, PartialEq)]
enum Move {
    Reverse,
    Greeting,
}

/// Applies the transformation to one utterance's analysis.
pub fn posttran(
    inst: &DependencyInstance,
    edus: &[EduSpan],
    signals: &[Signal],
    cfg: &TransformConfig,
) -> Result<Transformed, TransformError> {
    cfg.check()?;
    let n = inst.len();
    if signals.len() != n {
        return Err(TransformError::LengthMismatch {
            expected: n,
            found: signals.len(),
        });
    }
    if let Some(token) = partition_gap(edus, n) {
        return Err(TransformError::BadSegmentation { token });
    }
    let defects = inst.tree_defects();
    if !defects.is_empty() {
        return Err(TransformError::InvalidInput { defects });
    }

    let firing: Vec<usize> = (1..=n).filter(|&i| relabel_condition(inst, edus, i, cfg)).collect();
    let mut heads = inst.heads.clone();
    let mut labels = inst.labels.clone();
    let mut claimed = vec![false; n + 1];
    let mut relabel_only: Vec<usize> = Vec::new();
    let mut events = Vec::new();

    for &i in &firing {
        let s = signals[i - 1];
        let mv = match s {
            Signal::Relation(l) if cfg.reversal.contains(&l) => Some(Move::Reverse),
            Signal::Greeting if inst.head(i) == 0 => Some(Move::Greeting),
            _ => None,
        };
        let Some(mv) = mv else {
            relabel_only.push(i);
            continue;
        };
        if claimed[i] {
            continue;
        }
        let Some(t) = find_tail(inst, edus, i) else {
            events.push(TransformEvent { position: i, rule: Rule::NoTail });
            relabel_only.push(i);
            continue;
        };
        if claimed[t] {
            events.push(TransformEvent {
                position: i,
                rule: Rule::Conflict { with: t },
            });
            relabel_only.push(i);
            continue;
        }
        claimed[i] = true;
        claimed[t] = true;
        match mv {
            Move::Reverse => {
                let label = s.arc_label();
                let old_head = inst.head(i);
                heads[t - 1] = old_head;
                heads[i - 1] = t;
                labels[i - 1] = label;
                if old_head == 0 {
                    labels[t - 1] = DependencyLabel::Root;
                } else if cfg.relabel_tail {
                    labels[t - 1] = label;
                }
                events.push(TransformEvent {
                    position: i,
                    rule: Rule::Reverse { tail: t, label },
                });
            }
            Move::Greeting => {
                heads[i - 1] = t;
                labels[i - 1] = DependencyLabel::Elbr;
                heads[t - 1] = 0;
                labels[t - 1] = DependencyLabel::Root;
                events.push(TransformEvent {
                    position: i,
                    rule: Rule::Greeting { tail: t },
                });
            }
        }
    }

    for i in relabel_only {
        if claimed[i] {
            continue;
        }
        if heads[i - 1] == 0 {
            events.push(TransformEvent { position: i, rule: Rule::RootKept });
            continue;
        }
        let to = signals[i - 1].arc_label();
        let from = labels[i - 1];
        labels[i - 1] = to;
        events.push(TransformEvent {
            position: i,
            rule: Rule::Relabel { from, to },
        });
    }
    events.sort_by_key(|e| e.position);

    let instance = DependencyInstance {
        heads,
        labels,
        confidence: inst.confidence,
    };
    let defects = instance.tree_defects();
    if !defects.is_empty() {
        return Err(TransformError::BrokenTree { defects, events });
    }
    Ok(Transformed { instance, events })
}

/// Segments, detects signals and transforms a single (syntactically
/// analysed) sentence: the treebank-side use of [`posttran`].
pub fn pretran(
    dialogue: &str,
    utterance: usize,
    forms: &[&str],
    inst: &DependencyInstance,
    source: &dyn SignalSource,
    seg: &SegmenterConfig,
    cfg: &TransformConfig,
) -> Result<(Transformed, UtteranceSignals), TransformError> {
    let edus = crate::segment::segment_forms(forms, utterance, Some(inst), seg)?;
    let signals = UtteranceSignals::detect(dialogue, utterance, forms, edus, source)?;
    let out = posttran(inst, &signals.edus, &signals.expand(FALLBACK_SIGNAL), cfg)?;
    Ok((out, signals))
}

/// Chains each utterance's root to the previous utterance's root, labelled
/// by the signal of the upper root's EDU (`stm-rsp` when there is none).
pub fn link_utterances(d: &Dialogue, signals: &[UtteranceSignals]) -> Result<Vec<InterUtteranceLink>, TransformError> {
    let roots = d
        .utterances
        .iter()
        .enumerate()
        .map(|(u, utt)| utt.root().ok_or(TransformError::MissingRoot { utterance: u }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((1..roots.len())
        .map(|u| {
            let upper = roots[u - 1];
            let label = match signals.get(u - 1).and_then(|s| s.at(upper)) {
                Some(Signal::Relation(l)) => l,
                _ => LINK_FALLBACK_LABEL,
            };
            InterUtteranceLink {
                head: TokenRef::new(u - 1, upper),
                tail: TokenRef::new(u, roots[u]),
                label,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Treebank side: existing links are kept and re-attached to moved roots.
    Pre,
    /// Prediction side: inter-utterance links are regenerated as a chain.
    Post,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceLog {
    pub utterance: usize,
    pub edus: Vec<(usize, usize)>,
    pub signals: Vec<Option<Signal>>,
    pub events: Vec<TransformEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DialogueLog {
    pub dialogue: String,
    pub utterances: Vec<UtteranceLog>,
    pub links: Vec<InterUtteranceLink>,
}

/// Transforms every utterance of a dialogue and rebuilds its link layer.
pub fn transform_dialogue(
    d: &Dialogue,
    mode: Mode,
    source: &dyn SignalSource,
    seg: &SegmenterConfig,
    cfg: &TransformConfig,
) -> Result<(Dialogue, DialogueLog), TransformError> {
    ensure_valid(d)?;
    let mut out = d.clone();
    let mut all_signals = Vec::with_capacity(d.utterances.len());
    let mut logs = Vec::with_capacity(d.utterances.len());
    for (u, utt) in d.utterances.iter().enumerate() {
        let wrap = |e: TransformError| TransformError::InUtterance {
            dialogue: d.id.clone(),
            utterance: u,
            source: Box::new(e),
        };
        let inst = utt.instance();
        let edus = segment(utt, u, Some(&inst), seg).map_err(|e| wrap(e.into()))?;
        let signals = UtteranceSignals::detect(&d.id, u, &utt.forms(), edus, source).map_err(|e| wrap(e.into()))?;
        let result = posttran(&inst, &signals.edus, &signals.expand(FALLBACK_SIGNAL), cfg).map_err(wrap)?;
        out.utterances[u] = utt.with_instance(&result.instance);
        logs.push(UtteranceLog {
            utterance: u,
            edus: signals.edus.iter().map(|e| (e.start, e.end)).collect(),
            signals: signals.detected.clone(),
            events: result.events,
        });
        all_signals.push(signals);
    }

    out.links = match mode {
        Mode::Post => link_utterances(&out, &all_signals)?,
        Mode::Pre => d
            .links
            .iter()
            .map(|l| {
                let root = out.utterances[l.tail.utterance]
                    .root()
                    .ok_or(TransformError::MissingRoot { utterance: l.tail.utterance })?;
                Ok(InterUtteranceLink {
                    tail: TokenRef::new(l.tail.utterance, root),
                    ..*l
                })
            })
            .collect::<Result<_, TransformError>>()?,
    };
    ensure_valid(&out)?;
    let log = DialogueLog {
        dialogue: d.id.clone(),
        utterances: logs,
        links: out.links.clone(),
    };
    Ok((out, log))
}

/// Transforms a corpus, one dialogue per task; output keeps input order.
pub fn transform_corpus(
    corpus: &[Dialogue],
    mode: Mode,
    source: &dyn SignalSource,
    seg: &SegmenterConfig,
    cfg: &TransformConfig,
) -> Result<Vec<(Dialogue, DialogueLog)>, TransformError> {
    crate::par::try_map(corpus, |d| transform_dialogue(d, mode, source, seg, cfg))
}
