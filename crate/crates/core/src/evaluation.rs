//! Attachment scores, label-matching analysis and signal matching.
//!
//! Everything is scored on the flattened dialogue tree, so inter-utterance
//! links count as ordinary arcs. The inner/inter split follows the family
//! of the gold label. Punctuation is scored.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::label::{DependencyLabel, Family};
use crate::segment::gold_edus;
use crate::signal::SignalSource;
use crate::treebank::{global_arcs_unchecked, Dialogue, GlobalArc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("prediction and gold disagree at {location}: {reason}")]
    CorpusMismatch { location: String, reason: String },
    #[error("`{label}` is not a {expected:?} label")]
    LabelFamily { label: DependencyLabel, expected: Family },
}

/// Counts behind one UAS/LAS pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub total: usize,
    pub head: usize,
    pub labeled: usize,
}

impl Tally {
    fn add(&mut self, head_ok: bool, label_ok: bool) {
        self.total += 1;
        self.head += head_ok as usize;
        self.labeled += (head_ok && label_ok) as usize;
    }

    fn merge(&mut self, other: Tally) {
        self.total += other.total;
        self.head += other.head;
        self.labeled += other.labeled;
    }

    pub fn uas(&self) -> Option<f64> {
        (self.total > 0).then(|| self.head as f64 / self.total as f64)
    }

    pub fn las(&self) -> Option<f64> {
        (self.total > 0).then(|| self.labeled as f64 / self.total as f64)
    }
}

impl Serialize for Tally {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Tally", 5)?;
        st.serialize_field("arcs", &self.total)?;
        st.serialize_field("correct_heads", &self.head)?;
        st.serialize_field("correct_labeled", &self.labeled)?;
        st.serialize_field("uas", &self.uas())?;
        st.serialize_field("las", &self.las())?;
        st.end()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AttachmentScores {
    pub inner: Tally,
    pub inter: Tally,
    pub overall: Tally,
    /// Keyed by gold label.
    pub by_label: BTreeMap<DependencyLabel, Tally>,
}

impl AttachmentScores {
    fn merge(&mut self, other: AttachmentScores) {
        self.inner.merge(other.inner);
        self.inter.merge(other.inter);
        self.overall.merge(other.overall);
        for (l, t) in other.by_label {
            self.by_label.entry(l).or_default().merge(t);
        }
    }
}

fn mismatch(location: String, reason: impl Into<String>) -> EvalError {
    EvalError::CorpusMismatch {
        location,
        reason: reason.into(),
    }
}

fn check_inventory(pred: &Dialogue, gold: &Dialogue) -> Result<(), EvalError> {
    if pred.id != gold.id {
        return Err(mismatch(
            format!("dialogue `{}`", gold.id),
            format!("prediction has dialogue `{}` here", pred.id),
        ));
    }
    if pred.utterances.len() != gold.utterances.len() {
        return Err(mismatch(
            format!("dialogue `{}`", gold.id),
            format!(
                "{} predicted utterances, {} gold",
                pred.utterances.len(),
                gold.utterances.len()
            ),
        ));
    }
    for (u, (p, g)) in pred.utterances.iter().zip(&gold.utterances).enumerate() {
        if p.len() != g.len() {
            return Err(mismatch(
                format!("dialogue `{}` utterance {u}", gold.id),
                format!("{} predicted tokens, {} gold", p.len(), g.len()),
            ));
        }
        if let Some(i) = p.tokens.iter().zip(&g.tokens).position(|(a, b)| a.form != b.form) {
            return Err(mismatch(
                format!("dialogue `{}` token {u}:{}", gold.id, i + 1),
                format!("form `{}` vs `{}`", p.tokens[i].form, g.tokens[i].form),
            ));
        }
    }
    Ok(())
}

fn check_corpora(pred: &[Dialogue], gold: &[Dialogue]) -> Result<(), EvalError> {
    if pred.len() != gold.len() {
        return Err(mismatch(
            "corpus".into(),
            format!("{} predicted dialogues, {} gold", pred.len(), gold.len()),
        ));
    }
    pred.iter().zip(gold).try_for_each(|(p, g)| check_inventory(p, g))
}

fn score_arcs(pred: &[GlobalArc], gold: &[GlobalArc]) -> AttachmentScores {
    let mut s = AttachmentScores::default();
    for (p, g) in pred.iter().zip(gold) {
        let head_ok = p.head == g.head;
        let label_ok = p.label == g.label;
        match g.label.family() {
            Family::Syntactic => s.inner.add(head_ok, label_ok),
            Family::InterEdu => s.inter.add(head_ok, label_ok),
        }
        s.overall.add(head_ok, label_ok);
        s.by_label.entry(g.label).or_default().add(head_ok, label_ok);
    }
    s
}

/// UAS and LAS of `pred` against `gold`, overall and split by gold label
/// family. Dialogues are paired by position and must carry the same ids,
/// utterance lengths and word forms.
pub fn attachment_scores(pred: &[Dialogue], gold: &[Dialogue]) -> Result<AttachmentScores, EvalError> {
    check_corpora(pred, gold)?;
    let pairs: Vec<(&Dialogue, &Dialogue)> = pred.iter().zip(gold).collect();
    let parts = crate::par::map(&pairs, |(p, g)| {
        score_arcs(&global_arcs_unchecked(p), &global_arcs_unchecked(g))
    });
    let mut total = AttachmentScores::default();
    for part in parts {
        total.merge(part);
    }
    Ok(total)
}

fn require(label: DependencyLabel, expected: Family) -> Result<(), EvalError> {
    if label.family() == expected {
        Ok(())
    } else {
        Err(EvalError::LabelFamily { label, expected })
    }
}

fn matching_tally(pred: &[Dialogue], gold: &[Dialogue], syn: DependencyLabel, inter: DependencyLabel) -> Tally {
    let pairs: Vec<(&Dialogue, &Dialogue)> = pred.iter().zip(gold).collect();
    let parts = crate::par::map(&pairs, |(p, g)| {
        let mut t = Tally::default();
        for (p, g) in global_arcs_unchecked(p).iter().zip(&global_arcs_unchecked(g)) {
            if g.label != inter {
                continue;
            }
            let label = if p.label == syn { inter } else { p.label };
            t.add(p.head == g.head, label == g.label);
        }
        t
    });
    parts.into_iter().fold(Tally::default(), |mut acc, t| {
        acc.merge(t);
        acc
    })
}

/// LAS on gold `inter` arcs after every predicted `syn` label is renamed to
/// `inter`. `None` when gold has no `inter` arcs.
pub fn matching_score(
    pred: &[Dialogue],
    gold: &[Dialogue],
    syn: DependencyLabel,
    inter: DependencyLabel,
) -> Result<Option<f64>, EvalError> {
    require(syn, Family::Syntactic)?;
    require(inter, Family::InterEdu)?;
    check_corpora(pred, gold)?;
    Ok(matching_tally(pred, gold, syn, inter).las())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Match {
    pub label: DependencyLabel,
    pub score: f64,
}

/// The `top` inter-EDU labels that `syn` matches best, highest first. Ties
/// keep inventory order; undefined scores are left out.
pub fn matching_ranking(
    pred: &[Dialogue],
    gold: &[Dialogue],
    syn: DependencyLabel,
    top: usize,
) -> Result<Vec<Match>, EvalError> {
    require(syn, Family::Syntactic)?;
    check_corpora(pred, gold)?;
    let mut ranked: Vec<Match> = DependencyLabel::inter_edu()
        .filter_map(|inter| {
            matching_tally(pred, gold, syn, inter)
                .las()
                .map(|score| Match { label: inter, score })
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    ranked.truncate(top);
    Ok(ranked)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignalAccuracy {
    pub arcs: usize,
    pub matched: usize,
}

impl SignalAccuracy {
    pub fn accuracy(&self) -> Option<f64> {
        (self.arcs > 0).then(|| self.matched as f64 / self.arcs as f64)
    }
}

impl Serialize for SignalAccuracy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SignalAccuracy", 3)?;
        st.serialize_field("arcs", &self.arcs)?;
        st.serialize_field("matched", &self.matched)?;
        st.serialize_field("accuracy", &self.accuracy())?;
        st.end()
    }
}

fn signal_matching_one(d: &Dialogue, source: &dyn SignalSource) -> BTreeMap<DependencyLabel, SignalAccuracy> {
    let mut out: BTreeMap<DependencyLabel, SignalAccuracy> = BTreeMap::new();
    for (u, utt) in d.utterances.iter().enumerate() {
        let forms = utt.forms();
        let edus = gold_edus(utt, u);
        let mut record = |label: DependencyLabel, dependent: usize| {
            let Some(edu) = edus.iter().find(|e| e.contains(dependent)) else {
                return;
            };
            let hit = source
                .detect(&d.id, *edu, &forms)
                .is_some_and(|s| s.arc_label() == label);
            let acc = out.entry(label).or_default();
            acc.arcs += 1;
            acc.matched += hit as usize;
        };
        for (i, t) in utt.tokens.iter().enumerate() {
            if t.label.is_inter_edu() {
                record(t.label, i + 1);
            }
        }
        if let (Some(link), Some(root)) = (d.link_into(u), utt.root()) {
            record(link.label, root);
        }
    }
    out
}

/// For every inter-EDU label, the share of gold arcs with that label whose
/// dependent EDU carries a signal mapping to the same label.
pub fn signal_matching(gold: &[Dialogue], source: &dyn SignalSource) -> BTreeMap<DependencyLabel, SignalAccuracy> {
    let parts = crate::par::map(gold, |d| signal_matching_one(d, source));
    let mut total: BTreeMap<DependencyLabel, SignalAccuracy> =
        DependencyLabel::inter_edu().map(|l| (l, SignalAccuracy::default())).collect();
    for part in parts {
        for (l, a) in part {
            let t = total.entry(l).or_default();
            t.arcs += a.arcs;
            t.matched += a.matched;
        }
    }
    total
}
