//! Discourse signals: lexicon lookup and grouped word distributions.
//!
//! A signal is the discourse role an EDU plays, named by one of the
//! inter-EDU labels. The extra [`Signal::Greeting`] marker is not an arc
//! label; it flags EDUs that open a turn with a salutation so the
//! transformation can demote them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::label::DependencyLabel;
use crate::segment::{partition_gap, EduSpan};

/// Name of the greeting pseudo-signal in lexicon and distribution files.
pub const GREETING: &str = "greeting";

/// Signal assigned to EDUs where nothing was detected.
pub const FALLBACK_SIGNAL: Signal = Signal::Relation(DependencyLabel::Elbr);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    /// Always an inter-EDU label.
    Relation(DependencyLabel),
    Greeting,
}

impl Signal {
    pub fn relation(label: DependencyLabel) -> Option<Signal> {
        label.is_inter_edu().then_some(Signal::Relation(label))
    }

    /// The label this signal writes onto an arc.
    pub fn arc_label(self) -> DependencyLabel {
        match self {
            Signal::Relation(l) => l,
            Signal::Greeting => DependencyLabel::Elbr,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Signal::Relation(l) => l.name(),
            Signal::Greeting => GREETING,
        }
    }

    /// All signals in canonical order.
    pub fn all() -> impl Iterator<Item = Signal> {
        DependencyLabel::inter_edu()
            .map(Signal::Relation)
            .chain(std::iter::once(Signal::Greeting))
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("`{0}` is not an inter-EDU signal")]
    NotASignal(String),
    #[error("signal lexicon is empty")]
    EmptyLexicon,
    #[error("lexicon keys must be non-empty")]
    EmptyWord,
    #[error("EDU spans do not cover token {token} of utterance {utterance}")]
    UncoveredToken { utterance: usize, token: usize },
    #[error("signal distribution is not normalised (sum {0})")]
    NotNormalized(f64),
    #[error("invalid probability {value} for `{key}`")]
    BadProbability { key: String, value: f64 },
}

impl FromStr for Signal {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == GREETING {
            return Ok(Signal::Greeting);
        }
        DependencyLabel::from_name(s)
            .and_then(Signal::relation)
            .ok_or_else(|| SignalError::NotASignal(s.to_string()))
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Word → signal dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignalLexicon {
    entries: BTreeMap<String, Signal>,
}

const SEED_LEXICON: &str = include_str!("../data/lexicon.tsv");

impl SignalLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The small dictionary shipped with the crate.
    pub fn seed() -> Self {
        crate::io::read_lexicon(SEED_LEXICON).expect("bundled lexicon parses")
    }

    pub fn insert(&mut self, word: impl Into<String>, signal: Signal) -> Result<Option<Signal>, SignalError> {
        let word = word.into();
        if word.is_empty() {
            return Err(SignalError::EmptyWord);
        }
        Ok(self.entries.insert(word, signal))
    }

    pub fn get(&self, word: &str) -> Option<Signal> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Signal)> {
        self.entries.iter().map(|(w, &s)| (w.as_str(), s))
    }

    /// Distinct signals the lexicon can produce.
    pub fn signals(&self) -> BTreeSet<Signal> {
        self.entries.values().copied().collect()
    }
}

impl<W: Into<String>> FromIterator<(W, Signal)> for SignalLexicon {
    fn from_iter<I: IntoIterator<Item = (W, Signal)>>(iter: I) -> Self {
        let mut lex = SignalLexicon::new();
        for (w, s) in iter {
            let w = w.into();
            if !w.is_empty() {
                lex.entries.insert(w, s);
            }
        }
        lex
    }
}

/// Signal of the leftmost token whose form is a lexicon key.
pub fn detect_lexicon<S: AsRef<str>>(forms: &[S], lex: &SignalLexicon) -> Option<Signal> {
    forms.iter().find_map(|f| lex.get(f.as_ref()))
}

/// Probabilities of lexicon words at the masked positions of one EDU. Need
/// not sum to one over the lexicon's support.
pub type WordDistribution = BTreeMap<String, f64>;

/// A probability distribution over signals, kept in canonical signal order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalDistribution {
    probs: Vec<(Signal, f64)>,
}

impl SignalDistribution {
    /// Builds a distribution from non-negative weights, renormalising them.
    /// Returns `NotNormalized` if the weights sum to zero.
    pub fn from_weights(weights: impl IntoIterator<Item = (Signal, f64)>) -> Result<Self, SignalError> {
        let mut merged: BTreeMap<Signal, f64> = BTreeMap::new();
        for (s, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(SignalError::BadProbability {
                    key: s.to_string(),
                    value: w,
                });
            }
            *merged.entry(s).or_default() += w;
        }
        let total: f64 = merged.values().sum();
        if total <= 0.0 {
            return Err(SignalError::NotNormalized(total));
        }
        Ok(SignalDistribution {
            probs: merged.into_iter().map(|(s, w)| (s, w / total)).collect(),
        })
    }

    pub fn get(&self, s: Signal) -> f64 {
        self.probs
            .iter()
            .find(|(x, _)| *x == s)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Signal, f64)> + '_ {
        self.probs.iter().copied()
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().map(|(_, p)| p).sum()
    }

    /// Most probable signal; ties go to the earlier signal in canonical order.
    pub fn argmax(&self) -> Option<Signal> {
        let mut best: Option<(Signal, f64)> = None;
        for &(s, p) in &self.probs {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((s, p));
            }
        }
        best.map(|(s, _)| s)
    }
}

/// Averages word probabilities within each signal's lexicon group and
/// renormalises. Words absent from `wd` count as zero; an all-zero input
/// yields the uniform distribution over the lexicon's signals.
pub fn group_mean(wd: &WordDistribution, lex: &SignalLexicon) -> Result<SignalDistribution, SignalError> {
    if lex.is_empty() {
        return Err(SignalError::EmptyLexicon);
    }
    let mut groups: BTreeMap<Signal, (f64, usize)> = BTreeMap::new();
    for (word, signal) in lex.iter() {
        let p = wd.get(word).copied().unwrap_or(0.0);
        if !p.is_finite() || p < 0.0 {
            return Err(SignalError::BadProbability {
                key: word.to_string(),
                value: p,
            });
        }
        let g = groups.entry(signal).or_insert((0.0, 0));
        g.0 += p;
        g.1 += 1;
    }
    let means: Vec<(Signal, f64)> = groups
        .into_iter()
        .map(|(s, (sum, count))| (s, sum / count as f64))
        .collect();
    if means.iter().all(|&(_, m)| m == 0.0) {
        let k = means.len() as f64;
        return Ok(SignalDistribution {
            probs: means.into_iter().map(|(s, _)| (s, 1.0 / k)).collect(),
        });
    }
    SignalDistribution::from_weights(means)
}

/// Anything that can name the signal of an EDU.
pub trait SignalSource: Sync {
    fn detect(&self, dialogue: &str, span: EduSpan, forms: &[&str]) -> Option<Signal>;
}

impl SignalSource for SignalLexicon {
    fn detect(&self, _dialogue: &str, span: EduSpan, forms: &[&str]) -> Option<Signal> {
        detect_lexicon(&forms[span.start - 1..span.end], self)
    }
}

/// Externally computed per-EDU distributions, keyed by dialogue and span.
#[derive(Debug, Clone, Default)]
pub struct DistributionTable {
    entries: HashMap<(String, usize, usize, usize), SignalDistribution>,
}

impl DistributionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dialogue: impl Into<String>, span: EduSpan, dist: SignalDistribution) {
        self.entries
            .insert((dialogue.into(), span.utterance, span.start, span.end), dist);
    }

    pub fn get(&self, dialogue: &str, span: EduSpan) -> Option<&SignalDistribution> {
        self.entries
            .get(&(dialogue.to_string(), span.utterance, span.start, span.end))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl SignalSource for DistributionTable {
    fn detect(&self, dialogue: &str, span: EduSpan, _forms: &[&str]) -> Option<Signal> {
        self.get(dialogue, span).and_then(SignalDistribution::argmax)
    }
}

/// Per-EDU detection results for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceSignals {
    pub edus: Vec<EduSpan>,
    pub detected: Vec<Option<Signal>>,
}

impl UtteranceSignals {
    pub fn detect(
        dialogue: &str,
        utterance: usize,
        forms: &[&str],
        edus: Vec<EduSpan>,
        source: &dyn SignalSource,
    ) -> Result<Self, SignalError> {
        if let Some(token) = partition_gap(&edus, forms.len()) {
            return Err(SignalError::UncoveredToken { utterance, token });
        }
        let detected = edus.iter().map(|&e| source.detect(dialogue, e, forms)).collect();
        Ok(UtteranceSignals { edus, detected })
    }

    /// Detected signal of the EDU containing `token`.
    pub fn at(&self, token: usize) -> Option<Signal> {
        self.edus
            .iter()
            .position(|e| e.contains(token))
            .and_then(|k| self.detected[k])
    }

    /// Per-token signal sequence with `fallback` for EDUs where nothing was detected.
    pub fn expand(&self, fallback: Signal) -> Vec<Signal> {
        self.edus
            .iter()
            .zip(&self.detected)
            .flat_map(|(e, s)| std::iter::repeat_n(s.unwrap_or(fallback), e.len()))
            .collect()
    }
}

/// Per-token signals: each token gets the signal of its EDU, or the
/// fallback (`elbr`) where none was detected.
pub fn signals_for_utterance(
    dialogue: &str,
    utterance: usize,
    forms: &[&str],
    edus: &[EduSpan],
    source: &dyn SignalSource,
) -> Result<Vec<Signal>, SignalError> {
    UtteranceSignals::detect(dialogue, utterance, forms, edus.to_vec(), source)
        .map(|s| s.expand(FALLBACK_SIGNAL))
}
