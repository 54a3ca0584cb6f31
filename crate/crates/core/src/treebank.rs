//! Dialogue-level dependency trees.
//!
//! A dialogue is stored in two layers. Each utterance carries an ordinary
//! dependency tree whose heads are utterance-local (token indices are 1-based,
//! head 0 is the utterance's dummy root). Relations between utterances live
//! in a separate layer of [`InterUtteranceLink`]s, one per non-first
//! utterance, attaching that utterance's root token to a token above it.
//! [`to_global_tree`] flattens both layers into one tree over the dialogue.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::label::{DependencyLabel, Family};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    /// Utterance-local head; 0 is the dummy root.
    pub head: usize,
    pub label: DependencyLabel,
}

impl Token {
    pub fn new(form: impl Into<String>, head: usize, label: DependencyLabel) -> Self {
        Token {
            form: form.into(),
            head,
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub tokens: Vec<Token>,
}

impl Utterance {
    pub fn new(speaker: impl Into<String>, tokens: Vec<Token>) -> Self {
        Utterance {
            speaker: speaker.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token at a 1-based position.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    /// 1-based index of the first token attached to the dummy root.
    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().position(|t| t.head == 0).map(|i| i + 1)
    }

    pub fn instance(&self) -> DependencyInstance {
        DependencyInstance {
            heads: self.tokens.iter().map(|t| t.head).collect(),
            labels: self.tokens.iter().map(|t| t.label).collect(),
            confidence: None,
        }
    }

    /// Replaces heads and labels with those of `inst`, keeping forms.
    pub fn with_instance(&self, inst: &DependencyInstance) -> Utterance {
        assert_eq!(inst.len(), self.len(), "instance length mismatch");
        let tokens = self
            .tokens
            .iter()
            .zip(inst.heads.iter().zip(&inst.labels))
            .map(|(t, (&head, &label))| Token::new(t.form.clone(), head, label))
            .collect();
        Utterance::new(self.speaker.clone(), tokens)
    }
}

/// Coordinate of a token within a dialogue: 0-based utterance, 1-based token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenRef {
    pub utterance: usize,
    pub token: usize,
}

impl TokenRef {
    pub fn new(utterance: usize, token: usize) -> Self {
        TokenRef { utterance, token }
    }
}

impl fmt::Display for TokenRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.utterance, self.token)
    }
}

/// An inter-EDU arc from a token of an earlier utterance to the root token
/// of a later one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterUtteranceLink {
    pub head: TokenRef,
    pub tail: TokenRef,
    pub label: DependencyLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub utterances: Vec<Utterance>,
    pub links: Vec<InterUtteranceLink>,
}

impl Dialogue {
    pub fn new(id: impl Into<String>, utterances: Vec<Utterance>, links: Vec<InterUtteranceLink>) -> Self {
        Dialogue {
            id: id.into(),
            utterances,
            links,
        }
    }

    pub fn token_count(&self) -> usize {
        self.utterances.iter().map(Utterance::len).sum()
    }

    /// The link whose tail lies in utterance `u`, if any.
    pub fn link_into(&self, u: usize) -> Option<&InterUtteranceLink> {
        self.links.iter().find(|l| l.tail.utterance == u)
    }

    /// Global (1-based, reading-order) index of the first token of each utterance, minus one.
    pub fn offsets(&self) -> Vec<usize> {
        self.utterances
            .iter()
            .scan(0, |acc, u| {
                let start = *acc;
                *acc += u.len();
                Some(start)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub arc: f64,
    pub label: f64,
}

/// Head and label vectors for one utterance, optionally with the scorer's
/// confidence when the instance is pseudo-labeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyInstance {
    pub heads: Vec<usize>,
    pub labels: Vec<DependencyLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<Confidence>,
}

impl DependencyInstance {
    pub fn new(heads: Vec<usize>, labels: Vec<DependencyLabel>) -> Self {
        assert_eq!(heads.len(), labels.len(), "head and label vectors differ in length");
        DependencyInstance {
            heads,
            labels,
            confidence: None,
        }
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Head of the 1-based position `i`.
    pub fn head(&self, i: usize) -> usize {
        self.heads[i - 1]
    }

    pub fn label(&self, i: usize) -> DependencyLabel {
        self.labels[i - 1]
    }

    pub fn root(&self) -> Option<usize> {
        self.heads.iter().position(|&h| h == 0).map(|i| i + 1)
    }

    pub fn tree_defects(&self) -> Vec<TreeDefect> {
        tree_defects(&self.heads)
    }
}

/// A structural problem inside a single utterance-local head vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TreeDefect {
    Empty,
    HeadOutOfRange { token: usize, head: usize },
    SelfLoop { token: usize },
    NoRoot,
    MultipleRoots { tokens: Vec<usize> },
    Cycle { tokens: Vec<usize> },
}

impl fmt::Display for TreeDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeDefect::Empty => write!(f, "empty utterance"),
            TreeDefect::HeadOutOfRange { token, head } => {
                write!(f, "head out of range: token {token} has head {head}")
            }
            TreeDefect::SelfLoop { token } => write!(f, "self loop at token {token}"),
            TreeDefect::NoRoot => write!(f, "no root: no token attaches to the dummy root"),
            TreeDefect::MultipleRoots { tokens } => write!(f, "multiple roots at tokens {tokens:?}"),
            TreeDefect::Cycle { tokens } => write!(f, "cycle through tokens {tokens:?}"),
        }
    }
}

/// Checks that `heads` (1-based positions, 0 = dummy root) forms a tree.
pub fn tree_defects(heads: &[usize]) -> Vec<TreeDefect> {
    let n = heads.len();
    if n == 0 {
        return vec![TreeDefect::Empty];
    }
    let mut defects = Vec::new();
    for (i, &h) in heads.iter().enumerate() {
        let token = i + 1;
        if h > n {
            defects.push(TreeDefect::HeadOutOfRange { token, head: h });
        } else if h == token {
            defects.push(TreeDefect::SelfLoop { token });
        }
    }
    let roots: Vec<usize> = (1..=n).filter(|&i| heads[i - 1] == 0).collect();
    match roots.len() {
        0 => defects.push(TreeDefect::NoRoot),
        1 => {}
        _ => defects.push(TreeDefect::MultipleRoots { tokens: roots }),
    }

    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if cur == 0 || cur > n || state[cur] == 2 {
                break;
            }
            if state[cur] == 1 {
                let pos = path.iter().position(|&p| p == cur).expect("node on path");
                let mut cycle: Vec<usize> = path[pos..].to_vec();
                cycle.sort_unstable();
                // a self loop is reported on its own
                if cycle.len() > 1 {
                    defects.push(TreeDefect::Cycle { tokens: cycle });
                }
                break;
            }
            state[cur] = 1;
            path.push(cur);
            cur = heads[cur - 1];
        }
        for p in path {
            state[p] = 2;
        }
    }
    defects
}

/// One violated invariant of a dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Tree { utterance: usize, defect: TreeDefect },
    UnlinkedUtterance { utterance: usize },
    MultipleLinks { utterance: usize, count: usize },
    LinkOutOfRange { link: usize, head: TokenRef, tail: TokenRef },
    LinkDirection { link: usize, head: TokenRef, tail: TokenRef },
    LinkTailNotRoot { link: usize, tail: TokenRef },
    LinkLabelFamily { link: usize, label: DependencyLabel },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Tree { utterance, defect } => write!(f, "utterance {utterance}: {defect}"),
            Violation::UnlinkedUtterance { utterance } => {
                write!(f, "unlinked utterance {utterance}: no inter-utterance link attaches its root")
            }
            Violation::MultipleLinks { utterance, count } => {
                write!(f, "utterance {utterance} is the tail of {count} links")
            }
            Violation::LinkOutOfRange { link, head, tail } => {
                write!(f, "link {link} ({head} -> {tail}) points outside the dialogue")
            }
            Violation::LinkDirection { link, head, tail } => {
                write!(f, "link {link} ({head} -> {tail}) does not go from an earlier to a later utterance")
            }
            Violation::LinkTailNotRoot { link, tail } => {
                write!(f, "link {link} attaches {tail}, which is not its utterance's root")
            }
            Violation::LinkLabelFamily { link, label } => {
                write!(f, "link {link} carries syntactic label {label}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_dialogue(d: &Dialogue) -> ValidationReport {
    let mut violations = Vec::new();
    for (u, utt) in d.utterances.iter().enumerate() {
        let heads: Vec<usize> = utt.tokens.iter().map(|t| t.head).collect();
        violations.extend(
            tree_defects(&heads)
                .into_iter()
                .map(|defect| Violation::Tree { utterance: u, defect }),
        );
    }

    let in_range = |r: &TokenRef| {
        d.utterances
            .get(r.utterance)
            .is_some_and(|u| r.token >= 1 && r.token <= u.len())
    };
    let mut incoming = vec![0usize; d.utterances.len()];
    for (k, link) in d.links.iter().enumerate() {
        if !in_range(&link.head) || !in_range(&link.tail) {
            violations.push(Violation::LinkOutOfRange {
                link: k,
                head: link.head,
                tail: link.tail,
            });
            continue;
        }
        incoming[link.tail.utterance] += 1;
        if link.head.utterance >= link.tail.utterance {
            violations.push(Violation::LinkDirection {
                link: k,
                head: link.head,
                tail: link.tail,
            });
        }
        let tail_tok = &d.utterances[link.tail.utterance].tokens[link.tail.token - 1];
        if tail_tok.head != 0 {
            violations.push(Violation::LinkTailNotRoot { link: k, tail: link.tail });
        }
        if link.label.family() != Family::InterEdu {
            violations.push(Violation::LinkLabelFamily { link: k, label: link.label });
        }
    }
    for (u, &count) in incoming.iter().enumerate().skip(1) {
        match count {
            0 => violations.push(Violation::UnlinkedUtterance { utterance: u }),
            1 => {}
            _ => violations.push(Violation::MultipleLinks { utterance: u, count }),
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreebankError {
    #[error("dialogue `{id}` is invalid:\n{report}")]
    InvalidDialogue { id: String, report: ValidationReport },
}

pub(crate) fn ensure_valid(d: &Dialogue) -> Result<(), TreebankError> {
    let report = validate_dialogue(d);
    if report.is_valid() {
        Ok(())
    } else {
        Err(TreebankError::InvalidDialogue {
            id: d.id.clone(),
            report,
        })
    }
}

/// One node of the flattened dialogue tree. Indices are global, 1-based, in
/// reading order; head 0 is the dialogue's single root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GlobalArc {
    pub index: usize,
    pub head: usize,
    pub label: DependencyLabel,
}

/// Flattens a dialogue into a single tree: utterance roots after the first
/// take their head and label from the link that attaches them.
pub fn to_global_tree(d: &Dialogue) -> Result<Vec<GlobalArc>, TreebankError> {
    ensure_valid(d)?;
    Ok(global_arcs_unchecked(d))
}

pub(crate) fn global_arcs_unchecked(d: &Dialogue) -> Vec<GlobalArc> {
    let offsets = d.offsets();
    let mut arcs = Vec::with_capacity(d.token_count());
    for (u, utt) in d.utterances.iter().enumerate() {
        let base = offsets[u];
        for (i, tok) in utt.tokens.iter().enumerate() {
            let index = base + i + 1;
            let arc = match (tok.head, u, d.link_into(u)) {
                (0, 0, _) | (0, _, None) => GlobalArc {
                    index,
                    head: 0,
                    label: tok.label,
                },
                (0, _, Some(link)) => GlobalArc {
                    index,
                    head: offsets[link.head.utterance] + link.head.token,
                    label: link.label,
                },
                (h, _, _) => GlobalArc {
                    index,
                    head: base + h,
                    label: tok.label,
                },
            };
            arcs.push(arc);
        }
    }
    arcs
}

/// Label statistics over a corpus.
///
/// Counts follow the two-layer model: every token contributes its
/// utterance-local label (so each utterance root is counted once as `root`),
/// and every inter-utterance link contributes its own label on top. `inner`
/// is the number of syntactic-family arcs, `inter` the number of
/// inter-EDU-family arcs including links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCounts {
    pub by_label: BTreeMap<DependencyLabel, usize>,
    pub inner: usize,
    pub inter: usize,
    pub dialogues: usize,
    pub utterances: usize,
    pub tokens: usize,
}

impl LabelCounts {
    pub fn avg_turns(&self) -> f64 {
        if self.dialogues == 0 {
            0.0
        } else {
            self.utterances as f64 / self.dialogues as f64
        }
    }

    pub fn avg_words(&self) -> f64 {
        if self.dialogues == 0 {
            0.0
        } else {
            self.tokens as f64 / self.dialogues as f64
        }
    }

    pub fn get(&self, label: DependencyLabel) -> usize {
        self.by_label.get(&label).copied().unwrap_or(0)
    }
}

pub fn count_labels(corpus: &[Dialogue]) -> Result<LabelCounts, TreebankError> {
    let mut by_label: BTreeMap<DependencyLabel, usize> =
        DependencyLabel::ALL.into_iter().map(|l| (l, 0)).collect();
    let mut utterances = 0;
    let mut tokens = 0;
    for d in corpus {
        ensure_valid(d)?;
        utterances += d.utterances.len();
        for utt in &d.utterances {
            tokens += utt.len();
            for t in &utt.tokens {
                *by_label.entry(t.label).or_default() += 1;
            }
        }
        for link in &d.links {
            *by_label.entry(link.label).or_default() += 1;
        }
    }
    let family_total = |fam: Family| {
        by_label
            .iter()
            .filter(|(l, _)| l.family() == fam)
            .map(|(_, &c)| c)
            .sum()
    };
    Ok(LabelCounts {
        inner: family_total(Family::Syntactic),
        inter: family_total(Family::InterEdu),
        by_label,
        dialogues: corpus.len(),
        utterances,
        tokens,
    })
}
