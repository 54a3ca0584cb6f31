//! Readers and writers for the treebank, score, lexicon and signal files.
//!
//! Treebank files hold dialogue blocks:
//!
//! ```text
//! # dialog = d1
//! # utt = 0
//! # speaker = A
//! 1  您好  0  root  _  _
//! # utt = 1
//! # speaker = B
//! 1  在  0  root  0:1  stm-rsp
//! ```
//!
//! Token lines have six tab-separated columns `IDX FORM HEAD DEPREL GHEAD
//! GREL`. `GHEAD`/`GREL` carry the inter-utterance link that attaches the
//! root of a non-first utterance (`utterance:token` and an inter-EDU label)
//! and are `_` everywhere else. Dialogues are separated by a blank line and
//! every file ends with a newline. Scores and signal distributions are
//! JSON-lines; numbers are written with at most nine significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::label::DependencyLabel;
use crate::segment::EduSpan;
use crate::signal::{
    group_mean, DistributionTable, Signal, SignalDistribution, SignalError, SignalLexicon,
};
use crate::treebank::{
    validate_dialogue, Dialogue, InterUtteranceLink, Token, TokenRef, Utterance, ValidationReport,
};

/// Tolerance on row sums of probability matrices and vectors.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: unknown label `{name}`")]
    UnknownLabel { line: usize, name: String },
    #[error("dialogue `{dialogue}` is invalid:\n{report}")]
    Validation { dialogue: String, report: ValidationReport },
    #[error("line {line}: row {row} of the {matrix} matrix is not a probability distribution (sum {sum})")]
    RowNotStochastic {
        line: usize,
        matrix: &'static str,
        row: usize,
        sum: f64,
    },
    #[error("line {line}: {source}")]
    Signal { line: usize, source: SignalError },
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("cannot serialise: {0}")]
    Unwritable(String),
}

fn format_err(line: usize, reason: impl Into<String>) -> IoError {
    IoError::Format {
        line,
        reason: reason.into(),
    }
}

/// Rounds to nine significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

// ---------------------------------------------------------------------------
// treebank

const DIALOG_PREFIX: &str = "# dialog = ";
const UTT_PREFIX: &str = "# utt = ";
const SPEAKER_PREFIX: &str = "# speaker = ";

struct DialogueBuilder {
    id: String,
    utterances: Vec<Utterance>,
    links: Vec<InterUtteranceLink>,
    speaker_pending: bool,
    start_line: usize,
}

impl DialogueBuilder {
    fn finish(self, line: usize) -> Result<Dialogue, IoError> {
        if self.utterances.is_empty() {
            return Err(format_err(self.start_line, format!("dialogue `{}` has no utterances", self.id)));
        }
        if self.speaker_pending || self.utterances.last().is_some_and(|u| u.is_empty()) {
            return Err(format_err(line, "utterance without tokens"));
        }
        let d = Dialogue::new(self.id, self.utterances, self.links);
        let report = validate_dialogue(&d);
        if !report.is_valid() {
            return Err(IoError::Validation {
                dialogue: d.id,
                report,
            });
        }
        Ok(d)
    }
}

fn parse_usize(line: usize, field: &str, what: &str) -> Result<usize, IoError> {
    field
        .parse::<usize>()
        .map_err(|_| format_err(line, format!("{what} `{field}` is not a non-negative integer")))
}

fn parse_label(line: usize, name: &str) -> Result<DependencyLabel, IoError> {
    DependencyLabel::from_name(name).ok_or_else(|| IoError::UnknownLabel {
        line,
        name: name.to_string(),
    })
}

/// Parses a treebank document and validates every dialogue in it.
pub fn read_dialogues(doc: &str) -> Result<Vec<Dialogue>, IoError> {
    let mut out = Vec::new();
    let mut cur: Option<DialogueBuilder> = None;
    let mut last_line = 0;

    for (k, raw) in doc.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let text = raw.strip_suffix('\r').unwrap_or(raw);

        if text.trim().is_empty() {
            if let Some(b) = cur.take() {
                out.push(b.finish(line)?);
            }
            continue;
        }
        if let Some(id) = text.strip_prefix(DIALOG_PREFIX) {
            if let Some(b) = cur.take() {
                out.push(b.finish(line)?);
            }
            if id.is_empty() {
                return Err(format_err(line, "empty dialogue id"));
            }
            cur = Some(DialogueBuilder {
                id: id.to_string(),
                utterances: Vec::new(),
                links: Vec::new(),
                speaker_pending: false,
                start_line: line,
            });
            continue;
        }
        let Some(b) = cur.as_mut() else {
            return Err(format_err(line, "content outside a `# dialog = ` block"));
        };
        if let Some(idx) = text.strip_prefix(UTT_PREFIX) {
            let idx = parse_usize(line, idx, "utterance index")?;
            if b.speaker_pending || b.utterances.last().is_some_and(|u| u.is_empty()) {
                return Err(format_err(line, "previous utterance has no tokens"));
            }
            if idx != b.utterances.len() {
                return Err(format_err(
                    line,
                    format!("expected utterance {}, found {idx}", b.utterances.len()),
                ));
            }
            b.utterances.push(Utterance::new(String::new(), Vec::new()));
            b.speaker_pending = true;
            continue;
        }
        if let Some(speaker) = text.strip_prefix(SPEAKER_PREFIX) {
            if !b.speaker_pending {
                return Err(format_err(line, "speaker line must directly follow `# utt = `"));
            }
            b.utterances.last_mut().expect("utterance opened").speaker = speaker.to_string();
            b.speaker_pending = false;
            continue;
        }
        if text.starts_with('#') {
            return Err(format_err(line, format!("unrecognised comment line `{text}`")));
        }
        if b.speaker_pending {
            return Err(format_err(line, "missing `# speaker = ` line"));
        }
        let u_index = match b.utterances.len() {
            0 => return Err(format_err(line, "token line before `# utt = `")),
            n => n - 1,
        };

        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() != 6 {
            return Err(format_err(line, format!("expected 6 tab-separated columns, found {}", cols.len())));
        }
        let utt = &mut b.utterances[u_index];
        let idx = parse_usize(line, cols[0], "token index")?;
        if idx != utt.len() + 1 {
            return Err(format_err(line, format!("expected token {}, found {idx}", utt.len() + 1)));
        }
        if cols[1].is_empty() {
            return Err(format_err(line, "empty form"));
        }
        let head = parse_usize(line, cols[2], "head")?;
        let label = parse_label(line, cols[3])?;
        match (cols[4], cols[5]) {
            ("_", "_") => {}
            ("_", _) | (_, "_") => {
                return Err(format_err(line, "GHEAD and GREL must both be set or both be `_`"));
            }
            (ghead, grel) => {
                if head != 0 || u_index == 0 {
                    return Err(format_err(
                        line,
                        "GHEAD is only allowed on the root token of a non-first utterance",
                    ));
                }
                let (gu, gt) = ghead
                    .split_once(':')
                    .ok_or_else(|| format_err(line, format!("GHEAD `{ghead}` is not `utterance:token`")))?;
                let head_ref = TokenRef::new(
                    parse_usize(line, gu, "GHEAD utterance")?,
                    parse_usize(line, gt, "GHEAD token")?,
                );
                b.links.push(InterUtteranceLink {
                    head: head_ref,
                    tail: TokenRef::new(u_index, idx),
                    label: parse_label(line, grel)?,
                });
            }
        }
        utt.tokens.push(Token::new(cols[1], head, label));
    }
    if let Some(b) = cur.take() {
        out.push(b.finish(last_line + 1)?);
    }
    Ok(out)
}

fn check_field(value: &str, what: &str, allow_tab: bool) -> Result<(), IoError> {
    if value.contains(['\n', '\r']) || (!allow_tab && value.contains('\t')) {
        return Err(IoError::Unwritable(format!("{what} `{value}` contains a line break or tab")));
    }
    Ok(())
}

/// Serialises dialogues in canonical form. Dialogues must be valid.
pub fn write_dialogues(ds: &[Dialogue]) -> Result<String, IoError> {
    let mut out = String::new();
    for (k, d) in ds.iter().enumerate() {
        let report = validate_dialogue(d);
        if !report.is_valid() {
            return Err(IoError::Validation {
                dialogue: d.id.clone(),
                report,
            });
        }
        if d.id.is_empty() {
            return Err(IoError::Unwritable("empty dialogue id".into()));
        }
        check_field(&d.id, "dialogue id", true)?;
        if k > 0 {
            out.push('\n');
        }
        writeln!(out, "{DIALOG_PREFIX}{}", d.id).unwrap();
        for (u, utt) in d.utterances.iter().enumerate() {
            check_field(&utt.speaker, "speaker", true)?;
            writeln!(out, "{UTT_PREFIX}{u}").unwrap();
            writeln!(out, "{SPEAKER_PREFIX}{}", utt.speaker).unwrap();
            let link = d.link_into(u);
            for (i, t) in utt.tokens.iter().enumerate() {
                if t.form.is_empty() {
                    return Err(IoError::Unwritable(format!("empty form in dialogue `{}`", d.id)));
                }
                check_field(&t.form, "form", false)?;
                let (ghead, grel) = match link {
                    Some(l) if l.tail.token == i + 1 => (l.head.to_string(), l.label.name().to_string()),
                    _ => ("_".to_string(), "_".to_string()),
                };
                writeln!(out, "{}\t{}\t{}\t{}\t{ghead}\t{grel}", i + 1, t.form, t.head, t.label).unwrap();
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON-lines helpers

fn read_jsonl<T: for<'de> Deserialize<'de>>(doc: &str) -> impl Iterator<Item = Result<(usize, T), IoError>> + '_ {
    doc.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str::<T>(l)
                .map(|v| (k + 1, v))
                .map_err(|source| IoError::Json { line: k + 1, source })
        })
}

fn write_jsonl<T: Serialize>(records: impl IntoIterator<Item = T>) -> Result<String, IoError> {
    let mut out = String::new();
    for r in records {
        let s = serde_json::to_string(&r).map_err(|e| IoError::Unwritable(e.to_string()))?;
        out.push_str(&s);
        out.push('\n');
    }
    Ok(out)
}

fn check_probability_row(line: usize, matrix: &'static str, row: usize, values: &[f64]) -> Result<(), IoError> {
    let sum: f64 = values.iter().sum();
    let entries_ok = values.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p));
    if !entries_ok || (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(IoError::RowNotStochastic { line, matrix, row, sum });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scores

/// Arc and label probabilities a scorer assigns to one utterance.
///
/// `arcs[i][j]` is the probability that token `i + 1` attaches to head `j`
/// (column 0 is the dummy root), so each row has `n + 1` entries. `labels[i]`
/// has one column per label in inventory order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub dialogue: String,
    pub utterance: usize,
    pub arcs: Vec<Vec<f64>>,
    pub labels: Vec<Vec<f64>>,
}

impl ScoreRecord {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Shape and stochasticity checks; `line` is used for error locations.
    pub fn check(&self, line: usize) -> Result<(), IoError> {
        let n = self.arcs.len();
        if n == 0 {
            return Err(format_err(line, "score record has no tokens"));
        }
        if self.labels.len() != n {
            return Err(format_err(
                line,
                format!("{} arc rows but {} label rows", n, self.labels.len()),
            ));
        }
        for (i, row) in self.arcs.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(format_err(line, format!("arc row {i} has {} columns, expected {}", row.len(), n + 1)));
            }
            check_probability_row(line, "arc", i, row)?;
        }
        for (i, row) in self.labels.iter().enumerate() {
            if row.len() != DependencyLabel::COUNT {
                return Err(format_err(
                    line,
                    format!("label row {i} has {} columns, expected {}", row.len(), DependencyLabel::COUNT),
                ));
            }
            check_probability_row(line, "label", i, row)?;
        }
        Ok(())
    }

    fn rounded(&self) -> ScoreRecord {
        let round = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(|&x| round_sig9(x)).collect()).collect()
        };
        ScoreRecord {
            dialogue: self.dialogue.clone(),
            utterance: self.utterance,
            arcs: round(&self.arcs),
            labels: round(&self.labels),
        }
    }
}

pub fn read_scores(doc: &str) -> Result<Vec<ScoreRecord>, IoError> {
    read_jsonl::<ScoreRecord>(doc)
        .map(|r| {
            let (line, rec) = r?;
            rec.check(line)?;
            Ok(rec)
        })
        .collect()
}

pub fn write_scores(records: &[ScoreRecord]) -> Result<String, IoError> {
    for r in records {
        r.check(0)?;
    }
    write_jsonl(records.iter().map(ScoreRecord::rounded))
}

// ---------------------------------------------------------------------------
// lexicon

/// Parses a `word<TAB>signal` lexicon. `#` lines and blank lines are ignored.
pub fn read_lexicon(doc: &str) -> Result<SignalLexicon, IoError> {
    let mut lex = SignalLexicon::new();
    for (k, raw) in doc.lines().enumerate() {
        let line = k + 1;
        let text = raw.strip_suffix('\r').unwrap_or(raw);
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let (word, signal) = text
            .split_once('\t')
            .ok_or_else(|| format_err(line, "expected `word<TAB>signal`"))?;
        if signal.contains('\t') {
            return Err(format_err(line, "expected exactly two columns"));
        }
        let signal: Signal = signal.parse().map_err(|source| IoError::Signal { line, source })?;
        if lex.get(word).is_some() {
            return Err(format_err(line, format!("duplicate lexicon entry `{word}`")));
        }
        lex.insert(word, signal).map_err(|source| IoError::Signal { line, source })?;
    }
    Ok(lex)
}

pub fn write_lexicon(lex: &SignalLexicon) -> Result<String, IoError> {
    let mut out = String::new();
    for (word, signal) in lex.iter() {
        check_field(word, "lexicon word", false)?;
        writeln!(out, "{word}\t{signal}").unwrap();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// signal distributions

/// Either a signal distribution or a raw word distribution for one EDU.
/// Exactly one of `signals` and `words` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalDistributionRecord {
    pub dialogue: String,
    pub utterance: usize,
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<BTreeMap<String, f64>>,
}

impl SignalDistributionRecord {
    pub fn from_distribution(dialogue: impl Into<String>, span: EduSpan, dist: &SignalDistribution) -> Self {
        SignalDistributionRecord {
            dialogue: dialogue.into(),
            utterance: span.utterance,
            start: span.start,
            end: span.end,
            signals: Some(dist.iter().map(|(s, p)| (s.name().to_string(), p)).collect()),
            words: None,
        }
    }

    pub fn span(&self) -> EduSpan {
        EduSpan::new(self.utterance, self.start, self.end)
    }

    pub fn check(&self, line: usize) -> Result<(), IoError> {
        if self.start == 0 || self.end < self.start {
            return Err(format_err(line, format!("invalid span [{}, {}]", self.start, self.end)));
        }
        match (&self.signals, &self.words) {
            (Some(signals), None) => {
                for key in signals.keys() {
                    key.parse::<Signal>().map_err(|source| IoError::Signal { line, source })?;
                }
                let values: Vec<f64> = signals.values().copied().collect();
                check_probability_row(line, "signal", 0, &values)
            }
            (None, Some(words)) => {
                for (w, &p) in words {
                    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                        return Err(IoError::Signal {
                            line,
                            source: SignalError::BadProbability { key: w.clone(), value: p },
                        });
                    }
                }
                Ok(())
            }
            _ => Err(format_err(line, "record needs exactly one of `signals` or `words`")),
        }
    }

    /// Resolves the record to a signal distribution, renormalising it. Word
    /// distributions are grouped through `lex`.
    pub fn to_distribution(&self, lex: Option<&SignalLexicon>) -> Result<SignalDistribution, SignalError> {
        match (&self.signals, &self.words) {
            (Some(signals), _) => {
                let weights = signals
                    .iter()
                    .map(|(k, &p)| k.parse::<Signal>().map(|s| (s, p)))
                    .collect::<Result<Vec<_>, _>>()?;
                SignalDistribution::from_weights(weights)
            }
            (None, Some(words)) => group_mean(words, lex.ok_or(SignalError::EmptyLexicon)?),
            (None, None) => Err(SignalError::NotNormalized(0.0)),
        }
    }

    fn rounded(&self) -> Self {
        let round = |m: &Option<BTreeMap<String, f64>>| {
            m.as_ref()
                .map(|m| m.iter().map(|(k, &v)| (k.clone(), round_sig9(v))).collect())
        };
        SignalDistributionRecord {
            signals: round(&self.signals),
            words: round(&self.words),
            ..self.clone()
        }
    }
}

pub fn read_signal_distributions(doc: &str) -> Result<Vec<SignalDistributionRecord>, IoError> {
    read_jsonl::<SignalDistributionRecord>(doc)
        .map(|r| {
            let (line, rec) = r?;
            rec.check(line)?;
            Ok(rec)
        })
        .collect()
}

pub fn write_signal_distributions(records: &[SignalDistributionRecord]) -> Result<String, IoError> {
    for r in records {
        r.check(0)?;
    }
    write_jsonl(records.iter().map(SignalDistributionRecord::rounded))
}

/// Reads a distribution file straight into a lookup table. Word
/// distributions require a lexicon.
pub fn read_distribution_table(doc: &str, lex: Option<&SignalLexicon>) -> Result<DistributionTable, IoError> {
    let mut table = DistributionTable::new();
    for r in read_jsonl::<SignalDistributionRecord>(doc) {
        let (line, rec) = r?;
        rec.check(line)?;
        let dist = rec
            .to_distribution(lex)
            .map_err(|source| IoError::Signal { line, source })?;
        table.insert(rec.dialogue.clone(), rec.span(), dist);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "# dialog = d1\n# utt = 0\n# speaker = A\n1\t你好\t2\tsubj\t_\t_\n2\t来\t0\troot\t_\t_\n# utt = 1\n# speaker = B\n1\t好\t0\troot\t0:2\tstm-rsp\n2\t。\t1\tpunc\t_\t_\n\n# dialog = d2\n# utt = 0\n# speaker = A\n1\t嗯\t0\troot\t_\t_\n";

    #[test]
    fn distribution_errors_count_blank_lines() {
        let doc = "\n{\"dialogue\":\"d\",\"utterance\":0,\"start\":1,\"end\":1,\"words\":{\"如果\":0.5}}\n";
        match read_distribution_table(doc, None) {
            Err(IoError::Signal { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_round_trip() {
        let ds = read_dialogues(MINI).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].links.len(), 1);
        assert_eq!(ds[0].links[0].head, TokenRef::new(0, 2));
        assert_eq!(write_dialogues(&ds).unwrap(), MINI);
    }

    #[test]
    fn single_utterance_file() {
        let doc = "# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t0\troot\t_\t_\n";
        let ds = read_dialogues(doc).unwrap();
        assert_eq!(ds[0].utterances[0].tokens, vec![Token::new("好", 0, DependencyLabel::Root)]);
        assert_eq!(write_dialogues(&ds).unwrap(), doc);
    }

    #[test]
    fn unknown_label_reports_line() {
        let doc = "# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t0\tfoo\t_\t_\n";
        match read_dialogues(doc) {
            Err(IoError::UnknownLabel { line, name }) => {
                assert_eq!((line, name.as_str()), (4, "foo"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ghead_on_non_root_is_format_error() {
        let doc = "# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t0\troot\t_\t_\n# utt = 1\n# speaker = B\n1\t好\t2\tsubj\t0:1\tstm-rsp\n2\t的\t0\troot\t_\t_\n";
        assert!(matches!(read_dialogues(doc), Err(IoError::Format { line: 7, .. })));
    }

    #[test]
    fn ghead_in_first_utterance_is_format_error() {
        let doc = "# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t0\troot\t0:1\tstm-rsp\n";
        assert!(matches!(read_dialogues(doc), Err(IoError::Format { line: 4, .. })));
    }

    #[test]
    fn structural_errors() {
        for (doc, line) in [
            ("1\t好\t0\troot\t_\t_\n", 1),
            ("# dialog = x\n# utt = 1\n", 2),
            ("# dialog = x\n# utt = 0\n1\t好\t0\troot\t_\t_\n", 3),
            ("# dialog = x\n# utt = 0\n# speaker = A\n2\t好\t0\troot\t_\t_\n", 4),
            ("# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t0\troot\t_\n", 4),
            ("# dialog = x\n# utt = 0\n# speaker = A\n1\t好\tx\troot\t_\t_\n", 4),
            ("# dialog = x\n# utt = 0\n# speaker = A\n# note = 1\n", 4),
        ] {
            match read_dialogues(doc) {
                Err(IoError::Format { line: l, .. }) => assert_eq!(l, line, "{doc:?}"),
                other => panic!("{doc:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_tree_is_validation_error() {
        let doc = "# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t2\tsubj\t_\t_\n2\t的\t1\troot\t_\t_\n";
        assert!(matches!(read_dialogues(doc), Err(IoError::Validation { .. })));
        let doc = "# dialog = x\n# utt = 0\n# speaker = A\n1\t好\t0\troot\t_\t_\n# utt = 1\n# speaker = B\n1\t好\t0\troot\t_\t_\n";
        assert!(matches!(read_dialogues(doc), Err(IoError::Validation { .. })));
    }

    #[test]
    fn crlf_is_accepted() {
        let doc = MINI.replace('\n', "\r\n");
        assert_eq!(read_dialogues(&doc).unwrap(), read_dialogues(MINI).unwrap());
    }

    #[test]
    fn forms_with_tabs_are_unwritable() {
        let mut ds = read_dialogues(MINI).unwrap();
        ds[1].utterances[0].tokens[0].form = "a\tb".into();
        assert!(matches!(write_dialogues(&ds), Err(IoError::Unwritable(_))));
    }

    #[test]
    fn lexicon_lines() {
        let lex = read_lexicon("# comment\n如果\tcond\n\n看\tattr\n").unwrap();
        assert_eq!(lex.get("如果"), Some(Signal::Relation(DependencyLabel::Cond)));
        assert_eq!(lex.len(), 2);
        assert!(matches!(read_lexicon("如果 cond\n"), Err(IoError::Format { line: 1, .. })));
        assert!(matches!(read_lexicon("如果\tsubj\n"), Err(IoError::Signal { line: 1, .. })));
        assert!(matches!(read_lexicon("a\tcond\na\tattr\n"), Err(IoError::Format { line: 2, .. })));
        assert_eq!(read_lexicon(&write_lexicon(&lex).unwrap()).unwrap(), lex);
    }

    fn one_hot(n: usize, k: usize) -> Vec<f64> {
        (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect()
    }

    fn record() -> ScoreRecord {
        ScoreRecord {
            dialogue: "d1".into(),
            utterance: 0,
            arcs: vec![vec![0.1, 0.2, 0.7], vec![0.9, 0.05, 0.05]],
            labels: vec![one_hot(40, 4), one_hot(40, 0)],
        }
    }

    #[test]
    fn scores_round_trip() {
        let doc = write_scores(&[record()]).unwrap();
        assert!(doc.ends_with('\n'));
        assert_eq!(read_scores(&doc).unwrap(), vec![record()]);
        assert_eq!(write_scores(&read_scores(&doc).unwrap()).unwrap(), doc);
    }

    #[test]
    fn non_stochastic_row() {
        let mut r = record();
        r.arcs[0] = vec![0.5, 0.5, 0.1];
        let doc = serde_json::to_string(&r).unwrap();
        assert!(matches!(
            read_scores(&doc),
            Err(IoError::RowNotStochastic { line: 1, matrix: "arc", row: 0, .. })
        ));
    }

    #[test]
    fn score_shape_errors() {
        let mut r = record();
        r.labels[1] = one_hot(39, 0);
        assert!(matches!(r.check(1), Err(IoError::Format { .. })));
        let mut r = record();
        r.arcs[1] = vec![0.5, 0.5];
        assert!(matches!(r.check(1), Err(IoError::Format { .. })));
    }

    #[test]
    fn distribution_records() {
        let words = "{\"dialogue\":\"d\",\"utterance\":0,\"start\":1,\"end\":2,\"words\":{\"如果\":0.2,\"看\":0.1,\"若\":0.4}}\n";
        let recs = read_signal_distributions(words).unwrap();
        assert_eq!(write_signal_distributions(&recs).unwrap(), words);
        let lex = read_lexicon("若\tcond\n如果\tcond\n看\tattr\n").unwrap();
        let table = read_distribution_table(words, Some(&lex)).unwrap();
        let dist = table.get("d", EduSpan::new(0, 1, 2)).unwrap();
        assert_eq!(dist.argmax(), Some(Signal::Relation(DependencyLabel::Cond)));
        assert!(read_distribution_table(words, None).is_err());

        let bad = "{\"dialogue\":\"d\",\"utterance\":0,\"start\":1,\"end\":2,\"signals\":{\"cond\":0.5}}\n";
        assert!(matches!(read_signal_distributions(bad), Err(IoError::RowNotStochastic { .. })));
        let both = "{\"dialogue\":\"d\",\"utterance\":0,\"start\":1,\"end\":2}\n";
        assert!(matches!(read_signal_distributions(both), Err(IoError::Format { .. })));
        let bad_name = "{\"dialogue\":\"d\",\"utterance\":0,\"start\":1,\"end\":2,\"signals\":{\"obj\":1.0}}\n";
        assert!(matches!(read_signal_distributions(bad_name), Err(IoError::Signal { .. })));
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(round_sig9(0.1), 0.1);
        assert_eq!(round_sig9(1.0 / 3.0), 0.333333333);
        assert_eq!(round_sig9(0.0), 0.0);
        assert_eq!(round_sig9(123456789.4), 123456789.0);
    }
}
