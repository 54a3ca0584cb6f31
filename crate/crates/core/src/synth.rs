//! Seeded generators for synthetic dialogues, corruptions and score files.
//! Used by the test suites and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::ScoreRecord;
use crate::label::DependencyLabel;
use crate::treebank::{DependencyInstance, Dialogue, InterUtteranceLink, Token, TokenRef, Utterance};

pub const VOCABULARY: &[&str] = &[
    "我", "你", "他", "去", "来", "买", "东西", "下雨", "好", "了", "的", "看", "觉得", "如果", "的话", "你好",
    "吗", "因为", "但是", "然后", "，", "。", "？", "！",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub max_utterances: usize,
    pub max_tokens: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_utterances: 6,
            max_tokens: 15,
        }
    }
}

/// Random labelled tree over `n` tokens. The single root is labelled `root`,
/// every other token gets any other label.
pub fn instance<R: Rng>(rng: &mut R, n: usize) -> DependencyInstance {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n];
    let mut labels = vec![DependencyLabel::Root; n];
    for k in 1..n {
        let i = order[k];
        heads[i - 1] = order[rng.gen_range(0..k)];
        labels[i - 1] = loop {
            let l = DependencyLabel::ALL[rng.gen_range(0..DependencyLabel::COUNT)];
            if l != DependencyLabel::Root {
                break l;
            }
        };
    }
    DependencyInstance::new(heads, labels)
}

fn inter_label<R: Rng>(rng: &mut R) -> DependencyLabel {
    let inter: Vec<DependencyLabel> = DependencyLabel::inter_edu().collect();
    *inter.choose(rng).expect("inventory has inter-EDU labels")
}

fn utterance<R: Rng>(rng: &mut R, forms: Vec<String>) -> Utterance {
    let inst = instance(rng, forms.len());
    let speaker = if rng.gen_bool(0.5) { "A" } else { "B" };
    Utterance::new(
        speaker,
        forms
            .into_iter()
            .enumerate()
            .map(|(i, f)| Token::new(f, inst.heads[i], inst.labels[i]))
            .collect(),
    )
}

fn random_link<R: Rng>(rng: &mut R, utterances: &[Utterance], u: usize) -> InterUtteranceLink {
    let hu = rng.gen_range(0..u);
    InterUtteranceLink {
        head: TokenRef::new(hu, rng.gen_range(1..=utterances[hu].len())),
        tail: TokenRef::new(u, utterances[u].root().expect("generated trees have a root")),
        label: inter_label(rng),
    }
}

/// A valid dialogue of up to `cfg.max_utterances` utterances.
pub fn dialogue<R: Rng>(rng: &mut R, id: impl Into<String>, cfg: SynthConfig) -> Dialogue {
    let n_utt = rng.gen_range(1..=cfg.max_utterances.max(1));
    let utterances: Vec<Utterance> = (0..n_utt)
        .map(|_| {
            let n = rng.gen_range(1..=cfg.max_tokens.max(1));
            let forms = (0..n)
                .map(|_| VOCABULARY.choose(rng).expect("non-empty").to_string())
                .collect();
            utterance(rng, forms)
        })
        .collect();
    let links = (1..n_utt).map(|u| random_link(rng, &utterances, u)).collect();
    Dialogue::new(id, utterances, links)
}

pub fn corpus<R: Rng>(rng: &mut R, size: usize, cfg: SynthConfig) -> Vec<Dialogue> {
    (0..size).map(|k| dialogue(rng, format!("d{k}"), cfg)).collect()
}

/// Same tokens as `gold`; each utterance keeps its gold analysis with
/// probability `keep`, otherwise gets a fresh random tree. Links are
/// resampled the same way.
pub fn noisy_copy<R: Rng>(rng: &mut R, gold: &Dialogue, keep: f64) -> Dialogue {
    let utterances: Vec<Utterance> = gold
        .utterances
        .iter()
        .map(|u| {
            if rng.gen_bool(keep) {
                u.clone()
            } else {
                let mut fresh = u.with_instance(&instance(rng, u.len()));
                fresh.speaker = u.speaker.clone();
                fresh
            }
        })
        .collect();
    let links = (1..utterances.len())
        .map(|u| {
            let gold_link = gold.link_into(u).cloned();
            match gold_link {
                Some(mut l) if rng.gen_bool(keep) => {
                    l.tail.token = utterances[u].root().expect("tree");
                    l
                }
                _ => random_link(rng, &utterances, u),
            }
        })
        .collect();
    Dialogue::new(gold.id.clone(), utterances, links)
}

/// Single edits, each of which breaks exactly one structural invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    SelfLoop,
    HeadOutOfRange,
    RootCycle,
    ExtraRoot,
    DropLink,
    DuplicateLink,
    LinkForward,
    LinkTailNotRoot,
    LinkLabelSyntactic,
    LinkOutOfRange,
}

fn applicable(d: &Dialogue) -> Vec<Mutation> {
    let mut m = vec![Mutation::SelfLoop, Mutation::HeadOutOfRange];
    let longest = d.utterances.iter().map(Utterance::len).max().unwrap_or(0);
    if longest >= 2 {
        m.extend([Mutation::RootCycle, Mutation::ExtraRoot]);
    }
    if !d.links.is_empty() {
        m.extend([
            Mutation::DropLink,
            Mutation::DuplicateLink,
            Mutation::LinkForward,
            Mutation::LinkLabelSyntactic,
            Mutation::LinkOutOfRange,
        ]);
        if d.links.iter().any(|l| d.utterances[l.tail.utterance].len() >= 2) {
            m.push(Mutation::LinkTailNotRoot);
        }
    }
    m
}

/// Applies one random invariant-breaking edit to a valid dialogue.
pub fn mutate<R: Rng>(rng: &mut R, d: &Dialogue) -> (Dialogue, Mutation) {
    let kind = *applicable(d).choose(rng).expect("self-loop always applies");
    let mut out = d.clone();
    let pick_utt = |rng: &mut R, min_len: usize| {
        let ok: Vec<usize> = (0..d.utterances.len())
            .filter(|&u| d.utterances[u].len() >= min_len)
            .collect();
        *ok.choose(rng).expect("checked by applicable")
    };
    match kind {
        Mutation::SelfLoop => {
            let u = pick_utt(rng, 1);
            let i = rng.gen_range(1..=d.utterances[u].len());
            out.utterances[u].tokens[i - 1].head = i;
        }
        Mutation::HeadOutOfRange => {
            let u = pick_utt(rng, 1);
            let n = d.utterances[u].len();
            out.utterances[u].tokens[rng.gen_range(0..n)].head = n + 1 + rng.gen_range(0..3);
        }
        Mutation::RootCycle => {
            let u = pick_utt(rng, 2);
            let root = d.utterances[u].root().expect("tree");
            let other = loop {
                let j = rng.gen_range(1..=d.utterances[u].len());
                if j != root {
                    break j;
                }
            };
            out.utterances[u].tokens[root - 1].head = other;
        }
        Mutation::ExtraRoot => {
            let u = pick_utt(rng, 2);
            let root = d.utterances[u].root().expect("tree");
            let other = loop {
                let j = rng.gen_range(1..=d.utterances[u].len());
                if j != root {
                    break j;
                }
            };
            out.utterances[u].tokens[other - 1].head = 0;
        }
        Mutation::DropLink => {
            let k = rng.gen_range(0..out.links.len());
            out.links.remove(k);
        }
        Mutation::DuplicateLink => {
            let k = rng.gen_range(0..out.links.len());
            let copy = out.links[k];
            out.links.push(copy);
        }
        Mutation::LinkForward => {
            let k = rng.gen_range(0..out.links.len());
            let tail = out.links[k].tail.utterance;
            let target = rng.gen_range(tail..d.utterances.len());
            out.links[k].head = TokenRef::new(target, 1);
        }
        Mutation::LinkTailNotRoot => {
            let ks: Vec<usize> = (0..d.links.len())
                .filter(|&k| d.utterances[d.links[k].tail.utterance].len() >= 2)
                .collect();
            let k = *ks.choose(rng).expect("checked by applicable");
            let u = d.links[k].tail.utterance;
            let root = d.utterances[u].root().expect("tree");
            out.links[k].tail.token = if root == 1 { 2 } else { 1 };
        }
        Mutation::LinkLabelSyntactic => {
            let k = rng.gen_range(0..out.links.len());
            let syn: Vec<DependencyLabel> = DependencyLabel::syntactic().collect();
            out.links[k].label = *syn.choose(rng).expect("non-empty");
        }
        Mutation::LinkOutOfRange => {
            let k = rng.gen_range(0..out.links.len());
            let hu = out.links[k].head.utterance;
            out.links[k].head.token = d.utterances[hu].len() + 1;
        }
    }
    (out, kind)
}

fn stochastic_row<R: Rng>(rng: &mut R, width: usize, sharpness: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..width).map(|_| rng.gen::<f64>().powf(sharpness)).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.into_iter().map(|x| x / total).collect()
    } else {
        let mut row = vec![0.0; width];
        row[rng.gen_range(0..width)] = 1.0;
        row
    }
}

/// Row-stochastic arc and label matrices for an utterance of `n` tokens.
/// Larger `sharpness` concentrates mass on fewer entries.
pub fn score_record<R: Rng>(rng: &mut R, dialogue: &str, utterance: usize, n: usize, sharpness: f64) -> ScoreRecord {
    ScoreRecord {
        dialogue: dialogue.to_string(),
        utterance,
        arcs: (0..n).map(|_| stochastic_row(rng, n + 1, sharpness)).collect(),
        labels: (0..n)
            .map(|_| stochastic_row(rng, DependencyLabel::COUNT, sharpness))
            .collect(),
    }
}

/// One score record per utterance of the corpus, with sharpness drawn
/// uniformly from `sharpness`.
pub fn corpus_scores<R: Rng>(rng: &mut R, corpus: &[Dialogue], sharpness: (f64, f64)) -> Vec<ScoreRecord> {
    corpus
        .iter()
        .flat_map(|d| d.utterances.iter().enumerate().map(move |(u, utt)| (d, u, utt.len())))
        .map(|(d, u, n)| {
            let s = rng.gen_range(sharpness.0..=sharpness.1);
            score_record(rng, &d.id, u, n, s)
        })
        .collect()
}
