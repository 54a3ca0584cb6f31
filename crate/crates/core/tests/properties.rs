use proptest::prelude::*;
use rand::Rng;

use dialdep::evaluation::attachment_scores;
use dialdep::io::{read_dialogues, read_scores, write_dialogues, write_scores};
use dialdep::label::DependencyLabel;
use dialdep::segment::{partition_gap, segment, EduSpan, SegmenterConfig};
use dialdep::selection::{confidence, merge_multiview, score_samples, Magnitude, View};
use dialdep::signal::{Signal, SignalLexicon};
use dialdep::synth::{self, SynthConfig};
use dialdep::transform::{posttran, transform_dialogue, Mode, TransformConfig};
use dialdep::treebank::{to_global_tree, tree_defects, validate_dialogue};

fn partition<R: Rng>(rng: &mut R, n: usize) -> Vec<EduSpan> {
    let mut spans = Vec::new();
    let mut start = 1;
    for i in 1..=n {
        if i == n || rng.gen_bool(0.35) {
            spans.push(EduSpan::new(0, start, i));
            start = i + 1;
        }
    }
    spans
}

fn any_signal<R: Rng>(rng: &mut R) -> Signal {
    let all: Vec<Signal> = Signal::all().collect();
    all[rng.gen_range(0..all.len())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn global_tree_is_a_tree(seed in any::<u64>()) {
        let d = synth::dialogue(&mut synth::rng(seed), "d", SynthConfig::default());
        let arcs = to_global_tree(&d).unwrap();
        let heads: Vec<usize> = arcs.iter().map(|a| a.head).collect();
        prop_assert!(tree_defects(&heads).is_empty());
        prop_assert_eq!(arcs.len(), d.token_count());
    }

    #[test]
    fn treebank_round_trip(seed in any::<u64>()) {
        let corpus = synth::corpus(&mut synth::rng(seed), 5, SynthConfig::default());
        let doc = write_dialogues(&corpus).unwrap();
        prop_assert_eq!(read_dialogues(&doc).unwrap(), corpus);
        let again = write_dialogues(&read_dialogues(&doc).unwrap()).unwrap();
        prop_assert_eq!(again, doc);
    }

    #[test]
    fn mutations_never_validate(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let d = synth::dialogue(&mut rng, "d", SynthConfig::default());
        let (m, kind) = synth::mutate(&mut rng, &d);
        prop_assert!(!validate_dialogue(&m).is_valid(), "{:?}", kind);
    }

    #[test]
    fn posttran_keeps_trees(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let n = rng.gen_range(1..=15);
        let inst = synth::instance(&mut rng, n);
        let edus = partition(&mut rng, n);
        let signals: Vec<Signal> = (0..n).map(|_| any_signal(&mut rng)).collect();
        let out = posttran(&inst, &edus, &signals, &TransformConfig::default()).unwrap();
        prop_assert!(out.instance.tree_defects().is_empty());
        prop_assert_eq!(out.instance.len(), n);
    }

    #[test]
    fn relabel_only_is_idempotent(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let cfg = TransformConfig::default();
        let n = rng.gen_range(1..=15);
        let inst = synth::instance(&mut rng, n);
        let edus = partition(&mut rng, n);
        let plain: Vec<Signal> = DependencyLabel::inter_edu()
            .filter(|l| !cfg.reversal.contains(l))
            .map(Signal::Relation)
            .collect();
        let signals: Vec<Signal> = (0..n).map(|_| plain[rng.gen_range(0..plain.len())]).collect();
        let once = posttran(&inst, &edus, &signals, &cfg).unwrap();
        let twice = posttran(&once.instance, &edus, &signals, &cfg).unwrap();
        prop_assert_eq!(&once.instance.heads, &inst.heads);
        prop_assert_eq!(twice.instance, once.instance);
    }

    #[test]
    fn transformed_dialogues_validate(seed in any::<u64>(), post in any::<bool>()) {
        let d = synth::dialogue(&mut synth::rng(seed), "d", SynthConfig::default());
        let mode = if post { Mode::Post } else { Mode::Pre };
        let (out, log) = transform_dialogue(
            &d,
            mode,
            &SignalLexicon::seed(),
            &SegmenterConfig::default(),
            &TransformConfig::default(),
        )
        .unwrap();
        prop_assert!(validate_dialogue(&out).is_valid());
        prop_assert_eq!(log.utterances.len(), d.utterances.len());
        // Only labels and heads change.
        for (a, b) in out.utterances.iter().zip(&d.utterances) {
            prop_assert_eq!(a.forms(), b.forms());
        }
    }

    #[test]
    fn segments_partition(seed in any::<u64>(), with_deps in any::<bool>()) {
        let d = synth::dialogue(&mut synth::rng(seed), "d", SynthConfig { max_utterances: 3, max_tokens: 25 });
        for (u, utt) in d.utterances.iter().enumerate() {
            let inst = utt.instance();
            let deps = with_deps.then_some(&inst);
            let edus = segment(utt, u, deps, &SegmenterConfig::default()).unwrap();
            prop_assert_eq!(partition_gap(&edus, utt.len()), None);
            prop_assert!(edus.iter().all(|e| e.utterance == u));
        }
    }

    #[test]
    fn self_comparison_is_perfect(seed in any::<u64>()) {
        let corpus = synth::corpus(&mut synth::rng(seed), 4, SynthConfig::default());
        let s = attachment_scores(&corpus, &corpus).unwrap();
        prop_assert_eq!(s.overall.uas(), Some(1.0));
        prop_assert_eq!(s.overall.las(), Some(1.0));
    }

    #[test]
    fn overall_is_weighted_mean(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let gold = synth::corpus(&mut rng, 4, SynthConfig::default());
        let pred: Vec<_> = gold.iter().map(|d| synth::noisy_copy(&mut rng, d, 0.4)).collect();
        let s = attachment_scores(&pred, &gold).unwrap();
        let weighted = |f: fn(&dialdep::evaluation::Tally) -> Option<f64>| {
            let part = |t: &dialdep::evaluation::Tally| f(t).unwrap_or(0.0) * t.total as f64;
            (part(&s.inner) + part(&s.inter)) / s.overall.total as f64
        };
        prop_assert!((weighted(|t| t.uas()) - s.overall.uas().unwrap()).abs() < 1e-12);
        prop_assert!((weighted(|t| t.las()) - s.overall.las().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn confidence_is_bounded(seed in any::<u64>(), n in 1usize..20, sharp in 0.5f64..50.0) {
        let rec = synth::score_record(&mut synth::rng(seed), "d", 0, n, sharp);
        let c = confidence(&rec).unwrap();
        prop_assert!(c.arc >= 1.0 / (n + 1) as f64 - 1e-12 && c.arc <= 1.0 + 1e-12);
        prop_assert!(c.label >= 1.0 / DependencyLabel::COUNT as f64 - 1e-12 && c.label <= 1.0 + 1e-12);
    }

    #[test]
    fn score_files_round_trip(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let corpus = synth::corpus(&mut rng, 3, SynthConfig::default());
        let recs = synth::corpus_scores(&mut rng, &corpus, (1.0, 20.0));
        let doc = write_scores(&recs).unwrap();
        let back = read_scores(&doc).unwrap();
        prop_assert_eq!(back.len(), recs.len());
        for (a, b) in back.iter().zip(&recs) {
            for (ra, rb) in a.arcs.iter().chain(&a.labels).zip(b.arcs.iter().chain(&b.labels)) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-300));
                }
            }
        }
        prop_assert_eq!(write_scores(&back).unwrap(), doc);
    }

    #[test]
    fn merge_is_commutative(seed in any::<u64>(), mean in any::<bool>()) {
        let mut rng = synth::rng(seed);
        let corpus = synth::corpus(&mut rng, 6, SynthConfig::default());
        let s = score_samples(&synth::corpus_scores(&mut rng, &corpus, (1.0, 30.0)), View::ParserS).unwrap();
        let t = score_samples(&synth::corpus_scores(&mut rng, &corpus, (1.0, 30.0)), View::ParserT).unwrap();
        let m = if mean { Magnitude::Mean } else { Magnitude::Min };
        prop_assert_eq!(merge_multiview(&s, &t, m), merge_multiview(&t, &s, m));
    }
}
