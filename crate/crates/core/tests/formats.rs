use dialdep::io::{
    read_dialogues, read_distribution_table, read_scores, read_signal_distributions, write_scores,
    write_signal_distributions, IoError,
};
use dialdep::label::DependencyLabel::*;
use dialdep::segment::{segment, EduSpan, SegmenterConfig};
use dialdep::selection::{attach_predictions, filter, merge_multiview, score_samples, Magnitude, View};
use dialdep::signal::{Signal, SignalLexicon};
use dialdep::transform::{transform_dialogue, Mode, TransformConfig};

const CORPUS: &str = include_str!("../../../fixtures/algorithm1.cddt");
const SCORES_S: &str = include_str!("../../../fixtures/algorithm1.scores.s.jsonl");
const SCORES_T: &str = include_str!("../../../fixtures/algorithm1.scores.t.jsonl");
const SIGNALS: &str = include_str!("../../../fixtures/algorithm1.signals.jsonl");

#[test]
fn score_fixtures_are_canonical() {
    for doc in [SCORES_S, SCORES_T] {
        let recs = read_scores(doc).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(write_scores(&recs).unwrap(), doc);
    }
}

#[test]
fn score_fixture_selection() {
    let corpus = read_dialogues(CORPUS).unwrap();
    let s_recs = read_scores(SCORES_S).unwrap();
    let mut s = score_samples(&s_recs, View::ParserS).unwrap();
    let t = score_samples(&read_scores(SCORES_T).unwrap(), View::ParserT).unwrap();
    attach_predictions(&mut s, &s_recs, &corpus).unwrap();
    assert!(s.iter().all(|x| x.instance.is_some()));

    let ks: Vec<usize> = filter(&s, 0.98).iter().map(|x| x.key.utterance).collect();
    assert_eq!(ks, vec![0, 2]);
    let kt: Vec<usize> = filter(&t, 0.98).iter().map(|x| x.key.utterance).collect();
    assert_eq!(kt, vec![0, 1]);
    let merged = merge_multiview(&filter(&s, 0.98), &filter(&t, 0.98), Magnitude::Min);
    let views: Vec<View> = merged.iter().map(|x| x.view).collect();
    assert_eq!(views, vec![View::ParserS, View::ParserT, View::ParserS]);
}

#[test]
fn scores_with_wrong_length_are_rejected() {
    let corpus = read_dialogues(CORPUS).unwrap();
    let mut recs = read_scores(SCORES_S).unwrap();
    recs.swap(0, 1);
    recs[0].utterance = 0;
    let mut s = score_samples(&recs, View::ParserS).unwrap();
    assert!(attach_predictions(&mut s, &recs, &corpus).is_err());
}

#[test]
fn signal_fixture_groups_on_read() {
    let recs = read_signal_distributions(SIGNALS).unwrap();
    assert_eq!(write_signal_distributions(&recs).unwrap(), SIGNALS);
    let table = read_distribution_table(SIGNALS, Some(&SignalLexicon::seed())).unwrap();
    assert_eq!(table.len(), 7);
    let argmax = |u, s, e| table.get("fig1", EduSpan::new(u, s, e)).unwrap().argmax();
    assert_eq!(argmax(0, 1, 2), Some(Signal::Greeting));
    assert_eq!(argmax(1, 1, 3), Some(Signal::Relation(Attr)));
    assert_eq!(argmax(2, 1, 3), Some(Signal::Relation(Cond)));
    assert_eq!(argmax(2, 8, 10), Some(Signal::Relation(Cause)));
    for r in &recs {
        let d = table.get("fig1", r.span()).unwrap();
        assert!((d.sum() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn distribution_spans_match_the_segmenter() {
    let corpus = read_dialogues(CORPUS).unwrap();
    let recs = read_signal_distributions(SIGNALS).unwrap();
    let mut spans = Vec::new();
    for (u, utt) in corpus[0].utterances.iter().enumerate() {
        let inst = utt.instance();
        spans.extend(segment(utt, u, Some(&inst), &SegmenterConfig::default()).unwrap());
    }
    let listed: Vec<EduSpan> = recs.iter().map(|r| r.span()).collect();
    assert_eq!(listed, spans);
}

#[test]
fn transform_with_external_distributions() {
    let corpus = read_dialogues(CORPUS).unwrap();
    let table = read_distribution_table(SIGNALS, Some(&SignalLexicon::seed())).unwrap();
    let (out, _) = transform_dialogue(
        &corpus[0],
        Mode::Post,
        &table,
        &SegmenterConfig::default(),
        &TransformConfig::default(),
    )
    .unwrap();
    let heads = |u: usize| out.utterances[u].instance().heads;
    assert_eq!(heads(0), vec![4, 1, 4, 0, 4, 5]);
    assert_eq!(heads(1), vec![2, 4, 2, 0, 4]);
    assert_eq!(heads(2), vec![2, 6, 2, 6, 6, 0, 6, 10, 10, 6]);
    // Upper roots sit in EDUs whose distributions favour stm-rsp and temp.
    let labels: Vec<_> = out.links.iter().map(|l| l.label).collect();
    assert_eq!(labels, vec![StmRsp, Temp]);
}

#[test]
fn malformed_lines_report_their_number() {
    let doc = format!("{}\n{{\"dialogue\":\"x\"", SCORES_S.lines().next().unwrap());
    match read_scores(&doc) {
        Err(IoError::Json { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
