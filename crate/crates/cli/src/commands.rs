use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::json;

use dialdep::evaluation::{attachment_scores, matching_ranking, matching_score, signal_matching, AttachmentScores, Tally};
use dialdep::io::{read_distribution_table, read_lexicon, read_scores, read_dialogues, write_dialogues, ScoreRecord};
use dialdep::segment::{gold_edus, segment, segmentation_f1};
use dialdep::selection::{
    attach_predictions, filter, linspace, merge_multiview, samples_to_corpus, score_samples, threshold_sweep,
    PseudoSample, View,
};
use dialdep::signal::{SignalLexicon, SignalSource, UtteranceSignals};
use dialdep::synth::{self, SynthConfig};
use dialdep::transform::{transform_corpus, Mode, Rule};
use dialdep::treebank::{count_labels, Dialogue};

use crate::config::Settings;
use crate::render::render;
use crate::{Command, ModeArg, SignalArgs, UsageError, ViewArg};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn read_corpus(path: &Path) -> anyhow::Result<Vec<Dialogue>> {
    read_dialogues(&read_text(path)?).with_context(|| path.display().to_string())
}

fn read_score_file(path: &Path) -> anyhow::Result<Vec<ScoreRecord>> {
    read_scores(&read_text(path)?).with_context(|| path.display().to_string())
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("{}: cannot write", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(None, &text)
}

fn emit_lines<T: Serialize>(values: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    let mut text = String::new();
    for v in values {
        text.push_str(&serde_json::to_string(&v)?);
        text.push('\n');
    }
    write_out(None, &text)
}

fn signal_source(args: &SignalArgs) -> anyhow::Result<Box<dyn SignalSource>> {
    let lex = match &args.lexicon {
        Some(p) => read_lexicon(&read_text(p)?).with_context(|| p.display().to_string())?,
        None => SignalLexicon::seed(),
    };
    Ok(match &args.distributions {
        Some(p) => Box::new(read_distribution_table(&read_text(p)?, Some(&lex)).with_context(|| p.display().to_string())?),
        None => Box::new(lex),
    })
}

#[cfg(feature = "parallel")]
fn configure_jobs(s: &Settings) -> anyhow::Result<()> {
    if let Some(n) = s.jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("cannot start {n} workers: {e}"))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(s: &Settings) -> anyhow::Result<()> {
    if s.jobs.is_some() && s.verbose {
        eprintln!("built without parallel support; --jobs ignored");
    }
    Ok(())
}

pub fn run(cmd: &Command, s: &Settings) -> anyhow::Result<()> {
    configure_jobs(s)?;
    match cmd {
        Command::Validate { files } => validate(files, s),
        Command::Stats { file } => stats(file),
        Command::Segment { file, no_deps, eval } => segment_cmd(file, *no_deps, *eval, s),
        Command::DetectSignals { file, signals } => detect(file, signals, s),
        Command::Transform {
            file,
            mode,
            signals,
            log,
            out,
        } => transform(file, *mode, signals, log.as_deref(), out.as_deref(), s),
        Command::Filter {
            scores,
            view,
            pred,
            out,
            iterations,
        } => filter_cmd(scores, *view, pred.as_deref(), out.as_deref(), *iterations, s),
        Command::Merge {
            scores_s,
            scores_t,
            pred_s,
            pred_t,
            out,
        } => merge(scores_s, scores_t, pred_s.as_deref(), pred_t.as_deref(), out.as_deref(), s),
        Command::Eval { pred, gold, by_label } => eval(pred, gold, *by_label, s),
        Command::Match {
            pred,
            gold,
            syn_label,
            inter_label,
            top,
        } => {
            let pred = read_corpus(pred)?;
            let gold = read_corpus(gold)?;
            match inter_label {
                Some(inter) => {
                    let score = matching_score(&pred, &gold, *syn_label, *inter).map_err(|e| usage(e.to_string()))?;
                    emit(&json!({ "syn_label": syn_label, "inter_label": inter, "score": score }))
                }
                None => {
                    let ranked = matching_ranking(&pred, &gold, *syn_label, *top).map_err(|e| usage(e.to_string()))?;
                    emit(&json!({ "syn_label": syn_label, "top": ranked }))
                }
            }
        }
        Command::SignalMatch { gold, signals } => {
            let gold = read_corpus(gold)?;
            let source = signal_source(signals)?;
            emit(&signal_matching(&gold, source.as_ref()))
        }
        Command::Sweep {
            scores_s,
            scores_t,
            synthetic,
            from,
            to,
            steps,
        } => sweep(scores_s.as_deref(), scores_t.as_deref(), *synthetic, (*from, *to, *steps), s),
        Command::Render { file, dialogue } => {
            let corpus = read_corpus(file)?;
            let chosen: Vec<&Dialogue> = corpus
                .iter()
                .filter(|d| dialogue.as_ref().is_none_or(|id| &d.id == id))
                .collect();
            if chosen.is_empty() {
                return Err(anyhow!("{}: no dialogue `{}`", file.display(), dialogue.as_deref().unwrap_or("")));
            }
            let mut text = String::new();
            for d in chosen {
                text.push_str(&render(d)?);
            }
            write_out(None, &text)
        }
    }
}

fn validate(files: &[std::path::PathBuf], s: &Settings) -> anyhow::Result<()> {
    for f in files {
        let corpus = read_corpus(f)?;
        if s.verbose {
            eprintln!("{}: {} dialogues", f.display(), corpus.len());
        }
    }
    write_out(None, "OK\n")
}

fn stats(file: &Path) -> anyhow::Result<()> {
    let c = count_labels(&read_corpus(file)?)?;
    emit(&json!({
        "dialogues": c.dialogues,
        "utterances": c.utterances,
        "tokens": c.tokens,
        "avg_turns": c.avg_turns(),
        "avg_words": c.avg_words(),
        "inner": c.inner,
        "inter": c.inter,
        "labels": c.by_label,
    }))
}

fn segment_cmd(file: &Path, no_deps: bool, eval: bool, s: &Settings) -> anyhow::Result<()> {
    let corpus = read_corpus(file)?;
    let mut lines = Vec::new();
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for d in &corpus {
        for (u, utt) in d.utterances.iter().enumerate() {
            let inst = utt.instance();
            let deps = (!no_deps).then_some(&inst);
            let edus = segment(utt, u, deps, &s.segmenter).map_err(|e| usage(e.to_string()))?;
            lines.push(json!({
                "dialogue": d.id,
                "utterance": u,
                "edus": edus.iter().map(|e| [e.start, e.end]).collect::<Vec<_>>(),
            }));
            if eval {
                gold.push(gold_edus(utt, u));
            }
            pred.push(edus);
        }
    }
    if eval {
        emit(&segmentation_f1(&pred, &gold)?)
    } else {
        emit_lines(lines)
    }
}

fn detect(file: &Path, args: &SignalArgs, s: &Settings) -> anyhow::Result<()> {
    let corpus = read_corpus(file)?;
    let source = signal_source(args)?;
    let mut lines = Vec::new();
    for d in &corpus {
        for (u, utt) in d.utterances.iter().enumerate() {
            let inst = utt.instance();
            let edus = segment(utt, u, Some(&inst), &s.segmenter).map_err(|e| usage(e.to_string()))?;
            let found = UtteranceSignals::detect(&d.id, u, &utt.forms(), edus, source.as_ref())?;
            for (e, sig) in found.edus.iter().zip(&found.detected) {
                lines.push(json!({
                    "dialogue": d.id,
                    "utterance": u,
                    "start": e.start,
                    "end": e.end,
                    "signal": sig,
                }));
            }
        }
    }
    emit_lines(lines)
}

fn transform(
    file: &Path,
    mode: ModeArg,
    args: &SignalArgs,
    log: Option<&Path>,
    out: Option<&Path>,
    s: &Settings,
) -> anyhow::Result<()> {
    let corpus = read_corpus(file)?;
    let source = signal_source(args)?;
    let mode = match mode {
        ModeArg::Pre => Mode::Pre,
        ModeArg::Post => Mode::Post,
    };
    let results = transform_corpus(&corpus, mode, source.as_ref(), &s.segmenter, &s.transform)
        .with_context(|| file.display().to_string())?;
    let (dialogues, logs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if let Some(p) = log {
        let mut text = String::new();
        for l in &logs {
            text.push_str(&serde_json::to_string(l)?);
            text.push('\n');
        }
        write_out(Some(p), &text)?;
    }
    if s.verbose {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for e in logs.iter().flat_map(|l| &l.utterances).flat_map(|u| &u.events) {
            let name = match e.rule {
                Rule::Relabel { .. } => "relabel",
                Rule::RootKept => "root-kept",
                Rule::Reverse { .. } => "reverse",
                Rule::Greeting { .. } => "greeting",
                Rule::NoTail => "no-tail",
                Rule::Conflict { .. } => "conflict",
            };
            *counts.entry(name).or_default() += 1;
        }
        for (name, n) in counts {
            eprintln!("{name:>10} {n}");
        }
    }
    write_out(out, &write_dialogues(&dialogues)?)
}

fn view_of(v: ViewArg) -> View {
    match v {
        ViewArg::S => View::ParserS,
        ViewArg::T => View::ParserT,
    }
}

fn load_samples(scores: &Path, view: View, pred: Option<&[Dialogue]>) -> anyhow::Result<Vec<PseudoSample>> {
    let recs = read_score_file(scores)?;
    let mut samples = score_samples(&recs, view).with_context(|| scores.display().to_string())?;
    if let Some(pred) = pred {
        attach_predictions(&mut samples, &recs, pred).with_context(|| scores.display().to_string())?;
    }
    Ok(samples)
}

fn filter_cmd(
    scores: &Path,
    view: ViewArg,
    pred: Option<&Path>,
    out: Option<&Path>,
    iterations: usize,
    s: &Settings,
) -> anyhow::Result<()> {
    if iterations != 1 {
        return Err(usage(
            "only one selection round is supported; retraining between rounds needs an external parser",
        ));
    }
    let pred = pred.map(read_corpus).transpose()?;
    let samples = load_samples(scores, view_of(view), pred.as_deref())?;
    let kept = filter(&samples, s.epsilon);
    if let (Some(out), Some(pred)) = (out, &pred) {
        write_out(Some(out), &write_dialogues(&samples_to_corpus(&kept, pred)?)?)?;
    }
    if s.verbose {
        eprintln!("kept {} of {} at epsilon {}", kept.len(), samples.len(), s.epsilon);
    }
    emit(&json!({
        "epsilon": s.epsilon,
        "total": samples.len(),
        "kept": kept.len(),
        "samples": kept,
    }))
}

fn merge(
    scores_s: &Path,
    scores_t: &Path,
    pred_s: Option<&Path>,
    pred_t: Option<&Path>,
    out: Option<&Path>,
    s: &Settings,
) -> anyhow::Result<()> {
    let pred_s = pred_s.map(read_corpus).transpose()?;
    let pred_t = pred_t.map(read_corpus).transpose()?;
    let a = filter(&load_samples(scores_s, View::ParserS, pred_s.as_deref())?, s.epsilon);
    let b = filter(&load_samples(scores_t, View::ParserT, pred_t.as_deref())?, s.epsilon);
    let merged = merge_multiview(&a, &b, s.magnitude);
    if let (Some(out), Some(pred)) = (out, &pred_s) {
        write_out(Some(out), &write_dialogues(&samples_to_corpus(&merged, pred)?)?)?;
    }
    emit(&json!({
        "epsilon": s.epsilon,
        "magnitude": s.magnitude,
        "kept": { "parser-s": a.len(), "parser-t": b.len() },
        "merged": merged.len(),
        "samples": merged,
    }))
}

fn fmt_score(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.2}", 100.0 * v))
}

fn report(scores: &AttachmentScores, by_label: bool) -> String {
    let mut rows: Vec<(String, Tally)> = vec![
        ("inner".into(), scores.inner),
        ("inter".into(), scores.inter),
        ("overall".into(), scores.overall),
    ];
    if by_label {
        rows.extend(scores.by_label.iter().map(|(l, t)| (l.to_string(), *t)));
    }
    let mut text = format!("{:<10} {:>8} {:>8} {:>8}\n", "", "arcs", "UAS", "LAS");
    for (name, t) in rows {
        text.push_str(&format!(
            "{:<10} {:>8} {:>8} {:>8}\n",
            name,
            t.total,
            fmt_score(t.uas()),
            fmt_score(t.las())
        ));
    }
    text
}

fn eval(pred: &Path, gold: &Path, by_label: bool, s: &Settings) -> anyhow::Result<()> {
    let mut scores = attachment_scores(&read_corpus(pred)?, &read_corpus(gold)?)?;
    if s.verbose {
        eprint!("{}", report(&scores, by_label));
    }
    if !by_label {
        scores.by_label.clear();
    }
    emit(&scores)
}

fn sweep(
    scores_s: Option<&Path>,
    scores_t: Option<&Path>,
    synthetic: Option<usize>,
    (from, to, steps): (f64, f64, usize),
    s: &Settings,
) -> anyhow::Result<()> {
    if steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let views: Vec<Vec<PseudoSample>> = match synthetic {
        Some(n) => {
            let mut rng = synth::rng(s.seed);
            let corpus = synth::corpus(&mut rng, n, SynthConfig::default());
            let a = synth::corpus_scores(&mut rng, &corpus, (2.0, 40.0));
            let b = synth::corpus_scores(&mut rng, &corpus, (2.0, 40.0));
            vec![score_samples(&a, View::ParserS)?, score_samples(&b, View::ParserT)?]
        }
        None => {
            let mut v = Vec::new();
            if let Some(p) = scores_s {
                v.push(load_samples(p, View::ParserS, None)?);
            }
            if let Some(p) = scores_t {
                v.push(load_samples(p, View::ParserT, None)?);
            }
            v
        }
    };
    let rows = threshold_sweep(&views, &linspace(from, to, steps), s.magnitude);
    if s.verbose {
        for r in &rows {
            eprintln!("{:>8.4} {:?} {}", r.epsilon, r.kept, r.merged);
        }
    }
    emit(&json!({ "magnitude": s.magnitude, "rows": rows }))
}
