use std::fmt::Write as _;

use dialdep::treebank::{to_global_tree, Dialogue, TreebankError};

/// Indented text drawing of a dialogue's flattened tree. Each node shows its
/// `utterance:token` position, form and incoming label.
pub fn render(d: &Dialogue) -> Result<String, TreebankError> {
    let arcs = to_global_tree(d)?;
    let mut names = Vec::with_capacity(arcs.len() + 1);
    names.push(String::new());
    for (u, utt) in d.utterances.iter().enumerate() {
        for (i, t) in utt.tokens.iter().enumerate() {
            names.push(format!("{u}:{} {}", i + 1, t.form));
        }
    }
    let mut children = vec![Vec::new(); arcs.len() + 1];
    for a in &arcs {
        children[a.head].push(a.index);
    }
    let mut out = format!("{}\n", d.id);
    // Depth-first, children in reading order.
    fn walk(
        node: usize,
        prefix: &str,
        last: bool,
        names: &[String],
        labels: &[String],
        children: &[Vec<usize>],
        out: &mut String,
    ) {
        let branch = if last { "└─ " } else { "├─ " };
        let _ = writeln!(out, "{prefix}{branch}{} ({})", names[node], labels[node]);
        let deeper = format!("{prefix}{}", if last { "   " } else { "│  " });
        let kids = &children[node];
        for (k, &c) in kids.iter().enumerate() {
            walk(c, &deeper, k + 1 == kids.len(), names, labels, children, out);
        }
    }
    let mut labels = vec![String::new(); arcs.len() + 1];
    for a in &arcs {
        labels[a.index] = a.label.to_string();
    }
    let roots = &children[0];
    for (k, &r) in roots.iter().enumerate() {
        walk(r, "", k + 1 == roots.len(), &names, &labels, &children, &mut out);
    }
    Ok(out)
}
