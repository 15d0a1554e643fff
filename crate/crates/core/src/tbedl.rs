//! Transformation-based error-driven learning of phoneme rewrite rules.
//!
//! A rule reads "change `from` into `to` when the context template holds".
//! Rules are applied one at a time, each as a single simultaneous pass whose
//! contexts are read from the string as it was before the pass.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::align::AlignedEntry;
use crate::error::{Error, Result};

/// Context value of the word-boundary templates.
pub const BOUNDARY: &str = "=";
pub const DEFAULT_THRESHOLD: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateKind {
    PrevWithin,
    NextWithin,
    PrevExact,
    NextExact,
    WordStartWithin,
    WordEndWithin,
}

impl TemplateKind {
    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::PrevWithin => "PREV_WITHIN",
            TemplateKind::NextWithin => "NEXT_WITHIN",
            TemplateKind::PrevExact => "PREV_EXACT",
            TemplateKind::NextExact => "NEXT_EXACT",
            TemplateKind::WordStartWithin => "WORD_START_WITHIN",
            TemplateKind::WordEndWithin => "WORD_END_WITHIN",
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, TemplateKind::WordStartWithin | TemplateKind::WordEndWithin)
    }
}

impl FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "PREV_WITHIN" => TemplateKind::PrevWithin,
            "NEXT_WITHIN" => TemplateKind::NextWithin,
            "PREV_EXACT" => TemplateKind::PrevExact,
            "NEXT_EXACT" => TemplateKind::NextExact,
            "WORD_START_WITHIN" => TemplateKind::WordStartWithin,
            "WORD_END_WITHIN" => TemplateKind::WordEndWithin,
            _ => return Err(Error::Argument(format!("unknown template '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextTemplate {
    pub kind: TemplateKind,
    pub span: usize,
}

impl ContextTemplate {
    pub fn new(kind: TemplateKind, span: usize) -> Self {
        ContextTemplate { kind, span }
    }

    /// Context values this template can be instantiated with at position `i`.
    fn values_at<'a, T: PartialEq>(&self, s: &'a [T], i: usize, boundary: &'a T) -> Vec<&'a T> {
        let n = s.len();
        let k = self.span;
        let mut out: Vec<&T> = Vec::new();
        let mut push = |v: &'a T| {
            if !out.contains(&v) {
                out.push(v);
            }
        };
        match self.kind {
            TemplateKind::PrevExact => {
                if i >= k {
                    push(&s[i - k]);
                }
            }
            TemplateKind::NextExact => {
                if i + k < n {
                    push(&s[i + k]);
                }
            }
            TemplateKind::PrevWithin => (i.saturating_sub(k)..i).rev().for_each(|j| push(&s[j])),
            TemplateKind::NextWithin => (i + 1..n.min(i + 1 + k)).for_each(|j| push(&s[j])),
            TemplateKind::WordStartWithin => {
                if i < k {
                    push(boundary);
                }
            }
            TemplateKind::WordEndWithin => {
                if i + k >= n {
                    push(boundary);
                }
            }
        }
        out
    }

    fn holds<T: PartialEq>(&self, s: &[T], i: usize, value: &T) -> bool {
        let n = s.len();
        let k = self.span;
        match self.kind {
            TemplateKind::PrevExact => i >= k && s[i - k] == *value,
            TemplateKind::NextExact => i + k < n && s[i + k] == *value,
            TemplateKind::PrevWithin => s[i.saturating_sub(k)..i].contains(value),
            TemplateKind::NextWithin => s[(i + 1).min(n)..n.min(i + 1 + k)].contains(value),
            TemplateKind::WordStartWithin => i < k,
            TemplateKind::WordEndWithin => i + k >= n,
        }
    }
}

/// PREV/NEXT exact at 1-3, PREV/NEXT within 2-3, word start/end within 1-2.
pub fn default_templates() -> Vec<ContextTemplate> {
    use TemplateKind::*;
    let mut t = Vec::new();
    for kind in [PrevExact, NextExact] {
        for span in 1..=3 {
            t.push(ContextTemplate::new(kind, span));
        }
    }
    for kind in [PrevWithin, NextWithin] {
        for span in 2..=3 {
            t.push(ContextTemplate::new(kind, span));
        }
    }
    for kind in [WordStartWithin, WordEndWithin] {
        for span in 1..=2 {
            t.push(ContextTemplate::new(kind, span));
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformationRule {
    pub from: String,
    pub to: String,
    pub template: ContextTemplate,
    pub value: String,
    pub good: usize,
    pub bad: usize,
}

impl TransformationRule {
    pub fn score(&self) -> i64 {
        self.good as i64 - self.bad as i64
    }

    /// `<from> <to> <TEMPLATE> <span> <value>`
    pub fn key(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.from,
            self.to,
            self.template.kind.name(),
            self.template.span,
            self.value
        )
    }

    pub fn applies_at(&self, s: &[String], i: usize) -> bool {
        s[i] == self.from && self.template.holds(s, i, &self.value)
    }

    pub fn apply(&self, s: &[String]) -> Vec<String> {
        (0..s.len())
            .map(|i| {
                if self.applies_at(s, i) {
                    self.to.clone()
                } else {
                    s[i].clone()
                }
            })
            .collect()
    }
}

impl fmt::Display for TransformationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} # good={} bad={}", self.key(), self.good, self.bad)
    }
}

impl FromStr for TransformationRule {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (body, stats) = match line.split_once('#') {
            Some((b, s)) => (b, Some(s)),
            None => (line, None),
        };
        let parts: Vec<&str> = body.split_whitespace().collect();
        let [from, to, kind, span, value] = parts.as_slice() else {
            return Err(Error::Argument(format!("rule needs 5 fields: '{line}'")));
        };
        let span: usize = span
            .parse()
            .map_err(|_| Error::Argument(format!("bad span '{span}'")))?;
        if span == 0 {
            return Err(Error::Argument("span must be at least 1".into()));
        }
        if from == to {
            return Err(Error::Argument(format!("rule rewrites '{from}' into itself")));
        }
        let (mut good, mut bad) = (0, 0);
        for kv in stats.unwrap_or("").split_whitespace() {
            match kv.split_once('=') {
                Some(("good", v)) => good = v.parse().map_err(|_| Error::Argument(format!("bad count '{kv}'")))?,
                Some(("bad", v)) => bad = v.parse().map_err(|_| Error::Argument(format!("bad count '{kv}'")))?,
                _ => {}
            }
        }
        Ok(TransformationRule {
            from: from.to_string(),
            to: to.to_string(),
            template: ContextTemplate::new(kind.parse()?, span),
            value: value.to_string(),
            good,
            bad,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleProgram {
    pub rules: Vec<TransformationRule>,
    pub threshold: usize,
}

impl RuleProgram {
    pub fn to_text(&self) -> String {
        let mut out = format!("# threshold {}\n", self.threshold);
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(context: &str, text: &str) -> Result<Self> {
        let mut program = RuleProgram {
            rules: Vec::new(),
            threshold: DEFAULT_THRESHOLD,
        };
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(t) = rest.trim().strip_prefix("threshold ") {
                    program.threshold = t
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(context, n + 1, "bad threshold"))?;
                }
                continue;
            }
            let rule = line
                .parse()
                .map_err(|e: Error| Error::parse(context, n + 1, e.to_string()))?;
            program.rules.push(rule);
        }
        Ok(program)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn prefix(&self, k: usize) -> RuleProgram {
        RuleProgram {
            rules: self.rules[..k.min(self.rules.len())].to_vec(),
            threshold: self.threshold,
        }
    }
}

pub fn apply_rules(program: &RuleProgram, phonemes: &[String]) -> Vec<String> {
    let mut s = phonemes.to_vec();
    for r in &program.rules {
        s = r.apply(&s);
    }
    s
}

fn check_pairs(pairs: &[(AlignedEntry, AlignedEntry)]) -> Result<()> {
    for (a, b) in pairs {
        if a.word != b.word {
            return Err(Error::Pairing(format!("'{}' paired with '{}'", a.word, b.word)));
        }
        if a.phonemes.len() != b.phonemes.len() {
            return Err(Error::Pairing(format!(
                "'{}' has {} phonemes in variant A and {} in variant B",
                a.word,
                a.phonemes.len(),
                b.phonemes.len()
            )));
        }
    }
    Ok(())
}

/// Pairs the first transcription of every word aligned in both variants,
/// in lexicographic word order.
pub fn pair_aligned(a: &[AlignedEntry], b: &[AlignedEntry]) -> Result<Vec<(AlignedEntry, AlignedEntry)>> {
    let first = |xs: &[AlignedEntry]| -> BTreeMap<String, AlignedEntry> {
        let mut m = BTreeMap::new();
        for x in xs {
            m.entry(x.word.clone()).or_insert_with(|| x.clone());
        }
        m
    };
    let (ma, mb) = (first(a), first(b));
    let pairs: Vec<_> = ma
        .into_iter()
        .filter_map(|(w, ea)| mb.get(&w).map(|eb| (ea, eb.clone())))
        .collect();
    check_pairs(&pairs)?;
    Ok(pairs)
}

/// Interned corpus used during learning.
struct Corpus {
    symbols: Vec<String>,
    boundary: u32,
    current: Vec<Vec<u32>>,
    truth: Vec<Vec<u32>>,
}

impl Corpus {
    fn new(pairs: &[(AlignedEntry, AlignedEntry)]) -> Self {
        let mut index: BTreeMap<&str, u32> = BTreeMap::new();
        index.insert(BOUNDARY, 0);
        for (a, b) in pairs {
            for s in a.phonemes.iter().chain(&b.phonemes) {
                index.entry(s.as_str()).or_insert(0);
            }
        }
        // ids in symbol order so that comparing ids compares renderings
        for (i, v) in index.values_mut().enumerate() {
            *v = i as u32;
        }
        let symbols: Vec<String> = index.keys().map(|s| s.to_string()).collect();
        let enc = |s: &[String]| s.iter().map(|x| index[x.as_str()]).collect::<Vec<u32>>();
        Corpus {
            boundary: index[BOUNDARY],
            current: pairs.iter().map(|(a, _)| enc(&a.phonemes)).collect(),
            truth: pairs.iter().map(|(_, b)| enc(&b.phonemes)).collect(),
            symbols,
        }
    }
}

type Key = (u32, usize, u32);

/// Greedy rule induction; stops once the best candidate fixes fewer than
/// `threshold` errors net.
pub fn learn_tbedl(
    pairs: &[(AlignedEntry, AlignedEntry)],
    templates: &[ContextTemplate],
    threshold: usize,
) -> Result<RuleProgram> {
    if threshold == 0 {
        return Err(Error::Argument("threshold must be at least 1".into()));
    }
    check_pairs(pairs)?;
    let mut corpus = Corpus::new(pairs);
    let mut program = RuleProgram {
        rules: Vec::new(),
        threshold,
    };
    while let Some((rule, enc)) = best_candidate(&corpus, templates) {
        if rule.score() < threshold as i64 {
            break;
        }
        let (from, to, t, value) = enc;
        let template = templates[t];
        for s in corpus.current.iter_mut() {
            let hits: Vec<usize> = (0..s.len())
                .filter(|&i| s[i] == from && template.holds(s, i, &value))
                .collect();
            for i in hits {
                s[i] = to;
            }
        }
        log::debug!("adopted rule {rule}");
        program.rules.push(rule);
    }
    Ok(program)
}

fn best_candidate(corpus: &Corpus, templates: &[ContextTemplate]) -> Option<(TransformationRule, (u32, u32, usize, u32))> {
    let b = corpus.boundary;
    let mut good: HashMap<(u32, u32, usize, u32), usize> = HashMap::new();
    for (cur, truth) in corpus.current.iter().zip(&corpus.truth) {
        for i in 0..cur.len() {
            if cur[i] == truth[i] {
                continue;
            }
            for (t, tpl) in templates.iter().enumerate() {
                for &v in tpl.values_at(cur, i, &b) {
                    *good.entry((cur[i], truth[i], t, v)).or_insert(0) += 1;
                }
            }
        }
    }
    if good.is_empty() {
        return None;
    }
    let wanted: std::collections::HashSet<Key> = good.keys().map(|&(f, _, t, v)| (f, t, v)).collect();
    let froms: std::collections::HashSet<u32> = wanted.iter().map(|k| k.0).collect();
    let mut bad: HashMap<Key, usize> = HashMap::new();
    for (cur, truth) in corpus.current.iter().zip(&corpus.truth) {
        for i in 0..cur.len() {
            if cur[i] != truth[i] || !froms.contains(&cur[i]) {
                continue;
            }
            for (t, tpl) in templates.iter().enumerate() {
                for &v in tpl.values_at(cur, i, &b) {
                    let k = (cur[i], t, v);
                    if wanted.contains(&k) {
                        *bad.entry(k).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    let render = |&(f, to, t, v): &(u32, u32, usize, u32)| {
        (
            corpus.symbols[f as usize].as_str(),
            corpus.symbols[to as usize].as_str(),
            templates[t].kind.name(),
            templates[t].span,
            corpus.symbols[v as usize].as_str(),
        )
    };
    let mut best: Option<((u32, u32, usize, u32), usize, usize)> = None;
    for (&key, &g) in &good {
        let bd = bad.get(&(key.0, key.2, key.3)).copied().unwrap_or(0);
        let better = match best {
            None => true,
            Some((bk, bg, bb)) => {
                let (s, bs) = (g as i64 - bd as i64, bg as i64 - bb as i64);
                s > bs || (s == bs && (g > bg || (g == bg && render(&key) < render(&bk))))
            }
        };
        if better {
            best = Some((key, g, bd));
        }
    }
    let (key, g, bd) = best?;
    let (from, to, t, v) = key;
    let rule = TransformationRule {
        from: corpus.symbols[from as usize].clone(),
        to: corpus.symbols[to as usize].clone(),
        template: templates[t],
        value: corpus.symbols[v as usize].clone(),
        good: g,
        bad: bd,
    };
    Some((rule, key))
}

/// Word- and phoneme-level agreement between variant A (optionally
/// transformed) and variant B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub word_overlap: f64,
    pub phoneme_overlap: f64,
}

pub fn overlap_report(pairs: &[(AlignedEntry, AlignedEntry)], program: Option<&RuleProgram>) -> Result<Overlap> {
    check_pairs(pairs)?;
    let (mut words, mut phonemes, mut total) = (0usize, 0usize, 0usize);
    for (a, b) in pairs {
        let s = match program {
            Some(p) => apply_rules(p, &a.phonemes),
            None => a.phonemes.clone(),
        };
        let same = s.iter().zip(&b.phonemes).filter(|(x, y)| x == y).count();
        phonemes += same;
        total += s.len();
        if same == s.len() {
            words += 1;
        }
    }
    let frac = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    Ok(Overlap {
        word_overlap: frac(words, pairs.len()),
        phoneme_overlap: frac(phonemes, total),
    })
}

/// Positions where `program` applied to variant A still differs from B.
pub fn corpus_errors(pairs: &[(AlignedEntry, AlignedEntry)], program: &RuleProgram) -> usize {
    pairs
        .iter()
        .map(|(a, b)| {
            apply_rules(program, &a.phonemes)
                .iter()
                .zip(&b.phonemes)
                .filter(|(x, y)| x != y)
                .count()
        })
        .sum()
}
