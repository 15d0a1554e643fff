//! Grapheme/phoneme alignment by null insertion and compound matching.
//!
//! Association weights are estimated by hard EM: a positional-band
//! co-occurrence count, weighted by distance from the band centre, seeds the
//! model, then each further pass re-counts the pairs used by the current best
//! alignments. Alignment itself is a
//! three-move dynamic program (match, compound-match, null-insert) that never
//! deletes phonemes.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::{LexiconEntry, PhonemeInventory, NULL_PHONEME};

const COST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    /// Log-weight of a null insertion; must be ≤ 0.
    pub null_penalty: f64,
    /// Hard-EM re-counting passes run after the positional-band seed.
    pub em_iterations: usize,
    /// Weight of unseen pairs; `None` uses the Laplace zero-count value.
    pub floor: Option<f64>,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            null_penalty: 0.1f64.ln(),
            em_iterations: 3,
            floor: None,
        }
    }
}

/// Log-probability weights for grapheme/phoneme pairs.
#[derive(Debug, Clone)]
pub struct AssociationModel {
    scores: HashMap<String, HashMap<String, f64>>,
    pub floor: f64,
    pub null_penalty: f64,
}

impl AssociationModel {
    /// Builds a model from explicit weights.
    pub fn from_scores(
        scores: impl IntoIterator<Item = ((String, String), f64)>,
        floor: f64,
        null_penalty: f64,
    ) -> Result<Self> {
        if !(null_penalty <= 0.0) || !floor.is_finite() {
            return Err(Error::Argument("null_penalty must be <= 0 and floor finite".into()));
        }
        let mut nested: HashMap<String, HashMap<String, f64>> = HashMap::new();
        for ((g, p), v) in scores {
            if !v.is_finite() {
                return Err(Error::Argument("association weights must be finite".into()));
            }
            nested.entry(g).or_default().insert(p, v);
        }
        let scores = nested;
        Ok(AssociationModel {
            scores,
            floor,
            null_penalty,
        })
    }

    pub fn score(&self, grapheme: &str, phoneme: &str) -> f64 {
        self.scores
            .get(grapheme)
            .and_then(|row| row.get(phoneme))
            .copied()
            .unwrap_or(self.floor)
    }

    pub fn is_seen(&self, grapheme: &str, phoneme: &str) -> bool {
        self.scores
            .get(grapheme)
            .is_some_and(|row| row.contains_key(phoneme))
    }

    pub fn with_null_penalty(mut self, null_penalty: f64) -> Self {
        self.null_penalty = null_penalty;
        self
    }

    /// Highest-weighted phoneme for a grapheme among the seen pairs.
    pub fn best_phoneme(&self, grapheme: &str) -> Option<&str> {
        let mut best: Option<(&str, f64)> = None;
        for (p, &s) in self.scores.get(grapheme)? {
            let better = match best {
                None => true,
                Some((bp, bs)) => s > bs || (s == bs && p.as_str() < bp),
            };
            if better {
                best = Some((p.as_str(), s));
            }
        }
        best.map(|(p, _)| p)
    }
}

/// A word whose phoneme string has the same length as its spelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedEntry {
    pub word: String,
    pub graphemes: Vec<String>,
    pub phonemes: Vec<String>,
    /// The transcription this alignment was derived from, as listed.
    pub source: Vec<String>,
    pub transcription_index: usize,
}

impl AlignedEntry {
    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }

    pub fn null_positions(&self) -> Vec<usize> {
        self.phonemes
            .iter()
            .enumerate()
            .filter(|(_, p)| *p == NULL_PHONEME)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Match,
    Compound(usize),
    Null,
}

/// Full result of the dynamic program for one transcription.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub entry: AlignedEntry,
    pub moves: Vec<Move>,
    pub cost: f64,
}

/// Per-move cost as used by the dynamic program.
pub fn move_cost(model: &AssociationModel, grapheme: &str, symbol: Option<&str>) -> f64 {
    match symbol {
        Some(p) => -model.score(grapheme, p),
        None => -model.null_penalty,
    }
}

struct CompoundTable<'a> {
    // (symbol, parts) sorted by symbol
    by_first: HashMap<&'a str, Vec<(&'a str, &'a [String])>>,
}

impl<'a> CompoundTable<'a> {
    fn new(inventory: &'a PhonemeInventory) -> Self {
        let mut by_first = inventory.compounds_by_first();
        for v in by_first.values_mut() {
            v.sort_by(|a, b| a.0.cmp(b.0));
        }
        CompoundTable { by_first }
    }

    fn starting_at(&self, base: &[String], j: usize) -> Vec<(&'a str, usize)> {
        let mut out = Vec::new();
        if j >= base.len() {
            return out;
        }
        if let Some(cands) = self.by_first.get(base[j].as_str()) {
            for (sym, parts) in cands {
                let k = parts.len();
                if j + k <= base.len() && base[j..j + k] == parts[..] {
                    out.push((*sym, k));
                }
            }
        }
        out
    }
}

fn run_dp(
    graphemes: &[String],
    base: &[String],
    model: &AssociationModel,
    table: &CompoundTable<'_>,
) -> Option<(Vec<Move>, Vec<String>, f64)> {
    let g = graphemes.len();
    let p = base.len();
    let width = p + 1;
    let idx = |i: usize, j: usize| i * width + j;
    let compounds: Vec<Vec<(&str, usize)>> = (0..p).map(|j| table.starting_at(base, j)).collect();

    // cost-to-go from (i graphemes, j phonemes consumed)
    let mut to_go = vec![f64::INFINITY; (g + 1) * width];
    to_go[idx(g, p)] = 0.0;
    for i in (0..g).rev() {
        let gr = graphemes[i].as_str();
        for j in (0..=p).rev() {
            let mut best = -model.null_penalty + to_go[idx(i + 1, j)];
            if j < p {
                best = best.min(-model.score(gr, &base[j]) + to_go[idx(i + 1, j + 1)]);
                for &(sym, k) in &compounds[j] {
                    best = best.min(-model.score(gr, sym) + to_go[idx(i + 1, j + k)]);
                }
            }
            to_go[idx(i, j)] = best;
        }
    }
    let total = to_go[idx(0, 0)];
    if !total.is_finite() {
        return None;
    }

    // forward trace; preference order match > compound > null, earliest first
    let mut moves = Vec::with_capacity(g);
    let mut out = Vec::with_capacity(g);
    let (mut i, mut j) = (0, 0);
    while i < g {
        let gr = graphemes[i].as_str();
        let mut choice: Option<(f64, Move, usize, String)> = None;
        let mut consider = |c: f64, m: Move, nj: usize, sym: &str| {
            if !c.is_finite() {
                return;
            }
            let replace = match &choice {
                None => true,
                Some((bc, ..)) => c < *bc - COST_EPS * (1.0 + bc.abs()),
            };
            if replace {
                choice = Some((c, m, nj, sym.to_string()));
            }
        };
        if j < p {
            consider(-model.score(gr, &base[j]) + to_go[idx(i + 1, j + 1)], Move::Match, j + 1, &base[j]);
            for &(sym, k) in &compounds[j] {
                consider(-model.score(gr, sym) + to_go[idx(i + 1, j + k)], Move::Compound(k), j + k, sym);
            }
        }
        consider(-model.null_penalty + to_go[idx(i + 1, j)], Move::Null, j, NULL_PHONEME);
        let (_, m, nj, sym) = choice.expect("finite cost-to-go implies a finite move");
        moves.push(m);
        out.push(sym);
        i += 1;
        j = nj;
    }
    debug_assert_eq!(j, p);
    Some((moves, out, total))
}

/// Aligns one transcription of an entry, returning the path and its cost.
pub fn align_with_cost(
    entry: &LexiconEntry,
    transcription_index: usize,
    model: &AssociationModel,
    inventory: &PhonemeInventory,
) -> Result<Alignment> {
    let table = CompoundTable::new(inventory);
    align_with_table(entry, transcription_index, model, inventory, &table)
}

fn align_with_table(
    entry: &LexiconEntry,
    transcription_index: usize,
    model: &AssociationModel,
    inventory: &PhonemeInventory,
    table: &CompoundTable<'_>,
) -> Result<Alignment> {
    let source = entry
        .transcriptions
        .get(transcription_index)
        .ok_or_else(|| Error::Argument(format!("'{}' has no transcription {transcription_index}", entry.word)))?;
    let graphemes = entry.graphemes();
    let base = inventory.canonical(source);
    let (moves, phonemes, cost) = run_dp(&graphemes, &base, model, table).ok_or_else(|| Error::Alignment {
        word: entry.word.clone(),
        reason: format!(
            "transcription {transcription_index} has {} phonemes for {} graphemes",
            base.len(),
            graphemes.len()
        ),
    })?;
    Ok(Alignment {
        entry: AlignedEntry {
            word: entry.word.clone(),
            graphemes,
            phonemes,
            source: source.clone(),
            transcription_index,
        },
        moves,
        cost,
    })
}

pub fn align_entry(
    entry: &LexiconEntry,
    transcription_index: usize,
    model: &AssociationModel,
    inventory: &PhonemeInventory,
) -> Result<AlignedEntry> {
    align_with_cost(entry, transcription_index, model, inventory).map(|a| a.entry)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentFailure {
    pub word: String,
    pub transcription_index: usize,
    pub reason: String,
}

/// Aligns every transcription of every entry. Failures are collected rather
/// than aborting the run.
pub fn align_corpus(
    entries: &[LexiconEntry],
    model: &AssociationModel,
    inventory: &PhonemeInventory,
) -> (Vec<AlignedEntry>, Vec<AlignmentFailure>) {
    let table = CompoundTable::new(inventory);
    let results: Vec<Vec<std::result::Result<AlignedEntry, AlignmentFailure>>> = entries
        .par_iter()
        .map(|e| {
            (0..e.transcriptions.len())
                .map(|t| {
                    align_with_table(e, t, model, inventory, &table)
                        .map(|a| a.entry)
                        .map_err(|err| AlignmentFailure {
                            word: e.word.clone(),
                            transcription_index: t,
                            reason: err.to_string(),
                        })
                })
                .collect()
        })
        .collect();
    let mut aligned = Vec::new();
    let mut failures = Vec::new();
    for r in results.into_iter().flatten() {
        match r {
            Ok(a) => aligned.push(a),
            Err(f) => failures.push(f),
        }
    }
    (aligned, failures)
}

#[derive(Default)]
struct PairCounts {
    counts: BTreeMap<(String, String), f64>,
}

impl PairCounts {
    fn add(&mut self, g: &str, p: &str, w: f64) {
        *self.counts.entry((g.to_string(), p.to_string())).or_insert(0.0) += w;
    }

    fn into_model(self, n_graphemes: usize, n_phonemes: usize, config: &AlignConfig) -> AssociationModel {
        let total: f64 = self.counts.values().sum();
        let cells = (n_graphemes.max(1) * n_phonemes.max(1)) as f64;
        let denom = total + cells;
        let mut scores: HashMap<String, HashMap<String, f64>> = HashMap::new();
        for ((g, p), c) in self.counts {
            scores.entry(g).or_default().insert(p, ((c + 1.0) / denom).ln());
        }
        AssociationModel {
            scores,
            floor: config.floor.unwrap_or((1.0 / denom).ln()),
            null_penalty: config.null_penalty,
        }
    }
}

/// Estimates grapheme/phoneme association weights over a corpus.
pub fn estimate_associations(
    entries: &[LexiconEntry],
    inventory: &PhonemeInventory,
    config: &AlignConfig,
) -> Result<AssociationModel> {
    if config.em_iterations == 0 {
        return Err(Error::Argument("EM iterations must be positive".into()));
    }
    if entries.is_empty() {
        return Err(Error::Argument("cannot estimate associations from an empty corpus".into()));
    }
    if !(config.null_penalty <= 0.0) {
        return Err(Error::Argument("null penalty must be <= 0".into()));
    }
    let table = CompoundTable::new(inventory);
    let n_graphemes = entries
        .iter()
        .flat_map(|e| e.word.chars())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let n_phonemes = inventory.phonemes().filter(|p| !p.is_null).count();

    // positional band seed
    let mut counts = PairCounts::default();
    for e in entries {
        let graphemes = e.graphemes();
        let g = graphemes.len() as f64;
        for t in &e.transcriptions {
            let base = inventory.canonical(t);
            let p = base.len() as f64;
            for (i, gr) in graphemes.iter().enumerate() {
                let centre = i as f64 * p / g;
                for j in 0..base.len() {
                    // in-band pairs count by closeness to the proportional position
                    let w = 1.0 - (centre - j as f64).abs();
                    if w >= 0.0 {
                        counts.add(gr, &base[j], w);
                        for (sym, _) in table.starting_at(&base, j) {
                            counts.add(gr, sym, w);
                        }
                    }
                }
            }
        }
    }
    let mut model = counts.into_model(n_graphemes, n_phonemes, config);

    for _ in 0..config.em_iterations {
        let per_entry: Vec<Vec<(String, String)>> = entries
            .par_iter()
            .map(|e| {
                let mut pairs = Vec::new();
                for t in 0..e.transcriptions.len() {
                    if let Ok(a) = align_with_table(e, t, &model, inventory, &table) {
                        for (g, p) in a.entry.graphemes.iter().zip(&a.entry.phonemes) {
                            if p != NULL_PHONEME {
                                pairs.push((g.clone(), p.clone()));
                            }
                        }
                    }
                }
                pairs
            })
            .collect();
        let mut counts = PairCounts::default();
        for (g, p) in per_entry.iter().flatten() {
            counts.add(g, p, 1.0);
        }
        model = counts.into_model(n_graphemes, n_phonemes, config);
    }
    Ok(model)
}

/// Candidate compounds for entries that cannot be aligned: adjacent phoneme
/// pairs in the offending transcriptions, most frequent first.
pub fn suggest_compounds(dropped: &[LexiconEntry], inventory: &PhonemeInventory) -> Vec<(Vec<String>, usize)> {
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for e in dropped {
        for t in &e.transcriptions {
            if inventory.min_merged_length(t) <= e.len() {
                continue;
            }
            let base = inventory.canonical(t);
            for w in base.windows(2) {
                *counts.entry(w.to_vec()).or_insert(0) += 1;
            }
        }
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Groups aligned transcriptions back into lexicon entries, in first-seen order.
pub fn aligned_to_entries(aligned: &[AlignedEntry]) -> Vec<LexiconEntry> {
    let mut out: Vec<LexiconEntry> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for a in aligned {
        match index.get(a.word.as_str()) {
            Some(&i) => {
                if !out[i].transcriptions.contains(&a.phonemes) {
                    out[i].transcriptions.push(a.phonemes.clone());
                }
            }
            None => {
                index.insert(a.word.as_str(), out.len());
                out.push(LexiconEntry::new(a.word.clone(), vec![a.phonemes.clone()]));
            }
        }
    }
    out
}

/// Reads an already-aligned lexicon back into aligned entries, checking that
/// every transcription matches its orthography in length.
pub fn entries_as_aligned(entries: &[LexiconEntry]) -> Result<Vec<AlignedEntry>> {
    let mut out = Vec::new();
    for e in entries {
        let graphemes = e.graphemes();
        for (t, phonemes) in e.transcriptions.iter().enumerate() {
            if phonemes.len() != graphemes.len() {
                return Err(Error::Alignment {
                    word: e.word.clone(),
                    reason: format!(
                        "expected an aligned transcription of length {}, found {}",
                        graphemes.len(),
                        phonemes.len()
                    ),
                });
            }
            out.push(AlignedEntry {
                word: e.word.clone(),
                graphemes: graphemes.clone(),
                phonemes: phonemes.clone(),
                source: phonemes.clone(),
                transcription_index: t,
            });
        }
    }
    Ok(out)
}

/// Aligned TSV: one `<orthography>\t<phonemes>` line per transcription.
pub fn aligned_to_string(entries: &[AlignedEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.word);
        out.push('\t');
        out.push_str(&e.phonemes.join(" "));
        out.push('\n');
    }
    out
}

/// Parses aligned TSV without an inventory. Lines of one word number its
/// transcriptions in order; every line must match its spelling in length.
pub fn parse_aligned(context: &str, text: &str) -> Result<Vec<AlignedEntry>> {
    let mut out = Vec::new();
    let mut seen: HashMap<String, Vec<Vec<String>>> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, trans) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(context, lineno, "expected <orthography>\\t<phonemes>"))?;
        let graphemes = crate::lexicon::graphemes(word);
        let phonemes: Vec<String> = trans.split_whitespace().map(str::to_string).collect();
        if graphemes.is_empty() || phonemes.len() != graphemes.len() {
            return Err(Error::parse(
                context,
                lineno,
                format!("'{word}' has {} letters but {} aligned symbols", graphemes.len(), phonemes.len()),
            ));
        }
        let previous = seen.entry(word.to_string()).or_default();
        if previous.contains(&phonemes) {
            return Err(Error::parse(context, lineno, format!("duplicate transcription for '{word}'")));
        }
        out.push(AlignedEntry {
            word: word.to_string(),
            graphemes,
            source: phonemes.iter().filter(|p| *p != NULL_PHONEME).cloned().collect(),
            phonemes: phonemes.clone(),
            transcription_index: previous.len(),
        });
        previous.push(phonemes);
    }
    Ok(out)
}

pub fn load_aligned(path: &std::path::Path) -> Result<Vec<AlignedEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_aligned(&path.display().to_string(), &text)
}
