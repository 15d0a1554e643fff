//! Synthetic parallel lexicons: a Dutch-like spelling-to-sound system for
//! variant A, and variant B derived from A by an ordered list of contextual
//! phoneme rewrites.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::align::{aligned_to_string, AlignedEntry};
use crate::error::{Error, Result};
use crate::lexicon::{graphemes, lexicon_to_string, LexiconEntry, PhonemeInventory, NULL_PHONEME};
use crate::tbedl::{apply_rules, RuleProgram, TransformationRule, DEFAULT_THRESHOLD};

const BASE_PHONEMES: &[&str] = &[
    "b", "d", "f", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "x", "G", "N", "S", "a:", "e:",
    "o:", "y:", "i:", "u:", "2:", "Ei", "9y", "Au", "A", "E", "O", "Y", "I", "@",
];
const COMPOUNDS: &[(&str, &[&str])] = &[("X", &["k", "s"])];

const ONSETS: &[&str] = &[
    "", "", "", "b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "ch", "sch", "st",
    "tr", "br", "kl", "gr", "pl", "sp", "tj", "sl", "kr", "dr",
];
const NUCLEI: &[&str] = &[
    "a", "e", "i", "o", "u", "a", "e", "i", "o", "aa", "ee", "oo", "uu", "ie", "oe", "eu", "ij", "ei", "ui", "ou",
];
const CODAS: &[&str] = &[
    "", "", "", "", "n", "t", "k", "l", "r", "s", "m", "p", "d", "ng", "nk", "ch", "x", "rt", "st", "lk", "ts",
];

/// The spelling-to-sound rule family used for variant A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseRules {
    #[default]
    DutchLike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub word_count: usize,
    /// Letters words may use; syllable parts with other letters are skipped.
    pub alphabet: BTreeSet<char>,
    pub base_rules: BaseRules,
    /// Applied in order to variant A to produce variant B.
    pub dialect_rules: Vec<TransformationRule>,
    /// Fraction of words given a second, variant-B-only transcription in
    /// which every tense/lax vowel takes its opposite length.
    pub ambiguity_rate: f64,
    pub seed: u64,
}

fn rule(line: &str) -> TransformationRule {
    line.parse().expect("built-in rule is well formed")
}

/// Word-initial voicing, tense-to-lax before a following e:, and
/// palatalization after t.
pub fn default_dialect_rules() -> Vec<TransformationRule> {
    vec![
        rule("x G WORD_START_WITHIN 2 ="),
        rule("i: I NEXT_WITHIN 3 e:"),
        rule("j S PREV_EXACT 1 t"),
    ]
}

impl SyntheticSpec {
    pub fn new(word_count: usize, seed: u64) -> Self {
        SyntheticSpec {
            word_count,
            alphabet: "abcdefghijklmnoprstuvwxz".chars().collect(),
            base_rules: BaseRules::DutchLike,
            dialect_rules: default_dialect_rules(),
            ambiguity_rate: 0.2,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub inventory: PhonemeInventory,
    pub lexicon_a: Vec<LexiconEntry>,
    pub lexicon_b: Vec<LexiconEntry>,
    /// Gold alignments, one per listed transcription.
    pub aligned_a: Vec<AlignedEntry>,
    pub aligned_b: Vec<AlignedEntry>,
    pub program: RuleProgram,
}

pub fn synthetic_inventory() -> PhonemeInventory {
    PhonemeInventory::from_symbols("synthetic", BASE_PHONEMES, COMPOUNDS).expect("built-in inventory is valid")
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn vowel_digraph(a: char, b: char) -> Option<&'static str> {
    Some(match (a, b) {
        ('a', 'a') => "a:",
        ('e', 'e') => "e:",
        ('o', 'o') => "o:",
        ('u', 'u') => "y:",
        ('i', 'e') => "i:",
        ('o', 'e') => "u:",
        ('e', 'u') => "2:",
        ('i', 'j') | ('e', 'i') => "Ei",
        ('u', 'i') => "9y",
        ('o', 'u') => "Au",
        _ => return None,
    })
}

/// The vowel of opposite length, for tense/lax pairs.
fn length_partner(p: &str) -> Option<&'static str> {
    Some(match p {
        "a:" => "A",
        "e:" => "E",
        "i:" => "I",
        "o:" => "O",
        "y:" => "Y",
        "A" => "a:",
        "E" => "e:",
        "I" => "i:",
        "O" => "o:",
        "Y" => "y:",
        _ => return None,
    })
}

/// Variant-A pronunciation of a spelling, aligned one symbol per letter.
pub fn transcribe(word: &str) -> Vec<String> {
    let w: Vec<char> = word.chars().collect();
    let n = w.len();
    let at = |i: usize| w.get(i).copied().unwrap_or('#');
    let mut out: Vec<&str> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let c = w[i];
        if let Some(long) = vowel_digraph(c, at(i + 1)) {
            out.extend([long, NULL_PHONEME]);
            i += 2;
            continue;
        }
        if is_vowel(c) {
            let reduced = c == 'e' && i + 2 == n && w[n - 1] == 'n' && w[..i].iter().any(|&x| is_vowel(x));
            let open = i + 1 == n || (!is_vowel(at(i + 1)) && at(i + 1) != 'x' && is_vowel(at(i + 2)));
            out.push(match (c, reduced, open) {
                (_, true, _) => "@",
                ('a', _, true) => "a:",
                ('e', _, true) => "e:",
                ('i', _, true) => "i:",
                ('o', _, true) => "o:",
                ('u', _, true) => "y:",
                ('a', _, false) => "A",
                ('e', _, false) => "E",
                ('i', _, false) => "I",
                ('o', _, false) => "O",
                _ => "Y",
            });
            i += 1;
            continue;
        }
        match (c, at(i + 1), at(i + 2)) {
            ('s', 'c', 'h') => {
                out.extend(["s", "x", NULL_PHONEME]);
                i += 3;
            }
            ('c', 'h', _) => {
                out.extend(["x", NULL_PHONEME]);
                i += 2;
            }
            ('n', 'g', _) => {
                out.extend(["N", NULL_PHONEME]);
                i += 2;
            }
            ('s', 'j', _) => {
                out.extend(["S", NULL_PHONEME]);
                i += 2;
            }
            _ => {
                out.push(match c {
                    'n' if at(i + 1) == 'k' => "N",
                    'g' => "x",
                    'd' if i + 1 == n => "t",
                    'x' => "X",
                    'c' => "k",
                    'b' => "b",
                    'd' => "d",
                    'f' => "f",
                    'h' => "h",
                    'j' => "j",
                    'k' => "k",
                    'l' => "l",
                    'm' => "m",
                    'n' => "n",
                    'p' => "p",
                    'r' => "r",
                    's' => "s",
                    't' => "t",
                    'v' => "v",
                    'w' => "w",
                    _ => "z",
                });
                i += 1;
            }
        }
    }
    out.into_iter().map(str::to_string).collect()
}

fn allowed<'a>(parts: &[&'a str], alphabet: &BTreeSet<char>) -> Vec<&'a str> {
    parts
        .iter()
        .copied()
        .filter(|p| p.chars().all(|c| alphabet.contains(&c)))
        .collect()
}

fn aligned(word: &str, phonemes: Vec<String>, inventory: &PhonemeInventory, index: usize) -> AlignedEntry {
    AlignedEntry {
        word: word.to_string(),
        graphemes: graphemes(word),
        source: inventory.canonical(&phonemes),
        phonemes,
        transcription_index: index,
    }
}

/// Generates both lexicons deterministically from the seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    if spec.alphabet.is_empty() {
        return Err(Error::Argument("alphabet is empty".into()));
    }
    if spec.word_count < 50 {
        return Err(Error::Argument(format!(
            "at least 50 words are needed, {} requested",
            spec.word_count
        )));
    }
    if !(0.0..=0.2).contains(&spec.ambiguity_rate) {
        return Err(Error::Argument("ambiguity rate must lie in [0, 0.2]".into()));
    }
    let onsets = allowed(ONSETS, &spec.alphabet);
    let nuclei = allowed(NUCLEI, &spec.alphabet);
    let codas = allowed(CODAS, &spec.alphabet);
    if nuclei.is_empty() || onsets.is_empty() || codas.is_empty() {
        return Err(Error::Argument("alphabet admits no syllables".into()));
    }
    let inventory = synthetic_inventory();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut words: BTreeSet<String> = BTreeSet::new();
    let mut order: Vec<String> = Vec::new();
    let mut attempts = 0usize;
    while order.len() < spec.word_count {
        attempts += 1;
        if attempts > spec.word_count * 200 {
            return Err(Error::Argument(format!(
                "alphabet only yields {} distinct words",
                order.len()
            )));
        }
        let syllables = match rng.gen_range(0..20) {
            0..=5 => 1,
            6..=14 => 2,
            _ => 3,
        };
        let mut w = String::new();
        for s in 0..syllables {
            let last = s + 1 == syllables;
            if last && syllables > 1 && spec.alphabet.contains(&'e') && spec.alphabet.contains(&'n') && rng.gen_bool(0.2) {
                w.push_str(onsets.choose(&mut rng).unwrap());
                w.push_str("en");
                continue;
            }
            w.push_str(onsets.choose(&mut rng).unwrap());
            w.push_str(nuclei.choose(&mut rng).unwrap());
            w.push_str(codas.choose(&mut rng).unwrap());
        }
        if w.chars().count() < 2 || !words.insert(w.clone()) {
            continue;
        }
        order.push(w);
    }

    let program = RuleProgram {
        rules: spec.dialect_rules.clone(),
        threshold: DEFAULT_THRESHOLD,
    };
    let mut corpus = SyntheticCorpus {
        inventory,
        lexicon_a: Vec::new(),
        lexicon_b: Vec::new(),
        aligned_a: Vec::new(),
        aligned_b: Vec::new(),
        program,
    };
    for w in &order {
        let a = transcribe(w);
        let b = apply_rules(&corpus.program, &a);
        let mut b_alts = vec![b.clone()];
        if rng.gen_bool(spec.ambiguity_rate) {
            let alt: Vec<String> = b
                .iter()
                .map(|p| length_partner(p).map_or_else(|| p.clone(), str::to_string))
                .collect();
            if alt != b {
                b_alts.push(alt);
            }
        }
        corpus
            .lexicon_a
            .push(LexiconEntry::new(w.clone(), vec![corpus.inventory.canonical(&a)]));
        corpus.aligned_a.push(aligned(w, a, &corpus.inventory, 0));
        corpus.lexicon_b.push(LexiconEntry::new(
            w.clone(),
            b_alts.iter().map(|t| corpus.inventory.canonical(t)).collect(),
        ));
        for (k, t) in b_alts.into_iter().enumerate() {
            corpus.aligned_b.push(aligned(w, t, &corpus.inventory, k));
        }
    }
    Ok(corpus)
}

impl SyntheticCorpus {
    /// Writes `lexicon_a.tsv`, `lexicon_b.tsv`, `inventory.txt`,
    /// `dialect_rules.txt` and, with `gold`, `aligned_a.tsv`/`aligned_b.tsv`.
    pub fn write_to_dir(&self, dir: &Path, gold: bool) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = vec![
            ("lexicon_a.tsv", lexicon_to_string(&self.lexicon_a)),
            ("lexicon_b.tsv", lexicon_to_string(&self.lexicon_b)),
            ("inventory.txt", self.inventory.to_text()),
            ("dialect_rules.txt", self.program.to_text()),
        ];
        if gold {
            files.push(("aligned_a.tsv", aligned_to_string(&self.aligned_a)));
            files.push(("aligned_b.tsv", aligned_to_string(&self.aligned_b)));
        }
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
