//! Phoneme inventories and pronunciation lexicons.
//!
//! Lexicons are plain TSV: `<orthography>\t<space-separated phonemes>`, one
//! transcription per line. Words with several transcriptions simply repeat
//! the orthography on several lines; they are merged into one
//! [`LexiconEntry`] on load.
//!
//! Inventories list one phoneme per line. A compound phoneme is declared as
//! `<symbol>\t<space-separated parts>` and the null phoneme as the bare line
//! `-`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Symbol used for the null phoneme.
pub const NULL_PHONEME: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phoneme {
    pub symbol: String,
    pub is_null: bool,
    pub is_compound: bool,
    pub parts: Vec<String>,
}

impl Phoneme {
    pub fn simple(symbol: impl Into<String>) -> Self {
        let symbol = symbol.into();
        let is_null = symbol == NULL_PHONEME;
        Phoneme {
            symbol,
            is_null,
            is_compound: false,
            parts: Vec::new(),
        }
    }

    pub fn compound(symbol: impl Into<String>, parts: Vec<String>) -> Self {
        Phoneme {
            symbol: symbol.into(),
            is_null: false,
            is_compound: true,
            parts,
        }
    }
}

/// The closed symbol set of one transcription scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeInventory {
    pub scheme_name: String,
    symbols: BTreeMap<String, Phoneme>,
    compound_expansions: BTreeMap<String, Vec<String>>,
}

impl PhonemeInventory {
    /// Builds and validates an inventory.
    pub fn new(scheme_name: impl Into<String>, phonemes: Vec<Phoneme>) -> Result<Self> {
        let mut symbols = BTreeMap::new();
        let mut compound_expansions = BTreeMap::new();
        for p in phonemes {
            if p.symbol.is_empty() || p.symbol.chars().any(char::is_whitespace) {
                return Err(Error::Inventory(format!("bad symbol {:?}", p.symbol)));
            }
            if p.is_null && (p.symbol != NULL_PHONEME || p.is_compound || !p.parts.is_empty()) {
                return Err(Error::Inventory(format!(
                    "null phoneme must be the bare symbol '{NULL_PHONEME}'"
                )));
            }
            if !p.is_null && p.symbol == NULL_PHONEME {
                return Err(Error::Inventory("'-' is reserved for the null phoneme".into()));
            }
            if p.is_compound {
                if p.parts.len() < 2 {
                    return Err(Error::Inventory(format!(
                        "compound '{}' needs at least two parts",
                        p.symbol
                    )));
                }
                compound_expansions.insert(p.symbol.clone(), p.parts.clone());
            } else if !p.parts.is_empty() {
                return Err(Error::Inventory(format!("'{}' has parts but is not a compound", p.symbol)));
            }
            if symbols.insert(p.symbol.clone(), p).is_some() {
                return Err(Error::Inventory("duplicate symbol".into()));
            }
        }
        let nulls = symbols.values().filter(|p| p.is_null).count();
        if nulls != 1 {
            return Err(Error::Inventory(format!(
                "expected exactly one null phoneme, found {nulls}"
            )));
        }
        for (sym, parts) in &compound_expansions {
            for part in parts {
                match symbols.get(part) {
                    Some(p) if !p.is_compound && !p.is_null => {}
                    Some(_) => {
                        return Err(Error::Inventory(format!(
                            "compound '{sym}' has non-base part '{part}'"
                        )))
                    }
                    None => {
                        return Err(Error::Inventory(format!(
                            "compound '{sym}' has undeclared part '{part}'"
                        )))
                    }
                }
            }
        }
        Ok(PhonemeInventory {
            scheme_name: scheme_name.into(),
            symbols,
            compound_expansions,
        })
    }

    /// Convenience constructor: base symbols plus `(compound, parts)` pairs.
    /// The null phoneme is always added.
    pub fn from_symbols(scheme_name: &str, base: &[&str], compounds: &[(&str, &[&str])]) -> Result<Self> {
        let mut phonemes = vec![Phoneme::simple(NULL_PHONEME)];
        phonemes.extend(base.iter().map(|s| Phoneme::simple(*s)));
        for (sym, parts) in compounds {
            phonemes.push(Phoneme::compound(*sym, parts.iter().map(|p| p.to_string()).collect()));
        }
        Self::new(scheme_name, phonemes)
    }

    pub fn parse(scheme_name: &str, text: &str) -> Result<Self> {
        let mut phonemes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (sym, parts) = match line.split_once('\t') {
                Some((s, rest)) => (s.trim(), rest.split_whitespace().map(str::to_string).collect::<Vec<_>>()),
                None => (line.trim(), Vec::new()),
            };
            if sym.is_empty() {
                return Err(Error::parse(scheme_name, idx + 1, "empty phoneme symbol"));
            }
            phonemes.push(if parts.is_empty() {
                Phoneme::simple(sym)
            } else {
                Phoneme::compound(sym, parts)
            });
        }
        Self::new(scheme_name, phonemes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    /// Renders the inventory in its file format (sorted, base symbols first).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in self.symbols.values().filter(|p| !p.is_compound) {
            out.push_str(&p.symbol);
            out.push('\n');
        }
        for (sym, parts) in &self.compound_expansions {
            out.push_str(&format!("{sym}\t{}\n", parts.join(" ")));
        }
        out
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.symbols.contains_key(symbol)
    }

    pub fn get(&self, symbol: &str) -> Option<&Phoneme> {
        self.symbols.get(symbol)
    }

    pub fn phonemes(&self) -> impl Iterator<Item = &Phoneme> {
        self.symbols.values()
    }

    pub fn compound_expansions(&self) -> &BTreeMap<String, Vec<String>> {
        &self.compound_expansions
    }

    pub fn is_compound(&self, symbol: &str) -> bool {
        self.compound_expansions.contains_key(symbol)
    }

    /// Replaces compounds by their parts and drops nulls.
    pub fn canonical(&self, phonemes: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(phonemes.len());
        for p in phonemes {
            if p == NULL_PHONEME {
                continue;
            }
            match self.compound_expansions.get(p) {
                Some(parts) => out.extend(parts.iter().cloned()),
                None => out.push(p.clone()),
            }
        }
        out
    }

    /// Compounds keyed by their first part, for matching against base strings.
    pub(crate) fn compounds_by_first(&self) -> HashMap<&str, Vec<(&str, &[String])>> {
        let mut map: HashMap<&str, Vec<(&str, &[String])>> = HashMap::new();
        for (sym, parts) in &self.compound_expansions {
            map.entry(parts[0].as_str()).or_default().push((sym.as_str(), parts.as_slice()));
        }
        map
    }

    /// Smallest number of symbols the canonical transcription can be packed
    /// into by merging runs into declared compounds.
    pub fn min_merged_length(&self, phonemes: &[String]) -> usize {
        let base = self.canonical(phonemes);
        let by_first = self.compounds_by_first();
        let n = base.len();
        let mut best = vec![usize::MAX; n + 1];
        best[n] = 0;
        for j in (0..n).rev() {
            let mut b = best[j + 1].saturating_add(1);
            if let Some(cands) = by_first.get(base[j].as_str()) {
                for (_, parts) in cands {
                    let k = parts.len();
                    if j + k <= n && base[j..j + k] == parts[..] {
                        b = b.min(best[j + k].saturating_add(1));
                    }
                }
            }
            best[j] = b;
        }
        best[0]
    }
}

/// One orthography with all of its listed transcriptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub word: String,
    pub transcriptions: Vec<Vec<String>>,
}

impl LexiconEntry {
    pub fn new(word: impl Into<String>, transcriptions: Vec<Vec<String>>) -> Self {
        LexiconEntry {
            word: word.into(),
            transcriptions,
        }
    }

    /// Orthography as single-character grapheme tokens.
    pub fn graphemes(&self) -> Vec<String> {
        graphemes(&self.word)
    }

    pub fn len(&self) -> usize {
        self.word.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

pub fn graphemes(word: &str) -> Vec<String> {
    word.chars().map(String::from).collect()
}

/// Parses lexicon TSV text. `context` names the source in error messages.
pub fn parse_lexicon(context: &str, text: &str, inventory: &PhonemeInventory) -> Result<Vec<LexiconEntry>> {
    let mut entries: Vec<LexiconEntry> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, trans) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(context, lineno, "expected <orthography>\\t<phonemes>"))?;
        if word.is_empty() {
            return Err(Error::parse(context, lineno, "empty orthography"));
        }
        let phonemes: Vec<String> = trans.split_whitespace().map(str::to_string).collect();
        if phonemes.is_empty() {
            return Err(Error::parse(context, lineno, format!("empty transcription for '{word}'")));
        }
        if let Some(bad) = phonemes.iter().find(|p| !inventory.contains(p)) {
            return Err(Error::parse(context, lineno, format!("unknown phoneme symbol '{bad}'")));
        }
        match index.get(word) {
            Some(&i) => {
                if entries[i].transcriptions.contains(&phonemes) {
                    return Err(Error::parse(
                        context,
                        lineno,
                        format!("duplicate transcription for '{word}'"),
                    ));
                }
                entries[i].transcriptions.push(phonemes);
            }
            None => {
                index.insert(word.to_string(), entries.len());
                entries.push(LexiconEntry::new(word, vec![phonemes]));
            }
        }
    }
    Ok(entries)
}

pub fn load_lexicon(path: &Path, inventory: &PhonemeInventory) -> Result<Vec<LexiconEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&path.display().to_string(), &text, inventory)
}

pub fn write_lexicon<W: Write>(mut out: W, entries: &[LexiconEntry]) -> std::io::Result<()> {
    for e in entries {
        for t in &e.transcriptions {
            writeln!(out, "{}\t{}", e.word, t.join(" "))?;
        }
    }
    Ok(())
}

pub fn lexicon_to_string(entries: &[LexiconEntry]) -> String {
    let mut buf = Vec::new();
    write_lexicon(&mut buf, entries).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("lexicon text is UTF-8")
}

/// Splits entries into those that can be aligned and those with a
/// transcription too long for the orthography even after compound merging.
pub fn filter_alignable(
    entries: &[LexiconEntry],
    inventory: &PhonemeInventory,
) -> (Vec<LexiconEntry>, Vec<LexiconEntry>) {
    entries.iter().cloned().partition(|e| {
        let len = e.len();
        e.transcriptions
            .iter()
            .all(|t| inventory.min_merged_length(t) <= len)
    })
}

/// Two variants of the same word list, keyed by orthography.
#[derive(Debug, Clone, Default)]
pub struct ParallelLexicon {
    pub variant_a: BTreeMap<String, LexiconEntry>,
    pub variant_b: BTreeMap<String, LexiconEntry>,
    pub shared_words: Vec<String>,
}

pub fn pair_lexicons(a: &[LexiconEntry], b: &[LexiconEntry]) -> ParallelLexicon {
    let variant_a: BTreeMap<String, LexiconEntry> =
        a.iter().map(|e| (e.word.clone(), e.clone())).collect();
    let variant_b: BTreeMap<String, LexiconEntry> =
        b.iter().map(|e| (e.word.clone(), e.clone())).collect();
    let keys_b: BTreeSet<&String> = variant_b.keys().collect();
    let shared_words = variant_a
        .keys()
        .filter(|k| keys_b.contains(k))
        .cloned()
        .collect();
    ParallelLexicon {
        variant_a,
        variant_b,
        shared_words,
    }
}
