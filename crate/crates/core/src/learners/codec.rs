//! Symbol interning shared by the learners.
//!
//! Ids are assigned in lexicographic symbol order so that "smallest id" and
//! "lexicographically first symbol" coincide, which the tie-breaking rules
//! rely on.

use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Id given to feature values never seen in training.
pub(crate) const UNKNOWN: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ClassTable {
    symbols: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl ClassTable {
    pub fn from_labels<'a, I: IntoIterator<Item = &'a str>>(labels: I) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for l in labels {
            *counts.entry(l).or_insert(0) += 1;
        }
        Self::from_counts(counts.into_iter().map(|(s, c)| (s.to_string(), c)))
    }

    /// Builds from `(symbol, frequency)` pairs in any order.
    pub fn from_counts<I: IntoIterator<Item = (String, u64)>>(pairs: I) -> Self {
        let sorted: BTreeMap<String, u64> = pairs.into_iter().collect();
        let symbols: Vec<String> = sorted.keys().cloned().collect();
        let counts = sorted.values().copied().collect();
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        ClassTable {
            symbols,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn id(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }

    #[cfg(test)]
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn frequency(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn prior(&self, id: u32) -> f64 {
        self.frequency(id) as f64 / self.total().max(1) as f64
    }

    /// True when `a` beats `b` on equal score: higher global frequency, then
    /// lexicographically smaller symbol.
    pub fn tie_prefers(&self, a: u32, b: u32) -> bool {
        let (fa, fb) = (self.frequency(a), self.frequency(b));
        fa > fb || (fa == fb && a < b)
    }

    /// Class with the largest score; ties by frequency then symbol.
    pub fn pick<I: IntoIterator<Item = (u32, f64)>>(&self, scores: I) -> Option<u32> {
        let mut best: Option<(u32, f64)> = None;
        for (c, s) in scores {
            best = match best {
                None => Some((c, s)),
                Some((bc, bs)) => {
                    if s > bs || (s == bs && self.tie_prefers(c, bc)) {
                        Some((c, s))
                    } else {
                        Some((bc, bs))
                    }
                }
            };
        }
        best.map(|(c, _)| c)
    }

    /// The overall majority class.
    pub fn majority(&self) -> u32 {
        self.pick((0..self.len() as u32).map(|c| (c, self.frequency(c) as f64)))
            .expect("class table is never empty")
    }
}

/// Per-column value interning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FeatureCodec {
    symbols: Vec<Vec<String>>,
    index: Vec<HashMap<String, u32>>,
}

impl FeatureCodec {
    pub fn from_rows<'a, I: IntoIterator<Item = &'a [String]>>(rows: I) -> Self {
        let mut sets: Vec<BTreeSet<&'a str>> = Vec::new();
        for row in rows {
            if sets.len() < row.len() {
                sets.resize_with(row.len(), BTreeSet::new);
            }
            for (i, v) in row.iter().enumerate() {
                sets[i].insert(v.as_str());
            }
        }
        Self::from_columns(
            sets.into_iter()
                .map(|s| s.into_iter().map(str::to_string).collect())
                .collect(),
        )
    }

    /// Builds from explicit per-column symbol lists (sorted here).
    pub fn from_columns(mut symbols: Vec<Vec<String>>) -> Self {
        for col in symbols.iter_mut() {
            col.sort();
            col.dedup();
        }
        let index = symbols
            .iter()
            .map(|col| {
                col.iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i as u32))
                    .collect()
            })
            .collect();
        FeatureCodec { symbols, index }
    }

    pub fn width(&self) -> usize {
        self.symbols.len()
    }

    pub fn encode_value(&self, feature: usize, value: &str) -> u32 {
        self.index
            .get(feature)
            .and_then(|m| m.get(value))
            .copied()
            .unwrap_or(UNKNOWN)
    }

    pub fn encode(&self, features: &[String]) -> Vec<u32> {
        features
            .iter()
            .enumerate()
            .map(|(i, v)| self.encode_value(i, v))
            .collect()
    }

    pub fn symbol(&self, feature: usize, id: u32) -> &str {
        &self.symbols[feature][id as usize]
    }

    pub fn n_values(&self, feature: usize) -> usize {
        self.symbols[feature].len()
    }
}
