//! Phoneme- and word-level scoring, fold aggregation and error reduction.

use std::collections::{BTreeMap, HashMap};

use crate::align::AlignedEntry;
use crate::error::{Error, Result};

/// All accepted pronunciations of one word, each aligned to its spelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldWord {
    pub word: String,
    pub alternatives: Vec<Vec<String>>,
}

/// Groups aligned entries by word, keeping first-occurrence order.
pub fn gold_from_aligned(entries: &[AlignedEntry]) -> Vec<GoldWord> {
    let mut out: Vec<GoldWord> = Vec::new();
    let mut at: HashMap<&str, usize> = HashMap::new();
    for e in entries {
        match at.get(e.word.as_str()) {
            Some(&i) => {
                if !out[i].alternatives.contains(&e.phonemes) {
                    out[i].alternatives.push(e.phonemes.clone());
                }
            }
            None => {
                at.insert(&e.word, out.len());
                out.push(GoldWord {
                    word: e.word.clone(),
                    alternatives: vec![e.phonemes.clone()],
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldScore {
    pub phoneme_accuracy: f64,
    pub word_accuracy: f64,
    pub phoneme_count: usize,
    pub word_count: usize,
}

/// Per word: whether it is fully correct, the index of the best-matching
/// alternative, and the number of matching positions.
fn judge(gold: &GoldWord, predicted: &[String]) -> Result<(bool, usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (k, alt) in gold.alternatives.iter().enumerate() {
        if alt.len() != predicted.len() {
            continue;
        }
        let m = alt.iter().zip(predicted).filter(|(a, b)| a == b).count();
        if best.map_or(true, |(_, bm)| m > bm) {
            best = Some((k, m));
        }
    }
    let (k, m) = best.ok_or_else(|| Error::Scoring {
        word: gold.word.clone(),
        reason: format!(
            "predicted {} phonemes, gold has {}",
            predicted.len(),
            gold.alternatives.first().map_or(0, Vec::len)
        ),
    })?;
    Ok((m == predicted.len(), k, m))
}

fn lookup<'a>(gold: &[GoldWord], predicted: &'a BTreeMap<String, Vec<String>>) -> Result<Vec<&'a [String]>> {
    if predicted.len() != gold.len() {
        let known: std::collections::HashSet<&str> = gold.iter().map(|g| g.word.as_str()).collect();
        if let Some(extra) = predicted.keys().find(|w| !known.contains(w.as_str())) {
            return Err(Error::Scoring {
                word: extra.clone(),
                reason: "predicted word is not in the gold data".into(),
            });
        }
    }
    gold.iter()
        .map(|g| {
            predicted.get(&g.word).map(Vec::as_slice).ok_or_else(|| Error::Scoring {
                word: g.word.clone(),
                reason: "no prediction".into(),
            })
        })
        .collect()
}

/// A word counts as correct when it equals any gold alternative; phonemes
/// are scored against the alternative with the most positional matches.
pub fn score_predictions(gold: &[GoldWord], predicted: &BTreeMap<String, Vec<String>>) -> Result<FoldScore> {
    let preds = lookup(gold, predicted)?;
    let (mut words, mut phon, mut total) = (0usize, 0usize, 0usize);
    for (g, p) in gold.iter().zip(preds) {
        let (ok, _, m) = judge(g, p)?;
        words += ok as usize;
        phon += m;
        total += p.len();
    }
    let frac = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    Ok(FoldScore {
        phoneme_accuracy: frac(phon, total),
        word_accuracy: frac(words, gold.len()),
        phoneme_count: total,
        word_count: gold.len(),
    })
}

/// Errors per gold phoneme: `symbol -> (occurrences, errors)`.
pub fn per_phoneme_errors(
    gold: &[GoldWord],
    predicted: &BTreeMap<String, Vec<String>>,
) -> Result<BTreeMap<String, (usize, usize)>> {
    let preds = lookup(gold, predicted)?;
    let mut table: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (g, p) in gold.iter().zip(preds) {
        let (_, k, _) = judge(g, p)?;
        for (a, b) in g.alternatives[k].iter().zip(p) {
            let e = table.entry(a.clone()).or_insert((0, 0));
            e.0 += 1;
            e.1 += (a != b) as usize;
        }
    }
    Ok(table)
}

/// Fraction of the baseline's errors removed by the improved system.
pub fn error_reduction(baseline: f64, improved: f64) -> Result<f64> {
    for v in [baseline, improved] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Argument(format!("accuracy {v} is outside [0, 1]")));
        }
    }
    if baseline >= 1.0 {
        return Err(Error::Argument(
            "error reduction is undefined for a perfect baseline".into(),
        ));
    }
    Ok(((1.0 - baseline) - (1.0 - improved)) / (1.0 - baseline))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub per_fold: Vec<FoldScore>,
    pub mean_phoneme: f64,
    pub mean_word: f64,
    pub stddev_phoneme: f64,
    pub stddev_word: f64,
}

fn sample_stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

/// Count-weighted means and sample standard deviations over folds.
pub fn aggregate(per_fold: &[FoldScore]) -> Result<EvaluationResult> {
    if per_fold.is_empty() {
        return Err(Error::Argument("cannot aggregate zero folds".into()));
    }
    if per_fold.len() == 1 {
        log::warn!("a single fold has no spread; standard deviation reported as 0");
    }
    let phonemes: usize = per_fold.iter().map(|f| f.phoneme_count).sum();
    let words: usize = per_fold.iter().map(|f| f.word_count).sum();
    // sort the terms so the sum does not depend on fold order
    let weighted = |value: fn(&FoldScore) -> f64, count: fn(&FoldScore) -> usize, total: usize| {
        let mut terms: Vec<f64> = per_fold.iter().map(|f| value(f) * count(f) as f64).collect();
        terms.sort_by(f64::total_cmp);
        if total == 0 {
            0.0
        } else {
            terms.iter().sum::<f64>() / total as f64
        }
    };
    let sorted = |value: fn(&FoldScore) -> f64| {
        let mut v: Vec<f64> = per_fold.iter().map(value).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    Ok(EvaluationResult {
        per_fold: per_fold.to_vec(),
        mean_phoneme: weighted(|f| f.phoneme_accuracy, |f| f.phoneme_count, phonemes),
        mean_word: weighted(|f| f.word_accuracy, |f| f.word_count, words),
        stddev_phoneme: sample_stddev(&sorted(|f| f.phoneme_accuracy)),
        stddev_word: sample_stddev(&sorted(|f| f.word_accuracy)),
    })
}

impl EvaluationResult {
    /// Table of `fold, phoneme_acc, word_acc`, then mean and stddev rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\tphoneme_acc\tword_acc\n");
        for (i, f) in self.per_fold.iter().enumerate() {
            out.push_str(&format!("{i}\t{:.6}\t{:.6}\n", f.phoneme_accuracy, f.word_accuracy));
        }
        out.push_str(&format!("mean\t{:.6}\t{:.6}\n", self.mean_phoneme, self.mean_word));
        out.push_str(&format!("stddev\t{:.6}\t{:.6}\n", self.stddev_phoneme, self.stddev_word));
        out
    }
}
