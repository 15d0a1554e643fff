//! Information-theoretic feature relevance.

use std::collections::HashMap;

use super::codec::{ClassTable, FeatureCodec};
use crate::instances::Instance;

/// How feature relevance is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    InfoGain,
    #[default]
    GainRatio,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::InfoGain => "ig",
            Weighting::GainRatio => "gainratio",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ig" => Some(Weighting::InfoGain),
            "gainratio" | "gr" => Some(Weighting::GainRatio),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWeights {
    pub values: Vec<f64>,
}

impl FeatureWeights {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Feature indices by descending weight, lower index first on ties.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }
}

pub(crate) fn entropy_of_counts<I: IntoIterator<Item = f64>>(counts: I, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in counts {
        if c > 0.0 {
            let p = c / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Information gain and split information of one column given as
/// `(value, class, weight)` triples.
pub(crate) fn gain_and_split<I>(rows: I, n_classes: usize) -> (f64, f64)
where
    I: IntoIterator<Item = (u32, u32, f64)>,
{
    let mut class_totals = vec![0.0; n_classes];
    let mut by_value: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut total = 0.0;
    for (v, c, w) in rows {
        class_totals[c as usize] += w;
        by_value.entry(v).or_insert_with(|| vec![0.0; n_classes])[c as usize] += w;
        total += w;
    }
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let h_class = entropy_of_counts(class_totals.iter().copied(), total);
    // sorted for a summation order independent of hashing
    let mut values: Vec<(&u32, &Vec<f64>)> = by_value.iter().collect();
    values.sort_by_key(|(v, _)| **v);
    let mut cond = 0.0;
    let mut split = 0.0;
    for (_, counts) in values {
        let n_v: f64 = counts.iter().sum();
        let p_v = n_v / total;
        cond += p_v * entropy_of_counts(counts.iter().copied(), n_v);
        split -= p_v * p_v.log2();
    }
    ((h_class - cond).max(0.0), split.max(0.0))
}

pub(crate) fn relevance(ig: f64, si: f64, weighting: Weighting) -> f64 {
    match weighting {
        Weighting::InfoGain => ig,
        Weighting::GainRatio => {
            if si <= 1e-12 {
                0.0
            } else {
                (ig / si).clamp(0.0, 1.0)
            }
        }
    }
}

/// Gain ratio of one feature over a set of instances; 0 for constant features.
pub fn gain_ratio(instances: &[Instance], feature: usize) -> f64 {
    feature_relevance(instances, feature, Weighting::GainRatio)
}

pub fn info_gain(instances: &[Instance], feature: usize) -> f64 {
    feature_relevance(instances, feature, Weighting::InfoGain)
}

fn feature_relevance(instances: &[Instance], feature: usize, weighting: Weighting) -> f64 {
    if instances.is_empty() {
        return 0.0;
    }
    let classes = ClassTable::from_labels(instances.iter().map(|i| i.label.as_str()));
    let codec = FeatureCodec::from_rows(instances.iter().map(|i| i.features.as_slice()));
    let rows = instances.iter().map(|i| {
        (
            codec.encode_value(feature, &i.features[feature]),
            classes.id(&i.label).expect("label is in the table"),
            1.0,
        )
    });
    let (ig, si) = gain_and_split(rows, classes.len());
    relevance(ig, si, weighting)
}

/// Relevance of every column of an encoded data set.
pub(crate) fn compute_weights(
    rows: &[Vec<u32>],
    labels: &[u32],
    counts: &[f64],
    n_classes: usize,
    width: usize,
    weighting: Weighting,
) -> FeatureWeights {
    let values = (0..width)
        .map(|f| {
            let (ig, si) = gain_and_split(
                rows.iter()
                    .zip(labels)
                    .zip(counts)
                    .map(|((r, &c), &w)| (r[f], c, w)),
                n_classes,
            );
            relevance(ig, si, weighting)
        })
        .collect();
    FeatureWeights { values }
}
