//! Fixed-width windowed classification instances.

use std::io::Write;

use crate::align::AlignedEntry;
use crate::error::{Error, Result};
use crate::lexicon::PhonemeInventory;

pub const PAD_SYMBOL: &str = "=";
/// Class emitted by the translation task when both variants agree.
pub const NO_CHANGE: &str = "0";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: Vec<String>,
    pub label: String,
    pub word_id: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSchema {
    pub left_context: usize,
    pub right_context: usize,
    /// False for schemas made only of extra (prediction) columns.
    pub include_window: bool,
    pub extra_feature_names: Vec<String>,
    pub pad_symbol: String,
}

impl Default for InstanceSchema {
    fn default() -> Self {
        InstanceSchema {
            left_context: 3,
            right_context: 3,
            include_window: true,
            extra_feature_names: Vec::new(),
            pad_symbol: PAD_SYMBOL.to_string(),
        }
    }
}

impl InstanceSchema {
    pub fn window_width(&self) -> usize {
        if self.include_window {
            self.left_context + 1 + self.right_context
        } else {
            0
        }
    }

    pub fn width(&self) -> usize {
        self.window_width() + self.extra_feature_names.len()
    }

    /// Schema whose features are only the named extra columns.
    pub fn extras_only(names: Vec<String>) -> Self {
        InstanceSchema {
            include_window: false,
            extra_feature_names: names,
            ..Default::default()
        }
    }

    /// Column names: `f-3 .. f .. f+3`, then the extra features.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        if self.include_window {
            for off in -(self.left_context as isize)..=(self.right_context as isize) {
                names.push(match off {
                    0 => "f".to_string(),
                    o if o < 0 => format!("f{o}"),
                    o => format!("f+{o}"),
                });
            }
        }
        names.extend(self.extra_feature_names.iter().cloned());
        names
    }

    pub fn validate(&self, inventory: &PhonemeInventory) -> Result<()> {
        if inventory.contains(&self.pad_symbol) {
            return Err(Error::Argument(format!(
                "pad symbol '{}' collides with an inventory symbol",
                self.pad_symbol
            )));
        }
        Ok(())
    }
}

/// Sliding window over `tokens`, one feature vector per position.
pub fn window_features(tokens: &[String], schema: &InstanceSchema) -> Vec<Vec<String>> {
    if !schema.include_window {
        return vec![Vec::new(); tokens.len()];
    }
    let n = tokens.len() as isize;
    let (l, r) = (schema.left_context as isize, schema.right_context as isize);
    (0..n)
        .map(|i| {
            (i - l..=i + r)
                .map(|j| {
                    if j < 0 || j >= n {
                        schema.pad_symbol.clone()
                    } else {
                        tokens[j as usize].clone()
                    }
                })
                .collect()
        })
        .collect()
}

/// Grapheme-window instances labelled with the aligned phonemes.
pub fn window_instances(entry: &AlignedEntry, word_id: usize, schema: &InstanceSchema) -> Vec<Instance> {
    window_features(&entry.graphemes, schema)
        .into_iter()
        .zip(&entry.phonemes)
        .enumerate()
        .map(|(position, (features, label))| Instance {
            features,
            label: label.clone(),
            word_id,
            position,
        })
        .collect()
}

/// One named column of predicted symbols, keyed like the instances it extends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionStream {
    pub name: String,
    /// `(word_id, position, symbol)` in the order of the base instances.
    pub values: Vec<(usize, usize, String)>,
}

/// Appends prediction columns to instances, in stream order.
pub fn augment_instances(
    base: &[Instance],
    schema: &InstanceSchema,
    predictions: &[PredictionStream],
) -> Result<(Vec<Instance>, InstanceSchema)> {
    for stream in predictions {
        if stream.values.len() != base.len() {
            return Err(Error::Pairing(format!(
                "prediction stream '{}' has {} values for {} instances",
                stream.name,
                stream.values.len(),
                base.len()
            )));
        }
        for (inst, (w, p, _)) in base.iter().zip(&stream.values) {
            if inst.word_id != *w || inst.position != *p {
                return Err(Error::Pairing(format!(
                    "prediction stream '{}' is keyed ({w}, {p}) where the instance is ({}, {})",
                    stream.name, inst.word_id, inst.position
                )));
            }
        }
    }
    let mut out_schema = schema.clone();
    out_schema
        .extra_feature_names
        .extend(predictions.iter().map(|s| s.name.clone()));
    let out = base
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut features = inst.features.clone();
            features.extend(predictions.iter().map(|s| s.values[i].2.clone()));
            Instance {
                features,
                ..inst.clone()
            }
        })
        .collect();
    Ok((out, out_schema))
}

/// Per position: `"0"` when both variants agree, otherwise the variant-B phoneme.
pub fn labels_to_transformation_classes(a: &AlignedEntry, b: &AlignedEntry) -> Result<Vec<String>> {
    if a.word != b.word {
        return Err(Error::Pairing(format!("'{}' paired with '{}'", a.word, b.word)));
    }
    if a.phonemes.len() != b.phonemes.len() {
        return Err(Error::Pairing(format!(
            "'{}' has lengths {} and {}",
            a.word,
            a.phonemes.len(),
            b.phonemes.len()
        )));
    }
    Ok(a
        .phonemes
        .iter()
        .zip(&b.phonemes)
        .map(|(x, y)| if x == y { NO_CHANGE.to_string() } else { y.clone() })
        .collect())
}

/// Phoneme-window instances for the variant-to-variant translation task.
pub fn translation_instances(
    a: &AlignedEntry,
    b: &AlignedEntry,
    word_id: usize,
    schema: &InstanceSchema,
) -> Result<Vec<Instance>> {
    let labels = labels_to_transformation_classes(a, b)?;
    Ok(window_features(&a.phonemes, schema)
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(position, (features, label))| Instance {
            features,
            label,
            word_id,
            position,
        })
        .collect())
}

fn escape_c45(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        if matches!(c, ',' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Writes instances as C4.5-style data lines: `f1,...,fk,label`.
pub fn write_c45<W: Write>(mut out: W, instances: &[Instance]) -> std::io::Result<()> {
    for inst in instances {
        let mut line = inst
            .features
            .iter()
            .map(|f| escape_c45(f))
            .collect::<Vec<_>>()
            .join(",");
        line.push(',');
        line.push_str(&escape_c45(&inst.label));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> Vec<String> {
        text.split_whitespace().map(String::from).collect()
    }

    fn aligned(word: &str, phonemes: &str) -> AlignedEntry {
        AlignedEntry {
            word: word.to_string(),
            graphemes: word.chars().map(String::from).collect(),
            phonemes: s(phonemes),
            source: s(phonemes),
            transcription_index: 0,
        }
    }

    #[test]
    fn eet_instances() {
        let inst = window_instances(&aligned("eet", "e - t"), 0, &InstanceSchema::default());
        assert_eq!(inst.len(), 3);
        assert_eq!(inst[0].features, s("= = = e e t ="));
        assert_eq!(inst[0].label, "e");
        assert_eq!(inst[1].features, s("= = e e t = ="));
        assert_eq!(inst[1].label, "-");
        assert_eq!(inst[2].features, s("= e e t = = ="));
        assert_eq!(inst[2].label, "t");
    }

    #[test]
    fn single_letter_word() {
        let inst = window_instances(&aligned("a", "a"), 4, &InstanceSchema::default());
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].features, s("= = = a = = ="));
        assert_eq!((inst[0].word_id, inst[0].position), (4, 0));
    }

    #[test]
    fn augment_widths() {
        let schema = InstanceSchema::default();
        let base = window_instances(&aligned("eet", "e - t"), 0, &schema);
        let stream = |name: &str| PredictionStream {
            name: name.to_string(),
            values: base.iter().map(|i| (i.word_id, i.position, "x".to_string())).collect(),
        };
        let (two, s2) = augment_instances(&base, &schema, &[stream("pred_a"), stream("pred_b")]).unwrap();
        assert!(two.iter().all(|i| i.features.len() == 9));
        assert_eq!(s2.width(), 9);
        assert_eq!(s2.feature_names()[7..], ["pred_a".to_string(), "pred_b".to_string()]);

        let (same, s0) = augment_instances(&base, &schema, &[]).unwrap();
        assert_eq!(same, base);
        assert_eq!(s0, schema);

        let four: Vec<_> = ["m1", "m2", "m3", "m4"].iter().map(|n| stream(n)).collect();
        let (eleven, s11) = augment_instances(&base, &schema, &four).unwrap();
        assert!(eleven.iter().all(|i| i.features.len() == 11));
        assert_eq!(s11.width(), 11);

        let only = InstanceSchema::extras_only(vec![]);
        let bare: Vec<Instance> = base
            .iter()
            .map(|i| Instance { features: vec![], ..i.clone() })
            .collect();
        let (preds_only, s4) = augment_instances(&bare, &only, &four).unwrap();
        assert!(preds_only.iter().all(|i| i.features.len() == 4));
        assert_eq!(s4.width(), 4);
        assert_eq!(s4.feature_names(), s("m1 m2 m3 m4"));
    }

    #[test]
    fn augment_rejects_misaligned_streams() {
        let schema = InstanceSchema::default();
        let base = window_instances(&aligned("eet", "e - t"), 0, &schema);
        let short = PredictionStream {
            name: "p".into(),
            values: vec![(0, 0, "x".into())],
        };
        assert!(augment_instances(&base, &schema, &[short]).is_err());
        let shifted = PredictionStream {
            name: "p".into(),
            values: base.iter().map(|i| (i.word_id + 1, i.position, "x".into())).collect(),
        };
        assert!(augment_instances(&base, &schema, &[shifted]).is_err());
    }

    #[test]
    fn transformation_classes() {
        let a = aligned("gat", "x A t");
        assert_eq!(labels_to_transformation_classes(&a, &a).unwrap(), s("0 0 0"));
        let b = aligned("gat", "G A t");
        assert_eq!(labels_to_transformation_classes(&a, &b).unwrap(), s("G 0 0"));
        let c = aligned("gat", "k E d");
        assert_eq!(labels_to_transformation_classes(&a, &c).unwrap(), s("k E d"));
        assert!(labels_to_transformation_classes(&a, &aligned("gaat", "x a: - t")).is_err());
        assert!(labels_to_transformation_classes(&a, &aligned("kat", "x A t")).is_err());
    }

    #[test]
    fn c45_lines() {
        let inst = window_instances(&aligned("eet", "e - t"), 0, &InstanceSchema::default());
        let mut buf = Vec::new();
        write_c45(&mut buf, &inst).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "=,=,=,e,e,t,=,e");
    }

    proptest! {
        #[test]
        fn windows_cover_word(word in "[a-e]{1,12}") {
            let phon: Vec<String> = word.chars().map(|c| c.to_ascii_uppercase().to_string()).collect();
            let entry = aligned(&word, &phon.join(" "));
            let inst = window_instances(&entry, 0, &InstanceSchema::default());
            prop_assert_eq!(inst.len(), word.chars().count());
            let labels: Vec<String> = inst.iter().map(|i| i.label.clone()).collect();
            prop_assert_eq!(labels, phon);
            for (k, i) in inst.iter().enumerate() {
                prop_assert_eq!(i.position, k);
                prop_assert_eq!(&i.features[3], &entry.graphemes[k]);
            }
        }
    }
}
