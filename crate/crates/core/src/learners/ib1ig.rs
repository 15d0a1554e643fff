//! Memory-based classification with gain-ratio weighted overlap (IB1-IG).
//!
//! Training stores deduplicated instances with per-class counts. The
//! distance between a query and a stored item is the sum of the weights of
//! the features on which they differ, always summed in feature-index order so
//! that equal distances compare equal. Classification gathers every stored
//! item at the `k` smallest distinct distances and returns the class with the
//! largest summed count.
//!
//! Lookup walks a trie over the stored items whose levels follow descending
//! feature weight, pruning branches whose partial distance already exceeds
//! the current k-th best; the answer is identical to a linear scan.

use std::collections::BTreeMap;

use super::codec::{ClassTable, FeatureCodec};
use super::format::{self, Records};
use super::weights::{compute_weights, FeatureWeights, Weighting};
use crate::error::{Error, Result};
use crate::instances::{Instance, InstanceSchema};

const NO_ITEM: u32 = u32::MAX;
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Stored {
    features: Vec<u32>,
    counts: Vec<(u32, u64)>,
}

#[derive(Debug, Clone)]
struct TrieNode {
    children: Vec<(u32, u32)>,
    item: u32,
}

#[derive(Debug, Clone)]
pub struct Ib1IgModel {
    k: usize,
    weighting: Weighting,
    weights: FeatureWeights,
    codec: FeatureCodec,
    classes: ClassTable,
    memory: Vec<Stored>,
    order: Vec<usize>,
    nodes: Vec<TrieNode>,
}

pub fn train_ib1ig(
    instances: &[Instance],
    schema: &InstanceSchema,
    k: usize,
    weighting: Weighting,
) -> Result<Ib1IgModel> {
    if instances.is_empty() {
        return Err(Error::Training("IB1-IG needs at least one training instance".into()));
    }
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    super::check_width(instances, schema)?;
    let classes = ClassTable::from_labels(instances.iter().map(|i| i.label.as_str()));
    let codec = FeatureCodec::from_rows(instances.iter().map(|i| i.features.as_slice()));
    let mut grouped: BTreeMap<Vec<u32>, BTreeMap<u32, u64>> = BTreeMap::new();
    for inst in instances {
        let class = classes.id(&inst.label).expect("label is in the table");
        *grouped
            .entry(codec.encode(&inst.features))
            .or_default()
            .entry(class)
            .or_insert(0) += 1;
    }
    let memory: Vec<Stored> = grouped
        .into_iter()
        .map(|(features, counts)| Stored {
            features,
            counts: counts.into_iter().collect(),
        })
        .collect();
    let weights = weights_of(&memory, classes.len(), schema.width(), weighting);
    Ok(Ib1IgModel::assemble(k, weighting, weights, codec, classes, memory))
}

fn weights_of(memory: &[Stored], n_classes: usize, width: usize, weighting: Weighting) -> FeatureWeights {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    for s in memory {
        for &(c, n) in &s.counts {
            rows.push(s.features.clone());
            labels.push(c);
            counts.push(n as f64);
        }
    }
    compute_weights(&rows, &labels, &counts, n_classes, width, weighting)
}

impl Ib1IgModel {
    fn assemble(
        k: usize,
        weighting: Weighting,
        weights: FeatureWeights,
        codec: FeatureCodec,
        classes: ClassTable,
        memory: Vec<Stored>,
    ) -> Self {
        let order = weights.order();
        let mut nodes = vec![TrieNode {
            children: Vec::new(),
            item: NO_ITEM,
        }];
        for (idx, stored) in memory.iter().enumerate() {
            let mut node = 0usize;
            for &f in &order {
                let v = stored.features[f];
                let pos = nodes[node].children.binary_search_by_key(&v, |c| c.0);
                node = match pos {
                    Ok(p) => nodes[node].children[p].1 as usize,
                    Err(p) => {
                        let child = nodes.len() as u32;
                        nodes.push(TrieNode {
                            children: Vec::new(),
                            item: NO_ITEM,
                        });
                        nodes[node].children.insert(p, (v, child));
                        child as usize
                    }
                };
            }
            nodes[node].item = idx as u32;
        }
        Ib1IgModel {
            k,
            weighting,
            weights,
            codec,
            classes,
            memory,
            order,
            nodes,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &FeatureWeights {
        &self.weights
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    /// Number of distinct stored feature vectors.
    pub fn memory_size(&self) -> usize {
        self.memory.len()
    }

    /// Class counts stored for an exact feature vector, if present.
    pub fn stored_counts(&self, features: &[String]) -> Option<Vec<(String, u64)>> {
        let q = self.codec.encode(features);
        self.memory
            .binary_search_by(|s| s.features.as_slice().cmp(q.as_slice()))
            .ok()
            .map(|i| {
                self.memory[i]
                    .counts
                    .iter()
                    .map(|&(c, n)| (self.classes.symbol(c).to_string(), n))
                    .collect()
            })
    }

    pub fn classify(&self, features: &[String]) -> &str {
        let q = self.codec.encode(features);
        let mut search = Search {
            model: self,
            query: &q,
            best: Vec::with_capacity(self.k + 1),
        };
        search.visit(0, 0, 0.0);
        let mut totals: BTreeMap<u32, u64> = BTreeMap::new();
        for (_, counts) in &search.best {
            for &(c, n) in counts {
                *totals.entry(c).or_insert(0) += n;
            }
        }
        let class = self
            .classes
            .pick(totals.into_iter().map(|(c, n)| (c, n as f64)))
            .unwrap_or_else(|| self.classes.majority());
        self.classes.symbol(class)
    }

    fn distance(&self, stored: &[u32], query: &[u32]) -> f64 {
        let mut d = 0.0;
        for (i, (s, q)) in stored.iter().zip(query).enumerate() {
            if s != q {
                d += self.weights.values[i];
            }
        }
        d
    }

    pub(crate) fn write(&self, out: &mut String) {
        out.push_str(&format::header("ib1ig"));
        format::record(out, "width", &[&self.width().to_string()]);
        format::record(out, "k", &[&self.k.to_string()]);
        format::record(out, "weighting", &[self.weighting.name()]);
        let w: Vec<String> = self.weights.values.iter().map(|v| v.to_string()).collect();
        let w: Vec<&str> = w.iter().map(String::as_str).collect();
        format::record(out, "weights", &w);
        format::record(out, "items", &[&self.memory.len().to_string()]);
        for s in &self.memory {
            let mut fields: Vec<String> = s
                .features
                .iter()
                .enumerate()
                .map(|(i, &v)| self.codec.symbol(i, v).to_string())
                .collect();
            for &(c, n) in &s.counts {
                fields.push(format!("{}={n}", self.classes.symbol(c)));
            }
            let fields: Vec<&str> = fields.iter().map(String::as_str).collect();
            format::record(out, "item", &fields);
        }
    }

    pub(crate) fn read(rec: &mut Records<'_>) -> Result<Self> {
        let width: usize = rec.expect_number("width")?;
        let k: usize = rec.expect_number("k")?;
        let weighting = Weighting::parse(rec.expect_one("weighting")?)
            .ok_or_else(|| Error::ModelFormat("unknown weighting".into()))?;
        let w = rec.expect("weights")?;
        if w.len() != width {
            return Err(Error::ModelFormat("weights do not match width".into()));
        }
        let weights = FeatureWeights {
            values: w.iter().map(|s| rec.number(s)).collect::<Result<_>>()?,
        };
        let n: usize = rec.expect_number("items")?;
        let mut raw: Vec<(Vec<String>, Vec<(String, u64)>)> = Vec::with_capacity(n);
        for _ in 0..n {
            let fields = rec.expect("item")?;
            if fields.len() <= width {
                return Err(Error::ModelFormat("item without class counts".into()));
            }
            let features = fields[..width].iter().map(|s| s.to_string()).collect();
            let mut counts = Vec::new();
            for f in &fields[width..] {
                let (c, n) = f
                    .rsplit_once('=')
                    .ok_or_else(|| Error::ModelFormat(format!("bad class count '{f}'")))?;
                counts.push((c.to_string(), rec.number(n)?));
            }
            raw.push((features, counts));
        }
        rec.finish()?;
        let mut freq: BTreeMap<String, u64> = BTreeMap::new();
        for (_, counts) in &raw {
            for (c, n) in counts {
                *freq.entry(c.clone()).or_insert(0) += n;
            }
        }
        if freq.is_empty() {
            return Err(Error::ModelFormat("empty memory".into()));
        }
        let classes = ClassTable::from_counts(freq);
        let codec = FeatureCodec::from_rows(raw.iter().map(|(f, _)| f.as_slice()));
        let mut memory: Vec<Stored> = raw
            .iter()
            .map(|(f, counts)| Stored {
                features: codec.encode(f),
                counts: counts
                    .iter()
                    .map(|(c, n)| (classes.id(c).expect("class collected above"), *n))
                    .collect(),
            })
            .collect();
        memory.sort_by(|a, b| a.features.cmp(&b.features));
        Ok(Ib1IgModel::assemble(k, weighting, weights, codec, classes, memory))
    }
}

struct Search<'m> {
    model: &'m Ib1IgModel,
    query: &'m [u32],
    /// (distance, class counts) for the k smallest distinct distances, ascending.
    best: Vec<(f64, Vec<(u32, u64)>)>,
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        if self.best.len() < self.model.k {
            f64::INFINITY
        } else {
            self.best[self.model.k - 1].0
        }
    }

    fn visit(&mut self, node: usize, depth: usize, acc: f64) {
        let bound = self.bound();
        if acc > bound + PRUNE_EPS * (1.0 + bound.abs()) {
            return;
        }
        let model = self.model;
        let n = &model.nodes[node];
        if depth == model.order.len() {
            let stored = &model.memory[n.item as usize];
            let d = model.distance(&stored.features, self.query);
            self.offer(d, &stored.counts);
            return;
        }
        let f = model.order[depth];
        let w = model.weights.values[f];
        let qv = self.query[f];
        let exact = n.children.binary_search_by_key(&qv, |c| c.0).ok();
        if let Some(p) = exact {
            self.visit(n.children[p].1 as usize, depth + 1, acc);
        }
        for (i, &(_, child)) in n.children.iter().enumerate() {
            if Some(i) != exact {
                self.visit(child as usize, depth + 1, acc + w);
            }
        }
    }

    fn offer(&mut self, d: f64, counts: &[(u32, u64)]) {
        if let Some(group) = self.best.iter_mut().find(|(bd, _)| *bd == d) {
            group.1.extend_from_slice(counts);
            return;
        }
        let k = self.model.k;
        if self.best.len() == k && d > self.best[k - 1].0 {
            return;
        }
        let pos = self.best.iter().position(|(bd, _)| *bd > d).unwrap_or(self.best.len());
        self.best.insert(pos, (d, counts.to_vec()));
        self.best.truncate(k);
    }
}
