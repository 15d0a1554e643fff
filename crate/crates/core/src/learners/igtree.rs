//! IGTree: instance memory compressed into a tree whose levels follow a
//! single global feature-relevance order, with a default class per node.

use std::collections::BTreeMap;

use super::codec::{ClassTable, FeatureCodec};
use super::format::{self, Records};
use super::weights::{compute_weights, FeatureWeights, Weighting};
use super::{read_classes, read_codec, write_classes, write_codec};
use crate::error::{Error, Result};
use crate::instances::{Instance, InstanceSchema};

#[derive(Debug, Clone, PartialEq)]
struct Node {
    default: u32,
    /// `(value id, child index)` sorted by value; empty for leaves.
    children: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub struct IgTreeModel {
    weighting: Weighting,
    weights: FeatureWeights,
    feature_order: Vec<usize>,
    codec: FeatureCodec,
    classes: ClassTable,
    nodes: Vec<Node>,
}

pub fn train_igtree(instances: &[Instance], schema: &InstanceSchema, weighting: Weighting) -> Result<IgTreeModel> {
    if instances.is_empty() {
        return Err(Error::Training("IGTree needs at least one training instance".into()));
    }
    super::check_width(instances, schema)?;
    let width = schema.width();
    let classes = ClassTable::from_labels(instances.iter().map(|i| i.label.as_str()));
    let codec = FeatureCodec::from_rows(instances.iter().map(|i| i.features.as_slice()));
    let mut grouped: BTreeMap<Vec<u32>, BTreeMap<u32, u64>> = BTreeMap::new();
    for inst in instances {
        let c = classes.id(&inst.label).expect("label is in the table");
        *grouped
            .entry(codec.encode(&inst.features))
            .or_default()
            .entry(c)
            .or_insert(0) += 1;
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    for (f, cs) in &grouped {
        for (&c, &n) in cs {
            rows.push(f.clone());
            labels.push(c);
            counts.push(n as f64);
        }
    }
    let weights = compute_weights(&rows, &labels, &counts, classes.len(), width, weighting);
    let feature_order = weights.order();
    let mut model = IgTreeModel {
        weighting,
        weights,
        feature_order,
        codec,
        classes,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..rows.len()).collect();
    let data = Data {
        rows: &rows,
        labels: &labels,
        counts: &counts,
    };
    model.grow(&data, all, 0);
    Ok(model)
}

struct Data<'a> {
    rows: &'a [Vec<u32>],
    labels: &'a [u32],
    counts: &'a [f64],
}

impl IgTreeModel {
    fn grow(&mut self, data: &Data<'_>, members: Vec<usize>, depth: usize) -> u32 {
        let mut totals = vec![0.0; self.classes.len()];
        for &r in &members {
            totals[data.labels[r] as usize] += data.counts[r];
        }
        let default = self
            .classes
            .pick(totals.iter().enumerate().filter(|(_, &t)| t > 0.0).map(|(c, &t)| (c as u32, t)))
            .unwrap_or_else(|| self.classes.majority());
        let pure = totals.iter().filter(|&&t| t > 0.0).count() <= 1;
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            default,
            children: Vec::new(),
        });
        if pure || depth == self.feature_order.len() {
            return id;
        }
        let f = self.feature_order[depth];
        let mut split: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for r in members {
            split.entry(data.rows[r][f]).or_default().push(r);
        }
        let mut children = Vec::with_capacity(split.len());
        for (v, sub) in split {
            let child = self.grow(data, sub, depth + 1);
            children.push((v, child));
        }
        self.nodes[id as usize].children = children;
        id
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &FeatureWeights {
        &self.weights
    }

    pub fn feature_order(&self) -> &[usize] {
        &self.feature_order
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Feature tested at the root, or `None` when the root is a leaf.
    pub fn root_feature(&self) -> Option<usize> {
        if self.nodes[0].children.is_empty() {
            None
        } else {
            Some(self.feature_order[0])
        }
    }

    /// Longest root-to-leaf path, counted in arcs.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], n: usize) -> usize {
            nodes[n]
                .children
                .iter()
                .map(|&(_, c)| 1 + walk(nodes, c as usize))
                .max()
                .unwrap_or(0)
        }
        walk(&self.nodes, 0)
    }

    pub fn classify(&self, features: &[String]) -> &str {
        let mut node = 0usize;
        for &f in &self.feature_order {
            let n = &self.nodes[node];
            if n.children.is_empty() {
                break;
            }
            let v = self.codec.encode_value(f, &features[f]);
            match n.children.binary_search_by_key(&v, |c| c.0) {
                Ok(p) => node = n.children[p].1 as usize,
                Err(_) => break,
            }
        }
        self.classes.symbol(self.nodes[node].default)
    }

    pub(crate) fn write(&self, out: &mut String) {
        out.push_str(&format::header("igtree"));
        format::record(out, "weighting", &[self.weighting.name()]);
        let w: Vec<String> = self.weights.values.iter().map(|v| v.to_string()).collect();
        let w: Vec<&str> = w.iter().map(String::as_str).collect();
        format::record(out, "weights", &w);
        write_classes(out, &self.classes);
        write_codec(out, &self.codec);
        format::record(out, "nodes", &[&self.nodes.len().to_string()]);
        for n in &self.nodes {
            let mut fields = vec![self.classes.symbol(n.default).to_string()];
            for &(v, c) in &n.children {
                fields.push(v.to_string());
                fields.push(c.to_string());
            }
            let fields: Vec<&str> = fields.iter().map(String::as_str).collect();
            format::record(out, "node", &fields);
        }
    }

    pub(crate) fn read(rec: &mut Records<'_>) -> Result<Self> {
        let weighting = Weighting::parse(rec.expect_one("weighting")?)
            .ok_or_else(|| Error::ModelFormat("unknown weighting".into()))?;
        let weights = FeatureWeights {
            values: rec
                .expect("weights")?
                .iter()
                .map(|s| rec.number(s))
                .collect::<Result<_>>()?,
        };
        let classes = read_classes(rec)?;
        let codec = read_codec(rec)?;
        if codec.width() != weights.len() {
            return Err(Error::ModelFormat("weights do not match width".into()));
        }
        let n: usize = rec.expect_number("nodes")?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let fields = rec.expect("node")?;
            if fields.is_empty() || fields.len() % 2 != 1 {
                return Err(Error::ModelFormat("malformed node".into()));
            }
            let default = classes
                .id(fields[0])
                .ok_or_else(|| Error::ModelFormat(format!("unknown class '{}'", fields[0])))?;
            let mut children = Vec::new();
            for pair in fields[1..].chunks(2) {
                let child: u32 = rec.number(pair[1])?;
                if child as usize >= n {
                    return Err(Error::ModelFormat("child index out of range".into()));
                }
                children.push((rec.number(pair[0])?, child));
            }
            nodes.push(Node { default, children });
        }
        rec.finish()?;
        if nodes.is_empty() {
            return Err(Error::ModelFormat("empty tree".into()));
        }
        let feature_order = weights.order();
        Ok(IgTreeModel {
            weighting,
            weights,
            feature_order,
            codec,
            classes,
            nodes,
        })
    }
}
