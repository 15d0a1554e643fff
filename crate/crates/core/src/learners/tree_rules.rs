//! Gain-ratio decision tree converted into an ordered production-rule list.
//!
//! The tree picks the best feature per node (multiway split on every value
//! seen) and stops on purity, when a node holds fewer than two instances, or
//! when no split has positive gain. Each root-to-leaf path becomes a rule;
//! conditions are then dropped greedily while the rule's Laplace error on the
//! training set does not rise.

use std::collections::{BTreeMap, HashSet};

use super::codec::{ClassTable, FeatureCodec};
use super::format::{self, Records};
use super::weights::gain_and_split;
use crate::error::{Error, Result};
use crate::instances::{Instance, InstanceSchema};

const MIN_SPLIT: f64 = 2.0;
const GAIN_EPS: f64 = 1e-12;

/// A test "feature value is one of `values`".
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition {
    pub feature: usize,
    /// Sorted, non-empty.
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductionRule {
    pub conditions: Vec<Condition>,
    pub class: String,
    pub covered: u64,
    pub misclassified: u64,
    pub lift: f64,
    /// Position in creation order, used as the last sort key.
    pub order: usize,
}

impl ProductionRule {
    pub fn matches(&self, features: &[String]) -> bool {
        self.conditions
            .iter()
            .all(|c| c.values.iter().any(|v| *v == features[c.feature]))
    }

    /// Laplace-corrected accuracy on the training cases the rule covers.
    pub fn accuracy(&self) -> f64 {
        laplace_accuracy(self.covered as f64, self.misclassified as f64)
    }

    /// Display form: coverage header, one condition per line, then the class.
    pub fn render(&self, feature_names: &[String]) -> String {
        let mut out = format!("({}/{}, lift {:.1})\n", self.covered, self.misclassified, self.lift);
        for c in &self.conditions {
            let name = feature_names
                .get(c.feature)
                .cloned()
                .unwrap_or_else(|| format!("c{}", c.feature));
            if c.values.len() == 1 {
                out.push_str(&format!("{name} = {}\n", c.values[0]));
            } else {
                out.push_str(&format!("{name} in {{{}}}\n", c.values.join(", ")));
            }
        }
        out.push_str(&format!(" -> class {}  [{:.3}]\n", self.class, self.accuracy()));
        out
    }
}

fn laplace_accuracy(covered: f64, misclassified: f64) -> f64 {
    (covered - misclassified + 1.0) / (covered + 2.0)
}

fn laplace_error(covered: f64, misclassified: f64) -> f64 {
    (misclassified + 1.0) / (covered + 2.0)
}

/// Sort key of the rule list: lift, then coverage (both descending), then
/// creation order.
pub fn rule_order(a: &ProductionRule, b: &ProductionRule) -> std::cmp::Ordering {
    b.lift
        .partial_cmp(&a.lift)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(b.covered.cmp(&a.covered))
        .then(a.order.cmp(&b.order))
}

#[derive(Debug, Clone)]
pub struct RuleListModel {
    feature_names: Vec<String>,
    rules: Vec<ProductionRule>,
    default_class: String,
}

impl RuleListModel {
    pub fn rules(&self) -> &[ProductionRule] {
        &self.rules
    }

    pub fn default_class(&self) -> &str {
        &self.default_class
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn classify(&self, features: &[String]) -> &str {
        self.rules
            .iter()
            .find(|r| r.matches(features))
            .map(|r| r.class.as_str())
            .unwrap_or(&self.default_class)
    }

    /// All rules rendered and numbered, followed by the default class.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.rules.iter().enumerate() {
            out.push_str(&format!("Rule {}:\n", i + 1));
            out.push_str(&r.render(&self.feature_names));
            out.push('\n');
        }
        out.push_str(&format!("Default class: {}\n", self.default_class));
        out
    }

    pub(crate) fn write(&self, out: &mut String) {
        out.push_str(&format::header("tree-rules"));
        let names: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        format::record(out, "width", &[&names.len().to_string()]);
        format::record(out, "names", &names);
        format::record(out, "default", &[&self.default_class]);
        format::record(out, "rules", &[&self.rules.len().to_string()]);
        for r in &self.rules {
            format::record(
                out,
                "rule",
                &[
                    &r.class,
                    &r.covered.to_string(),
                    &r.misclassified.to_string(),
                    &r.lift.to_string(),
                    &r.order.to_string(),
                    &r.conditions.len().to_string(),
                ],
            );
            for c in &r.conditions {
                let mut fields = vec![c.feature.to_string()];
                fields.extend(c.values.iter().cloned());
                let fields: Vec<&str> = fields.iter().map(String::as_str).collect();
                format::record(out, "cond", &fields);
            }
        }
    }

    pub(crate) fn read(rec: &mut Records<'_>) -> Result<Self> {
        let width: usize = rec.expect_number("width")?;
        let feature_names: Vec<String> = rec.expect("names")?.into_iter().map(str::to_string).collect();
        if feature_names.len() != width {
            return Err(Error::ModelFormat("feature names do not match width".into()));
        }
        let default_class = rec.expect_one("default")?.to_string();
        let n: usize = rec.expect_number("rules")?;
        let mut rules = Vec::with_capacity(n);
        for _ in 0..n {
            let f = rec.expect("rule")?;
            if f.len() != 6 {
                return Err(Error::ModelFormat("rule record needs 6 fields".into()));
            }
            let n_cond: usize = rec.number(f[5])?;
            let mut rule = ProductionRule {
                conditions: Vec::with_capacity(n_cond),
                class: f[0].to_string(),
                covered: rec.number(f[1])?,
                misclassified: rec.number(f[2])?,
                lift: rec.number(f[3])?,
                order: rec.number(f[4])?,
            };
            for _ in 0..n_cond {
                let c = rec.expect("cond")?;
                if c.len() < 2 {
                    return Err(Error::ModelFormat("condition without values".into()));
                }
                let feature: usize = rec.number(c[0])?;
                if feature >= width {
                    return Err(Error::ModelFormat("condition feature out of range".into()));
                }
                rule.conditions.push(Condition {
                    feature,
                    values: c[1..].iter().map(|s| s.to_string()).collect(),
                });
            }
            rules.push(rule);
        }
        rec.finish()?;
        Ok(RuleListModel {
            feature_names,
            rules,
            default_class,
        })
    }
}

#[derive(Debug, Clone)]
struct TreeNode {
    class: u32,
    split: Option<(usize, Vec<(u32, u32)>)>,
}

/// The tree before rule conversion.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    codec: FeatureCodec,
    classes: ClassTable,
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn classify(&self, features: &[String]) -> &str {
        let mut node = 0usize;
        while let Some((f, children)) = &self.nodes[node].split {
            let v = self.codec.encode_value(*f, &features[*f]);
            match children.binary_search_by_key(&v, |c| c.0) {
                Ok(p) => node = children[p].1 as usize,
                Err(_) => break,
            }
        }
        self.classes.symbol(self.nodes[node].class)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }
}

/// Distinct training vectors with their class counts.
struct Table {
    rows: Vec<Vec<u32>>,
    counts: Vec<Vec<(u32, f64)>>,
    n_classes: usize,
}

impl Table {
    fn class_totals(&self, members: &[usize]) -> Vec<f64> {
        let mut t = vec![0.0; self.n_classes];
        for &r in members {
            for &(c, n) in &self.counts[r] {
                t[c as usize] += n;
            }
        }
        t
    }
}

pub fn train_tree_rules(instances: &[Instance], schema: &InstanceSchema) -> Result<RuleListModel> {
    train_tree_rules_with_tree(instances, schema).map(|(m, _)| m)
}

/// Trains the rule list and also returns the tree it was extracted from.
pub fn train_tree_rules_with_tree(
    instances: &[Instance],
    schema: &InstanceSchema,
) -> Result<(RuleListModel, DecisionTree)> {
    if instances.is_empty() {
        return Err(Error::Training("tree rules need at least one training instance".into()));
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
    let mut table = Table {
        rows: Vec::with_capacity(grouped.len()),
        counts: Vec::with_capacity(grouped.len()),
        n_classes: classes.len(),
    };
    for (f, cs) in grouped {
        table.rows.push(f);
        table.counts.push(cs.into_iter().map(|(c, n)| (c, n as f64)).collect());
    }

    let mut tree = DecisionTree {
        codec,
        classes,
        nodes: Vec::new(),
    };
    let mut paths = Vec::new();
    let all: Vec<usize> = (0..table.rows.len()).collect();
    let mut used = vec![false; width];
    grow(&table, &mut tree, all, &mut used, &mut Vec::new(), &mut paths);

    let postings = Postings::build(&table, &tree.codec, width);
    let mut seen: HashSet<(Vec<Condition>, String)> = HashSet::new();
    let mut rules = Vec::new();
    for (path, class) in paths {
        if path.is_empty() {
            continue;
        }
        let conds = prune(&table, &postings, path, class);
        let (covered, correct) = postings.stats(&table, &conds, class);
        let misclassified = covered - correct;
        if covered <= misclassified {
            continue;
        }
        let mut conditions: Vec<Condition> = conds
            .iter()
            .map(|&(f, v)| Condition {
                feature: f,
                values: vec![tree.codec.symbol(f, v).to_string()],
            })
            .collect();
        conditions.sort();
        let class_sym = tree.classes.symbol(class).to_string();
        if !seen.insert((conditions.clone(), class_sym.clone())) {
            continue;
        }
        let lift = laplace_accuracy(covered, misclassified) / tree.classes.prior(class);
        rules.push(ProductionRule {
            conditions,
            class: class_sym,
            covered: covered.round() as u64,
            misclassified: misclassified.round() as u64,
            lift,
            order: rules.len(),
        });
    }
    rules.sort_by(rule_order);
    let model = RuleListModel {
        feature_names: schema.feature_names(),
        rules,
        default_class: tree.classes.symbol(tree.classes.majority()).to_string(),
    };
    Ok((model, tree))
}

fn grow(
    table: &Table,
    tree: &mut DecisionTree,
    members: Vec<usize>,
    used: &mut Vec<bool>,
    path: &mut Vec<(usize, u32)>,
    paths: &mut Vec<(Vec<(usize, u32)>, u32)>,
) -> u32 {
    let totals = table.class_totals(&members);
    let total: f64 = totals.iter().sum();
    let class = tree
        .classes
        .pick(totals.iter().enumerate().filter(|(_, &t)| t > 0.0).map(|(c, &t)| (c as u32, t)))
        .unwrap_or_else(|| tree.classes.majority());
    let id = tree.nodes.len() as u32;
    tree.nodes.push(TreeNode { class, split: None });
    let pure = totals.iter().filter(|&&t| t > 0.0).count() <= 1;
    let best = if pure || total < MIN_SPLIT {
        None
    } else {
        best_split(table, &members, used)
    };
    let Some(f) = best else {
        paths.push((path.clone(), class));
        return id;
    };
    let mut split: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for r in members {
        split.entry(table.rows[r][f]).or_default().push(r);
    }
    used[f] = true;
    let mut children = Vec::with_capacity(split.len());
    for (v, sub) in split {
        path.push((f, v));
        let child = grow(table, tree, sub, used, path, paths);
        path.pop();
        children.push((v, child));
    }
    used[f] = false;
    tree.nodes[id as usize].split = Some((f, children));
    id
}

fn best_split(table: &Table, members: &[usize], used: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for f in 0..used.len() {
        if used[f] {
            continue;
        }
        let (ig, si) = gain_and_split(
            members
                .iter()
                .flat_map(|&r| table.counts[r].iter().map(move |&(c, n)| (table.rows[r][f], c, n))),
            table.n_classes,
        );
        if ig <= GAIN_EPS || si <= GAIN_EPS {
            continue;
        }
        let ratio = ig / si;
        if best.map_or(true, |(_, b)| ratio > b) {
            best = Some((f, ratio));
        }
    }
    best.map(|(f, _)| f)
}

/// Row lists per (feature, value).
struct Postings {
    lists: Vec<Vec<Vec<u32>>>,
}

impl Postings {
    fn build(table: &Table, codec: &FeatureCodec, width: usize) -> Self {
        let mut lists: Vec<Vec<Vec<u32>>> = (0..width).map(|f| vec![Vec::new(); codec.n_values(f)]).collect();
        for (r, row) in table.rows.iter().enumerate() {
            for (f, &v) in row.iter().enumerate() {
                lists[f][v as usize].push(r as u32);
            }
        }
        Postings { lists }
    }

    fn list(&self, (f, v): (usize, u32)) -> &[u32] {
        &self.lists[f][v as usize]
    }

    /// (covered weight, weight of `class`) over rows meeting every condition.
    fn stats(&self, table: &Table, conds: &[(usize, u32)], class: u32) -> (f64, f64) {
        let mut covered = 0.0;
        let mut correct = 0.0;
        let mut add = |r: usize| {
            for &(c, n) in &table.counts[r] {
                covered += n;
                if c == class {
                    correct += n;
                }
            }
        };
        match conds.iter().min_by_key(|&&c| self.list(c).len()) {
            None => (0..table.rows.len()).for_each(&mut add),
            Some(&seed) => {
                for &r in self.list(seed) {
                    if conds.iter().all(|&(f, v)| table.rows[r as usize][f] == v) {
                        add(r as usize);
                    }
                }
            }
        }
        (covered, correct)
    }
}

/// Greedy condition dropping; never removes the last condition.
fn prune(table: &Table, postings: &Postings, mut conds: Vec<(usize, u32)>, class: u32) -> Vec<(usize, u32)> {
    while conds.len() > 1 {
        // A row covered after dropping one condition fails at most that one,
        // so it lies in at least one of the two smallest posting lists.
        let mut by_size: Vec<usize> = (0..conds.len()).collect();
        by_size.sort_by_key(|&j| (postings.list(conds[j]).len(), j));
        let mut candidates: Vec<u32> = postings.list(conds[by_size[0]]).to_vec();
        candidates.extend_from_slice(postings.list(conds[by_size[1]]));
        candidates.sort_unstable();
        candidates.dedup();

        let k = conds.len();
        let mut base = (0.0, 0.0);
        let mut dropped = vec![(0.0, 0.0); k];
        for r in candidates {
            let row = &table.rows[r as usize];
            let mut failed = None;
            let mut fails = 0;
            for (j, &(f, v)) in conds.iter().enumerate() {
                if row[f] != v {
                    fails += 1;
                    failed = Some(j);
                    if fails > 1 {
                        break;
                    }
                }
            }
            let slot = match (fails, failed) {
                (0, _) => &mut base,
                (1, Some(j)) => &mut dropped[j],
                _ => continue,
            };
            for &(c, n) in &table.counts[r as usize] {
                slot.0 += n;
                if c == class {
                    slot.1 += n;
                }
            }
        }
        let current = laplace_error(base.0, base.0 - base.1);
        let mut choice: Option<(usize, f64)> = None;
        for j in 0..k {
            // dropping j also keeps everything already covered
            let cov = base.0 + dropped[j].0;
            let cor = base.1 + dropped[j].1;
            let err = laplace_error(cov, cov - cor);
            if err <= current + 1e-12 && choice.map_or(true, |(_, e)| err < e) {
                choice = Some((j, err));
            }
        }
        match choice {
            Some((j, _)) => {
                conds.remove(j);
            }
            None => break,
        }
    }
    conds
}
