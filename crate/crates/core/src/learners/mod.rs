//! Symbolic classifiers sharing one train/classify contract.

pub(crate) mod codec;
pub(crate) mod format;
pub mod ib1ig;
pub mod igtree;
pub mod maxent;
pub mod tree_rules;
pub mod weights;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instances::{Instance, InstanceSchema};
use codec::{ClassTable, FeatureCodec};
use format::Records;

pub use ib1ig::{train_ib1ig, Ib1IgModel};
pub use igtree::{train_igtree, IgTreeModel};
pub use maxent::{train_maxent_gis, MaxEntModel};
pub use tree_rules::{train_tree_rules, DecisionTree, ProductionRule, RuleListModel};
pub use weights::{gain_ratio, info_gain, FeatureWeights, Weighting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LearnerKind {
    Ib1Ig,
    IgTree,
    TreeRules,
    MaxEnt,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [
        LearnerKind::TreeRules,
        LearnerKind::Ib1Ig,
        LearnerKind::IgTree,
        LearnerKind::MaxEnt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Ib1Ig => "ib1ig",
            LearnerKind::IgTree => "igtree",
            LearnerKind::TreeRules => "tree-rules",
            LearnerKind::MaxEnt => "maxent",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ib1ig" | "ib1-ig" => Ok(LearnerKind::Ib1Ig),
            "igtree" => Ok(LearnerKind::IgTree),
            "tree-rules" | "rules" | "c5" => Ok(LearnerKind::TreeRules),
            "maxent" => Ok(LearnerKind::MaxEnt),
            _ => Err(Error::Argument(format!(
                "unknown learner '{s}' (expected ib1ig, igtree, tree-rules or maxent)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    pub k: usize,
    pub weighting: Weighting,
    pub maxent_iterations: usize,
    pub maxent_tolerance: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            k: 1,
            weighting: Weighting::GainRatio,
            maxent_iterations: 100,
            maxent_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Ib1Ig(Ib1IgModel),
    IgTree(IgTreeModel),
    TreeRules(RuleListModel),
    MaxEnt(MaxEntModel),
}

pub fn train(
    kind: LearnerKind,
    instances: &[Instance],
    schema: &InstanceSchema,
    config: &LearnerConfig,
) -> Result<TrainedModel> {
    Ok(match kind {
        LearnerKind::Ib1Ig => TrainedModel::Ib1Ig(train_ib1ig(instances, schema, config.k, config.weighting)?),
        LearnerKind::IgTree => TrainedModel::IgTree(train_igtree(instances, schema, config.weighting)?),
        LearnerKind::TreeRules => TrainedModel::TreeRules(train_tree_rules(instances, schema)?),
        LearnerKind::MaxEnt => TrainedModel::MaxEnt(train_maxent_gis(
            instances,
            schema,
            config.maxent_iterations,
            config.maxent_tolerance,
        )?),
    })
}

impl TrainedModel {
    pub fn kind(&self) -> LearnerKind {
        match self {
            TrainedModel::Ib1Ig(_) => LearnerKind::Ib1Ig,
            TrainedModel::IgTree(_) => LearnerKind::IgTree,
            TrainedModel::TreeRules(_) => LearnerKind::TreeRules,
            TrainedModel::MaxEnt(_) => LearnerKind::MaxEnt,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            TrainedModel::Ib1Ig(m) => m.width(),
            TrainedModel::IgTree(m) => m.width(),
            TrainedModel::TreeRules(m) => m.width(),
            TrainedModel::MaxEnt(m) => m.width(),
        }
    }

    pub fn classify(&self, features: &[String]) -> &str {
        match self {
            TrainedModel::Ib1Ig(m) => m.classify(features),
            TrainedModel::IgTree(m) => m.classify(features),
            TrainedModel::TreeRules(m) => m.classify(features),
            TrainedModel::MaxEnt(m) => m.classify(features),
        }
    }

    pub fn classify_all(&self, instances: &[Instance]) -> Vec<String> {
        instances
            .iter()
            .map(|i| self.classify(&i.features).to_string())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            TrainedModel::Ib1Ig(m) => m.write(&mut out),
            TrainedModel::IgTree(m) => m.write(&mut out),
            TrainedModel::TreeRules(m) => m.write(&mut out),
            TrainedModel::MaxEnt(m) => m.write(&mut out),
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let kind: LearnerKind = format::kind_of(text)?
            .parse()
            .map_err(|_| Error::ModelFormat("unknown model kind in header".into()))?;
        let mut rec = Records::after_header(text);
        Ok(match kind {
            LearnerKind::Ib1Ig => TrainedModel::Ib1Ig(Ib1IgModel::read(&mut rec)?),
            LearnerKind::IgTree => TrainedModel::IgTree(IgTreeModel::read(&mut rec)?),
            LearnerKind::TreeRules => TrainedModel::TreeRules(RuleListModel::read(&mut rec)?),
            LearnerKind::MaxEnt => TrainedModel::MaxEnt(MaxEntModel::read(&mut rec)?),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

pub(crate) fn check_width(instances: &[Instance], schema: &InstanceSchema) -> Result<()> {
    let width = schema.width();
    if let Some(bad) = instances.iter().find(|i| i.features.len() != width) {
        return Err(Error::Training(format!(
            "instance ({}, {}) has {} features, schema declares {width}",
            bad.word_id,
            bad.position,
            bad.features.len()
        )));
    }
    Ok(())
}

pub(crate) fn write_classes(out: &mut String, classes: &ClassTable) {
    let fields: Vec<String> = (0..classes.len() as u32)
        .map(|c| format!("{}={}", classes.symbol(c), classes.frequency(c)))
        .collect();
    let fields: Vec<&str> = fields.iter().map(String::as_str).collect();
    format::record(out, "classes", &fields);
}

pub(crate) fn read_classes(rec: &mut Records<'_>) -> Result<ClassTable> {
    let fields = rec.expect("classes")?;
    if fields.is_empty() {
        return Err(Error::ModelFormat("no classes".into()));
    }
    let mut pairs = Vec::with_capacity(fields.len());
    for f in fields {
        let (s, n) = f
            .rsplit_once('=')
            .ok_or_else(|| Error::ModelFormat(format!("bad class entry '{f}'")))?;
        pairs.push((s.to_string(), rec.number(n)?));
    }
    Ok(ClassTable::from_counts(pairs))
}

pub(crate) fn write_codec(out: &mut String, codec: &FeatureCodec) {
    format::record(out, "width", &[&codec.width().to_string()]);
    for f in 0..codec.width() {
        let values: Vec<&str> = (0..codec.n_values(f) as u32).map(|v| codec.symbol(f, v)).collect();
        format::record(out, "values", &values);
    }
}

pub(crate) fn read_codec(rec: &mut Records<'_>) -> Result<FeatureCodec> {
    let width: usize = rec.expect_number("width")?;
    let mut columns = Vec::with_capacity(width);
    for _ in 0..width {
        columns.push(rec.expect("values")?.into_iter().map(str::to_string).collect());
    }
    Ok(FeatureCodec::from_columns(columns))
}
