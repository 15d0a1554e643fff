//! Cross-validated single, cascade, combination and meta-meta experiments.
//!
//! Combiners are trained on prediction features that come from models which
//! never saw the word being featurized: training-side predictions are made
//! by inner cross-validation over the outer training portion, test-side
//! predictions by models trained on the whole training portion. Every model
//! is registered with the words it was trained on so that each use of a
//! prediction feature can be audited.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::align::AlignedEntry;
use crate::error::{Error, Result};
use crate::eval::{aggregate, score_predictions, EvaluationResult, FoldScore, GoldWord};
use crate::instances::{window_features, Instance, InstanceSchema};
use crate::learners::{train, LearnerConfig, LearnerKind, TrainedModel};
use crate::lexicon::graphemes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    A,
    B,
}

impl Variant {
    pub fn other(self) -> Variant {
        match self {
            Variant::A => Variant::B,
            Variant::B => Variant::A,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::B => "b",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Variant::A),
            "b" | "B" => Ok(Variant::B),
            _ => Err(Error::Argument(format!("unknown variant '{s}' (expected a or b)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Single,
    Cascade,
    ComboOne,
    ComboBoth,
    MetaMeta,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Single => "single",
            Architecture::Cascade => "cascade",
            Architecture::ComboOne => "combo1",
            Architecture::ComboBoth => "combo2",
            Architecture::MetaMeta => "metameta",
        }
    }

    pub fn needs_pairs(self) -> bool {
        self != Architecture::Single
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single" => Architecture::Single,
            "cascade" => Architecture::Cascade,
            "combo1" => Architecture::ComboOne,
            "combo2" => Architecture::ComboBoth,
            "metameta" => Architecture::MetaMeta,
            _ => {
                return Err(Error::Argument(format!(
                    "unknown architecture '{s}' (expected single, cascade, combo1, combo2 or metameta)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackingPlan {
    pub architecture: Architecture,
    pub target: Variant,
    pub component: LearnerKind,
    pub combiner: LearnerKind,
    pub meta_learners: Vec<LearnerKind>,
    pub with_spelling: bool,
    pub inner_folds: usize,
    /// Train combiners on predictions of models that saw the same words.
    /// Optimistic; for ablation only.
    pub resubstitution: bool,
    pub learner_config: LearnerConfig,
}

impl StackingPlan {
    pub fn new(architecture: Architecture, target: Variant) -> Self {
        StackingPlan {
            architecture,
            target,
            component: LearnerKind::Ib1Ig,
            combiner: LearnerKind::Ib1Ig,
            meta_learners: LearnerKind::ALL.to_vec(),
            with_spelling: true,
            inner_folds: 5,
            resubstitution: false,
            learner_config: LearnerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner_folds < 2 {
            return Err(Error::Argument("inner folds must be at least 2".into()));
        }
        if self.architecture == Architecture::MetaMeta && !(2..=8).contains(&self.meta_learners.len()) {
            return Err(Error::Argument("meta-meta stacking needs 2 to 8 meta learners".into()));
        }
        Ok(())
    }
}

/// Word-level partition shared by both variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub words: Vec<String>,
    pub fold_of: Vec<usize>,
    pub n_folds: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn fold_of_word(&self) -> BTreeMap<&str, usize> {
        self.words.iter().map(String::as_str).zip(self.fold_of.iter().copied()).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle, then round-robin assignment.
pub fn make_folds(words: &[String], n_folds: usize, seed: u64) -> Result<FoldAssignment> {
    if n_folds < 2 {
        return Err(Error::Argument("at least 2 folds are needed".into()));
    }
    if words.len() < n_folds {
        return Err(Error::Argument(format!(
            "{} words cannot fill {n_folds} folds",
            words.len()
        )));
    }
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; words.len()];
    for (p, &w) in order.iter().enumerate() {
        fold_of[w] = p % n_folds;
    }
    Ok(FoldAssignment {
        words: words.to_vec(),
        fold_of,
        n_folds,
        seed,
    })
}

fn derive_seed(seed: u64, salt: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt as u64 + 1)
}

/// Aligned transcriptions of both variants, indexed by word id.
#[derive(Debug, Clone)]
pub struct StackingData {
    pub words: Vec<String>,
    pub graphemes: Vec<Vec<String>>,
    pub a: Vec<Vec<AlignedEntry>>,
    pub b: Vec<Vec<AlignedEntry>>,
}

fn group(entries: &[AlignedEntry]) -> BTreeMap<String, Vec<AlignedEntry>> {
    let mut m: BTreeMap<String, Vec<AlignedEntry>> = BTreeMap::new();
    for e in entries {
        m.entry(e.word.clone()).or_default().push(e.clone());
    }
    m
}

impl StackingData {
    /// Words aligned in both variants, in lexicographic order.
    pub fn paired(a: &[AlignedEntry], b: &[AlignedEntry]) -> Result<Self> {
        let (ga, mut gb) = (group(a), group(b));
        let mut data = StackingData {
            words: Vec::new(),
            graphemes: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        };
        for (w, ea) in ga {
            let Some(eb) = gb.remove(&w) else { continue };
            for e in ea.iter().chain(&eb) {
                if e.phonemes.len() != e.graphemes.len() {
                    return Err(Error::Pairing(format!("'{w}' is not length-aligned")));
                }
            }
            data.graphemes.push(graphemes(&w));
            data.words.push(w);
            data.a.push(ea);
            data.b.push(eb);
        }
        Ok(data)
    }

    /// Data for single-classifier runs on one variant.
    pub fn single(entries: &[AlignedEntry], variant: Variant) -> Self {
        let mut data = StackingData {
            words: Vec::new(),
            graphemes: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        };
        for (w, es) in group(entries) {
            data.graphemes.push(graphemes(&w));
            data.words.push(w);
            let (this, other) = match variant {
                Variant::A => (&mut data.a, &mut data.b),
                Variant::B => (&mut data.b, &mut data.a),
            };
            this.push(es);
            other.push(Vec::new());
        }
        data
    }

    pub fn variant(&self, v: Variant) -> &[Vec<AlignedEntry>] {
        match v {
            Variant::A => &self.a,
            Variant::B => &self.b,
        }
    }

    pub fn is_paired(&self) -> bool {
        self.a.iter().zip(&self.b).all(|(x, y)| !x.is_empty() && !y.is_empty())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Window instances for `words` labelled with variant `v`, one set per
    /// listed transcription.
    pub fn instances(&self, v: Variant, words: &[usize], schema: &InstanceSchema) -> Vec<Instance> {
        let mut out = Vec::new();
        for &w in words {
            let windows = window_features(&self.graphemes[w], schema);
            for e in &self.variant(v)[w] {
                for (pos, (f, label)) in windows.iter().zip(&e.phonemes).enumerate() {
                    out.push(Instance {
                        features: f.clone(),
                        label: label.clone(),
                        word_id: w,
                        position: pos,
                    });
                }
            }
        }
        out
    }

    pub fn gold(&self, v: Variant, words: &[usize]) -> Vec<GoldWord> {
        words
            .iter()
            .map(|&w| GoldWord {
                word: self.words[w].clone(),
                alternatives: self.variant(v)[w].iter().map(|e| e.phonemes.clone()).collect(),
            })
            .collect()
    }
}

/// Predicted phoneme string of one word from a spelling-window model.
pub fn predict_word(model: &TrainedModel, graphemes: &[String], schema: &InstanceSchema) -> Vec<String> {
    window_features(graphemes, schema)
        .iter()
        .map(|f| model.classify(f).to_string())
        .collect()
}

pub type ModelId = usize;

/// Training word sets of every model built for one outer fold.
#[derive(Debug, Clone, Default)]
pub struct ModelRegistry {
    models: Vec<(String, Vec<bool>)>,
}

impl ModelRegistry {
    fn register(&mut self, label: String, n_words: usize, words: &[usize]) -> ModelId {
        let mut set = vec![false; n_words];
        for &w in words {
            set[w] = true;
        }
        self.models.push((label, set));
        self.models.len() - 1
    }

    pub fn trained_on(&self, model: ModelId, word: usize) -> bool {
        self.models[model].1[word]
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn label(&self, model: ModelId) -> &str {
        &self.models[model].0
    }
}

/// A word's predicted phoneme string and the model that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicted {
    pub phonemes: Vec<String>,
    pub source: ModelId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LeakageAudit {
    /// Prediction-feature uses checked on combiner training instances.
    pub checks: usize,
    /// Uses whose producing model was trained on the instance's own word.
    pub violations: usize,
    /// Test words found in the training set of any model of their fold.
    pub test_overlaps: usize,
}

impl LeakageAudit {
    fn merge(&mut self, other: LeakageAudit) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.test_overlaps += other.test_overlaps;
    }
}

/// Everything built while running one outer fold.
struct FoldContext<'a> {
    data: &'a StackingData,
    plan: &'a StackingPlan,
    schema: InstanceSchema,
    registry: ModelRegistry,
    audit: LeakageAudit,
}

impl<'a> FoldContext<'a> {
    fn train_component(&mut self, v: Variant, words: &[usize], label: &str) -> Result<(ModelId, TrainedModel)> {
        let inst = self.data.instances(v, words, &self.schema);
        let model = train(self.plan.component, &inst, &self.schema, &self.plan.learner_config)?;
        let id = self.registry.register(label.to_string(), self.data.len(), words);
        Ok((id, model))
    }

    fn predict_with(&self, id: ModelId, model: &TrainedModel, words: &[usize]) -> BTreeMap<usize, Predicted> {
        words
            .iter()
            .map(|&w| {
                (
                    w,
                    Predicted {
                        phonemes: predict_word(model, &self.data.graphemes[w], &self.schema),
                        source: id,
                    },
                )
            })
            .collect()
    }

    /// Out-of-sample component predictions for every word of `train_words`.
    fn inner(&mut self, v: Variant, train_words: &[usize], partition: &[Vec<usize>]) -> Result<BTreeMap<usize, Predicted>> {
        let mut out = BTreeMap::new();
        if self.plan.resubstitution {
            let (id, m) = self.train_component(v, train_words, &format!("{}-resub", v.name()))?;
            out.extend(self.predict_with(id, &m, train_words));
            return Ok(out);
        }
        for (j, held) in partition.iter().enumerate() {
            let rest = complement(train_words, held);
            let (id, m) = self.train_component(v, &rest, &format!("{}-inner{j}", v.name()))?;
            out.extend(self.predict_with(id, &m, held));
        }
        Ok(out)
    }

    /// Records the provenance check for one training instance's features.
    fn check(&mut self, word: usize, sources: &[ModelId]) {
        for &s in sources {
            self.audit.checks += 1;
            if self.registry.trained_on(s, word) {
                self.audit.violations += 1;
            }
        }
    }
}

fn complement(all: &[usize], held: &[usize]) -> Vec<usize> {
    let held: std::collections::HashSet<usize> = held.iter().copied().collect();
    all.iter().copied().filter(|w| !held.contains(w)).collect()
}

fn partition_words(words: &[usize], n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order = words.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut parts = vec![Vec::new(); n.min(words.len()).max(1)];
    let k = parts.len();
    for (p, w) in order.into_iter().enumerate() {
        parts[p % k].push(w);
    }
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    parts
}

/// Out-of-sample predictions for `train_words` from `inner_folds` models,
/// each trained without the words it predicts. Returns, per word, the
/// predicted phonemes and the training words of the model that made them.
pub fn inner_predictions(
    data: &StackingData,
    variant: Variant,
    train_words: &[usize],
    learner: LearnerKind,
    config: &LearnerConfig,
    inner_folds: usize,
    seed: u64,
) -> Result<BTreeMap<usize, (Vec<String>, Vec<usize>)>> {
    if inner_folds < 2 {
        return Err(Error::Argument("inner folds must be at least 2".into()));
    }
    let mut plan = StackingPlan::new(Architecture::Single, variant);
    plan.component = learner;
    plan.learner_config = *config;
    let mut ctx = FoldContext {
        data,
        plan: &plan,
        schema: InstanceSchema::default(),
        registry: ModelRegistry::default(),
        audit: LeakageAudit::default(),
    };
    let partition = partition_words(train_words, inner_folds, seed);
    let preds = ctx.inner(variant, train_words, &partition)?;
    Ok(preds
        .into_iter()
        .map(|(w, p)| {
            let words = (0..data.len()).filter(|&x| ctx.registry.trained_on(p.source, x)).collect();
            (w, (p.phonemes, words))
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub result: EvaluationResult,
    pub audit: LeakageAudit,
    /// Test-fold predictions of every word, keyed by word.
    pub predictions: BTreeMap<String, Vec<String>>,
    /// Feature count of the final classifier.
    pub final_width: usize,
}

/// Runs the plan over every outer fold. `jobs` bounds the number of folds
/// processed at once (0 uses the global pool); results do not depend on it.
pub fn run_plan(plan: &StackingPlan, data: &StackingData, folds: &FoldAssignment, jobs: usize) -> Result<PlanOutcome> {
    plan.validate()?;
    if folds.words != data.words {
        return Err(Error::Argument("fold assignment does not match the word list".into()));
    }
    if plan.architecture.needs_pairs() && !data.is_paired() {
        return Err(Error::Argument(format!(
            "architecture {} needs both variants for every word",
            plan.architecture
        )));
    }
    let run = || -> Vec<Result<(FoldScore, LeakageAudit, Vec<(usize, Vec<String>)>, usize)>> {
        (0..folds.n_folds)
            .into_par_iter()
            .map(|f| run_fold(plan, data, folds, f).map_err(|e| Error::Fold { fold: f, source: Box::new(e) }))
            .collect()
    };
    let results = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Argument(format!("cannot start {jobs} worker threads: {e}")))?
            .install(run)
    };
    let mut scores = Vec::new();
    let mut audit = LeakageAudit::default();
    let mut predictions = BTreeMap::new();
    let mut final_width = 0;
    for r in results {
        let (score, a, preds, width) = r?;
        scores.push(score);
        audit.merge(a);
        final_width = width;
        for (w, p) in preds {
            predictions.insert(data.words[w].clone(), p);
        }
    }
    Ok(PlanOutcome {
        result: aggregate(&scores)?,
        audit,
        predictions,
        final_width,
    })
}

type FoldResult = (FoldScore, LeakageAudit, Vec<(usize, Vec<String>)>, usize);

fn run_fold(plan: &StackingPlan, data: &StackingData, folds: &FoldAssignment, f: usize) -> Result<FoldResult> {
    let target = plan.target;
    let test: Vec<usize> = (0..data.len())
        .filter(|&w| folds.fold_of[w] == f && !data.variant(target)[w].is_empty())
        .collect();
    let train_words: Vec<usize> = (0..data.len())
        .filter(|&w| folds.fold_of[w] != f && !data.variant(target)[w].is_empty())
        .collect();
    if train_words.is_empty() || test.is_empty() {
        return Err(Error::Argument("fold has no training or no test words".into()));
    }
    let mut ctx = FoldContext {
        data,
        plan,
        schema: InstanceSchema::default(),
        registry: ModelRegistry::default(),
        audit: LeakageAudit::default(),
    };
    let partition = partition_words(&train_words, plan.inner_folds, derive_seed(folds.seed, f));

    let (test_preds, width): (Vec<(usize, Vec<String>)>, usize) = match plan.architecture {
        Architecture::Single => {
            let (id, m) = ctx.train_component(target, &train_words, "single")?;
            let p = ctx.predict_with(id, &m, &test);
            (p.into_iter().map(|(w, p)| (w, p.phonemes)).collect(), m.width())
        }
        Architecture::Cascade | Architecture::ComboOne | Architecture::ComboBoth => {
            let variants: Vec<Variant> = match plan.architecture {
                Architecture::ComboBoth => vec![Variant::A, Variant::B],
                _ => vec![target.other()],
            };
            let (train_feats, test_feats) = level0(&mut ctx, &variants, &train_words, &test, &partition)?;
            let (schema, build): (InstanceSchema, Builder) = if plan.architecture == Architecture::Cascade {
                (InstanceSchema::default(), Builder::Cascade)
            } else {
                let mut s = InstanceSchema::default();
                s.extra_feature_names = variants.iter().map(|v| format!("pred_{}", v.name())).collect();
                (s, Builder::Spelling)
            };
            let m = train_combiner(&mut ctx, plan.combiner, &schema, build, &train_words, &train_feats, "combiner")?;
            let p = test
                .iter()
                .map(|&w| (w, classify_word(&ctx, &m, &schema, build, w, &test_feats[&w])))
                .collect();
            (p, m.width())
        }
        Architecture::MetaMeta => {
            let both = [Variant::A, Variant::B];
            let (train0, test0) = level0(&mut ctx, &both, &train_words, &test, &partition)?;
            let mut s1 = InstanceSchema::default();
            s1.extra_feature_names = vec!["pred_a".into(), "pred_b".into()];
            let mut train1: BTreeMap<usize, Vec<Predicted>> = BTreeMap::new();
            let mut test1: BTreeMap<usize, Vec<Predicted>> = BTreeMap::new();
            for (k, &kind) in plan.meta_learners.iter().enumerate() {
                // level-1 inner predictions reuse the level-0 partition
                let held_out: Vec<(Vec<usize>, Vec<usize>)> = if plan.resubstitution {
                    vec![(train_words.clone(), train_words.clone())]
                } else {
                    partition
                        .iter()
                        .map(|held| (complement(&train_words, held), held.clone()))
                        .collect()
                };
                for (j, (fit, held)) in held_out.iter().enumerate() {
                    let m = train_combiner(&mut ctx, kind, &s1, Builder::Spelling, fit, &train0, &format!("meta{k}-inner{j}"))?;
                    let id = ctx.registry.len() - 1;
                    for &w in held {
                        let phonemes = classify_word(&ctx, &m, &s1, Builder::Spelling, w, &train0[&w]);
                        train1.entry(w).or_default().push(Predicted { phonemes, source: id });
                    }
                }
                let m = train_combiner(&mut ctx, kind, &s1, Builder::Spelling, &train_words, &train0, &format!("meta{k}"))?;
                let id = ctx.registry.len() - 1;
                for &w in &test {
                    let phonemes = classify_word(&ctx, &m, &s1, Builder::Spelling, w, &test0[&w]);
                    test1.entry(w).or_default().push(Predicted { phonemes, source: id });
                }
            }
            let names: Vec<String> = plan.meta_learners.iter().map(|k| format!("meta_{}", k.name())).collect();
            let (schema, build) = if plan.with_spelling {
                let mut s = InstanceSchema::default();
                s.extra_feature_names = names;
                (s, Builder::Spelling)
            } else {
                (InstanceSchema::extras_only(names), Builder::PredictionsOnly)
            };
            let m = train_combiner(&mut ctx, plan.combiner, &schema, build, &train_words, &train1, "final")?;
            let p = test
                .iter()
                .map(|&w| (w, classify_word(&ctx, &m, &schema, build, w, &test1[&w])))
                .collect();
            (p, m.width())
        }
    };

    for (_, set) in &ctx.registry.models {
        ctx.audit.test_overlaps += test.iter().filter(|&&w| set[w]).count();
    }
    let predicted: BTreeMap<String, Vec<String>> = test_preds
        .iter()
        .map(|(w, p): &(usize, Vec<String>)| (data.words[*w].clone(), p.clone()))
        .collect();
    let score = score_predictions(&data.gold(target, &test), &predicted)?;
    log::info!(
        "{} fold {f}: phoneme {:.4} word {:.4}",
        plan.architecture,
        score.phoneme_accuracy,
        score.word_accuracy
    );
    Ok((score, ctx.audit, test_preds, width))
}

type PredMap = BTreeMap<usize, Vec<Predicted>>;

/// Level-0 prediction features for training words (out of sample) and test
/// words (from models trained on all training words), one entry per variant.
fn level0(
    ctx: &mut FoldContext<'_>,
    variants: &[Variant],
    train_words: &[usize],
    test: &[usize],
    partition: &[Vec<usize>],
) -> Result<(PredMap, PredMap)> {
    let mut train_feats: PredMap = BTreeMap::new();
    let mut test_feats: PredMap = BTreeMap::new();
    for &v in variants {
        for (w, p) in ctx.inner(v, train_words, partition)? {
            train_feats.entry(w).or_default().push(p);
        }
        let (id, m) = ctx.train_component(v, train_words, &format!("{}-full", v.name()))?;
        for (w, p) in ctx.predict_with(id, &m, test) {
            test_feats.entry(w).or_default().push(p);
        }
    }
    Ok((train_feats, test_feats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Builder {
    /// Spelling window plus focus predictions.
    Spelling,
    /// Focus predictions only.
    PredictionsOnly,
    /// Window over the single predicted phoneme string.
    Cascade,
}

fn combiner_rows(ctx: &FoldContext<'_>, schema: &InstanceSchema, build: Builder, w: usize, preds: &[Predicted]) -> Vec<Vec<String>> {
    match build {
        Builder::Cascade => window_features(&preds[0].phonemes, schema),
        Builder::Spelling | Builder::PredictionsOnly => {
            let windows = window_features(&ctx.data.graphemes[w], schema);
            windows
                .into_iter()
                .enumerate()
                .map(|(i, mut f)| {
                    f.extend(preds.iter().map(|p| p.phonemes[i].clone()));
                    f
                })
                .collect()
        }
    }
}

fn train_combiner(
    ctx: &mut FoldContext<'_>,
    kind: LearnerKind,
    schema: &InstanceSchema,
    build: Builder,
    words: &[usize],
    feats: &PredMap,
    label: &str,
) -> Result<TrainedModel> {
    let target = ctx.plan.target;
    let mut inst = Vec::new();
    for &w in words {
        let preds = &feats[&w];
        let rows = combiner_rows(ctx, schema, build, w, preds);
        let sources: Vec<ModelId> = preds.iter().map(|p| p.source).collect();
        for e in &ctx.data.variant(target)[w] {
            for (pos, (f, label)) in rows.iter().zip(&e.phonemes).enumerate() {
                ctx.check(w, &sources);
                inst.push(Instance {
                    features: f.clone(),
                    label: label.clone(),
                    word_id: w,
                    position: pos,
                });
            }
        }
    }
    let model = train(kind, &inst, schema, &ctx.plan.learner_config)?;
    ctx.registry.register(label.to_string(), ctx.data.len(), words);
    Ok(model)
}

fn classify_word(
    ctx: &FoldContext<'_>,
    model: &TrainedModel,
    schema: &InstanceSchema,
    build: Builder,
    w: usize,
    preds: &[Predicted],
) -> Vec<String> {
    combiner_rows(ctx, schema, build, w, preds)
        .iter()
        .map(|f| model.classify(f).to_string())
        .collect()
}
