//! `g2pstack`: command-line driver for alignment, instance generation,
//! learners, stacking experiments, transformation rules and scoring.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use g2pstack::align::{
    align_corpus, aligned_to_string, estimate_associations, load_aligned, suggest_compounds, AlignConfig, AlignedEntry,
};
use g2pstack::eval::{gold_from_aligned, per_phoneme_errors, score_predictions};
use g2pstack::instances::{window_instances, write_c45, InstanceSchema};
use g2pstack::learners::{train, LearnerConfig, LearnerKind, TrainedModel, Weighting};
use g2pstack::lexicon::{filter_alignable, load_lexicon, PhonemeInventory};
use g2pstack::stacking::{make_folds, predict_word, run_plan, Architecture, StackingData, StackingPlan, Variant};
use g2pstack::synth::{generate_synthetic, SyntheticSpec};
use g2pstack::tbedl::{apply_rules, default_templates, learn_tbedl, overlap_report, pair_aligned, RuleProgram};

const SEED_ENV: &str = "G2PSTACK_SEED";

/// Config keys that are plain switches: `true` sets them, `false` leaves them off.
const SWITCHES: &[&str] = &["resubstitution", "json", "per-phoneme", "no-gold", "no-dialect-rules"];

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<g2pstack::Error> for CliError {
    fn from(e: g2pstack::Error) -> Self {
        if e.is_argument() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "g2pstack", version, about = "Grapheme-to-phoneme learning with stacked symbolic classifiers")]
struct Cli {
    /// Flat key=value file; each key names a long flag of the subcommand.
    /// Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dialect pair with gold alignments and the true rule program.
    Synth(SynthArgs),
    /// Align a lexicon: one phoneme symbol (or null "-") per letter.
    Align(AlignArgs),
    /// Write 7-letter window instances as C4.5-style data lines.
    Instances(InstancesArgs),
    /// Train a classifier on the window instances of an aligned lexicon.
    Train(TrainArgs),
    /// Transcribe words with a trained model.
    Predict(PredictArgs),
    /// Cross-validated stacking experiments.
    #[command(subcommand)]
    Stack(StackCommand),
    /// Transformation-based rule learning between two aligned variants.
    #[command(subcommand)]
    Tbedl(TbedlCommand),
    /// Score predicted transcriptions against an aligned gold lexicon.
    Eval(EvalArgs),
    /// Inspect production rules of a tree-rules model.
    #[command(subcommand)]
    Rules(RulesCommand),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 5000)]
    words: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 7)]
    seed: u64,
    /// Fraction of words given a second, variant-B-only transcription (at most 0.2).
    #[arg(long, default_value_t = 0.2)]
    ambiguity: f64,
    /// Make variant B equal to variant A apart from ambiguity additions.
    #[arg(long)]
    no_dialect_rules: bool,
    /// Skip the gold aligned files.
    #[arg(long)]
    no_gold: bool,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct AlignArgs {
    /// Lexicon TSV: `<orthography>\t<space-separated phonemes>`.
    #[arg(long)]
    lexicon: PathBuf,
    /// Phoneme inventory file.
    #[arg(long)]
    inventory: PathBuf,
    /// Log-weight of a null insertion (<= 0).
    #[arg(long, allow_negative_numbers = true)]
    null_penalty: Option<f64>,
    /// Re-counting passes after the positional seed.
    #[arg(long)]
    em_iters: Option<usize>,
    /// Write dropped and unalignable entries, with compound suggestions, here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstancesArgs {
    #[arg(long)]
    aligned: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct LearnerArgs {
    /// Nearest-neighbour distances considered by ib1ig.
    #[arg(short = 'k', long = "k", default_value_t = 1)]
    k: usize,
    /// Feature weighting for ib1ig and igtree: gainratio or ig.
    #[arg(long, default_value = "gainratio", value_parser = parse_weighting)]
    weighting: Weighting,
    #[arg(long, default_value_t = 100)]
    maxent_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    maxent_tol: f64,
}

impl LearnerArgs {
    fn config(&self) -> CliResult<LearnerConfig> {
        if self.k == 0 {
            return Err(CliError::Usage("-k must be at least 1".into()));
        }
        Ok(LearnerConfig {
            k: self.k,
            weighting: self.weighting,
            maxent_iterations: self.maxent_iters,
            maxent_tolerance: self.maxent_tol,
        })
    }
}

fn parse_weighting(s: &str) -> Result<Weighting, String> {
    Weighting::parse(s).ok_or_else(|| format!("unknown weighting '{s}' (expected gainratio or ig)"))
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    aligned: PathBuf,
    /// ib1ig, igtree, tree-rules or maxent.
    #[arg(long, default_value = "ib1ig")]
    learner: LearnerKind,
    #[command(flatten)]
    learner_args: LearnerArgs,
    /// Where to save the model.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Words, one per line; only the first tab-separated column is read.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum StackCommand {
    /// Run one architecture under k-fold cross-validation.
    Run(StackArgs),
}

#[derive(Args, Debug)]
struct StackArgs {
    /// Aligned variant-A lexicon.
    #[arg(long)]
    aligned_a: Option<PathBuf>,
    /// Aligned variant-B lexicon.
    #[arg(long)]
    aligned_b: Option<PathBuf>,
    /// single, cascade, combo1, combo2 or metameta.
    #[arg(long, default_value = "single")]
    arch: Architecture,
    /// Variant to predict: a or b.
    #[arg(long, default_value = "b")]
    target: Variant,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Folds used to produce out-of-sample combiner features.
    #[arg(long, default_value_t = 5)]
    inner_folds: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 7)]
    seed: u64,
    /// Whether metameta also sees the 7 spelling features.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    with_spelling: bool,
    /// Level-0 learner.
    #[arg(long, default_value = "ib1ig")]
    component: LearnerKind,
    /// Combination learner.
    #[arg(long, default_value = "ib1ig")]
    combiner: LearnerKind,
    /// Ablation: train combiners on predictions of models that saw the
    /// words they predict. Results are optimistic.
    #[arg(long)]
    resubstitution: bool,
    /// Folds processed at once; defaults to the available parallelism.
    /// Results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    learner_args: LearnerArgs,
    /// Also write every word's test-fold prediction as aligned TSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum TbedlCommand {
    /// Learn an ordered rule list rewriting variant A into variant B.
    Learn(TbedlLearnArgs),
    /// Apply a rule file to an aligned lexicon.
    Apply(TbedlApplyArgs),
}

#[derive(Args, Debug)]
struct TbedlLearnArgs {
    #[arg(long)]
    aligned_a: PathBuf,
    #[arg(long)]
    aligned_b: PathBuf,
    /// Minimum good - bad for a rule to be adopted.
    #[arg(long, default_value_t = g2pstack::tbedl::DEFAULT_THRESHOLD)]
    threshold: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TbedlApplyArgs {
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    aligned: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Aligned gold lexicon; repeated words list alternatives.
    #[arg(long)]
    gold: PathBuf,
    /// Aligned predictions, one line per word.
    #[arg(long)]
    predicted: PathBuf,
    #[arg(long)]
    json: bool,
    /// Add error counts per gold phoneme.
    #[arg(long)]
    per_phoneme: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum RulesCommand {
    /// Print the rules of a tree-rules model, best first.
    Print(RulesPrintArgs),
}

#[derive(Args, Debug)]
struct RulesPrintArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // a closed reader (e.g. `| head`) is not a failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| CliError::Internal(format!("writing to standard output: {e}"))),
            }
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let mut spec = SyntheticSpec::new(a.words, a.seed);
    spec.ambiguity_rate = a.ambiguity;
    if a.no_dialect_rules {
        spec.dialect_rules.clear();
    }
    let corpus = generate_synthetic(&spec)?;
    corpus.write_to_dir(&a.out_dir, !a.no_gold)?;
    info!(
        "wrote {} words per variant ({} variant-B transcriptions) to {}",
        corpus.lexicon_a.len(),
        corpus.aligned_b.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn cmd_align(a: &AlignArgs) -> CliResult<()> {
    let inventory = PhonemeInventory::load(&a.inventory)?;
    let lexicon = load_lexicon(&a.lexicon, &inventory)?;
    let mut config = AlignConfig::default();
    if let Some(p) = a.null_penalty {
        config.null_penalty = p;
    }
    if let Some(n) = a.em_iters {
        config.em_iterations = n;
    }
    let (keep, dropped) = filter_alignable(&lexicon, &inventory);
    if !dropped.is_empty() {
        warn!("{} entries are longer than their spelling and were dropped", dropped.len());
    }
    let model = estimate_associations(&keep, &inventory, &config)?;
    let (aligned, failures) = align_corpus(&keep, &model, &inventory);
    info!("aligned {} transcriptions, {} failures", aligned.len(), failures.len());
    if let Some(path) = &a.report {
        let mut report = String::new();
        for e in &dropped {
            for t in &e.transcriptions {
                report.push_str(&format!("dropped\t{}\t{}\n", e.word, t.join(" ")));
            }
        }
        for f in &failures {
            report.push_str(&format!("failed\t{}\t{}\t{}\n", f.word, f.transcription_index, f.reason));
        }
        for (pair, count) in suggest_compounds(&dropped, &inventory) {
            report.push_str(&format!("suggest\t{}\t{count}\n", pair.join(" ")));
        }
        emit(Some(path), &report)?;
    } else if !failures.is_empty() {
        warn!("{} transcriptions could not be aligned; use --report to list them", failures.len());
    }
    emit(a.out.as_deref(), &aligned_to_string(&aligned))
}

fn cmd_instances(a: &InstancesArgs) -> CliResult<()> {
    let aligned = load_aligned(&a.aligned)?;
    let schema = InstanceSchema::default();
    let instances: Vec<_> = aligned
        .iter()
        .enumerate()
        .flat_map(|(i, e)| window_instances(e, i, &schema))
        .collect();
    let mut buf = Vec::new();
    write_c45(&mut buf, &instances).map_err(|e| CliError::Internal(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn cmd_train(a: &TrainArgs) -> CliResult<()> {
    let config = a.learner_args.config()?;
    let aligned = load_aligned(&a.aligned)?;
    let schema = InstanceSchema::default();
    let instances: Vec<_> = aligned
        .iter()
        .enumerate()
        .flat_map(|(i, e)| window_instances(e, i, &schema))
        .collect();
    info!("training {} on {} instances", a.learner, instances.len());
    let model = train(a.learner, &instances, &schema, &config)?;
    model.save(&a.model)?;
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> CliResult<()> {
    let model = TrainedModel::load(&a.model)?;
    let schema = InstanceSchema::default();
    if model.width() != schema.width() {
        return Err(CliError::Data(format!(
            "{}: model has {} features, spelling windows have {}",
            a.model.display(),
            model.width(),
            schema.width()
        )));
    }
    let text = read_text(&a.input)?;
    let mut seen = std::collections::HashSet::new();
    let mut out = String::new();
    for line in text.lines() {
        let word = line.split('\t').next().unwrap_or("").trim();
        if word.is_empty() || word.starts_with('#') || !seen.insert(word.to_string()) {
            continue;
        }
        let phonemes = predict_word(&model, &g2pstack::lexicon::graphemes(word), &schema);
        out.push_str(&format!("{word}\t{}\n", phonemes.join(" ")));
    }
    emit(a.out.as_deref(), &out)
}

fn cmd_stack(a: &StackArgs) -> CliResult<()> {
    let load = |p: &Option<PathBuf>| p.as_deref().map(load_aligned).transpose();
    let data = match (load(&a.aligned_a)?, load(&a.aligned_b)?) {
        (Some(x), Some(y)) => StackingData::paired(&x, &y)?,
        (Some(x), None) => StackingData::single(&x, Variant::A),
        (None, Some(y)) => StackingData::single(&y, Variant::B),
        (None, None) => return Err(CliError::Usage("give --aligned-a, --aligned-b or both".into())),
    };
    let mut plan = StackingPlan::new(a.arch, a.target);
    plan.component = a.component;
    plan.combiner = a.combiner;
    plan.with_spelling = a.with_spelling;
    plan.inner_folds = a.inner_folds;
    plan.resubstitution = a.resubstitution;
    plan.learner_config = a.learner_args.config()?;
    if a.resubstitution {
        warn!("resubstitution combiner features: results are optimistic");
    }
    let folds = make_folds(&data.words, a.folds, a.seed)?;
    info!("{} on {} words, {} folds", a.arch, data.len(), a.folds);
    let outcome = run_plan(&plan, &data, &folds, a.jobs.unwrap_or(0))?;
    info!(
        "leakage audit: {} checks, {} violations, {} test overlaps; final classifier width {}",
        outcome.audit.checks, outcome.audit.violations, outcome.audit.test_overlaps, outcome.final_width
    );
    if outcome.audit.violations > 0 || outcome.audit.test_overlaps > 0 {
        return Err(CliError::Internal("leakage audit failed".into()));
    }
    if let Some(path) = &a.predictions {
        let mut text = String::new();
        for (word, p) in &outcome.predictions {
            text.push_str(&format!("{word}\t{}\n", p.join(" ")));
        }
        emit(Some(path), &text)?;
    }
    emit(a.out.as_deref(), &outcome.result.to_tsv())
}

fn cmd_tbedl_learn(a: &TbedlLearnArgs) -> CliResult<()> {
    let pairs = pair_aligned(&load_aligned(&a.aligned_a)?, &load_aligned(&a.aligned_b)?)?;
    let program = learn_tbedl(&pairs, &default_templates(), a.threshold)?;
    let before = overlap_report(&pairs, None)?;
    let after = overlap_report(&pairs, Some(&program))?;
    info!(
        "{} rules; phoneme overlap {:.4} -> {:.4}, word overlap {:.4} -> {:.4}",
        program.rules.len(),
        before.phoneme_overlap,
        after.phoneme_overlap,
        before.word_overlap,
        after.word_overlap
    );
    emit(a.out.as_deref(), &program.to_text())
}

fn cmd_tbedl_apply(a: &TbedlApplyArgs) -> CliResult<()> {
    let program = RuleProgram::load(&a.rules)?;
    let aligned = load_aligned(&a.aligned)?;
    let mut out = String::new();
    for e in &aligned {
        out.push_str(&format!("{}\t{}\n", e.word, apply_rules(&program, &e.phonemes).join(" ")));
    }
    emit(a.out.as_deref(), &out)
}

fn predictions_by_word(entries: &[AlignedEntry], path: &Path) -> CliResult<BTreeMap<String, Vec<String>>> {
    let mut map = BTreeMap::new();
    for e in entries {
        if map.insert(e.word.clone(), e.phonemes.clone()).is_some() {
            return Err(CliError::Data(format!(
                "{}: more than one prediction for '{}'",
                path.display(),
                e.word
            )));
        }
    }
    Ok(map)
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let gold = gold_from_aligned(&load_aligned(&a.gold)?);
    let predicted = predictions_by_word(&load_aligned(&a.predicted)?, &a.predicted)?;
    let score = score_predictions(&gold, &predicted)?;
    let table = if a.per_phoneme {
        Some(per_phoneme_errors(&gold, &predicted)?)
    } else {
        None
    };
    let text = if a.json {
        let mut v = serde_json::json!({
            "words": score.word_count,
            "phonemes": score.phoneme_count,
            "phoneme_accuracy": score.phoneme_accuracy,
            "word_accuracy": score.word_accuracy,
        });
        if let Some(t) = &table {
            let per: serde_json::Map<String, serde_json::Value> = t
                .iter()
                .map(|(p, (n, e))| (p.clone(), serde_json::json!({ "count": n, "errors": e })))
                .collect();
            v["per_phoneme"] = serde_json::Value::Object(per);
        }
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        s
    } else {
        let mut s = format!(
            "words\t{}\nphonemes\t{}\nphoneme_accuracy\t{:.6}\nword_accuracy\t{:.6}\n",
            score.word_count, score.phoneme_count, score.phoneme_accuracy, score.word_accuracy
        );
        if let Some(t) = &table {
            s.push_str("\nphoneme\tcount\terrors\terror_rate\n");
            for (p, (n, e)) in t {
                s.push_str(&format!("{p}\t{n}\t{e}\t{:.6}\n", *e as f64 / *n as f64));
            }
        }
        s
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_rules_print(a: &RulesPrintArgs) -> CliResult<()> {
    match TrainedModel::load(&a.model)? {
        TrainedModel::TreeRules(m) => emit(a.out.as_deref(), &m.render()),
        other => Err(CliError::Data(format!(
            "{}: a {} model has no production rules",
            a.model.display(),
            other.kind()
        ))),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Align(a) => cmd_align(a),
        Command::Instances(a) => cmd_instances(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Stack(StackCommand::Run(a)) => cmd_stack(a),
        Command::Tbedl(TbedlCommand::Learn(a)) => cmd_tbedl_learn(a),
        Command::Tbedl(TbedlCommand::Apply(a)) => cmd_tbedl_apply(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Rules(RulesCommand::Print(a)) => cmd_rules_print(a),
    }
}

/// Splices `--config` entries into argv right after the subcommand names,
/// skipping flags the command line already sets.
fn expand_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            config = Some(it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?);
        } else if let Some(v) = arg.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = read_text(Path::new(&path))?;
    let given = |flag: &str| {
        rest.iter()
            .any(|a| a == flag || a.strip_prefix(flag).is_some_and(|r| r.starts_with('=')))
    };
    let mut extra = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{path}:{}: expected key=value", i + 1)))?;
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        let value = value.trim();
        let flag = if key.len() == 1 { format!("-{key}") } else { format!("--{key}") };
        if key.is_empty() || given(&flag) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" | "1" | "yes" => extra.push(flag),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::Usage(format!("{path}:{}: '{key}' takes true or false", i + 1))),
            }
        } else {
            extra.push(flag);
            extra.push(value.to_string());
        }
    }
    let at = rest
        .iter()
        .skip(1)
        .position(|a| a.starts_with('-'))
        .map_or(rest.len(), |p| p + 1);
    rest.splice(at..at, extra);
    Ok(rest)
}

fn parse_args(raw: Vec<OsString>) -> Result<Cli, ExitCode> {
    let args: Vec<String> = match raw.into_iter().map(OsString::into_string).collect() {
        Ok(a) => a,
        Err(bad) => {
            eprintln!("error: argument is not valid UTF-8: {bad:?}");
            return Err(ExitCode::from(1));
        }
    };
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return Err(ExitCode::from(e.code()));
        }
    };
    Cli::try_parse_from(args).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match parse_args(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = std::panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|_| Err(CliError::Internal("internal error (panic)".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
