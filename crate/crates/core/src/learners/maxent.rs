//! Conditional maximum-entropy classifier trained by Generalized Iterative
//! Scaling.
//!
//! Predicates are indicator functions on `(position, value, class)` triples
//! seen in training. A slack predicate tops every `(instance, class)` pair up
//! to exactly `C = width + 1` active units, which is what GIS requires.

use std::collections::BTreeMap;

use super::codec::{ClassTable, FeatureCodec, UNKNOWN};
use super::format::{self, Records};
use super::{read_classes, read_codec, write_classes, write_codec};
use crate::error::{Error, Result};
use crate::instances::{Instance, InstanceSchema};

#[derive(Debug, Clone)]
pub struct MaxEntModel {
    codec: FeatureCodec,
    classes: ClassTable,
    /// `preds[position][value]` lists `(class, predicate id)`.
    preds: Vec<Vec<Vec<(u32, u32)>>>,
    lambda: Vec<f64>,
    slack: f64,
    iterations_run: usize,
    log_likelihood: Vec<f64>,
}

/// Deduplicated training rows. Predicate ids of one `(position, value)` are
/// contiguous, so row `r` activates the id ranges in
/// `spans[r * width..(r + 1) * width]`, whose classes are in `class_of`.
struct Rows {
    features: Vec<Vec<u32>>,
    counts: Vec<Vec<(u32, f64)>>,
    totals: Vec<f64>,
    spans: Vec<(u32, u32)>,
    class_of: Vec<u32>,
    width: usize,
    /// Slack units of every (row, class) pair, `n_classes` per row.
    idle: Vec<u8>,
    /// Dense `(position, value)` cell of each row feature, `width` per row.
    cells: Vec<u32>,
    /// Offset of each predicate in a dense `cell * n_classes + class` table.
    dense_of: Vec<u32>,
    n_cells: usize,
}

pub fn train_maxent_gis(
    instances: &[Instance],
    schema: &InstanceSchema,
    max_iterations: usize,
    tolerance: f64,
) -> Result<MaxEntModel> {
    if instances.is_empty() {
        return Err(Error::Training("maximum entropy training needs at least one instance".into()));
    }
    if max_iterations == 0 {
        return Err(Error::Argument("max_iterations must be at least 1".into()));
    }
    super::check_width(instances, schema)?;
    let classes = ClassTable::from_labels(instances.iter().map(|i| i.label.as_str()));
    let codec = FeatureCodec::from_rows(instances.iter().map(|i| i.features.as_slice()));
    let width = schema.width();

    let mut grouped: BTreeMap<Vec<u32>, BTreeMap<u32, u64>> = BTreeMap::new();
    for inst in instances {
        let c = classes.id(&inst.label).expect("label is in the table");
        *grouped
            .entry(codec.encode(&inst.features))
            .or_default()
            .entry(c)
            .or_insert(0) += 1;
    }
    let mut rows = Rows {
        features: Vec::with_capacity(grouped.len()),
        counts: Vec::with_capacity(grouped.len()),
        totals: Vec::with_capacity(grouped.len()),
        spans: Vec::new(),
        class_of: Vec::new(),
        width,
        idle: Vec::new(),
        cells: Vec::new(),
        dense_of: Vec::new(),
        n_cells: 0,
    };
    for (f, cs) in grouped {
        rows.features.push(f);
        rows.totals.push(cs.values().sum::<u64>() as f64);
        rows.counts.push(cs.into_iter().map(|(c, n)| (c, n as f64)).collect());
    }

    // predicate ids in (position, value, class) order
    let mut seen: BTreeMap<(usize, u32, u32), f64> = BTreeMap::new();
    for (f, cs) in rows.features.iter().zip(&rows.counts) {
        for (pos, &v) in f.iter().enumerate() {
            for &(c, n) in cs {
                *seen.entry((pos, v, c)).or_insert(0.0) += n;
            }
        }
    }
    let mut preds: Vec<Vec<Vec<(u32, u32)>>> = (0..width).map(|p| vec![Vec::new(); codec.n_values(p)]).collect();
    let mut empirical = Vec::with_capacity(seen.len());
    for (id, (&(pos, v, c), &n)) in seen.iter().enumerate() {
        preds[pos][v as usize].push((c, id as u32));
        empirical.push(n);
    }
    rows.class_of = seen.keys().map(|&(_, _, c)| c).collect();
    let n_classes = classes.len();
    let mut base = Vec::with_capacity(width);
    for p in 0..width {
        base.push(rows.n_cells as u32);
        rows.n_cells += codec.n_values(p);
    }
    rows.dense_of = seen
        .keys()
        .map(|&(pos, v, c)| (base[pos] + v) * n_classes as u32 + c)
        .collect();
    for f in &rows.features {
        let start = rows.idle.len();
        rows.idle.resize(start + n_classes, u8::try_from(width + 1).unwrap_or(u8::MAX));
        for (pos, &v) in f.iter().enumerate() {
            let list = &preds[pos][v as usize];
            rows.cells.push(base[pos] + v);
            rows.spans.push((list[0].1, list[0].1 + list.len() as u32));
            for &(c, _) in list {
                rows.idle[start + c as usize] -= 1;
            }
        }
    }
    let n_total = rows.totals.iter().sum::<f64>();
    // each training pair activates all `width` observed predicates, so the
    // slack fires once per instance
    let empirical_slack = n_total;

    let mut model = MaxEntModel {
        codec,
        classes,
        preds,
        lambda: vec![0.0; empirical.len()],
        slack: 0.0,
        iterations_run: 0,
        log_likelihood: Vec::new(),
    };
    let c_const = model.correction_constant() as f64;
    for _ in 0..max_iterations {
        let (expected, expected_slack, ll) = model.expectations(&rows);
        model.log_likelihood.push(ll);
        let mut max_delta: f64 = 0.0;
        for (i, l) in model.lambda.iter_mut().enumerate() {
            let d = (empirical[i] / expected[i]).ln() / c_const;
            *l += d;
            max_delta = max_delta.max(d.abs());
        }
        if expected_slack > 0.0 {
            let d = (empirical_slack / expected_slack).ln() / c_const;
            model.slack += d;
            max_delta = max_delta.max(d.abs());
        }
        model.iterations_run += 1;
        if max_delta < tolerance {
            break;
        }
    }
    let (_, _, ll) = model.expectations(&rows);
    model.log_likelihood.push(ll);
    Ok(model)
}

impl MaxEntModel {
    pub fn width(&self) -> usize {
        self.preds.len()
    }

    pub fn correction_constant(&self) -> usize {
        self.width() + 1
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn predicate_count(&self) -> usize {
        self.lambda.len()
    }

    /// Training log-likelihood before each update and after the last one.
    pub fn log_likelihood_history(&self) -> &[f64] {
        &self.log_likelihood
    }

    fn scores(&self, encoded: &[u32]) -> Vec<f64> {
        let n = self.classes.len();
        let c_const = self.correction_constant() as f64;
        let mut sum = vec![0.0; n];
        let mut active = vec![0u32; n];
        for (pos, &v) in encoded.iter().enumerate() {
            if v == UNKNOWN {
                continue;
            }
            for &(c, id) in &self.preds[pos][v as usize] {
                sum[c as usize] += self.lambda[id as usize];
                active[c as usize] += 1;
            }
        }
        for c in 0..n {
            sum[c] += self.slack * (c_const - active[c] as f64);
        }
        sum
    }

    fn posterior_encoded(&self, encoded: &[u32]) -> Vec<f64> {
        let s = self.scores(encoded);
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = s.iter().map(|x| (x - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }

    /// Class posterior for one feature vector, in class-symbol order.
    pub fn posterior(&self, features: &[String]) -> Vec<(String, f64)> {
        let p = self.posterior_encoded(&self.codec.encode(features));
        p.into_iter()
            .enumerate()
            .map(|(c, p)| (self.classes.symbol(c as u32).to_string(), p))
            .collect()
    }

    pub fn classify(&self, features: &[String]) -> &str {
        let p = self.posterior_encoded(&self.codec.encode(features));
        let c = self
            .classes
            .pick(p.into_iter().enumerate().map(|(c, p)| (c as u32, p)))
            .expect("at least one class");
        self.classes.symbol(c)
    }

    /// Expected predicate counts, expected slack count and log-likelihood
    /// under the current weights.
    fn expectations(&self, rows: &Rows) -> (Vec<f64>, f64, f64) {
        let c_const = self.correction_constant();
        let n_classes = self.classes.len();
        let mut expected = vec![0.0; rows.n_cells * n_classes];
        let mut slack = 0.0;
        let mut ll = 0.0;
        // unnormalised class scores as products of exp(weight); classes
        // without a predicate in a cell get factor 1
        let mut factor = vec![1.0; rows.n_cells * n_classes];
        for (l, &d) in self.lambda.iter().zip(&rows.dense_of) {
            factor[d as usize] = l.exp();
        }
        let slack_pow: Vec<f64> = (0..=c_const).map(|k| (self.slack * k as f64).exp()).collect();
        let mut score = vec![0.0; n_classes];
        for (r, cs) in rows.counts.iter().enumerate() {
            let spans = &rows.spans[r * rows.width..(r + 1) * rows.width];
            let cells = &rows.cells[r * rows.width..(r + 1) * rows.width];
            let idle = &rows.idle[r * n_classes..(r + 1) * n_classes];
            for (s, &k) in score.iter_mut().zip(idle) {
                *s = slack_pow[k as usize];
            }
            for &cell in cells {
                let at = cell as usize * n_classes;
                for (s, &f) in score.iter_mut().zip(&factor[at..at + n_classes]) {
                    *s *= f;
                }
            }
            let mut z: f64 = score.iter().sum();
            if !(z.is_finite() && z > f64::MIN_POSITIVE) {
                self.log_domain_scores(spans, &rows.class_of, &mut score, idle);
                z = 1.0;
            }
            let n = rows.totals[r];
            let mut row_slack = 0.0;
            for (s, &k) in score.iter_mut().zip(idle) {
                *s /= z;
                row_slack += *s * k as f64;
            }
            slack += n * row_slack;
            for &cell in cells {
                let at = cell as usize * n_classes;
                for (e, &s) in expected[at..at + n_classes].iter_mut().zip(&score) {
                    *e += n * s;
                }
            }
            for &(c, k) in cs {
                ll += k * score[c as usize].ln();
            }
        }
        let expected = rows.dense_of.iter().map(|&d| expected[d as usize]).collect();
        (expected, slack, ll)
    }

    /// Normalised class probabilities of one row, computed with log-sum-exp.
    fn log_domain_scores(&self, spans: &[(u32, u32)], class_of: &[u32], score: &mut [f64], idle: &[u8]) {
        for (s, &k) in score.iter_mut().zip(idle) {
            *s = self.slack * k as f64;
        }
        for &(lo, hi) in spans {
            for id in lo as usize..hi as usize {
                score[class_of[id] as usize] += self.lambda[id];
            }
        }
        let max = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for s in score.iter_mut() {
            *s = (*s - max).exp();
            z += *s;
        }
        score.iter_mut().for_each(|s| *s /= z);
    }

    /// Empirical and model-expected count of every predicate on `instances`,
    /// in predicate order.
    pub fn predicate_counts(&self, instances: &[Instance]) -> Vec<(f64, f64)> {
        let mut empirical = vec![0.0; self.lambda.len()];
        let mut expected = vec![0.0; self.lambda.len()];
        for inst in instances {
            let enc = self.codec.encode(&inst.features);
            let p = self.posterior_encoded(&enc);
            let label = self.classes.id(&inst.label);
            for (pos, &v) in enc.iter().enumerate() {
                if v == UNKNOWN {
                    continue;
                }
                for &(c, id) in &self.preds[pos][v as usize] {
                    expected[id as usize] += p[c as usize];
                    if Some(c) == label {
                        empirical[id as usize] += 1.0;
                    }
                }
            }
        }
        empirical.into_iter().zip(expected).collect()
    }

    pub(crate) fn write(&self, out: &mut String) {
        out.push_str(&format::header("maxent"));
        write_classes(out, &self.classes);
        write_codec(out, &self.codec);
        format::record(out, "iterations", &[&self.iterations_run.to_string()]);
        format::record(out, "slack", &[&self.slack.to_string()]);
        format::record(out, "predicates", &[&self.lambda.len().to_string()]);
        for (pos, by_value) in self.preds.iter().enumerate() {
            for (v, list) in by_value.iter().enumerate() {
                for &(c, id) in list {
                    format::record(
                        out,
                        "w",
                        &[
                            &pos.to_string(),
                            self.codec.symbol(pos, v as u32),
                            self.classes.symbol(c),
                            &self.lambda[id as usize].to_string(),
                        ],
                    );
                }
            }
        }
    }

    pub(crate) fn read(rec: &mut Records<'_>) -> Result<Self> {
        let classes = read_classes(rec)?;
        let codec = read_codec(rec)?;
        let iterations_run: usize = rec.expect_number("iterations")?;
        let slack: f64 = rec.expect_number("slack")?;
        let n: usize = rec.expect_number("predicates")?;
        let width = codec.width();
        let mut preds: Vec<Vec<Vec<(u32, u32)>>> = (0..width).map(|p| vec![Vec::new(); codec.n_values(p)]).collect();
        let mut lambda = Vec::with_capacity(n);
        for id in 0..n {
            let f = rec.expect("w")?;
            if f.len() != 4 {
                return Err(Error::ModelFormat("weight record needs 4 fields".into()));
            }
            let pos: usize = rec.number(f[0])?;
            if pos >= width {
                return Err(Error::ModelFormat("predicate position out of range".into()));
            }
            let v = codec.encode_value(pos, f[1]);
            let c = classes.id(f[2]);
            match (v, c) {
                (UNKNOWN, _) | (_, None) => {
                    return Err(Error::ModelFormat(format!("unknown value or class in '{}'", f.join(" "))))
                }
                (v, Some(c)) => preds[pos][v as usize].push((c, id as u32)),
            }
            lambda.push(rec.number(f[3])?);
        }
        rec.finish()?;
        Ok(MaxEntModel {
            codec,
            classes,
            preds,
            lambda,
            slack,
            iterations_run,
            log_likelihood: Vec::new(),
        })
    }
}
