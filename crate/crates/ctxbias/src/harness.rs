//! Repeat-and-aggregate audit runs.
//!
//! Repeat `r` of metric `m` draws all of its randomness from
//! `child_rng(seed, m, r)`, so repeats may run on any number of threads and
//! still produce the same report bytes.

use std::collections::BTreeMap;

use ctxbias_core::corpus::{Gender, WordList};
use ctxbias_core::metrics::{
    cluster_words, default_k, direct_bias, gender_subspace, knn_stereotype_correlation,
    random_spectrum, scale_gamma, svm_accuracy, svm_rbf_train, word_bias, GenderSubspace,
    KMeansParams, ProfessionPoint, SvmParams,
};
use ctxbias_core::seed::child_rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{BiasSource, ExperimentConfig, Metric};
use crate::error::{AuditError, Result};
use crate::report::{canonical_json, ProjectionRow, SummaryRow};
use crate::source::{Lists, Prepared, Token};

pub const ORIENTATION: &str = "g is the first principal component of the definitional difference vectors, \
     oriented so the mean male-minus-female difference projects positively; \
     a positive word bias is male-leaning";

const SEED_RULE: &str = "ChaCha8 seeded with FNV-1a 64 of \"seed:stream:repeat\"";

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub embedding_source: String,
    pub cemb_version: u32,
    pub dimension: usize,
    pub records: usize,
    pub seed: u64,
    pub seed_rule: String,
    pub config_digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionReport {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub orientation: String,
    pub differences: usize,
    pub explained_ratio: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub values: Vec<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub details: Value,
}

impl MetricReport {
    fn failed(reason: impl Into<String>, details: Value) -> Self {
        MetricReport {
            status: "failed".into(),
            reason: Some(reason.into()),
            values: Vec::new(),
            min: None,
            max: None,
            mean: None,
            details,
        }
    }

    fn ok(values: Vec<f64>, details: Value) -> Self {
        let (min, max, mean) = aggregate(&values);
        MetricReport {
            status: "ok".into(),
            reason: None,
            values,
            min: Some(min),
            max: Some(max),
            mean: Some(mean),
            details,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: Value,
    pub provenance: Provenance,
    pub gender_direction: Option<DirectionReport>,
    pub missing_words: BTreeMap<String, Vec<String>>,
    pub metrics: BTreeMap<String, MetricReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn any_failed(&self) -> bool {
        self.metrics.values().any(|m| !m.is_ok())
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        self.metrics
            .iter()
            .map(|(name, m)| SummaryRow {
                metric: name.clone(),
                stats: m.min.zip(m.max).zip(m.mean).map(|((a, b), c)| (a, b, c)),
            })
            .collect()
    }
}

/// Definitional spectrum and random baseline spectrum.
pub type Spectra = (Vec<f64>, Vec<f64>);

/// The report plus the plot series that are emitted as TSV.
#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub report: ExperimentReport,
    pub spectrum: Option<Spectra>,
    pub projection: Option<Vec<ProjectionRow>>,
}

/// `(min, max, mean)` of a nonempty series.
pub fn aggregate(values: &[f64]) -> (f64, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (min, max, mean.clamp(min, max))
}

/// Two-sided p-value of a Pearson correlation under the t-distribution with
/// `n - 2` degrees of freedom.
pub fn pearson_p_value(r: f64, n: usize) -> Option<f64> {
    if n < 3 || !r.is_finite() {
        return None;
    }
    let df = (n - 2) as f64;
    let r2 = (r * r).min(1.0);
    if r2 >= 1.0 {
        return Some(0.0);
    }
    let t2 = df * r2 / (1.0 - r2);
    Some(statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t2)))
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(canonical_json(&cfg.echo()).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    lists: &'a Lists,
    prep: &'a Prepared,
    direction: std::result::Result<&'a GenderSubspace, String>,
}

impl Ctx<'_> {
    fn g(&self) -> std::result::Result<&[f64], String> {
        self.direction
            .as_ref()
            .map(|d| d.g.as_slice())
            .map_err(|e| format!("no gender direction: {e}"))
    }

    fn rng(&self, metric: Metric, repeat: usize) -> impl Rng {
        child_rng(self.cfg.seed, metric.name(), repeat as u64)
    }

    /// Mean of up to `label_cap` sampled occurrence vectors of `word`.
    fn mean_vector(&self, word: &str) -> Option<Vec<f64>> {
        let toks = self.prep.tokens(word);
        if toks.is_empty() {
            return None;
        }
        let mut rng = child_rng(self.cfg.seed, &format!("bias:{word}"), 0);
        let picked = sample_tokens(toks, self.cfg.params.label_cap, &mut rng);
        let mut mean = vec![0.0; self.prep.dimension];
        for t in &picked {
            mean.iter_mut().zip(&t.vector).for_each(|(m, x)| *m += x);
        }
        let inv = 1.0 / picked.len() as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        Some(mean)
    }

    fn projection(&self, word: &str) -> Option<f64> {
        let g = self.direction.as_ref().ok()?;
        word_bias(&self.mean_vector(word)?, &g.g).ok()
    }

    /// Gender labels of the words that have embeddings: the list label, else
    /// the sign of the list score, else the sign of the projection onto g.
    fn labelled(&self, list: &WordList) -> (Vec<(String, Gender)>, Value) {
        let mut out = Vec::new();
        let mut sources: BTreeMap<&str, usize> = BTreeMap::new();
        let mut unlabelled = Vec::new();
        for e in list.entries() {
            if self.prep.tokens(&e.word).is_empty() {
                continue;
            }
            let from_sign = |s: f64| (s != 0.0).then_some(if s < 0.0 { Gender::Female } else { Gender::Male });
            let (label, source) = match (e.label, e.score.and_then(from_sign)) {
                (Some(l), _) => (Some(l), "list label"),
                (None, Some(l)) => (Some(l), "list score"),
                (None, None) => (self.projection(&e.word).and_then(from_sign), "embedding projection"),
            };
            match label {
                Some(l) => {
                    *sources.entry(source).or_default() += 1;
                    out.push((e.word.clone(), l));
                }
                None => unlabelled.push(e.word.clone()),
            }
        }
        (out, json!({ "label_sources": sources, "unlabelled": unlabelled }))
    }
}

fn sample_tokens<'t>(toks: &'t [Token], cap: usize, rng: &mut impl Rng) -> Vec<&'t Token> {
    if toks.len() <= cap {
        return toks.iter().collect();
    }
    let mut idx = rand::seq::index::sample(rng, toks.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| &toks[i]).collect()
}

fn pick<'t, T>(items: &'t [T], rng: &mut impl Rng) -> &'t T {
    &items[rng.random_range(0..items.len())]
}

struct RepeatOut {
    value: f64,
    extra: Value,
}

/// Runs every repeat, in parallel, returning them in repeat order. The first
/// failing repeat (by index) decides the error.
fn repeats<F>(n: usize, f: F) -> std::result::Result<Vec<RepeatOut>, String>
where
    F: Fn(usize) -> std::result::Result<RepeatOut, String> + Sync + Send,
{
    let all: Vec<_> = (0..n).into_par_iter().map(&f).collect();
    all.into_iter()
        .enumerate()
        .map(|(r, out)| out.map_err(|e| format!("repeat {r}: {e}")))
        .collect()
}

fn finish(outs: std::result::Result<Vec<RepeatOut>, String>, mut details: Value, extra_key: &str) -> MetricReport {
    match outs {
        Ok(outs) => {
            let values = outs.iter().map(|o| o.value).collect();
            details[extra_key] = Value::Array(outs.into_iter().map(|o| o.extra).collect());
            MetricReport::ok(values, details)
        }
        Err(e) => MetricReport::failed(e, details),
    }
}

fn gender_direction(cfg: &ExperimentConfig, lists: &Lists, prep: &Prepared) -> std::result::Result<GenderSubspace, String> {
    if lists.pairs.is_empty() {
        return Err("no definitional list configured".into());
    }
    let mut rng = child_rng(cfg.seed, "gender-direction", 0);
    let mut diffs = Vec::new();
    let mut reference = vec![0.0; prep.dimension];
    for pair in &lists.pairs {
        for (word, sign) in [(pair.female(), -1.0), (pair.male(), 1.0)] {
            let all = prep.diffs(word);
            if all.is_empty() {
                continue;
            }
            let mut idx: Vec<usize> = if all.len() <= cfg.params.subspace.cap {
                (0..all.len()).collect()
            } else {
                rand::seq::index::sample(&mut rng, all.len(), cfg.params.subspace.cap).into_vec()
            };
            idx.sort_unstable();
            for i in idx {
                reference.iter_mut().zip(&all[i]).for_each(|(r, x)| *r += sign * x);
                diffs.push(all[i].clone());
            }
        }
    }
    let k = cfg.params.subspace.components.min(prep.dimension).min(diffs.len());
    let sub = gender_subspace(&diffs, k.max(1)).map_err(|e| e.to_string())?;
    Ok(sub.oriented_by(&reference))
}

fn run_subspace(ctx: &Ctx) -> (MetricReport, Option<Spectra>) {
    let p = &ctx.cfg.params.subspace;
    let d = ctx.prep.dimension;
    let words: Vec<&str> = ctx
        .lists
        .pairs
        .iter()
        .flat_map(|p| [p.female(), p.male()])
        .filter(|w| !ctx.prep.diffs(w).is_empty())
        .collect();
    let mut rng = child_rng(ctx.cfg.seed, "random-baseline", 0);
    let n_random = p.random_samples.min(ctx.prep.pool().len());
    let random = random_spectrum(ctx.prep.pool(), n_random, p.components.min(d).min(n_random).max(1), &mut rng)
        .map(|r| r.explained_ratio)
        .map_err(|e| e.to_string());
    let details = json!({
        "statistic": "first explained variance ratio of one difference vector per definitional word",
        "components": p.components,
        "words": words.len(),
        "random_samples": n_random,
        "random_spectrum": random.as_ref().ok(),
        "random_spectrum_error": random.as_ref().err(),
    });
    if words.len() < 2 {
        return (MetricReport::failed("fewer than 2 definitional words have difference vectors", details), None);
    }
    let outs = repeats(ctx.cfg.repeats, |r| {
        let mut rng = ctx.rng(Metric::Subspace, r);
        let diffs: Vec<Vec<f64>> = words.iter().map(|w| pick(ctx.prep.diffs(w), &mut rng).clone()).collect();
        let k = p.components.min(d).min(diffs.len());
        let sub = gender_subspace(&diffs, k).map_err(|e| e.to_string())?;
        Ok(RepeatOut {
            value: sub.spectrum()[0],
            extra: json!(sub.spectrum()),
        })
    });
    let plot = match (&ctx.direction, &outs) {
        (Ok(dir), _) => Some(dir.spectrum().to_vec()),
        (Err(_), Ok(o)) => serde_json::from_value(o[0].extra.clone()).ok(),
        _ => None,
    }
    .map(|s| (s, random.clone().unwrap_or_default()));
    (finish(outs, details, "spectra"), plot)
}

fn run_direct_bias(ctx: &Ctx) -> MetricReport {
    let cap = ctx.cfg.params.direct_bias.cap;
    let Some(list) = &ctx.lists.professions else {
        return MetricReport::failed("no professions list configured", json!({}));
    };
    let mut filtered_out = Vec::new();
    let mut words: Vec<(&str, Vec<&Token>)> = Vec::new();
    for w in list.words() {
        let toks = ctx.prep.tokens(w);
        if toks.is_empty() {
            continue;
        }
        let kept: Vec<&Token> = toks.iter().filter(|t| ctx.prep.survives_filter(t)).collect();
        if kept.is_empty() {
            filtered_out.push(w);
        } else {
            words.push((w, kept));
        }
    }
    let details = json!({
        "cap": cap,
        "cooccurrence_filter": ctx.prep.can_filter(),
        "filtered_out": filtered_out,
        "professions": words.len(),
    });
    let g = match ctx.g() {
        Ok(g) => g,
        Err(e) => return MetricReport::failed(e, details),
    };
    if words.is_empty() {
        return MetricReport::failed("no profession occurrences survive", details);
    }
    let outs = repeats(ctx.cfg.repeats, |r| {
        let mut rng = ctx.rng(Metric::DirectBias, r);
        let mut vectors = Vec::new();
        for (_, kept) in &words {
            let idx: Vec<usize> = if kept.len() <= cap {
                (0..kept.len()).collect()
            } else {
                let mut i = rand::seq::index::sample(&mut rng, kept.len(), cap).into_vec();
                i.sort_unstable();
                i
            };
            vectors.extend(idx.into_iter().map(|i| kept[i].vector.clone()));
        }
        let value = direct_bias(&vectors, g).map_err(|e| e.to_string())?;
        Ok(RepeatOut {
            value,
            extra: json!(vectors.len()),
        })
    });
    finish(outs, details, "vectors")
}

fn run_cluster(ctx: &Ctx) -> (MetricReport, Option<Vec<ProjectionRow>>) {
    let p = &ctx.cfg.params.cluster;
    let Some(list) = &ctx.lists.biased else {
        return (MetricReport::failed("no biased list configured", json!({})), None);
    };
    let (words, mut details) = ctx.labelled(list);
    details["list"] = json!(list.name());
    details["words"] = json!(words.len());
    details["restarts"] = json!(p.restarts);
    details["max_iter"] = json!(p.max_iter);
    details["projection_method"] = json!("pca-2d");
    if let Err(e) = both_genders(&words) {
        return (MetricReport::failed(e, details), None);
    }
    let labels: Vec<Gender> = words.iter().map(|w| w.1).collect();
    let params = KMeansParams {
        k: 2,
        max_iter: p.max_iter,
        restarts: p.restarts,
    };
    let outs = repeats(ctx.cfg.repeats, |r| {
        let mut rng = ctx.rng(Metric::Cluster, r);
        let vectors: Vec<Vec<f64>> = words
            .iter()
            .map(|(w, _)| pick(ctx.prep.tokens(w), &mut rng).vector.clone())
            .collect();
        let out = cluster_words(&vectors, &labels, params, &mut rng).map_err(|e| e.to_string())?;
        let rows: Vec<ProjectionRow> = words
            .iter()
            .zip(&out.assignments)
            .zip(&out.projection_2d)
            .map(|(((w, l), &c), xy)| ProjectionRow {
                word: w.clone(),
                label: l.as_str().into(),
                cluster: c,
                x: xy[0],
                y: xy[1],
            })
            .collect();
        Ok(RepeatOut {
            value: out.accuracy,
            extra: json!({ "wcss": out.wcss, "projection": rows }),
        })
    });
    let projection = outs
        .as_ref()
        .ok()
        .and_then(|o| serde_json::from_value::<Vec<Value>>(o[0].extra["projection"].clone()).ok())
        .map(|rows| rows.into_iter().filter_map(projection_row).collect());
    (finish(outs, details, "runs"), projection)
}

fn projection_row(v: Value) -> Option<ProjectionRow> {
    Some(ProjectionRow {
        word: v["word"].as_str()?.into(),
        label: v["label"].as_str()?.into(),
        cluster: v["cluster"].as_u64()? as usize,
        x: v["x"].as_f64()?,
        y: v["y"].as_f64()?,
    })
}

fn both_genders(words: &[(String, Gender)]) -> std::result::Result<(), String> {
    let f = words.iter().filter(|w| w.1 == Gender::Female).count();
    if f == 0 || f == words.len() {
        return Err(format!(
            "need words of both genders, found {f} female and {} male",
            words.len() - f
        ));
    }
    Ok(())
}

/// Train/test sizes: as configured when enough words exist, otherwise the
/// available words split in the configured proportion.
pub fn split_sizes(n: usize, train: usize, test: usize) -> (usize, usize) {
    if n >= train + test {
        return (train, test);
    }
    let tr = ((n as f64 * train as f64 / (train + test) as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    (tr, n - tr)
}

fn run_classify(ctx: &Ctx) -> MetricReport {
    let p = &ctx.cfg.params.classify;
    let Some(list) = ctx.lists.extended_biased.as_ref().or(ctx.lists.biased.as_ref()) else {
        return MetricReport::failed("no extended_biased or biased list configured", json!({}));
    };
    let (words, mut details) = ctx.labelled(list);
    let (n_train, n_test) = split_sizes(words.len(), p.train, p.test);
    details["list"] = json!(list.name());
    details["words"] = json!(words.len());
    details["train"] = json!(n_train);
    details["test"] = json!(n_test);
    details["c"] = json!(p.c);
    details["tol"] = json!(p.tol);
    details["gamma_rule"] = json!(if p.gamma.is_some() { "fixed" } else { "1 / (d * variance of training features)" });
    details["labels"] = json!("male +1, female -1");
    if let Err(e) = both_genders(&words) {
        return MetricReport::failed(e, details);
    }
    if n_test == 0 {
        return MetricReport::failed("too few words to hold out a test set", details);
    }
    let outs = repeats(ctx.cfg.repeats, |r| {
        let mut rng = ctx.rng(Metric::Classify, r);
        let vectors: Vec<Vec<f64>> = words
            .iter()
            .map(|(w, _)| pick(ctx.prep.tokens(w), &mut rng).vector.clone())
            .collect();
        let mut order: Vec<usize> = (0..words.len()).collect();
        order.shuffle(&mut rng);
        let y = |i: usize| if words[i].1 == Gender::Male { 1.0 } else { -1.0 };
        let (tr, te) = order[..n_train + n_test].split_at(n_train);
        let xtr: Vec<Vec<f64>> = tr.iter().map(|&i| vectors[i].clone()).collect();
        let ytr: Vec<f64> = tr.iter().map(|&i| y(i)).collect();
        let xte: Vec<Vec<f64>> = te.iter().map(|&i| vectors[i].clone()).collect();
        let yte: Vec<f64> = te.iter().map(|&i| y(i)).collect();
        let gamma = p.gamma.unwrap_or_else(|| scale_gamma(&xtr));
        let params = SvmParams {
            c: p.c,
            gamma,
            tol: p.tol,
        };
        let model = svm_rbf_train(&xtr, &ytr, params).map_err(|e| e.to_string())?;
        let acc = svm_accuracy(&model, &xte, &yte).map_err(|e| e.to_string())?;
        Ok(RepeatOut {
            value: acc,
            extra: json!({
                "gamma": gamma,
                "support_vectors": model.support_vectors.len(),
                "converged": model.converged,
            }),
        })
    });
    finish(outs, details, "runs")
}

fn run_knn(ctx: &Ctx) -> MetricReport {
    let p = &ctx.cfg.params.knn;
    let Some(list) = &ctx.lists.professions else {
        return MetricReport::failed("no professions list configured", json!({}));
    };
    let mut scored: Vec<(&str, f64)> = Vec::new();
    let mut sources: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unscored = Vec::new();
    for e in list.entries() {
        if ctx.prep.tokens(&e.word).is_empty() {
            continue;
        }
        let (bias, source) = match (p.bias_source, e.score) {
            (BiasSource::List, Some(s)) => (Some(s), "list score"),
            _ => (ctx.projection(&e.word), "embedding projection"),
        };
        match bias {
            Some(b) => {
                *sources.entry(source).or_default() += 1;
                scored.push((&e.word, b));
            }
            None => unscored.push(e.word.as_str()),
        }
    }
    let k = p.k.unwrap_or_else(|| default_k(scored.len()));
    let mut details = json!({
        "k": k,
        "bias_source": p.bias_source,
        "bias_sources": sources,
        "unscored": unscored,
        "professions": scored.len(),
        "stereotype_rule": "female when the original bias is negative",
        "correlation": "pearson(female neighbour fraction, -original bias); positive means stereotype-consistent neighbourhoods",
        "p_value_test": "two-sided t-test with n - 2 degrees of freedom",
    });
    if k == 0 {
        return MetricReport::failed(format!("{} professions are too few for any k", scored.len()), details);
    }
    let outs = repeats(ctx.cfg.repeats, |r| {
        let mut rng = ctx.rng(Metric::Knn, r);
        let points: Vec<ProfessionPoint> = scored
            .iter()
            .map(|&(w, b)| ProfessionPoint {
                word: w.into(),
                vector: pick(ctx.prep.tokens(w), &mut rng).vector.clone(),
                stereotype: if b < 0.0 { Gender::Female } else { Gender::Male },
                original_bias: -b,
            })
            .collect();
        let out = knn_stereotype_correlation(&points, k).map_err(|e| e.to_string())?;
        let rows: Vec<Value> = out
            .words
            .iter()
            .zip(&out.female_fraction)
            .zip(&out.original_bias)
            .map(|((w, f), b)| json!({ "word": w, "female_fraction": f, "original_bias": -b }))
            .collect();
        Ok(RepeatOut {
            value: out.r,
            extra: json!({ "p_value": pearson_p_value(out.r, points.len()), "professions": rows }),
        })
    });
    if let Ok(o) = &outs {
        details["p_values"] = o.iter().map(|o| o.extra["p_value"].clone()).collect();
    }
    finish(outs, details, "runs")
}

/// Runs every selected metric. Setup problems (unreadable files, bad config)
/// are errors; a metric that cannot be computed is marked failed instead.
pub fn run_audit(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<AuditOutcome> {
    cfg.validate()?;
    let lists = Lists::load(cfg)?;
    let p = &cfg.params;
    let cap = p.subspace.cap.max(p.direct_bias.cap).max(p.label_cap);
    let prep = Prepared::load(cfg, &lists, cap)?;
    let pool = match threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| AuditError::Config(format!("thread pool: {e}")))?,
        ),
        None => None,
    };
    let body = || assemble(cfg, &lists, &prep);
    Ok(match pool {
        Some(pool) => pool.install(body),
        None => body(),
    })
}

fn assemble(cfg: &ExperimentConfig, lists: &Lists, prep: &Prepared) -> AuditOutcome {
    let direction = gender_direction(cfg, lists, prep);
    let ctx = Ctx {
        cfg,
        lists,
        prep,
        direction: direction.as_ref().map_err(Clone::clone),
    };
    let mut metrics = BTreeMap::new();
    let mut spectrum = None;
    let mut projection = None;
    let mut selected = cfg.metrics.clone();
    selected.sort();
    selected.dedup();
    for m in selected {
        log::info!("running {m}");
        let report = match m {
            Metric::Subspace => {
                let (r, s) = run_subspace(&ctx);
                spectrum = s;
                r
            }
            Metric::DirectBias => run_direct_bias(&ctx),
            Metric::Cluster => {
                let (r, p) = run_cluster(&ctx);
                projection = p;
                r
            }
            Metric::Classify => run_classify(&ctx),
            Metric::Knn => run_knn(&ctx),
        };
        if let Some(reason) = &report.reason {
            log::warn!("{m} failed: {reason}");
        }
        metrics.insert(m.name().to_string(), report);
    }
    let gender_direction = (!lists.pairs.is_empty()).then(|| match &direction {
        Ok(d) => DirectionReport {
            status: "ok".into(),
            reason: None,
            orientation: ORIENTATION.into(),
            differences: lists
                .pairs
                .iter()
                .flat_map(|p| [p.female(), p.male()])
                .map(|w| prep.diffs(w).len().min(cfg.params.subspace.cap))
                .sum(),
            explained_ratio: d.spectrum().to_vec(),
        },
        Err(e) => DirectionReport {
            status: "failed".into(),
            reason: Some(e.clone()),
            orientation: ORIENTATION.into(),
            differences: 0,
            explained_ratio: Vec::new(),
        },
    });
    let report = ExperimentReport {
        config: cfg.echo(),
        provenance: Provenance {
            tool: concat!("ctxbias ", env!("CARGO_PKG_VERSION")).into(),
            embedding_source: prep.kind.name().into(),
            cemb_version: ctxbias_core::embformat::VERSION,
            dimension: prep.dimension,
            records: prep.records,
            seed: cfg.seed,
            seed_rule: SEED_RULE.into(),
            config_digest: config_digest(cfg),
        },
        gender_direction,
        missing_words: prep.missing(lists),
        metrics,
    };
    AuditOutcome {
        report,
        spectrum,
        projection,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_bounds() {
        assert_eq!(aggregate(&[0.5]), (0.5, 0.5, 0.5));
        let (min, max, mean) = aggregate(&[0.2, 0.9, 0.4]);
        assert_eq!((min, max), (0.2, 0.9));
        assert!((mean - 0.5).abs() < 1e-12);
    }

    #[test]
    fn p_value_against_known_table() {
        // r = 0.5, n = 12: t = 1.8257, two-sided p = 0.09785
        let p = pearson_p_value(0.5, 12).unwrap();
        assert!((p - 0.097_8).abs() < 1e-3, "{p}");
        assert_eq!(pearson_p_value(1.0, 10), Some(0.0));
        assert_eq!(pearson_p_value(0.0, 10), Some(1.0));
        assert_eq!(pearson_p_value(0.3, 2), None);
    }

    #[test]
    fn split_scales_down() {
        assert_eq!(split_sizes(6000, 1000, 4000), (1000, 4000));
        assert_eq!(split_sizes(500, 1000, 4000), (100, 400));
        assert_eq!(split_sizes(3, 1000, 4000), (1, 2));
    }
}
