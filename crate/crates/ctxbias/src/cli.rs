//! Command-line interface.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ctxbias_core::corpus::WordList;
use ctxbias_core::planted::{make_planted_store, PlantedConfig};
use serde_json::json;

use crate::config::{ExperimentConfig, Metric};
use crate::error::{exit, AuditError, Result};
use crate::harness::{config_digest, run_audit};
use crate::report::{projection_tsv, spectrum_tsv, summary_csv};
use crate::{io, lists, manifest};

const DEFAULTS: &str = "\
Defaults (all overridable in the config file):
  repeats 10, seed 42
  subspace: 10 components, up to 1000 occurrences per definitional word,
            1000 vectors for the random baseline spectrum
  direct-bias: up to 1000 occurrences per profession, sentences that hold a
            definitional word are dropped when a corpus is configured
  cluster: k-means with k = 2, k-means++ seeding, 10 restarts, 300 iterations;
            2-D PCA projection for plotting
  classify: RBF SVM, 1000 train / 4000 test words (scaled 1:4 when fewer
            exist), C = 1.0, gamma = 1 / (d * variance of training features),
            tol = 1e-3
  knn: k = 100 with at least 101 professions, else (n - 1) / 2; original bias
            from the list score, else the projection of the mean vector on g
  toy provider: alpha = 0.5, window = 2
Exit codes: 0 success, 1 metric failure, 2 usage or config error,
3 I/O or format error.";

#[derive(Debug, Parser)]
#[command(name = "ctxbias", version, about = "Gender-bias audits of contextualized word embeddings", after_help = DEFAULTS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample corpus occurrences of listed words into a JSON-lines manifest
    Extract(ExtractArgs),
    /// Write a planted synthetic store, word lists and an audit config
    Synth(SynthArgs),
    /// Gender-subspace spectrum of definitional difference vectors
    Subspace(RunArgs),
    /// Direct bias of profession occurrences
    #[command(name = "direct-bias")]
    DirectBias(RunArgs),
    /// Two-means clustering of the biased list
    Cluster(RunArgs),
    /// RBF-SVM generalization over the extended biased list
    Classify(RunArgs),
    /// Nearest-neighbour stereotype correlation over professions
    Knn(RunArgs),
    /// Run the selected metrics (all by default)
    #[command(after_help = DEFAULTS)]
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed, overriding the config
    #[arg(long)]
    pub seed: Option<u64>,
    /// Repeat count, overriding the config
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Worker threads for repeats; the report does not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a metric,min,max,mean CSV summary
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Directory for spectrum.tsv and projection.tsv
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated subset of subspace, direct-bias, cluster, classify, knn
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// One sentence per line, whitespace tokenized
    #[arg(long)]
    pub corpus: PathBuf,
    /// Definitional pairs: [[female, male], ...]
    #[arg(long)]
    pub definitional: Option<PathBuf>,
    #[arg(long)]
    pub professions: Option<PathBuf>,
    #[arg(long)]
    pub biased: Option<PathBuf>,
    #[arg(long)]
    pub extended_biased: Option<PathBuf>,
    /// Occurrences sampled per word
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Keep the corpus case as is
    #[arg(long)]
    pub keep_case: bool,
    /// Manifest output path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Planted words, alternating female and male
    #[arg(long, default_value_t = 500)]
    pub words: usize,
    /// Definitional pairs
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Magnitude of the planted component along e1
    #[arg(long, default_value_t = 1.0)]
    pub bias: f64,
    /// Standard deviation of the isotropic Gaussian noise
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Extract(a) => extract(a),
        Command::Synth(a) => synth(a),
        Command::Subspace(a) => audit(a, Some(vec![Metric::Subspace])),
        Command::DirectBias(a) => audit(a, Some(vec![Metric::DirectBias])),
        Command::Cluster(a) => audit(a, Some(vec![Metric::Cluster])),
        Command::Classify(a) => audit(a, Some(vec![Metric::Classify])),
        Command::Knn(a) => audit(a, Some(vec![Metric::Knn])),
        Command::Audit(a) => audit(a.run, a.metrics),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| AuditError::io(path, e))
}

fn audit(args: RunArgs, metrics: Option<Vec<Metric>>) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    if let Some(m) = metrics {
        cfg.metrics = m;
    }
    if args.threads == Some(0) {
        return Err(AuditError::Config("--threads must be at least 1".into()));
    }
    log::info!("seed {} config digest {}", cfg.seed, config_digest(&cfg));
    let outcome = run_audit(&cfg, args.threads)?;
    let report = &outcome.report;
    let json = report.to_json();
    match &args.out {
        Some(p) => write(p, &json)?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.csv {
        write(p, &summary_csv(&report.summary()))?;
    }
    if let Some(dir) = &args.plot_dir {
        fs::create_dir_all(dir).map_err(|e| AuditError::io(dir, e))?;
        if let Some((s, r)) = &outcome.spectrum {
            write(&dir.join("spectrum.tsv"), &spectrum_tsv(s, r))?;
        }
        if let Some(rows) = &outcome.projection {
            write(&dir.join("projection.tsv"), &projection_tsv(rows))?;
        }
    }
    for (name, words) in &report.missing_words {
        log::warn!("{name}: {} words without embeddings", words.len());
    }
    Ok(if report.any_failed() {
        exit::METRIC_FAILURE
    } else {
        exit::SUCCESS
    })
}

fn extract(a: ExtractArgs) -> Result<i32> {
    if a.cap == 0 {
        return Err(AuditError::Config("--cap must be at least 1".into()));
    }
    log::info!("seed {}", a.seed);
    let lowercase = !a.keep_case;
    let corpus = io::load_corpus(&a.corpus, lowercase)?;
    let pairs = match &a.definitional {
        Some(p) => lists::load_pairs(p)?,
        None => Vec::new(),
    };
    let mut word_lists: Vec<WordList> = Vec::new();
    for (path, name) in [
        (&a.professions, "professions"),
        (&a.biased, "biased"),
        (&a.extended_biased, "extended_biased"),
    ] {
        if let Some(p) = path {
            word_lists.push(lists::load_word_list(p, name, lowercase)?);
        }
    }
    let ex = manifest::extract(&corpus, &pairs, &word_lists, a.cap, a.seed)?;
    manifest::write_manifest(&ex.records, &a.out)?;
    for (name, words) in &ex.missing {
        log::warn!("{name}: {} words absent from the corpus: {}", words.len(), words.join(" "));
    }
    if ex.records.is_empty() {
        log::warn!("manifest is empty");
    }
    for (name, n) in &ex.counts {
        println!("{name}\t{n}");
    }
    println!("records\t{}", ex.records.len());
    Ok(exit::SUCCESS)
}

fn synth(a: SynthArgs) -> Result<i32> {
    if !(a.bias.is_finite() && a.noise.is_finite() && a.noise >= 0.0) || a.words < 2 || a.pairs == 0 {
        return Err(AuditError::Config(
            "--words must be at least 2, --pairs positive, --bias finite and --noise finite and non-negative".into(),
        ));
    }
    log::info!("seed {}", a.seed);
    let planted = make_planted_store(PlantedConfig {
        n_words: a.words,
        n_pairs: a.pairs,
        dimension: a.dim,
        bias_scale: a.bias,
        noise_scale: a.noise,
        seed: a.seed,
    })
    .map_err(|e| AuditError::Config(e.to_string()))?;
    let dir = &a.out_dir;
    fs::create_dir_all(dir).map_err(|e| AuditError::io(dir, e))?;
    io::write_cemb(&planted.store, &dir.join("store.cemb"))?;
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("json") + "\n";
    write(&dir.join("definitional.json"), &pretty(&lists::pairs_to_json(&planted.pairs)))?;
    write(&dir.join("professions.json"), &pretty(&lists::scored_to_json(&planted.words)))?;
    let labelled = pretty(&lists::labelled_to_json(&planted.words));
    write(&dir.join("biased.json"), &labelled)?;
    write(&dir.join("extended_biased.json"), &labelled)?;
    let config = json!({
        "embeddings": { "kind": "cemb", "path": "store.cemb" },
        "lists": {
            "definitional": "definitional.json",
            "professions": "professions.json",
            "biased": "biased.json",
            "extended_biased": "extended_biased.json",
        },
        "repeats": 10,
        "seed": a.seed,
    });
    write(&dir.join("config.json"), &pretty(&config))?;
    println!("wrote {}", dir.display());
    Ok(exit::SUCCESS)
}
