//! Audit configuration files.
//!
//! Relative paths are resolved against the directory holding the config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "subspace")]
    Subspace,
    #[serde(rename = "direct-bias")]
    DirectBias,
    #[serde(rename = "cluster")]
    Cluster,
    #[serde(rename = "classify")]
    Classify,
    #[serde(rename = "knn")]
    Knn,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Subspace,
        Metric::DirectBias,
        Metric::Cluster,
        Metric::Classify,
        Metric::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Subspace => "subspace",
            Metric::DirectBias => "direct-bias",
            Metric::Cluster => "cluster",
            Metric::Classify => "classify",
            Metric::Knn => "knn",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!("unknown metric `{s}` (expected subspace, direct-bias, cluster, classify or knn)")
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definitional: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub professions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biased: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extended_biased: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EmbeddingSpec {
    /// A CEMB1 file, contextual or context-free.
    Cemb { path: PathBuf },
    /// A word2vec text table; every word has one context-free vector.
    Word2vec { path: PathBuf },
    /// The toy contextual embedder over a word2vec text table.
    Toy {
        table: PathBuf,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_window")]
        window: usize,
    },
}

fn default_alpha() -> f64 {
    0.5
}

fn default_window() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubspaceParams {
    /// Principal components kept (capped by the data).
    pub components: usize,
    /// Occurrences sampled per definitional word.
    pub cap: usize,
    /// Vectors drawn for the random baseline spectrum.
    pub random_samples: usize,
}

impl Default for SubspaceParams {
    fn default() -> Self {
        SubspaceParams {
            components: 10,
            cap: 1000,
            random_samples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectBiasParams {
    /// Occurrences used per profession after the co-occurrence filter.
    pub cap: usize,
}

impl Default for DirectBiasParams {
    fn default() -> Self {
        DirectBiasParams { cap: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            restarts: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    pub train: usize,
    pub test: usize,
    pub c: f64,
    /// `None` selects `1 / (d * var(train))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub tol: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            train: 1000,
            test: 4000,
            c: 1.0,
            gamma: None,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasSource {
    /// The list score where present, else the embedding projection.
    List,
    /// Always the projection of the mean sampled vector onto g.
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    /// `None` selects 100, or `(n - 1) / 2` below 101 professions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub bias_source: BiasSource,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: None,
            bias_source: BiasSource::List,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub subspace: SubspaceParams,
    pub direct_bias: DirectBiasParams,
    pub cluster: ClusterParams,
    pub classify: ClassifyParams,
    pub knn: KnnParams,
    /// Occurrences averaged when a word's bias is read off the embedding.
    pub label_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default)]
    pub lists: ListPaths,
    pub embeddings: EmbeddingSpec,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_true() -> bool {
    true
}

fn default_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}

fn default_repeats() -> usize {
    10
}

fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| AuditError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        if cfg.params.label_cap == 0 {
            cfg.params.label_cap = 1000;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_json(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks parameter ranges; file existence is checked when loading.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AuditError::Config(m.to_string()));
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.metrics.is_empty() {
            return bad("no metrics selected");
        }
        let p = &self.params;
        if p.subspace.components == 0 || p.subspace.cap == 0 || p.subspace.random_samples < 2 {
            return bad("subspace components and cap must be positive, random_samples at least 2");
        }
        if p.direct_bias.cap == 0 || p.label_cap == 0 {
            return bad("sampling caps must be positive");
        }
        if p.cluster.restarts == 0 || p.cluster.max_iter == 0 {
            return bad("cluster restarts and max_iter must be positive");
        }
        let c = &p.classify;
        let positive = |x: f64| x > 0.0;
        if c.train == 0 || c.test == 0 || !positive(c.c) || !positive(c.tol) || c.gamma.is_some_and(|g| !positive(g)) {
            return bad("classify train/test sizes, C, tol and gamma must be positive");
        }
        if p.knn.k == Some(0) {
            return bad("knn k must be positive");
        }
        if let EmbeddingSpec::Toy { alpha, .. } = self.embeddings {
            if !(0.0..=1.0).contains(&alpha) {
                return bad("toy alpha must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// The config as echoed into reports: metrics sorted and deduplicated.
    pub fn echo(&self) -> serde_json::Value {
        let mut cfg = self.clone();
        cfg.metrics.sort();
        cfg.metrics.dedup();
        serde_json::to_value(cfg).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"embeddings": {"kind": "toy", "table": "t.txt"}}"#,
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(cfg.repeats, 10);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.metrics.len(), 5);
        assert_eq!(cfg.params.classify.train, 1000);
        assert_eq!(cfg.params.label_cap, 1000);
        assert_eq!(
            cfg.embeddings,
            EmbeddingSpec::Toy {
                table: "t.txt".into(),
                alpha: 0.5,
                window: 2
            }
        );
        assert_eq!(cfg.resolve(Path::new("t.txt")), PathBuf::from("/data/t.txt"));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        let r = ExperimentConfig::from_json(r#"{"embeddings": {"kind": "cemb", "path": "x"}, "bogus": 1}"#, Path::new("."));
        assert!(matches!(r, Err(AuditError::Config(_))));
        let cfg = ExperimentConfig::from_json(
            r#"{"embeddings": {"kind": "cemb", "path": "x"}, "repeats": 0}"#,
            Path::new("."),
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn metric_names() {
        assert_eq!("direct-bias".parse::<Metric>().unwrap(), Metric::DirectBias);
        assert!("bias".parse::<Metric>().is_err());
        let m: Vec<Metric> = serde_json::from_str(r#"["knn", "subspace"]"#).unwrap();
        assert_eq!(m, vec![Metric::Knn, Metric::Subspace]);
    }
}
