//! Synthetic embedding stores with a known gender axis.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{DefinitionalPair, Gender, WordEntry, WordList};
use crate::embformat::{ContextualVector, EmbeddingStore};
use crate::error::{Error, Result};

pub const PLANTED_TAG: &str = "static";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub n_words: usize,
    pub n_pairs: usize,
    pub dimension: usize,
    pub bias_scale: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n_words: 500,
            n_pairs: 50,
            dimension: 16,
            bias_scale: 1.0,
            noise_scale: 0.5,
            seed: 42,
        }
    }
}

/// A planted store and the ground truth it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedStore {
    /// Context-free records for the listed words and both sides of every pair.
    pub store: EmbeddingStore,
    /// Planted words with their gender label and planted bias as score.
    pub words: WordList,
    pub pairs: Vec<DefinitionalPair>,
    /// The planted gender axis, `e1`.
    pub axis: Vec<f64>,
}

/// Builds vectors `b_w * e1 + noise_scale * z` with `z ~ N(0, I_d)`.
///
/// Words alternate female (`b_w = -bias_scale`) and male
/// (`b_w = +bias_scale`); pair members follow the same rule, so male minus
/// female points along `+e1`.
pub fn make_planted_store(config: PlantedConfig) -> Result<PlantedStore> {
    let d = config.dimension;
    if d < 2 {
        return Err(Error::InvalidParameter("planted stores need d >= 2".into()));
    }
    let non_negative = |x: f64| x >= 0.0;
    if !non_negative(config.bias_scale) || !non_negative(config.noise_scale) {
        return Err(Error::InvalidParameter("bias and noise scales must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut vector = |bias: f64| -> Vec<f32> {
        (0..d)
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let base = if i == 0 { bias } else { 0.0 };
                (base + config.noise_scale * z) as f32
            })
            .collect()
    };
    let record = |word: &str, values: Vec<f32>| ContextualVector {
        word: word.into(),
        sentence_id: -1,
        token_index: -1,
        tag: PLANTED_TAG.into(),
        values,
    };

    let mut store = EmbeddingStore::new(d)?;
    let mut entries = Vec::with_capacity(config.n_words);
    for i in 0..config.n_words {
        let (label, sign) = if i % 2 == 0 {
            (Gender::Female, -1.0)
        } else {
            (Gender::Male, 1.0)
        };
        let bias = sign * config.bias_scale;
        let word = format!("w{i:05}");
        store.push(record(&word, vector(bias)))?;
        entries.push(WordEntry {
            word,
            label: Some(label),
            score: Some(bias),
        });
    }
    let mut pairs = Vec::with_capacity(config.n_pairs);
    for p in 0..config.n_pairs {
        let pair = DefinitionalPair::new(format!("fdef{p:04}"), format!("mdef{p:04}"))?;
        store.push(record(pair.female(), vector(-config.bias_scale)))?;
        store.push(record(pair.male(), vector(config.bias_scale)))?;
        pairs.push(pair);
    }
    let mut axis = alloc::vec![0.0; d];
    axis[0] = 1.0;
    Ok(PlantedStore {
        store,
        words: WordList::new("planted", entries)?,
        pairs,
        axis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::gender_subspace;

    #[test]
    fn noiseless_store_recovers_axis() {
        let p = make_planted_store(PlantedConfig {
            noise_scale: 0.0,
            ..PlantedConfig::default()
        })
        .unwrap();
        let mut diffs = Vec::new();
        for pair in &p.pairs {
            let f = p.store.by_word(pair.female()).next().unwrap().to_f64();
            let m = p.store.by_word(pair.male()).next().unwrap().to_f64();
            let d: Vec<f64> = m.iter().zip(&f).map(|(a, b)| a - b).collect();
            diffs.push(d.iter().map(|x| -x).collect());
            diffs.push(d);
        }
        let s = gender_subspace(&diffs, 2).unwrap();
        assert_eq!(s.g[0].abs(), 1.0);
        assert!((s.spectrum()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_labelled() {
        let a = make_planted_store(PlantedConfig::default()).unwrap();
        let b = make_planted_store(PlantedConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.store.len(), 600);
        assert_eq!(a.words.entries()[0].label, Some(Gender::Female));
        assert_eq!(a.words.entries()[1].score, Some(1.0));
        assert!(make_planted_store(PlantedConfig { dimension: 1, ..PlantedConfig::default() }).is_err());
    }
}
