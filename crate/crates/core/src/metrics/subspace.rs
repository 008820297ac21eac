use alloc::vec::Vec;

use rand::Rng;

use crate::embformat::EmbeddingStore;
use crate::error::{Error, Result};
use crate::linalg::{cosine, dot, norm, pca, PcaResult};

/// Principal directions of definitional difference vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderSubspace {
    pub pca: PcaResult,
    /// The gender direction, a unit vector.
    pub g: Vec<f64>,
}

impl GenderSubspace {
    /// Flips `g` (and the first component) so that `reference` projects
    /// positively onto it. Conventionally `reference` is the mean
    /// male-minus-female difference.
    pub fn oriented_by(mut self, reference: &[f64]) -> Self {
        if dot(&self.g, reference) < 0.0 {
            self.g.iter_mut().for_each(|x| *x = -*x);
            if let Some(c) = self.pca.components.first_mut() {
                c.iter_mut().for_each(|x| *x = -*x);
            }
        }
        self
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.pca.explained_ratio
    }
}

/// PCA over difference vectors; `g` is the first component.
pub fn gender_subspace(diff_vectors: &[Vec<f64>], k: usize) -> Result<GenderSubspace> {
    if diff_vectors.len() < 2 {
        return Err(Error::InsufficientData(
            "gender subspace needs at least 2 difference vectors".into(),
        ));
    }
    let pca = pca(diff_vectors, k)?;
    let g = pca.components[0].clone();
    Ok(GenderSubspace { pca, g })
}

/// Spectrum of `n` vectors drawn uniformly without replacement from `pool`.
pub fn random_spectrum<R: Rng + ?Sized>(
    pool: &[Vec<f64>],
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<PcaResult> {
    if n > pool.len() {
        return Err(Error::InsufficientData(alloc::format!(
            "requested {n} random vectors from a pool of {}",
            pool.len()
        )));
    }
    let picks = rand::seq::index::sample(rng, pool.len(), n);
    let mut idx = picks.into_vec();
    idx.sort_unstable();
    let sample: Vec<Vec<f64>> = idx.into_iter().map(|i| pool[i].clone()).collect();
    pca(&sample, k)
}

/// Spectrum of `n` uniformly sampled store records, without differencing.
pub fn random_baseline_spectrum<R: Rng + ?Sized>(
    store: &EmbeddingStore,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<PcaResult> {
    if n > store.len() {
        return Err(Error::InsufficientData(alloc::format!(
            "requested {n} random vectors from a store of {}",
            store.len()
        )));
    }
    let mut idx = rand::seq::index::sample(rng, store.len(), n).into_vec();
    idx.sort_unstable();
    let sample: Vec<Vec<f64>> = idx.into_iter().map(|i| store.records()[i].to_f64()).collect();
    pca(&sample, k)
}

/// Mean absolute cosine between each vector and `g`.
pub fn direct_bias(word_vectors: &[Vec<f64>], g: &[f64]) -> Result<f64> {
    if word_vectors.is_empty() {
        return Err(Error::Empty);
    }
    let mut sum = 0.0;
    for w in word_vectors {
        sum += cosine(w, g)?.abs();
    }
    Ok(sum / word_vectors.len() as f64)
}

/// Signed scalar projection onto the gender direction.
pub fn word_bias(vector: &[f64], g: &[f64]) -> Result<f64> {
    if vector.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: vector.len(),
        });
    }
    if norm(g) == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(dot(vector, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn axis_aligned_differences() {
        let mut diffs = vec![vec![2.0, 0.0, 0.0]; 5];
        diffs.push(vec![0.0, 0.0, 0.0]);
        let s = gender_subspace(&diffs, 3).unwrap();
        assert_eq!(s.g, vec![1.0, 0.0, 0.0]);
        assert!((s.spectrum()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_differences_are_degenerate() {
        let diffs = vec![vec![2.0, 1.0]; 4];
        assert_eq!(gender_subspace(&diffs, 1), Err(Error::Degenerate));
    }

    #[test]
    fn noisy_axis_matches_analytic_split() {
        // b * e1 with b = ±1, plus isotropic noise of std 0.1 on the other axes
        let d = 6;
        let n = 4000;
        let sigma = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let diffs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v: Vec<f64> = (0..d)
                    .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                    .collect();
                v[0] = if i % 2 == 0 { 1.0 } else { -1.0 };
                v
            })
            .collect();
        let s = gender_subspace(&diffs, d).unwrap();
        let analytic = 1.0 / (1.0 + (d - 1) as f64 * sigma * sigma);
        assert!((s.spectrum()[0] - analytic).abs() < 0.02);
        assert!(s.g[0].abs() > 0.99);
    }

    #[test]
    fn orientation_flips_toward_reference() {
        let diffs = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.5, 0.1]];
        let s = gender_subspace(&diffs, 1).unwrap().oriented_by(&[-1.0, 0.0]);
        assert!(s.g[0] < 0.0);
        assert_eq!(s.g, s.pca.components[0]);
    }

    #[test]
    fn direct_bias_extremes() {
        let g = [1.0, 0.0, 0.0];
        let parallel = vec![vec![2.0, 0.0, 0.0], vec![-0.5, 0.0, 0.0]];
        assert!((direct_bias(&parallel, &g).unwrap() - 1.0).abs() < 1e-12);
        let orth = vec![vec![0.0, 1.0, 0.0], vec![0.0, 3.0, -4.0]];
        assert!(direct_bias(&orth, &g).unwrap().abs() < 1e-12);
        assert_eq!(direct_bias(&[], &g), Err(Error::Empty));
        assert_eq!(direct_bias(&[vec![0.0; 3]], &g), Err(Error::ZeroNorm));
    }

    #[test]
    fn word_bias_projection() {
        let g = [0.6, 0.8];
        assert!((word_bias(&g, &g).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(word_bias(&[-0.8, 0.6], &g).unwrap(), 0.0);
        // 3g + e_perp
        let w = [3.0 * 0.6 - 0.8, 3.0 * 0.8 + 0.6];
        assert!((word_bias(&w, &g).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_spectrum_errors() {
        let pool = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(random_spectrum(&pool, 2, 1, &mut rng), Err(Error::Degenerate));
        assert!(random_spectrum(&pool, 3, 1, &mut rng).is_err());
    }
}
