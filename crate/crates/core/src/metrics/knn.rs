use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::linalg::{cosine, pearson};

#[derive(Debug, Clone, PartialEq)]
pub struct ProfessionPoint {
    pub word: String,
    pub vector: Vec<f64>,
    pub stereotype: Gender,
    pub original_bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnOutcome {
    pub k: usize,
    /// Professions in lexicographic order; the other columns follow it.
    pub words: Vec<String>,
    /// Fraction of the k nearest neighbors carrying the female stereotype.
    pub female_fraction: Vec<f64>,
    pub original_bias: Vec<f64>,
    pub r: f64,
}

/// 100 when at least 101 professions are available, else `(n - 1) / 2`.
pub fn default_k(n: usize) -> usize {
    if n >= 101 {
        100
    } else {
        n.saturating_sub(1) / 2
    }
}

/// Correlates each profession's female-neighbor fraction with its original
/// bias. Neighbors are ranked by cosine similarity, ties broken by word.
pub fn knn_stereotype_correlation(points: &[ProfessionPoint], k: usize) -> Result<KnnOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if points.len() < k + 1 {
        return Err(Error::InsufficientData(alloc::format!(
            "{} professions, k = {k} needs at least {}",
            points.len(),
            k + 1
        )));
    }
    let mut order: Vec<&ProfessionPoint> = points.iter().collect();
    order.sort_by(|a, b| a.word.cmp(&b.word));
    if let Some(w) = order.windows(2).find(|w| w[0].word == w[1].word) {
        return Err(Error::InvalidParameter(alloc::format!(
            "duplicate profession `{}`",
            w[0].word
        )));
    }
    let n = order.len();
    let mut female_fraction = Vec::with_capacity(n);
    let mut sims: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for (i, p) in order.iter().enumerate() {
        sims.clear();
        for (j, q) in order.iter().enumerate() {
            if i != j {
                sims.push((cosine(&p.vector, &q.vector)?, j));
            }
        }
        // j indexes the sorted order, so comparing it breaks ties by word
        sims.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let female = sims[..k]
            .iter()
            .filter(|(_, j)| order[*j].stereotype == Gender::Female)
            .count();
        female_fraction.push(female as f64 / k as f64);
    }
    let original_bias: Vec<f64> = order.iter().map(|p| p.original_bias).collect();
    let r = pearson(&female_fraction, &original_bias)?;
    Ok(KnnOutcome {
        k,
        words: order.iter().map(|p| p.word.clone()).collect(),
        female_fraction,
        original_bias,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn point(word: String, vector: Vec<f64>, g: Gender, bias: f64) -> ProfessionPoint {
        ProfessionPoint {
            word,
            vector,
            stereotype: g,
            original_bias: bias,
        }
    }

    #[test]
    fn separated_groups_correlate_perfectly() {
        let mut pts = Vec::new();
        for i in 0..6 {
            let jitter = 0.01 * i as f64;
            pts.push(point(format!("f{i}"), vec![1.0, jitter], Gender::Female, 1.0));
            pts.push(point(format!("m{i}"), vec![-1.0, jitter], Gender::Male, -1.0));
        }
        let out = knn_stereotype_correlation(&pts, 3).unwrap();
        for (w, f) in out.words.iter().zip(&out.female_fraction) {
            let expected = if w.starts_with('f') { 1.0 } else { 0.0 };
            assert_eq!(*f, expected);
        }
        assert!((out.r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn default_k_rule() {
        assert_eq!(default_k(300), 100);
        assert_eq!(default_k(101), 100);
        assert_eq!(default_k(100), 49);
        assert_eq!(default_k(12), 5);
        assert_eq!(default_k(0), 0);
    }

    #[test]
    fn too_few_or_constant() {
        let pts = vec![
            point("a".into(), vec![1.0, 0.0], Gender::Female, 1.0),
            point("b".into(), vec![0.0, 1.0], Gender::Male, -1.0),
        ];
        assert!(matches!(
            knn_stereotype_correlation(&pts, 2),
            Err(Error::InsufficientData(_))
        ));
        // every neighbor female -> constant fractions
        let pts = vec![
            point("a".into(), vec![1.0, 0.0], Gender::Female, 1.0),
            point("b".into(), vec![0.0, 1.0], Gender::Female, -1.0),
            point("c".into(), vec![1.0, 1.0], Gender::Female, 0.5),
        ];
        assert_eq!(knn_stereotype_correlation(&pts, 1), Err(Error::ZeroVariance));
    }

    #[test]
    fn ties_break_by_word() {
        // b and c are equidistant from a; b wins the single slot
        let pts = vec![
            point("a".into(), vec![1.0, 0.0], Gender::Male, 0.0),
            point("c".into(), vec![0.0, 1.0], Gender::Male, 1.0),
            point("b".into(), vec![0.0, -1.0], Gender::Female, 2.0),
        ];
        let out = knn_stereotype_correlation(&pts, 1).unwrap();
        assert_eq!(out.words, vec!["a", "b", "c"]);
        assert_eq!(out.female_fraction[0], 1.0);
    }
}
