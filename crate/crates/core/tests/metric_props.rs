use ctxbias_core::corpus::Gender;
use ctxbias_core::linalg::dot;
use ctxbias_core::metrics::{
    cluster_accuracy, direct_bias, kmeans, knn_stereotype_correlation, svm_rbf_train, KMeansParams,
    ProfessionPoint, SvmParams,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nonzero_vectors(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, d), 1..30)
        .prop_filter("nonzero", |v| v.iter().all(|x| dot(x, x) > 1e-6))
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direct_bias_rescale_and_orientation(
        v in nonzero_vectors(4),
        g in prop::collection::vec(-1.0..1.0f64, 4),
        scales in prop::collection::vec(0.01..100.0f64, 30),
    ) {
        prop_assume!(dot(&g, &g) > 1e-3);
        let g = unit(&g);
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let scaled: Vec<Vec<f64>> = v
            .iter()
            .zip(&scales)
            .map(|(x, s)| x.iter().map(|y| y * s).collect())
            .collect();
        let b = direct_bias(&v, &g).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!((b - direct_bias(&v, &neg).unwrap()).abs() < 1e-12);
        prop_assert!((b - direct_bias(&scaled, &g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn cluster_accuracy_range_and_symmetry(pairs in prop::collection::vec((0usize..2, any::<bool>()), 2..60)) {
        let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let l: Vec<Gender> = pairs.iter().map(|p| if p.1 { Gender::Female } else { Gender::Male }).collect();
        let acc = cluster_accuracy(&a, &l).unwrap();
        prop_assert!((0.5..=1.0).contains(&acc));
        let flipped: Vec<usize> = a.iter().map(|x| 1 - x).collect();
        prop_assert_eq!(acc, cluster_accuracy(&flipped, &l).unwrap());
    }

    #[test]
    fn kmeans_assignments_are_nearest_centroid(
        pts in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 2), 3..40),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = kmeans(&pts, KMeansParams::default(), &mut rng).unwrap();
        let sq = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
        let mut wcss = 0.0;
        for (p, &c) in pts.iter().zip(&r.assignments) {
            let own = sq(p, &r.centroids[c]);
            wcss += own;
            for other in &r.centroids {
                prop_assert!(own <= sq(p, other) + 1e-9);
            }
        }
        prop_assert!((wcss - r.wcss).abs() < 1e-6 * wcss.max(1.0));
    }

    #[test]
    fn knn_fractions_invariant_to_global_rescale(
        vecs in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 3), 6..20),
        labels in prop::collection::vec(any::<bool>(), 20),
        c in 0.01..100.0f64,
    ) {
        prop_assume!(vecs.iter().all(|x| dot(x, x) > 1e-4));
        let mk = |scale: f64| -> Vec<ProfessionPoint> {
            vecs.iter()
                .enumerate()
                .map(|(i, v)| ProfessionPoint {
                    word: format!("p{i:03}"),
                    vector: v.iter().map(|x| x * scale).collect(),
                    stereotype: if labels[i] { Gender::Female } else { Gender::Male },
                    original_bias: i as f64,
                })
                .collect()
        };
        let k = (vecs.len() - 1) / 2;
        match (knn_stereotype_correlation(&mk(1.0), k), knn_stereotype_correlation(&mk(c), k)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.female_fraction, b.female_fraction),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn svm_dual_feasible(
        pts in prop::collection::vec((prop::collection::vec(-3.0..3.0f64, 2), any::<bool>()), 4..30),
        c in 0.1..10.0f64,
    ) {
        let x: Vec<Vec<f64>> = pts.iter().map(|p| p.0.clone()).collect();
        let y: Vec<f64> = pts.iter().map(|p| if p.1 { 1.0 } else { -1.0 }).collect();
        prop_assume!(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0));
        let m = svm_rbf_train(&x, &y, SvmParams { c, gamma: 0.5, tol: 1e-3 }).unwrap();
        let balance: f64 = m.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        prop_assert!(balance.abs() < 1e-9 * c * x.len() as f64);
        prop_assert!(m.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
    }
}
