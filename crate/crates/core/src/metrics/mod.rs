//! The five bias measures: gender-subspace spectrum, direct bias, biased-word
//! clustering, bias-generalization classification and KNN stereotype
//! correlation.

mod kmeans;
mod knn;
mod subspace;
mod svm;

pub use kmeans::{cluster_accuracy, cluster_words, kmeans, ClusteringOutcome, KMeansParams, KMeansResult};
pub use knn::{default_k, knn_stereotype_correlation, KnnOutcome, ProfessionPoint};
pub use subspace::{
    direct_bias, gender_subspace, random_baseline_spectrum, random_spectrum, word_bias, GenderSubspace,
};
pub use svm::{svm_accuracy, svm_predict, svm_rbf_train, scale_gamma, SvmModel, SvmParams};
