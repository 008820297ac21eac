//! Soft-margin C-SVC with an RBF kernel, trained by SMO.
//!
//! Working-set selection uses second-order information (the maximal-gain
//! pair), following the LIBSVM solver. Training stops once the maximal KKT
//! violation gap `max_{I_up} -y G - min_{I_low} -y G` drops below `tol`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Kernel matrices up to this many rows are precomputed in full.
const FULL_KERNEL_ROWS: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
}

impl SvmParams {
    pub const DEFAULT_C: f64 = 1.0;
    pub const DEFAULT_TOL: f64 = 1e-3;

    pub fn new(gamma: f64) -> Self {
        SvmParams {
            c: Self::DEFAULT_C,
            gamma,
            tol: Self::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    /// Dual variables for every training point, support vector or not.
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, coef)| coef * rbf(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn dimension(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::exp(-gamma * d2)
}

/// `1 / (d * var(X))`, the variance taken over every feature value.
pub fn scale_gamma(vectors: &[Vec<f64>]) -> f64 {
    let d = vectors.first().map_or(0, Vec::len);
    let count = (vectors.len() * d) as f64;
    if count == 0.0 {
        return 1.0;
    }
    let mean = vectors.iter().flatten().sum::<f64>() / count;
    let var = vectors.iter().flatten().map(|x| (x - mean) * (x - mean)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0
    }
}

enum Kernel<'a> {
    Full { n: usize, k: Vec<f64> },
    OnDemand { x: &'a [Vec<f64>], gamma: f64 },
}

impl Kernel<'_> {
    fn row(&self, i: usize, out: &mut [f64]) {
        match self {
            Kernel::Full { n, k } => out.copy_from_slice(&k[i * n..(i + 1) * n]),
            Kernel::OnDemand { x, gamma } => {
                for (o, xt) in out.iter_mut().zip(x.iter()) {
                    *o = rbf(&x[i], xt, *gamma);
                }
            }
        }
    }
}

fn validate(x: &[Vec<f64>], y: &[f64], params: &SvmParams) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let positive = |x: f64| x > 0.0;
    if !positive(params.c) || !positive(params.gamma) || !positive(params.tol) {
        return Err(Error::InvalidParameter("C, gamma and tol must be positive".into()));
    }
    let d = x.first().ok_or(Error::Empty)?.len();
    for (row, v) in x.iter().enumerate() {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        if v.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite { row });
        }
    }
    if y.iter().any(|&l| l != 1.0 && l != -1.0) {
        return Err(Error::InvalidParameter("labels must be -1 or +1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::InsufficientData("both classes must be present".into()));
    }
    Ok(())
}

/// Trains an RBF C-SVC on labels in `{-1, +1}`.
pub fn svm_rbf_train(x: &[Vec<f64>], y: &[f64], params: SvmParams) -> Result<SvmModel> {
    validate(x, y, &params)?;
    let n = x.len();
    let c = params.c;
    let kernel = if n <= FULL_KERNEL_ROWS {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = 1.0;
            for j in i + 1..n {
                let v = rbf(&x[i], &x[j], params.gamma);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        Kernel::Full { n, k }
    } else {
        Kernel::OnDemand { x, gamma: params.gamma }
    };

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut row_i = vec![0.0; n];
    let mut row_j = vec![0.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let in_up = |a: f64, yl: f64| (yl > 0.0 && a < c) || (yl < 0.0 && a > 0.0);
    let in_low = |a: f64, yl: f64| (yl > 0.0 && a > 0.0) || (yl < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // first index: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if in_low(alpha[t], y[t]) {
                gmin = gmin.min(-y[t] * grad[t]);
            }
        }
        if i == usize::MAX || gmax - gmin < params.tol {
            converged = true;
            break;
        }
        kernel.row(i, &mut row_i);
        // second index: largest objective decrease among violating pairs
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let mut a = 2.0 - 2.0 * row_i[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -(b * b) / a;
                if gain < best {
                    best = gain;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;
        kernel.row(j, &mut row_j);

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = 2.0 - 2.0 * row_i[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * di + y[j] * row_j[t] * dj);
        }
    }

    let rho = compute_rho(&alpha, &grad, y, c);
    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(x[t].clone());
            dual_coef.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coef,
        bias: -rho,
        gamma: params.gamma,
        c,
        alpha,
        iterations,
        converged,
    })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

pub fn svm_predict(model: &SvmModel, vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = model.dimension();
    vectors
        .iter()
        .map(|v| {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            Ok(if model.decision(v) >= 0.0 { 1.0 } else { -1.0 })
        })
        .collect()
}

/// Fraction of `labels` matched by the model's sign predictions.
pub fn svm_accuracy(model: &SvmModel, vectors: &[Vec<f64>], labels: &[f64]) -> Result<f64> {
    if vectors.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: vectors.len(),
        });
    }
    if vectors.is_empty() {
        return Err(Error::Empty);
    }
    let pred = svm_predict(model, vectors)?;
    let hits = pred.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}
