//! Dense kernels over `f64` vectors: centering, cosine, PCA and Pearson
//! correlation.
//!
//! The eigensolver is a cyclic Jacobi sweep, which is accurate and plenty
//! fast for the dimensions embeddings come in (d up to ~1024).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn check_uniform(vectors: &[Vec<f64>]) -> Result<usize> {
    let first = vectors.first().ok_or(Error::Empty)?;
    let d = first.len();
    if d == 0 {
        return Err(Error::Empty);
    }
    for (row, v) in vectors.iter().enumerate() {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row });
        }
    }
    Ok(d)
}

/// Subtracts the column mean from every vector.
pub fn mean_center(vectors: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let d = check_uniform(vectors)?;
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let centered = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    Ok((centered, mean))
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("pearson needs at least 2 points".into()));
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unit eigenvectors, `vectors[i]` pairs with `values[i]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Cyclic Jacobi eigensolver for a symmetric `n x n` matrix in row-major order.
///
/// Iterates until every off-diagonal entry is below `1e-12` times the
/// Frobenius norm of the input.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if matrix.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = libm::sqrt(a.iter().map(|x| x * x).sum::<f64>());
    let threshold = JACOBI_REL_TOL * frob;

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let mut max_off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                max_off = max_off.max(a[p * n + q].abs());
            }
        }
        if max_off < threshold || max_off == 0.0 {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < threshold * 1e-3 || apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        a[r * n + p] = np;
                        a[p * n + r] = np;
                        a[r * n + q] = nq;
                        a[q * n + r] = nq;
                    }
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&col| (0..n).map(|r| v[r * n + col]).collect())
        .collect();
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Principal components of a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Orthonormal directions, descending variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    /// Total variance of the centered cloud (trace of the covariance).
    pub total_variance: f64,
    pub mean: Vec<f64>,
}

impl PcaResult {
    /// Coordinates of `v` in the component basis, after centering.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.components.iter().map(|c| dot(c, &centered)).collect()
    }
}

/// PCA with covariance divisor `n`.
///
/// Each component is sign-normalized so its largest-magnitude entry is
/// positive. When `n < d` the `n x n` Gram matrix is decomposed instead of the
/// `d x d` covariance.
pub fn pca(vectors: &[Vec<f64>], k: usize) -> Result<PcaResult> {
    let d = check_uniform(vectors)?;
    let n = vectors.len();
    if n < 2 {
        return Err(Error::InsufficientData("pca needs at least 2 vectors".into()));
    }
    let max = n.min(d);
    if k == 0 || k > max {
        return Err(Error::ComponentCount { k, max });
    }
    let (centered, mean) = mean_center(vectors)?;
    let nf = n as f64;
    let total: f64 = centered.iter().map(|v| dot(v, v)).sum::<f64>() / nf;
    let scale: f64 = vectors.iter().map(|v| dot(v, v)).sum::<f64>() / nf;
    if total <= 1e-24 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate);
    }

    let (values, mut components) = if n < d {
        gram_route(&centered, d)?
    } else {
        let mut cov = vec![0.0; d * d];
        for v in &centered {
            for i in 0..d {
                let vi = v[i];
                if vi == 0.0 {
                    continue;
                }
                for j in i..d {
                    cov[i * d + j] += vi * v[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let c = cov[i * d + j] / nf;
                cov[i * d + j] = c;
                cov[j * d + i] = c;
            }
        }
        let eig = symmetric_eigen(&cov, d)?;
        (eig.values, eig.vectors)
    };

    components.truncate(k);
    for c in &mut components {
        fix_sign(c);
    }
    let explained_variance: Vec<f64> = values.iter().take(k).map(|v| v.max(0.0)).collect();
    let explained_ratio = explained_variance.iter().map(|v| v / total).collect();
    Ok(PcaResult {
        components,
        explained_variance,
        explained_ratio,
        total_variance: total,
        mean,
    })
}

fn gram_route(centered: &[Vec<f64>], d: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = centered.len();
    let nf = n as f64;
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = dot(&centered[i], &centered[j]) / nf;
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
    }
    let eig = symmetric_eigen(&gram, n)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (lambda, coeffs) in eig.values.iter().zip(&eig.vectors) {
        if *lambda <= lambda_max * 1e-13 {
            break;
        }
        let mut u = vec![0.0; d];
        for (row, c) in centered.iter().zip(coeffs) {
            for (ui, x) in u.iter_mut().zip(row) {
                *ui += c * x;
            }
        }
        // one Gram-Schmidt pass keeps the mapped vectors orthonormal
        orthogonalize(&mut u, &components);
        let len = norm(&u);
        if len == 0.0 {
            break;
        }
        u.iter_mut().for_each(|x| *x /= len);
        components.push(u);
        values.push(*lambda);
    }
    // null-space directions, completed from the standard basis
    let mut axis = 0;
    while components.len() < n.min(d) && axis < d {
        let mut u = vec![0.0; d];
        u[axis] = 1.0;
        axis += 1;
        orthogonalize(&mut u, &components);
        orthogonalize(&mut u, &components);
        let len = norm(&u);
        if len > 1e-6 {
            u.iter_mut().for_each(|x| *x /= len);
            components.push(u);
            values.push(0.0);
        }
    }
    Ok((values, components))
}

fn orthogonalize(u: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let p = dot(u, b);
        for (x, y) in u.iter_mut().zip(b) {
            *x -= p * y;
        }
    }
}

fn fix_sign(c: &mut [f64]) {
    let mut best = 0;
    for (i, x) in c.iter().enumerate() {
        if x.abs() > c[best].abs() {
            best = i;
        }
    }
    if c[best] < 0.0 {
        c.iter_mut().for_each(|x| *x = -*x);
    }
}
