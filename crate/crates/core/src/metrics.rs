//! Distance-based diversity indicators: SDNN, Solow-Polasky diversity and
//! pure diversity.
//!
//! All three operate on an abstract item slice plus a distance (or
//! dissimilarity) function, so the same code measures genetic diversity
//! (Euclidean / fractional norms over genomes) and phenotypic diversity
//! (normalized Hamming over rasters).

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, pow};

use crate::geometry::{hamming, Bitmap, Genome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("metric needs at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Parameters shared by the diversity indicators.
///
/// `spd_theta` controls how fast Solow-Polasky diversity tends to the set
/// size as distances grow: 1 for genetic distances, 100 for (normalized
/// Hamming) phenotypic distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub spd_theta: f64,
    pub pd_norm_exponent: f64,
    pub ridge: f64,
}

impl MetricConfig {
    pub fn genetic() -> Self {
        Self {
            spd_theta: 1.0,
            pd_norm_exponent: 0.1,
            ridge: 1e-9,
        }
    }

    pub fn phenotypic() -> Self {
        Self {
            spd_theta: 100.0,
            ..Self::genetic()
        }
    }
}

/// Sum of distances to the nearest neighbor.
pub fn sdnn<T>(items: &[T], mut dist: impl FnMut(&T, &T) -> f64) -> Result<f64, MetricsError> {
    if items.len() < 2 {
        return Err(MetricsError::TooFewItems {
            needed: 2,
            got: items.len(),
        });
    }
    let mut total = 0.0;
    for (i, a) in items.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        for (j, b) in items.iter().enumerate() {
            if i != j {
                let d = dist(a, b);
                if d < nearest {
                    nearest = d;
                }
            }
        }
        total += nearest;
    }
    Ok(total)
}

/// Solow-Polasky diversity: `1^T M^-1 1` with `M_ij = exp(-theta d_ij)`,
/// clamped to `[1, N]`. The linear system is ridge-regularized; duplicate
/// items make `M` exactly singular, so on solver failure the ridge escalates
/// tenfold up to 1e-3.
pub fn solow_polasky<T>(
    items: &[T],
    mut dist: impl FnMut(&T, &T) -> f64,
    theta: f64,
    ridge: f64,
) -> Result<f64, MetricsError> {
    let n = items.len();
    if n == 0 {
        return Err(MetricsError::TooFewItems { needed: 1, got: 0 });
    }
    if n == 1 {
        return Ok(1.0);
    }
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = exp(-theta * dist(&items[i], &items[j]));
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    // Try the plain system first; the ridge only enters when elimination
    // fails or the solution blows up (duplicate items make M singular).
    let mut eps = 0.0;
    loop {
        if let Some(solution) = solve_ridged(&m, n, eps) {
            let total: f64 = solution.iter().sum();
            return Ok(total.clamp(1.0, n as f64));
        }
        eps = if eps == 0.0 {
            ridge.max(f64::MIN_POSITIVE)
        } else {
            eps * 10.0
        };
        if eps > 1e-3 {
            // A matrix with unit diagonal plus this much ridge does not
            // defeat partial pivoting in practice; treat as fully similar.
            return Ok(1.0);
        }
    }
}

// Gaussian elimination with partial pivoting on (M + eps I) x = 1.
fn solve_ridged(m: &[f64], n: usize, eps: f64) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    for i in 0..n {
        a[i * n + i] += eps;
    }
    let mut b = vec![1.0; n];
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = libm::fabs(a[col * n + col]);
        for row in (col + 1)..n {
            let v = libm::fabs(a[row * n + col]);
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if !(pivot_abs > 1e-300) {
            return None;
        }
        if pivot_row != col {
            for k in col..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in (col + 1)..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in (col + 1)..n {
            sum -= a[col * n + k] * x[k];
        }
        x[col] = sum / a[col * n + col];
        // treat wildly scaled solutions as ill-conditioned
        if !x[col].is_finite() || libm::fabs(x[col]) > 1e6 {
            return None;
        }
    }
    Some(x)
}

/// Pure diversity: the recursive dissimilarity accumulation
/// `PD(X) = max_i [PD(X \ i) + dis(i, X \ i)]` with `dis(p, X)` the minimum
/// dissimilarity of `p` to the set.
///
/// Computed by greedy accumulation: start from the most dissimilar pair, then
/// repeatedly account the item with the largest minimum dissimilarity to the
/// already-accounted set. Ties break toward the lowest item index. The greedy
/// value never exceeds the recursive definition's (which maximizes over all
/// accounting orders and is exponential to evaluate exactly).
pub fn pure_diversity<T>(
    items: &[T],
    mut dis: impl FnMut(&T, &T) -> f64,
) -> Result<f64, MetricsError> {
    let n = items.len();
    if n == 0 {
        return Err(MetricsError::TooFewItems { needed: 1, got: 0 });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dis(&items[i], &items[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    // most dissimilar pair, lowest (i, j) on ties
    let (mut best_i, mut best_j, mut best_d) = (0, 1, d[1]);
    for i in 0..n {
        for j in (i + 1)..n {
            if d[i * n + j] > best_d {
                best_d = d[i * n + j];
                best_i = i;
                best_j = j;
            }
        }
    }
    let mut accounted = vec![false; n];
    accounted[best_i] = true;
    accounted[best_j] = true;
    let mut total = best_d;
    let mut min_dis: Vec<f64> = (0..n)
        .map(|k| d[k * n + best_i].min(d[k * n + best_j]))
        .collect();
    for _ in 2..n {
        let mut next = usize::MAX;
        let mut next_d = f64::NEG_INFINITY;
        for (k, &m) in min_dis.iter().enumerate() {
            if !accounted[k] && m > next_d {
                next_d = m;
                next = k;
            }
        }
        accounted[next] = true;
        total += next_d;
        for k in 0..n {
            let v = d[k * n + next];
            if v < min_dis[k] {
                min_dis[k] = v;
            }
        }
    }
    Ok(total)
}

/// Fractional-norm dissimilarity `(sum |a_k - b_k|^p)^(1/p)`; `p = 0.1`
/// throughout this crate.
pub fn l_fractional(a: &[f64], b: &[f64], p: f64) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let diff = libm::fabs(x - y);
        if diff > 0.0 {
            sum += pow(diff, p);
        }
    }
    Ok(pow(sum, 1.0 / p))
}

/// Euclidean distance between gene vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        sum += d * d;
    }
    libm::sqrt(sum)
}

/// The three indicators measured over one solution set in one space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversitySummary {
    pub sdnn: f64,
    pub spd: f64,
    pub pd: f64,
}

/// Genetic-space diversity of a set of genomes: Euclidean distances for SDNN
/// and SPD, the fractional norm for PD.
pub fn genetic_diversity(
    genomes: &[Genome],
    cfg: &MetricConfig,
) -> Result<DiversitySummary, MetricsError> {
    let dist = |a: &Genome, b: &Genome| euclidean(a.genes(), b.genes());
    Ok(DiversitySummary {
        sdnn: sdnn(genomes, dist)?,
        spd: solow_polasky(genomes, dist, cfg.spd_theta, cfg.ridge)?,
        pd: pure_diversity(genomes, |a, b| {
            l_fractional(a.genes(), b.genes(), cfg.pd_norm_exponent)
                .expect("genomes share a length")
        })?,
    })
}

/// Phenotypic-space diversity of a set of rasters, all three indicators on
/// the normalized Hamming distance.
pub fn phenotypic_diversity(
    bitmaps: &[Bitmap],
    cfg: &MetricConfig,
) -> Result<DiversitySummary, MetricsError> {
    Ok(DiversitySummary {
        sdnn: sdnn(bitmaps, |a, b| hamming(a, b))?,
        spd: solow_polasky(bitmaps, |a, b| hamming(a, b), cfg.spd_theta, cfg.ridge)?,
        pd: pure_diversity(bitmaps, |a, b| hamming(a, b))?,
    })
}
