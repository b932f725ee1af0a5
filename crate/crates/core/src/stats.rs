//! Deterministic numerical statistics: correlation, ordinary least
//! squares, covariance PCA via cyclic Jacobi rotations, and
//! agglomerative hierarchical clustering.
//!
//! Everything here is a pure function over small inputs (at most a few
//! thousand observations over at most 22 features), so the
//! implementations favour clarity and determinism over asymptotics.

// index loops mirror the matrix algebra
#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("zero variance in {which}")]
    ZeroVariance { which: &'static str },
    #[error("nonpositive value at position {index}: {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("non-finite feature at row {row}, column {col}")]
    NotFinite { row: usize, col: usize },
    #[error("rows have inconsistent widths: row {row} has {got}, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("eigendecomposition did not converge")]
    NoConvergence,
    #[error("cut size {k} outside 1..={n}")]
    BadCut { k: usize, n: usize },
}

/// Simple linear fit y = slope*x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Principal components of a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// `components[k]` is the k-th orthonormal loading vector (length p).
    pub components: Vec<Vec<f64>>,
    /// `scores[i]` holds observation i's coordinates on every component.
    pub scores: Vec<Vec<f64>>,
    /// Fraction of total variance per component; zeros when the data
    /// carry no variance at all.
    pub explained_fraction: Vec<f64>,
}

/// Linkage criterion for hierarchical clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Average,
    Complete,
    Ward,
}

/// Dissimilarity between item profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Euclidean,
    OneMinusPearson,
}

/// One agglomeration step: clusters `a` and `b` merge at `height`.
/// Items are clusters `0..n`; the merge at position `i` creates
/// cluster `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// A stepwise dendrogram over `n_items` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_items: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Cluster assignment for every item after cutting the tree into
    /// `k` clusters. Labels are canonical: cluster 0 is the cluster of
    /// the lowest-numbered item, and so on by first occurrence.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>, StatsError> {
        let n = self.n_items;
        if k == 0 || k > n {
            return Err(StatsError::BadCut { k, n });
        }
        // union-find over item and merge ids; apply the first n-k merges
        let mut parent: Vec<usize> = (0..n + self.merges.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, m) in self.merges.iter().take(n - k).enumerate() {
            let target = n + i;
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            parent[ra] = target;
            parent[rb] = target;
        }
        let mut labels = vec![usize::MAX; n];
        let mut next = 0usize;
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for item in 0..n {
            let root = find(&mut parent, item);
            let label = *seen.entry(root).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            labels[item] = label;
        }
        Ok(labels)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation of two equal-length vectors.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance { which: "x" });
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance { which: "y" });
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Least-squares line through (x, y). `r_squared` is 1 for an exact
/// fit (including a constant y) and `pearson(x, y)^2` otherwise.
pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance { which: "x" });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        n_points: x.len(),
    })
}

/// Natural logarithm elementwise; every entry must be positive.
pub fn log_transform(v: &[f64]) -> Result<Vec<f64>, StatsError> {
    for (index, &value) in v.iter().enumerate() {
        if !value.is_finite() || value <= 0.0 {
            return Err(StatsError::NonPositive { index, value });
        }
    }
    Ok(v.iter().map(|x| x.ln()).collect())
}

fn check_matrix(data: &[Vec<f64>]) -> Result<usize, StatsError> {
    let p = data.first().map(|r| r.len()).unwrap_or(0);
    for (row, r) in data.iter().enumerate() {
        if r.len() != p {
            return Err(StatsError::RaggedRows {
                row,
                got: r.len(),
                expected: p,
            });
        }
        for (col, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(StatsError::NotFinite { row, col });
            }
        }
    }
    Ok(p)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12` relative to the matrix norm (an absolute threshold is
/// unreachable once eigenvalues grow large). Returns eigenpairs sorted
/// by descending eigenvalue.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> Result<(Vec<f64>, Vec<Vec<f64>>), StatsError> {
    let n = a.len();
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let threshold = 1e-12 * norm.max(f64::MIN_POSITIVE);

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= threshold {
            let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
                .map(|j| (a[j][j], (0..n).map(|i| v[i][j]).collect()))
                .collect();
            // descending eigenvalue; total order is safe, NaN cannot occur
            pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            let eigenvalues = pairs.iter().map(|p| p.0).collect();
            let components = pairs.into_iter().map(|p| p.1).collect();
            return Ok((eigenvalues, components));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= threshold / (n * n) as f64 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let apq = a[p][q];
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for j in 0..n {
                    if j != p && j != q {
                        let ajp = a[j][p];
                        let ajq = a[j][q];
                        a[j][p] = ajp - s * (ajq + tau * ajp);
                        a[p][j] = a[j][p];
                        a[j][q] = ajq + s * (ajp - tau * ajq);
                        a[q][j] = a[j][q];
                    }
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp - s * (vq + tau * vp);
                    row[q] = vq + s * (vp - tau * vq);
                }
            }
        }
    }
    Err(StatsError::NoConvergence)
}

/// PCA on the covariance matrix of `data` (rows = observations).
///
/// Columns are centered, not scaled; covariance uses divisor `n-1`.
/// Each component is oriented so its largest-magnitude loading is
/// positive, which keeps golden outputs stable.
pub fn covariance_pca(data: &[Vec<f64>]) -> Result<PcaResult, StatsError> {
    let n = data.len();
    if n < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: n });
    }
    let p = check_matrix(data)?;
    if p == 0 {
        return Err(StatsError::TooFewPoints { needed: 1, got: 0 });
    }

    let means: Vec<f64> = (0..p)
        .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = data
        .iter()
        .map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect();

    let mut cov = vec![vec![0.0; p]; p];
    for row in &centered {
        for i in 0..p {
            for j in i..p {
                cov[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in i..p {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }

    let (raw_eigenvalues, mut components) = jacobi_eigen(cov)?;
    let eigenvalues: Vec<f64> = raw_eigenvalues.iter().map(|&l| l.max(0.0)).collect();

    for comp in components.iter_mut() {
        let lead = comp
            .iter()
            .cloned()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            for x in comp.iter_mut() {
                *x = -*x;
            }
        }
    }

    let scores: Vec<Vec<f64>> = centered
        .iter()
        .map(|row| {
            components
                .iter()
                .map(|comp| row.iter().zip(comp).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();

    let total: f64 = eigenvalues.iter().sum();
    let explained_fraction = if total > 0.0 {
        eigenvalues.iter().map(|&l| l / total).collect()
    } else {
        vec![0.0; eigenvalues.len()]
    };

    Ok(PcaResult {
        eigenvalues,
        components,
        scores,
        explained_fraction,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn pair_distance(a: &[f64], b: &[f64], distance: Distance) -> Result<f64, StatsError> {
    match distance {
        Distance::Euclidean => Ok(euclidean(a, b)),
        Distance::OneMinusPearson => {
            // identical profiles are maximally similar even when flat
            if a == b {
                return Ok(0.0);
            }
            Ok(1.0 - pearson(a, b)?)
        }
    }
}

/// Agglomerative hierarchical clustering of row profiles.
///
/// The merge sequence is deterministic: the closest pair wins; ties go
/// to the smallest `(a, b)` cluster-index pair. Heights follow the
/// Lance-Williams update for the chosen linkage, so they are
/// nondecreasing for average, complete and Ward.
pub fn hcluster(
    profiles: &[Vec<f64>],
    linkage: Linkage,
    distance: Distance,
) -> Result<Dendrogram, StatsError> {
    let n = profiles.len();
    if n < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: n });
    }
    check_matrix(profiles)?;

    // dense symmetric matrix indexed by cluster id (grows by one per merge)
    let total = 2 * n - 1;
    let mut dist = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pair_distance(&profiles[i], &profiles[j], distance)?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    let mut active: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; total];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let d = dist[lo][hi];
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => d < bd || (d == bd && (lo, hi) < (ba, bb)),
                };
                if better {
                    best = Some((d, lo, hi));
                }
            }
        }
        let (height, a, b) = best.expect("at least two active clusters");
        let new_id = n + step;
        merges.push(Merge { a, b, height });

        // Lance-Williams update of distances to the merged cluster
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let nk = size[k] as f64;
            let dka = dist[k.min(a)][k.max(a)];
            let dkb = dist[k.min(b)][k.max(b)];
            let dab = height;
            let d = match linkage {
                Linkage::Average => (na * dka + nb * dkb) / (na + nb),
                Linkage::Complete => dka.max(dkb),
                Linkage::Ward => (((na + nk) * dka * dka + (nb + nk) * dkb * dkb - nk * dab * dab)
                    / (na + nb + nk))
                    .max(0.0)
                    .sqrt(),
            };
            dist[k.min(new_id)][k.max(new_id)] = d;
            dist[k.max(new_id)][k.min(new_id)] = d;
        }
        size[new_id] = size[a] + size[b];
        active.retain(|&x| x != a && x != b);
        active.push(new_id);
        active.sort_unstable();
    }

    Ok(Dendrogram { n_items: n, merges })
}

/// Competition ranking, largest value first: tied values share the
/// best rank and the following rank is skipped accordingly.
pub fn rank_desc<K: Ord + Clone>(values: &BTreeMap<K, f64>) -> BTreeMap<K, usize> {
    let mut ordered: Vec<(&K, f64)> = values.iter().map(|(k, &v)| (k, v)).collect();
    // sort by value descending, then key ascending for deterministic display
    ordered.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    let mut ranks = BTreeMap::new();
    let mut current_rank = 0usize;
    let mut last_value = f64::INFINITY;
    for (position, (key, value)) in ordered.into_iter().enumerate() {
        if value != last_value {
            current_rank = position + 1;
            last_value = value;
        }
        ranks.insert(key.clone(), current_rank);
    }
    ranks
}
