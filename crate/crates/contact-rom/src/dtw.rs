//! 1D dynamic time warping: alignment, warped-space interpolation and
//! dictionary enrichment for dual (contact pressure) snapshots.
//!
//! Alignment uses the classic symmetric step pattern (match, insert and
//! delete all at unit weight) with local cost `|a - b|`. Ties in the
//! backtracking prefer the diagonal move, then advancing the first signal.
//! The pattern is pinned so alignments are bit-stable across runs.

use crate::{DMat, DVec};
use std::collections::HashSet;

/// Monotone alignment between two equal-length signals.
///
/// `i1` and `i2` are 0-based index sequences of common warped length
/// `n_tilde >= n`. Both are nondecreasing, both start at index 0 and end at
/// index n-1, and every input index appears at least once.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
    /// Accumulated local cost along the optimal path.
    pub distance: f64,
}

/// Aligns two equal-length signals by dynamic programming.
///
/// Panics if the lengths differ or are < 2.
pub fn dtw_align(l1: &[f64], l2: &[f64]) -> Alignment {
    let n = l1.len();
    let m = l2.len();
    assert_eq!(n, m, "dtw_align expects equal-length signals");
    assert!(n >= 2, "dtw_align expects signals of length >= 2");

    // Accumulated-cost table. Row-major n x m.
    let mut acc = vec![0.0f64; n * m];
    let idx = |i: usize, j: usize| i * m + j;
    acc[idx(0, 0)] = (l1[0] - l2[0]).abs();
    for j in 1..m {
        acc[idx(0, j)] = acc[idx(0, j - 1)] + (l1[0] - l2[j]).abs();
    }
    for i in 1..n {
        acc[idx(i, 0)] = acc[idx(i - 1, 0)] + (l1[i] - l2[0]).abs();
    }
    for i in 1..n {
        for j in 1..m {
            let best = acc[idx(i - 1, j - 1)]
                .min(acc[idx(i - 1, j)])
                .min(acc[idx(i, j - 1)]);
            acc[idx(i, j)] = (l1[i] - l2[j]).abs() + best;
        }
    }

    // Backtrack. Tie order: diagonal, then (i-1, j), then (i, j-1).
    let mut path = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    path.push((i, j));
    while i > 0 || j > 0 {
        if i == 0 {
            j -= 1;
        } else if j == 0 {
            i -= 1;
        } else {
            let diag = acc[idx(i - 1, j - 1)];
            let up = acc[idx(i - 1, j)];
            let left = acc[idx(i, j - 1)];
            if diag <= up && diag <= left {
                i -= 1;
                j -= 1;
            } else if up <= left {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        path.push((i, j));
    }
    path.reverse();

    Alignment {
        i1: path.iter().map(|&(a, _)| a).collect(),
        i2: path.iter().map(|&(_, b)| b).collect(),
        distance: acc[idx(n - 1, m - 1)],
    }
}

/// Interpolates between two signals in the warped coordinate and resamples
/// the result back onto the original grid `x`.
///
/// The warped interpolant is `alpha*l1[i1] + (1-alpha)*l2[i2]` at abscissae
/// `alpha*x[i1] + (1-alpha)*x[i2]`. Duplicate warped abscissae (which occur
/// only at alpha = 0 or 1) keep the last value. Resampling is piecewise
/// linear; endpoints map exactly, so no extrapolation happens.
pub fn dtw_interp(x: &[f64], l1: &[f64], l2: &[f64], alpha: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&alpha), "alpha must be in [0, 1]");
    assert_eq!(x.len(), l1.len());
    let a = dtw_align(l1, l2);

    let mut xt: Vec<f64> = Vec::with_capacity(a.i1.len());
    let mut lt: Vec<f64> = Vec::with_capacity(a.i1.len());
    for k in 0..a.i1.len() {
        let xv = alpha * x[a.i1[k]] + (1.0 - alpha) * x[a.i2[k]];
        let lv = alpha * l1[a.i1[k]] + (1.0 - alpha) * l2[a.i2[k]];
        match xt.last() {
            Some(&prev) if prev == xv => {
                *lt.last_mut().unwrap() = lv; // duplicate abscissa keeps last
            }
            _ => {
                xt.push(xv);
                lt.push(lv);
            }
        }
    }

    x.iter().map(|&xq| interp1(&xt, &lt, xq)).collect()
}

/// Piecewise-linear interpolation on a strictly increasing abscissa table.
fn interp1(xs: &[f64], ys: &[f64], xq: f64) -> f64 {
    if xq <= xs[0] {
        return ys[0];
    }
    if xq >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let j = match xs.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
        Ok(j) => return ys[j],
        Err(j) => j - 1,
    };
    let t = (xq - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + t * (ys[j + 1] - ys[j])
}

/// Distance used to pick enrichment neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistMetric {
    /// Euclidean distance between dictionary columns (default).
    Euclidean,
    /// Accumulated DTW alignment cost.
    Dtw,
}

/// Pairwise column distances; symmetric with a zero diagonal.
pub fn pairwise_distances(d: &DMat, metric: DistMetric) -> DMat {
    let n = d.ncols();
    let mut out = DMat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match metric {
                DistMetric::Euclidean => (d.column(i) - d.column(j)).norm(),
                DistMetric::Dtw => {
                    dtw_align(d.column(i).as_slice(), d.column(j).as_slice()).distance
                }
            };
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Enriches a dictionary around an active set by DTW interpolation.
///
/// For each active column, its `n_neighbors` nearest columns (smallest
/// positive distances) are visited; each unordered unrepeated pair (i, j)
/// contributes one interpolant per weight in `alphas`. The output holds the
/// active columns, the visited neighbor columns and the interpolants, in
/// that encounter order, with original columns deduplicated.
///
/// `x` is the surface coordinate the dual signals live on.
pub fn adapt_dictionary(
    d: &DMat,
    x: &[f64],
    active: &[usize],
    alphas: &[f64],
    dist: &DMat,
    n_neighbors: usize,
) -> DMat {
    assert_eq!(dist.nrows(), d.ncols());
    assert_eq!(dist.ncols(), d.ncols());

    let mut cols: Vec<DVec> = Vec::new();
    let mut have: HashSet<usize> = HashSet::new();
    for &i in active {
        if have.insert(i) {
            cols.push(d.column(i).into_owned());
        }
    }

    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    for &i in active {
        // Nearest neighbors by smallest positive distance, index tie-break.
        let mut cand: Vec<usize> = (0..d.ncols()).filter(|&j| dist[(i, j)] > 0.0).collect();
        cand.sort_by(|&a, &b| {
            dist[(i, a)]
                .partial_cmp(&dist[(i, b)])
                .unwrap()
                .then(a.cmp(&b))
        });
        cand.truncate(n_neighbors);

        for j in cand {
            if have.insert(j) {
                cols.push(d.column(j).into_owned());
            }
            let key = (i.min(j), i.max(j));
            if pairs.insert(key) {
                for &alpha in alphas {
                    let li: Vec<f64> = d.column(j).iter().copied().collect();
                    let lj: Vec<f64> = d.column(i).iter().copied().collect();
                    let interp = dtw_interp(x, &li, &lj, alpha);
                    cols.push(DVec::from_vec(interp));
                }
            }
        }
    }

    DMat::from_columns(&cols)
}
