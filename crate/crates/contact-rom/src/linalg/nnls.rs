use crate::linalg::pinv_apply;
use crate::{DMat, DVec};

/// Non-negative least squares by Lawson-Hanson active-set iteration.
///
/// Minimizes `||A x - b||_2` subject to `x >= 0`. Dual feasibility is
/// declared at `1e-12` relative to `||A^T b||_inf`. Passive-set solves run on
/// the precomputed Gram matrix; a rank-deficient passive block falls back to
/// an SVD pseudo-inverse solve on the original columns.
pub fn nnls(a: &DMat, b: &DVec) -> DVec {
    let n = a.ncols();
    assert_eq!(a.nrows(), b.len(), "nnls: row count must match rhs length");

    let gram = a.transpose() * a;
    let atb = a.transpose() * b;
    let scale = atb.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-12 * scale;

    let mut x = DVec::zeros(n);
    let mut passive = vec![false; n];
    // Indices whose addition failed outright (zero or duplicated columns);
    // re-adding them would cycle.
    let mut banned = vec![false; n];

    let max_outer = 10 * n.max(4);
    for _ in 0..max_outer {
        let w = &atb - &gram * &x;
        let mut best: Option<usize> = None;
        for j in 0..n {
            if !passive[j] && !banned[j] && w[j] > tol {
                if best.is_none() || w[j] > w[best.unwrap()] {
                    best = Some(j);
                }
            }
        }
        let Some(j_new) = best else { break };
        passive[j_new] = true;

        // Feasibility restoration on the passive set.
        loop {
            let pset: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = passive_ls(a, b, &gram, &atb, &pset);

            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &j) in pset.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }

            // Step toward z until the first passive entry hits zero.
            let mut alpha = f64::INFINITY;
            for (k, &j) in pset.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                break;
            }
            for (k, &j) in pset.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            let mut dropped = false;
            for (k, &j) in pset.iter().enumerate() {
                if z[k] <= 0.0 && x[j] <= tol.max(1e-300) {
                    x[j] = 0.0;
                    passive[j] = false;
                    dropped = true;
                }
            }
            if !dropped {
                // Nothing moved; the fresh index cannot enter productively.
                passive[j_new] = false;
                x[j_new] = 0.0;
                banned[j_new] = true;
                break;
            }
            if !passive[j_new] && alpha == 0.0 {
                banned[j_new] = true;
                break;
            }
        }
    }
    x
}

/// Unconstrained least squares restricted to the passive columns.
fn passive_ls(a: &DMat, b: &DVec, gram: &DMat, atb: &DVec, pset: &[usize]) -> DVec {
    let p = pset.len();
    let mut gpp = DMat::zeros(p, p);
    let mut rhs = DVec::zeros(p);
    for (r, &i) in pset.iter().enumerate() {
        rhs[r] = atb[i];
        for (c, &j) in pset.iter().enumerate() {
            gpp[(r, c)] = gram[(i, j)];
        }
    }
    match gpp.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            let ap = a.select_columns(pset.iter());
            pinv_apply(&ap, b, 1e-12)
        }
    }
}
