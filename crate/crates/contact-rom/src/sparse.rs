//! Sparse regression engines: orthogonal matching pursuit and the FOCUSS
//! family. Used standalone on the transport dictionary benchmark and inside
//! the convex-hull contact solver, where the non-negative variant produces
//! convex combinations of snapshots.

use crate::error::{Error, Result};
use crate::linalg::{nnls, pinv_apply};
use crate::{DMat, DVec};

/// Relative singular-value cutoff shared by every pseudo-inverse solve in
/// this module. FOCUSS scales columns by vanishing coefficients, so refits
/// must stay rank-robust.
const PINV_CUTOFF: f64 = 1e-12;

/// Coefficients below this fraction of the largest one are frozen at zero
/// between FOCUSS iterations; zero weights absorb, so frozen entries never
/// come back.
const PRUNE_REL: f64 = 1e-12;

/// Residuals below this fraction of the target norm count as exact.
const RESIDUAL_FLOOR: f64 = 1e-14;

/// Outcome of a sparse regression solve.
#[derive(Clone, Debug)]
pub struct SparseResult {
    /// Coefficients against the original (unnormalized) dictionary columns.
    pub coefficients: DVec,
    /// Positions of the nonzero coefficients, ascending.
    pub support: Vec<usize>,
    /// `||x - D a||` of the returned coefficients.
    pub residual_norm: f64,
    /// Greedy steps (OMP) or reweighted updates (FOCUSS) performed.
    pub iterations: usize,
    /// False when the iteration broke down or hit its budget before meeting
    /// its stopping criterion.
    pub converged: bool,
    /// Residual norm at the initial iterate and after every step; the last
    /// entry equals `residual_norm`.
    pub residual_trace: Vec<f64>,
    /// Most negative coefficient entry over all iterates. The non-negative
    /// variant keeps this above -1e-14.
    pub min_entry: f64,
}

impl SparseResult {
    pub fn nnz(&self) -> usize {
        self.support.len()
    }
}

/// Stopping rule for [`omp`]; the loop exits on whichever bound it reaches
/// first.
#[derive(Clone, Copy, Debug)]
pub struct OmpStop {
    /// Hard cap on the number of selected columns.
    pub max_nonzeros: usize,
    /// Residual 2-norm below which selection stops.
    pub residual: f64,
}

impl OmpStop {
    /// Stop on the column count alone.
    pub fn sparsity(k: usize) -> Self {
        Self {
            max_nonzeros: k,
            residual: 0.0,
        }
    }

    /// Stop on the residual norm alone.
    pub fn tolerance(eps: f64) -> Self {
        Self {
            max_nonzeros: usize::MAX,
            residual: eps,
        }
    }
}

/// Options for [`focuss`] and [`nnfocuss`].
#[derive(Clone, Copy, Debug)]
pub struct FocussOptions {
    /// Relative 2-norm change of the coefficients declaring convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Optional hard sparsity cap, applied after the iteration by keeping
    /// the largest coefficients and refitting on the survivors.
    pub max_nonzeros: Option<usize>,
}

impl Default for FocussOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            max_nonzeros: None,
        }
    }
}

/// Orthogonal matching pursuit.
///
/// Columns are normalized internally for the selection score
/// `|D[:,j]^T r| / ||D[:,j]||`; the reported coefficients are least-squares
/// refits against the original columns on the selected support, so the
/// residual never grows with the step count. Ties pick the lowest index.
/// Stops early, with `converged = false`, when the residual becomes
/// numerically orthogonal to every remaining column.
pub fn omp(d: &DMat, x: &DVec, stop: OmpStop) -> Result<SparseResult> {
    check_target(d, x)?;
    let n = d.ncols();
    let col_norms: Vec<f64> = (0..n).map(|j| d.column(j).norm()).collect();
    if n == 0 || col_norms.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroDictionary);
    }

    let x_norm = x.norm();
    let met = |r_norm: f64| r_norm <= stop.residual || r_norm <= RESIDUAL_FLOOR * x_norm;
    let cap = stop.max_nonzeros.min(n);

    let mut alpha = DVec::zeros(n);
    let mut picked: Vec<usize> = Vec::new();
    let mut selected = vec![false; n];
    let mut r = x.clone();
    let mut r_norm = x_norm;
    let mut trace = vec![r_norm];
    let mut min_entry = 0.0f64;

    while !met(r_norm) && picked.len() < cap {
        let scores = d.transpose() * &r;
        let mut best: Option<usize> = None;
        let mut best_score = 0.0;
        for j in 0..n {
            if selected[j] || col_norms[j] == 0.0 {
                continue;
            }
            let s = scores[j].abs() / col_norms[j];
            if s > best_score {
                best_score = s;
                best = Some(j);
            }
        }
        // Nothing left correlates with the residual; more columns would only
        // carry round-off.
        let usable = best.filter(|_| best_score > RESIDUAL_FLOOR * r_norm);
        let Some(j) = usable else { break };
        selected[j] = true;
        picked.push(j);
        alpha = refit(d, x, &picked);
        min_entry = min_entry.min(alpha.min());
        r = x - d * &alpha;
        r_norm = r.norm();
        trace.push(r_norm);
    }

    // Stalling below the requested count means the dictionary ran out, not
    // that the stopping rule was satisfied.
    let converged = met(r_norm) || picked.len() == stop.max_nonzeros;
    Ok(SparseResult {
        support: scan_support(&alpha),
        coefficients: alpha,
        residual_norm: r_norm,
        iterations: picked.len(),
        converged,
        residual_trace: trace,
        min_entry,
    })
}

/// FOCUSS iteratively reweighted sparse regression.
///
/// Starts from `alpha0` (default: the pseudo-inverse solution) and repeats
/// `a <- W (D W)^+ x` with `W = diag(a)`, which concentrates energy on few
/// entries while keeping `D a` close to `x`. Entries below
/// `1e-12 * ||a||_inf` are frozen at zero between updates. If every entry
/// collapses while the target is nonzero, the last iterate is returned with
/// `converged = false`.
pub fn focuss(
    d: &DMat,
    x: &DVec,
    alpha0: Option<&DVec>,
    opts: FocussOptions,
) -> Result<SparseResult> {
    check_target(d, x)?;
    let init = match alpha0 {
        Some(a) => {
            if a.len() != d.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "initial guess length {} vs dictionary columns {}",
                    a.len(),
                    d.ncols()
                )));
            }
            a.clone()
        }
        None if d.ncols() == 0 => DVec::zeros(0),
        None => pinv_apply(d, x, PINV_CUTOFF),
    };
    focuss_loop(d, x, init, opts, false)
}

/// Non-negative FOCUSS.
///
/// Initialized with non-negative least squares. Any reweighted update that
/// would turn an entry negative is replaced by a damped step that stops
/// exactly where the first entry reaches zero, so every iterate stays
/// non-negative up to round-off; the zeroed entry is then pruned from the
/// weights and cannot return.
pub fn nnfocuss(d: &DMat, x: &DVec, opts: FocussOptions) -> Result<SparseResult> {
    check_target(d, x)?;
    focuss_loop(d, x, nnls(d, x), opts, true)
}

fn check_target(d: &DMat, x: &DVec) -> Result<()> {
    if x.len() != d.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "target length {} vs dictionary rows {}",
            x.len(),
            d.nrows()
        )));
    }
    Ok(())
}

fn focuss_loop(
    d: &DMat,
    x: &DVec,
    mut alpha: DVec,
    opts: FocussOptions,
    nonneg: bool,
) -> Result<SparseResult> {
    let n = d.ncols();
    let x_norm = x.norm();

    // The zero vector is the sparsest exact representation of a zero target.
    if x_norm == 0.0 || n == 0 {
        let alpha = DVec::zeros(n);
        return Ok(SparseResult {
            support: Vec::new(),
            coefficients: alpha,
            residual_norm: x_norm,
            iterations: 0,
            converged: x_norm == 0.0,
            residual_trace: vec![x_norm],
            min_entry: 0.0,
        });
    }

    let mut min_entry = alpha.min().min(0.0);
    prune(&mut alpha);
    let mut trace = vec![(x - d * &alpha).norm()];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..opts.max_iter {
        let active = scan_support(&alpha);
        if active.is_empty() {
            break;
        }

        let mut b = DMat::zeros(d.nrows(), active.len());
        for (c, &i) in active.iter().enumerate() {
            b.column_mut(c).copy_from(&(d.column(i) * alpha[i]));
        }
        let z = pinv_apply(&b, x, PINV_CUTOFF);
        let mut next = DVec::zeros(n);
        for (c, &i) in active.iter().enumerate() {
            next[i] = alpha[i] * z[c];
        }
        if nonneg && next.min() < 0.0 {
            relax_nonnegative(&alpha, &mut next);
        }
        min_entry = min_entry.min(next.min());
        prune(&mut next);

        let change = (&next - &alpha).norm();
        let next_norm = next.norm();
        alpha = next;
        iterations += 1;
        trace.push((x - d * &alpha).norm());
        if next_norm > 0.0 && change < opts.tol * next_norm {
            converged = true;
            break;
        }
    }

    if let Some(cap) = opts.max_nonzeros {
        if let Some(capped) = truncate_refit(d, x, &alpha, cap, nonneg) {
            alpha = capped;
            min_entry = min_entry.min(alpha.min());
            trace.push((x - d * &alpha).norm());
        }
    }

    Ok(SparseResult {
        support: scan_support(&alpha),
        residual_norm: (x - d * &alpha).norm(),
        coefficients: alpha,
        iterations,
        converged,
        residual_trace: trace,
        min_entry,
    })
}

/// Damped step keeping the iterate non-negative: only the entries moving
/// down participate, scaled so the first one to cross zero lands on it
/// exactly. Entries moving up keep their previous value; the zeroed entry is
/// pruned on the next pass, so each relaxation shrinks the support.
fn relax_nonnegative(prev: &DVec, next: &mut DVec) {
    let mut t = f64::INFINITY;
    let mut binding = usize::MAX;
    for i in 0..prev.len() {
        let drop = prev[i] - next[i];
        if drop > 0.0 {
            let ratio = prev[i] / drop;
            if ratio < t {
                t = ratio;
                binding = i;
            }
        }
    }
    debug_assert!(t.is_finite(), "relaxation called without a negative entry");
    if !t.is_finite() {
        return;
    }
    for i in 0..prev.len() {
        let drop = prev[i] - next[i];
        next[i] = if drop > 0.0 { prev[i] - t * drop } else { prev[i] };
    }
    next[binding] = 0.0;
}

/// Hard sparsity cap: keep the `cap` largest coefficients and refit on the
/// survivors (non-negative least squares for the non-negative variant).
/// Returns None when the coefficients already satisfy the cap.
fn truncate_refit(d: &DMat, x: &DVec, alpha: &DVec, cap: usize, nonneg: bool) -> Option<DVec> {
    let mut idx: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] != 0.0).collect();
    if idx.len() <= cap {
        return None;
    }
    if cap == 0 {
        return Some(DVec::zeros(alpha.len()));
    }
    idx.sort_by(|&a, &b| {
        alpha[b]
            .abs()
            .partial_cmp(&alpha[a].abs())
            .expect("finite coefficients")
            .then(a.cmp(&b))
    });
    idx.truncate(cap);
    idx.sort_unstable();
    if nonneg {
        let ds = d.select_columns(idx.iter());
        let z = nnls(&ds, x);
        let mut out = DVec::zeros(alpha.len());
        for (k, &j) in idx.iter().enumerate() {
            out[j] = z[k];
        }
        Some(out)
    } else {
        Some(refit(d, x, &idx))
    }
}

/// Freezes entries below `PRUNE_REL` of the largest magnitude at zero. Zero
/// weights are absorbing, so pruned entries stay out of later updates.
fn prune(alpha: &mut DVec) {
    if alpha.is_empty() {
        return;
    }
    let thresh = PRUNE_REL * alpha.amax();
    for v in alpha.iter_mut() {
        if v.abs() <= thresh {
            *v = 0.0;
        }
    }
}

/// Least-squares refit restricted to `support`, reported at full length.
fn refit(d: &DMat, x: &DVec, support: &[usize]) -> DVec {
    let ds = d.select_columns(support.iter());
    let z = pinv_apply(&ds, x, PINV_CUTOFF);
    let mut alpha = DVec::zeros(d.ncols());
    for (k, &j) in support.iter().enumerate() {
        alpha[j] = z[k];
    }
    alpha
}

fn scan_support(alpha: &DVec) -> Vec<usize> {
    (0..alpha.len()).filter(|&i| alpha[i] != 0.0).collect()
}
