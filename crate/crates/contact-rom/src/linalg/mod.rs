//! Shared dense and sparse linear-algebra primitives: truncated SVD,
//! non-negative least squares, randomized sketching, saddle-point solves and
//! a skyline Cholesky for the assembled stiffness matrices.

mod nnls;
mod saddle;
mod sketch;
mod skyline;
mod svd;

pub use nnls::nnls;
pub use saddle::{solve_saddle, DenseSpd, SpdFactor};
pub use sketch::{orth_random_sketch, Sketch};
pub use skyline::{SkylineChol, SymSparse};
pub use svd::{orth, pinv, svd_truncated, TruncatedBasis};

use crate::{DMat, DVec};

/// Moore-Penrose pseudo-inverse applied to a vector: `pinv(A) * b` without
/// forming the inverse. Singular values below `cutoff_rel * sigma_max` are
/// dropped.
pub fn pinv_apply(a: &DMat, b: &DVec, cutoff_rel: f64) -> DVec {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = cutoff_rel * smax;
    let mut z = u.transpose() * b;
    for (i, s) in svd.singular_values.iter().enumerate() {
        z[i] = if *s > cutoff { z[i] / s } else { 0.0 };
    }
    vt.transpose() * z
}
