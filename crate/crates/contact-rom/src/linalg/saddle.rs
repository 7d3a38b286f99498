use crate::error::{Error, Result};
use crate::{DMat, DVec};

/// Factorized symmetric positive definite operator.
///
/// The saddle-point solver and the high-fidelity contact loop only ever need
/// back-substitution, so stiffness factorizations (dense or skyline) are
/// shared through this interface and computed once per problem.
pub trait SpdFactor {
    fn dim(&self) -> usize;
    fn solve_vec(&self, b: &DVec) -> DVec;
    fn solve_mat(&self, b: &DMat) -> DMat {
        let mut out = DMat::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col = DVec::from_column_slice(b.column(j).as_slice());
            out.set_column(j, &self.solve_vec(&col));
        }
        out
    }
}

/// Dense Cholesky factor, used for reduced operators and small meshes.
pub struct DenseSpd {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    n: usize,
}

impl DenseSpd {
    pub fn new(k: &DMat) -> Option<Self> {
        let n = k.nrows();
        k.clone().cholesky().map(|chol| Self { chol, n })
    }
}

impl SpdFactor for DenseSpd {
    fn dim(&self) -> usize {
        self.n
    }
    fn solve_vec(&self, b: &DVec) -> DVec {
        self.chol.solve(b)
    }
}

/// Solves the equality-constrained saddle system
///
/// ```text
/// [ K    C_A^T ] [ u ]   [ f   ]
/// [ C_A  0     ] [ l ] = [ g_A ]
/// ```
///
/// by Schur complement on the (small) active constraint block:
/// `S = C_A K^{-1} C_A^T`, `S l = C_A K^{-1} f - g_A`, then back-substitute
/// for `u`. An empty active set degenerates to the unconstrained solve. A
/// singular Schur complement means the active rows are linearly dependent.
pub fn solve_saddle(
    k: &dyn SpdFactor,
    c_active: &DMat,
    f: &DVec,
    g_active: &DVec,
) -> Result<(DVec, DVec)> {
    let na = c_active.nrows();
    if na == 0 {
        return Ok((k.solve_vec(f), DVec::zeros(0)));
    }
    if c_active.ncols() != k.dim() || f.len() != k.dim() || g_active.len() != na {
        return Err(Error::DimensionMismatch(format!(
            "saddle blocks disagree: K is {0}x{0}, C_A is {1}x{2}, f has {3}, g_A has {4}",
            k.dim(),
            na,
            c_active.ncols(),
            f.len(),
            g_active.len()
        )));
    }

    let kinv_f = k.solve_vec(f);
    let y = k.solve_mat(&c_active.transpose());
    let schur = c_active * &y;
    let rhs = c_active * &kinv_f - g_active;
    let lambda = schur
        .cholesky()
        .ok_or(Error::RedundantActiveConstraints)?
        .solve(&rhs);
    let u = &kinv_f - y * &lambda;
    Ok((u, lambda))
}
