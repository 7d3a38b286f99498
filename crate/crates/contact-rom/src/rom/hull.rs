//! Convex-hull reconstruction from a monolithic snapshot dictionary.

use std::time::Instant;

use super::{count_unpaired, test_crpen, ROMSolution};
use crate::contact::PairingMethod;
use crate::error::{Error, Result};
use crate::hf::SolveReport;
use crate::linalg::{orth_random_sketch, svd_truncated, SymSparse};
use crate::offline::{build_monolithic_dictionary, MonolithicDictionary, SnapshotSet};
use crate::problems::ParametricProblem;
use crate::sparse::{nnfocuss, FocussOptions};
use crate::{DMat, DVec};

/// How to compress the free-dof equilibrium rows before the sparse
/// regression. The row count only has to stay above the dictionary size;
/// a seeded random sketch trades a little accuracy for assembly cost.
#[derive(Clone, Copy, Debug)]
pub enum SketchSpec {
    Svd { delta: f64 },
    Random { l: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct HullOptions {
    /// Sparse regression settings. The defaults are tighter than the
    /// free-standing solver defaults because the hull weights must satisfy
    /// the compressed equilibrium near machine precision for the
    /// reconstruction to inherit the snapshots' KKT quality.
    pub focuss: FocussOptions,
    /// Largest tolerated cross-penetration before the build refuses.
    pub crpen_threshold: f64,
    /// Skips the cross-penetration gate; diagnostics only.
    pub skip_crpen: bool,
    /// Fixed-point passes for deformation-dependent constraints.
    pub max_outer: usize,
    /// Relative change of the reconstruction that stops the fixed point.
    pub outer_tol: f64,
    /// Overrides the problem's default pairing method.
    pub pairing: Option<PairingMethod>,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            focuss: FocussOptions {
                tol: 1e-12,
                max_iter: 500,
                max_nonzeros: None,
            },
            crpen_threshold: 1e-4,
            skip_crpen: false,
            max_outer: 10,
            outer_tol: 1e-8,
            pairing: None,
        }
    }
}

/// Offline side of the convex-hull solver: the monolithic dictionary, the
/// equilibrium sketch and the convexity diagnostic that gates the build.
pub struct ConvexHullModel<'p> {
    pub problem: &'p ParametricProblem,
    pub dictionary: MonolithicDictionary,
    /// Orthonormal compression basis over free equilibrium rows.
    pub sketch: DMat,
    /// Cross-penetration score per training snapshot.
    pub crpen: DVec,
    /// (K D_u) on free rows, cached when the operator is parameter
    /// independent.
    ku_free: Option<DMat>,
    d_u: DMat,
    d_lambda: DMat,
    /// dual_nodes position per mesh node, usize::MAX off the dual set.
    dual_pos: Vec<usize>,
    /// Free-equation row per dof, usize::MAX for prescribed dofs.
    free_pos: Vec<usize>,
}

impl<'p> ConvexHullModel<'p> {
    /// Assembles the dictionary and sketch, refusing problems whose training
    /// set fails the cross-penetration test: once snapshots violate each
    /// other's constraint states, convex combinations penetrate and the
    /// ansatz produces meaningless multipliers.
    pub fn build(
        problem: &'p ParametricProblem,
        snapshots: &SnapshotSet,
        sketch: SketchSpec,
        opts: &HullOptions,
    ) -> Result<Self> {
        let crpen = test_crpen(snapshots, problem)?;
        let max_crpen = crpen.iter().fold(0.0f64, |a, &v| a.max(v));
        if !opts.skip_crpen && max_crpen > opts.crpen_threshold {
            return Err(Error::NonConvexFeasibleRegion {
                max_crpen,
                threshold: opts.crpen_threshold,
            });
        }

        let dictionary = build_monolithic_dictionary(snapshots);
        let (d_u, d_lambda) = dictionary.split();
        let d_u_free = d_u.select_rows(&problem.free);
        let sketch = match sketch {
            SketchSpec::Svd { delta } => svd_truncated(&d_u_free, delta)?.vectors,
            SketchSpec::Random { l, seed } => orth_random_sketch(&d_u_free, l, seed).basis,
        };

        let ku_free = if problem.operator_is_parameter_independent() {
            let op = problem.operator(&snapshots.parameters[0])?;
            Some(stiffness_columns(&op.k_full, &d_u, &problem.free))
        } else {
            None
        };

        let mut dual_pos = vec![usize::MAX; problem.n_nodes()];
        for (k, &node) in problem.dual_nodes()?.iter().enumerate() {
            dual_pos[node] = k;
        }
        let mut free_pos = vec![usize::MAX; problem.n_dofs()];
        for (k, &d) in problem.free.iter().enumerate() {
            free_pos[d] = k;
        }

        Ok(ConvexHullModel {
            problem,
            dictionary,
            sketch,
            crpen,
            ku_free,
            d_u,
            d_lambda,
            dual_pos,
            free_pos,
        })
    }

    pub fn n_columns(&self) -> usize {
        self.dictionary.n_columns()
    }

    pub fn max_crpen(&self) -> f64 {
        self.crpen.iter().fold(0.0f64, |a, &v| a.max(v))
    }
}

/// (K D_u) restricted to free rows, one matvec per column.
fn stiffness_columns(k_full: &SymSparse, d_u: &DMat, free: &[usize]) -> DMat {
    let mut out = DMat::zeros(free.len(), d_u.ncols());
    for j in 0..d_u.ncols() {
        let col = DVec::from_column_slice(d_u.column(j).as_slice());
        let kcol = k_full.matvec(&col);
        for (r, &d) in free.iter().enumerate() {
            out[(r, j)] = kcol[d];
        }
    }
    out
}

/// Writes the solution at `mu` as a convex combination of monolithic
/// snapshots: one nonnegative weight vector multiplies the stacked primal and
/// dual columns, so the weights are simultaneously the reduced displacement
/// and multiplier coefficients. The weights come from a nonnegative sparse
/// regression on the compressed equilibrium rows with an appended sum-to-one
/// row. Deformation-dependent constraints are handled by a fixed point:
/// regress, reconstruct, rebuild the constraint state at the reconstruction,
/// repeat until the reconstruction settles.
pub fn solve_convex_hull(
    model: &ConvexHullModel,
    mu: &[f64],
    opts: &HullOptions,
) -> Result<ROMSolution> {
    let wall_start = Instant::now();
    let problem = model.problem;
    problem.check_parameter(mu)?;
    let method = opts.pairing.unwrap_or_else(|| problem.default_pairing());
    let n_cols = model.n_columns();
    let m = model.sketch.ncols();

    let mut op_seconds = 0.0;
    let ku_owned;
    let ku: &DMat = match &model.ku_free {
        Some(k) => k,
        None => {
            let op_t = Instant::now();
            let op = problem.operator(mu)?;
            ku_owned = stiffness_columns(&op.k_full, &model.d_u, &problem.free);
            op_seconds += op_t.elapsed().as_secs_f64();
            &ku_owned
        }
    };

    let load = problem.rhs(mu)?;
    let load_f = DVec::from_iterator(
        problem.free.len(),
        problem.free.iter().map(|&d| load[d]),
    );
    let bt_load = model.sketch.transpose() * &load_f;
    let mut x_foc = DVec::zeros(m + 1);
    x_foc.rows_mut(0, m).copy_from(&bt_load);
    x_foc[m] = 1.0;

    // Fixed point over the constraint state. The first pass linearizes at
    // the prescribed-displacement state, matching the high-fidelity start.
    let mut u_cur = problem.dirichlet_values(mu);
    let mut have_rec = false;
    let mut report = SolveReport::default();
    let mut last = None;

    for pass in 1..=opts.max_outer {
        let op_t = Instant::now();
        let ops = problem.constraints_at(mu, &u_cur, method)?;
        let mut k_mono = ku.clone();
        for r in 0..ops.n_constraints() {
            let p = model.dual_pos[ops.slave_nodes[r]];
            debug_assert_ne!(p, usize::MAX, "constraint row on a non-dual node");
            for &(j, v) in &ops.rows[r] {
                let fr = model.free_pos[j];
                if fr == usize::MAX {
                    continue;
                }
                for c in 0..n_cols {
                    k_mono[(fr, c)] += v * model.d_lambda[(p, c)];
                }
            }
        }
        let d_top = model.sketch.transpose() * k_mono;
        let mut d_foc = DMat::zeros(m + 1, n_cols);
        d_foc.rows_mut(0, m).copy_from(&d_top);
        for c in 0..n_cols {
            d_foc[(m, c)] = 1.0;
        }
        op_seconds += op_t.elapsed().as_secs_f64();

        let fit = nnfocuss(&d_foc, &x_foc, opts.focuss)?;
        let alpha = fit.coefficients.clone();
        let u_rec = &model.d_u * &alpha;

        let du = (&u_rec - &u_cur).norm();
        let scale = u_rec.norm().max(1.0);
        report.iterations = pass;
        report.last_increment = du / scale;
        report.active_trace.push(fit.support.len());
        report.equilibrium_residual = (&d_top * &alpha - &bt_load).norm();

        let settled = have_rec && du <= opts.outer_tol * scale;
        let u_independent = problem.contact.is_none();
        u_cur = u_rec;
        have_rec = true;
        last = Some((ops, alpha));
        if settled || u_independent {
            report.converged = fit.converged;
            break;
        }
    }

    let (ops, alpha) = last.expect("max_outer >= 1");
    let lambda = &model.d_lambda * &alpha;
    let viol = ops.violations(&u_cur);
    report.max_penetration = viol.iter().fold(0.0f64, |a, &v| a.max(v));
    let lambda_rows = DVec::from_iterator(
        ops.n_constraints(),
        (0..ops.n_constraints()).map(|r| lambda[model.dual_pos[ops.slave_nodes[r]]]),
    );
    report.complementarity = lambda_rows.dot(&viol).abs();
    report.tie_break_count = ops.pairs.iter().filter(|p| p.tie_broken).count();
    report.unpaired_slaves = count_unpaired(problem, &ops);
    report.operator_seconds = op_seconds;
    report.wall_seconds = wall_start.elapsed().as_secs_f64();

    Ok(ROMSolution {
        mu: mu.to_vec(),
        u_hat: alpha.clone(),
        lambda_hat: alpha,
        u: u_cur,
        lambda,
        report,
    })
}
