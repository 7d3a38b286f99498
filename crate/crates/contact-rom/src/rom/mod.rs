//! Online reduced-order contact solvers.
//!
//! A [`ReducedModel`] pairs a truncated primal basis with a reduced dual
//! space, either a cone basis for [`solve_reduced_lowrank`] or the full
//! snapshot dictionary for [`solve_greedy_active_set`]. The convex-hull
//! route ([`solve_convex_hull`]) skips bases entirely and writes the
//! solution as one convex combination of monolithic snapshots; [`test_crpen`]
//! and [`test_chls`] are the offline diagnostics that decide whether a
//! problem qualifies for it.
//!
//! All solvers share the elimination convention of the high-fidelity loop:
//! reduced operators act on free dofs, prescribed values enter through the
//! effective load and gap, and reconstructions fill the prescribed rows back
//! in. Constraint operators are rebuilt from the FE layer at the current
//! iterate every pass; their construction time is tracked separately in the
//! report so online timings can exclude it.

mod greedy;
mod hull;
mod lowrank;

pub use greedy::{solve_greedy_active_set, GreedyOptions};
pub use hull::{solve_convex_hull, ConvexHullModel, HullOptions, SketchSpec};
pub use lowrank::solve_reduced_lowrank;

use std::time::Instant;

use crate::contact::ConstraintOperators;
use crate::error::{Error, Result};
use crate::hf::SolveReport;
use crate::linalg::{svd_truncated, DenseSpd, SymSparse, TruncatedBasis};
use crate::offline::{cpg_select, DualBasisCPG, SnapshotSet};
use crate::problems::{ParametricProblem, ProblemOperator};
use crate::{DMat, DVec};

/// How the dual side of a [`ReducedModel`] is compressed.
#[derive(Clone, Copy, Debug)]
pub enum DualSpec {
    /// Greedy cone-projection selection at the given tolerance.
    Cone { delta: f64 },
    /// Keep every dual snapshot as a dictionary column.
    Dictionary,
}

/// Reduced dual space. Columns are nonnegative pressure snapshots aligned
/// with [`ParametricProblem::dual_nodes`], so reduced multipliers reconstruct
/// to nonnegative fields as long as the coefficients stay nonnegative.
#[derive(Clone, Debug)]
pub enum DualReduction {
    Cone(DualBasisCPG),
    Dictionary(DMat),
}

impl DualReduction {
    pub fn vectors(&self) -> &DMat {
        match self {
            DualReduction::Cone(b) => &b.vectors,
            DualReduction::Dictionary(d) => d,
        }
    }

    pub fn n_reduced(&self) -> usize {
        self.vectors().ncols()
    }
}

/// Offline-built reduced model: primal basis, dual reduction and the
/// projected stiffness. Immutable and shareable; every online solve owns its
/// iteration state, so concurrent solves over a sweep are independent.
pub struct ReducedModel<'p> {
    pub problem: &'p ParametricProblem,
    /// Primal basis over free dofs, orthonormal columns.
    pub basis: TruncatedBasis,
    pub dual: DualReduction,
    /// Reduced stiffness with its factor, cached when the operator is shared
    /// across the parameter space.
    k_hat: Option<(DMat, DenseSpd)>,
    /// Assembled operator backing the cache, kept for elimination loads.
    op: Option<ProblemOperator>,
    /// Basis scattered to full dofs (zero rows at prescribed dofs), so
    /// constraint products can run over the sparse rows directly.
    phi_full: DMat,
    /// dual_nodes position per mesh node, usize::MAX off the dual set.
    dual_pos: Vec<usize>,
}

impl<'p> ReducedModel<'p> {
    /// Compresses a snapshot set into a reduced model. The primal basis is
    /// the SVD of the free-dof snapshot block truncated at `primal_delta`
    /// (spectral energy fraction); the dual side follows `dual`.
    pub fn build(
        problem: &'p ParametricProblem,
        snapshots: &SnapshotSet,
        primal_delta: f64,
        dual: DualSpec,
    ) -> Result<Self> {
        let u_free = snapshots.u.select_rows(&problem.free);
        let basis = svd_truncated(&u_free, primal_delta)?;

        let dual = match dual {
            DualSpec::Cone { delta } => DualReduction::Cone(cpg_select(&snapshots.lambda, delta)),
            DualSpec::Dictionary => DualReduction::Dictionary(snapshots.lambda.clone()),
        };
        debug_assert!(
            dual.vectors().iter().all(|&v| v >= 0.0),
            "dual snapshots must be nonnegative"
        );

        let mut phi_full = DMat::zeros(problem.n_dofs(), basis.rank());
        for (local, &dof) in problem.free.iter().enumerate() {
            for c in 0..basis.rank() {
                phi_full[(dof, c)] = basis.vectors[(local, c)];
            }
        }

        let (k_hat, op) = if problem.operator_is_parameter_independent() {
            let op = problem.operator(&snapshots.parameters[0])?;
            let k_hat = project_stiffness(&op.k_full, &phi_full);
            let factor = DenseSpd::new(&k_hat).ok_or_else(not_spd)?;
            (Some((k_hat, factor)), Some(op))
        } else {
            (None, None)
        };

        let mut dual_pos = vec![usize::MAX; problem.n_nodes()];
        for (k, &node) in problem.dual_nodes()?.iter().enumerate() {
            dual_pos[node] = k;
        }

        Ok(ReducedModel {
            problem,
            basis,
            dual,
            k_hat,
            op,
            phi_full,
            dual_pos,
        })
    }

    pub fn n_primal(&self) -> usize {
        self.basis.rank()
    }

    pub fn n_dual(&self) -> usize {
        self.dual.n_reduced()
    }

    pub fn dual_vectors(&self) -> &DMat {
        self.dual.vectors()
    }

    /// Reduced stiffness at `mu`: the build-time cache when the operator is
    /// shared, a fresh assembly and projection otherwise.
    pub(crate) fn stiffness_at(&self, mu: &[f64]) -> Result<StiffnessAt<'_>> {
        match (&self.k_hat, &self.op) {
            (Some((k_hat, factor)), Some(op)) => Ok(StiffnessAt::Shared { k_hat, factor, op }),
            _ => {
                let op = self.problem.operator(mu)?;
                let k_hat = project_stiffness(&op.k_full, &self.phi_full);
                let factor = DenseSpd::new(&k_hat).ok_or_else(not_spd)?;
                Ok(StiffnessAt::Owned { k_hat, factor, op })
            }
        }
    }

    /// Prescribed values and the projected effective load at `mu`. The load
    /// is assembled per query: the elimination term moves with the prescribed
    /// values, so it cannot be projected once offline.
    pub(crate) fn reduced_load(&self, op: &ProblemOperator, mu: &[f64]) -> Result<(DVec, DVec)> {
        let u_d = self.problem.dirichlet_values(mu);
        let load = self.problem.rhs(mu)?;
        let coupled = op.k_full.matvec(&u_d);
        let f_eff = DVec::from_iterator(
            self.problem.free.len(),
            self.problem.free.iter().map(|&d| load[d] - coupled[d]),
        );
        let f_hat = self.basis.vectors.transpose() * f_eff;
        Ok((u_d, f_hat))
    }

    /// Constraints linearized at `u_full`, restricted to free dofs and
    /// projected onto the reduced spaces: C_hat = Psi^T C Phi, g_hat = Psi^T
    /// (g - C_d u_d). Dual vectors live on the canonical dual nodes while
    /// constraint rows follow the current pairing, so the projection gathers
    /// the dual rows into row order first.
    pub(crate) fn project_constraints(
        &self,
        mu: &[f64],
        u_full: &DVec,
        u_d: &DVec,
        method: crate::contact::PairingMethod,
    ) -> Result<ProjectedConstraints> {
        let ops = self.problem.constraints_at(mu, u_full, method)?;
        let (c_free, g_eff, supported) = ops.restricted(&self.problem.free, u_d);
        let c_phi = ops.apply_basis(&self.phi_full);
        let psi = self.dual_vectors();
        let psi_rows = DMat::from_fn(ops.n_constraints(), psi.ncols(), |r, c| {
            let p = self.dual_pos[ops.slave_nodes[r]];
            debug_assert_ne!(p, usize::MAX, "constraint row on a non-dual node");
            psi[(p, c)]
        });
        let c_hat = psi_rows.transpose() * c_phi;
        let g_hat = psi_rows.transpose() * &g_eff;
        Ok(ProjectedConstraints {
            ops,
            c_free,
            g_eff,
            supported,
            psi_rows,
            c_hat,
            g_hat,
        })
    }
}

fn not_spd() -> Error {
    Error::SingularOperator("reduced stiffness is not positive definite".into())
}

/// Phi^T K Phi through the sparse operator, one matvec per basis column.
fn project_stiffness(k_full: &SymSparse, phi_full: &DMat) -> DMat {
    let m = phi_full.ncols();
    let mut k_phi = DMat::zeros(phi_full.nrows(), m);
    for j in 0..m {
        let col = DVec::from_column_slice(phi_full.column(j).as_slice());
        k_phi.set_column(j, &k_full.matvec(&col));
    }
    phi_full.transpose() * k_phi
}

pub(crate) enum StiffnessAt<'a> {
    Shared {
        k_hat: &'a DMat,
        factor: &'a DenseSpd,
        op: &'a ProblemOperator,
    },
    Owned {
        k_hat: DMat,
        factor: DenseSpd,
        op: ProblemOperator,
    },
}

impl StiffnessAt<'_> {
    pub(crate) fn k_hat(&self) -> &DMat {
        match self {
            StiffnessAt::Shared { k_hat, .. } => k_hat,
            StiffnessAt::Owned { k_hat, .. } => k_hat,
        }
    }

    pub(crate) fn factor(&self) -> &DenseSpd {
        match self {
            StiffnessAt::Shared { factor, .. } => factor,
            StiffnessAt::Owned { factor, .. } => factor,
        }
    }

    pub(crate) fn op(&self) -> &ProblemOperator {
        match self {
            StiffnessAt::Shared { op, .. } => op,
            StiffnessAt::Owned { op, .. } => op,
        }
    }
}

/// One iteration's constraint state: full-row operators for reporting, and
/// the reduced projections the saddle solves run on.
pub(crate) struct ProjectedConstraints {
    pub ops: ConstraintOperators,
    pub c_free: DMat,
    pub g_eff: DVec,
    pub supported: Vec<bool>,
    /// Dual vectors gathered into constraint-row order.
    pub psi_rows: DMat,
    pub c_hat: DMat,
    pub g_hat: DVec,
}

/// Result of an online reduced solve.
#[derive(Clone, Debug)]
pub struct ROMSolution {
    pub mu: Vec<f64>,
    /// Reduced primal coefficients.
    pub u_hat: DVec,
    /// Reduced dual coefficients; nonnegative on converged solves, sparse
    /// for the dictionary solvers.
    pub lambda_hat: DVec,
    /// Full-dof displacement reconstruction, prescribed values filled in.
    pub u: DVec,
    /// Multiplier reconstruction aligned with `ParametricProblem::dual_nodes`.
    pub lambda: DVec,
    pub report: SolveReport,
}

impl ROMSolution {
    /// Indices of the nonzero reduced dual coefficients.
    pub fn dual_support(&self) -> Vec<usize> {
        self.lambda_hat
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Key solve facts as one JSON object per online query. Reference errors
    /// are not known here; the experiment runner appends them when a truth
    /// solution is available.
    pub fn report_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mu": self.mu,
            "converged": self.report.converged,
            "iterations": self.report.iterations,
            "active_trace": self.report.active_trace,
            "dual_support": self.dual_support(),
            "equilibrium_residual": self.report.equilibrium_residual,
            "max_penetration": self.report.max_penetration,
            "complementarity": self.report.complementarity,
            "last_increment": self.report.last_increment,
            "oscillating": self.report.oscillating,
            "wall_seconds": self.report.wall_seconds,
            "operator_seconds": self.report.operator_seconds,
        })
    }
}

/// Shared epilogue of the basis-times-coefficients solvers: KKT numbers of
/// the returned iterate, reconstructions, timings.
pub(crate) fn finish_solution(
    model: &ReducedModel,
    mu: &[f64],
    k_hat: &DMat,
    f_hat: &DVec,
    pc: &ProjectedConstraints,
    u_full: DVec,
    u_hat: DVec,
    lambda_hat: DVec,
    mut report: SolveReport,
    wall_start: Instant,
    op_seconds: f64,
) -> ROMSolution {
    let u_free = &model.basis.vectors * &u_hat;
    let lambda_rows = &pc.psi_rows * &lambda_hat;
    let viol = &pc.c_free * u_free - &pc.g_eff;
    report.max_penetration = (0..pc.ops.n_constraints())
        .filter(|&i| pc.supported[i])
        .map(|i| viol[i])
        .fold(0.0, f64::max);
    report.complementarity = lambda_rows.dot(&viol).abs();
    report.equilibrium_residual =
        (k_hat * &u_hat + pc.c_hat.transpose() * &lambda_hat - f_hat).norm();
    report.tie_break_count = pc.ops.pairs.iter().filter(|p| p.tie_broken).count();
    report.unpaired_slaves = count_unpaired(model.problem, &pc.ops);
    report.operator_seconds = op_seconds;
    report.wall_seconds = wall_start.elapsed().as_secs_f64();

    let lambda = model.dual_vectors() * &lambda_hat;
    ROMSolution {
        mu: mu.to_vec(),
        u_hat,
        lambda_hat,
        u: u_full,
        lambda,
        report,
    }
}

/// Prescribed values plus free values scattered into a full-dof vector.
pub(crate) fn compose(problem: &ParametricProblem, u_d: &DVec, u_free: &DVec) -> DVec {
    let mut u = u_d.clone();
    for (k, &d) in problem.free.iter().enumerate() {
        u[d] = u_free[k];
    }
    u
}

pub(crate) fn count_unpaired(problem: &ParametricProblem, ops: &ConstraintOperators) -> usize {
    match &problem.contact {
        Some(spec) => problem
            .mesh()
            .ok()
            .and_then(|m| m.surface(&spec.slave).ok())
            .map_or(0, |path| path.len() - ops.n_constraints()),
        None => 0,
    }
}

/// Cross-penetration convexity check: for each snapshot, the worst positive
/// violation of any other snapshot's constraint state. A convex feasible set
/// keeps every entry near zero, because each snapshot then satisfies all
/// constraint linearizations that occur across the training set; large
/// entries mean convex combinations of snapshots can penetrate and the
/// convex-hull ansatz is unsound. The constraint state of a snapshot is
/// rebuilt from its own parameter and deformation, so a set loaded from disk
/// checks the same way as a fresh one. A single snapshot has no cross pairs
/// and scores zero.
pub fn test_crpen(snapshots: &SnapshotSet, problem: &ParametricProblem) -> Result<DVec> {
    let n = snapshots.n_snapshots();
    let method = problem.default_pairing();
    let mut states = Vec::with_capacity(n);
    for j in 0..n {
        let u_j = DVec::from_column_slice(snapshots.u.column(j).as_slice());
        states.push(problem.constraints_at(&snapshots.parameters[j], &u_j, method)?);
    }

    let mut eps = DVec::zeros(n);
    for k in 0..n {
        let d_k = DVec::from_column_slice(snapshots.u.column(k).as_slice());
        let mut worst = 0.0f64;
        for (j, state) in states.iter().enumerate() {
            if j == k {
                continue;
            }
            let viol = state.violations(&d_k);
            worst = viol.iter().fold(worst, |acc, &v| acc.max(v));
        }
        eps[k] = worst.max(0.0);
    }
    Ok(eps)
}

/// Leave-one-out convex-hull least-squares check: how well each snapshot is
/// matched by an affine (sum-to-one) combination of the others, in relative
/// two-norm. The equality constraint is eliminated by substitution: alpha =
/// alpha0 + N beta with alpha0 uniform and N spanning the zero-sum subspace,
/// leaving an unconstrained least-squares problem in beta. Interior points of
/// a smooth one-parameter family interpolate well; endpoints pay an
/// extrapolation penalty.
pub fn test_chls(d_u: &DMat) -> DVec {
    let n = d_u.ncols();
    assert!(n >= 2, "leave-one-out needs at least two snapshots");
    let mut eps = DVec::zeros(n);
    for k in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        let d_tilde = d_u.select_columns(&others);
        let d_k = DVec::from_column_slice(d_u.column(k).as_slice());
        let m = others.len();

        let alpha0 = DVec::from_element(m, 1.0 / m as f64);
        let b = &d_k - &d_tilde * &alpha0;
        let residual = if m == 1 {
            b.norm()
        } else {
            let mut nullspace = DMat::zeros(m, m - 1);
            for j in 0..m - 1 {
                nullspace[(j, j)] = 1.0;
                nullspace[(m - 1, j)] = -1.0;
            }
            let a = &d_tilde * &nullspace;
            let beta = crate::linalg::pinv_apply(&a, &b, 1e-12);
            (a * beta - b).norm()
        };
        let scale = d_k.norm();
        eps[k] = if scale > 0.0 { residual / scale } else { residual };
    }
    eps
}

#[cfg(test)]
mod tests;
