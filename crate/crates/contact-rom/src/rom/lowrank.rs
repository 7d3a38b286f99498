//! Primal-dual active-set solve in the reduced spaces.

use std::time::Instant;

use super::{compose, finish_solution, DualReduction, ProjectedConstraints, ROMSolution, ReducedModel};
use crate::error::{Error, Result};
use crate::hf::{SolveReport, SolverOptions};
use crate::linalg::solve_saddle;
use crate::{DMat, DVec};

/// Solves the reduced contact problem at `mu` with the cone dual basis.
///
/// The loop is the reduced image of the high-fidelity active-set iteration:
/// saddle solves on the active reduced dual dofs, wholesale set updates from
/// the signs of the reduced multipliers and projected violations, and the
/// same degenerate-toggle acceptance for force-free touching modes. Activity
/// lives on reduced dual indices, which are stable across re-pairing because
/// the dual columns are fixed offline.
///
/// Online cost per iteration is dense in the reduced dimensions; rebuilding
/// the constraint projection at the current iterate is what scales with the
/// mesh, and that time is accumulated into `report.operator_seconds`.
pub fn solve_reduced_lowrank(
    model: &ReducedModel,
    mu: &[f64],
    opts: &SolverOptions,
) -> Result<ROMSolution> {
    if !matches!(model.dual, DualReduction::Cone(_)) {
        return Err(Error::Config(
            "the low-rank solver needs a cone dual basis, not a dictionary".into(),
        ));
    }
    let wall_start = Instant::now();
    model.problem.check_parameter(mu)?;
    let method = opts.pairing.unwrap_or_else(|| model.problem.default_pairing());
    let n_red = model.n_dual();

    let mut op_seconds = 0.0;
    let op_t = Instant::now();
    let stiff = model.stiffness_at(mu)?;
    op_seconds += op_t.elapsed().as_secs_f64();
    let (u_d, f_hat) = model.reduced_load(stiff.op(), mu)?;

    let mut active = vec![false; n_red];
    let mut initialized = false;
    let mut u_hat = DVec::zeros(model.n_primal());
    let mut u_full = u_d.clone();
    let mut report = SolveReport::default();
    let mut last: Option<(ProjectedConstraints, DVec)> = None;
    let mut converged_exit = false;

    for iter in 1..=opts.max_iter {
        let op_t = Instant::now();
        let pc = model.project_constraints(mu, &u_full, &u_d, method)?;
        op_seconds += op_t.elapsed().as_secs_f64();

        if !initialized {
            // Start from the reduced dof with the smallest projected gap, a
            // deterministic stand-in for seeding with one arbitrary contact.
            if let Some(p) = (0..n_red).min_by(|&a, &b| pc.g_hat[a].total_cmp(&pc.g_hat[b])) {
                active[p] = true;
            }
            initialized = true;
        }

        let mut active_idx: Vec<usize> = (0..n_red).filter(|&p| active[p]).collect();

        // Shed linearly dependent active dofs until the Schur block factors;
        // shed dofs sit out the rest of this iteration.
        let mut shed = vec![false; n_red];
        let (new_u_hat, lambda_active) = loop {
            let c_a = DMat::from_fn(active_idx.len(), model.n_primal(), |r, c| {
                pc.c_hat[(active_idx[r], c)]
            });
            let g_a = DVec::from_iterator(active_idx.len(), active_idx.iter().map(|&p| pc.g_hat[p]));
            match solve_saddle(stiff.factor(), &c_a, &f_hat, &g_a) {
                Ok(pair) => break pair,
                Err(Error::RedundantActiveConstraints) => {
                    let p = active_idx.pop().expect("nonempty on redundancy");
                    active[p] = false;
                    shed[p] = true;
                    report.dropped_rows.push(p);
                }
                Err(e) => return Err(e),
            }
        };

        let mut lambda_hat = DVec::zeros(n_red);
        for (slot, &p) in active_idx.iter().enumerate() {
            lambda_hat[p] = lambda_active[slot];
        }
        let viol_hat = &pc.c_hat * &new_u_hat - &pc.g_hat;

        let mut new_active = vec![false; n_red];
        for &p in &active_idx {
            if lambda_hat[p] > 0.0 {
                new_active[p] = true;
            }
        }
        for p in 0..n_red {
            if !active[p] && !shed[p] && viol_hat[p] >= 0.0 {
                new_active[p] = true;
            }
        }

        let new_u_full = compose(model.problem, &u_d, &(&model.basis.vectors * &new_u_hat));
        let du = (&new_u_full - &u_full).norm();
        let scale = new_u_full.norm().max(1.0);
        let stable = new_active == active;

        // Toggling dofs with vanishing multiplier and violation are exactly
        // touching, force-free contacts; accept them once u is stationary.
        let degenerate_toggle = !stable && du <= opts.tol * scale && {
            let ctol = opts.tol * (1.0 + f_hat.amax());
            (0..n_red)
                .filter(|&p| new_active[p] != active[p])
                .all(|p| lambda_hat[p].abs() <= ctol && viol_hat[p].abs() <= ctol)
        };

        u_full = new_u_full;
        u_hat = new_u_hat;
        active = new_active;
        report.iterations = iter;
        report.last_increment = du / scale;
        report.active_trace.push(active.iter().filter(|&&a| a).count());
        last = Some((pc, lambda_hat));

        if (stable || degenerate_toggle) && du <= opts.tol * scale {
            report.converged = true;
            converged_exit = true;
            break;
        }
    }

    let (pc, mut lambda_hat) = last.expect("max_iter >= 1");

    // A degenerate-toggle exit can leave multiplier dust of size ctol on the
    // toggling dofs; converged solves report an exactly nonnegative dual.
    if converged_exit {
        lambda_hat.apply(|v| *v = v.max(0.0));
    }

    Ok(finish_solution(
        model, mu, stiff.k_hat(), &f_hat, &pc, u_full, u_hat, lambda_hat, report, wall_start,
        op_seconds,
    ))
}
