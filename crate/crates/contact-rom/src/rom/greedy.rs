//! Greedy active-set solve over a dual snapshot dictionary.

use std::time::Instant;

use super::{compose, finish_solution, DualReduction, ProjectedConstraints, ROMSolution, ReducedModel};
use crate::contact::PairingMethod;
use crate::error::{Error, Result};
use crate::hf::SolveReport;
use crate::linalg::solve_saddle;
use crate::{DMat, DVec};

#[derive(Clone, Copy, Debug)]
pub struct GreedyOptions {
    /// Violation threshold for dictionary enrichment. Defaults to the primal
    /// truncation tolerance: violations below the basis error are noise and
    /// selecting on them pulls in spurious columns.
    pub tau: Option<f64>,
    /// Relative displacement increment required to stop.
    pub tol: f64,
    pub max_iter: usize,
    /// Overrides the problem's default pairing method.
    pub pairing: Option<PairingMethod>,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            tau: None,
            tol: 1e-5,
            max_iter: 200,
            pairing: None,
        }
    }
}

/// Solves the reduced contact problem at `mu` with the dual dictionary.
///
/// The support set starts empty and changes by exactly one column per
/// iteration: with nonnegative multipliers the column with the largest
/// thresholded violation joins, otherwise the most negative multiplier
/// leaves. Converged means the support stopped changing, no thresholded
/// violation remains and the displacement increment fell below `tol`, which
/// makes the reduced multipliers of a converged solve nonnegative by
/// construction. A column that keeps rejoining is a cycling support; the
/// solve stops with `report.oscillating` set and returns the last iterate.
pub fn solve_greedy_active_set(
    model: &ReducedModel,
    mu: &[f64],
    opts: &GreedyOptions,
) -> Result<ROMSolution> {
    if !matches!(model.dual, DualReduction::Dictionary(_)) {
        return Err(Error::Config(
            "the greedy solver needs a dual dictionary, not a cone basis".into(),
        ));
    }
    let tau = opts.tau.unwrap_or(model.basis.energy_tolerance);
    assert!(tau >= 0.0, "negative enrichment threshold");
    let wall_start = Instant::now();
    model.problem.check_parameter(mu)?;
    let method = opts.pairing.unwrap_or_else(|| model.problem.default_pairing());
    let n_dict = model.n_dual();

    let mut op_seconds = 0.0;
    let op_t = Instant::now();
    let stiff = model.stiffness_at(mu)?;
    op_seconds += op_t.elapsed().as_secs_f64();
    let (u_d, f_hat) = model.reduced_load(stiff.op(), mu)?;

    // Support in insertion order; adds[p] counts how often column p joined.
    let mut active: Vec<usize> = Vec::new();
    let mut adds = vec![0usize; n_dict];
    let mut u_hat = DVec::zeros(model.n_primal());
    let mut u_full = u_d.clone();
    let mut report = SolveReport::default();
    let mut last: Option<(ProjectedConstraints, DVec)> = None;

    for iter in 1..=opts.max_iter {
        let op_t = Instant::now();
        let pc = model.project_constraints(mu, &u_full, &u_d, method)?;
        op_seconds += op_t.elapsed().as_secs_f64();

        // Shed linearly dependent support columns until the Schur block
        // factors; shed columns sit out the rest of this iteration.
        let mut shed = vec![false; n_dict];
        let (new_u_hat, lambda_active) = loop {
            let c_a = DMat::from_fn(active.len(), model.n_primal(), |r, c| {
                pc.c_hat[(active[r], c)]
            });
            let g_a = DVec::from_iterator(active.len(), active.iter().map(|&p| pc.g_hat[p]));
            match solve_saddle(stiff.factor(), &c_a, &f_hat, &g_a) {
                Ok(pair) => break pair,
                Err(Error::RedundantActiveConstraints) => {
                    let p = active.pop().expect("nonempty on redundancy");
                    shed[p] = true;
                    report.dropped_rows.push(p);
                }
                Err(e) => return Err(e),
            }
        };

        let mut lambda_hat = DVec::zeros(n_dict);
        for (slot, &p) in active.iter().enumerate() {
            lambda_hat[p] = lambda_active[slot];
        }

        let new_u_full = compose(model.problem, &u_d, &(&model.basis.vectors * &new_u_hat));
        let du = (&new_u_full - &u_full).norm();
        let scale = new_u_full.norm().max(1.0);

        let mut set_changed = true;
        let mut oscillating = false;
        if let Some(&p_rem) = active
            .iter()
            .filter(|&&p| lambda_hat[p] < 0.0)
            .min_by(|&&a, &&b| lambda_hat[a].total_cmp(&lambda_hat[b]))
        {
            active.retain(|&p| p != p_rem);
        } else {
            let viol_hat = &pc.c_hat * &new_u_hat - &pc.g_hat;
            let p_add = (0..n_dict)
                .filter(|&p| !shed[p] && !active.contains(&p) && viol_hat[p] > tau)
                .max_by(|&a, &b| viol_hat[a].total_cmp(&viol_hat[b]));
            match p_add {
                Some(p) => {
                    active.push(p);
                    adds[p] += 1;
                    oscillating = adds[p] > 5;
                }
                None => set_changed = false,
            }
        }

        u_full = new_u_full;
        u_hat = new_u_hat;
        report.iterations = iter;
        report.last_increment = du / scale;
        report.active_trace.push(active.len());
        last = Some((pc, lambda_hat));

        if oscillating {
            report.oscillating = true;
            break;
        }
        if !set_changed && du <= opts.tol * scale {
            report.converged = true;
            break;
        }
    }

    let (pc, lambda_hat) = last.expect("max_iter >= 1");
    Ok(finish_solution(
        model, mu, stiff.k_hat(), &f_hat, &pc, u_full, u_hat, lambda_hat, report, wall_start,
        op_seconds,
    ))
}
