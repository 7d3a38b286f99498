//! High-fidelity contact solver: fixed-point iteration that re-pairs the
//! surfaces from the current deformed state, solves the equality-constrained
//! saddle system on the active set, and updates the set wholesale from the
//! multiplier and violation signs. This is the snapshot generator; everything
//! downstream consumes its solutions.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contact::PairingMethod;
use crate::error::{Error, Result};
use crate::linalg::solve_saddle;
use crate::problems::{ParametricProblem, ProblemOperator};
use crate::{DMat, DVec};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative displacement-increment tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Overrides the problem's default pairing method.
    pub pairing: Option<PairingMethod>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 200,
            pairing: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Active-set size after each iteration.
    pub active_trace: Vec<usize>,
    /// Free-dof equilibrium residual norm of K u - f + C^T lambda.
    pub equilibrium_residual: f64,
    /// Largest positive constraint violation (penetration) on supported rows.
    pub max_penetration: f64,
    /// | lambda^T (C u - g) |
    pub complementarity: f64,
    /// Relative displacement increment of the last iteration.
    pub last_increment: f64,
    /// Slave nodes whose rows were dropped to unstick a singular active block.
    pub dropped_rows: Vec<usize>,
    /// Set when the active set cycled without settling (dictionary solvers).
    pub oscillating: bool,
    pub tie_break_count: usize,
    /// Slave path nodes without a valid pair in the final pairing.
    pub unpaired_slaves: usize,
    pub wall_seconds: f64,
    /// Time spent assembling and factoring the operator (zero when a shared
    /// factorization was passed in); excluded from solve timings downstream.
    pub operator_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct HFSolution {
    pub mu: Vec<f64>,
    /// Displacements over all dofs, prescribed values filled in.
    pub u: DVec,
    /// Contact pressures, one per constraint row of the final pairing.
    pub lambda: DVec,
    /// Global slave node id per multiplier entry.
    pub lambda_nodes: Vec<usize>,
    /// Active slave nodes at convergence.
    pub active_nodes: Vec<usize>,
    pub pairing: PairingMethod,
    pub report: SolveReport,
}

/// Solves the contact problem at `mu`, assembling and factoring the operator
/// internally. Non-convergence is not an error: the last iterate is returned
/// with `report.converged = false`.
pub fn solve_contact(
    problem: &ParametricProblem,
    mu: &[f64],
    opts: &SolverOptions,
) -> Result<HFSolution> {
    let t0 = Instant::now();
    let op = problem.operator(mu)?;
    let operator_seconds = t0.elapsed().as_secs_f64();
    let mut sol = solve_contact_with(problem, &op, mu, opts)?;
    sol.report.operator_seconds = operator_seconds;
    sol.report.wall_seconds += operator_seconds;
    Ok(sol)
}

/// Same solve against a caller-owned operator, so parameter sweeps on
/// problems with a parameter-independent stiffness share one factorization.
pub fn solve_contact_with(
    problem: &ParametricProblem,
    op: &ProblemOperator,
    mu: &[f64],
    opts: &SolverOptions,
) -> Result<HFSolution> {
    let t0 = Instant::now();
    problem.check_parameter(mu)?;
    let method = opts.pairing.unwrap_or_else(|| problem.default_pairing());
    let n_free = problem.free.len();

    let u_d = problem.dirichlet_values(mu);
    let load = problem.rhs(mu)?;
    let coupled = op.k_full.matvec(&u_d);
    let f_eff = DVec::from_iterator(
        n_free,
        problem.free.iter().map(|&d| load[d] - coupled[d]),
    );

    let compose = |u_free: &DVec| {
        let mut u = u_d.clone();
        for (k, &d) in problem.free.iter().enumerate() {
            u[d] = u_free[k];
        }
        u
    };

    // Activity is keyed by slave node id so it survives re-pairing.
    let mut active: BTreeSet<usize> = BTreeSet::new();
    let mut initialized = false;
    let mut u_full = u_d.clone();
    let mut u_free = DVec::zeros(n_free);
    let mut report = SolveReport::default();
    let mut last = None;

    for iter in 1..=opts.max_iter {
        let ops = problem.constraints_at(mu, &u_full, method)?;
        let (c_free, g_eff, supported) = ops.restricted(&problem.free, &u_d);

        if !initialized {
            // Start from the single supported constraint with the smallest
            // effective gap; an empty set if there are no constraints.
            if let Some(row) = (0..ops.n_constraints())
                .filter(|&i| supported[i])
                .min_by(|&a, &b| g_eff[a].total_cmp(&g_eff[b]))
            {
                active.insert(ops.slave_nodes[row]);
            }
            initialized = true;
        }

        let mut active_rows: Vec<usize> = (0..ops.n_constraints())
            .filter(|&i| supported[i] && active.contains(&ops.slave_nodes[i]))
            .collect();

        // Solve on the current active set; a singular Schur block means the
        // active rows are linearly dependent, so shed rows until it factors.
        // Shed rows sit out the rest of this iteration, re-pairing may bring
        // them back later.
        let mut shed_this_iter: BTreeSet<usize> = BTreeSet::new();
        let (new_u_free, lambda_active) = loop {
            let c_a = DMat::from_fn(active_rows.len(), n_free, |r, c| {
                c_free[(active_rows[r], c)]
            });
            let g_a = DVec::from_iterator(
                active_rows.len(),
                active_rows.iter().map(|&i| g_eff[i]),
            );
            match solve_saddle(&op.factor, &c_a, &f_eff, &g_a) {
                Ok(pair) => break pair,
                Err(Error::RedundantActiveConstraints) => {
                    let dropped = active_rows.pop().expect("nonempty on redundancy");
                    let node = ops.slave_nodes[dropped];
                    active.remove(&node);
                    shed_this_iter.insert(node);
                    report.dropped_rows.push(node);
                }
                Err(e) => return Err(e),
            }
        };

        let new_u = compose(&new_u_free);
        let viol = &c_free * &new_u_free - &g_eff;

        let mut new_active = BTreeSet::new();
        for (slot, &row) in active_rows.iter().enumerate() {
            if lambda_active[slot] > 0.0 {
                new_active.insert(ops.slave_nodes[row]);
            }
        }
        for row in 0..ops.n_constraints() {
            let node = ops.slave_nodes[row];
            if supported[row]
                && !active.contains(&node)
                && !shed_this_iter.contains(&node)
                && viol[row] >= 0.0
            {
                new_active.insert(node);
            }
        }

        let du = (&new_u - &u_full).norm();
        let scale = new_u.norm().max(1.0);
        let stable = new_active == active;

        // Exactly touching, force-free constraints satisfy the sign rules in
        // both states and toggle forever. Once u is stationary, accept the
        // iterate if every toggling row is such a degenerate contact.
        let degenerate_toggle = !stable && du <= opts.tol * scale && {
            let ctol = opts.tol * (1.0 + f_eff.amax());
            let row_of = |node: &usize| ops.slave_nodes.iter().position(|m| m == node);
            active.symmetric_difference(&new_active).all(|node| {
                let Some(row) = row_of(node) else { return false };
                let lam = active_rows
                    .iter()
                    .position(|&r| r == row)
                    .map_or(0.0, |slot| lambda_active[slot]);
                lam.abs() <= ctol && viol[row].abs() <= ctol
            })
        };

        u_full = new_u;
        u_free = new_u_free;
        active = new_active;
        report.iterations = iter;
        report.last_increment = du / scale;
        report.active_trace.push(active.len());
        last = Some((ops, c_free, g_eff, supported, active_rows, lambda_active));

        if (stable || degenerate_toggle) && du <= opts.tol * scale {
            report.converged = true;
            break;
        }
    }

    let (ops, c_free, g_eff, supported, active_rows, lambda_active) =
        last.expect("max_iter >= 1");

    let mut lambda = DVec::zeros(ops.n_constraints());
    for (slot, &row) in active_rows.iter().enumerate() {
        lambda[row] = lambda_active[slot];
    }

    // KKT residuals of the returned iterate.
    let mut residual_full = op.k_full.matvec(&u_full) - &load;
    for (i, row) in ops.rows.iter().enumerate() {
        for &(j, v) in row {
            residual_full[j] += v * lambda[i];
        }
    }
    report.equilibrium_residual = problem
        .free
        .iter()
        .map(|&d| residual_full[d] * residual_full[d])
        .sum::<f64>()
        .sqrt();
    let viol = &c_free * &u_free - &g_eff;
    report.max_penetration = (0..ops.n_constraints())
        .filter(|&i| supported[i])
        .map(|i| viol[i])
        .fold(0.0, f64::max);
    report.complementarity = lambda.dot(&viol).abs();
    report.tie_break_count = ops.pairs.iter().filter(|p| p.tie_broken).count();
    report.unpaired_slaves = match &problem.contact {
        Some(spec) => {
            let path_len = problem.mesh()?.surface(&spec.slave)?.len();
            path_len - ops.n_constraints()
        }
        None => 0,
    };
    report.wall_seconds = t0.elapsed().as_secs_f64();

    let active_nodes: Vec<usize> = active.iter().copied().collect();
    Ok(HFSolution {
        mu: mu.to_vec(),
        u: u_full,
        lambda,
        lambda_nodes: ops.slave_nodes.clone(),
        active_nodes,
        pairing: method,
        report,
    })
}

impl HFSolution {
    /// Total force exerted on the slave body through the interface: the
    /// vector sum of `-C^T lambda` over the slave-node entries. For the rope
    /// this is the (scalar, upward) total obstacle reaction.
    pub fn total_contact_force(&self, problem: &ParametricProblem) -> Result<DVec> {
        let ops = problem.constraints_at(&self.mu, &self.u, self.pairing)?;
        let comps = problem.components;
        let mut force = DVec::zeros(comps);
        for (i, &node) in ops.slave_nodes.iter().enumerate() {
            for &(j, v) in &ops.rows[i] {
                for c in 0..comps {
                    if j == comps * node + c {
                        force[c] -= v * self.lambda[i];
                    }
                }
            }
        }
        Ok(force)
    }

    /// Plain-text snapshot: parameter, convergence data and both solution
    /// fields. Layout: `#`-prefixed header lines, then `field,index,value`
    /// records with `u` indexed by dof and `lambda` by constraint row.
    pub fn write_snapshot<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(
            w,
            "# mu: {}",
            self.mu
                .iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(" ")
        )?;
        writeln!(w, "# pairing: {:?}", self.pairing)?;
        writeln!(w, "# converged: {}", self.report.converged)?;
        writeln!(w, "# iterations: {}", self.report.iterations)?;
        writeln!(w, "# lambda_slave_nodes: {}", join(&self.lambda_nodes))?;
        writeln!(w, "# active_slave_nodes: {}", join(&self.active_nodes))?;
        writeln!(w, "field,index,value")?;
        for (i, v) in self.u.iter().enumerate() {
            writeln!(w, "u,{i},{v:.17e}")?;
        }
        for (i, v) in self.lambda.iter().enumerate() {
            writeln!(w, "lambda,{i},{v:.17e}")?;
        }
        Ok(())
    }
}

/// Reads back a snapshot written by [`HFSolution::write_snapshot`]. Returns
/// the parameter, displacement, multipliers and active node list.
pub fn read_snapshot<R: BufRead>(r: R) -> Result<(Vec<f64>, DVec, DVec, Vec<usize>)> {
    let mut mu = Vec::new();
    let mut active = Vec::new();
    let mut u = Vec::new();
    let mut lambda = Vec::new();
    for line in r.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# mu:") {
            mu = rest
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad mu in snapshot: {e}")))?;
        } else if let Some(rest) = line.strip_prefix("# active_slave_nodes:") {
            active = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad active set in snapshot: {e}")))?;
        } else if line.starts_with('#') || line.starts_with("field") || line.is_empty() {
            continue;
        } else {
            let mut parts = line.splitn(3, ',');
            let field = parts.next().unwrap_or_default();
            let bad = |what: &str| Error::Config(format!("bad {what} in snapshot line: {line}"));
            let _index: usize = parts
                .next()
                .ok_or_else(|| bad("index"))?
                .parse()
                .map_err(|_| bad("index"))?;
            let value: f64 = parts
                .next()
                .ok_or_else(|| bad("value"))?
                .parse()
                .map_err(|_| bad("value"))?;
            match field {
                "u" => u.push(value),
                "lambda" => lambda.push(value),
                other => return Err(Error::Config(format!("unknown snapshot field {other}"))),
            }
        }
    }
    Ok((
        mu,
        DVec::from_vec(u),
        DVec::from_vec(lambda),
        active,
    ))
}
