//! Offline training stage: snapshot generation across the parameter space,
//! greedy cone-projection selection of dual snapshots, nested training
//! hierarchies, monolithic dictionaries, and the on-disk snapshot store.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hf::{solve_contact, HFSolution, SolverOptions};
use crate::linalg::nnls;
use crate::problems::ParametricProblem;
use crate::{DMat, DVec};

/// High-fidelity solutions over a training set, columns aligned with
/// `parameters`. Dual rows follow `ParametricProblem::dual_nodes`, so
/// multiplier vectors from different parameter points are comparable even
/// when the pairing changed between them.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub parameters: Vec<Vec<f64>>,
    /// Primal snapshots, one full-dof displacement column per parameter.
    pub u: DMat,
    /// Dual snapshots, nonnegative, zero at unpaired or inactive nodes.
    pub lambda: DMat,
    pub problem_tag: String,
    /// Parameter points whose solve did not converge, with the reason.
    pub excluded: Vec<ExcludedSnapshot>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExcludedSnapshot {
    pub mu: Vec<f64>,
    pub reason: String,
}

impl SnapshotSet {
    pub fn n_snapshots(&self) -> usize {
        self.parameters.len()
    }

    /// New set keeping the given columns, in the given order.
    pub fn subset(&self, columns: &[usize]) -> SnapshotSet {
        SnapshotSet {
            parameters: columns.iter().map(|&c| self.parameters[c].clone()).collect(),
            u: self.u.select_columns(columns),
            lambda: self.lambda.select_columns(columns),
            problem_tag: self.problem_tag.clone(),
            excluded: self.excluded.clone(),
        }
    }

    /// Column index of an exactly matching parameter point.
    pub fn position_of(&self, mu: &[f64]) -> Option<usize> {
        self.parameters.iter().position(|p| p.as_slice() == mu)
    }
}

/// Scatters a solution's multipliers into the canonical dual indexing of the
/// problem. Entries off the final pairing stay zero; converged multipliers
/// are nonnegative up to solver round-off, which is clamped.
pub fn dual_snapshot(problem: &ParametricProblem, sol: &HFSolution) -> Result<DVec> {
    let dual_nodes = problem.dual_nodes()?;
    let mut pos = vec![usize::MAX; problem.n_nodes()];
    for (k, &n) in dual_nodes.iter().enumerate() {
        pos[n] = k;
    }
    let mut out = DVec::zeros(dual_nodes.len());
    for (r, &node) in sol.lambda_nodes.iter().enumerate() {
        debug_assert!(sol.lambda[r] > -1e-9 * (1.0 + sol.lambda.amax()));
        debug_assert_ne!(pos[node], usize::MAX, "multiplier on a non-dual node");
        out[pos[node]] = sol.lambda[r].max(0.0);
    }
    Ok(out)
}

/// Solves the problem at every training point in parallel and collects the
/// converged solutions into a snapshot set. Non-converged points are skipped
/// with a warning on stderr and recorded in `excluded`; hard solver errors
/// abort. Errors with `EmptyTrainingSet` when no points are given or none
/// converge.
pub fn generate_training_set(
    problem: &ParametricProblem,
    training: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<SnapshotSet> {
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    for mu in training {
        problem.check_parameter(mu)?;
    }
    let solutions: Vec<Result<HFSolution>> = training
        .par_iter()
        .map(|mu| solve_contact(problem, mu, opts))
        .collect();

    let mut parameters = Vec::new();
    let mut u_cols: Vec<DVec> = Vec::new();
    let mut l_cols: Vec<DVec> = Vec::new();
    let mut excluded = Vec::new();
    for (mu, sol) in training.iter().zip(solutions) {
        let sol = sol?;
        if !sol.report.converged {
            let reason = format!(
                "no convergence after {} iterations, last increment {:.3e}",
                sol.report.iterations, sol.report.last_increment
            );
            eprintln!("warning: snapshot at mu = {mu:?} excluded: {reason}");
            excluded.push(ExcludedSnapshot {
                mu: mu.clone(),
                reason,
            });
            continue;
        }
        parameters.push(mu.clone());
        l_cols.push(dual_snapshot(problem, &sol)?);
        u_cols.push(sol.u);
    }
    if parameters.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }

    Ok(SnapshotSet {
        u: DMat::from_columns(&u_cols),
        lambda: DMat::from_columns(&l_cols),
        parameters,
        problem_tag: problem.kind.tag().to_string(),
        excluded,
    })
}

/// Dual snapshots picked greedily by cone-projection error.
#[derive(Clone, Debug)]
pub struct DualBasisCPG {
    /// Input column indices in selection order.
    pub selected_indices: Vec<usize>,
    /// The selected columns, nonnegative, unnormalized.
    pub vectors: DMat,
    pub tolerance: f64,
}

/// Relative distance from `x` to the cone of nonnegative combinations of the
/// columns of `basis`. Zero vectors are inside every cone.
fn cone_error(basis: &DMat, x: &DVec) -> f64 {
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    if basis.ncols() == 0 {
        return 1.0;
    }
    let alpha = nnls(basis, x);
    (x - basis * alpha).norm() / norm
}

/// Greedy dual-basis selection: starting from the largest-norm column, each
/// round adds the column farthest (in relative norm) from the cone spanned by
/// the current selection, until every remaining column projects within
/// `delta`. Ties go to the lowest column index, which makes the selected set
/// independent of input column order whenever no errors tie.
pub fn cpg_select(lambda: &DMat, delta: f64) -> DualBasisCPG {
    debug_assert!(lambda.iter().all(|&v| v >= -1e-12), "dual snapshots must be nonnegative");
    assert!(delta >= 0.0, "negative selection tolerance");
    let n = lambda.ncols();
    let empty = |sel: Vec<usize>| DualBasisCPG {
        vectors: DMat::zeros(lambda.nrows(), sel.len()),
        selected_indices: sel,
        tolerance: delta,
    };
    if n == 0 {
        return empty(Vec::new());
    }

    let mut first = 0;
    for j in 1..n {
        if lambda.column(j).norm() > lambda.column(first).norm() {
            first = j;
        }
    }
    if lambda.column(first).norm() == 0.0 {
        // Contact never closed anywhere; there is nothing to span.
        return empty(Vec::new());
    }

    let mut selected = vec![first];
    loop {
        let basis = lambda.select_columns(&selected);
        let errors: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                if selected.contains(&j) {
                    0.0
                } else {
                    cone_error(&basis, &lambda.column(j).into_owned())
                }
            })
            .collect();
        let mut best = 0;
        for j in 1..n {
            if errors[j] > errors[best] {
                best = j;
            }
        }
        // Selected columns score exactly zero, so once nothing beats delta
        // (delta = 0 included) the selection is complete.
        if errors[best] <= delta {
            break;
        }
        selected.push(best);
    }

    DualBasisCPG {
        vectors: lambda.select_columns(&selected),
        selected_indices: selected,
        tolerance: delta,
    }
}

/// Uniform training hierarchy: level `n` has `2^n + 1` points per parameter
/// dimension including both endpoints, and every level-`n` point reappears
/// bitwise at level `n + 1` (the new points are the midpoints). Multiple
/// parameter dimensions tensorize, last dimension fastest.
pub fn nested_sets(problem: &ParametricProblem, level: u32) -> Vec<Vec<f64>> {
    let per_dim: Vec<Vec<f64>> = problem
        .parameter_space
        .iter()
        .map(|&[lo, hi]| {
            let m = (1usize << level) as f64;
            (0..=(1usize << level))
                .map(|i| lo + (hi - lo) * (i as f64 / m))
                .collect()
        })
        .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &per_dim {
        out = out
            .iter()
            .flat_map(|head| {
                axis.iter().map(move |&v| {
                    let mut p = head.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Snapshot columns with the pressure block stacked under the displacement
/// block, for methods that approximate the pair `(u, lambda)` jointly.
#[derive(Clone, Debug)]
pub struct MonolithicDictionary {
    /// Stacked `[u; lambda]` columns, unnormalized.
    pub columns: DMat,
    /// Row where the dual block starts (= primal dimension).
    pub split_index: usize,
}

impl MonolithicDictionary {
    pub fn n_columns(&self) -> usize {
        self.columns.ncols()
    }

    /// Recovers the primal and dual blocks.
    pub fn split(&self) -> (DMat, DMat) {
        let n_u = self.split_index;
        let n_l = self.columns.nrows() - n_u;
        (
            self.columns.rows(0, n_u).into_owned(),
            self.columns.rows(n_u, n_l).into_owned(),
        )
    }

    /// Splits one stacked vector into its primal and dual parts.
    pub fn split_vec(&self, x: &DVec) -> (DVec, DVec) {
        let n_u = self.split_index;
        (
            x.rows(0, n_u).into_owned(),
            x.rows(n_u, x.nrows() - n_u).into_owned(),
        )
    }
}

pub fn build_monolithic_dictionary(s: &SnapshotSet) -> MonolithicDictionary {
    let n_u = s.u.nrows();
    let n_l = s.lambda.nrows();
    let mut columns = DMat::zeros(n_u + n_l, s.n_snapshots());
    columns.rows_mut(0, n_u).copy_from(&s.u);
    columns.rows_mut(n_u, n_l).copy_from(&s.lambda);
    MonolithicDictionary {
        columns,
        split_index: n_u,
    }
}

/// Sidecar metadata persisted next to every stored snapshot set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub problem: String,
    pub set_name: String,
    /// Primal rows; also the split index of the stacked CSV columns.
    pub n_u: usize,
    pub n_dual: usize,
    pub parameters: Vec<Vec<f64>>,
    pub excluded: Vec<ExcludedSnapshot>,
    pub solver: SolverOptions,
    /// Seed of any randomized downstream processing; snapshot generation
    /// itself is deterministic.
    pub seed: Option<u64>,
}

/// Directory-per-set snapshot store: `<root>/<problem>/<set-name>/` holds
/// `snapshots.csv` (one stacked `[u; lambda]` column per line, full
/// precision) and `meta.json`.
pub struct SnapshotStore {
    pub root: PathBuf,
}

impl SnapshotStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        SnapshotStore { root: root.into() }
    }

    pub fn dir(&self, problem: &str, set_name: &str) -> PathBuf {
        self.root.join(problem).join(set_name)
    }

    pub fn save(
        &self,
        set: &SnapshotSet,
        set_name: &str,
        solver: &SolverOptions,
        seed: Option<u64>,
    ) -> Result<PathBuf> {
        let dir = self.dir(&set.problem_tag, set_name);
        fs::create_dir_all(&dir)?;

        let meta = SnapshotMeta {
            problem: set.problem_tag.clone(),
            set_name: set_name.to_string(),
            n_u: set.u.nrows(),
            n_dual: set.lambda.nrows(),
            parameters: set.parameters.clone(),
            excluded: set.excluded.clone(),
            solver: *solver,
            seed,
        };
        fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;

        let mut w = BufWriter::new(fs::File::create(dir.join("snapshots.csv"))?);
        for k in 0..set.n_snapshots() {
            let col: Vec<String> = set
                .u
                .column(k)
                .iter()
                .chain(set.lambda.column(k).iter())
                .map(|v| format!("{v:.17e}"))
                .collect();
            writeln!(w, "{}", col.join(","))?;
        }
        w.flush()?;
        Ok(dir)
    }

    pub fn load(&self, problem: &str, set_name: &str) -> Result<SnapshotSet> {
        let dir = self.dir(problem, set_name);
        let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;

        let reader = BufReader::new(fs::File::open(dir.join("snapshots.csv"))?);
        let mut u_cols = Vec::new();
        let mut l_cols = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad snapshot entry: {e}")))?;
            if vals.len() != meta.n_u + meta.n_dual {
                return Err(Error::Config(format!(
                    "snapshot column has {} entries, expected {}",
                    vals.len(),
                    meta.n_u + meta.n_dual
                )));
            }
            u_cols.push(DVec::from_vec(vals[..meta.n_u].to_vec()));
            l_cols.push(DVec::from_vec(vals[meta.n_u..].to_vec()));
        }
        if u_cols.len() != meta.parameters.len() {
            return Err(Error::Config(format!(
                "{} snapshot columns for {} parameter points",
                u_cols.len(),
                meta.parameters.len()
            )));
        }

        Ok(SnapshotSet {
            u: DMat::from_columns(&u_cols),
            lambda: DMat::from_columns(&l_cols),
            parameters: meta.parameters,
            problem_tag: meta.problem,
            excluded: meta.excluded,
        })
    }
}
