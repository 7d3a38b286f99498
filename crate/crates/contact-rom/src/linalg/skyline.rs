use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::{DMat, DVec};
use std::collections::BTreeMap;

/// Symmetric sparse matrix, lower triangle stored row-wise.
///
/// Assembly-oriented: `add` accumulates, mirrored entries are folded into the
/// lower triangle automatically.
#[derive(Clone)]
pub struct SymSparse {
    n: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SymSparse {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Accumulates `v` at (i, j). Off-diagonal pairs may be added on either
    /// side; only the lower half is kept.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        *self.rows[r].entry(c).or_insert(0.0) += v;
    }

    pub fn matvec(&self, x: &DVec) -> DVec {
        assert_eq!(x.len(), self.n);
        let mut y = DVec::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// Submatrix on `keep` (strictly increasing global indices).
    pub fn restrict(&self, keep: &[usize]) -> SymSparse {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut pos = vec![usize::MAX; self.n];
        for (local, &global) in keep.iter().enumerate() {
            pos[global] = local;
        }
        let mut out = SymSparse::new(keep.len());
        for &gi in keep {
            let li = pos[gi];
            for (&gj, &v) in &self.rows[gi] {
                let lj = pos[gj];
                if lj != usize::MAX {
                    out.rows[li].insert(lj, v);
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMat {
        let mut a = DMat::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    /// Undirected adjacency (no self loops), for ordering algorithms.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                if j != i && v != 0.0 {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        adj
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SymSparse) -> Vec<usize> {
    let n = a.dim();
    let adj = a.adjacency();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> Vec<Vec<usize>> {
        let mut seen = visited.to_vec();
        let mut levels = vec![vec![start]];
        seen[start] = true;
        loop {
            let mut next = Vec::new();
            for &u in levels.last().unwrap() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    };

    for root_candidate in 0..n {
        if visited[root_candidate] {
            continue;
        }
        // Pseudo-peripheral start: walk to a min-degree node of the deepest
        // BFS level until the eccentricity stops growing.
        let mut start = root_candidate;
        let mut depth = 0;
        for _ in 0..6 {
            let levels = bfs_levels(start, &visited);
            if levels.len() <= depth {
                break;
            }
            depth = levels.len();
            let last = levels.last().unwrap();
            start = *last.iter().min_by_key(|&&v| degree[v]).unwrap();
        }

        let mut queue = std::collections::VecDeque::from([start]);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            nbrs.sort_by_key(|&v| (degree[v], v));
            for v in nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope Cholesky factor of a permuted symmetric sparse matrix.
///
/// Rows are stored densely from their first nonzero column to the diagonal;
/// fill stays inside the envelope, so one RCM pass up front keeps it tight.
pub struct SkylineChol {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    first_col: Vec<usize>,
    /// env[i] covers columns first_col[i]..=i of row i.
    env: Vec<Vec<f64>>,
}

impl SkylineChol {
    /// Factors `a` with reverse Cuthill-McKee reordering.
    pub fn new(a: &SymSparse) -> Result<Self> {
        Self::with_permutation(a, reverse_cuthill_mckee(a))
    }

    pub fn with_permutation(a: &SymSparse, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        assert_eq!(perm.len(), n);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first_col: Vec<usize> = (0..n).collect();
        for (old_i, row) in a.rows.iter().enumerate() {
            for &old_j in row.keys() {
                let (ni, nj) = (inv[old_i], inv[old_j]);
                let (hi, lo) = if ni >= nj { (ni, nj) } else { (nj, ni) };
                first_col[hi] = first_col[hi].min(lo);
            }
        }

        let mut env: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![0.0; i - first_col[i] + 1])
            .collect();
        for (old_i, row) in a.rows.iter().enumerate() {
            for (&old_j, &v) in row {
                let (ni, nj) = (inv[old_i], inv[old_j]);
                let (hi, lo) = if ni >= nj { (ni, nj) } else { (nj, ni) };
                env[hi][lo - first_col[hi]] += v;
            }
        }

        // In-place LL^T restricted to the envelope.
        for i in 0..n {
            let fi = first_col[i];
            for j in fi..i {
                let fj = first_col[j];
                let lo = fi.max(fj);
                let mut s = env[i][j - fi];
                for k in lo..j {
                    s -= env[i][k - fi] * env[j][k - fj];
                }
                env[i][j - fi] = s / env[j][j - fj];
            }
            let mut d = env[i][i - fi];
            for k in fi..i {
                d -= env[i][k - fi] * env[i][k - fi];
            }
            if d <= 0.0 {
                return Err(Error::SingularOperator(format!(
                    "non-positive pivot {d:.3e} at reordered row {i}"
                )));
            }
            env[i][i - fi] = d.sqrt();
        }

        Ok(Self {
            n,
            perm,
            first_col,
            env,
        })
    }

    /// Envelope size, for diagnostics.
    pub fn stored_entries(&self) -> usize {
        self.env.iter().map(Vec::len).sum()
    }
}

impl SpdFactor for SkylineChol {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve_vec(&self, b: &DVec) -> DVec {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = DVec::zeros(n);
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // L y' = P b
        for i in 0..n {
            let fi = self.first_col[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.env[i][k - fi] * y[k];
            }
            y[i] = s / self.env[i][i - fi];
        }
        // L^T x' = y'
        for i in (0..n).rev() {
            let fi = self.first_col[i];
            y[i] /= self.env[i][i - fi];
            let xi = y[i];
            for k in fi..i {
                y[k] -= self.env[i][k - fi] * xi;
            }
        }
        let mut x = DVec::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}
