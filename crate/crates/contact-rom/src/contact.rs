//! Contact pair detection and discrete constraint assembly.
//!
//! Pairing runs in the deformed configuration. A pair stores the approach
//! direction `n` pointing from the slave node toward the master surface; the
//! constraint row measures relative displacement along `n` and the gap `g`
//! the distance between the paired material points in reference coordinates.
//! The deformed signed distance is then `g - C u`, so feasibility reads
//! `C u - g <= 0` and positive violations are penetrations.

use crate::{DMat, DVec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMethod {
    NodeToNode,
    ClosestPoint,
    RayTracing,
}

/// Ordered boundary path with reference and current (deformed) coordinates.
#[derive(Clone)]
pub struct SurfacePath {
    /// Global node ids along the path.
    pub nodes: Vec<usize>,
    pub reference: Vec<[f64; 2]>,
    pub current: Vec<[f64; 2]>,
}

impl SurfacePath {
    pub fn from_reference(nodes: Vec<usize>, reference: Vec<[f64; 2]>) -> Self {
        let current = reference.clone();
        Self {
            nodes,
            reference,
            current,
        }
    }

    /// Updates current coordinates from a full displacement vector with
    /// `components` dofs per node.
    pub fn displace(&mut self, u: &DVec, components: usize) {
        for (k, &node) in self.nodes.iter().enumerate() {
            for c in 0..components.min(2) {
                self.current[k][c] = self.reference[k][c] + u[components * node + c];
            }
        }
    }

    pub fn n_segments(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    fn seg_current(&self, s: usize) -> ([f64; 2], [f64; 2]) {
        (self.current[s], self.current[s + 1])
    }

    fn seg_reference(&self, s: usize) -> ([f64; 2], [f64; 2]) {
        (self.reference[s], self.reference[s + 1])
    }

    /// Outward unit normals at path nodes in the current configuration,
    /// averaging the two adjacent segment normals at interior nodes.
    pub fn current_node_normals(&self) -> Vec<[f64; 2]> {
        let mut normals = vec![[0.0f64; 2]; self.nodes.len()];
        for s in 0..self.n_segments() {
            let (a, b) = self.seg_current(s);
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = (tx * tx + ty * ty).sqrt();
            let n = [ty / len, -tx / len];
            for c in 0..2 {
                normals[s][c] += n[c];
                normals[s + 1][c] += n[c];
            }
        }
        for n in &mut normals {
            let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
            n[0] /= len;
            n[1] /= len;
        }
        normals
    }
}

/// One slave node paired with a point on a master segment.
#[derive(Clone, Debug)]
pub struct ContactPair {
    /// Position of the slave node within its surface path.
    pub slave_index: usize,
    /// Global node id of the slave node.
    pub slave_node: usize,
    /// Segment index on the master path.
    pub master_segment: usize,
    /// Local coordinate of the paired point on the segment, in [0, 1].
    pub projection_coord: f64,
    /// Approach direction from slave toward master, unit length.
    pub normal: [f64; 2],
    /// Signed distance in the current configuration (negative = penetration).
    pub gap: f64,
    /// Set when another candidate was equally close and the lowest segment
    /// id was chosen.
    pub tie_broken: bool,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Pairs every slave node with the closest point of the master surface in
/// the current configuration.
///
/// Ties between equally distant segments go to the lowest segment id and are
/// flagged. A slave node whose projection clamps past the very first or very
/// last master vertex lies beyond the surface and stays unpaired.
pub fn pair_closest_point(slave: &SurfacePath, master: &SurfacePath) -> Vec<ContactPair> {
    let mut pairs = Vec::new();
    let last_seg = master.n_segments() - 1;
    for (si, &snode) in slave.nodes.iter().enumerate() {
        let p = slave.current[si];
        let mut best: Option<(f64, usize, f64, f64)> = None; // d2, seg, t_raw, t
        let mut tie = false;
        for s in 0..master.n_segments() {
            let (a, b) = master.seg_current(s);
            let e = sub(b, a);
            let ee = dot(e, e);
            if ee == 0.0 {
                continue;
            }
            let t_raw = dot(sub(p, a), e) / ee;
            let t = t_raw.clamp(0.0, 1.0);
            let q = [a[0] + t * e[0], a[1] + t * e[1]];
            let d2 = dot(sub(p, q), sub(p, q));
            match best {
                Some((bd2, ..)) => {
                    let tol = 1e-12 * (1.0 + bd2);
                    if d2 < bd2 - tol {
                        best = Some((d2, s, t_raw, t));
                        tie = false;
                    } else if (d2 - bd2).abs() <= tol {
                        tie = true;
                    }
                }
                None => best = Some((d2, s, t_raw, t)),
            }
        }
        let Some((_, seg, t_raw, t)) = best else {
            continue;
        };
        if (seg == 0 && t_raw < 0.0) || (seg == last_seg && t_raw > 1.0) {
            continue;
        }
        let (a, b) = master.seg_current(seg);
        // Approach direction = inward master normal (master faces the slave).
        let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
        let len = (tx * tx + ty * ty).sqrt();
        let n = [-ty / len, tx / len];
        let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        pairs.push(ContactPair {
            slave_index: si,
            slave_node: snode,
            master_segment: seg,
            projection_coord: t,
            normal: n,
            gap: dot(sub(q, p), n),
            tie_broken: tie,
        });
    }
    pairs
}

/// Pairs each slave node by shooting a ray along its outward normal and
/// taking the nearest intersection with the master surface (behind or ahead,
/// so slight penetrations resolve to the surface they crossed). Nodes whose
/// ray misses stay unpaired.
pub fn pair_ray_tracing(slave: &SurfacePath, master: &SurfacePath) -> Vec<ContactPair> {
    let normals = slave.current_node_normals();
    let mut pairs = Vec::new();
    for (si, &snode) in slave.nodes.iter().enumerate() {
        let p = slave.current[si];
        let d = normals[si];
        let mut best: Option<(f64, usize, f64)> = None; // t, seg, s
        for seg in 0..master.n_segments() {
            let (a, b) = master.seg_current(seg);
            let e = sub(b, a);
            // p + t d = a + s e
            let det = d[0] * (-e[1]) - d[1] * (-e[0]);
            if det.abs() < 1e-14 {
                continue;
            }
            let rhs = sub(a, p);
            let t = (rhs[0] * (-e[1]) - rhs[1] * (-e[0])) / det;
            let s = (d[0] * rhs[1] - d[1] * rhs[0]) / det;
            if !(-1e-12..=1.0 + 1e-12).contains(&s) {
                continue;
            }
            let better = match best {
                Some((bt, ..)) => t.abs() < bt.abs() - 1e-15,
                None => true,
            };
            if better {
                best = Some((t, seg, s.clamp(0.0, 1.0)));
            }
        }
        if let Some((t, seg, s)) = best {
            pairs.push(ContactPair {
                slave_index: si,
                slave_node: snode,
                master_segment: seg,
                projection_coord: s,
                normal: d,
                gap: t,
                tie_broken: false,
            });
        }
    }
    pairs
}

/// Discrete constraint operators for one pairing state.
#[derive(Clone)]
pub struct ConstraintOperators {
    /// Sparse constraint rows over the full dof vector.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Reference gaps, one per row.
    pub gaps: DVec,
    /// Global slave node id per row.
    pub slave_nodes: Vec<usize>,
    pub pairs: Vec<ContactPair>,
    pub pairing_method: PairingMethod,
    pub n_dofs: usize,
}

impl ConstraintOperators {
    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    /// C u
    pub fn apply_vec(&self, u: &DVec) -> DVec {
        let mut out = DVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * u[j]).sum();
        }
        out
    }

    /// C u - g
    pub fn violations(&self, u: &DVec) -> DVec {
        self.apply_vec(u) - &self.gaps
    }

    /// C Phi for a dense basis, without materializing C.
    pub fn apply_basis(&self, phi: &DMat) -> DMat {
        let mut out = DMat::zeros(self.rows.len(), phi.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                for c in 0..phi.ncols() {
                    out[(i, c)] += v * phi[(j, c)];
                }
            }
        }
        out
    }

    pub fn dense(&self) -> DMat {
        let mut c = DMat::zeros(self.rows.len(), self.n_dofs);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                c[(i, j)] += v;
            }
        }
        c
    }

    /// Restriction to free dofs: dense `C_f` plus the effective gap
    /// `g - C_d u_d` absorbing prescribed displacements. The mask marks rows
    /// that retain support on free dofs; rows without support must never be
    /// activated (their Schur block would be singular).
    pub fn restricted(
        &self,
        free: &[usize],
        dirichlet_values: &DVec,
    ) -> (DMat, DVec, Vec<bool>) {
        let mut pos = vec![usize::MAX; self.n_dofs];
        for (local, &global) in free.iter().enumerate() {
            pos[global] = local;
        }
        let mut c = DMat::zeros(self.rows.len(), free.len());
        let mut g = self.gaps.clone();
        let mut supported = vec![false; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                if pos[j] != usize::MAX {
                    c[(i, pos[j])] += v;
                    supported[i] = true;
                } else {
                    g[i] -= v * dirichlet_values[j];
                }
            }
        }
        (c, g, supported)
    }
}

/// Builds constraint rows for the given pairs: `+n` on the slave node dofs,
/// `-(1-xi) n` and `-xi n` on the master segment end nodes, and the gap
/// evaluated between the same material points in reference coordinates.
pub fn assemble_constraints(
    pairs: &[ContactPair],
    slave: &SurfacePath,
    master: &SurfacePath,
    components: usize,
    n_dofs: usize,
    method: PairingMethod,
) -> ConstraintOperators {
    let mut rows = Vec::with_capacity(pairs.len());
    let mut gaps = DVec::zeros(pairs.len());
    let mut slave_nodes = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let xi = pair.projection_coord;
        let n = pair.normal;
        let (ma, mb) = (
            master.nodes[pair.master_segment],
            master.nodes[pair.master_segment + 1],
        );
        let mut row = Vec::with_capacity(3 * components);
        for c in 0..components.min(2) {
            if n[c] != 0.0 {
                row.push((components * pair.slave_node + c, n[c]));
                row.push((components * ma + c, -(1.0 - xi) * n[c]));
                row.push((components * mb + c, -xi * n[c]));
            }
        }
        let p_ref = slave.reference[pair.slave_index];
        let (a_ref, b_ref) = master.seg_reference(pair.master_segment);
        let q_ref = [
            a_ref[0] + xi * (b_ref[0] - a_ref[0]),
            a_ref[1] + xi * (b_ref[1] - a_ref[1]),
        ];
        gaps[i] = dot(sub(q_ref, p_ref), n);
        rows.push(row);
        slave_nodes.push(pair.slave_node);
    }
    ConstraintOperators {
        rows,
        gaps,
        slave_nodes,
        pairs: pairs.to_vec(),
        pairing_method: method,
        n_dofs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(coords: Vec<[f64; 2]>, first_node: usize) -> SurfacePath {
        let nodes = (first_node..first_node + coords.len()).collect();
        SurfacePath::from_reference(nodes, coords)
    }

    #[test]
    fn flat_master_projects_to_the_perpendicular_foot() {
        // Slave below a flat master: approach direction is +y. The master
        // body lies above its surface, so with the body-on-left convention
        // the path runs left to right and its outward normal faces the slave.
        let slave = path(vec![[0.3, 0.0]], 0);
        let master = path(vec![[0.0, 0.5], [1.0, 0.5]], 10);
        let pairs = pair_closest_point(&slave, &master);
        assert_eq!(pairs.len(), 1);
        let p = &pairs[0];
        assert!((p.projection_coord - 0.3).abs() < 1e-12);
        assert!((p.normal[0]).abs() < 1e-12 && (p.normal[1] - 1.0).abs() < 1e-12);
        assert!((p.gap - 0.5).abs() < 1e-12);
        assert!(!p.tie_broken);
    }

    #[test]
    fn equidistant_projection_breaks_ties_to_the_lowest_segment() {
        // Slave directly under the shared vertex of two collinear segments.
        let slave = path(vec![[1.0, -0.4]], 0);
        let master = path(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 10);
        let pairs = pair_closest_point(&slave, &master);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].master_segment, 0);
        assert!(pairs[0].tie_broken);
        assert!((pairs[0].projection_coord - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slave_beyond_the_master_end_stays_unpaired() {
        let slave = path(vec![[-0.5, -0.1], [0.5, -0.1]], 0);
        let master = path(vec![[0.0, 0.0], [1.0, 0.0]], 10);
        let pairs = pair_closest_point(&slave, &master);
        // Node at x=-0.5 projects past the first master vertex (x=0).
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].slave_node, 1);
    }

    #[test]
    fn conforming_pair_reproduces_the_reference_row() {
        // Slave node 0 below master nodes 1-2; projection lands on node 1.
        let slave = path(vec![[0.0, 0.0]], 0);
        let master = path(vec![[0.0, 0.2], [1.0, 0.2]], 1);
        let pairs = pair_closest_point(&slave, &master);
        let ops = assemble_constraints(&pairs, &slave, &master, 2, 6, PairingMethod::ClosestPoint);
        assert_eq!(ops.n_constraints(), 1);
        let c = ops.dense();
        let want = [0.0, 1.0, 0.0, -1.0, 0.0, 0.0];
        for j in 0..6 {
            assert!(
                (c[(0, j)] - want[j]).abs() < 1e-12,
                "dof {j}: {} vs {}",
                c[(0, j)],
                want[j]
            );
        }
        assert!((ops.gaps[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn midpoint_projection_splits_master_weights_evenly() {
        let slave = path(vec![[0.5, 0.0]], 0);
        let master = path(vec![[0.0, 0.3], [1.0, 0.3]], 1);
        let pairs = pair_closest_point(&slave, &master);
        assert!((pairs[0].projection_coord - 0.5).abs() < 1e-12);
        let ops = assemble_constraints(&pairs, &slave, &master, 2, 6, PairingMethod::ClosestPoint);
        let c = ops.dense();
        assert!((c[(0, 3)] + 0.5).abs() < 1e-12);
        assert!((c[(0, 5)] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn constraint_rows_conserve_the_relative_displacement_form() {
        let slave = path(
            vec![[0.0, 0.0], [0.4, -0.05], [0.8, 0.02], [1.2, 0.0]],
            0,
        );
        let master = path(vec![[1.5, 0.4], [0.7, 0.35], [-0.2, 0.45]], 4);
        let pairs = pair_closest_point(&slave, &master);
        assert!(!pairs.is_empty());
        let ops = assemble_constraints(&pairs, &slave, &master, 2, 14, PairingMethod::ClosestPoint);
        for row in &ops.rows {
            for c in 0..2 {
                let sum: f64 = row.iter().filter(|(j, _)| j % 2 == c).map(|(_, v)| v).sum();
                assert!(sum.abs() < 1e-12);
            }
        }
    }

    /// Direct per-pair oracle: each row of (C u - g) evaluates the relative
    /// normal displacement minus the reference gap of that pair.
    #[test]
    fn rows_evaluate_the_pairwise_distance_function() {
        let slave = path(vec![[0.1, 0.0], [0.5, -0.1], [0.9, 0.05]], 0);
        let master = path(vec![[1.4, 0.5], [0.6, 0.4], [-0.3, 0.6]], 3);
        let pairs = pair_closest_point(&slave, &master);
        let n_dofs = 12;
        let ops = assemble_constraints(&pairs, &slave, &master, 2, n_dofs, PairingMethod::ClosestPoint);
        let u = DVec::from_fn(n_dofs, |i, _| 0.05 * ((i as f64) * 1.7).sin());
        let viol = ops.violations(&u);
        for (i, pair) in pairs.iter().enumerate() {
            let us = [u[2 * pair.slave_node], u[2 * pair.slave_node + 1]];
            let (ma, mb) = (
                master.nodes[pair.master_segment],
                master.nodes[pair.master_segment + 1],
            );
            let xi = pair.projection_coord;
            let um = [
                (1.0 - xi) * u[2 * ma] + xi * u[2 * mb],
                (1.0 - xi) * u[2 * ma + 1] + xi * u[2 * mb + 1],
            ];
            let rel = dot(sub(us, um), pair.normal);
            let p_ref = slave.reference[pair.slave_index];
            let (a_ref, b_ref) = master.seg_reference(pair.master_segment);
            let q_ref = [
                a_ref[0] + xi * (b_ref[0] - a_ref[0]),
                a_ref[1] + xi * (b_ref[1] - a_ref[1]),
            ];
            let gap = dot(sub(q_ref, p_ref), pair.normal);
            assert!((viol[i] - (rel - gap)).abs() < 1e-12);
        }
    }

    #[test]
    fn ray_tracing_matches_closest_point_on_parallel_flats() {
        // Slave body below (its top surface walks right to left), master
        // body above (its bottom surface walks left to right).
        let slave = path(vec![[0.8, 0.0], [0.5, 0.0], [0.2, 0.0]], 0);
        let master = path(vec![[0.0, 0.25], [1.0, 0.25]], 3);
        let cp = pair_closest_point(&slave, &master);
        let rt = pair_ray_tracing(&slave, &master);
        assert_eq!(cp.len(), rt.len());
        for (a, b) in cp.iter().zip(&rt) {
            assert_eq!(a.slave_node, b.slave_node);
            assert_eq!(a.master_segment, b.master_segment);
            assert!((a.projection_coord - b.projection_coord).abs() < 1e-12);
            assert!((a.gap - b.gap).abs() < 1e-12);
            assert!((a.normal[0] - b.normal[0]).abs() < 1e-12);
            assert!((a.normal[1] - b.normal[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn ray_missing_the_master_leaves_the_node_unpaired() {
        let slave = path(vec![[5.0, 0.0], [0.5, 0.0]], 0);
        let master = path(vec![[0.0, 0.3], [1.0, 0.3]], 2);
        let pairs = pair_ray_tracing(&slave, &master);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].slave_node, 1);
    }

    /// Brute-force oracle: the ray-tracing gap against a dense polyline walk
    /// looking for the sign change of the cross product with the ray.
    #[test]
    fn curved_master_gap_matches_a_dense_intersection_scan() {
        // Slave points on an inner arc, master is an outer arc above them.
        let n_sl = 7;
        let slave_coords: Vec<[f64; 2]> = (0..n_sl)
            .map(|i| {
                let phi = 0.4 + 0.9 * (i as f64) / (n_sl - 1) as f64;
                [1.3 * phi.cos(), 1.3 * phi.sin() - 1.0]
            })
            .collect();
        // Walk the master arc with decreasing angle so its outward normal
        // (left of travel) faces the slave below.
        let n_ms = 40;
        let master_coords: Vec<[f64; 2]> = (0..=n_ms)
            .map(|i| {
                let phi = 1.5 - 1.3 * (i as f64) / n_ms as f64;
                [1.8 * phi.cos(), 1.8 * phi.sin() - 1.0]
            })
            .collect();
        let slave = path(slave_coords.clone(), 0);
        let master = path(master_coords.clone(), n_sl);
        let normals = slave.current_node_normals();
        let pairs = pair_ray_tracing(&slave, &master);
        assert_eq!(pairs.len(), n_sl);
        for pair in &pairs {
            let p = slave_coords[pair.slave_index];
            let d = normals[pair.slave_index];
            // dense scan of the polyline for a crossing of the ray line
            let mut best: Option<f64> = None;
            let fine = 20_000;
            let mut prev: Option<([f64; 2], f64)> = None;
            for k in 0..=fine {
                let s = k as f64 / fine as f64 * (master_coords.len() - 1) as f64;
                let seg = (s.floor() as usize).min(master_coords.len() - 2);
                let loc = s - seg as f64;
                let (a, b) = (master_coords[seg], master_coords[seg + 1]);
                let q = [a[0] + loc * (b[0] - a[0]), a[1] + loc * (b[1] - a[1])];
                let cross = d[0] * (q[1] - p[1]) - d[1] * (q[0] - p[0]);
                if let Some((qp, cp)) = prev {
                    if cross.signum() != cp.signum() {
                        let w = cp / (cp - cross);
                        let hit = [qp[0] + w * (q[0] - qp[0]), qp[1] + w * (q[1] - qp[1])];
                        let t = dot(sub(hit, p), d);
                        if best.map_or(true, |bt: f64| t.abs() < bt.abs()) {
                            best = Some(t);
                        }
                    }
                }
                prev = Some((q, cross));
            }
            let oracle = best.expect("scan found an intersection");
            assert!(
                (pair.gap - oracle).abs() < 1e-8,
                "gap {} vs scan {}",
                pair.gap,
                oracle
            );
        }
    }

    #[test]
    fn zero_displacement_violations_are_nonpositive_when_separated() {
        let slave = path(vec![[1.0, 0.0], [0.5, 0.1], [0.0, 0.0]], 0);
        let master = path(vec![[-0.2, 0.8], [0.5, 0.7], [1.2, 0.9]], 3);
        for (pairs, method) in [
            (pair_closest_point(&slave, &master), PairingMethod::ClosestPoint),
            (pair_ray_tracing(&slave, &master), PairingMethod::RayTracing),
        ] {
            let ops = assemble_constraints(&pairs, &slave, &master, 2, 12, method);
            let viol = ops.violations(&DVec::zeros(12));
            for i in 0..viol.len() {
                assert!(viol[i] <= 1e-12);
                assert!((viol[i] + ops.gaps[i]).abs() < 1e-14);
            }
        }
    }

    proptest! {
        /// Rigid translation of both bodies leaves pairing, rows and gaps
        /// unchanged.
        #[test]
        fn pairing_is_translation_invariant(dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
            let slave0 = path(vec![[0.1, 0.0], [0.5, -0.05], [0.9, 0.0]], 0);
            let master0 = path(vec![[1.3, 0.5], [0.5, 0.45], [-0.3, 0.55]], 3);
            let shift = |p: &SurfacePath| {
                let coords = p.reference.iter().map(|q| [q[0] + dx, q[1] + dy]).collect();
                SurfacePath::from_reference(p.nodes.clone(), coords)
            };
            let (slave1, master1) = (shift(&slave0), shift(&master0));
            let p0 = pair_closest_point(&slave0, &master0);
            let p1 = pair_closest_point(&slave1, &master1);
            prop_assert_eq!(p0.len(), p1.len());
            for (a, b) in p0.iter().zip(&p1) {
                prop_assert_eq!(a.master_segment, b.master_segment);
                prop_assert!((a.projection_coord - b.projection_coord).abs() < 1e-9);
                prop_assert!((a.gap - b.gap).abs() < 1e-9);
                prop_assert!((a.normal[0] - b.normal[0]).abs() < 1e-9);
                prop_assert!((a.normal[1] - b.normal[1]).abs() < 1e-9);
            }
            let o0 = assemble_constraints(&p0, &slave0, &master0, 2, 12, PairingMethod::ClosestPoint);
            let o1 = assemble_constraints(&p1, &slave1, &master1, 2, 12, PairingMethod::ClosestPoint);
            prop_assert!((&o0.gaps - &o1.gaps).norm() < 1e-9);
            prop_assert!((o0.dense() - o1.dense()).norm() < 1e-9);
        }
    }
}
