//! Two-dimensional quadrilateral meshes with named boundary surfaces.
//!
//! All builders orient elements counterclockwise and surface paths so that
//! the body lies on the left of the walk direction; the outward normal of an
//! edge `a -> b` is then its tangent rotated by -90 degrees.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, HashMap};
use std::io::Write;

pub type Curve<'a> = &'a dyn Fn(f64) -> [f64; 2];

#[derive(Clone, Debug, Default)]
pub struct Mesh2D {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise corner node ids.
    pub quads: Vec<[usize; 4]>,
    /// Ordered boundary node paths by name.
    pub surfaces: BTreeMap<String, Vec<usize>>,
}

pub fn lerp(a: f64, b: f64, u: f64) -> f64 {
    a + (b - a) * u
}

/// Axis-aligned structured grid with surfaces `bottom`, `right`, `top`,
/// `left`, each walked counterclockwise around the body.
pub fn structured_grid(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Mesh2D {
    assert!(nx > 0 && ny > 0 && x1 > x0 && y1 > y0);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = lerp(y0, y1, j as f64 / ny as f64);
        for i in 0..=nx {
            nodes.push([lerp(x0, x1, i as f64 / nx as f64), y]);
        }
    }
    let mut quads = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut surfaces = BTreeMap::new();
    surfaces.insert("bottom".into(), (0..=nx).map(|i| id(i, 0)).collect());
    surfaces.insert("right".into(), (0..=ny).map(|j| id(nx, j)).collect());
    surfaces.insert("top".into(), (0..=nx).rev().map(|i| id(i, ny)).collect());
    surfaces.insert("left".into(), (0..=ny).rev().map(|j| id(0, j)).collect());
    Mesh2D {
        nodes,
        quads,
        surfaces,
    }
}

/// Transfinite (Coons) patch over four boundary curves.
///
/// Curve parameterization on the unit square: `bottom(s)` at t=0, `top(s)` at
/// t=1 (both from the left corner to the right corner), `left(t)` at s=0 and
/// `right(t)` at s=1 (both from the bottom corner to the top corner). The
/// patch has `m x n` elements and the same surface names and orientation as
/// `structured_grid`.
pub fn coons_patch(
    bottom: Curve,
    right: Curve,
    top: Curve,
    left: Curve,
    m: usize,
    n: usize,
) -> Mesh2D {
    assert!(m > 0 && n > 0);
    let p00 = bottom(0.0);
    let p10 = bottom(1.0);
    let p01 = top(0.0);
    let p11 = top(1.0);
    for (corner, via) in [
        (p00, left(0.0)),
        (p10, right(0.0)),
        (p01, left(1.0)),
        (p11, right(1.0)),
    ] {
        debug_assert!(
            (corner[0] - via[0]).abs() + (corner[1] - via[1]).abs() < 1e-9,
            "patch boundary curves disagree at a corner"
        );
    }

    let id = |i: usize, j: usize| j * (m + 1) + i;
    let mut nodes = Vec::with_capacity((m + 1) * (n + 1));
    for j in 0..=n {
        let t = j as f64 / n as f64;
        for i in 0..=m {
            let s = i as f64 / m as f64;
            let b = bottom(s);
            let tp = top(s);
            let l = left(t);
            let r = right(t);
            let mut p = [0.0f64; 2];
            for c in 0..2 {
                p[c] = (1.0 - t) * b[c] + t * tp[c] + (1.0 - s) * l[c] + s * r[c]
                    - ((1.0 - s) * (1.0 - t) * p00[c]
                        + s * (1.0 - t) * p10[c]
                        + (1.0 - s) * t * p01[c]
                        + s * t * p11[c]);
            }
            nodes.push(p);
        }
    }
    let mut quads = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut surfaces = BTreeMap::new();
    surfaces.insert("bottom".into(), (0..=m).map(|i| id(i, 0)).collect());
    surfaces.insert("right".into(), (0..=n).map(|j| id(m, j)).collect());
    surfaces.insert("top".into(), (0..=m).rev().map(|i| id(i, n)).collect());
    surfaces.insert("left".into(), (0..=n).rev().map(|j| id(0, j)).collect());
    Mesh2D {
        nodes,
        quads,
        surfaces,
    }
}

/// Spatial hash that identifies coincident nodes up to `tol`.
struct NodeDedup {
    tol: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    nodes: Vec<[f64; 2]>,
}

impl NodeDedup {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            cells: HashMap::new(),
            nodes: Vec::new(),
        }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        (
            (p[0] / self.tol).round() as i64,
            (p[1] / self.tol).round() as i64,
        )
    }

    fn insert(&mut self, p: [f64; 2]) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let q = self.nodes[id];
                        if (q[0] - p[0]).abs() <= self.tol && (q[1] - p[1]).abs() <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.nodes.len();
        self.nodes.push(p);
        self.cells.entry((kx, ky)).or_default().push(id);
        id
    }
}

/// Fuses conforming patches into one mesh, identifying seam nodes that agree
/// up to `tol`. Returns the mesh (surfaces empty) and, per input patch, the
/// map from old to new node ids so callers can rebuild named paths.
pub fn merge_patches(parts: &[Mesh2D], tol: f64) -> (Mesh2D, Vec<Vec<usize>>) {
    let mut dedup = NodeDedup::new(tol);
    let mut quads = Vec::new();
    let mut maps = Vec::with_capacity(parts.len());
    for part in parts {
        let map: Vec<usize> = part.nodes.iter().map(|&p| dedup.insert(p)).collect();
        for q in &part.quads {
            quads.push([map[q[0]], map[q[1]], map[q[2]], map[q[3]]]);
        }
        maps.push(map);
    }
    (
        Mesh2D {
            nodes: dedup.nodes,
            quads,
            surfaces: BTreeMap::new(),
        },
        maps,
    )
}

impl Mesh2D {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_quads(&self) -> usize {
        self.quads.len()
    }

    /// Appends a second body without any node identification, prefixing its
    /// surface names. Contacting bodies stay topologically disjoint even
    /// where they touch geometrically.
    pub fn append_body(&mut self, other: &Mesh2D, prefix: &str) {
        let offset = self.nodes.len();
        self.nodes.extend_from_slice(&other.nodes);
        for q in &other.quads {
            self.quads
                .push([q[0] + offset, q[1] + offset, q[2] + offset, q[3] + offset]);
        }
        for (name, path) in &other.surfaces {
            self.surfaces.insert(
                format!("{prefix}{name}"),
                path.iter().map(|&n| n + offset).collect(),
            );
        }
    }

    pub fn translate(&mut self, dx: f64, dy: f64) {
        for p in &mut self.nodes {
            p[0] += dx;
            p[1] += dy;
        }
    }

    /// Mirrors the mesh across the x axis. Element connectivity and surface
    /// paths are reversed so orientation conventions keep holding.
    pub fn reflect_y(&mut self) {
        for p in &mut self.nodes {
            p[1] = -p[1];
        }
        for q in &mut self.quads {
            *q = [q[0], q[3], q[2], q[1]];
        }
        for path in self.surfaces.values_mut() {
            path.reverse();
        }
    }

    /// Checks corner Jacobians of every element (positive for a convex,
    /// counterclockwise quad) and that surface paths walk actual element
    /// edges.
    pub fn validate(&self) -> Result<()> {
        for (e, q) in self.quads.iter().enumerate() {
            for c in 0..4 {
                let p = self.nodes[q[c]];
                let a = self.nodes[q[(c + 1) % 4]];
                let b = self.nodes[q[(c + 3) % 4]];
                let cross = (a[0] - p[0]) * (b[1] - p[1]) - (a[1] - p[1]) * (b[0] - p[0]);
                if cross <= 0.0 {
                    return Err(Error::InvertedElement { element: e });
                }
            }
        }
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for q in &self.quads {
            for c in 0..4 {
                let (a, b) = (q[c], q[(c + 1) % 4]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for (name, path) in &self.surfaces {
            for w in path.windows(2) {
                match edges.get(&(w[0].min(w[1]), w[0].max(w[1]))) {
                    Some(1) => {}
                    Some(_) => {
                        return Err(Error::Config(format!(
                            "surface {name} crosses an interior edge {}-{}",
                            w[0], w[1]
                        )))
                    }
                    None => {
                        return Err(Error::Config(format!(
                            "surface {name} references a non-edge {}-{}",
                            w[0], w[1]
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn surface(&self, name: &str) -> Result<&[usize]> {
        self.surfaces
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("unknown surface {name}")))
    }

    pub fn surface_edges(&self, name: &str) -> Result<Vec<[usize; 2]>> {
        Ok(self
            .surface(name)?
            .windows(2)
            .map(|w| [w[0], w[1]])
            .collect())
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.nodes[a], self.nodes[b]);
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    pub fn surface_length(&self, name: &str) -> Result<f64> {
        Ok(self
            .surface_edges(name)?
            .iter()
            .map(|e| self.edge_length(e[0], e[1]))
            .sum())
    }

    /// Per-node tributary lengths along a surface path: half the length of
    /// each adjacent edge. They sum to the surface length.
    pub fn tributary_lengths(&self, name: &str) -> Result<Vec<f64>> {
        let path = self.surface(name)?;
        let mut trib = vec![0.0; path.len()];
        for (k, w) in path.windows(2).enumerate() {
            let half = 0.5 * self.edge_length(w[0], w[1]);
            trib[k] += half;
            trib[k + 1] += half;
        }
        Ok(trib)
    }

    /// Outward unit normal of the oriented edge `a -> b` (body on the left).
    pub fn edge_normal(&self, a: usize, b: usize) -> [f64; 2] {
        let (p, q) = (self.nodes[a], self.nodes[b]);
        let (tx, ty) = (q[0] - p[0], q[1] - p[1]);
        let len = (tx * tx + ty * ty).sqrt();
        [ty / len, -tx / len]
    }

    /// Outward unit normals at the nodes of a surface path, averaging the
    /// two adjacent edge normals at interior nodes.
    pub fn node_normals(&self, name: &str) -> Result<Vec<[f64; 2]>> {
        let path = self.surface(name)?;
        let mut normals = vec![[0.0f64; 2]; path.len()];
        for (k, w) in path.windows(2).enumerate() {
            let n = self.edge_normal(w[0], w[1]);
            for c in 0..2 {
                normals[k][c] += n[c];
                normals[k + 1][c] += n[c];
            }
        }
        for n in &mut normals {
            let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
            n[0] /= len;
            n[1] /= len;
        }
        Ok(normals)
    }

    /// Plain-text dump: node coordinates, element connectivity and named
    /// surface paths.
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "nodes {}", self.nodes.len())?;
        for p in &self.nodes {
            writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        writeln!(w, "quads {}", self.quads.len())?;
        for q in &self.quads {
            writeln!(w, "{} {} {} {}", q[0], q[1], q[2], q[3])?;
        }
        for (name, path) in &self.surfaces {
            writeln!(w, "surface {} {}", name, path.len())?;
            let ids: Vec<String> = path.iter().map(|n| n.to_string()).collect();
            writeln!(w, "{}", ids.join(" "))?;
        }
        Ok(())
    }
}
