//! Finite element assembly: 1D bar elements for the rope benchmarks,
//! isoparametric bilinear quads for plane-strain elasticity and scalar
//! diffusion-reaction. Dirichlet elimination lives with the problem
//! definitions; everything here assembles over all dofs.

use crate::error::{Error, Result};
use crate::linalg::SymSparse;
use crate::mesh::Mesh2D;
use crate::DVec;

const GAUSS_1D: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// 1D second-order operator on a uniform grid over `[0, length]`:
/// stiffness `k(x) u'' = q`, element coefficient sampled at midpoints.
/// Returns the full stiffness matrix and the consistent load vector for a
/// constant distributed load `q` (interior entries `q * h`).
pub fn assemble_rope_1d(
    n_nodes: usize,
    length: f64,
    stiffness: &dyn Fn(f64) -> f64,
    load_density: f64,
) -> (SymSparse, DVec) {
    assert!(n_nodes >= 2);
    let n_el = n_nodes - 1;
    let h = length / n_el as f64;
    let mut k = SymSparse::new(n_nodes);
    let mut f = DVec::zeros(n_nodes);
    for e in 0..n_el {
        let mid = (e as f64 + 0.5) * h;
        let c = stiffness(mid) / h;
        k.add(e, e, c);
        k.add(e + 1, e + 1, c);
        k.add(e + 1, e, -c);
        f[e] += 0.5 * load_density * h;
        f[e + 1] += 0.5 * load_density * h;
    }
    (k, f)
}

/// Shape function values at a reference point.
fn shape(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Physical shape gradients and Jacobian determinant at a reference point.
fn gradients(coords: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([[f64; 2]; 4], f64) {
    let dref = [
        [-0.25 * (1.0 - eta), -0.25 * (1.0 - xi)],
        [0.25 * (1.0 - eta), -0.25 * (1.0 + xi)],
        [0.25 * (1.0 + eta), 0.25 * (1.0 + xi)],
        [-0.25 * (1.0 + eta), 0.25 * (1.0 - xi)],
    ];
    let mut j = [[0.0f64; 2]; 2];
    for a in 0..4 {
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] += dref[a][r] * coords[a][c];
            }
        }
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [
        [j[1][1] / det, -j[0][1] / det],
        [-j[1][0] / det, j[0][0] / det],
    ];
    let mut dphys = [[0.0f64; 2]; 4];
    for a in 0..4 {
        for c in 0..2 {
            dphys[a][c] = inv[c][0] * dref[a][0] + inv[c][1] * dref[a][1];
        }
    }
    (dphys, det)
}

fn element_coords(mesh: &Mesh2D, e: usize) -> [[f64; 2]; 4] {
    let q = mesh.quads[e];
    [
        mesh.nodes[q[0]],
        mesh.nodes[q[1]],
        mesh.nodes[q[2]],
        mesh.nodes[q[3]],
    ]
}

/// Plane-strain elasticity stiffness over `2 * n_nodes` dofs, dof layout
/// `2 * node + component`. Uses 2x2 Gauss quadrature.
pub fn assemble_plane_strain(mesh: &Mesh2D, young: f64, poisson: f64) -> Result<SymSparse> {
    let c = young / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let d00 = c * (1.0 - poisson);
    let d01 = c * poisson;
    let d22 = c * (0.5 - poisson);

    let mut k = SymSparse::new(2 * mesh.n_nodes());
    let mut ke = [[0.0f64; 8]; 8];
    for e in 0..mesh.n_quads() {
        let coords = element_coords(mesh, e);
        ke.iter_mut().for_each(|row| row.fill(0.0));
        for &xi in &GAUSS_1D {
            for &eta in &GAUSS_1D {
                let (dn, det) = gradients(&coords, xi, eta);
                if det <= 0.0 {
                    return Err(Error::InvertedElement { element: e });
                }
                for a in 0..4 {
                    for b in 0..4 {
                        let (ax, ay) = (dn[a][0], dn[a][1]);
                        let (bx, by) = (dn[b][0], dn[b][1]);
                        ke[2 * a][2 * b] += (d00 * ax * bx + d22 * ay * by) * det;
                        ke[2 * a][2 * b + 1] += (d01 * ax * by + d22 * ay * bx) * det;
                        ke[2 * a + 1][2 * b] += (d01 * ay * bx + d22 * ax * by) * det;
                        ke[2 * a + 1][2 * b + 1] += (d00 * ay * by + d22 * ax * bx) * det;
                    }
                }
            }
        }
        let q = mesh.quads[e];
        for a in 0..4 {
            for i in 0..2 {
                for b in 0..4 {
                    for j in 0..2 {
                        let (gi, gj) = (2 * q[a] + i, 2 * q[b] + j);
                        if gi >= gj {
                            k.add(gi, gj, ke[2 * a + i][2 * b + j]);
                        }
                    }
                }
            }
        }
    }
    Ok(k)
}

/// Row-sum lumped mass per dof (unit density), two equal entries per node.
pub fn lumped_mass_2d(mesh: &Mesh2D) -> Result<DVec> {
    let mut m = DVec::zeros(2 * mesh.n_nodes());
    for e in 0..mesh.n_quads() {
        let coords = element_coords(mesh, e);
        let q = mesh.quads[e];
        for &xi in &GAUSS_1D {
            for &eta in &GAUSS_1D {
                let n = shape(xi, eta);
                let (_, det) = gradients(&coords, xi, eta);
                if det <= 0.0 {
                    return Err(Error::InvertedElement { element: e });
                }
                for a in 0..4 {
                    m[2 * q[a]] += n[a] * det;
                    m[2 * q[a] + 1] += n[a] * det;
                }
            }
        }
    }
    Ok(m)
}

/// Row-sum lumped mass per node (unit density), one dof per node.
pub fn lumped_mass_scalar(mesh: &Mesh2D) -> Result<DVec> {
    let m2 = lumped_mass_2d(mesh)?;
    Ok(DVec::from_fn(mesh.n_nodes(), |n, _| m2[2 * n]))
}

/// Scalar diffusion-reaction operator `-div(nu grad v) + reaction * v`, one
/// dof per node. Diffusivity is sampled at element centroids (piecewise
/// uniform fields stay exact), the reaction term uses the consistent mass.
pub fn assemble_scalar_diffusion_reaction(
    mesh: &Mesh2D,
    diffusivity: &dyn Fn([f64; 2]) -> f64,
    reaction: f64,
) -> Result<SymSparse> {
    let mut k = SymSparse::new(mesh.n_nodes());
    let mut ke = [[0.0f64; 4]; 4];
    for e in 0..mesh.n_quads() {
        let coords = element_coords(mesh, e);
        let centroid = [
            coords.iter().map(|p| p[0]).sum::<f64>() / 4.0,
            coords.iter().map(|p| p[1]).sum::<f64>() / 4.0,
        ];
        let nu = diffusivity(centroid);
        ke.iter_mut().for_each(|row| row.fill(0.0));
        for &xi in &GAUSS_1D {
            for &eta in &GAUSS_1D {
                let n = shape(xi, eta);
                let (dn, det) = gradients(&coords, xi, eta);
                if det <= 0.0 {
                    return Err(Error::InvertedElement { element: e });
                }
                for a in 0..4 {
                    for b in 0..4 {
                        ke[a][b] += (nu * (dn[a][0] * dn[b][0] + dn[a][1] * dn[b][1])
                            + reaction * n[a] * n[b])
                            * det;
                    }
                }
            }
        }
        let q = mesh.quads[e];
        for a in 0..4 {
            for b in 0..4 {
                if q[a] >= q[b] {
                    k.add(q[a], q[b], ke[a][b]);
                }
            }
        }
    }
    Ok(k)
}
