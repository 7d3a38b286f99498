//! Diffusion-reaction on a square with three horizontal material bands.
//!
//! Solves -div(nu grad v) + sigma v = f on (0,3)^2 with v = 0 on the left,
//! bottom and top sides and v = 1 on the right side. The three parameters
//! are the diffusivities of the horizontal bands y in [0,1), [1,2), [2,3].
//! No contact; this exercises the reduction pipeline on a problem whose
//! operator changes with the parameter.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::mesh::structured_grid;
use crate::problems::{BcValue, Discretization, Material, ParametricProblem, ProblemKind};

/// Band lookup for the piecewise constant diffusivity field.
pub(crate) fn band_diffusivity(bands: &[f64; 3], y: f64) -> f64 {
    if y < 1.0 {
        bands[0]
    } else if y < 2.0 {
        bands[1]
    } else {
        bands[2]
    }
}

/// `grid x grid` elements on (0,3)^2, reaction coefficient `sigma`. Band
/// interfaces fall on node lines when `grid` is a multiple of 3, keeping the
/// piecewise diffusivity exactly represented; the default grid is 15.
pub fn build_transport(grid: usize, sigma: f64) -> Result<ParametricProblem> {
    let mesh = structured_grid(0.0, 3.0, 0.0, 3.0, grid, grid);
    let mut bcs = BTreeMap::new();
    for name in ["left", "bottom", "top"] {
        for &n in mesh.surface(name)? {
            bcs.insert(n, BcValue::Const(0.0));
        }
    }
    // Inserted last so the shared corner nodes carry the inflow value.
    for &n in mesh.surface("right")? {
        bcs.insert(n, BcValue::Const(1.0));
    }
    let mut problem = ParametricProblem::assemble_problem(
        ProblemKind::Transport,
        Discretization::Plane(mesh),
        Material::default(),
        vec![[1.0, 150.0]; 3],
        1,
        None,
        bcs,
    );
    problem.transport_reaction = sigma;
    Ok(problem)
}
