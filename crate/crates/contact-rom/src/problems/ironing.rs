//! Die pressed into a slab and dragged along it.
//!
//! A square die (3 x 3) sits on a long slab (10 x 2, top face at y = 0). The
//! die top is pushed down by a fixed 0.3 and the parameter moves the die
//! horizontally: its center travels the full slab length, so at the extremes
//! part of the die bottom overhangs the slab ends and must stay unpaired.
//! The stiffness operator is translation invariant, so one factorization
//! serves every parameter point; only the contact pairing sees the shift.

use std::collections::BTreeMap;

use crate::contact::PairingMethod;
use crate::error::Result;
use crate::mesh::{structured_grid, Mesh2D};
use crate::problems::{
    BcValue, ContactSpec, Discretization, Material, ParametricProblem, ProblemKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IroningGrade {
    /// 30x30 die on a 100x20 slab, conforming 0.1 element pitch.
    Coarse,
    /// 60x60 die on a 200x40 slab.
    Fine,
}

const SLAB_LENGTH: f64 = 10.0;
const SLAB_HEIGHT: f64 = 2.0;
const DIE_SIZE: f64 = 3.0;
const PRESS_DEPTH: f64 = 0.3;

pub fn build_ironing(grade: IroningGrade) -> Result<ParametricProblem> {
    let (die_n, slab_nx, slab_ny) = match grade {
        IroningGrade::Coarse => (30, 100, 20),
        IroningGrade::Fine => (60, 200, 40),
    };
    let center = 0.5 * SLAB_LENGTH;
    let slab = structured_grid(0.0, SLAB_LENGTH, -SLAB_HEIGHT, 0.0, slab_nx, slab_ny);
    let die = structured_grid(
        center - 0.5 * DIE_SIZE,
        center + 0.5 * DIE_SIZE,
        0.0,
        DIE_SIZE,
        die_n,
        die_n,
    );

    let mut mesh = Mesh2D::default();
    mesh.append_body(&slab, "slab_");
    let die_start = mesh.n_nodes();
    mesh.append_body(&die, "die_");
    let die_end = mesh.n_nodes();
    mesh.validate()?;

    let mut bcs = BTreeMap::new();
    for &n in mesh.surface("slab_bottom")? {
        bcs.insert(2 * n, BcValue::Const(0.0));
        bcs.insert(2 * n + 1, BcValue::Const(0.0));
    }
    for &n in mesh.surface("die_top")? {
        bcs.insert(2 * n, BcValue::Const(0.0));
        bcs.insert(2 * n + 1, BcValue::Const(-PRESS_DEPTH));
    }

    let mut problem = ParametricProblem::assemble_problem(
        ProblemKind::Ironing,
        Discretization::Plane(mesh),
        Material::default(),
        vec![[0.0, SLAB_LENGTH]],
        2,
        // Closest-point pairing limit-cycles here: the center die node sits
        // over a master vertex and its projection flips between the adjacent
        // segments, flipping the segment normal with it. Ray tracing keys the
        // normal to the slave side, which is continuous, so the fixed-point
        // pairing iteration settles.
        Some(ContactSpec {
            slave: "die_bottom".into(),
            master: "slab_top".into(),
            default_method: PairingMethod::RayTracing,
        }),
        bcs,
    );
    problem.iron_nodes = Some(die_start..die_end);
    problem.iron_center = center;
    Ok(problem)
}
