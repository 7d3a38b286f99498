//! Taut string (rope) over a rigid obstacle.

use std::collections::BTreeMap;

use crate::problems::{
    BcValue, Discretization, Material, ParametricProblem, Problem1D, ProblemKind,
};

/// String of unit length with `n_nodes` equispaced nodes, tension `nu` and
/// downward load density `f`, both ends pinned at zero height.
pub fn build_rope(n_nodes: usize, nu: f64, f: f64) -> Problem1D {
    assert!(n_nodes >= 3, "need at least one interior node");
    let h = 1.0 / (n_nodes - 1) as f64;
    Problem1D {
        n_nodes,
        x: (0..n_nodes).map(|i| i as f64 * h).collect(),
        nu,
        f,
    }
}

/// Obstacle height under the string at position `x` for tilt `gamma`.
/// Two bumps below zero, tilted by a linear term; the right end reaches
/// height zero exactly at gamma = 0.5.
pub fn obstacle_rope(x: f64, gamma: f64) -> f64 {
    use std::f64::consts::PI;
    -0.2 * ((PI * x).sin() - (3.0 * PI * x).sin()) - 0.5 + gamma * x
}

fn pinned_ends(line: &Problem1D) -> BTreeMap<usize, BcValue> {
    let mut bcs = BTreeMap::new();
    bcs.insert(0, BcValue::Const(0.0));
    bcs.insert(line.n_nodes - 1, BcValue::Const(0.0));
    bcs
}

/// Rope over the tilted obstacle; parameter = tilt gamma in [-0.5, 0.5].
pub fn rope_problem(n_nodes: usize) -> ParametricProblem {
    let line = build_rope(n_nodes, 30.0, 250.0);
    let bcs = pinned_ends(&line);
    ParametricProblem::assemble_problem(
        ProblemKind::Rope,
        Discretization::Line(line),
        Material::default(),
        vec![[-0.5, 0.5]],
        1,
        None,
        bcs,
    )
}

/// Rope over the untilted obstacle with piecewise tension: parameter =
/// tension of the left half in [10, 50], right half fixed at 30. The
/// operator changes with the parameter, unlike [`rope_problem`].
pub fn rope_elastic_problem(n_nodes: usize) -> ParametricProblem {
    let line = build_rope(n_nodes, 30.0, 250.0);
    let bcs = pinned_ends(&line);
    ParametricProblem::assemble_problem(
        ProblemKind::RopeElastic,
        Discretization::Line(line),
        Material::default(),
        vec![[10.0, 50.0]],
        1,
        None,
        bcs,
    )
}
