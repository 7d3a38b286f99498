//! Two elastic half-discs pressed together (cylinder contact).
//!
//! Each body is a unit-radius half-disc meshed butterfly style: a structured
//! core rectangle, a fan between the core bottom and the central arc, and two
//! small fans closing the sides. All quads, graded toward the contact zone.
//! The upper body sits with its arc apex at the origin, the lower body is its
//! mirror image; the parameter is a downward displacement imposed on the
//! upper flat face.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use crate::contact::PairingMethod;
use crate::error::Result;
use crate::mesh::{coons_patch, lerp, merge_patches, structured_grid, Mesh2D};
use crate::problems::{
    BcValue, ContactSpec, Discretization, Material, ParametricProblem, ProblemKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HertzRefinement {
    /// Density matching the reference discretization.
    Paper,
    /// Cheaper mesh with the same topology, for tests and smoke runs.
    Coarse,
}

/// Core half-width/height and the polar angle (from the downward axis) where
/// the bottom fan hands over to the side fans. Chosen so the contact zone
/// under moderate loads stays well inside the bottom fan.
const CORE_HALF: f64 = 0.45;
const SEAM_ANGLE: f64 = 0.7;

/// Canonical half-disc of radius 1: flat face on y = 0, arc below, apex at
/// (0, -1). Surfaces `flat` and `arc`, both walked with the body on the left.
fn half_disc(nc_x: usize, nc_y: usize, n_rad: usize) -> Mesh2D {
    let w = CORE_HALF;
    let arc = |phi: f64| [phi.sin(), -phi.cos()];
    let line = |p: [f64; 2], q: [f64; 2]| {
        move |u: f64| [lerp(p[0], q[0], u), lerp(p[1], q[1], u)]
    };

    let b_l = [-w, -w];
    let b_r = [w, -w];
    let a_l = [-w, 0.0];
    let a_r = [w, 0.0];
    let c_l = arc(-SEAM_ANGLE);
    let c_r = arc(SEAM_ANGLE);
    let d_l = [-1.0, 0.0];
    let d_r = [1.0, 0.0];

    let core = structured_grid(-w, w, -w, 0.0, nc_x, nc_y);
    let fan_bottom = coons_patch(
        &|s| arc(lerp(-SEAM_ANGLE, SEAM_ANGLE, s)),
        &line(c_r, b_r),
        &line(b_l, b_r),
        &line(c_l, b_l),
        nc_x,
        n_rad,
    );
    let fan_right = coons_patch(
        &line(b_r, c_r),
        &|t| arc(lerp(SEAM_ANGLE, FRAC_PI_2, t)),
        &line(a_r, d_r),
        &line(b_r, a_r),
        n_rad,
        nc_y,
    );
    let fan_left = coons_patch(
        &line(c_l, b_l),
        &line(b_l, a_l),
        &line(d_l, a_l),
        &|t| arc(lerp(-SEAM_ANGLE, -FRAC_PI_2, t)),
        n_rad,
        nc_y,
    );

    let parts = [core, fan_bottom, fan_right, fan_left];
    let (mut mesh, maps) = merge_patches(&parts, 1e-9);
    let remap = |part: usize, name: &str| -> Vec<usize> {
        parts[part].surfaces[name]
            .iter()
            .map(|&n| maps[part][n])
            .collect()
    };

    // Arc from (-1, 0) through the apex to (1, 0), counterclockwise around
    // the body. Junction nodes are shared, so drop the duplicate.
    let mut arc_path = remap(3, "left");
    for (part, name) in [(1, "bottom"), (2, "right")] {
        let seg = remap(part, name);
        assert_eq!(*arc_path.last().unwrap(), seg[0], "arc pieces must chain");
        arc_path.extend_from_slice(&seg[1..]);
    }
    // Flat face from (1, 0) back to (-1, 0).
    let mut flat_path = remap(2, "top");
    for (part, name) in [(0, "top"), (3, "top")] {
        let seg = remap(part, name);
        assert_eq!(*flat_path.last().unwrap(), seg[0], "flat pieces must chain");
        flat_path.extend_from_slice(&seg[1..]);
    }

    mesh.surfaces.insert("arc".into(), arc_path);
    mesh.surfaces.insert("flat".into(), flat_path);
    mesh
}

/// Two unit-radius half-discs meeting at the origin. Parameter `d` in
/// [0, 0.3] pushes the upper flat face down by `d` while the lower flat face
/// is clamped; contact spreads from the apex. Surfaces are prefixed
/// `upper_` / `lower_`; the upper arc is the slave side.
pub fn build_hertz(refinement: HertzRefinement) -> Result<ParametricProblem> {
    let (nc_x, nc_y, n_rad) = match refinement {
        HertzRefinement::Paper => (72, 2, 4),
        HertzRefinement::Coarse => (24, 2, 3),
    };
    let half = half_disc(nc_x, nc_y, n_rad);
    let mut upper = half.clone();
    upper.translate(0.0, 1.0);
    let mut lower = half;
    lower.reflect_y();
    lower.translate(0.0, -1.0);

    let mut mesh = Mesh2D::default();
    mesh.append_body(&upper, "upper_");
    mesh.append_body(&lower, "lower_");
    mesh.validate()?;

    let mut bcs = BTreeMap::new();
    for &n in mesh.surface("upper_flat")? {
        bcs.insert(2 * n, BcValue::Const(0.0));
        bcs.insert(2 * n + 1, BcValue::NegParam(0));
    }
    for &n in mesh.surface("lower_flat")? {
        bcs.insert(2 * n, BcValue::Const(0.0));
        bcs.insert(2 * n + 1, BcValue::Const(0.0));
    }

    Ok(ParametricProblem::assemble_problem(
        ProblemKind::Hertz,
        Discretization::Plane(mesh),
        Material::default(),
        vec![[0.0, 0.3]],
        2,
        Some(ContactSpec {
            slave: "upper_arc".into(),
            master: "lower_arc".into(),
            default_method: PairingMethod::ClosestPoint,
        }),
        bcs,
    ))
}
