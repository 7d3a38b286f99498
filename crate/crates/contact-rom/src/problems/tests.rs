use approx::assert_relative_eq;

use crate::contact::PairingMethod;
use crate::linalg::SpdFactor;
use crate::problems::*;
use crate::DVec;

/// Solves the linear (contact-free) system at `mu` and returns the full
/// displacement vector with prescribed values filled in.
fn solve_linear(problem: &ParametricProblem, mu: &[f64]) -> DVec {
    let op = problem.operator(mu).unwrap();
    let u_d = problem.dirichlet_values(mu);
    let load = problem.rhs(mu).unwrap();
    let coupled = op.k_full.matvec(&u_d);
    let f_eff = DVec::from_iterator(
        problem.free.len(),
        problem.free.iter().map(|&d| load[d] - coupled[d]),
    );
    let u_free = op.factor.solve_vec(&f_eff);
    let mut u = u_d;
    for (k, &d) in problem.free.iter().enumerate() {
        u[d] = u_free[k];
    }
    u
}

#[test]
fn rope_midpoint_matches_hand_stencil() {
    // One interior node: (2 nu / h) u = -f h gives u = -f h^2 / (2 nu).
    let problem = rope_problem(3);
    let u = solve_linear(&problem, &[0.0]);
    assert_relative_eq!(u[1], -250.0 * 0.25 / (2.0 * 30.0), max_relative = 1e-12);
    assert_eq!(u[0], 0.0);
    assert_eq!(u[2], 0.0);
}

#[test]
fn rope_deflection_scales_inversely_with_tension() {
    let problem = rope_elastic_problem(41);
    // Uniform tension when the parameter matches the right-half value.
    let u30 = solve_linear(&problem, &[30.0]);
    let base = rope_problem(41);
    let u_base = solve_linear(&base, &[0.0]);
    assert_relative_eq!((&u30 - &u_base).norm(), 0.0, epsilon = 1e-12);
    // Softer left half sags deeper there.
    let u10 = solve_linear(&problem, &[10.0]);
    assert!(u10[10] < u30[10] - 1e-3, "softer half must sag deeper");
}

#[test]
fn obstacle_shape_spot_values() {
    assert_relative_eq!(obstacle_rope(0.0, -0.3), -0.5, epsilon = 1e-15);
    assert_relative_eq!(obstacle_rope(1.0, 0.5), 0.0, epsilon = 1e-12);
    assert_relative_eq!(obstacle_rope(0.5, 0.0), -0.9, epsilon = 1e-12);
}

#[test]
fn rope_constraints_cover_interior_nodes() {
    let problem = rope_problem(11);
    let u0 = DVec::zeros(11);
    let ops = problem
        .constraints_at(&[0.3], &u0, PairingMethod::NodeToNode)
        .unwrap();
    assert_eq!(ops.n_constraints(), 9);
    for (k, row) in ops.rows.iter().enumerate() {
        assert_eq!(row.as_slice(), &[(k + 1, -1.0)]);
        let x = (k + 1) as f64 * 0.1;
        assert_relative_eq!(ops.gaps[k], -obstacle_rope(x, 0.3), epsilon = 1e-12);
        // String at rest is above the obstacle everywhere.
        assert!(ops.gaps[k] >= 0.0);
    }
    let weights = problem.constraint_weights(&ops).unwrap();
    assert!(weights.iter().all(|&w| (w - 0.1).abs() < 1e-12));
}

#[test]
fn hertz_mesh_hits_reference_density() {
    let problem = build_hertz(HertzRefinement::Paper).unwrap();
    let mesh = problem.mesh().unwrap();
    assert_eq!(mesh.n_nodes() % 2, 0);
    let nodes_per_body = mesh.n_nodes() / 2;
    let quads_per_body = mesh.n_quads() / 2;
    let arc_segments = mesh.surface("upper_arc").unwrap().len() - 1;
    assert!((nodes_per_body as f64 - 513.0).abs() <= 0.1 * 513.0, "nodes {nodes_per_body}");
    assert!((quads_per_body as f64 - 466.0).abs() <= 0.1 * 466.0, "quads {quads_per_body}");
    assert!((arc_segments as f64 - 78.0).abs() <= 0.1 * 78.0, "arc {arc_segments}");
    assert_eq!(
        mesh.surface("lower_arc").unwrap().len(),
        arc_segments + 1
    );
}

#[test]
fn hertz_bodies_touch_at_origin_without_overlap() {
    let problem = build_hertz(HertzRefinement::Coarse).unwrap();
    let u0 = DVec::zeros(problem.n_dofs());
    let ops = problem
        .constraints_at(&[0.0], &u0, PairingMethod::ClosestPoint)
        .unwrap();
    assert!(ops.n_constraints() > 0);
    let min_gap = ops.gaps.min();
    assert!(min_gap >= -1e-12, "initial overlap {min_gap}");
    assert!(min_gap <= 1e-9, "bodies must touch at the apex, gap {min_gap}");
    // Approach direction at the apex points from the upper into the lower body.
    let apex = (0..ops.n_constraints())
        .min_by(|&a, &b| ops.gaps[a].total_cmp(&ops.gaps[b]))
        .unwrap();
    let n = ops.pairs[apex].normal;
    assert!(n[1] < -0.99, "apex normal {n:?}");
}

#[test]
fn hertz_operator_is_positive_definite() {
    let problem = build_hertz(HertzRefinement::Coarse).unwrap();
    assert!(problem.operator_is_parameter_independent());
    // Factoring succeeds only for a positive definite reduced operator.
    let op = problem.operator(&[0.1]).unwrap();
    assert_eq!(op.k_full.dim(), problem.n_dofs());
    // Prescribed values enter with the parameter sign flipped.
    let u_d = problem.dirichlet_values(&[0.1]);
    let flat = problem.mesh().unwrap().surface("upper_flat").unwrap()[0];
    assert_relative_eq!(u_d[2 * flat + 1], -0.1, epsilon = 1e-15);
}

#[test]
fn hertz_compression_shortens_the_gap_column() {
    // Rigidly shifting the upper body down by the full approach closes the
    // gap at the apex and overlaps nearby; the constraint set must see it.
    let problem = build_hertz(HertzRefinement::Coarse).unwrap();
    let mesh = problem.mesh().unwrap();
    let mut u = DVec::zeros(problem.n_dofs());
    let upper_nodes = mesh.n_nodes() / 2;
    for node in 0..upper_nodes {
        u[2 * node + 1] = -0.05;
    }
    let ops = problem
        .constraints_at(&[0.05], &u, PairingMethod::ClosestPoint)
        .unwrap();
    let viol = ops.violations(&u);
    assert!(viol.max() > 1e-3, "rigid shift must violate the apex constraint");
}

#[test]
fn ironing_die_translates_with_parameter() {
    let problem = build_ironing(IroningGrade::Coarse).unwrap();
    let mesh = problem.mesh().unwrap();
    let at_two = problem.reference_nodes(&[2.0]).unwrap();
    let slab_node = mesh.surface("slab_top").unwrap()[0];
    let die_node = mesh.surface("die_bottom").unwrap()[0];
    assert_eq!(at_two[slab_node], mesh.nodes[slab_node]);
    assert_relative_eq!(
        at_two[die_node][0],
        mesh.nodes[die_node][0] - 3.0,
        epsilon = 1e-12
    );
    assert_eq!(at_two[die_node][1], mesh.nodes[die_node][1]);
}

#[test]
fn ironing_pairing_conforms_when_centered() {
    let problem = build_ironing(IroningGrade::Coarse).unwrap();
    let u0 = DVec::zeros(problem.n_dofs());
    let ops = problem
        .constraints_at(&[5.0], &u0, PairingMethod::ClosestPoint)
        .unwrap();
    // All 31 die bottom nodes sit exactly on slab top nodes.
    assert_eq!(ops.n_constraints(), 31);
    assert!(ops.gaps.amax() <= 1e-12);
    for pair in &ops.pairs {
        assert!(pair.normal[1] < -0.99);
    }
}

#[test]
fn ironing_overhang_drops_unsupported_nodes() {
    let problem = build_ironing(IroningGrade::Coarse).unwrap();
    let u0 = DVec::zeros(problem.n_dofs());
    let ops = problem
        .constraints_at(&[0.0], &u0, PairingMethod::ClosestPoint)
        .unwrap();
    // Die spans [-1.5, 1.5]; only nodes with x >= 0 project onto the slab.
    assert_eq!(ops.n_constraints(), 16);
    let mesh = problem.mesh().unwrap();
    let refs = problem.reference_nodes(&[0.0]).unwrap();
    let path = mesh.surface("die_bottom").unwrap();
    for pair in &ops.pairs {
        assert!(refs[path[pair.slave_index]][0] >= -1e-12);
    }
}

#[test]
fn transport_solution_obeys_discrete_maximum_principle() {
    let problem = build_transport(15, 10.0).unwrap();
    assert!(!problem.operator_is_parameter_independent());
    for mu in [[1.0, 75.0, 150.0], [150.0, 1.0, 150.0], [2.0, 2.0, 2.0]] {
        let v = solve_linear(&problem, &mu);
        assert!(v.min() >= -1e-12, "undershoot {}", v.min());
        assert!(v.max() <= 1.0 + 1e-12, "overshoot {}", v.max());
    }
}

#[test]
fn transport_inflow_side_reads_one_including_corners() {
    let problem = build_transport(15, 10.0).unwrap();
    let v = solve_linear(&problem, &[5.0, 5.0, 5.0]);
    let mesh = problem.mesh().unwrap();
    for &n in mesh.surface("right").unwrap() {
        assert_eq!(v[n], 1.0);
    }
    for &n in mesh.surface("left").unwrap() {
        assert_eq!(v[n], 0.0);
    }
}

#[test]
fn transport_harmonic_case_ignores_uniform_diffusivity() {
    // With zero reaction the solution of the uniform-band problem is
    // harmonic, hence independent of the diffusivity scale.
    let problem = build_transport(9, 0.0).unwrap();
    let a = solve_linear(&problem, &[5.0, 5.0, 5.0]);
    let b = solve_linear(&problem, &[120.0, 120.0, 120.0]);
    assert_relative_eq!((&a - &b).amax(), 0.0, epsilon = 1e-10);
    assert!(a.max() <= 1.0 + 1e-12);
}

#[test]
fn parameter_checks_reject_out_of_range_points() {
    let problem = rope_problem(5);
    assert!(problem.operator(&[0.7]).is_err());
    assert!(problem.operator(&[0.2, 0.1]).is_err());
    assert!(problem.operator(&[f64::NAN]).is_err());
    assert!(problem.operator(&[0.5]).is_ok());
}

#[test]
fn norm_mass_integrates_the_domain() {
    let rope = rope_problem(11);
    assert_relative_eq!(rope.norm_mass().unwrap().sum(), 1.0, epsilon = 1e-12);
    let transport = build_transport(6, 10.0).unwrap();
    assert_relative_eq!(transport.norm_mass().unwrap().sum(), 9.0, epsilon = 1e-10);
    let hertz = build_hertz(HertzRefinement::Coarse).unwrap();
    let mesh = hertz.mesh().unwrap();
    // Lumped mass integrates exactly the meshed polygon, two dofs per node.
    let polygon_area: f64 = mesh
        .quads
        .iter()
        .map(|q| {
            let p: Vec<[f64; 2]> = q.iter().map(|&n| mesh.nodes[n]).collect();
            0.5 * ((p[0][0] * p[1][1] - p[1][0] * p[0][1])
                + (p[1][0] * p[2][1] - p[2][0] * p[1][1])
                + (p[2][0] * p[3][1] - p[3][0] * p[2][1])
                + (p[3][0] * p[0][1] - p[0][0] * p[3][1]))
        })
        .sum();
    assert_relative_eq!(
        hertz.norm_mass().unwrap().sum(),
        2.0 * polygon_area,
        max_relative = 1e-10
    );
    // Sanity: the polygon fills most of the two half-discs.
    assert_relative_eq!(polygon_area, std::f64::consts::PI, max_relative = 0.05);
}
