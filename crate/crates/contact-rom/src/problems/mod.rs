//! Benchmark problem definitions.
//!
//! Each builder returns a [`ParametricProblem`]: a discretization plus
//! everything the solvers need to evaluate it at a parameter point mu
//! (operator, load, prescribed values, contact constraints). The problem
//! object is immutable after construction; all parameter dependence goes
//! through the `*_at`/`operator` methods so callers can cache factorizations
//! when [`ParametricProblem::operator_is_parameter_independent`] holds.

mod hertz;
mod ironing;
mod rope;
mod transport;

pub use hertz::{build_hertz, HertzRefinement};
pub use ironing::{build_ironing, IroningGrade};
pub use rope::{build_rope, obstacle_rope, rope_elastic_problem, rope_problem};
pub use transport::build_transport;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::contact::{
    assemble_constraints, pair_closest_point, pair_ray_tracing, ConstraintOperators,
    PairingMethod, SurfacePath,
};
use crate::error::{Error, Result};
use crate::fem;
use crate::linalg::{SkylineChol, SymSparse};
use crate::mesh::Mesh2D;
use crate::DVec;

/// Plane-strain elasticity operator for a quad mesh.
pub fn build_elasticity_2d(mesh: &Mesh2D, young: f64, poisson: f64) -> Result<SymSparse> {
    fem::assemble_plane_strain(mesh, young, poisson)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Taut string over a tilted obstacle, parameter = obstacle tilt.
    Rope,
    /// Same geometry, parameter = stiffness of the left half of the string.
    RopeElastic,
    /// Two elastic cylinders pressed together, parameter = approach.
    Hertz,
    /// Rigid-ish die dragged across a slab, parameter = die position.
    Ironing,
    /// Diffusion-reaction on a square, parameters = three band diffusivities.
    Transport,
}

impl ProblemKind {
    /// Stable snake-case id used for store paths and reports.
    pub fn tag(self) -> &'static str {
        match self {
            ProblemKind::Rope => "rope",
            ProblemKind::RopeElastic => "rope_elastic",
            ProblemKind::Hertz => "hertz",
            ProblemKind::Ironing => "ironing",
            ProblemKind::Transport => "transport",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material { young: 1.0, poisson: 0.3 }
    }
}

/// Uniform 1d bar: nodes on [0, length], linear elements.
#[derive(Clone, Debug)]
pub struct Problem1D {
    pub n_nodes: usize,
    /// Node coordinates, ascending.
    pub x: Vec<f64>,
    /// Tension (stiffness) of the string.
    pub nu: f64,
    /// Downward load density magnitude.
    pub f: f64,
}

impl Problem1D {
    pub fn length(&self) -> f64 {
        self.x[self.n_nodes - 1] - self.x[0]
    }
}

#[derive(Clone, Debug)]
pub enum Discretization {
    Line(Problem1D),
    Plane(Mesh2D),
}

/// Names the contact surfaces inside the problem mesh.
#[derive(Clone, Debug)]
pub struct ContactSpec {
    pub slave: String,
    pub master: String,
    pub default_method: PairingMethod,
}

/// Prescribed value of one dof, possibly parameter dependent.
#[derive(Clone, Copy, Debug)]
pub enum BcValue {
    Const(f64),
    /// Value is `-mu[k]`; used for imposed approach displacements.
    NegParam(usize),
}

#[derive(Clone, Debug)]
pub struct ParametricProblem {
    pub kind: ProblemKind,
    pub discretization: Discretization,
    pub material: Material,
    /// Closed ranges `[lo, hi]` per parameter component.
    pub parameter_space: Vec<[f64; 2]>,
    /// Dofs per node.
    pub components: usize,
    pub contact: Option<ContactSpec>,
    /// Prescribed dofs with their values, one entry per dof.
    pub dirichlet_bcs: Vec<(usize, BcValue)>,
    /// Ascending free dof indices (complement of the prescribed set).
    pub free: Vec<usize>,
    /// Ascending prescribed dof indices.
    pub dirichlet: Vec<usize>,
    /// Volumetric source for the transport problem (zero = boundary driven).
    pub transport_source: f64,
    /// Reaction coefficient for the transport problem.
    pub transport_reaction: f64,
    /// Node range of the die body; these nodes translate with the parameter.
    iron_nodes: Option<Range<usize>>,
    /// Reference horizontal center of the die.
    iron_center: f64,
}

/// Assembled operator at one parameter point. `factor` acts on free dofs in
/// the order given by `ParametricProblem::free`; `k_full` keeps the full
/// matrix for forming elimination right-hand sides.
pub struct ProblemOperator {
    pub k_full: SymSparse,
    pub factor: SkylineChol,
}

impl ParametricProblem {
    /// Shared constructor plumbing: sorts out free/prescribed dof sets.
    fn assemble_problem(
        kind: ProblemKind,
        discretization: Discretization,
        material: Material,
        parameter_space: Vec<[f64; 2]>,
        components: usize,
        contact: Option<ContactSpec>,
        bcs: BTreeMap<usize, BcValue>,
    ) -> Self {
        let n_nodes = match &discretization {
            Discretization::Line(line) => line.n_nodes,
            Discretization::Plane(mesh) => mesh.n_nodes(),
        };
        let n_dofs = components * n_nodes;
        let dirichlet: Vec<usize> = bcs.keys().copied().collect();
        let mut prescribed = vec![false; n_dofs];
        for &d in &dirichlet {
            prescribed[d] = true;
        }
        let free = (0..n_dofs).filter(|&d| !prescribed[d]).collect();
        ParametricProblem {
            kind,
            discretization,
            material,
            parameter_space,
            components,
            contact,
            dirichlet_bcs: bcs.into_iter().collect(),
            free,
            dirichlet,
            transport_source: 0.0,
            transport_reaction: 0.0,
            iron_nodes: None,
            iron_center: 0.0,
        }
    }

    pub fn n_nodes(&self) -> usize {
        match &self.discretization {
            Discretization::Line(line) => line.n_nodes,
            Discretization::Plane(mesh) => mesh.n_nodes(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.components * self.n_nodes()
    }

    pub fn dof(&self, node: usize, comp: usize) -> usize {
        self.components * node + comp
    }

    pub fn n_parameters(&self) -> usize {
        self.parameter_space.len()
    }

    pub fn mesh(&self) -> Result<&Mesh2D> {
        match &self.discretization {
            Discretization::Plane(mesh) => Ok(mesh),
            Discretization::Line(_) => Err(Error::Config(
                "problem has a 1d discretization, no mesh".into(),
            )),
        }
    }

    pub fn line(&self) -> Result<&Problem1D> {
        match &self.discretization {
            Discretization::Line(line) => Ok(line),
            Discretization::Plane(_) => Err(Error::Config(
                "problem has a 2d discretization, no line".into(),
            )),
        }
    }

    pub fn check_parameter(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.parameter_space.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameter components, got {}",
                self.parameter_space.len(),
                mu.len()
            )));
        }
        for (&m, range) in mu.iter().zip(&self.parameter_space) {
            let slack = 1e-12 * (1.0 + range[1].abs());
            if !m.is_finite() || m < range[0] - slack || m > range[1] + slack {
                return Err(Error::ParameterOutOfRange {
                    value: m,
                    lo: range[0],
                    hi: range[1],
                });
            }
        }
        Ok(())
    }

    /// True when the stiffness operator (and hence its factorization) can be
    /// shared across all parameter points.
    pub fn operator_is_parameter_independent(&self) -> bool {
        match self.kind {
            ProblemKind::Rope | ProblemKind::Hertz | ProblemKind::Ironing => true,
            ProblemKind::RopeElastic | ProblemKind::Transport => false,
        }
    }

    /// Full stiffness and external load at `mu`.
    fn assemble(&self, mu: &[f64]) -> Result<(SymSparse, DVec)> {
        match self.kind {
            ProblemKind::Rope => {
                let line = self.line()?;
                let nu = line.nu;
                Ok(fem::assemble_rope_1d(
                    line.n_nodes,
                    line.length(),
                    &|_| nu,
                    -line.f,
                ))
            }
            ProblemKind::RopeElastic => {
                let line = self.line()?;
                let (soft, stiff) = (mu[0], line.nu);
                Ok(fem::assemble_rope_1d(
                    line.n_nodes,
                    line.length(),
                    &|x| if x < 0.5 { soft } else { stiff },
                    -line.f,
                ))
            }
            ProblemKind::Hertz | ProblemKind::Ironing => {
                let mesh = self.mesh()?;
                let k = fem::assemble_plane_strain(mesh, self.material.young, self.material.poisson)?;
                Ok((k, DVec::zeros(self.n_dofs())))
            }
            ProblemKind::Transport => {
                let mesh = self.mesh()?;
                let bands = [mu[0], mu[1], mu[2]];
                let k = fem::assemble_scalar_diffusion_reaction(
                    mesh,
                    &|p| transport::band_diffusivity(&bands, p[1]),
                    self.transport_reaction,
                )?;
                let load = if self.transport_source == 0.0 {
                    DVec::zeros(self.n_dofs())
                } else {
                    self.transport_source * fem::lumped_mass_scalar(mesh)?
                };
                Ok((k, load))
            }
        }
    }

    /// Assembles and factors the operator at `mu`.
    pub fn operator(&self, mu: &[f64]) -> Result<ProblemOperator> {
        self.check_parameter(mu)?;
        let (k_full, _) = self.assemble(mu)?;
        let k_free = k_full.restrict(&self.free);
        let factor = SkylineChol::new(&k_free)?;
        Ok(ProblemOperator { k_full, factor })
    }

    /// External load over all dofs.
    pub fn rhs(&self, mu: &[f64]) -> Result<DVec> {
        self.check_parameter(mu)?;
        Ok(self.assemble(mu)?.1)
    }

    /// Prescribed values over all dofs (zero on free dofs).
    pub fn dirichlet_values(&self, mu: &[f64]) -> DVec {
        let mut v = DVec::zeros(self.n_dofs());
        for &(dof, bc) in &self.dirichlet_bcs {
            v[dof] = match bc {
                BcValue::Const(c) => c,
                BcValue::NegParam(k) => -mu[k],
            };
        }
        v
    }

    /// Reference coordinate of one node at `mu` (die nodes translate).
    fn node_reference(&self, mesh: &Mesh2D, node: usize, mu: &[f64]) -> [f64; 2] {
        let mut p = mesh.nodes[node];
        if let Some(range) = &self.iron_nodes {
            if range.contains(&node) {
                p[0] += mu[0] - self.iron_center;
            }
        }
        p
    }

    /// Reference node coordinates at `mu` for the whole mesh.
    pub fn reference_nodes(&self, mu: &[f64]) -> Result<Vec<[f64; 2]>> {
        let mesh = self.mesh()?;
        Ok((0..mesh.n_nodes())
            .map(|n| self.node_reference(mesh, n, mu))
            .collect())
    }

    fn surface_path(&self, name: &str, mu: &[f64], u_full: &DVec) -> Result<SurfacePath> {
        let mesh = self.mesh()?;
        let nodes = mesh.surface(name)?.to_vec();
        let reference: Vec<[f64; 2]> = nodes
            .iter()
            .map(|&n| self.node_reference(mesh, n, mu))
            .collect();
        let mut path = SurfacePath::from_reference(nodes, reference);
        path.displace(u_full, self.components);
        Ok(path)
    }

    /// Contact constraints linearized at the current deformed configuration.
    /// `u_full` holds displacements over all dofs (prescribed values filled
    /// in). Problems without contact return an empty operator set.
    pub fn constraints_at(
        &self,
        mu: &[f64],
        u_full: &DVec,
        method: PairingMethod,
    ) -> Result<ConstraintOperators> {
        self.check_parameter(mu)?;
        match self.kind {
            ProblemKind::Rope | ProblemKind::RopeElastic => {
                let line = self.line()?;
                let gamma = if self.kind == ProblemKind::Rope { mu[0] } else { 0.0 };
                // Interior nodes only; the end points are pinned above the
                // obstacle. Row -u_i <= -ob(x_i) keeps the string above it.
                let slave_nodes: Vec<usize> = (1..line.n_nodes - 1).collect();
                let rows: Vec<Vec<(usize, f64)>> =
                    slave_nodes.iter().map(|&i| vec![(i, -1.0)]).collect();
                let gaps = DVec::from_iterator(
                    slave_nodes.len(),
                    slave_nodes.iter().map(|&i| -obstacle_rope(line.x[i], gamma)),
                );
                Ok(ConstraintOperators {
                    rows,
                    gaps,
                    slave_nodes,
                    pairs: Vec::new(),
                    pairing_method: PairingMethod::NodeToNode,
                    n_dofs: self.n_dofs(),
                })
            }
            ProblemKind::Transport => Ok(ConstraintOperators {
                rows: Vec::new(),
                gaps: DVec::zeros(0),
                slave_nodes: Vec::new(),
                pairs: Vec::new(),
                pairing_method: method,
                n_dofs: self.n_dofs(),
            }),
            ProblemKind::Hertz | ProblemKind::Ironing => {
                let spec = self.contact.as_ref().ok_or_else(|| {
                    Error::Config("contact problem without surface spec".into())
                })?;
                let slave = self.surface_path(&spec.slave, mu, u_full)?;
                let master = self.surface_path(&spec.master, mu, u_full)?;
                let pairs = match method {
                    PairingMethod::ClosestPoint => pair_closest_point(&slave, &master),
                    PairingMethod::RayTracing => pair_ray_tracing(&slave, &master),
                    PairingMethod::NodeToNode => {
                        return Err(Error::Config(
                            "node-to-node pairing is only defined for the rope problems".into(),
                        ))
                    }
                };
                Ok(assemble_constraints(
                    &pairs,
                    &slave,
                    &master,
                    self.components,
                    self.n_dofs(),
                    method,
                ))
            }
        }
    }

    pub fn default_pairing(&self) -> PairingMethod {
        match &self.contact {
            Some(spec) => spec.default_method,
            None => PairingMethod::NodeToNode,
        }
    }

    /// Canonical dual indexing: every slave node that can ever carry a
    /// constraint row, in path order. Rows at any parameter point map into
    /// this list by slave node id; unpaired nodes keep a zero multiplier, so
    /// dual vectors from different parameters align entry by entry.
    pub fn dual_nodes(&self) -> Result<Vec<usize>> {
        match self.kind {
            ProblemKind::Rope | ProblemKind::RopeElastic => {
                let line = self.line()?;
                Ok((1..line.n_nodes - 1).collect())
            }
            ProblemKind::Transport => Ok(Vec::new()),
            ProblemKind::Hertz | ProblemKind::Ironing => {
                let spec = self.contact.as_ref().ok_or_else(|| {
                    Error::Config("contact problem without surface spec".into())
                })?;
                Ok(self.mesh()?.surface(&spec.slave)?.to_vec())
            }
        }
    }

    /// Surface integration weight per dual unknown (tributary length of the
    /// slave node), aligned with `dual_nodes`. Used for discrete L2 norms of
    /// multiplier fields.
    pub fn dual_weights(&self) -> Result<DVec> {
        match self.kind {
            ProblemKind::Rope | ProblemKind::RopeElastic => {
                let line = self.line()?;
                let h = line.length() / (line.n_nodes - 1) as f64;
                Ok(DVec::from_element(line.n_nodes - 2, h))
            }
            ProblemKind::Transport => Ok(DVec::zeros(0)),
            ProblemKind::Hertz | ProblemKind::Ironing => {
                let spec = self.contact.as_ref().unwrap();
                let trib = self.mesh()?.tributary_lengths(&spec.slave)?;
                Ok(DVec::from_vec(trib))
            }
        }
    }

    /// Integration weight for each constraint row: the tributary length of
    /// the slave node carrying it. Used for surface L2 norms of multipliers.
    pub fn constraint_weights(&self, ops: &ConstraintOperators) -> Result<DVec> {
        match self.kind {
            ProblemKind::Rope | ProblemKind::RopeElastic => {
                let line = self.line()?;
                let h = line.length() / (line.n_nodes - 1) as f64;
                Ok(DVec::from_element(ops.n_constraints(), h))
            }
            ProblemKind::Transport => Ok(DVec::zeros(0)),
            ProblemKind::Hertz | ProblemKind::Ironing => {
                let spec = self.contact.as_ref().unwrap();
                let mesh = self.mesh()?;
                let trib = mesh.tributary_lengths(&spec.slave)?;
                let path = mesh.surface(&spec.slave)?;
                debug_assert_eq!(trib.len(), path.len());
                Ok(DVec::from_iterator(
                    ops.n_constraints(),
                    ops.pairs.iter().map(|p| trib[p.slave_index]),
                ))
            }
        }
    }

    /// Lumped mass over all dofs, for discrete norms of primal fields.
    pub fn norm_mass(&self) -> Result<DVec> {
        match &self.discretization {
            Discretization::Line(line) => {
                let h = line.length() / (line.n_nodes - 1) as f64;
                let mut m = DVec::from_element(line.n_nodes, h);
                m[0] = 0.5 * h;
                m[line.n_nodes - 1] = 0.5 * h;
                Ok(m)
            }
            Discretization::Plane(mesh) => {
                if self.components == 2 {
                    fem::lumped_mass_2d(mesh)
                } else {
                    fem::lumped_mass_scalar(mesh)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
