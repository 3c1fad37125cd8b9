//! Lagrange finite elements of degree 1 and 2 on a [`Mesh`].
//!
//! Dirichlet conditions are imposed by elimination: a [`FESpace`] numbers all
//! DOFs globally but matrices, vectors and fields only carry the free ones.

mod assembly;
mod basis;
mod field;
mod quadrature;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::linalg::{CsrPattern, LdlSymbolic, LinalgError, Scalar, SolverConfig, SparseMatrixReal, SymmetricSolver};
use crate::mesh::{edge_key, BoundaryTag, Mesh, Point2};

pub use assembly::{assemble_mass, assemble_stiffness, assemble_weighted_mass, load_from_quad_values, load_vector};
pub use field::{l2_project, norms, Field, FieldComplex, FieldReal, Norms};
pub use quadrature::QuadratureRule;

use basis::{local_count, ElementGeometry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("unsupported element degree {0}; expected 1 or 2")]
    UnsupportedDegree(usize),
    #[error("incompatible spaces: {0}")]
    Incompatible(String),
    #[error("coefficient vector has length {found}, space has {expected} free DOFs")]
    Length { expected: usize, found: usize },
    #[error("point ({x}, {y}) lies outside the mesh")]
    OutsideDomain { x: f64, y: f64 },
    #[error(transparent)]
    Solver(#[from] LinalgError),
}

const CONSTRAINED: usize = usize::MAX;

/// Degree-r Lagrange space with its DOF numbering and cached operators.
#[derive(Debug)]
pub struct FESpace {
    mesh: Arc<Mesh>,
    degree: usize,
    dof_coords: Vec<Point2>,
    /// `n_local` global DOFs per triangle.
    dof_map: Vec<usize>,
    n_local: usize,
    /// Global DOF → free index, or `CONSTRAINED`.
    free_index: Vec<usize>,
    free_dofs: Vec<usize>,
    quad: QuadratureRule,
    /// Shape values at each quadrature point, `n_local` per point.
    shape: Vec<[f64; 6]>,
    dshape: Vec<[[f64; 3]; 6]>,
    geometry: Vec<ElementGeometry>,
    solver: SolverConfig,
    sparsity: OnceLock<Sparsity>,
    mass: OnceLock<SparseMatrixReal>,
    stiffness: OnceLock<SparseMatrixReal>,
    mass_solver: OnceLock<Result<SymmetricSolver<f64>, LinalgError>>,
}

/// Free-DOF sparsity pattern with the value slot of every local pair.
#[derive(Debug)]
pub(crate) struct Sparsity {
    pub pattern: CsrPattern,
    /// `n_local²` slots per triangle, `CONSTRAINED` when either DOF is.
    pub slots: Vec<usize>,
    pub symbolic: OnceLock<Result<Arc<LdlSymbolic>, LinalgError>>,
}

impl FESpace {
    /// Builds the space with the default mass-solver configuration.
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Arc<Self>, FemError> {
        Self::with_solver(mesh, degree, SolverConfig::default())
    }

    pub fn with_solver(mesh: Arc<Mesh>, degree: usize, solver: SolverConfig) -> Result<Arc<Self>, FemError> {
        if degree != 1 && degree != 2 {
            return Err(FemError::UnsupportedDegree(degree));
        }
        solver.validate()?;
        let n_local = local_count(degree);
        let nv = mesh.points().len();
        let mut dof_coords = mesh.points().to_vec();
        let mut dof_map = Vec::with_capacity(mesh.triangles().len() * n_local);
        let mut edge_dof: HashMap<(usize, usize), usize> = HashMap::new();
        if degree == 2 {
            for [a, b] in mesh.edges() {
                edge_dof.insert((a, b), dof_coords.len());
                dof_coords.push(mesh.points()[a].midpoint(&mesh.points()[b]));
            }
        }
        for t in mesh.triangles() {
            dof_map.extend_from_slice(&t.v);
            if degree == 2 {
                for [a, b] in t.edges() {
                    dof_map.push(edge_dof[&edge_key(a, b)]);
                }
            }
        }

        let mut constrained = vec![false; dof_coords.len()];
        constrained[..nv].copy_from_slice(&mesh.dirichlet_vertices());
        if degree == 2 {
            for e in mesh.boundary().iter().filter(|e| e.tag == BoundaryTag::Dirichlet) {
                constrained[edge_dof[&edge_key(e.endpoints[0], e.endpoints[1])]] = true;
            }
        }
        let mut free_index = vec![CONSTRAINED; dof_coords.len()];
        let mut free_dofs = Vec::new();
        for (g, &c) in constrained.iter().enumerate() {
            if !c {
                free_index[g] = free_dofs.len();
                free_dofs.push(g);
            }
        }

        let quad = QuadratureRule::for_element_degree(degree);
        let mut shape = vec![[0.0; 6]; quad.len()];
        let mut dshape = vec![[[0.0; 3]; 6]; quad.len()];
        for (q, l) in quad.points.iter().enumerate() {
            basis::values(degree, l, &mut shape[q]);
            basis::dvalues(degree, l, &mut dshape[q]);
        }
        let geometry = (0..mesh.triangles().len()).map(|t| ElementGeometry::new(mesh.triangle_points(t))).collect();

        Ok(Arc::new(Self {
            mesh,
            degree,
            dof_coords,
            dof_map,
            n_local,
            free_index,
            free_dofs,
            quad,
            shape,
            dshape,
            geometry,
            solver,
            sparsity: OnceLock::new(),
            mass: OnceLock::new(),
            stiffness: OnceLock::new(),
            mass_solver: OnceLock::new(),
        }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Total DOF count, constrained ones included.
    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn dof_coords(&self) -> &[Point2] {
        &self.dof_coords
    }

    /// Global indices of the free DOFs, ascending.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Free index of a global DOF, `None` when it is constrained.
    pub fn free_index(&self, global: usize) -> Option<usize> {
        let i = self.free_index[global];
        (i != CONSTRAINED).then_some(i)
    }

    /// Global DOFs of triangle `t` in local order.
    pub fn triangle_dofs(&self, t: usize) -> &[usize] {
        &self.dof_map[t * self.n_local..(t + 1) * self.n_local]
    }

    pub fn local_dofs(&self) -> usize {
        self.n_local
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver
    }

    /// Whether two spaces describe the same DOFs.
    pub fn same_as(&self, other: &FESpace) -> bool {
        std::ptr::eq(self, other)
            || (self.degree == other.degree
                && (Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh == other.mesh)
                && self.free_dofs == other.free_dofs)
    }

    pub(crate) fn sparsity(&self) -> &Sparsity {
        self.sparsity.get_or_init(|| {
            let n = self.n_local;
            let mut entries = Vec::with_capacity(self.dof_map.len() * n);
            for dofs in self.dof_map.chunks_exact(n) {
                for &a in dofs {
                    let fa = self.free_index[a];
                    if fa == CONSTRAINED {
                        continue;
                    }
                    for &b in dofs {
                        let fb = self.free_index[b];
                        if fb != CONSTRAINED {
                            entries.push((fa, fb));
                        }
                    }
                }
            }
            let pattern = CsrPattern::from_entries(self.n_free(), entries).expect("free indices are in range");
            let mut slots = Vec::with_capacity(self.dof_map.len() * n);
            for dofs in self.dof_map.chunks_exact(n) {
                for &a in dofs {
                    for &b in dofs {
                        let (fa, fb) = (self.free_index[a], self.free_index[b]);
                        slots.push(if fa == CONSTRAINED || fb == CONSTRAINED {
                            CONSTRAINED
                        } else {
                            pattern.find(fa, fb).expect("pair is in the pattern")
                        });
                    }
                }
            }
            Sparsity { pattern, slots, symbolic: OnceLock::new() }
        })
    }

    /// Fill-reducing analysis of the shared operator pattern.
    pub fn symbolic(&self) -> Result<Arc<LdlSymbolic>, LinalgError> {
        self.sparsity().symbolic.get_or_init(|| LdlSymbolic::analyze(&self.sparsity().pattern)).clone()
    }

    /// Operator sparsity pattern over the free DOFs.
    pub fn pattern(&self) -> &CsrPattern {
        &self.sparsity().pattern
    }

    /// Cached mass matrix.
    pub fn mass(&self) -> &SparseMatrixReal {
        self.mass.get_or_init(|| assemble_mass(self))
    }

    /// Cached stiffness matrix.
    pub fn stiffness(&self) -> &SparseMatrixReal {
        self.stiffness.get_or_init(|| assemble_stiffness(self))
    }

    /// Solves M·x = b, splitting complex right-hand sides into real parts.
    pub fn solve_mass<T: Scalar>(&self, b: &[T]) -> Result<Vec<T>, FemError> {
        if b.len() != self.n_free() {
            return Err(FemError::Length { expected: self.n_free(), found: b.len() });
        }
        if b.is_empty() {
            return Ok(Vec::new());
        }
        let solver = self
            .mass_solver
            .get_or_init(|| {
                let sym = self.symbolic()?;
                SymmetricSolver::with_symbolic(self.mass().clone(), &sym, self.solver)
            })
            .as_ref()
            .map_err(|e| FemError::Solver(e.clone()))?;
        let re: Vec<f64> = b.iter().map(|v| v.re()).collect();
        let xr = solver.solve(&re)?;
        if b.iter().all(|v| v.im() == 0.0) {
            return Ok(xr.into_iter().map(|r| T::from_parts(r, 0.0)).collect());
        }
        let im: Vec<f64> = b.iter().map(|v| v.im()).collect();
        let xi = solver.solve(&im)?;
        Ok(xr.into_iter().zip(xi).map(|(r, i)| T::from_parts(r, i)).collect())
    }
}

/// Builds a degree-`r` space on `mesh`.
pub fn build_space(mesh: Arc<Mesh>, r: usize) -> Result<Arc<FESpace>, FemError> {
    FESpace::new(mesh, r)
}
