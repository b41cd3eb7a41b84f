//! Linear Beltrami solver: reconstructs the piecewise-linear map whose
//! Beltrami coefficient matches a given admissible field.
//!
//! The Beltrami equation f_z̄ = mu f_z converts to a pair of divergence-form
//! elliptic equations div(A grad u) = 0 and div(A grad v) = 0, where the
//! per-face diffusion matrix A = [[a1, a2], [a2, a3]] has
//!
//! a1 = ((rho - 1)^2 + tau^2) / (1 - rho^2 - tau^2)
//! a2 = -2 tau / (1 - rho^2 - tau^2)
//! a3 = ((rho + 1)^2 + tau^2) / (1 - rho^2 - tau^2)
//!
//! for mu = rho + i tau. Piecewise-linear finite elements discretize both
//! equations into one sparse symmetric matrix (kept under the two names C1
//! and C2); Dirichlet constraints pin boundary or landmark vertices and the
//! reduced systems are solved by conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::beltrami::BeltramiField;
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::mesh::{signed_area, DeformationMap, Point, TriMesh, DEGENERATE_AREA};
use crate::sparse::{pcg_jacobi, CsrMatrix};

/// Fields with sup |mu| above 1 - ADMISSIBLE_MARGIN are rejected at assembly;
/// the diffusion coefficients blow up as |mu| approaches 1.
pub const ADMISSIBLE_MARGIN: f64 = 1e-6;

/// Relative residual target of the conjugate gradient solver.
pub const CG_REL_TOL: f64 = 1e-10;

/// Iteration cap factor: at most 20 x vertex count CG iterations per system.
pub const CG_ITERATION_FACTOR: usize = 20;

/// Per-face diffusion matrix entries (a1, a2, a3) for a coefficient mu.
///
/// The matrix [[a1, a2], [a2, a3]] is symmetric positive definite whenever
/// |mu| < 1; larger magnitudes are rejected.
pub fn alpha_coefficients(mu: Complex) -> Result<(f64, f64, f64)> {
    let rho = mu.re;
    let tau = mu.im;
    let denom = 1.0 - rho * rho - tau * tau;
    if denom <= 0.0 {
        return Err(Error::Inadmissible {
            face: None,
            magnitude: mu.abs(),
        });
    }
    let a1 = ((rho - 1.0) * (rho - 1.0) + tau * tau) / denom;
    let a2 = -2.0 * tau / denom;
    let a3 = ((rho + 1.0) * (rho + 1.0) + tau * tau) / denom;
    Ok((a1, a2, a3))
}

/// How the Dirichlet constraints were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Every mesh-boundary vertex pinned to its reference position.
    IdentityBoundary,
    /// An arbitrary set of pinned vertices.
    LandmarkSet,
}

/// Dirichlet constraint set: (vertex index, fixed target position) pairs.
#[derive(Clone, Debug)]
pub struct BoundaryCondition {
    kind: BoundaryKind,
    constraints: Vec<(usize, Point)>,
}

impl BoundaryCondition {
    /// Pins exactly the mesh boundary vertices to their reference positions.
    pub fn identity(mesh: &TriMesh) -> Self {
        let constraints = mesh
            .boundary_vertices()
            .into_iter()
            .map(|v| (v, mesh.position(v)))
            .collect();
        BoundaryCondition {
            kind: BoundaryKind::IdentityBoundary,
            constraints,
        }
    }

    /// Pins the mesh boundary vertices to their positions under `map`.
    pub fn from_map_boundary(map: &DeformationMap) -> Self {
        let constraints = map
            .mesh()
            .boundary_vertices()
            .into_iter()
            .map(|v| (v, map.position(v)))
            .collect();
        BoundaryCondition {
            kind: BoundaryKind::LandmarkSet,
            constraints,
        }
    }

    /// An arbitrary landmark set; vertex indices must be distinct.
    pub fn landmarks(constraints: Vec<(usize, Point)>) -> Result<Self> {
        let mut indices: Vec<usize> = constraints.iter().map(|&(v, _)| v).collect();
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "landmark vertex indices must be distinct".into(),
            ));
        }
        Ok(BoundaryCondition {
            kind: BoundaryKind::LandmarkSet,
            constraints,
        })
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn constraints(&self) -> &[(usize, Point)] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// Assembled discretization of the elliptic system for one Beltrami field.
#[derive(Clone, Debug)]
pub struct LbsSystem {
    mesh: TriMesh,
    c1: CsrMatrix,
    c2: CsrMatrix,
    bc: BoundaryCondition,
    constrained: Vec<Option<Point>>,
}

impl LbsSystem {
    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    /// Stiffness matrix of the u equation.
    pub fn c1(&self) -> &CsrMatrix {
        &self.c1
    }

    /// Stiffness matrix of the v equation (assembled identically to C1).
    pub fn c2(&self) -> &CsrMatrix {
        &self.c2
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn is_constrained(&self, vertex: usize) -> bool {
        self.constrained[vertex].is_some()
    }
}

/// Finite-element assembly of div(A grad .) = 0 over the mesh with per-face
/// constant A from the field, plus Dirichlet constraints.
pub fn assemble(
    mesh: &TriMesh,
    field: &BeltramiField,
    bc: &BoundaryCondition,
) -> Result<LbsSystem> {
    if !field.mesh().same_grid(mesh) {
        return Err(Error::SizeMismatch {
            expected: (mesh.width_v(), mesh.height_v()),
            got: (field.mesh().width_v(), field.mesh().height_v()),
        });
    }
    if bc.is_empty() {
        return Err(Error::Underdetermined);
    }
    let n = mesh.vertex_count();
    let mut constrained: Vec<Option<Point>> = vec![None; n];
    for &(v, target) in bc.constraints() {
        if v >= n {
            return Err(Error::InvalidArgument(alloc::format!(
                "constraint vertex {v} outside mesh with {n} vertices"
            )));
        }
        constrained[v] = Some(target);
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.face_count());
    for (face_idx, face) in mesh.faces().iter().enumerate() {
        let mu = field.value(face_idx);
        if mu.abs() > 1.0 - ADMISSIBLE_MARGIN {
            return Err(Error::Inadmissible {
                face: Some(face_idx),
                magnitude: mu.abs(),
            });
        }
        let (a1, a2, a3) = alpha_coefficients(mu)?;
        let p = [
            mesh.position(face[0]),
            mesh.position(face[1]),
            mesh.position(face[2]),
        ];
        let area = signed_area(p[0], p[1], p[2]);
        if area.abs() <= DEGENERATE_AREA {
            return Err(Error::InvalidMesh { face: face_idx });
        }
        let det = 2.0 * area;
        // Gradient of the hat function at vertex i: rotate the opposite edge
        // by 90 degrees and divide by twice the area.
        let grads = [
            rot90(p[2] - p[1], det),
            rot90(p[0] - p[2], det),
            rot90(p[1] - p[0], det),
        ];
        for i in 0..3 {
            let agi = Point::new(
                a1 * grads[i].x + a2 * grads[i].y,
                a2 * grads[i].x + a3 * grads[i].y,
            );
            for j in 0..3 {
                let k = area * (agi.x * grads[j].x + agi.y * grads[j].y);
                triplets.push((face[i], face[j], k));
            }
        }
    }
    let c1 = CsrMatrix::from_triplets(n, n, triplets);
    let c2 = c1.clone();
    Ok(LbsSystem {
        mesh: mesh.clone(),
        c1,
        c2,
        bc: bc.clone(),
        constrained,
    })
}

fn rot90(v: Point, det: f64) -> Point {
    Point::new(-v.y / det, v.x / det)
}

/// Solves both reduced systems; constrained vertices land exactly on their
/// targets and free vertices satisfy the equations to `CG_REL_TOL`.
pub fn solve(system: &LbsSystem) -> Result<DeformationMap> {
    let guess = crate::mesh::identity_map(system.mesh());
    solve_with_guess(system, &guess)
}

/// Like [`solve`], warm-starting the conjugate gradient from `guess`.
pub fn solve_with_guess(system: &LbsSystem, guess: &DeformationMap) -> Result<DeformationMap> {
    let mesh = system.mesh();
    if !guess.mesh().same_grid(mesh) {
        return Err(Error::SizeMismatch {
            expected: (mesh.width_v(), mesh.height_v()),
            got: (guess.mesh().width_v(), guess.mesh().height_v()),
        });
    }
    let n = mesh.vertex_count();
    let free: Vec<usize> = (0..n).filter(|&v| !system.is_constrained(v)).collect();
    let mut free_of = vec![usize::MAX; n];
    for (fi, &v) in free.iter().enumerate() {
        free_of[v] = fi;
    }

    let mut positions: Vec<Point> = (0..n)
        .map(|v| system.constrained[v].unwrap_or_else(|| guess.position(v)))
        .collect();
    if free.is_empty() {
        return DeformationMap::new(mesh.clone(), positions);
    }

    // Reduced matrix over free vertices plus the constrained-column
    // contributions moved to the right-hand side.
    let nf = free.len();
    let mut triplets = Vec::new();
    let mut rhs_u = vec![0.0; nf];
    let mut rhs_v = vec![0.0; nf];
    for (fi, &v) in free.iter().enumerate() {
        let (cols, vals) = system.c1.row(v);
        for (&c, &val) in cols.iter().zip(vals) {
            match system.constrained[c] {
                None => triplets.push((fi, free_of[c], val)),
                Some(target) => {
                    rhs_u[fi] -= val * target.x;
                    rhs_v[fi] -= val * target.y;
                }
            }
        }
    }
    let reduced = CsrMatrix::from_triplets(nf, nf, triplets);

    let x0_u: Vec<f64> = free.iter().map(|&v| positions[v].x).collect();
    let x0_v: Vec<f64> = free.iter().map(|&v| positions[v].y).collect();
    let max_iter = CG_ITERATION_FACTOR * n;
    let sol_u = pcg_jacobi(&reduced, &rhs_u, &x0_u, CG_REL_TOL, max_iter);
    if !sol_u.converged {
        return Err(Error::NumericalFailure {
            residual: sol_u.relative_residual,
            iterations: sol_u.iterations,
        });
    }
    let sol_v = pcg_jacobi(&reduced, &rhs_v, &x0_v, CG_REL_TOL, max_iter);
    if !sol_v.converged {
        return Err(Error::NumericalFailure {
            residual: sol_v.relative_residual,
            iterations: sol_v.iterations,
        });
    }
    for (fi, &v) in free.iter().enumerate() {
        positions[v] = Point::new(sol_u.solution[fi], sol_v.solution[fi]);
    }
    DeformationMap::new(mesh.clone(), positions)
}

/// L1 residual ||C1 u||_1 + ||C2 v||_1 over unconstrained rows.
pub fn residual_loss(system: &LbsSystem, map: &DeformationMap) -> f64 {
    let n = system.mesh().vertex_count();
    let u: Vec<f64> = map.positions().iter().map(|p| p.x).collect();
    let v: Vec<f64> = map.positions().iter().map(|p| p.y).collect();
    let mut c1u = vec![0.0; n];
    let mut c2v = vec![0.0; n];
    system.c1.matvec(&u, &mut c1u);
    system.c2.matvec(&v, &mut c2v);
    let mut total = 0.0;
    for vtx in 0..n {
        if !system.is_constrained(vtx) {
            total += c1u[vtx].abs() + c2v[vtx].abs();
        }
    }
    total
}
