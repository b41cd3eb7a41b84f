//! Regular triangulations of the image domain and piecewise-linear
//! deformation maps defined on them.
//!
//! Coordinate convention: image pixel (row r, col c) has its center at map
//! coordinate (x = c, y = r), rows increasing downward. The vertex grid
//! coincides with the pixel grid, one vertex per pixel center. Each grid cell
//! is split along its SW-NE diagonal into two triangles; compass directions
//! are read in coordinate terms (south = smaller y, west = smaller x), so
//! both triangles are counter-clockwise with positive signed area.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Absolute signed-area threshold (px^2) below which a face is degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// A 2D point or vector in pixel units.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Signed area of the triangle (a, b, c); positive for counter-clockwise.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

struct MeshData {
    width_v: usize,
    height_v: usize,
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
}

/// Regular triangulation of a `width_v` x `height_v` vertex grid.
///
/// Cheap to clone (shared storage); all data is immutable after construction.
#[derive(Clone)]
pub struct TriMesh {
    inner: Arc<MeshData>,
}

impl fmt::Debug for TriMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TriMesh({}x{})", self.width_v(), self.height_v())
    }
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other)
    }
}

impl TriMesh {
    pub fn width_v(&self) -> usize {
        self.inner.width_v
    }

    pub fn height_v(&self) -> usize {
        self.inner.height_v
    }

    pub fn vertex_count(&self) -> usize {
        self.inner.vertices.len()
    }

    /// Number of triangular faces m = 2 (width_v - 1)(height_v - 1).
    pub fn face_count(&self) -> usize {
        self.inner.faces.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.inner.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.inner.faces
    }

    pub fn position(&self, vertex: usize) -> Point {
        self.inner.vertices[vertex]
    }

    pub fn vertex_index(&self, row: usize, col: usize) -> usize {
        row * self.inner.width_v + col
    }

    /// Cell-grid dimensions (width_v - 1, height_v - 1); one cell per face pair.
    pub fn cell_dims(&self) -> (usize, usize) {
        (self.inner.width_v - 1, self.inner.height_v - 1)
    }

    /// Face indices (lower, upper) of the cell at (cell row, cell col).
    pub fn cell_faces(&self, row: usize, col: usize) -> (usize, usize) {
        let cell = row * (self.inner.width_v - 1) + col;
        (2 * cell, 2 * cell + 1)
    }

    pub fn is_boundary(&self, vertex: usize) -> bool {
        let r = vertex / self.inner.width_v;
        let c = vertex % self.inner.width_v;
        r == 0 || c == 0 || r == self.inner.height_v - 1 || c == self.inner.width_v - 1
    }

    /// All boundary vertex indices in row-major order.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.is_boundary(v))
            .collect()
    }

    pub fn same_grid(&self, other: &TriMesh) -> bool {
        self.width_v() == other.width_v() && self.height_v() == other.height_v()
    }
}

/// Builds the canonical grid mesh: vertices row-major with vertex (row, col)
/// at (x = col, y = row); cells row-major, each split SW-NE into the lower
/// triangle (SW, SE, NE) followed by the upper triangle (SW, NE, NW).
pub fn build_grid_mesh(width_v: usize, height_v: usize) -> Result<TriMesh> {
    if width_v < 2 || height_v < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "grid mesh needs at least 2x2 vertices, got {width_v}x{height_v}"
        )));
    }
    let mut vertices = Vec::with_capacity(width_v * height_v);
    for r in 0..height_v {
        for c in 0..width_v {
            vertices.push(Point::new(c as f64, r as f64));
        }
    }
    let mut faces = Vec::with_capacity(2 * (width_v - 1) * (height_v - 1));
    for r in 0..height_v - 1 {
        for c in 0..width_v - 1 {
            let sw = r * width_v + c;
            let se = sw + 1;
            let nw = sw + width_v;
            let ne = nw + 1;
            faces.push([sw, se, ne]);
            faces.push([sw, ne, nw]);
        }
    }
    Ok(TriMesh {
        inner: Arc::new(MeshData {
            width_v,
            height_v,
            vertices,
            faces,
        }),
    })
}

/// A piecewise-linear map f = (u, v): per-vertex target positions.
#[derive(Clone, PartialEq)]
pub struct DeformationMap {
    mesh: TriMesh,
    positions: Vec<Point>,
}

impl fmt::Debug for DeformationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DeformationMap({}x{}, sup displacement {:.3})",
            self.mesh.width_v(),
            self.mesh.height_v(),
            self.displacement_sup()
        )
    }
}

impl DeformationMap {
    pub fn new(mesh: TriMesh, positions: Vec<Point>) -> Result<Self> {
        if positions.len() != mesh.vertex_count() {
            return Err(Error::SizeMismatch {
                expected: (mesh.vertex_count(), 1),
                got: (positions.len(), 1),
            });
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "non-finite position at vertex {i}"
            )));
        }
        Ok(DeformationMap { mesh, positions })
    }

    /// Map with target positions given by a function of the reference position.
    pub fn from_fn(mesh: &TriMesh, f: impl Fn(Point) -> Point) -> Result<Self> {
        let positions = mesh.vertices().iter().map(|&p| f(p)).collect();
        DeformationMap::new(mesh.clone(), positions)
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<Point> {
        self.positions
    }

    pub fn position(&self, vertex: usize) -> Point {
        self.positions[vertex]
    }

    /// Evaluates the map at an arbitrary point by bilinear interpolation on
    /// the vertex grid. Outside the domain the border cells extend linearly,
    /// so affine maps evaluate exactly everywhere.
    pub fn sample(&self, x: f64, y: f64) -> Point {
        let w = self.mesh.width_v();
        let h = self.mesh.height_v();
        let cx = (libm::floor(x) as isize).clamp(0, w as isize - 2) as usize;
        let cy = (libm::floor(y) as isize).clamp(0, h as isize - 2) as usize;
        let fx = x - cx as f64;
        let fy = y - cy as f64;
        let i00 = cy * w + cx;
        let p00 = self.positions[i00];
        let p10 = self.positions[i00 + 1];
        let p01 = self.positions[i00 + w];
        let p11 = self.positions[i00 + w + 1];
        let top = p00 * (1.0 - fx) + p10 * fx;
        let bot = p01 * (1.0 - fx) + p11 * fx;
        top * (1.0 - fy) + bot * fy
    }

    /// Largest displacement from the reference position over all vertices.
    pub fn displacement_sup(&self) -> f64 {
        self.positions
            .iter()
            .zip(self.mesh.vertices())
            .fold(0.0_f64, |acc, (&p, &q)| acc.max((p - q).norm()))
    }
}

/// The identity map: every vertex stays at its reference position.
pub fn identity_map(mesh: &TriMesh) -> DeformationMap {
    DeformationMap {
        mesh: mesh.clone(),
        positions: mesh.vertices().to_vec(),
    }
}

/// Per-face orientation classification of a mapped mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrientationCount {
    pub positive: usize,
    pub degenerate: usize,
    pub flipped: usize,
}

impl OrientationCount {
    pub fn is_fold_free(&self) -> bool {
        self.flipped == 0
    }
}

/// Classifies every mapped face by the sign of its signed area; faces with
/// |area| <= `DEGENERATE_AREA` count as degenerate.
pub fn face_orientation_count(map: &DeformationMap) -> OrientationCount {
    let mut count = OrientationCount {
        positive: 0,
        degenerate: 0,
        flipped: 0,
    };
    for face in map.mesh().faces() {
        let area = signed_area(
            map.position(face[0]),
            map.position(face[1]),
            map.position(face[2]),
        );
        if area.abs() <= DEGENERATE_AREA {
            count.degenerate += 1;
        } else if area > 0.0 {
            count.positive += 1;
        } else {
            count.flipped += 1;
        }
    }
    count
}

/// Indices of up to `limit` flipped faces, in canonical face order.
pub fn flipped_faces(map: &DeformationMap, limit: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, face) in map.mesh().faces().iter().enumerate() {
        let area = signed_area(
            map.position(face[0]),
            map.position(face[1]),
            map.position(face[2]),
        );
        if area.abs() > DEGENERATE_AREA && area < 0.0 {
            out.push(i);
            if out.len() == limit {
                break;
            }
        }
    }
    out
}
