//! Beltrami coefficients of piecewise-linear maps: computation, magnitude
//! constraints, smoothing, and Fourier low-pass truncation.
//!
//! For a map f = u + iv the Beltrami coefficient is the Wirtinger quotient
//! mu = (df/dz̄) / (df/dz) with d/dz = (d/dx - i d/dy)/2 and
//! d/dz̄ = (d/dx + i d/dy)/2. On a triangulated domain the first derivatives
//! of a piecewise-linear map are constant per face, so mu is one complex
//! number per face. mu = 0 means the face is mapped conformally; |mu| < 1
//! everywhere characterises an orientation-preserving quasiconformal map.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::fft;
use crate::filter;
use crate::mesh::{DeformationMap, TriMesh, DEGENERATE_AREA};

/// |f_z| below this threshold makes the face count as degenerate.
pub const DEGENERATE_FZ: f64 = 1e-14;

/// One complex value mu = rho + i tau per face of a mesh.
#[derive(Clone, PartialEq)]
pub struct BeltramiField {
    mesh: TriMesh,
    values: Vec<Complex>,
}

impl fmt::Debug for BeltramiField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BeltramiField({}x{}, sup {:.4})",
            self.mesh.width_v(),
            self.mesh.height_v(),
            sup_norm(self)
        )
    }
}

impl BeltramiField {
    pub fn new(mesh: TriMesh, values: Vec<Complex>) -> Result<Self> {
        if values.len() != mesh.face_count() {
            return Err(Error::SizeMismatch {
                expected: (mesh.face_count(), 1),
                got: (values.len(), 1),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "non-finite coefficient on face {i}"
            )));
        }
        Ok(BeltramiField { mesh, values })
    }

    /// The zero (conformal) field.
    pub fn zero(mesh: &TriMesh) -> Self {
        BeltramiField {
            values: vec![Complex::ZERO; mesh.face_count()],
            mesh: mesh.clone(),
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn value(&self, face: usize) -> Complex {
        self.values[face]
    }

    /// Resamples the per-face field to the per-cell grid by averaging each
    /// cell's two faces. Row-major over (height_v - 1) x (width_v - 1) cells.
    pub fn to_cell_grid(&self) -> Vec<Complex> {
        let (cw, ch) = self.mesh.cell_dims();
        let mut grid = Vec::with_capacity(cw * ch);
        for r in 0..ch {
            for c in 0..cw {
                let (lo, up) = self.mesh.cell_faces(r, c);
                grid.push((self.values[lo] + self.values[up]).scale(0.5));
            }
        }
        grid
    }

    /// Redistributes per-cell values to both faces of each cell.
    pub fn from_cell_grid(mesh: &TriMesh, grid: &[Complex]) -> Result<Self> {
        let (cw, ch) = mesh.cell_dims();
        if grid.len() != cw * ch {
            return Err(Error::SizeMismatch {
                expected: (cw, ch),
                got: (grid.len(), 1),
            });
        }
        let mut values = vec![Complex::ZERO; mesh.face_count()];
        for r in 0..ch {
            for c in 0..cw {
                let (lo, up) = mesh.cell_faces(r, c);
                values[lo] = grid[r * cw + c];
                values[up] = grid[r * cw + c];
            }
        }
        BeltramiField::new(mesh.clone(), values)
    }
}

/// Beltrami coefficient of a piecewise-linear map, one value per face.
///
/// Per-face gradients come from exact linear interpolation over the triangle
/// (edge-vector algebra), so the result is exact for piecewise-linear maps.
pub fn compute_beltrami(map: &DeformationMap) -> Result<BeltramiField> {
    let mesh = map.mesh();
    let mut values = Vec::with_capacity(mesh.face_count());
    for (face_idx, face) in mesh.faces().iter().enumerate() {
        let [i0, i1, i2] = *face;
        let p0 = mesh.position(i0);
        let e1 = mesh.position(i1) - p0;
        let e2 = mesh.position(i2) - p0;
        let det = e1.x * e2.y - e1.y * e2.x; // twice the reference area
        if det.abs() <= 2.0 * DEGENERATE_AREA {
            return Err(Error::InvalidMesh { face: face_idx });
        }
        let q0 = map.position(i0);
        let q1 = map.position(i1);
        let q2 = map.position(i2);
        let du1 = q1.x - q0.x;
        let du2 = q2.x - q0.x;
        let dv1 = q1.y - q0.y;
        let dv2 = q2.y - q0.y;
        let inv = 1.0 / det;
        let ux = (e2.y * du1 - e1.y * du2) * inv;
        let uy = (-e2.x * du1 + e1.x * du2) * inv;
        let vx = (e2.y * dv1 - e1.y * dv2) * inv;
        let vy = (-e2.x * dv1 + e1.x * dv2) * inv;
        let fz = Complex::new(0.5 * (ux + vy), 0.5 * (vx - uy));
        let fzbar = Complex::new(0.5 * (ux - vy), 0.5 * (vx + uy));
        if fz.abs() < DEGENERATE_FZ {
            return Err(Error::DegenerateMap { face: face_idx });
        }
        values.push(fzbar / fz);
    }
    BeltramiField::new(mesh.clone(), values)
}

/// Squashes every coefficient to tanh(|mu|) times its unit phase, then clamps
/// the magnitude to at most 1 - eps. Zero stays zero and the phase of every
/// nonzero entry is preserved, so the output is always admissible.
pub fn squash_activation(field: &BeltramiField, eps: f64) -> Result<BeltramiField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "margin eps must lie in (0, 1), got {eps}"
        )));
    }
    let cap = 1.0 - eps;
    let values = field
        .values
        .iter()
        .map(|&mu| {
            let r = mu.abs();
            if r == 0.0 {
                Complex::ZERO
            } else {
                let squashed = libm::tanh(r).min(cap);
                mu.scale(squashed / r)
            }
        })
        .collect();
    BeltramiField::new(field.mesh.clone(), values)
}

/// max over faces of |mu|.
pub fn sup_norm(field: &BeltramiField) -> f64 {
    field
        .values
        .iter()
        .fold(0.0_f64, |acc, &mu| acc.max(mu.abs()))
}

/// Per-cell Gaussian smoothing of the field: resample to the cell grid,
/// blur rho and tau independently with standard deviation `sigma` (in
/// cells), redistribute to both faces of each cell. `sigma = 0` performs
/// only the grid round-trip.
pub fn smooth_field(field: &BeltramiField, sigma: f64) -> BeltramiField {
    let (cw, ch) = field.mesh.cell_dims();
    let grid = field.to_cell_grid();
    let rho: Vec<f64> = grid.iter().map(|v| v.re).collect();
    let tau: Vec<f64> = grid.iter().map(|v| v.im).collect();
    let rho = filter::blur_grid(&rho, cw, ch, sigma);
    let tau = filter::blur_grid(&tau, cw, ch, sigma);
    let blurred: Vec<Complex> = rho
        .iter()
        .zip(&tau)
        .map(|(&re, &im)| Complex::new(re, im))
        .collect();
    BeltramiField::from_cell_grid(&field.mesh, &blurred)
        .expect("cell grid dimensions are consistent by construction")
}

/// Keeps only the centered k x k low-frequency block of the field's 2D
/// discrete Fourier transform on the cell grid, zeroing everything else.
/// `k` equal to the full grid size leaves the field unchanged.
pub fn fourier_truncate(field: &BeltramiField, k: usize) -> Result<BeltramiField> {
    let (cw, ch) = field.mesh.cell_dims();
    if k < 1 || k > cw.min(ch) {
        return Err(Error::InvalidArgument(alloc::format!(
            "truncation size k = {k} outside 1..={}",
            cw.min(ch)
        )));
    }
    let mut grid = field.to_cell_grid();
    fft::fft_2d(&mut grid, cw, ch);
    let keep_x = keep_mask(cw, k);
    let keep_y = keep_mask(ch, k);
    for r in 0..ch {
        for c in 0..cw {
            if !(keep_y[r] && keep_x[c]) {
                grid[r * cw + c] = Complex::ZERO;
            }
        }
    }
    fft::ifft_2d(&mut grid, cw, ch);
    BeltramiField::from_cell_grid(&field.mesh, &grid)
}

/// Magnitude clamp to at most `cap`, phase untouched.
pub(crate) fn clamp_magnitude(field: &BeltramiField, cap: f64) -> BeltramiField {
    let values = field
        .values
        .iter()
        .map(|&mu| {
            let r = mu.abs();
            if r > cap {
                mu.scale(cap / r)
            } else {
                mu
            }
        })
        .collect();
    BeltramiField {
        mesh: field.mesh.clone(),
        values,
    }
}

/// Which DFT indices of a length-n axis survive a centered block of size k.
/// Index `i` carries the signed frequency i (i < (n+1)/2) or i - n; the
/// block keeps frequencies in [-floor(k/2), -floor(k/2) + k).
fn keep_mask(n: usize, k: usize) -> Vec<bool> {
    let lo = -((k / 2) as isize);
    let hi = lo + k as isize;
    (0..n)
        .map(|i| {
            let f = if i < n.div_ceil(2) {
                i as isize
            } else {
                i as isize - n as isize
            };
            f >= lo && f < hi
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid_mesh, identity_map, DeformationMap, Point};
    use crate::rng;
    use proptest::prelude::*;

    fn map_az_bzbar(mesh: &TriMesh, a: Complex, b: Complex, c: Complex) -> DeformationMap {
        DeformationMap::from_fn(mesh, |p| {
            let z = Complex::new(p.x, p.y);
            let w = a * z + b * z.conj() + c;
            Point::new(w.re, w.im)
        })
        .unwrap()
    }

    #[test]
    fn identity_is_conformal() {
        let mesh = build_grid_mesh(9, 7).unwrap();
        let field = compute_beltrami(&identity_map(&mesh)).unwrap();
        for &mu in field.values() {
            assert_eq!(mu, Complex::ZERO);
        }
    }

    #[test]
    fn anisotropic_stretch_has_constant_real_mu() {
        // f(x, y) = (2x, y), i.e. f(z) = 1.5 z + 0.5 z̄, so mu = 1/3.
        let mesh = build_grid_mesh(8, 8).unwrap();
        let map = DeformationMap::from_fn(&mesh, |p| Point::new(2.0 * p.x, p.y)).unwrap();
        let field = compute_beltrami(&map).unwrap();
        for &mu in field.values() {
            assert!((mu.re - 1.0 / 3.0).abs() < 1e-14);
            assert!(mu.im.abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_is_conformal() {
        let mesh = build_grid_mesh(8, 8).unwrap();
        let a = Complex::cis(core::f64::consts::FRAC_PI_4);
        let map = map_az_bzbar(&mesh, a, Complex::ZERO, Complex::ZERO);
        let field = compute_beltrami(&map).unwrap();
        assert!(sup_norm(&field) <= 1e-10);
    }

    proptest! {
        // For f(z) = a z + b z̄ with |b| < |a| the coefficient is b/a on
        // every face, to near machine precision.
        #[test]
        fn affine_law(are in -2.0f64..2.0, aim in -2.0f64..2.0,
                      bre in -0.9f64..0.9, bim in -0.9f64..0.9) {
            let a = Complex::new(are, aim);
            let b = Complex::new(bre, bim);
            prop_assume!(a.abs() > 0.2 && b.abs() < a.abs() * 0.95);
            let mesh = build_grid_mesh(6, 5).unwrap();
            let map = map_az_bzbar(&mesh, a, b, Complex::new(0.7, -0.3));
            let field = compute_beltrami(&map).unwrap();
            let expected = b / a;
            for &mu in field.values() {
                prop_assert!((mu - expected).abs() <= 1e-10);
            }
        }

        #[test]
        fn squash_keeps_phase_and_admissibility(re in -4.0f64..4.0, im in -4.0f64..4.0) {
            let mesh = build_grid_mesh(2, 2).unwrap();
            let input = Complex::new(re, im);
            let field = BeltramiField::new(mesh, alloc::vec![input; 2]).unwrap();
            let out = squash_activation(&field, 1e-3).unwrap();
            let v = out.value(0);
            prop_assert!(v.abs() <= 1.0 - 1e-3 + 1e-15);
            if input.abs() > 0.0 {
                let d = (v.arg() - input.arg()).abs();
                let d = d.min(2.0 * core::f64::consts::PI - d);
                prop_assert!(d <= 1e-12);
            }
        }
    }

    #[test]
    fn squash_fixed_values() {
        let mesh = build_grid_mesh(2, 3).unwrap();
        let field = BeltramiField::new(
            mesh,
            alloc::vec![
                Complex::ZERO,
                Complex::new(2.0, 0.0),
                Complex::new(0.0, 0.3),
                Complex::new(-5.0, 0.0),
            ],
        )
        .unwrap();
        let out = squash_activation(&field, 1e-3).unwrap();
        assert_eq!(out.value(0), Complex::ZERO);
        // tanh(2) and tanh(0.3), phase preserved exactly on the axes.
        assert!((out.value(1).re - 0.9640275800758169).abs() < 1e-12);
        assert_eq!(out.value(1).im, 0.0);
        assert_eq!(out.value(2).re, 0.0);
        assert!((out.value(2).im - 0.2913126124515909).abs() < 1e-12);
        assert!(out.value(3).re < 0.0);
        // An independent route to tanh: (e^x - e^-x) / (e^x + e^-x).
        let t2 = (libm::exp(2.0) - libm::exp(-2.0)) / (libm::exp(2.0) + libm::exp(-2.0));
        assert!((out.value(1).re - t2).abs() < 1e-15);
    }

    #[test]
    fn squash_rejects_bad_margin() {
        let mesh = build_grid_mesh(2, 2).unwrap();
        let field = BeltramiField::zero(&mesh);
        assert!(squash_activation(&field, 0.0).is_err());
        assert!(squash_activation(&field, 1.0).is_err());
    }

    #[test]
    fn sup_norm_cases() {
        let mesh = build_grid_mesh(3, 3).unwrap();
        assert_eq!(sup_norm(&BeltramiField::zero(&mesh)), 0.0);
        let mut values = alloc::vec![Complex::ZERO; mesh.face_count()];
        values[3] = Complex::new(0.6, 0.8);
        let field = BeltramiField::new(mesh, values).unwrap();
        assert!((sup_norm(&field) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_sigma_zero_is_identity_on_cell_constant_fields() {
        let mesh = build_grid_mesh(5, 4).unwrap();
        let (cw, ch) = mesh.cell_dims();
        let grid: Vec<Complex> = (0..cw * ch)
            .map(|i| Complex::new(rng::unit_f64_at(3, i as u64), -0.2))
            .collect();
        let field = BeltramiField::from_cell_grid(&mesh, &grid).unwrap();
        let out = smooth_field(&field, 0.0);
        assert_eq!(out.values(), field.values());
    }

    #[test]
    fn smooth_preserves_constants() {
        let mesh = build_grid_mesh(9, 9).unwrap();
        let c = Complex::new(0.21, -0.34);
        let field = BeltramiField::new(mesh.clone(), alloc::vec![c; mesh.face_count()]).unwrap();
        let out = smooth_field(&field, 2.5);
        for &v in out.values() {
            assert!((v - c).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_impulse_spreads_but_conserves_mass() {
        let mesh = build_grid_mesh(33, 33).unwrap();
        let (cw, ch) = mesh.cell_dims();
        let mut grid = alloc::vec![Complex::ZERO; cw * ch];
        grid[(ch / 2) * cw + cw / 2] = Complex::new(1.0, -0.5);
        let field = BeltramiField::from_cell_grid(&mesh, &grid).unwrap();
        let out = smooth_field(&field, 2.0);
        let out_grid = out.to_cell_grid();
        let sum = out_grid.iter().fold(Complex::ZERO, |acc, &v| acc + v);
        assert!((sum.re - 1.0).abs() < 1e-9);
        assert!((sum.im + 0.5).abs() < 1e-9);
        // It actually spread.
        assert!(out.to_cell_grid()[(ch / 2) * cw + cw / 2].abs() < 1.0);
    }

    fn random_field(mesh: &TriMesh, seed: u64, scale: f64) -> BeltramiField {
        let values: Vec<Complex> = (0..mesh.face_count())
            .map(|i| {
                Complex::new(
                    (rng::unit_f64_at(seed, 2 * i as u64) - 0.5) * scale,
                    (rng::unit_f64_at(seed, 2 * i as u64 + 1) - 0.5) * scale,
                )
            })
            .collect();
        BeltramiField::new(mesh.clone(), values).unwrap()
    }

    fn grid_energy(field: &BeltramiField) -> f64 {
        field.to_cell_grid().iter().map(|v| v.abs_sq()).sum()
    }

    #[test]
    fn truncation_with_full_block_is_identity() {
        // Square cell grid: the full block covers every frequency.
        let mesh = build_grid_mesh(13, 13).unwrap();
        let field = random_field(&mesh, 11, 0.8);
        let (cw, ch) = mesh.cell_dims();
        let out = fourier_truncate(&field, cw.min(ch)).unwrap();
        let a = field.to_cell_grid();
        let b = out.to_cell_grid();
        for (x, y) in a.iter().zip(&b) {
            assert!((*x - *y).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_keeps_dc_of_constant_field() {
        let mesh = build_grid_mesh(8, 8).unwrap();
        let c = Complex::new(0.4, 0.1);
        let field = BeltramiField::new(mesh.clone(), alloc::vec![c; mesh.face_count()]).unwrap();
        let out = fourier_truncate(&field, 1).unwrap();
        for &v in out.values() {
            assert!((v - c).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_is_a_projection_and_contracts_energy() {
        let mesh = build_grid_mesh(13, 10).unwrap();
        let field = random_field(&mesh, 29, 1.4);
        for k in [1usize, 2, 3, 5, 9] {
            let once = fourier_truncate(&field, k).unwrap();
            let twice = fourier_truncate(&once, k).unwrap();
            for (a, b) in once.to_cell_grid().iter().zip(twice.to_cell_grid()) {
                assert!((*a - b).abs() < 1e-9, "k = {k}");
            }
            assert!(grid_energy(&once) <= grid_energy(&field) + 1e-12, "k = {k}");
        }
    }

    #[test]
    fn truncation_rejects_oversized_k() {
        let mesh = build_grid_mesh(5, 5).unwrap();
        let field = BeltramiField::zero(&mesh);
        assert!(fourier_truncate(&field, 5).is_err());
        assert!(fourier_truncate(&field, 0).is_err());
        assert!(fourier_truncate(&field, 4).is_ok());
    }

    #[test]
    fn degenerate_candidate_map_is_reported_with_face_index() {
        let mesh = build_grid_mesh(3, 3).unwrap();
        // Collapse everything to one point: f_z = 0 on every face.
        let map = DeformationMap::from_fn(&mesh, |_| Point::new(1.0, 1.0)).unwrap();
        match compute_beltrami(&map) {
            Err(Error::DegenerateMap { face }) => assert_eq!(face, 0),
            other => panic!("expected degenerate-map error, got {other:?}"),
        }
    }
}
