//! Parametric synthetic geometric distortions: affine, elastic, combined,
//! and wave/turbulence-like displacement fields, plus paired-data generation.
//!
//! Every generator is a pure function of (spec, mesh): randomness comes from
//! the counter-based generator in [`crate::rng`], so identical specs produce
//! bit-identical fields on every platform. Fields are emitted as deformation
//! maps so the ground-truth warp is always available alongside the distorted
//! image.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter;
use crate::mesh::{build_grid_mesh, DeformationMap, Point, TriMesh};
use crate::rng;
use crate::warp::{compose_displacement, RasterImage};

/// Stream salts for the independent noise channels of the generators.
pub const SALT_ELASTIC_X: u64 = 0x656c_6173_7469_6358; // "elasticX"
pub const SALT_ELASTIC_Y: u64 = 0x656c_6173_7469_6359; // "elasticY"
pub const SALT_WAVES: u64 = 0x7761_7665_7365_7473; // "wavesets"
pub const SALT_AIR: u64 = 0x6169_725f_6f63_7435; // "air_oct5"

/// Rigid-plus-scale transform about the domain center.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AffineParams {
    /// Rotation angle in radians.
    pub theta: f64,
    /// Isotropic scale factor (> 0).
    pub scale: f64,
    /// Translation in pixels.
    pub translation: (f64, f64),
}

impl AffineParams {
    pub fn identity() -> Self {
        AffineParams {
            theta: 0.0,
            scale: 1.0,
            translation: (0.0, 0.0),
        }
    }
}

/// Gaussian-smoothed random displacement of bounded amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ElasticParams {
    /// Largest displacement magnitude in pixels (>= 0).
    pub amplitude: f64,
    /// Gaussian smoothing standard deviation in pixels (> 0).
    pub smoothness: f64,
}

/// Sinusoidal displacement parameters shared by the wave-like kinds.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WaveParams {
    /// Peak displacement in pixels (>= 0).
    pub amplitude: f64,
    /// Base spatial frequency in cycles per pixel.
    pub frequency: f64,
    /// Phase offset in radians.
    pub phase: f64,
}

/// Multi-scale smoothed random field with a single strength knob.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AirParams {
    /// Peak displacement in pixels (>= 0).
    pub strength: f64,
}

/// Preset strength of the weak air-like distortion, in pixels.
pub const AIR_WEAK_STRENGTH: f64 = 1.5;
/// Preset strength of the strong air-like distortion, in pixels.
pub const AIR_STRONG_STRENGTH: f64 = 4.0;

/// The distortion family and its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", content = "parameters", rename_all = "kebab-case")
)]
pub enum DistortionKind {
    Affine(AffineParams),
    Elastic(ElasticParams),
    /// Affine applied after elastic: f(p) = affine(elastic(p)).
    Combined {
        affine: AffineParams,
        elastic: ElasticParams,
    },
    Ripple(WaveParams),
    OceanLike(WaveParams),
    AirLike(AirParams),
}

/// Full description of one synthetic distortion draw.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DistortionSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: DistortionKind,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    /// Standard deviation of the additive Gaussian observation noise.
    #[cfg_attr(feature = "serde", serde(default))]
    pub noise_sigma: f64,
}

impl DistortionSpec {
    pub fn new(kind: DistortionKind, seed: u64) -> Self {
        DistortionSpec {
            kind,
            seed,
            noise_sigma: 0.0,
        }
    }

    pub fn affine(theta: f64, scale: f64, translation: (f64, f64), seed: u64) -> Self {
        DistortionSpec::new(
            DistortionKind::Affine(AffineParams {
                theta,
                scale,
                translation,
            }),
            seed,
        )
    }

    pub fn elastic(amplitude: f64, smoothness: f64, seed: u64) -> Self {
        DistortionSpec::new(
            DistortionKind::Elastic(ElasticParams {
                amplitude,
                smoothness,
            }),
            seed,
        )
    }

    pub fn ripple(amplitude: f64, frequency: f64, phase: f64, seed: u64) -> Self {
        DistortionSpec::new(
            DistortionKind::Ripple(WaveParams {
                amplitude,
                frequency,
                phase,
            }),
            seed,
        )
    }

    pub fn ocean_like(amplitude: f64, frequency: f64, phase: f64, seed: u64) -> Self {
        DistortionSpec::new(
            DistortionKind::OceanLike(WaveParams {
                amplitude,
                frequency,
                phase,
            }),
            seed,
        )
    }

    pub fn air_like(strength: f64, seed: u64) -> Self {
        DistortionSpec::new(DistortionKind::AirLike(AirParams { strength }), seed)
    }

    pub fn air_weak(seed: u64) -> Self {
        DistortionSpec::air_like(AIR_WEAK_STRENGTH, seed)
    }

    pub fn air_strong(seed: u64) -> Self {
        DistortionSpec::air_like(AIR_STRONG_STRENGTH, seed)
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "noise sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        validate_kind(&self.kind)
    }
}

fn validate_kind(kind: &DistortionKind) -> Result<()> {
    let bad = |what: &str, v: f64| Error::InvalidArgument(alloc::format!("{what}, got {v}"));
    match *kind {
        DistortionKind::Affine(a) => validate_affine(&a),
        DistortionKind::Elastic(e) => validate_elastic(&e),
        DistortionKind::Combined { affine, elastic } => {
            validate_affine(&affine)?;
            validate_elastic(&elastic)
        }
        DistortionKind::Ripple(w) | DistortionKind::OceanLike(w) => {
            if !(w.amplitude >= 0.0 && w.amplitude.is_finite()) {
                return Err(bad("wave amplitude must be >= 0", w.amplitude));
            }
            if !w.frequency.is_finite() || !w.phase.is_finite() {
                return Err(bad("wave frequency/phase must be finite", w.frequency));
            }
            Ok(())
        }
        DistortionKind::AirLike(a) => {
            if !(a.strength >= 0.0 && a.strength.is_finite()) {
                return Err(bad("turbulence strength must be >= 0", a.strength));
            }
            Ok(())
        }
    }
}

fn validate_affine(a: &AffineParams) -> Result<()> {
    if !(a.scale > 0.0 && a.scale.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "affine scale must be > 0, got {}",
            a.scale
        )));
    }
    if !a.theta.is_finite() || !a.translation.0.is_finite() || !a.translation.1.is_finite() {
        return Err(Error::InvalidArgument(
            "affine parameters must be finite".into(),
        ));
    }
    Ok(())
}

fn validate_elastic(e: &ElasticParams) -> Result<()> {
    if !(e.amplitude >= 0.0 && e.amplitude.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "elastic amplitude must be >= 0, got {}",
            e.amplitude
        )));
    }
    if !(e.smoothness > 0.0 && e.smoothness.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "elastic smoothness must be > 0, got {}",
            e.smoothness
        )));
    }
    Ok(())
}

/// Generates the deformation map of a distortion spec on a mesh.
/// Deterministic in (spec, mesh).
pub fn generate_field(spec: &DistortionSpec, mesh: &TriMesh) -> Result<DeformationMap> {
    spec.validate()?;
    let positions = match spec.kind {
        DistortionKind::Affine(a) => affine_positions(mesh, &a),
        DistortionKind::Elastic(e) => {
            let disp = elastic_displacement(mesh, &e, spec.seed);
            add_displacement(mesh, &disp)
        }
        DistortionKind::Combined { affine, elastic } => {
            let disp = elastic_displacement(mesh, &elastic, spec.seed);
            let moved = add_displacement(mesh, &disp);
            moved
                .into_iter()
                .map(|p| apply_affine(&affine, center(mesh), p))
                .collect()
        }
        DistortionKind::Ripple(w) => {
            let two_pi = 2.0 * core::f64::consts::PI;
            mesh.vertices()
                .iter()
                .map(|&p| {
                    Point::new(
                        p.x + w.amplitude * libm::sin(two_pi * w.frequency * p.y + w.phase),
                        p.y + w.amplitude * libm::sin(two_pi * w.frequency * p.x + w.phase),
                    )
                })
                .collect()
        }
        DistortionKind::OceanLike(w) => {
            let disp = ocean_displacement(mesh, &w, spec.seed);
            add_displacement(mesh, &disp)
        }
        DistortionKind::AirLike(a) => {
            let disp = air_displacement(mesh, &a, spec.seed);
            add_displacement(mesh, &disp)
        }
    };
    DeformationMap::new(mesh.clone(), positions)
}

/// Generates the field for `image`'s grid, warps, adds noise, and returns
/// the distorted image together with the ground-truth map.
pub fn make_pair(
    image: &RasterImage,
    spec: &DistortionSpec,
) -> Result<(RasterImage, DeformationMap)> {
    let mesh = build_grid_mesh(image.width(), image.height())?;
    let truth = generate_field(spec, &mesh)?;
    let distorted = compose_displacement(image, &truth, spec.noise_sigma, spec.seed)?;
    Ok((distorted, truth))
}

fn center(mesh: &TriMesh) -> Point {
    Point::new(
        (mesh.width_v() - 1) as f64 * 0.5,
        (mesh.height_v() - 1) as f64 * 0.5,
    )
}

fn apply_affine(a: &AffineParams, c: Point, p: Point) -> Point {
    let (s, t) = (a.scale, a.translation);
    let (sin, cos) = (libm::sin(a.theta), libm::cos(a.theta));
    let d = p - c;
    Point::new(
        s * (cos * d.x - sin * d.y) + c.x + t.0,
        s * (sin * d.x + cos * d.y) + c.y + t.1,
    )
}

fn affine_positions(mesh: &TriMesh, a: &AffineParams) -> Vec<Point> {
    let c = center(mesh);
    mesh.vertices()
        .iter()
        .map(|&p| apply_affine(a, c, p))
        .collect()
}

fn add_displacement(mesh: &TriMesh, disp: &[Point]) -> Vec<Point> {
    mesh.vertices()
        .iter()
        .zip(disp)
        .map(|(&p, &d)| p + d)
        .collect()
}

/// Smoothed white noise on a padded grid, cropped to the mesh and rescaled
/// so the largest displacement magnitude equals the amplitude. The padding
/// keeps the field statistically stationary up to the image border.
fn smoothed_noise_grid(w: usize, h: usize, sigma: f64, stream: u64) -> Vec<f64> {
    let pad = libm::ceil(3.0 * sigma).max(1.0) as usize;
    let (pw, ph) = (w + 2 * pad, h + 2 * pad);
    let mut noise = Vec::with_capacity(pw * ph);
    for i in 0..pw * ph {
        noise.push(rng::unit_f64_at(stream, i as u64) - 0.5);
    }
    let blurred = filter::blur_grid(&noise, pw, ph, sigma);
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        let base = (r + pad) * pw + pad;
        out.extend_from_slice(&blurred[base..base + w]);
    }
    out
}

/// White noise per vertex, Gaussian-blurred, rescaled so the largest
/// displacement magnitude equals the amplitude.
fn elastic_displacement(mesh: &TriMesh, e: &ElasticParams, seed: u64) -> Vec<Point> {
    let (w, h) = (mesh.width_v(), mesh.height_v());
    if e.amplitude == 0.0 {
        return vec![Point::new(0.0, 0.0); w * h];
    }
    let dx = smoothed_noise_grid(w, h, e.smoothness, rng::derive_stream(seed, SALT_ELASTIC_X));
    let dy = smoothed_noise_grid(w, h, e.smoothness, rng::derive_stream(seed, SALT_ELASTIC_Y));
    rescale_to_amplitude(dx, dy, e.amplitude)
}

/// Superposition of seeded directional sinusoids; displacement is along each
/// wave's direction, amplitudes decay per wave, and the total is rescaled to
/// the requested amplitude.
fn ocean_displacement(mesh: &TriMesh, w: &WaveParams, seed: u64) -> Vec<Point> {
    let n = mesh.vertex_count();
    if w.amplitude == 0.0 {
        return vec![Point::new(0.0, 0.0); n];
    }
    let stream = rng::derive_stream(seed, SALT_WAVES);
    const WAVES: usize = 6;
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for k in 0..WAVES {
        let angle = two_pi * rng::unit_f64_at(stream, 3 * k as u64);
        let freq = w.frequency * (0.6 + 0.8 * rng::unit_f64_at(stream, 3 * k as u64 + 1));
        let phase = w.phase + two_pi * rng::unit_f64_at(stream, 3 * k as u64 + 2);
        let dir = Point::new(libm::cos(angle), libm::sin(angle));
        let gain = 1.0 / (1.0 + k as f64);
        for (i, &p) in mesh.vertices().iter().enumerate() {
            let s = gain * libm::sin(two_pi * freq * (p.x * dir.x + p.y * dir.y) + phase);
            dx[i] += s * dir.x;
            dy[i] += s * dir.y;
        }
    }
    rescale_to_amplitude(dx, dy, w.amplitude)
}

/// Three octaves of blurred white noise (standard deviations 4, 8, 16 px,
/// weights 0.25, 0.5, 1.0) summed and rescaled to the strength.
fn air_displacement(mesh: &TriMesh, a: &AirParams, seed: u64) -> Vec<Point> {
    let (w, h) = (mesh.width_v(), mesh.height_v());
    let n = w * h;
    if a.strength == 0.0 {
        return vec![Point::new(0.0, 0.0); n];
    }
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for (octave, (sigma, weight)) in [(4.0, 0.25), (8.0, 0.5), (16.0, 1.0)]
        .into_iter()
        .enumerate()
    {
        let sx = rng::derive_stream(seed, SALT_AIR ^ (2 * octave as u64));
        let sy = rng::derive_stream(seed, SALT_AIR ^ (2 * octave as u64 + 1));
        let nx = smoothed_noise_grid(w, h, sigma, sx);
        let ny = smoothed_noise_grid(w, h, sigma, sy);
        for i in 0..n {
            dx[i] += weight * nx[i];
            dy[i] += weight * ny[i];
        }
    }
    rescale_to_amplitude(dx, dy, a.strength)
}

fn rescale_to_amplitude(dx: Vec<f64>, dy: Vec<f64>, amplitude: f64) -> Vec<Point> {
    let max = dx
        .iter()
        .zip(&dy)
        .fold(0.0_f64, |acc, (&x, &y)| acc.max(libm::hypot(x, y)));
    let scale = if max > 0.0 { amplitude / max } else { 0.0 };
    dx.iter()
        .zip(&dy)
        .map(|(&x, &y)| Point::new(x * scale, y * scale))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::face_orientation_count;
    use crate::metrics;
    use crate::warp::warp_image;

    #[test]
    fn identity_affine_parameters_give_the_identity_map() {
        let mesh = build_grid_mesh(9, 7).unwrap();
        let spec = DistortionSpec::affine(0.0, 1.0, (0.0, 0.0), 3);
        let map = generate_field(&spec, &mesh).unwrap();
        assert_eq!(map.positions(), mesh.vertices());
    }

    #[test]
    fn zero_amplitude_elastic_is_the_identity_map() {
        let mesh = build_grid_mesh(8, 8).unwrap();
        let spec = DistortionSpec::elastic(0.0, 4.0, 11);
        let map = generate_field(&spec, &mesh).unwrap();
        assert_eq!(map.positions(), mesh.vertices());
    }

    #[test]
    fn fields_are_seed_deterministic() {
        let mesh = build_grid_mesh(16, 16).unwrap();
        for spec in [
            DistortionSpec::elastic(3.0, 5.0, 42),
            DistortionSpec::ocean_like(2.0, 0.05, 0.3, 42),
            DistortionSpec::air_weak(42),
        ] {
            let a = generate_field(&spec, &mesh).unwrap();
            let b = generate_field(&spec, &mesh).unwrap();
            assert_eq!(a.positions(), b.positions());
            let other = DistortionSpec { seed: 43, ..spec };
            let c = generate_field(&other, &mesh).unwrap();
            assert_ne!(a.positions(), c.positions());
        }
    }

    #[test]
    fn elastic_amplitude_bounds_the_displacement() {
        let mesh = build_grid_mesh(128, 128).unwrap();
        let spec = DistortionSpec::elastic(4.0, 8.0, 17);
        let map = generate_field(&spec, &mesh).unwrap();
        let sup = map.displacement_sup();
        assert!(sup <= 4.0 + 1e-9, "sup {sup}");
        assert!(sup > 3.9, "rescaling should reach the amplitude, got {sup}");
    }

    #[test]
    fn smooth_elastic_fields_are_fold_free_across_seeds() {
        // amplitude < smoothness / 2 keeps the displacement gradient well
        // below 1, so no face may flip; checked over 100 seeds.
        let mesh = build_grid_mesh(33, 33).unwrap();
        for seed in 0..100 {
            let spec = DistortionSpec::elastic(3.9, 8.0, seed);
            let map = generate_field(&spec, &mesh).unwrap();
            let count = face_orientation_count(&map);
            assert_eq!(count.flipped, 0, "seed {seed}: {count:?}");
        }
    }

    #[test]
    fn affine_fields_with_positive_scale_are_fold_free() {
        let mesh = build_grid_mesh(21, 21).unwrap();
        for (i, &(theta, scale)) in [(0.9, 0.2), (-1.0, 0.6), (0.3, 1.5)].iter().enumerate() {
            let spec = DistortionSpec::affine(theta, scale, (2.0, -1.0), i as u64);
            let map = generate_field(&spec, &mesh).unwrap();
            assert!(face_orientation_count(&map).is_fold_free());
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mesh = build_grid_mesh(4, 4).unwrap();
        for spec in [
            DistortionSpec::affine(0.0, 0.0, (0.0, 0.0), 0),
            DistortionSpec::affine(0.0, -2.0, (0.0, 0.0), 0),
            DistortionSpec::elastic(-1.0, 4.0, 0),
            DistortionSpec::elastic(2.0, 0.0, 0),
            DistortionSpec::ripple(-0.5, 0.1, 0.0, 0),
            DistortionSpec::air_like(-1.0, 0),
            DistortionSpec::elastic(2.0, 4.0, 0).with_noise(-0.1),
        ] {
            assert!(generate_field(&spec, &mesh).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn combined_map_matches_warp_of_warp() {
        // The comparison isolates composition-order semantics from border
        // clamping: a contractive affine and an image that is flat near the
        // border keep every sample of both paths on identical content.
        let mesh = build_grid_mesh(48, 48).unwrap();
        let affine = AffineParams {
            theta: 0.12,
            scale: 0.9,
            translation: (0.5, -0.4),
        };
        let elastic = ElasticParams {
            amplitude: 2.0,
            smoothness: 6.0,
        };
        let seed = 9;
        let combined = DistortionSpec::new(DistortionKind::Combined { affine, elastic }, seed);
        let image = RasterImage::from_fn(48, 48, 1, |x, y, _| {
            let dx = x as f64 - 23.5;
            let dy = y as f64 - 23.5;
            libm::exp(-(dx * dx + dy * dy) / (2.0 * 8.0 * 8.0))
        })
        .unwrap();

        let map_combined = generate_field(&combined, &mesh).unwrap();
        let once = warp_image(&image, &map_combined, false).unwrap();

        // Affine warp first, then the elastic warp of the result.
        let map_affine = generate_field(
            &DistortionSpec::new(DistortionKind::Affine(affine), seed),
            &mesh,
        )
        .unwrap();
        let map_elastic = generate_field(
            &DistortionSpec::new(DistortionKind::Elastic(elastic), seed),
            &mesh,
        )
        .unwrap();
        let affine_img = warp_image(&image, &map_affine, false).unwrap();
        let twice = warp_image(&affine_img, &map_elastic, false).unwrap();

        let mut worst = 0.0_f64;
        for (a, b) in once.data().iter().zip(twice.data()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst <= 2e-2, "max abs difference {worst}");
    }

    #[test]
    fn identity_pair_reproduces_the_image() {
        let image = RasterImage::from_fn(12, 10, 3, |x, y, c| {
            rng::unit_f64_at(5, ((y * 12 + x) * 3 + c) as u64)
        })
        .unwrap();
        let spec = DistortionSpec::affine(0.0, 1.0, (0.0, 0.0), 1);
        let (distorted, truth) = make_pair(&image, &spec).unwrap();
        assert_eq!(distorted.data(), image.data());
        assert_eq!(truth.positions(), truth.mesh().vertices());
    }

    #[test]
    fn rotated_pattern_differs_measurably() {
        let image = RasterImage::from_fn(64, 64, 1, |x, y, _| {
            let cx = (x as f64 - 31.5).abs();
            let cy = (y as f64 - 31.5).abs();
            if cx < 12.0 && cy < 12.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let spec = DistortionSpec::affine(core::f64::consts::PI / 6.0, 1.0, (0.0, 0.0), 2);
        let (distorted, _) = make_pair(&image, &spec).unwrap();
        let report = metrics::evaluate(&image, &distorted).unwrap();
        assert!(report.mse > 1e-3, "mse {}", report.mse);
    }

    #[test]
    fn elastic_truth_map_bounds_displacement_on_make_pair() {
        let image = RasterImage::from_fn(128, 128, 1, |x, y, _| {
            0.5 + 0.4 * libm::sin(0.2 * (x + y) as f64)
        })
        .unwrap();
        let spec = DistortionSpec::elastic(4.0, 8.0, 77);
        let (_, truth) = make_pair(&image, &spec).unwrap();
        assert!(truth.displacement_sup() <= 4.0 + 1e-9);
    }
}
