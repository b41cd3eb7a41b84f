//! Model-based restoration of geometrically distorted images.
//!
//! Given a distorted image and a reference, the solver estimates a bijective
//! deformation map that pulls the distorted image onto the reference. Each
//! iteration alternates an intensity-driven Gauss-Newton step on the vertex
//! positions with a quasiconformal projection: compute the Beltrami
//! coefficient of the stepped map, smooth it, squash its magnitude below 1,
//! optionally truncate its Fourier spectrum, and reconstruct the map with
//! the linear Beltrami solver under an identity boundary. Every accepted
//! iterate is therefore fold-free by construction. A coarse-to-fine pyramid
//! handles displacements larger than a pixel; backtracking on the step size
//! keeps the intensity loss non-increasing within each level.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::beltrami::{
    clamp_magnitude, compute_beltrami, fourier_truncate, smooth_field, squash_activation, sup_norm,
    BeltramiField,
};
use crate::error::{Error, Result};
use crate::lbs::{assemble, residual_loss, solve_with_guess, BoundaryCondition, LbsSystem};
use crate::mesh::{
    build_grid_mesh, face_orientation_count, identity_map, DeformationMap, Point, TriMesh,
};
use crate::warp::{warp_image, RasterImage};

/// Levenberg-style damping added to the Gauss-Newton denominator.
const GN_DAMPING: f64 = 1e-8;

/// Relative intensity-loss improvement below which a level stops early.
const STAGNATION_RTOL: f64 = 1e-12;

/// Maximum number of step halvings per iteration.
const MAX_BACKTRACKS: usize = 8;

/// Restoration parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RestoreConfig {
    /// Weight of the intensity term in [`composite_loss`].
    pub weight_intensity: f64,
    /// Weight of the solver-residual term in [`composite_loss`]. Diagnostic
    /// only: the solver is exact, so this term is near zero for its output.
    pub weight_residual: f64,
    /// Pyramid levels (>= 1); level dimensions halve per step.
    pub levels: usize,
    /// Iterations per level (>= 1).
    pub iterations: usize,
    /// Step size cap in pixels (> 0).
    pub step_size: f64,
    /// Gaussian smoothing of the coefficient field, in cells (>= 0).
    pub mu_sigma: f64,
    /// Admissibility margin: magnitudes are squashed to <= 1 - margin.
    pub margin: f64,
    /// Optional Fourier truncation block size (clamped to each level's grid).
    pub fourier_k: Option<usize>,
}

impl Default for RestoreConfig {
    fn default() -> Self {
        RestoreConfig {
            weight_intensity: 1.0,
            weight_residual: 0.0,
            levels: 3,
            iterations: 50,
            step_size: 0.5,
            mu_sigma: 2.0,
            margin: 1e-3,
            fourier_k: None,
        }
    }
}

impl RestoreConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidArgument(msg));
        if self.levels < 1 {
            return bad("levels must be >= 1".into());
        }
        if self.iterations < 1 {
            return bad("iterations must be >= 1".into());
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad(alloc::format!(
                "step size must be > 0, got {}",
                self.step_size
            ));
        }
        if !(self.mu_sigma >= 0.0 && self.mu_sigma.is_finite()) {
            return bad(alloc::format!(
                "mu sigma must be >= 0, got {}",
                self.mu_sigma
            ));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return bad(alloc::format!(
                "margin must lie in (0, 1), got {}",
                self.margin
            ));
        }
        if !(self.weight_intensity >= 0.0 && self.weight_residual >= 0.0) {
            return bad("loss weights must be >= 0".into());
        }
        if self.fourier_k == Some(0) {
            return bad("fourier truncation size must be >= 1".into());
        }
        Ok(())
    }
}

/// One row of the optimization trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    /// Iteration within the level; 0 is the projected initial map.
    pub iteration: usize,
    /// Pyramid level; 0 is full resolution.
    pub level: usize,
    /// Euclidean intensity residual ||distorted o f - reference||_2 at the
    /// level's resolution.
    pub l_est: f64,
    /// Solver residual of the accepted map.
    pub residual: f64,
    /// Flipped-face count of the accepted map.
    pub fold_count: usize,
    /// sup |mu| of the accepted coefficient field.
    pub sup_norm: f64,
}

/// Output of [`restore_pair`].
#[derive(Clone, Debug)]
pub struct RestoreResult {
    pub map: DeformationMap,
    pub field: BeltramiField,
    pub restored: RasterImage,
    pub trace: Vec<TraceRecord>,
}

impl RestoreResult {
    /// Flipped-face counts over all accepted iterates.
    pub fn fold_history(&self) -> Vec<usize> {
        self.trace.iter().map(|r| r.fold_count).collect()
    }
}

/// Estimates a fold-free map aligning `distorted` with `reference` and
/// returns the map, its coefficient field, the warped image, and the trace.
pub fn restore_pair(
    distorted: &RasterImage,
    reference: &RasterImage,
    config: &RestoreConfig,
) -> Result<RestoreResult> {
    if !distorted.same_shape(reference) {
        return Err(Error::SizeMismatch {
            expected: (reference.width(), reference.height()),
            got: (distorted.width(), distorted.height()),
        });
    }
    config.validate()?;

    // Coarse-to-fine pyramid; stop early if halving would drop below 2 px.
    let mut pyramid = vec![(distorted.clone(), reference.clone())];
    for _ in 1..config.levels {
        let (d, r) = pyramid.last().unwrap();
        if d.width() / 2 < 2 || d.height() / 2 < 2 {
            break;
        }
        pyramid.push((downsample(d), downsample(r)));
    }

    let mut state: Option<LevelState> = None;
    let mut trace = Vec::new();
    for level in (0..pyramid.len()).rev() {
        let (dist_l, ref_l) = &pyramid[level];
        let mesh = build_grid_mesh(dist_l.width(), dist_l.height())?;
        let init = match &state {
            None => identity_map(&mesh),
            Some(prev) => upsample_map(&prev.map, &mesh),
        };
        state = Some(run_level(
            &mesh, dist_l, ref_l, init, level, config, &mut trace,
        )?);
    }

    let state = state.expect("at least one pyramid level");
    let restored = warp_image(distorted, &state.map, true)?;
    Ok(RestoreResult {
        map: state.map,
        field: state.field,
        restored,
        trace,
    })
}

struct LevelState {
    map: DeformationMap,
    field: BeltramiField,
}

fn run_level(
    mesh: &TriMesh,
    dist: &RasterImage,
    refimg: &RasterImage,
    init: DeformationMap,
    level: usize,
    config: &RestoreConfig,
    trace: &mut Vec<TraceRecord>,
) -> Result<LevelState> {
    let bc = BoundaryCondition::identity(mesh);
    let grads = ImageGradients::of(dist);

    // The gradient steps accumulate on `raw`; the accepted iterate is always
    // its projection, so smoothing and squashing never compound over
    // iterations and a vanishing step reproduces the current iterate.
    let mut raw = init;
    let (mut map, mut field, system) = project(mesh, &raw, &raw, &bc, config)?;
    let mut lest = intensity_residual(dist, refimg, &map);
    trace.push(record(0, level, lest, &system, &map, &field));

    for iteration in 1..=config.iterations {
        let direction = gauss_newton_direction(dist, refimg, &map, &grads, config);
        let mut accepted = None;
        let mut scale = 1.0;
        for _ in 0..=MAX_BACKTRACKS {
            let stepped = offset_map(&raw, &direction, scale)?;
            match project(mesh, &stepped, &map, &bc, config) {
                Ok((cand, cand_field, cand_system)) => {
                    let cand_lest = intensity_residual(dist, refimg, &cand);
                    let fold_free = face_orientation_count(&cand).flipped == 0;
                    if cand_lest <= lest && fold_free {
                        accepted = Some((stepped, cand, cand_field, cand_system, cand_lest));
                        break;
                    }
                }
                // A trial step may collapse faces; shrink and retry.
                Err(Error::DegenerateMap { .. }) | Err(Error::InvalidMesh { .. }) => {}
                Err(e) => return Err(e),
            }
            scale *= 0.5;
        }
        match accepted {
            Some((stepped, cand, cand_field, cand_system, cand_lest)) => {
                let improvement = lest - cand_lest;
                raw = stepped;
                map = cand;
                field = cand_field;
                lest = cand_lest;
                trace.push(record(iteration, level, lest, &cand_system, &map, &field));
                if improvement <= STAGNATION_RTOL * (1.0 + lest) {
                    break;
                }
            }
            None => break, // no descent possible at this level
        }
    }
    Ok(LevelState { map, field })
}

fn record(
    iteration: usize,
    level: usize,
    l_est: f64,
    system: &LbsSystem,
    map: &DeformationMap,
    field: &BeltramiField,
) -> TraceRecord {
    TraceRecord {
        iteration,
        level,
        l_est,
        residual: residual_loss(system, map),
        fold_count: face_orientation_count(map).flipped,
        sup_norm: sup_norm(field),
    }
}

/// Quasiconformal projection: coefficient of the raw map, smoothed, squashed
/// (optionally Fourier-truncated, re-clamped), then solved back into a map
/// with identity boundary, warm-starting from the previous accepted map.
fn project(
    mesh: &TriMesh,
    raw: &DeformationMap,
    warm: &DeformationMap,
    bc: &BoundaryCondition,
    config: &RestoreConfig,
) -> Result<(DeformationMap, BeltramiField, LbsSystem)> {
    let mu = compute_beltrami(raw)?;
    let mu = smooth_field(&mu, config.mu_sigma);
    let mut mu = squash_activation(&mu, config.margin)?;
    if let Some(k) = config.fourier_k {
        let (cw, ch) = mesh.cell_dims();
        let k = k.min(cw).min(ch);
        // Truncation can overshoot the margin; clamp back inside the disk.
        mu = clamp_magnitude(&fourier_truncate(&mu, k)?, 1.0 - config.margin);
    }
    let system = assemble(mesh, &mu, bc)?;
    let map = solve_with_guess(&system, warm)?;
    Ok((map, mu, system))
}

/// ||distorted o f - reference||_2 over all samples at the map's resolution.
fn intensity_residual(dist: &RasterImage, refimg: &RasterImage, map: &DeformationMap) -> f64 {
    let (w, h, ch) = (refimg.width(), refimg.height(), refimg.channels());
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let pos = map.position(y * w + x);
            for c in 0..ch {
                let r = dist.sample(pos.x, pos.y, c) - refimg.get(x, y, c);
                total += r * r;
            }
        }
    }
    libm::sqrt(total)
}

/// Per-vertex Gauss-Newton displacement field: the force is computed from
/// the map's own warped residual, Gaussian-smoothed so its distortion
/// content is coherent at the regularization scale, then magnitude-capped
/// at the configured step size.
fn gauss_newton_direction(
    dist: &RasterImage,
    refimg: &RasterImage,
    map: &DeformationMap,
    grads: &ImageGradients,
    config: &RestoreConfig,
) -> Vec<Point> {
    let (w, h, ch) = (refimg.width(), refimg.height(), refimg.channels());
    let mut dx = vec![0.0; w * h];
    let mut dy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let pos = map.position(y * w + x);
            let mut jtr = Point::new(0.0, 0.0);
            let mut jtj = GN_DAMPING;
            for c in 0..ch {
                let r = dist.sample(pos.x, pos.y, c) - refimg.get(x, y, c);
                let g = grads.sample(c, pos.x, pos.y);
                jtr = jtr + g * r;
                // Residual-normalized denominator: the step stays below half
                // a pixel and fades in low-gradient regions instead of
                // amplifying noise there.
                jtj += g.x * g.x + g.y * g.y + r * r;
            }
            dx[y * w + x] = -jtr.x / jtj;
            dy[y * w + x] = -jtr.y / jtj;
        }
    }
    let sigma = config.mu_sigma.max(2.0);
    let dx = crate::filter::blur_grid(&dx, w, h, sigma);
    let dy = crate::filter::blur_grid(&dy, w, h, sigma);
    // Taper to zero at the boundary: the reconstruction pins boundary
    // vertices, so boundary displacement cannot be represented and would
    // only pull the accumulated map away from its projection.
    let ramp = 1.0 + 2.0 * sigma;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let border = x.min(w - 1 - x).min(y).min(h - 1 - y) as f64;
            let weight = (border / ramp).min(1.0);
            let d = Point::new(dx[y * w + x], dy[y * w + x]) * weight;
            let n = d.norm();
            out.push(if n > config.step_size {
                d * (config.step_size / n)
            } else {
                d
            });
        }
    }
    out
}

fn offset_map(map: &DeformationMap, direction: &[Point], scale: f64) -> Result<DeformationMap> {
    let positions = map
        .positions()
        .iter()
        .zip(direction)
        .map(|(&p, &d)| p + d * scale)
        .collect();
    DeformationMap::new(map.mesh().clone(), positions)
}

/// Central-difference gradients of every channel, bilinearly sampleable.
struct ImageGradients {
    width: usize,
    height: usize,
    channels: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl ImageGradients {
    fn of(img: &RasterImage) -> Self {
        let (w, h, ch) = (img.width(), img.height(), img.channels());
        let mut gx = vec![0.0; w * h * ch];
        let mut gy = vec![0.0; w * h * ch];
        for y in 0..h {
            for x in 0..w {
                for c in 0..ch {
                    let xm = img.get(x.saturating_sub(1), y, c);
                    let xp = img.get((x + 1).min(w - 1), y, c);
                    let ym = img.get(x, y.saturating_sub(1), c);
                    let yp = img.get(x, (y + 1).min(h - 1), c);
                    gx[(y * w + x) * ch + c] = 0.5 * (xp - xm);
                    gy[(y * w + x) * ch + c] = 0.5 * (yp - ym);
                }
            }
        }
        ImageGradients {
            width: w,
            height: h,
            channels: ch,
            gx,
            gy,
        }
    }

    fn sample(&self, c: usize, x: f64, y: f64) -> Point {
        let xc = x.clamp(0.0, (self.width - 1) as f64);
        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = libm::floor(xc) as usize;
        let y0 = libm::floor(yc) as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let at =
            |buf: &[f64], xx: usize, yy: usize| buf[(yy * self.width + xx) * self.channels + c];
        let lerp2 = |buf: &[f64]| {
            let top = (1.0 - fx) * at(buf, x0, y0) + fx * at(buf, x1, y0);
            let bot = (1.0 - fx) * at(buf, x0, y1) + fx * at(buf, x1, y1);
            (1.0 - fy) * top + fy * bot
        };
        Point::new(lerp2(&self.gx), lerp2(&self.gy))
    }
}

/// 2x2 block-average downsampling (blocks clipped at the border).
fn downsample(img: &RasterImage) -> RasterImage {
    let ow = img.width().div_ceil(2);
    let oh = img.height().div_ceil(2);
    let mut out = RasterImage::new(ow, oh, img.channels()).expect("valid image shape");
    for y in 0..oh {
        for x in 0..ow {
            for c in 0..img.channels() {
                let mut acc = 0.0;
                let mut count = 0.0;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let sx = 2 * x + dx;
                        let sy = 2 * y + dy;
                        if sx < img.width() && sy < img.height() {
                            acc += img.get(sx, sy, c);
                            count += 1.0;
                        }
                    }
                }
                out.set(x, y, c, acc / count);
            }
        }
    }
    out
}

/// Transfers a map across one pyramid level: fine coordinate X corresponds
/// to coarse coordinate (X - 0.5) / 2, so positions scale as 2 p + 0.5.
fn upsample_map(coarse: &DeformationMap, fine_mesh: &TriMesh) -> DeformationMap {
    let positions = fine_mesh
        .vertices()
        .iter()
        .map(|&v| {
            let p = coarse.sample((v.x - 0.5) * 0.5, (v.y - 0.5) * 0.5);
            Point::new(2.0 * p.x + 0.5, 2.0 * p.y + 0.5)
        })
        .collect();
    DeformationMap::new(fine_mesh.clone(), positions).expect("finite upsampled positions")
}

/// Root-mean-square inverse-consistency error in pixels: how far the
/// composition truth(f(p)) lands from p, averaged over vertices. A recovered
/// map approximating the inverse of the truth distortion scores near zero.
pub fn map_error(result: &RestoreResult, truth: &DeformationMap) -> Result<f64> {
    map_error_of(&result.map, truth)
}

/// [`map_error`] for a bare map (used for identity baselines).
pub fn map_error_of(map: &DeformationMap, truth: &DeformationMap) -> Result<f64> {
    if !map.mesh().same_grid(truth.mesh()) {
        return Err(Error::SizeMismatch {
            expected: (truth.mesh().width_v(), truth.mesh().height_v()),
            got: (map.mesh().width_v(), map.mesh().height_v()),
        });
    }
    let mut total = 0.0;
    for (vertex, &ref_pos) in map.mesh().vertices().iter().enumerate() {
        let fp = map.position(vertex);
        let composed = truth.sample(fp.x, fp.y);
        let d = composed - ref_pos;
        total += d.x * d.x + d.y * d.y;
    }
    Ok(libm::sqrt(total / map.mesh().vertex_count() as f64))
}

/// weight_intensity * ||distorted o map - reference||_2 + weight_residual * L1 solver
/// residual. The task-specific third term of the training objective has no
/// model-based counterpart here and is fixed to zero.
pub fn composite_loss(
    distorted: &RasterImage,
    reference: &RasterImage,
    map: &DeformationMap,
    field: &BeltramiField,
    system: &LbsSystem,
    config: &RestoreConfig,
) -> Result<f64> {
    if !distorted.same_shape(reference) {
        return Err(Error::SizeMismatch {
            expected: (reference.width(), reference.height()),
            got: (distorted.width(), distorted.height()),
        });
    }
    if map.mesh().width_v() != reference.width() || map.mesh().height_v() != reference.height() {
        return Err(Error::SizeMismatch {
            expected: (reference.width(), reference.height()),
            got: (map.mesh().width_v(), map.mesh().height_v()),
        });
    }
    if !field.mesh().same_grid(map.mesh()) || !system.mesh().same_grid(map.mesh()) {
        return Err(Error::SizeMismatch {
            expected: (map.mesh().width_v(), map.mesh().height_v()),
            got: (field.mesh().width_v(), field.mesh().height_v()),
        });
    }
    let est = intensity_residual(distorted, reference, map);
    Ok(config.weight_intensity * est + config.weight_residual * residual_loss(system, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distort::{generate_field, DistortionSpec};
    use crate::metrics;
    use crate::rng;
    use crate::warp::compose_displacement;

    fn textured_image(w: usize, h: usize, seed: u64) -> RasterImage {
        // Smooth random texture: blurred noise has usable gradients.
        let noise: Vec<f64> = (0..w * h)
            .map(|i| rng::unit_f64_at(seed, i as u64))
            .collect();
        let smooth = crate::filter::blur_grid(&noise, w, h, 2.0);
        let lo = smooth.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = smooth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        RasterImage::from_data(
            w,
            h,
            1,
            smooth.iter().map(|v| (v - lo) / (hi - lo)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_pair_stays_put() {
        let img = textured_image(48, 48, 1);
        let config = RestoreConfig::default();
        let result = restore_pair(&img, &img, &config).unwrap();
        assert!(sup_norm(&result.field) <= 1e-2);
        let before = metrics::evaluate(&img, &img).unwrap().mse;
        let after = metrics::evaluate(&result.restored, &img).unwrap().mse;
        assert!(after <= before + 1e-15);
        assert!(result.fold_history().iter().all(|&f| f == 0));
    }

    #[test]
    fn elastic_distortion_is_substantially_undone() {
        let w = 64;
        let reference = textured_image(w, w, 7);
        let spec = DistortionSpec::elastic(3.0, 8.0, 5);
        let mesh = build_grid_mesh(w, w).unwrap();
        let truth = generate_field(&spec, &mesh).unwrap();
        let distorted = compose_displacement(&reference, &truth, 0.0, 5).unwrap();

        let config = RestoreConfig {
            iterations: 30,
            ..RestoreConfig::default()
        };
        let result = restore_pair(&distorted, &reference, &config).unwrap();

        let initial = metrics::evaluate(&distorted, &reference).unwrap().mse;
        let final_mse = metrics::evaluate(&result.restored, &reference).unwrap().mse;
        assert!(
            final_mse <= 0.5 * initial,
            "mse {final_mse} vs initial {initial}"
        );

        let baseline = map_error_of(&identity_map(&mesh), &truth).unwrap();
        let recovered = map_error(&result, &truth).unwrap();
        assert!(
            recovered <= 0.6 * baseline,
            "map error {recovered} vs baseline {baseline}"
        );
        assert!(result.fold_history().iter().all(|&f| f == 0));
    }

    #[test]
    fn trace_is_monotone_within_each_level() {
        let w = 48;
        let reference = textured_image(w, w, 11);
        let spec = DistortionSpec::elastic(2.0, 6.0, 3);
        let mesh = build_grid_mesh(w, w).unwrap();
        let truth = generate_field(&spec, &mesh).unwrap();
        let distorted = compose_displacement(&reference, &truth, 0.0, 3).unwrap();
        let config = RestoreConfig {
            iterations: 10,
            ..RestoreConfig::default()
        };
        let result = restore_pair(&distorted, &reference, &config).unwrap();
        for pair in result.trace.windows(2) {
            if pair[0].level == pair[1].level {
                assert!(
                    pair[1].l_est <= pair[0].l_est + 1e-12,
                    "{pair:?} not monotone"
                );
            }
        }
    }

    #[test]
    fn restoration_is_bitwise_deterministic() {
        let w = 32;
        let reference = textured_image(w, w, 13);
        let spec = DistortionSpec::elastic(2.0, 5.0, 9);
        let mesh = build_grid_mesh(w, w).unwrap();
        let truth = generate_field(&spec, &mesh).unwrap();
        let distorted = compose_displacement(&reference, &truth, 0.01, 9).unwrap();
        let config = RestoreConfig {
            iterations: 6,
            ..RestoreConfig::default()
        };
        let a = restore_pair(&distorted, &reference, &config).unwrap();
        let b = restore_pair(&distorted, &reference, &config).unwrap();
        assert_eq!(a.map.positions(), b.map.positions());
        assert_eq!(a.restored.data(), b.restored.data());
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn fourier_truncation_path_runs_and_stays_admissible() {
        let w = 33;
        let reference = textured_image(w, w, 17);
        let spec = DistortionSpec::elastic(2.0, 6.0, 21);
        let mesh = build_grid_mesh(w, w).unwrap();
        let truth = generate_field(&spec, &mesh).unwrap();
        let distorted = compose_displacement(&reference, &truth, 0.0, 21).unwrap();
        let config = RestoreConfig {
            iterations: 5,
            levels: 2,
            fourier_k: Some(8),
            ..RestoreConfig::default()
        };
        let result = restore_pair(&distorted, &reference, &config).unwrap();
        assert!(sup_norm(&result.field) <= 1.0 - config.margin + 1e-12);
        assert!(result.fold_history().iter().all(|&f| f == 0));
    }

    #[test]
    fn map_error_examples() {
        let mesh = build_grid_mesh(16, 16).unwrap();
        let ident = identity_map(&mesh);
        assert_eq!(map_error_of(&ident, &ident).unwrap(), 0.0);
        let plus = DeformationMap::from_fn(&mesh, |p| Point::new(p.x + 2.0, p.y)).unwrap();
        let minus = DeformationMap::from_fn(&mesh, |p| Point::new(p.x - 2.0, p.y)).unwrap();
        let err = map_error_of(&minus, &plus).unwrap();
        assert!(err <= 1e-12, "exact inverse should score zero, got {err}");
        let mismatch = identity_map(&build_grid_mesh(8, 8).unwrap());
        assert!(map_error_of(&mismatch, &plus).is_err());
    }

    #[test]
    fn composite_loss_degenerate_weights() {
        let img = textured_image(24, 24, 19);
        let mesh = build_grid_mesh(24, 24).unwrap();
        let field = BeltramiField::zero(&mesh);
        let bc = BoundaryCondition::identity(&mesh);
        let system = assemble(&mesh, &field, &bc).unwrap();
        let ident = identity_map(&mesh);
        let config = RestoreConfig::default();
        // alpha = 1, beta = 0, identical images, identity map: zero loss.
        let l = composite_loss(&img, &img, &ident, &field, &system, &config).unwrap();
        assert_eq!(l, 0.0);
        // alpha = 0, beta = 1: exactly the solver residual.
        let only_residual = RestoreConfig {
            weight_intensity: 0.0,
            weight_residual: 1.0,
            ..config
        };
        let l = composite_loss(&img, &img, &ident, &field, &system, &only_residual).unwrap();
        assert_eq!(l, residual_loss(&system, &ident));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = textured_image(16, 16, 23);
        let b = textured_image(16, 17, 23);
        assert!(matches!(
            restore_pair(&a, &b, &RestoreConfig::default()),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut config = RestoreConfig {
            margin: 1.5,
            ..RestoreConfig::default()
        };
        assert!(config.validate().is_err());
        config = RestoreConfig {
            step_size: 0.0,
            ..RestoreConfig::default()
        };
        assert!(config.validate().is_err());
        config = RestoreConfig {
            fourier_k: Some(0),
            ..RestoreConfig::default()
        };
        assert!(config.validate().is_err());
        assert!(RestoreConfig::default().validate().is_ok());
    }
}
