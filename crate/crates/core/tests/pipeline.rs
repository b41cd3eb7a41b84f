//! Cross-module pipeline tests: synthetic pairs through restoration and the
//! field-level consistency of what restoration recovers.

use qcwarp_core::beltrami::{compute_beltrami, sup_norm};
use qcwarp_core::distort::{make_pair, DistortionSpec};
use qcwarp_core::mesh::{build_grid_mesh, face_orientation_count, DeformationMap};
use qcwarp_core::metrics;
use qcwarp_core::restore::{restore_pair, RestoreConfig};
use qcwarp_core::rng;
use qcwarp_core::warp::{compose_displacement, RasterImage};
use qcwarp_core::BeltramiField;

fn textured_image(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut data = vec![0.0f64; w * h];
    for (octave, sigma) in [1.5f64, 4.0].iter().enumerate() {
        let stream = rng::derive_stream(seed, octave as u64);
        let noise: Vec<f64> = (0..w * h)
            .map(|i| rng::unit_f64_at(stream, i as u64) - 0.5)
            .collect();
        let radius = (3.0 * sigma).ceil() as i64;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
            .collect();
        let ksum: f64 = kernel.iter().sum();
        let mut mid = vec![0.0f64; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, kw) in kernel.iter().enumerate() {
                    let xx = (x as i64 + k as i64 - radius).clamp(0, w as i64 - 1) as usize;
                    acc += kw * noise[y * w + xx];
                }
                mid[y * w + x] = acc / ksum;
            }
        }
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, kw) in kernel.iter().enumerate() {
                    let yy = (y as i64 + k as i64 - radius).clamp(0, h as i64 - 1) as usize;
                    acc += kw * mid[yy * w + x];
                }
                data[y * w + x] += acc / ksum;
            }
        }
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    RasterImage::from_data(w, h, 1, data.iter().map(|v| (v - lo) / (hi - lo)).collect()).unwrap()
}

/// Fixed-point inversion of a small-displacement map: h with g(h(p)) = p.
fn invert_map(g: &DeformationMap) -> DeformationMap {
    let mesh = g.mesh();
    let positions = mesh
        .vertices()
        .iter()
        .map(|&p| {
            let mut q = p;
            for _ in 0..25 {
                let gq = g.sample(q.x, q.y);
                let residual = gq - p;
                q = q - residual;
            }
            q
        })
        .collect();
    DeformationMap::new(mesh.clone(), positions).unwrap()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// With no field smoothing and no truncation, the recovered coefficient
/// field tracks the coefficient of the true inverse distortion. The truth
/// map is itself quasiconformal (reconstructed from a smooth structured
/// field), and the comparison runs at cell resolution, the grid the field
/// lives on.
#[test]
fn recovered_field_correlates_with_the_true_inverse() {
    use qcwarp_core::complex::Complex;
    use qcwarp_core::lbs::{assemble, solve, BoundaryCondition};

    let size = 65;
    let mesh = build_grid_mesh(size, size).unwrap();
    let reference = textured_image(size, size, 21);

    // Structured admissible field, tapered at the boundary, solved into a
    // quasiconformal identity-boundary distortion map.
    let (cw, ch) = mesh.cell_dims();
    let grid: Vec<Complex> = (0..cw * ch)
        .map(|i| {
            let (r, c) = (i / cw, i % cw);
            let d = r.min(c).min(ch - 1 - r).min(cw - 1 - c) as f64;
            let ramp = (d / 8.0).min(1.0);
            let tx = core::f64::consts::PI * c as f64 / cw as f64;
            let ty = core::f64::consts::PI * r as f64 / ch as f64;
            Complex::new(
                0.35 * ramp * (2.0 * tx).sin() * ty.sin(),
                0.35 * ramp * tx.sin() * (2.0 * ty).cos(),
            )
        })
        .collect();
    let truth_field = BeltramiField::from_cell_grid(&mesh, &grid).unwrap();
    let system = assemble(&mesh, &truth_field, &BoundaryCondition::identity(&mesh)).unwrap();
    let truth = solve(&system).unwrap();
    assert!(face_orientation_count(&truth).is_fold_free());
    let distorted = compose_displacement(&reference, &truth, 0.0, 0).unwrap();

    let inverse = invert_map(&truth);
    let inverse_field = compute_beltrami(&inverse).unwrap();
    assert!(sup_norm(&inverse_field) < 0.7);

    let config = RestoreConfig {
        mu_sigma: 0.0,
        fourier_k: None,
        iterations: 40,
        ..RestoreConfig::default()
    };
    let result = restore_pair(&distorted, &reference, &config).unwrap();

    let split = |f: &BeltramiField| -> (Vec<f64>, Vec<f64>) {
        let cells = f.to_cell_grid();
        (
            cells.iter().map(|v| v.re).collect(),
            cells.iter().map(|v| v.im).collect(),
        )
    };
    let (rho_rec, tau_rec) = split(&result.field);
    let (rho_inv, tau_inv) = split(&inverse_field);
    let r_rho = pearson(&rho_rec, &rho_inv);
    let r_tau = pearson(&tau_rec, &tau_inv);
    assert!(r_rho > 0.5, "rho correlation {r_rho}");
    assert!(r_tau > 0.5, "tau correlation {r_tau}");
}

/// Distort with the generators, restore, and score: the full pipeline
/// improves both pixel metrics.
#[test]
fn make_pair_restore_evaluate_improves_metrics() {
    let size = 64;
    let reference = textured_image(size, size, 5);
    let spec = DistortionSpec::elastic(3.0, 8.0, 11).with_noise(0.005);
    let (distorted, _truth) = make_pair(&reference, &spec).unwrap();

    let before = metrics::evaluate(&distorted, &reference).unwrap();
    let config = RestoreConfig {
        iterations: 30,
        ..RestoreConfig::default()
    };
    let result = restore_pair(&distorted, &reference, &config).unwrap();
    let after = metrics::evaluate(&result.restored, &reference).unwrap();

    assert!(
        after.mse < 0.6 * before.mse,
        "{} vs {}",
        after.mse,
        before.mse
    );
    assert!(after.psnr > before.psnr);
    assert!(after.ssim > before.ssim);
    assert!(result.fold_history().iter().all(|&f| f == 0));
}

/// Ocean-like and air-like fields feed the same pipeline: pairs are exact,
/// fold-free, and reproducible.
#[test]
fn wave_and_turbulence_pairs_are_fold_free_and_reproducible() {
    let size = 48;
    let image = textured_image(size, size, 9);
    for spec in [
        DistortionSpec::ocean_like(2.0, 0.04, 0.5, 13),
        DistortionSpec::air_weak(14),
        DistortionSpec::air_strong(15),
        DistortionSpec::ripple(1.5, 0.06, 0.2, 0),
    ] {
        let (a, map_a) = make_pair(&image, &spec).unwrap();
        let (b, map_b) = make_pair(&image, &spec).unwrap();
        assert_eq!(a.data(), b.data(), "{spec:?}");
        assert_eq!(map_a.positions(), map_b.positions());
        assert!(
            face_orientation_count(&map_a).is_fold_free(),
            "{spec:?} folded"
        );
    }
}
