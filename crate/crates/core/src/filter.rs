//! Separable Gaussian filtering on row-major scalar grids.
//!
//! The kernel is truncated at radius ceil(3 sigma) and renormalized to unit
//! sum; borders replicate the nearest sample.

use alloc::vec;
use alloc::vec::Vec;

/// Normalized Gaussian kernel of standard deviation `sigma` (> 0).
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma).max(1.0) as usize;
    let mut weights = Vec::with_capacity(2 * radius + 1);
    let inv = -0.5 / (sigma * sigma);
    for i in -(radius as isize)..=(radius as isize) {
        let d = i as f64;
        weights.push(libm::exp(d * d * inv));
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    weights
}

/// Gaussian-blurs a `width` x `height` row-major grid. `sigma <= 0` copies.
pub(crate) fn blur_grid(values: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    debug_assert_eq!(values.len(), width * height);
    if sigma <= 0.0 {
        return values.to_vec();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = kernel.len() / 2;

    // Horizontal pass.
    let mut mid = vec![0.0; values.len()];
    for r in 0..height {
        let row = &values[r * width..(r + 1) * width];
        for c in 0..width {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let idx = (c + k) as isize - radius as isize;
                let idx = idx.clamp(0, width as isize - 1) as usize;
                acc += w * row[idx];
            }
            mid[r * width + c] = acc;
        }
    }

    // Vertical pass.
    let mut out = vec![0.0; values.len()];
    for c in 0..width {
        for r in 0..height {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let idx = (r + k) as isize - radius as isize;
                let idx = idx.clamp(0, height as isize - 1) as usize;
                acc += w * mid[idx * width + c];
            }
            out[r * width + c] = acc;
        }
    }
    out
}
