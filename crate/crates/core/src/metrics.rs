//! Image quality metrics: mean squared error, peak signal-to-noise ratio,
//! and structural similarity.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::warp::RasterImage;

/// PSNR reported for identical images (MSE = 0).
pub const PSNR_CAP_DB: f64 = 99.0;

/// SSIM window size (Gaussian, side length in pixels).
pub const SSIM_WINDOW: usize = 11;
/// SSIM window standard deviation.
pub const SSIM_SIGMA: f64 = 1.5;
/// SSIM luminance stabilizer factor.
pub const SSIM_K1: f64 = 0.01;
/// SSIM contrast stabilizer factor.
pub const SSIM_K2: f64 = 0.03;

/// Quality report for an image pair (peak value 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
}

/// Computes MSE over all samples, PSNR = 10 log10(1 / MSE) capped at
/// [`PSNR_CAP_DB`] for identical images, and channel-averaged SSIM with an
/// 11x11 Gaussian window (sigma 1.5, K1 = 0.01, K2 = 0.03).
pub fn evaluate(a: &RasterImage, b: &RasterImage) -> Result<MetricReport> {
    if !a.same_shape(b) {
        return Err(Error::SizeMismatch {
            expected: (a.width(), a.height()),
            got: (b.width(), b.height()),
        });
    }
    let n = a.data().len() as f64;
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    let psnr = if mse == 0.0 {
        PSNR_CAP_DB
    } else {
        10.0 * libm::log10(1.0 / mse)
    };
    let mut ssim = 0.0;
    for c in 0..a.channels() {
        ssim += ssim_channel(&a.channel(c), &b.channel(c));
    }
    ssim /= a.channels() as f64;
    Ok(MetricReport { mse, psnr, ssim })
}

/// SSIM of two single-channel planes, averaged over all fully-contained
/// window positions. The window shrinks to the largest odd size that fits on
/// degenerate, very small images.
fn ssim_channel(a: &RasterImage, b: &RasterImage) -> f64 {
    let (w, h) = (a.width(), a.height());
    let mut side = SSIM_WINDOW.min(w).min(h);
    if side % 2 == 0 {
        side -= 1;
    }
    let kernel = window_kernel(side);
    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);

    let plane_a = a.data();
    let plane_b = b.data();
    let products: Vec<f64> = plane_a.iter().zip(plane_b).map(|(x, y)| x * y).collect();
    let sq_a: Vec<f64> = plane_a.iter().map(|x| x * x).collect();
    let sq_b: Vec<f64> = plane_b.iter().map(|y| y * y).collect();

    let mu_a = valid_filter(plane_a, w, h, &kernel);
    let mu_b = valid_filter(plane_b, w, h, &kernel);
    let e_aa = valid_filter(&sq_a, w, h, &kernel);
    let e_bb = valid_filter(&sq_b, w, h, &kernel);
    let e_ab = valid_filter(&products, w, h, &kernel);

    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        total += num / den;
    }
    total / mu_a.len() as f64
}

/// Normalized Gaussian window weights of the given odd side length.
fn window_kernel(side: usize) -> Vec<f64> {
    let radius = (side / 2) as isize;
    let inv = -0.5 / (SSIM_SIGMA * SSIM_SIGMA);
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp((i * i) as f64 * inv))
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable windowed mean over fully-contained positions ("valid" mode);
/// output is (w - side + 1) x (h - side + 1).
fn valid_filter(plane: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let side = kernel.len();
    let ow = w - side + 1;
    let oh = h - side + 1;
    // Horizontal valid pass: (ow x h).
    let mut mid = Vec::with_capacity(ow * h);
    for r in 0..h {
        let row = &plane[r * w..(r + 1) * w];
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, &wk) in kernel.iter().enumerate() {
                acc += wk * row[c + k];
            }
            mid.push(acc);
        }
    }
    // Vertical valid pass: (ow x oh).
    let mut out = Vec::with_capacity(ow * oh);
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, &wk) in kernel.iter().enumerate() {
                acc += wk * mid[(r + k) * ow + c];
            }
            out.push(acc);
        }
    }
    out
}
