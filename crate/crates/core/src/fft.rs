//! Discrete Fourier transforms on 1D slices and 2D row-major grids.
//!
//! Power-of-two lengths take an iterative radix-2 path; other lengths fall
//! back to a direct O(n^2) transform with a precomputed twiddle table, which
//! is plenty for the cell-grid sizes this crate works with. Transforms are
//! unnormalized; `ifft_2d` applies the 1/(w h) factor once.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::complex::Complex;

/// In-place unnormalized transform of one slice.
pub fn fft_inplace(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        fft_radix2(data, inverse);
    } else {
        fft_direct(data, inverse);
    }
}

fn fft_radix2(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    // Bit-reversal permutation.
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let step = sign * 2.0 * PI / len as f64;
        let wlen = Complex::cis(step);
        for block in data.chunks_mut(len) {
            let mut w = Complex::ONE;
            let half = len / 2;
            for k in 0..half {
                let u = block[k];
                let v = block[k + half] * w;
                block[k] = u + v;
                block[k + half] = u - v;
                w = w * wlen;
            }
        }
        len <<= 1;
    }
}

fn fft_direct(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut twiddle = Vec::with_capacity(n);
    for m in 0..n {
        twiddle.push(Complex::cis(sign * 2.0 * PI * m as f64 / n as f64));
    }
    let input = data.to_vec();
    for (k, out) in data.iter_mut().enumerate() {
        let mut acc = Complex::ZERO;
        for (j, &x) in input.iter().enumerate() {
            acc += x * twiddle[(j * k) % n];
        }
        *out = acc;
    }
}

/// Forward 2D transform of a `width` x `height` row-major grid (unnormalized).
pub fn fft_2d(data: &mut [Complex], width: usize, height: usize) {
    fft_2d_dir(data, width, height, false);
}

/// Inverse 2D transform, normalized by 1/(width height).
pub fn ifft_2d(data: &mut [Complex], width: usize, height: usize) {
    fft_2d_dir(data, width, height, true);
    let scale = 1.0 / (width * height) as f64;
    for v in data.iter_mut() {
        *v = v.scale(scale);
    }
}

fn fft_2d_dir(data: &mut [Complex], width: usize, height: usize, inverse: bool) {
    debug_assert_eq!(data.len(), width * height);
    for row in data.chunks_exact_mut(width) {
        fft_inplace(row, inverse);
    }
    let mut column = vec![Complex::ZERO; height];
    for c in 0..width {
        for r in 0..height {
            column[r] = data[r * width + c];
        }
        fft_inplace(&mut column, inverse);
        for r in 0..height {
            data[r * width + c] = column[r];
        }
    }
}
