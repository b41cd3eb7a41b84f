//! Raster images and backward warping by piecewise-linear deformation maps.
//!
//! Warping realizes the composition I'(p) = I(f(p)): each output pixel looks
//! up the input image at its mapped position with bilinear interpolation;
//! positions outside the image clamp to the nearest border pixel.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::mesh::{face_orientation_count, flipped_faces, DeformationMap};
use crate::rng;

/// Stream salt for the additive-noise draws of [`compose_displacement`].
pub const NOISE_STREAM_SALT: u64 = 0x6e6f_6973_655f_3031; // "noise_01"

/// Single- or three-channel intensity grid with samples in [0, 1],
/// stored row-major with interleaved channels.
#[derive(Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RasterImage({}x{}x{})",
            self.width, self.height, self.channels
        )
    }
}

impl RasterImage {
    /// All-zero image.
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
            return Err(Error::InvalidArgument(alloc::format!(
                "bad image shape {width}x{height}x{channels}"
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        })
    }

    /// Wraps row-major interleaved samples; every sample must lie in [0, 1].
    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
            return Err(Error::InvalidArgument(alloc::format!(
                "bad image shape {width}x{height}x{channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::SizeMismatch {
                expected: (width * height * channels, 1),
                got: (data.len(), 1),
            });
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(alloc::format!(
                "sample {i} = {} outside [0, 1]",
                data[i]
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image filled by a function of (x, y, channel); values are clamped.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut img = RasterImage::new(width, height, channels)?;
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    img.set(x, y, c, f(x, y, c));
                }
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Sets a sample, clamping to [0, 1].
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v.clamp(0.0, 1.0);
    }

    pub fn same_shape(&self, other: &RasterImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Extracts one channel as a single-channel image.
    pub fn channel(&self, c: usize) -> RasterImage {
        let data = (0..self.width * self.height)
            .map(|i| self.data[i * self.channels + c])
            .collect();
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Bilinear sample with border clamp; exact at integer coordinates.
    pub fn sample(&self, x: f64, y: f64, c: usize) -> f64 {
        let (w00, w10, w01, w11, i00) = self.bilinear_weights(x, y);
        let stride = self.width * self.channels;
        let base = i00 * self.channels + c;
        w00 * self.data[base]
            + w10
                * self.data[base
                    + if self.at_right_edge(i00) {
                        0
                    } else {
                        self.channels
                    }]
            + w01 * self.data[base + if self.at_bottom_edge(i00) { 0 } else { stride }]
            + w11
                * self.data[base
                    + if self.at_right_edge(i00) {
                        0
                    } else {
                        self.channels
                    }
                    + if self.at_bottom_edge(i00) { 0 } else { stride }]
    }

    fn at_right_edge(&self, i00: usize) -> bool {
        i00 % self.width == self.width - 1
    }

    fn at_bottom_edge(&self, i00: usize) -> bool {
        i00 / self.width == self.height - 1
    }

    /// Clamped bilinear weights and the top-left pixel index.
    fn bilinear_weights(&self, x: f64, y: f64) -> (f64, f64, f64, f64, usize) {
        let xc = x.clamp(0.0, (self.width - 1) as f64);
        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = libm::floor(xc) as usize;
        let y0 = libm::floor(yc) as usize;
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        (
            (1.0 - fx) * (1.0 - fy),
            fx * (1.0 - fy),
            (1.0 - fx) * fy,
            fx * fy,
            y0 * self.width + x0,
        )
    }
}

/// Backward-warps `image` by `map`: output pixel p takes the bilinear sample
/// of `image` at f(p). The map's vertex grid must match the image pixel grid.
/// With `require_bijective` set, maps with flipped faces are rejected and up
/// to ten offending face indices are reported.
pub fn warp_image(
    image: &RasterImage,
    map: &DeformationMap,
    require_bijective: bool,
) -> Result<RasterImage> {
    let mesh = map.mesh();
    if mesh.width_v() != image.width || mesh.height_v() != image.height {
        return Err(Error::SizeMismatch {
            expected: (image.width, image.height),
            got: (mesh.width_v(), mesh.height_v()),
        });
    }
    if require_bijective {
        let count = face_orientation_count(map);
        if count.flipped > 0 {
            return Err(Error::Fold {
                faces: flipped_faces(map, 10),
            });
        }
    }
    let mut out = RasterImage::new(image.width, image.height, image.channels)?;
    for y in 0..image.height {
        for x in 0..image.width {
            let pos = map.position(y * image.width + x);
            let (w00, w10, w01, w11, i00) = image.bilinear_weights(pos.x, pos.y);
            let dx = if image.at_right_edge(i00) {
                0
            } else {
                image.channels
            };
            let dy = if image.at_bottom_edge(i00) {
                0
            } else {
                image.width * image.channels
            };
            let base = i00 * image.channels;
            let out_base = (y * image.width + x) * image.channels;
            for c in 0..image.channels {
                let v = w00 * image.data[base + c]
                    + w10 * image.data[base + dx + c]
                    + w01 * image.data[base + dy + c]
                    + w11 * image.data[base + dx + dy + c];
                out.data[out_base + c] = v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

/// Forward model of a synthetic observation: warp by the distortion map,
/// then add per-pixel Gaussian noise of standard deviation `noise_sigma`
/// (deterministic in `seed`), clamping back to [0, 1].
pub fn compose_displacement(
    image: &RasterImage,
    map: &DeformationMap,
    noise_sigma: f64,
    seed: u64,
) -> Result<RasterImage> {
    if noise_sigma < 0.0 || !noise_sigma.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "noise sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let mut out = warp_image(image, map, false)?;
    if noise_sigma > 0.0 {
        let stream = rng::derive_stream(seed, NOISE_STREAM_SALT);
        for (i, v) in out.data.iter_mut().enumerate() {
            let n = noise_sigma * rng::gaussian_at(stream, i as u64);
            *v = (*v + n).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}
