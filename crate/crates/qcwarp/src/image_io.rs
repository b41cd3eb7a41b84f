//! Image file IO: 8- and 16-bit PNG and binary PGM/PPM.
//!
//! Samples are mapped to [0, 1] by dividing by the type maximum on read;
//! writing quantizes with round-half-to-even. The container is sniffed from
//! the file magic on read and chosen by extension on write.

use std::fs;
use std::path::Path;

use qcwarp_core::RasterImage;

use crate::error::{Category, CliError, CliResult};

/// Source or target sample depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// Reads a PNG or binary PGM/PPM image, reporting its sample depth.
pub fn read_image(path: &Path) -> CliResult<(RasterImage, BitDepth)> {
    let bytes =
        fs::read(path).map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        read_png(&bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        read_pnm(&bytes)
    } else {
        Err(CliError::input(format!(
            "{}: not a PNG or binary PGM/PPM file",
            path.display()
        )))
    }
}

/// Writes PNG (.png) or binary PGM/PPM (.pgm/.ppm/.pnm) at the given depth.
pub fn write_image(path: &Path, image: &RasterImage, depth: BitDepth) -> CliResult<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("png")
        .to_ascii_lowercase();
    let bytes = match ext.as_str() {
        "pgm" | "ppm" | "pnm" => encode_pnm(image, depth)?,
        _ => encode_png(image, depth)?,
    };
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

fn quantize(v: f64, max: f64) -> u16 {
    (v * max).round_ties_even().clamp(0.0, max) as u16
}

fn read_png(bytes: &[u8]) -> CliResult<(RasterImage, BitDepth)> {
    let mut decoder = png::Decoder::new(bytes);
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(png_error)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let source_channels = info.color_type.samples();
    let channels = match info.color_type {
        png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => 1,
        _ => 3,
    };
    let (depth, max, bytes_per_sample) = match info.bit_depth {
        png::BitDepth::Sixteen => (BitDepth::Sixteen, 65535.0, 2),
        _ => (BitDepth::Eight, 255.0, 1),
    };
    let sample_at = |i: usize| -> f64 {
        if bytes_per_sample == 2 {
            u16::from_be_bytes([buf[2 * i], buf[2 * i + 1]]) as f64 / max
        } else {
            buf[i] as f64 / max
        }
    };
    let mut data = Vec::with_capacity(w * h * channels);
    for pixel in 0..w * h {
        for c in 0..channels {
            data.push(sample_at(pixel * source_channels + c));
        }
    }
    let image = RasterImage::from_data(w, h, channels, data)?;
    Ok((image, depth))
}

fn png_error(e: png::DecodingError) -> CliError {
    match e {
        png::DecodingError::IoError(io) => CliError::io(io.to_string()),
        other => CliError::input(format!("bad PNG: {other}")),
    }
}

fn encode_png(image: &RasterImage, depth: BitDepth) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        encoder.set_color(if image.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        encoder.set_depth(match depth {
            BitDepth::Eight => png::BitDepth::Eight,
            BitDepth::Sixteen => png::BitDepth::Sixteen,
        });
        let mut writer = encoder
            .write_header()
            .map_err(|e| CliError::io(format!("encoding PNG: {e}")))?;
        let max = depth.max_value();
        let mut raw = Vec::with_capacity(image.data().len() * 2);
        for &v in image.data() {
            let q = quantize(v, max);
            match depth {
                BitDepth::Eight => raw.push(q as u8),
                BitDepth::Sixteen => raw.extend_from_slice(&q.to_be_bytes()),
            }
        }
        writer
            .write_image_data(&raw)
            .map_err(|e| CliError::io(format!("encoding PNG: {e}")))?;
    }
    Ok(out)
}

fn read_pnm(bytes: &[u8]) -> CliResult<(RasterImage, BitDepth)> {
    let channels = if bytes.starts_with(b"P6") { 3 } else { 1 };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = read_pnm_number(bytes, &mut pos)?;
    }
    // Single whitespace byte separates the header from the raster.
    pos += 1;
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval == 0 || maxval > 65535 {
        return Err(CliError::input(format!("bad PNM maxval {maxval}")));
    }
    let depth = if maxval < 256 {
        BitDepth::Eight
    } else {
        BitDepth::Sixteen
    };
    let samples = w * h * channels;
    let bytes_per_sample = if maxval < 256 { 1 } else { 2 };
    let raster = bytes
        .get(pos..pos + samples * bytes_per_sample)
        .ok_or_else(|| CliError::input("truncated PNM raster".to_string()))?;
    let max = maxval as f64;
    let mut data = Vec::with_capacity(samples);
    for i in 0..samples {
        let v = if bytes_per_sample == 2 {
            u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as f64
        } else {
            raster[i] as f64
        };
        if v > max {
            return Err(CliError::input(format!(
                "PNM sample {v} above maxval {maxval}"
            )));
        }
        data.push(v / max);
    }
    let image = RasterImage::from_data(w, h, channels, data)?;
    Ok((image, depth))
}

fn read_pnm_number(bytes: &[u8], pos: &mut usize) -> CliResult<usize> {
    // Skip whitespace and '#' comments.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(CliError::input("malformed PNM header".to_string()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError {
            category: Category::Input,
            message: "malformed PNM header".to_string(),
        })
}

fn encode_pnm(image: &RasterImage, depth: BitDepth) -> CliResult<Vec<u8>> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let max = depth.max_value();
    let mut out = format!(
        "{magic}\n{} {}\n{}\n",
        image.width(),
        image.height(),
        max as u32
    )
    .into_bytes();
    for &v in image.data() {
        let q = quantize(v, max);
        match depth {
            BitDepth::Eight => out.push(q as u8),
            BitDepth::Sixteen => out.extend_from_slice(&q.to_be_bytes()),
        }
    }
    Ok(out)
}
