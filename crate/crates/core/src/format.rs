//! Binary interchange formats for maps and Beltrami fields.
//!
//! QCM1 (deformation map): magic "QCM1", little-endian u32 width_v and
//! height_v, then width_v x height_v little-endian f64 (x, y) pairs in
//! row-major vertex order.
//!
//! QCB1 (Beltrami field): magic "QCB1", little-endian u32 width_v and
//! height_v of the owning mesh, then m = 2 (width_v - 1)(height_v - 1)
//! little-endian f64 (rho, tau) pairs in canonical face order.
//!
//! Both are exact: every f64 round-trips bit-for-bit.

use alloc::string::String;
use alloc::vec::Vec;

use crate::beltrami::BeltramiField;
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::mesh::{build_grid_mesh, DeformationMap, Point};

pub const MAP_MAGIC: [u8; 4] = *b"QCM1";
pub const FIELD_MAGIC: [u8; 4] = *b"QCB1";

pub fn encode_map(map: &DeformationMap) -> Vec<u8> {
    let mesh = map.mesh();
    let mut out = Vec::with_capacity(12 + 16 * map.positions().len());
    out.extend_from_slice(&MAP_MAGIC);
    out.extend_from_slice(&(mesh.width_v() as u32).to_le_bytes());
    out.extend_from_slice(&(mesh.height_v() as u32).to_le_bytes());
    for p in map.positions() {
        out.extend_from_slice(&p.x.to_le_bytes());
        out.extend_from_slice(&p.y.to_le_bytes());
    }
    out
}

pub fn decode_map(bytes: &[u8]) -> Result<DeformationMap> {
    let (w, h, payload) = decode_header(bytes, MAP_MAGIC, "QCM1")?;
    let count = w * h;
    expect_len(payload, 16 * count, "QCM1")?;
    let mesh = build_grid_mesh(w, h)?;
    let mut positions = Vec::with_capacity(count);
    for i in 0..count {
        let x = read_f64(payload, 16 * i);
        let y = read_f64(payload, 16 * i + 8);
        positions.push(Point::new(x, y));
    }
    DeformationMap::new(mesh, positions)
}

pub fn encode_field(field: &BeltramiField) -> Vec<u8> {
    let mesh = field.mesh();
    let mut out = Vec::with_capacity(12 + 16 * field.values().len());
    out.extend_from_slice(&FIELD_MAGIC);
    out.extend_from_slice(&(mesh.width_v() as u32).to_le_bytes());
    out.extend_from_slice(&(mesh.height_v() as u32).to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<BeltramiField> {
    let (w, h, payload) = decode_header(bytes, FIELD_MAGIC, "QCB1")?;
    let faces = 2 * (w - 1) * (h - 1);
    expect_len(payload, 16 * faces, "QCB1")?;
    let mesh = build_grid_mesh(w, h)?;
    let mut values = Vec::with_capacity(faces);
    for i in 0..faces {
        let re = read_f64(payload, 16 * i);
        let im = read_f64(payload, 16 * i + 8);
        values.push(Complex::new(re, im));
    }
    BeltramiField::new(mesh, values)
}

fn decode_header<'a>(
    bytes: &'a [u8],
    magic: [u8; 4],
    name: &str,
) -> Result<(usize, usize, &'a [u8])> {
    if bytes.len() < 12 {
        return Err(Error::Format(alloc::format!("{name}: truncated header")));
    }
    if bytes[..4] != magic {
        return Err(Error::Format(alloc::format!(
            "{name}: bad magic {:?}",
            &bytes[..4]
        )));
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if w < 2 || h < 2 {
        return Err(Error::Format(alloc::format!(
            "{name}: grid {w}x{h} below the 2x2 minimum"
        )));
    }
    Ok((w, h, &bytes[12..]))
}

fn expect_len(payload: &[u8], want: usize, name: &str) -> Result<()> {
    if payload.len() != want {
        return Err(Error::Format(
            String::from(name) + ": payload length mismatch",
        ));
    }
    Ok(())
}

fn read_f64(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::identity_map;
    use crate::rng;
    use proptest::prelude::*;

    #[test]
    fn bad_magic_and_truncation_are_reported() {
        let mesh = build_grid_mesh(3, 3).unwrap();
        let bytes = encode_map(&identity_map(&mesh));
        assert!(matches!(decode_map(&bytes[..8]), Err(Error::Format(_))));
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(decode_map(&wrong), Err(Error::Format(_))));
        let mut short = bytes.clone();
        short.pop();
        assert!(matches!(decode_map(&short), Err(Error::Format(_))));
        // A field file is not a map file.
        let field = BeltramiField::zero(&mesh);
        assert!(matches!(
            decode_map(&encode_field(&field)),
            Err(Error::Format(_))
        ));
    }

    proptest! {
        #[test]
        fn map_round_trip_is_lossless(seed in 0u64..1000) {
            let mesh = build_grid_mesh(5, 4).unwrap();
            let positions = (0..mesh.vertex_count())
                .map(|i| Point::new(
                    20.0 * rng::unit_f64_at(seed, 2 * i as u64) - 10.0,
                    20.0 * rng::unit_f64_at(seed, 2 * i as u64 + 1) - 10.0,
                ))
                .collect();
            let map = DeformationMap::new(mesh, positions).unwrap();
            let decoded = decode_map(&encode_map(&map)).unwrap();
            prop_assert_eq!(decoded.positions(), map.positions());
        }

        #[test]
        fn field_round_trip_is_lossless(seed in 0u64..1000) {
            let mesh = build_grid_mesh(4, 6).unwrap();
            let values = (0..mesh.face_count())
                .map(|i| Complex::new(
                    rng::unit_f64_at(seed, 2 * i as u64) - 0.5,
                    rng::unit_f64_at(seed, 2 * i as u64 + 1) - 0.5,
                ))
                .collect();
            let field = BeltramiField::new(mesh, values).unwrap();
            let decoded = decode_field(&encode_field(&field)).unwrap();
            prop_assert_eq!(decoded.values(), field.values());
        }
    }
}
