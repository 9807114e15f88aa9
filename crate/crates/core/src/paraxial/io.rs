//! Binary field files and CSV slices.
//!
//! Layout (little-endian): 8-byte magic `KIRFLD01`, `nx` and `ny` as `u64`,
//! `dx`, `dy`, `k`, `z` as `f64`, then `nx * ny` samples in row-major order
//! (`x` fastest), each stored as interleaved `re`, `im` `f64`.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::BeamField;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"KIRFLD01";

pub fn write_field<W: Write>(field: &BeamField, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(field.nx as u64).to_le_bytes())?;
    out.write_all(&(field.ny as u64).to_le_bytes())?;
    for v in [field.dx, field.dy, field.k, field.z] {
        out.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * field.amplitude.len());
    for v in &field.amplitude {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn field_to_bytes(field: &BeamField) -> Vec<u8> {
    let mut buf = Vec::new();
    write_field(field, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_field<R: Read>(mut input: R) -> Result<BeamField> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic in field file".into()));
    }
    let mut u = [0u8; 8];
    let mut read_u64 = |input: &mut R| -> Result<u64> {
        input.read_exact(&mut u)?;
        Ok(u64::from_le_bytes(u))
    };
    let nx = read_u64(&mut input)?;
    let ny = read_u64(&mut input)?;
    let mut f = [0.0f64; 4];
    for v in &mut f {
        let mut b = [0u8; 8];
        input.read_exact(&mut b)?;
        *v = f64::from_le_bytes(b);
    }
    let count = nx
        .checked_mul(ny)
        .filter(|c| *c <= (1 << 28))
        .ok_or_else(|| Error::Format(format!("implausible grid {nx} x {ny}")))? as usize;
    let mut data = vec![0u8; 16 * count];
    input.read_exact(&mut data)?;
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    let amplitude = data
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    BeamField::new(nx as usize, ny as usize, f[0], f[1], f[2], f[3], amplitude)
}

/// `x,y,intensity,phase` per sample, header first.
pub fn write_csv<W: Write>(field: &BeamField, mut out: W) -> Result<()> {
    let mut s = String::from("x,y,intensity,phase\n");
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let u = field.amplitude[iy * field.nx + ix];
            s.push_str(&format!("{},{},{},{}\n", field.x(ix), field.y(iy), u.norm_sqr(), u.arg()));
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}
