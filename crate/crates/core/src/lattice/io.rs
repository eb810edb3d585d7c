//! Field serialization.
//!
//! Binary layout: a 32-byte little-endian header
//!
//! | bytes  | content                          |
//! |--------|----------------------------------|
//! | 0..4   | magic `FRQH`                     |
//! | 4..8   | format version (`u32`, = 1)      |
//! | 8..12  | dimension (`u32`)                |
//! | 12..16 | points per axis (`u32`)          |
//! | 16..24 | half width `L` (`f64`)           |
//! | 24..28 | components per point (`u32`)     |
//! | 28..32 | reserved, zero                   |
//!
//! followed by `n^d × components` little-endian `f64` values, point-major
//! (x fastest, then y) with the components of one point adjacent.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::lattice::{Grid, OmegaMask, ScalarField, VectorField};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"FRQH";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

fn header<T: Real>(grid: &Grid<T>, components: u32) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0..4].copy_from_slice(MAGIC);
    h[4..8].copy_from_slice(&VERSION.to_le_bytes());
    h[8..12].copy_from_slice(&(grid.dim() as u32).to_le_bytes());
    h[12..16].copy_from_slice(&(grid.n() as u32).to_le_bytes());
    h[16..24].copy_from_slice(&grid.half_width().as_f64().to_le_bytes());
    h[24..28].copy_from_slice(&components.to_le_bytes());
    h
}

fn write_values<W: Write, T: Real>(w: &mut W, grid: &Grid<T>, comps: &[&[T]]) -> Result<()> {
    w.write_all(&header(grid, comps.len() as u32))?;
    let mut buf = Vec::with_capacity(grid.len() * comps.len() * 8);
    for i in 0..grid.len() {
        for c in comps {
            buf.extend_from_slice(&c[i].as_f64().to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_scalar<W: Write, T: Real>(w: &mut W, f: &ScalarField<T>) -> Result<()> {
    write_values(w, f.grid(), &[f.values()])
}

pub fn write_vector<W: Write, T: Real>(w: &mut W, f: &VectorField<T>) -> Result<()> {
    let comps: Vec<&[T]> = f.components().iter().map(|c| c.as_slice()).collect();
    write_values(w, f.grid(), &comps)
}

fn read_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().expect("4 bytes"))
}

/// Reads a field file; returns the grid and the per-component values.
pub fn read_raw<R: Read, T: Real>(r: &mut R) -> Result<(Grid<T>, Vec<Vec<T>>)> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h).map_err(|e| Error::Format(format!("short header: {e}")))?;
    if &h[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&h[4..8]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&h[8..12]) as usize;
    let n = read_u32(&h[12..16]) as usize;
    let l = f64::from_le_bytes(h[16..24].try_into().expect("8 bytes"));
    let ncomp = read_u32(&h[24..28]) as usize;
    let grid = Grid::new(dim, T::lit(l), n)?;
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let expected = grid.len() * ncomp * 8;
    if data.len() != expected {
        return Err(Error::Format(format!("payload has {} bytes, expected {expected}", data.len())));
    }
    let mut comps = vec![Vec::with_capacity(grid.len()); ncomp];
    for (k, chunk) in data.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        comps[k % ncomp].push(T::lit(v));
    }
    Ok((grid, comps))
}

pub fn read_scalar<R: Read, T: Real>(r: &mut R) -> Result<ScalarField<T>> {
    let (grid, mut comps) = read_raw(r)?;
    if comps.len() != 1 {
        return Err(Error::Format(format!("expected 1 component, found {}", comps.len())));
    }
    ScalarField::from_values(grid, comps.pop().expect("one component"))
}

pub fn read_vector<R: Read, T: Real>(r: &mut R) -> Result<VectorField<T>> {
    let (grid, comps) = read_raw(r)?;
    VectorField::from_components(grid, comps)
}

fn coord_header(dim: usize) -> &'static str {
    if dim == 1 {
        "index,x"
    } else {
        "index,x,y"
    }
}

fn write_coords<W: Write, T: Real>(w: &mut W, grid: &Grid<T>, i: usize) -> Result<()> {
    let p = grid.point(i);
    if grid.dim() == 1 {
        write!(w, "{i},{:e}", p[0].as_f64())?;
    } else {
        write!(w, "{i},{:e},{:e}", p[0].as_f64(), p[1].as_f64())?;
    }
    Ok(())
}

/// CSV `index,x[,y],value`.
pub fn write_scalar_csv<W: Write, T: Real>(w: &mut W, f: &ScalarField<T>) -> Result<()> {
    writeln!(w, "{},value", coord_header(f.grid().dim()))?;
    for (i, v) in f.values().iter().enumerate() {
        write_coords(w, f.grid(), i)?;
        writeln!(w, ",{:e}", v.as_f64())?;
    }
    Ok(())
}

/// CSV `index,x[,y],value_0[,value_1]`.
pub fn write_vector_csv<W: Write, T: Real>(w: &mut W, f: &VectorField<T>) -> Result<()> {
    let cols: Vec<String> = (0..f.grid().dim()).map(|j| format!("value_{j}")).collect();
    writeln!(w, "{},{}", coord_header(f.grid().dim()), cols.join(","))?;
    for i in 0..f.grid().len() {
        write_coords(w, f.grid(), i)?;
        for c in f.components() {
            write!(w, ",{:e}", c[i].as_f64())?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// CSV `index,inside` with `inside ∈ {0, 1}`.
pub fn write_mask_csv<W: Write, T: Real>(w: &mut W, m: &OmegaMask<T>) -> Result<()> {
    writeln!(w, "index,inside")?;
    for (i, &b) in m.inside().iter().enumerate() {
        writeln!(w, "{i},{}", u8::from(b))?;
    }
    Ok(())
}
