//! Field snapshots: a 32-byte header (`LLAB`, version, `n`, `vmax`) followed by
//! little-endian `f64` values in grid order, plus a CSV export.

use super::{GridField, VelocityGrid};
use crate::error::{Error, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"LLAB";
const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(field: &GridField, mut w: W) -> Result<()> {
    let g = field.grid();
    let mut header = [0u8; 32];
    header[0..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&(g.n() as u64).to_le_bytes());
    header[16..24].copy_from_slice(&g.vmax().to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * field.data().len());
    for x in field.data() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<GridField> {
    let mut header = [0u8; 32];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::InvalidParam("snapshot magic mismatch".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::InvalidParam(format!("unsupported snapshot version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
    let vmax = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
    let grid = VelocityGrid::new(n, vmax)?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    GridField::from_vec(grid, data)
}

/// Rows `v1,v2,v3,value`.
pub fn write_csv<W: Write>(field: &GridField, mut w: W) -> Result<()> {
    writeln!(w, "v1,v2,v3,value")?;
    let g = field.grid();
    for (i, x) in field.data().iter().enumerate() {
        let v = g.node(i);
        writeln!(w, "{},{},{},{:e}", v[0], v[1], v[2], x)?;
    }
    Ok(())
}
