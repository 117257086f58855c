//! KFP1 binary field files and CSV export.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Field, Grid};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"KFP1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 5 * 4 + 4 * 8;

pub fn write_field_to<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    for n in [VERSION, g.d as u32, g.nt as u32, g.nx as u32, g.nv as u32] {
        w.write_all(&n.to_le_bytes())?;
    }
    for f in [g.t_min, g.t_max, g.x_period, g.v_max] {
        w.write_all(&f.to_le_bytes())?;
    }
    for v in field.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    write_field_to(field, BufWriter::new(File::create(path)?))
}

pub fn read_field_from<R: Read>(mut r: R) -> Result<Field> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "header needs {HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    let u = |i: usize| {
        let o = 4 + 4 * i;
        u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap())
    };
    let f = |i: usize| {
        let o = 24 + 8 * i;
        f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
    };
    if u(0) != VERSION {
        return Err(Error::MalformedHeader(format!("unsupported version {}", u(0))));
    }
    let grid = Grid {
        d: u(1) as usize,
        nt: u(2) as usize,
        nx: u(3) as usize,
        nv: u(4) as usize,
        t_min: f(0),
        t_max: f(1),
        x_period: f(2),
        v_max: f(3),
    };
    grid.validate()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let expected = grid
        .len()
        .checked_mul(8)
        .ok_or_else(|| Error::MalformedHeader("grid size overflows".into()))?;
    let actual = bytes.len() - HEADER_LEN;
    if actual != expected {
        return Err(Error::Truncated { expected, actual });
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, data)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field_from(BufReader::new(File::open(path)?))
}

/// Writes one time slice of a 1D field as `t,x,v,value` rows.
pub fn write_csv_slice(field: &Field, it: usize, path: impl AsRef<Path>) -> Result<()> {
    let g = field.grid();
    if g.d != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: g.d,
        });
    }
    if it >= g.nt {
        return Err(Error::InvalidParameter(format!("time index {it} out of range")));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,x,v,value")?;
    let t = g.t(it);
    for ix in 0..g.nx {
        for iv in 0..g.nv {
            writeln!(w, "{},{},{},{}", t, g.x(ix), g.v(iv), field.get(it, ix, iv))?;
        }
    }
    w.flush()?;
    Ok(())
}
