//! Binary checkpoint files: real field samples plus enough header to rebuild
//! the grid. Layout, all little-endian:
//!
//! ```text
//! magic   5 bytes  "GKDV1"
//! version u16      1
//! n       u64      sample count
//! l       f64      domain length
//! t       f64      snapshot time
//! payload n x f64  samples
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField};

const MAGIC: &[u8; 5] = b"GKDV1";
const VERSION: u16 = 1;

pub fn write(path: &Path, field: &RealField, t: f64) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(field.grid().n() as u64).to_le_bytes())?;
    out.write_all(&field.grid().length().to_le_bytes())?;
    out.write_all(&t.to_le_bytes())?;
    for v in field.samples() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<(RealField, f64)> {
    let mut input = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?} in {}",
            magic,
            path.display()
        )));
    }
    let mut u16buf = [0u8; 2];
    input.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version} (expected {VERSION})"
        )));
    }
    let mut u64buf = [0u8; 8];
    input.read_exact(&mut u64buf)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    let mut f64buf = [0u8; 8];
    input.read_exact(&mut f64buf)?;
    let length = f64::from_le_bytes(f64buf);
    input.read_exact(&mut f64buf)?;
    let t = f64::from_le_bytes(f64buf);

    let grid = Grid::new(n, length).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut f64buf)?;
        samples.push(f64::from_le_bytes(f64buf));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after payload".into()));
    }
    Ok((RealField::new(grid, samples)?, t))
}
