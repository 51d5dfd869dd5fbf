//! Flat little-endian binary files for grid functions: eight `u64` header
//! words (magic, version, d, L, dtype, three reserved zeros) followed by the
//! values in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use lqlab_core::maximal::GridFunction;
use lqlab_core::num_complex::Complex64;

pub const MAGIC: u64 = u64::from_le_bytes(*b"LQGRID\0\0");
pub const VERSION: u64 = 1;
/// One `f64` per point.
pub const DTYPE_REAL: u64 = 1;
/// Two `f64` (real, imaginary) per point.
pub const DTYPE_COMPLEX: u64 = 2;

pub fn write_grid<W: Write>(mut w: W, f: &GridFunction) -> Result<()> {
    let real = f.values().iter().all(|v| v.im == 0.0);
    let header = [
        MAGIC,
        VERSION,
        f.dimension() as u64,
        f.period() as u64,
        if real { DTYPE_REAL } else { DTYPE_COMPLEX },
        0,
        0,
        0,
    ];
    for h in header {
        w.write_all(&h.to_le_bytes())?;
    }
    for v in f.values() {
        w.write_all(&v.re.to_le_bytes())?;
        if !real {
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_grid<R: Read>(mut r: R) -> Result<GridFunction> {
    let mut word = [0u8; 8];
    let mut header = [0u64; 8];
    for h in &mut header {
        r.read_exact(&mut word).context("truncated grid header")?;
        *h = u64::from_le_bytes(word);
    }
    let [magic, version, d, l, dtype, ..] = header;
    if magic != MAGIC {
        bail!("not a grid file (bad magic)");
    }
    if version != VERSION {
        bail!("unsupported grid file version {version}");
    }
    if header[5..].iter().any(|&x| x != 0) {
        bail!("reserved header words must be zero");
    }
    let (d, l) = (usize::try_from(d)?, usize::try_from(l)?);
    let n = lqlab_core::maximal::grid_len(d, l)?;
    let mut next = || -> Result<f64> {
        r.read_exact(&mut word).context("truncated grid data")?;
        Ok(f64::from_le_bytes(word))
    };
    let values = match dtype {
        DTYPE_REAL => (0..n).map(|_| next().map(|x| Complex64::new(x, 0.0))).collect::<Result<Vec<_>>>()?,
        DTYPE_COMPLEX => (0..n).map(|_| Ok(Complex64::new(next()?, next()?))).collect::<Result<Vec<_>>>()?,
        other => bail!("unknown dtype {other}"),
    };
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        bail!("{} trailing bytes after grid data", rest.len());
    }
    Ok(GridFunction::new(d, l, values)?)
}

pub fn load(path: &Path) -> Result<GridFunction> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_grid(std::io::BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn save(path: &Path, f: &GridFunction) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_grid(&mut w, f)?;
    w.flush()?;
    Ok(())
}
