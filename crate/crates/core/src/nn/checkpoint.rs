//! Binary serialization for network weights.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes  "CAMLABCK"
//! version u32      currently 1
//! n_dims  u32
//! dims    n_dims * u32
//! params  f64 * param_count, per layer: weights row-major, then biases
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Element, Mlp};
use crate::error::{LabError, Result};

const MAGIC: &[u8; 8] = b"CAMLABCK";
const VERSION: u32 = 1;

/// Streams a network to any writer.
pub fn write_mlp<F: Element, W: Write>(net: &Mlp<F>, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let dims = net.dims();
    w.write_all(&u32::try_from(dims.len()).map_err(|_| {
        LabError::Format("network has too many layers to serialize".into())
    })?.to_le_bytes())?;
    for &d in &dims {
        let d = u32::try_from(d)
            .map_err(|_| LabError::Format(format!("layer width {d} exceeds u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    for p in net.params_f64() {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a network back, verifying magic, version, and parameter count.
pub fn read_mlp<F: Element, R: Read>(r: &mut R) -> Result<Mlp<F>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| LabError::Format("checkpoint shorter than its header".into()))?;
    if &magic != MAGIC {
        return Err(LabError::Format("bad checkpoint magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(LabError::Format(format!(
            "unsupported checkpoint version {version}, expected {VERSION}"
        )));
    }
    let n_dims = read_u32(r)? as usize;
    if n_dims < 2 {
        return Err(LabError::Format(format!(
            "checkpoint lists {n_dims} layer widths, need at least 2"
        )));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        let d = read_u32(r)? as usize;
        if d == 0 {
            return Err(LabError::Format("checkpoint contains a zero-width layer".into()));
        }
        dims.push(d);
    }
    let mut net = Mlp::<F>::new(&dims, &mut ChaCha8Rng::seed_from_u64(0))?;
    let count = net.param_count();
    let mut buf = [0u8; 8];
    for i in 0..count {
        r.read_exact(&mut buf).map_err(|_| {
            LabError::Format(format!("checkpoint truncated at parameter {i} of {count}"))
        })?;
        let v = f64::from_le_bytes(buf);
        if !v.is_finite() {
            return Err(LabError::Format(format!("non-finite parameter at index {i}")));
        }
        net.param_set(i, v);
    }
    if r.read(&mut buf[..1])? != 0 {
        return Err(LabError::Format("checkpoint has trailing bytes".into()));
    }
    Ok(net)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| LabError::Format("checkpoint truncated inside header".into()))?;
    Ok(u32::from_le_bytes(buf))
}

/// Writes a network to a file, creating parent directories as needed.
pub fn save_mlp<F: Element, P: AsRef<Path>>(net: &Mlp<F>, path: P) -> Result<()> {
    if let Some(parent) = path.as_ref().parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_mlp(net, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Loads a network from a file.
pub fn load_mlp<F: Element, P: AsRef<Path>>(path: P) -> Result<Mlp<F>> {
    let mut r = BufReader::new(File::open(path)?);
    read_mlp(&mut r)
}
