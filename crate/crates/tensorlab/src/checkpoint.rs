//! Flat binary parameter checkpoints.
//!
//! Layout: magic `MUSE`, version `u32`, count `u32`, then per parameter a
//! `u32` name length, the UTF-8 name, `u32` rows, `u32` cols and the
//! row-major data as little-endian `f64`. All integers are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, TensorError};
use crate::params::ParamStore;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"MUSE";
pub const VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn to_u32(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| TensorError::Checkpoint(format!("{what} {x} exceeds u32")))
}

pub fn write_params<W: Write>(store: &ParamStore, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    put_u32(w, to_u32(store.len(), "parameter count")?)?;
    for (name, t) in store.entries() {
        put_u32(w, to_u32(name.len(), "name length")?)?;
        w.write_all(name.as_bytes())?;
        put_u32(w, to_u32(t.rows(), "rows")?)?;
        put_u32(w, to_u32(t.cols(), "cols")?)?;
        for x in t.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_params<R: Read>(r: &mut R) -> Result<ParamStore> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TensorError::Checkpoint(format!("bad magic {magic:?}")));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(TensorError::Checkpoint(format!("unsupported version {version}")));
    }
    let count = get_u32(r)?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let len = get_u32(r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|e| TensorError::Checkpoint(format!("name is not UTF-8: {e}")))?;
        let rows = get_u32(r)? as usize;
        let cols = get_u32(r)? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        let mut b = [0u8; 8];
        for _ in 0..rows * cols {
            r.read_exact(&mut b)?;
            data.push(f64::from_le_bytes(b));
        }
        store.add(name, Tensor::from_vec(rows, cols, data)?)?;
    }
    Ok(store)
}

pub fn save(store: &ParamStore, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_params(store, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ParamStore> {
    read_params(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_layout_of_single_param() {
        let mut s = ParamStore::new();
        s.add("ab", Tensor::from_vec(1, 2, vec![1.0, -2.0]).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_params(&s, &mut buf).unwrap();
        let mut expect = b"MUSE".to_vec();
        expect.extend(1u32.to_le_bytes());
        expect.extend(1u32.to_le_bytes());
        expect.extend(2u32.to_le_bytes());
        expect.extend(b"ab");
        expect.extend(1u32.to_le_bytes());
        expect.extend(2u32.to_le_bytes());
        expect.extend(1.0f64.to_le_bytes());
        expect.extend((-2.0f64).to_le_bytes());
        assert_eq!(buf, expect);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(matches!(read_params(&mut &b"NOPE\x01\0\0\0\0\0\0\0"[..]), Err(TensorError::Checkpoint(_))));
        assert!(matches!(read_params(&mut &b"MUSE\x01\0\0\0\x01\0\0\0"[..]), Err(TensorError::Io(_))));
    }
}
