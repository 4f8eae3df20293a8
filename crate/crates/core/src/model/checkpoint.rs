use std::fs;
use std::path::Path;

use super::ModelParams;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"GGRX";

/// Writes `GGRX`, the format version, the vocabulary digest, then every
/// tensor as name, rank, dims and little-endian `f32` values.
pub fn save_checkpoint(params: &ModelParams<f32>, vocab_digest: &[u8; 32], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(params, vocab_digest))?;
    Ok(())
}

fn encode(params: &ModelParams<f32>, vocab_digest: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 4 * params.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(vocab_digest);
    let named = params.named();
    out.extend_from_slice(&(named.len() as u32).to_le_bytes());
    for (name, t) in named {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint("file is truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// Reads a checkpoint, refusing it unless its vocabulary digest matches.
pub fn load_checkpoint(path: impl AsRef<Path>, vocab_digest: &[u8; 32]) -> Result<ModelParams<f32>> {
    decode(&fs::read(path)?, vocab_digest)
}

fn decode(bytes: &[u8], vocab_digest: &[u8; 32]) -> Result<ModelParams<f32>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    if r.take(32)? != vocab_digest {
        return Err(Error::Checkpoint(
            "vocabulary hash mismatch: checkpoint was trained on a different vocabulary".into(),
        ));
    }
    let count = r.u32()? as usize;
    let mut named = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = r.u32()? as usize;
        let shape = (0..rank).map(|_| Ok(r.u32()? as usize)).collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let raw = r.take(n.checked_mul(4).ok_or_else(|| Error::Checkpoint("tensor too large".into()))?)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        named.push((name, Tensor::from_vec(shape, data)?));
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes after tensor table".into()));
    }
    ModelParams::from_named(named)
}
