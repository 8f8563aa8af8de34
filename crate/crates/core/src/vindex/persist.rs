//! Binary index file.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        4 bytes  "GWVX"
//! version      u16      1
//! scalar_bytes u8       4 (f32) or 8 (f64)
//! reserved     u8       0
//! dim          u32
//! count        u64
//! tag_len      u32
//! model_tag    tag_len bytes, UTF-8
//! checksum     32 bytes SHA-256 of every other byte in the file
//! entries      count x { id_len u32, id UTF-8, dim x scalar }
//! ```

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::vector::EmbeddingVector;
use super::{IndexError, VectorIndex};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"GWVX";
const VERSION: u16 = 1;
const CHECKSUM_LEN: usize = 32;

fn checksum(head: &[u8], body: &[u8]) -> [u8; CHECKSUM_LEN] {
    let mut hasher = Sha256::new();
    hasher.update(head);
    hasher.update(body);
    hasher.finalize().into()
}

pub fn encode_index<S: Scalar>(index: &VectorIndex<S>) -> Vec<u8> {
    let mut head = Vec::new();
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&VERSION.to_le_bytes());
    head.push(S::BYTES as u8);
    head.push(0);
    head.extend_from_slice(&(index.dim() as u32).to_le_bytes());
    head.extend_from_slice(&(index.len() as u64).to_le_bytes());
    let tag = index.model_tag().as_bytes();
    head.extend_from_slice(&(tag.len() as u32).to_le_bytes());
    head.extend_from_slice(tag);

    let mut body = Vec::new();
    for (id, vector) in index.iter() {
        body.extend_from_slice(&(id.len() as u32).to_le_bytes());
        body.extend_from_slice(id.as_bytes());
        for v in vector.values() {
            v.write_le(&mut body);
        }
    }

    let sum = checksum(&head, &body);
    let mut out = head;
    out.extend_from_slice(&sum);
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            IndexError::IndexCorrupt(format!("truncated at byte {} (wanted {n} more)", self.pos))
        })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_index<S: Scalar>(bytes: &[u8]) -> Result<VectorIndex<S>, IndexError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(IndexError::IndexCorrupt("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(IndexError::IndexCorrupt(format!("unsupported version {version}")));
    }
    let width = r.take(2)?[0] as usize;
    if width != S::BYTES {
        return Err(IndexError::IndexCorrupt(format!(
            "file stores {width}-byte scalars, expected {}",
            S::BYTES
        )));
    }
    let dim = r.u32()? as usize;
    let count = u64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let tag_len = r.u32()? as usize;
    let tag = String::from_utf8(r.take(tag_len)?.to_vec())
        .map_err(|_| IndexError::IndexCorrupt("model tag is not UTF-8".into()))?;
    let head_end = r.pos;
    let stored_sum = r.take(CHECKSUM_LEN)?;
    let body = &bytes[r.pos..];
    if checksum(&bytes[..head_end], body) != stored_sum {
        return Err(IndexError::IndexCorrupt("checksum mismatch".into()));
    }

    let mut index = VectorIndex::new(dim, tag);
    for _ in 0..count {
        let id_len = r.u32()? as usize;
        let id = String::from_utf8(r.take(id_len)?.to_vec())
            .map_err(|_| IndexError::IndexCorrupt("chunk id is not UTF-8".into()))?;
        let raw = r.take(dim * S::BYTES)?;
        let values: Vec<S> = raw.chunks_exact(S::BYTES).map(S::read_le).collect();
        index.insert(id, EmbeddingVector::assume_normalized(values))?;
    }
    if r.pos != bytes.len() {
        return Err(IndexError::IndexCorrupt("trailing bytes after last entry".into()));
    }
    Ok(index)
}

/// Writes the index atomically (temporary file + rename).
pub fn persist_index<S: Scalar>(index: &VectorIndex<S>, path: &Path) -> Result<(), IndexError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| IndexError::Io(format!("{}: {e}", parent.display())))?;
    }
    crate::store::write_atomic(path, &encode_index(index)).map_err(|e| IndexError::Io(format!("{}: {e}", path.display())))
}

pub fn load_index<S: Scalar>(path: &Path) -> Result<VectorIndex<S>, IndexError> {
    let bytes = fs::read(path).map_err(|e| IndexError::Io(format!("{}: {e}", path.display())))?;
    decode_index(&bytes)
}
