//! Floating point element type used by embedding vectors and the vector index.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Element type of an [`EmbeddingVector`](crate::vindex::EmbeddingVector).
///
/// Besides the arithmetic from [`Float`], a scalar knows its fixed-width
/// little-endian encoding so indices can be persisted bit-exactly.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Width of the little-endian encoding in bytes.
    const BYTES: usize;

    fn write_le(self, out: &mut Vec<u8>);

    /// Decodes from exactly [`Self::BYTES`] bytes.
    fn read_le(bytes: &[u8]) -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const BYTES: usize = 4;

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        let mut buf = [0u8; 4];
        buf.copy_from_slice(&bytes[..4]);
        f32::from_le_bytes(buf)
    }
}

impl Scalar for f64 {
    const BYTES: usize = 8;

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        let mut buf = [0u8; 8];
        buf.copy_from_slice(&bytes[..8]);
        f64::from_le_bytes(buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<S: Scalar>(v: S) -> S {
        let mut buf = Vec::new();
        v.write_le(&mut buf);
        assert_eq!(buf.len(), S::BYTES);
        S::read_le(&buf)
    }

    #[test]
    fn le_encoding_roundtrips() {
        assert_eq!(roundtrip(0.1f32).to_bits(), 0.1f32.to_bits());
        assert_eq!(roundtrip(-3.5e-7f64).to_bits(), (-3.5e-7f64).to_bits());
    }

    #[test]
    fn f32_is_little_endian() {
        let mut buf = Vec::new();
        1.0f32.write_le(&mut buf);
        assert_eq!(buf, vec![0x00, 0x00, 0x80, 0x3f]);
    }
}
