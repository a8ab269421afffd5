//! Little-endian binary tensor formats.
//!
//! ```text
//! DTEN: "DTEN" | u32 k | k × u64 dims | total × f64 values (row-major)
//! STEN: "STEN" | u32 k | k × u64 dims | u64 nnz | nnz × (u64 offset, f64 value), offsets ascending
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape, SparseTensor};

pub const DENSE_MAGIC: &[u8; 4] = b"DTEN";
pub const SPARSE_MAGIC: &[u8; 4] = b"STEN";

/// Either on-disk tensor kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Dense(DenseTensor),
    Sparse(SparseTensor),
}

impl AnyTensor {
    pub fn shape(&self) -> &Shape {
        match self {
            AnyTensor::Dense(t) => t.shape(),
            AnyTensor::Sparse(t) => t.shape(),
        }
    }

    pub fn into_dense(self) -> DenseTensor {
        match self {
            AnyTensor::Dense(t) => t,
            AnyTensor::Sparse(t) => t.to_dense(),
        }
    }
}

fn write_header(w: &mut impl Write, magic: &[u8; 4], shape: &Shape) -> std::io::Result<()> {
    w.write_all(magic)?;
    w.write_all(&(shape.order() as u32).to_le_bytes())?;
    for &d in shape.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_dense(w: &mut impl Write, t: &DenseTensor) -> std::io::Result<()> {
    write_header(w, DENSE_MAGIC, t.shape())?;
    for v in t.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_sparse(w: &mut impl Write, t: &SparseTensor) -> std::io::Result<()> {
    write_header(w, SPARSE_MAGIC, t.shape())?;
    w.write_all(&(t.nnz() as u64).to_le_bytes())?;
    for &(l, v) in t.entries() {
        w.write_all(&(l as u64).to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn dense_to_bytes(t: &DenseTensor) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 8 * t.shape().order() + 8 * t.values().len());
    write_dense(&mut buf, t).expect("writing to a Vec cannot fail");
    buf
}

pub fn sparse_to_bytes(t: &SparseTensor) -> Vec<u8> {
    let mut buf = Vec::with_capacity(24 + 8 * t.shape().order() + 16 * t.nnz());
    write_sparse(&mut buf, t).expect("writing to a Vec cannot fail");
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Format {
            offset: offset as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(
                self.bytes.len(),
                format!("truncated while reading {what} ({n} bytes needed at {})", self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<Shape> {
        let m = self.take(4, "magic")?;
        if m != magic {
            return Err(self.err(0, format!(
                "expected magic {:?}, found {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(m)
            )));
        }
        let k_off = self.pos;
        let k = self.u32("order")? as usize;
        if k == 0 {
            return Err(self.err(k_off, "order must be at least 1"));
        }
        if k > self.remaining() / 8 {
            return Err(self.err(k_off, format!("order {k} exceeds the remaining file size")));
        }
        let dims_off = self.pos;
        let mut dims = Vec::with_capacity(k);
        for j in 0..k {
            let off = self.pos;
            let d = self.u64("dimension")?;
            if d == 0 {
                return Err(self.err(off, format!("dimension {} is zero", j + 1)));
            }
            dims.push(usize::try_from(d).map_err(|_| self.err(off, "dimension exceeds address space"))?);
        }
        Shape::new(dims).map_err(|e| self.err(dims_off, e.to_string()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.err(self.pos, format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn read_dense(bytes: &[u8]) -> Result<DenseTensor> {
    let mut r = Reader { bytes, pos: 0 };
    let shape = r.header(DENSE_MAGIC)?;
    if shape.total() > r.remaining() / 8 {
        return Err(r.err(bytes.len(), format!(
            "truncated: {} values need {} bytes, {} remain",
            shape.total(),
            shape.total().saturating_mul(8),
            r.remaining()
        )));
    }
    let mut values = Vec::with_capacity(shape.total());
    for _ in 0..shape.total() {
        let off = r.pos;
        let v = r.f64("value")?;
        if !v.is_finite() {
            return Err(r.err(off, format!("non-finite value {v}")));
        }
        values.push(v);
    }
    r.finish()?;
    DenseTensor::new(shape, values)
}

pub fn read_sparse(bytes: &[u8]) -> Result<SparseTensor> {
    let mut r = Reader { bytes, pos: 0 };
    let shape = r.header(SPARSE_MAGIC)?;
    let nnz_off = r.pos;
    let nnz = r.u64("nnz")?;
    if nnz > (r.remaining() / 16) as u64 {
        return Err(r.err(nnz_off, format!("nnz {nnz} exceeds the remaining file size")));
    }
    let mut entries = Vec::with_capacity(nnz as usize);
    let mut prev: Option<u64> = None;
    for _ in 0..nnz {
        let off = r.pos;
        let l = r.u64("offset")?;
        let v = r.f64("value")?;
        if l >= shape.total() as u64 {
            return Err(r.err(off, format!("offset {l} out of range for {} cells", shape.total())));
        }
        if prev.is_some_and(|p| p >= l) {
            return Err(r.err(off, format!("offset {l} not strictly increasing")));
        }
        if !v.is_finite() || v == 0.0 {
            return Err(r.err(off + 8, format!("stored value {v} must be finite and nonzero")));
        }
        prev = Some(l);
        entries.push((l as usize, v));
    }
    r.finish()?;
    SparseTensor::new(shape, entries)
}

/// Reads either format, dispatching on the magic.
pub fn read_any(bytes: &[u8]) -> Result<AnyTensor> {
    match bytes.get(..4) {
        Some(m) if m == DENSE_MAGIC => read_dense(bytes).map(AnyTensor::Dense),
        Some(m) if m == SPARSE_MAGIC => read_sparse(bytes).map(AnyTensor::Sparse),
        _ => Err(Error::Format {
            offset: 0,
            message: "unrecognized magic (expected DTEN or STEN)".into(),
        }),
    }
}

pub fn load_dense(path: impl AsRef<Path>) -> Result<DenseTensor> {
    read_dense(&fs::read(path)?)
}

pub fn load_sparse(path: impl AsRef<Path>) -> Result<SparseTensor> {
    read_sparse(&fs::read(path)?)
}

pub fn load_any(path: impl AsRef<Path>) -> Result<AnyTensor> {
    read_any(&fs::read(path)?)
}

pub fn save_dense(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, dense_to_bytes(t))?;
    Ok(())
}

pub fn save_sparse(path: impl AsRef<Path>, t: &SparseTensor) -> Result<()> {
    fs::write(path, sparse_to_bytes(t))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DenseTensor {
        DenseTensor::from_fn(Shape::new(vec![2, 3, 2]).unwrap(), |i| {
            if i[1] == 1 { 0.0 } else { i[0] as f64 - 0.25 * i[2] as f64 + 1.5 }
        })
        .unwrap()
    }

    #[test]
    fn dense_layout_is_exact() {
        let t = DenseTensor::new(Shape::new(vec![2]).unwrap(), vec![1.0, -2.0]).unwrap();
        let b = dense_to_bytes(&t);
        let mut want = b"DTEN".to_vec();
        want.extend(1u32.to_le_bytes());
        want.extend(2u64.to_le_bytes());
        want.extend(1.0f64.to_le_bytes());
        want.extend((-2.0f64).to_le_bytes());
        assert_eq!(b, want);
    }

    #[test]
    fn sparse_layout_is_exact() {
        let t = SparseTensor::new(Shape::new(vec![2, 2]).unwrap(), vec![(3, 4.5)]).unwrap();
        let b = sparse_to_bytes(&t);
        let mut want = b"STEN".to_vec();
        want.extend(2u32.to_le_bytes());
        want.extend(2u64.to_le_bytes());
        want.extend(2u64.to_le_bytes());
        want.extend(1u64.to_le_bytes());
        want.extend(3u64.to_le_bytes());
        want.extend(4.5f64.to_le_bytes());
        assert_eq!(b, want);
    }

    #[test]
    fn round_trips() {
        let t = sample();
        assert_eq!(read_dense(&dense_to_bytes(&t)).unwrap(), t);
        let s = t.to_sparse();
        assert_eq!(read_sparse(&sparse_to_bytes(&s)).unwrap(), s);
        assert_eq!(read_any(&sparse_to_bytes(&s)).unwrap(), AnyTensor::Sparse(s));
    }

    fn format_offset(e: Error) -> u64 {
        match e {
            Error::Format { offset, .. } => offset,
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        let good = dense_to_bytes(&sample());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(format_offset(read_dense(&bad).unwrap_err()), 0);

        let truncated = &good[..good.len() - 3];
        assert_eq!(format_offset(read_dense(truncated).unwrap_err()), truncated.len() as u64);

        let mut zero_dim = good.clone();
        zero_dim[8..16].copy_from_slice(&0u64.to_le_bytes());
        assert_eq!(format_offset(read_dense(&zero_dim).unwrap_err()), 8);

        let mut nan = good.clone();
        let off = 8 + 3 * 8;
        nan[off..off + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert_eq!(format_offset(read_dense(&nan).unwrap_err()), off as u64);

        let mut trailing = good.clone();
        trailing.push(0);
        assert_eq!(format_offset(read_dense(&trailing).unwrap_err()), good.len() as u64);

        let mut order = good;
        order[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
        assert_eq!(format_offset(read_dense(&order).unwrap_err()), 4);

        assert_eq!(format_offset(read_any(b"ab").unwrap_err()), 0);
    }

    #[test]
    fn unsorted_sparse_rejected() {
        let s = sample().to_sparse();
        let mut b = sparse_to_bytes(&s);
        let first = 4 + 4 + 3 * 8 + 8;
        let second = first + 16;
        let (x, y) = (b[first..first + 8].to_vec(), b[second..second + 8].to_vec());
        b[first..first + 8].copy_from_slice(&y);
        b[second..second + 8].copy_from_slice(&x);
        assert_eq!(format_offset(read_sparse(&b).unwrap_err()), second as u64);
    }
}
