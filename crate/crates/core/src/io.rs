//! Binary file formats.
//!
//! `TNSR`: magic, version (u32 = 1), order N (u32), N extents (u64), then
//! the entries as little-endian f64 in storage order.
//!
//! `TUKR`: magic, version, N, origin extents (u64×N), core extents (u64×N),
//! core entries, then N factor matrices each as rows (u64), cols (u64) and
//! column-major entries.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::{DenseTensor, Shape, TuckerTensor};

const TENSOR_MAGIC: &[u8; 4] = b"TNSR";
const TUCKER_MAGIC: &[u8; 4] = b"TUKR";
const VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vals: &[f64]) {
    out.reserve(vals.len() * 8);
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format(format!(
                "truncated input while reading {what} at byte {}",
                self.pos
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Format(format!("{what} {v} out of range")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format(format!("{what} length overflows")))?;
        let raw = self.take(bytes, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<usize> {
        let m = self.take(4, "magic")?;
        if m != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32("version")?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let order = self.u32("order")? as usize;
        if order == 0 {
            return Err(Error::Format("order must be at least 1".into()));
        }
        Ok(order)
    }

    fn shape(&mut self, order: usize, what: &str) -> Result<Shape> {
        let dims = (0..order)
            .map(|_| self.u64(what))
            .collect::<Result<Vec<_>>>()?;
        Shape::new(dims).map_err(|e| Error::Format(format!("{what}: {e}")))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn tensor_to_bytes(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * (t.order() + t.data().len()));
    out.extend_from_slice(TENSOR_MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, t.order() as u32);
    for &d in t.dims() {
        put_u64(&mut out, d);
    }
    put_f64s(&mut out, t.data());
    out
}

pub fn tensor_from_bytes(buf: &[u8]) -> Result<DenseTensor> {
    let mut r = Reader { buf, pos: 0 };
    let order = r.header(TENSOR_MAGIC)?;
    let shape = r.shape(order, "extent")?;
    let data = r.f64s(shape.numel(), "tensor data")?;
    r.finish()?;
    DenseTensor::new(shape, data)
}

pub fn tucker_to_bytes(tk: &TuckerTensor) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(TUCKER_MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, tk.core().order() as u32);
    for &d in tk.origin_shape().dims() {
        put_u64(&mut out, d);
    }
    for &d in tk.core().dims() {
        put_u64(&mut out, d);
    }
    put_f64s(&mut out, tk.core().data());
    for f in tk.factors() {
        put_u64(&mut out, f.rows());
        put_u64(&mut out, f.cols());
        put_f64s(&mut out, f.data());
    }
    out
}

pub fn tucker_from_bytes(buf: &[u8]) -> Result<TuckerTensor> {
    let mut r = Reader { buf, pos: 0 };
    let order = r.header(TUCKER_MAGIC)?;
    let origin = r.shape(order, "origin extent")?;
    let core_shape = r.shape(order, "core extent")?;
    let core = DenseTensor::new(core_shape.clone(), r.f64s(core_shape.numel(), "core data")?)?;
    let mut factors = Vec::with_capacity(order);
    for n in 0..order {
        let rows = r.u64("factor rows")?;
        let cols = r.u64("factor cols")?;
        if rows != origin.dims()[n] || cols != core_shape.dims()[n] {
            return Err(Error::Format(format!(
                "factor {} is {rows}x{cols}, header implies {}x{}",
                n + 1,
                origin.dims()[n],
                core_shape.dims()[n]
            )));
        }
        let data = r.f64s(rows * cols, "factor data")?;
        factors.push(Matrix::from_col_major(rows, cols, data)?);
    }
    r.finish()?;
    TuckerTensor::new(core, factors)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    tensor_from_bytes(&read_file(path.as_ref())?)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    write_file(path.as_ref(), &tensor_to_bytes(t))
}

pub fn read_tucker(path: impl AsRef<Path>) -> Result<TuckerTensor> {
    tucker_from_bytes(&read_file(path.as_ref())?)
}

pub fn write_tucker(path: impl AsRef<Path>, tk: &TuckerTensor) -> Result<()> {
    write_file(path.as_ref(), &tucker_to_bytes(tk))
}
