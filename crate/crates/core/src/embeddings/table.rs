//! Id-keyed embedding matrices and the BHVE file format.
//!
//! Layout, all little-endian:
//!
//! | offset | size          | field                          |
//! |--------|---------------|--------------------------------|
//! | 0      | 4             | magic `BHVE`                   |
//! | 4      | 4             | version (`u32`, currently 1)   |
//! | 8      | 4             | row count (`u32`)              |
//! | 12     | 4             | dim (`u32`)                    |
//! | 16     | 4·count·dim   | row-major `f32` values         |
//!
//! Row ids are not stored; they come from the sibling window manifest, in the
//! same order.

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"BHVE";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, ids: Vec<String>, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(crate::error::invalid("embedding dim must be positive"));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimMismatch {
                what: "table values",
                expected: ids.len() * dim,
                found: data.len(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if let Some(bad) = data.chunks(dim).position(|row| row.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { dim, ids, data })
    }

    pub fn empty(dim: usize) -> Self {
        assert!(dim > 0, "embedding dim must be positive");
        Self {
            dim,
            ids: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = (String, Vec<f32>)>) -> Result<Self> {
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (id, row) in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    what: "row length",
                    expected: dim,
                    found: row.len(),
                });
            }
            ids.push(id);
            data.extend(row);
        }
        Self::new(dim, ids, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Writes the BHVE payload. Ids are not part of it.
    pub fn write<W: Write>(&self, sink: W) -> Result<()> {
        write_matrix(sink, self.len(), self.dim, &self.data)
    }

    /// Reads a BHVE payload whose rows are named by `ids`, in order.
    pub fn read<R: Read>(source: R, ids: Vec<String>) -> Result<Self> {
        let m = read_matrix(source)?;
        if m.count != ids.len() {
            return Err(Error::DimMismatch {
                what: "manifest rows vs table header",
                expected: ids.len(),
                found: m.count,
            });
        }
        Self::new(m.dim, ids, m.data)
    }

    /// Reads a BHVE payload, naming rows by their index.
    pub fn read_anonymous<R: Read>(source: R) -> Result<Self> {
        let m = read_matrix(source)?;
        let ids = (0..m.count).map(|i| i.to_string()).collect();
        Self::new(m.dim, ids, m.data)
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            ids,
            data,
        }
    }
}

/// A bare BHVE matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMatrix {
    pub count: usize,
    pub dim: usize,
    pub data: Vec<f32>,
}

pub fn write_matrix<W: Write>(mut sink: W, count: usize, dim: usize, data: &[f32]) -> Result<()> {
    assert_eq!(data.len(), count * dim);
    let to_u32 = |v: usize, what: &'static str| {
        u32::try_from(v).map_err(|_| Error::DimMismatch {
            what,
            expected: u32::MAX as usize,
            found: v,
        })
    };
    let mut buf = Vec::with_capacity(HEADER_LEN + data.len() * 4);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&to_u32(count, "row count")?.to_le_bytes());
    buf.extend_from_slice(&to_u32(dim, "dim")?.to_le_bytes());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(mut source: R) -> Result<RawMatrix> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile("magic"));
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile("header"));
    }
    let field = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = field(4);
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let count = field(8) as usize;
    let dim = field(12) as usize;
    let payload = &bytes[HEADER_LEN..];
    let expected = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or(Error::TruncatedFile("row data"))?;
    if payload.len() < expected {
        return Err(Error::TruncatedFile("row data"));
    }
    if payload.len() > expected {
        return Err(Error::DimMismatch {
            what: "payload bytes",
            expected,
            found: payload.len(),
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(RawMatrix { count, dim, data })
}
