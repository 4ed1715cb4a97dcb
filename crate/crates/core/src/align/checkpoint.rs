//! Projector checkpoints.
//!
//! ```text
//! "BHVP"  u32 version  u32 header_len  header (JSON, UTF-8)
//! per layer: u32 out  u32 in  f32[out*in] weight (row-major)  f32[out] bias
//! ```
//!
//! Everything little-endian. The JSON header records the layer dims,
//! activation, dropout rate and init seed.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::mlp::Dense;
use super::projector::MlpProjector;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"BHVP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    dims: Vec<usize>,
    activation: String,
    dropout: f64,
    seed: u64,
}

pub fn save_checkpoint<W: Write>(mut sink: W, projector: &MlpProjector) -> Result<()> {
    let header = Header {
        dims: projector.net().dims(),
        activation: "relu".into(),
        dropout: projector.net().dropout(),
        seed: projector.seed(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&json);
    for layer in projector.net().layers() {
        buf.extend_from_slice(&(layer.out_dim as u32).to_le_bytes());
        buf.extend_from_slice(&(layer.in_dim as u32).to_le_bytes());
        for v in layer.weight.iter().chain(&layer.bias) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).ok_or(Error::TruncatedFile(what))?;
        let s = self.bytes.get(self.at..end).ok_or(Error::TruncatedFile(what))?;
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize, what: &'static str) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or(Error::TruncatedFile(what))?, what)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn load_checkpoint<R: Read>(mut source: R) -> Result<MlpProjector> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, at: 0 };
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = cur.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let header_len = cur.u32("header length")? as usize;
    let header: Header = serde_json::from_slice(cur.take(header_len, "header")?)
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.activation != "relu" {
        return Err(Error::MalformedHeader(format!("unsupported activation `{}`", header.activation)));
    }
    if header.dims.len() < 2 {
        return Err(Error::MalformedHeader("fewer than two dims".into()));
    }

    let mut layers = Vec::with_capacity(header.dims.len() - 1);
    for pair in header.dims.windows(2) {
        let out_dim = cur.u32("layer shape")? as usize;
        let in_dim = cur.u32("layer shape")? as usize;
        if (in_dim, out_dim) != (pair[0], pair[1]) {
            return Err(Error::DimMismatch {
                what: "checkpoint layer shape",
                expected: pair[0] * pair[1],
                found: in_dim * out_dim,
            });
        }
        let weight = cur.f32s(in_dim * out_dim, "layer weights")?;
        let bias = cur.f32s(out_dim, "layer bias")?;
        layers.push(Dense {
            in_dim,
            out_dim,
            weight,
            bias,
        });
    }
    if cur.at != bytes.len() {
        return Err(Error::DimMismatch {
            what: "checkpoint trailing bytes",
            expected: 0,
            found: bytes.len() - cur.at,
        });
    }
    MlpProjector::from_layers(layers, header.dropout, header.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(p: &MlpProjector) -> Vec<u32> {
        p.net()
            .layers()
            .iter()
            .flat_map(|l| l.weight.iter().chain(&l.bias).map(|v| v.to_bits()))
            .collect()
    }

    #[test]
    fn truncation_and_magic() {
        let p = MlpProjector::new(&[4, 3, 2], 0.4, 9).unwrap();
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &p).unwrap();
        assert!(matches!(load_checkpoint(&buf[..buf.len() - 1]), Err(Error::TruncatedFile(_))));
        let mut bad = buf.clone();
        bad[3] = b'E';
        assert!(matches!(load_checkpoint(&bad[..]), Err(Error::BadMagic(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(load_checkpoint(&long[..]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn round_trip_is_bit_exact(
            dims in prop::collection::vec(1usize..7, 2..5),
            dropout in 0.0f64..0.9,
            seed in any::<u64>(),
        ) {
            let p = MlpProjector::new(&dims, dropout, seed).unwrap();
            let mut buf = Vec::new();
            save_checkpoint(&mut buf, &p).unwrap();
            let back = load_checkpoint(&buf[..]).unwrap();
            prop_assert_eq!(bits(&back), bits(&p));
            prop_assert_eq!(back.net().dims(), p.net().dims());
            prop_assert_eq!(back.net().dropout().to_bits(), dropout.to_bits());
            prop_assert_eq!(back.seed(), seed);
            let mut again = Vec::new();
            save_checkpoint(&mut again, &back).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
