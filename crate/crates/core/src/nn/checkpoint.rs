//! Flat binary network checkpoints.
//!
//! ```text
//! offset  size            field
//! 0       8               magic  b"UAVQNET\0"
//! 8       4               format version, u32 LE (currently 1)
//! 12      4               layer count L, u32 LE
//! 16      4·(L+1)         layer widths w0..wL, u32 LE
//! ...     8·Σ(wi·wi+1+wi+1)  parameters, f64 LE: for each layer, the
//!                         wi×wi+1 weight matrix row-major (input-major),
//!                         then its wi+1 biases
//! ```
//!
//! Hidden layers use rectified-linear activations and the last layer is
//! linear; the file does not store activations.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::mlp::{Dense, Mlp};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"UAVQNET\0";
pub const VERSION: u32 = 1;

pub fn to_bytes(net: &Mlp) -> Vec<u8> {
    let widths = net.widths();
    let mut out = Vec::with_capacity(16 + 4 * widths.len() + 8 * net.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&((widths.len() - 1) as u32).to_le_bytes());
    for w in &widths {
        out.extend_from_slice(&(*w as u32).to_le_bytes());
    }
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Mlp, String> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let layers = cur.u32()? as usize;
    if layers == 0 || layers > 64 {
        return Err(format!("implausible layer count {layers}"));
    }
    let widths = (0..=layers)
        .map(|_| cur.u32().map(|w| w as usize))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut dense = Vec::with_capacity(layers);
    for w in widths.windows(2) {
        let weights = (0..w[0] * w[1]).map(|_| cur.f64()).collect::<std::result::Result<Vec<_>, _>>()?;
        let bias = (0..w[1]).map(|_| cur.f64()).collect::<std::result::Result<Vec<_>, _>>()?;
        dense.push(Dense {
            weights: Array2::from_shape_vec((w[0], w[1]), weights).map_err(|e| e.to_string())?,
            bias: Array1::from(bias),
        });
    }
    if cur.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - cur.pos));
    }
    Mlp::from_layers(dense).map_err(|e| e.to_string())
}

pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Mlp> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes).map_err(|msg| Error::Checkpoint {
        path: path.to_path_buf(),
        msg,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!("truncated at byte {}", self.pos)),
        }
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
