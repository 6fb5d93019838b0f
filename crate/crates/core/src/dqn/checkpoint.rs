//! Binary parameter checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "DQSCHED\0"
//! version    u32      1
//! m          u32      domains on the chain
//! horizon    u32      episode length T
//! scale      f64      staleness normalization constant (T)
//! activation u8       0 = ReLU, 1 = identity
//! n_dims     u32      number of layer widths (layers + 1)
//! dims       u32 x n_dims
//! per layer: weights f64 x (out * in), row-major, then biases f64 x out
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::mlp::{q_network_dims, Activation, Dense, MlpParams};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"DQSCHED\0";
const VERSION: u32 = 1;

/// Parameters plus the scenario facts needed to use them.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub m: usize,
    pub horizon: u64,
    pub params: MlpParams,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        out.extend_from_slice(&(self.horizon as u32).to_le_bytes());
        out.extend_from_slice(&(self.horizon as f64).to_le_bytes());
        out.push(match self.params.hidden_activation {
            Activation::Relu => 0,
            Activation::Identity => 1,
        });
        let dims = self.params.dims();
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for l in &self.params.layers {
            for v in l.weights.iter().chain(&l.biases) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Decodes a checkpoint and checks that its architecture matches the
    /// Q-network for its own `m`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let m = read_u32(&mut r)? as usize;
        let horizon = read_u32(&mut r)? as u64;
        let scale = read_f64(&mut r)?;
        if scale != horizon as f64 {
            return Err(Error::Checkpoint(format!(
                "normalization {scale} does not match horizon {horizon}"
            )));
        }
        let mut act = [0u8; 1];
        read_exact(&mut r, &mut act)?;
        let hidden_activation = match act[0] {
            0 => Activation::Relu,
            1 => Activation::Identity,
            x => return Err(Error::Checkpoint(format!("unknown activation {x}"))),
        };
        let n_dims = read_u32(&mut r)? as usize;
        if n_dims > 64 {
            return Err(Error::Checkpoint(format!("{n_dims} layer widths")));
        }
        let dims = (0..n_dims)
            .map(|_| read_u32(&mut r).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if m < 2 || dims != q_network_dims(m) {
            return Err(Error::Checkpoint(format!(
                "layer widths {dims:?} do not fit a {m}-domain chain"
            )));
        }
        let mut layers = Vec::new();
        for w in dims.windows(2) {
            let mut layer = Dense::zeros(w[0], w[1]);
            for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *v = read_f64(&mut r)?;
            }
            layers.push(layer);
        }
        if !r.is_empty() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", r.len())));
        }
        Ok(Checkpoint {
            m,
            horizon,
            params: MlpParams {
                layers,
                hidden_activation,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Loads and checks the checkpoint against the scenario it will run in.
    pub fn load_for(path: &Path, m: usize, horizon: u64) -> Result<Self> {
        let c = Self::load(path)?;
        if c.m != m || c.horizon != horizon {
            return Err(Error::Checkpoint(format!(
                "checkpoint is for m={}, T={}; scenario has m={m}, T={horizon}",
                c.m, c.horizon
            )));
        }
        Ok(c)
    }
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Checkpoint("truncated file".into()))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut &[u8]) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}
