//! Versioned binary checkpoint container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset size  field
//! 0      8     magic "DKRLCKP1"
//! 8      4     format version (u32) = 1
//! 12     32    SHA-256 of the resolved run config TOML
//! 44     8     training seed (u64)
//! 52     4     completed training iterations (u32)
//! 56     4     history length (u32)
//! 60     4     observation width (u32)
//! 64     4     action width (u32)
//! 68     32    update-RNG seed bytes
//! 100    8     update-RNG stream (u64)
//! 108    16    update-RNG word position (u128)
//! 124    4     actor layer count (u32)
//! ...          per layer: in (u32), out (u32), weights (out*in f64), biases (out f64)
//! ...    4     critic layer count (u32), then layers as above
//! ...          log-std vector (action width f64)
//! ```
//!
//! Parameter order matches `PolicyParams::flatten`, so a checkpoint pins
//! the exact network that produced it.

use anyhow::{bail, Context, Result};
use dockrl_core::learner::{Dense, Mlp, PolicyParams};
use dockrl_core::ChaCha8Rng;
use rand::SeedableRng;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"DKRLCKP1";
pub const VERSION: u32 = 1;

/// Serializable snapshot of the update RNG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: [u8; 32],
    pub train_seed: u64,
    pub iteration: u32,
    pub history_len: u32,
    pub params: PolicyParams,
    pub rng: RngState,
}

impl Checkpoint {
    pub fn obs_dim(&self) -> usize {
        self.params.obs_dim()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut buf = Vec::with_capacity(64 + self.params.flat_len() * 8);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.config_hash);
        buf.extend_from_slice(&self.train_seed.to_le_bytes());
        buf.extend_from_slice(&self.iteration.to_le_bytes());
        buf.extend_from_slice(&self.history_len.to_le_bytes());
        buf.extend_from_slice(&(self.params.obs_dim() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.params.act_dim() as u32).to_le_bytes());
        buf.extend_from_slice(&self.rng.seed);
        buf.extend_from_slice(&self.rng.stream.to_le_bytes());
        buf.extend_from_slice(&self.rng.word_pos.to_le_bytes());
        write_mlp(&mut buf, &self.params.actor);
        write_mlp(&mut buf, &self.params.critic);
        for v in &self.params.log_std {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("creating checkpoint {}", path.display()))?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .with_context(|| format!("opening checkpoint {}", path.display()))?
            .read_to_end(&mut bytes)?;
        let mut r = Reader::new(&bytes);
        let magic = r.take::<8>()?;
        if &magic != MAGIC {
            bail!("{}: not a checkpoint (bad magic)", path.display());
        }
        let version = r.u32()?;
        if version != VERSION {
            bail!(
                "{}: unsupported checkpoint version {version} (expected {VERSION})",
                path.display()
            );
        }
        let config_hash = r.take::<32>()?;
        let train_seed = r.u64()?;
        let iteration = r.u32()?;
        let history_len = r.u32()?;
        let obs_dim = r.u32()? as usize;
        let act_dim = r.u32()? as usize;
        let rng = RngState {
            seed: r.take::<32>()?,
            stream: r.u64()?,
            word_pos: r.u128()?,
        };
        let actor = read_mlp(&mut r)?;
        let critic = read_mlp(&mut r)?;
        let mut log_std = Vec::with_capacity(act_dim);
        for _ in 0..act_dim {
            log_std.push(r.f64()?);
        }
        r.expect_end()?;

        let params = PolicyParams {
            actor,
            critic,
            log_std,
        };
        if params.obs_dim() != obs_dim || params.act_dim() != act_dim {
            bail!("{}: header dims disagree with layer shapes", path.display());
        }
        Ok(Checkpoint {
            config_hash,
            train_seed,
            iteration,
            history_len,
            params,
            rng,
        })
    }
}

fn write_mlp(buf: &mut Vec<u8>, mlp: &Mlp) {
    buf.extend_from_slice(&(mlp.layers.len() as u32).to_le_bytes());
    for layer in &mlp.layers {
        buf.extend_from_slice(&(layer.in_dim as u32).to_le_bytes());
        buf.extend_from_slice(&(layer.out_dim as u32).to_le_bytes());
        for v in &layer.w {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in &layer.b {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn read_mlp(r: &mut Reader<'_>) -> Result<Mlp> {
    let n_layers = r.u32()? as usize;
    if n_layers == 0 || n_layers > 64 {
        bail!("implausible layer count {n_layers}");
    }
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let in_dim = r.u32()? as usize;
        let out_dim = r.u32()? as usize;
        if in_dim == 0 || out_dim == 0 || in_dim * out_dim > 16_000_000 {
            bail!("implausible layer shape {in_dim}x{out_dim}");
        }
        let mut w = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..in_dim * out_dim {
            w.push(r.f64()?);
        }
        let mut b = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            b.push(r.f64()?);
        }
        layers.push(Dense {
            in_dim,
            out_dim,
            w,
            b,
        });
    }
    Ok(Mlp { layers })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.pos + N > self.bytes.len() {
            bail!("checkpoint truncated at byte {}", self.pos);
        }
        let mut out = [0u8; N];
        out.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take::<4>()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take::<8>()?))
    }

    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take::<16>()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take::<8>()?))
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            bail!(
                "checkpoint has {} trailing bytes",
                self.bytes.len() - self.pos
            );
        }
        Ok(())
    }
}
