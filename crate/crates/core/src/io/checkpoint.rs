use std::fs;
use std::path::Path;

use crate::error::{CheckpointError, Error, Result};
use crate::solver::AcState;
use crate::spectral::{Field, Grid3, VectorField};

pub const MAGIC: [u8; 8] = *b"ACMHD001";
const HEADER_LEN: usize = 8 + 4 + 4 * 8;
const BLOCKS: usize = 8;

/// Physical-space image of an [`AcState`], exactly as stored on disk.
///
/// Blocks are `u_x, u_y, u_z, B_x, B_y, B_z, p, φ`, each `N³` samples in
/// x-fastest order.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub box_length: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub time: f64,
    pub blocks: Vec<Vec<f64>>,
}

impl Checkpoint {
    pub fn from_state(s: &AcState) -> Result<Self> {
        let g = s.grid();
        let mut blocks = Vec::with_capacity(BLOCKS);
        for v in [s.u(), s.b()] {
            for c in v.to_physical()?.components() {
                blocks.push(c.physical()?.to_vec());
            }
        }
        for f in [s.p(), s.phi()] {
            blocks.push(f.to_physical()?.physical()?.to_vec());
        }
        Ok(Self {
            n: g.n(),
            box_length: g.length(),
            epsilon: s.epsilon(),
            mu: s.mu(),
            time: s.time(),
            blocks,
        })
    }

    pub fn grid(&self) -> Result<Grid3> {
        Grid3::new(self.n, self.box_length)
    }

    pub fn to_state(&self) -> Result<AcState> {
        let g = self.grid()?;
        let field = |i: usize| Field::from_physical(&g, self.blocks[i].clone());
        let u = VectorField::new([field(0)?, field(1)?, field(2)?])?;
        let b = VectorField::new([field(3)?, field(4)?, field(5)?])?;
        AcState::new(u, b, field(6)?, field(7)?, self.epsilon, self.mu, self.time)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let len = self.n.pow(3);
        let mut out = Vec::with_capacity(HEADER_LEN + BLOCKS * len * 8);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for v in [self.box_length, self.epsilon, self.mu, self.time] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for b in &self.blocks {
            for v in b {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, CheckpointError> {
        if bytes.len() < 8 || bytes[..8] != MAGIC {
            let mut found = [0u8; 8];
            let k = bytes.len().min(8);
            found[..k].copy_from_slice(&bytes[..k]);
            return Err(CheckpointError::Magic { found });
        }
        if bytes.len() < HEADER_LEN {
            return Err(CheckpointError::Size {
                expected: HEADER_LEN as u64,
                found: bytes.len() as u64,
            });
        }
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if n < 8 || !n.is_power_of_two() || n > 1 << 10 {
            return Err(CheckpointError::Header(format!("grid size {n} is not a supported power of two")));
        }
        let (box_length, epsilon, mu, time) = (f64_at(12), f64_at(20), f64_at(28), f64_at(36));
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(CheckpointError::Header(format!("box length {box_length}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(CheckpointError::Header(format!("epsilon {epsilon}")));
        }
        if !(mu.is_finite() && mu >= 0.0) || !time.is_finite() {
            return Err(CheckpointError::Header(format!("mu {mu}, time {time}")));
        }
        let len = n.pow(3);
        let expected = (HEADER_LEN + BLOCKS * len * 8) as u64;
        if bytes.len() as u64 != expected {
            return Err(CheckpointError::Size {
                expected,
                found: bytes.len() as u64,
            });
        }
        let blocks = bytes[HEADER_LEN..]
            .chunks_exact(len * 8)
            .map(|block| {
                block
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            box_length,
            epsilon,
            mu,
            time,
            blocks,
        })
    }
}

pub fn write_checkpoint(s: &AcState, path: &Path) -> Result<()> {
    fs::write(path, Checkpoint::from_state(s)?.to_bytes())?;
    Ok(())
}

/// Reads a checkpoint; when `expect` is given the stored grid must match it.
pub fn read_checkpoint(path: &Path, expect: Option<&Grid3>) -> Result<Checkpoint> {
    let bytes = fs::read(path)?;
    let wrap = |kind| Error::Checkpoint {
        path: path.to_path_buf(),
        kind,
    };
    let c = Checkpoint::from_bytes(&bytes).map_err(wrap)?;
    if let Some(g) = expect {
        if g.n() != c.n {
            return Err(wrap(CheckpointError::GridSize {
                expected: g.n(),
                found: c.n,
            }));
        }
    }
    Ok(c)
}
