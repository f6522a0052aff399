//! Binary cache for unaugmented decompositions.
//!
//! Layout (little-endian): `"FRLB1"`, `u32 N`, `u8 layout`, `u8 bc`, `f64 α`,
//! `f64 β`, `f64[N]` eigenvalues, `f64[N·N]` eigenvectors column-major, then a
//! `u64` FNV-1a checksum over every byte between the magic and the checksum.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{FracError, Result};
use crate::grid::DiscreteOperator;
use crate::spectral::{decompose, Augmentation, SpectralDecomposition};

pub const MAGIC: &[u8; 5] = b"FRLB1";
const HEADER_LEN: usize = 4 + 1 + 1 + 8 + 8;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn encode(dec: &SpectralDecomposition) -> Result<Vec<u8>> {
    if dec.augmentation() != Augmentation::None {
        return Err(FracError::Cache("only unaugmented decompositions are cached".into()));
    }
    let n = dec.len();
    let n32 = u32::try_from(n).map_err(|_| FracError::Cache(format!("size {n} does not fit in u32")))?;
    let mut buf = Vec::with_capacity(MAGIC.len() + HEADER_LEN + 8 * (n + n * n) + 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&n32.to_le_bytes());
    buf.push(dec.grid().layout().code());
    buf.push(dec.bc().code());
    buf.extend_from_slice(&dec.grid().lower().to_le_bytes());
    buf.extend_from_slice(&dec.grid().upper().to_le_bytes());
    for x in dec.eigenvalues().iter().chain(dec.eigenvector_matrix()) {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let sum = fnv1a64(&buf[MAGIC.len()..]);
    buf.extend_from_slice(&sum.to_le_bytes());
    Ok(buf)
}

fn read_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect()
}

/// Decodes a cache image and binds it to `op`, which must describe the same
/// grid and boundary condition.
pub fn decode(bytes: &[u8], op: &DiscreteOperator) -> Result<SpectralDecomposition> {
    let bad = |msg: &str| FracError::Cache(msg.to_string());
    if bytes.len() < MAGIC.len() + HEADER_LEN + 8 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(bad("missing FRLB1 header"));
    }
    let (payload, tail) = bytes[MAGIC.len()..].split_at(bytes.len() - MAGIC.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8-byte tail"));
    if fnv1a64(payload) != stored {
        return Err(bad("checksum mismatch"));
    }
    let n = u32::from_le_bytes(payload[0..4].try_into().expect("u32")) as usize;
    let layout = payload[4];
    let bc = payload[5];
    let lower = f64::from_le_bytes(payload[6..14].try_into().expect("f64"));
    let upper = f64::from_le_bytes(payload[14..22].try_into().expect("f64"));
    let body = &payload[HEADER_LEN..];
    if body.len() != 8 * (n + n * n) {
        return Err(bad("payload length does not match N"));
    }
    let grid = op.grid();
    if n != op.len()
        || layout != grid.layout().code()
        || bc != op.spec().bc.code()
        || lower.to_bits() != grid.lower().to_bits()
        || upper.to_bits() != grid.upper().to_bits()
    {
        return Err(bad("cached decomposition describes a different grid or boundary condition"));
    }
    let eigenvalues = read_f64s(&body[..8 * n]);
    let eigenvectors = read_f64s(&body[8 * n..]);
    Ok(SpectralDecomposition::from_parts(eigenvalues, eigenvectors, grid.clone(), op.spec().clone()))
}

/// Directory-backed cache keyed by operator description.
#[derive(Debug, Clone)]
pub struct DecompositionCache {
    dir: PathBuf,
}

impl DecompositionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DecompositionCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File for `op`; the key covers grid, boundary condition and coefficient labels.
    pub fn path_for(&self, op: &DiscreteOperator) -> PathBuf {
        let g = op.grid();
        let key = format!(
            "n={};layout={};lo={:016x};hi={:016x};{}",
            g.len(),
            g.layout().code(),
            g.lower().to_bits(),
            g.upper().to_bits(),
            op.spec().label()
        );
        self.dir.join(format!("dec-{:016x}.frlb", fnv1a64(key.as_bytes())))
    }

    /// Loads the cached decomposition for `op`, decomposing and storing it on a miss.
    /// Corrupt entries are recomputed and overwritten. Returns whether it was a hit.
    pub fn load_or_decompose(&self, op: &DiscreteOperator) -> Result<(SpectralDecomposition, bool)> {
        let path = self.path_for(op);
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(dec) = decode(&bytes, op) {
                return Ok((dec, true));
            }
        }
        let dec = decompose(op)?;
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("frlb.tmp");
        fs::write(&tmp, encode(&dec)?)?;
        fs::rename(&tmp, &path)?;
        Ok((dec, false))
    }
}
