//! Seeded simulation of the source, the channel and the observed process.
//!
//! Randomness comes from ChaCha20 keyed by `seed_from_u64(seed)`; the source
//! and the channel noise read distinct ChaCha streams of the same key, so a
//! path is reproducible on every platform and the two streams never overlap.
//!
//! # Path files
//!
//! Binary (`.bin`), all integers little-endian:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 3    | magic `BSC`                              |
//! | 3      | 1    | format version, currently `1`            |
//! | 4      | 4    | `N` as `u32`                             |
//! | 8      | 8    | seed as `u64`                            |
//! | 16     | 3·⌈N/8⌉ | packed `x`, then `z`, then `y`        |
//!
//! Symbol `i` of a plane lives in byte `i / 8`, bit `i % 8` (LSB first), with
//! `+1 ↔ 0` and `−1 ↔ 1`; padding bits are zero.
//!
//! CSV: `#`-prefixed metadata lines (first one `# schema_version=1`), then the
//! header `i,x,z,y` and one row per symbol with values `1` or `-1`.

use std::io::{BufRead, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{validate_params, ChannelParams};
use crate::spin::{PackedSpins, Spin, SpinSequence};

pub const PATH_MAGIC: &[u8; 3] = b"BSC";
pub const PATH_FORMAT_VERSION: u8 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Recorded in run metadata next to every seed.
pub const GENERATOR_DESCRIPTION: &str = "ChaCha20 (rand_chacha 0.9), key = seed_from_u64(seed), stream 1 = source, stream 2 = noise";

/// ChaCha stream ids of the two independent random sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Source,
    Noise,
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Source => 1,
            Stream::Noise => 2,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Hidden chain, channel noise and observation, with `y_i = x_i·z_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulatedPath {
    pub x: SpinSequence,
    pub z: SpinSequence,
    pub y: SpinSequence,
    pub seed: u64,
}

impl SimulatedPath {
    /// Checks lengths and `y = x ⊙ z`.
    pub fn new(x: SpinSequence, z: SpinSequence, y: SpinSequence, seed: u64) -> Result<Self> {
        if x.len() != z.len() || x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: if x.len() != z.len() { z.len() } else { y.len() },
            });
        }
        if x.iter().zip(z.iter()).zip(y.iter()).any(|((&a, &b), &c)| a * b != c) {
            return Err(Error::InvalidArgument("observation is not x·z".into()));
        }
        Ok(Self { x, z, y, seed })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// SHA-256 over the packed `x`, `z`, `y` planes, hex encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for plane in [&self.x, &self.z, &self.y] {
            hasher.update(PackedSpins::pack(plane).as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(())
}

/// Stationary symmetric chain with `P(x_{i+1} ≠ x_i) = p` and uniform `x_0`.
pub fn sample_markov(p: f64, n: usize, seed: u64) -> Result<SpinSequence> {
    validate_params(p, 0.5)?;
    check_len(n)?;
    let mut rng = stream_rng(seed, Stream::Source);
    let mut current = if rng.random::<bool>() { Spin::Plus } else { Spin::Minus };
    let mut out = Vec::with_capacity(n);
    out.push(current);
    for _ in 1..n {
        if rng.random_bool(p) {
            current = current.flip();
        }
        out.push(current);
    }
    SpinSequence::from_spins(out)
}

/// Passes `x` through the channel: `z_i = −1` with probability `epsilon`.
pub fn transmit(x: &SpinSequence, epsilon: f64, seed: u64) -> Result<SimulatedPath> {
    validate_params(0.5, epsilon)?;
    let mut rng = stream_rng(seed, Stream::Noise);
    let z: Vec<Spin> = (0..x.len())
        .map(|_| if rng.random_bool(epsilon) { Spin::Minus } else { Spin::Plus })
        .collect();
    let y: Vec<Spin> = x.iter().zip(&z).map(|(&a, &b)| a * b).collect();
    Ok(SimulatedPath {
        x: x.clone(),
        z: SpinSequence::new(x.start(), z)?,
        y: SpinSequence::new(x.start(), y)?,
        seed,
    })
}

/// Source followed by channel, both driven by `seed` on separate streams.
pub fn generate_dataset(params: &ChannelParams, n: usize, seed: u64) -> Result<SimulatedPath> {
    let x = sample_markov(params.p(), n, seed)?;
    transmit(&x, params.epsilon(), seed)
}

pub fn write_path_binary<W: Write>(path: &SimulatedPath, mut w: W) -> Result<()> {
    let n = u32::try_from(path.len())
        .map_err(|_| Error::InvalidArgument(format!("path of length {} does not fit the header", path.len())))?;
    let mut buf = Vec::with_capacity(16 + 3 * path.len().div_ceil(8));
    buf.extend_from_slice(PATH_MAGIC);
    buf.push(PATH_FORMAT_VERSION);
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&path.seed.to_le_bytes());
    for plane in [&path.x, &path.z, &path.y] {
        buf.extend_from_slice(PackedSpins::pack(plane).as_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_path_binary<R: Read>(mut r: R) -> Result<SimulatedPath> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header).map_err(io_err)?;
    if &header[..3] != PATH_MAGIC {
        return Err(Error::InvalidArgument("bad magic, not a path file".into()));
    }
    if header[3] != PATH_FORMAT_VERSION {
        return Err(Error::InvalidArgument(format!("unsupported path format version {}", header[3])));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(header[8..16].try_into().unwrap());
    check_len(n)?;
    let plane_len = n.div_ceil(8);
    let mut planes = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut bytes = vec![0u8; plane_len];
        r.read_exact(&mut bytes).map_err(io_err)?;
        planes.push(SpinSequence::from_spins(PackedSpins::from_bytes(n, bytes)?.unpack())?);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(io_err)?;
    if !rest.is_empty() {
        return Err(Error::InvalidArgument(format!("{} trailing bytes after path planes", rest.len())));
    }
    let y = planes.pop().unwrap();
    let z = planes.pop().unwrap();
    let x = planes.pop().unwrap();
    SimulatedPath::new(x, z, y, seed)
}

/// CSV export; `metadata` lines are written as `# key=value` after the schema line.
pub fn write_path_csv<W: Write>(path: &SimulatedPath, metadata: &[(String, String)], mut w: W) -> Result<()> {
    let mut out = String::with_capacity(16 * path.len() + 256);
    out.push_str(&format!("# schema_version={CSV_SCHEMA_VERSION}\n"));
    out.push_str(&format!("# seed={}\n", path.seed));
    for (k, v) in metadata {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str("i,x,z,y\n");
    for i in 0..path.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i,
            path.x[i].value(),
            path.z[i].value(),
            path.y[i].value()
        ));
    }
    w.write_all(out.as_bytes()).map_err(io_err)
}

pub fn read_path_csv<R: BufRead>(r: R) -> Result<SimulatedPath> {
    let mut seed = None;
    let mut header_seen = false;
    let (mut x, mut z, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some(v) = meta.trim().strip_prefix("seed=") {
                seed = Some(v.parse().map_err(|_| bad_line(lineno, "seed"))?);
            }
            continue;
        }
        if !header_seen {
            if line != "i,x,z,y" {
                return Err(bad_line(lineno, "header"));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 || cols[0].parse::<usize>().ok() != Some(x.len()) {
            return Err(bad_line(lineno, "row"));
        }
        let spin = |s: &str| -> Result<Spin> {
            Spin::try_from(s.parse::<i64>().map_err(|_| bad_line(lineno, "spin"))?)
        };
        x.push(spin(cols[1])?);
        z.push(spin(cols[2])?);
        y.push(spin(cols[3])?);
    }
    SimulatedPath::new(
        SpinSequence::from_spins(x)?,
        SpinSequence::from_spins(z)?,
        SpinSequence::from_spins(y)?,
        seed.unwrap_or(0),
    )
}

fn bad_line(lineno: usize, what: &str) -> Error {
    Error::InvalidArgument(format!("line {}: malformed {what}", lineno + 1))
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("i/o error: {e}"))
}
