//! Checkpoint files: magic `MFHG1`, then depth, base channels and head id as
//! little-endian `u32`, then every tensor as little-endian `f32` in layout
//! order.

use std::fs;
use std::path::Path;

use super::params::{Head, HourglassConfig, Parameters, Tensor};
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"MFHG1";

pub fn encode_checkpoint(params: &Parameters) -> Vec<u8> {
    let cfg = params.config();
    let mut out = Vec::with_capacity(MAGIC.len() + 12 + params.count() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(cfg.depth as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.base_channels as u32).to_le_bytes());
    out.extend_from_slice(&cfg.head.id().to_le_bytes());
    for t in params.tensors() {
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Parameters, HourglassConfig)> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let header = &bytes[MAGIC.len()..];
    if header.len() < 12 {
        return Err(Error::Format("truncated header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[4 * i..4 * i + 4].try_into().unwrap());
    let head = Head::from_id(word(2)).ok_or_else(|| Error::Format(format!("unknown head id {}", word(2))))?;
    let config = HourglassConfig {
        depth: word(0) as usize,
        base_channels: word(1) as usize,
        head,
    };
    config
        .validate()
        .map_err(|e| Error::Format(format!("invalid configuration: {e}")))?;
    let body = &header[12..];
    let shapes = config.tensor_shapes();
    let total: usize = shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    if body.len() < total * 4 {
        return Err(Error::Format(format!(
            "truncated tensor data: {} bytes, expected {}",
            body.len(),
            total * 4
        )));
    }
    if body.len() > total * 4 {
        return Err(Error::Format("trailing bytes after tensor data".into()));
    }
    let mut floats = body.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap()));
    let mut tensors = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let n = shape.iter().product();
        tensors.push(Tensor::new(shape, floats.by_ref().take(n).collect())?);
    }
    let params = Parameters::from_tensors(config, tensors).map_err(|e| Error::Format(e.to_string()))?;
    Ok((params, config))
}

pub fn save_checkpoint(params: &Parameters, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_checkpoint(params))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Parameters, HourglassConfig)> {
    decode_checkpoint(&fs::read(path)?)
}

/// Loads a checkpoint and checks it against an expected configuration.
pub fn load_checkpoint_expecting(path: impl AsRef<Path>, expected: &HourglassConfig) -> Result<Parameters> {
    let (params, config) = load_checkpoint(path)?;
    if config != *expected {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint holds {config:?}, expected {expected:?}"
        )));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::params::init_parameters;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(depth: usize) -> Parameters {
        let cfg = HourglassConfig {
            depth,
            base_channels: 4,
            head: Head::Seg,
        };
        init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mfhg");
        let p = params(2);
        save_checkpoint(&p, &path).unwrap();
        let (q, cfg) = load_checkpoint(&path).unwrap();
        assert_eq!(cfg, *p.config());
        for (a, b) in p.tensors().iter().zip(q.tensors()) {
            assert!(a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let bytes = encode_checkpoint(&params(2));
        for cut in [0, 3, 10, bytes.len() - 1] {
            assert!(matches!(decode_checkpoint(&bytes[..cut]), Err(Error::Format(_))));
        }
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_checkpoint(&params(2));
        bytes[0] = b'X';
        assert!(matches!(decode_checkpoint(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn depth_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mfhg");
        save_checkpoint(&params(3), &path).unwrap();
        let expected = HourglassConfig {
            depth: 2,
            base_channels: 4,
            head: Head::Seg,
        };
        assert!(matches!(
            load_checkpoint_expecting(&path, &expected),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
