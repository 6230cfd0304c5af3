//! JSON-lines manifests.
//!
//! * Dataset manifests list sources of segmented samples, either
//!   `{image_path, mask_path}` file pairs or procedural descriptions
//!   `{seed, count, width, height, n_objects}`.
//! * Synthesis manifests list generated examples.
//! * Evaluation manifests list `(A, B, F[, reference])` image records.
//!
//! Relative paths are resolved against the manifest's directory.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{generate_procedural_sample, load::load_pair, synth::example_rng, SegmentedSample};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DatasetRecord {
    Files {
        image_path: PathBuf,
        mask_path: PathBuf,
    },
    Procedural {
        seed: u64,
        count: usize,
        width: usize,
        height: usize,
        n_objects: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthRecord {
    pub id: String,
    pub source_a: PathBuf,
    pub source_b: PathBuf,
    pub truth: PathBuf,
    pub target: PathBuf,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub source_a: PathBuf,
    pub source_b: PathBuf,
    /// Fused image; may be absent when only the bias study is run.
    #[serde(default)]
    pub fused: Option<PathBuf>,
    #[serde(default, alias = "truth")]
    pub reference: Option<PathBuf>,
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let file = fs::File::open(path.as_ref())?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| invalid(format!("line {}: {e}", n + 1)))?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Expands a procedural record into its samples; sample `i` uses the stream
/// `seed ⊕ i`.
pub fn procedural_samples(seed: u64, count: usize, width: usize, height: usize, n_objects: usize) -> Result<Vec<SegmentedSample>> {
    let samples = crate::par::map_range(count, |i| {
        generate_procedural_sample(width, height, n_objects, &mut example_rng(seed, i as u64))
    });
    samples.into_iter().collect()
}

pub fn load_dataset_manifest(path: impl AsRef<Path>) -> Result<Vec<SegmentedSample>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for record in read_jsonl::<DatasetRecord>(path)? {
        match record {
            DatasetRecord::Files { image_path, mask_path } => {
                out.push(load_pair(&resolve(base, &image_path), &resolve(base, &mask_path))?)
            }
            DatasetRecord::Procedural {
                seed,
                count,
                width,
                height,
                n_objects,
            } => out.extend(procedural_samples(seed, count, width, height, n_objects)?),
        }
    }
    Ok(out)
}
