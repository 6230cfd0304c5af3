//! Multi-focus training data: synthesis from segmented images, a procedural
//! scene generator, augmentation and commutative batch assembly.

mod load;
pub mod manifest;
mod procedural;
mod synth;

pub use load::load_segmented_samples;
pub use procedural::generate_procedural_sample;
pub use synth::{
    augment, example_rng, focus_map_from_subset, make_commutative_batch, select_focus_subset,
    synthesize_example, Batch, BatchEntry, SynthesisConfig, TrainingExample,
};

use crate::error::{invalid, Result};
use crate::imaging::Image;

/// Per-pixel object labels; 0 is background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != height * width {
            return Err(invalid("label map length does not match dims"));
        }
        Ok(Self { height, width, labels })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Largest label present (the object count γ).
    pub fn max_label(&self) -> u8 {
        self.labels.iter().copied().max().unwrap_or(0)
    }
}

/// A sharp image with its segmentation mask.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentedSample {
    pub image: Image,
    pub mask: LabelMap,
}

impl SegmentedSample {
    pub fn new(image: Image, mask: LabelMap) -> Result<Self> {
        if image.dims() != mask.dims() {
            return Err(invalid("mask dims differ from image dims"));
        }
        Ok(Self { image, mask })
    }

    pub fn object_count(&self) -> u8 {
        self.mask.max_label()
    }
}
