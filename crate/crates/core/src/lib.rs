//! Multi-focus image fusion with multiple-source hourglass networks.
//!
//! The crate covers the whole pipeline: synthesizing multi-focus training
//! pairs from segmented images, training an encoder-decoder network that
//! either predicts a per-pixel focus map (segmentation head) or regresses the
//! all-in-focus image directly (regression head), fusing pairs and bursts, and
//! scoring results with the usual fusion-quality metrics.

pub mod dataset;
pub mod error;
pub mod fusion;
pub mod imaging;
pub mod losses;
pub mod metrics;
pub mod network;
pub mod par;

pub use error::{Error, Result};
pub use imaging::{FocusMap, Image, SourcePair};
