//! Inference-side fusion rules and baseline fusers.

use crate::error::{invalid, Result};
use crate::imaging::{Image, SourcePair};
use crate::network::{forward, FeatureMap, Head, Parameters};

/// `z_0·x_A + z_1·x_B` per pixel and channel.
pub fn weighted_fuse(pair: &SourcePair, z: &FeatureMap) -> Result<Image> {
    if z.channels != 2 || (z.height, z.width) != pair.dims() {
        return Err(invalid("focus pair must be 2-channel with the sources' dims"));
    }
    let c = pair.a.channels();
    let n = z.plane_len();
    let mut data = Vec::with_capacity(pair.a.data().len());
    for p in 0..n {
        let (w0, w1) = (z.data[p], z.data[n + p]);
        for ch in 0..c {
            let a = pair.a.data()[p * c + ch] as f64;
            let b = pair.b.data()[p * c + ch] as f64;
            data.push((w0 * a + w1 * b) as f32);
        }
    }
    Image::new(pair.a.height(), pair.a.width(), c, data)
}

/// Snaps each pixel to whichever source is strictly nearer in squared
/// colour distance; ties go to `x_B`.
pub fn nearest_source(fused: &Image, pair: &SourcePair) -> Result<Image> {
    if !fused.same_shape(&pair.a) || !pair.a.same_shape(&pair.b) {
        return Err(invalid("fused image and sources differ in shape"));
    }
    let c = fused.channels();
    let mut data = Vec::with_capacity(fused.data().len());
    for ((f, a), b) in fused
        .data()
        .chunks_exact(c)
        .zip(pair.a.data().chunks_exact(c))
        .zip(pair.b.data().chunks_exact(c))
    {
        let dist = |s: &[f32]| -> f64 { f.iter().zip(s).map(|(x, y)| (*x as f64 - *y as f64).powi(2)).sum() };
        data.extend_from_slice(if dist(a) < dist(b) { a } else { b });
    }
    Image::new(fused.height(), fused.width(), c, data)
}

/// A pairwise fusion strategy.
#[derive(Clone, Debug)]
pub enum Fuser {
    /// Segmentation network followed by the weighted-average rule.
    HfSeg(Parameters),
    /// Regression network, optionally snapped to the nearest source.
    HfReg { params: Parameters, near: bool },
    DummyA,
    DummyB,
    Average,
}

impl Fuser {
    /// Wraps a trained model according to its head.
    pub fn from_model(params: Parameters, near: bool) -> Fuser {
        match params.config().head {
            Head::Seg => Fuser::HfSeg(params),
            Head::Reg => Fuser::HfReg { params, near },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Fuser::HfSeg(_) => "hf-seg",
            Fuser::HfReg { near: false, .. } => "hf-reg",
            Fuser::HfReg { near: true, .. } => "hf-reg-near",
            Fuser::DummyA => "dummy-a",
            Fuser::DummyB => "dummy-b",
            Fuser::Average => "average",
        }
    }
}

pub fn fuse_pair(fuser: &Fuser, pair: &SourcePair) -> Result<Image> {
    match fuser {
        Fuser::HfSeg(params) => {
            if params.config().head != Head::Seg {
                return Err(invalid("HF-Seg fuser needs a segmentation model"));
            }
            let (z, _) = forward(params, pair)?;
            weighted_fuse(pair, &z)
        }
        Fuser::HfReg { params, near } => {
            if params.config().head != Head::Reg {
                return Err(invalid("HF-Reg fuser needs a regression model"));
            }
            let (y, _) = forward(params, pair)?;
            let fused = y.to_image()?;
            if *near {
                nearest_source(&fused, pair)
            } else {
                Ok(fused)
            }
        }
        Fuser::DummyA => Ok(pair.a.clone()),
        Fuser::DummyB => Ok(pair.b.clone()),
        Fuser::Average => pair.a.zip_map(&pair.b, |a, b| 0.5 * a + 0.5 * b),
    }
}

/// Focus map predicted by a segmentation fuser (`z_0`), if any.
pub fn focus_map(fuser: &Fuser, pair: &SourcePair) -> Result<Option<Image>> {
    match fuser {
        Fuser::HfSeg(params) => {
            let (z, _) = forward(params, pair)?;
            Ok(Some(z.channel_as_focus_map(0)?.to_image()))
        }
        _ => Ok(None),
    }
}

/// Left fold `f(…f(f(x_0, x_1), x_2)…, x_n)`.
pub fn fuse_burst(fuser: &Fuser, burst: &[Image]) -> Result<Image> {
    if burst.len() < 2 {
        return Err(invalid("a burst needs at least two frames"));
    }
    let mut acc = burst[0].clone();
    for frame in &burst[1..] {
        acc = fuse_pair(fuser, &SourcePair::new(acc, frame.clone())?)?;
    }
    Ok(acc)
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(invalid("images differ in shape"));
    }
    let n = a.data().len() as f64;
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
        .sum::<f64>()
        / n)
}

/// MSE between `f(x_A, x_B)` and `f(x_B, x_A)`.
pub fn commutativity_gap(fuser: &Fuser, pair: &SourcePair) -> Result<f64> {
    let forward = fuse_pair(fuser, pair)?;
    let reverse = fuse_pair(fuser, &pair.reversed())?;
    mse(&forward, &reverse)
}
