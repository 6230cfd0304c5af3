use crate::error::{invalid, Result};
use crate::imaging::{FocusMap, Image};

/// Channel-first `channels × height × width` activations in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(invalid("feature map data length mismatch"));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &FeatureMap) -> bool {
        self.channels == other.channels && self.height == other.height && self.width == other.width
    }

    /// Converts a channel-last image into channel-first activations.
    pub fn from_image(image: &Image) -> Self {
        let (h, w, c) = (image.height(), image.width(), image.channels());
        let mut data = vec![0.0; c * h * w];
        for (i, px) in image.data().chunks_exact(c).enumerate() {
            for (ch, &v) in px.iter().enumerate() {
                data[ch * h * w + i] = v as f64;
            }
        }
        Self {
            channels: c,
            height: h,
            width: w,
            data,
        }
    }

    /// Channel-last image with values clamped into `[0, 1]`.
    pub fn to_image(&self) -> Result<Image> {
        let n = self.plane_len();
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..n {
            for c in 0..self.channels {
                let v = self.data[c * n + i];
                data.push(if v.is_finite() { v as f32 } else { 0.0 });
            }
        }
        Image::new(self.height, self.width, self.channels, data)
    }

    /// First channel as a focus map (probabilities, clamped).
    pub fn channel_as_focus_map(&self, c: usize) -> Result<FocusMap> {
        let data = self.plane(c).iter().map(|&v| v.clamp(0.0, 1.0) as f32).collect();
        FocusMap::new(self.height, self.width, data)
    }

    /// Stacks two maps along the channel axis.
    pub fn concat(a: &FeatureMap, b: &FeatureMap) -> FeatureMap {
        debug_assert_eq!((a.height, a.width), (b.height, b.width));
        let mut data = Vec::with_capacity(a.data.len() + b.data.len());
        data.extend_from_slice(&a.data);
        data.extend_from_slice(&b.data);
        FeatureMap {
            channels: a.channels + b.channels,
            height: a.height,
            width: a.width,
            data,
        }
    }

    /// Splits off the first `c` channels.
    pub fn split(self, c: usize) -> (FeatureMap, FeatureMap) {
        let n = self.plane_len();
        let mut data = self.data;
        let rest = data.split_off(c * n);
        (
            FeatureMap {
                channels: c,
                height: self.height,
                width: self.width,
                data,
            },
            FeatureMap {
                channels: self.channels - c,
                height: self.height,
                width: self.width,
                data: rest,
            },
        )
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
