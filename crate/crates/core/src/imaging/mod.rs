//! Pixel containers and the pixel-level operations the rest of the crate is
//! built on: Gaussian blur, focus-map compositing and grayscale conversion.

pub(crate) mod blur;
pub mod io;

pub use blur::{blur, convolve, GaussianKernel, Kernel};

use crate::error::{invalid, Result};

/// An `height × width × channels` image, row-major and channel-last, with
/// intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Image {
    /// Builds an image from raw intensities. Values are clamped into `[0, 1]`;
    /// non-finite values are rejected.
    pub fn new(height: usize, width: usize, channels: usize, mut data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid("image must be nonempty"));
        }
        if channels != 1 && channels != 3 {
            return Err(invalid(format!("unsupported channel count {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(invalid(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("image contains non-finite intensities"));
        }
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Builds an image by evaluating `f(y, x, c)` at every sample.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        f: impl Fn(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// All channel values of one pixel.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    /// Applies `f` to every intensity and clamps the result.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Image {
        Image {
            data: self.data.iter().map(|&v| f(v).clamp(0.0, 1.0)).collect(),
            ..*self
        }
    }

    /// Combines two same-shaped images sample by sample, clamping the result.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f32, f32) -> f32) -> Result<Image> {
        if !self.same_shape(other) {
            return Err(invalid("image shapes differ"));
        }
        Ok(Image {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b).clamp(0.0, 1.0))
                .collect(),
            ..*self
        })
    }

    pub fn mirror_horizontal(&self) -> Image {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                data.extend_from_slice(self.pixel(y, x));
            }
        }
        Image { data, ..*self }
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Image> {
        if top + height > self.height || left + width > self.width || height == 0 || width == 0 {
            return Err(invalid(format!(
                "crop {height}x{width}@({top},{left}) outside {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * self.channels);
        for y in top..top + height {
            let start = (y * self.width + left) * self.channels;
            data.extend_from_slice(&self.data[start..start + width * self.channels]);
        }
        Ok(Image {
            height,
            width,
            channels: self.channels,
            data,
        })
    }

    /// Luma conversion with weights 0.299 / 0.587 / 0.114.
    pub fn to_grayscale(&self) -> Result<Image> {
        to_grayscale(self)
    }

    /// Replicates a grayscale image into three channels; RGB images are
    /// cloned.
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        Image {
            height: self.height,
            width: self.width,
            channels: 3,
            data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    /// Returns a single-channel view of the image: grayscale images are
    /// cloned, RGB images converted.
    pub fn luma(&self) -> Image {
        if self.channels == 1 {
            self.clone()
        } else {
            to_grayscale(self).expect("three channels")
        }
    }
}

pub fn to_grayscale(image: &Image) -> Result<Image> {
    if image.channels != 3 {
        return Err(invalid(format!(
            "grayscale conversion needs 3 channels, got {}",
            image.channels
        )));
    }
    let data = image
        .data
        .chunks_exact(3)
        .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) as f32)
        .collect();
    Image::new(image.height, image.width, 1, data)
}

/// Per-pixel map in `[0, 1]` saying which source is in focus.
#[derive(Clone, Debug, PartialEq)]
pub struct FocusMap {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FocusMap {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width {
            return Err(invalid(format!(
                "focus map length {} does not match {height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("focus map values must lie in [0, 1]"));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// `1 - g` at every pixel.
    pub fn inverted(&self) -> FocusMap {
        FocusMap {
            data: self.data.iter().map(|v| 1.0 - v).collect(),
            ..*self
        }
    }

    pub fn mirror_horizontal(&self) -> FocusMap {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            data.extend(self.data[y * self.width..(y + 1) * self.width].iter().rev());
        }
        FocusMap { data, ..*self }
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<FocusMap> {
        if top + height > self.height || left + width > self.width {
            return Err(invalid("crop outside focus map"));
        }
        let mut data = Vec::with_capacity(height * width);
        for y in top..top + height {
            let start = y * self.width + left;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        FocusMap::new(height, width, data)
    }

    /// Renders the map as a single-channel image.
    pub fn to_image(&self) -> Image {
        Image::new(self.height, self.width, 1, self.data.clone()).expect("valid focus map")
    }
}

/// Two co-registered frames of one scene, `(x_A, x_B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourcePair {
    pub a: Image,
    pub b: Image,
}

impl SourcePair {
    pub fn new(a: Image, b: Image) -> Result<Self> {
        if !a.same_shape(&b) {
            return Err(invalid(format!(
                "source shapes differ: {}x{}x{} vs {}x{}x{}",
                a.height, a.width, a.channels, b.height, b.width, b.channels
            )));
        }
        Ok(Self { a, b })
    }

    /// `(x_B, x_A)`.
    pub fn reversed(&self) -> SourcePair {
        SourcePair {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.a.dims()
    }
}

/// Builds the source pair from a sharp frame, its blurred version and a
/// binary focus map: `x_A = blurred·g + sharp·(1-g)`,
/// `x_B = blurred·(1-g) + sharp·g`.
pub fn composite_pair(sharp: &Image, blurred: &Image, g: &FocusMap) -> Result<SourcePair> {
    if !sharp.same_shape(blurred) {
        return Err(invalid("sharp and blurred images differ in shape"));
    }
    if sharp.dims() != g.dims() {
        return Err(invalid("focus map dims differ from image dims"));
    }
    if !g.is_binary() {
        return Err(invalid("compositing requires a binary focus map"));
    }
    let c = sharp.channels;
    let mut a = Vec::with_capacity(sharp.data.len());
    let mut b = Vec::with_capacity(sharp.data.len());
    for (i, &gv) in g.data.iter().enumerate() {
        let s = &sharp.data[i * c..(i + 1) * c];
        let bl = &blurred.data[i * c..(i + 1) * c];
        if gv == 1.0 {
            a.extend_from_slice(bl);
            b.extend_from_slice(s);
        } else {
            a.extend_from_slice(s);
            b.extend_from_slice(bl);
        }
    }
    SourcePair::new(
        Image::new(sharp.height, sharp.width, c, a)?,
        Image::new(sharp.height, sharp.width, c, b)?,
    )
}
