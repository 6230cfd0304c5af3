use super::Image;
use crate::error::{invalid, Result};
use crate::par;

/// Square convolution kernel with odd side length.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(invalid(format!("kernel size must be odd, got {size}")));
        }
        if weights.len() != size * size {
            return Err(invalid("kernel weight count does not match size"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("kernel weights must be finite"));
        }
        Ok(Self { size, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    /// Row-major weights, `size × size`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }
}

/// Truncated, renormalized Gaussian with side `2·ceil(3σ)+1`.
///
/// Stored as its normalized 1D factor; the 2D weights are the outer product,
/// which equals the renormalized truncated 2D Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    taps: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        let radius = (3.0 * sigma).ceil() as i64;
        let raw: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let sum: f64 = raw.iter().sum();
        Ok(Self {
            sigma,
            taps: raw.into_iter().map(|w| w / sum).collect(),
        })
    }

    /// Size-1 kernel with weight 1.
    pub fn identity() -> Self {
        Self {
            sigma: 0.0,
            taps: vec![1.0],
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn size(&self) -> usize {
        self.taps.len()
    }

    /// The normalized 1D factor.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn to_kernel(&self) -> Kernel {
        let n = self.taps.len();
        let mut w = Vec::with_capacity(n * n);
        for &r in &self.taps {
            for &c in &self.taps {
                w.push(r * c);
            }
        }
        Kernel::new(n, w).expect("odd gaussian kernel")
    }
}

/// Mirror index into `0..n` without repeating the edge sample
/// (`-1 → 1`, `n → n-2`).
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Separable Gaussian blur of every channel with reflect padding.
pub fn blur(image: &Image, kernel: &GaussianKernel) -> Image {
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let taps = kernel.taps();
    let r = (taps.len() / 2) as isize;
    let src = image.data();

    let mut horizontal = vec![0.0f64; h * w * c];
    par::for_each_chunk_mut(&mut horizontal, w * c, |y, row| {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, &t) in taps.iter().enumerate() {
                    let sx = reflect(x as isize - (k as isize - r), w);
                    acc += t * src[(y * w + sx) * c + ch] as f64;
                }
                row[x * c + ch] = acc;
            }
        }
    });

    let mut out = vec![0.0f32; h * w * c];
    par::for_each_chunk_mut(&mut out, w * c, |y, row| {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, &t) in taps.iter().enumerate() {
                    let sy = reflect(y as isize - (k as isize - r), h);
                    acc += t * horizontal[(sy * w + x) * c + ch];
                }
                row[x * c + ch] = acc as f32;
            }
        }
    });
    Image::new(h, w, c, out).expect("blur preserves shape")
}

/// General 2D convolution of every channel with reflect padding:
/// `out(y,x) = Σ k(i,j)·in(y-i+r, x-j+r)`.
pub fn convolve(image: &Image, kernel: &Kernel) -> Image {
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let n = kernel.size();
    let r = kernel.radius() as isize;
    let src = image.data();
    let mut out = vec![0.0f32; h * w * c];
    par::for_each_chunk_mut(&mut out, w * c, |y, row| {
        let mut acc = vec![0.0f64; w * c];
        for i in 0..n {
            let sy = reflect(y as isize - (i as isize - r), h);
            let src_row = &src[sy * w * c..(sy + 1) * w * c];
            for j in 0..n {
                let k = kernel.at(i, j);
                if k == 0.0 {
                    continue;
                }
                let dx = j as isize - r;
                for x in 0..w {
                    let sx = reflect(x as isize - dx, w);
                    for ch in 0..c {
                        acc[x * c + ch] += k * src_row[sx * c + ch] as f64;
                    }
                }
            }
        }
        for (o, a) in row.iter_mut().zip(acc) {
            *o = a as f32;
        }
    });
    Image::new(h, w, c, out).expect("convolution preserves shape")
}
