//! Window-based structural similarity and Piella's index.

use super::check_dims;
use crate::error::Result;
use crate::imaging::Image;

pub const WINDOW: usize = 8;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// Summed-area table with a zero top row and left column.
struct Integral {
    w: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(h: usize, w: usize, value: impl Fn(usize) -> f64) -> Self {
        let mut sums = vec![0.0; (h + 1) * (w + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += value(y * w + x);
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Integral { w: w + 1, sums }
    }

    fn window(&self, y: usize, x: usize, k: usize) -> f64 {
        let s = &self.sums;
        s[(y + k) * self.w + x + k] - s[y * self.w + x + k] - s[(y + k) * self.w + x] + s[y * self.w + x]
    }
}

/// Mean, variance and covariance of `x` and `y` over every `k×k` window.
pub(crate) struct WindowStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
}

pub(crate) fn window_stats(x: &Image, y: &Image) -> Vec<WindowStats> {
    let (h, w) = x.dims();
    let k = WINDOW.min(h).min(w);
    let (xd, yd) = (x.data(), y.data());
    let sx = Integral::new(h, w, |i| xd[i] as f64);
    let sy = Integral::new(h, w, |i| yd[i] as f64);
    let sxx = Integral::new(h, w, |i| (xd[i] as f64).powi(2));
    let syy = Integral::new(h, w, |i| (yd[i] as f64).powi(2));
    let sxy = Integral::new(h, w, |i| xd[i] as f64 * yd[i] as f64);
    let n = (k * k) as f64;
    let mut out = Vec::with_capacity((h - k + 1) * (w - k + 1));
    for r in 0..=h - k {
        for c in 0..=w - k {
            let mean_x = sx.window(r, c, k) / n;
            let mean_y = sy.window(r, c, k) / n;
            out.push(WindowStats {
                mean_x,
                mean_y,
                var_x: (sxx.window(r, c, k) / n - mean_x * mean_x).max(0.0),
                var_y: (syy.window(r, c, k) / n - mean_y * mean_y).max(0.0),
                cov: sxy.window(r, c, k) / n - mean_x * mean_y,
            });
        }
    }
    out
}

fn ssim_of(s: &WindowStats) -> f64 {
    ((2.0 * s.mean_x * s.mean_y + SSIM_C1) * (2.0 * s.cov + SSIM_C2))
        / ((s.mean_x * s.mean_x + s.mean_y * s.mean_y + SSIM_C1) * (s.var_x + s.var_y + SSIM_C2))
}

/// Mean SSIM over all 8×8 windows at stride 1, computed on luma.
pub fn ssim(x: &Image, y: &Image) -> Result<f64> {
    check_dims(&[x, y])?;
    let stats = window_stats(&x.luma(), &y.luma());
    Ok(stats.iter().map(ssim_of).sum::<f64>() / stats.len() as f64)
}

/// Piella's index: per-window SSIM of each source against the fused image,
/// weighted by the sources' relative variance.
pub fn q_s(a: &Image, b: &Image, f: &Image) -> Result<f64> {
    check_dims(&[a, b, f])?;
    let (a, b, f) = (a.luma(), b.luma(), f.luma());
    let af = window_stats(&a, &f);
    let bf = window_stats(&b, &f);
    let total: f64 = af
        .iter()
        .zip(&bf)
        .map(|(sa, sb)| {
            let saliency = sa.var_x + sb.var_x;
            let lambda = if saliency > 0.0 { sa.var_x / saliency } else { 0.5 };
            lambda * ssim_of(sa) + (1.0 - lambda) * ssim_of(sb)
        })
        .sum();
    Ok(total / af.len() as f64)
}
