//! The multiple-source hourglass: a U-Net style encoder-decoder fed with the
//! two sources stacked into one 6-channel input.
//!
//! Every level runs two same-padded 3×3 convolutions with ReLU. The encoder
//! downsamples by 2×2 max-pooling; the decoder upsamples by nearest neighbour,
//! convolves, concatenates the matching encoder features and convolves twice
//! more. A final linear 3×3 convolution produces the head, followed by a
//! channel softmax for the segmentation head.

use super::layers::{self, conv_backward, conv_forward};
use super::params::{Gradients, Head, HourglassConfig, Parameters};
use super::tensor::FeatureMap;
use crate::error::{invalid, Error, Result};
use crate::imaging::blur::reflect;
use crate::imaging::SourcePair;

/// Activations retained by [`forward`] for [`backward`].
#[derive(Clone, Debug)]
pub struct ActivationCache {
    config: HourglassConfig,
    height: usize,
    width: usize,
    conv_inputs: Vec<FeatureMap>,
    conv_outputs: Vec<FeatureMap>,
    pool_indices: Vec<Vec<usize>>,
    output: FeatureMap,
}

impl ActivationCache {
    pub fn config(&self) -> &HourglassConfig {
        &self.config
    }

    /// Which hidden ReLUs fired and which input won each max-pool. Two passes
    /// with equal patterns ran through the same piecewise-linear region.
    pub fn switch_pattern(&self) -> (Vec<bool>, Vec<usize>) {
        let head = Slots { depth: self.config.depth }.head();
        let fired = self.conv_outputs[..head]
            .iter()
            .flat_map(|m| m.data.iter().map(|&v| v > 0.0))
            .collect();
        (fired, self.pool_indices.concat())
    }
}

struct Slots {
    depth: usize,
}

impl Slots {
    fn enc(&self, level: usize, j: usize) -> usize {
        2 * level + j
    }
    fn bottom(&self, j: usize) -> usize {
        2 * self.depth + j
    }
    fn dec(&self, level: usize, j: usize) -> usize {
        2 * self.depth + 2 + 3 * (self.depth - 1 - level) + j
    }
    fn head(&self) -> usize {
        5 * self.depth + 2
    }
}

/// Stacks `(x_A, x_B)` into six channels and reflect-pads height and width
/// up to a multiple of `align`.
pub fn network_input(pair: &SourcePair, align: usize) -> Result<FeatureMap> {
    if !pair.a.same_shape(&pair.b) {
        return Err(invalid("source shapes differ"));
    }
    if pair.a.channels() != 3 {
        return Err(invalid("network sources must be RGB"));
    }
    if pair.a.data().iter().chain(pair.b.data()).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite input"));
    }
    let (h, w) = pair.dims();
    let ph = h.div_ceil(align) * align;
    let pw = w.div_ceil(align) * align;
    let mut x = FeatureMap::zeros(6, ph, pw);
    for (k, src) in [&pair.a, &pair.b].into_iter().enumerate() {
        for y in 0..ph {
            let sy = reflect(y as isize, h);
            for xx in 0..pw {
                let sx = reflect(xx as isize, w);
                let p = src.pixel(sy, sx);
                for c in 0..3 {
                    x.data[((3 * k + c) * ph + y) * pw + xx] = p[c] as f64;
                }
            }
        }
    }
    Ok(x)
}

fn conv_params(p: &[Vec<f64>], slot: usize) -> (&[f64], &[f64]) {
    (&p[2 * slot], &p[2 * slot + 1])
}

/// Runs the network. The output has the input's height and width: two
/// softmax channels `(z_0, z_1)` for the segmentation head, or the three
/// regressed colour channels.
pub fn forward(params: &Parameters, pair: &SourcePair) -> Result<(FeatureMap, ActivationCache)> {
    let config = *params.config();
    let (h, w) = pair.dims();
    let input = network_input(pair, config.alignment())?;
    let p = params.to_f64();
    let s = Slots { depth: config.depth };
    let n_conv = s.head() + 1;
    let mut conv_inputs = vec![FeatureMap::zeros(0, 0, 0); n_conv];
    let mut conv_outputs = vec![FeatureMap::zeros(0, 0, 0); n_conv];
    let mut pool_indices = Vec::with_capacity(config.depth);

    let mut run = |slot: usize, x: FeatureMap, relu: bool| -> FeatureMap {
        let (wt, b) = conv_params(&p, slot);
        let mut y = conv_forward(&x, wt, b, b.len());
        if relu {
            layers::relu_in_place(&mut y);
        }
        conv_inputs[slot] = x;
        conv_outputs[slot] = y.clone();
        y
    };

    let mut cur = input;
    let mut skips = Vec::with_capacity(config.depth);
    for l in 0..config.depth {
        let a = run(s.enc(l, 0), cur, true);
        let a = run(s.enc(l, 1), a, true);
        let (pooled, idx) = layers::maxpool_forward(&a);
        skips.push(a);
        pool_indices.push(idx);
        cur = pooled;
    }
    cur = run(s.bottom(0), cur, true);
    cur = run(s.bottom(1), cur, true);
    for l in (0..config.depth).rev() {
        let up = layers::upsample_forward(&cur);
        let u = run(s.dec(l, 0), up, true);
        let cat = FeatureMap::concat(&u, &skips[l]);
        let a = run(s.dec(l, 1), cat, true);
        cur = run(s.dec(l, 2), a, true);
    }
    let logits = run(s.head(), cur, false);
    let full = match config.head {
        Head::Seg => layers::softmax_forward(&logits),
        Head::Reg => logits,
    };
    let output = crop(&full, h, w);
    Ok((
        output.clone(),
        ActivationCache {
            config,
            height: h,
            width: w,
            conv_inputs,
            conv_outputs,
            pool_indices,
            output: full,
        },
    ))
}

fn crop(x: &FeatureMap, h: usize, w: usize) -> FeatureMap {
    if x.height == h && x.width == w {
        return x.clone();
    }
    let mut out = FeatureMap::zeros(x.channels, h, w);
    for c in 0..x.channels {
        for y in 0..h {
            let src = (c * x.height + y) * x.width;
            out.data[(c * h + y) * w..(c * h + y + 1) * w].copy_from_slice(&x.data[src..src + w]);
        }
    }
    out
}

fn zero_pad(g: &FeatureMap, h: usize, w: usize) -> FeatureMap {
    if g.height == h && g.width == w {
        return g.clone();
    }
    let mut out = FeatureMap::zeros(g.channels, h, w);
    for c in 0..g.channels {
        for y in 0..g.height {
            let dst = (c * h + y) * w;
            out.data[dst..dst + g.width].copy_from_slice(&g.data[(c * g.height + y) * g.width..(c * g.height + y + 1) * g.width]);
        }
    }
    out
}

/// Reverse-mode gradient of a scalar loss with respect to every parameter,
/// given the loss gradient with respect to the (cropped) network output.
pub fn backward(params: &Parameters, cache: &ActivationCache, output_gradient: &FeatureMap) -> Result<Gradients> {
    let config = *params.config();
    if config != cache.config {
        return Err(Error::ShapeMismatch("cache was produced by a different configuration".into()));
    }
    if output_gradient.channels != config.head.out_channels()
        || output_gradient.height != cache.height
        || output_gradient.width != cache.width
    {
        return Err(Error::ShapeMismatch("output gradient does not match the forward output".into()));
    }
    let p = params.to_f64();
    let s = Slots { depth: config.depth };
    let mut grads = Gradients::zeros_like(params);

    let mut step = |slot: usize, g: FeatureMap, relu: bool, need_input: bool| -> Option<FeatureMap> {
        let mut g = g;
        if relu {
            layers::relu_backward_in_place(&mut g, &cache.conv_outputs[slot]);
        }
        let (wt, _) = conv_params(&p, slot);
        let (d_in, d_w, d_b) = conv_backward(&cache.conv_inputs[slot], wt, &g, need_input);
        grads.tensors[2 * slot] = d_w;
        grads.tensors[2 * slot + 1] = d_b;
        d_in
    };

    let full = &cache.output;
    let g = zero_pad(output_gradient, full.height, full.width);
    let g = match config.head {
        Head::Seg => layers::softmax_backward(full, &g),
        Head::Reg => g,
    };
    let mut cur = step(s.head(), g, false, true).unwrap();
    let mut skip_grads = vec![None; config.depth];
    for l in 0..config.depth {
        let g = step(s.dec(l, 2), cur, true, true).unwrap();
        let g = step(s.dec(l, 1), g, true, true).unwrap();
        let c = config.level_channels(l);
        let (du, dskip) = g.split(c);
        skip_grads[l] = Some(dskip);
        let dup = step(s.dec(l, 0), du, true, true).unwrap();
        cur = layers::upsample_backward(&dup);
    }
    let g = step(s.bottom(1), cur, true, true).unwrap();
    cur = step(s.bottom(0), g, true, true).unwrap();
    for l in (0..config.depth).rev() {
        let skip_out = &cache.conv_outputs[s.enc(l, 1)];
        let mut g = layers::maxpool_backward(&cur, &cache.pool_indices[l], skip_out.height, skip_out.width);
        let dskip = skip_grads[l].take().expect("decoder visited every level");
        g.data.iter_mut().zip(&dskip.data).for_each(|(a, b)| *a += b);
        let g = step(s.enc(l, 1), g, true, true).unwrap();
        let need = l > 0;
        match step(s.enc(l, 0), g, true, need) {
            Some(d) => cur = d,
            None => break,
        }
    }
    Ok(grads)
}
