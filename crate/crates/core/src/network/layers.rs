//! Forward and backward kernels for the hourglass building blocks:
//! same-padded 3×3 convolution, ReLU, 2×2 max-pooling, nearest 2× upsampling
//! and the two-channel softmax.

use super::tensor::FeatureMap;
use crate::par;

pub const K: usize = 3;

/// Same-padded (zero) 3×3 convolution. `weights` is `[out][in][3][3]`.
pub fn conv_forward(input: &FeatureMap, weights: &[f64], bias: &[f64], out_channels: usize) -> FeatureMap {
    let (ci, h, w) = (input.channels, input.height, input.width);
    debug_assert_eq!(weights.len(), out_channels * ci * K * K);
    let padded = zero_pad(input);
    let plane_len = (h + 2) * (w + 2);
    let mut out = FeatureMap::zeros(out_channels, h, w);
    par::for_each_chunk_mut(&mut out.data, h * w, |co, plane| {
        plane.iter_mut().for_each(|v| *v = bias[co]);
        for c in 0..ci {
            let k = kernel(weights, co * ci + c);
            stencil(plane, &padded[c * plane_len..(c + 1) * plane_len], &k, h, w);
        }
    });
    out
}

fn kernel(weights: &[f64], index: usize) -> [f64; K * K] {
    weights[index * K * K..(index + 1) * K * K].try_into().expect("3x3 kernel")
}

/// `dst(y,x) += Σ k(ky,kx)·src(y+ky, x+kx)` where `src` is a zero-bordered
/// `(h+2)×(w+2)` plane.
#[inline]
fn stencil(dst: &mut [f64], src: &[f64], k: &[f64; K * K], h: usize, w: usize) {
    let pw = w + 2;
    for y in 0..h {
        let dst = &mut dst[y * w..(y + 1) * w];
        let r = |dy: usize, dx: usize| &src[(y + dy) * pw + dx..(y + dy) * pw + dx + w];
        let (a0, a1, a2) = (r(0, 0), r(0, 1), r(0, 2));
        let (b0, b1, b2) = (r(1, 0), r(1, 1), r(1, 2));
        let (c0, c1, c2) = (r(2, 0), r(2, 1), r(2, 2));
        for x in 0..w {
            dst[x] += k[0] * a0[x] + k[1] * a1[x] + k[2] * a2[x]
                + k[3] * b0[x] + k[4] * b1[x] + k[5] * b2[x]
                + k[6] * c0[x] + k[7] * c1[x] + k[8] * c2[x];
        }
    }
}

/// Copies every plane into a `(h+2)×(w+2)` buffer with a zero border.
fn zero_pad(input: &FeatureMap) -> Vec<f64> {
    let (c, h, w) = (input.channels, input.height, input.width);
    let (ph, pw) = (h + 2, w + 2);
    let mut out = vec![0.0; c * ph * pw];
    for ch in 0..c {
        let src = input.plane(ch);
        for y in 0..h {
            let base = ch * ph * pw + (y + 1) * pw + 1;
            out[base..base + w].copy_from_slice(&src[y * w..(y + 1) * w]);
        }
    }
    out
}

/// Gradients of a convolution. Returns `(d_input, d_weights, d_bias)`; the
/// input gradient is skipped when `need_input` is false.
pub fn conv_backward(
    input: &FeatureMap,
    weights: &[f64],
    d_out: &FeatureMap,
    need_input: bool,
) -> (Option<FeatureMap>, Vec<f64>, Vec<f64>) {
    let (ci, h, w) = (input.channels, input.height, input.width);
    let co = d_out.channels;
    let pw = w + 2;
    let plane_len = (h + 2) * pw;

    let d_bias: Vec<f64> = (0..co).map(|c| d_out.plane(c).iter().sum()).collect();

    let padded = zero_pad(input);
    let mut d_weights = vec![0.0; co * ci * K * K];
    par::for_each_chunk_mut(&mut d_weights, ci * K * K, |o, dw| {
        let g = d_out.plane(o);
        for c in 0..ci {
            let src = &padded[c * plane_len..(c + 1) * plane_len];
            let mut acc = [0.0; K * K];
            for y in 0..h {
                let gr = &g[y * w..(y + 1) * w];
                for (t, a) in acc.iter_mut().enumerate() {
                    let (dy, dx) = (t / K, t % K);
                    let s = &src[(y + dy) * pw + dx..(y + dy) * pw + dx + w];
                    *a += gr.iter().zip(s).map(|(p, q)| p * q).sum::<f64>();
                }
            }
            dw[c * K * K..(c + 1) * K * K].copy_from_slice(&acc);
        }
    });

    let d_input = need_input.then(|| {
        let padded_grad = zero_pad(d_out);
        let mut d_in = FeatureMap::zeros(ci, h, w);
        par::for_each_chunk_mut(&mut d_in.data, h * w, |c, plane| {
            for o in 0..co {
                // Transposed convolution: flip the kernel.
                let mut k = kernel(weights, o * ci + c);
                k.reverse();
                stencil(plane, &padded_grad[o * plane_len..(o + 1) * plane_len], &k, h, w);
            }
        });
        d_in
    });

    (d_input, d_weights, d_bias)
}

pub fn relu_in_place(x: &mut FeatureMap) {
    x.data.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Masks a gradient by `activated > 0` where `activated` is the ReLU output.
pub fn relu_backward_in_place(grad: &mut FeatureMap, activated: &FeatureMap) {
    for (g, &a) in grad.data.iter_mut().zip(&activated.data) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// 2×2 max-pool with stride 2. Returns the pooled map and, per output
/// sample, the flat index of the winning input sample (first max wins).
pub fn maxpool_forward(input: &FeatureMap) -> (FeatureMap, Vec<usize>) {
    let (c, h, w) = (input.channels, input.height, input.width);
    let (oh, ow) = (h / 2, w / 2);
    let mut out = FeatureMap::zeros(c, oh, ow);
    let mut idx = vec![0usize; c * oh * ow];
    for ch in 0..c {
        for y in 0..oh {
            for x in 0..ow {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let i = (ch * h + 2 * y + dy) * w + 2 * x + dx;
                        if input.data[i] > best {
                            best = input.data[i];
                            arg = i;
                        }
                    }
                }
                let o = (ch * oh + y) * ow + x;
                out.data[o] = best;
                idx[o] = arg;
            }
        }
    }
    (out, idx)
}

pub fn maxpool_backward(d_out: &FeatureMap, idx: &[usize], in_h: usize, in_w: usize) -> FeatureMap {
    let mut d_in = FeatureMap::zeros(d_out.channels, in_h, in_w);
    for (g, &i) in d_out.data.iter().zip(idx) {
        d_in.data[i] += g;
    }
    d_in
}

pub fn upsample_forward(input: &FeatureMap) -> FeatureMap {
    let (c, h, w) = (input.channels, input.height, input.width);
    let mut out = FeatureMap::zeros(c, 2 * h, 2 * w);
    for ch in 0..c {
        for y in 0..2 * h {
            for x in 0..2 * w {
                out.data[(ch * 2 * h + y) * 2 * w + x] = input.data[(ch * h + y / 2) * w + x / 2];
            }
        }
    }
    out
}

pub fn upsample_backward(d_out: &FeatureMap) -> FeatureMap {
    let (c, h, w) = (d_out.channels, d_out.height / 2, d_out.width / 2);
    let mut d_in = FeatureMap::zeros(c, h, w);
    for ch in 0..c {
        for y in 0..2 * h {
            for x in 0..2 * w {
                d_in.data[(ch * h + y / 2) * w + x / 2] += d_out.data[(ch * 2 * h + y) * 2 * w + x];
            }
        }
    }
    d_in
}

/// Per-pixel softmax over the channel axis.
pub fn softmax_forward(logits: &FeatureMap) -> FeatureMap {
    let n = logits.plane_len();
    let c = logits.channels;
    let mut out = FeatureMap::zeros(c, logits.height, logits.width);
    for i in 0..n {
        let m = (0..c).map(|k| logits.data[k * n + i]).fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for k in 0..c {
            let e = (logits.data[k * n + i] - m).exp();
            out.data[k * n + i] = e;
            s += e;
        }
        for k in 0..c {
            out.data[k * n + i] /= s;
        }
    }
    out
}

/// `d_logit_k = z_k·(d_k − Σ_j z_j·d_j)`.
pub fn softmax_backward(probs: &FeatureMap, d_probs: &FeatureMap) -> FeatureMap {
    let n = probs.plane_len();
    let c = probs.channels;
    let mut d = FeatureMap::zeros(c, probs.height, probs.width);
    for i in 0..n {
        let dot: f64 = (0..c).map(|k| probs.data[k * n + i] * d_probs.data[k * n + i]).sum();
        for k in 0..c {
            d.data[k * n + i] = probs.data[k * n + i] * (d_probs.data[k * n + i] - dot);
        }
    }
    d
}
