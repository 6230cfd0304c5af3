//! Training objectives with analytic gradients with respect to the network
//! output.
//!
//! * [`bce_loss`] for the segmentation head's softmax pair.
//! * [`regression_loss`]: per-channel NPS dissimilarity plus the min/max range
//!   regularizer, for the regression head.
//! * [`l1_loss`] and [`mse_loss`] as regression baselines.

use crate::error::{invalid, Result};
use crate::imaging::{FocusMap, Image};
use crate::network::FeatureMap;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before logs.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Co-shaped with the network output.
    pub gradient: FeatureMap,
}

/// `-(1/|Ω|) Σ_p [t·log z_0 + (1-t)·log z_1]`.
pub fn bce_loss(z: &FeatureMap, target: &FocusMap) -> Result<LossValue> {
    if z.channels != 2 || (z.height, z.width) != target.dims() {
        return Err(invalid("bce: prediction must be 2-channel with the target's dims"));
    }
    let n = z.plane_len();
    let scale = 1.0 / n as f64;
    let mut gradient = FeatureMap::zeros(2, z.height, z.width);
    let mut total = 0.0;
    for (i, &t) in target.data().iter().enumerate() {
        let t = t as f64;
        let terms = [(t, z.data[i], i), (1.0 - t, z.data[n + i], n + i)];
        for (weight, p, idx) in terms {
            let clamped = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            total -= weight * clamped.ln();
            if clamped == p {
                gradient.data[idx] = -weight * scale / p;
            }
        }
    }
    Ok(LossValue {
        value: total * scale,
        gradient,
    })
}

/// Normalized positive sigmoid: `(e^{α|a-b|} - 1) / (e^{α|a-b|} + 1)`.
#[inline]
pub fn nps(a: f64, b: f64, alpha: f64) -> f64 {
    (0.5 * alpha * (a - b).abs()).tanh()
}

/// Derivative of [`nps`] with respect to `b`.
#[inline]
pub fn nps_derivative(a: f64, b: f64, alpha: f64) -> f64 {
    let d = b - a;
    if d == 0.0 {
        return 0.0;
    }
    let t = (0.5 * alpha * d.abs()).tanh();
    0.5 * alpha * (1.0 - t * t) * d.signum()
}

fn check_regression_shapes(yhat: &FeatureMap, y: &Image) -> Result<()> {
    if yhat.channels != y.channels() || (yhat.height, yhat.width) != y.dims() {
        return Err(invalid("prediction and target shapes differ"));
    }
    Ok(())
}

/// First row-major position of the minimum and maximum of a plane.
fn extrema(values: impl Iterator<Item = f64>) -> ((usize, f64), (usize, f64)) {
    let mut lo = (0, f64::INFINITY);
    let mut hi = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v < lo.1 {
            lo = (i, v);
        }
        if v > hi.1 {
            hi = (i, v);
        }
    }
    (lo, hi)
}

/// Sum over channels of the mean NPS dissimilarity, plus
/// `Σ_i |min y_i - min ŷ_i| + Σ_i |max y_i - max ŷ_i|`.
///
/// The extrema terms use a subgradient routed to the first row-major argmin
/// and argmax of each predicted channel.
pub fn regression_loss(yhat: &FeatureMap, y: &Image, alpha: f64) -> Result<LossValue> {
    check_regression_shapes(yhat, y)?;
    if y.channels() != 3 {
        return Err(invalid("regression loss expects 3 channels"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    let n = yhat.plane_len();
    let c = y.channels();
    let mut gradient = FeatureMap::zeros(c, yhat.height, yhat.width);
    let mut value = 0.0;
    for ch in 0..c {
        let truth = |p: usize| y.data()[p * c + ch] as f64;
        let pred = yhat.plane(ch);
        let mut sum = 0.0;
        for p in 0..n {
            sum += nps(truth(p), pred[p], alpha);
            gradient.data[ch * n + p] = nps_derivative(truth(p), pred[p], alpha) / n as f64;
        }
        value += sum / n as f64;

        let ((_, y_min), (_, y_max)) = extrema((0..n).map(truth));
        let ((i_min, p_min), (i_max, p_max)) = extrema(pred.iter().copied());
        value += (y_min - p_min).abs() + (y_max - p_max).abs();
        gradient.data[ch * n + i_min] += sign(p_min - y_min);
        gradient.data[ch * n + i_max] += sign(p_max - y_max);
    }
    Ok(LossValue { value, gradient })
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean absolute error over all pixels and channels.
pub fn l1_loss(yhat: &FeatureMap, y: &Image) -> Result<LossValue> {
    pointwise(yhat, y, |d| (d.abs(), sign(d)))
}

/// Mean squared error over all pixels and channels.
pub fn mse_loss(yhat: &FeatureMap, y: &Image) -> Result<LossValue> {
    pointwise(yhat, y, |d| (d * d, 2.0 * d))
}

fn pointwise(yhat: &FeatureMap, y: &Image, f: impl Fn(f64) -> (f64, f64)) -> Result<LossValue> {
    check_regression_shapes(yhat, y)?;
    let n = yhat.plane_len();
    let c = yhat.channels;
    let total = (n * c) as f64;
    let mut gradient = FeatureMap::zeros(c, yhat.height, yhat.width);
    let mut value = 0.0;
    for ch in 0..c {
        for p in 0..n {
            let d = yhat.data[ch * n + p] - y.data()[p * c + ch] as f64;
            let (v, g) = f(d);
            value += v;
            gradient.data[ch * n + p] = g / total;
        }
    }
    Ok(LossValue {
        value: value / total,
        gradient,
    })
}
