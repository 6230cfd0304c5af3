//! Histogram-based information metrics.

use super::check_dims;
use crate::error::{invalid, Result};
use crate::imaging::Image;

pub const BINS: usize = 256;

#[inline]
pub fn histogram_bin(v: f32) -> usize {
    ((v as f64 * BINS as f64).floor().max(0.0) as usize).min(BINS - 1)
}

/// Normalized 256-bin histogram of a single-channel image.
pub fn marginal_histogram(x: &Image) -> Vec<f64> {
    let mut h = vec![0.0; BINS];
    for &v in x.data() {
        h[histogram_bin(v)] += 1.0;
    }
    let n = x.data().len() as f64;
    h.iter_mut().for_each(|c| *c /= n);
    h
}

/// Normalized joint histogram, row index from `x`, column from `y`.
pub fn joint_histogram(x: &Image, y: &Image) -> Vec<f64> {
    let mut h = vec![0.0; BINS * BINS];
    for (&a, &b) in x.data().iter().zip(y.data()) {
        h[histogram_bin(a) * BINS + histogram_bin(b)] += 1.0;
    }
    let n = x.data().len() as f64;
    h.iter_mut().for_each(|c| *c /= n);
    h
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// `(1 - Σ p^q) / (q - 1)`.
pub fn tsallis_entropy(p: &[f64], q: f64) -> f64 {
    (1.0 - p.iter().filter(|&&v| v > 0.0).map(|v| v.powf(q)).sum::<f64>()) / (q - 1.0)
}

fn mutual_information(joint: &[f64], px: &[f64], py: &[f64]) -> f64 {
    entropy(px) + entropy(py) - entropy(joint)
}

/// Tsallis divergence of the joint distribution from the product of its
/// marginals: `(Σ p(x,y)^q (p(x)p(y))^{1-q} - 1) / (q - 1)`.
fn tsallis_mutual_information(joint: &[f64], px: &[f64], py: &[f64], q: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..BINS {
        if px[i] == 0.0 {
            continue;
        }
        for j in 0..BINS {
            let p = joint[i * BINS + j];
            if p > 0.0 {
                s += p.powf(q) * (px[i] * py[j]).powf(1.0 - q);
            }
        }
    }
    (s - 1.0) / (q - 1.0)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn gray_inputs<'a>(a: &'a Image, b: &'a Image, f: &'a Image) -> Result<()> {
    check_dims(&[a, b, f])?;
    if [a, b, f].iter().any(|i| i.channels() != 1) {
        return Err(invalid("information metrics expect grayscale inputs"));
    }
    Ok(())
}

/// Normalized mutual information in Hossny's form:
/// `2·[I(A;F)/(H(A)+H(F)) + I(B;F)/(H(B)+H(F))]`.
pub fn q_mi(a: &Image, b: &Image, f: &Image) -> Result<f64> {
    let (a, b, f) = (a.luma(), b.luma(), f.luma());
    gray_inputs(&a, &b, &f)?;
    let (pa, pb, pf) = (marginal_histogram(&a), marginal_histogram(&b), marginal_histogram(&f));
    let (ha, hb, hf) = (entropy(&pa), entropy(&pb), entropy(&pf));
    let iaf = mutual_information(&joint_histogram(&a, &f), &pa, &pf);
    let ibf = mutual_information(&joint_histogram(&b, &f), &pb, &pf);
    Ok(2.0 * (ratio(iaf, ha + hf) + ratio(ibf, hb + hf)))
}

/// Normalized Tsallis mutual information:
/// `(I_q(A;F) + I_q(B;F)) / (H_q(A) + H_q(B))`.
pub fn q_te(a: &Image, b: &Image, f: &Image, q: f64) -> Result<f64> {
    if q == 1.0 || !q.is_finite() || q <= 0.0 {
        return Err(invalid("Tsallis order must be positive and differ from 1"));
    }
    let (a, b, f) = (a.luma(), b.luma(), f.luma());
    gray_inputs(&a, &b, &f)?;
    let (pa, pb, pf) = (marginal_histogram(&a), marginal_histogram(&b), marginal_histogram(&f));
    let iaf = tsallis_mutual_information(&joint_histogram(&a, &f), &pa, &pf, q);
    let ibf = tsallis_mutual_information(&joint_histogram(&b, &f), &pb, &pf, q);
    Ok(ratio(iaf + ibf, tsallis_entropy(&pa, q) + tsallis_entropy(&pb, q)))
}

/// Nonlinear correlation coefficient: mutual information normalized by
/// `ln 256`, so that it lies in `[0, 1]`.
fn ncc(x: &Image, y: &Image) -> f64 {
    let (px, py) = (marginal_histogram(x), marginal_histogram(y));
    (mutual_information(&joint_histogram(x, y), &px, &py) / (BINS as f64).ln()).clamp(0.0, 1.0)
}

/// Eigenvalues of a symmetric 3×3 matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(mut m: [[f64; 3]; 3]) -> [f64; 3] {
    for _ in 0..64 {
        let off = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        if off < 1e-30 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut r = m;
            for k in 0..3 {
                r[k][p] = c * m[k][p] - s * m[k][q];
                r[k][q] = s * m[k][p] + c * m[k][q];
            }
            let mut out = r;
            for k in 0..3 {
                out[p][k] = c * r[p][k] - s * r[q][k];
                out[q][k] = s * r[p][k] + c * r[q][k];
            }
            m = out;
        }
    }
    [m[0][0], m[1][1], m[2][2]]
}

/// Nonlinear correlation information entropy of `(A, B, F)`:
/// `1 + Σ (λ_i/3)·log_256(λ_i/3)` over the eigenvalues of the 3×3 NCC matrix.
pub fn q_ncie(a: &Image, b: &Image, f: &Image) -> Result<f64> {
    let (a, b, f) = (a.luma(), b.luma(), f.luma());
    gray_inputs(&a, &b, &f)?;
    let (ab, af, bf) = (ncc(&a, &b), ncc(&a, &f), ncc(&b, &f));
    let r = [[1.0, ab, af], [ab, 1.0, bf], [af, bf, 1.0]];
    let ln_b = (BINS as f64).ln();
    let s: f64 = symmetric_eigenvalues(r)
        .iter()
        .map(|&l| l / 3.0)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln() / ln_b)
        .sum();
    Ok((1.0 + s).clamp(0.0, 1.0))
}
