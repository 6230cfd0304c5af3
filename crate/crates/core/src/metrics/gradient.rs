//! Edge-preservation index of Xydeas and Petrović.

use std::f64::consts::FRAC_PI_2;

use super::check_dims;
use crate::error::Result;
use crate::imaging::blur::reflect;
use crate::imaging::Image;

/// Sigmoid constants for the strength and orientation terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeParams {
    pub gamma_g: f64,
    pub kappa_g: f64,
    pub sigma_g: f64,
    pub gamma_a: f64,
    pub kappa_a: f64,
    pub sigma_a: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            gamma_g: 0.9994,
            kappa_g: -15.0,
            sigma_g: 0.5,
            gamma_a: 0.9879,
            kappa_a: -22.0,
            sigma_a: 0.8,
        }
    }
}

impl EdgeParams {
    pub fn strength_term(&self, g: f64) -> f64 {
        self.gamma_g / (1.0 + (self.kappa_g * (g - self.sigma_g)).exp())
    }

    pub fn orientation_term(&self, a: f64) -> f64 {
        self.gamma_a / (1.0 + (self.kappa_a * (a - self.sigma_a)).exp())
    }
}

/// Sobel magnitude and orientation folded into `(-π/2, π/2]`.
fn sobel(img: &Image) -> (Vec<f64>, Vec<f64>) {
    let (h, w) = img.dims();
    let at = |y: isize, x: isize| img.get(reflect(y, h), reflect(x, w), 0) as f64;
    let mut mag = Vec::with_capacity(h * w);
    let mut ori = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            let gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
            mag.push(gx.hypot(gy));
            ori.push(if gx == 0.0 { FRAC_PI_2 } else { (gy / gx).atan() });
        }
    }
    (mag, ori)
}

fn preservation(p: &EdgeParams, gs: f64, as_: f64, gf: f64, af: f64) -> f64 {
    let g = if gs == gf {
        1.0
    } else if gs > gf {
        gf / gs
    } else {
        gs / gf
    };
    let a = ((as_ - af).abs() - FRAC_PI_2).abs() / FRAC_PI_2;
    p.strength_term(g) * p.orientation_term(a)
}

/// Gradient-weighted edge preservation of both sources in `f`. Zero when
/// neither source has any gradient.
pub fn q_g(a: &Image, b: &Image, f: &Image) -> Result<f64> {
    check_dims(&[a, b, f])?;
    let p = EdgeParams::default();
    let (ga, oa) = sobel(&a.luma());
    let (gb, ob) = sobel(&b.luma());
    let (gf, of) = sobel(&f.luma());
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..ga.len() {
        num += preservation(&p, ga[i], oa[i], gf[i], of[i]) * ga[i]
            + preservation(&p, gb[i], ob[i], gf[i], of[i]) * gb[i];
        den += ga[i] + gb[i];
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}
