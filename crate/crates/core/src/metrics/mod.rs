//! Fusion-quality metrics.
//!
//! Every metric works on grayscale versions of its inputs. Information
//! metrics use 256 uniform histogram bins on `[0, 1]` and natural logarithms,
//! with `0·log 0 = 0`.

mod bias;
mod gradient;
mod info;
mod structural;

pub use bias::{bias_study, BiasRow, BiasTable, StudyPair};
pub use gradient::{q_g, EdgeParams};
pub use info::{entropy, histogram_bin, joint_histogram, marginal_histogram, q_mi, q_ncie, q_te, tsallis_entropy, BINS};
pub use structural::{q_s, ssim, SSIM_C1, SSIM_C2, WINDOW};

use std::io::Write;

use crate::error::{invalid, Result};
use crate::imaging::Image;

/// Default Tsallis order.
pub const TSALLIS_Q: f64 = 1.85;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    /// Against the reference image, when one exists.
    pub ssim: Option<f64>,
    pub q_mi: f64,
    pub q_te: f64,
    pub q_ncie: f64,
    pub q_g: f64,
    pub q_s: f64,
}

impl MetricReport {
    pub const NAMES: [&'static str; 6] = ["ssim", "q_mi", "q_te", "q_ncie", "q_g", "q_s"];

    pub fn values(&self) -> [Option<f64>; 6] {
        [self.ssim, Some(self.q_mi), Some(self.q_te), Some(self.q_ncie), Some(self.q_g), Some(self.q_s)]
    }
}

pub(crate) fn check_dims(images: &[&Image]) -> Result<()> {
    let first = images[0].dims();
    if images.iter().any(|i| i.dims() != first) {
        return Err(invalid("metric inputs differ in dims"));
    }
    Ok(())
}

/// All metrics for one `(A, B, F[, R])` record.
pub fn evaluate(a: &Image, b: &Image, fused: &Image, reference: Option<&Image>) -> Result<MetricReport> {
    check_dims(&[a, b, fused])?;
    let (ga, gb, gf) = (a.luma(), b.luma(), fused.luma());
    let ssim = reference.map(|r| ssim(fused, r)).transpose()?;
    Ok(MetricReport {
        ssim,
        q_mi: q_mi(&ga, &gb, &gf)?,
        q_te: q_te(&ga, &gb, &gf, TSALLIS_Q)?,
        q_ncie: q_ncie(&ga, &gb, &gf)?,
        q_g: q_g(&ga, &gb, &gf)?,
        q_s: q_s(&ga, &gb, &gf)?,
    })
}

pub const CSV_HEADER: &str = "pair_id,fuser,ssim,q_mi,q_te,q_ncie,q_g,q_s";

/// CSV header; the `ssim` column is dropped when no reference exists.
pub fn csv_header(with_ssim: bool) -> &'static str {
    if with_ssim {
        CSV_HEADER
    } else {
        "pair_id,fuser,q_mi,q_te,q_ncie,q_g,q_s"
    }
}

pub fn write_csv_row<W: Write>(out: &mut W, pair_id: &str, fuser: &str, r: &MetricReport, with_ssim: bool) -> std::io::Result<()> {
    write!(out, "{pair_id},{fuser}")?;
    if with_ssim {
        match r.ssim {
            Some(v) => write!(out, ",{v:.6}")?,
            None => write!(out, ",")?,
        }
    }
    writeln!(out, ",{:.6},{:.6},{:.6},{:.6},{:.6}", r.q_mi, r.q_te, r.q_ncie, r.q_g, r.q_s)
}

/// Mean and population standard deviation per metric over `reports`;
/// `None` when no report carries the metric.
pub fn summarize(reports: &[MetricReport]) -> [Option<(f64, f64)>; 6] {
    let mut out = [None; 6];
    for (k, slot) in out.iter_mut().enumerate() {
        let vals: Vec<f64> = reports.iter().filter_map(|r| r.values()[k]).collect();
        if vals.is_empty() {
            continue;
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        *slot = Some((mean, std));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_row_layout() {
        let r = MetricReport {
            ssim: None,
            q_mi: 1.0,
            q_te: 0.5,
            q_ncie: 0.8,
            q_g: 0.6,
            q_s: 0.9,
        };
        let mut buf = Vec::new();
        write_csv_row(&mut buf, "p0", "average", &r, true).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(line.trim().split(',').count(), csv_header(true).split(',').count());
        assert!(line.starts_with("p0,average,,1.000000"));
        let mut buf = Vec::new();
        write_csv_row(&mut buf, "p0", "average", &r, false).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(line.trim().split(',').count(), csv_header(false).split(',').count());
    }

    #[test]
    fn summary_mean_std() {
        let mk = |v: f64| MetricReport {
            ssim: Some(v),
            q_mi: v,
            q_te: v,
            q_ncie: v,
            q_g: v,
            q_s: v,
        };
        let s = summarize(&[mk(1.0), mk(3.0)]);
        assert_eq!(s[0], Some((2.0, 1.0)));
    }
}
