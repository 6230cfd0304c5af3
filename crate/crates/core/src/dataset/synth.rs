use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{LabelMap, SegmentedSample};
use crate::error::{invalid, Result};
use crate::imaging::{blur, composite_pair, FocusMap, GaussianKernel, Image, SourcePair};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisConfig {
    pub sigma_low: f64,
    pub sigma_high: f64,
    /// Upper bound of the per-example noise std; 0 disables noise.
    pub noise_std_high: f64,
    /// Side of the square training crop.
    pub crop: usize,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            sigma_low: 1.0,
            sigma_high: 5.0,
            noise_std_high: 0.0,
            crop: 400,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_low > 0.0 && self.sigma_low <= self.sigma_high) {
            return Err(invalid("need 0 < sigma_low <= sigma_high"));
        }
        if !(self.noise_std_high >= 0.0) {
            return Err(invalid("noise_std_high must be nonnegative"));
        }
        Ok(())
    }
}

/// One synthesized training tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub pair: SourcePair,
    /// The sharp all-in-focus image.
    pub truth: Image,
    /// 1 where source A is sharp.
    pub target: FocusMap,
    pub sigma: f64,
}

/// Independent stream for example `index` under `seed`.
pub fn example_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

/// Binary map that is 1 exactly where the label is in `subset`.
pub fn focus_map_from_subset(mask: &LabelMap, subset: &[u8]) -> FocusMap {
    let (h, w) = mask.dims();
    let data = mask
        .labels()
        .iter()
        .map(|l| if subset.contains(l) { 1.0 } else { 0.0 })
        .collect();
    FocusMap::new(h, w, data).expect("binary map")
}

/// Draws a uniformly random nonempty proper subset Γ of `{0..γ}` and returns
/// its indicator map.
pub fn select_focus_subset<R: Rng + ?Sized>(sample: &SegmentedSample, rng: &mut R) -> Result<FocusMap> {
    let gamma = sample.object_count();
    if gamma == 0 {
        return Err(invalid("sample has no objects (max label 0)"));
    }
    let subset = loop {
        let picked: Vec<u8> = (0..=gamma).filter(|_| rng.random_bool(0.5)).collect();
        if !picked.is_empty() && picked.len() <= gamma as usize {
            break picked;
        }
    };
    Ok(focus_map_from_subset(&sample.mask, &subset))
}

/// Blurs the whole frame with `σ ~ U(sigma_low, sigma_high)`, composites the
/// pair from a random focus map `g` and records target `1 - g`. Optional
/// Gaussian noise is added to both sources after compositing.
pub fn synthesize_example<R: Rng + ?Sized>(
    sample: &SegmentedSample,
    cfg: &SynthesisConfig,
    rng: &mut R,
) -> Result<TrainingExample> {
    cfg.validate()?;
    let g = select_focus_subset(sample, rng)?;
    let sigma = if cfg.sigma_low == cfg.sigma_high {
        cfg.sigma_low
    } else {
        rng.random_range(cfg.sigma_low..cfg.sigma_high)
    };
    let blurred = blur(&sample.image, &GaussianKernel::new(sigma)?);
    let mut pair = composite_pair(&sample.image, &blurred, &g)?;
    if cfg.noise_std_high > 0.0 {
        let std = rng.random_range(0.0..cfg.noise_std_high);
        if std > 0.0 {
            let noise = Normal::new(0.0, std).expect("positive std");
            let mut add = |img: &Image| {
                let data = img.data().iter().map(|&v| v + noise.sample(rng) as f32).collect();
                Image::new(img.height(), img.width(), img.channels(), data)
            };
            pair = SourcePair::new(add(&pair.a)?, add(&pair.b)?)?;
        }
    }
    Ok(TrainingExample {
        pair,
        truth: sample.image.clone(),
        target: g.inverted(),
        sigma,
    })
}

/// Random crop to `cfg.crop` (skipped when the example is smaller) and a
/// random horizontal mirror, applied identically to every component.
pub fn augment<R: Rng + ?Sized>(example: &TrainingExample, cfg: &SynthesisConfig, rng: &mut R) -> TrainingExample {
    let (h, w) = example.truth.dims();
    let mut out = example.clone();
    if cfg.crop > 0 && h >= cfg.crop && w >= cfg.crop && (h, w) != (cfg.crop, cfg.crop) {
        let top = rng.random_range(0..=h - cfg.crop);
        let left = rng.random_range(0..=w - cfg.crop);
        let c = cfg.crop;
        out = TrainingExample {
            pair: SourcePair {
                a: out.pair.a.crop(top, left, c, c).expect("in bounds"),
                b: out.pair.b.crop(top, left, c, c).expect("in bounds"),
            },
            truth: out.truth.crop(top, left, c, c).expect("in bounds"),
            target: out.target.crop(top, left, c, c).expect("in bounds"),
            sigma: out.sigma,
        };
    }
    if rng.random_bool(0.5) {
        out = mirror(&out);
    }
    out
}

pub(crate) fn mirror(e: &TrainingExample) -> TrainingExample {
    TrainingExample {
        pair: SourcePair {
            a: e.pair.a.mirror_horizontal(),
            b: e.pair.b.mirror_horizontal(),
        },
        truth: e.truth.mirror_horizontal(),
        target: e.target.mirror_horizontal(),
        sigma: e.sigma,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchEntry {
    pub pair: SourcePair,
    pub truth: Image,
    pub target: FocusMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub entries: Vec<BatchEntry>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Batch without the reversed tuples.
    pub fn plain(examples: &[TrainingExample]) -> Result<Batch> {
        if examples.is_empty() {
            return Err(invalid("empty batch"));
        }
        Ok(Batch {
            entries: examples
                .iter()
                .map(|e| BatchEntry {
                    pair: e.pair.clone(),
                    truth: e.truth.clone(),
                    target: e.target.clone(),
                })
                .collect(),
        })
    }
}

/// Each example followed by its reversed tuple with inverted target and the
/// same truth.
pub fn make_commutative_batch(examples: &[TrainingExample]) -> Result<Batch> {
    if examples.is_empty() {
        return Err(invalid("empty batch"));
    }
    let mut entries = Vec::with_capacity(2 * examples.len());
    for e in examples {
        entries.push(BatchEntry {
            pair: e.pair.clone(),
            truth: e.truth.clone(),
            target: e.target.clone(),
        });
        entries.push(BatchEntry {
            pair: e.pair.reversed(),
            truth: e.truth.clone(),
            target: e.target.inverted(),
        });
    }
    Ok(Batch { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_procedural_sample;

    fn sample(seed: u64) -> SegmentedSample {
        generate_procedural_sample(24, 20, 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn three_label_mask() -> SegmentedSample {
        let labels: Vec<u8> = (0..12).map(|i| (i % 3) as u8).collect();
        SegmentedSample::new(Image::filled(3, 4, 3, 0.5).unwrap(), LabelMap::new(3, 4, labels).unwrap()).unwrap()
    }

    #[test]
    fn forced_subset_is_indicator() {
        let s = three_label_mask();
        let g = focus_map_from_subset(&s.mask, &[1]);
        for (l, v) in s.mask.labels().iter().zip(g.data()) {
            assert_eq!(*v, if *l == 1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn subset_selection_is_seeded() {
        let s = sample(1);
        let a = select_focus_subset(&s, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = select_focus_subset(&s, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_objects_is_an_error() {
        let s = SegmentedSample::new(Image::filled(2, 2, 3, 0.1).unwrap(), LabelMap::new(2, 2, vec![0; 4]).unwrap())
            .unwrap();
        assert!(select_focus_subset(&s, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn subset_frequencies_are_uniform() {
        // Labels {0,1,2}: 6 nonempty proper subsets, each expected 1/6.
        let s = three_label_mask();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut counts = std::collections::HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            let g = select_focus_subset(&s, &mut rng).unwrap();
            let key: Vec<bool> = (0..3).map(|l| g.data()[l] == 1.0).collect();
            *counts.entry(key).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let expect = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        let mut chi2 = 0.0;
        for &c in counts.values() {
            assert!((c as f64 - expect).abs() < 3.0 * sd);
            chi2 += (c as f64 - expect).powi(2) / expect;
        }
        // 99.9% quantile of chi-square with 5 degrees of freedom.
        assert!(chi2 < 20.515);
    }

    #[test]
    fn synthesized_pair_sums_to_sharp_plus_blurred() {
        let s = sample(2);
        let cfg = SynthesisConfig::default();
        let e = synthesize_example(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let blurred = blur(&s.image, &GaussianKernel::new(e.sigma).unwrap());
        for i in 0..s.image.data().len() {
            let lhs = e.pair.a.data()[i] as f64 + e.pair.b.data()[i] as f64;
            let rhs = s.image.data()[i] as f64 + blurred.data()[i] as f64;
            assert!((lhs - rhs).abs() <= 1e-6);
        }
    }

    #[test]
    fn degenerate_sigma_range() {
        let cfg = SynthesisConfig {
            sigma_low: 2.0,
            sigma_high: 2.0,
            ..Default::default()
        };
        let e = synthesize_example(&sample(4), &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(e.sigma, 2.0);
    }

    #[test]
    fn target_marks_the_sharp_source() {
        let s = sample(5);
        let e = synthesize_example(&s, &SynthesisConfig::default(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(e.target.is_binary());
        let (h, w) = s.image.dims();
        for y in 0..h {
            for x in 0..w {
                if e.target.get(y, x) == 1.0 {
                    assert_eq!(e.pair.a.pixel(y, x), e.truth.pixel(y, x));
                } else {
                    assert_eq!(e.pair.b.pixel(y, x), e.truth.pixel(y, x));
                }
            }
        }
    }

    #[test]
    fn noise_stays_in_range() {
        let cfg = SynthesisConfig {
            noise_std_high: 0.1,
            ..Default::default()
        };
        let s = sample(6);
        let e = synthesize_example(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(e.pair.a.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_ne!(e.pair.a.data(), synthesize_example(&s, &SynthesisConfig::default(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap().pair.a.data());
    }

    #[test]
    fn augmentation_mirror_and_crop() {
        let s = sample(7);
        let e = synthesize_example(&s, &SynthesisConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(mirror(&mirror(&e)), e);

        let cfg = SynthesisConfig {
            crop: 16,
            ..Default::default()
        };
        let a = augment(&e, &cfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a.truth.dims(), (16, 16));
        assert_eq!(a.target.dims(), (16, 16));
        // Selection premise survives: truth pixel equals the source the target picks.
        for y in 0..16 {
            for x in 0..16 {
                let src = if a.target.get(y, x) == 1.0 { &a.pair.a } else { &a.pair.b };
                assert_eq!(src.pixel(y, x), a.truth.pixel(y, x));
            }
        }
    }

    #[test]
    fn crop_equal_to_size_keeps_geometry() {
        let s = generate_procedural_sample(16, 16, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let e = synthesize_example(&s, &SynthesisConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let cfg = SynthesisConfig {
            crop: 16,
            ..Default::default()
        };
        for seed in 0..4 {
            let a = augment(&e, &cfg, &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(a == e || a == mirror(&e));
        }
    }

    #[test]
    fn commutative_batch_contract() {
        let s = sample(8);
        let e = synthesize_example(&s, &SynthesisConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = make_commutative_batch(std::slice::from_ref(&e)).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.entries[1].pair, e.pair.reversed());
        assert_eq!(b.entries[0].truth, b.entries[1].truth);
        for (a, c) in b.entries[0].target.data().iter().zip(b.entries[1].target.data()) {
            assert_eq!(a + c, 1.0);
        }
        assert!(make_commutative_batch(&[]).is_err());
        let three = vec![e.clone(), e.clone(), e];
        assert_eq!(make_commutative_batch(&three).unwrap().len(), 6);
    }
}
