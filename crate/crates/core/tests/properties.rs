use mfif::fusion::{fuse_pair, nearest_source, weighted_fuse, Fuser};
use mfif::imaging::{blur, composite_pair, GaussianKernel};
use mfif::losses::nps;
use mfif::metrics::{q_g, q_mi, q_ncie, q_s, q_te, ssim};
use mfif::network::{decode_checkpoint, encode_checkpoint, forward, init_parameters, FeatureMap, Head, HourglassConfig};
use mfif::{FocusMap, Image, SourcePair};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn image(h: usize, w: usize, c: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0f32..=1.0, h * w * c).prop_map(move |d| Image::new(h, w, c, d).unwrap())
}

fn pair(h: usize, w: usize, c: usize) -> impl Strategy<Value = SourcePair> {
    (image(h, w, c), image(h, w, c)).prop_map(|(a, b)| SourcePair::new(a, b).unwrap())
}

fn sized_pair(c: usize) -> impl Strategy<Value = SourcePair> {
    (4usize..20, 4usize..20).prop_flat_map(move |(h, w)| pair(h, w, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seg_output_is_same_size_simplex(p in sized_pair(3), seed in 0u64..1000) {
        let cfg = HourglassConfig { depth: 2, base_channels: 2, head: Head::Seg };
        let params = init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (z, _) = forward(&params, &p).unwrap();
        prop_assert_eq!((z.channels, z.height, z.width), (2, p.a.height(), p.a.width()));
        let n = z.plane_len();
        for i in 0..n {
            prop_assert!(z.data[i] > 0.0 && z.data[i] < 1.0);
            prop_assert!((z.data[i] + z.data[n + i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn compositing_preserves_the_pixel_sum(y in image(9, 11, 3), bits in prop::collection::vec(0u8..2, 99), sigma in 0.5f64..4.0) {
        let g = FocusMap::new(9, 11, bits.iter().map(|&b| b as f32).collect()).unwrap();
        let yb = blur(&y, &GaussianKernel::new(sigma).unwrap());
        let p = composite_pair(&y, &yb, &g).unwrap();
        for i in 0..y.data().len() {
            prop_assert!(((p.a.data()[i] + p.b.data()[i]) - (y.data()[i] + yb.data()[i])).abs() <= 1e-6);
        }
    }

    #[test]
    fn nps_is_a_bounded_symmetric_dissimilarity(a in 0f64..=1.0, b in 0f64..=1.0, alpha in 0.5f64..20.0) {
        let v = nps(a, b, alpha);
        prop_assert!((0.0..1.0).contains(&v));
        prop_assert_eq!(v, nps(b, a, alpha));
        prop_assert_eq!(nps(a, a, alpha), 0.0);
    }

    #[test]
    fn one_hot_focus_selects_sources(p in pair(6, 7, 3), bits in prop::collection::vec(any::<bool>(), 42)) {
        let z0: Vec<f64> = bits.iter().map(|&b| b as u8 as f64).collect();
        let z = FeatureMap { channels: 2, height: 6, width: 7, data: z0.iter().copied().chain(z0.iter().map(|v| 1.0 - v)).collect() };
        let f = weighted_fuse(&p, &z).unwrap();
        for (i, &b) in bits.iter().enumerate() {
            let src = if b { &p.a } else { &p.b };
            prop_assert_eq!(f.pixel(i / 7, i % 7), src.pixel(i / 7, i % 7));
        }
    }

    #[test]
    fn nearest_source_snaps_and_is_idempotent(p in pair(5, 6, 3), f in image(5, 6, 3)) {
        let n = nearest_source(&f, &p).unwrap();
        for y in 0..5 {
            for x in 0..6 {
                prop_assert!(n.pixel(y, x) == p.a.pixel(y, x) || n.pixel(y, x) == p.b.pixel(y, x));
            }
        }
        prop_assert_eq!(nearest_source(&n, &p).unwrap(), n);
    }

    #[test]
    fn metrics_are_symmetric_in_the_sources(p in pair(12, 12, 1), f in image(12, 12, 1)) {
        let (a, b) = (&p.a, &p.b);
        prop_assert!((q_mi(a, b, &f).unwrap() - q_mi(b, a, &f).unwrap()).abs() < 1e-12);
        prop_assert!((q_te(a, b, &f, 1.85).unwrap() - q_te(b, a, &f, 1.85).unwrap()).abs() < 1e-9);
        prop_assert!((q_ncie(a, b, &f).unwrap() - q_ncie(b, a, &f).unwrap()).abs() < 1e-9);
        prop_assert!((q_g(a, b, &f).unwrap() - q_g(b, a, &f).unwrap()).abs() < 1e-12);
        prop_assert!((q_s(a, b, &f).unwrap() - q_s(b, a, &f).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ssim_is_bounded_with_unit_self_similarity(p in pair(10, 13, 3)) {
        let s = ssim(&p.a, &p.b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert!((ssim(&p.a, &p.a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checkpoints_round_trip_bitwise(depth in 1usize..4, base in 1usize..5, reg in any::<bool>(), seed in any::<u64>()) {
        let head = if reg { Head::Reg } else { Head::Seg };
        let params = init_parameters(HourglassConfig { depth, base_channels: base, head }, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (back, cfg) = decode_checkpoint(&encode_checkpoint(&params)).unwrap();
        prop_assert_eq!(&cfg, params.config());
        prop_assert_eq!(back, params);
    }

    #[test]
    fn average_is_commutative(p in sized_pair(3)) {
        let fwd = fuse_pair(&Fuser::Average, &p).unwrap();
        prop_assert_eq!(fwd, fuse_pair(&Fuser::Average, &p.reversed()).unwrap());
    }
}
