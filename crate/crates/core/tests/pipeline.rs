use mfif::dataset::manifest::{load_dataset_manifest, procedural_samples};
use mfif::dataset::{example_rng, synthesize_example, SynthesisConfig};
use mfif::fusion::{fuse_pair, Fuser};
use mfif::imaging::io::{load_png, save_label_mask, save_png};
use mfif::metrics::evaluate;
use mfif::network::{init_parameters, load_checkpoint_expecting, save_checkpoint, train, Head, HourglassConfig, Objective, Schedule};
use mfif::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthesis() -> SynthesisConfig {
    SynthesisConfig {
        crop: 24,
        seed: 3,
        ..SynthesisConfig::default()
    }
}

#[test]
fn train_checkpoint_fuse_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let samples = procedural_samples(1, 6, 24, 24, 2).unwrap();
    let cfg = HourglassConfig {
        depth: 2,
        base_channels: 4,
        head: Head::Reg,
    };
    let mut params = init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let schedule = Schedule {
        epochs: 2,
        learning_rate: 1e-3,
        synthesis: synthesis(),
        ..Schedule::default()
    };
    let report = train(&mut params, &samples, Objective::Nps { alpha: 6.0 }, &schedule, None).unwrap();
    assert_eq!(report.iterations(), 4);

    let path = dir.path().join("model.mfhg");
    save_checkpoint(&params, &path).unwrap();
    let loaded = load_checkpoint_expecting(&path, &cfg).unwrap();
    assert_eq!(loaded, params);
    let other = HourglassConfig { depth: 3, ..cfg };
    assert!(matches!(load_checkpoint_expecting(&path, &other), Err(Error::ShapeMismatch(_))));

    let e = synthesize_example(&samples[0], &synthesis(), &mut example_rng(9, 0)).unwrap();
    for near in [false, true] {
        let fuser = Fuser::from_model(loaded.clone(), near);
        let fused = fuse_pair(&fuser, &e.pair).unwrap();
        assert_eq!(fused.dims(), e.pair.dims());
        let r = evaluate(&e.pair.a, &e.pair.b, &fused, Some(&e.truth)).unwrap();
        assert!(r.ssim.unwrap().is_finite() && r.q_mi.is_finite() && r.q_g.is_finite());
    }
}

#[test]
fn png_dataset_manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let samples = procedural_samples(4, 2, 20, 16, 2).unwrap();
    let mut lines = String::new();
    for (i, s) in samples.iter().enumerate() {
        let (h, w) = s.mask.dims();
        save_png(&s.image, dir.path().join(format!("img{i}.png"))).unwrap();
        save_label_mask(h, w, s.mask.labels(), dir.path().join(format!("mask{i}.png"))).unwrap();
        lines += &format!("{{\"image_path\": \"img{i}.png\", \"mask_path\": \"mask{i}.png\"}}\n");
    }
    lines += "{\"seed\": 4, \"count\": 1, \"width\": 20, \"height\": 16, \"n_objects\": 2}\n";
    let manifest = dir.path().join("data.jsonl");
    std::fs::write(&manifest, lines).unwrap();

    let loaded = load_dataset_manifest(&manifest).unwrap();
    assert_eq!(loaded.len(), 3);
    assert_eq!(loaded[0].mask, samples[0].mask);
    let png = load_png(dir.path().join("img0.png")).unwrap();
    assert_eq!(loaded[0].image, png);
    // 8-bit quantization is the only loss.
    let err = png.data().iter().zip(samples[0].image.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max);
    assert!(err <= 0.5 / 255.0 + 1e-6);
    assert_eq!(loaded[2].mask, samples[0].mask);
}
