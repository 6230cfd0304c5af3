//! `mfif`: synthesize training data, train hourglass fusion networks, fuse
//! pairs and bursts, score fusion quality and time inference.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 I/O error,
//! 3 numerical abort.

mod settings;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mfif::dataset::manifest::{load_dataset_manifest, procedural_samples, read_jsonl, resolve, write_jsonl, EvalRecord, SynthRecord};
use mfif::dataset::{example_rng, generate_procedural_sample, load_segmented_samples, synthesize_example, SegmentedSample, SynthesisConfig};
use mfif::fusion::{focus_map, fuse_burst, fuse_pair, Fuser};
use mfif::imaging::io::{load_any, save_png, save_raw};
use mfif::metrics::{bias_study, csv_header, evaluate, summarize, write_csv_row, MetricReport, StudyPair};
use mfif::network::{init_parameters, load_checkpoint, save_checkpoint, train_with_progress, Checkpointing, Head, HourglassConfig, Objective, Parameters, Schedule};
use mfif::{par, Error, Image, SourcePair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use settings::ConfigFile;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) | Error::Decode { .. } | Error::Format(_) => Failure::Io(msg),
            Error::NonFiniteLoss { .. } => Failure::Numerical(msg),
            _ => Failure::Config(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "mfif", version, about = "Multi-focus image fusion with hourglass networks")]
struct Cli {
    /// Line-oriented key=value file supplying any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice of the run (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic (A, B, truth, target) examples and a manifest.
    Synth(SynthArgs),
    /// Train a segmentation or regression hourglass.
    Train(TrainArgs),
    /// Fuse two or more co-registered images.
    Fuse(FuseArgs),
    /// Score fused images, or compare baseline fusers.
    Eval(EvalArgs),
    /// Time pairwise fusion at several image sizes.
    Bench(BenchArgs),
}

/// Where segmented samples come from.
#[derive(Args)]
struct SampleSource {
    /// Dataset manifest (JSON lines of file pairs or procedural records).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Directory of sharp PNG images, paired by name with --masks.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Directory of PNG label masks.
    #[arg(long)]
    masks: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesisFlags {
    #[arg(long)]
    sigma_low: Option<f64>,
    #[arg(long)]
    sigma_high: Option<f64>,
    /// Upper bound of the per-example noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of examples (default 10).
    #[arg(long)]
    count: Option<usize>,
    /// Procedural sample width when no dataset is given (default 64).
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Objects per procedural sample (default 3).
    #[arg(long)]
    objects: Option<usize>,
    #[command(flatten)]
    source: SampleSource,
    #[command(flatten)]
    synthesis: SynthesisFlags,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    source: SampleSource,
    /// Passes over the samples (default 1000).
    #[arg(long)]
    epochs: Option<usize>,
    /// Examples per minibatch before reversed tuples are added (default 3).
    #[arg(long)]
    batch: Option<usize>,
    /// Adam learning rate (default 1e-5).
    #[arg(long)]
    lr: Option<f64>,
    /// NPS steepness (default 6).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    /// Channels of the first level (default 16).
    #[arg(long)]
    channels: Option<usize>,
    /// seg or reg (default seg).
    #[arg(long)]
    head: Option<String>,
    /// bce, nps, l1 or mse (default bce for seg, nps for reg).
    #[arg(long)]
    loss: Option<String>,
    /// Training crop side (default 400).
    #[arg(long)]
    crop: Option<usize>,
    /// Save a checkpoint every N epochs (default 100; 0 disables).
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Train without the reversed tuples.
    #[arg(long)]
    plain: bool,
    #[command(flatten)]
    synthesis: SynthesisFlags,
}

#[derive(Args)]
struct FuseArgs {
    /// Frames to fuse, folded left to right.
    inputs: Vec<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// model, dummy-a, dummy-b or average (default model).
    #[arg(long)]
    strategy: Option<String>,
    /// Output image (.png, or .raw for float samples; default fused.png).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the segmentation focus map (two inputs only).
    #[arg(long)]
    focus_map: Option<PathBuf>,
    /// Snap regression output to the nearer source pixel.
    #[arg(long)]
    near: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON lines of {source_a, source_b, fused?, reference?} records.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare dummy, average (and model, with --checkpoint) fusers instead.
    #[arg(long)]
    bias: bool,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    near: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Model to time; a freshly initialized one when absent.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Comma-separated square sizes (default 130,260,520).
    #[arg(long)]
    sizes: Option<String>,
    /// Repetitions per size (default 3).
    #[arg(long)]
    repeat: Option<usize>,
    #[arg(long)]
    head: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    /// CSV output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn required<T>(v: Option<T>, key: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::Config(format!("--{key} is required")))
}

fn synthesis_config(cfg: &mut ConfigFile, f: &SynthesisFlags, crop: usize, seed: u64) -> CliResult<SynthesisConfig> {
    let d = SynthesisConfig::default();
    let s = SynthesisConfig {
        sigma_low: cfg.pick_or("sigma-low", f.sigma_low, d.sigma_low)?,
        sigma_high: cfg.pick_or("sigma-high", f.sigma_high, d.sigma_high)?,
        noise_std_high: cfg.pick_or("noise", f.noise, d.noise_std_high)?,
        crop,
        seed,
    };
    s.validate()?;
    Ok(s)
}

fn load_samples(cfg: &mut ConfigFile, src: &SampleSource) -> CliResult<Option<Vec<SegmentedSample>>> {
    let dataset = cfg.pick::<PathBuf>("dataset", src.dataset.clone())?;
    let images = cfg.pick::<PathBuf>("images", src.images.clone())?;
    let masks = cfg.pick::<PathBuf>("masks", src.masks.clone())?;
    match (dataset, images, masks) {
        (Some(d), None, None) => Ok(Some(load_dataset_manifest(d)?)),
        (None, Some(i), Some(m)) => Ok(Some(load_segmented_samples(i, m)?)),
        (None, None, None) => Ok(None),
        _ => Err(Failure::Config("give either --dataset or both --images and --masks".into())),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_synth(a: SynthArgs, cfg: &mut ConfigFile, seed: u64) -> CliResult<()> {
    let out = required(cfg.pick("out", a.out)?, "out")?;
    let count = cfg.pick_or("count", a.count, 10)?;
    let width = cfg.pick_or("width", a.width, 64)?;
    let height = cfg.pick_or("height", a.height, 64)?;
    let objects = cfg.pick_or("objects", a.objects, 3)?;
    let synthesis = synthesis_config(cfg, &a.synthesis, 0, seed)?;
    let given = load_samples(cfg, &a.source)?;
    cfg.finish_ref()?;
    if let Some(s) = &given {
        if s.is_empty() && count > 0 {
            return Err(Failure::Config("the dataset holds no samples".into()));
        }
    }
    create_dir(&out)?;

    let examples = par::map_range(count, |i| {
        let mut rng = example_rng(seed, i as u64);
        let sample = match &given {
            Some(s) => s[i % s.len()].clone(),
            None => generate_procedural_sample(width, height, objects, &mut rng)?,
        };
        synthesize_example(&sample, &synthesis, &mut rng)
    });
    let mut records = Vec::with_capacity(count);
    for (i, e) in examples.into_iter().enumerate() {
        let e = e?;
        let id = format!("{i:05}");
        let name = |part: &str| PathBuf::from(format!("{id}_{part}.png"));
        save_png(&e.pair.a, out.join(name("a")))?;
        save_png(&e.pair.b, out.join(name("b")))?;
        save_png(&e.truth, out.join(name("truth")))?;
        save_png(&e.target.to_image(), out.join(name("target")))?;
        records.push(SynthRecord {
            id: id.clone(),
            source_a: name("a"),
            source_b: name("b"),
            truth: name("truth"),
            target: name("target"),
            sigma: e.sigma,
        });
    }
    write_jsonl(out.join("manifest.jsonl"), &records)?;
    eprintln!("wrote {count} examples to {}", out.display());
    Ok(())
}

fn parse_head(s: &str) -> CliResult<Head> {
    s.parse().map_err(|_| Failure::Config(format!("unknown head {s:?}; expected seg or reg")))
}

fn model_config(cfg: &mut ConfigFile, head: Option<String>, depth: Option<usize>, channels: Option<usize>) -> CliResult<HourglassConfig> {
    let head = parse_head(&cfg.pick_or("head", head, "seg".to_string())?)?;
    let desk = HourglassConfig::desk(head);
    let c = HourglassConfig {
        depth: cfg.pick_or("depth", depth, desk.depth)?,
        base_channels: cfg.pick_or("channels", channels, desk.base_channels)?,
        head,
    };
    c.validate()?;
    Ok(c)
}

fn cmd_train(a: TrainArgs, cfg: &mut ConfigFile, seed: u64) -> CliResult<()> {
    let out = required(cfg.pick("out", a.out)?, "out")?;
    let model = model_config(cfg, a.head, a.depth, a.channels)?;
    let default_loss = if model.head == Head::Seg { "bce" } else { "nps" };
    let loss = cfg.pick_or("loss", a.loss, default_loss.to_string())?;
    let alpha = cfg.pick_or("alpha", a.alpha, 6.0)?;
    let objective = Objective::parse(&loss, alpha)?;
    if objective.head() != model.head {
        return Err(Failure::Config(format!("{loss} loss does not fit the {} head", if model.head == Head::Seg { "seg" } else { "reg" })));
    }
    let crop = cfg.pick_or("crop", a.crop, SynthesisConfig::default().crop)?;
    let schedule = Schedule {
        epochs: cfg.pick_or("epochs", a.epochs, 1000)?,
        batch_size: cfg.pick_or("batch", a.batch, 3)?,
        learning_rate: cfg.pick_or("lr", a.lr, 1e-5)?,
        commutative: !cfg.switch("plain", a.plain)?,
        synthesis: synthesis_config(cfg, &a.synthesis, crop, seed)?,
    };
    let every = cfg.pick_or("checkpoint-every", a.checkpoint_every, 100)?;
    let samples = load_samples(cfg, &a.source)?.ok_or_else(|| Failure::Config("training needs --dataset or --images/--masks".into()))?;
    cfg.finish_ref()?;
    if schedule.epochs > 0 && samples.is_empty() {
        return Err(Failure::Config("the dataset holds no samples".into()));
    }
    create_dir(&out)?;

    let mut params = init_parameters(model, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let run = serde_json::json!({
        "seed": seed, "depth": model.depth, "channels": model.base_channels,
        "head": if model.head == Head::Seg { "seg" } else { "reg" }, "loss": objective.name(), "alpha": alpha,
        "epochs": schedule.epochs, "batch": schedule.batch_size, "lr": schedule.learning_rate,
        "commutative": schedule.commutative, "crop": crop, "sigma_low": schedule.synthesis.sigma_low,
        "sigma_high": schedule.synthesis.sigma_high, "noise": schedule.synthesis.noise_std_high,
        "samples": samples.len(), "checkpoint_every": every,
    });
    fs::write(out.join("run.json"), serde_json::to_string_pretty(&run).expect("json value"))?;

    let checkpointing = (every > 0).then(|| Checkpointing {
        dir: out.join("checkpoints"),
        every,
    });
    let epochs = schedule.epochs;
    let started = Instant::now();
    let report = train_with_progress(&mut params, &samples, objective, &schedule, checkpointing.as_ref(), |e, loss| {
        eprintln!("epoch {}/{epochs} loss {loss:.6} ({:.1}s)", e + 1, started.elapsed().as_secs_f64());
    })?;
    save_checkpoint(&params, out.join("model.mfhg"))?;

    let mut trace = String::from("epoch,mean_loss\n");
    for (e, l) in report.epoch_losses.iter().enumerate() {
        trace += &format!("{},{l:.8}\n", e + 1);
    }
    fs::write(out.join("loss_trace.csv"), trace)?;
    let mut iters = String::from("iteration,loss\n");
    for (i, l) in report.iteration_losses.iter().enumerate() {
        iters += &format!("{},{l:.8}\n", i + 1);
    }
    fs::write(out.join("iterations.csv"), iters)?;
    eprintln!("{} iterations; model written to {}", report.iterations(), out.join("model.mfhg").display());
    Ok(())
}

fn load_model(path: &Path, near: bool) -> CliResult<Fuser> {
    let (params, _) = load_checkpoint(path)?;
    Ok(Fuser::from_model(params, near))
}

fn save_image(image: &Image, path: &Path) -> CliResult<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("raw") | Some("mfimg") => save_raw(image, path)?,
        _ => save_png(image, path)?,
    }
    Ok(())
}

fn cmd_fuse(a: FuseArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let strategy = cfg.pick_or("strategy", a.strategy, "model".to_string())?;
    let checkpoint = cfg.pick::<PathBuf>("checkpoint", a.checkpoint)?;
    let out = cfg.pick_or("out", a.out, PathBuf::from("fused.png"))?;
    let focus_out = cfg.pick::<PathBuf>("focus-map", a.focus_map)?;
    let near = cfg.switch("near", a.near)?;
    cfg.finish_ref()?;
    if a.inputs.len() < 2 {
        return Err(Failure::Config("fusion needs at least two input images".into()));
    }
    let fuser = match strategy.as_str() {
        "model" => load_model(&required(checkpoint, "checkpoint")?, near)?,
        "dummy-a" => Fuser::DummyA,
        "dummy-b" => Fuser::DummyB,
        "average" => Fuser::Average,
        s => return Err(Failure::Config(format!("unknown strategy {s:?}"))),
    };
    let mut frames = a.inputs.iter().map(load_any).collect::<Result<Vec<_>, _>>()?;
    if frames.iter().any(|f| f.dims() != frames[0].dims()) {
        return Err(Failure::Config("input images differ in size".into()));
    }
    let is_model = matches!(fuser, Fuser::HfSeg(_) | Fuser::HfReg { .. });
    if is_model || frames.iter().any(|f| f.channels() != frames[0].channels()) {
        frames = frames.iter().map(Image::to_rgb).collect();
    }
    let fused = fuse_burst(&fuser, &frames)?;
    save_image(&fused, &out)?;
    if let Some(path) = focus_out {
        if frames.len() != 2 {
            return Err(Failure::Config("--focus-map needs exactly two inputs".into()));
        }
        let pair = SourcePair::new(frames[0].clone(), frames[1].clone())?;
        let map = focus_map(&fuser, &pair)?.ok_or_else(|| Failure::Config("--focus-map needs a segmentation model".into()))?;
        save_image(&map, &path)?;
    }
    eprintln!("fused {} frames with {} into {}", frames.len(), fuser.name(), out.display());
    Ok(())
}

struct EvalItem {
    id: String,
    a: Image,
    b: Image,
    fused: Option<Image>,
    reference: Option<Image>,
}

fn load_eval_items(manifest: &Path) -> CliResult<Vec<EvalItem>> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let records: Vec<EvalRecord> = read_jsonl(manifest)?;
    let paths = |r: &EvalRecord| -> Vec<PathBuf> {
        [Some(&r.source_a), Some(&r.source_b), r.fused.as_ref(), r.reference.as_ref()]
            .into_iter()
            .flatten()
            .map(|p| resolve(base, p))
            .collect()
    };
    let missing: Vec<PathBuf> = records.iter().flat_map(paths).filter(|p| !p.exists()).collect();
    if !missing.is_empty() {
        for m in &missing {
            eprintln!("missing: {}", m.display());
        }
        return Err(Failure::Config(format!("{} files named in the manifest are missing", missing.len())));
    }
    let load = |p: &PathBuf| load_any(resolve(base, p));
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(EvalItem {
                id: r.id.clone().unwrap_or_else(|| format!("{i:05}")),
                a: load(&r.source_a)?,
                b: load(&r.source_b)?,
                fused: r.fused.as_ref().map(load).transpose()?,
                reference: r.reference.as_ref().map(load).transpose()?,
            })
        })
        .collect()
}

fn write_summary(out: &Path, reports: &[MetricReport], with_ssim: bool) -> CliResult<()> {
    let mut csv = String::from("metric,mean,std\n");
    for (name, s) in MetricReport::NAMES.iter().zip(summarize(reports)) {
        if *name == "ssim" && !with_ssim {
            continue;
        }
        if let Some((mean, std)) = s {
            csv += &format!("{name},{mean:.6},{std:.6}\n");
            println!("{name:>7}  {mean:.4} ± {std:.4}");
        }
    }
    fs::write(out, csv)?;
    Ok(())
}

fn cmd_eval(a: EvalArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let manifest = required(cfg.pick::<PathBuf>("manifest", a.manifest)?, "manifest")?;
    let out = cfg.pick_or("out", a.out, PathBuf::from("eval"))?;
    let bias = cfg.switch("bias", a.bias)?;
    let checkpoint = cfg.pick::<PathBuf>("checkpoint", a.checkpoint)?;
    let near = cfg.switch("near", a.near)?;
    cfg.finish_ref()?;
    let items = load_eval_items(&manifest)?;
    let with_ssim = items.iter().any(|i| i.reference.is_some());
    create_dir(&out)?;

    if bias {
        let mut fusers = vec![Fuser::DummyA, Fuser::DummyB, Fuser::Average];
        if let Some(c) = checkpoint {
            fusers.insert(0, load_model(&c, near)?);
        }
        let needs_rgb = fusers.len() == 4;
        let pairs: Vec<StudyPair> = items
            .into_iter()
            .map(|i| {
                let (a, b) = if needs_rgb { (i.a.to_rgb(), i.b.to_rgb()) } else { (i.a, i.b) };
                Ok((i.id, SourcePair::new(a, b)?, i.reference))
            })
            .collect::<CliResult<_>>()?;
        let table = bias_study(&pairs, &fusers)?;
        let mut csv = Vec::new();
        writeln!(csv, "{}", csv_header(with_ssim))?;
        for r in &table.rows {
            write_csv_row(&mut csv, &r.pair_id, &r.fuser, &r.report, with_ssim)?;
        }
        fs::write(out.join("bias.csv"), csv)?;
        let mut flags = String::from("pair_id,metric\n");
        for (id, metric) in table.flags() {
            flags += &format!("{id},{metric}\n");
        }
        fs::write(out.join("bias_flags.csv"), flags)?;
        for (k, name) in MetricReport::NAMES.iter().enumerate() {
            if *name == "ssim" && !with_ssim {
                continue;
            }
            println!("{name:>7}  dummy above average on {}/{} pairs", table.dummy_above_average(k), pairs.len());
        }
        return Ok(());
    }

    let reports = par::map_slice(&items, |i| -> CliResult<MetricReport> {
        let fused = i
            .fused
            .as_ref()
            .ok_or_else(|| Failure::Config(format!("record {} has no fused image", i.id)))?;
        Ok(evaluate(&i.a, &i.b, fused, i.reference.as_ref())?)
    })
    .into_iter()
    .collect::<CliResult<Vec<_>>>()?;
    let mut csv = Vec::new();
    writeln!(csv, "{}", csv_header(with_ssim))?;
    for (i, r) in items.iter().zip(&reports) {
        write_csv_row(&mut csv, &i.id, "given", r, with_ssim)?;
    }
    fs::write(out.join("metrics.csv"), csv)?;
    write_summary(&out.join("summary.csv"), &reports, with_ssim)
}

fn cmd_bench(a: BenchArgs, cfg: &mut ConfigFile, seed: u64) -> CliResult<()> {
    let checkpoint = cfg.pick::<PathBuf>("checkpoint", a.checkpoint)?;
    let sizes = cfg.pick_or("sizes", a.sizes, "130,260,520".to_string())?;
    let repeat = cfg.pick_or("repeat", a.repeat, 3)?;
    let model = model_config(cfg, a.head, a.depth, a.channels)?;
    let out = cfg.pick::<PathBuf>("out", a.out)?;
    cfg.finish_ref()?;
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok().filter(|&v| v > 0))
        .collect::<Option<_>>()
        .ok_or_else(|| Failure::Config(format!("bad --sizes {sizes:?}")))?;
    if repeat == 0 {
        return Err(Failure::Config("--repeat must be positive".into()));
    }
    let params: Parameters = match checkpoint {
        Some(c) => load_checkpoint(c)?.0,
        None => init_parameters(model, &mut ChaCha8Rng::seed_from_u64(seed))?,
    };
    let fuser = Fuser::from_model(params, false);

    let mut csv = String::from("size,repeat,mean_ms\n");
    for (k, &size) in sizes.iter().enumerate() {
        let sample = procedural_samples(seed ^ k as u64, 1, size, size, 3)?.remove(0);
        let e = synthesize_example(&sample, &SynthesisConfig::default(), &mut example_rng(seed, k as u64))?;
        let started = Instant::now();
        for _ in 0..repeat {
            std::hint::black_box(fuse_pair(&fuser, &e.pair)?);
        }
        let ms = started.elapsed().as_secs_f64() * 1e3 / repeat as f64;
        eprintln!("{size}x{size}: {ms:.2} ms");
        csv += &format!("{size},{repeat},{ms:.4}\n");
    }
    match out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = ConfigFile::load(cli.config.as_deref())?;
    let seed = cfg.pick_or("seed", cli.seed, 0u64)?;
    match cli.command {
        Command::Synth(a) => cmd_synth(a, &mut cfg, seed),
        Command::Train(a) => cmd_train(a, &mut cfg, seed),
        Command::Fuse(a) => cmd_fuse(a, &mut cfg),
        Command::Eval(a) => cmd_eval(a, &mut cfg),
        Command::Bench(a) => cmd_bench(a, &mut cfg, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
