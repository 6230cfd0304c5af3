use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};

/// Number of input channels: two stacked RGB sources.
pub const IN_CHANNELS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    /// Two-channel softmax focus map.
    Seg,
    /// Three-channel all-in-focus regression.
    Reg,
}

impl Head {
    pub fn out_channels(self) -> usize {
        match self {
            Head::Seg => 2,
            Head::Reg => 3,
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Head::Seg => 0,
            Head::Reg => 1,
        }
    }

    pub fn from_id(id: u32) -> Option<Head> {
        match id {
            0 => Some(Head::Seg),
            1 => Some(Head::Reg),
            _ => None,
        }
    }
}

impl std::str::FromStr for Head {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seg" => Ok(Head::Seg),
            "reg" => Ok(Head::Reg),
            other => Err(invalid(format!("unknown head '{other}' (expected seg or reg)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HourglassConfig {
    /// Number of encoder levels; inputs are downsampled `depth` times.
    pub depth: usize,
    /// Channels at the first level; doubled at every level below.
    pub base_channels: usize,
    pub head: Head,
}

impl HourglassConfig {
    /// Desk-scale default: depth 3, 16 base channels.
    pub fn desk(head: Head) -> Self {
        Self {
            depth: 3,
            base_channels: 16,
            head,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.depth > 8 {
            return Err(invalid(format!("depth must be in 1..=8, got {}", self.depth)));
        }
        if self.base_channels == 0 || self.base_channels > 1024 {
            return Err(invalid(format!("base channels must be in 1..=1024, got {}", self.base_channels)));
        }
        Ok(())
    }

    pub(crate) fn level_channels(&self, level: usize) -> usize {
        self.base_channels << level
    }

    /// `(in, out)` channels of every convolution in execution order:
    /// encoder pairs, bottleneck pair, decoder triples (upsample conv,
    /// post-concat conv, conv), then the head.
    pub fn conv_layout(&self) -> Vec<(usize, usize)> {
        let mut convs = Vec::new();
        let mut prev = IN_CHANNELS;
        for l in 0..self.depth {
            let c = self.level_channels(l);
            convs.push((prev, c));
            convs.push((c, c));
            prev = c;
        }
        let bottom = self.level_channels(self.depth);
        convs.push((prev, bottom));
        convs.push((bottom, bottom));
        let mut prev = bottom;
        for l in (0..self.depth).rev() {
            let c = self.level_channels(l);
            convs.push((prev, c));
            convs.push((2 * c, c));
            convs.push((c, c));
            prev = c;
        }
        convs.push((prev, self.head.out_channels()));
        convs
    }

    /// Shapes of every parameter tensor: per convolution its
    /// `[out, in, 3, 3]` kernel followed by its `[out]` bias.
    pub fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        self.conv_layout()
            .into_iter()
            .flat_map(|(i, o)| [vec![o, i, 3, 3], vec![o]])
            .collect()
    }

    /// Spatial multiple inputs are padded to.
    pub fn alignment(&self) -> usize {
        1 << self.depth
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(invalid("tensor data does not match shape"));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Learnable weights of an hourglass network, in `tensor_shapes` order.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    config: HourglassConfig,
    tensors: Vec<Tensor>,
}

impl Parameters {
    pub fn from_tensors(config: HourglassConfig, tensors: Vec<Tensor>) -> Result<Self> {
        config.validate()?;
        let shapes = config.tensor_shapes();
        if shapes.len() != tensors.len() || shapes.iter().zip(&tensors).any(|(s, t)| *s != t.shape) {
            return Err(Error::ShapeMismatch(
                "tensors do not match the configuration's layout".into(),
            ));
        }
        if tensors.iter().any(|t| t.data.iter().any(|v| !v.is_finite())) {
            return Err(invalid("parameters must be finite"));
        }
        Ok(Self { config, tensors })
    }

    pub fn zeros(config: HourglassConfig) -> Result<Self> {
        config.validate()?;
        let tensors = config.tensor_shapes().into_iter().map(Tensor::zeros).collect();
        Ok(Self { config, tensors })
    }

    pub fn config(&self) -> &HourglassConfig {
        &self.config
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub(crate) fn to_f64(&self) -> Vec<Vec<f64>> {
        self.tensors
            .iter()
            .map(|t| t.data.iter().map(|&v| v as f64).collect())
            .collect()
    }
}

/// Gradients co-shaped with [`Parameters`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &Parameters) -> Self {
        Self {
            tensors: params.tensors().iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.tensors.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|v| v.is_finite())
    }
}

/// `n` draws from `Normal(0, 2/(fan_in+fan_out))`.
pub fn xavier_normal<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, n: usize, rng: &mut R) -> Vec<f32> {
    let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Normal::new(0.0, std).expect("positive std");
    (0..n).map(|_| dist.sample(rng) as f32).collect()
}

/// Xavier-normal kernels and zero biases.
pub fn init_parameters<R: Rng + ?Sized>(config: HourglassConfig, rng: &mut R) -> Result<Parameters> {
    config.validate()?;
    let mut tensors = Vec::new();
    for (i, o) in config.conv_layout() {
        let w = xavier_normal(i * 9, o * 9, o * i * 9, rng);
        tensors.push(Tensor::new(vec![o, i, 3, 3], w)?);
        tensors.push(Tensor::zeros(vec![o]));
    }
    Parameters::from_tensors(config, tensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_parameters() {
        let cfg = HourglassConfig::desk(Head::Seg);
        let a = init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        let c = init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn biases_start_at_zero() {
        let cfg = HourglassConfig::desk(Head::Reg);
        let p = init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for t in p.tensors().iter().filter(|t| t.shape.len() == 1) {
            assert!(t.data.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn xavier_sample_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = xavier_normal(54, 144, 20_000, &mut rng);
        let n = w.len() as f64;
        let mean = w.iter().map(|&v| v as f64).sum::<f64>() / n;
        let std = (w.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n).sqrt();
        let expect = (2.0f64 / 198.0).sqrt();
        assert!((std - expect).abs() / expect < 0.1);
    }

    #[test]
    fn first_layer_fans() {
        let cfg = HourglassConfig::desk(Head::Seg);
        assert_eq!(cfg.conv_layout()[0], (6, 16));
        assert_eq!(cfg.tensor_shapes()[0], vec![16, 6, 3, 3]);
    }

    #[test]
    fn head_output_channels() {
        let seg = HourglassConfig::desk(Head::Seg).conv_layout();
        assert_eq!(seg.last().unwrap().1, 2);
        let reg = HourglassConfig::desk(Head::Reg).conv_layout();
        assert_eq!(reg.last().unwrap().1, 3);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = HourglassConfig::desk(Head::Seg);
        cfg.depth = 0;
        assert!(cfg.validate().is_err());
        assert!("xyz".parse::<Head>().is_err());
    }
}
