use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;

use crate::error::{Error, Result};

/// Hidden-layer reduction ratio of the channel-attention MLP.
pub const CBAM_REDUCTION: usize = 16;

const MAGIC: &[u8; 4] = b"XWTS";
const FORMAT_VERSION: u32 = 1;

/// Convolution parameters, `out x in x k x k` weights plus one bias per output.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    out_channels: usize,
    in_channels: usize,
    kernel: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl ConvWeights {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if out_channels == 0 || in_channels == 0 {
            return Err(Error::Shape("conv channel counts must be >= 1".into()));
        }
        if kernel % 2 == 0 {
            return Err(Error::Shape(format!("conv kernel must be odd, got {kernel}")));
        }
        let expected = out_channels * in_channels * kernel * kernel;
        if weights.len() != expected || bias.len() != out_channels {
            return Err(Error::Shape(format!(
                "conv {out_channels}x{in_channels}x{kernel}x{kernel} needs {expected} weights and \
                 {out_channels} biases, got {} and {}",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Validation("conv parameters must be finite".into()));
        }
        Ok(Self { out_channels, in_channels, kernel, weights, bias })
    }

    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> Result<Self> {
        Self::new(
            out_channels,
            in_channels,
            kernel,
            vec![0.0; out_channels * in_channels * kernel * kernel],
            vec![0.0; out_channels],
        )
    }

    /// Uniform in `+-1/sqrt(fan_in)`, bias included.
    pub fn seeded(out_channels: usize, in_channels: usize, kernel: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / ((in_channels * kernel * kernel) as f64).sqrt();
        let weights = (0..out_channels * in_channels * kernel * kernel)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let bias = (0..out_channels).map(|_| rng.gen_range(-bound..bound)).collect();
        Self::new(out_channels, in_channels, kernel, weights, bias)
            .expect("seeded conv shape is consistent")
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((out * self.in_channels + inp) * self.kernel + ky) * self.kernel + kx]
    }

    fn expect_shape(&self, name: &str, out: usize, inp: usize, kernel: usize) -> Result<()> {
        if (self.out_channels, self.in_channels, self.kernel) != (out, inp, kernel) {
            return Err(Error::Shape(format!(
                "{name}: expected {out}x{inp}x{kernel}x{kernel}, got {}x{}x{}x{}",
                self.out_channels, self.in_channels, self.kernel, self.kernel
            )));
        }
        Ok(())
    }

    fn to_tensors(&self) -> [WeightTensor; 2] {
        [
            WeightTensor {
                shape: vec![self.out_channels, self.in_channels, self.kernel, self.kernel],
                values: self.weights.clone(),
            },
            WeightTensor { shape: vec![self.out_channels], values: self.bias.clone() },
        ]
    }

    fn from_tensors(weights: &WeightTensor, bias: &WeightTensor) -> Result<Self> {
        let &[out, inp, kh, kw] = weights.shape.as_slice() else {
            return Err(Error::Shape(format!("conv weights must be rank 4, got {:?}", weights.shape)));
        };
        if kh != kw || bias.shape != [out] {
            return Err(Error::Shape(format!(
                "inconsistent conv tensors {:?} / {:?}",
                weights.shape, bias.shape
            )));
        }
        Self::new(out, inp, kh, weights.values.clone(), bias.values.clone())
    }
}

/// One SPPF branch: a channel-halving 1x1 conv before pooling and a 1x1
/// fusion conv after the four-way concat.
#[derive(Debug, Clone, PartialEq)]
pub struct SppfBranch {
    pub pre_conv: ConvWeights,
    pub post_conv: ConvWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SppfWeights {
    pub max_branch: SppfBranch,
    pub soft_branch: SppfBranch,
}

impl SppfWeights {
    pub fn seeded(channels: usize, rng: &mut impl Rng) -> Result<Self> {
        if channels < 2 || channels % 2 != 0 {
            return Err(Error::Shape(format!("SPPF needs an even channel count, got {channels}")));
        }
        let half = channels / 2;
        let mut branch = || SppfBranch {
            pre_conv: ConvWeights::seeded(half, channels, 1, rng),
            post_conv: ConvWeights::seeded(half, 2 * channels, 1, rng),
        };
        Ok(Self { max_branch: branch(), soft_branch: branch() })
    }

    /// Checks the channel wiring for an input with `channels` channels.
    pub fn validate(&self, channels: usize) -> Result<()> {
        if channels < 2 || channels % 2 != 0 {
            return Err(Error::Shape(format!("SPPF needs an even channel count, got {channels}")));
        }
        let half = channels / 2;
        for (name, b) in [("max", &self.max_branch), ("soft", &self.soft_branch)] {
            b.pre_conv.expect_shape(&format!("{name} pre_conv"), half, channels, b.pre_conv.kernel)?;
            b.post_conv.expect_shape(&format!("{name} post_conv"), half, 2 * channels, b.post_conv.kernel)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftCbamWeights {
    /// `C -> C/r` 1x1 conv, followed by ReLU.
    pub mlp_reduce: ConvWeights,
    /// `C/r -> C` 1x1 conv.
    pub mlp_expand: ConvWeights,
    /// `2 -> 1` 7x7 conv over the stacked channel soft-pool / max maps.
    pub spatial_conv: ConvWeights,
}

impl SoftCbamWeights {
    pub fn hidden_channels(channels: usize, reduction: usize) -> usize {
        (channels / reduction.max(1)).max(1)
    }

    pub fn seeded(channels: usize, reduction: usize, rng: &mut impl Rng) -> Self {
        let hidden = Self::hidden_channels(channels, reduction);
        Self {
            mlp_reduce: ConvWeights::seeded(hidden, channels, 1, rng),
            mlp_expand: ConvWeights::seeded(channels, hidden, 1, rng),
            spatial_conv: ConvWeights::seeded(1, 2, 7, rng),
        }
    }

    pub fn zeros(channels: usize, reduction: usize) -> Self {
        let hidden = Self::hidden_channels(channels, reduction);
        Self {
            mlp_reduce: ConvWeights::zeros(hidden, channels, 1).expect("valid shape"),
            mlp_expand: ConvWeights::zeros(channels, hidden, 1).expect("valid shape"),
            spatial_conv: ConvWeights::zeros(1, 2, 7).expect("valid shape"),
        }
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        let hidden = self.mlp_reduce.out_channels;
        self.mlp_reduce.expect_shape("mlp_reduce", hidden, channels, 1)?;
        self.mlp_expand.expect_shape("mlp_expand", channels, hidden, 1)?;
        self.spatial_conv.expect_shape("spatial_conv", 1, 2, 7)
    }
}

/// Parameters for the SPPF + Soft-CBAM demonstration, in weight-file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleWeights {
    pub sppf: SppfWeights,
    pub cbam: SoftCbamWeights,
}

impl ModuleWeights {
    pub fn seeded(channels: usize, rng: &mut impl Rng) -> Result<Self> {
        Ok(Self {
            sppf: SppfWeights::seeded(channels, rng)?,
            cbam: SoftCbamWeights::seeded(channels, CBAM_REDUCTION, rng),
        })
    }

    fn convs(&self) -> [&ConvWeights; 7] {
        [
            &self.sppf.max_branch.pre_conv,
            &self.sppf.max_branch.post_conv,
            &self.sppf.soft_branch.pre_conv,
            &self.sppf.soft_branch.post_conv,
            &self.cbam.mlp_reduce,
            &self.cbam.mlp_expand,
            &self.cbam.spatial_conv,
        ]
    }

    pub fn to_tensors(&self) -> Vec<WeightTensor> {
        self.convs().iter().flat_map(|c| c.to_tensors()).collect()
    }

    pub fn from_tensors(tensors: &[WeightTensor]) -> Result<Self> {
        if tensors.len() != 14 {
            return Err(Error::Shape(format!(
                "module weights need 14 tensors (7 convs), got {}",
                tensors.len()
            )));
        }
        let conv = |i: usize| ConvWeights::from_tensors(&tensors[2 * i], &tensors[2 * i + 1]);
        Ok(Self {
            sppf: SppfWeights {
                max_branch: SppfBranch { pre_conv: conv(0)?, post_conv: conv(1)? },
                soft_branch: SppfBranch { pre_conv: conv(2)?, post_conv: conv(3)? },
            },
            cbam: SoftCbamWeights {
                mlp_reduce: conv(4)?,
                mlp_expand: conv(5)?,
                spatial_conv: conv(6)?,
            },
        })
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        self.sppf.validate(channels)?;
        self.cbam.validate(channels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// Layout (all little-endian): magic `XWTS`, u32 version, u32 tensor count,
/// then per tensor a u32 rank, `rank` u32 dimensions and the f64 values.
pub fn write_weights<W: Write>(mut out: W, tensors: &[WeightTensor]) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    out.write_u32::<LittleEndian>(tensors.len() as u32)?;
    for t in tensors {
        out.write_u32::<LittleEndian>(t.shape.len() as u32)?;
        for &d in &t.shape {
            out.write_u32::<LittleEndian>(d as u32)?;
        }
        for &v in &t.values {
            out.write_f64::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

pub fn read_weights<R: Read>(mut input: R) -> Result<Vec<WeightTensor>> {
    let corrupt = |what: &str| Error::Validation(format!("corrupt weight file: {what}"));
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(|_| corrupt("truncated header"))?;
    if &magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = input.read_u32::<LittleEndian>().map_err(|_| corrupt("truncated header"))?;
    if version != FORMAT_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let count = input.read_u32::<LittleEndian>().map_err(|_| corrupt("truncated header"))?;
    let mut tensors = Vec::new();
    for idx in 0..count {
        let rank = input.read_u32::<LittleEndian>().map_err(|_| corrupt("truncated tensor header"))?;
        if rank == 0 || rank > 8 {
            return Err(corrupt(&format!("tensor {idx} has rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank as usize);
        for _ in 0..rank {
            shape.push(input.read_u32::<LittleEndian>().map_err(|_| corrupt("truncated shape"))? as usize);
        }
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= 1 << 28)
            .ok_or_else(|| corrupt(&format!("tensor {idx} is implausibly large")))?;
        let mut values = vec![0.0; len];
        input
            .read_f64_into::<LittleEndian>(&mut values)
            .map_err(|_| corrupt(&format!("tensor {idx} truncated")))?;
        tensors.push(WeightTensor { shape, values });
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest).map_err(|_| corrupt("read failed"))? != 0 {
        return Err(corrupt("trailing bytes"));
    }
    Ok(tensors)
}

pub fn write_weight_file(path: impl AsRef<Path>, weights: &ModuleWeights) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_weights(&mut out, &weights.to_tensors()).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_weight_file(path: impl AsRef<Path>) -> Result<ModuleWeights> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    ModuleWeights::from_tensors(&read_weights(bytes.as_slice())?)
}
