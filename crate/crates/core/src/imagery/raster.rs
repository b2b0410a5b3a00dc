use std::path::Path;

use crate::error::{Error, Result};

/// Decoded 8-bit raster, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Validation(format!(
                "raster must have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(Error::Validation(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Image of constant value `fill` in every sample.
    pub fn filled(width: usize, height: usize, channels: usize, fill: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![fill; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        (row * self.width + col) * self.channels
    }

    /// All channel values of pixel `(row, col)`.
    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[u8] {
        let i = self.index(row, col);
        &self.samples[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, row: usize, col: usize) -> &mut [u8] {
        let i = self.index(row, col);
        let c = self.channels;
        &mut self.samples[i..i + c]
    }

    /// BT.601 luma with round-half-up; single-channel input is returned unchanged.
    pub fn to_grayscale(&self) -> RasterImage {
        if self.channels == 1 {
            return self.clone();
        }
        let samples = self
            .samples
            .chunks_exact(3)
            .map(|p| {
                // integer form of round(0.299 R + 0.587 G + 0.114 B)
                let weighted = 299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32;
                ((weighted + 500) / 1000).min(255) as u8
            })
            .collect();
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            samples,
        }
    }
}

/// Decodes an 8-bit grayscale or RGB image (PNG or PNM). Alpha is dropped and
/// other colour layouts are converted to RGB.
pub fn load_raster(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Decode(format!("{}: {other}", path.display())),
    })?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        image::DynamicImage::ImageLuma8(buf) => RasterImage::new(width, height, 1, buf.into_raw()),
        other => RasterImage::new(width, height, 3, other.to_rgb8().into_raw()),
    }
}

/// Encodes the raster; the container is chosen from the file extension.
pub fn save_raster(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let color = if image.channels == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::save_buffer(
        path,
        &image.samples,
        image.width as u32,
        image.height as u32,
        color,
    )
    .map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Decode(format!("{}: {other}", path.display())),
    })
}
