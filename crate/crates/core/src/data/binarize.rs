use crate::data::{BoolDataset, Provenance};
use crate::error::{Error, Result};

pub const MAX_BITS: usize = 4;

/// Thermometer thresholds: bit `t` of a pixel is set iff the pixel is at
/// least `thresholds[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarizeSpec {
    thresholds: Vec<u8>,
}

impl BinarizeSpec {
    pub fn new(thresholds: Vec<u8>) -> Result<Self> {
        if thresholds.is_empty() || thresholds.len() > MAX_BITS {
            return Err(Error::Config(format!(
                "need 1..={MAX_BITS} thresholds, got {}",
                thresholds.len()
            )));
        }
        if thresholds[0] == 0 {
            return Err(Error::Config("thresholds must be at least 1".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "thresholds must be strictly ascending: {thresholds:?}"
            )));
        }
        Ok(Self { thresholds })
    }

    /// Evenly spaced levels `round(255·t / (bits + 1))` for `t = 1..=bits`.
    pub fn even(bits: usize) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::Config(format!(
                "bits must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        let levels = (1..=bits)
            .map(|t| (255.0 * t as f64 / (bits + 1) as f64).round() as u8)
            .collect();
        Self::new(levels)
    }

    pub fn bits(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[u8] {
        &self.thresholds
    }

    /// Writes the thermometer code of `pixel` into `out[..bits]`.
    #[inline]
    pub fn encode_into(&self, pixel: u8, out: &mut [u8]) {
        for (slot, &t) in out.iter_mut().zip(&self.thresholds) {
            *slot = u8::from(pixel >= t);
        }
    }
}

/// Binarizes a stack of greyscale images, `bits` output features per pixel.
///
/// Feature `p·bits + t` is the `t`-th threshold bit of pixel `p`.
pub fn binarize_images(
    pixels: &[u8],
    pixels_per_image: usize,
    labels: &[u8],
    classes: usize,
    spec: &BinarizeSpec,
    source: &str,
) -> Result<BoolDataset> {
    if pixels.is_empty() || pixels_per_image == 0 {
        return Err(Error::Dimension("no pixels to binarize".into()));
    }
    if !pixels.len().is_multiple_of(pixels_per_image) {
        return Err(Error::Dimension(format!(
            "{} pixels is not a whole number of {pixels_per_image}-pixel images",
            pixels.len()
        )));
    }
    let count = pixels.len() / pixels_per_image;
    if labels.len() != count {
        return Err(Error::Dimension(format!(
            "{count} images but {} labels",
            labels.len()
        )));
    }
    let bits = spec.bits();
    let mut ds = BoolDataset::new(
        pixels_per_image * bits,
        classes,
        Provenance::Images {
            source: source.to_owned(),
            thresholds: spec.thresholds().to_vec(),
        },
    )?;
    let mut row = vec![0u8; pixels_per_image * bits];
    for (image, &label) in pixels.chunks_exact(pixels_per_image).zip(labels) {
        for (&p, code) in image.iter().zip(row.chunks_exact_mut(bits)) {
            spec.encode_into(p, code);
        }
        ds.push(&row, label as usize)?;
    }
    Ok(ds)
}
