//! Region-adaptive pixelization.
//!
//! Grids whose padded mask is mostly simple (mean strictly above 0.5) are
//! pixelized whole, exactly as in the uniform path. Every other grid is cut
//! into `n × n` subgrids of side `b / n`, each with its own noisy mean at the
//! subgrid noise scale. Because `n` divides `b`, grids and subgrids tile the
//! padded image with no gaps or overlap.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{block_sum, check_dims, grid_dims, mirror_pad_mask, GrayImage, GridGeometry, RegionMask};
use crate::noise::{NoiseKey, NoiseSource, PrivacyParams};
use crate::uniform::{padded, quantize};

/// Threshold above which a grid's mask mean makes it simple.
pub const SIMPLE_THRESHOLD: f32 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionClassification {
    geometry: GridGeometry,
    mask_means: Vec<f32>,
    is_simple: Vec<bool>,
}

impl RegionClassification {
    /// Rebuilds a classification from stored mask means.
    pub fn from_mask_means(geometry: GridGeometry, mask_means: Vec<f32>) -> Result<Self> {
        if mask_means.len() != geometry.grid_count() {
            return Err(Error::invalid(format!(
                "{} grids need {} mask means, got {}",
                geometry.grid_count(),
                geometry.grid_count(),
                mask_means.len()
            )));
        }
        if let Some(bad) = mask_means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::invalid(format!("mask mean {bad} outside [0, 1]")));
        }
        let is_simple = mask_means.iter().map(|&m| m > SIMPLE_THRESHOLD).collect();
        Ok(Self {
            geometry,
            mask_means,
            is_simple,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn mask_means(&self) -> &[f32] {
        &self.mask_means
    }

    pub fn is_simple(&self) -> &[bool] {
        &self.is_simple
    }

    pub fn simple_count(&self) -> usize {
        self.is_simple.iter().filter(|&&s| s).count()
    }

    pub fn complex_count(&self) -> usize {
        self.is_simple.len() - self.simple_count()
    }
}

/// Mask mean per grid of the mirror-padded mask, thresholded into
/// simple/complex.
pub fn classify_regions(mask: &RegionMask, geom: &GridGeometry) -> Result<RegionClassification> {
    check_dims(mask.height(), mask.width(), geom)?;
    let padded = mirror_pad_mask(mask, geom)?;
    let b = geom.side();
    let area = (b * b) as f64;
    let means: Vec<f32> = (0..geom.grid_count())
        .into_par_iter()
        .map(|g| {
            let (r, c) = (g / geom.grid_cols(), g % geom.grid_cols());
            let ones = block_sum(padded.values(), padded.width(), r * b, c * b, b, b);
            (ones as f64 / area) as f32
        })
        .collect();
    RegionClassification::from_mask_means(*geom, means)
}

/// Everything needed to redraw an adaptive pixelization.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveMeans {
    classification: RegionClassification,
    subgrid_factor: usize,
    simple_means: Vec<u8>,
    complex_submeans: Vec<u8>,
}

impl AdaptiveMeans {
    pub fn new(
        classification: RegionClassification,
        subgrid_factor: usize,
        simple_means: Vec<u8>,
        complex_submeans: Vec<u8>,
    ) -> Result<Self> {
        let side = classification.geometry.side();
        if subgrid_factor == 0 || !side.is_multiple_of(subgrid_factor) {
            return Err(Error::corrupt(format!(
                "subgrid factor {subgrid_factor} does not divide grid side {side}"
            )));
        }
        if simple_means.len() != classification.simple_count() {
            return Err(Error::corrupt(format!(
                "{} simple grids but {} simple means",
                classification.simple_count(),
                simple_means.len()
            )));
        }
        let expected = classification.complex_count() * subgrid_factor * subgrid_factor;
        if complex_submeans.len() != expected {
            return Err(Error::corrupt(format!(
                "{} complex grids need {expected} submeans, got {}",
                classification.complex_count(),
                complex_submeans.len()
            )));
        }
        Ok(Self {
            classification,
            subgrid_factor,
            simple_means,
            complex_submeans,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.classification.geometry
    }

    pub fn classification(&self) -> &RegionClassification {
        &self.classification
    }

    pub fn subgrid_factor(&self) -> usize {
        self.subgrid_factor
    }

    pub fn simple_means(&self) -> &[u8] {
        &self.simple_means
    }

    pub fn complex_submeans(&self) -> &[u8] {
        &self.complex_submeans
    }
}

/// Adaptive pixelization of `img` guided by `mask`.
pub fn pixelize_adaptive<N>(
    img: &GrayImage,
    mask: &RegionMask,
    params: &PrivacyParams,
    noise: &N,
) -> Result<(GrayImage, AdaptiveMeans)>
where
    N: NoiseSource + ?Sized,
{
    if mask.height() != img.height() || mask.width() != img.width() {
        return Err(Error::invalid(format!(
            "{}x{} mask does not match {}x{} image",
            mask.height(),
            mask.width(),
            img.height(),
            img.width()
        )));
    }
    let geom = grid_dims(img.height(), img.width(), params.side())?;
    let classification = classify_regions(mask, &geom)?;
    let padded = padded(img, &geom)?;
    let plane = padded.pixels();
    let stride = padded.width();

    let b = geom.side();
    let n = params.subgrid_factor();
    let s = params.sub_side();
    let sigma = params.grid_scale().sigma;
    let sub_sigma = params.subgrid_scale().sigma;
    let (grid_area, sub_area) = ((b * b) as f64, (s * s) as f64);

    let rows: Vec<(Vec<u8>, Vec<u8>)> = (0..geom.grid_rows())
        .into_par_iter()
        .map(|r| {
            let mut simple = Vec::new();
            let mut complex = Vec::new();
            for c in 0..geom.grid_cols() {
                if classification.is_simple[r * geom.grid_cols() + c] {
                    let mean = block_sum(plane, stride, r * b, c * b, b, b) as f64 / grid_area;
                    simple.push(quantize(mean + noise.noise(NoiseKey::grid(r, c), sigma)));
                } else {
                    for sr in 0..n {
                        for sc in 0..n {
                            let sum = block_sum(plane, stride, r * b + sr * s, c * b + sc * s, s, s);
                            let key = NoiseKey::subgrid(r, c, sr, sc);
                            complex.push(quantize(sum as f64 / sub_area + noise.noise(key, sub_sigma)));
                        }
                    }
                }
            }
            (simple, complex)
        })
        .collect();

    let (simple_means, complex_submeans) = rows.into_iter().fold(
        (Vec::new(), Vec::new()),
        |(mut simple, mut complex), (s, c)| {
            simple.extend(s);
            complex.extend(c);
            (simple, complex)
        },
    );
    let means = AdaptiveMeans::new(classification, n, simple_means, complex_submeans)?;
    let image = reassemble(&means, img.height(), img.width())?;
    Ok((image, means))
}

/// Redraws the image from adaptive means, cropping to `rows × cols`.
pub fn reassemble(means: &AdaptiveMeans, rows: usize, cols: usize) -> Result<GrayImage> {
    let geom = *means.geometry();
    if grid_dims(rows, cols, geom.side())? != geom {
        return Err(Error::corrupt(format!(
            "{}x{} grid of side {} does not cover a {rows}x{cols} image",
            geom.grid_rows(),
            geom.grid_cols(),
            geom.side()
        )));
    }
    let b = geom.side();
    let n = means.subgrid_factor;
    let s = b / n;
    let per_complex = n * n;
    let is_simple = &means.classification.is_simple;

    // Offsets of each grid row's first simple mean and first complex block.
    let mut starts = Vec::with_capacity(geom.grid_rows());
    let (mut simple_at, mut complex_at) = (0usize, 0usize);
    for r in 0..geom.grid_rows() {
        starts.push((simple_at, complex_at));
        let row = &is_simple[r * geom.grid_cols()..][..geom.grid_cols()];
        let simple = row.iter().filter(|&&x| x).count();
        simple_at += simple;
        complex_at += (row.len() - simple) * per_complex;
    }

    let mut out = vec![0u8; rows * cols];
    out.par_chunks_mut(b * cols).enumerate().for_each(|(r, band)| {
        let (mut simple_at, mut complex_at) = starts[r];
        for c in 0..geom.grid_cols() {
            let col0 = c * b;
            let col1 = (col0 + b).min(cols);
            if is_simple[r * geom.grid_cols() + c] {
                let value = means.simple_means[simple_at];
                simple_at += 1;
                for line in band.chunks_mut(cols) {
                    line[col0..col1].fill(value);
                }
            } else {
                let subs = &means.complex_submeans[complex_at..complex_at + per_complex];
                complex_at += per_complex;
                for (local_row, line) in band.chunks_mut(cols).enumerate() {
                    let sub_row = &subs[(local_row / s) * n..][..n];
                    for (chunk, &value) in line[col0..col1].chunks_mut(s).zip(sub_row) {
                        chunk.fill(value);
                    }
                }
            }
        }
    });
    GrayImage::new(rows, cols, out)
}
