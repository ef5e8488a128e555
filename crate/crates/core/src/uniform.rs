//! Uniform pixelization: every `b × b` grid is replaced by its noisy mean.
//!
//! [`pixelize_reference`] is the straightforward grid-by-grid loop, kept as
//! an oracle. [`pixelize_parallel`] pads, computes all grid means across
//! threads and broadcasts them back; it is the production path.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{block_sum, grid_dims, mirror_pad, GrayImage, GridGeometry};
use crate::noise::{NoiseKey, NoiseSource, PrivacyParams};

/// Clips to `[0, 255]` and rounds half away from zero.
#[inline]
pub fn quantize(value: f64) -> u8 {
    value.clamp(0.0, 255.0).round() as u8
}

/// Quantized noisy means, one per grid, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMeans {
    geometry: GridGeometry,
    values: Vec<u8>,
}

impl GridMeans {
    pub fn new(geometry: GridGeometry, values: Vec<u8>) -> Result<Self> {
        if values.len() != geometry.grid_count() {
            return Err(Error::invalid(format!(
                "{}x{} grid needs {} means, got {}",
                geometry.grid_rows(),
                geometry.grid_cols(),
                geometry.grid_count(),
                values.len()
            )));
        }
        Ok(Self { geometry, values })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.values[r * self.geometry.grid_cols() + c]
    }
}

fn require_uniform(params: &PrivacyParams) -> Result<()> {
    if params.subgrid_factor() != 1 {
        return Err(Error::invalid(format!(
            "uniform pixelization needs subgrid factor 1, got {}",
            params.subgrid_factor()
        )));
    }
    Ok(())
}

pub(crate) fn padded<'a>(img: &'a GrayImage, geom: &GridGeometry) -> Result<Cow<'a, GrayImage>> {
    if geom.pad_rows() == 0 && geom.pad_cols() == 0 {
        crate::image::check_dims(img.height(), img.width(), geom)?;
        Ok(Cow::Borrowed(img))
    } else {
        Ok(Cow::Owned(mirror_pad(img, geom)?))
    }
}

/// Grid-by-grid pixelization without padding.
///
/// Border grids are partial (`h × w` with `h, w ≤ b`) and are averaged over
/// the pixels they actually contain, while the noise scale still assumes
/// full `b × b` grids.
pub fn pixelize_reference<N>(img: &GrayImage, params: &PrivacyParams, noise: &N) -> Result<GrayImage>
where
    N: NoiseSource + ?Sized,
{
    require_uniform(params)?;
    let sigma = params.grid_scale().sigma;
    let (rows, cols, b) = (img.height(), img.width(), params.side());
    let mut out = vec![0u8; rows * cols];
    for (gr, r0) in (0..rows).step_by(b).enumerate() {
        for (gc, c0) in (0..cols).step_by(b).enumerate() {
            let h = b.min(rows - r0);
            let w = b.min(cols - c0);
            let mut sum = 0u64;
            for row in r0..r0 + h {
                for col in c0..c0 + w {
                    sum += img.get(row, col) as u64;
                }
            }
            let mean = sum as f64 / (h * w) as f64;
            let noisy = mean + noise.noise(NoiseKey::grid(gr, gc), sigma);
            let value = quantize(noisy);
            for row in r0..r0 + h {
                out[row * cols + c0..row * cols + c0 + w].fill(value);
            }
        }
    }
    GrayImage::new(rows, cols, out)
}

/// Data-parallel pixelization over a mirror-padded image.
///
/// Returns the emitted image together with the quantized means it was
/// broadcast from.
pub fn pixelize_parallel<N>(
    img: &GrayImage,
    params: &PrivacyParams,
    noise: &N,
) -> Result<(GrayImage, GridMeans)>
where
    N: NoiseSource + ?Sized,
{
    require_uniform(params)?;
    let geom = grid_dims(img.height(), img.width(), params.side())?;
    let padded = padded(img, &geom)?;
    let sigma = params.grid_scale().sigma;
    let b = geom.side();
    let area = (b * b) as f64;
    let stride = padded.width();
    let plane = padded.pixels();

    let mut values = vec![0u8; geom.grid_count()];
    values
        .par_chunks_mut(geom.grid_cols())
        .enumerate()
        .for_each(|(r, out)| {
            for (c, slot) in out.iter_mut().enumerate() {
                let mean = block_sum(plane, stride, r * b, c * b, b, b) as f64 / area;
                *slot = quantize(mean + noise.noise(NoiseKey::grid(r, c), sigma));
            }
        });

    let means = GridMeans::new(geom, values)?;
    let image = broadcast_means(&means, img.height(), img.width())?;
    Ok((image, means))
}

/// Fills each grid's `b × b` block with its mean and crops to `rows × cols`.
pub fn broadcast_means(means: &GridMeans, rows: usize, cols: usize) -> Result<GrayImage> {
    let geom = means.geometry();
    if grid_dims(rows, cols, geom.side())? != *geom {
        return Err(Error::invalid(format!(
            "{}x{} means with side {} do not cover a {rows}x{cols} image",
            geom.grid_rows(),
            geom.grid_cols(),
            geom.side()
        )));
    }
    let b = geom.side();
    let mut out = vec![0u8; rows * cols];
    out.par_chunks_mut(b * cols).enumerate().for_each(|(r, band)| {
        let grid_row = &means.values[r * geom.grid_cols()..][..geom.grid_cols()];
        let (first, rest) = band.split_at_mut(cols);
        for (chunk, &value) in first.chunks_mut(b).zip(grid_row) {
            chunk.fill(value);
        }
        for line in rest.chunks_mut(cols) {
            line.copy_from_slice(first);
        }
    });
    GrayImage::new(rows, cols, out)
}
