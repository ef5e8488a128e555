//! Grayscale rasters, region masks and the grid geometry shared by every
//! pixelizer.
//!
//! Grids are `b × b` tiles laid over an image padded up to a multiple of `b`
//! in both directions. Padding reflects the border including the edge
//! row/column: padded index `len + k` reads source index `len - 1 - k`.
//! Rows are extended first, then columns, so corner blocks reflect in both
//! axes.

use crate::error::{Error, Result};

/// An `height × width` 8-bit grayscale image stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayImage")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width {
            return Err(Error::invalid(format!(
                "{height}x{width} image needs {} pixels, got {}",
                height * width,
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, value: u8) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Top-left `height × width` sub-image.
    pub fn crop(&self, height: usize, width: usize) -> Result<GrayImage> {
        if height > self.height || width > self.width {
            return Err(Error::invalid(format!(
                "cannot crop {}x{} image to {height}x{width}",
                self.height, self.width
            )));
        }
        if height == self.height && width == self.width {
            return Ok(self.clone());
        }
        let mut pixels = Vec::with_capacity(height * width);
        for row in 0..height {
            pixels.extend_from_slice(&self.row(row)[..width]);
        }
        GrayImage::new(height, width, pixels)
    }
}

/// Binary map over an image: 1 marks a simple (background) pixel, 0 a
/// complex (foreground) pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct RegionMask {
    height: usize,
    width: usize,
    values: Vec<u8>,
}

impl std::fmt::Debug for RegionMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegionMask")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish_non_exhaustive()
    }
}

impl RegionMask {
    pub fn new(height: usize, width: usize, values: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "mask dimensions must be positive, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::invalid(format!(
                "{height}x{width} mask needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&v| v > 1) {
            return Err(Error::invalid(format!("mask values must be 0 or 1, found {bad}")));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn filled(height: usize, width: usize, simple: bool) -> Result<Self> {
        Self::new(height, width, vec![simple as u8; height * width])
    }

    /// Binarizes a grayscale image: intensities `>= 128` become simple (1).
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            height: img.height,
            width: img.width,
            values: img.pixels.iter().map(|&p| (p >= 128) as u8).collect(),
        }
    }

    /// Renders the mask as a black/white image (simple = 255).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self.values.iter().map(|&v| v * 255).collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.width + col]
    }
}

/// Tiling of an `rows × cols` image by `side × side` grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridGeometry {
    rows: usize,
    cols: usize,
    side: usize,
    grid_rows: usize,
    grid_cols: usize,
}

impl GridGeometry {
    /// Image height the geometry was computed for.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Image width the geometry was computed for.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Grid side length `b`.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn grid_rows(&self) -> usize {
        self.grid_rows
    }

    pub fn grid_cols(&self) -> usize {
        self.grid_cols
    }

    pub fn grid_count(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn pad_rows(&self) -> usize {
        self.padded_rows() - self.rows
    }

    pub fn pad_cols(&self) -> usize {
        self.padded_cols() - self.cols
    }

    pub fn padded_rows(&self) -> usize {
        self.grid_rows * self.side
    }

    pub fn padded_cols(&self) -> usize {
        self.grid_cols * self.side
    }

    fn check_index(&self, r: usize, c: usize) -> Result<()> {
        if r >= self.grid_rows || c >= self.grid_cols {
            return Err(Error::invalid(format!(
                "grid ({r}, {c}) outside {}x{} grid",
                self.grid_rows, self.grid_cols
            )));
        }
        Ok(())
    }

    fn check_padding_source(&self) -> Result<()> {
        if self.pad_rows() >= self.rows || self.pad_cols() >= self.cols {
            return Err(Error::invalid(format!(
                "padding {}x{} cannot be reflected from a {}x{} image (grid side {})",
                self.pad_rows(),
                self.pad_cols(),
                self.rows,
                self.cols,
                self.side
            )));
        }
        Ok(())
    }
}

/// Grid counts and padding for an `rows × cols` image tiled by `side`.
pub fn grid_dims(rows: usize, cols: usize, side: usize) -> Result<GridGeometry> {
    if side == 0 {
        return Err(Error::invalid("grid side must be at least 1"));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if side > rows.max(cols) {
        return Err(Error::invalid(format!(
            "grid side {side} exceeds both image dimensions {rows}x{cols}"
        )));
    }
    Ok(GridGeometry {
        rows,
        cols,
        side,
        grid_rows: rows.div_ceil(side),
        grid_cols: cols.div_ceil(side),
    })
}

/// Source index for padded index `i` along an axis of length `len`.
#[inline]
pub(crate) fn reflect(i: usize, len: usize) -> usize {
    if i < len {
        i
    } else {
        2 * len - 1 - i
    }
}

/// Pads a row-major plane to the geometry's padded size.
pub(crate) fn pad_plane(src: &[u8], geom: &GridGeometry) -> Vec<u8> {
    let (rows, cols) = (geom.rows, geom.cols);
    let padded_cols = geom.padded_cols();
    let mut out = Vec::with_capacity(geom.padded_rows() * padded_cols);
    for row in 0..geom.padded_rows() {
        let src_row = &src[reflect(row, rows) * cols..][..cols];
        out.extend_from_slice(src_row);
        out.extend((cols..padded_cols).map(|col| src_row[reflect(col, cols)]));
    }
    out
}

/// Extends `img` to `(G_R·b) × (G_C·b)` by edge-inclusive reflection.
pub fn mirror_pad(img: &GrayImage, geom: &GridGeometry) -> Result<GrayImage> {
    check_dims(img.height, img.width, geom)?;
    geom.check_padding_source()?;
    if geom.pad_rows() == 0 && geom.pad_cols() == 0 {
        return Ok(img.clone());
    }
    Ok(GrayImage {
        height: geom.padded_rows(),
        width: geom.padded_cols(),
        pixels: pad_plane(&img.pixels, geom),
    })
}

/// Mirror-pads a mask with the same rule as [`mirror_pad`].
pub fn mirror_pad_mask(mask: &RegionMask, geom: &GridGeometry) -> Result<RegionMask> {
    check_dims(mask.height, mask.width, geom)?;
    geom.check_padding_source()?;
    Ok(RegionMask {
        height: geom.padded_rows(),
        width: geom.padded_cols(),
        values: pad_plane(&mask.values, geom),
    })
}

pub(crate) fn check_dims(height: usize, width: usize, geom: &GridGeometry) -> Result<()> {
    if height != geom.rows || width != geom.cols {
        return Err(Error::invalid(format!(
            "{height}x{width} input does not match {}x{} grid geometry",
            geom.rows, geom.cols
        )));
    }
    Ok(())
}

/// Integer sum of a `height × width` block starting at `(row0, col0)`.
#[inline]
pub(crate) fn block_sum(
    plane: &[u8],
    stride: usize,
    row0: usize,
    col0: usize,
    height: usize,
    width: usize,
) -> u64 {
    let mut sum = 0u64;
    for row in row0..row0 + height {
        let start = row * stride + col0;
        // One row of a u16-sided grid cannot overflow u32.
        sum += plane[start..start + width]
            .iter()
            .map(|&p| p as u32)
            .sum::<u32>() as u64;
    }
    sum
}

/// Mean intensity of grid `(r, c)` of an already padded image.
pub fn grid_mean(padded: &GrayImage, geom: &GridGeometry, r: usize, c: usize) -> Result<f64> {
    if padded.height != geom.padded_rows() || padded.width != geom.padded_cols() {
        return Err(Error::invalid(format!(
            "{}x{} image is not padded to {}x{}",
            padded.height,
            padded.width,
            geom.padded_rows(),
            geom.padded_cols()
        )));
    }
    geom.check_index(r, c)?;
    let b = geom.side;
    let sum = block_sum(&padded.pixels, padded.width, r * b, c * b, b, b);
    Ok(sum as f64 / (b * b) as f64)
}

/// Fraction of simple pixels in grid `(r, c)` of the mirror-padded mask.
///
/// Takes the unpadded mask; border grids read reflected values.
pub fn mask_grid_mean(mask: &RegionMask, geom: &GridGeometry, r: usize, c: usize) -> Result<f64> {
    check_dims(mask.height, mask.width, geom)?;
    geom.check_padding_source()?;
    geom.check_index(r, c)?;
    let b = geom.side;
    let mut ones = 0u64;
    for row in r * b..(r + 1) * b {
        let src = &mask.values[reflect(row, mask.height) * mask.width..][..mask.width];
        for col in c * b..(c + 1) * b {
            ones += src[reflect(col, mask.width)] as u64;
        }
    }
    Ok(ones as f64 / (b * b) as f64)
}
