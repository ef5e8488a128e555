//! Utility metrics between an original and a pixelized image.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Side of the uniform SSIM window.
pub const SSIM_WINDOW: usize = 7;
const DYNAMIC_RANGE: f64 = 255.0;
pub const SSIM_C1: f64 = (0.01 * DYNAMIC_RANGE) * (0.01 * DYNAMIC_RANGE);
pub const SSIM_C2: f64 = (0.03 * DYNAMIC_RANGE) * (0.03 * DYNAMIC_RANGE);

fn same_dims(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::invalid(format!(
            "cannot compare {}x{} with {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    Ok(())
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    same_dims(a, b)?;
    let total: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    Ok(total as f64 / a.pixels().len() as f64)
}

/// Summed-area tables of `a`, `b`, `a²`, `b²` and `a·b`, each
/// `(h + 1) × (w + 1)`.
struct Moments {
    stride: usize,
    tables: [Vec<u64>; 5],
}

impl Moments {
    fn new(a: &GrayImage, b: &GrayImage) -> Self {
        let (h, w) = (a.height(), a.width());
        let stride = w + 1;
        let mut tables: [Vec<u64>; 5] = std::array::from_fn(|_| vec![0u64; (h + 1) * stride]);
        for row in 0..h {
            let mut running = [0u64; 5];
            for col in 0..w {
                let x = a.get(row, col) as u64;
                let y = b.get(row, col) as u64;
                let terms = [x, y, x * x, y * y, x * y];
                for (k, table) in tables.iter_mut().enumerate() {
                    running[k] += terms[k];
                    table[(row + 1) * stride + col + 1] = table[row * stride + col + 1] + running[k];
                }
            }
        }
        Self { stride, tables }
    }

    #[inline]
    fn window(&self, k: usize, row: usize, col: usize, size: usize) -> i64 {
        let t = &self.tables[k];
        let s = self.stride;
        let (r1, c1) = (row + size, col + size);
        (t[r1 * s + c1] + t[row * s + col]) as i64 - (t[row * s + c1] + t[r1 * s + col]) as i64
    }
}

/// Mean SSIM over every 7×7 window position (stride 1).
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    same_dims(a, b)?;
    let win = SSIM_WINDOW;
    if a.height() < win || a.width() < win {
        return Err(Error::invalid(format!(
            "SSIM needs at least {win}x{win} pixels, got {}x{}",
            a.height(),
            a.width()
        )));
    }
    let moments = Moments::new(a, b);
    let area = (win * win) as i64;
    let area_f = area as f64;
    let area_sq = (area * area) as f64;
    let (out_rows, out_cols) = (a.height() - win + 1, a.width() - win + 1);

    let row_sums: Vec<f64> = (0..out_rows)
        .into_par_iter()
        .map(|row| {
            let mut acc = 0.0;
            for col in 0..out_cols {
                let sa = moments.window(0, row, col, win);
                let sb = moments.window(1, row, col, win);
                let saa = moments.window(2, row, col, win);
                let sbb = moments.window(3, row, col, win);
                let sab = moments.window(4, row, col, win);
                let mu_a = sa as f64 / area_f;
                let mu_b = sb as f64 / area_f;
                let var_a = (area * saa - sa * sa) as f64 / area_sq;
                let var_b = (area * sbb - sb * sb) as f64 / area_sq;
                let cov = (area * sab - sa * sb) as f64 / area_sq;
                let num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2);
                let den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2);
                acc += num / den;
            }
            acc
        })
        .collect();
    Ok(row_sums.iter().sum::<f64>() / (out_rows * out_cols) as f64)
}

pub const CSV_HEADER: &str = "epsilon,m,b,n,seed,mse,ssim,runtime_ms,record_bytes";

/// One pixelization run: parameters, utility and cost.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub epsilon: f64,
    pub m: u32,
    pub b: usize,
    pub n: usize,
    pub seed: u64,
    pub mse: f64,
    pub ssim: f64,
    pub runtime_ms: f64,
    pub record_bytes: usize,
}

impl MetricReport {
    /// CSV row matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.3},{}",
            self.epsilon,
            self.m,
            self.b,
            self.n,
            self.seed,
            self.mse,
            self.ssim,
            self.runtime_ms,
            self.record_bytes
        )
    }
}
