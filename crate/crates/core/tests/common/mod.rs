#![allow(dead_code)]

use dppx_core::metrics::{SSIM_C1, SSIM_C2, SSIM_WINDOW};
use dppx_core::{GrayImage, RegionMask};
use rand::Rng;

pub fn random_image(h: usize, w: usize, rng: &mut impl Rng) -> GrayImage {
    GrayImage::from_fn(h, w, |_, _| rng.gen()).unwrap()
}

/// A rectangle of complex pixels on a simple background, plus salt noise so
/// border grids see mixed mask means.
pub fn random_mask(h: usize, w: usize, rng: &mut impl Rng) -> RegionMask {
    let (r0, c0) = (rng.gen_range(0..h), rng.gen_range(0..w));
    let (r1, c1) = (rng.gen_range(r0..=h), rng.gen_range(c0..=w));
    let values = (0..h * w)
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let inside = (r0..r1).contains(&r) && (c0..c1).contains(&c);
            let flip = rng.gen_bool(0.05);
            (!inside ^ flip) as u8
        })
        .collect();
    RegionMask::new(h, w, values).unwrap()
}

/// Deterministic 256×256 scene: smooth background, a bright disk, a
/// checkerboard patch and a textured band.
pub fn synthetic_scene() -> GrayImage {
    GrayImage::from_fn(256, 256, |r, c| {
        let (y, x) = (r as f64, c as f64);
        let mut v = 40.0 + 0.5 * x + 0.2 * y;
        if (x - 170.0).powi(2) + (y - 90.0).powi(2) < 45.0f64.powi(2) {
            v = 220.0 - 0.3 * (y - 90.0);
        }
        if (150..230).contains(&r) && (20..100).contains(&c) && ((r / 6) + (c / 6)) % 2 == 0 {
            v = 30.0;
        }
        if (200..240).contains(&r) && c >= 130 {
            v = 128.0 + 60.0 * (x / 5.0).sin() * (y / 7.0).cos();
        }
        v.clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// Mean SSIM from per-window two-pass statistics.
pub fn naive_ssim(a: &GrayImage, b: &GrayImage) -> f64 {
    let w = SSIM_WINDOW;
    let n = (w * w) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for r in 0..=a.height() - w {
        for c in 0..=a.width() - w {
            let px = |img: &GrayImage, i: usize, j: usize| img.get(r + i, c + j) as f64;
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..w {
                for j in 0..w {
                    ma += px(a, i, j);
                    mb += px(b, i, j);
                }
            }
            ma /= n;
            mb /= n;
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..w {
                for j in 0..w {
                    let da = px(a, i, j) - ma;
                    let db = px(b, i, j) - mb;
                    va += da * da;
                    vb += db * db;
                    cov += da * db;
                }
            }
            va /= n;
            vb /= n;
            cov /= n;
            total += ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
            count += 1;
        }
    }
    total / count as f64
}

/// CDF of Laplace(0, σ).
pub fn laplace_cdf(x: f64, sigma: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / sigma).exp()
    } else {
        1.0 - 0.5 * (-x / sigma).exp()
    }
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at α = 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Plain grid means over full `b × b` tiles of an image whose sides are
/// multiples of `b`.
pub fn full_grid_means(img: &GrayImage, b: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for r0 in (0..img.height()).step_by(b) {
        for c0 in (0..img.width()).step_by(b) {
            let mut sum = 0u64;
            for r in r0..r0 + b {
                for c in c0..c0 + b {
                    sum += img.get(r, c) as u64;
                }
            }
            out.push(sum as f64 / (b * b) as f64);
        }
    }
    out
}
