//! Wall-clock comparison of the sequential reference and the parallel path.

use std::io::Write;
use std::time::Instant;

use dppx_core::{pixelize_parallel, pixelize_reference, GrayImage, NoiseSeed, PrivacyParams};

use crate::failure::Failure;

pub struct BenchConfig {
    pub params: PrivacyParams,
    pub seed: u64,
    pub warmup: usize,
    pub repeat: usize,
}

pub struct BenchResult {
    pub threads: usize,
    pub reference_ms: Vec<f64>,
    pub parallel_ms: Vec<f64>,
    /// Parallel output with one thread equals the output with `threads`.
    pub schedule_independent: bool,
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

impl BenchResult {
    /// Median reference time over median parallel time.
    pub fn speedup(&self) -> f64 {
        median(&self.reference_ms) / median(&self.parallel_ms)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "path,threads,sample,ms")?;
        for (i, ms) in self.reference_ms.iter().enumerate() {
            writeln!(out, "reference,1,{i},{ms:.4}")?;
        }
        for (i, ms) in self.parallel_ms.iter().enumerate() {
            writeln!(out, "parallel,{},{i},{ms:.4}", self.threads)?;
        }
        Ok(())
    }
}

fn time_ms(f: impl FnOnce()) -> f64 {
    let start = Instant::now();
    f();
    start.elapsed().as_secs_f64() * 1e3
}

/// Times both paths on the current rayon pool. Metric computation is not
/// part of either timed section.
pub fn bench(cfg: &BenchConfig, img: &GrayImage) -> Result<BenchResult, Failure> {
    if cfg.repeat == 0 {
        return Err(Failure::usage("--repeat must be at least 1"));
    }
    let seed = NoiseSeed(cfg.seed);
    let p = &cfg.params;
    for _ in 0..cfg.warmup {
        pixelize_reference(img, p, &seed)?;
        pixelize_parallel(img, p, &seed)?;
    }
    let mut reference_ms = Vec::with_capacity(cfg.repeat);
    let mut parallel_ms = Vec::with_capacity(cfg.repeat);
    for _ in 0..cfg.repeat {
        reference_ms.push(time_ms(|| {
            std::hint::black_box(pixelize_reference(img, p, &seed).ok());
        }));
        parallel_ms.push(time_ms(|| {
            std::hint::black_box(pixelize_parallel(img, p, &seed).ok());
        }));
    }

    let threads = rayon::current_num_threads();
    let pooled = pixelize_parallel(img, p, &seed)?;
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Failure::consistency(e.to_string()))?
        .install(|| pixelize_parallel(img, p, &seed))?;

    Ok(BenchResult {
        threads,
        reference_ms,
        parallel_ms,
        schedule_independent: pooled == single,
    })
}

/// Deterministic test card for benchmarking without an input file.
pub fn synthetic(height: usize, width: usize) -> Result<GrayImage, Failure> {
    Ok(GrayImage::from_fn(height, width, |r, c| {
        ((r * 7 + c * 13) ^ (r * c / 97)) as u8
    })?)
}
