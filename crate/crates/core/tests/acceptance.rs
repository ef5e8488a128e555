//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.
//!
//! Run with: `cargo test -p dppx-core --test acceptance`

mod common;

use std::time::Instant;

use common::*;
use dppx_core::{
    decode, encode, grid_dims, grid_mean, laplace_at, mirror_pad, mse, pixelize_adaptive,
    pixelize_parallel, pixelize_reference, reconstruct, ssim, GrayImage, GridMeans, NoiseKey,
    NoiseSeed, PixelRecord, PrivacyParams,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

enum Outcome {
    Pass(String),
    Fail(String),
    /// The criterion's precondition does not hold on this machine.
    NotApplicable(String),
}

use Outcome::*;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xC1);
    let mut identical = 0;
    for _ in 0..50 {
        let b = [2usize, 4, 8, 16][rng.gen_range(0..4)];
        let (gh, gw) = (rng.gen_range(1..9), rng.gen_range(1..9));
        let img = random_image(gh * b, gw * b, &mut rng);
        let p = PrivacyParams::uniform(rng.gen_range(0.05..4.0), rng.gen_range(1..=64), b).unwrap();
        let seed = NoiseSeed(rng.gen());
        let reference = pixelize_reference(&img, &p, &seed).unwrap();
        let (parallel, _) = pixelize_parallel(&img, &p, &seed).unwrap();
        identical += (reference == parallel) as usize;
    }
    check(identical == 50, format!("{identical}/50 runs bit-identical"))
}

fn ablation_collapse() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xC2);
    let mut identical = 0;
    for _ in 0..50 {
        let (h, w) = (rng.gen_range(16..96), rng.gen_range(16..96));
        let b = rng.gen_range(1..=16);
        let img = random_image(h, w, &mut rng);
        let mask = random_mask(h, w, &mut rng);
        let p = PrivacyParams::uniform(rng.gen_range(0.05..4.0), rng.gen_range(1..=64), b).unwrap();
        let seed = NoiseSeed(rng.gen());
        let (adaptive, _) = pixelize_adaptive(&img, &mask, &p, &seed).unwrap();
        let (uniform, _) = pixelize_parallel(&img, &p, &seed).unwrap();
        identical += (adaptive == uniform) as usize;
    }
    check(identical == 50, format!("{identical}/50 triples bit-identical"))
}

fn neighbour(img: &GrayImage, m: usize, rng: &mut StdRng) -> GrayImage {
    let mut px = img.pixels().to_vec();
    let changed = rng.gen_range(1..=m);
    for _ in 0..changed {
        let i = rng.gen_range(0..px.len());
        px[i] = rng.gen();
    }
    GrayImage::new(img.height(), img.width(), px).unwrap()
}

fn sensitivity_bound() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xC3);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let b = [2usize, 4, 8, 16][rng.gen_range(0..4)];
        let m = rng.gen_range(1..=(b * b).min(64));
        let (gh, gw) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let a = random_image(gh * b, gw * b, &mut rng);
        let a2 = neighbour(&a, m, &mut rng);
        let bound = dppx_core::sensitivity(b, m as u32);
        for (x, y) in full_grid_means(&a, b).iter().zip(full_grid_means(&a2, b)) {
            let d = (x - y).abs();
            worst = worst.max(d / bound);
            violations += (d > bound + 1e-9) as usize;
        }
    }

    // Informational: padded border grids on non-divisible dims.
    let mut padded_worst = 0.0f64;
    for _ in 0..200 {
        let b = [2usize, 4, 8][rng.gen_range(0..3)];
        let m = rng.gen_range(1..=4usize);
        let (h, w) = (rng.gen_range(b..4 * b), rng.gen_range(b..4 * b));
        let a = random_image(h, w, &mut rng);
        let a2 = neighbour(&a, m, &mut rng);
        let g = grid_dims(h, w, b).unwrap();
        let (pa, pa2) = (mirror_pad(&a, &g).unwrap(), mirror_pad(&a2, &g).unwrap());
        let bound = dppx_core::sensitivity(b, m as u32);
        for r in 0..g.grid_rows() {
            for c in 0..g.grid_cols() {
                let d = (grid_mean(&pa, &g, r, c).unwrap() - grid_mean(&pa2, &g, r, c).unwrap()).abs();
                padded_worst = padded_worst.max(d / bound);
            }
        }
    }
    check(
        violations == 0,
        format!(
            "1000 pairs on full b×b grids: {violations} violations, max |Δmean|/bound = {worst:.4} \
             (info: mirror-padded border grids reach {padded_worst:.2}× the bound)"
        ),
    )
}

fn noise_calibration() -> Outcome {
    let sigma = 2.5;
    let n = 1_000_000usize;
    let seed = NoiseSeed(0x5EED);
    let mut draws: Vec<f64> = (0..n)
        .map(|i| laplace_at(seed, NoiseKey::subgrid(i % 1000, i / 1000, i % 7, i % 3), sigma).unwrap())
        .collect();
    let scale = draws.iter().map(|x| x.abs()).sum::<f64>() / n as f64;
    let mean = draws.iter().sum::<f64>() / n as f64;
    let d = ks_statistic(&mut draws, |x| laplace_cdf(x, sigma));
    let crit = ks_critical_001(n);
    let scale_err = (scale - sigma).abs() / sigma;
    let mean_tol = 5.0 * sigma / (n as f64).sqrt();
    check(
        d < crit && scale_err < 0.01 && mean.abs() < mean_tol,
        format!(
            "KS D = {d:.6} (critical {crit:.6}), E|X| = {scale:.5} vs σ = {sigma} ({:.3}%), mean {mean:.5} (tol {mean_tol:.5})",
            100.0 * scale_err
        ),
    )
}

fn record_size_law() -> Outcome {
    let uniform_len = |side: usize| {
        let g = grid_dims(768, 576, side).unwrap();
        let means = GridMeans::new(g, vec![0; g.grid_count()]).unwrap();
        encode(&PixelRecord::uniform(768, 576, means).unwrap()).len()
    };
    let sizes: Vec<usize> = (0..8).map(|k| uniform_len(1 << k)).collect();
    let decreasing = sizes.windows(2).all(|w| w[1] < w[0]);
    check(
        sizes[4] == 1752 && decreasing,
        format!("768×576 b=16 → {} bytes; b=1..128 sizes {sizes:?}", sizes[4]),
    )
}

fn reversibility() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xC6);
    let mut ok = 0;
    let (mut uniform, mut adaptive) = (0, 0);
    for i in 0..100 {
        let (h, w) = (rng.gen_range(8..80), rng.gen_range(8..80));
        let img = random_image(h, w, &mut rng);
        let n = rng.gen_range(1..=4);
        let b = n * rng.gen_range(1..=2);
        let seed = NoiseSeed(rng.gen());
        let eps = rng.gen_range(0.1..3.0);
        let m = rng.gen_range(1..=32);
        let (emitted, record) = if i % 2 == 0 {
            uniform += 1;
            let p = PrivacyParams::uniform(eps, m, b).unwrap();
            let (out, means) = pixelize_parallel(&img, &p, &seed).unwrap();
            (out, PixelRecord::uniform(h, w, means).unwrap())
        } else {
            adaptive += 1;
            let p = PrivacyParams::new(eps, m, b, n).unwrap();
            let mask = random_mask(h, w, &mut rng);
            let (out, means) = pixelize_adaptive(&img, &mask, &p, &seed).unwrap();
            (out, PixelRecord::adaptive(h, w, means).unwrap())
        };
        let restored = reconstruct(&decode(&encode(&record)).unwrap()).unwrap();
        ok += (restored == emitted) as usize;
    }
    check(
        ok == 100,
        format!("{ok}/100 bit-exact ({uniform} uniform, {adaptive} adaptive)"),
    )
}

fn mean_metrics(img: &GrayImage, eps: f64, m: u32) -> (f64, f64) {
    let p = PrivacyParams::uniform(eps, m, 16).unwrap();
    let (mut total_mse, mut total_ssim) = (0.0, 0.0);
    for seed in 0..20u64 {
        let (out, _) = pixelize_parallel(img, &p, &NoiseSeed(seed)).unwrap();
        total_mse += mse(img, &out).unwrap();
        total_ssim += ssim(img, &out).unwrap();
    }
    (total_mse / 20.0, total_ssim / 20.0)
}

fn utility_trends() -> Outcome {
    let img = synthetic_scene();
    let eps: Vec<(f64, f64)> = [0.1, 0.5, 1.0, 2.0].iter().map(|&e| mean_metrics(&img, e, 16)).collect();
    let by_m: Vec<f64> = [4, 16, 64].iter().map(|&m| mean_metrics(&img, 0.5, m).0).collect();
    let mse_down = eps.windows(2).all(|w| w[1].0 < w[0].0);
    let ssim_up = eps.windows(2).all(|w| w[1].1 > w[0].1);
    let m_up = by_m.windows(2).all(|w| w[1] > w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" > ");
    check(
        mse_down && ssim_up && m_up,
        format!(
            "ε=0.1,0.5,1,2: MSE {} / SSIM {}; m=4,16,64: MSE {}",
            fmt(&eps.iter().map(|e| e.0).collect::<Vec<_>>()),
            eps.iter().map(|e| format!("{:.4}", e.1)).collect::<Vec<_>>().join(" < "),
            by_m.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" < "),
        ),
    )
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn speedup_direction() -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut rng = StdRng::seed_from_u64(0xC8);
    let img = random_image(1080, 1920, &mut rng);
    let p = PrivacyParams::uniform(0.5, 16, 16).unwrap();
    let seed = NoiseSeed(8);
    let time = |f: &dyn Fn()| {
        let start = Instant::now();
        f();
        start.elapsed().as_secs_f64() * 1e3
    };
    let mut reference = Vec::new();
    let mut parallel = Vec::new();
    for _ in 0..10 {
        reference.push(time(&|| {
            std::hint::black_box(pixelize_reference(&img, &p, &seed).unwrap());
        }));
        parallel.push(time(&|| {
            std::hint::black_box(pixelize_parallel(&img, &p, &seed).unwrap());
        }));
    }
    let (r, q) = (median(&mut reference), median(&mut parallel));
    let ratio = r / q;
    let detail = format!(
        "1920×1080 b=16, {cores} cores: reference median {r:.2} ms, parallel median {q:.2} ms, ratio {ratio:.2}×"
    );
    if cores < 4 {
        NotApplicable(format!("{detail}; needs ≥4 cores, not evaluated"))
    } else {
        check(ratio >= 2.0, detail)
    }
}

fn schedule_independence() -> Outcome {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let counts = [1, 2, max.max(4)];
    let pools: Vec<_> = counts
        .iter()
        .map(|&t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap())
        .collect();
    let mut rng = StdRng::seed_from_u64(0xC9);
    let mut ok = 0;
    for i in 0..20 {
        let (h, w) = (rng.gen_range(32..160), rng.gen_range(32..160));
        let img = random_image(h, w, &mut rng);
        let mask = random_mask(h, w, &mut rng);
        let n = [1, 2, 4][rng.gen_range(0..3)];
        let b = 4 * n;
        let seed = NoiseSeed(rng.gen());
        let run = |pool: &rayon::ThreadPool| -> Vec<u8> {
            pool.install(|| {
                if i % 2 == 0 {
                    let p = PrivacyParams::uniform(0.7, 16, b).unwrap();
                    let (out, means) = pixelize_parallel(&img, &p, &seed).unwrap();
                    [out.into_pixels(), encode(&PixelRecord::uniform(h, w, means).unwrap())].concat()
                } else {
                    let p = PrivacyParams::new(0.7, 16, b, n).unwrap();
                    let (out, means) = pixelize_adaptive(&img, &mask, &p, &seed).unwrap();
                    [out.into_pixels(), encode(&PixelRecord::adaptive(h, w, means).unwrap())].concat()
                }
            })
        };
        let outputs: Vec<Vec<u8>> = pools.iter().map(run).collect();
        ok += outputs.windows(2).all(|w| w[0] == w[1]) as usize;
    }
    check(ok == 20, format!("{ok}/20 runs byte-identical across threads {counts:?}"))
}

fn ssim_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xCA);
    let mut worst = 0.0f64;
    let mut self_one = true;
    for _ in 0..20 {
        let a = random_image(32, 32, &mut rng);
        let b = random_image(32, 32, &mut rng);
        worst = worst.max((ssim(&a, &b).unwrap() - naive_ssim(&a, &b)).abs());
        self_one &= ssim(&a, &a).unwrap() == 1.0;
    }
    check(
        worst <= 1e-9 && self_one,
        format!("max |lib - oracle| = {worst:.3e} over 20 pairs; ssim(a,a) == 1: {self_one}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("ablation collapse (n=1)", ablation_collapse),
        ("sensitivity bound", sensitivity_bound),
        ("noise calibration", noise_calibration),
        ("record size law", record_size_law),
        ("reversibility", reversibility),
        ("utility trends", utility_trends),
        ("speedup direction", speedup_direction),
        ("schedule independence", schedule_independence),
        ("SSIM oracle", ssim_oracle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            NotApplicable(d) => ("N/A ", d),
        };
        println!("[{tag}] {:>2}. {name}: {detail} ({secs:.2}s)", i + 1);
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
    println!("all evaluated criteria passed");
}
