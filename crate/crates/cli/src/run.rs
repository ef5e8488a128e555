//! Single-image and directory pixelization runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dppx_core::pgm::{read_mask, read_pgm, write_pgm};
use dppx_core::{
    decode, encode, mse, pixelize_adaptive, pixelize_parallel, pixelize_reference, reconstruct, ssim,
    GrayImage, MetricReport, Noise, NoiseSeed, PixelRecord, PrivacyParams, RegionMask,
};
use rayon::prelude::*;

use crate::failure::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Padded, data-parallel uniform pixelization.
    Uniform,
    /// Sequential grid loop without padding (oracle path, images only).
    Reference,
    /// Region-adaptive pixelization; needs a mask.
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Emit {
    Image,
    Record,
    Both,
}

impl Emit {
    pub fn image(self) -> bool {
        matches!(self, Emit::Image | Emit::Both)
    }

    pub fn record(self) -> bool {
        matches!(self, Emit::Record | Emit::Both)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub epsilon: f64,
    pub m: u32,
    pub b: usize,
    pub n: usize,
    pub seed: u64,
    /// Exact means, no privacy. Testing only.
    pub no_noise: bool,
    pub emit: Emit,
    /// Decode the emitted record and compare its reconstruction with the
    /// emitted image.
    pub check: bool,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn params(&self) -> Result<PrivacyParams, Failure> {
        let n = if self.mode == Mode::Adaptive { self.n } else { 1 };
        Ok(PrivacyParams::new(self.epsilon, self.m, self.b, n)?)
    }

    pub fn noise(&self) -> Noise {
        if self.no_noise {
            Noise::Disabled
        } else {
            Noise::Keyed(NoiseSeed(self.seed))
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.mode == Mode::Reference && self.emit.record() {
            return Err(Failure::usage(
                "reference mode produces images only; use --emit image",
            ));
        }
        self.params().map(|_| ())
    }
}

/// Pixelized image plus its encoded record, if the mode produces one.
pub struct Pixelized {
    pub image: GrayImage,
    pub record: Option<Vec<u8>>,
    pub runtime_ms: f64,
}

/// Runs the configured pixelizer. Only the pixelization itself is timed.
pub fn pixelize(cfg: &RunConfig, img: &GrayImage, mask: Option<&RegionMask>) -> Result<Pixelized, Failure> {
    let params = cfg.params()?;
    let noise = cfg.noise();
    let start = Instant::now();
    let (image, record) = match cfg.mode {
        Mode::Reference => (pixelize_reference(img, &params, &noise)?, None),
        Mode::Uniform => {
            let (image, means) = pixelize_parallel(img, &params, &noise)?;
            (image, Some(PixelRecord::uniform(img.height(), img.width(), means)?))
        }
        Mode::Adaptive => {
            let mask = mask.ok_or_else(|| Failure::usage("adaptive mode needs --mask"))?;
            let (image, means) = pixelize_adaptive(img, mask, &params, &noise)?;
            (image, Some(PixelRecord::adaptive(img.height(), img.width(), means)?))
        }
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Pixelized {
        image,
        record: record.as_ref().map(encode),
        runtime_ms,
    })
}

pub fn report(cfg: &RunConfig, original: &GrayImage, run: &Pixelized) -> Result<MetricReport, Failure> {
    Ok(MetricReport {
        epsilon: cfg.epsilon,
        m: cfg.m,
        b: cfg.b,
        n: if cfg.mode == Mode::Adaptive { cfg.n } else { 1 },
        seed: cfg.seed,
        mse: mse(original, &run.image)?,
        // Images under 7×7 have no SSIM window.
        ssim: ssim(original, &run.image).unwrap_or(f64::NAN),
        runtime_ms: run.runtime_ms,
        record_bytes: run.record.as_ref().map_or(0, Vec::len),
    })
}

fn stem(path: &Path) -> Result<&str, Failure> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Failure::usage(format!("{}: cannot derive an output name", path.display())))
}

fn write_output(path: &Path, input: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let (Ok(a), Ok(b)) = (path.canonicalize(), input.canonicalize()) {
        if a == b {
            return Err(Failure::usage(format!(
                "refusing to overwrite input {}",
                input.display()
            )));
        }
    }
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

/// Pixelizes one image file, writes the requested outputs and returns the
/// run's metrics.
pub fn run_single(cfg: &RunConfig, input: &Path, mask: Option<&Path>) -> Result<MetricReport, Failure> {
    let img = read_pgm(input)?;
    let mask = mask.map(read_mask).transpose()?;
    if let Some(m) = &mask {
        if (m.height(), m.width()) != (img.height(), img.width()) {
            return Err(Failure::usage(format!(
                "{}: {}x{} mask does not match {}x{} image",
                input.display(),
                m.height(),
                m.width(),
                img.height(),
                img.width()
            )));
        }
    }
    let run = pixelize(cfg, &img, mask.as_ref())?;

    if cfg.check {
        if let Some(bytes) = &run.record {
            let restored = reconstruct(&decode(bytes)?)?;
            if restored != run.image {
                return Err(Failure::consistency(format!(
                    "{}: reconstruction from record differs from emitted image",
                    input.display()
                )));
            }
        }
    }

    if let Some(dir) = &cfg.out_dir {
        let name = stem(input)?;
        if cfg.emit.image() {
            let path = dir.join(format!("{name}.pgm"));
            write_output(&path, input, &dppx_core::pgm::encode_pgm(&run.image))?;
        }
        if let (true, Some(bytes)) = (cfg.emit.record(), &run.record) {
            write_output(&dir.join(format!("{name}.dppx")), input, bytes)?;
        }
    }
    report(cfg, &img, &run)
}

/// Files with `extension` directly inside `dir`, sorted by name.
pub fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(extension)))
        .collect();
    files.sort();
    Ok(files)
}

/// One input file and the outcome of running it.
pub type InputResult = (PathBuf, Result<MetricReport, Failure>);

/// Runs a file or every `.pgm` in a directory. Directory runs pair masks by
/// file stem and process files in parallel; results come back in name order.
pub fn run_inputs(
    cfg: &RunConfig,
    input: &Path,
    mask: Option<&Path>,
) -> Result<Vec<InputResult>, Failure> {
    cfg.validate()?;
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    if !input.is_dir() {
        return Ok(vec![(input.to_owned(), run_single(cfg, input, mask))]);
    }
    let mask_dir = match mask {
        Some(m) if m.is_dir() => Some(m),
        Some(m) => {
            return Err(Failure::usage(format!(
                "directory input needs a mask directory, got file {}",
                m.display()
            )))
        }
        None => None,
    };
    let files = list_files(input, "pgm")?;
    Ok(files
        .into_par_iter()
        .map(|file| {
            let paired = match mask_dir {
                Some(dir) => match stem(&file) {
                    Ok(name) => Some(dir.join(format!("{name}.pgm"))),
                    Err(e) => return (file, Err(e)),
                },
                None => None,
            };
            if let Some(p) = &paired {
                if !p.is_file() {
                    let err = Failure::io(p, std::io::Error::from(std::io::ErrorKind::NotFound));
                    return (file, Err(err));
                }
            }
            let result = run_single(cfg, &file, paired.as_deref());
            (file, result)
        })
        .collect())
}

/// Decodes a record file and writes its reconstruction into `out_dir`.
pub fn reconstruct_file(record: &Path, out_dir: &Path) -> Result<PathBuf, Failure> {
    let bytes = fs::read(record).map_err(|e| Failure::io(record, e))?;
    let image = reconstruct(&decode(&bytes).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", record.display(), f.message);
        f
    })?)?;
    let path = out_dir.join(format!("{}.pgm", stem(record)?));
    write_pgm(&path, &image)?;
    Ok(path)
}
