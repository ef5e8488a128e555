//! `dppx`: differentially private pixelization from the command line.

mod bench;
mod failure;
mod run;
mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dppx_core::metrics::CSV_HEADER;
use dppx_core::pgm::{read_mask, read_pgm};
use dppx_core::{decode, reconstruct, PrivacyParams};

use failure::{Class, Failure};
use run::{Emit, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "dppx", version, about = "Differentially private image pixelization")]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, env = "DPPX_THREADS", default_value_t = 0, global = true)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PrivacyArgs {
    /// Privacy budget ε (> 0); smaller means more noise.
    #[arg(long)]
    epsilon: f64,

    /// Maximum number of pixels in which neighbouring images may differ.
    #[arg(long = "m")]
    m: u32,

    /// Grid side length b in pixels.
    #[arg(long)]
    grid: usize,

    /// Noise seed (decimal u64).
    #[arg(long, required_unless_present = "random_seed", conflicts_with = "random_seed")]
    seed: Option<u64>,

    /// Draw a fresh seed and print it to stderr.
    #[arg(long)]
    random_seed: bool,

    /// NOT PRIVATE: skip noise and emit exact means. Testing only.
    #[arg(long)]
    no_noise: bool,
}

impl PrivacyArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let seed = rand::random();
            eprintln!("using random seed {seed}");
            seed
        })
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,

    /// What to write for each input [default: both, or image in reference mode].
    #[arg(long, value_enum)]
    emit: Option<Emit>,

    /// Decode each written record and confirm it reproduces the image.
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform pixelization of a PGM file or a directory of them.
    Pixelize {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = PixelMode::Uniform)]
        mode: PixelMode,
        #[command(flatten)]
        privacy: PrivacyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Region-adaptive pixelization guided by a mask (pixels >= 128 are simple).
    Adaptive {
        input: PathBuf,
        /// Mask PGM, or a directory of masks matched to inputs by file stem.
        #[arg(long)]
        mask: PathBuf,
        /// Complex grids are split into n×n subgrids; n must divide --grid.
        #[arg(long)]
        subgrid_n: usize,
        #[command(flatten)]
        privacy: PrivacyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Redraw pixelized images from .dppx records.
    Reconstruct {
        /// A .dppx file or a directory of them.
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a record's integrity, optionally against an emitted image.
    Verify {
        record: PathBuf,
        /// Pixelized PGM the record should reproduce.
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Run the Cartesian product of parameter lists and write a CSV report.
    Sweep {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Uniform)]
        mode: Mode,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon: Vec<f64>,
        #[arg(long = "m", value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        subgrid_n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        seed: Vec<u64>,
        /// NOT PRIVATE: exact means. Testing only.
        #[arg(long)]
        no_noise: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time the reference and parallel paths.
    Bench {
        /// PGM to time on; omit to use a synthetic image.
        input: Option<PathBuf>,
        /// Synthetic image size as WIDTHxHEIGHT.
        #[arg(long, default_value = "1920x1080")]
        synthetic: String,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long = "m", default_value_t = 16)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[arg(long, default_value_t = 10)]
        repeat: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum PixelMode {
    Uniform,
    Reference,
}

fn pixelize_command(cfg: RunConfig, input: &Path, mask: Option<&Path>) -> Result<(), Failure> {
    let results = run::run_inputs(&cfg, input, mask)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "{CSV_HEADER}");
    let mut worst: Option<Failure> = None;
    for (path, result) in results {
        match result {
            Ok(report) => {
                let _ = writeln!(out, "{}", report.csv_row());
            }
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                if worst.as_ref().is_none_or(|w| e.class > w.class) {
                    worst = Some(e);
                }
            }
        }
    }
    match worst {
        Some(e) => Err(Failure {
            class: e.class,
            message: "one or more inputs failed".into(),
        }),
        None => Ok(()),
    }
}

fn run_config(mode: Mode, n: usize, privacy: &PrivacyArgs, output: &OutputArgs) -> RunConfig {
    let default_emit = if mode == Mode::Reference { Emit::Image } else { Emit::Both };
    RunConfig {
        mode,
        epsilon: privacy.epsilon,
        m: privacy.m,
        b: privacy.grid,
        n,
        seed: privacy.seed(),
        no_noise: privacy.no_noise,
        emit: output.emit.unwrap_or(default_emit),
        check: output.check,
        out_dir: Some(output.out.clone()),
    }
}

fn parse_size(size: &str) -> Result<(usize, usize), Failure> {
    let parsed = size
        .split_once(['x', 'X'])
        .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)));
    parsed.ok_or_else(|| Failure::usage(format!("expected WIDTHxHEIGHT, got {size:?}")))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Pixelize {
            input,
            mode,
            privacy,
            output,
        } => {
            let mode = match mode {
                PixelMode::Uniform => Mode::Uniform,
                PixelMode::Reference => Mode::Reference,
            };
            if privacy.no_noise {
                eprintln!("warning: --no-noise output is NOT differentially private");
            }
            pixelize_command(run_config(mode, 1, &privacy, &output), &input, None)
        }
        Command::Adaptive {
            input,
            mask,
            subgrid_n,
            privacy,
            output,
        } => {
            if privacy.no_noise {
                eprintln!("warning: --no-noise output is NOT differentially private");
            }
            let cfg = run_config(Mode::Adaptive, subgrid_n, &privacy, &output);
            pixelize_command(cfg, &input, Some(&mask))
        }
        Command::Reconstruct { input, out } => {
            fs::create_dir_all(&out).map_err(|e| Failure::io(&out, e))?;
            let records = if input.is_dir() {
                run::list_files(&input, "dppx")?
            } else {
                vec![input]
            };
            let mut worst: Option<Failure> = None;
            for record in records {
                match run::reconstruct_file(&record, &out) {
                    Ok(path) => println!("{}", path.display()),
                    Err(e) => {
                        eprintln!("error: {e}");
                        if worst.as_ref().is_none_or(|w| e.class > w.class) {
                            worst = Some(e);
                        }
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
        Command::Verify { record, image } => {
            let bytes = fs::read(&record).map_err(|e| Failure::io(&record, e))?;
            let decoded = decode(&bytes)?;
            let restored = reconstruct(&decoded)?;
            println!(
                "{}: ok ({} mode, {}x{}, b={}, n={}, {} bytes)",
                record.display(),
                if decoded.is_adaptive() { "adaptive" } else { "uniform" },
                decoded.rows(),
                decoded.cols(),
                decoded.side(),
                decoded.subgrid_factor(),
                bytes.len()
            );
            if let Some(path) = image {
                if read_pgm(&path)? != restored {
                    return Err(Failure::consistency(format!(
                        "{} does not match the reconstruction of {}",
                        path.display(),
                        record.display()
                    )));
                }
                println!("{}: matches reconstruction", path.display());
            }
            Ok(())
        }
        Command::Sweep {
            input,
            mode,
            mask,
            epsilon,
            m,
            grid,
            subgrid_n,
            seed,
            no_noise,
            csv,
        } => {
            let cfg = sweep::SweepConfig {
                mode,
                epsilons: epsilon,
                ms: m,
                grids: grid,
                ns: subgrid_n,
                seeds: seed,
                no_noise,
            };
            cfg.validate()?;
            let img = read_pgm(&input)?;
            let mask = mask.map(read_mask).transpose()?;
            let rows = sweep::run_sweep(&cfg, &img, mask.as_ref())?;
            let written = match &csv {
                Some(path) => {
                    let mut buf = Vec::new();
                    sweep::write_csv(&mut buf, &rows).and_then(|_| fs::write(path, buf))
                }
                None => sweep::write_csv(&mut std::io::stdout().lock(), &rows),
            };
            written.map_err(|e| Failure::io(csv.as_deref().unwrap_or(Path::new("<stdout>")), e))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                return Err(Failure {
                    class: Class::Partial,
                    message: format!("{failed} of {} runs failed", rows.len()),
                });
            }
            Ok(())
        }
        Command::Bench {
            input,
            synthetic,
            grid,
            epsilon,
            m,
            seed,
            warmup,
            repeat,
        } => {
            let img = match input {
                Some(path) => read_pgm(path)?,
                None => {
                    let (w, h) = parse_size(&synthetic)?;
                    bench::synthetic(h, w)?
                }
            };
            let cfg = bench::BenchConfig {
                params: PrivacyParams::uniform(epsilon, m, grid)?,
                seed,
                warmup,
                repeat,
            };
            let result = bench::bench(&cfg, &img)?;
            result
                .write_csv(&mut std::io::stdout().lock())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
            eprintln!(
                "{}x{} b={grid}: reference mean {:.3} ms / median {:.3} ms; parallel ({} threads) mean {:.3} ms / median {:.3} ms; speedup {:.2}x; 1-thread output identical: {}",
                img.width(),
                img.height(),
                bench::mean(&result.reference_ms),
                bench::median(&result.reference_ms),
                result.threads,
                bench::mean(&result.parallel_ms),
                bench::median(&result.parallel_ms),
                result.speedup(),
                result.schedule_independent
            );
            if !result.schedule_independent {
                return Err(Failure::consistency("parallel output depends on thread count"));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return Failure::usage(e.to_string()).exit_code();
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
