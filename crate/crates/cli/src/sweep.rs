//! Parameter sweeps: the Cartesian product of ε, m, b, n and seeds over one
//! image, one CSV row per run.

use std::io::Write;

use dppx_core::metrics::CSV_HEADER;
use dppx_core::{GrayImage, MetricReport, RegionMask};

use crate::failure::Failure;
use crate::run::{pixelize, report, Emit, Mode, RunConfig};

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub mode: Mode,
    pub epsilons: Vec<f64>,
    pub ms: Vec<u32>,
    pub grids: Vec<usize>,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub no_noise: bool,
}

pub struct SweepRow {
    pub report: MetricReport,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn csv_row(&self) -> String {
        let error = self.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        format!("{},{error}", self.report.csv_row())
    }
}

fn sorted<T: Clone>(values: &[T], cmp: impl Fn(&T, &T) -> std::cmp::Ordering) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(&cmp);
    v.dedup_by(|a, b| cmp(a, b).is_eq());
    v
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        for (name, empty) in [
            ("--epsilon", self.epsilons.is_empty()),
            ("--m", self.ms.is_empty()),
            ("--grid", self.grids.is_empty()),
            ("--subgrid-n", self.ns.is_empty()),
            ("--seed", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(Failure::usage(format!("sweep list {name} is empty")));
            }
        }
        Ok(())
    }

    /// Run configurations in lexicographic (ε, m, b, n, seed) order.
    pub fn runs(&self) -> Vec<RunConfig> {
        let ns = if self.mode == Mode::Adaptive { sorted(&self.ns, Ord::cmp) } else { vec![1] };
        let mut runs = Vec::new();
        for &epsilon in &sorted(&self.epsilons, f64::total_cmp) {
            for &m in &sorted(&self.ms, Ord::cmp) {
                for &b in &sorted(&self.grids, Ord::cmp) {
                    for &n in &ns {
                        for &seed in &sorted(&self.seeds, Ord::cmp) {
                            runs.push(RunConfig {
                                mode: self.mode,
                                epsilon,
                                m,
                                b,
                                n,
                                seed,
                                no_noise: self.no_noise,
                                emit: if self.mode == Mode::Reference { Emit::Image } else { Emit::Both },
                                check: false,
                                out_dir: None,
                            });
                        }
                    }
                }
            }
        }
        runs
    }
}

/// Runs every configuration sequentially so runtimes are not skewed by
/// neighbouring runs. Individual failures become rows with an error.
pub fn run_sweep(cfg: &SweepConfig, img: &GrayImage, mask: Option<&RegionMask>) -> Result<Vec<SweepRow>, Failure> {
    cfg.validate()?;
    if cfg.mode == Mode::Adaptive && mask.is_none() {
        return Err(Failure::usage("adaptive sweep needs --mask"));
    }
    Ok(cfg
        .runs()
        .into_iter()
        .map(|run| {
            let result = pixelize(&run, img, mask).and_then(|out| report(&run, img, &out));
            match result {
                Ok(report) => SweepRow { report, error: None },
                Err(e) => SweepRow {
                    report: MetricReport {
                        epsilon: run.epsilon,
                        m: run.m,
                        b: run.b,
                        n: run.n,
                        seed: run.seed,
                        mse: f64::NAN,
                        ssim: f64::NAN,
                        runtime_ms: 0.0,
                        record_bytes: 0,
                    },
                    error: Some(e.message),
                },
            }
        })
        .collect())
}

pub fn write_csv(out: &mut impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER},error")?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}
