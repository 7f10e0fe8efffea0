//! `grace bench`: per-step timing of the cubic benchmark sample over a
//! range of grid sizes.
//!
//! Each size builds an N×N×N sample with 1 nm cells, A = 1e-11 J/m,
//! Ms = 1000 kA/m and a 100 kA/m anisotropy field along x. Kernel
//! assembly is excluded; warm-up steps are run and discarded, then every
//! timed step is measured separately.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use grace_core::demag::DemagKernel;
use grace_core::dynamics::{self, SimState};
use grace_core::local_fields::FieldSchedule;
use grace_core::{Error, Grid, MaterialParams, VectorField};

use crate::CliResult;

pub const WARMUP_STEPS: usize = 5;
pub const MIN_TIMED_STEPS: usize = 50;
pub const DEFAULT_SIZES: [usize; 4] = [8, 16, 32, 64];
/// Largest acceptable time ratio between consecutive size doublings.
pub const DOUBLING_RATIO_LIMIT: f64 = 10.0;

const A_EXCH: f64 = 1e-11;
const MS: f64 = 1e6;
const H_ANIS: f64 = 1e5;
const ALPHA: f64 = 0.02;
const DT: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum BenchOutcome {
    Timed { mean_ms: f64, std_ms: f64 },
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub cells: usize,
    pub outcome: BenchOutcome,
}

impl BenchRow {
    pub fn mean_ms(&self) -> Option<f64> {
        match self.outcome {
            BenchOutcome::Timed { mean_ms, .. } => Some(mean_ms),
            BenchOutcome::Skipped(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub threads: usize,
    pub precision: &'static str,
    pub steps: usize,
    pub rows: Vec<BenchRow>,
}

pub fn sample(n: usize) -> grace_core::Result<(VectorField, MaterialParams)> {
    let grid = Grid::with_default_cells(n, n, n)?;
    let p = MaterialParams::new(ALPHA, A_EXCH, MS)?.with_anisotropy_vector([H_ANIS, 0.0, 0.0])?;
    let s = MS / 3f64.sqrt();
    Ok((VectorField::uniform(grid, [s, s, s]), p))
}

fn available_memory() -> Option<u128> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u128 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn time_size(n: usize, steps: usize) -> grace_core::Result<BenchOutcome> {
    let (m, p) = sample(n)?;
    let grid = *m.grid();
    let need = DemagKernel::required_bytes(&grid) + 4 * 3 * 8 * grid.n_cells() as u128;
    if let Some(avail) = available_memory() {
        if need > avail {
            return Ok(BenchOutcome::Skipped(format!(
                "needs {} MiB, {} MiB available",
                need >> 20,
                avail >> 20
            )));
        }
    }
    let kernel = match DemagKernel::new(&grid) {
        Ok(k) => Arc::new(k),
        Err(Error::Resource { bytes }) => {
            return Ok(BenchOutcome::Skipped(format!("allocation of {bytes} bytes failed")))
        }
        Err(e) => return Err(e),
    };
    let mut state = SimState::new(m, p, FieldSchedule::zero(), DT, Some(kernel))?;
    for _ in 0..WARMUP_STEPS {
        dynamics::euler_step(&mut state)?;
    }
    let mut samples = Vec::with_capacity(steps);
    for _ in 0..steps {
        let t0 = Instant::now();
        dynamics::euler_step(&mut state)?;
        samples.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    let (mean_ms, std_ms) = mean_std(&samples);
    Ok(BenchOutcome::Timed { mean_ms, std_ms })
}

/// Times `steps` Euler steps (after the warm-up) for each size in turn.
pub fn cmd_bench(sizes: &[usize], steps: usize) -> CliResult<BenchReport> {
    let steps = steps.max(MIN_TIMED_STEPS);
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let outcome = time_size(n, steps)?;
        rows.push(BenchRow {
            n,
            cells: n * n * n,
            outcome,
        });
    }
    Ok(BenchReport {
        threads: crate::thread_count(),
        precision: "f64",
        steps,
        rows,
    })
}

/// A row's time relative to the row before it, for consecutive sizes that
/// double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Doubling {
    pub from: usize,
    pub to: usize,
    pub ratio: f64,
}

impl BenchReport {
    pub fn doublings(&self) -> Vec<Doubling> {
        self.rows
            .windows(2)
            .filter(|w| w[1].n == 2 * w[0].n)
            .filter_map(|w| {
                Some(Doubling {
                    from: w[0].n,
                    to: w[1].n,
                    ratio: w[1].mean_ms()? / w[0].mean_ms()?,
                })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,cells,mean_ms,std_ms,status,threads,precision\n");
        for r in &self.rows {
            let (mean, std, status) = match &r.outcome {
                BenchOutcome::Timed { mean_ms, std_ms } => {
                    (format!("{mean_ms:.6}"), format!("{std_ms:.6}"), "ok".to_string())
                }
                BenchOutcome::Skipped(why) => {
                    (String::new(), String::new(), format!("skipped: {}", why.replace(',', ";")))
                }
            };
            let _ = writeln!(
                s,
                "{},{},{mean},{std},{status},{},{}",
                r.n, r.cells, self.threads, self.precision
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "threads: {}  precision: {}  warm-up: {}  timed steps: {}",
            self.threads, self.precision, WARMUP_STEPS, self.steps
        );
        let _ = writeln!(s, "{:>6} {:>10} {:>14} {:>12}", "N", "cells", "ms/step", "std (ms)");
        for r in &self.rows {
            match &r.outcome {
                BenchOutcome::Timed { mean_ms, std_ms } => {
                    let _ = writeln!(s, "{:>6} {:>10} {:>14.4} {:>12.4}", r.n, r.cells, mean_ms, std_ms);
                }
                BenchOutcome::Skipped(why) => {
                    let _ = writeln!(s, "{:>6} {:>10} {:>14} ({why})", r.n, r.cells, "skipped");
                }
            }
        }
        for d in self.doublings() {
            let verdict = if d.ratio <= DOUBLING_RATIO_LIMIT { "ok" } else { "FAIL" };
            let _ = writeln!(
                s,
                "time({0}^3)/time({1}^3) = {2:.2} (limit {3}): {verdict}",
                d.to, d.from, d.ratio, DOUBLING_RATIO_LIMIT
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, mean: Option<f64>) -> BenchRow {
        BenchRow {
            n,
            cells: n * n * n,
            outcome: match mean {
                Some(m) => BenchOutcome::Timed { mean_ms: m, std_ms: 0.1 },
                None => BenchOutcome::Skipped("too big".into()),
            },
        }
    }

    #[test]
    fn doublings_skip_missing_rows() {
        let report = BenchReport {
            threads: 1,
            precision: "f64",
            steps: 50,
            rows: vec![row(8, Some(1.0)), row(16, Some(3.0)), row(32, None), row(64, Some(9.0))],
        };
        let d = report.doublings();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].from, d[0].to, d[0].ratio), (8, 16, 3.0));
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(3).unwrap().starts_with("32,32768,,,skipped"));
        assert!(report.to_table().contains("time(16^3)/time(8^3) = 3.00"));
    }

    #[test]
    fn sample_matches_benchmark_parameters() {
        let (m, p) = sample(4).unwrap();
        assert_eq!(m.grid().dims(), [4, 4, 4]);
        assert_eq!((p.a_exch, p.ms, p.h_k), (1e-11, 1e6, 1e5));
        assert_eq!(p.aniso_axis, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn tiny_bench_runs() {
        let report = cmd_bench(&[2, 4], 1).unwrap();
        assert_eq!(report.steps, MIN_TIMED_STEPS);
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.mean_ms().is_some()));
    }
}
