//! `grace run`: simulate an input file and write its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use grace_core::demag::DemagKernel;
use grace_core::dynamics::{self, SimState, Sink};
use grace_core::io::{self as gio, SimConfig, TrajectoryWriter};

use crate::{io_error, CliResult};

pub const TRAJECTORY_FILE: &str = "trajectory.txt";
pub const GNUPLOT_FILE: &str = "plot.gp";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    /// Write a snapshot at every output step as well as the trajectory.
    pub snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trajectory: PathBuf,
    pub rows: usize,
    pub snapshots: Vec<PathBuf>,
    pub gnuplot: PathBuf,
    pub final_average: [f64; 3],
    /// `Some(limit)` when `dt` exceeds the forward-Euler stability limit.
    pub unstable_dt: Option<f64>,
}

pub fn snapshot_name(step: u64) -> String {
    format!("snapshot_{step:08}.txt")
}

struct RunSink {
    trajectory: TrajectoryWriter,
    snapshot_dir: Option<PathBuf>,
    written: Vec<PathBuf>,
}

impl Sink for RunSink {
    fn emit(&mut self, state: &SimState) -> grace_core::Result<()> {
        self.trajectory.emit(state)?;
        if let Some(dir) = &self.snapshot_dir {
            let path = dir.join(snapshot_name(state.step));
            gio::write_snapshot_file(&path, state)?;
            self.written.push(path);
        }
        Ok(())
    }
}

/// Runs an already parsed configuration, writing into `output_dir`.
pub fn run_config(config: &SimConfig, output_dir: &Path, snapshots: bool) -> CliResult<RunSummary> {
    fs::create_dir_all(output_dir).map_err(|e| io_error(output_dir, e))?;
    let kernel = Arc::new(DemagKernel::new(&config.grid)?);
    let mut state = dynamics::initial_state_with_kernel(config, kernel)?;

    let limit = dynamics::euler_stability_limit(&state, config.material.alpha);
    let unstable_dt = (config.dt > limit).then_some(limit);
    if let Some(limit) = unstable_dt {
        eprintln!(
            "warning: dt = {:.3e} s exceeds the forward-Euler stability limit {:.3e} s \
             for alpha = {}; short-wavelength modes will grow",
            config.dt, limit, config.material.alpha
        );
    }

    let trajectory_path = output_dir.join(TRAJECTORY_FILE);
    let trajectory = TrajectoryWriter::create(&trajectory_path, &gio::trajectory_header(&state))?;
    let mut sink = RunSink {
        trajectory,
        snapshot_dir: snapshots.then(|| output_dir.to_path_buf()),
        written: Vec::new(),
    };
    dynamics::run_steps(&mut state, config.timesteps, config.output_interval, &mut sink)?;

    let latest = sink.written.last().map(|p| {
        p.file_name()
            .expect("snapshot path has a file name")
            .to_string_lossy()
            .into_owned()
    });
    let script = gio::emit_gnuplot_script(TRAJECTORY_FILE, latest.as_deref().map(|s| (s, &config.grid)));
    let gnuplot = output_dir.join(GNUPLOT_FILE);
    fs::write(&gnuplot, script).map_err(|e| io_error(&gnuplot, e))?;

    Ok(RunSummary {
        trajectory: trajectory_path,
        rows: sink.trajectory.rows(),
        snapshots: sink.written,
        gnuplot,
        final_average: state.average_magnetization(),
        unstable_dt,
    })
}

pub fn cmd_run(options: &RunOptions) -> CliResult<RunSummary> {
    let config = gio::parse_input_file(&options.input)?;
    run_config(&config, &options.output_dir, options.snapshots)
}
