//! `grace validate`: μMAG standard problem #4.
//!
//! A 500 nm × 125 nm × 3 nm permalloy film (A = 1.3e-11 J/m, Ms = 800 kA/m,
//! no anisotropy) is relaxed from a uniform state tilted off the long axis
//! into the S-state with α = 1, then reversed by a constant field with
//! α = 0.02 for 1 ns. The `<M>/Ms` trajectory is compared with bundled
//! reference curves from an independent simulator (see `data/sp4`).
//!
//! Full resolution is 500×125×3 cells of 1 nm. `--coarse` uses 100×25×3
//! cells of 5 nm × 5 nm × 1 nm, which keeps the film thickness.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use grace_core::demag::DemagKernel;
use grace_core::dynamics::{self, RelaxOptions, RelaxReport, RelaxStatus, SimState, Sink};
use grace_core::io::{self as gio, TrajectoryWriter};
use grace_core::local_fields::FieldSchedule;
use grace_core::vec3::{self, Vec3};
use grace_core::mesh::{renormalize, resample};
use grace_core::{Grid, MaterialParams, VectorField};

use crate::{io_error, CliError, CliResult};

pub const A_EXCH: f64 = 1.3e-11;
pub const MS: f64 = 8e5;
pub const ALPHA: f64 = 0.02;
pub const DEFAULT_DT: f64 = 1e-13;
pub const DURATION: f64 = 1e-9;
/// Trajectory rows are written every picosecond, matching the references.
pub const OUTPUT_SPACING: f64 = 1e-12;
/// Initial direction before relaxation.
pub const M_START: Vec3 = [1.0, 0.25, 0.1];

const REFERENCE_1: &str = include_str!("../data/sp4/field1_reference.txt");
const REFERENCE_2: &str = include_str!("../data/sp4/field2_reference.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sp4Field {
    One,
    Two,
}

impl Sp4Field {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Sp4Field::One),
            2 => Some(Sp4Field::Two),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Sp4Field::One => 1,
            Sp4Field::Two => 2,
        }
    }

    /// μ0·H in mT.
    pub fn millitesla(self) -> Vec3 {
        match self {
            Sp4Field::One => [-24.6, 4.3, 0.0],
            Sp4Field::Two => [-35.5, -6.3, 0.0],
        }
    }

    pub fn field(self) -> Vec3 {
        self.millitesla().map(gio::millitesla_to_a_per_m)
    }

    /// Reference `(t, <M>/Ms)` curve.
    pub fn reference(self) -> Vec<(f64, Vec3)> {
        let (text, name) = match self {
            Sp4Field::One => (REFERENCE_1, "field1_reference.txt"),
            Sp4Field::Two => (REFERENCE_2, "field2_reference.txt"),
        };
        gio::parse_trajectory(text, name).expect("bundled reference data parses")
    }
}

/// Pass thresholds for one resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative error of the first `<Mx>` zero-crossing time.
    pub crossing: f64,
    /// Largest pointwise `|Δ<My>/Ms|`.
    pub my: f64,
}

pub const FULL_TOLERANCES: Tolerances = Tolerances {
    crossing: 0.10,
    my: 0.1,
};
pub const COARSE_TOLERANCES: Tolerances = Tolerances {
    crossing: 0.20,
    my: 0.2,
};

pub fn grid(coarse: bool) -> Grid {
    let g = if coarse {
        Grid::new(100, 25, 3, 5e-9, 5e-9, 1e-9)
    } else {
        Grid::with_default_cells(500, 125, 3)
    };
    g.expect("problem #4 grids are valid")
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub field: Sp4Field,
    pub coarse: bool,
    pub output_dir: PathBuf,
    /// Step length in seconds.
    pub dt: f64,
    /// Relaxation settings; `dt: None` derives the step from the grid.
    pub relax: RelaxOptions,
}

impl ValidateOptions {
    pub fn new(field: Sp4Field, coarse: bool, output_dir: impl Into<PathBuf>) -> Self {
        ValidateOptions {
            field,
            coarse,
            output_dir: output_dir.into(),
            dt: DEFAULT_DT,
            relax: RelaxOptions::default(),
        }
    }

    fn stem(&self) -> String {
        let res = if self.coarse { "_coarse" } else { "" };
        format!("sp4_field{}{res}", self.field.number())
    }

    pub fn trajectory_path(&self) -> PathBuf {
        self.output_dir.join(format!("{}_trajectory.txt", self.stem()))
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.output_dir.join(format!("{}_crossing.txt", self.stem()))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output_dir.join(format!("{}_summary.txt", self.stem()))
    }

    pub fn gnuplot_path(&self) -> PathBuf {
        self.output_dir.join(format!("{}_plot.gp", self.stem()))
    }
}

#[derive(Debug, Clone)]
pub struct ValidateReport {
    pub field: Sp4Field,
    pub coarse: bool,
    pub relaxation: Vec<RelaxStage>,
    pub s_state: Vec3,
    pub rows: Vec<(f64, Vec3)>,
    pub crossing: Option<f64>,
    pub reference_crossing: f64,
    pub max_my_deviation: f64,
    pub tolerances: Tolerances,
    /// Set when `dt` exceeds the forward-Euler stability limit at α = 0.02.
    pub stability_limit: f64,
    pub dt: f64,
}

impl ValidateReport {
    pub fn crossing_error(&self) -> Option<f64> {
        self.crossing
            .map(|t| (t - self.reference_crossing).abs() / self.reference_crossing)
    }

    pub fn crossing_ok(&self) -> bool {
        self.crossing_error().is_some_and(|e| e <= self.tolerances.crossing)
    }

    pub fn my_ok(&self) -> bool {
        self.max_my_deviation <= self.tolerances.my
    }

    pub fn passed(&self) -> bool {
        self.crossing_ok() && self.my_ok()
    }

    pub fn summary(&self) -> String {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let res = if self.coarse { "coarse" } else { "full" };
        let mut s = String::new();
        let _ = writeln!(s, "standard problem #4, field {} ({res} resolution)", self.field.number());
        let h = self.field.millitesla();
        let _ = writeln!(s, "applied field: ({}, {}, {}) mT", h[0], h[1], h[2]);
        let _ = writeln!(
            s,
            "dt: {:.3e} s (forward-Euler stability limit at alpha = {ALPHA}: {:.3e} s)",
            self.dt, self.stability_limit
        );
        for stage in &self.relaxation {
            let [nx, ny, nz] = stage.dims;
            let r = &stage.report;
            let _ = writeln!(
                s,
                "relaxation on {nx}x{ny}x{nz}: {:?} after {} steps of {:.3e} s, max torque {:.3e}",
                r.status, r.steps, stage.dt, r.max_torque
            );
        }
        let m = self.s_state;
        let _ = writeln!(s, "S-state <M>/Ms: ({:.6}, {:.6}, {:.6})", m[0], m[1], m[2]);
        let crossing = match self.crossing {
            Some(t) => format!("{:.4} ns", t * 1e9),
            None => "none".to_string(),
        };
        let err = self
            .crossing_error()
            .map_or("n/a".to_string(), |e| format!("{:.2}%", e * 100.0));
        let _ = writeln!(
            s,
            "first <Mx> zero crossing: {crossing} (reference {:.4} ns, error {err}, limit {:.0}%): {}",
            self.reference_crossing * 1e9,
            self.tolerances.crossing * 100.0,
            verdict(self.crossing_ok())
        );
        let _ = writeln!(
            s,
            "max |<My> - reference|: {:.4} (limit {}): {}",
            self.max_my_deviation,
            self.tolerances.my,
            verdict(self.my_ok())
        );
        let _ = writeln!(s, "result: {}", verdict(self.passed()));
        s
    }
}

/// Time of the first sign change of `<Mx>` from positive to non-positive,
/// linearly interpolated between rows.
pub fn first_zero_crossing(rows: &[(f64, Vec3)]) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (t0, m0) = w[0];
        let (t1, m1) = w[1];
        (m0[0] > 0.0 && m1[0] <= 0.0).then(|| t0 + (t1 - t0) * m0[0] / (m0[0] - m1[0]))
    })
}

/// Linear interpolation of component `c` of a time-sorted curve.
pub fn interpolate(curve: &[(f64, Vec3)], t: f64, c: usize) -> Option<f64> {
    let i = curve.partition_point(|(tc, _)| *tc < t);
    if i < curve.len() && curve[i].0 == t {
        return Some(curve[i].1[c]);
    }
    if i == 0 || i == curve.len() {
        return None;
    }
    let (t0, m0) = curve[i - 1];
    let (t1, m1) = curve[i];
    Some(m0[c] + (m1[c] - m0[c]) * (t - t0) / (t1 - t0))
}

/// Largest `|rows.My - reference.My|` over the rows inside the reference's
/// time span.
pub fn max_deviation(rows: &[(f64, Vec3)], reference: &[(f64, Vec3)], c: usize) -> f64 {
    rows.iter()
        .filter_map(|&(t, m)| interpolate(reference, t, c).map(|r| (m[c] - r).abs()))
        .fold(0.0, f64::max)
}

/// Trajectory sink that also writes one snapshot at the first output row
/// with `<Mx> ≤ 0`.
struct ValidateSink {
    trajectory: TrajectoryWriter,
    snapshot: PathBuf,
    crossed: bool,
    previous_mx: f64,
    rows: Vec<(f64, Vec3)>,
}

impl Sink for ValidateSink {
    fn emit(&mut self, state: &SimState) -> grace_core::Result<()> {
        let m = state.average_magnetization();
        self.trajectory.emit(state)?;
        self.rows.push((state.time(), m));
        if !self.crossed && self.previous_mx > 0.0 && m[0] <= 0.0 {
            gio::write_snapshot_file(&self.snapshot, state)?;
            self.crossed = true;
        }
        self.previous_mx = m[0];
        Ok(())
    }
}

/// Fraction of the forward-Euler limit used as the relaxation step.
pub const RELAX_STEP_FRACTION: f64 = 0.9;

/// One damped relaxation on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxStage {
    pub dims: [usize; 3],
    pub dt: f64,
    pub report: RelaxReport,
}

/// A relaxed S-state, ready for either reversal field.
#[derive(Debug, Clone)]
pub struct SState {
    pub state: SimState,
    pub stages: Vec<RelaxStage>,
}

fn new_state(grid: Grid, m: VectorField, dt: f64) -> CliResult<SimState> {
    let material = MaterialParams::new(ALPHA, A_EXCH, MS)?;
    let kernel = Arc::new(DemagKernel::new(&grid)?);
    Ok(SimState::new(m, material, FieldSchedule::zero(), dt, Some(kernel))?)
}

/// Relaxes `state` with `options`. A missing `options.dt` becomes
/// [`RELAX_STEP_FRACTION`] of the forward-Euler limit at `options.alpha`,
/// capped at the dynamics step.
fn relax_stage(state: &mut SimState, options: &RelaxOptions) -> CliResult<RelaxStage> {
    let dt = options.dt.unwrap_or_else(|| {
        (RELAX_STEP_FRACTION * dynamics::euler_stability_limit(state, options.alpha)).min(state.dt)
    });
    let report = dynamics::relax(
        state,
        &RelaxOptions {
            dt: Some(dt),
            ..*options
        },
    )?;
    let dims = state.m.grid().dims();
    eprintln!(
        "relaxation on {}x{}x{}: {:?} after {} steps (dt {:.3e} s), max torque {:.3e}",
        dims[0], dims[1], dims[2], report.status, report.steps, dt, report.max_torque
    );
    if report.status != RelaxStatus::Converged {
        return Err(CliError::Relaxation(report));
    }
    Ok(RelaxStage { dims, dt, report })
}

/// Relaxes the film from the tilted uniform state into the S-state. The
/// coarse grid is always relaxed first; at full resolution its result is
/// interpolated onto the fine grid and relaxed again there, which leaves
/// only short-wavelength corrections to the fine-grid stage.
pub fn relax_s_state(coarse: bool, dt: f64, options: &RelaxOptions) -> CliResult<SState> {
    let start = grid(true);
    let m0 = vec3::scale(M_START, MS / vec3::norm(M_START));
    let mut state = new_state(start, VectorField::uniform(start, m0), dt)?;
    let mut stages = vec![relax_stage(&mut state, options)?];
    if !coarse {
        let fine = grid(false);
        let mut m = resample(&state.m, fine);
        renormalize(&mut m, MS)?;
        state = new_state(fine, m, dt)?;
        stages.push(relax_stage(&mut state, options)?);
    }
    Ok(SState { state, stages })
}

/// Applies the reversal field to a copy of `s_state` and compares the
/// trajectory with the reference.
pub fn reverse(s_state: &SState, options: &ValidateOptions) -> CliResult<ValidateReport> {
    let out = &options.output_dir;
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let grid = *s_state.state.m.grid();
    assert_eq!(
        grid.dims(),
        self::grid(options.coarse).dims(),
        "S-state resolution does not match the options"
    );

    let mut state = s_state.state.clone();
    state.dt = options.dt;
    state.step = 0;
    state.schedule = FieldSchedule::constant(options.field.field());
    let stability_limit = dynamics::euler_stability_limit(&state, ALPHA);
    if options.dt > stability_limit {
        eprintln!(
            "warning: dt = {:.3e} s exceeds the forward-Euler stability limit {:.3e} s",
            options.dt, stability_limit
        );
    }
    let steps = (DURATION / options.dt).round() as u64;
    let interval = ((OUTPUT_SPACING / options.dt).round() as u64).max(1);

    let mut header = gio::trajectory_header(&state);
    let h = options.field.millitesla();
    header.push(format!(
        "standard problem #4 field {}: ({}, {}, {}) mT",
        options.field.number(),
        h[0],
        h[1],
        h[2]
    ));
    let mut sink = ValidateSink {
        trajectory: TrajectoryWriter::create(&options.trajectory_path(), &header)?,
        snapshot: options.snapshot_path(),
        crossed: false,
        previous_mx: f64::NAN,
        rows: Vec::new(),
    };
    dynamics::run_steps(&mut state, steps, interval, &mut sink)?;

    let reference = options.field.reference();
    let reference_crossing =
        first_zero_crossing(&reference).expect("reference curves cross <Mx> = 0");
    let report = ValidateReport {
        field: options.field,
        coarse: options.coarse,
        relaxation: s_state.stages.clone(),
        s_state: s_state.state.average_magnetization(),
        crossing: first_zero_crossing(&sink.rows),
        reference_crossing,
        max_my_deviation: max_deviation(&sink.rows, &reference, 1),
        tolerances: if options.coarse {
            COARSE_TOLERANCES
        } else {
            FULL_TOLERANCES
        },
        stability_limit,
        dt: options.dt,
        rows: sink.rows,
    };

    let summary = options.summary_path();
    fs::write(&summary, report.summary()).map_err(|e| io_error(&summary, e))?;
    write_gnuplot(options, sink.crossed, &grid)?;
    Ok(report)
}

pub fn cmd_validate(options: &ValidateOptions) -> CliResult<ValidateReport> {
    let s_state = relax_s_state(options.coarse, options.dt, &options.relax)?;
    reverse(&s_state, options)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .expect("output paths have file names")
        .to_string_lossy()
        .into_owned()
}

fn write_gnuplot(options: &ValidateOptions, with_snapshot: bool, grid: &Grid) -> CliResult<()> {
    let snapshot = file_name(&options.snapshot_path());
    let script = gio::emit_gnuplot_script(
        &file_name(&options.trajectory_path()),
        with_snapshot.then_some((snapshot.as_str(), grid)),
    );
    let path = options.gnuplot_path();
    fs::write(&path, script).map_err(|e| io_error(&path, e))
}
