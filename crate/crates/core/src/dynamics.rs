//! Effective field, LLG right-hand side, forward Euler stepping, energies,
//! relaxation and the time loop.

use std::sync::Arc;

use rayon::prelude::*;

use crate::demag::DemagKernel;
use crate::error::{Error, Result};
use crate::io::SimConfig;
use crate::local_fields::{self, external_field, FieldSchedule};
use crate::mesh::{average_magnetization, MaterialParams, VectorField, MU0};
use crate::vec3::{self, Vec3};

/// Field floor in the torque criterion's denominator, as a fraction of Ms.
/// Where exchange and demag nearly cancel, the direction of H_eff carries no
/// information and the criterion measures the perpendicular field instead.
pub const TORQUE_FIELD_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct SimState {
    pub m: VectorField,
    /// Completed steps. Simulated time is `step * dt`.
    pub step: u64,
    pub dt: f64,
    pub material: MaterialParams,
    pub schedule: FieldSchedule,
    /// `None` leaves the demagnetizing field out of H_eff.
    pub kernel: Option<Arc<DemagKernel>>,
    h_eff: VectorField,
}

impl SimState {
    pub fn new(
        m: VectorField,
        material: MaterialParams,
        schedule: FieldSchedule,
        dt: f64,
        kernel: Option<Arc<DemagKernel>>,
    ) -> Result<Self> {
        material.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeStep(dt));
        }
        if let Some(k) = &kernel {
            k.grid().ensure_same(m.grid())?;
        }
        let h_eff = VectorField::zeros(*m.grid());
        Ok(SimState {
            m,
            step: 0,
            dt,
            material,
            schedule,
            kernel,
            h_eff,
        })
    }

    /// Elapsed simulated time in seconds.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn average_magnetization(&self) -> Vec3 {
        average_magnetization(&self.m, self.material.ms)
    }

    /// Applied field at the current step.
    pub fn applied_field(&self) -> Vec3 {
        external_field(&self.schedule, self.step)
    }
}

/// H_eff = H_exch + H_anis + H_demag + H_ext at the state's current step.
pub fn effective_field(state: &SimState) -> Result<VectorField> {
    let mut out = VectorField::zeros(*state.m.grid());
    effective_field_into(state, &mut out)?;
    Ok(out)
}

pub fn effective_field_into(state: &SimState, out: &mut VectorField) -> Result<()> {
    field_at_step(state, state.step, out)
}

fn field_at_step(state: &SimState, step: u64, out: &mut VectorField) -> Result<()> {
    let p = &state.material;
    match &state.kernel {
        Some(k) => k.demag_field_into(&state.m, out)?,
        None => {
            state.m.grid().ensure_same(out.grid())?;
            out.fill([0.0; 3]);
        }
    }
    local_fields::add_exchange_field(&state.m, p.a_exch, p.ms, out)?;
    local_fields::add_anisotropy_field(&state.m, p.aniso_axis, p.h_k, p.ms, out)?;
    local_fields::add_uniform_field(external_field(&state.schedule, step), out);
    Ok(())
}

/// dM/dt of one cell: `-γ/(1+α²) M×H - αγ/((1+α²)Ms) M×(M×H)`, with
/// `γ` in m/(A·s) multiplying H in A/m.
#[inline]
pub fn llg_rhs(m: Vec3, h: Vec3, p: &MaterialParams) -> Vec3 {
    let g = p.gamma / (1.0 + p.alpha * p.alpha);
    let mxh = vec3::cross(m, h);
    let mxmxh = vec3::cross(m, mxh);
    let damp = p.alpha * g / p.ms;
    [
        -g * mxh[0] - damp * mxmxh[0],
        -g * mxh[1] - damp * mxmxh[1],
        -g * mxh[2] - damp * mxmxh[2],
    ]
}

/// M ← M + dt·dM/dt(M, h), then rescale to Ms. Returns the first bad cell
/// if any value goes non-finite.
fn euler_update(m: &mut VectorField, h: &VectorField, p: &MaterialParams, dt: f64) -> Option<usize> {
    let ms = p.ms;
    let [mx, my, mz] = m.components_mut();
    mx.par_iter_mut()
        .zip(my.par_iter_mut())
        .zip(mz.par_iter_mut())
        .enumerate()
        .filter_map(|(idx, ((x, y), z))| {
            let cur = [*x, *y, *z];
            let d = llg_rhs(cur, h.get(idx), p);
            let next = [cur[0] + dt * d[0], cur[1] + dt * d[1], cur[2] + dt * d[2]];
            let s = ms / vec3::norm(next);
            *x = next[0] * s;
            *y = next[1] * s;
            *z = next[2] * s;
            (!(x.is_finite() && y.is_finite() && z.is_finite()) || s == 0.0).then_some(idx)
        })
        .min()
}

fn non_finite(state: &SimState, step: u64, cell: usize) -> Error {
    let (i, j, k) = state.m.grid().coords(cell);
    Error::NonFinite {
        step,
        cell,
        i,
        j,
        k,
    }
}

/// One forward Euler step of length `state.dt`, with H_eff evaluated once
/// at the pre-step state.
pub fn euler_step(state: &mut SimState) -> Result<()> {
    let mut h = std::mem::replace(&mut state.h_eff, VectorField::zeros(*state.m.grid()));
    let res = field_at_step(state, state.step, &mut h);
    let bad = res.map(|_| euler_update(&mut state.m, &h, &state.material, state.dt));
    state.h_eff = h;
    if let Some(cell) = bad? {
        return Err(non_finite(state, state.step + 1, cell));
    }
    state.step += 1;
    Ok(())
}

/// Upper bound (rad/s) on the angular frequency of any linear mode of
/// `state`: γ times the largest Neumann-Laplacian exchange eigenvalue plus
/// Ms (the demag tensor's spectrum lies in [0, 1]), H_k and the peak
/// applied field.
pub fn max_mode_frequency(state: &SimState) -> f64 {
    let p = &state.material;
    let grid = state.m.grid();
    let lambda: f64 = grid
        .dims()
        .into_iter()
        .zip(grid.cell_size())
        .map(|(n, d)| {
            let top = 2.0 - 2.0 * (std::f64::consts::PI * (n - 1) as f64 / n as f64).cos();
            top / (d * d)
        })
        .sum();
    let h_exch = 2.0 * p.a_exch / (MU0 * p.ms) * lambda;
    p.gamma * (h_exch + p.ms + p.h_k.abs() + vec3::norm(state.schedule.h0))
}

/// Largest forward-Euler step that does not amplify the fastest mode at
/// damping `alpha`. For a mode `e^{-iωt}` one step multiplies the
/// amplitude by `1 - (α + i) ω dt / (1 + α²)`, whose modulus is at most 1
/// exactly when `ω dt ≤ 2α`. Undamped precession is never stable.
pub fn euler_stability_limit(state: &SimState, alpha: f64) -> f64 {
    2.0 * alpha / max_mode_frequency(state)
}

/// Largest cellwise `|M × H| / (Ms (|H| + H_floor))` with
/// `H_floor = TORQUE_FIELD_FLOOR · Ms`: the sine of the angle between M and
/// H_eff wherever the local field is large compared with the floor.
pub fn max_torque(m: &VectorField, h: &VectorField, ms: f64) -> f64 {
    let floor = TORQUE_FIELD_FLOOR * ms;
    (0..m.len())
        .into_par_iter()
        .map(|idx| {
            let hv = h.get(idx);
            vec3::norm(vec3::cross(m.get(idx), hv)) / (ms * (vec3::norm(hv) + floor))
        })
        .reduce(|| 0.0, f64::max)
}

/// Energy contributions in joules.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energy {
    pub exchange: f64,
    pub anisotropy: f64,
    pub demag: f64,
    pub zeeman: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.exchange + self.anisotropy + self.demag + self.zeeman
    }
}

pub fn total_energy(state: &SimState) -> Result<Energy> {
    let p = &state.material;
    let m = &state.m;
    let vol = m.grid().cell_volume();
    let demag = match &state.kernel {
        Some(k) => {
            let h = k.demag_field(m)?;
            -0.5 * MU0 * vol * m.dot(&h)
        }
        None => 0.0,
    };
    Ok(Energy {
        exchange: local_fields::exchange_energy(m, p.a_exch, p.ms),
        anisotropy: local_fields::anisotropy_energy(m, p.aniso_axis, p.h_k, p.ms),
        demag,
        zeeman: local_fields::zeeman_energy(m, state.applied_field()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    pub alpha: f64,
    pub max_steps: u64,
    pub torque_tol: f64,
    /// Step length; `None` uses the state's own `dt`.
    pub dt: Option<f64>,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            alpha: 1.0,
            max_steps: 1_000_000,
            torque_tol: 1e-4,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxStatus {
    /// The torque criterion was met.
    Converged,
    /// `max_steps` ran out first.
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxReport {
    pub status: RelaxStatus,
    pub steps: u64,
    pub max_torque: f64,
}

/// Damped relaxation with `options.alpha`, holding the applied field at the
/// state's current step. The simulation clock (`step`) is not advanced and
/// the material's own damping is restored afterwards.
pub fn relax(state: &mut SimState, options: &RelaxOptions) -> Result<RelaxReport> {
    if options.alpha.is_nan() || options.alpha <= 0.0 || options.torque_tol.is_nan() || options.torque_tol <= 0.0 {
        return Err(Error::InvalidMaterial(format!(
            "relaxation needs alpha > 0 and torque_tol > 0, got {} and {}",
            options.alpha, options.torque_tol
        )));
    }
    let dt = options.dt.unwrap_or(state.dt);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let params = state.material.with_alpha(options.alpha)?;
    let step = state.step;
    let mut h = std::mem::replace(&mut state.h_eff, VectorField::zeros(*state.m.grid()));
    let result = (|| {
        let mut taken = 0;
        loop {
            field_at_step(state, step, &mut h)?;
            let torque = max_torque(&state.m, &h, params.ms);
            if torque < options.torque_tol {
                return Ok(RelaxReport {
                    status: RelaxStatus::Converged,
                    steps: taken,
                    max_torque: torque,
                });
            }
            if taken >= options.max_steps {
                return Ok(RelaxReport {
                    status: RelaxStatus::MaxSteps,
                    steps: taken,
                    max_torque: torque,
                });
            }
            if let Some(cell) = euler_update(&mut state.m, &h, &params, dt) {
                return Err(non_finite(state, taken + 1, cell));
            }
            taken += 1;
        }
    })();
    state.h_eff = h;
    result
}

/// Receives the state at every output step of [`run`].
pub trait Sink {
    fn emit(&mut self, state: &SimState) -> Result<()>;
}

/// Collects `(t, <M>/Ms)` rows in memory.
#[derive(Debug, Default, Clone)]
pub struct Recorder {
    pub rows: Vec<(f64, Vec3)>,
}

impl Sink for Recorder {
    fn emit(&mut self, state: &SimState) -> Result<()> {
        self.rows.push((state.time(), state.average_magnetization()));
        Ok(())
    }
}

impl<S: Sink + ?Sized> Sink for &mut S {
    fn emit(&mut self, state: &SimState) -> Result<()> {
        (**self).emit(state)
    }
}

/// Builds the initial state described by `config`: uniform M_init and a
/// freshly assembled demag kernel.
pub fn initial_state(config: &SimConfig) -> Result<SimState> {
    let kernel = Arc::new(DemagKernel::new(&config.grid)?);
    initial_state_with_kernel(config, kernel)
}

pub fn initial_state_with_kernel(config: &SimConfig, kernel: Arc<DemagKernel>) -> Result<SimState> {
    let m = VectorField::uniform(config.grid, config.m_init);
    SimState::new(m, config.material, config.schedule, config.dt, Some(kernel))
}

/// Advances `state` by `steps` Euler steps, emitting to `sink` at the start
/// and every `output_interval` completed steps.
pub fn run_steps(
    state: &mut SimState,
    steps: u64,
    output_interval: u64,
    sink: &mut dyn Sink,
) -> Result<()> {
    let interval = output_interval.max(1);
    sink.emit(state)?;
    for n in 1..=steps {
        euler_step(state)?;
        if n % interval == 0 {
            sink.emit(state)?;
        }
    }
    Ok(())
}

/// Executes the simulation described by `config`.
pub fn run(config: &SimConfig, sink: &mut dyn Sink) -> Result<SimState> {
    let mut state = initial_state(config)?;
    run_steps(&mut state, config.timesteps, config.output_interval, sink)?;
    Ok(state)
}
