//! Input-file parsing, ASCII trajectory and snapshot output, and gnuplot
//! script generation.
//!
//! # Input format
//!
//! Line oriented. Blank lines and lines starting with `#` are ignored. Each
//! remaining line is a directive followed by whitespace-separated numbers:
//!
//! ```text
//! -simulation  outputInterval timesteps dt(ns)
//! -rectang     nx ny nz
//! -material    alpha A(J/m) Mx My Mz (kA/m) Hax Hay Haz (kA/m)
//! -externfield Hx Hy Hz (mT) startStep decayStep stopStep
//! ```
//!
//! `-externfield` is optional; the other three are required. Each may appear
//! once, in any order. Cells are 1 nm cubes, so `nx ny nz` are both cell
//! counts and sample dimensions in nanometers. `|M_init|` sets Ms; the
//! direction and length of the anisotropy vector set the easy axis and H_k.
//! The applied field is held from `startStep` until `decayStep` and then
//! ramped linearly to zero at `stopStep` (see [`FieldSchedule`]).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dynamics::{SimState, Sink};
use crate::error::{Error, Result};
use crate::local_fields::FieldSchedule;
use crate::mesh::{Grid, MaterialParams, VectorField, MU0};
use crate::vec3::{self, Vec3};

/// Fully parsed simulation description, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub output_interval: u64,
    pub timesteps: u64,
    /// Seconds.
    pub dt: f64,
    pub grid: Grid,
    pub material: MaterialParams,
    /// Initial uniform magnetization (A/m); `|m_init|` equals `material.ms`.
    pub m_init: Vec3,
    pub schedule: FieldSchedule,
}

impl SimConfig {
    /// Anisotropy vector (A/m) as written in the input: `H_k · axis`.
    pub fn anisotropy_vector(&self) -> Vec3 {
        vec3::scale(self.material.aniso_axis, self.material.h_k)
    }
}

/// Converts an applied field in mT (μ0·H) to A/m.
pub fn millitesla_to_a_per_m(b: f64) -> f64 {
    b * 1e-3 / MU0
}

pub fn a_per_m_to_millitesla(h: f64) -> f64 {
    h * MU0 * 1e3
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Directive {
    Simulation,
    Rectang,
    Material,
    Externfield,
}

impl Directive {
    const ALL: [Directive; 4] = [
        Directive::Simulation,
        Directive::Rectang,
        Directive::Material,
        Directive::Externfield,
    ];

    fn keyword(self) -> &'static str {
        match self {
            Directive::Simulation => "-simulation",
            Directive::Rectang => "-rectang",
            Directive::Material => "-material",
            Directive::Externfield => "-externfield",
        }
    }

    fn form(self) -> &'static str {
        match self {
            Directive::Simulation => "-simulation outputInterval timesteps dt(ns)",
            Directive::Rectang => "-rectang nx ny nz",
            Directive::Material => "-material alpha A Mx My Mz Hax Hay Haz",
            Directive::Externfield => "-externfield Hx Hy Hz startStep decayStep stopStep",
        }
    }

    fn arity(self) -> usize {
        match self {
            Directive::Simulation | Directive::Rectang => 3,
            Directive::Material => 8,
            Directive::Externfield => 6,
        }
    }

    fn from_keyword(s: &str) -> Option<Directive> {
        Directive::ALL.into_iter().find(|d| d.keyword() == s)
    }
}

struct Located<'a> {
    source: &'a str,
    line: usize,
    directive: Directive,
}

impl Located<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn number(&self, tok: &str, what: &str) -> Result<f64> {
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(format!(
                "`{tok}` is not a number ({what}); expected `{}`",
                self.directive.form()
            ))),
        }
    }

    fn count(&self, tok: &str, what: &str, min: u64) -> Result<u64> {
        let v = self.number(tok, what)?;
        if v.fract() != 0.0 || v < min as f64 || v > u64::MAX as f64 {
            return Err(self.err(format!(
                "{what} must be an integer >= {min}, got `{tok}`"
            )));
        }
        Ok(v as u64)
    }
}

/// Parses an input file's text. `source` names the input in diagnostics.
pub fn parse_input_named(text: &str, source: &str) -> Result<SimConfig> {
    let mut seen: [Option<(usize, Vec<String>)>; 4] = Default::default();
    let mut last_line = 0;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().expect("non-empty line has a token");
        let Some(directive) = Directive::from_keyword(head) else {
            let known: Vec<_> = Directive::ALL.iter().map(|d| d.keyword()).collect();
            return Err(Error::Parse {
                path: source.to_string(),
                line: line_no,
                message: format!("unknown directive `{head}` (expected one of {})", known.join(", ")),
            });
        };
        let loc = Located {
            source,
            line: line_no,
            directive,
        };
        let args: Vec<String> = toks.map(str::to_string).collect();
        if args.len() != directive.arity() {
            return Err(loc.err(format!(
                "`{}` takes {} values, got {}; expected `{}`",
                directive.keyword(),
                directive.arity(),
                args.len(),
                directive.form()
            )));
        }
        let slot = &mut seen[directive as usize];
        if let Some((first, _)) = slot {
            return Err(loc.err(format!(
                "duplicate `{}` (first given on line {first})",
                directive.keyword()
            )));
        }
        *slot = Some((line_no, args));
    }

    for d in [Directive::Simulation, Directive::Rectang, Directive::Material] {
        if seen[d as usize].is_none() {
            return Err(Error::Parse {
                path: source.to_string(),
                line: last_line,
                message: format!(
                    "missing required directive `{}` (expected `{}`)",
                    d.keyword(),
                    d.form()
                ),
            });
        }
    }

    let at = |d: Directive| {
        let (line, args) = seen[d as usize].clone().expect("presence checked");
        (
            Located {
                source,
                line,
                directive: d,
            },
            args,
        )
    };

    let (loc, a) = at(Directive::Simulation);
    let output_interval = loc.count(&a[0], "outputInterval", 1)?;
    let timesteps = loc.count(&a[1], "timesteps", 0)?;
    let dt_ns = loc.number(&a[2], "dt")?;
    if dt_ns <= 0.0 {
        return Err(loc.err(format!("dt must be > 0, got `{}`", a[2])));
    }

    let (loc, a) = at(Directive::Rectang);
    let nx = loc.count(&a[0], "nx", 1)? as usize;
    let ny = loc.count(&a[1], "ny", 1)? as usize;
    let nz = loc.count(&a[2], "nz", 1)? as usize;
    let grid = Grid::with_default_cells(nx, ny, nz).map_err(|e| loc.err(e.to_string()))?;

    let (loc, a) = at(Directive::Material);
    let mut v = [0.0; 8];
    let names = ["alpha", "A", "Mx", "My", "Mz", "Hax", "Hay", "Haz"];
    for (slot, (tok, name)) in v.iter_mut().zip(a.iter().zip(names)) {
        *slot = loc.number(tok, name)?;
    }
    let m_init = [v[2] * 1e3, v[3] * 1e3, v[4] * 1e3];
    let ms = vec3::norm(m_init);
    if ms == 0.0 {
        return Err(loc.err("initial magnetization must be nonzero (its length sets Ms)"));
    }
    let h_aniso = [v[5] * 1e3, v[6] * 1e3, v[7] * 1e3];
    let material = MaterialParams::new(v[0], v[1], ms)
        .and_then(|p| p.with_anisotropy_vector(h_aniso))
        .map_err(|e| loc.err(e.to_string()))?;

    let schedule = match seen[Directive::Externfield as usize] {
        None => FieldSchedule::zero(),
        Some(_) => {
            let (loc, a) = at(Directive::Externfield);
            let mut h = [0.0; 3];
            for (slot, (tok, name)) in h.iter_mut().zip(a.iter().zip(["Hx", "Hy", "Hz"])) {
                *slot = millitesla_to_a_per_m(loc.number(tok, name)?);
            }
            let start = loc.count(&a[3], "startStep", 0)?;
            let decay = loc.count(&a[4], "decayStep", 0)?;
            let stop = loc.count(&a[5], "stopStep", 0)?;
            FieldSchedule::new(h, start, decay, stop).map_err(|e| loc.err(e.to_string()))?
        }
    };

    Ok(SimConfig {
        output_interval,
        timesteps,
        dt: dt_ns * 1e-9,
        grid,
        material,
        m_init,
        schedule,
    })
}

pub fn parse_input(text: &str) -> Result<SimConfig> {
    parse_input_named(text, "<input>")
}

pub fn parse_input_file(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_input_named(&text, &path.display().to_string())
}

/// Writes `config` back out in the input format. Cell size is not part of
/// the format; the grid must use the default 1 nm cells to round-trip.
pub fn serialize_config(config: &SimConfig) -> String {
    let c = config;
    let [nx, ny, nz] = c.grid.dims();
    let h = c.anisotropy_vector();
    let s = &c.schedule;
    let mut out = String::new();
    let _ = writeln!(out, "-simulation {} {} {}", c.output_interval, c.timesteps, c.dt * 1e9);
    let _ = writeln!(out, "#      outputInterval  timesteps dt (ns)");
    let _ = writeln!(out, "-rectang {nx} {ny} {nz}");
    let _ = writeln!(out, "#shape nx  ny  nz");
    let _ = writeln!(
        out,
        "-material {} {} {} {} {} {} {} {}",
        c.material.alpha,
        c.material.a_exch,
        c.m_init[0] * 1e-3,
        c.m_init[1] * 1e-3,
        c.m_init[2] * 1e-3,
        h[0] * 1e-3,
        h[1] * 1e-3,
        h[2] * 1e-3
    );
    let _ = writeln!(
        out,
        "#      alpha A (J/m) M_init.x M_init.y M_init.z H_aniso_x H_aniso_y H_aniso_z"
    );
    if !s.is_zero() {
        let _ = writeln!(
            out,
            "-externfield {} {} {} {} {} {}",
            a_per_m_to_millitesla(s.h0[0]),
            a_per_m_to_millitesla(s.h0[1]),
            a_per_m_to_millitesla(s.h0[2]),
            s.start,
            s.decay,
            s.stop
        );
        let _ = writeln!(out, "#      Hx    Hy    Hz  startTime  decayTime  stopTime");
    }
    out
}

/// One trajectory line: `t(ns) <Mx>/Ms <My>/Ms <Mz>/Ms`.
pub fn format_trajectory_row(t: f64, m_avg: Vec3) -> String {
    format!(
        "{:.9} {:.9} {:.9} {:.9}",
        t * 1e9,
        m_avg[0],
        m_avg[1],
        m_avg[2]
    )
}

/// Writes one trajectory row to `sink`.
pub fn write_trajectory_row(sink: &mut impl Write, t: f64, m_avg: Vec3) -> std::io::Result<()> {
    writeln!(sink, "{}", format_trajectory_row(t, m_avg))
}

/// Streams trajectory rows to a file, flushing after every row so a run
/// that aborts leaves a valid prefix.
pub struct TrajectoryWriter {
    path: PathBuf,
    out: BufWriter<File>,
    rows: usize,
}

impl TrajectoryWriter {
    /// Creates the file and writes a `#` header recording the parameters
    /// that are not visible in the rows.
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = TrajectoryWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            rows: 0,
        };
        for line in header {
            writeln!(w.out, "# {line}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(w.out, "# t_ns mx my mz").map_err(|e| Error::io(path, e))?;
        Ok(w)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn write_row(&mut self, t: f64, m_avg: Vec3) -> Result<()> {
        write_trajectory_row(&mut self.out, t, m_avg)
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))?;
        self.rows += 1;
        Ok(())
    }
}

impl Sink for TrajectoryWriter {
    fn emit(&mut self, state: &SimState) -> Result<()> {
        self.write_row(state.time(), state.average_magnetization())
    }
}

/// Standard header lines for trajectory files.
pub fn trajectory_header(state: &SimState) -> Vec<String> {
    let [nx, ny, nz] = state.m.grid().dims();
    let [dx, dy, dz] = state.m.grid().cell_size();
    let p = &state.material;
    vec![
        "grace trajectory".to_string(),
        format!("grid {nx} {ny} {nz} cell {dx:e} {dy:e} {dz:e} m"),
        format!(
            "alpha {} A {:e} J/m Ms {:e} A/m Hk {:e} A/m gamma {:e} m/(A s)",
            p.alpha, p.a_exch, p.ms, p.h_k, p.gamma
        ),
        format!("dt {:e} s", state.dt),
    ]
}

/// Parses trajectory text into `(t in seconds, <M>/Ms)` rows, skipping `#`
/// lines. `source` names the text in diagnostics.
pub fn parse_trajectory(text: &str, source: &str) -> Result<Vec<(f64, Vec3)>> {
    let bad = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(n + 1, "trajectory row must contain four numbers".into()))?;
        if vals.len() != 4 {
            return Err(bad(n + 1, format!("trajectory row has {} columns, expected 4", vals.len())));
        }
        rows.push((vals[0] * 1e-9, [vals[1], vals[2], vals[3]]));
    }
    Ok(rows)
}

pub fn read_trajectory(path: &Path) -> Result<Vec<(f64, Vec3)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text, &path.display().to_string())
}

/// Writes a snapshot: a `#` comment, a header line `nx ny nz dx dy dz t`
/// (SI), then `i j k mx my mz` per cell in x-fastest order with unit-vector
/// components.
pub fn write_snapshot(sink: &mut impl Write, m: &VectorField, ms: f64, t: f64) -> std::io::Result<()> {
    let g = m.grid();
    let [nx, ny, nz] = g.dims();
    let [dx, dy, dz] = g.cell_size();
    writeln!(sink, "# grace snapshot: nx ny nz dx dy dz t, then i j k mx my mz")?;
    writeln!(sink, "{nx} {ny} {nz} {dx:e} {dy:e} {dz:e} {t:e}")?;
    for idx in 0..m.len() {
        let (i, j, k) = g.coords(idx);
        let v = m.get(idx);
        writeln!(sink, "{i} {j} {k} {} {} {}", v[0] / ms, v[1] / ms, v[2] / ms)?;
    }
    Ok(())
}

/// Writes the snapshot of `state` to `path`.
pub fn write_snapshot_file(path: &Path, state: &SimState) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_snapshot(&mut w, &state.m, state.material.ms, state.time())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads a snapshot back as `(unit-vector field, t)`.
pub fn read_snapshot(path: &Path) -> Result<(VectorField, f64)> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, message: &str| Error::Parse {
        path: name.clone(),
        line,
        message: message.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| bad(1, "empty snapshot"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 7 {
        return Err(bad(hl + 1, "header must be `nx ny nz dx dy dz t`"));
    }
    let dims: Vec<usize> = h[..3]
        .iter()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(hl + 1, "bad cell count"))?;
    let reals: Vec<f64> = h[3..]
        .iter()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(hl + 1, "bad cell size or time"))?;
    let grid = Grid::new(dims[0], dims[1], dims[2], reals[0], reals[1], reals[2])
        .map_err(|e| bad(hl + 1, &e.to_string()))?;
    let mut m = VectorField::zeros(grid);
    let mut count = 0;
    for (ln, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 6 {
            return Err(bad(ln + 1, "cell line must be `i j k mx my mz`"));
        }
        let ijk: Vec<usize> = t[..3]
            .iter()
            .map(|v| v.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln + 1, "bad cell index"))?;
        let v: Vec<f64> = t[3..]
            .iter()
            .map(|v| v.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln + 1, "bad magnetization value"))?;
        if ijk[0] >= dims[0] || ijk[1] >= dims[1] || ijk[2] >= dims[2] {
            return Err(bad(ln + 1, "cell index out of range"));
        }
        m.set(grid.index(ijk[0], ijk[1], ijk[2]), [v[0], v[1], v[2]]);
        count += 1;
    }
    if count != grid.n_cells() {
        return Err(bad(text.lines().count(), "snapshot is missing cells"));
    }
    Ok((m, reals[3]))
}

/// Builds a gnuplot script plotting the trajectory and, if given, a vector
/// plot of the snapshot's central z layer. Paths are used verbatim and
/// should be relative to the directory the script runs from.
pub fn emit_gnuplot_script(trajectory: &str, snapshot: Option<(&str, &Grid)>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script written by grace");
    let _ = writeln!(s, "set terminal pngcairo size 1000,600");
    let _ = writeln!(s);
    let _ = writeln!(s, "set output 'trajectory.png'");
    let _ = writeln!(s, "set xlabel 't (ns)'");
    let _ = writeln!(s, "set ylabel '<M>/Ms'");
    let _ = writeln!(s, "set yrange [-1.05:1.05]");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(
        s,
        "plot '{trajectory}' using 1:2 with lines title '<Mx>/Ms', \\\n     '' using 1:3 with lines title '<My>/Ms', \\\n     '' using 1:4 with lines title '<Mz>/Ms'"
    );
    if let Some((snap, grid)) = snapshot {
        let [nx, ny, nz] = grid.dims();
        let kc = nz / 2;
        let stride = (nx.max(ny) / 50).max(1);
        let _ = writeln!(s);
        let _ = writeln!(s, "set output 'snapshot.png'");
        let _ = writeln!(s, "unset yrange");
        let _ = writeln!(s, "set xlabel 'x (cells)'");
        let _ = writeln!(s, "set ylabel 'y (cells)'");
        let _ = writeln!(s, "set size ratio -1");
        let _ = writeln!(s, "set xrange [-1:{nx}]");
        let _ = writeln!(s, "set yrange [-1:{ny}]");
        let _ = writeln!(s, "s = {}", 0.9 * stride as f64);
        let _ = writeln!(
            s,
            "plot '{snap}' every ::1 using ((int($1) % {stride} == 0 && int($2) % {stride} == 0 && int($3) == {kc}) ? $1 : 1/0):2:($4*s):($5*s) with vectors head filled title 'layer k = {kc}'"
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = "\
-simulation 10          10000  1e-4
#      outputInterval  timesteps dt (ns)
-rectang 500 125 3
#shape nx  ny  nz
-material 0.02 1.3e-11 800    0    0    0    0    0
#      alpha A (J/m) M_init.x M_init.y M_init.z H_aniso_x H_aniso_y H_aniso_z
-externfield -27.852 -5.013 0.  0    1000    2000
#      Hx    Hy    Hz  startTime  decayTime  stopTime
";

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
    }

    #[test]
    fn parses_sample() {
        let c = parse_input(SAMPLE).unwrap();
        assert_eq!(c.output_interval, 10);
        assert_eq!(c.timesteps, 10000);
        assert!(close(c.dt, 1e-13));
        assert_eq!(c.grid.dims(), [500, 125, 3]);
        assert_eq!(c.grid.cell_size(), [1e-9; 3]);
        assert_eq!(c.material.alpha, 0.02);
        assert_eq!(c.material.a_exch, 1.3e-11);
        assert_eq!(c.material.ms, 8e5);
        assert_eq!(c.m_init, [8e5, 0.0, 0.0]);
        assert_eq!(c.material.h_k, 0.0);
        let mt = c.schedule.h0.map(a_per_m_to_millitesla);
        assert!(close(mt[0], -27.852) && close(mt[1], -5.013) && mt[2] == 0.0);
        assert_eq!((c.schedule.start, c.schedule.decay, c.schedule.stop), (0, 1000, 2000));
    }

    fn parse_err(text: &str) -> (usize, String) {
        match parse_input(text) {
            Err(Error::Parse { line, message, .. }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics() {
        let (line, msg) = parse_err(&SAMPLE.replace("-rectang 500 125 3\n", ""));
        assert!(msg.contains("-rectang"), "{msg}");
        assert!(line > 0);

        let (line, msg) = parse_err(&SAMPLE.replace("0    0    0    0    0\n", "0    0    0    0\n"));
        assert_eq!(line, 5);
        assert!(msg.contains("takes 8 values, got 7"), "{msg}");

        let (line, msg) = parse_err(&SAMPLE.replace("-rectang", "-rectangle"));
        assert_eq!(line, 3);
        assert!(msg.contains("unknown directive"), "{msg}");

        let (line, msg) = parse_err(&format!("{SAMPLE}-rectang 4 4 4\n"));
        assert_eq!(line, 9);
        assert!(msg.contains("duplicate") && msg.contains("line 3"), "{msg}");

        let (line, msg) = parse_err(&SAMPLE.replace("1e-4", "abc"));
        assert_eq!(line, 1);
        assert!(msg.contains("not a number"), "{msg}");
    }

    #[test]
    fn externfield_is_optional() {
        let text: String = SAMPLE.lines().take(6).map(|l| format!("{l}\n")).collect();
        let c = parse_input(&text).unwrap();
        assert!(c.schedule.is_zero());
    }

    #[test]
    fn serialization_round_trips() {
        let c = parse_input(SAMPLE).unwrap();
        let back = parse_input(&serialize_config(&c)).unwrap();
        assert_eq!(back.grid, c.grid);
        assert_eq!(back.timesteps, c.timesteps);
        assert!(close(back.dt, c.dt));
        assert!(close(back.schedule.h0[0], c.schedule.h0[0]));
        assert_eq!(back.material, c.material);
    }

    #[test]
    fn trajectory_row_format() {
        assert_eq!(
            format_trajectory_row(0.0, [1.0, 0.0, 0.0]),
            "0.000000000 1.000000000 0.000000000 0.000000000"
        );
        assert_eq!(
            format_trajectory_row(1.5e-10, [-0.25, 0.125, -1e-12]),
            "0.150000000 -0.250000000 0.125000000 -0.000000000"
        );
    }

    #[test]
    fn single_cell_snapshot_line() {
        let g = Grid::with_default_cells(1, 1, 1).unwrap();
        let m = VectorField::uniform(g, [0.0, 0.0, 8e5]);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &m, 8e5, 0.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().last().unwrap(), "0 0 0 0 0 1");
    }

    #[test]
    fn gnuplot_blocks() {
        let one = emit_gnuplot_script("trajectory.txt", None);
        assert_eq!(one.matches("\nplot ").count(), 1);
        let g = Grid::with_default_cells(10, 4, 3).unwrap();
        let two = emit_gnuplot_script("trajectory.txt", Some(("snapshot.txt", &g)));
        assert_eq!(two.matches("\nplot ").count(), 2);
        assert!(two.contains("'snapshot.txt'") && two.contains("int($3) == 1"));
        assert!(!two.contains('/') || !two.contains("'/"));
    }
}
