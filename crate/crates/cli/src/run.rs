//! Executes a resolved configuration and writes `run.csv`, `meta.txt` and an
//! optional gnuplot script into the output directory.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rvdp_core::analysis::{measure_frequency, measure_phase_velocity, Direction, PlaneWaveSpec};
use rvdp_core::chain::{Chain, ChainState, CouplingMode};
use rvdp_core::network::{simulate_linear_network, sync_frequency, GraphSpec};
use rvdp_core::ode::{
    integrate_strided, rhs_rayleigh, rhs_rvdp, rhs_stuart_landau, rhs_vdp, ComplexAmplitude,
    HomogeneousOscillator, OscState, TimeSeries,
};
use rvdp_core::pde::{self, SolveResult};
use rvdp_core::{BoundarySpec, Field, Grid1D, InitialCondition};
use thiserror::Error;

use crate::config::{
    BcKind, Command, ConfigError, Coupling, GraphSource, IcPreset, OdeSystem, RunConfig,
};
use crate::suite;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("incompatible settings: {0}")]
    Incompatible(String),
    #[error("{0}")]
    Model(#[from] rvdp_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} acceptance criteria failed")]
    VerifyFailed { failed: usize },
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INVALID_INPUT: i32 = 3;
    pub const BLOWUP: i32 = 4;
    pub const UNSTABLE: i32 = 5;
    pub const MEASUREMENT: i32 = 6;
    pub const IO: i32 = 7;
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use rvdp_core::Error as E;
        match self {
            RunError::Config(_) | RunError::Incompatible(_) => exit::CONFIG,
            RunError::Io { .. } => exit::IO,
            RunError::VerifyFailed { .. } => exit::VERIFY_FAILED,
            RunError::Model(e) => match e {
                E::NumericalBlowup { .. } | E::FieldBlowup { .. } => exit::BLOWUP,
                E::ImaginaryFrequency { .. } | E::UnstableRegime { .. } => exit::UNSTABLE,
                E::InsufficientCrossings { .. } | E::AmbiguousPeak => exit::MEASUREMENT,
                _ => exit::INVALID_INPUT,
            },
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// What a finished run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Human-readable report printed by the binary.
    pub report: String,
}

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Meta {
    lines: Vec<(String, String)>,
}

impl Meta {
    fn new(config: &RunConfig) -> Self {
        let p = config.params();
        let mut m = Meta { lines: Vec::new() };
        m.push("command", config.command.name());
        m.push("delta_resolved", format!("{:?}", p.delta));
        m
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    /// Run facts as comment lines followed by the resolved configuration,
    /// so the file itself parses as a configuration.
    fn render(&self, config: &RunConfig) -> String {
        let mut s = String::from("# rvdp run metadata\n");
        for (k, v) in &self.lines {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s.push('\n');
        s.push_str(&config.to_config_text());
        s
    }
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_rows(
    path: &Path,
    header: &str,
    rows: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), RunError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}")
        .and_then(|_| rows(&mut w))
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

fn write_series(path: &Path, ts: &TimeSeries) -> Result<(), RunError> {
    write_rows(path, "t,u", |w| {
        for (t, u) in ts.times.iter().zip(&ts.values) {
            writeln!(w, "{},{}", fmt_num(*t), fmt_num(*u))?;
        }
        Ok(())
    })
}

fn write_fields<'a>(
    path: &Path,
    fields: impl Iterator<Item = (f64, &'a [f64])>,
    x: impl Fn(usize) -> f64,
) -> Result<(), RunError> {
    write_rows(path, "t,x,u", |w| {
        for (t, values) in fields {
            let t = fmt_num(t);
            for (i, u) in values.iter().enumerate() {
                writeln!(w, "{t},{},{}", fmt_num(x(i)), fmt_num(*u))?;
            }
        }
        Ok(())
    })
}

fn plot_script(command: Command) -> &'static str {
    match command {
        Command::Pde | Command::Chain => {
            "set datafile separator ','\nset xlabel 'x'\nset ylabel 't'\nset view map\n\
             splot 'run.csv' using 2:1:3 every ::1 with points pointtype 5 pointsize 0.3 palette notitle\n"
        }
        Command::Network => {
            "set datafile separator ','\nset xlabel 't'\nset ylabel 'u'\n\
             plot 'run.csv' using 1:3 every ::1 with dots notitle\n"
        }
        _ => {
            "set datafile separator ','\nset xlabel 't'\nset ylabel 'u'\n\
             plot 'run.csv' using 1:2 every ::1 with lines notitle\n"
        }
    }
}

fn finish(
    config: &RunConfig,
    dir: &Path,
    meta: &Meta,
    mut files: Vec<PathBuf>,
) -> Result<Vec<PathBuf>, RunError> {
    let meta_path = dir.join("meta.txt");
    write_file(&meta_path, &meta.render(config))?;
    files.push(meta_path);
    if config.output.plot {
        let plot_path = dir.join("plot.gp");
        write_file(&plot_path, plot_script(config.command))?;
        files.push(plot_path);
    }
    Ok(files)
}

/// Waves whose sum is the configured initial condition, if it is a wave preset.
fn preset_waves(config: &RunConfig) -> Vec<PlaneWaveSpec> {
    let right = PlaneWaveSpec::exact(config.model.omega0).with_amplitude(config.model.amp.sqrt());
    match config.ic.preset {
        IcPreset::AnalyticWave => vec![right],
        IcPreset::TwoWaves => vec![right, right.with_direction(Direction::Minus)],
        _ => Vec::new(),
    }
}

pub fn initial_condition(config: &RunConfig) -> InitialCondition {
    match config.ic.preset {
        IcPreset::Uniform(c) => InitialCondition::uniform(c),
        IcPreset::Gaussian { center, width } => InitialCondition::gaussian(center, width),
        IcPreset::AnalyticWave | IcPreset::TwoWaves => {
            InitialCondition::superposed(preset_waves(config))
        }
    }
}

pub fn boundary(config: &RunConfig) -> Result<BoundarySpec, RunError> {
    Ok(match config.bc {
        BcKind::Periodic => BoundarySpec::Periodic,
        BcKind::Neumann => BoundarySpec::NeumannZero,
        BcKind::Dirichlet => BoundarySpec::DirichletZero,
        BcKind::DirichletWave => {
            let waves = preset_waves(config);
            if waves.is_empty() {
                return Err(RunError::Incompatible(
                    "bc.kind = dirichlet_wave needs ic.preset analytic_wave or two_waves".into(),
                ));
            }
            let length = config.grid.length;
            let at_left = waves.clone();
            BoundarySpec::dirichlet_function(
                move |t| at_left.iter().map(|w| w.value(0.0, t)).sum(),
                move |t| waves.iter().map(|w| w.value(length, t)).sum(),
            )
        }
    })
}

/// Dispatches on the configured command.
pub fn execute(config: &RunConfig) -> Result<RunOutcome, RunError> {
    match config.command {
        Command::Ode => run_ode(config),
        Command::Chain => run_chain(config),
        Command::Pde => run_pde(config),
        Command::Network => run_network(config),
        Command::Sweep => run_sweep(config),
        Command::Verify => run_verify(),
    }
}

fn steps_for(config: &RunConfig) -> usize {
    ((config.grid.duration / config.grid.dt).round() as usize).max(1)
}

fn run_ode(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let p = config.params().validate()?;
    let (dt, steps, stride) = (config.grid.dt, steps_for(config), config.output.stride);
    let s0 = OscState::new(config.ic.u0, config.ic.v0);
    let started = Instant::now();
    let mut meta = Meta::new(config);
    let series = match config.model.system {
        OdeSystem::Vdp => {
            integrate_strided(|s| rhs_vdp(s, &p), s0, dt, steps, stride)?.displacement()
        }
        OdeSystem::Rayleigh => {
            integrate_strided(|s| rhs_rayleigh(s, &p), s0, dt, steps, stride)?.displacement()
        }
        OdeSystem::Rvdp => {
            integrate_strided(|s| rhs_rvdp(s, &p), s0, dt, steps, stride)?.displacement()
        }
        OdeSystem::Homogeneous => {
            let osc = HomogeneousOscillator::new(p)?;
            meta.push("expected_frequency", fmt_num(osc.frequency()));
            integrate_strided(|s| osc.rhs(s), s0, dt, steps, stride)?.displacement()
        }
        OdeSystem::StuartLandau => {
            meta.push("series", "modulus of the complex amplitude");
            let a0 = ComplexAmplitude::new(config.ic.u0, config.ic.v0);
            integrate_strided(|a| rhs_stuart_landau(a, &p), a0, dt, steps, stride)?
                .series(|a| a.modulus())
        }
    };
    meta.push("wall_time_s", started.elapsed().as_secs_f64());
    meta.push("steps", steps);
    let mut report = format!("integrated {steps} steps of {}", config.command.name());
    if config.model.system != OdeSystem::StuartLandau {
        match measure_frequency(&series.after(0.5 * config.grid.duration)) {
            Ok(w) => {
                meta.push("measured_frequency", fmt_num(w));
                let _ = write!(report, ", measured frequency {w:.6}");
            }
            Err(e) => meta.push("measured_frequency", format!("unavailable ({e})")),
        }
    }
    let dir = &config.output.dir;
    create_dir(dir)?;
    let csv = dir.join("run.csv");
    write_series(&csv, &series)?;
    Ok(RunOutcome {
        files: finish(config, dir, &meta, vec![csv])?,
        report,
    })
}

fn run_chain(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let p = config.params().validate()?;
    let bc = boundary(config)?;
    let n = config.grid.sites;
    let spacing = match bc {
        BoundarySpec::Periodic => config.grid.length / n as f64,
        _ => config.grid.length / (n - 1) as f64,
    };
    let mode = match config.grid.coupling {
        Coupling::Raw => CouplingMode::Raw,
        Coupling::Continuum => CouplingMode::ContinuumNormalized,
    };
    let chain = Chain::new(p, bc, mode)?;
    let ic = initial_condition(config);
    let s0 = ChainState::sample(n, spacing, |x| ic.displacement(x), |x| ic.velocity(x))?;
    let mut meta = Meta::new(config);
    meta.push("spacing", fmt_num(spacing));
    let mut report = String::new();
    if mode == CouplingMode::ContinuumNormalized
        && !chain.step_is_advisable(spacing, config.grid.dt)
    {
        let warning = format!(
            "dt = {} exceeds 0.5 * spacing / sqrt(mu) = {}",
            config.grid.dt,
            0.5 * spacing / p.mu.sqrt()
        );
        meta.push("warning", &warning);
        let _ = writeln!(report, "warning: {warning}");
    }
    let steps = steps_for(config);
    let started = Instant::now();
    let traj = chain.integrate(&s0, config.grid.dt, steps, config.output.stride)?;
    meta.push("wall_time_s", started.elapsed().as_secs_f64());
    meta.push("steps", steps);
    let dir = &config.output.dir;
    create_dir(dir)?;
    let csv = dir.join("run.csv");
    write_fields(
        &csv,
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| (*t, s.u.as_slice())),
        |i| i as f64 * spacing,
    )?;
    let _ = write!(report, "integrated {n}-site chain for {steps} steps");
    Ok(RunOutcome {
        files: finish(config, dir, &meta, vec![csv])?,
        report,
    })
}

fn solve_pde(config: &RunConfig) -> Result<(Grid1D, SolveResult), RunError> {
    let p = config.params();
    let g = config.grid1d()?;
    let bc = boundary(config)?;
    let ic = initial_condition(config);
    let result = pde::solve(&p, &g, &ic, &bc, config.output.stride)?;
    Ok((g, result))
}

fn push_stability(meta: &mut Meta, result: &SolveResult, report: &mut String) {
    meta.push("courant", fmt_num(result.stability.courant));
    meta.push("period_fraction", fmt_num(result.stability.period_fraction));
    let warnings = result.stability.warnings();
    if warnings.is_empty() {
        meta.push("stability", "ok");
    }
    for w in warnings {
        meta.push("stability", format!("warning: {w}"));
        let _ = writeln!(report, "warning: {w}");
    }
}

fn write_pde(
    config: &RunConfig,
    dir: &Path,
    g: &Grid1D,
    result: &SolveResult,
    meta: &mut Meta,
) -> Result<Vec<PathBuf>, RunError> {
    meta.push("nx", g.nx());
    meta.push("nt", g.nt());
    meta.push("dx_actual", fmt_num(g.dx()));
    meta.push("dt_actual", fmt_num(g.dt()));
    meta.push("wall_time_s", result.wall_time);
    create_dir(dir)?;
    let csv = dir.join("run.csv");
    write_fields(
        &csv,
        result
            .snapshots
            .iter()
            .map(|f: &Field| (f.time(), f.values())),
        |i| g.x(i),
    )?;
    finish(config, dir, meta, vec![csv])
}

fn run_pde(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let (g, result) = solve_pde(config)?;
    let mut meta = Meta::new(config);
    let mut report = String::new();
    push_stability(&mut meta, &result, &mut report);
    let waves = preset_waves(config);
    if !waves.is_empty() {
        let t = result.last().time();
        let err = rvdp_core::analysis::error_against(result.last(), &g, |x| {
            waves.iter().map(|w| w.value(x, t)).sum()
        })?;
        meta.push("final_l2_error", fmt_num(err.l2));
        meta.push("final_linf_error", fmt_num(err.linf));
        let _ = write!(
            report,
            "final error vs closed form: L2 {:.3e}, Linf {:.3e}; ",
            err.l2, err.linf
        );
    }
    let files = write_pde(config, &config.output.dir, &g, &result, &mut meta)?;
    let _ = write!(
        report,
        "solved {} steps on {} intervals in {:.3} s",
        g.nt(),
        g.nx(),
        result.wall_time
    );
    Ok(RunOutcome { files, report })
}

fn load_graph(config: &RunConfig) -> Result<GraphSpec, RunError> {
    match &config.model.graph {
        GraphSource::Complete => Ok(GraphSpec::complete(config.model.nodes)?),
        GraphSource::File(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(GraphSpec::parse(&text)?)
        }
    }
}

fn run_network(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let g = load_graph(config)?;
    let (omega, mu) = (config.model.omega0, config.model.mu);
    let mut meta = Meta::new(config);
    meta.push("nodes", g.n());
    let mut report = String::new();
    if config.model.graph == GraphSource::Complete {
        let w = sync_frequency(omega, mu, g.n())?;
        meta.push("sync_frequency", fmt_num(w));
        let _ = write!(report, "predicted sync frequency {w:.6}; ");
    }
    let ic = vec![OscState::new(config.ic.u0, config.ic.v0); g.n()];
    let steps = steps_for(config);
    let started = Instant::now();
    let series = simulate_linear_network(&g, omega, mu, &ic, config.grid.dt, steps)?;
    meta.push("wall_time_s", started.elapsed().as_secs_f64());
    meta.push("steps", steps);
    if let Ok(w) = measure_frequency(&series[0]) {
        meta.push("measured_frequency_node0", fmt_num(w));
        let _ = write!(report, "measured node 0 frequency {w:.6}; ");
    }
    let dir = &config.output.dir;
    create_dir(dir)?;
    let csv = dir.join("run.csv");
    let stride = config.output.stride;
    write_rows(&csv, "t,node,u", |w| {
        let len = series[0].len();
        for k in (0..len).filter(|k| k % stride == 0 || *k == len - 1) {
            let t = fmt_num(series[0].times[k]);
            for (node, ts) in series.iter().enumerate() {
                writeln!(w, "{t},{node},{}", fmt_num(ts.values[k]))?;
            }
        }
        Ok(())
    })?;
    let _ = write!(report, "simulated {} nodes for {steps} steps", g.n());
    Ok(RunOutcome {
        files: finish(config, dir, &meta, vec![csv])?,
        report,
    })
}

/// One row of the sweep summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub measured: f64,
    pub expected: f64,
    pub rel_error: f64,
}

fn sweep_one(config: &RunConfig, dir: &Path) -> Result<SweepRow, RunError> {
    if config.ic.preset != IcPreset::AnalyticWave || config.bc != BcKind::Periodic {
        return Err(RunError::Incompatible(
            "sweep measures phase velocity and needs ic.preset = analytic_wave with bc.kind = periodic"
                .into(),
        ));
    }
    let (g, result) = solve_pde(config)?;
    let mut meta = Meta::new(config);
    let mut report = String::new();
    push_stability(&mut meta, &result, &mut report);
    let last = result.last();
    // a quarter period keeps the shift well under half a wavelength
    let gap = (0.5 * config.grid.duration).min(0.5 * std::f64::consts::PI / config.model.omega0);
    let first = result
        .snapshots
        .iter()
        .filter(|s| s.time() < last.time())
        .min_by(|a, b| {
            let da = (a.time() - (last.time() - gap)).abs();
            let db = (b.time() - (last.time() - gap)).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| {
            RunError::Incompatible("output.stride leaves fewer than two snapshots".into())
        })?;
    let measured = measure_phase_velocity(first, last, &g)?;
    let expected = preset_waves(config)[0].phase_velocity();
    let rel_error = (measured - expected).abs() / expected.abs();
    meta.push("phase_velocity", fmt_num(measured));
    meta.push("expected_phase_velocity", fmt_num(expected));
    write_pde(config, dir, &g, &result, &mut meta)?;
    Ok(SweepRow {
        mu: config.model.mu,
        measured,
        expected,
        rel_error,
    })
}

fn run_sweep(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let dir = &config.output.dir;
    create_dir(dir)?;
    let runs: Vec<(RunConfig, PathBuf)> = config
        .model
        .mu_values
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let mut c = config.clone();
            c.command = Command::Pde;
            c.model.mu = mu;
            c.output.dir = dir.join(format!("mu_{i}"));
            let sub = c.output.dir.clone();
            (c, sub)
        })
        .collect();
    let results: Vec<Result<SweepRow, RunError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(c, sub)| scope.spawn(move || sweep_one(c, sub)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = dir.join("sweep.csv");
    write_rows(&summary, "mu,v_measured,v_expected,rel_error", |w| {
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_num(r.mu),
                fmt_num(r.measured),
                fmt_num(r.expected),
                fmt_num(r.rel_error)
            )?;
        }
        Ok(())
    })?;
    let mut report = String::from("mu          v_measured    v_expected    rel_error\n");
    for r in &rows {
        let _ = writeln!(
            report,
            "{:<11.6} {:<13.8} {:<13.8} {:.3e}",
            r.mu, r.measured, r.expected, r.rel_error
        );
    }
    let mut files = vec![summary];
    files.extend(runs.into_iter().map(|(_, sub)| sub));
    Ok(RunOutcome {
        files,
        report: report.trim_end().to_string(),
    })
}

fn run_verify() -> Result<RunOutcome, RunError> {
    let outcomes = suite::run_all();
    let report = suite::render(&outcomes);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        println!("{report}");
        return Err(RunError::VerifyFailed { failed });
    }
    Ok(RunOutcome {
        files: Vec::new(),
        report,
    })
}
