//! Line-oriented `key = value` run configuration with `[section]` headers.
//!
//! Sections are `model`, `grid`, `bc`, `ic` and `output`. Every key has a
//! default, so an empty file is a valid configuration. `#` starts a comment.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rvdp_core::model::canonical_delta;
use rvdp_core::{Grid1D, ModelParams};
use thiserror::Error;

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("--override"),
            Origin::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: unknown section `[{name}]`")]
    UnknownSection { origin: Origin, name: String },
    #[error("{origin}: bad value for `{key}`: {message}")]
    TypeError {
        origin: Origin,
        key: String,
        message: String,
    },
    #[error("missing required key `{key}`")]
    MissingRequired { key: String },
    #[error("{origin}: cannot parse line: {text}")]
    Syntax { origin: Origin, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ode,
    Chain,
    Pde,
    Network,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ode => "ode",
            Command::Chain => "chain",
            Command::Pde => "pde",
            Command::Network => "network",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ode" => Command::Ode,
            "chain" => Command::Chain,
            "pde" => Command::Pde,
            "network" => Command::Network,
            "verify" => Command::Verify,
            "sweep" => Command::Sweep,
            _ => return Err(format!("unknown command `{s}`")),
        })
    }
}

/// Which zero-dimensional system the `ode` command integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeSystem {
    Vdp,
    Rayleigh,
    Rvdp,
    Homogeneous,
    StuartLandau,
}

impl OdeSystem {
    fn name(self) -> &'static str {
        match self {
            OdeSystem::Vdp => "vdp",
            OdeSystem::Rayleigh => "rayleigh",
            OdeSystem::Rvdp => "rvdp",
            OdeSystem::Homogeneous => "homogeneous",
            OdeSystem::StuartLandau => "stuart_landau",
        }
    }
}

impl FromStr for OdeSystem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "vdp" => OdeSystem::Vdp,
            "rayleigh" => OdeSystem::Rayleigh,
            "rvdp" => OdeSystem::Rvdp,
            "homogeneous" => OdeSystem::Homogeneous,
            "stuart_landau" => OdeSystem::StuartLandau,
            _ => {
                return Err(
                    "expected one of vdp, rayleigh, rvdp, homogeneous, stuart_landau".into(),
                )
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta {
    /// `1 / omega0^2`
    Canonical,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Complete,
    /// Whitespace-separated adjacency matrix file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Raw,
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Periodic,
    Neumann,
    Dirichlet,
    /// Boundary values follow the closed-form travelling wave.
    DirichletWave,
}

impl BcKind {
    fn name(self) -> &'static str {
        match self {
            BcKind::Periodic => "periodic",
            BcKind::Neumann => "neumann",
            BcKind::Dirichlet => "dirichlet",
            BcKind::DirichletWave => "dirichlet_wave",
        }
    }
}

impl FromStr for BcKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "periodic" => BcKind::Periodic,
            "neumann" => BcKind::Neumann,
            "dirichlet" => BcKind::Dirichlet,
            "dirichlet_wave" => BcKind::DirichletWave,
            _ => return Err("expected periodic, neumann, dirichlet or dirichlet_wave".into()),
        })
    }
}

/// Named initial-condition presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcPreset {
    AnalyticWave,
    Uniform(f64),
    Gaussian {
        center: f64,
        width: f64,
    },
    /// Counter-propagating exact waves.
    TwoWaves,
}

impl fmt::Display for IcPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcPreset::AnalyticWave => f.write_str("analytic_wave"),
            IcPreset::Uniform(c) => write!(f, "uniform({c:?})"),
            IcPreset::Gaussian { center, width } => write!(f, "gaussian({center:?}, {width:?})"),
            IcPreset::TwoWaves => f.write_str("two_waves"),
        }
    }
}

fn call_args(s: &str, name: &str) -> Option<Result<Vec<f64>, String>> {
    let rest = s.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(
        inner
            .split(',')
            .map(|a| parse_number(a.trim()))
            .collect::<Result<Vec<_>, _>>(),
    )
}

impl FromStr for IcPreset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic_wave" => return Ok(IcPreset::AnalyticWave),
            "two_waves" => return Ok(IcPreset::TwoWaves),
            _ => {}
        }
        if let Some(args) = call_args(s, "uniform") {
            return match args?.as_slice() {
                [c] => Ok(IcPreset::Uniform(*c)),
                _ => Err("uniform takes one argument".into()),
            };
        }
        if let Some(args) = call_args(s, "gaussian") {
            return match args?.as_slice() {
                [center, width] if *width > 0.0 => Ok(IcPreset::Gaussian {
                    center: *center,
                    width: *width,
                }),
                [_, _] => Err("gaussian width must be positive".into()),
                _ => Err("gaussian takes (center, width)".into()),
            };
        }
        Err("expected analytic_wave, uniform(c), gaussian(center, width) or two_waves".into())
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s {
        "pi" => Ok(PI),
        "sqrt2" => Ok(SQRT_2),
        _ => s
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub system: OdeSystem,
    pub omega0: f64,
    pub epsilon: f64,
    pub delta: Delta,
    pub mu: f64,
    pub amp: f64,
    pub graph: GraphSource,
    pub nodes: usize,
    pub mu_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub length: f64,
    pub duration: f64,
    /// `None` means `length / 512`.
    pub dx: Option<f64>,
    pub dt: f64,
    pub sites: usize,
    pub coupling: Coupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSection {
    pub preset: IcPreset,
    pub u0: f64,
    pub v0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub stride: usize,
    pub plot: bool,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSection,
    pub grid: GridSection,
    pub bc: BcKind,
    pub ic: IcSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            model: ModelSection {
                system: OdeSystem::Rvdp,
                omega0: 1.0,
                epsilon: 0.1,
                delta: Delta::Canonical,
                mu: 0.0,
                amp: 1.0,
                graph: GraphSource::Complete,
                nodes: 11,
                mu_values: vec![0.0, 0.5, 1.0, SQRT_2],
            },
            grid: GridSection {
                length: 5.0 * PI * SQRT_2,
                duration: 2.0 * PI,
                dx: None,
                dt: 2e-3,
                sites: 400,
                coupling: Coupling::Continuum,
            },
            bc: BcKind::Periodic,
            ic: IcSection {
                preset: IcPreset::AnalyticWave,
                u0: 1.0,
                v0: 0.0,
            },
            output: OutputSection {
                dir: PathBuf::from("out"),
                stride: 100,
                plot: false,
            },
        }
    }

    /// Model parameters with `delta` resolved.
    pub fn params(&self) -> ModelParams {
        let m = &self.model;
        let p = ModelParams::new(m.omega0, m.epsilon, 0.0, m.mu).with_amp(m.amp);
        match m.delta {
            Delta::Canonical => canonical_delta(p),
            Delta::Value(d) => ModelParams { delta: d, ..p },
        }
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx.unwrap_or(self.grid.length / 512.0)
    }

    pub fn grid1d(&self) -> rvdp_core::Result<Grid1D> {
        Grid1D::new(
            self.grid.length,
            self.grid.duration,
            self.dx(),
            self.grid.dt,
        )
    }

    /// Serializes to the configuration format; [`parse_config`] of the
    /// result reproduces `self`.
    pub fn to_config_text(&self) -> String {
        let m = &self.model;
        let g = &self.grid;
        let mut s = String::new();
        s.push_str("[model]\n");
        s.push_str(&format!("system = {}\n", m.system.name()));
        s.push_str(&format!("omega0 = {:?}\n", m.omega0));
        s.push_str(&format!("epsilon = {:?}\n", m.epsilon));
        match m.delta {
            Delta::Canonical => s.push_str("delta = canonical\n"),
            Delta::Value(d) => s.push_str(&format!("delta = {d:?}\n")),
        }
        s.push_str(&format!("mu = {:?}\n", m.mu));
        s.push_str(&format!("amp = {:?}\n", m.amp));
        match &m.graph {
            GraphSource::Complete => s.push_str("graph = complete\n"),
            GraphSource::File(p) => {
                s.push_str("graph = file\n");
                s.push_str(&format!("adjacency = {}\n", p.display()));
            }
        }
        s.push_str(&format!("nodes = {}\n", m.nodes));
        let mus: Vec<String> = m.mu_values.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&format!("mu_values = {}\n", mus.join(", ")));
        s.push_str("\n[grid]\n");
        s.push_str(&format!("length = {:?}\n", g.length));
        s.push_str(&format!("duration = {:?}\n", g.duration));
        if let Some(dx) = g.dx {
            s.push_str(&format!("dx = {dx:?}\n"));
        }
        s.push_str(&format!("dt = {:?}\n", g.dt));
        s.push_str(&format!("sites = {}\n", g.sites));
        s.push_str(&format!(
            "coupling = {}\n",
            match g.coupling {
                Coupling::Raw => "raw",
                Coupling::Continuum => "continuum",
            }
        ));
        s.push_str("\n[bc]\n");
        s.push_str(&format!("kind = {}\n", self.bc.name()));
        s.push_str("\n[ic]\n");
        s.push_str(&format!("preset = {}\n", self.ic.preset));
        s.push_str(&format!("u0 = {:?}\n", self.ic.u0));
        s.push_str(&format!("v0 = {:?}\n", self.ic.v0));
        s.push_str("\n[output]\n");
        s.push_str(&format!("dir = {}\n", self.output.dir.display()));
        s.push_str(&format!("stride = {}\n", self.output.stride));
        s.push_str(&format!("plot = {}\n", self.output.plot));
        s
    }
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "model",
        &[
            "system",
            "omega0",
            "epsilon",
            "delta",
            "mu",
            "amp",
            "graph",
            "adjacency",
            "nodes",
            "mu_values",
        ],
    ),
    (
        "grid",
        &["length", "duration", "dx", "dt", "sites", "coupling"],
    ),
    ("bc", &["kind"]),
    ("ic", &["preset", "u0", "v0"]),
    ("output", &["dir", "stride", "plot"]),
];

fn known_key(section: &str, key: &str) -> bool {
    KEYS.iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

/// Raw `section.key -> (value, origin)` entries.
#[derive(Debug, Default)]
struct Entries(BTreeMap<String, (String, Origin)>);

impl Entries {
    fn set(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        origin: Origin,
    ) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(s, _)| *s == section) {
            return Err(ConfigError::UnknownSection {
                origin,
                name: section.to_string(),
            });
        }
        if !known_key(section, key) {
            return Err(ConfigError::UnknownKey {
                origin,
                key: format!("{section}.{key}"),
            });
        }
        self.0
            .insert(format!("{section}.{key}"), (value.to_string(), origin));
        Ok(())
    }

    fn get<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<(T, Origin)>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some((raw, origin)) => {
                parse(raw)
                    .map(|v| Some((v, *origin)))
                    .map_err(|message| ConfigError::TypeError {
                        origin: *origin,
                        key: key.to_string(),
                        message,
                    })
            }
        }
    }

    fn value<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
        default: T,
    ) -> Result<T, ConfigError> {
        Ok(self.get(key, parse)?.map(|(v, _)| v).unwrap_or(default))
    }

    fn origin(&self, key: &str) -> Origin {
        self.0.get(key).map(|(_, o)| *o).unwrap_or(Origin::Default)
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v = parse_number(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be non-negative"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn count(min: usize) -> impl Fn(&str) -> Result<usize, String> {
    move |s| {
        let v: usize = s
            .parse()
            .map_err(|_| format!("`{s}` is not a non-negative integer"))?;
        if v >= min {
            Ok(v)
        } else {
            Err(format!("{v} must be at least {min}"))
        }
    }
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn from_str<T: FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_lines(text: &str, entries: &mut Entries) -> Result<(), ConfigError> {
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let origin = Origin::Line(idx + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::UnknownSection {
                    origin,
                    name: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin,
                text: line.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = section.as_deref() else {
            return Err(ConfigError::UnknownKey {
                origin,
                key: key.to_string(),
            });
        };
        entries.set(section, key, value, origin)?;
    }
    Ok(())
}

/// Parses a configuration file and applies `section.key=value` overrides.
pub fn parse_config(
    text: &str,
    command: Command,
    overrides: &[String],
) -> Result<RunConfig, ConfigError> {
    let mut entries = Entries::default();
    parse_lines(text, &mut entries)?;
    for o in overrides {
        let Some((path, value)) = o.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin: Origin::Override,
                text: o.clone(),
            });
        };
        let Some((section, key)) = path.trim().split_once('.') else {
            return Err(ConfigError::UnknownKey {
                origin: Origin::Override,
                key: path.trim().to_string(),
            });
        };
        entries.set(section, key, value.trim(), Origin::Override)?;
    }
    build(&entries, command)
}

fn build(e: &Entries, command: Command) -> Result<RunConfig, ConfigError> {
    let d = RunConfig::defaults(command);

    let omega0 = e.value("model.omega0", positive, d.model.omega0)?;
    let delta = e.value(
        "model.delta",
        |s| {
            if s == "canonical" {
                Ok(Delta::Canonical)
            } else {
                non_negative(s).map(Delta::Value)
            }
        },
        d.model.delta,
    )?;
    let graph_kind = e.value(
        "model.graph",
        |s| match s {
            "complete" | "file" => Ok(s.to_string()),
            _ => Err("expected complete or file".into()),
        },
        "complete".to_string(),
    )?;
    let graph = if graph_kind == "file" {
        match e.get("model.adjacency", |s| Ok::<_, String>(PathBuf::from(s)))? {
            Some((path, _)) => GraphSource::File(path),
            None => {
                return Err(ConfigError::MissingRequired {
                    key: "model.adjacency".into(),
                })
            }
        }
    } else {
        GraphSource::Complete
    };
    let mu_values = e.value(
        "model.mu_values",
        |s| {
            let vals = s
                .split(',')
                .map(|v| non_negative(v.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            if vals.is_empty() {
                Err("need at least one value".into())
            } else {
                Ok(vals)
            }
        },
        d.model.mu_values.clone(),
    )?;
    let model = ModelSection {
        system: e.value("model.system", from_str, d.model.system)?,
        omega0,
        epsilon: e.value("model.epsilon", non_negative, d.model.epsilon)?,
        delta,
        mu: e.value("model.mu", non_negative, d.model.mu)?,
        amp: e.value("model.amp", non_negative, d.model.amp)?,
        graph,
        nodes: e.value("model.nodes", count(2), d.model.nodes)?,
        mu_values,
    };
    let grid = GridSection {
        length: e.value("grid.length", positive, d.grid.length)?,
        duration: e.value("grid.duration", positive, d.grid.duration)?,
        dx: e.get("grid.dx", positive)?.map(|(v, _)| v),
        dt: e.value("grid.dt", positive, d.grid.dt)?,
        sites: e.value("grid.sites", count(3), d.grid.sites)?,
        coupling: e.value(
            "grid.coupling",
            |s| match s {
                "raw" => Ok(Coupling::Raw),
                "continuum" => Ok(Coupling::Continuum),
                _ => Err("expected raw or continuum".into()),
            },
            d.grid.coupling,
        )?,
    };
    let config = RunConfig {
        command,
        model,
        grid,
        bc: e.value("bc.kind", from_str, d.bc)?,
        ic: IcSection {
            preset: e.value("ic.preset", from_str, d.ic.preset)?,
            u0: e.value("ic.u0", number, d.ic.u0)?,
            v0: e.value("ic.v0", number, d.ic.v0)?,
        },
        output: OutputSection {
            dir: e.value("output.dir", |s| Ok(PathBuf::from(s)), d.output.dir)?,
            stride: e.value("output.stride", count(1), d.output.stride)?,
            plot: e.value("output.plot", boolean, d.output.plot)?,
        },
    };
    if let Err(err) = config.grid1d() {
        let key = if config.dx() > config.grid.length / 2.0 {
            "grid.dx"
        } else {
            "grid.dt"
        };
        return Err(ConfigError::TypeError {
            origin: e.origin(key),
            key: key.into(),
            message: err.to_string(),
        });
    }
    Ok(config)
}
