//! Command-line front end.
//!
//! Settings come from an optional flat `key = value` file (`--config`) and
//! from flags; flags win. [`parse_config`] turns arguments into a
//! validated [`RunConfig`] and [`execute`] runs it.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{self, Format};
use crate::hom::{
    coincidence_fast, coincidence_map, coincidence_oracle, refine_scan, Axis, AxisMode, Maximum,
    ScanReport,
};
use crate::lattice::Grid1D;
use crate::scenarios::{reproduce_panel_with, Panel, Scenario, ScenarioKind};
use crate::states::{gaussian_wave, load_wave_file, to_general2d, Probe, SeparablePM};
use crate::wigner::{wigner_map, MapMeta, PhaseSpaceMap};

pub const MIN_GRID_POINTS: usize = 8;
pub const MAX_GRID_POINTS: usize = 8192;

/// Agreement required by `oracle-check`.
pub const ORACLE_TOL: f64 = 2e-4;

const DEFAULT_HALF_WIDTH: f64 = 4.0;
const DEFAULT_POINTS: usize = 129;
const ORACLE_CHECK_POINTS: usize = 8;
/// Largest joint grid used when `joint_n` is not given.
const MAX_DEFAULT_JOINT_POINTS: usize = 2048;

#[derive(Debug, Parser)]
#[command(
    name = "hom-wigner",
    version,
    about = "Biphoton Wigner functions and displaced Hong-Ou-Mandel scans"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Wigner function (as πW) of the probed wave function.
    Wigner(CommonArgs),
    /// Coincidence probability over a phase-space grid.
    Scan(CommonArgs),
    /// Scan, then refine the largest coincidence probability.
    Maximize(CommonArgs),
    /// One of the preset panels a-f.
    Panel(PanelArgs),
    /// Compare the direct overlap integral with the Wigner shortcut.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct PanelArgs {
    /// Panel letter, a-f.
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Points per axis of the joint (p1, p2) grid.
    #[arg(long)]
    joint_n: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Default, Args)]
struct CommonArgs {
    /// Preset source: tm-cw, tm-cat or freq-pulsed.
    #[arg(long)]
    scenario: Option<String>,
    /// Table of `p re [im]` rows giving the probed wave function.
    #[arg(long)]
    wave_file: Option<PathBuf>,
    #[arg(long, value_parser = ["x", "y"])]
    axis: Option<String>,
    /// Exchange which of F+ and F- the chosen axis probes.
    #[arg(long)]
    dove: bool,
    #[arg(long, allow_hyphen_values = true)]
    mu_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_max: Option<f64>,
    #[arg(long)]
    mu_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    delta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta_max: Option<f64>,
    #[arg(long)]
    delta_n: Option<usize>,
    /// Points per phase-space axis (both μ and δ).
    #[arg(long)]
    n: Option<usize>,
    /// Pump width.
    #[arg(long)]
    w_p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    wave_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    wave_max: Option<f64>,
    #[arg(long)]
    wave_n: Option<usize>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record the wall-clock time in JSON metadata.
    #[arg(long)]
    timestamp: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "wave_file",
    "axis",
    "dove",
    "mu_min",
    "mu_max",
    "mu_n",
    "delta_min",
    "delta_max",
    "delta_n",
    "n",
    "w_p",
    "wave_min",
    "wave_max",
    "wave_n",
    "format",
    "out",
    "timestamp",
    "id",
    "joint_n",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Wigner,
    Scan,
    Maximize,
    Panel,
    OracleCheck,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSource {
    Scenario(ScenarioKind),
    /// Probed wave function read from a table; its partner is a unit
    /// Gaussian on the same grid.
    WaveFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: StateSource,
    pub panel: Option<Panel>,
    /// Axis override; the scenario's own axis when absent.
    pub axis: Option<Axis>,
    pub dove: bool,
    pub mu_grid: Grid1D,
    pub delta_grid: Grid1D,
    pub w_p: Option<f64>,
    pub wave_grid: Option<Grid1D>,
    /// Points per axis of the joint grid; the wave grid itself when absent.
    pub joint_n: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

/// Reads a flat `key = value` file. Keys may use `-` or `_`.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: k + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, found '{line}'")))?;
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key '{key}'")));
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(err(format!("missing value for '{key}'")));
        }
        out.insert(key, value.to_string());
    }
    Ok(out)
}

fn flag_layer(c: &CommonArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("scenario", c.scenario.clone());
    put(
        "wave_file",
        c.wave_file.as_ref().map(|p| p.display().to_string()),
    );
    put("axis", c.axis.clone());
    put("dove", c.dove.then(|| "true".into()));
    put("mu_min", c.mu_min.map(|v| v.to_string()));
    put("mu_max", c.mu_max.map(|v| v.to_string()));
    put("mu_n", c.mu_n.map(|v| v.to_string()));
    put("delta_min", c.delta_min.map(|v| v.to_string()));
    put("delta_max", c.delta_max.map(|v| v.to_string()));
    put("delta_n", c.delta_n.map(|v| v.to_string()));
    put("n", c.n.map(|v| v.to_string()));
    put("w_p", c.w_p.map(|v| v.to_string()));
    put("wave_min", c.wave_min.map(|v| v.to_string()));
    put("wave_max", c.wave_max.map(|v| v.to_string()));
    put("wave_n", c.wave_n.map(|v| v.to_string()));
    put("format", c.format.clone());
    put("out", c.out.as_ref().map(|p| p.display().to_string()));
    put("timestamp", c.timestamp.then(|| "true".into()));
    m
}

/// Config-file values overlaid by flag values. A flag `n` also displaces
/// per-axis counts from the file.
fn merge(
    mut file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
) -> BTreeMap<String, String> {
    if flags.contains_key("n") {
        file.remove("mu_n");
        file.remove("delta_n");
    }
    file.extend(flags);
    file
}

struct Settings(BTreeMap<String, String>);

impl Settings {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Usage(format!("invalid value '{v}' for {key}")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(Error::Usage(format!("invalid value '{v}' for {key}"))),
        }
    }

    fn grid(&self, axis: &str, default: Grid1D, default_n: usize) -> Result<Grid1D> {
        let n = match self.parse::<usize>(&format!("{axis}_n"))? {
            Some(n) => n,
            None => self.parse::<usize>("n")?.unwrap_or(default_n),
        };
        if !(MIN_GRID_POINTS..=MAX_GRID_POINTS).contains(&n) {
            return Err(Error::Usage(format!(
                "{axis} grid needs between {MIN_GRID_POINTS} and {MAX_GRID_POINTS} points, got {n}"
            )));
        }
        let min = self.parse(&format!("{axis}_min"))?.unwrap_or(default.min());
        let max = self.parse(&format!("{axis}_max"))?.unwrap_or(default.max());
        Grid1D::new(min, max, n).map_err(|e| Error::Usage(e.to_string()))
    }
}

/// Parses command-line arguments (program name first) into a run.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
    from_cli(cli)
}

fn from_cli(cli: Cli) -> Result<RunConfig> {
    let (command, common, id, joint_n) = match cli.command {
        CliCommand::Wigner(c) => (Command::Wigner, c, None, None),
        CliCommand::Scan(c) => (Command::Scan, c, None, None),
        CliCommand::Maximize(c) => (Command::Maximize, c, None, None),
        CliCommand::Panel(p) => (Command::Panel, p.common, p.id, None),
        CliCommand::OracleCheck(o) => (Command::OracleCheck, o.common, None, o.joint_n),
    };
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_config_text(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let mut flags = flag_layer(&common);
    if let Some(id) = id {
        flags.insert("id".into(), id);
    }
    if let Some(n) = joint_n {
        flags.insert("joint_n".into(), n.to_string());
    }
    resolve(command, Settings(merge(file, flags)))
}

fn resolve(command: Command, s: Settings) -> Result<RunConfig> {
    let scenario = s.parse::<ScenarioKind>("scenario")?;
    let wave_file = s.get("wave_file").map(PathBuf::from);

    let panel = match command {
        Command::Panel => {
            let id = s
                .get("id")
                .ok_or_else(|| Error::Usage("panel requires --id".into()))?;
            Some(id.parse::<Panel>()?)
        }
        _ => None,
    };
    let source = match (command, scenario, wave_file) {
        (_, Some(_), Some(_)) => {
            return Err(Error::Usage(
                "give either --scenario or --wave-file, not both".into(),
            ))
        }
        (Command::Panel, _, Some(_)) => {
            return Err(Error::Usage(
                "panels are computed from their preset scenario".into(),
            ))
        }
        (Command::Panel, kind, None) => {
            let own = panel.expect("panel parsed above").scenario();
            if kind.is_some_and(|k| k != own) {
                return Err(Error::Usage(format!(
                    "panel {} uses scenario {own}",
                    panel.expect("panel parsed above").letter()
                )));
            }
            StateSource::Scenario(own)
        }
        (_, Some(kind), None) => StateSource::Scenario(kind),
        (_, None, Some(path)) => StateSource::WaveFile(path),
        (_, None, None) => {
            return Err(Error::Usage(
                "a state source is required: --scenario or --wave-file".into(),
            ))
        }
    };

    let axis = match s.get("axis") {
        None => None,
        Some("x" | "X") => Some(Axis::X),
        Some("y" | "Y") => Some(Axis::Y),
        Some(v) => {
            return Err(Error::Usage(format!(
                "invalid axis '{v}' (expected x or y)"
            )))
        }
    };

    let (default_grid, default_n) = match (&source, command) {
        (_, Command::OracleCheck) => (
            Grid1D::symmetric(2.0, ORACLE_CHECK_POINTS)?,
            ORACLE_CHECK_POINTS,
        ),
        (StateSource::Scenario(kind), _) => (kind.default_panel_grid(), DEFAULT_POINTS),
        (StateSource::WaveFile(_), _) => (
            Grid1D::symmetric(DEFAULT_HALF_WIDTH, DEFAULT_POINTS)?,
            DEFAULT_POINTS,
        ),
    };
    let mu_grid = s.grid("mu", default_grid, default_n)?;
    let delta_grid = s.grid("delta", default_grid, default_n)?;

    let wave_grid = match (
        s.parse::<f64>("wave_min")?,
        s.parse::<f64>("wave_max")?,
        s.parse::<usize>("wave_n")?,
    ) {
        (None, None, None) => match (&source, command) {
            (StateSource::Scenario(kind), Command::OracleCheck) => Some(kind.joint_wave_grid()),
            _ => None,
        },
        (min, max, n) => {
            let StateSource::Scenario(kind) = source else {
                return Err(Error::Usage("a wave file fixes its own grid".into()));
            };
            let d = match command {
                Command::OracleCheck => kind.joint_wave_grid(),
                _ => kind.default_wave_grid(),
            };
            let g = Grid1D::new(
                min.unwrap_or(d.min()),
                max.unwrap_or(d.max()),
                n.unwrap_or(d.len()),
            )
            .map_err(|e| Error::Usage(e.to_string()))?;
            Some(g)
        }
    };
    let w_p = s.parse::<f64>("w_p")?;
    if w_p.is_some_and(|w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::Usage("w_p must be positive".into()));
    }
    let joint_n = s.parse::<usize>("joint_n")?;
    if joint_n.is_some_and(|n| n < MIN_GRID_POINTS) {
        return Err(Error::Usage(format!(
            "joint grid needs at least {MIN_GRID_POINTS} points"
        )));
    }

    Ok(RunConfig {
        command,
        source,
        panel,
        axis,
        dove: s.flag("dove")?,
        mu_grid,
        delta_grid,
        w_p,
        wave_grid,
        joint_n,
        format: s.parse::<Format>("format")?.unwrap_or(Format::Csv),
        out: s.get("out").map(PathBuf::from),
        timestamp: s.flag("timestamp")?,
    })
}

impl RunConfig {
    fn scenario(&self) -> Option<Scenario> {
        let StateSource::Scenario(kind) = self.source else {
            return None;
        };
        let mut sc = Scenario::new(kind).with_panel_grids(self.mu_grid, self.delta_grid);
        if let Some(w) = self.w_p {
            sc = sc.with_pump_width(w);
        }
        if let Some(g) = self.wave_grid {
            sc = sc.with_wave_grid(g);
        }
        Some(sc)
    }

    fn mode(&self, default: AxisMode) -> AxisMode {
        match (self.axis, self.dove) {
            (None, false) => default,
            (axis, dove) => AxisMode::new(axis.unwrap_or(default.axis), dove),
        }
    }

    /// The separable state described by the configuration, with its metadata.
    pub fn state(&self) -> Result<(SeparablePM, MapMeta)> {
        match &self.source {
            StateSource::Scenario(_) => {
                let sc = self.scenario().expect("scenario source");
                let state = sc.separable()?;
                let mode = self.mode(state.mode);
                Ok((state.with_mode(mode), sc.meta()))
            }
            StateSource::WaveFile(path) => {
                let wave = load_wave_file(path)?;
                let partner = gaussian_wave(wave.grid(), 1.0, 0.0)?;
                let mode = self.mode(AxisMode::Y);
                let state = match mode.probe() {
                    Probe::Minus => SeparablePM::new(partner, wave, mode),
                    Probe::Plus => SeparablePM::new(wave, partner, mode),
                };
                let meta = MapMeta {
                    scenario: format!("wave-file:{}", path.display()),
                    mu_units: String::new(),
                    delta_units: String::new(),
                };
                Ok((state, meta))
            }
        }
    }

    fn timestamp_value(&self) -> Option<String> {
        self.timestamp.then(|| {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            secs.to_string()
        })
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => export::write_atomic(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn emit_map(config: &RunConfig, map: &PhaseSpaceMap) -> Result<()> {
    emit(
        config,
        &export::render(map, config.format, config.timestamp_value())?,
    )
}

fn summarize(report: &ScanReport) {
    eprintln!(
        "max_I = {} at (mu = {}, delta = {}), relative violation = {}, {} violating points",
        report.max_i,
        report.argmax.mu,
        report.argmax.delta,
        report.relative_violation,
        report.violating_points
    );
}

#[derive(Debug, Serialize)]
struct MaximizeOutput {
    coarse: ScanReport,
    refined: Maximum,
}

#[derive(Debug, Serialize)]
struct OracleCheckOutput {
    points: usize,
    max_abs_diff: f64,
    tolerance: f64,
    truncated_mass: f64,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::NumericalIntegrity(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Runs a parsed configuration.
pub fn execute(config: &RunConfig) -> Result<()> {
    match config.command {
        Command::Panel => {
            let sc = config.scenario().expect("panels use a scenario");
            let out = reproduce_panel_with(config.panel.expect("panel id"), &sc)?;
            if let Some(r) = &out.report {
                summarize(r);
            }
            emit_map(config, &out.map)
        }
        Command::Wigner => {
            let (state, meta) = config.state()?;
            let map =
                wigner_map(state.probed(), &config.mu_grid, &config.delta_grid)?.with_meta(meta);
            emit_map(config, &map)
        }
        Command::Scan => {
            let (state, meta) = config.state()?;
            let map = coincidence_map(&state.into(), &config.mu_grid, &config.delta_grid)?
                .with_meta(meta);
            summarize(&ScanReport::from_map(&map)?);
            emit_map(config, &map)
        }
        Command::Maximize => {
            let (state, _) = config.state()?;
            let state = state.into();
            let map = coincidence_map(&state, &config.mu_grid, &config.delta_grid)?;
            let coarse = ScanReport::from_map(&map)?;
            let refined = refine_scan(&state, &coarse)?;
            let text = match config.format {
                Format::Json => to_json(&MaximizeOutput { coarse, refined })?,
                Format::Csv => format!(
                    "mu,delta,I,converged,evaluations\n{},{},{},{},{}\n",
                    refined.point.mu,
                    refined.point.delta,
                    refined.value,
                    refined.converged,
                    refined.evaluations
                ),
            };
            emit(config, &text)
        }
        Command::OracleCheck => oracle_check(config),
    }
}

/// The direct integral follows the y-axis convention, so the check always
/// compares against the F₋ probe.
fn oracle_check(config: &RunConfig) -> Result<()> {
    let (state, _) = config.state()?;
    let state = state.with_mode(AxisMode::Y);
    let wave = *state.f_minus.grid();
    let joint = match config.joint_n {
        Some(n) => Grid1D::new(wave.min(), wave.max(), n)?,
        None if wave.len() <= MAX_DEFAULT_JOINT_POINTS => wave,
        None => {
            log::warn!(
                "wave grid too large for the joint grid; using {MAX_DEFAULT_JOINT_POINTS} points"
            );
            Grid1D::new(wave.min(), wave.max(), MAX_DEFAULT_JOINT_POINTS)?
        }
    };
    let general = to_general2d(&state, joint, joint)?;
    let mut max_abs_diff: f64 = 0.0;
    for mu in config.mu_grid.points() {
        for delta in config.delta_grid.points() {
            let pt = crate::wigner::PhaseSpacePoint::new(mu, delta);
            let diff = (coincidence_oracle(&general, pt)? - coincidence_fast(&state, pt)?).abs();
            max_abs_diff = max_abs_diff.max(diff);
        }
    }
    let summary = OracleCheckOutput {
        points: config.mu_grid.len() * config.delta_grid.len(),
        max_abs_diff,
        tolerance: ORACLE_TOL,
        truncated_mass: general.truncated_mass(),
    };
    emit(config, &to_json(&summary)?)?;
    if max_abs_diff > ORACLE_TOL {
        return Err(Error::NumericalIntegrity(format!(
            "direct integral and Wigner shortcut differ by {max_abs_diff:.3e}"
        )));
    }
    Ok(())
}

/// Full entry point: parse, run, and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match from_cli(cli).and_then(|c| execute(&c)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
