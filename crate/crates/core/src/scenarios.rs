//! Preset down-conversion sources and the phase-space panels built on them.
//!
//! All quantities are dimensionless: transverse momenta in units of
//! `√(k/L)`, positions in `√(L/k)`, frequencies in `c/(L(n₁−n₂))` and
//! delays in `L(n₁−n₂)/c`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hom::{coincidence_map, AxisMode, ScanReport};
use crate::lattice::Grid1D;
use crate::states::{
    cat_wave, gaussian_wave, sinc_linear_wave_scaled, sinc_quadratic_wave_scaled, BiphotonState,
    ScenarioParams, SeparablePM,
};
use crate::wigner::{wigner_map, MapMeta, PhaseSpaceMap};

/// Width of each Gaussian component of the cat pump.
pub const CAT_COMPONENT_WIDTH: f64 = 1.0;

const PANEL_POINTS: usize = 129;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// cw Gaussian pump, transverse momentum, probed along y.
    TmCw,
    /// Two-component cat pump, transverse momentum, probed along x.
    TmCat,
    /// Pulsed Gaussian pump, frequency entanglement.
    FreqPulsed,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::TmCw,
        ScenarioKind::TmCat,
        ScenarioKind::FreqPulsed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::TmCw => "tm-cw",
            ScenarioKind::TmCat => "tm-cat",
            ScenarioKind::FreqPulsed => "freq-pulsed",
        }
    }

    /// Units of the μ and δ axes.
    pub fn units(&self) -> (&'static str, &'static str) {
        match self {
            ScenarioKind::TmCw | ScenarioKind::TmCat => ("sqrt(k/L)", "sqrt(L/k)"),
            ScenarioKind::FreqPulsed => ("c/(L(n1-n2))", "L(n1-n2)/c"),
        }
    }

    pub fn axis_mode(&self) -> AxisMode {
        match self {
            ScenarioKind::TmCw | ScenarioKind::FreqPulsed => AxisMode::Y,
            ScenarioKind::TmCat => AxisMode::X,
        }
    }

    /// Sampling of the one-dimensional wave functions.
    pub fn default_wave_grid(&self) -> Grid1D {
        let grid = match self {
            ScenarioKind::TmCw | ScenarioKind::TmCat => Grid1D::symmetric(40.0, 1024),
            ScenarioKind::FreqPulsed => Grid1D::symmetric(3000.0, 65537),
        };
        grid.expect("static grid")
    }

    /// Compact 1024-point wave grid ending on a zero of the phase-matching
    /// sinc, fine enough for sampling the joint amplitude `F(p₁,p₂)`.
    pub fn joint_wave_grid(&self) -> Grid1D {
        let half = match self {
            ScenarioKind::TmCw | ScenarioKind::TmCat => (45.0 * PI).sqrt(),
            ScenarioKind::FreqPulsed => 8.0 * SQRT_2 * PI,
        };
        Grid1D::symmetric(half, 1024).expect("static grid")
    }

    /// Phase-space window of the panels.
    pub fn default_panel_grid(&self) -> Grid1D {
        let half = match self {
            ScenarioKind::TmCw | ScenarioKind::TmCat => 4.0,
            ScenarioKind::FreqPulsed => 10.0,
        };
        Grid1D::symmetric(half, PANEL_POINTS).expect("static grid")
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown scenario '{s}' (expected tm-cw, tm-cat or freq-pulsed)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: ScenarioParams,
    pub wave_grid: Grid1D,
    pub mu_grid: Grid1D,
    pub delta_grid: Grid1D,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        let panel = kind.default_panel_grid();
        Self {
            kind,
            params: ScenarioParams::default(),
            wave_grid: kind.default_wave_grid(),
            mu_grid: panel,
            delta_grid: panel,
        }
    }

    pub fn with_pump_width(mut self, w_p: f64) -> Self {
        self.params.w_p = w_p;
        self
    }

    pub fn with_wave_grid(mut self, grid: Grid1D) -> Self {
        self.wave_grid = grid;
        self
    }

    pub fn with_panel_grids(mut self, mu_grid: Grid1D, delta_grid: Grid1D) -> Self {
        self.mu_grid = mu_grid;
        self.delta_grid = delta_grid;
        self
    }

    /// The scenario's `F₊ ⊗ F₋` state under its axis mode.
    pub fn separable(&self) -> Result<SeparablePM> {
        let g = &self.wave_grid;
        let p = &self.params;
        let (f_plus, f_minus) = match self.kind {
            ScenarioKind::TmCw => {
                p.validate()?;
                (
                    gaussian_wave(g, p.w_p, 0.0)?,
                    sinc_quadratic_wave_scaled(g, p.transverse_scale())?,
                )
            }
            ScenarioKind::TmCat => {
                p.validate()?;
                (
                    cat_wave(g, CAT_COMPONENT_WIDTH, p.delta_p_pump)?,
                    sinc_quadratic_wave_scaled(g, p.transverse_scale())?,
                )
            }
            ScenarioKind::FreqPulsed => {
                p.validate_frequency()?;
                (
                    gaussian_wave(g, p.w_p, 0.0)?,
                    sinc_linear_wave_scaled(g, p.spectral_scale())?,
                )
            }
        };
        Ok(SeparablePM::new(f_plus, f_minus, self.kind.axis_mode()))
    }

    pub fn build(&self) -> Result<(BiphotonState, AxisMode)> {
        let state = self.separable()?;
        let mode = state.mode;
        Ok((state.into(), mode))
    }

    pub fn meta(&self) -> MapMeta {
        let (mu_units, delta_units) = self.kind.units();
        MapMeta {
            scenario: self.kind.name().to_string(),
            mu_units: mu_units.to_string(),
            delta_units: delta_units.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Panel {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Panel {
    pub const ALL: [Panel; 6] = [Panel::A, Panel::B, Panel::C, Panel::D, Panel::E, Panel::F];

    pub fn scenario(&self) -> ScenarioKind {
        match self {
            Panel::A | Panel::B => ScenarioKind::TmCw,
            Panel::C | Panel::D => ScenarioKind::TmCat,
            Panel::E | Panel::F => ScenarioKind::FreqPulsed,
        }
    }

    /// Panels a, c and e show the Wigner function; b, d and f the
    /// coincidence probability.
    pub fn shows_wigner(&self) -> bool {
        matches!(self, Panel::A | Panel::C | Panel::E)
    }

    pub fn letter(&self) -> char {
        match self {
            Panel::A => 'a',
            Panel::B => 'b',
            Panel::C => 'c',
            Panel::D => 'd',
            Panel::E => 'e',
            Panel::F => 'f',
        }
    }
}

impl FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Panel::ALL
            .into_iter()
            .find(|p| t.len() == 1 && t.starts_with(p.letter()))
            .ok_or_else(|| Error::Usage(format!("unknown panel '{s}' (expected a-f)")))
    }
}

#[derive(Clone, Debug)]
pub struct PanelOutput {
    pub map: PhaseSpaceMap,
    /// Present for the coincidence panels.
    pub report: Option<ScanReport>,
}

/// Computes a panel with the scenario's default settings.
pub fn reproduce_panel(panel: Panel) -> Result<PanelOutput> {
    reproduce_panel_with(panel, &Scenario::new(panel.scenario()))
}

/// Computes a panel on a customized scenario of the matching kind.
pub fn reproduce_panel_with(panel: Panel, scenario: &Scenario) -> Result<PanelOutput> {
    if scenario.kind != panel.scenario() {
        return Err(Error::Usage(format!(
            "panel {} belongs to scenario {}, not {}",
            panel.letter(),
            panel.scenario(),
            scenario.kind
        )));
    }
    let state = scenario.separable()?;
    if panel.shows_wigner() {
        let map = wigner_map(state.probed(), &scenario.mu_grid, &scenario.delta_grid)?
            .with_meta(scenario.meta());
        return Ok(PanelOutput { map, report: None });
    }
    let map = coincidence_map(&state.into(), &scenario.mu_grid, &scenario.delta_grid)?
        .with_meta(scenario.meta());
    let report = ScanReport::from_map(&map)?;
    Ok(PanelOutput {
        map,
        report: Some(report),
    })
}
