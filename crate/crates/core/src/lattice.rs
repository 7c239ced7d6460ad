//! Uniform sampling lattices, trapezoidal quadrature and the oscillatory
//! transform `∫ f(p) e^{-2ipδ} dp` shared by the physics modules.

use num_complex::Complex64;
use serde::Serialize;

use crate::chirp::ChirpPlan;
use crate::error::{Error, Result};

/// Smallest admissible number of samples.
pub const MIN_POINTS: usize = 8;

/// Default post-renormalization tolerance on the L² norm of a wave.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

/// Boundary intensity, relative to the peak, above which a wave is
/// reported as truncated.
pub const BOUNDARY_DECAY: f64 = 1e-6;

/// Uniform 1D lattice `min + i·spacing`, `i ∈ [0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    min: f64,
    max: f64,
    n: usize,
    #[serde(skip)]
    spacing: f64,
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite bounds [{min}, {max}]"
            )));
        }
        if max <= min {
            return Err(Error::InvalidGrid(format!(
                "max {max} must exceed min {min}"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{n} points requested, at least {MIN_POINTS} required"
            )));
        }
        Ok(Self {
            min,
            max,
            n,
            spacing: (max - min) / (n - 1) as f64,
        })
    }

    /// Grid on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Sample `i`, counted from the nearer end so that symmetric grids are
    /// exactly mirror symmetric.
    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if 2 * i < self.n {
            self.min + i as f64 * self.spacing
        } else {
            self.max - (self.n - 1 - i) as f64 * self.spacing
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Trapezoid weight of sample `i`, spacing included.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Continuous index of `x`, i.e. `(x - min) / spacing`.
    #[inline]
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.min) / self.spacing
    }

    /// True when both grids describe the same lattice.
    pub fn same_lattice(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && (self.min - other.min).abs() <= 1e-12 * self.spacing
            && (self.max - other.max).abs() <= 1e-12 * self.spacing
    }
}

/// Linear interpolation of samples on `grid`, zero outside `[min, max]`.
#[inline]
pub fn interpolate(values: &[Complex64], grid: &Grid1D, x: f64) -> Complex64 {
    let u = grid.fractional_index(x);
    let last = (grid.n - 1) as f64;
    // tolerate rounding right at the end points
    if !(u >= -1e-9 && u <= last + 1e-9) {
        return Complex64::new(0.0, 0.0);
    }
    let u = u.clamp(0.0, last);
    let i = (u.floor() as usize).min(grid.n - 2);
    let t = u - i as f64;
    values[i] * (1.0 - t) + values[i + 1] * t
}

/// Trapezoidal approximation of `∫ values dp` over the grid.
pub fn integrate(values: &[Complex64], grid: &Grid1D) -> Result<Complex64> {
    check_len(values, grid)?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.weight(i))
        .sum())
}

/// Real-valued counterpart of [`integrate`].
pub fn integrate_real(values: &[f64], grid: &Grid1D) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.weight(i))
        .sum())
}

/// `∫ values(p) e^{-2ipδ} dp` for every δ in `deltas`.
///
/// Uniformly spaced `deltas` go through a Bluestein chirp-z evaluation once
/// the problem is large enough; everything else uses direct quadrature.
pub fn oscillatory_transform(
    values: &[Complex64],
    grid: &Grid1D,
    deltas: &[f64],
) -> Result<Vec<Complex64>> {
    check_len(values, grid)?;
    if let Some(delta_grid) = uniform_grid(deltas) {
        if deltas.len() >= 16 && grid.len() * deltas.len() >= 1 << 15 {
            return ChirpPlan::new(grid, &delta_grid).execute(values);
        }
    }
    oscillatory_transform_direct(values, grid, deltas)
}

/// Reference evaluation of [`oscillatory_transform`] by direct quadrature.
pub fn oscillatory_transform_direct(
    values: &[Complex64],
    grid: &Grid1D,
    deltas: &[f64],
) -> Result<Vec<Complex64>> {
    check_len(values, grid)?;
    Ok(deltas
        .iter()
        .map(|&delta| oscillatory_point(values, grid, delta))
        .collect())
}

pub(crate) fn oscillatory_point(values: &[Complex64], grid: &Grid1D, delta: f64) -> Complex64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let phase = Complex64::from_polar(1.0, -2.0 * grid.point(i) * delta);
            v * phase * grid.weight(i)
        })
        .sum()
}

fn uniform_grid(deltas: &[f64]) -> Option<Grid1D> {
    if deltas.len() < MIN_POINTS {
        return None;
    }
    let grid = Grid1D::new(deltas[0], deltas[deltas.len() - 1], deltas.len()).ok()?;
    let tol = 1e-12 * grid.spacing().max(grid.max().abs().max(grid.min().abs()));
    deltas
        .iter()
        .enumerate()
        .all(|(j, d)| (d - grid.point(j)).abs() <= tol)
        .then_some(grid)
}

fn check_len(values: &[Complex64], grid: &Grid1D) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(())
}

/// Complex amplitude sampled on a grid and normalized to unit L² norm.
#[derive(Clone, Debug)]
pub struct SampledWave {
    grid: Grid1D,
    amp: Vec<Complex64>,
    norm_tol: f64,
}

impl SampledWave {
    /// Renormalizes `amp` on `grid`. All-zero input is rejected.
    pub fn new(grid: Grid1D, amp: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(grid, amp, DEFAULT_NORM_TOL)
    }

    pub fn with_tolerance(grid: Grid1D, mut amp: Vec<Complex64>, norm_tol: f64) -> Result<Self> {
        check_len(&amp, &grid)?;
        if amp.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = norm_squared(&amp, &grid);
        if !(norm > 0.0) {
            return Err(Error::InvalidState("amplitude vanishes on the grid".into()));
        }
        let scale = norm.sqrt().recip();
        amp.iter_mut().for_each(|a| *a *= scale);

        let wave = Self {
            grid,
            amp,
            norm_tol,
        };
        let residual = (wave.norm() - 1.0).abs();
        if residual > norm_tol {
            return Err(Error::NumericalIntegrity(format!(
                "renormalized wave has norm residual {residual:.3e}"
            )));
        }
        let ratio = wave.boundary_ratio();
        if ratio > BOUNDARY_DECAY {
            log::warn!(
                "wave on [{}, {}] is truncated: boundary intensity is {ratio:.2e} of the peak",
                grid.min(),
                grid.max()
            );
        }
        Ok(wave)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm_tol(&self) -> f64 {
        self.norm_tol
    }

    /// `Σ |F_i|² h`.
    pub fn norm(&self) -> f64 {
        norm_squared(&self.amp, &self.grid)
    }

    /// Linearly interpolated amplitude, zero outside the sampled support.
    #[inline]
    pub fn at(&self, x: f64) -> Complex64 {
        interpolate(&self.amp, &self.grid, x)
    }

    /// Largest of the two end-point intensities relative to the peak intensity.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.amp.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        let edge = self.amp[0]
            .norm_sqr()
            .max(self.amp[self.amp.len() - 1].norm_sqr());
        edge / peak
    }

    pub fn is_truncated(&self) -> bool {
        self.boundary_ratio() > BOUNDARY_DECAY
    }

    /// True when every sample is real (imaginary parts vanish).
    pub fn is_real(&self) -> bool {
        self.amp.iter().all(|a| a.im == 0.0)
    }

    /// Pointwise product with `factor(p)`, renormalized.
    pub fn map(&self, factor: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amp = self
            .grid
            .points()
            .zip(&self.amp)
            .map(|(p, a)| a * factor(p))
            .collect();
        Self::with_tolerance(self.grid, amp, self.norm_tol)
    }
}

// Plain Riemann sum: the shifted-product lattices used for Wigner
// quadrature see every wave node with full weight, so this is the norm under
// which πW(0,0) = 1 holds exactly for even waves.
fn norm_squared(amp: &[Complex64], grid: &Grid1D) -> f64 {
    amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.spacing()
}
