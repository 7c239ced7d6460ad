//! Biphoton amplitudes `F(p₁,p₂) = F₊(p₁+p₂) F₋(p₁−p₂)`: pump profiles,
//! phase-matching functions, cat superpositions, tabulated waves, the
//! expanded 2D amplitude and convex mixtures.
//!
//! Everything is expressed in dimensionless units (`k = L = c = n₁−n₂ = 1`
//! unless a [`ScenarioParams`] says otherwise) and every constructor returns
//! a wave renormalized on its grid.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Grid1D, SampledWave};

/// Largest truncated-mass fraction tolerated when expanding a separable
/// state onto a product grid.
pub const MAX_TRUNCATED_MASS: f64 = 1e-4;

const GENERAL2D_NORM_TOL: f64 = 1e-8;
const MIXTURE_WEIGHT_TOL: f64 = 1e-12;

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Physical parameters of a down-conversion source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Pump momentum width (units of √(k/L), or dimensionless frequency).
    pub w_p: f64,
    /// Pump wave number.
    pub k: f64,
    /// Medium length.
    pub length: f64,
    pub n1: f64,
    pub n2: f64,
    /// Speed of light.
    pub c: f64,
    /// Separation Δp_p of the two pump components of a cat state.
    pub delta_p_pump: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            w_p: 1.0,
            k: 1.0,
            length: 1.0,
            n1: 2.0,
            n2: 1.0,
            c: 1.0,
            delta_p_pump: 5.0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("w_p", self.w_p),
            ("k", self.k),
            ("L", self.length),
            ("c", self.c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.delta_p_pump >= 0.0) {
            return Err(Error::InvalidParameter(
                "cat separation must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Extra check for frequency-entangled sources.
    pub fn validate_frequency(&self) -> Result<()> {
        self.validate()?;
        if self.n1 == self.n2 {
            return Err(Error::InvalidParameter("n1 and n2 must differ".into()));
        }
        Ok(())
    }

    /// `L/k`, the scale inside the transverse phase-matching sinc.
    pub fn transverse_scale(&self) -> f64 {
        self.length / self.k
    }

    /// `(n₁−n₂)L/c`, the scale inside the spectral phase-matching sinc.
    pub fn spectral_scale(&self) -> f64 {
        (self.n1 - self.n2) * self.length / self.c
    }
}

fn real_wave(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Result<SampledWave> {
    let amp = grid.points().map(|p| Complex64::new(f(p), 0.0)).collect();
    SampledWave::new(*grid, amp)
}

/// Gaussian `e^{-(p-center)²/width²}`.
pub fn gaussian_wave(grid: &Grid1D, width: f64, center: f64) -> Result<SampledWave> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "width must be positive, got {width}"
        )));
    }
    if !grid.contains(center) {
        return Err(Error::InvalidParameter(format!(
            "center {center} outside [{}, {}]",
            grid.min(),
            grid.max()
        )));
    }
    real_wave(grid, |p| {
        let u = (p - center) / width;
        (-u * u).exp()
    })
}

/// Transverse phase matching `sinc(p² L/k)` in units where `L/k = 1`.
pub fn sinc_quadratic_wave(grid: &Grid1D) -> Result<SampledWave> {
    sinc_quadratic_wave_scaled(grid, 1.0)
}

pub fn sinc_quadratic_wave_scaled(grid: &Grid1D, l_over_k: f64) -> Result<SampledWave> {
    real_wave(grid, |p| sinc(p * p * l_over_k))
}

/// Spectral phase matching `sinc((n₁−n₂)Lω/(2√2 c))` in units where
/// `(n₁−n₂)L/c = 1`.
pub fn sinc_linear_wave(grid: &Grid1D) -> Result<SampledWave> {
    sinc_linear_wave_scaled(grid, 1.0)
}

pub fn sinc_linear_wave_scaled(grid: &Grid1D, spectral_scale: f64) -> Result<SampledWave> {
    let factor = spectral_scale / (2.0 * std::f64::consts::SQRT_2);
    real_wave(grid, |w| sinc(w * factor))
}

/// Even cat: two Gaussians of `width` centered at `±separation/2`.
pub fn cat_wave(grid: &Grid1D, width: f64, separation: f64) -> Result<SampledWave> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "width must be positive, got {width}"
        )));
    }
    if !(separation >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "separation must be nonnegative, got {separation}"
        )));
    }
    let half = 0.5 * separation;
    real_wave(grid, |p| {
        let a = (p - half) / width;
        let b = (p + half) / width;
        (-a * a).exp() + (-b * b).exp()
    })
}

/// User-supplied samples, renormalized.
pub fn tabulated_wave(grid: &Grid1D, samples: &[Complex64]) -> Result<SampledWave> {
    SampledWave::new(*grid, samples.to_vec())
}

/// Parses a `p re [im]` table (whitespace separated, `#` comments) into a
/// wave. The abscissae must form a uniform grid.
pub fn parse_wave_table(text: &str, origin: &Path) -> Result<SampledWave> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut ps = Vec::new();
    let mut amp = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(
                line_no,
                format!("expected 2 or 3 columns, found {}", fields.len()),
            ));
        }
        let mut nums = [0.0; 3];
        for (slot, field) in nums.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("`{field}`: {e}")))?;
        }
        ps.push(nums[0]);
        amp.push(Complex64::new(nums[1], nums[2]));
    }
    if ps.len() < crate::lattice::MIN_POINTS {
        return Err(parse_err(0, format!("only {} samples", ps.len())));
    }
    let grid =
        Grid1D::new(ps[0], ps[ps.len() - 1], ps.len()).map_err(|e| parse_err(0, e.to_string()))?;
    let tol = 1e-9 * grid.spacing();
    if let Some((i, _)) = ps
        .iter()
        .enumerate()
        .find(|(i, p)| (*p - grid.point(*i)).abs() > tol)
    {
        return Err(parse_err(
            0,
            format!("sample {} breaks uniform spacing", i + 1),
        ));
    }
    tabulated_wave(&grid, &amp)
}

pub fn load_wave_file(path: &Path) -> Result<SampledWave> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_wave_table(&text, path)
}

/// Physical transverse axis probed by the interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Orthogonal to the plane of incidence; reveals `F₋`.
    Y,
    /// In the plane of incidence; reveals `F₊`.
    X,
}

/// Which component of a separable state a coincidence measurement reveals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Plus,
    Minus,
}

/// Axis choice plus an optional Dove-prism swap of the two axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AxisMode {
    pub axis: Axis,
    pub dove_swap: bool,
}

impl AxisMode {
    pub const Y: AxisMode = AxisMode {
        axis: Axis::Y,
        dove_swap: false,
    };
    pub const X: AxisMode = AxisMode {
        axis: Axis::X,
        dove_swap: false,
    };

    pub fn new(axis: Axis, dove_swap: bool) -> Self {
        Self { axis, dove_swap }
    }

    pub fn probe(&self) -> Probe {
        match (self.axis, self.dove_swap) {
            (Axis::Y, false) | (Axis::X, true) => Probe::Minus,
            (Axis::X, false) | (Axis::Y, true) => Probe::Plus,
        }
    }
}

/// `F₊(p₁+p₂) F₋(p₁−p₂)` kept in factorized form.
#[derive(Clone, Debug)]
pub struct SeparablePM {
    pub f_plus: SampledWave,
    pub f_minus: SampledWave,
    pub mode: AxisMode,
}

impl SeparablePM {
    pub fn new(f_plus: SampledWave, f_minus: SampledWave, mode: AxisMode) -> Self {
        Self {
            f_plus,
            f_minus,
            mode,
        }
    }

    /// The component revealed under the current axis mode.
    pub fn probed(&self) -> &SampledWave {
        match self.mode.probe() {
            Probe::Plus => &self.f_plus,
            Probe::Minus => &self.f_minus,
        }
    }

    pub fn with_mode(&self, mode: AxisMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }
}

/// Joint amplitude `F(p₁,p₂)` on a product grid, row-major in `p₁`.
#[derive(Clone, Debug)]
pub struct General2D {
    grid1: Grid1D,
    grid2: Grid1D,
    amp: Vec<Complex64>,
    truncated_mass: f64,
}

impl General2D {
    /// Renormalizes `amp` (length `n₁·n₂`, row-major in `p₁`).
    pub fn new(grid1: Grid1D, grid2: Grid1D, amp: Vec<Complex64>) -> Result<Self> {
        let expected = grid1.len() * grid2.len();
        if amp.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: amp.len(),
            });
        }
        let mut state = Self {
            grid1,
            grid2,
            amp,
            truncated_mass: 0.0,
        };
        let norm = state.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(
                "joint amplitude vanishes on the grid".into(),
            ));
        }
        let scale = norm.sqrt().recip();
        state.amp.par_iter_mut().for_each(|a| *a *= scale);
        let residual = (state.norm() - 1.0).abs();
        if residual > GENERAL2D_NORM_TOL {
            return Err(Error::NumericalIntegrity(format!(
                "joint amplitude norm residual {residual:.3e}"
            )));
        }
        Ok(state)
    }

    /// Product state `f₁(p₁) f₂(p₂)` sampled on the given grids.
    pub fn product(
        f1: &SampledWave,
        f2: &SampledWave,
        grid1: Grid1D,
        grid2: Grid1D,
    ) -> Result<Self> {
        let row: Vec<Complex64> = grid2.points().map(|p| f2.at(p)).collect();
        let amp = grid1
            .points()
            .flat_map(|p| {
                let a = f1.at(p);
                row.iter().map(move |b| a * b)
            })
            .collect();
        Self::new(grid1, grid2, amp)
    }

    pub fn grid1(&self) -> &Grid1D {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid1D {
        &self.grid2
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    /// Fraction of the ideal mass that fell outside the product grid when
    /// the state was expanded from its factors.
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.amp[i * self.grid2.len() + j]
    }

    /// `ΣΣ |F|² w₁ w₂` by the 2D trapezoid rule.
    pub fn norm(&self) -> f64 {
        let n2 = self.grid2.len();
        self.amp
            .par_chunks(n2)
            .enumerate()
            .map(|(i, row)| {
                let w1 = self.grid1.weight(i);
                row.iter()
                    .enumerate()
                    .map(|(j, a)| a.norm_sqr() * self.grid2.weight(j))
                    .sum::<f64>()
                    * w1
            })
            .sum()
    }

    /// Bilinear interpolation, zero outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> Complex64 {
        let (Some((i, tx)), Some((j, ty))) = (cell(&self.grid1, x), cell(&self.grid2, y)) else {
            return Complex64::new(0.0, 0.0);
        };
        let v00 = self.value(i, j);
        let v01 = self.value(i, j + 1);
        let v10 = self.value(i + 1, j);
        let v11 = self.value(i + 1, j + 1);
        (v00 * (1.0 - ty) + v01 * ty) * (1.0 - tx) + (v10 * (1.0 - ty) + v11 * ty) * tx
    }

    /// `⟨p₁²⟩, ⟨p₂²⟩, ⟨p₁p₂⟩` of `|F|²`.
    pub fn second_moments(&self) -> (f64, f64, f64) {
        let mut m = (0.0, 0.0, 0.0);
        for (i, p1) in self.grid1.points().enumerate() {
            for (j, p2) in self.grid2.points().enumerate() {
                let w = self.value(i, j).norm_sqr() * self.grid1.weight(i) * self.grid2.weight(j);
                m.0 += w * p1 * p1;
                m.1 += w * p2 * p2;
                m.2 += w * p1 * p2;
            }
        }
        m
    }
}

fn cell(grid: &Grid1D, x: f64) -> Option<(usize, f64)> {
    let u = grid.fractional_index(x);
    let last = (grid.len() - 1) as f64;
    if !(u >= -1e-9 && u <= last + 1e-9) {
        return None;
    }
    let u = u.clamp(0.0, last);
    let i = (u.floor() as usize).min(grid.len() - 2);
    Some((i, u - i as f64))
}

/// Expands `F₊(p₁+p₂) F₋(p₁−p₂)` onto `grid1 × grid2`.
///
/// Component values come from linear interpolation, zero outside their
/// sampled support. The truncated fraction is the component mass
/// `|F₊(p₊)|²|F₋(p₋)|²` whose image `p₁,₂ = (p₊ ± p₋)/2` leaves the grid.
pub fn to_general2d(state: &SeparablePM, grid1: Grid1D, grid2: Grid1D) -> Result<General2D> {
    let n2 = grid2.len();
    let mut amp = vec![Complex64::new(0.0, 0.0); grid1.len() * n2];
    amp.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
        let p1 = grid1.point(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let p2 = grid2.point(j);
            *slot = state.f_plus.at(p1 + p2) * state.f_minus.at(p1 - p2);
        }
    });
    let fraction = truncated_fraction(state, &grid1, &grid2);
    if fraction > MAX_TRUNCATED_MASS {
        return Err(Error::Truncation { fraction });
    }
    let mut out = General2D::new(grid1, grid2, amp)?;
    out.truncated_mass = fraction;
    Ok(out)
}

fn truncated_fraction(state: &SeparablePM, grid1: &Grid1D, grid2: &Grid1D) -> f64 {
    let plus = &state.f_plus;
    let minus = &state.f_minus;
    let mg = minus.grid();
    // prefix[k] = Σ_{i<k} |F₋_i|²
    let mut prefix = Vec::with_capacity(mg.len() + 1);
    prefix.push(0.0);
    for a in minus.amplitudes() {
        prefix.push(prefix[prefix.len() - 1] + a.norm_sqr());
    }
    let total = prefix[mg.len()];
    // first node index with p ≥ x
    let lower = |x: f64| mg.fractional_index(x).ceil().clamp(0.0, mg.len() as f64) as usize;
    // one past the last node index with p ≤ x
    let upper =
        |x: f64| (mg.fractional_index(x).floor() + 1.0).clamp(0.0, mg.len() as f64) as usize;

    let lost: f64 = plus
        .grid()
        .points()
        .zip(plus.amplitudes())
        .map(|(sum, a)| {
            // (sum ± diff)/2 inside grid1 / grid2 bounds an interval of diff
            let lo = (2.0 * grid1.min() - sum).max(sum - 2.0 * grid2.max());
            let hi = (2.0 * grid1.max() - sum).min(sum - 2.0 * grid2.min());
            let kept = if hi < lo {
                0.0
            } else {
                let (l, u) = (lower(lo), upper(hi));
                if u > l {
                    prefix[u] - prefix[l]
                } else {
                    0.0
                }
            };
            a.norm_sqr() * (total - kept)
        })
        .sum();
    lost * plus.grid().spacing() * mg.spacing()
}

/// Convex combination of pure states.
#[derive(Clone, Debug)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<BiphotonState>,
}

impl Mixture {
    pub fn new(weights: Vec<f64>, components: Vec<BiphotonState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidState(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidState(
                "mixture weights must be positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MIXTURE_WEIGHT_TOL {
            return Err(Error::InvalidState(format!(
                "weights sum to {total}, not 1"
            )));
        }
        if components
            .iter()
            .any(|c| matches!(c, BiphotonState::Mixture(_)))
        {
            return Err(Error::InvalidState(
                "mixture components must be pure".into(),
            ));
        }
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[BiphotonState] {
        &self.components
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &BiphotonState)> {
        self.weights.iter().copied().zip(&self.components)
    }
}

#[derive(Clone, Debug)]
pub enum BiphotonState {
    SeparablePM(SeparablePM),
    General2D(General2D),
    Mixture(Mixture),
}

impl From<SeparablePM> for BiphotonState {
    fn from(s: SeparablePM) -> Self {
        BiphotonState::SeparablePM(s)
    }
}

impl From<General2D> for BiphotonState {
    fn from(s: General2D) -> Self {
        BiphotonState::General2D(s)
    }
}

impl From<Mixture> for BiphotonState {
    fn from(s: Mixture) -> Self {
        BiphotonState::Mixture(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mirror_symmetric(w: &SampledWave) -> bool {
        let a = w.amplitudes();
        (0..a.len()).all(|i| (a[i] - a[a.len() - 1 - i]).norm() <= 1e-15 * a[i].norm().max(1e-300))
    }

    #[test]
    fn gaussian_normalized_and_even() {
        let g = Grid1D::symmetric(8.0, 1024).unwrap();
        let w = gaussian_wave(&g, 1.0, 0.0).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
        assert!(mirror_symmetric(&w));
        let second: f64 = g
            .points()
            .zip(w.amplitudes())
            .enumerate()
            .map(|(i, (p, a))| p * p * a.norm_sqr() * g.weight(i))
            .sum();
        assert!((second - 0.25).abs() < 1e-6, "<p²> = {second}");
    }

    #[test]
    fn gaussian_rejects_bad_parameters() {
        let g = Grid1D::symmetric(8.0, 64).unwrap();
        assert!(gaussian_wave(&g, 0.0, 0.0).is_err());
        assert!(gaussian_wave(&g, 1.0, 9.0).is_err());
    }

    /// Sign change of the sampled amplitude located by linear interpolation.
    fn first_positive_zero(w: &SampledWave) -> f64 {
        let g = w.grid();
        let a = w.amplitudes();
        let start = (0..g.len()).find(|&i| g.point(i) >= 0.0).unwrap();
        for i in start..g.len() - 1 {
            if a[i].re > 0.0 && a[i + 1].re <= 0.0 {
                let t = a[i].re / (a[i].re - a[i + 1].re);
                return g.point(i) + t * g.spacing();
            }
        }
        panic!("no zero crossing");
    }

    #[test]
    fn sinc_quadratic_shape() {
        let g = Grid1D::symmetric(40.0, 4096).unwrap();
        let w = sinc_quadratic_wave(&g).unwrap();
        assert!(mirror_symmetric(&w));
        let a = w.amplitudes();
        let peak = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // central samples (±h/2) carry the maximum
        assert_eq!(a[2047].norm(), peak);
        let zero = first_positive_zero(&w);
        assert!((zero - std::f64::consts::PI.sqrt()).abs() < g.spacing());
    }

    #[test]
    fn sinc_linear_shape() {
        let g = Grid1D::symmetric(400.0, 8193).unwrap();
        let w = sinc_linear_wave(&g).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-10);
        let a = w.amplitudes();
        let peak = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert_eq!(a[4096].norm(), peak);
        assert_eq!(g.point(4096), 0.0);
        let zero = first_positive_zero(&w);
        let want = 2.0 * std::f64::consts::SQRT_2 * std::f64::consts::PI;
        assert!((zero - want).abs() < 0.01, "{zero} vs {want}");
    }

    #[test]
    fn degenerate_cat_is_gaussian() {
        let g = Grid1D::symmetric(8.0, 1024).unwrap();
        let cat = cat_wave(&g, 1.3, 0.0).unwrap();
        let gauss = gaussian_wave(&g, 1.3, 0.0).unwrap();
        for (a, b) in cat.amplitudes().iter().zip(gauss.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cat_has_two_humps() {
        let g = Grid1D::symmetric(10.0, 2001).unwrap();
        let cat = cat_wave(&g, 1.0, 5.0).unwrap();
        assert!(mirror_symmetric(&cat));
        assert!((cat.norm() - 1.0).abs() < 1e-12);
        let a: Vec<f64> = cat.amplitudes().iter().map(|v| v.re).collect();
        let maxima: Vec<f64> = (1..a.len() - 1)
            .filter(|&i| a[i] > a[i - 1] && a[i] >= a[i + 1])
            .map(|i| g.point(i))
            .collect();
        assert_eq!(maxima.len(), 2, "{maxima:?}");
        assert!((maxima[0] + 2.5).abs() < 0.02);
        assert!((maxima[1] - 2.5).abs() < 0.02);
    }

    #[test]
    fn tabulated_is_scale_invariant() {
        let g = Grid1D::symmetric(8.0, 256).unwrap();
        let gauss = gaussian_wave(&g, 1.0, 0.5).unwrap();
        let same = tabulated_wave(&g, gauss.amplitudes()).unwrap();
        let scaled: Vec<_> = gauss.amplitudes().iter().map(|a| a * 7.0).collect();
        let scaled = tabulated_wave(&g, &scaled).unwrap();
        for ((a, b), c) in gauss
            .amplitudes()
            .iter()
            .zip(same.amplitudes())
            .zip(scaled.amplitudes())
        {
            assert!((a - b).norm() < 1e-14);
            assert!((a - c).norm() < 1e-14);
        }
        assert!(matches!(
            tabulated_wave(&g, &vec![Complex64::new(0.0, 0.0); 256]),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn wave_table_round_trip() {
        let text = "# p re im\n\
                    -2 0.1 0\n-1.5 0.3 0.1\n-1 0.6 0\n-0.5 0.9 0\n0 1 0   # peak\n\
                    0.5 0.9 0\n1 0.6 0\n1.5 0.3 0\n2 0.1 0\n";
        let w = parse_wave_table(text, Path::new("mem")).unwrap();
        assert_eq!(w.grid().len(), 9);
        assert_eq!(w.grid().spacing(), 0.5);
        assert!(!w.is_real());
    }

    #[test]
    fn wave_table_errors_carry_line_numbers() {
        let err = parse_wave_table("0 1\n0.1 x\n", Path::new("f.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_wave_table("0 1 2 3\n", Path::new("f.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let uneven: String = (0..10)
            .map(|i| format!("{} 1\n", if i == 5 { 0.55 } else { 0.1 * i as f64 }))
            .collect();
        assert!(parse_wave_table(&uneven, Path::new("f.txt")).is_err());
    }

    #[test]
    fn axis_mode_probes() {
        assert_eq!(AxisMode::Y.probe(), Probe::Minus);
        assert_eq!(AxisMode::X.probe(), Probe::Plus);
        assert_eq!(AxisMode::new(Axis::Y, true).probe(), Probe::Plus);
        assert_eq!(AxisMode::new(Axis::X, true).probe(), Probe::Minus);
    }

    #[test]
    fn expanded_gaussians_have_rotated_moments() {
        let g1 = Grid1D::symmetric(8.0, 1024).unwrap();
        let (a, b) = (1.0, 1.6);
        let s = SeparablePM::new(
            gaussian_wave(&g1, a, 0.0).unwrap(),
            gaussian_wave(&g1, b, 0.0).unwrap(),
            AxisMode::Y,
        );
        let g2 = Grid1D::symmetric(6.0, 401).unwrap();
        let joint = to_general2d(&s, g2, g2).unwrap();
        assert!((joint.norm() - 1.0).abs() < 1e-6);
        assert!(joint.truncated_mass() < 1e-12);
        // ⟨p±²⟩ = w²/4 and p₁,₂ = (p₊ ± p₋)/2
        let (m11, m22, m12) = joint.second_moments();
        let want_diag = (a * a + b * b) / 16.0;
        let want_cross = (a * a - b * b) / 16.0;
        assert!((m11 - want_diag).abs() < 1e-4, "{m11} vs {want_diag}");
        assert!((m22 - want_diag).abs() < 1e-4);
        assert!((m12 - want_cross).abs() < 1e-4, "{m12} vs {want_cross}");
    }

    #[test]
    fn matched_widths_are_uncorrelated() {
        let g1 = Grid1D::symmetric(8.0, 1024).unwrap();
        let s = SeparablePM::new(
            gaussian_wave(&g1, 1.2, 0.0).unwrap(),
            gaussian_wave(&g1, 1.2, 0.0).unwrap(),
            AxisMode::Y,
        );
        let g2 = Grid1D::symmetric(6.0, 301).unwrap();
        let (_, _, m12) = to_general2d(&s, g2, g2).unwrap().second_moments();
        assert!(m12.abs() < 1e-6, "{m12}");
    }

    #[test]
    fn narrow_minus_concentrates_on_diagonal() {
        let g1 = Grid1D::symmetric(8.0, 2048).unwrap();
        let width = 0.1;
        let s = SeparablePM::new(
            gaussian_wave(&g1, 1.0, 0.0).unwrap(),
            gaussian_wave(&g1, width, 0.0).unwrap(),
            AxisMode::Y,
        );
        let g2 = Grid1D::symmetric(4.0, 801).unwrap();
        let joint = to_general2d(&s, g2, g2).unwrap();
        let mut near = 0.0;
        for (i, p1) in g2.points().enumerate() {
            for (j, p2) in g2.points().enumerate() {
                if (p1 - p2).abs() < 3.0 * width {
                    near += joint.value(i, j).norm_sqr() * g2.weight(i) * g2.weight(j);
                }
            }
        }
        assert!(near > 0.999, "{near}");
    }

    #[test]
    fn small_product_grid_is_a_truncation_error() {
        let g1 = Grid1D::symmetric(8.0, 512).unwrap();
        let s = SeparablePM::new(
            gaussian_wave(&g1, 1.0, 0.0).unwrap(),
            gaussian_wave(&g1, 3.0, 0.0).unwrap(),
            AxisMode::Y,
        );
        let g2 = Grid1D::symmetric(1.0, 64).unwrap();
        assert!(matches!(
            to_general2d(&s, g2, g2),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn mixture_validation() {
        let g = Grid1D::symmetric(6.0, 64).unwrap();
        let w = gaussian_wave(&g, 1.0, 0.0).unwrap();
        let pure: BiphotonState = SeparablePM::new(w.clone(), w, AxisMode::Y).into();
        assert!(Mixture::new(vec![1.0], vec![pure.clone()]).is_ok());
        assert!(Mixture::new(vec![0.5, 0.4], vec![pure.clone(), pure.clone()]).is_err());
        assert!(Mixture::new(vec![1.5, -0.5], vec![pure.clone(), pure.clone()]).is_err());
        let inner: BiphotonState = Mixture::new(vec![1.0], vec![pure.clone()]).unwrap().into();
        assert!(Mixture::new(vec![0.5, 0.5], vec![pure, inner]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ScenarioParams::default().validate_frequency().is_ok());
        let bad = ScenarioParams {
            n2: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_ok());
        assert!(bad.validate_frequency().is_err());
        let bad = ScenarioParams {
            w_p: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
