//! Wigner function of a 1D wave,
//! `W(μ,δ) = (1/π) ∫ F(μ+p) F*(μ−p) e^{-2ipδ} dp`,
//! and phase-space maps built from it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chirp::ChirpPlan;
use crate::error::{Error, Result};
use crate::lattice::{oscillatory_point, Grid1D, SampledWave};

/// Largest imaginary residue of `∫ F(μ+p)F*(μ−p) e^{-2ipδ} dp` accepted
/// before the result is declared unreliable.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseSpacePoint {
    pub mu: f64,
    pub delta: f64,
}

impl PhaseSpacePoint {
    pub fn new(mu: f64, delta: f64) -> Self {
        Self { mu, delta }
    }

    pub const ORIGIN: PhaseSpacePoint = PhaseSpacePoint {
        mu: 0.0,
        delta: 0.0,
    };
}

/// Descriptive metadata carried along with a map for export.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MapMeta {
    pub scenario: String,
    pub mu_units: String,
    pub delta_units: String,
}

/// Values over a rectangular `(μ, δ)` grid, row-major with μ outer.
///
/// A map carries Wigner values, coincidence probabilities, or both.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceMap {
    pub mu_grid: Grid1D,
    pub delta_grid: Grid1D,
    pub wigner: Option<Vec<f64>>,
    pub coincidence: Option<Vec<f64>>,
    pub meta: MapMeta,
}

impl PhaseSpaceMap {
    pub fn new(
        mu_grid: Grid1D,
        delta_grid: Grid1D,
        wigner: Option<Vec<f64>>,
        coincidence: Option<Vec<f64>>,
    ) -> Result<Self> {
        let expected = mu_grid.len() * delta_grid.len();
        if wigner.is_none() && coincidence.is_none() {
            return Err(Error::InvalidState("phase-space map without values".into()));
        }
        for v in wigner.iter().chain(coincidence.iter()) {
            if v.len() != expected {
                return Err(Error::Dimension {
                    expected,
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            mu_grid,
            delta_grid,
            wigner,
            coincidence,
            meta: MapMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: MapMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn len(&self) -> usize {
        self.mu_grid.len() * self.delta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.delta_grid.len() + j
    }

    pub fn point(&self, idx: usize) -> PhaseSpacePoint {
        let n = self.delta_grid.len();
        PhaseSpacePoint::new(self.mu_grid.point(idx / n), self.delta_grid.point(idx % n))
    }

    /// Wigner values, or the ones implied by the coincidence map through
    /// `I = 1/2 − (π/2) W` when no Wigner values were computed.
    pub fn effective_wigner(&self) -> Vec<f64> {
        match (&self.wigner, &self.coincidence) {
            (Some(w), _) => w.clone(),
            (None, Some(i)) => i.iter().map(|v| (1.0 - 2.0 * v) / PI).collect(),
            (None, None) => unreachable!("constructor requires values"),
        }
    }

    /// `ΣΣ W Δμ Δδ`.
    pub fn integral(&self) -> f64 {
        self.effective_wigner().iter().sum::<f64>() * self.cell_area()
    }

    fn cell_area(&self) -> f64 {
        self.mu_grid.spacing() * self.delta_grid.spacing()
    }
}

/// `ΣΣ max(−W, 0) Δμ Δδ`.
pub fn negativity_volume(map: &PhaseSpaceMap) -> f64 {
    map.effective_wigner()
        .iter()
        .map(|w| (-w).max(0.0))
        .sum::<f64>()
        * map.cell_area()
}

/// Symmetric integration lattice for the shifted product `F(μ+p)F*(μ−p)`.
///
/// Offsets are `p = (k + s/2)·h` with `h` the wave spacing and `s ∈ {0,1}`
/// chosen so that `μ ± p` falls as close to the wave's nodes as possible;
/// when `μ` sits on a node or half-node every evaluation is exact.
struct ShiftLattice {
    half: bool,
    grid: Grid1D,
    // count of p ≥ 0 offsets
    positive: usize,
}

impl ShiftLattice {
    fn pair(wave: &SampledWave) -> [ShiftLattice; 2] {
        let g = wave.grid();
        let h = g.spacing();
        let k_max = ((g.max() - g.min()) / h).ceil() as usize + 1;
        let whole = ShiftLattice {
            half: false,
            grid: Grid1D::new(-(k_max as f64) * h, k_max as f64 * h, 2 * k_max + 1)
                .expect("lattice is non-degenerate"),
            positive: k_max + 1,
        };
        let edge = (k_max as f64 + 0.5) * h;
        let half = ShiftLattice {
            half: true,
            grid: Grid1D::new(-edge, edge, 2 * k_max + 2).expect("lattice is non-degenerate"),
            positive: k_max + 1,
        };
        [whole, half]
    }

    fn choose(wave: &SampledWave, mu: f64) -> usize {
        let u = wave.grid().fractional_index(mu);
        let dist = |x: f64| (x - x.round()).abs();
        usize::from(dist(u + 0.5) < dist(u))
    }

    /// `F(μ+p) F*(μ−p)` on the lattice, built from the `p ≥ 0` half so that
    /// the Hermitian symmetry `g(−p) = g(p)*` holds exactly.
    fn shifted_product(&self, wave: &SampledWave, mu: f64) -> Vec<Complex64> {
        let h = wave.grid().spacing();
        let n = self.grid.len();
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        let centre = if self.half {
            self.positive
        } else {
            self.positive - 1
        };
        for k in 0..self.positive {
            let p = if self.half {
                (k as f64 + 0.5) * h
            } else {
                k as f64 * h
            };
            let v = wave.at(mu + p) * wave.at(mu - p).conj();
            g[centre + k] = v;
            if self.half {
                g[centre - 1 - k] = v.conj();
            } else if k > 0 {
                g[centre - k] = v.conj();
            }
        }
        g
    }
}

fn check_mu(wave: &SampledWave, mu: f64) -> Result<()> {
    if !mu.is_finite() || !wave.grid().contains(mu) {
        return Err(Error::InvalidParameter(format!(
            "μ = {mu} outside the wave's support [{}, {}]",
            wave.grid().min(),
            wave.grid().max()
        )));
    }
    Ok(())
}

fn to_wigner(value: Complex64, pt: PhaseSpacePoint) -> Result<f64> {
    if value.im.abs() > IMAGINARY_RESIDUE_TOL || !value.re.is_finite() {
        return Err(Error::NumericalIntegrity(format!(
            "Wigner quadrature at (μ={}, δ={}) left imaginary residue {:.3e}",
            pt.mu, pt.delta, value.im
        )));
    }
    Ok(value.re / PI)
}

/// `W(μ,δ)` of a normalized wave.
pub fn wigner_point(wave: &SampledWave, pt: PhaseSpacePoint) -> Result<f64> {
    check_mu(wave, pt.mu)?;
    if !pt.delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "δ = {} is not finite",
            pt.delta
        )));
    }
    let lattices = ShiftLattice::pair(wave);
    let lattice = &lattices[ShiftLattice::choose(wave, pt.mu)];
    let g = lattice.shifted_product(wave, pt.mu);
    to_wigner(oscillatory_point(&g, &lattice.grid, pt.delta), pt)
}

/// `W` on `mu_grid × delta_grid`; rows are independent and evaluated in
/// parallel, each row's δ sweep going through one chirp-z transform.
pub fn wigner_map(
    wave: &SampledWave,
    mu_grid: &Grid1D,
    delta_grid: &Grid1D,
) -> Result<PhaseSpaceMap> {
    check_mu(wave, mu_grid.min())?;
    check_mu(wave, mu_grid.max())?;
    let lattices = ShiftLattice::pair(wave);
    let plans = [
        ChirpPlan::new(&lattices[0].grid, delta_grid),
        ChirpPlan::new(&lattices[1].grid, delta_grid),
    ];
    let rows: Vec<Vec<f64>> = (0..mu_grid.len())
        .into_par_iter()
        .map(|i| {
            let mu = mu_grid.point(i);
            let which = ShiftLattice::choose(wave, mu);
            let g = lattices[which].shifted_product(wave, mu);
            plans[which]
                .execute(&g)?
                .into_iter()
                .enumerate()
                .map(|(j, v)| to_wigner(v, PhaseSpacePoint::new(mu, delta_grid.point(j))))
                .collect()
        })
        .collect::<Result<_>>()?;
    PhaseSpaceMap::new(*mu_grid, *delta_grid, Some(rows.concat()), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{cat_wave, gaussian_wave, sinc_quadratic_wave};

    fn gaussian_closed_form(w: f64, mu: f64, delta: f64) -> f64 {
        (-2.0 * mu * mu / (w * w)).exp() * (-w * w * delta * delta / 2.0).exp() / PI
    }

    #[test]
    fn even_wave_at_origin_is_one_over_pi() {
        let g = Grid1D::symmetric(40.0, 1024).unwrap();
        let w = sinc_quadratic_wave(&g).unwrap();
        let v = wigner_point(&w, PhaseSpacePoint::ORIGIN).unwrap();
        assert!((PI * v - 1.0).abs() < 1e-12, "{}", PI * v);
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let width = 1.0;
        let g = Grid1D::symmetric(8.0, 1024).unwrap();
        let wave = gaussian_wave(&g, width, 0.0).unwrap();
        // (w, 1/w) lies off the node lattice; interpolation error is O(h²)
        let got = wigner_point(&wave, PhaseSpacePoint::new(width, 1.0 / width)).unwrap();
        let want = (-2.0f64).exp() * (-0.5f64).exp() / PI;
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        assert!((got - gaussian_closed_form(width, width, 1.0 / width)).abs() < 1e-4);
    }

    #[test]
    fn cat_fringes_change_sign() {
        let g = Grid1D::symmetric(12.0, 1024).unwrap();
        let cat = cat_wave(&g, 1.0, 5.0).unwrap();
        let at0 = wigner_point(&cat, PhaseSpacePoint::new(0.0, 0.0)).unwrap();
        let at1 = wigner_point(&cat, PhaseSpacePoint::new(0.0, PI / 5.0)).unwrap();
        assert!(at0 > 0.0 && at1 < 0.0, "{at0} {at1}");
    }

    #[test]
    fn mu_outside_support_is_rejected() {
        let g = Grid1D::symmetric(4.0, 64).unwrap();
        let w = gaussian_wave(&g, 1.0, 0.0).unwrap();
        assert!(matches!(
            wigner_point(&w, PhaseSpacePoint::new(4.5, 0.0)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn map_agrees_with_pointwise_evaluation() {
        let g = Grid1D::symmetric(12.0, 1024).unwrap();
        let cat = cat_wave(&g, 1.0, 5.0).unwrap();
        let mu = Grid1D::symmetric(4.0, 33).unwrap();
        let delta = Grid1D::symmetric(4.0, 41).unwrap();
        let map = wigner_map(&cat, &mu, &delta).unwrap();
        let w = map.wigner.as_ref().unwrap();
        for i in (0..33).step_by(4) {
            for j in (0..41).step_by(5) {
                let pt = PhaseSpacePoint::new(mu.point(i), delta.point(j));
                let direct = wigner_point(&cat, pt).unwrap();
                assert!((w[map.index(i, j)] - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gaussian_map_peak_and_positivity() {
        let g = Grid1D::symmetric(8.0, 1024).unwrap();
        let wave = gaussian_wave(&g, 1.0, 0.0).unwrap();
        let grid = Grid1D::symmetric(3.0, 61).unwrap();
        let map = wigner_map(&wave, &grid, &grid).unwrap();
        let w = map.wigner.as_ref().unwrap();
        let (idx, max) = w
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert_eq!(map.point(idx), PhaseSpacePoint::ORIGIN);
        assert!((max - 1.0 / PI).abs() < 1e-6);
        assert!(negativity_volume(&map) < 1e-12);
    }

    #[test]
    fn map_integrates_to_one() {
        let g = Grid1D::symmetric(8.0, 1024).unwrap();
        let wave = gaussian_wave(&g, 1.0, 0.0).unwrap();
        let mu = Grid1D::symmetric(4.0, 81).unwrap();
        let delta = Grid1D::symmetric(7.0, 141).unwrap();
        let map = wigner_map(&wave, &mu, &delta).unwrap();
        assert!((map.integral() - 1.0).abs() < 1e-3, "{}", map.integral());
    }

    #[test]
    fn sinc_quadratic_map_has_negative_cells() {
        let g = Grid1D::symmetric(40.0, 1024).unwrap();
        let wave = sinc_quadratic_wave(&g).unwrap();
        let grid = Grid1D::symmetric(4.0, 65).unwrap();
        let map = wigner_map(&wave, &grid, &grid).unwrap();
        assert!(map.wigner.as_ref().unwrap().iter().any(|&w| w < 0.0));
        assert!(negativity_volume(&map) > 0.0);
    }

    #[test]
    fn map_requires_values() {
        let g = Grid1D::symmetric(1.0, 8).unwrap();
        assert!(PhaseSpaceMap::new(g, g, None, None).is_err());
        assert!(PhaseSpaceMap::new(g, g, Some(vec![0.0; 63]), None).is_err());
    }
}
