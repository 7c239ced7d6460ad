//! Coincidence probability of the displaced Hong-Ou-Mandel interferometer.
//!
//! Photon 1 receives a momentum shift `μ` and photon 2 a position shift
//! `2δ` before the 50/50 beam splitter. Three routes compute the
//! coincidence probability `I(μ,δ)`:
//!
//! * [`coincidence_oracle`] integrates the two-photon overlap directly on
//!   a sampled joint amplitude `F(p₁,p₂)`;
//! * [`coincidence_fast`] uses `I = 1/2 − (π/2) W(μ,δ)` for states of the
//!   form `F₊(p₁+p₂) F₋(p₁−p₂)`, where `W` is the Wigner function of the
//!   component selected by the [`AxisMode`];
//! * [`coincidence_2d`] is the product form for both transverse axes.
//!
//! Separable states and their mixtures never exceed `I = 1/2`, so any
//! larger value witnesses entanglement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Grid1D, SampledWave};
use crate::search::{self, SearchOptions};
use crate::states::{BiphotonState, General2D, Mixture, SeparablePM};
use crate::wigner::{negativity_volume, wigner_map, wigner_point, PhaseSpaceMap, PhaseSpacePoint};

pub use crate::states::{Axis, AxisMode, Probe};

/// Margin above 1/2 before a coincidence probability counts as a
/// violation of the separability bound.
pub const VIOLATION_TOL: f64 = 1e-4;

/// Range slack for the direct overlap integral.
const ORACLE_RANGE_TOL: f64 = 1e-3;

const RANGE_TOL: f64 = 1e-6;

/// `I = 1/2 − (π/2) W(μ,δ)` of the component probed under `state.mode`.
pub fn coincidence_fast(state: &SeparablePM, pt: PhaseSpacePoint) -> Result<f64> {
    let w = wigner_point(state.probed(), pt)?;
    let value = 0.5 - 0.5 * PI * w;
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&value) {
        log::warn!(
            "coincidence {value} at (μ={}, δ={}) outside [0, 1]",
            pt.mu,
            pt.delta
        );
    }
    Ok(value)
}

/// Direct evaluation of
/// `I = 1/2 − 1/2 Re ∬ F(p₂,p₁) F*(p₁+μ, p₂−μ) e^{2i(p₁−p₂+μ)δ} dp₁dp₂`
/// on the sampled joint amplitude.
///
/// The phase includes the `e^{2iμδ}` factor produced by the displacement,
/// so that a separable `F₊(p₁+p₂)F₋(p₁−p₂)` reduces to the Wigner function
/// of `F₋` at `(μ, δ)` under the `e^{-2ipδ}` kernel, and product states
/// `f₁(p₁)f₂(p₂)` give `1/2 − |overlap|²/2 ≤ 1/2` exactly. This is the
/// convention of the y axis; the x-axis reflection is not modelled here.
pub fn coincidence_oracle(state: &General2D, pt: PhaseSpacePoint) -> Result<f64> {
    if !(pt.mu.is_finite() && pt.delta.is_finite()) {
        return Err(Error::InvalidParameter(
            "non-finite phase-space point".into(),
        ));
    }
    let g1 = state.grid1();
    let g2 = state.grid2();
    let (n1, n2) = (g1.len(), g2.len());
    let swapped_on_nodes = g1.same_lattice(g2);

    // F(p₁+μ, p₂−μ): the shift is a constant offset in index space
    let shifted = shift_rows(state.amplitudes(), n1, n2, pt.mu / g1.spacing());
    let shifted = shift_columns(&shifted, n1, n2, -pt.mu / g2.spacing());

    let delta = pt.delta;
    let col_phase: Vec<Complex64> = g2
        .points()
        .enumerate()
        .map(|(j, p2)| Complex64::from_polar(g2.weight(j), -2.0 * p2 * delta))
        .collect();

    let (overlap, kept) = (0..n1)
        .into_par_iter()
        .map(|i| {
            let p1 = g1.point(i);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for (j, cp) in col_phase.iter().enumerate() {
                let swapped = if swapped_on_nodes {
                    state.value(j, i)
                } else {
                    state.sample(g2.point(j), p1)
                };
                let s = shifted[i * n2 + j];
                acc += swapped * s.conj() * cp;
                mass += s.norm_sqr() * g2.weight(j);
            }
            let w1 = g1.weight(i);
            (acc * Complex64::from_polar(w1, 2.0 * p1 * delta), mass * w1)
        })
        .reduce(
            || (Complex64::new(0.0, 0.0), 0.0),
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
    let overlap = overlap * Complex64::from_polar(1.0, 2.0 * pt.mu * delta);

    let lost = 1.0 - kept;
    if lost > crate::states::MAX_TRUNCATED_MASS {
        log::debug!(
            "shift μ={} moves {lost:.2e} of the joint mass off the grid",
            pt.mu
        );
    }
    let value = 0.5 - 0.5 * overlap.re;
    if !(-ORACLE_RANGE_TOL..=1.0 + ORACLE_RANGE_TOL).contains(&value) || !value.is_finite() {
        return Err(Error::NumericalIntegrity(format!(
            "overlap integral gives I = {value} at (μ={}, δ={})",
            pt.mu, pt.delta
        )));
    }
    Ok(value)
}

/// Integer and fractional parts of an index offset, snapping values within
/// rounding of a node.
fn split_offset(u: f64) -> (isize, f64) {
    let base = u.floor();
    let mut t = u - base;
    let mut base = base as isize;
    if t < 1e-12 {
        t = 0.0;
    } else if t > 1.0 - 1e-12 {
        t = 0.0;
        base += 1;
    }
    (base, t)
}

/// Four-point Lagrange weights for nodes `-1, 0, 1, 2` at offset `t`.
fn lagrange_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// `out[k] = line(k + u)` by cubic interpolation; `get` returns zero
/// beyond the ends of the line.
fn shift_line(get: impl Fn(isize) -> Complex64, u: f64, out: &mut [Complex64]) {
    let (base, t) = split_offset(u);
    let w = lagrange_weights(t);
    for (k, slot) in out.iter_mut().enumerate() {
        let x = k as isize + base;
        *slot = if t == 0.0 {
            get(x)
        } else {
            (0..4).map(|m| get(x + m as isize - 1) * w[m]).sum()
        };
    }
}

/// Row-major `n1 × n2` array shifted by `u` index steps along the first axis.
fn shift_rows(values: &[Complex64], n1: usize, n2: usize, u: f64) -> Vec<Complex64> {
    let (base, t) = split_offset(u);
    let w = lagrange_weights(t);
    let taps: &[(isize, f64)] = if t == 0.0 {
        &[(0, 1.0)]
    } else {
        &[(-1, w[0]), (0, w[1]), (1, w[2]), (2, w[3])]
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2];
    out.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
        for &(m, weight) in taps {
            let src = i as isize + base + m;
            if src < 0 || src as usize >= n1 {
                continue;
            }
            let src = &values[src as usize * n2..(src as usize + 1) * n2];
            row.iter_mut().zip(src).for_each(|(o, v)| *o += v * weight);
        }
    });
    out
}

/// Row-major `n1 × n2` array shifted by `u` index steps along the second axis.
fn shift_columns(values: &[Complex64], n1: usize, n2: usize, u: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2];
    out.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
        let src = &values[i * n2..(i + 1) * n2];
        let get = |j: isize| {
            if j < 0 || j as usize >= n2 {
                Complex64::new(0.0, 0.0)
            } else {
                src[j as usize]
            }
        };
        shift_line(get, u, row);
    });
    out
}

/// `Σ wᵢ I(componentᵢ)`; coincidence is linear in the density operator.
pub fn coincidence_mixture(state: &Mixture, pt: PhaseSpacePoint) -> Result<f64> {
    state
        .iter()
        .map(|(w, c)| coincidence(c, pt).map(|v| w * v))
        .sum()
}

/// Dispatches on the state representation.
pub fn coincidence(state: &BiphotonState, pt: PhaseSpacePoint) -> Result<f64> {
    match state {
        BiphotonState::SeparablePM(s) => coincidence_fast(s, pt),
        BiphotonState::General2D(s) => coincidence_oracle(s, pt),
        BiphotonState::Mixture(s) => coincidence_mixture(s, pt),
    }
}

/// Both transverse axes at once:
/// `I = 1/2 − (π²/2) W₊(μx,δx) W₋(μy,δy)`.
pub fn coincidence_2d(
    f_plus_x: &SampledWave,
    f_minus_y: &SampledWave,
    pt_x: PhaseSpacePoint,
    pt_y: PhaseSpacePoint,
) -> Result<f64> {
    let wx = wigner_point(f_plus_x, pt_x)?;
    let wy = wigner_point(f_minus_y, pt_y)?;
    Ok(0.5 - 0.5 * PI * PI * wx * wy)
}

/// Summary of a witness scan over a phase-space grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub max_i: f64,
    pub argmax: PhaseSpacePoint,
    /// `(max_I − 1/2)/(1/2)` when `max_I > 1/2 + VIOLATION_TOL`, else 0.
    pub relative_violation: f64,
    pub negativity_volume: f64,
    pub violating_points: usize,
    pub mu_grid: Grid1D,
    pub delta_grid: Grid1D,
}

impl ScanReport {
    /// Reduces a map carrying coincidence values. Ties resolve to the first
    /// maximum in row-major (μ outer) order.
    pub fn from_map(map: &PhaseSpaceMap) -> Result<Self> {
        let values = map
            .coincidence
            .as_ref()
            .ok_or_else(|| Error::InvalidState("map has no coincidence values".into()))?;
        let (idx, max_i) =
            values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                });
        Ok(Self {
            max_i,
            argmax: map.point(idx),
            relative_violation: relative_violation(max_i),
            negativity_volume: negativity_volume(map),
            violating_points: values.iter().filter(|&&v| v > 0.5 + VIOLATION_TOL).count(),
            mu_grid: map.mu_grid,
            delta_grid: map.delta_grid,
        })
    }

    pub fn violates(&self) -> bool {
        self.relative_violation > 0.0
    }
}

pub fn relative_violation(max_i: f64) -> f64 {
    if max_i > 0.5 + VIOLATION_TOL {
        (max_i - 0.5) / 0.5
    } else {
        0.0
    }
}

/// Coincidence probabilities over `mu_grid × delta_grid`.
///
/// Separable states go through the Wigner map (and keep it), joint
/// amplitudes through the overlap integral, mixtures by linearity.
pub fn coincidence_map(
    state: &BiphotonState,
    mu_grid: &Grid1D,
    delta_grid: &Grid1D,
) -> Result<PhaseSpaceMap> {
    match state {
        BiphotonState::SeparablePM(s) => {
            let mut map = wigner_map(s.probed(), mu_grid, delta_grid)?;
            let w = map.wigner.as_ref().expect("wigner map carries values");
            map.coincidence = Some(w.iter().map(|w| 0.5 - 0.5 * PI * w).collect());
            Ok(map)
        }
        BiphotonState::General2D(s) => {
            let n = delta_grid.len();
            let values = (0..mu_grid.len() * n)
                .into_par_iter()
                .map(|idx| {
                    let pt =
                        PhaseSpacePoint::new(mu_grid.point(idx / n), delta_grid.point(idx % n));
                    coincidence_oracle(s, pt)
                })
                .collect::<Result<Vec<_>>>()?;
            PhaseSpaceMap::new(*mu_grid, *delta_grid, None, Some(values))
        }
        BiphotonState::Mixture(m) => {
            let mut total = vec![0.0; mu_grid.len() * delta_grid.len()];
            for (w, component) in m.iter() {
                let part = coincidence_map(component, mu_grid, delta_grid)?;
                let values = part.coincidence.expect("coincidence map carries values");
                total.iter_mut().zip(values).for_each(|(t, v)| *t += w * v);
            }
            PhaseSpaceMap::new(*mu_grid, *delta_grid, None, Some(total))
        }
    }
}

/// Scans the grid and summarizes the separability-witness outcome.
pub fn witness_scan(
    state: &BiphotonState,
    mu_grid: &Grid1D,
    delta_grid: &Grid1D,
) -> Result<(ScanReport, PhaseSpaceMap)> {
    let map = coincidence_map(state, mu_grid, delta_grid)?;
    Ok((ScanReport::from_map(&map)?, map))
}

/// Rectangle in phase space searched by [`witness_maximize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBounds {
    pub mu: (f64, f64),
    pub delta: (f64, f64),
}

impl SearchBounds {
    pub fn of_grids(mu_grid: &Grid1D, delta_grid: &Grid1D) -> Self {
        Self {
            mu: (mu_grid.min(), mu_grid.max()),
            delta: (delta_grid.min(), delta_grid.max()),
        }
    }

    fn contains(&self, pt: PhaseSpacePoint) -> bool {
        (self.mu.0..=self.mu.1).contains(&pt.mu)
            && (self.delta.0..=self.delta.1).contains(&pt.delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub point: PhaseSpacePoint,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Pattern-search refinement of `I` from `seed`, with the initial step
/// given per axis (normally the scan spacing).
pub fn witness_maximize(
    state: &BiphotonState,
    seed: PhaseSpacePoint,
    bounds: SearchBounds,
    initial_step: [f64; 2],
) -> Result<Maximum> {
    if !bounds.contains(seed) {
        return Err(Error::InvalidParameter(format!(
            "seed (μ={}, δ={}) outside the search bounds",
            seed.mu, seed.delta
        )));
    }
    let f = |x: [f64; 2]| coincidence(state, PhaseSpacePoint::new(x[0], x[1]));
    let found = search::maximize(
        f,
        [seed.mu, seed.delta],
        [bounds.mu, bounds.delta],
        SearchOptions::new(initial_step),
    )?;
    if !found.converged {
        log::warn!(
            "pattern search stopped after {} evaluations",
            found.evaluations
        );
    }
    Ok(Maximum {
        point: PhaseSpacePoint::new(found.point[0], found.point[1]),
        value: found.value,
        converged: found.converged,
        evaluations: found.evaluations,
    })
}

/// Refines the best cell of a finished scan.
pub fn refine_scan(state: &BiphotonState, report: &ScanReport) -> Result<Maximum> {
    witness_maximize(
        state,
        report.argmax,
        SearchBounds::of_grids(&report.mu_grid, &report.delta_grid),
        [report.mu_grid.spacing(), report.delta_grid.spacing()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{cat_wave, gaussian_wave, sinc_quadratic_wave, to_general2d};

    fn grid(half: f64, n: usize) -> Grid1D {
        Grid1D::symmetric(half, n).unwrap()
    }

    #[test]
    fn hom_dip_at_origin() {
        let g = grid(40.0, 1024);
        let s = SeparablePM::new(
            gaussian_wave(&g, 1.0, 0.0).unwrap(),
            sinc_quadratic_wave(&g).unwrap(),
            AxisMode::Y,
        );
        assert!(coincidence_fast(&s, PhaseSpacePoint::ORIGIN).unwrap().abs() < 1e-12);
        let x = s.with_mode(AxisMode::X);
        assert!(coincidence_fast(&x, PhaseSpacePoint::ORIGIN).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dove_swap_exchanges_axes() {
        let g = grid(12.0, 512);
        let s = SeparablePM::new(
            cat_wave(&g, 1.0, 5.0).unwrap(),
            gaussian_wave(&g, 1.4, 0.0).unwrap(),
            AxisMode::new(Axis::Y, true),
        );
        let x = s.with_mode(AxisMode::X);
        for pt in [
            PhaseSpacePoint::new(0.3, 0.7),
            PhaseSpacePoint::new(-1.0, 0.2),
        ] {
            assert_eq!(
                coincidence_fast(&s, pt).unwrap(),
                coincidence_fast(&x, pt).unwrap()
            );
        }
    }

    #[test]
    fn symmetric_joint_state_has_full_dip() {
        let g = grid(6.0, 201);
        let f = gaussian_wave(&g, 1.0, 0.0).unwrap();
        let joint = General2D::product(&f, &f, g, g).unwrap();
        let v = coincidence_oracle(&joint, PhaseSpacePoint::ORIGIN).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn product_state_respects_bound() {
        let g = grid(8.0, 161);
        let wide = Grid1D::symmetric(10.0, 512).unwrap();
        let f1 = gaussian_wave(&wide, 1.0, 0.0).unwrap();
        let f2 = gaussian_wave(&wide, 2.0, 0.7).unwrap();
        let joint = General2D::product(&f1, &f2, g, g).unwrap();
        let scan = grid(2.0, 21);
        let (report, _) = witness_scan(&joint.into(), &scan, &scan).unwrap();
        assert!(report.max_i <= 0.5 + 1e-6, "{}", report.max_i);
        assert_eq!(report.relative_violation, 0.0);
    }

    #[test]
    fn oracle_matches_fast_path_on_gaussians() {
        let g = grid(8.0, 512);
        let s = SeparablePM::new(
            gaussian_wave(&g, 1.0, 0.0).unwrap(),
            gaussian_wave(&g, 1.5, 0.4).unwrap(),
            AxisMode::Y,
        );
        let joint = to_general2d(&s, grid(8.0, 401), grid(8.0, 401)).unwrap();
        for pt in [
            PhaseSpacePoint::new(0.0, 0.0),
            PhaseSpacePoint::new(0.37, -0.81),
            PhaseSpacePoint::new(-1.2, 0.55),
        ] {
            let fast = coincidence_fast(&s, pt).unwrap();
            let slow = coincidence_oracle(&joint, pt).unwrap();
            assert!((fast - slow).abs() < 2e-4, "{pt:?}: {fast} vs {slow}");
        }
    }

    #[test]
    fn either_factor_zero_gives_half() {
        let g = grid(12.0, 1024);
        let cat = cat_wave(&g, 1.0, 5.0).unwrap();
        let gauss = gaussian_wave(&g, 1.0, 0.0).unwrap();
        // the Wigner function of a Gaussian vanishes far from the origin
        let far = PhaseSpacePoint::new(11.0, 0.0);
        let v = coincidence_2d(&gauss, &cat, far, PhaseSpacePoint::new(0.0, 0.3)).unwrap();
        assert_eq!(v, 0.5);
        let dip = coincidence_2d(
            &gauss,
            &cat,
            PhaseSpacePoint::ORIGIN,
            PhaseSpacePoint::ORIGIN,
        )
        .unwrap();
        assert!(dip.abs() < 1e-12);
    }

    #[test]
    fn single_component_mixture_equals_pure() {
        let g = grid(12.0, 512);
        let s = SeparablePM::new(
            cat_wave(&g, 1.0, 5.0).unwrap(),
            gaussian_wave(&g, 1.0, 0.0).unwrap(),
            AxisMode::X,
        );
        let pure: BiphotonState = s.into();
        let mix: BiphotonState = Mixture::new(vec![1.0], vec![pure.clone()]).unwrap().into();
        let pt = PhaseSpacePoint::new(0.2, 0.6);
        assert_eq!(
            coincidence(&pure, pt).unwrap(),
            coincidence(&mix, pt).unwrap()
        );
    }

    #[test]
    fn report_ties_break_row_major() {
        let g = grid(1.0, 8);
        let mut values = vec![0.2; 64];
        values[10] = 0.7;
        values[20] = 0.7;
        let map = PhaseSpaceMap::new(g, g, None, Some(values)).unwrap();
        let r = ScanReport::from_map(&map).unwrap();
        assert_eq!(r.argmax, map.point(10));
        assert!((r.relative_violation - 0.4).abs() < 1e-12);
        assert_eq!(r.violating_points, 2);
    }

    #[test]
    fn maximize_rejects_seed_outside_bounds() {
        let g = grid(8.0, 64);
        let w = gaussian_wave(&g, 1.0, 0.0).unwrap();
        let s: BiphotonState = SeparablePM::new(w.clone(), w, AxisMode::Y).into();
        let bounds = SearchBounds {
            mu: (-1.0, 1.0),
            delta: (-1.0, 1.0),
        };
        assert!(witness_maximize(&s, PhaseSpacePoint::new(2.0, 0.0), bounds, [0.1, 0.1]).is_err());
    }
}
