//! Bluestein (chirp-z) evaluation of `Σ_k w_k f_k e^{-2i p_k δ_j}` for
//! uniform `p` and `δ` lattices.
//!
//! With `p_k = p₀ + k h` and `δ_j = d₀ + j Δ` the kernel factors as
//! `e^{-2ip₀δ_j} e^{-2ikhd₀} e^{-iθkj}` with `θ = 2hΔ`, and
//! `kj = (k² + j² - (j-k)²)/2` turns the last factor into a convolution.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::lattice::Grid1D;

// low-order part of 2π beyond f64 precision
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `e^{i a q}` with the argument reduced modulo 2π in extended precision.
///
/// `q` is an exactly representable integer (k, k², ...), so `a·q` can be
/// large; the FMA residual keeps the reduced phase accurate to a few ulp.
#[inline]
pub(crate) fn cis_scaled(a: f64, q: f64) -> Complex64 {
    let prod = a * q;
    let residual = a.mul_add(q, -prod);
    let turns = (prod / TAU).round();
    let reduced = turns.mul_add(-TAU, prod) - turns * TAU_LO + residual;
    Complex64::from_polar(1.0, reduced)
}

/// Precomputed chirp-z plan for a fixed pair of lattices.
pub struct ChirpPlan {
    grid: Grid1D,
    n_out: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    input_chirp: Vec<Complex64>,
    output_chirp: Vec<Complex64>,
    kernel_spectrum: Vec<Complex64>,
}

impl ChirpPlan {
    pub fn new(grid: &Grid1D, deltas: &Grid1D) -> Self {
        let n = grid.len();
        let m = deltas.len();
        let h = grid.spacing();
        let p0 = grid.min();
        let d0 = deltas.min();
        let half_theta = h * deltas.spacing();
        let fft_len = (n + m - 1).next_power_of_two();

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        let input_chirp = (0..n)
            .map(|k| {
                let k = k as f64;
                cis_scaled(-2.0 * h * d0, k) * cis_scaled(-half_theta, k * k)
            })
            .collect::<Vec<_>>();
        let norm = (fft_len as f64).recip();
        let output_chirp = (0..m)
            .map(|j| {
                let jf = j as f64;
                Complex64::from_polar(1.0, -2.0 * p0 * deltas.point(j))
                    * cis_scaled(-half_theta, jf * jf)
                    * norm
            })
            .collect();

        let mut kernel = vec![Complex64::new(0.0, 0.0); fft_len];
        for (l, slot) in kernel.iter_mut().take(m).enumerate() {
            let lf = l as f64;
            *slot = cis_scaled(half_theta, lf * lf);
        }
        for l in 1..n {
            let lf = l as f64;
            kernel[fft_len - l] = cis_scaled(half_theta, lf * lf);
        }
        forward.process(&mut kernel);

        Self {
            grid: *grid,
            n_out: m,
            fft_len,
            forward,
            inverse,
            input_chirp,
            output_chirp,
            kernel_spectrum: kernel,
        }
    }

    /// Trapezoid-weighted transform of `values` sampled on the plan's grid.
    pub fn execute(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.grid.len() {
            return Err(crate::Error::Dimension {
                expected: self.grid.len(),
                got: values.len(),
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (k, (v, c)) in values.iter().zip(&self.input_chirp).enumerate() {
            buf[k] = v * c * self.grid.weight(k);
        }
        self.forward.process(&mut buf);
        buf.iter_mut()
            .zip(&self.kernel_spectrum)
            .for_each(|(b, k)| *b *= k);
        self.inverse.process(&mut buf);
        Ok(buf[..self.n_out]
            .iter()
            .zip(&self.output_chirp)
            .map(|(b, c)| b * c)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::oscillatory_transform_direct;

    #[test]
    fn reduced_phase_matches_direct_for_small_arguments() {
        for &(a, q) in &[(0.3, 7.0), (-1.25, 49.0), (2.0e-3, 1.0e6)] {
            let want = Complex64::from_polar(1.0, a * q);
            assert!((cis_scaled(a, q) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn chirp_agrees_with_direct_quadrature() {
        let grid = Grid1D::new(-7.3, 9.1, 1024).unwrap();
        let deltas = Grid1D::new(-3.2, 2.7, 64).unwrap();
        let values: Vec<_> = grid
            .points()
            .map(|p| {
                Complex64::new(
                    (-(p - 1.0).powi(2) / 3.0).exp(),
                    0.4 * (-(p + 2.0).powi(2)).exp(),
                ) * Complex64::from_polar(1.0, 0.7 * p)
            })
            .collect();
        let fast = ChirpPlan::new(&grid, &deltas).execute(&values).unwrap();
        let slow =
            oscillatory_transform_direct(&values, &grid, &deltas.points().collect::<Vec<_>>())
                .unwrap();
        let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-9 * scale, "diff {diff:.3e} scale {scale:.3e}");
    }
}
