//! Derivative-free compass search in two dimensions.

use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Starting step per coordinate.
    pub initial_step: [f64; 2],
    /// Stop once every step has shrunk below `initial_step · min_step_ratio`.
    pub min_step_ratio: f64,
    pub max_iterations: usize,
}

impl SearchOptions {
    pub fn new(initial_step: [f64; 2]) -> Self {
        Self {
            initial_step,
            min_step_ratio: 1e-7,
            max_iterations: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchResult {
    pub point: [f64; 2],
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Maximizes `f` inside the box `bounds` starting from `seed`.
///
/// Each iteration polls the four axis neighbours at the current step and
/// moves to the best strict improvement; without one, both steps halve.
/// The returned value never falls below `f(seed)`.
pub fn maximize<F>(
    f: F,
    seed: [f64; 2],
    bounds: [(f64, f64); 2],
    opts: SearchOptions,
) -> Result<SearchResult>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let clamp = |x: [f64; 2]| {
        [
            x[0].clamp(bounds[0].0, bounds[0].1),
            x[1].clamp(bounds[1].0, bounds[1].1),
        ]
    };
    let mut x = clamp(seed);
    let mut fx = f(x)?;
    let mut evaluations = 1;
    let mut step = opts.initial_step;
    let floor = [
        opts.initial_step[0] * opts.min_step_ratio,
        opts.initial_step[1] * opts.min_step_ratio,
    ];

    for _ in 0..opts.max_iterations {
        if step[0] < floor[0] && step[1] < floor[1] {
            return Ok(SearchResult {
                point: x,
                value: fx,
                converged: true,
                evaluations,
            });
        }
        let mut best: Option<([f64; 2], f64)> = None;
        for axis in 0..2 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[axis] += sign * step[axis];
                let y = clamp(y);
                if y == x {
                    continue;
                }
                let fy = f(y)?;
                evaluations += 1;
                if fy > best.map_or(fx, |b| b.1) {
                    best = Some((y, fy));
                }
            }
        }
        match best {
            Some((y, fy)) => {
                x = y;
                fx = fy;
            }
            None => {
                step[0] *= 0.5;
                step[1] *= 0.5;
            }
        }
    }
    Ok(SearchResult {
        point: x,
        value: fx,
        converged: false,
        evaluations,
    })
}
