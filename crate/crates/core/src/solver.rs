//! Fixed-step classical Runge–Kutta integration for scalar autonomous ODEs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.t_grid.last()?, *self.values.last()?))
    }

    /// Linear interpolation on the grid; `None` outside it.
    pub fn at(&self, t: f64) -> Option<f64> {
        let (first, last) = (*self.t_grid.first()?, *self.t_grid.last()?);
        if t < first || t > last {
            return None;
        }
        let i = self.t_grid.partition_point(|&x| x <= t);
        if i == 0 {
            return Some(self.values[0]);
        }
        if i >= self.t_grid.len() {
            return self.values.last().copied();
        }
        let (t0, t1) = (self.t_grid[i - 1], self.t_grid[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        Some(y0 + (y1 - y0) * (t - t0) / (t1 - t0))
    }
}

/// Integrates `dP/dt = rhs(P)` from `t_start` to `t_end`. The final step is
/// shortened so the last grid point is exactly `t_end`.
pub fn rk4_integrate<F>(rhs: F, p0: f64, t_start: f64, t_end: f64, step: f64) -> Result<Trajectory>
where
    F: Fn(f64) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "step must be > 0, got {step}"
        )));
    }
    if !(t_end > t_start) {
        return Err(Error::InvalidParams(format!(
            "t_end ({t_end}) must exceed t_start ({t_start})"
        )));
    }
    if !p0.is_finite() {
        return Err(Error::NonFiniteState { step: 0 });
    }

    let span = t_end - t_start;
    let full_steps = (span / step).floor() as usize;
    let mut t_grid = Vec::with_capacity(full_steps + 2);
    let mut values = Vec::with_capacity(full_steps + 2);
    t_grid.push(t_start);
    values.push(p0);

    let mut p = p0;
    let mut k = 0usize;
    loop {
        // Grid from the step count rather than accumulated sums.
        let t = t_start + k as f64 * step;
        let remaining = t_end - t;
        if remaining <= step * 1e-9 {
            break;
        }
        let h = remaining.min(step);
        let k1 = rhs(p);
        let k2 = rhs(p + 0.5 * h * k1);
        let k3 = rhs(p + 0.5 * h * k2);
        let k4 = rhs(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        k += 1;
        if !p.is_finite() {
            return Err(Error::NonFiniteState { step: k });
        }
        t_grid.push(if h < step {
            t_end
        } else {
            t_start + k as f64 * step
        });
        values.push(p);
    }
    if let Some(last) = t_grid.last_mut() {
        *last = t_end;
    }
    Ok(Trajectory { t_grid, values })
}
