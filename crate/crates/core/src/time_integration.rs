//! Two-stage SSP Runge-Kutta update.
//!
//! Stage 1: `c1 = cn + dt L(cn)`; stage 2: `c(n+1) = cn / 2 + (c1 + dt L(c1)) / 2`.
//! The kernel pipeline that evaluates `L` lives in the executor; this module
//! only holds the update arithmetic and the loop parameters.

use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    First,
    Second,
}

impl Stage {
    pub fn index(self) -> usize {
        match self {
            Stage::First => 0,
            Stage::Second => 1,
        }
    }
}

/// Step size and step count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeLoop {
    pub dt: f64,
    pub steps: usize,
}

impl TimeLoop {
    pub const SUBSTEPS: usize = 2;

    pub fn new(dt: f64, steps: usize) -> Result<Self, SolverError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SolverError::Config(format!("time step must be positive, got {dt}")));
        }
        if steps == 0 {
            return Err(SolverError::Config("step count must be at least 1".into()));
        }
        Ok(Self { dt, steps })
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Sums residual parts into `out` in the order given.
pub fn merge_residuals(parts: &[&[f64]], out: &mut [f64]) {
    out.copy_from_slice(parts[0]);
    for p in &parts[1..] {
        for (o, v) in out.iter_mut().zip(p.iter()) {
            *o += v;
        }
    }
}

/// Applies one substep in place on `c` (the stage input); `c_n` is the
/// state at the beginning of the step. `stride` is the per-element block
/// size, used to name the element in the non-finite diagnostic.
pub fn rk_substep_update(
    stage: Stage,
    c_n: &[f64],
    c: &mut [f64],
    residual: &[f64],
    dt: f64,
    stride: usize,
) -> Result<(), SolverError> {
    match stage {
        Stage::First => {
            for (x, r) in c.iter_mut().zip(residual) {
                *x += dt * r;
            }
        }
        Stage::Second => {
            for ((x, r), x0) in c.iter_mut().zip(residual).zip(c_n) {
                *x = 0.5 * x0 + 0.5 * (*x + dt * r);
            }
        }
    }
    if let Some(pos) = c.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            element: pos / stride.max(1),
            context: format!("after RK stage {}", stage.index() + 1),
        });
    }
    Ok(())
}
