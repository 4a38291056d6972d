use crate::error::SolverError;

/// Bottom friction law. The velocity entering either law is the element's
/// piecewise-constant part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrictionLaw {
    /// `tau_bf = coeff * H`
    Linear { coeff: f64 },
    /// `tau_bf = coeff * |u|`
    Quadratic { coeff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub gravity: f64,
    pub coriolis: f64,
    pub friction: FrictionLaw,
    pub body_force: [f64; 2],
    pub min_depth: f64,
}

impl PhysParams {
    /// Radial dam-break values: g = 1, f_c = 1e-5, tau_bf = 1e-4 H.
    pub fn dam_break() -> Self {
        Self {
            gravity: 1.0,
            coriolis: 1.0e-5,
            friction: FrictionLaw::Linear { coeff: 1.0e-4 },
            body_force: [0.0, 0.0],
            min_depth: 1.0e-3,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.gravity > 0.0) {
            return Err(SolverError::Config(format!("gravity must be positive, got {}", self.gravity)));
        }
        if !(self.min_depth > 0.0) {
            return Err(SolverError::Config(format!(
                "minimum depth must be positive, got {}",
                self.min_depth
            )));
        }
        Ok(())
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self::dam_break()
    }
}
