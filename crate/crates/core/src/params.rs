use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Physical constants of one problem instance.
///
/// `alpha` is the fractional exponent, `d_alpha` the kinetic prefactor,
/// `well_halfwidth` the half-width of the infinite well, `spring_k` the
/// oscillator stiffness and `amplitude` the prefactor of the cosine ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub alpha: f64,
    pub hbar: f64,
    pub d_alpha: f64,
    pub well_halfwidth: f64,
    pub spring_k: f64,
    pub amplitude: f64,
}

impl PhysParams {
    /// Lowest and highest exponent any routine accepts: (-1, 4].
    pub const ALPHA_MIN: f64 = -1.0;
    pub const ALPHA_MAX: f64 = 4.0;

    /// Natural units: hbar = D = a = k = A = 1.
    pub fn natural(alpha: f64) -> Self {
        PhysParams {
            alpha,
            hbar: 1.0,
            d_alpha: 1.0,
            well_halfwidth: 1.0,
            spring_k: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_d_alpha(mut self, d_alpha: f64) -> Self {
        self.d_alpha = d_alpha;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_halfwidth(mut self, a: f64) -> Self {
        self.well_halfwidth = a;
        self
    }

    pub fn with_spring(mut self, k: f64) -> Self {
        self.spring_k = k;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Checks the invariants shared by every consumer. Individual
    /// operations narrow the alpha window further.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > Self::ALPHA_MIN && self.alpha <= Self::ALPHA_MAX) {
            return invalid(format!(
                "alpha = {} outside the supported range (-1, 4]",
                self.alpha
            ));
        }
        for (name, v) in [
            ("hbar", self.hbar),
            ("d_alpha", self.d_alpha),
            ("well_halfwidth", self.well_halfwidth),
            ("spring_k", self.spring_k),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !self.amplitude.is_finite() {
            return invalid("amplitude must be finite");
        }
        Ok(())
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams::natural(1.0)
    }
}
