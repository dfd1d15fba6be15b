use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Free parameters of the learning system. `Default` gives the values used
/// for every reported experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub r_success: f64,
    pub r_failure: f64,
    /// Forgetting factor of the playing network.
    pub zeta: f64,
    /// Forgetting factor of the forward models.
    pub zeta_env: f64,
    pub r_env: f64,
    pub h_init: f64,
    pub h_init_env: f64,
    /// Stretching factor of the discrimination score.
    pub alpha: f64,
    /// Boredom immunity.
    pub beta: f64,
    /// Squashing scale.
    pub gamma: f64,
    /// Squashing shift.
    pub delta: f64,
    /// Balancing factor between desirability and path cost.
    pub epsilon: f64,
    pub l_max: usize,
    /// Window of the well-trained test.
    pub t_thresh: usize,
    pub r_thresh: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r_success: 1000.0,
            r_failure: -30.0,
            zeta: 0.0,
            zeta_env: 0.0,
            r_env: 10.0,
            h_init: 200.0,
            h_init_env: 1.0,
            alpha: 25.0,
            beta: 0.8,
            gamma: 0.1,
            delta: 0.95,
            epsilon: 0.1,
            l_max: 4,
            t_thresh: 20,
            // 90 % success at the default rewards
            r_thresh: 897.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        check_range("zeta", self.zeta, 0.0, 1.0)?;
        check_range("zeta_env", self.zeta_env, 0.0, 1.0)?;
        check_range("beta", self.beta, 0.0, 1.0)?;
        for (name, v) in [
            ("h_init", self.h_init),
            ("h_init_env", self.h_init_env),
            ("r_env", self.r_env),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.l_max < 2 {
            return Err(Error::InvalidConfig(format!(
                "l_max must be >= 2, got {}",
                self.l_max
            )));
        }
        if self.t_thresh == 0 {
            return Err(Error::InvalidConfig("t_thresh must be positive".into()));
        }
        Ok(())
    }
}
