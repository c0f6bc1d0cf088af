use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Parameters of a batch of trials at one `(L, p)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(rename = "L")]
    pub l: u32,
    pub p: f64,
    #[serde(rename = "T")]
    pub rounds: u32,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the default completion cap of `4 L (anyons + 1)` rounds.
    #[serde(default)]
    pub max_completion_rounds: Option<u32>,
}

fn default_trials() -> u64 {
    1
}

impl Config {
    pub fn new(l: u32, p: f64, rounds: u32) -> Self {
        Config {
            l,
            p,
            rounds,
            trials: 1,
            seed: 0,
            max_completion_rounds: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.l < 4 || self.l % 2 == 1 {
            return Err(ConfigError::LatticeSize(self.l));
        }
        if !(self.p >= 0.0 && 2.0 * self.p < 1.0) {
            return Err(ConfigError::ErrorRate(self.p));
        }
        if self.rounds == 0 {
            return Err(ConfigError::Rounds);
        }
        if self.trials == 0 {
            return Err(ConfigError::Trials);
        }
        Ok(())
    }

    pub fn completion_cap(&self, anyons: usize) -> u32 {
        self.max_completion_rounds
            .unwrap_or_else(|| 4 * self.l * (anyons as u32 + 1))
    }
}

/// SplitMix64 output function.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`: `mix64(master ^ mix64(index))`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Config::new(8, 0.05, 10).validate().is_ok());
        assert!(Config::new(8, 0.0, 1).validate().is_ok());
        assert_eq!(Config::new(5, 0.05, 10).validate(), Err(ConfigError::LatticeSize(5)));
        assert_eq!(Config::new(2, 0.05, 10).validate(), Err(ConfigError::LatticeSize(2)));
        assert_eq!(Config::new(8, 0.5, 10).validate(), Err(ConfigError::ErrorRate(0.5)));
        assert!(Config::new(8, f64::NAN, 10).validate().is_err());
        assert_eq!(Config::new(8, 0.1, 0).validate(), Err(ConfigError::Rounds));
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of SplitMix64 seeded with 0 are mix64(0), mix64(γ), ...
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn completion_cap_default() {
        assert_eq!(Config::new(8, 0.0, 1).completion_cap(2), 96);
    }
}
