use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Training hyperparameters. Field names double as config-file keys and, with
/// `_` replaced by `-`, as CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Ridge weight on hinge coefficients.
    pub lambda: f64,
    /// Basis selections per PLA fit (threshold pairs in pairwise mode).
    pub k_basis: usize,
    /// Boosting step size.
    pub step: f64,
    /// Boosting rounds.
    pub rounds: usize,
    /// Blend weight on the previous shape in the projected update.
    pub alpha: f64,
    /// Threshold grid size per feature.
    pub grid_size: usize,
    pub pairwise: bool,
    pub standardize_target: bool,
    pub seed: u64,
    /// Continue from the current model when retraining instead of from zero.
    pub warm_start: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            k_basis: 7,
            step: 0.1,
            rounds: 100,
            alpha: 0.1,
            grid_size: 256,
            pairwise: true,
            standardize_target: true,
            seed: 0,
            warm_start: false,
        }
    }
}

impl TrainConfig {
    /// Settings for load forecasting: lighter ridge, fewer bases, smaller
    /// step, target left in its own units.
    pub fn load_forecasting() -> Self {
        Self {
            lambda: 0.1,
            k_basis: 5,
            step: 0.05,
            alpha: 0.1,
            standardize_target: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.k_basis == 0 {
            return bad("k_basis must be >= 1".into());
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be > 0, got {}", self.step));
        }
        if self.rounds == 0 {
            return bad("rounds must be >= 1".into());
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in [0, 1), got {}", self.alpha));
        }
        if self.grid_size == 0 {
            return bad("grid_size must be >= 1".into());
        }
        Ok(())
    }

    /// Sets one field from its textual value. Accepts `k_basis` or `k-basis`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::config(format!("{key}: '{v}' is not a number")))
        };
        let int = |v: &str| -> Result<u64> {
            v.parse::<u64>()
                .map_err(|_| Error::config(format!("{key}: '{v}' is not a non-negative integer")))
        };
        let flag = |v: &str| -> Result<bool> {
            match v {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(Error::config(format!("{key}: '{v}' is not a boolean"))),
            }
        };
        match key.as_str() {
            "lambda" => self.lambda = num(value)?,
            "k_basis" => self.k_basis = int(value)? as usize,
            "step" => self.step = num(value)?,
            "rounds" => self.rounds = int(value)? as usize,
            "alpha" => self.alpha = num(value)?,
            "grid_size" => self.grid_size = int(value)? as usize,
            "pairwise" => self.pairwise = flag(value)?,
            "standardize_target" => self.standardize_target = flag(value)?,
            "seed" => self.seed = int(value)?,
            "warm_start" => self.warm_start = flag(value)?,
            other => return Err(Error::config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("config line {}: expected 'key = value'", n + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::config(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Defaults overridden by a `key = value` document.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_kv(text)?;
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        format!(
            "lambda = {}\nk_basis = {}\nstep = {}\nrounds = {}\nalpha = {}\ngrid_size = {}\n\
             pairwise = {}\nstandardize_target = {}\nseed = {}\nwarm_start = {}\n",
            self.lambda,
            self.k_basis,
            self.step,
            self.rounds,
            self.alpha,
            self.grid_size,
            self.pairwise,
            self.standardize_target,
            self.seed,
            self.warm_start
        )
    }

    /// Short stable digest of the configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut c = TrainConfig::load_forecasting();
        c.rounds = 17;
        c.seed = 9;
        assert_eq!(TrainConfig::from_kv(&c.to_kv()).unwrap(), c);
    }

    #[test]
    fn kv_accepts_dashes_and_comments() {
        let c = TrainConfig::from_kv("# experiment\nk-basis = 3 # fewer\n\nlambda=0.5\n").unwrap();
        assert_eq!(c.k_basis, 3);
        assert_eq!(c.lambda, 0.5);
    }

    #[test]
    fn kv_errors() {
        assert!(TrainConfig::from_kv("bogus = 1").is_err());
        assert!(TrainConfig::from_kv("lambda").is_err());
        assert!(TrainConfig::from_kv("rounds = -3").is_err());
        assert!(TrainConfig::from_kv("pairwise = maybe").is_err());
    }

    #[test]
    fn validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig { lambda: -1.0, ..Default::default() },
            TrainConfig { k_basis: 0, ..Default::default() },
            TrainConfig { step: 0.0, ..Default::default() },
            TrainConfig { rounds: 0, ..Default::default() },
            TrainConfig { alpha: 1.0, ..Default::default() },
            TrainConfig { grid_size: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = TrainConfig::default();
        assert_eq!(a.hash(), TrainConfig::default().hash());
        assert_eq!(a.hash().len(), 16);
        let b = TrainConfig { seed: 1, ..Default::default() };
        assert_ne!(a.hash(), b.hash());
    }
}
