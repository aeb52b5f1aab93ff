use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{DabError, Result};

/// How negative weights produced by the shift are repaired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampMode {
    /// Zero the offending token and take the shortfall from the remaining
    /// tokens of the same image. Row sum and per-image target are exact.
    #[default]
    ClampRedistribute,
    /// Zero the offending token, then rescale the whole row to its original sum.
    ClampRenormalize,
}

/// Granularity at which image ratios are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// Every text-query row is balanced on its own ratios.
    #[default]
    PerRow,
    /// One ratio vector per (layer, head), averaged over text-query rows,
    /// drives a shared shift for all of that head's text rows.
    Aggregated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RebalanceConfig {
    /// Balancing coefficient: 0 leaves attention untouched, 1 equalizes images.
    pub alpha: f64,
    /// Rows (or heads) whose total visual ratio does not exceed `tau` are skipped.
    pub tau: f64,
    pub clamp_mode: ClampMode,
    pub scope: Scope,
}

impl Default for RebalanceConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            tau: 0.2,
            clamp_mode: ClampMode::default(),
            scope: Scope::default(),
        }
    }
}

impl RebalanceConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(DabError::Config(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(DabError::Config(format!(
                "tau must lie in [0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ClampMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClampMode::ClampRedistribute => "clamp-redistribute",
            ClampMode::ClampRenormalize => "clamp-renormalize",
        })
    }
}

impl FromStr for ClampMode {
    type Err = DabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp-redistribute" | "redistribute" => Ok(ClampMode::ClampRedistribute),
            "clamp-renormalize" | "renormalize" => Ok(ClampMode::ClampRenormalize),
            other => Err(DabError::Config(format!("unknown clamp mode `{other}`"))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::PerRow => "per-row",
            Scope::Aggregated => "aggregated",
        })
    }
}

impl FromStr for Scope {
    type Err = DabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-row" => Ok(Scope::PerRow),
            "aggregated" => Ok(Scope::Aggregated),
            other => Err(DabError::Config(format!("unknown scope `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RebalanceConfig::default();
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.tau, 0.2);
        assert_eq!(c.clamp_mode, ClampMode::ClampRedistribute);
        assert_eq!(c.scope, Scope::PerRow);
        c.validate().unwrap();
    }

    #[test]
    fn out_of_range_rejected() {
        for (alpha, tau) in [
            (-0.1, 0.2),
            (1.5, 0.2),
            (0.5, -1.0),
            (0.5, 2.0),
            (f64::NAN, 0.2),
        ] {
            let c = RebalanceConfig {
                alpha,
                tau,
                ..Default::default()
            };
            assert!(matches!(c.validate(), Err(DabError::Config(_))));
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [ClampMode::ClampRedistribute, ClampMode::ClampRenormalize] {
            assert_eq!(m.to_string().parse::<ClampMode>().unwrap(), m);
        }
        for s in [Scope::PerRow, Scope::Aggregated] {
            assert_eq!(s.to_string().parse::<Scope>().unwrap(), s);
        }
        assert!("sideways".parse::<Scope>().is_err());
    }
}
