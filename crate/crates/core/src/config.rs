//! Optimizer-config files: the same versioned TOML family as scenarios.
//! Every field is optional; precedence is built-in defaults, then the
//! config file, then explicit overrides.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;

pub const CONFIG_FORMAT: &str = "gridcoal-config/v1";

/// Partial configuration, overlaid onto a base config.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub format: Option<String>,
    pub pop_size: Option<usize>,
    pub generations: Option<usize>,
    pub init_active_pct: Option<f64>,
    pub selection_pressure: Option<f64>,
    pub penalty_rho: Option<f64>,
    pub elite_pct: Option<f64>,
    pub t_initial: Option<f64>,
    pub t_min: Option<f64>,
    pub cooling_alpha: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigOverlay {
    pub fn from_toml(text: &str) -> Result<Self> {
        let overlay: ConfigOverlay = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config parse error: {e}")))?;
        if let Some(format) = &overlay.format {
            if format != CONFIG_FORMAT {
                return Err(Error::InvalidConfig(format!(
                    "unsupported config format `{format}` (expected `{CONFIG_FORMAT}`)"
                )));
            }
        }
        Ok(overlay)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidConfig(message) => Error::file_format(path, message),
            other => other,
        })
    }

    /// Applies this overlay on top of `base`. The result is not yet
    /// validated; callers validate after all overlays are applied.
    pub fn apply(&self, base: &OptimizerConfig) -> OptimizerConfig {
        OptimizerConfig {
            pop_size: self.pop_size.unwrap_or(base.pop_size),
            generations: self.generations.unwrap_or(base.generations),
            init_active_pct: self.init_active_pct.unwrap_or(base.init_active_pct),
            selection_pressure: self.selection_pressure.unwrap_or(base.selection_pressure),
            penalty_rho: self.penalty_rho.unwrap_or(base.penalty_rho),
            elite_pct: self.elite_pct.unwrap_or(base.elite_pct),
            t_initial: self.t_initial.unwrap_or(base.t_initial),
            t_min: self.t_min.unwrap_or(base.t_min),
            cooling_alpha: self.cooling_alpha.unwrap_or(base.cooling_alpha),
            seed: self.seed.unwrap_or(base.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_keeps_unset_fields() {
        let overlay = ConfigOverlay::from_toml("pop_size = 80\ncooling_alpha = 0.7\n").unwrap();
        let cfg = overlay.apply(&OptimizerConfig::default());
        assert_eq!(cfg.pop_size, 80);
        assert_eq!(cfg.cooling_alpha, 0.7);
        assert_eq!(cfg.generations, 150);
        assert_eq!(cfg.penalty_rho, 0.5);
    }

    #[test]
    fn format_tag_is_checked_when_present() {
        assert!(ConfigOverlay::from_toml("format = \"gridcoal-config/v1\"\n").is_ok());
        assert!(ConfigOverlay::from_toml("format = \"other/v2\"\n").is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ConfigOverlay::from_toml("popsize = 80\n").is_err());
    }
}
