//! Shared plumbing: config assembly with defaults < config file < flags
//! precedence, and output-file helpers.

use std::path::{Path, PathBuf};

use clap::Args;
use gridcoal::{ConfigOverlay, Error, OptimizerConfig, Result};

/// Optimizer flags shared by every run-producing subcommand. Flags win
/// over the config file, which wins over built-in defaults.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Optimizer config file (TOML, gridcoal-config/v1).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, value_name = "N")]
    pub pop_size: Option<usize>,

    #[arg(long, value_name = "N")]
    pub generations: Option<usize>,

    /// Percentage of flags initially active.
    #[arg(long, value_name = "PCT")]
    pub init_active_pct: Option<f64>,

    /// Rank-selection pressure in (0, 1].
    #[arg(long, value_name = "P")]
    pub selection_pressure: Option<f64>,

    /// Market-imbalance penalty severity.
    #[arg(long = "rho", value_name = "RHO")]
    pub penalty_rho: Option<f64>,

    /// Percentage of the population refined by annealing.
    #[arg(long, value_name = "PCT")]
    pub elite_pct: Option<f64>,

    #[arg(long, value_name = "T")]
    pub t_initial: Option<f64>,

    #[arg(long, value_name = "T")]
    pub t_min: Option<f64>,

    #[arg(long, value_name = "ALPHA")]
    pub cooling_alpha: Option<f64>,

    /// Seed for all run randomness.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    /// Resolves the effective config: defaults, then the config file,
    /// then explicit flags. Validates the result.
    pub fn resolve(&self) -> Result<OptimizerConfig> {
        let mut cfg = OptimizerConfig::default();
        if let Some(path) = &self.config {
            cfg = ConfigOverlay::from_path(path)?.apply(&cfg);
        }
        let flags = ConfigOverlay {
            format: None,
            pop_size: self.pop_size,
            generations: self.generations,
            init_active_pct: self.init_active_pct,
            selection_pressure: self.selection_pressure,
            penalty_rho: self.penalty_rho,
            elite_pct: self.elite_pct,
            t_initial: self.t_initial,
            t_min: self.t_min,
            cooling_alpha: self.cooling_alpha,
            seed: self.seed,
        };
        let cfg = flags.apply(&cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Creates the output directory (if needed) and returns a file path in
/// it.
pub fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(dir.join(name))
}

/// Writes a CSV produced by an emitter closure to a file.
pub fn write_csv_file<F>(path: &Path, emit: F) -> Result<()>
where
    F: FnOnce(&mut dyn std::io::Write) -> Result<()>,
{
    let mut buffer: Vec<u8> = Vec::new();
    emit(&mut buffer)?;
    std::fs::write(path, buffer).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
