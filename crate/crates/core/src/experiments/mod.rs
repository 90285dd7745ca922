//! The evaluation protocol: parameter sweeps over population size,
//! generation count, and cooling factor with repeated seeded runs,
//! multi-run stability studies, and memetic-vs-oracle verification.
//! Runs fan out in parallel with fully independent per-run seeds and a
//! deterministic ordered reduction.

mod output;
mod report;
mod stats;

pub use output::{
    write_allocation_csv, write_coalition_csv, write_runs_csv, write_stability_summary_csv,
    write_sweep_summary_csv, write_timings_csv, write_trace_csv, CsvMeta, CSV_FORMAT,
};
pub use report::{coalition_report, CoalitionReport, MemberReportRow};
pub use stats::{pearson, spearman};

use std::time::Duration;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{run, OptimizerConfig, RunResult};
use crate::oracle::{objective_of_flags, solve_exhaustive, OracleResult};
use crate::scenario::Scenario;

/// Sweep grid: the cartesian product of the three parameter axes, each
/// cell repeated with seeds `base_seed + repeat`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub pop_sizes: Vec<usize>,
    pub generation_counts: Vec<usize>,
    pub cooling_alphas: Vec<f64>,
    pub repeats: usize,
    pub base_config: OptimizerConfig,
    pub base_seed: u64,
}

/// One parameter axis of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PopSize,
    Generations,
    CoolingAlpha,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pop_sizes.is_empty()
            || self.generation_counts.is_empty()
            || self.cooling_alphas.is_empty()
        {
            return Err(Error::InvalidConfig("sweep axes must be nonempty".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("sweep repeats must be at least 1".into()));
        }
        Ok(())
    }

    /// Desk-scale default grid: 3 x 3 x 3 cells, 10 repeats each.
    pub fn reduced(base_config: OptimizerConfig, base_seed: u64) -> Self {
        SweepSpec {
            pop_sizes: vec![20, 100, 300],
            generation_counts: vec![20, 100, 300],
            cooling_alphas: vec![0.1, 0.5, 0.9],
            repeats: 10,
            base_config,
            base_seed,
        }
    }

    /// The full grid: [20, 300] step 10 on both counts, [0.1, 1.0] step
    /// 0.1 on the cooling factor, 50 repeats. The 1.0 cooling cells fail
    /// config validation and are recorded as per-cell failures.
    pub fn full(base_config: OptimizerConfig, base_seed: u64) -> Self {
        SweepSpec {
            pop_sizes: (20..=300).step_by(10).collect(),
            generation_counts: (20..=300).step_by(10).collect(),
            cooling_alphas: (1..=10).map(|i| i as f64 / 10.0).collect(),
            repeats: 50,
            base_config,
            base_seed,
        }
    }

    /// One-axis sweep with the other two parameters fixed at
    /// (pop 100, generations 100, cooling 0.5), 30 repeats.
    pub fn axis(axis: SweepAxis, base_config: OptimizerConfig, base_seed: u64) -> Self {
        let mut spec = SweepSpec {
            pop_sizes: vec![100],
            generation_counts: vec![100],
            cooling_alphas: vec![0.5],
            repeats: 30,
            base_config,
            base_seed,
        };
        match axis {
            SweepAxis::PopSize => spec.pop_sizes = vec![20, 90, 160, 230, 300],
            SweepAxis::Generations => spec.generation_counts = vec![20, 90, 160, 230, 300],
            SweepAxis::CoolingAlpha => spec.cooling_alphas = vec![0.1, 0.3, 0.5, 0.7, 0.9],
        }
        spec
    }

    fn cells(&self) -> Vec<(usize, usize, f64)> {
        let mut cells = Vec::new();
        for &pop in &self.pop_sizes {
            for &gens in &self.generation_counts {
                for &alpha in &self.cooling_alphas {
                    cells.push((pop, gens, alpha));
                }
            }
        }
        cells
    }
}

/// One optimizer run inside a sweep. A failed run (config rejected for
/// that cell) carries the error text instead of results.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub pop_size: usize,
    pub generations: usize,
    pub cooling_alpha: f64,
    pub repeat: usize,
    pub seed: u64,
    pub final_fitness: Option<f64>,
    pub raw_objective: Option<f64>,
    pub wall_time: Duration,
    pub error: Option<String>,
}

/// Aggregates of one sweep cell over its successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub pop_size: usize,
    pub generations: usize,
    pub cooling_alpha: f64,
    pub successes: usize,
    pub failures: usize,
    pub mean_final_fitness: f64,
    pub std_final_fitness: f64,
    pub mean_raw_objective: f64,
    pub std_raw_objective: f64,
    pub mean_wall_time_s: f64,
}

/// Sweep output: the raw per-run table, per-cell aggregates, and the
/// per-axis Spearman correlation of the axis value against the cell mean
/// raw objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<RunRow>,
    pub cells: Vec<SweepCell>,
    pub spearman_pop_size: Option<f64>,
    pub spearman_generations: Option<f64>,
    pub spearman_cooling: Option<f64>,
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let variance =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, variance.sqrt())
}

/// Runs the optimizer on every grid cell, `repeats` times each with
/// seeds `base_seed + repeat`. Deterministic given the spec; individual
/// run failures are recorded per cell and never abort the sweep.
pub fn sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize, f64, usize)> = cells
        .iter()
        .flat_map(|&(pop, gens, alpha)| {
            (0..spec.repeats).map(move |repeat| (pop, gens, alpha, repeat))
        })
        .collect();

    let rows: Vec<RunRow> = jobs
        .par_iter()
        .map(|&(pop_size, generations, cooling_alpha, repeat)| {
            let seed = spec.base_seed + repeat as u64;
            let cfg = OptimizerConfig {
                pop_size,
                generations,
                cooling_alpha,
                seed,
                ..spec.base_config.clone()
            };
            match run(scenario, &cfg) {
                Ok(result) => RunRow {
                    pop_size,
                    generations,
                    cooling_alpha,
                    repeat,
                    seed,
                    final_fitness: Some(result.best_fitness),
                    raw_objective: Some(result.raw_objective),
                    wall_time: result.wall_time,
                    error: None,
                },
                Err(e) => RunRow {
                    pop_size,
                    generations,
                    cooling_alpha,
                    repeat,
                    seed,
                    final_fitness: None,
                    raw_objective: None,
                    wall_time: Duration::ZERO,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let cells: Vec<SweepCell> = cells
        .iter()
        .map(|&(pop, gens, alpha)| {
            let cell_rows: Vec<&RunRow> = rows
                .iter()
                .filter(|r| {
                    r.pop_size == pop && r.generations == gens && r.cooling_alpha == alpha
                })
                .collect();
            let fitness: Vec<f64> = cell_rows.iter().filter_map(|r| r.final_fitness).collect();
            let raw: Vec<f64> = cell_rows.iter().filter_map(|r| r.raw_objective).collect();
            let wall: Vec<f64> = cell_rows
                .iter()
                .filter(|r| r.error.is_none())
                .map(|r| r.wall_time.as_secs_f64())
                .collect();
            let (mean_fitness, std_fitness) = mean_and_sample_std(&fitness);
            let (mean_raw, std_raw) = mean_and_sample_std(&raw);
            let (mean_wall, _) = mean_and_sample_std(&wall);
            SweepCell {
                pop_size: pop,
                generations: gens,
                cooling_alpha: alpha,
                successes: raw.len(),
                failures: cell_rows.len() - raw.len(),
                mean_final_fitness: mean_fitness,
                std_final_fitness: std_fitness,
                mean_raw_objective: mean_raw,
                std_raw_objective: std_raw,
                mean_wall_time_s: mean_wall,
            }
        })
        .collect();

    let axis_spearman = |axis_value: &dyn Fn(&SweepCell) -> f64| -> Option<f64> {
        let usable: Vec<&SweepCell> = cells.iter().filter(|c| c.successes > 0).collect();
        let x: Vec<f64> = usable.iter().map(|c| axis_value(c)).collect();
        let y: Vec<f64> = usable.iter().map(|c| c.mean_raw_objective).collect();
        spearman(&x, &y).ok()
    };

    Ok(SweepResult {
        spearman_pop_size: axis_spearman(&|c: &SweepCell| c.pop_size as f64),
        spearman_generations: axis_spearman(&|c: &SweepCell| c.generations as f64),
        spearman_cooling: axis_spearman(&|c: &SweepCell| c.cooling_alpha),
        rows,
        cells,
    })
}

/// Repeated runs from distinct seeds (`cfg.seed + i`) on one scenario.
#[derive(Debug, Clone)]
pub struct StabilityResult {
    pub seeds: Vec<u64>,
    pub runs: Vec<RunResult>,
    pub final_raw_objectives: Vec<f64>,
    /// Sample standard deviation of the final raw objectives over their
    /// absolute mean.
    pub coefficient_of_variation: f64,
}

pub fn stability_study(
    scenario: &Scenario,
    cfg: &OptimizerConfig,
    n_runs: usize,
) -> Result<StabilityResult> {
    if n_runs < 2 {
        return Err(Error::TooFewSamples { min: 2, got: n_runs });
    }
    cfg.validate()?;
    let seeds: Vec<u64> = (0..n_runs as u64).map(|i| cfg.seed + i).collect();
    let runs: Vec<RunResult> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = OptimizerConfig {
                seed,
                ..cfg.clone()
            };
            run(scenario, &cfg)
        })
        .collect::<Result<_>>()?;
    let final_raw_objectives: Vec<f64> = runs.iter().map(|r| r.raw_objective).collect();
    let (mean, std) = mean_and_sample_std(&final_raw_objectives);
    let coefficient_of_variation = if mean.abs() > 0.0 {
        std / mean.abs()
    } else if std > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(StabilityResult {
        seeds,
        runs,
        final_raw_objectives,
        coefficient_of_variation,
    })
}

/// Outcome of one seeded memetic run against the oracle optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Raw objective of the returned coalition, scored through the
    /// oracle's own arithmetic path.
    pub achieved: f64,
    /// Exact tie-objective match with the oracle optimum.
    pub hit: bool,
    pub relative_gap: f64,
}

/// Memetic-vs-oracle comparison over a set of seeds.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub oracle: OracleResult,
    pub outcomes: Vec<SeedOutcome>,
    pub hit_rate: f64,
}

pub fn verify_against_oracle(
    scenario: &Scenario,
    cfg: &OptimizerConfig,
    seeds: &[u64],
    oracle_limit: usize,
) -> Result<VerifyReport> {
    cfg.validate()?;
    let oracle = solve_exhaustive(scenario, cfg.penalty_rho, oracle_limit, 10)?;
    let optimum = oracle.best_objective;
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|&seed| -> Result<SeedOutcome> {
            let cfg = OptimizerConfig {
                seed,
                ..cfg.clone()
            };
            let result = run(scenario, &cfg)?;
            let achieved =
                objective_of_flags(scenario, &result.best_individual.flags, cfg.penalty_rho);
            Ok(SeedOutcome {
                seed,
                achieved,
                hit: achieved == optimum,
                relative_gap: (optimum - achieved) / optimum.abs().max(1e-12),
            })
        })
        .collect::<Result<_>>()?;
    let hits = outcomes.iter().filter(|o| o.hit).count();
    let hit_rate = hits as f64 / outcomes.len().max(1) as f64;
    Ok(VerifyReport {
        oracle,
        outcomes,
        hit_rate,
    })
}
