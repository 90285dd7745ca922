//! Deterministic CSV emission. Every file starts with `#` comment lines
//! carrying the format version, the effective config, the seed, and the
//! scenario label, so re-running the same invocation reproduces the
//! bytes. Wall-clock timings are never written here; they go to the
//! separate (explicitly non-deterministic) timings file.

use std::io::Write;

use crate::error::{Error, Result};
use crate::optimizer::{GenerationTrace, OptimizerConfig};
use crate::shapley::{AllocationMethod, AllocationRow};

use super::report::CoalitionReport;
use super::{RunRow, StabilityResult, SweepResult};

pub const CSV_FORMAT: &str = "gridcoal-csv/v1";

/// Header metadata shared by all emitted CSVs.
#[derive(Debug, Clone)]
pub struct CsvMeta<'a> {
    pub kind: &'a str,
    pub config: &'a OptimizerConfig,
    pub scenario_label: &'a str,
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<csv output>", e)
}

fn write_header(
    w: &mut dyn Write,
    meta: &CsvMeta,
    extra: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "# format: {CSV_FORMAT} kind={}", meta.kind).map_err(io_err)?;
    writeln!(w, "# config: {}", meta.config.echo()).map_err(io_err)?;
    writeln!(w, "# seed: {}", meta.config.seed).map_err(io_err)?;
    writeln!(w, "# scenario: {}", meta.scenario_label).map_err(io_err)?;
    for (key, value) in extra {
        writeln!(w, "# {key}: {value}").map_err(io_err)?;
    }
    Ok(())
}

fn finish(writer: csv::Writer<&mut dyn Write>) -> Result<()> {
    writer.into_inner().map(|_| ()).map_err(|e| {
        io_err(std::io::Error::other(e.to_string()))
    })
}

/// trace.csv: one row per generation.
pub fn write_trace_csv(
    w: &mut dyn Write,
    meta: &CsvMeta,
    run_id: usize,
    trace: &[GenerationTrace],
) -> Result<()> {
    write_header(w, meta, &[])?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["run_id", "generation", "best", "mean", "diversity"])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    for t in trace {
        csv.write_record([
            run_id.to_string(),
            t.generation.to_string(),
            t.best_fitness.to_string(),
            t.mean_fitness.to_string(),
            t.diversity.to_string(),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

/// coalition.csv: one row per community member with inclusion flag and
/// battery levels before/after the simulated trade.
pub fn write_coalition_csv(
    w: &mut dyn Write,
    meta: &CsvMeta,
    report: &CoalitionReport,
) -> Result<()> {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    write_header(
        w,
        meta,
        &[(
            "pearson",
            format!(
                "energy_shapley={} cost_shapley={} energy_cost={}",
                fmt(report.pearson_energy_shapley),
                fmt(report.pearson_cost_shapley),
                fmt(report.pearson_energy_cost)
            ),
        )],
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "id",
        "included",
        "stored_kwh",
        "capacity_kwh",
        "remaining_cycles",
        "cycles_used",
        "stored_after_trade_kwh",
        "energy_contribution_kwh",
        "degradation_cost",
        "shapley_value",
    ])
    .map_err(|e| io_err(std::io::Error::other(e)))?;
    for row in &report.rows {
        csv.write_record([
            row.id.clone(),
            (row.included as u8).to_string(),
            row.stored_kwh.to_string(),
            row.capacity_kwh.to_string(),
            row.remaining_cycles.to_string(),
            row.cycles_used.to_string(),
            row.stored_after_trade_kwh.to_string(),
            row.energy_contribution_kwh.to_string(),
            row.degradation_cost.to_string(),
            fmt(row.shapley_value),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

/// allocation.csv: the per-member allocation table.
pub fn write_allocation_csv(
    w: &mut dyn Write,
    meta: &CsvMeta,
    method: AllocationMethod,
    game_total: f64,
    rows: &[AllocationRow],
) -> Result<()> {
    let method_text = match method {
        AllocationMethod::Exact => "exact".to_string(),
        AllocationMethod::Sampled {
            n_permutations,
            seed,
        } => format!("sampled permutations={n_permutations} sample_seed={seed}"),
    };
    write_header(
        w,
        meta,
        &[
            ("allocation_method", method_text),
            ("game_total", game_total.to_string()),
        ],
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "id",
        "energy_contribution_kwh",
        "degradation_cost",
        "shapley_value",
    ])
    .map_err(|e| io_err(std::io::Error::other(e)))?;
    for row in rows {
        csv.write_record([
            row.id.clone(),
            row.energy_contribution_kwh.to_string(),
            row.degradation_cost.to_string(),
            row.shapley_value.to_string(),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

/// runs.csv: per-run sweep results (deterministic columns only).
pub fn write_runs_csv(w: &mut dyn Write, meta: &CsvMeta, rows: &[RunRow]) -> Result<()> {
    write_header(w, meta, &[])?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "pop_size",
        "generations",
        "cooling_alpha",
        "repeat",
        "seed",
        "final_fitness",
        "raw_objective",
        "error",
    ])
    .map_err(|e| io_err(std::io::Error::other(e)))?;
    for row in rows {
        csv.write_record([
            row.pop_size.to_string(),
            row.generations.to_string(),
            row.cooling_alpha.to_string(),
            row.repeat.to_string(),
            row.seed.to_string(),
            row.final_fitness.map(|v| v.to_string()).unwrap_or_default(),
            row.raw_objective.map(|v| v.to_string()).unwrap_or_default(),
            row.error.clone().unwrap_or_default(),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

/// sweep_summary.csv: per-cell aggregates plus the per-axis Spearman
/// coefficients in the header.
pub fn write_sweep_summary_csv(
    w: &mut dyn Write,
    meta: &CsvMeta,
    result: &SweepResult,
) -> Result<()> {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    write_header(
        w,
        meta,
        &[(
            "spearman_vs_mean_raw_objective",
            format!(
                "pop_size={} generations={} cooling_alpha={}",
                fmt(result.spearman_pop_size),
                fmt(result.spearman_generations),
                fmt(result.spearman_cooling)
            ),
        )],
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "pop_size",
        "generations",
        "cooling_alpha",
        "successes",
        "failures",
        "mean_final_fitness",
        "std_final_fitness",
        "mean_raw_objective",
        "std_raw_objective",
    ])
    .map_err(|e| io_err(std::io::Error::other(e)))?;
    for cell in &result.cells {
        let present = |v: f64| {
            if cell.successes > 0 {
                v.to_string()
            } else {
                String::new()
            }
        };
        csv.write_record([
            cell.pop_size.to_string(),
            cell.generations.to_string(),
            cell.cooling_alpha.to_string(),
            cell.successes.to_string(),
            cell.failures.to_string(),
            present(cell.mean_final_fitness),
            present(cell.std_final_fitness),
            present(cell.mean_raw_objective),
            present(cell.std_raw_objective),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

/// timings.csv: wall-clock seconds per run. The one deliberately
/// non-deterministic output file.
pub fn write_timings_csv(w: &mut dyn Write, meta: &CsvMeta, rows: &[RunRow]) -> Result<()> {
    write_header(
        w,
        meta,
        &[("note", "wall-clock timings; not covered by the byte-identity contract".into())],
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "pop_size",
        "generations",
        "cooling_alpha",
        "repeat",
        "seed",
        "wall_time_s",
    ])
    .map_err(|e| io_err(std::io::Error::other(e)))?;
    for row in rows {
        csv.write_record([
            row.pop_size.to_string(),
            row.generations.to_string(),
            row.cooling_alpha.to_string(),
            row.repeat.to_string(),
            row.seed.to_string(),
            format!("{:.6}", row.wall_time.as_secs_f64()),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

/// stability_summary.csv: final objectives per seed plus the coefficient
/// of variation in the header.
pub fn write_stability_summary_csv(
    w: &mut dyn Write,
    meta: &CsvMeta,
    stability: &StabilityResult,
) -> Result<()> {
    write_header(
        w,
        meta,
        &[(
            "coefficient_of_variation",
            stability.coefficient_of_variation.to_string(),
        )],
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["run_id", "seed", "final_fitness", "raw_objective", "coalition_size"])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    for (i, run) in stability.runs.iter().enumerate() {
        csv.write_record([
            i.to_string(),
            run.seed.to_string(),
            run.best_fitness.to_string(),
            run.raw_objective.to_string(),
            run.best_coalition.len().to_string(),
        ])
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    }
    finish(csv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::GenerationTrace;

    #[test]
    fn trace_csv_is_deterministic_and_commented() {
        let cfg = OptimizerConfig::default();
        let meta = CsvMeta {
            kind: "trace",
            config: &cfg,
            scenario_label: "unit",
        };
        let trace = vec![GenerationTrace {
            generation: 0,
            best_fitness: 1.25,
            mean_fitness: 0.5,
            diversity: 0.125,
            best_raw_value: 3.0,
        }];
        let mut a = Vec::new();
        write_trace_csv(&mut a, &meta, 0, &trace).unwrap();
        let mut b = Vec::new();
        write_trace_csv(&mut b, &meta, 0, &trace).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(&format!("# format: {CSV_FORMAT} kind=trace")));
        assert!(text.contains("# seed: 42"));
        assert!(text.contains("0,0,1.25,0.5,0.125"));
    }
}
