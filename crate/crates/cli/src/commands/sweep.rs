use std::path::PathBuf;

use clap::Args;
use gridcoal::experiments::{
    write_runs_csv, write_sweep_summary_csv, write_timings_csv, CsvMeta,
};
use gridcoal::{read_scenario, sweep, Error, Result, SweepAxis, SweepSpec};

use crate::common::{out_file, write_csv_file, ConfigArgs};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,

    /// Grid preset: `reduced` (3x3x3, 10 repeats) or `full`
    /// ([20,300] step 10 on both counts, [0.1,1.0] step 0.1, 50
    /// repeats; hours of compute).
    #[arg(long, value_name = "PRESET", conflicts_with = "axis")]
    pub grid: Option<String>,

    /// Single-axis sweep (pop | gen | cooling) with the other two
    /// parameters fixed at 100/100/0.5.
    #[arg(long, value_name = "AXIS")]
    pub axis: Option<String>,

    /// Override the repeats per cell.
    #[arg(long, value_name = "N")]
    pub repeats: Option<usize>,

    /// Base seed; run r of every cell uses base_seed + r.
    #[arg(long, default_value_t = 1)]
    pub base_seed: u64,

    /// Directory for runs.csv, sweep_summary.csv, and timings.csv.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn execute(args: &SweepArgs, verbose: bool) -> Result<()> {
    let scenario = read_scenario(&args.scenario)?;
    let base_config = args.config.resolve()?;

    let mut spec = match (&args.grid, &args.axis) {
        (Some(grid), None) => match grid.as_str() {
            "reduced" => SweepSpec::reduced(base_config.clone(), args.base_seed),
            "full" => SweepSpec::full(base_config.clone(), args.base_seed),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "--grid must be `reduced` or `full`, got `{other}`"
                )))
            }
        },
        (None, Some(axis)) => {
            let axis = match axis.as_str() {
                "pop" => SweepAxis::PopSize,
                "gen" => SweepAxis::Generations,
                "cooling" => SweepAxis::CoolingAlpha,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "--axis must be pop, gen, or cooling, got `{other}`"
                    )))
                }
            };
            SweepSpec::axis(axis, base_config.clone(), args.base_seed)
        }
        (None, None) => SweepSpec::reduced(base_config.clone(), args.base_seed),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with forbids this"),
    };
    if let Some(repeats) = args.repeats {
        spec.repeats = repeats;
    }

    let cell_count = spec.pop_sizes.len() * spec.generation_counts.len() * spec.cooling_alphas.len();
    if verbose {
        println!(
            "sweeping {cell_count} cells x {} repeats = {} runs",
            spec.repeats,
            cell_count * spec.repeats
        );
    }
    let result = sweep(&scenario, &spec)?;

    let meta = CsvMeta {
        kind: "sweep",
        config: &base_config,
        scenario_label: &scenario.label,
    };
    write_csv_file(&out_file(&args.out_dir, "runs.csv")?, |w| {
        write_runs_csv(w, &meta, &result.rows)
    })?;
    write_csv_file(&out_file(&args.out_dir, "sweep_summary.csv")?, |w| {
        write_sweep_summary_csv(w, &meta, &result)
    })?;
    write_csv_file(&out_file(&args.out_dir, "timings.csv")?, |w| {
        write_timings_csv(w, &meta, &result.rows)
    })?;

    let failures: usize = result.cells.iter().map(|c| c.failures).sum();
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
    println!(
        "{} runs over {cell_count} cells ({failures} failures) | spearman vs mean raw objective: pop_size {} generations {} cooling {} | outputs in {}",
        result.rows.len(),
        fmt(result.spearman_pop_size),
        fmt(result.spearman_generations),
        fmt(result.spearman_cooling),
        args.out_dir.display(),
    );
    Ok(())
}
